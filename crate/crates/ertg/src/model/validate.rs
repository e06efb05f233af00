use std::collections::BTreeSet;

use num::traits::{One, Zero};
use serde::Serialize;

use crate::clockalg::Region;
use crate::rat::{self, Rat};

use super::{Player, Ptga};

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: String,
    pub context: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, code: &str, context: String, message: String) {
        self.errors.push(Diagnostic {
            code: code.to_string(),
            context,
            message,
        });
    }

    fn warn(&mut self, code: &str, context: String, message: String) {
        self.warnings.push(Diagnostic {
            code: code.to_string(),
            context,
            message,
        });
    }
}

pub fn validate(model: &Ptga) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = model.n_clocks();
    let k = model.bound();

    // Disjoint player action sets, by action name.
    let min_names: BTreeSet<&str> = model
        .actions
        .iter()
        .filter(|a| a.owner == Player::Min)
        .map(|a| a.name.as_str())
        .collect();
    let max_names: BTreeSet<&str> = model
        .actions
        .iter()
        .filter(|a| a.owner == Player::Max)
        .map(|a| a.name.as_str())
        .collect();
    for name in min_names.intersection(&max_names) {
        report.error(
            "player-action-overlap",
            format!("action {name}"),
            format!("action `{name}` is controlled by both players"),
        );
    }

    // Constraint constants must respect the bound K.
    for loc in &model.locations {
        if let Err(e) = loc.invariant.check_bounds(n, k) {
            report.error(
                "constraint-out-of-bound",
                format!("location {}", loc.name),
                e.to_string(),
            );
        }
    }
    for edge in &model.edges {
        let ctx = format!(
            "edge ({}, {})",
            model.location_name(edge.source),
            model.action_name(edge.action)
        );
        if let Err(e) = edge.guard.check_bounds(n, k) {
            report.error("constraint-out-of-bound", ctx.clone(), e.to_string());
        }
        if edge.branches.is_empty() {
            report.error(
                "empty-distribution",
                ctx.clone(),
                "edge has no branches".to_string(),
            );
            continue;
        }
        let mut sum = Rat::zero();
        let mut positive = true;
        for b in &edge.branches {
            if b.prob <= Rat::zero() {
                positive = false;
            }
            sum += b.prob.clone();
        }
        if !positive {
            report.error(
                "nonpositive-probability",
                ctx.clone(),
                "every branch probability must be positive".to_string(),
            );
        }
        if !sum.is_one() {
            report.error(
                "distribution-not-stochastic",
                ctx.clone(),
                format!("branch probabilities sum to {}", rat::display(&sum)),
            );
        }
    }

    if report.errors.iter().any(|d| d.code == "constraint-out-of-bound") {
        // Zone construction below would panic on out-of-bound constants.
        return report;
    }

    availability_checks(model, &mut report);

    // Initial configuration must satisfy its invariant.
    if let Some(init) = &model.init {
        let inv = model.invariant_zone(init.location);
        if !inv.contains_valuation(&init.valuation) {
            report.error(
                "init-violates-invariant",
                format!("location {}", model.location_name(init.location)),
                "initial valuation does not satisfy the location invariant".to_string(),
            );
        }
    }

    report
}

/// Checks that configurations always have a timed action available.
///
/// The per-location check is conservative: a location is an error only when
/// no action is enabled anywhere inside its invariant. The finer per-region
/// pass reports dead regions (reachable only for particular entry
/// valuations) as warnings.
fn availability_checks(model: &Ptga, report: &mut ValidationReport) {
    let n = model.n_clocks();
    let k = model.bound();
    for (li, loc) in model.locations.iter().enumerate() {
        let l = super::LocationId(li as u32);
        let inv = model.invariant_zone(l);
        if inv.is_empty() {
            report.warn(
                "empty-invariant",
                format!("location {}", loc.name),
                "invariant is unsatisfiable; location is unreachable".to_string(),
            );
            continue;
        }
        let mut any_enabled = false;
        for edge in model.edges_from(l) {
            let guard = model.guard_zone(edge);
            if guard.intersect(&inv).is_empty() {
                report.warn(
                    "edge-never-enabled",
                    format!(
                        "edge ({}, {})",
                        loc.name,
                        model.action_name(edge.action)
                    ),
                    "guard is disjoint from the location invariant".to_string(),
                );
            } else {
                any_enabled = true;
            }
        }
        if !any_enabled {
            report.error(
                "location-dead",
                format!("location {}", loc.name),
                "no action of either player is ever enabled here".to_string(),
            );
            continue;
        }
        // Per-region dead-end detection (warning level): from some regions
        // inside the invariant, no future region within the invariant
        // enables any action.
        if n <= 3 && k <= 4 {
            let guards: Vec<_> = model
                .edges_from(l)
                .map(|e| model.guard_zone(e))
                .collect();
            for region in Region::enumerate_all(n, k) {
                let rz = region.to_zone();
                if !rz.included_in(&inv) {
                    continue;
                }
                let mut alive = false;
                let mut cur = Some(region.clone());
                let mut span = rz.clone();
                while let Some(r) = cur {
                    span = span.hull(&r.to_zone());
                    if !span.included_in(&inv) {
                        break;
                    }
                    if guards.iter().any(|g| r.to_zone().included_in(g)) {
                        alive = true;
                        break;
                    }
                    cur = r.time_successor();
                }
                if !alive {
                    report.warn(
                        "region-dead-end",
                        format!("location {}", loc.name),
                        format!(
                            "no action available from region {}",
                            region.render(&model.clocks)
                        ),
                    );
                    break;
                }
            }
        }
    }
}
