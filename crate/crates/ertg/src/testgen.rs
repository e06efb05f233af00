//! Random generators for property tests and calibration studies: small
//! well-formed PTGAs that pass validation and the structural non-Zenoness
//! check by construction, random valuations, and random quasi-simple
//! function trees.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use crate::clockalg::{ClockConstraint, ClockId, ClockValuation, Clocks};
use crate::model::{Action, Branch, Configuration, EdgeDef, Location, LocationId, Player, Ptga};
use crate::qsf::Qsf;
use crate::rat::{self, Rat};

#[derive(Debug, Clone)]
pub struct ModelGenConfig {
    pub max_locations: usize,
    pub bound: u32,
    pub backward_edge_prob: f64,
    pub extra_edge_prob: f64,
}

impl Default for ModelGenConfig {
    fn default() -> Self {
        ModelGenConfig {
            max_locations: 4,
            bound: 2,
            backward_edge_prob: 0.5,
            extra_edge_prob: 0.6,
        }
    }
}

/// A random two-clock PTGA over locations `l0 … l{m−1}` with `l{m−1}` the
/// target.
///
/// Shape guarantees, so that every sample is usable without rejection:
/// every non-target location has a guard-free edge (no configuration is
/// ever stuck), every branch into the target resets all clocks, the target
/// has a rearm loop guarded `x ≥ 1` resetting everything, and every
/// backward edge is guarded `x ≥ 1` with all branches resetting all
/// clocks, so every cycle both resets and lower-bounds a clock.
pub fn random_model(rng: &mut impl Rng, cfg: &ModelGenConfig) -> Ptga {
    let m = rng.gen_range(2..=cfg.max_locations.max(2));
    let bound = cfg.bound.max(1);
    let clocks = Clocks::new(vec!["x".into(), "y".into()], bound);
    let target = LocationId((m - 1) as u32);
    let all: BTreeSet<ClockId> = clocks.ids().collect();

    let locations: Vec<Location> = (0..m)
        .map(|i| Location {
            name: format!("l{i}"),
            invariant: ClockConstraint::truth(),
        })
        .collect();

    let mut actions: Vec<Action> = Vec::new();
    let mut edges: Vec<EdgeDef> = Vec::new();
    let new_action = |actions: &mut Vec<Action>, name: String, owner: Player| {
        actions.push(Action { name, owner });
        crate::model::ActionId((actions.len() - 1) as u32)
    };

    let owner_pool = [Player::Min, Player::Min, Player::Max];
    let prob_rows: [&[(i64, i64)]; 4] = [
        &[(1, 1)],
        &[(1, 2), (1, 2)],
        &[(1, 3), (2, 3)],
        &[(1, 4), (3, 4)],
    ];
    let guard_pool = ["true", "x>=1", "y>=1", "x=1", "x<=1", "y>=1 & x>=1"];

    for i in 0..(m - 1) {
        let source = LocationId(i as u32);
        let n_edges = 1 + usize::from(rng.gen_bool(cfg.extra_edge_prob));
        for e in 0..n_edges {
            let owner = owner_pool[rng.gen_range(0..owner_pool.len())];
            let action = new_action(&mut actions, format!("a{i}_{e}"), owner);
            let guard = if e == 0 {
                ClockConstraint::truth()
            } else {
                ClockConstraint::parse(guard_pool[rng.gen_range(0..guard_pool.len())], &clocks)
                    .expect("pool guards parse")
            };
            let row = prob_rows[rng.gen_range(0..prob_rows.len())];
            let branches = row
                .iter()
                .map(|&(p, q)| {
                    let tgt = LocationId(rng.gen_range((i + 1)..m) as u32);
                    let resets = if tgt == target {
                        all.clone()
                    } else {
                        random_reset_set(rng, &clocks)
                    };
                    Branch {
                        prob: rat::ratio(p, q),
                        resets,
                        target: tgt,
                    }
                })
                .collect();
            edges.push(EdgeDef {
                source,
                action,
                guard,
                branches,
            });
        }
        if rng.gen_bool(cfg.backward_edge_prob) {
            let owner = owner_pool[rng.gen_range(0..owner_pool.len())];
            let action = new_action(&mut actions, format!("b{i}"), owner);
            let row = prob_rows[rng.gen_range(0..prob_rows.len())];
            let branches = row
                .iter()
                .map(|&(p, q)| Branch {
                    prob: rat::ratio(p, q),
                    resets: all.clone(),
                    target: LocationId(rng.gen_range(0..=i) as u32),
                })
                .collect();
            edges.push(EdgeDef {
                source,
                action,
                guard: ClockConstraint::parse("x>=1", &clocks).expect("guard parses"),
                branches,
            });
        }
    }
    // Rearm loop on the target.
    let rearm = new_action(&mut actions, "rearm".into(), Player::Min);
    edges.push(EdgeDef {
        source: target,
        action: rearm,
        guard: ClockConstraint::parse("x>=1", &clocks).expect("guard parses"),
        branches: vec![Branch {
            prob: rat::int(1),
            resets: all,
            target,
        }],
    });

    let n_clocks = clocks.len();
    Ptga {
        clocks,
        locations,
        actions,
        edges,
        targets: [target].into_iter().collect(),
        init: Some(Configuration {
            location: LocationId(0),
            valuation: ClockValuation::zero(n_clocks, bound),
        }),
    }
}

fn random_reset_set(rng: &mut impl Rng, clocks: &Arc<Clocks>) -> BTreeSet<ClockId> {
    clocks.ids().filter(|_| rng.gen_bool(0.5)).collect()
}

/// A random valuation with denominators from a small pool, exact.
pub fn random_valuation(rng: &mut impl Rng, n_clocks: usize, bound: u32) -> ClockValuation {
    let denoms = [1i64, 2, 3, 4, 5, 7, 10];
    let vals: Vec<Rat> = (0..n_clocks)
        .map(|_| {
            let q = denoms[rng.gen_range(0..denoms.len())];
            let p = rng.gen_range(0..=(bound as i64) * q);
            rat::ratio(p, q)
        })
        .collect();
    ClockValuation::new(vals, bound).expect("within bounds")
}

/// A random quasi-simple function tree of bounded depth over the given
/// clock count; constants and offsets stay within `[0, 2K]`.
pub fn random_qsf(rng: &mut impl Rng, n_clocks: usize, bound: u32, depth: usize) -> Qsf {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_leaf(rng, n_clocks, bound);
    }
    match rng.gen_range(0..3) {
        0 | 1 => {
            let n = rng.gen_range(1..=3);
            let children: Vec<Qsf> = (0..n)
                .map(|_| random_qsf(rng, n_clocks, bound, depth - 1))
                .collect();
            if rng.gen_bool(0.5) {
                Qsf::Min(children)
            } else {
                Qsf::Max(children)
            }
        }
        _ => {
            let rows: [&[(i64, i64)]; 3] = [
                &[(1, 2), (1, 2)],
                &[(1, 3), (2, 3)],
                &[(1, 4), (1, 4), (1, 2)],
            ];
            let row = rows[rng.gen_range(0..rows.len())];
            Qsf::convex(
                row.iter()
                    .map(|&(p, q)| {
                        (
                            rat::ratio(p, q),
                            random_qsf(rng, n_clocks, bound, depth - 1),
                        )
                    })
                    .collect(),
            )
            .expect("pool weights sum to one")
        }
    }
}

fn random_leaf(rng: &mut impl Rng, n_clocks: usize, bound: u32) -> Qsf {
    let denoms = [1i64, 2, 3, 4];
    let q = denoms[rng.gen_range(0..denoms.len())];
    let e = rat::ratio(rng.gen_range(0..=2 * (bound as i64) * q), q);
    if rng.gen_bool(0.4) {
        Qsf::constant(e)
    } else {
        // Keep the offset at least K so values stay nonnegative on the box.
        let offset = e + rat::int(bound as i64);
        Qsf::linear(offset, ClockId(rng.gen_range(0..n_clocks) as u32))
    }
}
