//! Parser, serializer, validation, and non-Zenoness checks on the shipped
//! models and hand-built counterparts.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use ertg::clockalg::{ClockConstraint, ClockId, ClockValuation, Clocks};
use ertg::model::{
    Action, Branch, Configuration, EdgeDef, Location, LocationId, Player, Ptga, ZenoCheck,
};
use ertg::parser::{parse_model, serialize_model};
use ertg::rat::ratio;

fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

pub fn load_model(name: &str) -> Ptga {
    let text = std::fs::read_to_string(model_path(name)).expect("model file readable");
    parse_model(&text).expect("shipped model parses")
}

/// Hand-built version of `two_clock_game.ptga`.
fn build_two_clock_game() -> Ptga {
    let clocks = Clocks::new(vec!["x".into(), "y".into()], 2);
    let g = |s: &str| ClockConstraint::parse(s, &clocks).unwrap();
    let x = ClockId(0);
    let y = ClockId(1);
    let set = |ids: &[ClockId]| -> BTreeSet<ClockId> { ids.iter().copied().collect() };
    let l = |i: u32| LocationId(i);
    let a = |i: u32| ertg::model::ActionId(i);

    Ptga {
        clocks: Arc::clone(&clocks),
        locations: vec![
            Location {
                name: "l0".into(),
                invariant: g("x<=2 & y<=2"),
            },
            Location {
                name: "l1".into(),
                invariant: g("y<=2 & x<=2"),
            },
            Location {
                name: "l2".into(),
                invariant: ClockConstraint::truth(),
            },
        ],
        actions: vec![
            Action {
                name: "b".into(),
                owner: Player::Min,
            },
            Action {
                name: "a".into(),
                owner: Player::Min,
            },
            Action {
                name: "c".into(),
                owner: Player::Max,
            },
            Action {
                name: "d".into(),
                owner: Player::Min,
            },
        ],
        edges: vec![
            EdgeDef {
                source: l(0),
                action: a(0),
                guard: g("x>1"),
                branches: vec![
                    Branch {
                        prob: ratio(1, 2),
                        resets: set(&[x]),
                        target: l(1),
                    },
                    Branch {
                        prob: ratio(1, 2),
                        resets: set(&[x, y]),
                        target: l(2),
                    },
                ],
            },
            EdgeDef {
                source: l(0),
                action: a(1),
                guard: g("x=2"),
                branches: vec![Branch {
                    prob: ratio(1, 1),
                    resets: set(&[x, y]),
                    target: l(2),
                }],
            },
            EdgeDef {
                source: l(1),
                action: a(1),
                guard: g("y>1"),
                branches: vec![Branch {
                    prob: ratio(1, 1),
                    resets: set(&[x, y]),
                    target: l(2),
                }],
            },
            EdgeDef {
                source: l(1),
                action: a(2),
                guard: g("y>1"),
                branches: vec![
                    Branch {
                        prob: ratio(1, 5),
                        resets: set(&[y]),
                        target: l(0),
                    },
                    Branch {
                        prob: ratio(4, 5),
                        resets: set(&[x, y]),
                        target: l(2),
                    },
                ],
            },
            EdgeDef {
                source: l(2),
                action: a(3),
                guard: g("x>=2 & y>=2"),
                branches: vec![Branch {
                    prob: ratio(1, 1),
                    resets: set(&[x, y]),
                    target: l(2),
                }],
            },
        ],
        targets: [l(2)].into_iter().collect(),
        init: Some(Configuration {
            location: l(0),
            valuation: ClockValuation::zero(2, 2),
        }),
    }
}

#[test]
fn two_clock_game_matches_hand_built_fixture() {
    assert_eq!(load_model("two_clock_game.ptga"), build_two_clock_game());
}

#[test]
fn shipped_models_validate_cleanly() {
    for name in ["two_clock_game.ptga", "undetermined.ptga", "wait_or_flip.ptga"] {
        let m = load_model(name);
        let report = m.validate();
        assert!(
            report.errors.is_empty(),
            "{name} should have no validation errors, got {:?}",
            report.errors
        );
    }
}

#[test]
fn minimal_model_parses_and_validates() {
    let m = parse_model(
        "clocks t; bound 1;\n\
         location start { }\n\
         location goal { }\n\
         edge min go from start { 1 -> goal }\n\
         edge min hold from goal guard t>=1 { 1 reset t -> goal }\n\
         target goal;",
    )
    .unwrap();
    assert!(m.validate().accepted());
    assert!(m.check_structural_non_zeno().is_non_zeno());
}

#[test]
fn non_stochastic_row_is_a_validation_error_not_a_parse_error() {
    let m = parse_model(
        "clocks t; bound 1;\n\
         location s { }\n\
         location goal { }\n\
         edge min go from s { 0.5 -> goal; 0.6 -> goal }\n\
         edge min hold from goal guard t>=1 { 1 reset t -> goal }\n\
         target goal;",
    )
    .unwrap();
    let report = m.validate();
    assert!(!report.accepted());
    assert!(report
        .errors
        .iter()
        .any(|d| d.code == "distribution-not-stochastic"));
}

#[test]
fn player_action_overlap_is_reported() {
    let m = parse_model(
        "clocks t; bound 1;\n\
         location s { }\n\
         edge min go from s { 1 -> s }\n\
         edge max go from s { 1 -> s }\n\
         target s;",
    )
    .unwrap();
    let report = m.validate();
    assert!(report
        .errors
        .iter()
        .any(|d| d.code == "player-action-overlap"));
}

#[test]
fn constraint_constants_above_bound_rejected_by_validate() {
    let m = parse_model(
        "clocks t; bound 1;\n\
         location s { inv t<=1 }\n\
         location goal { }\n\
         edge min go from s guard t>=1 { 1 -> goal }\n\
         edge min hold from goal guard t>=1 { 1 reset t -> goal }\n\
         target goal;",
    );
    assert!(m.is_ok());
    let bad = parse_model(
        "clocks t; bound 1;\n\
         location s { inv t<=5 }\n\
         location goal { }\n\
         edge min go from s { 1 -> goal }\n\
         target goal;",
    )
    .unwrap();
    assert!(bad
        .validate()
        .errors
        .iter()
        .any(|d| d.code == "constraint-out-of-bound"));
}

#[test]
fn parse_errors_carry_positions() {
    let err = parse_model("clocks x; bound 2;\nlocation l0 { inv x <= }").unwrap_err();
    assert_eq!(err.line, 2);
    assert!(err.col > 0);

    let err = parse_model("clocks x; bound 2;\nlocation l0 { }\nlocation l0 { }").unwrap_err();
    assert_eq!(err.line, 3);
    assert!(err.message.contains("duplicate location"));

    let err = parse_model("clocks x x; bound 2;").unwrap_err();
    assert!(err.message.contains("duplicate clock"));
}

#[test]
fn round_trip_identity_on_shipped_models() {
    for name in ["two_clock_game.ptga", "undetermined.ptga", "wait_or_flip.ptga"] {
        let m = load_model(name);
        let text = serialize_model(&m);
        let m2 = parse_model(&text).expect("serialized model parses");
        assert_eq!(m, m2, "round trip changed {name}");
        // Determinism: byte-identical on repeated serialization.
        assert_eq!(text, serialize_model(&m2));
    }
}

#[test]
fn structural_non_zeno_verdicts() {
    assert!(load_model("undetermined.ptga")
        .check_structural_non_zeno()
        .is_non_zeno());
    assert!(load_model("wait_or_flip.ptga")
        .check_structural_non_zeno()
        .is_non_zeno());
    assert!(load_model("two_clock_game.ptga")
        .check_structural_non_zeno()
        .is_non_zeno());

    // A guardless no-reset self-loop is Zeno by construction.
    let zeno = parse_model(
        "clocks t; bound 1;\n\
         location s { }\n\
         edge min spin from s { 1 -> s }\n\
         target s;",
    )
    .unwrap();
    match zeno.check_structural_non_zeno() {
        ZenoCheck::PossiblyZeno(witness) => {
            assert_eq!(witness.cycle.len(), 1);
            assert_eq!(witness.cycle[0].0, LocationId(0));
        }
        ZenoCheck::StructurallyNonZeno => panic!("self-loop must be flagged"),
    }
}

/// Oracle for the non-Zenoness check: enumerate elementary cycles of the
/// branch graph by DFS and test each one directly.
mod nonzeno_oracle {
    use super::*;

    #[derive(Clone)]
    struct Edge {
        from: usize,
        to: usize,
        resets: BTreeSet<ClockId>,
        lower: BTreeSet<ClockId>,
    }

    fn edges(m: &Ptga) -> Vec<Edge> {
        let mut out = Vec::new();
        for e in &m.edges {
            let guard = m.guard_zone(e);
            let mut lower = BTreeSet::new();
            for c in m.clocks.ids() {
                let ge1 = ertg::clockalg::Zone::from_constraint(
                    &ClockConstraint::parse(
                        &format!("{}>=1", m.clocks.name(c)),
                        &m.clocks,
                    )
                    .unwrap(),
                    m.n_clocks(),
                    m.bound(),
                )
                .unwrap();
                if guard.included_in(&ge1) {
                    lower.insert(c);
                }
            }
            for b in &e.branches {
                out.push(Edge {
                    from: e.source.index(),
                    to: b.target.index(),
                    resets: b.resets.clone(),
                    lower: lower.clone(),
                });
            }
        }
        out
    }

    fn cycles(n: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
        // All elementary cycles by rooted DFS; fine for tiny graphs.
        let mut found = Vec::new();
        for root in 0..n {
            let mut path: Vec<usize> = Vec::new();
            let mut on_path = vec![false; n];
            fn go(
                v: usize,
                root: usize,
                edges: &[Edge],
                path: &mut Vec<usize>,
                on_path: &mut Vec<bool>,
                found: &mut Vec<Vec<usize>>,
            ) {
                for (ei, e) in edges.iter().enumerate() {
                    if e.from != v {
                        continue;
                    }
                    if e.to == root {
                        let mut cycle = path.clone();
                        cycle.push(ei);
                        found.push(cycle);
                    } else if e.to > root && !on_path[e.to] {
                        on_path[e.to] = true;
                        path.push(ei);
                        go(e.to, root, edges, path, on_path, found);
                        path.pop();
                        on_path[e.to] = false;
                    }
                }
            }
            on_path[root] = true;
            go(root, root, edges, &mut path, &mut on_path, &mut found);
        }
        found
    }

    pub fn non_zeno(m: &Ptga) -> bool {
        let es = edges(m);
        for cycle in cycles(m.locations.len(), &es) {
            let resets: BTreeSet<ClockId> = cycle
                .iter()
                .flat_map(|&ei| es[ei].resets.iter().copied())
                .collect();
            let lowers: BTreeSet<ClockId> = cycle
                .iter()
                .flat_map(|&ei| es[ei].lower.iter().copied())
                .collect();
            if resets.intersection(&lowers).next().is_none() {
                return false;
            }
        }
        true
    }
}

#[test]
fn non_zeno_check_agrees_with_cycle_enumeration_oracle() {
    let fixtures = [
        "two_clock_game.ptga",
        "undetermined.ptga",
        "wait_or_flip.ptga",
    ];
    for name in fixtures {
        let m = load_model(name);
        assert_eq!(
            m.check_structural_non_zeno().is_non_zeno(),
            nonzeno_oracle::non_zeno(&m),
            "verdicts differ on {name}"
        );
    }
    // A two-location loop where the reset and the guard touch different
    // clocks is Zeno; with the same clock it is not.
    let zeno = parse_model(
        "clocks x y; bound 1;\n\
         location s { }\n\
         location t { }\n\
         edge min go from s guard y>=1 { 1 reset x -> t }\n\
         edge min back from t { 1 -> s }\n\
         target t;",
    )
    .unwrap();
    assert!(!zeno.check_structural_non_zeno().is_non_zeno());
    assert!(!nonzeno_oracle::non_zeno(&zeno));

    let ok = parse_model(
        "clocks x y; bound 1;\n\
         location s { }\n\
         location t { }\n\
         edge min go from s guard x>=1 { 1 reset x -> t }\n\
         edge min back from t { 1 -> s }\n\
         target t;",
    )
    .unwrap();
    assert!(ok.check_structural_non_zeno().is_non_zeno());
    assert!(nonzeno_oracle::non_zeno(&ok));
}

#[test]
fn validate_is_pure_and_idempotent() {
    let m = load_model("two_clock_game.ptga");
    let r1 = m.validate();
    let r2 = m.validate();
    assert_eq!(r1, r2);
}

#[test]
fn validation_report_serializes_to_json() {
    let m = load_model("two_clock_game.ptga");
    let report = m.validate();
    let json = serde_json::to_string(&report).unwrap();
    assert!(json.contains("\"errors\":[]"));
}
