#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use ertg::bra::{build_reachable_bra, BraGame, BuildOptions};
use ertg::clockalg::ClockValuation;
use ertg::model::{Configuration, Ptga};
use ertg::parser::parse_model;
use ertg::rat::Rat;

pub fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

pub fn load_model(name: &str) -> Arc<Ptga> {
    let text = std::fs::read_to_string(model_path(name)).expect("model file readable");
    let model = parse_model(&text).expect("shipped model parses");
    let report = model.validate();
    assert!(report.accepted(), "{name}: {:?}", report.errors);
    Arc::new(model)
}

pub fn config(model: &Ptga, location: &str, vals: &[Rat]) -> Configuration {
    Configuration {
        location: model.lookup_location(location).expect("location exists"),
        valuation: ClockValuation::new(vals.to_vec(), model.bound()).expect("valuation in range"),
    }
}

pub fn bra_from(model: &Arc<Ptga>, location: &str, vals: &[Rat]) -> BraGame {
    let init = config(model, location, vals);
    build_reachable_bra(model, &init, BuildOptions::default()).expect("BRA builds")
}

/// Direct evaluation of the one-step value operator on the raw BRA with
/// the winner function inlined: the independent oracle for the turn-based
/// reduction.
pub mod oracle {
    use std::collections::HashMap;

    use ertg::bra::{bra_winner, bra_winner_lower, BraGame, Winner};
    use ertg::game::Sense;
    use ertg::model::Player;
    use ertg::rat::{int, Rat};

    pub fn zero_vector(bra: &BraGame) -> HashMap<u32, Rat> {
        bra.states().map(|(id, _)| (id.0, int(0))).collect()
    }

    pub fn step(bra: &BraGame, sense: Sense, prev: &HashMap<u32, Rat>) -> HashMap<u32, Rat> {
        let mut out = HashMap::new();
        for (id, state) in bra.states() {
            if bra.is_target(id) {
                out.insert(id.0, int(0));
                continue;
            }
            let value_of = |player: Player, ai: usize| -> Rat {
                let mv = &bra.moves(player, id)[ai];
                let mut acc = mv.delay.clone();
                for (p, succ) in &mv.successors {
                    acc += p * prev.get(&succ.0).unwrap();
                }
                acc
            };
            let min_acts = bra.actions(Player::Min, id);
            let max_acts = bra.actions(Player::Max, id);
            let min_opts: Vec<Option<usize>> = if min_acts.is_empty() {
                vec![None]
            } else {
                (0..min_acts.len()).map(Some).collect()
            };
            let max_opts: Vec<Option<usize>> = if max_acts.is_empty() {
                vec![None]
            } else {
                (0..max_acts.len()).map(Some).collect()
            };
            // Upper: inf over Min's moves of sup over Max's.
            // Lower: sup over Max's moves of inf over Min's.
            let (outer_opts, inner_opts) = match sense {
                Sense::Upper => (&min_opts, &max_opts),
                Sense::Lower => (&max_opts, &min_opts),
            };
            let outer: Vec<Rat> = outer_opts
                .iter()
                .map(|&oi| {
                    let inner: Vec<Rat> = inner_opts
                        .iter()
                        .map(|&ii| {
                            let (mi, xi) = match sense {
                                Sense::Upper => (oi, ii),
                                Sense::Lower => (ii, oi),
                            };
                            let alpha = mi.map(|i| &min_acts[i]);
                            let beta = xi.map(|i| &max_acts[i]);
                            let w = match sense {
                                Sense::Upper => bra_winner(alpha, beta).unwrap(),
                                Sense::Lower => {
                                    bra_winner_lower(&state.valuation, alpha, beta).unwrap()
                                }
                            };
                            match w {
                                Winner::MinMoves => value_of(Player::Min, mi.unwrap()),
                                Winner::MaxMoves => value_of(Player::Max, xi.unwrap()),
                            }
                        })
                        .collect();
                    match sense {
                        Sense::Upper => inner.into_iter().max().unwrap(),
                        Sense::Lower => inner.into_iter().min().unwrap(),
                    }
                })
                .collect();
            let v = match sense {
                Sense::Upper => outer.into_iter().min().unwrap(),
                Sense::Lower => outer.into_iter().max().unwrap(),
            };
            out.insert(id.0, v);
        }
        out
    }
}
