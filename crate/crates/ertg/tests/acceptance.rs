//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//! Every tolerance is pinned here, in code.

mod common;

use std::sync::Arc;

use common::{bra_from, config, load_model};
use ertg::bra::BraStateId;
use ertg::game::{
    solve, solve_exact, to_turn_based, ExtVal, Sense, SolverOptions,
};
use ertg::model::Player;
use ertg::pipeline::{simulate_prepared, PrepareOptions, SimulateOptions};
use ertg::rat::{int, ratio, to_f64, Rat};
use ertg::sim::{play_measure, Play, PlayStep, TimedMove};
use ertg::testgen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-9;
const AGREEMENT_TOL: f64 = 1e-8;

fn pass(criterion: u32, what: &str) {
    println!("acceptance criterion {criterion}: PASS — {what}");
}

fn solved_value(model_name: &str, loc: &str, vals: &[Rat], sense: Sense) -> (f64, ExtVal) {
    let model = load_model(model_name);
    let bra = bra_from(&model, loc, vals);
    let g = to_turn_based(&bra, sense);
    let solved = solve(
        &g,
        SolverOptions {
            epsilon: EPS,
            ..SolverOptions::default()
        },
    )
    .expect("solver converges");
    let exact = solve_exact(&g, Some(&solved.min_strategy), Some(&solved.max_strategy))
        .expect("exact solve certifies");
    let fm = g.first_mover(bra.init_state());
    (solved.values[fm], exact.values[fm].clone())
}

/// Criterion 1 — non-determinacy regression: upper value 1 and lower value
/// 0 at (l0, x=0), within 1e-9 iteratively and exactly in exact mode, with
/// the displayed intermediate values at sampled clock values.
#[test]
fn criterion_1_non_determinacy_regression() {
    let (upper, upper_exact) = solved_value("undetermined.ptga", "l0", &[int(0)], Sense::Upper);
    assert!((upper - 1.0).abs() < EPS);
    assert_eq!(upper_exact, ExtVal::Fin(int(1)));
    let (lower, lower_exact) = solved_value("undetermined.ptga", "l0", &[int(0)], Sense::Lower);
    assert!(lower.abs() < EPS);
    assert_eq!(lower_exact, ExtVal::Fin(int(0)));

    let samples = [int(0), ratio(1, 4), ratio(1, 2)];
    for x in &samples {
        // P(l3, x) = 1 − x.
        let want = int(1) - x;
        let (v, e) = solved_value("undetermined.ptga", "l3", &[x.clone()], Sense::Upper);
        assert!((v - to_f64(&want)).abs() < EPS);
        assert_eq!(e, ExtVal::Fin(want));
    }
    // P(l2, 0) = 1, P(l2, x) = 0 for x > 0.
    let (v, e) = solved_value("undetermined.ptga", "l2", &[int(0)], Sense::Upper);
    assert!((v - 1.0).abs() < EPS);
    assert_eq!(e, ExtVal::Fin(int(1)));
    for x in [ratio(1, 4), ratio(1, 2)] {
        let (v, e) = solved_value("undetermined.ptga", "l2", &[x], Sense::Upper);
        assert!(v.abs() < EPS);
        assert_eq!(e, ExtVal::Fin(int(0)));
    }
    // P(l1, 0) = 0.
    let (v, e) = solved_value("undetermined.ptga", "l1", &[int(0)], Sense::Upper);
    assert!(v.abs() < EPS);
    assert_eq!(e, ExtVal::Fin(int(0)));

    pass(1, "upper 1 / lower 0 at (l0, 0), intermediates reproduced");
}

/// Criterion 2 — the one-player value curve min{1/2, 1 − x}.
#[test]
fn criterion_2_value_curve() {
    let cases = [
        (int(0), ratio(1, 2)),
        (ratio(1, 4), ratio(1, 2)),
        (ratio(1, 2), ratio(1, 2)),
        (ratio(3, 4), ratio(1, 4)),
    ];
    for (x, want) in cases {
        let (v, e) = solved_value("wait_or_flip.ptga", "l0", &[x.clone()], Sense::Upper);
        assert!((v - to_f64(&want)).abs() < EPS, "value at x={x}");
        assert_eq!(e, ExtVal::Fin(want));
    }
    pass(2, "upper value equals min{1/2, 1−x} at the four sample points");
}

/// Criterion 3 — the shipped play has probability exactly 1/20 and time
/// exactly 12/5.
#[test]
fn criterion_3_play_measure() {
    let model = load_model("two_clock_game.ptga");
    let mv = |action: &str, owner: Player, delay: Rat| {
        let idx = model
            .actions
            .iter()
            .position(|a| a.name == action && a.owner == owner)
            .unwrap();
        TimedMove {
            delay,
            action: ertg::model::ActionId(idx as u32),
        }
    };
    let play = Play {
        start: config(&model, "l0", &[int(0), int(0)]),
        steps: vec![
            PlayStep {
                min_move: Some(mv("b", Player::Min, ratio(11, 10))),
                max_move: None,
                next: config(&model, "l1", &[int(0), ratio(11, 10)]),
            },
            PlayStep {
                min_move: Some(mv("a", Player::Min, ratio(1, 2))),
                max_move: Some(mv("c", Player::Max, ratio(1, 5))),
                next: config(&model, "l0", &[ratio(1, 5), int(0)]),
            },
            PlayStep {
                min_move: Some(mv("b", Player::Min, ratio(11, 10))),
                max_move: None,
                next: config(&model, "l2", &[int(0), int(0)]),
            },
        ],
    };
    let (prob, time) = play_measure(&model, &play).unwrap();
    assert_eq!(prob, ratio(1, 20));
    assert_eq!(time, ratio(12, 5));
    pass(3, "probability exactly 1/20, time exactly 12/5");
}

/// Criterion 4 — BRA fidelity from (l0, (0.3, 0.1)): the labelled delays
/// 0.7, 0.9, 1.7 appear exactly, the coin flip splits 1/2:1/2 into
/// (l1, (0, 0.8)) and (l2, (0, 0)), and the displayed sub-graph states are
/// all present.
#[test]
fn criterion_4_bra_fidelity() {
    let model = load_model("two_clock_game.ptga");
    let bra = bra_from(&model, "l0", &[ratio(3, 10), ratio(1, 10)]);
    let init = bra.init_state();

    let moves = bra.moves(Player::Min, init);
    let actions = bra.actions(Player::Min, init);
    let delays: std::collections::BTreeSet<Rat> = moves.iter().map(|m| m.delay.clone()).collect();
    for want in [ratio(7, 10), ratio(9, 10), ratio(17, 10)] {
        assert!(delays.contains(&want), "delay {want} labelled in the graph");
    }

    // The earliest move (into the open region past x=1 at its infimum)
    // has delay 0.7 and the 1/2:1/2 split.
    let (first_idx, _) = actions
        .iter()
        .enumerate()
        .find(|(i, _)| moves[*i].delay == ratio(7, 10))
        .expect("a 0.7-delay move exists");
    let mv = &moves[first_idx];
    assert_eq!(mv.successors.len(), 2);
    for (p, succ) in &mv.successors {
        assert_eq!(*p, ratio(1, 2));
        let s = bra.state(*succ);
        let rendered = bra.render_state(*succ);
        match model.location_name(s.location) {
            "l1" => assert_eq!(s.valuation.values(), &[int(0), ratio(4, 5)], "{rendered}"),
            "l2" => assert_eq!(s.valuation.values(), &[int(0), int(0)], "{rendered}"),
            other => panic!("unexpected successor location {other}"),
        }
    }

    // The eight states of the displayed sub-graph.
    let expect = [
        ("l0", vec![ratio(3, 10), ratio(1, 10)]),
        ("l1", vec![int(0), ratio(4, 5)]),
        ("l1", vec![int(0), ratio(9, 5)]),
        ("l1", vec![int(0), int(1)]), // three different regions
        ("l0", vec![int(1), int(0)]),
        ("l2", vec![int(0), int(0)]),
    ];
    for (loc, vals) in expect {
        let found = bra
            .states()
            .filter(|(_, s)| {
                model.location_name(s.location) == loc && s.valuation.values() == vals.as_slice()
            })
            .count();
        assert!(found >= 1, "state ({loc}, {vals:?}) present");
    }
    let boundary_states = bra
        .states()
        .filter(|(_, s)| {
            model.location_name(s.location) == "l1" && s.valuation.values() == [int(0), int(1)]
        })
        .count();
    assert_eq!(
        boundary_states, 3,
        "the boundary valuation (0,1) appears with three distinct regions"
    );
    bra.check_signature_bound()
        .expect("fractional signatures bounded by shifts of the initial signature");

    pass(4, "delays 0.7/0.9/1.7 exact, coin flip splits into (l1,(0,0.8)) and (l2,(0,0))");
}

/// Criterion 5 — monotone convergence on 100 random two-clock models:
/// n-step values nondecreasing, the converged vector satisfies the
/// optimality equations within 1e-8, exact and iterative modes agree
/// within 1e-8.
#[test]
fn criterion_5_monotone_convergence_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for i in 0..100 {
        let model = Arc::new(testgen::random_model(&mut rng, &Default::default()));
        assert!(model.validate().accepted(), "random model {i} validates");
        assert!(
            model.check_structural_non_zeno().is_non_zeno(),
            "random model {i} is structurally non-Zeno"
        );
        let init = model.init_configuration();
        let bra = ertg::bra::build_reachable_bra(&model, &init, Default::default())
            .expect("random model explores");
        let sense = if i % 2 == 0 { Sense::Upper } else { Sense::Lower };
        let g = to_turn_based(&bra, sense);
        let solved = solve(
            &g,
            SolverOptions {
                epsilon: 1e-10,
                ..SolverOptions::default()
            },
        )
        .expect("solver converges");

        // Monotone n-step values.
        let mut prev = g.n_step_values(0);
        for n in 1..=10 {
            let next = g.n_step_values(n);
            for k in 0..next.len() {
                assert!(next[k] >= prev[k], "model {i}: n-step not monotone");
            }
            prev = next;
        }

        // Fixpoint residual of the converged vector.
        let mut next = g.bellman_step_f64(&solved.values);
        for k in 0..next.len() {
            if solved.infinite[k] {
                next[k] = f64::INFINITY;
            }
        }
        for k in 0..next.len() {
            if solved.values[k].is_finite() {
                assert!(
                    (next[k] - solved.values[k]).abs() <= AGREEMENT_TOL,
                    "model {i}: optimality residual {} at node {k}",
                    (next[k] - solved.values[k]).abs()
                );
            }
        }

        // Exact mode agreement.
        let exact = solve_exact(&g, Some(&solved.min_strategy), Some(&solved.max_strategy))
            .expect("exact solve certifies");
        for s in 0..g.n_states() {
            let fm = g.first_mover(BraStateId(s as u32));
            match &exact.values[fm] {
                ExtVal::Fin(r) => {
                    assert!(
                        (solved.values[fm] - to_f64(r)).abs() <= AGREEMENT_TOL,
                        "model {i}: iterative {} vs exact {}",
                        solved.values[fm],
                        to_f64(r)
                    );
                }
                ExtVal::Inf => assert!(
                    solved.values[fm].is_infinite(),
                    "model {i}: exact says infinite, iterative finite"
                ),
            }
        }
    }
    pass(5, "100 random models: monotone n-step, fixpoint residual ≤ 1e-8, exact ≡ iterative");
}

/// Criterion 6 — regional non-expansiveness: for same-region state pairs
/// of every fixture BRA, |V(s1) − V(s2)| is bounded by the valuation
/// distance, for n-step values (n ≤ 20, exact) and converged values.
#[test]
fn criterion_6_regional_non_expansiveness() {
    let fixtures: [(&str, &str, Vec<Rat>); 4] = [
        ("two_clock_game.ptga", "l0", vec![ratio(3, 10), ratio(1, 10)]),
        ("two_clock_game.ptga", "l0", vec![int(0), int(0)]),
        ("undetermined.ptga", "l0", vec![int(0)]),
        ("wait_or_flip.ptga", "l0", vec![ratio(3, 4)]),
    ];
    for (name, loc, vals) in &fixtures {
        let model = load_model(name);
        let bra = bra_from(&model, loc, vals);
        let pairs: Vec<(BraStateId, BraStateId, Rat)> = {
            let mut out = Vec::new();
            let states: Vec<_> = bra.states().collect();
            for (i, (id_a, a)) in states.iter().enumerate() {
                for (id_b, b) in states.iter().skip(i + 1) {
                    if a.location == b.location && a.region == b.region {
                        let d = a.valuation.sup_distance(&b.valuation).unwrap();
                        out.push((*id_a, *id_b, d));
                    }
                }
            }
            out
        };
        for sense in [Sense::Upper, Sense::Lower] {
            let g = to_turn_based(&bra, sense);
            for n in 1..=20 {
                let v = g.n_step_values(n);
                for (a, b, d) in &pairs {
                    let (va, vb) = (&v[g.first_mover(*a)], &v[g.first_mover(*b)]);
                    if let (ExtVal::Fin(ra), ExtVal::Fin(rb)) = (va, vb) {
                        let diff = if ra >= rb { ra - rb } else { rb - ra };
                        assert!(
                            diff <= *d,
                            "{name} {sense:?}: n-step {n} not regionally non-expansive \
                             between {} and {}",
                            bra.render_state(*a),
                            bra.render_state(*b)
                        );
                    }
                }
            }
            let solved = solve(
                &g,
                SolverOptions {
                    epsilon: EPS,
                    ..SolverOptions::default()
                },
            )
            .unwrap();
            let exact = solve_exact(&g, Some(&solved.min_strategy), Some(&solved.max_strategy))
                .expect("exact solve certifies");
            for (a, b, d) in &pairs {
                let (va, vb) = (
                    &exact.values[g.first_mover(*a)],
                    &exact.values[g.first_mover(*b)],
                );
                match (va, vb) {
                    (ExtVal::Fin(ra), ExtVal::Fin(rb)) => {
                        let diff = if ra >= rb { ra - rb } else { rb - ra };
                        assert!(
                            diff <= *d,
                            "{name} {sense:?}: converged values not regionally non-expansive"
                        );
                    }
                    (ExtVal::Inf, ExtVal::Inf) => {}
                    _ => panic!(
                        "{name} {sense:?}: same-region pair mixes finite and infinite values"
                    ),
                }
            }
        }
    }
    pass(6, "|V(s1) − V(s2)| ≤ ‖ν1 − ν2‖ on all same-region pairs, n ≤ 20 and converged");
}

/// Criterion 7 — Monte Carlo agreement: 1e5 runs under the extracted
/// optimal strategies land within three standard errors of the solved
/// value, with hit fraction 1.
#[test]
fn criterion_7_simulator_agreement() {
    let cases: [(&str, &str, Vec<Rat>); 2] = [
        ("two_clock_game.ptga", "l0", vec![ratio(3, 10), ratio(1, 10)]),
        ("wait_or_flip.ptga", "l0", vec![int(0)]),
    ];
    for (name, loc, vals) in &cases {
        let model = load_model(name);
        let init = config(&model, loc, vals);
        let (outcome, solved) = simulate_prepared(
            &model,
            &init,
            SimulateOptions {
                runs: 100_000,
                horizon: 512,
                seed: 20_26,
                epsilon: EPS,
            },
            PrepareOptions::default(),
        )
        .expect("simulation runs");
        assert_eq!(outcome.hit_fraction, 1.0, "{name}: every run reaches the target");
        let tol = 3.0 * outcome.stderr;
        assert!(
            (outcome.mean - solved).abs() <= tol,
            "{name}: mean {} vs solved {} exceeds 3σ = {}",
            outcome.mean,
            solved,
            tol
        );
    }
    pass(7, "1e5-run means within 3 standard errors of the solved values, hit fraction 1");
}

/// Criterion 8 — quasi-simple function suite: exact non-expansiveness on
/// 1e4 random trees, exact transform laws on 1e3 samples each, monotone
/// shifted evaluation on 1e3 samples.
#[test]
fn criterion_8_qsf_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5F5F);
    let bound = 2u32;
    let n_clocks = 2usize;

    for _ in 0..10_000 {
        let f = testgen::random_qsf(&mut rng, n_clocks, bound, 3);
        assert!(f.well_formed());
        let v1 = testgen::random_valuation(&mut rng, n_clocks, bound);
        let v2 = testgen::random_valuation(&mut rng, n_clocks, bound);
        let diff = {
            let (a, b) = (f.eval(&v1), f.eval(&v2));
            if a >= b {
                a - b
            } else {
                b - a
            }
        };
        assert!(
            diff <= v1.sup_distance(&v2).unwrap(),
            "non-expansiveness violated"
        );
    }

    use ertg::clockalg::ClockId;
    for _ in 0..1_000 {
        let f = testgen::random_qsf(&mut rng, n_clocks, bound, 3);
        let nu = testgen::random_valuation(&mut rng, n_clocks, bound);
        // Delay to the boundary c = i for the largest clock, staying in
        // the box.
        let c = (0..n_clocks)
            .map(|k| ClockId(k as u32))
            .max_by(|a, b| nu.get(*a).cmp(nu.get(*b)))
            .unwrap();
        let lo = nu.get(c).ceil().to_integer().try_into().unwrap_or(0i64);
        let i = rng.gen_range(lo..=bound as i64);
        let ft = f.elapse_transform(c, i);
        let t = int(i) - nu.get(c);
        let shifted = nu.elapse(&t).unwrap();
        assert_eq!(ft.eval(&nu), &t + f.eval(&shifted), "elapse law violated");
        assert!(ft.well_formed());

        let resets: std::collections::BTreeSet<ClockId> = (0..n_clocks)
            .map(|k| ClockId(k as u32))
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        let fr = f.reset_transform(&resets);
        assert_eq!(fr.eval(&nu), f.eval(&nu.reset(&resets)), "reset law violated");
        assert!(fr.well_formed());
    }

    for _ in 0..1_000 {
        let f = testgen::random_qsf(&mut rng, n_clocks, bound, 3);
        let nu = testgen::random_valuation(&mut rng, n_clocks, bound);
        let headroom = (0..n_clocks)
            .map(|k| int(bound as i64) - nu.get(ClockId(k as u32)))
            .min()
            .unwrap();
        let mut prev: Option<Rat> = None;
        for step in 0..=8 {
            let t = &headroom * ratio(step, 8);
            let shifted = nu.elapse(&t).unwrap();
            let val = &t + f.eval(&shifted);
            if let Some(p) = prev {
                assert!(val >= p, "t + f(ν+t) must be nondecreasing in t");
            }
            prev = Some(val);
        }
    }
    pass(8, "1e4 trees exactly non-expansive; transform and monotonicity laws exact");
}

/// Criterion 9 — oracle equivalence: on every fixture with ≤ 50 BRA
/// states, n-step backward induction on the turn-based reduction equals
/// the direct one-step operator with the winner function inlined, exactly,
/// for n ≤ 4.
#[test]
fn criterion_9_oracle_equivalence() {
    let mut cases: Vec<(String, ertg::bra::BraGame)> = Vec::new();
    for (name, loc, vals) in [
        ("two_clock_game.ptga", "l0", vec![ratio(3, 10), ratio(1, 10)]),
        ("two_clock_game.ptga", "l0", vec![int(0), int(0)]),
        ("undetermined.ptga", "l0", vec![int(0)]),
        ("wait_or_flip.ptga", "l0", vec![int(0)]),
        ("wait_or_flip.ptga", "l0", vec![ratio(3, 4)]),
    ] {
        let model = load_model(name);
        let bra = bra_from(&model, loc, &vals);
        cases.push((format!("{name} from {loc} {vals:?}"), bra));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x0C0C);
    for i in 0..25 {
        let model = Arc::new(testgen::random_model(&mut rng, &Default::default()));
        let init = model.init_configuration();
        let bra = ertg::bra::build_reachable_bra(&model, &init, Default::default()).unwrap();
        cases.push((format!("random model {i}"), bra));
    }

    let mut checked = 0;
    for (label, bra) in &cases {
        if bra.n_states() > 50 {
            continue;
        }
        checked += 1;
        for sense in [Sense::Upper, Sense::Lower] {
            let g = to_turn_based(bra, sense);
            let mut oracle = common::oracle::zero_vector(bra);
            for n in 1..=4 {
                oracle = common::oracle::step(bra, sense, &oracle);
                let reduced = g.n_step_values(n);
                for (id, _) in bra.states() {
                    assert_eq!(
                        reduced[g.first_mover(id)],
                        ExtVal::Fin(oracle.get(&id.0).unwrap().clone()),
                        "{label} {sense:?} n={n} at {}",
                        bra.render_state(id)
                    );
                }
            }
        }
    }
    assert!(checked >= 20, "enough small fixtures were checked");
    pass(9, "backward induction equals the inlined one-step operator, n ≤ 4, exactly");
}

