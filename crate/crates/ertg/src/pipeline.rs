//! End-to-end orchestration: parse → validate → non-Zenoness gate → BRA →
//! turn-based reduction → solve / decide / simulate, plus the JSON and DOT
//! renderings used by the command-line interface.

use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::bra::{build_reachable_bra, BoundaryOp, BraError, BraGame, BuildOptions};
use crate::clockalg::ClockValuation;
use crate::game::{
    decide_threshold, solve, solve_exact, to_turn_based, ExactSolved, GameError, NodeKind, Sense, Solved, SolverOptions, ThresholdQuery, ThresholdVerdict,
    TurnBasedGame,
};
use crate::model::{Configuration, Player, Ptga, ValidationReport, ZenoCheck};
use crate::rat::{self, Rat};
use crate::sim::{simulate_expected_time, BotStrategy, BraStrategyAdapter, SimError, SimOutcome};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("model failed validation with {} error(s)", .0.errors.len())]
    Validation(ValidationReport),
    #[error("model is not structurally non-Zeno (pass --allow-zeno to override)")]
    Zeno(crate::model::NonZenoWitness),
    #[error("abstraction error: {0}")]
    Bra(#[from] BraError),
    #[error("solver error: {0}")]
    Game(#[from] GameError),
    #[error("simulation error: {0}")]
    Sim(#[from] SimError),
    #[error("{0}")]
    BadRequest(String),
}

#[derive(Debug, Clone, Copy)]
pub struct PrepareOptions {
    pub allow_zeno: bool,
    pub state_cap: usize,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            allow_zeno: false,
            state_cap: BuildOptions::default().state_cap,
        }
    }
}

pub struct PreparedGame {
    pub model: Arc<Ptga>,
    pub init: Configuration,
    pub bra: BraGame,
    pub game: TurnBasedGame,
}

/// Validates the model, enforces the non-Zenoness gate, builds the BRA
/// from the initial configuration and reduces it for the requested sense.
pub fn prepare(
    model: Arc<Ptga>,
    init: Option<Configuration>,
    sense: Sense,
    options: PrepareOptions,
) -> Result<PreparedGame, PipelineError> {
    let report = model.validate();
    if !report.accepted() {
        return Err(PipelineError::Validation(report));
    }
    if !options.allow_zeno {
        if let ZenoCheck::PossiblyZeno(witness) = model.check_structural_non_zeno() {
            return Err(PipelineError::Zeno(witness));
        }
    }
    let init = init.unwrap_or_else(|| model.init_configuration());
    let bra = build_reachable_bra(
        &model,
        &init,
        BuildOptions {
            state_cap: options.state_cap,
        },
    )?;
    let game = to_turn_based(&bra, sense);
    Ok(PreparedGame {
        model,
        init,
        bra,
        game,
    })
}

pub struct SolveOutput {
    pub solved: Solved,
    pub exact: Option<ExactSolved>,
}

pub fn solve_prepared(
    prepared: &PreparedGame,
    epsilon: f64,
    exact: bool,
) -> Result<SolveOutput, PipelineError> {
    let solved = solve(
        &prepared.game,
        SolverOptions {
            epsilon,
            ..SolverOptions::default()
        },
    )?;
    let exact = if exact {
        Some(solve_exact(
            &prepared.game,
            Some(&solved.min_strategy),
            Some(&solved.max_strategy),
        )?)
    } else {
        None
    };
    Ok(SolveOutput { solved, exact })
}

pub fn decide_prepared(
    prepared: &PreparedGame,
    bound: Option<Rat>,
    exact: bool,
    epsilon: f64,
) -> Result<ThresholdVerdict, PipelineError> {
    let output = solve_prepared(prepared, epsilon, false)?;
    let query = ThresholdQuery { bound, exact };
    let verdict = decide_threshold(
        &prepared.game,
        prepared.bra.init_state(),
        &query,
        &output.solved.min_strategy,
        &output.solved.max_strategy,
    )?;
    Ok(verdict)
}

#[derive(Debug, Clone, Copy)]
pub struct SimulateOptions {
    pub runs: usize,
    pub horizon: usize,
    pub seed: u64,
    pub epsilon: f64,
}

/// Solves both senses, adapts the extracted optimal strategies (Min from
/// the upper game, Max from the lower game) to the concrete semantics, and
/// estimates the expected reach time by seeded sampling.
pub fn simulate_prepared(
    model: &Arc<Ptga>,
    init: &Configuration,
    options: SimulateOptions,
    prepare_options: PrepareOptions,
) -> Result<(SimOutcome, f64), PipelineError> {
    let upper = prepare(
        Arc::clone(model),
        Some(init.clone()),
        Sense::Upper,
        prepare_options,
    )?;
    let upper_solved = solve(
        &upper.game,
        SolverOptions {
            epsilon: options.epsilon,
            ..SolverOptions::default()
        },
    )?;
    let lower = prepare(
        Arc::clone(model),
        Some(init.clone()),
        Sense::Lower,
        prepare_options,
    )?;
    let lower_solved = solve(
        &lower.game,
        SolverOptions {
            epsilon: options.epsilon,
            ..SolverOptions::default()
        },
    )?;

    let min_adapter = BraStrategyAdapter::new(&upper.bra, &upper.game, &upper_solved.min_strategy);
    let max_adapter = BraStrategyAdapter::new(&lower.bra, &lower.game, &lower_solved.max_strategy);

    let max_has_moves = lower
        .bra
        .states()
        .any(|(id, _)| !lower.bra.actions(Player::Max, id).is_empty());
    let outcome = if max_has_moves {
        simulate_expected_time(
            model,
            &min_adapter,
            &max_adapter,
            init,
            options.runs,
            options.horizon,
            options.seed,
        )?
    } else {
        simulate_expected_time(
            model,
            &min_adapter,
            &BotStrategy,
            init,
            options.runs,
            options.horizon,
            options.seed,
        )?
    };
    let solved_value = upper_solved.values[upper.game.first_mover(upper.bra.init_state())];
    Ok((outcome, solved_value))
}

/// Parses an initial-configuration override: `l0 x=3/10 y=0.1`.
/// Unmentioned clocks default to zero.
pub fn parse_init(model: &Ptga, text: &str) -> Result<Configuration, PipelineError> {
    let mut parts = text.split_whitespace();
    let loc_name = parts
        .next()
        .ok_or_else(|| PipelineError::BadRequest("empty --init".into()))?;
    let location = model
        .lookup_location(loc_name)
        .ok_or_else(|| PipelineError::BadRequest(format!("unknown location `{loc_name}`")))?;
    let mut vals = vec![Rat::from_integer(0.into()); model.n_clocks()];
    for part in parts {
        let (name, value) = part.split_once('=').ok_or_else(|| {
            PipelineError::BadRequest(format!("expected clock=value, found `{part}`"))
        })?;
        let id = model
            .clocks
            .lookup(name)
            .map_err(|e| PipelineError::BadRequest(e.to_string()))?;
        let value = rat::parse(value)
            .ok_or_else(|| PipelineError::BadRequest(format!("bad number `{value}`")))?;
        vals[id.index()] = value;
    }
    let valuation = ClockValuation::new(vals, model.bound())
        .map_err(|e| PipelineError::BadRequest(e.to_string()))?;
    Ok(Configuration {
        location,
        valuation,
    })
}

fn op_name(op: BoundaryOp) -> &'static str {
    match op {
        BoundaryOp::Inf => "inf",
        BoundaryOp::Sup => "sup",
    }
}

/// JSON dump of a BRA: states with constraint-syntax regions, per-player
/// moves with exact delays and probabilities as `p/q` strings.
pub fn bra_json(bra: &BraGame) -> Value {
    let model = &bra.model;
    let states: Vec<Value> = bra
        .states()
        .map(|(id, s)| {
            let vals: serde_json::Map<String, Value> = model
                .clocks
                .ids()
                .map(|c| {
                    (
                        model.clocks.name(c).to_string(),
                        Value::String(rat::display(s.valuation.get(c))),
                    )
                })
                .collect();
            json!({
                "id": id.0,
                "location": model.location_name(s.location),
                "valuation": vals,
                "region": s.region.render(&model.clocks),
                "target": bra.is_target(id),
                "initial": id == bra.init_state(),
            })
        })
        .collect();
    let mut moves = Vec::new();
    for (id, _) in bra.states() {
        for player in [Player::Min, Player::Max] {
            let actions = bra.actions(player, id);
            let datas = bra.moves(player, id);
            for (a, mv) in actions.iter().zip(datas) {
                moves.push(json!({
                    "from": id.0,
                    "player": match player { Player::Min => "min", Player::Max => "max" },
                    "action": model.action_name(a.action),
                    "region": a.target.render(&model.clocks),
                    "op": op_name(a.op),
                    "delay": rat::display(&mv.delay),
                    "successors": mv.successors.iter().map(|(p, s)| json!({
                        "prob": rat::display(p),
                        "to": s.0,
                    })).collect::<Vec<_>>(),
                }));
            }
        }
    }
    json!({
        "schema_version": SCHEMA_VERSION,
        "states": states,
        "moves": moves,
    })
}

/// DOT rendering of the BRA graph: rounded boxes for states, points for
/// the probabilistic split of each move.
pub fn bra_dot(bra: &BraGame) -> String {
    let model = &bra.model;
    let mut out = String::from("digraph bra {\n  rankdir=LR;\n  node [fontsize=10];\n");
    for (id, s) in bra.states() {
        let shape = if bra.is_target(id) {
            "doublecircle"
        } else {
            "box"
        };
        out.push_str(&format!(
            "  s{} [shape={},style=rounded,label=\"{}\\n{}\\n{}\"];\n",
            id.0,
            shape,
            model.location_name(s.location),
            s.valuation.render(&model.clocks),
            s.region.render(&model.clocks),
        ));
    }
    let mut point = 0usize;
    for (id, _) in bra.states() {
        for player in [Player::Min, Player::Max] {
            let style = match player {
                Player::Min => "solid",
                Player::Max => "dashed",
            };
            let actions = bra.actions(player, id);
            let datas = bra.moves(player, id);
            for (a, mv) in actions.iter().zip(datas) {
                let p_id = format!("p{point}");
                point += 1;
                out.push_str(&format!(
                    "  {p_id} [shape=point];\n  s{} -> {p_id} [style={style},label=\"({}, {}, {}); {}\"];\n",
                    id.0,
                    model.action_name(a.action),
                    a.target.render(&model.clocks),
                    op_name(a.op),
                    rat::display(&mv.delay),
                ));
                for (p, succ) in &mv.successors {
                    out.push_str(&format!(
                        "  {p_id} -> s{} [style={style},label=\"{}\"];\n",
                        succ.0,
                        rat::display(p),
                    ));
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

/// JSON report of a solved game: per-state values (decimal, plus exact
/// `p/q` in exact mode), extracted strategies as action labels, and
/// convergence metadata.
pub fn solve_json(prepared: &PreparedGame, output: &SolveOutput, epsilon: f64) -> Value {
    let bra = &prepared.bra;
    let g = &prepared.game;
    let model = &prepared.model;
    let mover = g.sense.mover();
    let states: Vec<Value> = bra
        .states()
        .map(|(id, s)| {
            let fm = g.first_mover(id);
            let value = output.solved.values[fm];
            let mut entry = serde_json::Map::new();
            entry.insert("id".into(), json!(id.0));
            entry.insert(
                "location".into(),
                json!(model.location_name(s.location)),
            );
            entry.insert(
                "valuation".into(),
                json!(s.valuation.render(&model.clocks)),
            );
            entry.insert("region".into(), json!(s.region.render(&model.clocks)));
            entry.insert(
                "value".into(),
                if value.is_finite() {
                    json!(value)
                } else {
                    json!("inf")
                },
            );
            if let Some(exact) = &output.exact {
                entry.insert("exact".into(), json!(exact.values[fm].render()));
            }
            let strategy = match mover {
                Player::Min => &output.solved.min_strategy,
                Player::Max => &output.solved.max_strategy,
            };
            let choice = crate::game::mover_action_at(g, strategy, id)
                .map(|ai| {
                    let a = &bra.actions(mover, id)[ai as usize];
                    format!(
                        "({}, {}, {})",
                        model.action_name(a.action),
                        a.target.render(&model.clocks),
                        op_name(a.op)
                    )
                })
                .unwrap_or_else(|| "bot".to_string());
            entry.insert("mover_choice".into(), json!(choice));
            Value::Object(entry)
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "sense": match g.sense { Sense::Upper => "upper", Sense::Lower => "lower" },
        "epsilon": epsilon,
        "iterations": output.solved.iterations,
        "residual": output.solved.residual,
        "initial_state": bra.init_state().0,
        "states": states,
    })
}

pub fn sim_json(outcome: &SimOutcome, eps_shift: f64) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "mean": outcome.mean,
        "stderr": outcome.stderr,
        "hits": outcome.hits,
        "runs": outcome.runs,
        "hit_fraction": outcome.hit_fraction,
        "seed": outcome.seed,
        "epsilon_shift": eps_shift,
    })
}

pub fn verdict_json(verdict: &ThresholdVerdict) -> Value {
    match verdict {
        ThresholdVerdict::AtMost => json!({"schema_version": SCHEMA_VERSION, "verdict": "at_most"}),
        ThresholdVerdict::Greater => {
            json!({"schema_version": SCHEMA_VERSION, "verdict": "greater"})
        }
        ThresholdVerdict::Undecided { lower, upper } => json!({
            "schema_version": SCHEMA_VERSION,
            "verdict": "undecided",
            "bracket": [lower.render(), upper.render()],
        }),
    }
}

/// The strategy pair used by `simulate_prepared`, exposed so tests can
/// drive the adapters directly.
pub fn solved_strategies(
    model: &Arc<Ptga>,
    init: &Configuration,
    epsilon: f64,
    prepare_options: PrepareOptions,
) -> Result<(PreparedGame, Solved, PreparedGame, Solved), PipelineError> {
    let upper = prepare(
        Arc::clone(model),
        Some(init.clone()),
        Sense::Upper,
        prepare_options,
    )?;
    let upper_solved = solve(
        &upper.game,
        SolverOptions {
            epsilon,
            ..SolverOptions::default()
        },
    )?;
    let lower = prepare(
        Arc::clone(model),
        Some(init.clone()),
        Sense::Lower,
        prepare_options,
    )?;
    let lower_solved = solve(
        &lower.game,
        SolverOptions {
            epsilon,
            ..SolverOptions::default()
        },
    )?;
    Ok((upper, upper_solved, lower, lower_solved))
}

/// Human-readable description of a Zeno witness cycle.
pub fn render_witness(model: &Ptga, witness: &crate::model::NonZenoWitness) -> String {
    let steps: Vec<String> = witness
        .cycle
        .iter()
        .map(|(l, a, b)| {
            format!(
                "{} --{}[{}]-->",
                model.location_name(*l),
                model.action_name(*a),
                b
            )
        })
        .collect();
    steps.join(" ")
}

/// Checks that a node kind renders sensibly; used by the CLI's debug dump.
pub fn node_label(g: &TurnBasedGame, bra: &BraGame, n: usize) -> String {
    match g.kind(n) {
        NodeKind::FirstMover { state } => format!("fm {}", bra.render_state(*state)),
        NodeKind::Responder { state, proposal } => {
            format!("resp {} / {:?}", bra.render_state(*state), proposal)
        }
        NodeKind::Stochastic {
            state,
            player,
            action,
        } => format!(
            "stoch {} {:?} #{action}",
            bra.render_state(*state),
            player
        ),
    }
}
