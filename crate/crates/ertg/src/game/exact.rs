use num::traits::Zero;

use crate::bra::BraStateId;
use crate::model::Player;
use crate::rat::Rat;

use super::{
    almost_sure_reach_set, ExtVal, GameError, NodeId, NodeKind, PositionalStrategy,
    TurnBasedGame,
};

/// Expected total delay to the target set in the Markov chain induced by a
/// positional strategy pair, exact. `∞` wherever the chain misses the
/// targets with positive probability.
pub fn evaluate_strategy_pair(
    g: &TurnBasedGame,
    min_strategy: &PositionalStrategy,
    max_strategy: &PositionalStrategy,
) -> Result<Vec<ExtVal>, GameError> {
    let choice = |node: NodeId| -> Result<usize, GameError> {
        let s = match g.owner(node) {
            Some(Player::Min) => min_strategy.choice(node),
            Some(Player::Max) => max_strategy.choice(node),
            None => None,
        };
        s.map(|c| c as usize).ok_or(GameError::PartialStrategy)
    };

    // Collapse one round fm → responder → stochastic to a per-state row.
    let n_states = g.n_states();
    struct Row {
        delay: Rat,
        branches: Vec<(Rat, usize)>,
    }
    let state_of_fm = |node: NodeId| -> usize {
        match g.kind(node) {
            NodeKind::FirstMover { state } => state.index(),
            _ => unreachable!("stochastic branches point at first movers"),
        }
    };
    let mut rows: Vec<Option<Row>> = Vec::with_capacity(n_states);
    for s in 0..n_states {
        let fm = g.first_mover(BraStateId(s as u32));
        if g.is_target(fm) {
            rows.push(None);
            continue;
        }
        let resp = g.edges(fm)[choice(fm)?];
        let st = g.edges(resp)[choice(resp)?];
        let data = g.stoch(st).expect("responder edges point at stochastic");
        rows.push(Some(Row {
            delay: data.delay.clone(),
            branches: data
                .branches
                .iter()
                .map(|(p, _, fm)| (p.clone(), state_of_fm(*fm)))
                .collect(),
        }));
    }

    // A state misses the targets with positive probability iff it can reach
    // a state that has no path to a target at all.
    let mut reach_t = vec![false; n_states];
    for s in 0..n_states {
        reach_t[s] = rows[s].is_none(); // targets
    }
    loop {
        let mut changed = false;
        for s in 0..n_states {
            if reach_t[s] {
                continue;
            }
            if let Some(row) = &rows[s] {
                if row.branches.iter().any(|(_, t)| reach_t[*t]) {
                    reach_t[s] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut reaches_dead = vec![false; n_states];
    for s in 0..n_states {
        reaches_dead[s] = !reach_t[s];
    }
    loop {
        let mut changed = false;
        for s in 0..n_states {
            if reaches_dead[s] {
                continue;
            }
            if let Some(row) = &rows[s] {
                if row.branches.iter().any(|(_, t)| reaches_dead[*t]) {
                    reaches_dead[s] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Solve (I − Q) x = r on the almost-surely-absorbed transient part.
    let transient: Vec<usize> = (0..n_states)
        .filter(|&s| rows[s].is_some() && !reaches_dead[s])
        .collect();
    let pos: std::collections::HashMap<usize, usize> = transient
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i))
        .collect();
    let m = transient.len();
    let mut a = vec![vec![Rat::zero(); m]; m];
    let mut b = vec![Rat::zero(); m];
    for (i, &s) in transient.iter().enumerate() {
        let row = rows[s].as_ref().unwrap();
        a[i][i] = Rat::from_integer(1.into());
        b[i] = row.delay.clone();
        for (p, t) in &row.branches {
            if let Some(&j) = pos.get(t) {
                a[i][j] -= p;
            }
        }
    }
    let x = solve_linear(a, b)?;

    let mut state_val = vec![ExtVal::Inf; n_states];
    for s in 0..n_states {
        if rows[s].is_none() {
            state_val[s] = ExtVal::zero();
        } else if let Some(&i) = pos.get(&s) {
            state_val[s] = ExtVal::Fin(x[i].clone());
        }
    }

    // Expand to all nodes.
    let mut out = vec![ExtVal::zero(); g.n_nodes()];
    for n in 0..g.n_nodes() {
        match g.kind(n) {
            NodeKind::FirstMover { state } => out[n] = state_val[state.index()].clone(),
            NodeKind::Stochastic { .. } => {
                let st = g.stoch(n).unwrap();
                let mut acc = ExtVal::Fin(st.delay.clone());
                for (p, _, fm) in &st.branches {
                    acc = acc + state_val[state_of_fm(*fm)].scale(p);
                }
                out[n] = acc;
            }
            NodeKind::Responder { .. } => {}
        }
    }
    for n in 0..g.n_nodes() {
        if matches!(g.kind(n), NodeKind::Responder { .. }) {
            let st = g.edges(n)[choice(n)?];
            out[n] = out[st].clone();
        }
    }
    Ok(out)
}

/// Gaussian elimination over exact rationals; `a` must be nonsingular.
fn solve_linear(mut a: Vec<Vec<Rat>>, mut b: Vec<Rat>) -> Result<Vec<Rat>, GameError> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(GameError::SingularSystem)?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
            let sub = &factor * &b[col];
            b[r] -= sub;
        }
    }
    Ok((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn first_edge_strategy(g: &TurnBasedGame, player: Player) -> PositionalStrategy {
    let choices = (0..g.n_nodes())
        .map(|n| {
            if g.owner(n) == Some(player) {
                Some(0)
            } else {
                None
            }
        })
        .collect();
    PositionalStrategy { player, choices }
}

const POLICY_CAP: usize = 100_000;

/// Exact best response of `free` against the opponent's fixed positional
/// strategy, by policy iteration over rationals. Nodes where the free
/// player can force an infinite value (or cannot avoid one) are determined
/// qualitatively first and pinned to `∞`.
pub fn best_response(
    g: &TurnBasedGame,
    fixed: &PositionalStrategy,
    free: Player,
    warm: Option<&PositionalStrategy>,
) -> Result<(Vec<ExtVal>, PositionalStrategy), GameError> {
    assert_eq!(fixed.player, free.opponent());
    let (fixed_min, fixed_max) = match free {
        Player::Min => (None, Some(fixed)),
        Player::Max => (Some(fixed), None),
    };
    let reach = almost_sure_reach_set(g, fixed_min, fixed_max);

    let mut current = match warm {
        Some(w) => w.clone(),
        None => first_edge_strategy(g, free),
    };
    for _ in 0..POLICY_CAP {
        let (min_s, max_s) = match free {
            Player::Min => (&current, fixed),
            Player::Max => (fixed, &current),
        };
        let mut v = evaluate_strategy_pair(g, min_s, max_s)?;
        for n in 0..g.n_nodes() {
            if !reach[n] {
                v[n] = ExtVal::Inf;
            }
        }
        let mut changed = false;
        for n in 0..g.n_nodes() {
            if g.owner(n) != Some(free) {
                continue;
            }
            let cur_edge = current.choice(n).expect("strategy total") as usize;
            let cur_val = &v[g.edges(n)[cur_edge]];
            let mut best_edge = cur_edge;
            let mut best_val = cur_val.clone();
            for (i, &e) in g.edges(n).iter().enumerate() {
                let val = &v[e];
                let better = match free {
                    Player::Min => *val < best_val,
                    Player::Max => *val > best_val,
                };
                if better {
                    best_edge = i;
                    best_val = val.clone();
                }
            }
            if best_edge != cur_edge {
                current.choices[n] = Some(best_edge as u32);
                changed = true;
            }
        }
        if !changed {
            return Ok((v, current));
        }
    }
    Err(GameError::PolicyCycle(POLICY_CAP))
}

#[derive(Debug, Clone)]
pub struct ExactSolved {
    pub values: Vec<ExtVal>,
    pub min_strategy: PositionalStrategy,
    pub max_strategy: PositionalStrategy,
    pub improvements: usize,
}

/// Exact game value by strategy improvement on the first mover, with the
/// responder solved to optimality at every step. The result is certified:
/// the mover-side and responder-side strategy bounds must agree on every
/// first-mover node.
pub fn solve_exact(
    g: &TurnBasedGame,
    warm_min: Option<&PositionalStrategy>,
    warm_max: Option<&PositionalStrategy>,
) -> Result<ExactSolved, GameError> {
    if g.has_zero_time_cycle() {
        return Err(GameError::ZeroTimeCycle);
    }
    let mover = g.sense.mover();
    let responder = mover.opponent();
    let (warm_mover, warm_responder) = match mover {
        Player::Min => (warm_min, warm_max),
        Player::Max => (warm_max, warm_min),
    };
    let mut mu = match warm_mover {
        Some(w) => w.clone(),
        None => first_edge_strategy(g, mover),
    };
    let mut responder_warm: Option<PositionalStrategy> = warm_responder.cloned();
    let mut improvements = 0;
    loop {
        if improvements > POLICY_CAP {
            return Err(GameError::PolicyCycle(POLICY_CAP));
        }
        let (v, chi) = best_response(g, &mu, responder, responder_warm.as_ref())?;
        responder_warm = Some(chi.clone());
        let mut changed = false;
        for n in 0..g.n_nodes() {
            if g.owner(n) != Some(mover) || g.is_target(n) {
                continue;
            }
            let cur_edge = mu.choice(n).expect("strategy total") as usize;
            let cur_val = &v[g.edges(n)[cur_edge]];
            let mut best_edge = cur_edge;
            let mut best_val = cur_val.clone();
            for (i, &e) in g.edges(n).iter().enumerate() {
                let val = &v[e];
                let better = match mover {
                    Player::Min => *val < best_val,
                    Player::Max => *val > best_val,
                };
                if better {
                    best_edge = i;
                    best_val = val.clone();
                }
            }
            if best_edge != cur_edge {
                mu.choices[n] = Some(best_edge as u32);
                changed = true;
            }
        }
        if changed {
            improvements += 1;
            continue;
        }
        // Certify: the opposite bound must meet the mover-side bound at
        // every state.
        let (w, mu_check) = best_response(g, &chi, mover, Some(&mu))?;
        for s in 0..g.n_states() {
            let fm = g.first_mover(BraStateId(s as u32));
            let fm_val = mover_side_value(g, &v, &mu, fm);
            let other = mover_side_value(g, &w, &mu_check, fm);
            if fm_val != other {
                return Err(GameError::CertificationFailed);
            }
        }
        let (min_strategy, max_strategy) = match mover {
            Player::Min => (mu, chi),
            Player::Max => (chi, mu),
        };
        let mut values = v;
        for s in 0..g.n_states() {
            let fm = g.first_mover(BraStateId(s as u32));
            if g.is_target(fm) {
                values[fm] = ExtVal::zero();
            }
        }
        return Ok(ExactSolved {
            values,
            min_strategy,
            max_strategy,
            improvements,
        });
    }
}

/// The value at a first-mover node, reading through the target pin.
fn mover_side_value(
    g: &TurnBasedGame,
    v: &[ExtVal],
    _strategy: &PositionalStrategy,
    fm: NodeId,
) -> ExtVal {
    if g.is_target(fm) {
        ExtVal::zero()
    } else {
        v[fm].clone()
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdQuery {
    /// `None` means "no bound", which every value satisfies.
    pub bound: Option<Rat>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThresholdVerdict {
    AtMost,
    Greater,
    Undecided { lower: ExtVal, upper: ExtVal },
}

/// Decides whether the game value at a state is at most the bound.
///
/// In iterative mode the verdict is certified by exact strategy bounds: the
/// extracted Min strategy's exact best-response value is an upper bound on
/// the game value, the extracted Max strategy's a lower bound. When the
/// bracket straddles the bound the query is honestly undecided. Exact mode
/// computes the value itself and always answers.
pub fn decide_threshold(
    g: &TurnBasedGame,
    state: BraStateId,
    query: &ThresholdQuery,
    min_strategy: &PositionalStrategy,
    max_strategy: &PositionalStrategy,
) -> Result<ThresholdVerdict, GameError> {
    let Some(bound) = &query.bound else {
        return Ok(ThresholdVerdict::AtMost);
    };
    let bound = ExtVal::Fin(bound.clone());
    let fm = g.first_mover(state);
    if query.exact {
        let solved = solve_exact(g, Some(min_strategy), Some(max_strategy))?;
        let value = if g.is_target(fm) {
            ExtVal::zero()
        } else {
            solved.values[fm].clone()
        };
        return Ok(if value <= bound {
            ThresholdVerdict::AtMost
        } else {
            ThresholdVerdict::Greater
        });
    }
    if g.is_target(fm) {
        return Ok(ThresholdVerdict::AtMost);
    }
    let (upper_vec, _) = best_response(g, min_strategy, Player::Max, Some(max_strategy))?;
    let (lower_vec, _) = best_response(g, max_strategy, Player::Min, Some(min_strategy))?;
    let upper = upper_vec[fm].clone();
    let lower = lower_vec[fm].clone();
    if upper <= bound {
        Ok(ThresholdVerdict::AtMost)
    } else if lower > bound {
        Ok(ThresholdVerdict::Greater)
    } else {
        Ok(ThresholdVerdict::Undecided { lower, upper })
    }
}
