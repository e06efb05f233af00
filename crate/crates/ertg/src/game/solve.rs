use crate::model::Player;

use super::{
    almost_sure_reach_set, GameError, NodeId, NodeKind, PositionalStrategy, TurnBasedGame,
};

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            epsilon: 1e-9,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub values: Vec<f64>,
    /// Nodes where the minimizer cannot force reaching the target almost
    /// surely; their value is `∞`.
    pub infinite: Vec<bool>,
    pub min_strategy: PositionalStrategy,
    pub max_strategy: PositionalStrategy,
    pub iterations: usize,
    pub residual: f64,
}

/// Value iteration from zero on the finite-value part. The infinite-value
/// set is determined qualitatively first; iteration stops when the
/// sup-norm difference of consecutive vectors drops below `epsilon`.
/// Values approach the least fixpoint from below, so the reported vector
/// is a lower bound on it. Greedy strategies are extracted from the final
/// vector with lowest-edge-index tie-breaking.
pub fn solve(g: &TurnBasedGame, options: SolverOptions) -> Result<Solved, GameError> {
    let n = g.n_nodes();
    let reach = almost_sure_reach_set(g, None, None);
    let infinite: Vec<bool> = reach.iter().map(|&r| !r).collect();

    let mut v: Vec<f64> = infinite
        .iter()
        .map(|&inf| if inf { f64::INFINITY } else { 0.0 })
        .collect();
    let mut iterations = 0;
    while iterations < options.max_iterations {
        let mut next = g.bellman_step_f64(&v);
        for i in 0..n {
            if infinite[i] {
                next[i] = f64::INFINITY;
            }
        }
        iterations += 1;
        let residual = v
            .iter()
            .zip(&next)
            .filter(|(a, _)| a.is_finite())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if residual < options.epsilon {
            let min_strategy = greedy(g, &v, Player::Min);
            let max_strategy = greedy(g, &v, Player::Max);
            return Ok(Solved {
                values: v,
                infinite,
                min_strategy,
                max_strategy,
                iterations,
                residual,
            });
        }
    }
    Err(GameError::NoConvergence(options.max_iterations))
}

/// Greedy positional strategy for `player` with respect to a value vector:
/// the value of a decision edge is the (already folded) value of the node
/// it points to, except that edges out of first movers point at responder
/// nodes whose values the vector already carries.
pub fn greedy(g: &TurnBasedGame, values: &[f64], player: Player) -> PositionalStrategy {
    let mut choices = vec![None; g.n_nodes()];
    for node in 0..g.n_nodes() {
        if g.owner(node) != Some(player) {
            continue;
        }
        let mut best: Option<(u32, f64)> = None;
        for (i, &e) in g.edges(node).iter().enumerate() {
            let val = values[e];
            let better = match &best {
                None => true,
                Some((_, b)) => match player {
                    Player::Min => val < *b,
                    Player::Max => val > *b,
                },
            };
            if better {
                best = Some((i as u32, val));
            }
        }
        choices[node] = best.map(|(i, _)| i);
    }
    PositionalStrategy { player, choices }
}

/// Per-state view of a solved game: the value at each state's first-mover
/// node.
pub fn state_values(g: &TurnBasedGame, values: &[f64]) -> Vec<f64> {
    (0..g.n_states())
        .map(|s| values[g.first_mover(crate::bra::BraStateId(s as u32))])
        .collect()
}

/// The chosen BRA action index of the first-moving player at a state, if
/// the strategy proposes a real move.
pub fn mover_action_at(
    g: &TurnBasedGame,
    strategy: &PositionalStrategy,
    state: crate::bra::BraStateId,
) -> Option<u32> {
    let fm = g.first_mover(state);
    let edge = strategy.choice(fm)? as usize;
    let resp = g.edges(fm)[edge];
    match g.kind(resp) {
        NodeKind::Responder { proposal, .. } => *proposal,
        _ => None,
    }
}

/// Nodes reachable from a node under the game's full edge relation;
/// convenience for tests and reports.
pub fn reachable_from(g: &TurnBasedGame, start: NodeId) -> Vec<bool> {
    let mut seen = vec![false; g.n_nodes()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(n) = stack.pop() {
        let succs: Vec<NodeId> = match g.stoch(n) {
            Some(st) => st.branches.iter().map(|(_, _, s)| *s).collect(),
            None => g.edges(n).to_vec(),
        };
        for s in succs {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}
