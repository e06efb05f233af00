use crate::model::Player;

use super::{NodeId, PositionalStrategy, TurnBasedGame};

/// Nodes from which player Min can reach the target set almost surely,
/// against every behaviour of Max (the adversary). Optional positional
/// strategies pin a player to a single edge per node, turning the
/// corresponding quantifier into a fixed choice.
///
/// Computed by the standard nested fixpoint: the greatest set `Y` such that
/// from `Y`, Min can reach the targets with positive probability while
/// staying in `Y`; on finite turn-based stochastic games this equals the
/// almost-sure winning set.
pub fn almost_sure_reach_set(
    g: &TurnBasedGame,
    fixed_min: Option<&PositionalStrategy>,
    fixed_max: Option<&PositionalStrategy>,
) -> Vec<bool> {
    let n = g.n_nodes();
    let edge_list = |node: NodeId| -> Vec<NodeId> {
        match g.owner(node) {
            Some(player) => {
                let fixed = match player {
                    Player::Min => fixed_min,
                    Player::Max => fixed_max,
                };
                match fixed.and_then(|s| s.choice(node)) {
                    Some(e) => vec![g.edges(node)[e as usize]],
                    None => g.edges(node).to_vec(),
                }
            }
            None => g
                .stoch(node)
                .expect("node without owner is stochastic")
                .branches
                .iter()
                .map(|(_, _, s)| *s)
                .collect(),
        }
    };
    let edges: Vec<Vec<NodeId>> = (0..n).map(edge_list).collect();

    let mut y = vec![true; n];
    loop {
        // Least fixpoint: reach the target with positive probability in one
        // more step while stochastic nodes stay inside Y entirely.
        let mut x = vec![false; n];
        loop {
            let mut changed = false;
            for node in 0..n {
                if x[node] {
                    continue;
                }
                let member = if g.is_target(node) {
                    y[node]
                } else if g.owner(node) == Some(Player::Min) {
                    y[node] && edges[node].iter().any(|&e| x[e])
                } else if g.owner(node) == Some(Player::Max) {
                    y[node] && !edges[node].is_empty() && edges[node].iter().all(|&e| x[e])
                } else {
                    y[node]
                        && edges[node].iter().all(|&e| y[e])
                        && edges[node].iter().any(|&e| x[e])
                };
                if member {
                    x[node] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if x == y {
            return y;
        }
        y = x;
    }
}
