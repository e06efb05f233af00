//! Finite turn-based stochastic games for expected reachability time.
//!
//! The BRA's simultaneous moves are unrolled into three node layers: a
//! first-mover node per state (Min in the upper-value game, Max in the
//! lower-value game), a responder node per (state, proposed move), and a
//! stochastic node per performed move. The responder's options are the
//! winner-function images of the opponent's available moves, so one
//! first-mover/responder/stochastic round applies exactly one step of the
//! Bellman operator
//!
//! `V(s) ← opt_α opt_β { τ(s, w(α,β)) + Σ p(s, w(α,β))(s') · V(s') }`.

mod exact;
mod reach;
mod solve;

pub use exact::{
    decide_threshold, evaluate_strategy_pair, solve_exact, ExactSolved, ThresholdQuery,
    ThresholdVerdict,
};
pub use reach::almost_sure_reach_set;
pub use solve::{greedy, mover_action_at, reachable_from, solve, state_values, Solved, SolverOptions};

use std::ops::Add;

use num::traits::Zero;
use thiserror::Error;

use crate::bra::{bra_winner, bra_winner_lower, BraGame, BraStateId, Winner};
use crate::model::Player;
use crate::rat::{self, Rat};

/// Whether the game computes the upper value (Min commits first and Max
/// responds) or the lower value (the other way around).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Upper,
    Lower,
}

impl Sense {
    /// The player owning the first-mover nodes.
    pub fn mover(self) -> Player {
        match self {
            Sense::Upper => Player::Min,
            Sense::Lower => Player::Max,
        }
    }

    pub fn responder(self) -> Player {
        self.mover().opponent()
    }
}

/// A value in `[0, ∞]`, exact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtVal {
    Fin(Rat),
    Inf,
}

impl ExtVal {
    pub fn zero() -> ExtVal {
        ExtVal::Fin(Rat::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtVal::Fin(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtVal::Fin(r) => rat::to_f64(r),
            ExtVal::Inf => f64::INFINITY,
        }
    }

    pub fn scale(&self, p: &Rat) -> ExtVal {
        match self {
            ExtVal::Fin(r) => ExtVal::Fin(r * p),
            ExtVal::Inf => ExtVal::Inf,
        }
    }

    pub fn render(&self) -> String {
        match self {
            ExtVal::Fin(r) => rat::display(r),
            ExtVal::Inf => "inf".to_string(),
        }
    }
}

impl Add for ExtVal {
    type Output = ExtVal;
    fn add(self, other: ExtVal) -> ExtVal {
        match (self, other) {
            (ExtVal::Fin(a), ExtVal::Fin(b)) => ExtVal::Fin(a + b),
            _ => ExtVal::Inf,
        }
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// The state's decision node for the first-moving player.
    FirstMover { state: BraStateId },
    /// The opponent's decision node once the mover proposed a move
    /// (`None` is the ⊥ proposal).
    Responder {
        state: BraStateId,
        proposal: Option<u32>,
    },
    /// A performed move: the winner's delay and branch distribution.
    Stochastic {
        state: BraStateId,
        player: Player,
        action: u32,
    },
}

#[derive(Debug, Clone)]
pub struct StochData {
    pub delay: Rat,
    pub delay_f64: f64,
    pub branches: Vec<(Rat, f64, NodeId)>,
}

#[derive(Debug, Clone)]
pub struct TurnBasedGame {
    pub sense: Sense,
    kinds: Vec<NodeKind>,
    /// Outgoing edges of decision nodes (empty for stochastic nodes).
    edges: Vec<Vec<NodeId>>,
    stoch: Vec<Option<StochData>>,
    target: Vec<bool>,
    fm_of_state: Vec<NodeId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("value iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("policy iteration did not terminate within {0} improvements")]
    PolicyCycle(usize),
    #[error("the game has a zero-time cycle; exact solving requires a structurally non-Zeno model")]
    ZeroTimeCycle,
    #[error("exact certification failed: strategy bounds do not meet")]
    CertificationFailed,
    #[error("strategy is not total on the player's nodes")]
    PartialStrategy,
    #[error("singular linear system in strategy evaluation")]
    SingularSystem,
}

/// A per-node edge choice, total on the nodes the player owns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalStrategy {
    pub player: Player,
    pub choices: Vec<Option<u32>>,
}

impl PositionalStrategy {
    pub fn choice(&self, node: NodeId) -> Option<u32> {
        self.choices[node]
    }
}

impl TurnBasedGame {
    /// Assembles a game from raw parts. `to_turn_based` is the intended
    /// constructor; this one exists for hand-built games in tests and
    /// experiments. Stochastic branch probabilities must each sum to 1 and
    /// decision nodes must have at least one edge.
    pub fn from_raw(
        sense: Sense,
        kinds: Vec<NodeKind>,
        edges: Vec<Vec<NodeId>>,
        stoch: Vec<Option<StochData>>,
        target: Vec<bool>,
        fm_of_state: Vec<NodeId>,
    ) -> TurnBasedGame {
        assert_eq!(kinds.len(), edges.len());
        assert_eq!(kinds.len(), stoch.len());
        assert_eq!(kinds.len(), target.len());
        for n in 0..kinds.len() {
            match &kinds[n] {
                NodeKind::Stochastic { .. } => {
                    let data = stoch[n].as_ref().expect("stochastic node carries data");
                    assert!(!data.branches.is_empty());
                }
                _ => assert!(!edges[n].is_empty(), "decision node {n} has no edges"),
            }
        }
        TurnBasedGame {
            sense,
            kinds,
            edges,
            stoch,
            target,
            fm_of_state,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, n: NodeId) -> &NodeKind {
        &self.kinds[n]
    }

    pub fn edges(&self, n: NodeId) -> &[NodeId] {
        &self.edges[n]
    }

    pub fn stoch(&self, n: NodeId) -> Option<&StochData> {
        self.stoch[n].as_ref()
    }

    pub fn is_target(&self, n: NodeId) -> bool {
        self.target[n]
    }

    pub fn first_mover(&self, s: BraStateId) -> NodeId {
        self.fm_of_state[s.index()]
    }

    pub fn n_states(&self) -> usize {
        self.fm_of_state.len()
    }

    /// The player deciding at a node, if it is a decision node.
    pub fn owner(&self, n: NodeId) -> Option<Player> {
        match self.kinds[n] {
            NodeKind::FirstMover { .. } => Some(self.sense.mover()),
            NodeKind::Responder { .. } => Some(self.sense.responder()),
            NodeKind::Stochastic { .. } => None,
        }
    }

    /// One application of the Bellman operator: stochastic nodes read the
    /// previous vector at their successor states, responder and first-mover
    /// nodes fold the fresh layer below them. Targets stay 0.
    pub fn bellman_step(&self, v: &[ExtVal]) -> Vec<ExtVal> {
        assert_eq!(v.len(), self.n_nodes());
        let mut out = vec![ExtVal::zero(); self.n_nodes()];
        for n in 0..self.n_nodes() {
            if let Some(st) = &self.stoch[n] {
                let mut acc = ExtVal::Fin(st.delay.clone());
                for (p, _, succ) in &st.branches {
                    acc = acc + v[*succ].scale(p);
                }
                out[n] = acc;
            }
        }
        for n in 0..self.n_nodes() {
            if matches!(self.kinds[n], NodeKind::Responder { .. }) {
                out[n] = self.fold_children(n, &out);
            }
        }
        for n in 0..self.n_nodes() {
            if matches!(self.kinds[n], NodeKind::FirstMover { .. }) {
                out[n] = if self.target[n] {
                    ExtVal::zero()
                } else {
                    self.fold_children(n, &out)
                };
            }
        }
        out
    }

    fn fold_children(&self, n: NodeId, vals: &[ExtVal]) -> ExtVal {
        let it = self.edges[n].iter().map(|&e| vals[e].clone());
        if self.owner(n) == Some(Player::Min) {
            it.min().expect("decision node has edges")
        } else {
            it.max().expect("decision node has edges")
        }
    }

    /// `bellman_step` in floating point; used by the iterative solver.
    pub fn bellman_step_f64(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n_nodes());
        let mut out = vec![0.0; self.n_nodes()];
        let minimizer_at = |n: NodeId| self.owner(n) == Some(Player::Min);
        for n in 0..self.n_nodes() {
            if let Some(st) = &self.stoch[n] {
                let mut acc = st.delay_f64;
                for (_, p, succ) in &st.branches {
                    acc += p * v[*succ];
                }
                out[n] = acc;
            }
        }
        for n in 0..self.n_nodes() {
            if matches!(self.kinds[n], NodeKind::Responder { .. }) {
                out[n] = fold_f64(self.edges[n].iter().map(|&e| out[e]), minimizer_at(n));
            }
        }
        for n in 0..self.n_nodes() {
            if matches!(self.kinds[n], NodeKind::FirstMover { .. }) {
                out[n] = if self.target[n] {
                    0.0
                } else {
                    fold_f64(self.edges[n].iter().map(|&e| out[e]), minimizer_at(n))
                };
            }
        }
        out
    }

    /// `n`-fold Bellman step from the zero vector, exact.
    pub fn n_step_values(&self, n: usize) -> Vec<ExtVal> {
        let mut v = vec![ExtVal::zero(); self.n_nodes()];
        for _ in 0..n {
            v = self.bellman_step(&v);
        }
        v
    }

    /// True when the game has a cycle whose stochastic nodes all carry zero
    /// delay; such cycles only arise from models that fail the structural
    /// non-Zenoness check.
    pub fn has_zero_time_cycle(&self) -> bool {
        // DFS over edges, skipping positive-delay stochastic nodes.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            White,
            Gray,
            Black,
        }
        let succs = |n: NodeId| -> Vec<NodeId> {
            if let Some(st) = &self.stoch[n] {
                if st.delay.is_zero() {
                    st.branches.iter().map(|(_, _, s)| *s).collect()
                } else {
                    Vec::new()
                }
            } else if self.target[n] {
                Vec::new()
            } else {
                self.edges[n].clone()
            }
        };
        let mut mark = vec![Mark::White; self.n_nodes()];
        let mut stack: Vec<(NodeId, usize)> = Vec::new();
        for root in 0..self.n_nodes() {
            if mark[root] != Mark::White {
                continue;
            }
            mark[root] = Mark::Gray;
            stack.push((root, 0));
            while let Some((n, i)) = stack.pop() {
                let sn = succs(n);
                if i < sn.len() {
                    stack.push((n, i + 1));
                    let w = sn[i];
                    match mark[w] {
                        Mark::Gray => return true,
                        Mark::White => {
                            mark[w] = Mark::Gray;
                            stack.push((w, 0));
                        }
                        Mark::Black => {}
                    }
                } else {
                    mark[n] = Mark::Black;
                }
            }
        }
        false
    }
}

fn fold_f64(vals: impl Iterator<Item = f64>, minimize: bool) -> f64 {
    let mut acc: Option<f64> = None;
    for v in vals {
        acc = Some(match acc {
            None => v,
            Some(a) => {
                if minimize {
                    a.min(v)
                } else {
                    a.max(v)
                }
            }
        });
    }
    acc.expect("decision node has edges")
}

/// Builds the turn-based game of a BRA for the requested sense.
pub fn to_turn_based(bra: &BraGame, sense: Sense) -> TurnBasedGame {
    let mover = sense.mover();
    let responder = mover.opponent();
    let n_states = bra.n_states();

    struct Builder {
        kinds: Vec<NodeKind>,
        edges: Vec<Vec<NodeId>>,
        stoch: Vec<Option<StochData>>,
        target: Vec<bool>,
        stoch_index: std::collections::HashMap<(u32, Player, u32), NodeId>,
    }

    impl Builder {
        fn push(&mut self, kind: NodeKind, tgt: bool) -> NodeId {
            self.kinds.push(kind);
            self.edges.push(Vec::new());
            self.stoch.push(None);
            self.target.push(tgt);
            self.kinds.len() - 1
        }

        fn stoch_node(
            &mut self,
            bra: &BraGame,
            fm_of_state: &[NodeId],
            sid: BraStateId,
            player: Player,
            ai: usize,
        ) -> NodeId {
            if let Some(&id) = self.stoch_index.get(&(sid.0, player, ai as u32)) {
                return id;
            }
            let mv = &bra.moves(player, sid)[ai];
            let id = self.push(
                NodeKind::Stochastic {
                    state: sid,
                    player,
                    action: ai as u32,
                },
                false,
            );
            self.stoch[id] = Some(StochData {
                delay: mv.delay.clone(),
                delay_f64: rat::to_f64(&mv.delay),
                branches: mv
                    .successors
                    .iter()
                    .map(|(p, succ)| (p.clone(), rat::to_f64(p), fm_of_state[succ.index()]))
                    .collect(),
            });
            self.stoch_index.insert((sid.0, player, ai as u32), id);
            id
        }
    }

    let mut b = Builder {
        kinds: Vec::new(),
        edges: Vec::new(),
        stoch: Vec::new(),
        target: Vec::new(),
        stoch_index: std::collections::HashMap::new(),
    };
    let mut fm_of_state = vec![0usize; n_states];

    // First-mover nodes first so that node ids of states are stable.
    for s in 0..n_states {
        let sid = BraStateId(s as u32);
        fm_of_state[s] = b.push(NodeKind::FirstMover { state: sid }, bra.is_target(sid));
    }

    for s in 0..n_states {
        let sid = BraStateId(s as u32);
        let state = bra.state(sid);
        let mover_actions = bra.actions(mover, sid);
        let responder_actions = bra.actions(responder, sid);

        let proposals: Vec<Option<u32>> = if mover_actions.is_empty() {
            vec![None]
        } else {
            (0..mover_actions.len() as u32).map(Some).collect()
        };
        for proposal in proposals {
            let resp_id = b.push(
                NodeKind::Responder {
                    state: sid,
                    proposal,
                },
                false,
            );
            b.edges[fm_of_state[s]].push(resp_id);

            let alpha = proposal.map(|ai| &mover_actions[ai as usize]);
            let mut resolved: Vec<NodeId> = Vec::new();
            let betas: Vec<Option<usize>> = if responder_actions.is_empty() {
                vec![None]
            } else {
                (0..responder_actions.len()).map(Some).collect()
            };
            for beta_idx in betas {
                let beta = beta_idx.map(|i| &responder_actions[i]);
                // The winner function takes (Min's move, Max's move).
                let (min_act, max_act) = match mover {
                    Player::Min => (alpha, beta),
                    Player::Max => (beta, alpha),
                };
                let winner = match sense {
                    Sense::Upper => bra_winner(min_act, max_act),
                    Sense::Lower => bra_winner_lower(&state.valuation, min_act, max_act),
                }
                .expect("both-bottom states rejected at build");
                let (w_player, w_ai) = match winner {
                    Winner::MinMoves => {
                        if mover == Player::Min {
                            (Player::Min, proposal.unwrap() as usize)
                        } else {
                            (Player::Min, beta_idx.unwrap())
                        }
                    }
                    Winner::MaxMoves => {
                        if mover == Player::Max {
                            (Player::Max, proposal.unwrap() as usize)
                        } else {
                            (Player::Max, beta_idx.unwrap())
                        }
                    }
                };
                let node = b.stoch_node(bra, &fm_of_state, sid, w_player, w_ai);
                if !resolved.contains(&node) {
                    resolved.push(node);
                }
            }
            b.edges[resp_id] = resolved;
        }
    }

    TurnBasedGame {
        sense,
        kinds: b.kinds,
        edges: b.edges,
        stoch: b.stoch,
        target: b.target,
        fm_of_state,
    }
}
