//! The boundary region abstraction (BRA) of a PTGA.
//!
//! A BRA state is `(ℓ, ν, ζ)` with an exact rational valuation `ν` in the
//! closure of the region `ζ ⊆ inv(ℓ)`. A move names an action, a target
//! region in the future of `ζ`, and a boundary operator `inf`/`sup`; it is
//! available when the whole span `[ζ, ζ″]` stays inside the invariant and
//! the target region lies inside the action's guard. Performing a move
//! delays to the chosen boundary of the target region and then fires the
//! probabilistic branches of the edge.
//!
//! From a fixed initial configuration only finitely many states are
//! reachable (every reachable valuation's fractional signature is a
//! subsequence of a shift of the initial one), so the exploration below
//! terminates and yields a finite stochastic game.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::clockalg::{zone_between, ClockValuation, Region, Zone};
use crate::model::{ActionId, Configuration, LocationId, Player, Ptga};
use crate::rat::{self, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryOp {
    Inf,
    Sup,
}

/// A player's move `(a, ζ″, op)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BraAction {
    pub action: ActionId,
    pub target: Region,
    pub op: BoundaryOp,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BraState {
    pub location: LocationId,
    pub valuation: ClockValuation,
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BraStateId(pub u32);

impl BraStateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Resolved move data: the boundary delay and the merged successor
/// distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BraMove {
    pub delay: Rat,
    pub successors: Vec<(Rat, BraStateId)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BraError {
    #[error("initial configuration violates the location invariant")]
    InitViolatesInvariant,
    #[error("state count exceeded the safety cap of {0}")]
    StateCapExceeded(usize),
    #[error("dead state reached: no action available for either player at {0}")]
    DeadState(String),
    #[error("branch leads outside the target invariant at {0}")]
    BranchOutsideInvariant(String),
    #[error("action not enabled in this state")]
    NotEnabled,
    #[error("both players have only the bottom action")]
    BothBottom,
    #[error("clock algebra error: {0}")]
    Clock(#[from] crate::clockalg::ClockError),
}

/// Which proposed action the winner function selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    MinMoves,
    MaxMoves,
}

/// The winner function on boundary moves. Min's `(a, ζa, opa)` beats Max's
/// `(b, ζb, opb)` exactly when Min's move is strictly earlier: either `ζa`
/// strictly precedes `ζb`, or the regions coincide and Min is at the lower
/// boundary while Max is at the upper. All other cases (in particular every
/// tie) go to Max, matching the concrete rule that equal delays are
/// resolved in Max's favour.
pub fn bra_winner(
    min: Option<&BraAction>,
    max: Option<&BraAction>,
) -> Result<Winner, BraError> {
    match (min, max) {
        (None, None) => Err(BraError::BothBottom),
        (Some(_), None) => Ok(Winner::MinMoves),
        (None, Some(_)) => Ok(Winner::MaxMoves),
        (Some(alpha), Some(beta)) => {
            let strictly_earlier = alpha.target != beta.target
                && alpha.target.leads_to(&beta.target);
            let wins_boundary_tie = alpha.target == beta.target
                && alpha.op == BoundaryOp::Inf
                && beta.op == BoundaryOp::Sup;
            if strictly_earlier || wins_boundary_tie {
                Ok(Winner::MinMoves)
            } else {
                Ok(Winner::MaxMoves)
            }
        }
    }
}

/// The winner function used when solving for the lower value, where Max
/// commits to a move and Min undercuts with any strictly smaller delay.
/// Min additionally wins boundary ties at `inf` against an unattained
/// boundary: if Max's chosen boundary delay is not realised inside the
/// target region, Max must overshoot it by some positive amount, and Min's
/// `inf` move into the same region undercuts. When the boundary is attained
/// exactly, equal delays go to Max as usual.
pub fn bra_winner_lower(
    state_valuation: &ClockValuation,
    min: Option<&BraAction>,
    max: Option<&BraAction>,
) -> Result<Winner, BraError> {
    match (min, max) {
        (None, None) => Err(BraError::BothBottom),
        (Some(_), None) => Ok(Winner::MinMoves),
        (None, Some(_)) => Ok(Winner::MaxMoves),
        (Some(alpha), Some(beta)) => {
            let strictly_earlier = alpha.target != beta.target
                && alpha.target.leads_to(&beta.target);
            let undercuts_tie = alpha.target == beta.target
                && alpha.op == BoundaryOp::Inf
                && !boundary_attained(state_valuation, beta);
            if strictly_earlier || undercuts_tie {
                Ok(Winner::MinMoves)
            } else {
                Ok(Winner::MaxMoves)
            }
        }
    }
}

/// Does the action's boundary delay land inside the target region itself
/// (as opposed to its closure)?
pub fn boundary_attained(nu: &ClockValuation, action: &BraAction) -> bool {
    let Some((lo, hi)) = action.target.delay_interval_from(nu) else {
        return false;
    };
    let t = match action.op {
        BoundaryOp::Inf => lo,
        BoundaryOp::Sup => hi,
    };
    match nu.elapse(&t) {
        Ok(w) => action.target.contains(&w),
        Err(_) => false,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub state_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            state_cap: 1_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BraGame {
    pub model: Arc<Ptga>,
    states: Vec<BraState>,
    min_actions: Vec<Vec<BraAction>>,
    max_actions: Vec<Vec<BraAction>>,
    min_moves: Vec<Vec<BraMove>>,
    max_moves: Vec<Vec<BraMove>>,
    targets: Vec<bool>,
    init: BraStateId,
}

impl BraGame {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, id: BraStateId) -> &BraState {
        &self.states[id.index()]
    }

    pub fn states(&self) -> impl Iterator<Item = (BraStateId, &BraState)> {
        self.states
            .iter()
            .enumerate()
            .map(|(i, s)| (BraStateId(i as u32), s))
    }

    pub fn init_state(&self) -> BraStateId {
        self.init
    }

    pub fn is_target(&self, id: BraStateId) -> bool {
        self.targets[id.index()]
    }

    pub fn actions(&self, player: Player, id: BraStateId) -> &[BraAction] {
        match player {
            Player::Min => &self.min_actions[id.index()],
            Player::Max => &self.max_actions[id.index()],
        }
    }

    pub fn moves(&self, player: Player, id: BraStateId) -> &[BraMove] {
        match player {
            Player::Min => &self.min_moves[id.index()],
            Player::Max => &self.max_moves[id.index()],
        }
    }

    /// Finds the state for a concrete configuration embedded as
    /// `(ℓ, ν, [ν])`.
    pub fn find_embedded(&self, config: &Configuration) -> Option<BraStateId> {
        let region = Region::of(&config.valuation);
        self.states
            .iter()
            .position(|s| {
                s.location == config.location
                    && s.valuation == config.valuation
                    && s.region == region
            })
            .map(|i| BraStateId(i as u32))
    }

    /// The state closest to a concrete configuration: the exact embedding
    /// when present, otherwise the same-region state with the nearest
    /// valuation (values are regionally non-expansive, so its decision is
    /// near-optimal for the configuration), otherwise the nearest state
    /// whose region closure contains the valuation.
    pub fn find_nearest(&self, config: &Configuration) -> Option<(BraStateId, Rat)> {
        if let Some(id) = self.find_embedded(config) {
            return Some((id, Rat::from_integer(0.into())));
        }
        let region = Region::of(&config.valuation);
        let mut best: Option<(BraStateId, Rat)> = None;
        for (i, s) in self.states.iter().enumerate() {
            if s.location != config.location || s.region != region {
                continue;
            }
            let d = s
                .valuation
                .sup_distance(&config.valuation)
                .expect("same clock set");
            if best.as_ref().map(|(_, b)| d < *b).unwrap_or(true) {
                best = Some((BraStateId(i as u32), d));
            }
        }
        if best.is_some() {
            return best;
        }
        for (i, s) in self.states.iter().enumerate() {
            if s.location != config.location || !s.region.closure_contains(&config.valuation) {
                continue;
            }
            let d = s
                .valuation
                .sup_distance(&config.valuation)
                .expect("same clock set");
            if best.as_ref().map(|(_, b)| d < *b).unwrap_or(true) {
                best = Some((BraStateId(i as u32), d));
            }
        }
        best
    }

    pub fn render_state(&self, id: BraStateId) -> String {
        let s = self.state(id);
        format!(
            "({}, {}, {})",
            self.model.location_name(s.location),
            s.valuation.render(&self.model.clocks),
            s.region.render(&self.model.clocks)
        )
    }

    pub fn render_action(&self, a: &BraAction) -> String {
        format!(
            "({}, {}, {})",
            self.model.action_name(a.action),
            a.target.render(&self.model.clocks),
            match a.op {
                BoundaryOp::Inf => "inf",
                BoundaryOp::Sup => "sup",
            }
        )
    }
}

/// Enumerates the enabled boundary moves of both players in a state:
/// all `(a, ζ″, op)` with `ζ →* ζ″`, `[ζ, ζ″] ⊆ inv(ℓ)` and
/// `ζ″ ⊆ E(ℓ, a)`. Empty lists mean the player proposes ⊥.
pub fn enabled_bra_actions(
    model: &Ptga,
    state: &BraState,
) -> (Vec<BraAction>, Vec<BraAction>) {
    let inv = model.invariant_zone(state.location);
    let edges: Vec<(&crate::model::EdgeDef, Zone)> = model
        .edges_from(state.location)
        .map(|e| (e, model.guard_zone(e)))
        .collect();
    let mut min_actions = Vec::new();
    let mut max_actions = Vec::new();
    let mut span: Option<Zone> = None;
    for region in state.region.future_chain() {
        let region_zone = region.to_zone();
        let new_span = match &span {
            None => region_zone.clone(),
            Some(z) => z.hull(&region_zone),
        };
        if !new_span.included_in(&inv) {
            break;
        }
        span = Some(new_span);
        for (edge, guard) in &edges {
            if region_zone.included_in(guard) {
                for op in [BoundaryOp::Inf, BoundaryOp::Sup] {
                    let action = BraAction {
                        action: edge.action,
                        target: region.clone(),
                        op,
                    };
                    match model.owner(edge.action) {
                        Player::Min => min_actions.push(action),
                        Player::Max => max_actions.push(action),
                    }
                }
            }
        }
    }
    (min_actions, max_actions)
}

/// The boundary delay `op_{ν+t∈ζ″} t` of an enabled action.
pub fn bra_delay(state: &BraState, action: &BraAction) -> Result<Rat, BraError> {
    let (lo, hi) = action.target.delay_bounds(&state.valuation)?;
    Ok(match action.op {
        BoundaryOp::Inf => lo,
        BoundaryOp::Sup => hi,
    })
}

/// The successor distribution of an enabled action: the boundary valuation
/// `ν″` is taken at the action's endpoint, each branch resets its clocks in
/// both `ν″` and the target region, and branches with identical resulting
/// states merge by summing probabilities.
pub fn bra_successor_states(
    model: &Ptga,
    state: &BraState,
    action: &BraAction,
) -> Result<Vec<(Rat, BraState)>, BraError> {
    let delay = bra_delay(state, action)?;
    let boundary = state.valuation.elapse(&delay)?;
    let edge = model
        .edge(state.location, action.action)
        .ok_or(BraError::NotEnabled)?;
    let mut merged: Vec<(Rat, BraState)> = Vec::new();
    for branch in &edge.branches {
        let valuation = boundary.reset(&branch.resets);
        let region = action.target.reset(&branch.resets);
        if !region
            .to_zone()
            .included_in(&model.invariant_zone(branch.target))
        {
            return Err(BraError::BranchOutsideInvariant(format!(
                "({}, {})",
                model.location_name(branch.target),
                region.render(&model.clocks)
            )));
        }
        debug_assert!(region.closure_contains(&valuation));
        let succ = BraState {
            location: branch.target,
            valuation,
            region,
        };
        match merged.iter_mut().find(|(_, s)| *s == succ) {
            Some((p, _)) => *p += branch.prob.clone(),
            None => merged.push((branch.prob.clone(), succ)),
        }
    }
    Ok(merged)
}

/// Breadth-first closure of the BRA from the embedded initial
/// configuration. States are deduplicated by exact
/// `(location, valuation, region)` equality and finally sorted into a
/// canonical order, so the result does not depend on exploration
/// scheduling.
pub fn build_reachable_bra(
    model: &Arc<Ptga>,
    init: &Configuration,
    options: BuildOptions,
) -> Result<BraGame, BraError> {
    if !model
        .invariant_zone(init.location)
        .contains_valuation(&init.valuation)
    {
        return Err(BraError::InitViolatesInvariant);
    }
    let init_state = BraState {
        location: init.location,
        valuation: init.valuation.clone(),
        region: Region::of(&init.valuation),
    };

    let mut states: Vec<BraState> = Vec::new();
    let mut index: HashMap<BraState, usize> = HashMap::new();
    let mut frontier = std::collections::VecDeque::new();
    states.push(init_state.clone());
    index.insert(init_state, 0);
    frontier.push_back(0usize);

    // (state, player, action, delay, successors) resolved during the walk.
    let mut actions: Vec<(Vec<BraAction>, Vec<BraAction>)> = Vec::new();
    let mut resolved: HashMap<(usize, Player, usize), (Rat, Vec<(Rat, usize)>)> = HashMap::new();
    actions.resize(1, (Vec::new(), Vec::new()));

    while let Some(si) = frontier.pop_front() {
        let state = states[si].clone();
        let (min_acts, max_acts) = enabled_bra_actions(model, &state);
        if min_acts.is_empty() && max_acts.is_empty() {
            return Err(BraError::DeadState(format!(
                "({}, {})",
                model.location_name(state.location),
                state.valuation.render(&model.clocks)
            )));
        }
        for (player, acts) in [(Player::Min, &min_acts), (Player::Max, &max_acts)] {
            for (ai, action) in acts.iter().enumerate() {
                let delay = bra_delay(&state, action)?;
                debug_assert!(rat::is_nonneg(&delay));
                debug_assert!(delay <= rat::int(model.bound() as i64));
                let succs = bra_successor_states(model, &state, action)?;
                let mut ids = Vec::with_capacity(succs.len());
                for (p, succ) in succs {
                    let id = match index.get(&succ) {
                        Some(&id) => id,
                        None => {
                            let id = states.len();
                            if id >= options.state_cap {
                                return Err(BraError::StateCapExceeded(options.state_cap));
                            }
                            states.push(succ.clone());
                            index.insert(succ, id);
                            actions.resize(id + 1, (Vec::new(), Vec::new()));
                            frontier.push_back(id);
                            id
                        }
                    };
                    ids.push((p, id));
                }
                resolved.insert((si, player, ai), (delay, ids));
            }
        }
        actions[si] = (min_acts, max_acts);
    }

    // Canonical final order.
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by(|&a, &b| {
        let ka = (&states[a].location, &states[a].region, &states[a].valuation);
        let kb = (&states[b].location, &states[b].region, &states[b].valuation);
        ka.cmp(&kb)
    });
    let mut remap = vec![0usize; states.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }

    let n = states.len();
    let mut out_states = Vec::with_capacity(n);
    let mut min_actions = vec![Vec::new(); n];
    let mut max_actions = vec![Vec::new(); n];
    let mut min_moves = vec![Vec::new(); n];
    let mut max_moves = vec![Vec::new(); n];
    let mut targets = vec![false; n];
    for &old in &order {
        out_states.push(states[old].clone());
    }
    for old in 0..n {
        let new = remap[old];
        targets[new] = model.is_target(states[old].location);
        let (min_a, max_a) = actions[old].clone();
        for (player, acts) in [(Player::Min, min_a), (Player::Max, max_a)] {
            for ai in 0..acts.len() {
                let (delay, ids) = resolved
                    .get(&(old, player, ai))
                    .expect("move resolved during exploration")
                    .clone();
                let mv = BraMove {
                    delay,
                    successors: ids
                        .into_iter()
                        .map(|(p, id)| (p, BraStateId(remap[id] as u32)))
                        .collect(),
                };
                match player {
                    Player::Min => min_moves[new].push(mv),
                    Player::Max => max_moves[new].push(mv),
                }
            }
            match player {
                Player::Min => min_actions[new] = acts,
                Player::Max => max_actions[new] = acts,
            }
        }
    }

    Ok(BraGame {
        model: Arc::clone(model),
        states: out_states,
        min_actions,
        max_actions,
        min_moves,
        max_moves,
        targets,
        init: BraStateId(remap[0] as u32),
    })
}

impl BraGame {
    /// Every reachable valuation's fractional signature must be a
    /// subsequence of some shift of the initial signature; returns the
    /// offending state if not.
    pub fn check_signature_bound(&self) -> Result<(), BraStateId> {
        use crate::clockalg::FracSignature;
        let init_sig = FracSignature::of(&self.states[self.init.index()].valuation);
        let shifts: Vec<FracSignature> = (0..init_sig.len())
            .map(|k| init_sig.k_shift(k).expect("k within range"))
            .collect();
        for (id, s) in self.states() {
            let sig = FracSignature::of(&s.valuation);
            if !shifts.iter().any(|sh| sig.subsequence_of(sh)) {
                return Err(id);
            }
        }
        Ok(())
    }

    /// Checks the action span condition `[ζ, ζ″] ⊆ inv(ℓ)` for an already
    /// enumerated action; exposed for tests.
    pub fn action_span_ok(&self, id: BraStateId, action: &BraAction) -> bool {
        let s = self.state(id);
        let inv = self.model.invariant_zone(s.location);
        match zone_between(&s.region, &action.target) {
            Ok(z) => z.included_in(&inv),
            Err(_) => false,
        }
    }
}
