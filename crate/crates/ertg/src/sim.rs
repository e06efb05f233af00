//! Concrete semantics of a PTGA: single steps, finite-play measures, and
//! seeded Monte Carlo estimation of expected reachability time under
//! strategies adapted from the solved abstraction.
//!
//! Both players propose timed moves (or ⊥ when nothing is available); the
//! move with the strictly smaller delay is performed, ties going to Max.
//! Boundary moves of the abstraction whose infimum or supremum is not
//! attained inside the target region are realised up to a configurable
//! `ε`-shift, as licensed by ε-optimality.

use num::traits::{One, Zero};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bra::{BoundaryOp, BraGame};
use crate::clockalg::Region;
use crate::game::{mover_action_at, PositionalStrategy, TurnBasedGame};
use crate::model::{ActionId, Configuration, Player, Ptga};
use crate::rat::{self, Rat};

pub use crate::model::Configuration as SimConfiguration;

/// A proposed timed move `(t, a)`; the ⊥ proposal is `None` at call sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedMove {
    pub delay: Rat,
    pub action: ActionId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("move ({0}) is not available in the current configuration")]
    UnavailableMove(String),
    #[error("both players proposed bottom")]
    BothBottom,
    #[error("invalid transition: {0}")]
    InvalidTransition(String),
    #[error("configuration is outside the explored abstraction")]
    OutsideExploredGraph,
    #[error("boundary move cannot be realised from this configuration")]
    UnrealizableMove,
    #[error("clock error: {0}")]
    Clock(#[from] crate::clockalg::ClockError),
}

/// Availability per the semantics: the invariant holds throughout the
/// delay (invariants are convex, so checking both endpoints suffices), the
/// guard holds at its end, and no clock passes the bound.
pub fn move_available(model: &Ptga, config: &Configuration, mv: &TimedMove) -> bool {
    if !rat::is_nonneg(&mv.delay) {
        return false;
    }
    let Ok(end) = config.valuation.elapse(&mv.delay) else {
        return false;
    };
    let inv = model.invariant_zone(config.location);
    if !inv.contains_valuation(&config.valuation) || !inv.contains_valuation(&end) {
        return false;
    }
    let Some(edge) = model.edge(config.location, mv.action) else {
        return false;
    };
    model.guard_zone(edge).contains_valuation(&end)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub performed_by: Player,
    pub performed: TimedMove,
    pub distribution: Vec<(Rat, Configuration)>,
}

/// One concrete step: validates both proposals, picks the winner (Min wins
/// only with a strictly smaller delay or when Max proposes ⊥), fires the
/// winner's branches after its delay, and merges branches with identical
/// results.
pub fn concrete_step(
    model: &Ptga,
    config: &Configuration,
    min_move: Option<&TimedMove>,
    max_move: Option<&TimedMove>,
) -> Result<StepOutcome, SimError> {
    for mv in [min_move, max_move].into_iter().flatten() {
        if !move_available(model, config, mv) {
            return Err(SimError::UnavailableMove(format!(
                "{} after {}",
                model.action_name(mv.action),
                rat::display(&mv.delay)
            )));
        }
    }
    let (performed_by, performed) = match (min_move, max_move) {
        (None, None) => return Err(SimError::BothBottom),
        (Some(m), None) => (Player::Min, m.clone()),
        (None, Some(m)) => (Player::Max, m.clone()),
        (Some(mi), Some(ma)) => {
            if mi.delay < ma.delay {
                (Player::Min, mi.clone())
            } else {
                (Player::Max, ma.clone())
            }
        }
    };
    let end = config.valuation.elapse(&performed.delay)?;
    let edge = model
        .edge(config.location, performed.action)
        .expect("availability implies the edge exists");
    let mut distribution: Vec<(Rat, Configuration)> = Vec::new();
    for branch in &edge.branches {
        let valuation = end.reset(&branch.resets);
        let succ = Configuration {
            location: branch.target,
            valuation,
        };
        if !model
            .invariant_zone(succ.location)
            .contains_valuation(&succ.valuation)
        {
            return Err(SimError::InvalidTransition(format!(
                "branch lands outside the invariant of {}",
                model.location_name(succ.location)
            )));
        }
        match distribution.iter_mut().find(|(_, c)| *c == succ) {
            Some((p, _)) => *p += branch.prob.clone(),
            None => distribution.push((branch.prob.clone(), succ)),
        }
    }
    Ok(StepOutcome {
        performed_by,
        performed,
        distribution,
    })
}

/// A finite play: the start configuration and the proposed-move pairs with
/// their sampled outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Play {
    pub start: Configuration,
    pub steps: Vec<PlayStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayStep {
    pub min_move: Option<TimedMove>,
    pub max_move: Option<TimedMove>,
    pub next: Configuration,
}

impl Play {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &Configuration {
        self.steps.last().map(|s| &s.next).unwrap_or(&self.start)
    }
}

/// The cylinder probability of the play (product of branch probabilities)
/// and its accumulated time up to the first visit of a target location, or
/// over the whole play when no target is hit.
pub fn play_measure(model: &Ptga, play: &Play) -> Result<(Rat, Rat), SimError> {
    let mut probability = Rat::one();
    let mut time = Rat::zero();
    let mut hit = model.is_target(play.start.location);
    let mut current = play.start.clone();
    for step in &play.steps {
        let outcome = concrete_step(model, &current, step.min_move.as_ref(), step.max_move.as_ref())?;
        let p = outcome
            .distribution
            .iter()
            .find(|(_, c)| *c == step.next)
            .map(|(p, _)| p.clone())
            .ok_or_else(|| {
                SimError::InvalidTransition("recorded successor has probability zero".into())
            })?;
        probability *= p;
        if !hit {
            time += outcome.performed.delay.clone();
            if model.is_target(step.next.location) {
                hit = true;
            }
        }
        current = step.next.clone();
    }
    Ok((probability, time))
}

/// Something that proposes a timed move (or ⊥) in a configuration.
pub trait ConcreteStrategy {
    fn propose(&self, model: &Ptga, config: &Configuration)
        -> Result<Option<TimedMove>, SimError>;
}

/// Always proposes ⊥; the opponent for one-player models.
pub struct BotStrategy;

impl ConcreteStrategy for BotStrategy {
    fn propose(&self, _: &Ptga, _: &Configuration) -> Result<Option<TimedMove>, SimError> {
        Ok(None)
    }
}

/// Adapts a positional strategy extracted from a solved turn-based game to
/// the concrete semantics. The configuration is embedded as `(ℓ, ν, [ν])`
/// and the chosen boundary move `(a, ζ″, op)` is realised exactly when its
/// boundary delay is available, or shifted `ε` into the region otherwise.
pub struct BraStrategyAdapter<'a> {
    pub bra: &'a BraGame,
    pub game: &'a TurnBasedGame,
    pub strategy: &'a PositionalStrategy,
    pub eps_shift: Rat,
}

impl<'a> BraStrategyAdapter<'a> {
    pub fn new(
        bra: &'a BraGame,
        game: &'a TurnBasedGame,
        strategy: &'a PositionalStrategy,
    ) -> Self {
        // 2^-20 time units.
        let eps_shift = rat::ratio(1, 1 << 20);
        BraStrategyAdapter {
            bra,
            game,
            strategy,
            eps_shift,
        }
    }
}

impl ConcreteStrategy for BraStrategyAdapter<'_> {
    fn propose(
        &self,
        model: &Ptga,
        config: &Configuration,
    ) -> Result<Option<TimedMove>, SimError> {
        // ε-shifted moves leave the abstraction's valuation grid, so fall
        // back to the nearest same-region state; regional non-expansiveness
        // bounds the value drift by the accumulated shift.
        let (state, _) = self
            .bra
            .find_nearest(config)
            .ok_or(SimError::OutsideExploredGraph)?;
        let player = self.game.sense.mover();
        debug_assert_eq!(player, self.strategy.player);
        let Some(action_idx) = mover_action_at(self.game, self.strategy, state) else {
            return Ok(None);
        };
        let action = &self.bra.actions(player, state)[action_idx as usize];
        let (lo, hi) = action
            .target
            .delay_bounds(&config.valuation)
            .map_err(SimError::Clock)?;
        let exact = match action.op {
            BoundaryOp::Inf => lo.clone(),
            BoundaryOp::Sup => hi.clone(),
        };
        let candidate = TimedMove {
            delay: exact.clone(),
            action: action.action,
        };
        if move_available(model, config, &candidate) {
            return Ok(Some(candidate));
        }
        // Shift into the open region.
        if lo == hi {
            return Err(SimError::UnrealizableMove);
        }
        let width = &hi - &lo;
        let half = &width / rat::int(2);
        let shift = if self.eps_shift < half {
            self.eps_shift.clone()
        } else {
            half
        };
        let delay = match action.op {
            BoundaryOp::Inf => &lo + &shift,
            BoundaryOp::Sup => &hi - &shift,
        };
        let inside = config.valuation.elapse(&delay)?;
        if !action.target.contains(&inside) {
            return Err(SimError::UnrealizableMove);
        }
        let shifted = TimedMove {
            delay,
            action: action.action,
        };
        if !move_available(model, config, &shifted) {
            return Err(SimError::UnrealizableMove);
        }
        Ok(Some(shifted))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub mean: f64,
    pub stderr: f64,
    pub hits: usize,
    pub runs: usize,
    pub hit_fraction: f64,
    pub seed: u64,
}

fn mix_seed(seed: u64, run: u64) -> u64 {
    // splitmix64 over (seed, run) for independent per-run substreams.
    let mut z = seed ^ run.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples one branch by mapping a 64-bit uniform to the exact cumulative
/// thresholds of the distribution.
fn sample_branch<'a>(
    distribution: &'a [(Rat, Configuration)],
    rng: &mut impl RngCore,
) -> &'a Configuration {
    let u = rng.next_u64();
    let u_rat = Rat::new(u.into(), num::BigInt::from(1u128 << 64));
    let mut acc = Rat::zero();
    for (p, config) in distribution {
        acc += p.clone();
        if u_rat < acc {
            return config;
        }
    }
    &distribution.last().expect("nonempty distribution").1
}

/// Seeded Monte Carlo estimation of the expected time to reach a target
/// under the two strategies. Runs that do not reach a target within
/// `horizon` steps are excluded from the mean and reported through the hit
/// fraction instead.
pub fn simulate_expected_time(
    model: &Ptga,
    min_strategy: &dyn ConcreteStrategy,
    max_strategy: &dyn ConcreteStrategy,
    init: &Configuration,
    runs: usize,
    horizon: usize,
    seed: u64,
) -> Result<SimOutcome, SimError> {
    assert!(runs >= 1 && horizon >= 1);
    let mut times: Vec<f64> = Vec::new();
    for run in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, run as u64));
        let mut config = init.clone();
        let mut total = Rat::zero();
        if model.is_target(config.location) {
            times.push(0.0);
            continue;
        }
        for _ in 0..horizon {
            let min_move = min_strategy.propose(model, &config)?;
            let max_move = max_strategy.propose(model, &config)?;
            let outcome = concrete_step(model, &config, min_move.as_ref(), max_move.as_ref())?;
            total += outcome.performed.delay.clone();
            config = sample_branch(&outcome.distribution, &mut rng).clone();
            if model.is_target(config.location) {
                times.push(rat::to_f64(&total));
                break;
            }
        }
    }
    let hits = times.len();
    let mean = if hits > 0 {
        times.iter().sum::<f64>() / hits as f64
    } else {
        f64::NAN
    };
    let stderr = if hits > 1 {
        let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (hits - 1) as f64;
        (var / hits as f64).sqrt()
    } else {
        0.0
    };
    Ok(SimOutcome {
        mean,
        stderr,
        hits,
        runs,
        hit_fraction: hits as f64 / runs as f64,
        seed,
    })
}

/// Samples a play of bounded length under the strategies; used by
/// validity-replay tests.
pub fn sample_play(
    model: &Ptga,
    min_strategy: &dyn ConcreteStrategy,
    max_strategy: &dyn ConcreteStrategy,
    init: &Configuration,
    horizon: usize,
    seed: u64,
) -> Result<Play, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut play = Play {
        start: init.clone(),
        steps: Vec::new(),
    };
    let mut config = init.clone();
    for _ in 0..horizon {
        if model.is_target(config.location) {
            break;
        }
        let min_move = min_strategy.propose(model, &config)?;
        let max_move = max_strategy.propose(model, &config)?;
        let outcome = concrete_step(model, &config, min_move.as_ref(), max_move.as_ref())?;
        let next = sample_branch(&outcome.distribution, &mut rng).clone();
        play.steps.push(PlayStep {
            min_move,
            max_move,
            next: next.clone(),
        });
        config = next;
    }
    Ok(play)
}

/// Embeds a configuration and checks it matches a state of the
/// abstraction; convenience shared by adapters and the pipeline.
pub fn embedded_region(config: &Configuration) -> Region {
    Region::of(&config.valuation)
}
