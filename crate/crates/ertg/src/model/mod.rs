//! The probabilistic timed game arena data model.
//!
//! A PTGA owns a clock set with global bound `K`, locations with invariant
//! constraints, actions split between players Min and Max, per
//! (location, action) enabling guards, and probabilistic branch tables
//! mapping each (location, action) to a distribution over (reset set,
//! target location).

mod nonzeno;
mod validate;

pub use nonzeno::{NonZenoWitness, ZenoCheck};
pub use validate::{Diagnostic, ValidationReport};

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::clockalg::{ClockConstraint, ClockId, ClockValuation, Clocks, Zone};
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocationId(pub u32);

impl LocationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub u32);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    Min,
    Max,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Min => Player::Max,
            Player::Max => Player::Min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: ClockConstraint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    pub owner: Player,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub prob: Rat,
    pub resets: BTreeSet<ClockId>,
    pub target: LocationId,
}

/// One `(location, action)` row: the enabling guard and the distribution
/// over (reset set, target location).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeDef {
    pub source: LocationId,
    pub action: ActionId,
    pub guard: ClockConstraint,
    pub branches: Vec<Branch>,
}

/// A configuration `(ℓ, ν)` of the concrete semantics.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub location: LocationId,
    pub valuation: ClockValuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ptga {
    pub clocks: Arc<Clocks>,
    pub locations: Vec<Location>,
    pub actions: Vec<Action>,
    pub edges: Vec<EdgeDef>,
    pub targets: BTreeSet<LocationId>,
    /// Initial configuration declared in the model document, if any.
    pub init: Option<Configuration>,
}

impl Ptga {
    pub fn bound(&self) -> u32 {
        self.clocks.bound()
    }

    pub fn n_clocks(&self) -> usize {
        self.clocks.len()
    }

    pub fn location_name(&self, l: LocationId) -> &str {
        &self.locations[l.index()].name
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.index()].name
    }

    pub fn owner(&self, a: ActionId) -> Player {
        self.actions[a.index()].owner
    }

    pub fn lookup_location(&self, name: &str) -> Option<LocationId> {
        self.locations
            .iter()
            .position(|l| l.name == name)
            .map(|i| LocationId(i as u32))
    }

    pub fn edges_from(&self, l: LocationId) -> impl Iterator<Item = &EdgeDef> {
        self.edges.iter().filter(move |e| e.source == l)
    }

    pub fn edge(&self, l: LocationId, a: ActionId) -> Option<&EdgeDef> {
        self.edges
            .iter()
            .find(|e| e.source == l && e.action == a)
    }

    pub fn is_target(&self, l: LocationId) -> bool {
        self.targets.contains(&l)
    }

    pub fn invariant_zone(&self, l: LocationId) -> Zone {
        Zone::from_constraint(
            &self.locations[l.index()].invariant,
            self.n_clocks(),
            self.bound(),
        )
        .expect("invariant constants validated")
    }

    pub fn guard_zone(&self, edge: &EdgeDef) -> Zone {
        Zone::from_constraint(&edge.guard, self.n_clocks(), self.bound())
            .expect("guard constants validated")
    }

    /// The declared initial configuration, defaulting to all-zero clocks at
    /// the first declared location.
    pub fn init_configuration(&self) -> Configuration {
        self.init.clone().unwrap_or_else(|| Configuration {
            location: LocationId(0),
            valuation: ClockValuation::zero(self.n_clocks(), self.bound()),
        })
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate(self)
    }

    pub fn check_structural_non_zeno(&self) -> ZenoCheck {
        nonzeno::check(self)
    }
}
