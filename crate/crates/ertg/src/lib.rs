//! Solver for expected reachability-time games on probabilistic timed game
//! arenas (PTGAs).
//!
//! Two players, Min and Max, simultaneously propose timed moves of a
//! probabilistic timed automaton; the shorter delay is performed (ties go to
//! Max) and Min tries to minimise, Max to maximise, the expected total time
//! until a target location is reached. The crate builds the finite boundary
//! region abstraction of a PTGA for a fixed initial configuration, solves
//! the resulting stochastic game by value iteration (with an exact
//! strategy-improvement mode over rationals), decides threshold queries, and
//! cross-validates against a Monte Carlo simulator of the concrete
//! semantics.

pub mod bra;
pub mod clockalg;
pub mod game;
pub mod model;
pub mod parser;
pub mod pipeline;
pub mod qsf;
pub mod rat;
pub mod sim;
pub mod testgen;

pub use rat::Rat;
