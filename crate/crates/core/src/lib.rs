//! Sequential Tullock contests: subgame-perfect equilibria for arbitrary move
//! sequences, behavioral agents, a simulator of the laboratory protocol and
//! the statistics used to analyze its logs.
//!
//! ```
//! use seqcontest::contest::{ContestSpec, MoveSequence};
//! use seqcontest::equilibrium::solve_spne;
//!
//! let seq: MoveSequence = "1,2".parse().unwrap();
//! let eq = solve_spne(&ContestSpec::lab(seq)).unwrap();
//! assert!((eq.scaled_aggregate - 180.0).abs() < 1e-9);
//! ```
//!
//! The runnable programs under `examples/` walk through each capability.

pub mod behavior;
pub mod cli;
pub mod config;
pub mod contest;
pub mod equilibrium;
pub mod simulate;
pub mod stats;
