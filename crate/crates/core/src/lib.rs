//! Symbolic synthesis and model checking for AIGER safety specifications.
//!
//! The pipeline: parse an ASCII AIGER circuit whose controllable inputs are
//! marked by the `controllable_` name prefix ([`aiger`]), lower it to a
//! symbolic safety game over BDDs ([`bdd`], [`game`]), solve the game by a
//! backward attractor fixpoint, extract a circuit-level controller from the
//! winning region ([`strategy`]), and check the result independently
//! ([`verify`]). The [`harness`] module runs solver configurations over
//! benchmark sets, judges answers, and emits score reports.

pub mod aiger;
pub mod bdd;
pub mod game;
pub mod gen;
pub mod harness;
pub mod strategy;
pub mod verify;

pub use aiger::{AigCircuit, InputPartition, Latch, LatchReset, Literal};
pub use bdd::{BddManager, BddVar, NodeRef};
pub use game::{GameResult, SafetyGame, SolveError, SolverOptions};
pub use strategy::{ExtractOptions, Solution};
pub use verify::{Trace, Verdict, VerifyLimits};
