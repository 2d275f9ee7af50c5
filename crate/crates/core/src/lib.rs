//! Stackelberg and approximately optimal extensive-form correlated equilibria
//! for two-player, turn-taking, acyclic stochastic games, in exact rational
//! arithmetic, together with an explicit-polyline oracle used to certify the
//! solvers on small instances.

pub mod cli;
pub mod decoder;
pub mod engine;
pub mod format;
pub mod game;
pub mod generators;
pub mod oracle;
pub mod punishment;
pub mod rational;
pub mod solution;
pub mod solver;

pub use game::{History, StochasticGame};
pub use rational::{Direction, Point, Rational};
pub use solution::{Mode, Solution};
pub use solver::{solve_efce, solve_sefce};
