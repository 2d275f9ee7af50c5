//! Entry points for the exact Stackelberg solver and the approximate EFCE
//! solver.

use crate::game::StochasticGame;
use crate::rational::{Direction, Rational};
use crate::solution::{solve, Mode, Solution, SolveError};

/// Exact leader-optimal Stackelberg extensive-form correlated equilibrium.
pub fn solve_sefce(g: &StochasticGame) -> Result<Solution, SolveError> {
    solve(g, Mode::Sefce)
}

/// An `epsilon`-EFCE whose objective score along `objective` is within
/// `epsilon` of the best exact EFCE. `epsilon` must be a positive dyadic.
pub fn solve_efce(
    g: &StochasticGame,
    objective: Direction,
    epsilon: Rational,
) -> Result<Solution, SolveError> {
    solve(g, Mode::Efce { objective, epsilon })
}
