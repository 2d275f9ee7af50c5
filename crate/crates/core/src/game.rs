//! Two-player, turn-taking, acyclic stochastic games over exact rationals.
//!
//! States are `1..=n` with `1` initial and `n` terminal; actions are `1..=m`.
//! All public accessors take 1-based indices.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{dyadic_exponent, format_rational, Rational};

/// Sparse successor distribution: `(next state, probability)` sorted by state,
/// zero entries omitted.
pub type Distribution = Vec<(usize, Rational)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticGame {
    n: usize,
    m: usize,
    ap: Vec<u8>,
    r1: Vec<Vec<Rational>>,
    r2: Vec<Vec<Rational>>,
    p: Vec<Vec<Distribution>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("game needs at least one state and one action (n={n}, m={m})")]
    Empty { n: usize, m: usize },
    #[error("{what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("acting player of state {state} is {player}, expected 1 or 2")]
    Player { state: usize, player: u8 },
    #[error("transition ({s},{a}) -> {to} is outside 1..={n}")]
    StateRange {
        s: usize,
        a: usize,
        to: usize,
        n: usize,
    },
    #[error("entry {value} at {location} has a denominator that is not a power of two")]
    NonDyadic { location: String, value: String },
}

impl StochasticGame {
    /// Builds a game from dense 0-based tables. Structural shape is checked
    /// here; the modelling assumptions (reward range, acyclicity, ...) are
    /// reported by [`validate_game`].
    pub fn new(
        ap: Vec<u8>,
        r1: Vec<Vec<Rational>>,
        r2: Vec<Vec<Rational>>,
        p: Vec<Vec<Distribution>>,
    ) -> Result<Self, GameError> {
        let n = ap.len();
        let m = r1.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(GameError::Empty { n, m });
        }
        for (what, rows) in [("r1", &r1), ("r2", &r2)] {
            if rows.len() != n {
                return Err(GameError::Dimension {
                    what,
                    got: rows.len(),
                    expected: n,
                });
            }
            for row in rows {
                if row.len() != m {
                    return Err(GameError::Dimension {
                        what,
                        got: row.len(),
                        expected: m,
                    });
                }
            }
        }
        if p.len() != n {
            return Err(GameError::Dimension {
                what: "P",
                got: p.len(),
                expected: n,
            });
        }
        for (s, row) in p.iter().enumerate() {
            if row.len() != m {
                return Err(GameError::Dimension {
                    what: "P",
                    got: row.len(),
                    expected: m,
                });
            }
            for (a, dist) in row.iter().enumerate() {
                for (to, _) in dist {
                    if *to == 0 || *to > n {
                        return Err(GameError::StateRange {
                            s: s + 1,
                            a: a + 1,
                            to: *to,
                            n,
                        });
                    }
                }
            }
        }
        for (s, &player) in ap.iter().enumerate() {
            if player != 1 && player != 2 {
                return Err(GameError::Player {
                    state: s + 1,
                    player,
                });
            }
        }
        let p = p
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|mut dist| {
                        dist.retain(|(_, q)| !q.is_zero());
                        dist.sort_by_key(|(to, _)| *to);
                        dist
                    })
                    .collect()
            })
            .collect();
        Ok(StochasticGame {
            n,
            m,
            ap,
            r1,
            r2,
            p,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn terminal(&self) -> usize {
        self.n
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        s == self.n
    }

    /// Acting player (1 or 2) of state `s`.
    pub fn ap(&self, s: usize) -> usize {
        self.ap[s - 1] as usize
    }

    pub fn r1(&self, s: usize, a: usize) -> &Rational {
        &self.r1[s - 1][a - 1]
    }

    pub fn r2(&self, s: usize, a: usize) -> &Rational {
        &self.r2[s - 1][a - 1]
    }

    /// Reward of player `i` (1 or 2).
    pub fn reward(&self, i: usize, s: usize, a: usize) -> &Rational {
        match i {
            1 => self.r1(s, a),
            _ => self.r2(s, a),
        }
    }

    pub fn transitions(&self, s: usize, a: usize) -> &[(usize, Rational)] {
        &self.p[s - 1][a - 1]
    }

    pub fn prob(&self, s: usize, a: usize, to: usize) -> Rational {
        self.transitions(s, a)
            .iter()
            .find(|(t, _)| *t == to)
            .map(|(_, q)| q.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn states(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n
    }

    pub fn actions(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.m
    }

    /// Every reward and transition probability, with its location.
    fn entries(&self) -> impl Iterator<Item = (String, &Rational)> {
        let rewards = self.states().flat_map(move |s| {
            self.actions().flat_map(move |a| {
                [
                    (format!("r1({s},{a})"), self.r1(s, a)),
                    (format!("r2({s},{a})"), self.r2(s, a)),
                ]
            })
        });
        let probs = self.states().flat_map(move |s| {
            self.actions().flat_map(move |a| {
                self.transitions(s, a)
                    .iter()
                    .map(move |(to, q)| (format!("P({s},{a},{to})"), q))
            })
        });
        rewards.chain(probs)
    }

    #[cfg(test)]
    pub(crate) fn set_transition(&mut self, s: usize, a: usize, dist: Distribution) {
        self.p[s - 1][a - 1] = dist;
    }

    #[cfg(test)]
    pub(crate) fn set_r1(&mut self, s: usize, a: usize, v: Rational) {
        self.r1[s - 1][a - 1] = v;
    }
}

/// One violated modelling assumption, located by 1-based `(state, action)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub state: usize,
    pub action: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    RewardRange,
    Acyclicity,
    TerminalAbsorption,
    DistributionSum,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::RewardRange => "reward range",
            ViolationKind::Acyclicity => "acyclicity",
            ViolationKind::TerminalAbsorption => "terminal absorption",
            ViolationKind::DistributionSum => "distribution sum",
        };
        write!(f, "{what} at ({},{})", self.state, self.action)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every violation of the model's assumptions. Violations are data, not
/// errors.
pub fn validate_game(g: &StochasticGame) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |kind, state, action| {
        violations.push(Violation {
            kind,
            state,
            action,
        })
    };
    let unit = |v: &Rational| !v.is_negative() && *v <= Rational::one();
    for s in g.states() {
        for a in g.actions() {
            if !unit(g.r1(s, a)) || !unit(g.r2(s, a)) {
                push(ViolationKind::RewardRange, s, a);
            }
            let dist = g.transitions(s, a);
            let total: Rational = dist.iter().map(|(_, q)| q.clone()).sum();
            if !total.is_one() || dist.iter().any(|(_, q)| q.is_negative()) {
                push(ViolationKind::DistributionSum, s, a);
            }
            if g.is_terminal(s) {
                let absorbing =
                    g.r1(s, a).is_zero() && g.r2(s, a).is_zero() && g.prob(s, a, s).is_one();
                if !absorbing {
                    push(ViolationKind::TerminalAbsorption, s, a);
                }
            } else if dist.iter().any(|(to, _)| *to <= s) {
                push(ViolationKind::Acyclicity, s, a);
            }
        }
    }
    ValidationReport { violations }
}

/// Least `L` such that every reward and probability times `2^L` is an integer.
pub fn bit_length(g: &StochasticGame) -> Result<u64, GameError> {
    let mut l = 0;
    for (location, v) in g.entries() {
        match dyadic_exponent(v) {
            Some(k) => l = l.max(k),
            None => {
                return Err(GameError::NonDyadic {
                    location,
                    value: format_rational(v),
                })
            }
        }
    }
    Ok(l)
}

/// A play prefix `(s_1, a_1, ..., s_t, a_t)`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct History(pub Vec<(usize, usize)>);

impl History {
    pub fn empty() -> Self {
        History(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&self, s: usize, a: usize) -> History {
        let mut v = self.0.clone();
        v.push((s, a));
        History(v)
    }

    pub fn last(&self) -> Option<(usize, usize)> {
        self.0.last().copied()
    }

    /// Parses `"1:1,2:1"`; the empty string is the empty history.
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(History::empty());
        }
        text.split(',')
            .map(|pair| {
                let (s, a) = pair
                    .split_once(':')
                    .ok_or_else(|| format!("expected state:action, got {pair:?}"))?;
                let s = s
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad state in {pair:?}"))?;
                let a = a
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad action in {pair:?}"))?;
                Ok((s, a))
            })
            .collect::<Result<_, _>>()
            .map(History)
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(s, a)| format!("{s}:{a}")).collect();
        write!(f, "[{}]", parts.join(","))
    }
}
