//! Memoized directional evaluation of Pareto frontier curves.
//!
//! `f_{s,a}` is the upper-right boundary of the onward utility pairs reachable
//! after playing `a` in `s` with every later state's feasibility constraint
//! respected. [`Engine::eval`] returns the farthest point of `f_{s,a}` along a
//! direction, recursing into later states once their boundary points are
//! final. Both the exact Stackelberg solver and the approximate EFCE solver
//! drive this engine; they differ only in which states carry a constraint and
//! in how finely the boundary bisection runs.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::game::StochasticGame;
use crate::rational::{Direction, Point, Rational};

/// `(state, action, direction) -> evaluated point`. Entries are written once.
pub type EvalCache = BTreeMap<(usize, usize, Direction), Point>;

/// A lower bound on one player's conditional onward utility in a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub player: usize,
    pub threshold: Rational,
}

impl Constraint {
    pub fn holds(&self, p: &Point) -> bool {
        *p.coord(self.player) >= self.threshold
    }
}

/// How a boundary point was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundaryKind {
    /// No point of the curve satisfies the constraint.
    Sentinel,
    /// The whole curve is feasible; the point is `f(dir)` for the axis of the
    /// unconstrained player.
    Direct(Direction),
    /// The point is `weight * f(left) + (1 - weight) * f(right)`, where `f(left)`
    /// and `f(right)` are adjacent evaluations straddling the threshold.
    Bracketed {
        left: Direction,
        right: Direction,
        weight: Rational,
    },
}

/// The point of `f_{s,a}` where the state's own constraint binds: the farthest
/// feasible point along the other player's axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    pub point: Point,
    pub kind: BoundaryKind,
}

/// Whether a successor's candidate is the curve's own farthest point or the
/// substituted boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    Along,
    Boundary,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub action: usize,
    pub point: Point,
    pub choice: Choice,
}

/// When the boundary bisection stops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Precision {
    /// Bisect until `|l - r|_1 < threshold`, then confirm that `f(l)` and
    /// `f(r)` are adjacent turning points by evaluating along their chord's
    /// normal, refining the bracket if a vertex lies strictly above the chord.
    Exact { threshold: Rational },
    /// Bisect until `|l - r|_1 < threshold` and interpolate.
    Approximate { threshold: Rational },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counters {
    /// Every call to `eval`, including memo hits.
    pub eval_calls: u64,
    /// Calls that computed a new cache entry.
    pub eval_computed: u64,
    pub bisections: u64,
    pub bisection_iterations: u64,
    /// Bracket refinements made by the adjacency check after bisection.
    pub adjacency_refinements: u64,
}

pub struct Engine<'g> {
    game: &'g StochasticGame,
    constraints: Vec<Option<Constraint>>,
    boundaries: Vec<Vec<Option<Boundary>>>,
    base: Option<&'g EvalCache>,
    cache: EvalCache,
    pub counters: Counters,
}

impl<'g> Engine<'g> {
    /// A fresh engine; `constraints[s - 1]` is the constraint of state `s`.
    pub fn new(game: &'g StochasticGame, constraints: Vec<Option<Constraint>>) -> Self {
        assert_eq!(constraints.len(), game.n());
        let boundaries = vec![vec![None; game.m()]; game.n()];
        Engine {
            game,
            constraints,
            boundaries,
            base: None,
            cache: EvalCache::new(),
            counters: Counters::default(),
        }
    }

    /// An engine over finished boundaries. Lookups hit `base` first and new
    /// entries go to a private overlay, leaving `base` untouched.
    pub fn with_base(
        game: &'g StochasticGame,
        constraints: Vec<Option<Constraint>>,
        boundaries: Vec<Vec<Option<Boundary>>>,
        base: &'g EvalCache,
    ) -> Self {
        Engine {
            game,
            constraints,
            boundaries,
            base: Some(base),
            cache: EvalCache::new(),
            counters: Counters::default(),
        }
    }

    pub fn game(&self) -> &'g StochasticGame {
        self.game
    }

    pub fn constraint(&self, s: usize) -> Option<&Constraint> {
        self.constraints[s - 1].as_ref()
    }

    pub fn boundary(&self, s: usize, a: usize) -> Option<&Boundary> {
        self.boundaries[s - 1][a - 1].as_ref()
    }

    pub fn set_boundary(&mut self, s: usize, a: usize, b: Boundary) {
        assert!(
            self.boundaries[s - 1][a - 1].is_none(),
            "boundary ({s},{a}) already final"
        );
        self.boundaries[s - 1][a - 1] = Some(b);
    }

    pub fn into_parts(self) -> (Vec<Vec<Option<Boundary>>>, EvalCache, Counters) {
        (self.boundaries, self.cache, self.counters)
    }

    pub fn overlay(&self) -> &EvalCache {
        &self.cache
    }

    fn lookup(&self, key: &(usize, usize, Direction)) -> Option<&Point> {
        self.base
            .and_then(|b| b.get(key))
            .or_else(|| self.cache.get(key))
    }

    /// Farthest point of `f_{s,a}` along `dir`, with ties resolved by
    /// [`Point::cmp_along`]. Later-state boundaries must already be final.
    /// Returns the sentinel when some successor has no feasible action.
    pub fn eval(&mut self, s: usize, a: usize, dir: &Direction) -> Point {
        self.counters.eval_calls += 1;
        if self.game.is_terminal(s) {
            return Point::origin();
        }
        let key = (s, a, dir.clone());
        if let Some(p) = self.lookup(&key) {
            return p.clone();
        }
        self.counters.eval_computed += 1;
        let g = self.game;
        let mut acc = Point::new(g.r1(s, a).clone(), g.r2(s, a).clone());
        for (to, q) in g.transitions(s, a) {
            match self.best_candidate(*to, dir) {
                Some(c) => acc = acc.add(&c.point.scale(q)),
                None => {
                    acc = Point::sentinel(g.n());
                    break;
                }
            }
        }
        self.cache.insert(key, acc.clone());
        acc
    }

    /// The point a strategy realizes after `a` in `s` when aiming along `dir`
    /// while honoring the constraint of `s` itself: `f_{s,a}(dir)` if feasible,
    /// otherwise the boundary point. `None` when nothing is feasible.
    pub fn candidate(&mut self, s: usize, a: usize, dir: &Direction) -> Option<Candidate> {
        let d = self.eval(s, a, dir);
        let along = Candidate {
            action: a,
            point: d,
            choice: Choice::Along,
        };
        if self.game.is_terminal(s) {
            return Some(along);
        }
        match self.constraints[s - 1].clone() {
            None => (!along.point.is_sentinel()).then_some(along),
            Some(c) if c.holds(&along.point) => Some(along),
            Some(_) => {
                let b = self.boundaries[s - 1][a - 1].as_ref().unwrap_or_else(|| {
                    panic!("boundary ({s},{a}) requested before it was computed")
                });
                match b.kind {
                    BoundaryKind::Sentinel => None,
                    _ => Some(Candidate {
                        action: a,
                        point: b.point.clone(),
                        choice: Choice::Boundary,
                    }),
                }
            }
        }
    }

    /// Best candidate over all actions at `s`; ties go to the lowest action.
    pub fn best_candidate(&mut self, s: usize, dir: &Direction) -> Option<Candidate> {
        let mut best: Option<Candidate> = None;
        for a in self.game.actions() {
            if let Some(c) = self.candidate(s, a, dir) {
                let better = match &best {
                    None => true,
                    Some(b) => c.point.cmp_along(&b.point, dir).is_gt(),
                };
                if better {
                    best = Some(c);
                }
            }
        }
        best
    }

    /// Computes the boundary point of `(s, a)` for the constraint of `s`.
    ///
    /// Directions are swept from the constrained player's axis `l` (where the
    /// constrained coordinate is largest) toward the other axis `r`, keeping
    /// `f(l)` feasible and `f(r)` infeasible.
    pub fn find_boundary(&mut self, s: usize, a: usize, precision: &Precision) -> Boundary {
        let c = self
            .constraint(s)
            .cloned()
            .unwrap_or_else(|| panic!("state {s} carries no constraint"));
        let k = c.player;
        let mut left = Direction::axis(k);
        let mut right = Direction::axis(3 - k);
        let q_left = self.eval(s, a, &left);
        if !c.holds(&q_left) {
            return Boundary {
                point: Point::sentinel(self.game.n()),
                kind: BoundaryKind::Sentinel,
            };
        }
        let q_right = self.eval(s, a, &right);
        if c.holds(&q_right) {
            return Boundary {
                point: q_right,
                kind: BoundaryKind::Direct(right),
            };
        }
        self.counters.bisections += 1;
        let stop = match precision {
            Precision::Exact { threshold } | Precision::Approximate { threshold } => threshold,
        };
        while left.l1_distance(&right) >= *stop {
            self.counters.bisection_iterations += 1;
            let mid = left.midpoint(&right);
            let q = self.eval(s, a, &mid);
            if c.holds(&q) {
                left = mid;
            } else {
                right = mid;
            }
        }
        let (mut q_left, mut q_right) = (self.eval(s, a, &left), self.eval(s, a, &right));
        if matches!(precision, Precision::Exact { .. }) {
            loop {
                let (upper, lower) = if q_left.y >= q_right.y {
                    (&q_left, &q_right)
                } else {
                    (&q_right, &q_left)
                };
                let normal = match Direction::chord_normal(upper, lower) {
                    Ok(d) => d,
                    Err(_) => break,
                };
                let q = self.eval(s, a, &normal);
                if q.score(&normal) <= q_left.score(&normal) {
                    break;
                }
                self.counters.adjacency_refinements += 1;
                if c.holds(&q) {
                    left = normal;
                    q_left = q;
                } else {
                    right = normal;
                    q_right = q;
                }
            }
        }
        let top = q_left.coord(k) - q_right.coord(k);
        debug_assert!(!top.is_zero());
        let weight = (&c.threshold - q_right.coord(k)) / top;
        let point = q_left.lerp(&q_right, &weight);
        Boundary {
            point,
            kind: BoundaryKind::Bracketed {
                left,
                right,
                weight,
            },
        }
    }
}
