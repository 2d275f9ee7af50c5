//! Explicit frontier curves for small games.
//!
//! Every curve is kept whole as a concave polyline and combined eagerly with
//! clipping, upper envelopes and weighted Minkowski sums. This shares no code
//! with the lazy directional solver, which makes it useful as a certificate.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::game::StochasticGame;
use crate::punishment::utility_under_punishment;
use crate::rational::{Direction, Point, Rational};

/// The Pareto part of a convex region's boundary: vertices with `x` strictly
/// increasing, `y` strictly decreasing and slopes strictly decreasing. An
/// empty polyline stands for an empty region.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polyline {
    vertices: Vec<Point>,
}

impl Polyline {
    pub fn empty() -> Self {
        Polyline::default()
    }

    pub fn point(p: Point) -> Self {
        Polyline { vertices: vec![p] }
    }

    /// The frontier of the convex hull of `points`.
    pub fn hull(points: Vec<Point>) -> Self {
        upper_right_hull(points)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_valid(&self) -> bool {
        let v = &self.vertices;
        let monotone = v.windows(2).all(|w| w[0].x < w[1].x && w[0].y > w[1].y);
        let concave = v
            .windows(3)
            .all(|w| cross(&w[0], &w[1], &w[2]).is_negative());
        monotone && concave
    }

    /// Whether `p` and `q` are consecutive vertices, in either order.
    pub fn are_adjacent(&self, p: &Point, q: &Point) -> bool {
        self.vertices
            .windows(2)
            .any(|w| (&w[0] == p && &w[1] == q) || (&w[0] == q && &w[1] == p))
    }
}

/// `(b - a) x (c - b)`; negative for a right turn.
fn cross(a: &Point, b: &Point, c: &Point) -> Rational {
    (&b.x - &a.x) * (&c.y - &b.y) - (&b.y - &a.y) * (&c.x - &b.x)
}

fn upper_right_hull(mut points: Vec<Point>) -> Polyline {
    // Pareto filter, scanning right to left.
    points.sort_by(|a, b| b.x.cmp(&a.x).then_with(|| b.y.cmp(&a.y)));
    let mut pareto: Vec<Point> = Vec::new();
    for p in points {
        if pareto.last().is_none_or(|q| p.y > q.y) {
            pareto.push(p);
        }
    }
    pareto.reverse();
    let mut hull: Vec<Point> = Vec::with_capacity(pareto.len());
    for p in pareto {
        while hull.len() >= 2
            && !cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p).is_negative()
        {
            hull.pop();
        }
        hull.push(p);
    }
    Polyline { vertices: hull }
}

/// The part of `c` where coordinate `coord` is at least `threshold`, with a
/// vertex inserted at an interior crossing.
pub fn clip(c: &Polyline, coord: usize, threshold: &Rational) -> Polyline {
    let v = &c.vertices;
    let ok = |p: &Point| p.coord(coord) >= threshold;
    let mut out = Vec::new();
    for (i, p) in v.iter().enumerate() {
        if ok(p) {
            out.push(p.clone());
        }
        if let Some(q) = v.get(i + 1) {
            let (pc, qc) = (p.coord(coord), q.coord(coord));
            let crosses = (pc < threshold && qc > threshold) || (pc > threshold && qc < threshold);
            if crosses {
                let w = (threshold - qc) / (pc - qc);
                out.push(p.lerp(q, &w));
            }
        }
    }
    Polyline { vertices: out }
}

/// Least concave frontier dominating every input.
pub fn envelope(cs: &[Polyline]) -> Polyline {
    upper_right_hull(cs.iter().flat_map(|c| c.vertices.iter().cloned()).collect())
}

/// `shift + sum_k w_k * c_k` as a frontier. Curves with zero weight are
/// ignored; the result is empty if any positively weighted curve is empty.
pub fn minkowski_weighted(cs: &[Polyline], w: &[Rational], shift: &Point) -> Polyline {
    assert_eq!(cs.len(), w.len(), "one weight per curve");
    let mut start = shift.clone();
    let mut edges: Vec<Point> = Vec::new();
    for (c, wk) in cs.iter().zip(w) {
        if wk.is_zero() {
            continue;
        }
        if c.is_empty() {
            return Polyline::empty();
        }
        start = start.add(&c.vertices[0].scale(wk));
        for pair in c.vertices.windows(2) {
            edges.push(Point::new(
                (&pair[1].x - &pair[0].x) * wk,
                (&pair[1].y - &pair[0].y) * wk,
            ));
        }
    }
    // Edges point right and down; steepest-last means comparing dy/dx.
    edges.sort_by(|a, b| slope_cmp(b, a));
    let mut vertices = vec![start];
    for e in edges {
        let last = vertices.last().expect("nonempty").clone();
        let next = last.add(&e);
        if vertices.len() >= 2 {
            let prev = &vertices[vertices.len() - 2];
            if cross(prev, &last, &next).is_zero() {
                *vertices.last_mut().expect("nonempty") = next;
                continue;
            }
        }
        vertices.push(next);
    }
    Polyline { vertices }
}

/// Compares slopes `a.y/a.x` and `b.y/b.x` of edges with positive `x`.
fn slope_cmp(a: &Point, b: &Point) -> Ordering {
    (&a.y * &b.x).cmp(&(&b.y * &a.x))
}

/// Farthest vertex along `alpha`, ties by larger `y` then larger `x`.
pub fn farthest(c: &Polyline, alpha: &Direction) -> Option<Point> {
    c.vertices
        .iter()
        .max_by(|p, q| p.cmp_along(q, alpha).then(Ordering::Greater))
        .cloned()
}

/// Which states are constrained and the direction pivots optimize.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleMode {
    /// Follower states need `y >= u^p(s)`; pivots maximize `x`.
    Sefce,
    /// Every nonterminal state needs its mover's coordinate at least
    /// `thresholds[s - 1]`; pivots maximize along `objective`.
    Efce {
        objective: Direction,
        thresholds: Vec<Rational>,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle refused: curves exceed {cap} vertices")]
    Guard { cap: usize },
    #[error("expected {expected} thresholds, got {got}")]
    Thresholds { expected: usize, got: usize },
}

pub const DEFAULT_VERTEX_CAP: usize = 100_000;

#[derive(Debug, Clone)]
pub struct OracleCurves {
    /// `curves[s - 1][a - 1]` is `f_{s,a}`; terminal rows are the origin.
    pub curves: Vec<Vec<Polyline>>,
    /// Per-state `(coordinate, threshold)` constraint.
    pub constraints: Vec<Option<(usize, Rational)>>,
    /// `pivots[s - 1][a - 1]`, the sentinel when infeasible.
    pub pivots: Vec<Vec<Point>>,
    pub objective: Direction,
    /// Frontier of the root state over all actions after clipping.
    pub root: Polyline,
    /// Best root point along the objective, if any.
    pub root_point: Option<Point>,
    /// Objective score of `root_point`, or `-n` when infeasible.
    pub optimum: Rational,
}

impl OracleCurves {
    pub fn curve(&self, s: usize, a: usize) -> &Polyline {
        &self.curves[s - 1][a - 1]
    }

    pub fn pivot(&self, s: usize, a: usize) -> &Point {
        &self.pivots[s - 1][a - 1]
    }

    pub fn eval(&self, s: usize, a: usize, alpha: &Direction) -> Option<Point> {
        farthest(self.curve(s, a), alpha)
    }

    pub fn feasible_curve(&self, s: usize, a: usize) -> Polyline {
        match &self.constraints[s - 1] {
            Some((k, t)) => clip(self.curve(s, a), *k, t),
            None => self.curve(s, a).clone(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.curves.iter().flatten().map(Polyline::len).sum()
    }
}

/// Builds every `f_{s,a}` backwards from the terminal state.
pub fn full_curves(
    g: &StochasticGame,
    mode: &OracleMode,
    cap: usize,
) -> Result<OracleCurves, OracleError> {
    let n = g.n();
    let (objective, constraints): (Direction, Vec<Option<(usize, Rational)>>) = match mode {
        OracleMode::Sefce => {
            let up = utility_under_punishment(g);
            let cons = g
                .states()
                .map(|s| (!g.is_terminal(s) && g.ap(s) == 2).then(|| (2, up.u_p(s).clone())))
                .collect();
            (Direction::e1(), cons)
        }
        OracleMode::Efce {
            objective,
            thresholds,
        } => {
            if thresholds.len() != n {
                return Err(OracleError::Thresholds {
                    expected: n,
                    got: thresholds.len(),
                });
            }
            let cons = g
                .states()
                .map(|s| (!g.is_terminal(s)).then(|| (g.ap(s), thresholds[s - 1].clone())))
                .collect();
            (objective.clone(), cons)
        }
    };
    let origin = Polyline::point(Point::origin());
    let mut curves = vec![vec![origin.clone(); g.m()]; n];
    let mut state_front = vec![Polyline::empty(); n];
    state_front[n - 1] = origin;
    let mut total = 0usize;
    for s in (1..n).rev() {
        for a in g.actions() {
            let (succ, w): (Vec<Polyline>, Vec<Rational>) = g
                .transitions(s, a)
                .iter()
                .map(|(to, q)| (state_front[to - 1].clone(), q.clone()))
                .unzip();
            let shift = Point::new(g.r1(s, a).clone(), g.r2(s, a).clone());
            let f = minkowski_weighted(&succ, &w, &shift);
            total += f.len();
            if total > cap {
                return Err(OracleError::Guard { cap });
            }
            curves[s - 1][a - 1] = f;
        }
        let clipped: Vec<Polyline> = g
            .actions()
            .map(|a| match &constraints[s - 1] {
                Some((k, t)) => clip(&curves[s - 1][a - 1], *k, t),
                None => curves[s - 1][a - 1].clone(),
            })
            .collect();
        state_front[s - 1] = envelope(&clipped);
    }
    let mut pivots = vec![vec![Point::sentinel(n); g.m()]; n];
    for s in 1..n {
        for a in g.actions() {
            let feasible = match &constraints[s - 1] {
                Some((k, t)) => clip(&curves[s - 1][a - 1], *k, t),
                None => curves[s - 1][a - 1].clone(),
            };
            if let Some(p) = farthest(&feasible, &objective) {
                pivots[s - 1][a - 1] = p;
            }
        }
    }
    let root = state_front[0].clone();
    let root_point = farthest(&root, &objective);
    let optimum = root_point.as_ref().map_or_else(
        || -Rational::from_integer((n as i64).into()),
        |p| p.score(&objective),
    );
    Ok(OracleCurves {
        curves,
        constraints,
        pivots,
        objective,
        root,
        root_point,
        optimum,
    })
}
