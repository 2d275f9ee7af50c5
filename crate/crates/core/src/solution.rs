//! Solver output shared by both modes, and its JSON file format.

use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::engine::{Boundary, BoundaryKind, Constraint, Counters, Engine, EvalCache, Precision};
use crate::format::{game_from_json, game_to_json, FormatError};
use crate::game::{bit_length, validate_game, GameError, StochasticGame};
use crate::punishment::{utility_under_punishment, PunishmentValues};
use crate::rational::{
    dyadic_exponent, format_rational, parse_rational, Direction, Point, Rational,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    /// Leader (player 1) optimal, follower constrained at its own states.
    Sefce,
    /// Optimal along `objective` up to `epsilon`, both players constrained.
    Efce {
        objective: Direction,
        epsilon: Rational,
    },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Sefce => "sefce",
            Mode::Efce { .. } => "efce",
        }
    }

    /// Direction the root recommendation and the pivots optimize.
    pub fn objective(&self) -> Direction {
        match self {
            Mode::Sefce => Direction::e1(),
            Mode::Efce { objective, .. } => objective.clone(),
        }
    }

    pub fn epsilon(&self) -> Option<&Rational> {
        match self {
            Mode::Sefce => None,
            Mode::Efce { epsilon, .. } => Some(epsilon),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("game is invalid: {0}")]
    InvalidGame(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("epsilon must be positive, got {0}")]
    Epsilon(String),
    #[error("epsilon must have a power-of-two denominator, got {0}")]
    NonDyadicEpsilon(String),
}

/// The implicit equilibrium: per-pair pivots and boundary points, the root
/// recommendation, and every evaluation made while solving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub game: StochasticGame,
    pub mode: Mode,
    pub bit_length: u64,
    pub punishment: PunishmentValues,
    /// `constraints[s - 1]`: the lower bound enforced at state `s`.
    pub constraints: Vec<Option<Constraint>>,
    pub boundaries: Vec<Vec<Option<Boundary>>>,
    /// `pivots[s - 1][a - 1]`, the sentinel where nothing is feasible.
    pub pivots: Vec<Vec<Point>>,
    /// `None` when every root action is infeasible.
    pub root_action: Option<usize>,
    /// Leader utility (SEFCE) or objective score (EFCE) of the root pivot;
    /// `-n` when infeasible.
    pub opt: Rational,
    /// Largest first coordinate among the root pivots.
    pub opt_first: Rational,
    pub cache: EvalCache,
    pub counters: Counters,
}

pub(crate) fn constraints_for(
    g: &StochasticGame,
    mode: &Mode,
    pun: &PunishmentValues,
) -> Vec<Option<Constraint>> {
    let n = g.n();
    g.states()
        .map(|s| {
            if g.is_terminal(s) {
                return None;
            }
            match mode {
                Mode::Sefce => (g.ap(s) == 2).then(|| Constraint {
                    player: 2,
                    threshold: pun.u_p(s).clone(),
                }),
                Mode::Efce { epsilon, .. } => {
                    let slack =
                        Rational::new(((n - s - 1) as i64).into(), (n as i64).into()) * epsilon;
                    Some(Constraint {
                        player: g.ap(s),
                        threshold: pun.u_p(s) - slack,
                    })
                }
            }
        })
        .collect()
}

/// Bisection stopping rule: `1/(3n * 2^(2 n^2 L))` for SEFCE, `eps/(10 n^2)`
/// for EFCE.
pub fn precision_for(g: &StochasticGame, mode: &Mode, l: u64) -> Precision {
    let n = g.n() as u64;
    match mode {
        Mode::Sefce => {
            let exp = 2 * n * n * l;
            let denom = num_bigint::BigInt::from(3 * n) << exp;
            Precision::Exact {
                threshold: Rational::new(1.into(), denom),
            }
        }
        Mode::Efce { epsilon, .. } => Precision::Approximate {
            threshold: epsilon / Rational::from_integer((10 * n * n).into()),
        },
    }
}

pub(crate) fn solve(game: &StochasticGame, mode: Mode) -> Result<Solution, SolveError> {
    let report = validate_game(game);
    if !report.is_ok() {
        let text: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(SolveError::InvalidGame(text.join("; ")));
    }
    let l = bit_length(game)?;
    if let Some(eps) = mode.epsilon() {
        if !eps.is_positive() {
            return Err(SolveError::Epsilon(format_rational(eps)));
        }
        if dyadic_exponent(eps).is_none() {
            return Err(SolveError::NonDyadicEpsilon(format_rational(eps)));
        }
    }
    let punishment = utility_under_punishment(game);
    let constraints = constraints_for(game, &mode, &punishment);
    let precision = precision_for(game, &mode, l);
    let objective = mode.objective();
    let n = game.n();
    let mut engine = Engine::new(game, constraints.clone());
    let mut pivots = vec![vec![Point::sentinel(n); game.m()]; n];
    for s in (1..n).rev() {
        for a in game.actions() {
            if engine.constraint(s).is_some() {
                let b = engine.find_boundary(s, a, &precision);
                engine.set_boundary(s, a, b);
            }
            if let Some(c) = engine.candidate(s, a, &objective) {
                pivots[s - 1][a - 1] = c.point;
            }
        }
    }
    let root = engine.best_candidate(1, &objective);
    let (root_action, opt) = match &root {
        Some(c) => (Some(c.action), c.point.score(&objective)),
        None => (None, -Rational::from_integer((n as i64).into())),
    };
    let opt_first = if game.is_terminal(1) {
        Rational::zero()
    } else {
        pivots[0]
            .iter()
            .map(|p| p.x.clone())
            .max()
            .expect("at least one action")
    };
    let (boundaries, cache, counters) = engine.into_parts();
    Ok(Solution {
        game: game.clone(),
        mode,
        bit_length: l,
        punishment,
        constraints,
        boundaries,
        pivots,
        root_action,
        opt,
        opt_first,
        cache,
        counters,
    })
}

impl Solution {
    pub fn objective(&self) -> Direction {
        self.mode.objective()
    }

    pub fn is_feasible(&self) -> bool {
        self.root_action.is_some()
    }

    pub fn pivot(&self, s: usize, a: usize) -> &Point {
        &self.pivots[s - 1][a - 1]
    }

    pub fn boundary(&self, s: usize, a: usize) -> Option<&Boundary> {
        self.boundaries[s - 1][a - 1].as_ref()
    }

    /// Bracketing directions where the bisection ran.
    pub fn bracket(&self, s: usize, a: usize) -> Option<(&Direction, &Direction)> {
        match self.boundary(s, a).map(|b| &b.kind) {
            Some(BoundaryKind::Bracketed { left, right, .. }) => Some((left, right)),
            _ => None,
        }
    }

    pub fn constraint(&self, s: usize) -> Option<&Constraint> {
        self.constraints[s - 1].as_ref()
    }

    /// Relaxed thresholds `u^p(s) - (n-s-1)/n * eps` (EFCE) or `u^p(s)`.
    pub fn thresholds(&self) -> Vec<Rational> {
        match &self.mode {
            Mode::Sefce => self.punishment.utility.clone(),
            Mode::Efce { .. } => self
                .game
                .states()
                .map(|s| {
                    self.constraint(s)
                        .map_or_else(Rational::zero, |c| c.threshold.clone())
                })
                .collect(),
        }
    }

    /// Read-only evaluator over the final boundaries; new evaluations land in
    /// the returned engine's overlay.
    pub fn engine(&self) -> Engine<'_> {
        Engine::with_base(
            &self.game,
            self.constraints.clone(),
            self.boundaries.clone(),
            &self.cache,
        )
    }

    /// Largest numerator or denominator bit size over cache and pivots.
    pub fn max_bits(&self) -> u64 {
        let cached = self.cache.values().map(Point::max_bits);
        let piv = self.pivots.iter().flatten().map(Point::max_bits);
        cached.chain(piv).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let pt = |p: &Point| json!([format_rational(&p.x), format_rational(&p.y)]);
        let dir = |d: &Direction| json!([format_rational(&d.d1), format_rational(&d.d2)]);
        let mut pivots = Map::new();
        let mut boundaries = Map::new();
        let mut brackets = Map::new();
        for s in 1..self.game.n() {
            for a in self.game.actions() {
                let key = format!("{s},{a}");
                pivots.insert(key.clone(), pt(self.pivot(s, a)));
                if let Some(b) = self.boundary(s, a) {
                    let entry = match &b.kind {
                        BoundaryKind::Sentinel => json!({ "kind": "sentinel" }),
                        BoundaryKind::Direct(d) => {
                            json!({ "kind": "direct", "point": pt(&b.point), "direction": dir(d) })
                        }
                        BoundaryKind::Bracketed {
                            left,
                            right,
                            weight,
                        } => {
                            brackets.insert(key.clone(), json!([dir(left), dir(right)]));
                            json!({ "kind": "bracketed", "point": pt(&b.point), "weight": format_rational(weight) })
                        }
                    };
                    boundaries.insert(key, entry);
                }
            }
        }
        let cache: Vec<Value> = self
            .cache
            .iter()
            .map(|((s, a, d), p)| json!([s, a, dir(d), pt(p)]))
            .collect();
        let u_p: Vec<String> = self
            .punishment
            .utility
            .iter()
            .map(format_rational)
            .collect();
        let mut doc = Map::new();
        doc.insert("mode".into(), json!(self.mode.name()));
        doc.insert("game".into(), game_to_json(&self.game));
        doc.insert("u_p".into(), json!(u_p));
        doc.insert("feasible".into(), json!(self.is_feasible()));
        doc.insert("root_action".into(), json!(self.root_action));
        match &self.mode {
            Mode::Sefce => {
                doc.insert("opt".into(), json!(format_rational(&self.opt)));
            }
            Mode::Efce { objective, epsilon } => {
                let hat: Vec<String> = self.thresholds().iter().map(format_rational).collect();
                doc.insert("alpha_obj".into(), dir(objective));
                doc.insert("epsilon".into(), json!(format_rational(epsilon)));
                doc.insert("u_p_hat".into(), json!(hat));
                doc.insert("opt_obj".into(), json!(format_rational(&self.opt)));
                doc.insert("opt_first".into(), json!(format_rational(&self.opt_first)));
            }
        }
        doc.insert("pivots".into(), Value::Object(pivots));
        doc.insert("boundaries".into(), Value::Object(boundaries));
        doc.insert("brackets".into(), Value::Object(brackets));
        doc.insert("cache".into(), json!(cache));
        doc.insert("counters".into(), counters_json(&self.counters));
        Value::Object(doc)
    }

    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_json()).expect("solution serializes");
        text.push('\n');
        text
    }

    /// Loads a solution file. Punishment values and constraints are
    /// recomputed from the embedded game and checked against the file.
    pub fn from_json_str(text: &str) -> Result<Solution, FormatError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| FormatError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let root = doc
            .as_object()
            .ok_or_else(|| ferr("<root>", "expected an object"))?;
        let game = game_from_json(
            root.get("game")
                .and_then(Value::as_object)
                .ok_or_else(|| ferr("game", "missing or not an object"))?,
        )?;
        let mode = match root.get("mode").and_then(Value::as_str) {
            Some("sefce") => Mode::Sefce,
            Some("efce") => Mode::Efce {
                objective: read_dir("alpha_obj", root.get("alpha_obj"))?,
                epsilon: read_rational("epsilon", root.get("epsilon"))?,
            },
            _ => return Err(ferr("mode", "expected \"sefce\" or \"efce\"")),
        };
        let l = bit_length(&game)?;
        let punishment = utility_under_punishment(&game);
        let stored_up = root
            .get("u_p")
            .and_then(Value::as_array)
            .ok_or_else(|| ferr("u_p", "expected an array"))?;
        let matches = stored_up.len() == game.n()
            && stored_up
                .iter()
                .zip(&punishment.utility)
                .all(|(v, u)| v.as_str().and_then(|t| parse_rational(t).ok()).as_ref() == Some(u));
        if !matches {
            return Err(ferr("u_p", "does not match the embedded game"));
        }
        let constraints = constraints_for(&game, &mode, &punishment);
        let n = game.n();
        let m = game.m();
        let mut pivots = vec![vec![Point::sentinel(n); m]; n];
        let mut boundaries = vec![vec![None; m]; n];
        let piv = object("pivots", root.get("pivots"))?;
        let bnd = object("boundaries", root.get("boundaries"))?;
        let brk = object("brackets", root.get("brackets"))?;
        for s in 1..n {
            for a in 1..=m {
                let key = format!("{s},{a}");
                pivots[s - 1][a - 1] = read_point(&format!("pivots[{key}]"), piv.get(&key))?;
                if constraints[s - 1].is_none() {
                    continue;
                }
                let loc = format!("boundaries[{key}]");
                let entry = object(&loc, bnd.get(&key))?;
                let kind = match entry.get("kind").and_then(Value::as_str) {
                    Some("sentinel") => BoundaryKind::Sentinel,
                    Some("direct") => BoundaryKind::Direct(read_dir(&loc, entry.get("direction"))?),
                    Some("bracketed") => {
                        let pair = brk
                            .get(&key)
                            .and_then(Value::as_array)
                            .filter(|v| v.len() == 2)
                            .ok_or_else(|| {
                                ferr(&format!("brackets[{key}]"), "expected two directions")
                            })?;
                        BoundaryKind::Bracketed {
                            left: read_dir(&loc, Some(&pair[0]))?,
                            right: read_dir(&loc, Some(&pair[1]))?,
                            weight: read_rational(&loc, entry.get("weight"))?,
                        }
                    }
                    _ => return Err(ferr(&loc, "unknown boundary kind")),
                };
                let point = match kind {
                    BoundaryKind::Sentinel => Point::sentinel(n),
                    _ => read_point(&loc, entry.get("point"))?,
                };
                boundaries[s - 1][a - 1] = Some(Boundary { point, kind });
            }
        }
        let mut cache = EvalCache::new();
        let records = root
            .get("cache")
            .and_then(Value::as_array)
            .ok_or_else(|| ferr("cache", "expected an array"))?;
        for (i, rec) in records.iter().enumerate() {
            let loc = format!("cache[{i}]");
            let rec = rec
                .as_array()
                .filter(|r| r.len() == 4)
                .ok_or_else(|| ferr(&loc, "expected [s, a, direction, point]"))?;
            let s = rec[0].as_u64().ok_or_else(|| ferr(&loc, "bad state"))? as usize;
            let a = rec[1].as_u64().ok_or_else(|| ferr(&loc, "bad action"))? as usize;
            if s == 0 || s > n || a == 0 || a > m {
                return Err(FormatError::Dimension(format!("{loc} names ({s},{a})")));
            }
            cache.insert(
                (s, a, read_dir(&loc, Some(&rec[2]))?),
                read_point(&loc, Some(&rec[3]))?,
            );
        }
        let root_action = match root.get("root_action") {
            Some(Value::Null) | None => None,
            Some(v) => Some(
                v.as_u64()
                    .filter(|&a| a >= 1 && a as usize <= m)
                    .ok_or_else(|| ferr("root_action", "bad action"))? as usize,
            ),
        };
        let opt_key = if matches!(mode, Mode::Sefce) {
            "opt"
        } else {
            "opt_obj"
        };
        let opt = read_rational(opt_key, root.get(opt_key))?;
        let opt_first = if game.is_terminal(1) {
            Rational::zero()
        } else {
            pivots[0]
                .iter()
                .map(|p| p.x.clone())
                .max()
                .unwrap_or_else(Rational::one)
        };
        let counters = root.get("counters").map(read_counters).unwrap_or_default();
        Ok(Solution {
            game,
            mode,
            bit_length: l,
            punishment,
            constraints,
            boundaries,
            pivots,
            root_action,
            opt,
            opt_first,
            cache,
            counters,
        })
    }
}

pub fn counters_json(c: &Counters) -> Value {
    json!({
        "eval_calls": c.eval_calls,
        "eval_computed": c.eval_computed,
        "bisections": c.bisections,
        "bisection_iterations": c.bisection_iterations,
        "adjacency_refinements": c.adjacency_refinements,
    })
}

fn read_counters(v: &Value) -> Counters {
    let get = |k: &str| v.get(k).and_then(Value::as_u64).unwrap_or(0);
    Counters {
        eval_calls: get("eval_calls"),
        eval_computed: get("eval_computed"),
        bisections: get("bisections"),
        bisection_iterations: get("bisection_iterations"),
        adjacency_refinements: get("adjacency_refinements"),
    }
}

fn ferr(field: &str, message: &str) -> FormatError {
    FormatError::Field {
        field: field.to_string(),
        message: message.to_string(),
    }
}

fn object<'a>(field: &str, v: Option<&'a Value>) -> Result<&'a Map<String, Value>, FormatError> {
    v.and_then(Value::as_object)
        .ok_or_else(|| ferr(field, "expected an object"))
}

fn read_rational(field: &str, v: Option<&Value>) -> Result<Rational, FormatError> {
    let text = v
        .and_then(Value::as_str)
        .ok_or_else(|| ferr(field, "expected a rational string"))?;
    parse_rational(text).map_err(|source| FormatError::Rational {
        field: field.to_string(),
        source,
    })
}

fn read_pair(field: &str, v: Option<&Value>) -> Result<(Rational, Rational), FormatError> {
    let arr = v
        .and_then(Value::as_array)
        .filter(|a| a.len() == 2)
        .ok_or_else(|| ferr(field, "expected a pair of rational strings"))?;
    Ok((
        read_rational(field, Some(&arr[0]))?,
        read_rational(field, Some(&arr[1]))?,
    ))
}

fn read_point(field: &str, v: Option<&Value>) -> Result<Point, FormatError> {
    let (x, y) = read_pair(field, v)?;
    Ok(Point::new(x, y))
}

fn read_dir(field: &str, v: Option<&Value>) -> Result<Direction, FormatError> {
    let (a, b) = read_pair(field, v)?;
    Direction::new(a, b).map_err(|e| ferr(field, &e.to_string()))
}
