//! JSON game files.
//!
//! ```json
//! { "n": 3, "m": 2, "ap": [2, 1, 1],
//!   "r1": {"1,1": "1", "2,1": "1"},
//!   "r2": {"1,1": "1/2", "1,2": "1", "2,2": "1"},
//!   "P":  {"1,1": {"2": "1"}, "1,2": {"3": "1"}} }
//! ```
//!
//! Omitted rewards are zero, omitted transition rows go straight to the
//! terminal state, and every rational must have a power-of-two denominator.

use num_traits::{One, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::game::{Distribution, GameError, StochasticGame};
use crate::rational::{format_rational, parse_dyadic, Rational, RationalError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field {field}: {message}")]
    Field { field: String, message: String },
    #[error("field {field}: {source}")]
    Rational {
        field: String,
        #[source]
        source: RationalError,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("distribution P({state},{action},.) sums to {sum}, expected 1")]
    DistributionSum {
        state: usize,
        action: usize,
        sum: String,
    },
    #[error(transparent)]
    Game(#[from] GameError),
}

fn field_err(field: &str, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

fn rational_at(field: &str, v: &Value) -> Result<Rational, FormatError> {
    let text = v
        .as_str()
        .ok_or_else(|| field_err(field, "rationals must be JSON strings"))?;
    parse_dyadic(text).map_err(|source| FormatError::Rational {
        field: field.to_string(),
        source,
    })
}

fn usize_at(obj: &Map<String, Value>, key: &str) -> Result<usize, FormatError> {
    obj.get(key)
        .ok_or_else(|| field_err(key, "missing"))?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| field_err(key, "expected a nonnegative integer"))
}

fn pair_key(field: &str, key: &str, n: usize, m: usize) -> Result<(usize, usize), FormatError> {
    let loc = format!("{field}[{key:?}]");
    let (s, a) = key
        .split_once(',')
        .ok_or_else(|| field_err(&loc, "expected key \"s,a\""))?;
    let s: usize = s
        .trim()
        .parse()
        .map_err(|_| field_err(&loc, "bad state index"))?;
    let a: usize = a
        .trim()
        .parse()
        .map_err(|_| field_err(&loc, "bad action index"))?;
    if s == 0 || s > n || a == 0 || a > m {
        return Err(FormatError::Dimension(format!(
            "{loc} is outside states 1..={n} / actions 1..={m}"
        )));
    }
    Ok((s, a))
}

fn object<'a>(
    root: &'a Map<String, Value>,
    key: &str,
) -> Result<Option<&'a Map<String, Value>>, FormatError> {
    match root.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_object()
            .map(Some)
            .ok_or_else(|| field_err(key, "expected an object")),
    }
}

/// Parses a game document. Shape, dyadic entries and row sums are checked
/// here; modelling assumptions are left to [`crate::game::validate_game`].
pub fn parse_game(text: &str) -> Result<StochasticGame, FormatError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| FormatError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = doc
        .as_object()
        .ok_or_else(|| field_err("<root>", "expected a JSON object"))?;
    game_from_json(root)
}

pub(crate) fn game_from_json(root: &Map<String, Value>) -> Result<StochasticGame, FormatError> {
    let n = usize_at(root, "n")?;
    let m = usize_at(root, "m")?;
    if n == 0 || m == 0 {
        return Err(FormatError::Dimension(format!(
            "need n >= 1 and m >= 1, got n={n}, m={m}"
        )));
    }
    let ap_values = root
        .get("ap")
        .and_then(Value::as_array)
        .ok_or_else(|| field_err("ap", "expected an array"))?;
    if ap_values.len() != n {
        return Err(FormatError::Dimension(format!(
            "ap has {} entries, expected n={n}",
            ap_values.len()
        )));
    }
    let ap = ap_values
        .iter()
        .enumerate()
        .map(|(i, v)| match v.as_u64() {
            Some(p @ (1 | 2)) => Ok(p as u8),
            _ => Err(field_err(
                &format!("ap[{}]", i + 1),
                "acting player must be 1 or 2",
            )),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rewards = [
        vec![vec![Rational::zero(); m]; n],
        vec![vec![Rational::zero(); m]; n],
    ];
    for (idx, name) in ["r1", "r2"].iter().enumerate() {
        if let Some(obj) = object(root, name)? {
            for (key, v) in obj {
                let (s, a) = pair_key(name, key, n, m)?;
                rewards[idx][s - 1][a - 1] = rational_at(&format!("{name}[{key:?}]"), v)?;
            }
        }
    }

    let terminal_row = || vec![(n, Rational::one())];
    let mut p: Vec<Vec<Distribution>> = vec![vec![terminal_row(); m]; n];
    if let Some(obj) = object(root, "P")? {
        for (key, row) in obj {
            let (s, a) = pair_key("P", key, n, m)?;
            let loc = format!("P[{key:?}]");
            let row = row
                .as_object()
                .ok_or_else(|| field_err(&loc, "expected an object of next-state probabilities"))?;
            let mut dist = Distribution::new();
            for (to, q) in row {
                let to_idx: usize = to
                    .trim()
                    .parse()
                    .map_err(|_| field_err(&loc, format!("bad next state {to:?}")))?;
                if to_idx == 0 || to_idx > n {
                    return Err(FormatError::Dimension(format!(
                        "{loc} names next state {to_idx} outside 1..={n}"
                    )));
                }
                dist.push((to_idx, rational_at(&format!("{loc}[{to:?}]"), q)?));
            }
            let sum: Rational = dist.iter().map(|(_, q)| q.clone()).sum();
            if !sum.is_one() {
                return Err(FormatError::DistributionSum {
                    state: s,
                    action: a,
                    sum: format_rational(&sum),
                });
            }
            p[s - 1][a - 1] = dist;
        }
    }
    let [r1, r2] = rewards;
    Ok(StochasticGame::new(ap, r1, r2, p)?)
}

pub(crate) fn game_to_json(g: &StochasticGame) -> Value {
    let n = g.n();
    let mut r1 = Map::new();
    let mut r2 = Map::new();
    let mut p = Map::new();
    for s in g.states() {
        for a in g.actions() {
            let key = format!("{s},{a}");
            let terminal_default = g.transitions(s, a) == [(n, Rational::one())];
            if g.is_terminal(s) && g.r1(s, a).is_zero() && g.r2(s, a).is_zero() && terminal_default
            {
                continue;
            }
            r1.insert(key.clone(), json!(format_rational(g.r1(s, a))));
            r2.insert(key.clone(), json!(format_rational(g.r2(s, a))));
            let row: Map<String, Value> = g
                .transitions(s, a)
                .iter()
                .map(|(to, q)| (to.to_string(), json!(format_rational(q))))
                .collect();
            p.insert(key, Value::Object(row));
        }
    }
    let ap: Vec<usize> = g.states().map(|s| g.ap(s)).collect();
    json!({ "n": n, "m": g.m(), "ap": ap, "r1": r1, "r2": r2, "P": p })
}

/// Canonical serialization: keys in `n, m, ap, r1, r2, P` order, pairs in
/// numeric `(s, a)` order, terminal rows omitted when they carry only the
/// defaults.
pub fn serialize_game(g: &StochasticGame) -> String {
    let mut text = serde_json::to_string_pretty(&game_to_json(g)).expect("game serializes");
    text.push('\n');
    text
}
