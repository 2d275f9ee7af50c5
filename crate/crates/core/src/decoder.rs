//! Turning a solution into recommendations.
//!
//! The mediator tracks, for the pair `(s, a)` just played, a distribution over
//! directions `alpha` such that the continuation implements the expected point
//! `sum w * f_{s,a}(alpha)`. Entering the next state `s'`, each tracked
//! direction picks the best candidate action along it; if that candidate is a
//! boundary point, the direction is replaced by the boundary's bracketing
//! directions with their interpolation weights. Observing the recommended
//! action conditions the distribution (Bayes), which is all a player learns.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{BoundaryKind, Choice, Engine};
use crate::game::History;
use crate::rational::{to_f64, Direction, Point, Rational};
use crate::solution::{Mode, Solution};

/// Weighted directions tracked for one `(state, action)` pair.
pub type Targets = Vec<(Rational, Direction)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodedAction {
    /// No strategy in the support produces this history.
    Inadmissible,
    /// `(action, probability)` pairs with positive probability, by action.
    Play(Vec<(usize, Rational)>),
}

impl DecodedAction {
    pub fn probability(&self, a: usize) -> Rational {
        match self {
            DecodedAction::Inadmissible => Rational::zero(),
            DecodedAction::Play(v) => v
                .iter()
                .find(|(b, _)| *b == a)
                .map_or_else(Rational::zero, |(_, p)| p.clone()),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("history is admissible; ask the decoder instead")]
    Admissible,
    #[error("history cannot occur: {0}")]
    Impossible(String),
    #[error("the solution has no feasible root recommendation")]
    Infeasible,
    #[error("state or action index out of range: {0}")]
    Range(String),
    #[error("refused: more than {cap} admissible histories")]
    Guard { cap: usize },
}

/// One recommended action at a state with the targets it leads to.
#[derive(Debug, Clone)]
struct Branch {
    action: usize,
    weight: Rational,
    /// Unnormalized: weights sum to `weight`.
    next: Targets,
}

fn merge(mut t: Targets) -> Targets {
    t.sort_by(|a, b| a.1.cmp(&b.1));
    let mut out: Targets = Vec::with_capacity(t.len());
    for (w, d) in t {
        if w.is_zero() {
            continue;
        }
        match out.last_mut() {
            Some((acc, last)) if *last == d => *acc += w,
            _ => out.push((w, d)),
        }
    }
    out
}

fn normalize(t: &Targets, total: &Rational) -> Targets {
    t.iter().map(|(w, d)| (w / total, d.clone())).collect()
}

pub struct Decoder<'s> {
    sol: &'s Solution,
    engine: Engine<'s>,
}

impl<'s> Decoder<'s> {
    pub fn new(sol: &'s Solution) -> Self {
        Decoder {
            sol,
            engine: sol.engine(),
        }
    }

    pub fn solution(&self) -> &'s Solution {
        self.sol
    }

    pub fn engine(&mut self) -> &mut Engine<'s> {
        &mut self.engine
    }

    /// Targets of the root state before any action: the objective itself.
    fn root_targets(&self) -> Targets {
        vec![(Rational::one(), self.sol.objective())]
    }

    /// Splits tracked directions entering `s` into recommended actions.
    fn branches(&mut self, s: usize, targets: &Targets) -> Option<Vec<Branch>> {
        let g = &self.sol.game;
        if g.is_terminal(s) {
            let total: Rational = targets.iter().map(|(w, _)| w.clone()).sum();
            return Some(vec![Branch {
                action: 1,
                weight: total,
                next: Vec::new(),
            }]);
        }
        let mut by_action: BTreeMap<usize, (Rational, Targets)> = BTreeMap::new();
        for (w, alpha) in targets {
            let c = self.engine.best_candidate(s, alpha)?;
            let entry = by_action
                .entry(c.action)
                .or_insert_with(|| (Rational::zero(), Vec::new()));
            entry.0 += w;
            match c.choice {
                Choice::Along => entry.1.push((w.clone(), alpha.clone())),
                Choice::Boundary => {
                    let b = self
                        .sol
                        .boundary(s, c.action)
                        .expect("boundary candidate has a boundary");
                    match &b.kind {
                        BoundaryKind::Direct(d) => entry.1.push((w.clone(), d.clone())),
                        BoundaryKind::Bracketed {
                            left,
                            right,
                            weight,
                        } => {
                            entry.1.push((w * weight, left.clone()));
                            entry
                                .1
                                .push((w * (Rational::one() - weight), right.clone()));
                        }
                        BoundaryKind::Sentinel => {
                            unreachable!("sentinel boundaries are never candidates")
                        }
                    }
                }
            }
        }
        Some(
            by_action
                .into_iter()
                .filter(|(_, (w, _))| !w.is_zero())
                .map(|(action, (weight, next))| Branch {
                    action,
                    weight,
                    next: merge(next),
                })
                .collect(),
        )
    }

    /// Replays `h` and returns the targets tracked on entering `s`, or why
    /// the history is inadmissible (the index of the first offending step and
    /// whether the offence is an impossible transition).
    fn replay(&mut self, h: &History, s: usize) -> Result<Targets, Stop> {
        let g = &self.sol.game;
        let mut targets = self.root_targets();
        for (i, &(si, ai)) in h.0.iter().enumerate() {
            if si == 0 || si > g.n() || ai == 0 || ai > g.m() {
                return Err(Stop::Range(format!("({si},{ai})")));
            }
            let entered = match i {
                0 => si == 1,
                _ => g.prob(h.0[i - 1].0, h.0[i - 1].1, si) > Rational::zero(),
            };
            if !entered {
                return Err(Stop::Impossible(i));
            }
            let branches = self.branches(si, &targets).ok_or(Stop::Deviation(i))?;
            let Some(b) = branches.into_iter().find(|b| b.action == ai) else {
                return Err(Stop::Deviation(i));
            };
            targets = normalize(&b.next, &b.weight);
        }
        if s == 0 || s > g.n() {
            return Err(Stop::Range(format!("state {s}")));
        }
        let reachable = match h.last() {
            None => s == 1,
            Some((sl, al)) => g.prob(sl, al, s) > Rational::zero(),
        };
        if !reachable {
            return Err(Stop::Impossible(h.len()));
        }
        Ok(targets)
    }

    /// Recommendation at `s` after history `h`.
    pub fn decode(&mut self, h: &History, s: usize) -> DecodedAction {
        if !self.sol.is_feasible() {
            return DecodedAction::Inadmissible;
        }
        let Ok(targets) = self.replay(h, s) else {
            return DecodedAction::Inadmissible;
        };
        match self.branches(s, &targets) {
            None => DecodedAction::Inadmissible,
            Some(bs) => DecodedAction::Play(bs.into_iter().map(|b| (b.action, b.weight)).collect()),
        }
    }

    /// Action prescribed after a deviation: the first deviator is punished
    /// forever (in SEFCE mode that is always the follower).
    pub fn off_path_action(&mut self, h: &History, s: usize) -> Result<usize, DecodeError> {
        if !self.sol.is_feasible() {
            return Err(DecodeError::Infeasible);
        }
        let g = &self.sol.game;
        match self.replay(h, s) {
            Ok(_) => Err(DecodeError::Admissible),
            Err(Stop::Range(what)) => Err(DecodeError::Range(what)),
            Err(Stop::Impossible(i)) => Err(DecodeError::Impossible(format!(
                "transition into step {}",
                i + 1
            ))),
            Err(Stop::Deviation(i)) => {
                let deviator = match self.sol.mode {
                    Mode::Sefce => 2,
                    Mode::Efce { .. } => g.ap(h.0[i].0),
                };
                Ok(self.sol.punishment.policy(deviator).action(s))
            }
        }
    }

    fn walk(&mut self, visit: &mut Walk) -> Result<Point, DecodeError> {
        if !self.sol.is_feasible() {
            return Err(DecodeError::Infeasible);
        }
        let targets = self.root_targets();
        let branches = self.branches(1, &targets).ok_or(DecodeError::Infeasible)?;
        let mut root = Point::origin();
        for b in branches {
            let next = normalize(&b.next, &b.weight);
            let v = self.node(&History::empty(), 1, b.action, &next, &b.weight, visit)?;
            root = root.add(&v.scale(&b.weight));
        }
        Ok(root)
    }

    /// Conditional onward value of `(s, a)` played after `h`, recording the
    /// node and everything below it.
    fn node(
        &mut self,
        h: &History,
        s: usize,
        a: usize,
        targets: &Targets,
        reach: &Rational,
        visit: &mut Walk,
    ) -> Result<Point, DecodeError> {
        visit.nodes += 1;
        if visit.nodes > visit.cap {
            return Err(DecodeError::Guard { cap: visit.cap });
        }
        let g = &self.sol.game;
        let here = h.push(s, a);
        let mut value = Point::new(g.r1(s, a).clone(), g.r2(s, a).clone());
        for (to, q) in g.transitions(s, a) {
            if g.is_terminal(*to) {
                continue;
            }
            let branches = self
                .branches(*to, targets)
                .expect("tracked directions stay feasible along admissible play");
            for b in branches {
                let next = normalize(&b.next, &b.weight);
                let r = reach * q * &b.weight;
                let v = self.node(&here, *to, b.action, &next, &r, visit)?;
                value = value.add(&v.scale(&(q * &b.weight)));
            }
        }
        let expected = targets.iter().fold(Point::origin(), |acc, (w, d)| {
            acc.add(&self.engine.eval(s, a, d).scale(w))
        });
        visit.records.push(NodeRecord {
            history: h.clone(),
            state: s,
            action: a,
            reach: reach.clone(),
            value,
            expected,
        });
        Ok(visit.records.last().expect("just pushed").value.clone())
    }
}

enum Stop {
    Range(String),
    Impossible(usize),
    Deviation(usize),
}

struct Walk {
    cap: usize,
    nodes: usize,
    records: Vec<NodeRecord>,
}

/// A recommended `(state, action)` after `history`, with its conditional
/// onward value.
#[derive(Debug, Clone)]
struct NodeRecord {
    history: History,
    state: usize,
    action: usize,
    reach: Rational,
    value: Point,
    expected: Point,
}

pub const DEFAULT_HISTORY_CAP: usize = 1_000_000;

/// Every admissible nonterminal history `h + (s, a)` with the probability
/// that play starts with it, ordered lexicographically.
pub fn enumerate_admissible(
    sol: &Solution,
    cap: usize,
) -> Result<Vec<(History, Rational)>, DecodeError> {
    let mut walk = Walk {
        cap,
        nodes: 0,
        records: Vec::new(),
    };
    Decoder::new(sol).walk(&mut walk)?;
    let mut out: Vec<(History, Rational)> = walk
        .records
        .into_iter()
        .map(|r| (r.history.push(r.state, r.action), r.reach))
        .collect();
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditRecord {
    pub history: History,
    pub state: usize,
    pub action: usize,
    pub reach: Rational,
    /// Conditional onward utilities given the recommendation.
    pub value: Point,
    /// `(player, threshold)` checked at this state, if any.
    pub threshold: Option<(usize, Rational)>,
    pub slack: Option<Rational>,
    /// Whether `value` equals the tracked mixture of evaluated points.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub records: Vec<AuditRecord>,
    pub root_value: Point,
    /// Leader utility (SEFCE) or objective score (EFCE) of `root_value`.
    pub root_score: Rational,
    pub matches_opt: bool,
    pub passed: bool,
}

impl FeasibilityReport {
    pub fn min_slack(&self) -> Option<&Rational> {
        self.records.iter().filter_map(|r| r.slack.as_ref()).min()
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditRecord> {
        self.records
            .iter()
            .filter(|r| !r.consistent || r.slack.as_ref().is_some_and(|s| s < &Rational::zero()))
    }
}

/// Checks the decoded strategy's constraints at every admissible history by
/// exact expectation: the follower keeps at least `u^p(s)` (SEFCE), or the
/// mover keeps at least `u^p(s) - eps` (EFCE). Also checks that the root
/// value reproduces `opt` and that every conditional value equals the
/// tracked mixture of evaluated curve points.
pub fn audit_feasibility(sol: &Solution, cap: usize) -> Result<FeasibilityReport, DecodeError> {
    let mut walk = Walk {
        cap,
        nodes: 0,
        records: Vec::new(),
    };
    let root_value = Decoder::new(sol).walk(&mut walk)?;
    let g = &sol.game;
    let records: Vec<AuditRecord> = walk
        .records
        .into_iter()
        .map(|r| {
            let threshold = match &sol.mode {
                Mode::Sefce => {
                    (g.ap(r.state) == 2).then(|| (2, sol.punishment.u_p(r.state).clone()))
                }
                Mode::Efce { epsilon, .. } => {
                    Some((g.ap(r.state), sol.punishment.u_p(r.state) - epsilon))
                }
            };
            let slack = threshold.as_ref().map(|(k, t)| r.value.coord(*k) - t);
            AuditRecord {
                consistent: r.value == r.expected,
                history: r.history,
                state: r.state,
                action: r.action,
                reach: r.reach,
                value: r.value,
                threshold,
                slack,
            }
        })
        .collect();
    let root_score = root_value.score(&sol.objective());
    let matches_opt = root_score == sol.opt;
    let mut report = FeasibilityReport {
        records,
        root_value,
        root_score,
        matches_opt,
        passed: false,
    };
    report.passed = report.matches_opt && report.failures().next().is_none();
    report
        .records
        .sort_by(|a, b| (&a.history, a.state, a.action).cmp(&(&b.history, b.state, b.action)));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Playout {
    pub history: History,
    pub rewards: Point,
}

fn sample<T: Clone>(rng: &mut ChaCha8Rng, items: &[(T, Rational)]) -> T {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (item, p) in items {
        acc += to_f64(p);
        if u < acc {
            return item.clone();
        }
    }
    items.last().expect("nonempty distribution").0.clone()
}

/// Plays `runs` games from one seeded generator, sampling recommendations
/// and transitions. Identical seeds give identical playouts.
pub fn simulate_play(sol: &Solution, seed: u64, runs: usize) -> Result<Vec<Playout>, DecodeError> {
    if !sol.is_feasible() {
        return Err(DecodeError::Infeasible);
    }
    let g = &sol.game;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dec = Decoder::new(sol);
    let mut out = Vec::with_capacity(runs);
    for _ in 0..runs {
        let mut s = 1;
        let mut targets = dec.root_targets();
        let mut history = History::empty();
        let mut rewards = Point::origin();
        while !g.is_terminal(s) {
            let branches = dec.branches(s, &targets).ok_or(DecodeError::Infeasible)?;
            let dist: Vec<(usize, Rational)> = branches
                .iter()
                .map(|b| (b.action, b.weight.clone()))
                .collect();
            let a = sample(&mut rng, &dist);
            let b = branches
                .into_iter()
                .find(|b| b.action == a)
                .expect("sampled action exists");
            targets = normalize(&b.next, &b.weight);
            history = history.push(s, a);
            rewards = rewards.add(&Point::new(g.r1(s, a).clone(), g.r2(s, a).clone()));
            s = sample(&mut rng, g.transitions(s, a));
        }
        out.push(Playout { history, rewards });
    }
    Ok(out)
}

/// Convenience wrapper around a one-shot [`Decoder`].
pub fn decode(sol: &Solution, h: &History, s: usize) -> DecodedAction {
    Decoder::new(sol).decode(h, s)
}

pub fn off_path_action(sol: &Solution, h: &History, s: usize) -> Result<usize, DecodeError> {
    Decoder::new(sol).off_path_action(h, s)
}
