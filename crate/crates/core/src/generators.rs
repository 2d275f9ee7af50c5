//! Reproducible game instances: seeded random acyclic games and Nim.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{Distribution, StochasticGame};
use crate::rational::{int, Rational};
use num_bigint::BigInt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenKind {
    Random,
    Nim { k: usize, first: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub m: usize,
    pub l: u32,
    pub seed: u64,
}

impl GenSpec {
    pub fn random(n: usize, m: usize, l: u32, seed: u64) -> Self {
        GenSpec {
            kind: GenKind::Random,
            n,
            m,
            l,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n < 2 {
            return Err(format!("n must be at least 2, got {}", self.n));
        }
        if self.m < 1 {
            return Err("m must be at least 1".into());
        }
        if let GenKind::Nim { k, first } = self.kind {
            if k < 1 {
                return Err("k must be at least 1".into());
            }
            if first != 1 && first != 2 {
                return Err("first player must be 1 or 2".into());
            }
        }
        Ok(())
    }
}

fn dyadic(units: u64, l: u32) -> Rational {
    Rational::new(BigInt::from(units), BigInt::from(1u64) << l)
}

/// Random valid game: uniform acting players, rewards uniform on the grid
/// `2^-L * {0..2^L}`, and up to three later successors whose dyadic masses
/// sum to exactly one (the residual goes to the largest-index successor).
pub fn gen_random(spec: &GenSpec) -> StochasticGame {
    let (n, m, l) = (spec.n, spec.m, spec.l);
    assert!(n >= 2 && m >= 1 && l < 63, "invalid generator spec");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = 1u64 << l;
    let ap: Vec<u8> = (0..n).map(|_| rng.random_range(1..=2)).collect();
    let mut r1 = vec![vec![Rational::zero(); m]; n];
    let mut r2 = vec![vec![Rational::zero(); m]; n];
    let mut p = vec![vec![vec![(n, Rational::one())]; m]; n];
    for s in 1..n {
        for a in 0..m {
            r1[s - 1][a] = dyadic(rng.random_range(0..=unit), l);
            r2[s - 1][a] = dyadic(rng.random_range(0..=unit), l);
            let later: Vec<usize> = (s + 1..=n).collect();
            let size = rng.random_range(1..=later.len().min(3));
            let mut succ: Vec<usize> = rand::seq::index::sample(&mut rng, later.len(), size)
                .into_iter()
                .map(|i| later[i])
                .collect();
            succ.sort_unstable();
            let mut remaining = unit;
            let mut dist = Distribution::new();
            for (i, &to) in succ.iter().enumerate() {
                let units = if i + 1 == succ.len() {
                    remaining
                } else {
                    rng.random_range(0..=remaining)
                };
                remaining -= units;
                if units > 0 {
                    dist.push((to, dyadic(units, l)));
                }
            }
            p[s - 1][a] = dist;
        }
    }
    StochasticGame::new(ap, r1, r2, p).expect("generated game is well formed")
}

/// Nim with `k` matches: the mover removes one or two matches and whoever
/// takes the last match gets reward 1. State `(j, p)` (j matches left, player
/// p to move) has index `2(k - j) + 1` when `p` is the first mover and
/// `2(k - j) + 2` otherwise; `2k + 1` is terminal. Removing two from a single
/// match is treated as removing one.
pub fn gen_nim(k: usize, first: usize) -> StochasticGame {
    assert!(k >= 1 && (first == 1 || first == 2));
    let n = 2 * k + 1;
    let other = 3 - first;
    let index = |j: usize, p: usize| 2 * (k - j) + if p == first { 1 } else { 2 };
    let mut ap = vec![1u8; n];
    let mut r1 = vec![vec![Rational::zero(); 2]; n];
    let mut r2 = vec![vec![Rational::zero(); 2]; n];
    let mut p = vec![vec![vec![(n, Rational::one())]; 2]; n];
    for j in 1..=k {
        for mover in [first, other] {
            let s = index(j, mover);
            ap[s - 1] = mover as u8;
            for a in 1..=2 {
                let removed = a.min(j);
                let left = j - removed;
                let next = if left == 0 { n } else { index(left, 3 - mover) };
                p[s - 1][a - 1] = vec![(next, int(1))];
                if left == 0 {
                    let r = if mover == 1 { &mut r1 } else { &mut r2 };
                    r[s - 1][a - 1] = int(1);
                }
            }
        }
    }
    StochasticGame::new(ap, r1, r2, p).expect("nim game is well formed")
}

pub fn generate(spec: &GenSpec) -> Result<StochasticGame, String> {
    spec.validate()?;
    Ok(match spec.kind {
        GenKind::Random => gen_random(spec),
        GenKind::Nim { k, first } => gen_nim(k, first),
    })
}
