//! Zero-sum punishment games and the per-state utility under punishment.
//!
//! Punishing player `i` means solving the zero-sum game in which `i`
//! maximizes its own total reward while the other player minimizes it. The
//! resulting strategy is history-independent and found by backward induction.

use crate::game::StochasticGame;
use crate::rational::Rational;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PunishmentPolicy {
    /// The punished player (1 or 2).
    pub target: usize,
    /// `action[s - 1]`: action played in state `s` by whoever acts there.
    pub action: Vec<usize>,
    /// `value[s - 1]`: the target's onward utility from `s` under the policy.
    pub value: Vec<Rational>,
}

impl PunishmentPolicy {
    pub fn action(&self, s: usize) -> usize {
        self.action[s - 1]
    }

    pub fn value(&self, s: usize) -> &Rational {
        &self.value[s - 1]
    }
}

/// `r_i(s, a) + E[V(s')]` for a table of onward values.
fn one_step(g: &StochasticGame, i: usize, s: usize, a: usize, value: &[Rational]) -> Rational {
    g.transitions(s, a)
        .iter()
        .filter(|(to, _)| !g.is_terminal(*to))
        .fold(g.reward(i, s, a).clone(), |acc, (to, q)| {
            acc + q * &value[to - 1]
        })
}

/// Backward induction for the game that punishes player `target`. Ties go to
/// the lowest action index.
pub fn compute_punishment_policy(g: &StochasticGame, target: usize) -> PunishmentPolicy {
    assert!(target == 1 || target == 2, "player must be 1 or 2");
    let n = g.n();
    let mut value = vec![Rational::zero(); n];
    let mut action = vec![1; n];
    for s in (1..n).rev() {
        let maximize = g.ap(s) == target;
        let mut best: Option<(usize, Rational)> = None;
        for a in g.actions() {
            let v = one_step(g, target, s, a, &value);
            let better = match &best {
                None => true,
                Some((_, b)) => (maximize && v > *b) || (!maximize && v < *b),
            };
            if better {
                best = Some((a, v));
            }
        }
        let (a, v) = best.expect("at least one action");
        action[s - 1] = a;
        value[s - 1] = v;
    }
    PunishmentPolicy {
        target,
        action,
        value,
    }
}

/// Both punishment policies plus `u^p(s)`, the acting player's best utility
/// from `s` when it deviates and is punished from the next state on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PunishmentValues {
    pub policies: [PunishmentPolicy; 2],
    pub utility: Vec<Rational>,
}

impl PunishmentValues {
    pub fn u_p(&self, s: usize) -> &Rational {
        &self.utility[s - 1]
    }

    pub fn policy(&self, player: usize) -> &PunishmentPolicy {
        &self.policies[player - 1]
    }
}

pub fn utility_under_punishment(g: &StochasticGame) -> PunishmentValues {
    let policies = [
        compute_punishment_policy(g, 1),
        compute_punishment_policy(g, 2),
    ];
    let utility = g
        .states()
        .map(|s| {
            if g.is_terminal(s) {
                return Rational::zero();
            }
            let i = g.ap(s);
            g.actions()
                .map(|a| one_step(g, i, s, a, &policies[i - 1].value))
                .max()
                .expect("at least one action")
        })
        .collect();
    PunishmentValues { policies, utility }
}
