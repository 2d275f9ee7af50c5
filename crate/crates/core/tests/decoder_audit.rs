use turnpike::decoder::{
    audit_feasibility, decode, enumerate_admissible, DecodedAction, DEFAULT_HISTORY_CAP,
};
use turnpike::generators::{gen_random, GenSpec};
use turnpike::rational::{ratio, Direction, Rational};
use turnpike::{solve_efce, solve_sefce};

fn game(seed: u64) -> turnpike::StochasticGame {
    let n = 3 + (seed % 6) as usize;
    gen_random(&GenSpec::random(n, 2, 1 + (seed % 2) as u32, seed))
}

#[test]
fn sefce_audits_pass() {
    for seed in 0..120 {
        let sol = solve_sefce(&game(seed)).unwrap();
        let report = audit_feasibility(&sol, DEFAULT_HISTORY_CAP).unwrap();
        let bad: Vec<_> = report.failures().take(3).collect();
        assert!(
            report.passed,
            "seed {seed}: root {} opt {} failures {bad:?}",
            report.root_score, sol.opt
        );
    }
}

#[test]
fn efce_audits_pass() {
    for seed in 0..60 {
        for obj in [
            Direction::e1(),
            Direction::e2(),
            Direction::from_d1(ratio(1, 2)),
        ] {
            let sol = solve_efce(&game(seed), obj.clone(), ratio(1, 1024)).unwrap();
            let report = audit_feasibility(&sol, DEFAULT_HISTORY_CAP).unwrap();
            let bad: Vec<_> = report.failures().take(3).collect();
            assert!(
                report.passed,
                "seed {seed} {obj}: root {} opt {} failures {bad:?}",
                report.root_score, sol.opt
            );
        }
    }
}

#[test]
fn admissible_histories_decode_and_mass_is_conserved() {
    for seed in 0..60 {
        let sol = solve_sefce(&game(seed)).unwrap();
        let g = &sol.game;
        let all = enumerate_admissible(&sol, DEFAULT_HISTORY_CAP).unwrap();
        let mut leaf_mass = Rational::from_integer(0.into());
        for (h, reach) in &all {
            let (s, a) = h.last().unwrap();
            let prefix = turnpike::History(h.0[..h.len() - 1].to_vec());
            assert!(
                decode(&sol, &prefix, s).probability(a) > Rational::from_integer(0.into()),
                "seed {seed} {h}"
            );
            leaf_mass += reach * g.prob(s, a, g.n());
        }
        assert_eq!(leaf_mass, Rational::from_integer(1.into()), "seed {seed}");
        // Unrecommended actions are inadmissible.
        for (h, _) in &all {
            let (s, a) = h.last().unwrap();
            let prefix = turnpike::History(h.0[..h.len() - 1].to_vec());
            if let DecodedAction::Play(dist) = decode(&sol, &prefix, s) {
                for b in g.actions() {
                    if !dist.iter().any(|(x, _)| *x == b) {
                        assert_ne!(b, a);
                    }
                }
            }
        }
    }
}
