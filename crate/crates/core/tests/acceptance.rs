//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;

use turnpike::decoder::{
    audit_feasibility, decode, simulate_play, DecodedAction, DEFAULT_HISTORY_CAP,
};
use turnpike::game::bit_length;
use turnpike::generators::{gen_nim, gen_random, GenSpec};
use turnpike::oracle::{full_curves, OracleCurves, OracleMode, DEFAULT_VERTEX_CAP};
use turnpike::punishment::{compute_punishment_policy, utility_under_punishment};
use turnpike::rational::{divides_power_of_two, int, ratio, to_f64, Direction, Point, Rational};
use turnpike::{solve_efce, solve_sefce, History, StochasticGame};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn suite_game(seed: u64) -> StochasticGame {
    let n = 3 + (seed % 6) as usize;
    let l = 1 + ((seed / 6) % 2) as u32;
    gen_random(&GenSpec::random(n, 2, l, seed))
}

fn sefce_oracle(g: &StochasticGame) -> OracleCurves {
    full_curves(g, &OracleMode::Sefce, DEFAULT_VERTEX_CAP).expect("suite games fit the oracle")
}

fn efce_oracle(
    g: &StochasticGame,
    objective: &Direction,
    thresholds: Vec<Rational>,
) -> OracleCurves {
    let mode = OracleMode::Efce {
        objective: objective.clone(),
        thresholds,
    };
    full_curves(g, &mode, DEFAULT_VERTEX_CAP).expect("suite games fit the oracle")
}

fn objectives() -> [Direction; 3] {
    [
        Direction::e1(),
        Direction::e2(),
        Direction::from_d1(ratio(1, 2)),
    ]
}

fn eps10() -> Rational {
    ratio(1, 1 << 10)
}

fn first_failure(items: Vec<Result<(), String>>) -> Result<usize, String> {
    let n = items.len();
    items.into_iter().collect::<Result<Vec<()>, String>>()?;
    Ok(n)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let results: Vec<Result<(), String>> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let g = suite_game(seed);
            let sol = solve_sefce(&g).map_err(|e| e.to_string())?;
            let o = sefce_oracle(&g);
            if sol.opt != o.optimum {
                return Err(format!(
                    "seed {seed}: solver {} oracle {}",
                    sol.opt, o.optimum
                ));
            }
            for ((s, a, d), p) in &sol.cache {
                if o.eval(*s, *a, d).as_ref() != Some(p) {
                    return Err(format!("seed {seed}: cache entry ({s},{a},{d}) disagrees"));
                }
            }
            for s in 1..g.n() {
                for a in g.actions() {
                    if sol.pivot(s, a) != o.pivot(s, a) {
                        return Err(format!("seed {seed}: pivot ({s},{a}) disagrees"));
                    }
                }
            }
            Ok(())
        })
        .collect();
    let n = first_failure(results)?;
    Ok(format!(
        "{n} games, opt/cache/pivots exact, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let results: Vec<Result<(), String>> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let sol = solve_sefce(&suite_game(seed)).map_err(|e| e.to_string())?;
            let report = audit_feasibility(&sol, DEFAULT_HISTORY_CAP).map_err(|e| e.to_string())?;
            if !report.passed {
                return Err(format!(
                    "seed {seed}: audit failed (root {} vs opt {})",
                    report.root_score, sol.opt
                ));
            }
            if report.root_value.x != sol.opt {
                return Err(format!(
                    "seed {seed}: root leader utility {} != opt {}",
                    report.root_value.x, sol.opt
                ));
            }
            Ok(())
        })
        .collect();
    let n = first_failure(results)?;
    Ok(format!(
        "{n} games audited, all slacks >= 0, root utility == opt"
    ))
}

fn criterion_3() -> Outcome {
    let mut games = 0;
    let mut pairs = 0;
    let mut seed = 0u64;
    while games < 50 {
        let l = 1 + (seed % 2) as u32;
        let g = gen_random(&GenSpec::random(8, 2, l, seed));
        let sol = solve_sefce(&g).map_err(|e| e.to_string())?;
        if sol.counters.bisections > 0 {
            let o = sefce_oracle(&g);
            for s in 1..g.n() {
                for a in g.actions() {
                    if let Some((left, right)) = sol.bracket(s, a) {
                        let ql = o.eval(s, a, left).ok_or("empty oracle curve")?;
                        let qr = o.eval(s, a, right).ok_or("empty oracle curve")?;
                        if !o.curve(s, a).are_adjacent(&ql, &qr) {
                            return Err(format!(
                                "seed {seed}: ({s},{a}) bracket {ql} {qr} not adjacent"
                            ));
                        }
                        pairs += 1;
                    }
                }
            }
            games += 1;
        }
        seed += 1;
        if seed > 20_000 {
            return Err(format!("only {games} games with a bisection"));
        }
    }
    Ok(format!(
        "{pairs} bisected pairs over {games} games (seeds 0..{seed}), all adjacent"
    ))
}

fn lcm_of_denominators<'a>(points: impl Iterator<Item = &'a Point>) -> BigInt {
    points
        .filter(|p| !p.is_sentinel())
        .flat_map(|p| [p.x.denom().clone(), p.y.denom().clone()])
        .fold(BigInt::one(), |acc, d| acc.lcm(&d))
}

fn criterion_4() -> Outcome {
    let results: Vec<Result<(), String>> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let g = suite_game(seed);
            let n = g.n() as u64;
            let l = bit_length(&g).map_err(|e| e.to_string())?;
            let sol = solve_sefce(&g).map_err(|e| e.to_string())?;
            let c = lcm_of_denominators(sol.cache.values().chain(sol.pivots.iter().flatten()));
            if c > BigInt::one() << (n * n * l) {
                return Err(format!(
                    "seed {seed}: common denominator {c} exceeds 2^(n^2 L)"
                ));
            }
            for ((s, _, _), p) in &sol.cache {
                if !divides_power_of_two(&p.y, (n - *s as u64) * l) {
                    return Err(format!("seed {seed}: solver y {} at state {s}", p.y));
                }
            }
            let o = sefce_oracle(&g);
            for s in 1..g.n() {
                for a in g.actions() {
                    for v in o.curve(s, a).vertices() {
                        if !divides_power_of_two(&v.y, (n - s as u64) * l) {
                            return Err(format!("seed {seed}: oracle y {} at state {s}", v.y));
                        }
                    }
                }
            }
            Ok(())
        })
        .collect();
    let n = first_failure(results)?;
    Ok(format!(
        "{n} games: common denominator <= 2^(n^2 L); solver and oracle y at state s divide 2^((n-s)L)"
    ))
}

fn efce_suite() -> impl ParallelIterator<Item = (u64, StochasticGame)> {
    (0..100u64)
        .into_par_iter()
        .map(|seed| (seed, suite_game(seed)))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let results: Vec<Result<(), String>> = efce_suite()
        .map(|(seed, g)| {
            let up = utility_under_punishment(&g).utility;
            for obj in objectives() {
                let sol = solve_efce(&g, obj.clone(), eps10()).map_err(|e| e.to_string())?;
                let exact = efce_oracle(&g, &obj, up.clone());
                if sol.opt < &exact.optimum - eps10() {
                    return Err(format!(
                        "seed {seed} {obj}: {} < {} - eps",
                        sol.opt, exact.optimum
                    ));
                }
                let relaxed = efce_oracle(&g, &obj, up.iter().map(|u| u - eps10()).collect());
                if sol.is_feasible() && sol.opt > relaxed.optimum {
                    return Err(format!(
                        "seed {seed} {obj}: {} above the eps-feasible optimum",
                        sol.opt
                    ));
                }
            }
            Ok(())
        })
        .collect();
    let n = first_failure(results)?;
    Ok(format!(
        "{n} games x 3 objectives: exact optimum - eps <= opt <= eps-relaxed optimum, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_6() -> Outcome {
    let results: Vec<Result<(), String>> = efce_suite()
        .map(|(seed, g)| {
            let n = g.n();
            let up = utility_under_punishment(&g).utility;
            for obj in objectives() {
                let sol = solve_efce(&g, obj.clone(), eps10()).map_err(|e| e.to_string())?;
                let exact = efce_oracle(&g, &obj, up.clone());
                for s in 1..n {
                    let budget =
                        Rational::new(((n - s) as i64).into(), (n as i64).into()) * eps10();
                    for a in g.actions() {
                        let ours = sol.pivot(s, a).score(&obj);
                        let theirs = exact.pivot(s, a).score(&obj);
                        if ours < &theirs - &budget {
                            return Err(format!(
                                "seed {seed} {obj} ({s},{a}): {ours} < {theirs} - {budget}"
                            ));
                        }
                    }
                }
            }
            Ok(())
        })
        .collect();
    let n = first_failure(results)?;
    Ok(format!(
        "{n} games x 3 objectives, every pivot within (n-s)/n * eps"
    ))
}

fn criterion_7() -> Outcome {
    let results: Vec<Result<(), String>> = efce_suite()
        .map(|(seed, g)| {
            for obj in objectives() {
                let sol = solve_efce(&g, obj.clone(), eps10()).map_err(|e| e.to_string())?;
                if !sol.is_feasible() {
                    continue;
                }
                let report =
                    audit_feasibility(&sol, DEFAULT_HISTORY_CAP).map_err(|e| e.to_string())?;
                if !report.passed || report.root_score != sol.opt {
                    return Err(format!("seed {seed} {obj}: audit failed"));
                }
            }
            Ok(())
        })
        .collect();
    let n = first_failure(results)?;
    Ok(format!(
        "{n} games x 3 objectives audited against u^p - eps, root objective == opt"
    ))
}

fn g1() -> StochasticGame {
    turnpike::format::parse_game(
        r#"{ "n": 3, "m": 2, "ap": [2, 1, 1],
  "r1": {"1,1": "1", "1,2": "0", "2,1": "1", "2,2": "0"},
  "r2": {"1,1": "1/2", "1,2": "1", "2,1": "0", "2,2": "1"},
  "P":  {"1,1": {"2": "1"}, "1,2": {"3": "1"},
         "2,1": {"3": "1"}, "2,2": {"3": "1"}} }"#,
    )
    .expect("fixture parses")
}

fn criterion_8() -> Outcome {
    let g = g1();
    let oracle = sefce_oracle(&g);
    let up = utility_under_punishment(&g).utility;
    let efce_exact = efce_oracle(&g, &Direction::e1(), up);
    if oracle.optimum != ratio(3, 2) || efce_exact.optimum != int(0) {
        return Err(format!(
            "oracle gives {} and {}",
            oracle.optimum, efce_exact.optimum
        ));
    }
    let sol = solve_sefce(&g).map_err(|e| e.to_string())?;
    let root = decode(&sol, &History::empty(), 1);
    let mix = decode(&sol, &History(vec![(1, 1)]), 2);
    if sol.opt != ratio(3, 2) || root != DecodedAction::Play(vec![(1, int(1))]) {
        return Err(format!("sefce opt {} root {root:?}", sol.opt));
    }
    if mix != DecodedAction::Play(vec![(1, ratio(1, 2)), (2, ratio(1, 2))]) {
        return Err(format!("state-2 recommendation {mix:?}"));
    }
    let e = solve_efce(&g, Direction::e1(), eps10()).map_err(|e| e.to_string())?;
    let eroot = decode(&e, &History::empty(), 1);
    if e.opt != int(0) || eroot != DecodedAction::Play(vec![(2, int(1))]) {
        return Err(format!("efce opt {} root {eroot:?}", e.opt));
    }
    Ok("sefce opt 3/2, root action 1, state-2 mix 1/2:1/2; efce opt 0, root action 2; oracle agrees".into())
}

/// Constant in the evaluation budget `c * (n m)^2 * n^2 * L`, with `L`
/// floored at 1 so that integer-reward games get a nonzero budget.
const EVAL_BUDGET_CONSTANT: u64 = 1;

fn criterion_9() -> Outcome {
    let k = 30;
    let g = gen_nim(k, 1);
    let start = Instant::now();
    let sol = solve_sefce(&g).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let minimax = compute_punishment_policy(&g, 1).value(1).clone();
    let rule = int(if k % 3 == 0 { 0 } else { 1 });
    let (n, m) = (g.n() as u64, g.m() as u64);
    let l = bit_length(&g).map_err(|e| e.to_string())?.max(1);
    let budget = EVAL_BUDGET_CONSTANT * (n * m).pow(2) * n * n * l;
    let calls = sol.counters.eval_calls;
    if secs >= 60.0 || sol.opt != rule || minimax != rule || calls > budget {
        return Err(format!(
            "{secs:.2}s opt {} minimax {minimax} rule {rule} calls {calls} budget {budget}",
            sol.opt
        ));
    }
    Ok(format!(
        "n={n}: {secs:.2}s, opt {} matches k mod 3 rule, {calls} eval calls <= {EVAL_BUDGET_CONSTANT}*(nm)^2*n^2*L = {budget} (measured c = {:.5})",
        sol.opt,
        calls as f64 / ((n * m).pow(2) * n * n * l) as f64
    ))
}

fn criterion_10() -> Outcome {
    let objective = Direction::from_d1(ratio(1, 2));
    let (seed, g) = (0..10_000u64)
        .map(|seed| (seed, gen_random(&GenSpec::random(8, 2, 2, seed))))
        .find(|(_, g)| {
            solve_efce(g, objective.clone(), eps10()).is_ok_and(|s| s.counters.bisections >= 2)
        })
        .ok_or("no n = 8 game bisects")?;
    let coarse = solve_efce(&g, objective.clone(), eps10()).map_err(|e| e.to_string())?;
    let fine = solve_efce(&g, objective, ratio(1, 1 << 20)).map_err(|e| e.to_string())?;
    let (a, b) = (
        coarse.counters.bisection_iterations,
        fine.counters.bisection_iterations,
    );
    let growth = b as f64 / a as f64;
    if a == 0 || growth > 2.2 {
        return Err(format!("seed {seed}: {a} -> {b} iterations (x{growth:.3})"));
    }
    Ok(format!(
        "seed {seed}: {a} iterations at eps=2^-10, {b} at 2^-20 (x{growth:.3})"
    ))
}

fn criterion_11() -> Outcome {
    let sol = solve_sefce(&g1()).map_err(|e| e.to_string())?;
    let runs = 100_000;
    let plays = simulate_play(&sol, 20_251_015, runs).map_err(|e| e.to_string())?;
    let total = plays
        .iter()
        .fold(Point::origin(), |acc, p| acc.add(&p.rewards));
    let (mx, my) = (
        to_f64(&total.x) / runs as f64,
        to_f64(&total.y) / runs as f64,
    );
    if (mx - 1.5).abs() > 0.02 || (my - 1.0).abs() > 0.02 {
        return Err(format!("means ({mx:.4}, {my:.4})"));
    }
    Ok(format!("{runs} playouts, mean rewards ({mx:.4}, {my:.4})"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("SEFCE oracle equivalence", criterion_1),
        ("SEFCE decoder soundness", criterion_2),
        ("bisection adjacency", criterion_3),
        ("resolution bounds", criterion_4),
        ("EFCE near-optimality", criterion_5),
        ("EFCE pivot error budget", criterion_6),
        ("EFCE decoder soundness", criterion_7),
        ("fixture G1", criterion_8),
        ("Nim scaling", criterion_9),
        ("EFCE log(1/eps) scaling", criterion_10),
        ("simulation consistency", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
