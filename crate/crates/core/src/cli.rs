//! The `turnpike` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::decoder::{audit_feasibility, simulate_play, DecodeError, DecodedAction, Decoder};
use crate::engine::Counters;
use crate::format::{parse_game, serialize_game};
use crate::game::{bit_length, validate_game, History, StochasticGame};
use crate::generators::{generate, GenKind, GenSpec};
use crate::oracle::{full_curves, OracleError, OracleMode};
use crate::punishment::utility_under_punishment;
use crate::rational::{format_rational, parse_rational, to_f64, Direction, Point, Rational};
use crate::solution::{counters_json, Mode, Solution};
use crate::solver::{solve_efce, solve_sefce};

#[derive(Parser, Debug)]
#[command(name = "turnpike", version)]
#[command(about = "Correlated equilibria of turn-taking stochastic games, in exact arithmetic")]
pub struct Cli {
    /// Emit a JSON report instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Add rounded decimal companions to rational outputs (approximate).
    #[arg(long, global = true)]
    decimal: bool,
    /// Cap on oracle vertices and on enumerated histories.
    #[arg(long, global = true, value_name = "N")]
    guard_cap: Option<usize>,
    /// Include wall-clock time in reports (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a game file against the model assumptions.
    Validate { game: PathBuf },
    /// Print both punishment policies and the utility under punishment.
    Punish { game: PathBuf },
    /// Generate a game file.
    Gen {
        #[command(subcommand)]
        kind: GenCommand,
    },
    /// Solve for the leader-optimal Stackelberg correlated equilibrium.
    SolveSefce {
        game: PathBuf,
        /// Write the solution file here ("-" for stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print evaluation counters and the largest rational bit size.
        #[arg(long)]
        stats: bool,
    },
    /// Solve for an approximately optimal correlated equilibrium.
    SolveEfce {
        game: PathBuf,
        /// Objective direction, e.g. "1,0" or "1/2,1/2".
        #[arg(long, value_parser = parse_direction)]
        objective: Direction,
        /// Positive dyadic tolerance, e.g. "1/1024".
        #[arg(long, value_parser = parse_rational_arg)]
        epsilon: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        stats: bool,
    },
    /// Recommendation after a history, or the punishment action off path.
    Decode {
        solution: PathBuf,
        /// Comma separated state:action pairs, e.g. "1:1,2:1".
        #[arg(long, default_value = "", value_parser = History::parse)]
        history: History,
        #[arg(long)]
        state: usize,
    },
    /// Check the decoded strategy at every admissible history.
    Audit { solution: PathBuf },
    /// Sample playouts of the decoded strategy.
    Simulate {
        solution: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        /// Also print this many trajectories.
        #[arg(long, default_value_t = 0)]
        show: usize,
    },
    /// Compute every frontier curve explicitly.
    Oracle(OracleArgs),
    /// Write every oracle vertex as CSV rows `s,a,index,x,y`.
    CurveDump {
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(short = 'o', long, default_value = "-")]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct OracleArgs {
    game: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Sefce)]
    mode: ModeArg,
    /// Constraint slack for the efce mode; thresholds are u^p(s) - epsilon.
    #[arg(long, value_parser = parse_rational_arg, default_value = "0")]
    epsilon: Rational,
    #[arg(long, value_parser = parse_direction, default_value = "1,0")]
    objective: Direction,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeArg {
    Sefce,
    Efce,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Seeded random acyclic game.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long = "L", default_value_t = 2)]
        l: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long, default_value = "-")]
        out: PathBuf,
    },
    /// Nim with k matches.
    Nim {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        first: usize,
        #[arg(short = 'o', long, default_value = "-")]
        out: PathBuf,
    },
}

fn parse_direction(text: &str) -> Result<Direction, String> {
    Direction::parse(text)
}

fn parse_rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Failure(anyhow::Error),
    Guard(String),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failure(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Guard(_) => 3,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

struct Input {
    text: String,
    digest: String,
}

fn read_input(path: &Path) -> CliResult<Input> {
    let bytes = if path == Path::new("-") {
        let mut buf = Vec::new();
        io::Read::read_to_end(&mut io::stdin(), &mut buf).context("reading stdin")?;
        buf
    } else {
        fs::read(path).with_context(|| format!("reading {}", path.display()))?
    };
    let digest = format!("sha256:{}", hex::encode(Sha256::digest(&bytes)));
    let text = String::from_utf8(bytes).map_err(|_| anyhow!("{} is not UTF-8", path.display()))?;
    Ok(Input { text, digest })
}

fn load_game(path: &Path) -> CliResult<(StochasticGame, String)> {
    let input = read_input(path)?;
    let g = parse_game(&input.text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((g, input.digest))
}

fn load_solution(path: &Path) -> CliResult<(Solution, String)> {
    let input = read_input(path)?;
    let sol = Solution::from_json_str(&input.text)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok((sol, input.digest))
}

fn write_output(path: &Path, text: &str, out: &mut dyn Write) -> CliResult<()> {
    if path == Path::new("-") {
        out.write_all(text.as_bytes()).context("writing stdout")?;
    } else {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

struct Ctx {
    json: bool,
    decimal: bool,
    cap: Option<usize>,
    timing: bool,
    start: Instant,
}

impl Ctx {
    fn q(&self, r: &Rational) -> String {
        if self.decimal {
            format!("{} (~{:.6})", format_rational(r), to_f64(r))
        } else {
            format_rational(r)
        }
    }

    fn pt(&self, p: &Point) -> String {
        format!("({}, {})", self.q(&p.x), self.q(&p.y))
    }

    fn jq(&self, r: &Rational) -> Value {
        json!(format_rational(r))
    }

    fn jpt(&self, p: &Point) -> Value {
        json!([format_rational(&p.x), format_rational(&p.y)])
    }

    /// One report per command: name, input digest, counters and payload.
    fn report(
        &self,
        command: &str,
        digest: Option<&str>,
        counters: Option<&Counters>,
        result: Value,
    ) -> String {
        let mut doc = Map::new();
        doc.insert("command".into(), json!(command));
        doc.insert("input_digest".into(), json!(digest));
        if let Some(c) = counters {
            doc.insert("counters".into(), counters_json(c));
        }
        if self.timing {
            doc.insert(
                "timing_ms".into(),
                json!(self.start.elapsed().as_millis() as u64),
            );
        }
        if self.decimal {
            doc.insert(
                "decimal_note".into(),
                json!("*_approx fields are rounded and not exact"),
            );
        }
        doc.insert("result".into(), result);
        let mut text =
            serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Parses `args` and runs the command, writing to `out`. Returns the exit
/// code: 0 success, 1 validation or I/O failure, 2 usage error, 3 refusal.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            let _ = match &e {
                CliError::Failure(inner) => writeln!(err, "error: {inner:#}"),
                CliError::Guard(msg) => writeln!(err, "refused: {msg}"),
            };
            code
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> CliResult<i32> {
    let ctx = Ctx {
        json: cli.json,
        decimal: cli.decimal,
        cap: cli.guard_cap,
        timing: cli.timing,
        start: Instant::now(),
    };
    match cli.command {
        Command::Validate { game } => cmd_validate(&ctx, &game, out),
        Command::Punish { game } => cmd_punish(&ctx, &game, out),
        Command::Gen { kind } => cmd_gen(kind, out),
        Command::SolveSefce {
            game,
            out: file,
            stats,
        } => {
            let (g, digest) = load_game(&game)?;
            let sol = solve_sefce(&g).map_err(|e| anyhow!(e))?;
            emit_solution(
                &ctx,
                "solve-sefce",
                &digest,
                &sol,
                file.as_deref(),
                stats,
                out,
            )
        }
        Command::SolveEfce {
            game,
            objective,
            epsilon,
            out: file,
            stats,
        } => {
            let (g, digest) = load_game(&game)?;
            let sol = solve_efce(&g, objective, epsilon).map_err(|e| anyhow!(e))?;
            emit_solution(
                &ctx,
                "solve-efce",
                &digest,
                &sol,
                file.as_deref(),
                stats,
                out,
            )
        }
        Command::Decode {
            solution,
            history,
            state,
        } => cmd_decode(&ctx, &solution, &history, state, out),
        Command::Audit { solution } => cmd_audit(&ctx, &solution, out),
        Command::Simulate {
            solution,
            seed,
            runs,
            show,
        } => cmd_simulate(&ctx, &solution, seed, runs, show, out),
        Command::Oracle(args) => cmd_oracle(&ctx, &args, out),
        Command::CurveDump { oracle, out: file } => cmd_curve_dump(&ctx, &oracle, &file, out),
    }
}

fn cmd_validate(ctx: &Ctx, path: &Path, out: &mut dyn Write) -> CliResult<i32> {
    let (g, digest) = load_game(path)?;
    let report = validate_game(&g);
    let l = bit_length(&g).ok();
    let violations: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
    let text = if ctx.json {
        ctx.report(
            "validate",
            Some(&digest),
            None,
            json!({ "ok": report.is_ok(), "n": g.n(), "m": g.m(), "bit_length": l, "violations": violations }),
        )
    } else if report.is_ok() {
        format!("ok: n={} m={} L={}\n", g.n(), g.m(), l.unwrap_or(0))
    } else {
        violations
            .iter()
            .map(|v| format!("violation: {v}\n"))
            .collect()
    };
    out.write_all(text.as_bytes()).context("writing stdout")?;
    Ok(if report.is_ok() { 0 } else { 1 })
}

fn cmd_punish(ctx: &Ctx, path: &Path, out: &mut dyn Write) -> CliResult<i32> {
    let (g, digest) = load_game(path)?;
    let pv = utility_under_punishment(&g);
    let (p1, p2) = (pv.policy(1), pv.policy(2));
    let text = if ctx.json {
        let rows: Vec<Value> = g
            .states()
            .map(|s| {
                json!({
                    "s": s, "ap": g.ap(s),
                    "pi1": p1.action(s), "v1": ctx.jq(p1.value(s)),
                    "pi2": p2.action(s), "v2": ctx.jq(p2.value(s)),
                    "u_p": ctx.jq(pv.u_p(s)),
                })
            })
            .collect();
        ctx.report("punish", Some(&digest), None, json!(rows))
    } else {
        let mut t = String::from("s\tap\tpi1\tV1\tpi2\tV2\tu_p\n");
        for s in g.states() {
            let _ = writeln!(
                t,
                "{s}\t{}\t{}\t{}\t{}\t{}\t{}",
                g.ap(s),
                p1.action(s),
                ctx.q(p1.value(s)),
                p2.action(s),
                ctx.q(p2.value(s)),
                ctx.q(pv.u_p(s))
            );
        }
        t
    };
    out.write_all(text.as_bytes()).context("writing stdout")?;
    Ok(0)
}

fn cmd_gen(kind: GenCommand, out: &mut dyn Write) -> CliResult<i32> {
    let (spec, file) = match kind {
        GenCommand::Random { n, m, l, seed, out } => (GenSpec::random(n, m, l, seed), out),
        GenCommand::Nim { k, first, out } => (
            GenSpec {
                kind: GenKind::Nim { k, first },
                n: 2 * k + 1,
                m: 2,
                l: 0,
                seed: 0,
            },
            out,
        ),
    };
    let g = generate(&spec).map_err(|e| anyhow!(e))?;
    write_output(&file, &serialize_game(&g), out)?;
    Ok(0)
}

fn solution_summary(ctx: &Ctx, sol: &Solution, stats: bool) -> Value {
    let mut r = Map::new();
    r.insert("mode".into(), json!(sol.mode.name()));
    r.insert("feasible".into(), json!(sol.is_feasible()));
    r.insert("root_action".into(), json!(sol.root_action));
    match &sol.mode {
        Mode::Sefce => {
            r.insert("opt".into(), ctx.jq(&sol.opt));
        }
        Mode::Efce { objective, epsilon } => {
            r.insert(
                "alpha_obj".into(),
                json!([
                    format_rational(&objective.d1),
                    format_rational(&objective.d2)
                ]),
            );
            r.insert("epsilon".into(), ctx.jq(epsilon));
            r.insert("opt_obj".into(), ctx.jq(&sol.opt));
            r.insert("opt_first".into(), ctx.jq(&sol.opt_first));
        }
    }
    if ctx.decimal {
        r.insert("opt_approx".into(), json!(to_f64(&sol.opt)));
    }
    let mut pivots = Map::new();
    for s in 1..sol.game.n() {
        for a in sol.game.actions() {
            pivots.insert(format!("{s},{a}"), ctx.jpt(sol.pivot(s, a)));
        }
    }
    r.insert("pivots".into(), Value::Object(pivots));
    if stats {
        r.insert("bit_length".into(), json!(sol.bit_length));
        r.insert("max_bits".into(), json!(sol.max_bits()));
        r.insert("cache_entries".into(), json!(sol.cache.len()));
    }
    Value::Object(r)
}

fn emit_solution(
    ctx: &Ctx,
    command: &str,
    digest: &str,
    sol: &Solution,
    file: Option<&Path>,
    stats: bool,
    out: &mut dyn Write,
) -> CliResult<i32> {
    if let Some(path) = file {
        write_output(path, &sol.to_json_string(), out)?;
        if path == Path::new("-") {
            return Ok(0);
        }
    }
    let text = if ctx.json {
        ctx.report(
            command,
            Some(digest),
            Some(&sol.counters),
            solution_summary(ctx, sol, stats),
        )
    } else {
        let mut t = String::new();
        let label = if matches!(sol.mode, Mode::Sefce) {
            "opt"
        } else {
            "opt_obj"
        };
        if sol.is_feasible() {
            let _ = writeln!(t, "{label} {}", ctx.q(&sol.opt));
        } else {
            let _ = writeln!(t, "{label} {} (infeasible)", ctx.q(&sol.opt));
        }
        if let Mode::Efce { .. } = sol.mode {
            let _ = writeln!(t, "opt_first {}", ctx.q(&sol.opt_first));
        }
        if let Some(a) = sol.root_action {
            let _ = writeln!(t, "root action {a}");
        }
        for s in 1..sol.game.n() {
            for a in sol.game.actions() {
                let _ = writeln!(t, "pivot ({s},{a}) {}", ctx.pt(sol.pivot(s, a)));
            }
        }
        if stats {
            let c = &sol.counters;
            let _ = writeln!(t, "eval calls {}", c.eval_calls);
            let _ = writeln!(t, "eval computed {}", c.eval_computed);
            let _ = writeln!(t, "bisections {}", c.bisections);
            let _ = writeln!(t, "bisection iterations {}", c.bisection_iterations);
            let _ = writeln!(t, "adjacency refinements {}", c.adjacency_refinements);
            let _ = writeln!(t, "max bits {}", sol.max_bits());
        }
        t
    };
    out.write_all(text.as_bytes()).context("writing stdout")?;
    Ok(0)
}

fn cmd_decode(
    ctx: &Ctx,
    path: &Path,
    h: &History,
    state: usize,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let (sol, digest) = load_solution(path)?;
    let mut dec = Decoder::new(&sol);
    let decoded = dec.decode(h, state);
    let off_path = match decoded {
        DecodedAction::Inadmissible => match dec.off_path_action(h, state) {
            Ok(a) => Some(a),
            Err(DecodeError::Impossible(_))
            | Err(DecodeError::Range(_))
            | Err(DecodeError::Infeasible) => None,
            Err(e) => return Err(anyhow!(e).into()),
        },
        DecodedAction::Play(_) => None,
    };
    let text = match (&decoded, ctx.json) {
        (DecodedAction::Play(dist), true) => {
            let d: Map<String, Value> = dist
                .iter()
                .map(|(a, p)| (a.to_string(), ctx.jq(p)))
                .collect();
            ctx.report(
                "decode",
                Some(&digest),
                None,
                json!({ "admissible": true, "distribution": d }),
            )
        }
        (DecodedAction::Inadmissible, true) => ctx.report(
            "decode",
            Some(&digest),
            None,
            json!({ "admissible": false, "off_path_action": off_path }),
        ),
        (DecodedAction::Play(dist), false) => dist
            .iter()
            .map(|(a, p)| format!("action {a}: {}\n", ctx.q(p)))
            .collect(),
        (DecodedAction::Inadmissible, false) => match off_path {
            Some(a) => format!("inadmissible (off-path action {a})\n"),
            None => "inadmissible\n".to_string(),
        },
    };
    out.write_all(text.as_bytes()).context("writing stdout")?;
    Ok(0)
}

fn guard_or_fail(e: DecodeError) -> CliError {
    match e {
        DecodeError::Guard { .. } => CliError::Guard(e.to_string()),
        other => CliError::Failure(anyhow!(other)),
    }
}

fn cmd_audit(ctx: &Ctx, path: &Path, out: &mut dyn Write) -> CliResult<i32> {
    let (sol, digest) = load_solution(path)?;
    let cap = ctx.cap.unwrap_or(crate::decoder::DEFAULT_HISTORY_CAP);
    let report = audit_feasibility(&sol, cap).map_err(guard_or_fail)?;
    let text = if ctx.json {
        let records: Vec<Value> = report
            .records
            .iter()
            .map(|r| {
                json!({
                    "history": r.history.to_string(), "state": r.state, "action": r.action,
                    "reach": ctx.jq(&r.reach), "value": ctx.jpt(&r.value),
                    "threshold": r.threshold.as_ref().map(|(k, t)| json!({"player": k, "value": ctx.jq(t)})),
                    "slack": r.slack.as_ref().map(|s| ctx.jq(s)),
                    "consistent": r.consistent,
                })
            })
            .collect();
        ctx.report(
            "audit",
            Some(&digest),
            None,
            json!({
                "passed": report.passed, "root_value": ctx.jpt(&report.root_value),
                "root_score": ctx.jq(&report.root_score), "opt": ctx.jq(&sol.opt),
                "matches_opt": report.matches_opt, "records": records,
            }),
        )
    } else {
        let mut t = String::from("history\ts\ta\treach\tvalue\tthreshold\tslack\n");
        for r in &report.records {
            let thr = r
                .threshold
                .as_ref()
                .map_or("-".to_string(), |(k, v)| format!("v{k}>={}", ctx.q(v)));
            let slack = r.slack.as_ref().map_or("-".to_string(), |s| ctx.q(s));
            let _ = writeln!(
                t,
                "{}\t{}\t{}\t{}\t{}\t{thr}\t{slack}",
                r.history,
                r.state,
                r.action,
                ctx.q(&r.reach),
                ctx.pt(&r.value)
            );
        }
        let _ = writeln!(
            t,
            "root value {} (score {}, opt {})",
            ctx.pt(&report.root_value),
            ctx.q(&report.root_score),
            ctx.q(&sol.opt)
        );
        let _ = writeln!(t, "verdict {}", if report.passed { "pass" } else { "fail" });
        t
    };
    out.write_all(text.as_bytes()).context("writing stdout")?;
    Ok(if report.passed { 0 } else { 1 })
}

fn cmd_simulate(
    ctx: &Ctx,
    path: &Path,
    seed: u64,
    runs: usize,
    show: usize,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let (sol, digest) = load_solution(path)?;
    let plays = simulate_play(&sol, seed, runs).map_err(|e| anyhow!(e))?;
    let total = plays
        .iter()
        .fold(Point::origin(), |acc, p| acc.add(&p.rewards));
    let mean = if runs == 0 {
        Point::origin()
    } else {
        total.scale(&Rational::new(1.into(), (runs as i64).into()))
    };
    let text = if ctx.json {
        let shown: Vec<Value> = plays
            .iter()
            .take(show)
            .map(|p| json!({ "history": p.history.to_string(), "rewards": ctx.jpt(&p.rewards) }))
            .collect();
        ctx.report(
            "simulate",
            Some(&digest),
            None,
            json!({
                "seed": seed, "runs": runs, "mean": ctx.jpt(&mean),
                "mean_approx": [to_f64(&mean.x), to_f64(&mean.y)], "trajectories": shown,
            }),
        )
    } else {
        let mut t = String::new();
        for p in plays.iter().take(show) {
            let _ = writeln!(t, "{} -> {}", p.history, ctx.pt(&p.rewards));
        }
        let _ = writeln!(t, "runs {runs} seed {seed}");
        let _ = writeln!(
            t,
            "mean rewards ({:.6}, {:.6})",
            to_f64(&mean.x),
            to_f64(&mean.y)
        );
        t
    };
    out.write_all(text.as_bytes()).context("writing stdout")?;
    Ok(0)
}

fn build_oracle(
    ctx: &Ctx,
    args: &OracleArgs,
) -> CliResult<(StochasticGame, String, crate::oracle::OracleCurves)> {
    let (g, digest) = load_game(&args.game)?;
    let report = validate_game(&g);
    if !report.is_ok() {
        return Err(anyhow!("game is invalid: {}", report.violations[0]).into());
    }
    let mode = match args.mode {
        ModeArg::Sefce => OracleMode::Sefce,
        ModeArg::Efce => {
            let up = utility_under_punishment(&g);
            let thresholds = up.utility.iter().map(|u| u - &args.epsilon).collect();
            OracleMode::Efce {
                objective: args.objective.clone(),
                thresholds,
            }
        }
    };
    let cap = ctx.cap.unwrap_or(crate::oracle::DEFAULT_VERTEX_CAP);
    let curves = full_curves(&g, &mode, cap).map_err(|e| match e {
        OracleError::Guard { .. } => CliError::Guard(e.to_string()),
        other => CliError::Failure(anyhow!(other)),
    })?;
    Ok((g, digest, curves))
}

fn cmd_oracle(ctx: &Ctx, args: &OracleArgs, out: &mut dyn Write) -> CliResult<i32> {
    let (g, digest, o) = build_oracle(ctx, args)?;
    let text = if ctx.json {
        let mut curves = Map::new();
        let mut pivots = Map::new();
        for s in 1..g.n() {
            for a in g.actions() {
                let key = format!("{s},{a}");
                let verts: Vec<Value> = o
                    .curve(s, a)
                    .vertices()
                    .iter()
                    .map(|p| ctx.jpt(p))
                    .collect();
                curves.insert(key.clone(), json!(verts));
                pivots.insert(key, ctx.jpt(o.pivot(s, a)));
            }
        }
        ctx.report(
            "oracle",
            Some(&digest),
            None,
            json!({
                "mode": match args.mode { ModeArg::Sefce => "sefce", ModeArg::Efce => "efce" },
                "optimum": ctx.jq(&o.optimum),
                "feasible": o.root_point.is_some(),
                "curves": curves, "pivots": pivots,
            }),
        )
    } else {
        let mut t = String::new();
        for s in 1..g.n() {
            for a in g.actions() {
                let verts: Vec<String> =
                    o.curve(s, a).vertices().iter().map(|p| ctx.pt(p)).collect();
                let _ = writeln!(t, "f({s},{a}) {}", verts.join(" "));
                let _ = writeln!(t, "pivot({s},{a}) {}", ctx.pt(o.pivot(s, a)));
            }
        }
        let _ = writeln!(t, "root optimum {}", ctx.q(&o.optimum));
        t
    };
    out.write_all(text.as_bytes()).context("writing stdout")?;
    Ok(0)
}

fn cmd_curve_dump(
    ctx: &Ctx,
    args: &OracleArgs,
    file: &Path,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let (g, _, o) = build_oracle(ctx, args)?;
    let mut csv = String::from("s,a,index,x,y\n");
    for s in 1..g.n() {
        for a in g.actions() {
            for (i, p) in o.curve(s, a).vertices().iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{s},{a},{i},{},{}",
                    format_rational(&p.x),
                    format_rational(&p.y)
                );
            }
        }
    }
    write_output(file, &csv, out)?;
    Ok(0)
}
