use std::path::PathBuf;
use std::process::{Command, Output};

const G1: &str = r#"{ "n": 3, "m": 2, "ap": [2, 1, 1],
  "r1": {"1,1": "1", "1,2": "0", "2,1": "1", "2,2": "0"},
  "r2": {"1,1": "1/2", "1,2": "1", "2,1": "0", "2,2": "1"},
  "P":  {"1,1": {"2": "1"}, "1,2": {"3": "1"},
         "2,1": {"3": "1"}, "2,2": {"3": "1"}} }"#;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("turnpike-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn g1_file() -> PathBuf {
    let p = scratch("g1.json");
    std::fs::write(&p, G1).unwrap();
    p
}

fn turnpike(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_turnpike"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_fixture() {
    let g = g1_file();
    let o = turnpike(&["validate", g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ok"));
}

#[test]
fn validate_reports_violations_with_exit_one() {
    let p = scratch("bad.json");
    std::fs::write(
        &p,
        G1.replace(r#""2,1": {"3": "1"}"#, r#""2,1": {"1": "1"}"#),
    )
    .unwrap();
    let o = turnpike(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("acyclicity at (2,1)"));
}

#[test]
fn unreadable_input_exits_one() {
    let o = turnpike(&["punish", "/nonexistent/game.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_sefce_json_reports_opt() {
    let g = g1_file();
    let o = turnpike(&["solve-sefce", g.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["opt"], "3/2");
    assert_eq!(v["command"], "solve-sefce");
    assert!(v["input_digest"].as_str().unwrap().starts_with("sha256:"));
    assert!(v["counters"]["eval_calls"].as_u64().unwrap() > 0);
}

#[test]
fn json_payloads_are_byte_identical() {
    let g = g1_file();
    let args = [
        "solve-efce",
        g.to_str().unwrap(),
        "--objective",
        "1/2,1/2",
        "--epsilon",
        "1/1024",
        "--json",
        "--stats",
    ];
    assert_eq!(turnpike(&args).stdout, turnpike(&args).stdout);
}

#[test]
fn oracle_efce_exact_optimum() {
    let g = g1_file();
    let o = turnpike(&[
        "oracle",
        g.to_str().unwrap(),
        "--mode",
        "efce",
        "--epsilon",
        "0",
        "--objective",
        "1,0",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["optimum"], "0");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(turnpike(&["solve-sefce"]).status.code(), Some(2));
    assert_eq!(
        turnpike(&["validate", "x", "--no-such-flag"]).status.code(),
        Some(2)
    );
    let g = g1_file();
    let bad = turnpike(&[
        "solve-efce",
        g.to_str().unwrap(),
        "--objective",
        "1",
        "--epsilon",
        "1/4",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn guard_refusal_exits_three() {
    let g = g1_file();
    let o = turnpike(&["oracle", g.to_str().unwrap(), "--guard-cap", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let sol = scratch("guard-sol.json");
    turnpike(&[
        "solve-sefce",
        g.to_str().unwrap(),
        "--out",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(
        turnpike(&["audit", sol.to_str().unwrap(), "--guard-cap", "1"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn solution_file_drives_decode_audit_and_simulate() {
    let g = g1_file();
    let sol = scratch("sol.json");
    let o = turnpike(&[
        "solve-sefce",
        g.to_str().unwrap(),
        "--out",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = sol.to_str().unwrap();
    assert_eq!(
        stdout(&turnpike(&[
            "decode",
            s,
            "--history",
            "1:1",
            "--state",
            "2"
        ])),
        "action 1: 1/2\naction 2: 1/2\n"
    );
    assert_eq!(
        stdout(&turnpike(&["decode", s, "--state", "1"])),
        "action 1: 1\n"
    );
    assert_eq!(
        stdout(&turnpike(&[
            "decode",
            s,
            "--history",
            "1:2",
            "--state",
            "2"
        ])),
        "inadmissible (off-path action 1)\n"
    );
    let audit = turnpike(&["audit", s]);
    assert_eq!(audit.status.code(), Some(0));
    assert!(stdout(&audit).contains("verdict pass"));
    let sim = turnpike(&["simulate", s, "--seed", "42", "--runs", "200", "--json"]);
    let again = turnpike(&["simulate", s, "--seed", "42", "--runs", "200", "--json"]);
    assert_eq!(sim.stdout, again.stdout);
}

#[test]
fn dash_writes_to_stdout() {
    let o = turnpike(&["gen", "nim", "--k", "2", "-o", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let g = turnpike::format::parse_game(&stdout(&o)).unwrap();
    assert_eq!(g.n(), 5);
    let file = g1_file();
    let sol = turnpike(&["solve-sefce", file.to_str().unwrap(), "--out", "-"]);
    let parsed = turnpike::Solution::from_json_str(&stdout(&sol)).unwrap();
    assert_eq!(parsed.opt, turnpike::rational::ratio(3, 2));
}

#[test]
fn gen_random_is_reproducible() {
    let a = turnpike(&[
        "gen", "random", "--n", "8", "--m", "2", "--L", "2", "--seed", "7",
    ]);
    let b = turnpike(&[
        "gen", "random", "--n", "8", "--m", "2", "--L", "2", "--seed", "7",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn curve_dump_csv() {
    let g = g1_file();
    let o = turnpike(&["curve-dump", g.to_str().unwrap()]);
    assert_eq!(
        stdout(&o),
        "s,a,index,x,y\n1,1,0,1,3/2\n1,1,1,2,1/2\n1,2,0,0,1\n2,1,0,1,0\n2,2,0,0,1\n"
    );
}

#[test]
fn punish_table() {
    let g = g1_file();
    let o = turnpike(&["punish", g.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("1\t2\t2\t0\t2\t1\t1"), "{text}");
    let dec = stdout(&turnpike(&["punish", g.to_str().unwrap(), "--decimal"]));
    assert!(dec.contains("~"), "{dec}");
}
