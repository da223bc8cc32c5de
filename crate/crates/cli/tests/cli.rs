use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn momc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momc")).args(args).output().expect("momc runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn achievable_writes_the_mixing_strategy() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sigma.json");
    let o = momc(&[
        "achievable",
        &model("split.json"),
        "--targets",
        "P1,P2",
        "--bound",
        "1/2,1/2",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("self-check: pass"));
    let s = json(&out);
    let at_s: Vec<_> = s["choices"].as_array().unwrap().iter().filter(|c| c["state"] == "s").collect();
    assert_eq!(at_s.len(), 1);
    assert_eq!(at_s[0]["action"], "a3");
    assert_eq!(at_s[0]["prob"], "1");
    // the written file re-validates
    let o = momc(&[
        "check-strategy",
        &model("split.json"),
        out.to_str().unwrap(),
        "--claims",
        ">=1/2,>=1/2",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn strict_vertex_bound_is_not_achievable() {
    let o = momc(&["achievable", &model("split.json"), "--bound", "1/2,1/2", "--strict", "1,2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("result: no"));
}

#[test]
fn bounds_from_the_example() {
    for (bound, expect) in [("3/10,2/5", 0), ("0.55,0.3", 1), ("3/5,0", 0), ("0,4/5", 0), ("0,0.81", 1)] {
        let o = momc(&["achievable", &model("split.json"), "--targets", "P1,P2", "--bound", bound]);
        assert_eq!(code(&o), expect, "bound {bound}");
    }
}

#[test]
fn exact_pareto_csv_is_sorted() {
    let o = momc(&["pareto", &model("split.json"), "--exact2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "P1,P2,P1_decimal,P2_decimal");
    assert_eq!(
        &rows[1..],
        [
            "3/5,0,0.600000000000,0.000000000000",
            "1/2,1/2,0.500000000000,0.500000000000",
            "0,4/5,0.000000000000,0.800000000000"
        ]
    );
}

#[test]
fn unreachable_targets_give_a_zero_row() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(
        &path,
        r#"{"states": [{"name": "s"}, {"name": "g", "labels": ["G"]}, {"name": "h", "labels": ["H"]}],
            "actions": [{"state": "s", "action": "a", "transitions": [{"to": "s", "prob": 1}]},
                        {"state": "g", "action": "a", "transitions": [{"to": "g", "prob": 1}]},
                        {"state": "h", "action": "a", "transitions": [{"to": "h", "prob": 1}]}],
            "init": "s"}"#,
    )
    .unwrap();
    let o = momc(&["pareto", path.to_str().unwrap(), "--epsilon", "1/10"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().skip(1).collect::<Vec<_>>(), ["0,0,0.000000000000,0.000000000000"]);
}

#[test]
fn three_objectives_give_three_columns() {
    let dir = TempDir::new().unwrap();
    let strategies = dir.path().join("points");
    let o = momc(&[
        "pareto",
        &model("split.json"),
        "--targets",
        "P1,P2,avoid:P1",
        "--epsilon",
        "1/10",
        "--strategies",
        strategies.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert!(rows.len() > 2);
    assert!(rows.iter().all(|r| r.split(',').count() == 6));
    assert!(strategies.join("point-1.json").exists());
}

#[test]
fn query_files() {
    let o = momc(&["query", &model("loops.json"), &model("loops.query")]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("result: sat"));
    assert!(text.contains("gf1: 1/2 (0.500000000000) > 0 ok"));
    let o = momc(&["query", &model("split.json"), &model("split.query")]);
    assert_eq!(code(&o), 0);
    let o = momc(&["query", &model("split.json"), &model("split-guarantee.query")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("result: holds"));
}

#[test]
fn unsat_and_forall() {
    let dir = TempDir::new().unwrap();
    let head = "properties {\n r1 = reach \"P1\"\n r2 = reach \"P2\"\n n2 = avoid \"P2\"\n complement r2 = n2\n}\n";
    let cases = [
        ("exists Pr(r1) >= 1/2 & Pr(r2) > 1/2", 1, "result: unsat"),
        ("forall Pr(r2) <= 4/5", 0, "result: holds"),
        ("forall Pr(r2) < 4/5", 1, "result: fails"),
    ];
    for (i, (stmt, expect, line)) in cases.iter().enumerate() {
        let q = dir.path().join(format!("q{i}.query"));
        std::fs::write(&q, format!("{head}{stmt}\n")).unwrap();
        let o = momc(&["query", &model("split.json"), q.to_str().unwrap()]);
        assert_eq!(code(&o), *expect, "{stmt}");
        assert!(stdout(&o).contains(line), "{stmt}: {}", stdout(&o));
    }
}

#[test]
fn qualitative_subcommand() {
    let o = momc(&["qualitative", &model("loops.json"), "--positive", "buchi:P1,buchi:P2"]);
    assert_eq!(code(&o), 0);
    let o = momc(&["qualitative", &model("loops.json"), "--sure", "buchi:P1", "--positive", "buchi:P2"]);
    assert_eq!(code(&o), 1);
    let hoa = model("gf-p2.hoa");
    let o = momc(&["qualitative", &model("loops.json"), "--sure", &format!("automaton:{hoa}")]);
    assert_eq!(code(&o), 0);
}

#[test]
fn check_strategy_reports_failures() {
    let dir = TempDir::new().unwrap();
    let s = dir.path().join("s.json");
    let stay = ["t1", "t2", "x1", "x2"].map(|v| format!(r#"{{"state": "{v}", "action": "stay", "prob": "1"}}"#));
    let text = format!(r#"{{"choices": [{{"state": "s", "action": "a1", "prob": "1"}}, {}]}}"#, stay.join(", "));
    std::fs::write(&s, text).unwrap();
    let path = s.to_str().unwrap();
    let o = momc(&["check-strategy", &model("split.json"), path, "--claims", "=3/5,=0"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = momc(&["check-strategy", &model("split.json"), path, "--claims", ">3/5,0"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAILED"));
}

#[test]
fn gen_hard_is_deterministic() {
    let a = momc(&["gen-hard", "5", "--seed", "9"]);
    let b = momc(&["gen-hard", "5", "--seed", "9"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(&path, &a.stdout).unwrap();
    let o = momc(&["vertices", path.to_str().unwrap(), "--targets", "R,B"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_momc"))
            .args(["pareto", &model("split.json"), "--epsilon", "1/100", "--format", "json"])
            .env("MOMC_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, run("4").stdout);
    assert_eq!(code(&run("zero")), 2);
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"states\": [").unwrap();
    for args in [
        vec!["validate", bad.to_str().unwrap()],
        vec!["validate", "/nonexistent/model.json"],
        vec!["achievable", &model("split.json")],
        vec!["achievable", &model("split.json"), "--bound", "1/2,x"],
        vec!["achievable", &model("split.json"), "--bound", "1/2,1/2", "--strict", "3"],
        vec!["achievable", &model("split.json"), "--targets", "Q", "--bound", "1/2"],
        vec!["pareto", &model("split.json")],
        vec!["pareto", &model("split.json"), "--targets", "P1", "--exact2"],
        vec!["gen-hard", "30"],
    ] {
        let o = momc(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stdout(&o));
    }
    let o = momc(&["validate", &model("loops.json")]);
    assert_eq!(code(&o), 0);
}
