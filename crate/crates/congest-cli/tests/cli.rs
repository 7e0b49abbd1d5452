use std::path::Path;
use std::process::{Command, Output};

fn congest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_congest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fig1() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/fig1.graph")
        .display()
        .to_string()
}

fn report_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a report")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn ksp_on_fig1_is_exact() {
    let fig1 = fig1();
    let out = congest(&["run", &fig1, "ksp", "--sources", "a,b", "--h", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = report_of(&out);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["verdict"], "exact");
    assert_eq!(report["result"]["blocker"], serde_json::json!([1]));
    assert_eq!(report["config"]["sources"], serde_json::json!([0, 1]));
    assert!(report["total_rounds"].as_u64().unwrap() > 0);
}

#[test]
fn blocker_on_fig1_picks_b() {
    let fig1 = fig1();
    let out = congest(&["run", &fig1, "blocker", "--h", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = report_of(&out);
    assert_eq!(report["verdict"], "exact");
    assert_eq!(report["result"]["q"], serde_json::json!([1]));
    assert_eq!(report["result"]["q_names"], serde_json::json!(["b"]));
}

#[test]
fn run_writes_report_and_distance_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("rep.json");
    let csv = dir.path().join("d.csv");
    let fig1 = fig1();
    let out = congest(&[
        "run",
        &fig1,
        "ksp",
        "--sources",
        "a,b",
        "--h",
        "2",
        "--report",
        rep.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["verdict"], "exact");
    let csv = std::fs::read_to_string(&csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("source,target,distance"));
    // true distances from a on fig1: b=1, d=2, c=3
    assert!(csv.contains("0,1,1\n"));
    assert!(csv.contains("0,3,2\n"));
    assert!(csv.contains("0,2,3\n"));
    assert!(csv.contains("1,2,2\n"));
}

#[test]
fn short_range_settles_the_one_hop_ball() {
    let fig1 = fig1();
    let out = congest(&[
        "run", &fig1, "short-range", "--sources", "a", "--h", "1", "--cap", "9",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = report_of(&out);
    assert_eq!(report["verdict"], "exact");
    assert_eq!(report["result"]["settled_nodes"], 2);
    assert_eq!(report["result"]["late_adoptions"], 0);
}

#[test]
fn extension_continues_from_seeded_labels() {
    let fig1 = fig1();
    let out = congest(&[
        "run", &fig1, "extension", "--seeds", "b=0,a=1", "--h", "1",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = report_of(&out);
    assert_eq!(report["verdict"], "exact");
    assert_eq!(report["config"]["seeds"], serde_json::json!([[0, 1], [1, 0]]));
}

#[test]
fn csssp_and_rand_apsp_verify_on_fig1() {
    let fig1 = fig1();
    let out = congest(&["run", &fig1, "csssp", "--h", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report_of(&out)["verdict"], "exact");

    let out = congest(&["run", &fig1, "rand-apsp", "--seed", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report_of(&out)["verdict"], "exact");
}

#[test]
fn generate_is_deterministic_per_seed() {
    let args = [
        "generate",
        "--kind",
        "gnp",
        "--n",
        "40",
        "--p",
        "0.3",
        "--lambda",
        "10",
        "--zero-frac",
        "0.2",
        "--seed",
        "7",
    ];
    let a = congest(&args);
    let b = congest(&args);
    assert_eq!(code(&a), 0);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn generate_path_with_fixed_weight() {
    let out = congest(&["generate", "--kind", "path", "--n", "4", "--w", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "p 4 3 1 nn\ne 0 1 1\ne 1 2 1\ne 2 3 1\n");
}

#[test]
fn generate_rejects_bad_probability() {
    let out = congest(&["generate", "--kind", "gnp", "--n", "10", "--p", "1.5"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn approx_rejects_too_small_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.graph");
    let gen = congest(&[
        "generate", "--kind", "gnp", "--n", "40", "--p", "0.3", "--lambda", "10",
        "--seed", "7", "--out", graph.to_str().unwrap(),
    ]);
    assert_eq!(code(&gen), 0);
    let out = congest(&["run", graph.to_str().unwrap(), "approx", "--epsilon", "0.01"]);
    assert_eq!(code(&out), 4);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("epsilon"), "stderr: {err}");

    let out = congest(&["run", graph.to_str().unwrap(), "approx", "--epsilon", "0.5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = report_of(&out);
    assert!(
        report["verdict"] == "within-epsilon" || report["verdict"] == "exact",
        "verdict: {}",
        report["verdict"]
    );
}

#[test]
fn bench_rounds_grow_with_size() {
    let out = congest(&[
        "bench",
        "--algorithm",
        "apsp",
        "--sizes",
        "20,40,80",
        "--h",
        "3",
        "--seed",
        "7",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,k,h,total_rounds,congestion,phases")
    );
    let rounds: Vec<u64> = lines
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rounds.len(), 3);
    assert!(rounds.windows(2).all(|w| w[0] <= w[1]), "rounds: {rounds:?}");
}

#[test]
fn bench_with_no_sizes_is_header_only() {
    let out = congest(&["bench", "--algorithm", "apsp", "--sizes", ""]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "n,k,h,total_rounds,congestion,phases\n"
    );
}

#[test]
fn round_limit_env_reaches_the_engine() {
    let fig1 = fig1();
    let out = Command::new(env!("CARGO_BIN_EXE_congest"))
        .args(["run", &fig1, "ksp", "--sources", "a,b", "--h", "2"])
        .env("CONGEST_ROUND_LIMIT", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("round limit 2"), "stderr: {err}");
}

#[test]
fn usage_errors_exit_three() {
    let fig1 = fig1();
    for args in [
        vec!["run", &fig1, "frobnicate", "--h", "2"],
        vec!["run", &fig1, "short-range", "--h", "2"],
        vec!["run", &fig1, "ksp", "--sources", "a,b"],
        vec!["run", &fig1, "multi-source", "--sources", "a,a", "--h", "2"],
        vec!["run", &fig1, "short-range", "--sources", "z", "--h", "2"],
        vec!["run", &fig1, "extension", "--seeds", "a:0", "--h", "2"],
        vec!["bench", "--algorithm", "apsp", "--sizes", "20,forty"],
    ] {
        let out = congest(&args);
        assert_eq!(code(&out), 3, "args {args:?}");
    }
}

#[test]
fn missing_graph_file_is_an_operational_error() {
    let out = congest(&["run", "/nonexistent/g.graph", "apsp", "--h", "3"]);
    assert_eq!(code(&out), 4);
}
