use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lflp::io::write_instance;
use lflp_core::hardness::example1_family;
use serde_json::Value;

fn lflp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lflp")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn total(v: &Value) -> f64 {
    v["cost"]["total"].as_f64().unwrap()
}

fn example1_file(dir: &Path) -> String {
    let path = dir.join("ex1.json");
    write_instance(&path, &example1_family(4, 0.01, 1.0).unwrap()).unwrap();
    path.display().to_string()
}

#[test]
fn run_two_chance_on_four_spokes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example1_file(dir.path());
    let v = json_of(&lflp(&["run", &inst, "--policy", "2gr", "--gamma", "1", "--eta", "1"]));
    assert!((total(&v) - 1.24).abs() < 1e-9);
    assert_eq!(v["cost"]["solution"], serde_json::json!([0, 4]));
    let opt = json_of(&lflp(&["opt", &inst]));
    assert!((opt["total"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let grw = json_of(&lflp(&["run", &inst, "--policy", "grw"]));
    assert!((total(&grw) - 1.0).abs() < 1e-9);
}

#[test]
fn run_writes_trace_that_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example1_file(dir.path());
    let trace = dir.path().join("t.jsonl");
    let trace = trace.to_str().unwrap();
    json_of(&lflp(&["run", &inst, "--gamma", "0.5", "--eta", "2", "--trace", trace]));
    let first = fs::read_to_string(trace).unwrap();
    let line: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert!(line["kind"] == "open" || line["kind"] == "connect");
    let rep = json_of(&lflp(&["certify", &inst, "--gamma", "0.5", "--eta", "2", "--trace", trace]));
    assert_eq!(rep["pass"], true);

    // A facility that opens before its budget is paid fails the checks and exits with 1.
    let small = dir.path().join("two.json");
    let two = lflp_core::Instance::from_coords(vec![[0.0, 0.0], [1.0, 0.0]], vec![0.5, 0.5], &[(0, 1, 1.0)]).unwrap();
    write_instance(&small, &two).unwrap();
    let early = dir.path().join("early.jsonl");
    fs::write(
        &early,
        "{\"t\":0.1,\"kind\":\"open\",\"i\":0}\n\
         {\"t\":0.1,\"kind\":\"connect\",\"i\":0,\"edge\":[0,1],\"side\":\"H\"}\n\
         {\"t\":1.1,\"kind\":\"connect\",\"i\":0,\"edge\":[0,1],\"side\":\"W\"}\n",
    )
    .unwrap();
    let out = lflp(&["certify", small.to_str().unwrap(), "--gamma", "1", "--eta", "2", "--trace", early.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["pass"], false);
}

#[test]
fn two_chance_without_discount_equals_jmmsv_on_pairs_at_one_location() {
    // Edges whose home and work coincide make both policies the same single-location greedy.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("diag.json");
    let inst = lflp_core::Instance::from_coords(
        vec![[0.0, 0.0], [1.0, 0.2], [2.5, 1.0], [0.3, 2.0]],
        vec![0.7, 1.1, 0.4, 2.0],
        &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 1.0), (3, 3, 3.0)],
    )
    .unwrap();
    write_instance(&path, &inst).unwrap();
    let p = path.to_str().unwrap();
    let gr = json_of(&lflp(&["run", p, "--gamma", "0", "--eta", "1"]));
    let jm = json_of(&lflp(&["run", p, "--policy", "jmmsv"]));
    assert_eq!(gr["cost"]["solution"], jm["cost"]["solution"]);
    assert!((total(&gr) - total(&jm)).abs() < 1e-9);
}

#[test]
fn gen_is_seeded() {
    let a = lflp(&["gen", "--n", "6", "--seed", "3"]);
    let b = lflp(&["gen", "--n", "6", "--seed", "3"]);
    let c = lflp(&["gen", "--n", "6", "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let inst = lflp::io::instance_from_json(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!(inst.n(), 6);
}

#[test]
fn gen_from_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("c.csv"), "id,x,y\nA,0,0\nB,3,4\n").unwrap();
    fs::write(d.join("od.csv"), "home_id,work_id,count\nA,B,5\n").unwrap();
    fs::write(d.join("op.csv"), "id,cost\nA,2\nB,4\n").unwrap();
    let out = d.join("inst.json");
    let s = |p: &str| d.join(p).display().to_string();
    let res = lflp(&[
        "gen", "--centroids", &s("c.csv"), "--od", &s("od.csv"), "--opening", &s("op.csv"), "--fbar", "1",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let inst = lflp::io::read_instance(&out).unwrap();
    assert_eq!(inst.opening(), &[2.0, 4.0]);

    fs::write(d.join("od.csv"), "home_id,work_id,count\nA,Q,5\n").unwrap();
    let bad = lflp(&["gen", "--centroids", &s("c.csv"), "--od", &s("od.csv"), "--opening", &s("op.csv")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown id \"Q\""));
}

#[test]
fn frp_export_names_file_after_program() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = lflp(&["frp", "export", "sfrp", "--n", "25", "--gamma", "1", "--eta", "2", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("SFRP_25_1_2.lp");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("Subject To"));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), path.display().to_string());
}

#[test]
fn frp_check_and_batch_report_violations() {
    let dir = tempfile::tempdir().unwrap();
    let n = 1.0 / 31.0;
    let point = serde_json::json!({
        "program": {"kind": "WFRP", "chi": [1.0, 2.0, 3.0, 4.0], "gamma": 1.0, "eta": 1.0},
        "solution": {"f": 3.0 * n, "alpha": [9.0 * n, 9.0 * n, 4.0 * n, 14.0 * n],
                     "d": [9.0 * n, 9.0 * n, 4.0 * n, 6.0 * n], "c": [9.0 * n, 9.0 * n, 4.0 * n, 14.0 * n], "q": []}
    });
    let path = dir.path().join("p.json");
    fs::write(&path, point.to_string()).unwrap();
    let p = path.to_str().unwrap();
    let out = lflp(&["frp", "check", p]);
    assert_eq!(out.status.code(), Some(1));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["feasible"], false);
    assert_eq!(rep["violations"][0]["family"], "FR.ii");

    let zero = serde_json::json!({
        "program": {"kind": "WFRP", "chi": [1.0, 2.0], "gamma": 1.0, "eta": 1.0},
        "solution": {"f": 1.0, "alpha": [0.0, 0.0], "d": [0.0, 0.0], "c": [0.0, 0.0], "q": []}
    });
    fs::write(&path, zero.to_string()).unwrap();
    assert_eq!(json_of(&lflp(&["frp", "check", p]))["feasible"], true);
    let batched = json_of(&lflp(&["frp", "batch", p, "--target", "2"]));
    assert_eq!(batched["program"]["kind"], "SFRP");
}

#[test]
fn frp_build_summarizes_families() {
    let v = json_of(&lflp(&["frp", "build", "sfrp-mflp", "--n", "3"]));
    assert_eq!(v["file_stem"], "SFRP_MFLP_3");
    assert!(v["constraints"].as_u64().unwrap() > 0);
    let missing = lflp(&["frp", "build", "sfrp"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn lower_bound_example1_ratio() {
    let v = json_of(&lflp(&["lower-bound", "example1", "--n0", "4", "--eps", "0.001", "--gamma", "0", "--eta", "1"]));
    let want = 1.0 + 0.5 + 1.0 / 3.0 + 0.25 - 0.004;
    assert!((v["ratio"].as_f64().unwrap() - want).abs() < 1e-6, "{v}");
}

#[test]
fn vc_on_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, "0 1\n1 2\n2 0\nw 2 5\n").unwrap();
    let v = json_of(&lflp(&["vc", g.to_str().unwrap()]));
    assert_eq!(v["is_vertex_cover"], true);
    assert_eq!(v["optimum"]["weight"].as_f64().unwrap(), 2.0);
    assert!(v["weight"].as_f64().unwrap() <= 4.0);
}

#[test]
fn bench_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = lflp(&["bench", "--seeds", "3", "--n", "8", "--workers", "1", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let mut rd = csv::Reader::from_reader(csv.as_bytes());
    let headers = rd.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap_or_else(|| panic!("column {name}"));
    let (gr, grp) = (col("gr_star"), col("grp_star"));
    let mut rows = 0;
    for rec in rd.records() {
        let rec = rec.unwrap();
        let a: f64 = rec[gr].parse().unwrap();
        let b: f64 = rec[grp].parse().unwrap();
        assert!(b <= a + 1e-9, "pruned {b} above unpruned {a}");
        rows += 1;
    }
    assert_eq!(rows, 3);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["instances"], 3);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(lflp(&["run"]).status.code(), Some(2));
    assert_eq!(lflp(&["run", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(lflp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lflp(&["--help"]).status.code(), Some(0));
}
