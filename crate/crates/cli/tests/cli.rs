use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bvpmmo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bvpmmo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn error_of(o: &Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stderr).expect("stderr is JSON");
    v["error"].clone()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const FIG1C: &str = r#"
model = "original"

[params]
epsilon = 0.1
omega = 0.1
k1 = 0.9
b0 = 0.205
b1 = 0.1

[time]
start = 0.0
end = 150.0
"#;

#[test]
fn hopf_report() {
    let v = json_stdout(&bvpmmo(&["hopf", "0.9", "0.1"]));
    assert!((v["B0"].as_f64().unwrap() - 0.20543).abs() < 5e-4);
    assert_eq!(v["criticality"], "sub");
    let v = json_stdout(&bvpmmo(&["hopf", "0.2", "0.1"]));
    assert_eq!(v["criticality"], "super");
}

#[test]
fn hopf_rejects_bad_epsilon() {
    let o = bvpmmo(&["hopf", "0.9", "-0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_of(&o)["kind"], "validation");
}

#[test]
fn folds_leave_the_domain() {
    let v = json_stdout(&bvpmmo(&["folds", "--b1", "0.01", "--mu", "0.02"]));
    assert_eq!(v["equilibria"].as_array().unwrap().len(), 0);
    assert!((v["mu"].as_f64().unwrap() - 0.02).abs() < 1e-15);
    let v = json_stdout(&bvpmmo(&["folds", "--b1", "0.1", "--mu", "-0.03"]));
    let eq = v["equilibria"].as_array().unwrap();
    assert_eq!(eq[0]["classification"], "folded-node");
    assert_eq!(eq[1]["classification"], "folded-saddle");
}

#[test]
fn canard_and_returnmap_reports() {
    let v = json_stdout(&bvpmmo(&[
        "canard",
        "--epsilon",
        "0.01",
        "--k1",
        "0.0",
        "--numeric",
    ]));
    let ratio = v["numeric"]["z_bar_numeric"].as_f64().unwrap()
        / v["numeric"]["z_bar_analytic"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.25, "{ratio}");
    let v = json_stdout(&bvpmmo(&[
        "returnmap",
        "--omega",
        "0.01",
        "--k1",
        "0.2",
        "--p0",
        "-0.05,0,0.05",
    ]));
    assert_eq!(v["returns"].as_array().unwrap().len(), 3);
    assert!((v["increment"].as_f64().unwrap() - 0.027).abs() < 1e-15);
}

#[test]
fn classify_pure_sine_is_a_small_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("# synthetic\nt,x\n");
    for i in 0..4000 {
        let t = i as f64 * 0.05;
        text.push_str(&format!("{t},{}\n", 0.3 * t.sin()));
    }
    let path = write(dir.path(), "sine.csv", &text);
    let v = json_stdout(&bvpmmo(&["classify", &path]));
    assert_eq!(v["signature"], "small-cycle");
    assert_eq!(v["large_count"], 0);
}

#[test]
fn classify_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.csv", "t,x\n0,1\nnope,2\n");
    let o = bvpmmo(&["classify", &path]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_versioned_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fig1c.toml", FIG1C);
    let out = dir.path().join("run");
    let o = bvpmmo(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next(), Some("# version: 1"));
    assert_eq!(lines.next(), Some("# columns: t,x,y,p,z"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 100);
    assert!(rows.iter().all(|r| r.len() == 5));
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows.last().unwrap()[0], 150.0);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));

    let events = std::fs::read_to_string(out.join("events.csv")).unwrap();
    assert!(events.lines().nth(1).unwrap() == "# columns: t,kind,direction,x,y,p,z");
    assert!(events.contains(",section-crossing,1,"));

    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    let mu = -(3f64.sqrt() * 3.0 - 2.0 * 0.9 * 3f64.sqrt() - 9.0 * 0.205) / 9.0;
    assert!((meta["mu"].as_f64().unwrap() - mu).abs() < 1e-15);
    assert_eq!(meta["truncated"], false);
    assert_eq!(meta["points"].as_u64().unwrap() as usize, rows.len());
}

#[test]
fn simulate_is_reproducible_from_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fig1c.toml", FIG1C);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (conf, out) in [(cfg.clone(), &a), (cfg.clone(), &b)] {
        assert!(bvpmmo(&[
            "simulate",
            "--config",
            &conf,
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .success());
    }
    let meta = a.join("metadata.json");
    assert!(bvpmmo(&[
        "simulate",
        "--config",
        meta.to_str().unwrap(),
        "--out",
        c.to_str().unwrap()
    ])
    .status
    .success());
    for f in ["trajectory.csv", "events.csv", "metadata.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(
            x,
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs between reruns"
        );
        assert_eq!(
            x,
            std::fs::read(c.join(f)).unwrap(),
            "{f} differs after metadata round trip"
        );
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fig1c.toml", FIG1C);
    let out = dir.path().join("run");
    let o = bvpmmo(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--b0",
        "0.25",
        "--rtol",
        "1e-7",
        "--t-start",
        "0",
        "--t-end",
        "5",
    ]);
    assert!(o.status.success());
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["params"]["b0"], 0.25);
    assert_eq!(meta["config"]["params"]["k1"], 0.9);
    assert_eq!(meta["config"]["run"]["integrator"]["rtol"], 1e-7);
    assert_eq!(meta["config"]["time"]["end"], 5.0);
}

#[test]
fn zero_length_span_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bvpmmo(&[
        "simulate",
        "--t-start",
        "3",
        "--t-end",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_of(&o);
    assert_eq!(e["kind"], "validation");
    assert_eq!(e["code"], 2);
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn unknown_config_keys_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[run]\ntransient = 3\n");
    let o = bvpmmo(&["folds", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(dir.path(), "neg.toml", "[run.integrator]\nrtol = -1.0\n");
    assert_eq!(
        bvpmmo(&["simulate", "--config", &cfg]).status.code(),
        Some(2)
    );
}

#[test]
fn integrator_failure_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "short.toml",
        &format!("{FIG1C}\n[run.integrator]\nmax_steps = 40\n"),
    );
    let out = dir.path().join("run");
    let o = bvpmmo(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_of(&o)["kind"], "numerical");
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["truncated"], true);
    assert!(meta["error"].as_str().unwrap().contains("40"));
    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let n = traj.lines().filter(|l| !l.starts_with('#')).count();
    assert!(n > 0 && n <= 41);
}

#[test]
fn json_trajectory_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = bvpmmo(&[
        "simulate",
        "--t-start",
        "0",
        "--t-end",
        "2",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("trajectory.json")).unwrap())
            .unwrap();
    assert_eq!(v["columns"], serde_json::json!(["t", "x", "y", "p", "z"]));
    assert!(v["rows"].as_array().unwrap().len() > 2);
}

#[test]
fn sweep_rows_follow_input_and_ignore_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "sweep",
        "--values",
        "0.212,0.200",
        "--transient-periods",
        "2",
        "--record-periods",
        "4",
        "--b1",
        "0.01",
    ];
    let seq = bvpmmo(&[&base[..], &["--jobs", "1"]].concat());
    let par = bvpmmo(&[&base[..], &["--jobs", "8"]].concat());
    assert!(
        seq.status.success(),
        "{}",
        String::from_utf8_lossy(&seq.stderr)
    );
    assert_eq!(seq.stdout, par.stdout);
    let text = String::from_utf8(seq.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("b0,2.1199999999999999e-1,"));
    assert!(rows[1].starts_with("b0,2.0000000000000001e-1,"));

    let out = dir.path().join("sw");
    let o = bvpmmo(
        &[
            &base[..],
            &["--format", "json", "--out", out.to_str().unwrap()],
        ]
        .concat(),
    );
    assert!(o.status.success());
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_from_config_with_range() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        "[run]\ntransient_periods = 1\nrecord_periods = 2\n[sweep]\nparameter = \"mu\"\nrange = { start = -0.03, stop = -0.02, count = 3 }\njobs = 2\n",
    );
    let o = bvpmmo(&["sweep", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("mu,")).count(), 3);
}

#[test]
fn sweep_rejects_empty_and_duplicate_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.toml", "[sweep]\nvalues = []\n");
    let o = bvpmmo(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_of(&o)["kind"], "validation");
    assert_eq!(bvpmmo(&["sweep"]).status.code(), Some(2));
    assert_eq!(
        bvpmmo(&["sweep", "--values", "0.2,0.2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bvpmmo(&["sweep", "--parameter", "nope", "--values", "0.2"])
            .status
            .code(),
        Some(2)
    );
}
