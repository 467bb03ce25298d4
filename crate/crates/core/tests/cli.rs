//! End-to-end checks of the `ugen` binary: artifact shapes, determinism,
//! exit codes, and input-file handling.

use std::path::Path;
use std::process::{Command, Output};

fn ugen(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ugen"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("ugen-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn werner_row_count_matches_steps() {
    let dir = tempdir("werner");
    let out = ugen(&["werner", "--lambda-steps", "21", "--out", "art"], &dir);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&dir, "art/werner.csv");
    assert_eq!(csv.lines().count(), 22, "21 data rows plus header");
    assert!(csv.starts_with("lambda,epsilon_min,fidelity"));
    // 12 significant digits round-trip better than 1e-11.
    let first_data = csv.lines().nth(1).unwrap();
    let eps: f64 = first_data.split(',').nth(1).unwrap().parse().unwrap();
    assert!(eps.abs() < 1e-11);
}

#[test]
fn solve_reports_the_bare_bell_cnot_pair_as_inconsistent() {
    let dir = tempdir("solve");
    std::fs::write(
        dir.join("bell_cnot.json"),
        r#"{
  "unitary": {"gate": "cnot"},
  "state": {"a": [0,0,0], "b": [0,0,0], "T": [[1,0,0],[0,-1,0],[0,0,1]]}
}"#,
    )
    .unwrap();
    let out = ugen(&["solve", "--case", "bell_cnot.json"], &dir);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let sol: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(sol["feasibility"], "inconsistent");
    // With the optimal measurement attached, the same pair becomes valid.
    std::fs::write(
        dir.join("bell_cnot_measured.json"),
        format!(
            r#"{{
  "unitary": {{"gate": "cnot"}},
  "state": {{"a": [0,0,0], "b": [0,0,0], "T": [[1,0,0],[0,-1,0],[0,0,1]]}},
  "measurement": {{"epsilon": {}, "axis": [{}, 0.0, {}]}}
}}"#,
            2.0 * 2.0f64.sqrt() / 3.0,
            1.0 / 2.0f64.sqrt(),
            -1.0 / 2.0f64.sqrt()
        ),
    )
    .unwrap();
    let out = ugen(&["solve", "--case", "bell_cnot_measured.json"], &dir);
    assert!(out.status.success());
    let sol: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(sol["feasibility"], "valid");
    assert!((sol["zeta"][0].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn sweep_is_byte_identical_across_runs_and_workers() {
    let dir = tempdir("sweep");
    for (tag, workers) in [("a", "1"), ("b", "4"), ("c", "1")] {
        let out = ugen(
            &[
                "sweep",
                "--n",
                "50",
                "--seed",
                "7",
                "--tol",
                "1e-6",
                "--workers",
                workers,
                "--out",
                tag,
            ],
            &dir,
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = read(&dir, "a/sweep.csv");
    assert_eq!(a, read(&dir, "b/sweep.csv"), "workers changed the output");
    assert_eq!(a, read(&dir, "c/sweep.csv"), "rerun changed the output");
    assert_eq!(
        read(&dir, "a/sweep_summary.json"),
        read(&dir, "b/sweep_summary.json")
    );
    assert_eq!(a.lines().count(), 51);
}

#[test]
fn sweep_csv_round_trips_through_the_json_importer() {
    let dir = tempdir("replay");
    let out = ugen(
        &[
            "sweep",
            "--n",
            "20",
            "--seed",
            "3",
            "--tol",
            "1e-6",
            "--out",
            ".",
            "--export-cases",
            "cases.json",
        ],
        &dir,
    );
    assert!(out.status.success());
    let direct = read(&dir, "sweep.csv");
    let out = ugen(
        &[
            "sweep",
            "--cases",
            "cases.json",
            "--tol",
            "1e-6",
            "--out",
            "replayed",
        ],
        &dir,
    );
    assert!(out.status.success());
    assert_eq!(direct, read(&dir, "replayed/sweep.csv"));
    // The importer does not mutate its input.
    let before = read(&dir, "cases.json");
    let _ = ugen(
        &[
            "sweep",
            "--cases",
            "cases.json",
            "--tol",
            "1e-6",
            "--out",
            "again",
        ],
        &dir,
    );
    assert_eq!(before, read(&dir, "cases.json"));
}

#[test]
fn ncp_emits_the_spectrum_table() {
    let dir = tempdir("ncp");
    let out = ugen(
        &["ncp", "--p", "0.5,1.0", "--t-steps", "10", "--out", "."],
        &dir,
    );
    assert!(out.status.success());
    let csv = read(&dir, "ncp.csv");
    assert_eq!(csv.lines().count(), 21, "header + 2 p-values × 10 t-points");
    assert!(csv.starts_with("p,t,closed_form,numeric_min_eig,mitigated_min_eig"));
    // p = 0.5 rows match the closed form to printing precision.
    for line in csv.lines().skip(1).take(10) {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((cols[2] - cols[3]).abs() < 1e-10);
        assert!(cols[4] >= -1e-12);
    }
}

#[test]
fn malformed_json_exits_2_with_line_diagnostics() {
    let dir = tempdir("badjson");
    std::fs::write(
        dir.join("broken.json"),
        "{\"unitary\": {\"gate\": \"cnot\",}",
    )
    .unwrap();
    let out = ugen(&["solve", "--case", "broken.json"], &dir);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "diagnostics missing: {err}");

    let out = ugen(&["solve", "--case", "missing.json"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn environment_variables_mirror_flags() {
    let dir = tempdir("env");
    let out = Command::new(env!("CARGO_BIN_EXE_ugen"))
        .args(["werner", "--lambda-steps", "3"])
        .env("UGEN_OUT", "from_env")
        .current_dir(&dir)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.join("from_env/werner.csv").exists());
}

#[test]
fn argument_errors_exit_2() {
    let dir = tempdir("args");
    let out = ugen(&["werner", "--lambda-steps", "not-a-number"], &dir);
    assert_eq!(out.status.code(), Some(2));
    let out = ugen(&["nonsense"], &dir);
    assert_eq!(out.status.code(), Some(2));
    let out = ugen(&["werner", "--tol", "0.5"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strict_mode_accepts_fully_resolved_sweeps() {
    // Every honestly generated case resolves, so --strict exits 0; the
    // exit-3 path is reserved for unresolved cases, which the optimizer has
    // never produced on valid inputs.
    let dir = tempdir("strict");
    let out = ugen(
        &[
            "sweep", "--n", "12", "--seed", "2", "--tol", "1e-6", "--strict", "--out", ".",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0));
    // An invalid imported state is an input error, not a strict failure.
    std::fs::write(
        dir.join("bad.json"),
        r#"[{"id":0,"alpha":{"alpha":[0.3,0.4,0.5]},
            "state":{"a":[0,0,0],"b":[0,0,0],"T":[[1,0,0],[0,1,0],[0,0,1]]},
            "baseline":{"zeta":[0,0,0],"residual":0.0,"feasibility":"valid"},
            "retained":true}]"#,
    )
    .unwrap();
    let out = ugen(
        &["sweep", "--cases", "bad.json", "--strict", "--out", "."],
        &dir,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dilate_round_trips_a_two_term_channel() {
    let dir = tempdir("dilate");
    let g: f64 = 0.3;
    std::fs::write(
        dir.join("channel.json"),
        format!(
            r#"{{"kraus": [[[1,0],[0,0],[0,0],[{},0]], [[0,0],[{},0],[0,0],[0,0]]]}}"#,
            (1.0 - g).sqrt(),
            g.sqrt()
        ),
    )
    .unwrap();
    let out = ugen(&["dilate", "--channel", "channel.json"], &dir);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let d: serde_json::Value = serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert!(d["W"].as_array().unwrap().len() == 4);
    // A three-term channel is rejected.
    std::fs::write(
        dir.join("three.json"),
        r#"{"kraus": [[[1,0],[0,0],[0,0],[0,0]], [[0,0],[0,0],[0,0],[0,0]], [[0,0],[0,0],[0,0],[1,0]]]}"#,
    )
    .unwrap();
    let out = ugen(&["dilate", "--channel", "three.json"], &dir);
    assert_eq!(out.status.code(), Some(2));
}
