use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use snn::harness::{cmd_complete, CompleteOptions, Estimator};
use snn::io::read_masked_csv;

fn snn_bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_snn"));
    cmd.env("RUST_LOG", "off");
    cmd
}

fn run(args: &[&str]) -> Output {
    snn_bin().args(args).output().expect("spawn snn")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn read_grid(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn read_numbers(path: &Path) -> Vec<Vec<f64>> {
    read_grid(path)
        .into_iter()
        .map(|row| row.iter().map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = k;
        }
    }
    best
}

const SMALL_LIMITED: &str = r#"
experiment = "recsys_limited"
repeats = 2
master_seed = 7
[dims]
m = 30
n = 30
r = 3
m_core = 10
n_core = 10
[limited]
m_core = 10
n_core = 10
"#;

#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_LIMITED);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (out, jobs) in [(&a, "1"), (&b, "3")] {
        let o = run(&["simulate", "--config", path_str(&cfg), "--output", path_str(out), "--jobs", jobs]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for rep in ["rep_000", "rep_001"] {
        for file in ["A.csv", "Y.csv", "D.csv", "P.csv", "U.csv", "V.csv", "spec.txt"] {
            let left = fs::read(a.join(rep).join(file)).unwrap();
            let right = fs::read(b.join(rep).join(file)).unwrap();
            assert_eq!(left, right, "{rep}/{file}");
        }
    }
    // limited replications share the truth and redraw the mask
    assert_eq!(fs::read(a.join("rep_000/A.csv")).unwrap(), fs::read(a.join("rep_001/A.csv")).unwrap());
    assert_ne!(fs::read(a.join("rep_000/D.csv")).unwrap(), fs::read(a.join("rep_001/D.csv")).unwrap());
    let spec = fs::read_to_string(a.join("rep_001/spec.txt")).unwrap();
    assert!(spec.contains("replication_seed = 6"), "{spec}");
}

#[test]
fn missing_output_dir_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_LIMITED);
    let o = run(&["simulate", "--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("output_dir"));
}

#[test]
fn general_mask_follows_favorite_genre() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "g.toml",
        "experiment = \"recsys_general\"\nrepeats = 2\n[dims]\nm = 25\nn = 30\nr = 3\nm_core = 25\nn_core = 8\n",
    );
    let out = tmp.path().join("g");
    assert!(run(&["simulate", "--config", path_str(&cfg), "--output", path_str(&out)]).status.success());
    for rep in ["rep_000", "rep_001"] {
        let dir = out.join(rep);
        let (u, v) = (read_numbers(&dir.join("U.csv")), read_numbers(&dir.join("V.csv")));
        let d = read_grid(&dir.join("D.csv"));
        for (i, row) in d.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let want = j < 8 || argmax(&u[i]) == argmax(&v[j]);
                assert_eq!(cell == "1", want, "{rep} cell ({i}, {j})");
            }
        }
    }
    // the general setting redraws U only
    assert_eq!(fs::read(out.join("rep_000/V.csv")).unwrap(), fs::read(out.join("rep_001/V.csv")).unwrap());
    assert_ne!(fs::read(out.join("rep_000/U.csv")).unwrap(), fs::read(out.join("rep_001/U.csv")).unwrap());
}

/// Rank-one table `(i + 1)(j + 1)` with a scattered set of holes.
fn rank_one_csv(dir: &Path) -> PathBuf {
    let mut text = String::new();
    for i in 0..8 {
        let row: Vec<String> = (0..8)
            .map(|j| {
                if (i + 2 * j) % 7 == 3 {
                    "NA".to_string()
                } else {
                    format!("{}", (i + 1) * (j + 1))
                }
            })
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    let path = dir.join("toy.csv");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn complete_recovers_a_rank_one_table() {
    let tmp = tempfile::tempdir().unwrap();
    let input = rank_one_csv(tmp.path());
    let out = tmp.path().join("done");
    let o = run(&["complete", "--input", path_str(&input), "--output", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let done = read_numbers(&out.join("completed.csv"));
    for (i, row) in done.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let truth = ((i + 1) * (j + 1)) as f64;
            assert!((v - truth).abs() < 1e-6, "({i}, {j}): {v} vs {truth}");
        }
    }
    let status = read_grid(&out.join("status.csv"));
    assert_eq!(status.len(), 8);
    let intervals = fs::read_to_string(out.join("intervals.csv")).unwrap();
    let missing = (0..8).flat_map(|i| (0..8).map(move |j| (i, j))).filter(|(i, j)| (i + 2 * j) % 7 == 3).count();
    assert_eq!(intervals.lines().count(), missing + 1);
    assert!(intervals.starts_with("i,j,status,estimate,lo,hi,variance,k,anchor_cols,fold_sizes"));
}

#[test]
fn complete_with_knn_skips_intervals() {
    let tmp = tempfile::tempdir().unwrap();
    let input = rank_one_csv(tmp.path());
    let out = tmp.path().join("knn");
    let o = run(&["complete", "--estimator", "knn", "--input", path_str(&input), "--output", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("completed.csv").exists());
    assert!(!out.join("intervals.csv").exists());
    let observed = read_masked_csv(&input, "NA").unwrap();
    let done = read_numbers(&out.join("completed.csv"));
    for i in 0..8 {
        for j in 0..8 {
            if let Ok(v) = observed.get(i, j) {
                assert_eq!(done[i][j], v);
            }
        }
    }
}

#[test]
fn complete_matches_the_library() {
    let tmp = tempfile::tempdir().unwrap();
    let input = rank_one_csv(tmp.path());
    let (cli_out, lib_out) = (tmp.path().join("cli"), tmp.path().join("lib"));
    let o = run(&["complete", "--seed", "11", "--input", path_str(&input), "--output", path_str(&cli_out)]);
    assert!(o.status.success());
    let opts = CompleteOptions {
        seed: 11,
        ..CompleteOptions::new(&input, &lib_out, Estimator::Snn)
    };
    cmd_complete(&opts).unwrap();
    for file in ["completed.csv", "status.csv", "intervals.csv"] {
        assert_eq!(fs::read(cli_out.join(file)).unwrap(), fs::read(lib_out.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn unknown_estimator_exits_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let input = rank_one_csv(tmp.path());
    let out = tmp.path().join("x");
    let o = run(&["complete", "--estimator", "magic", "--input", path_str(&input), "--output", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("estimators"));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "complete",
        "--input",
        path_str(&tmp.path().join("absent.csv")),
        "--output",
        path_str(&tmp.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flags_exit_with_validation_code() {
    assert_eq!(run(&["simulate", "--jobs", "lots"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_config_key_names_itself() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "experiment = \"recsys_limited\"\nrepets = 3\n");
    let o = run(&["simulate", "--config", path_str(&cfg), "--output", path_str(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("repets"));
}

#[test]
fn experiment_is_deterministic_across_job_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "e.toml",
        &SMALL_LIMITED.replace("repeats = 2\n", "repeats = 2\nestimators = [\"snn\", \"knn\"]\n"),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let oa = run(&["experiment", "--config", path_str(&cfg), "--output", path_str(&a), "--jobs", "1"]);
    let ob = run(&["experiment", "--config", path_str(&cfg), "--output", path_str(&b), "--jobs", "2"]);
    assert!(oa.status.success(), "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(oa.stdout, ob.stdout);
    assert_eq!(fs::read(a.join("results.csv")).unwrap(), fs::read(b.join("results.csv")).unwrap());
    for rep in ["rep_000", "rep_001"] {
        assert_eq!(
            fs::read(a.join(rep).join("metrics.csv")).unwrap(),
            fs::read(b.join(rep).join("metrics.csv")).unwrap()
        );
    }
    let results = fs::read_to_string(a.join("results.csv")).unwrap();
    assert!(results.lines().any(|l| l.starts_with("recsys_limited,snn,")), "{results}");
    assert!(results.lines().any(|l| l.starts_with("recsys_limited,knn,")), "{results}");
}

const CONSTANT_LTI: &str = r#"
experiment = "lti_sequential"
[lti]
units = 2
interventions = 1
beta = [[1.0]]
rho_init = [[1.0]]
theta = [[1.0], [1.0]]
omega = [[1.0]]
periods = 6
control_periods = 2
"#;

#[test]
fn lti_constant_innovation_accumulates() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "l.toml", CONSTANT_LTI);
    let out = tmp.path().join("lti");
    let o = run(&["lti", "--config", path_str(&cfg), "--output", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_numbers(&out.join("M.csv"));
    assert_eq!(m.len(), 2);
    for row in &m {
        let want: Vec<f64> = (1..=6).map(f64::from).collect();
        assert_eq!(row, &want);
    }
    let delta = read_numbers(&out.join("A.csv"));
    assert!(delta.iter().flatten().all(|&v| v == 1.0));
}

#[test]
fn lti_schedule_out_of_range_names_the_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let schedule = tmp.path().join("s.csv");
    fs::write(&schedule, "1,1\n1,1\n1,2\n1,1\n1,1\n1,1\n").unwrap();
    let body = format!("{CONSTANT_LTI}schedule = \"{}\"\n", path_str(&schedule));
    let cfg = write_config(tmp.path(), "l.toml", &body);
    let o = run(&["lti", "--config", path_str(&cfg), "--output", path_str(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("t=3, n=2"), "{err}");
}

#[test]
fn lti_rejects_other_experiments() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", SMALL_LIMITED);
    let o = run(&["lti", "--config", path_str(&cfg), "--output", path_str(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment"));
}

#[test]
fn lti_evaluation_is_exact_without_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lti");
    let o = run(&["lti", "--evaluate", "--output", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = read_grid(&out.join("evaluation.csv"));
    let col = grid[0].iter().position(|h| h == "max_abs_error").unwrap();
    let snn_row = grid.iter().find(|r| r[0] == "snn").unwrap();
    let err: f64 = snn_row[col].parse().unwrap();
    assert!(err < 1e-6, "max error {err}");
}
