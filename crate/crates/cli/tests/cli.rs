//! End-to-end tests of the `ncjn` binary: determinism, exit codes, and the
//! report formats, exercised through real subprocess invocations.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ncjn(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ncjn"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawning ncjn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Drop the trailing wall-time column from every data row.
fn strip_wall(text: &str) -> String {
    text.lines()
        .map(|l| {
            if l.starts_with('#') || l.starts_with("check_id,") {
                l.to_string()
            } else {
                l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_else(|| l.to_string())
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn gen_args<'a>(seed: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        "gen", "--seed", seed, "--profile", "dyadic", "--levels", "4", "--beta", "0,0.5", "--p",
        "1,3", "--lambda-steps", "4", "--out", out,
    ]
}

#[test]
fn gen_is_byte_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    assert_eq!(ncjn(&gen_args("42", a.to_str().unwrap()), &[]).status.code(), Some(0));
    assert_eq!(ncjn(&gen_args("42", b.to_str().unwrap()), &[]).status.code(), Some(0));
    assert_eq!(ncjn(&gen_args("43", c.to_str().unwrap()), &[]).status.code(), Some(0));
    let (fa, fb, fc) = (fs::read(&a).unwrap(), fs::read(&b).unwrap(), fs::read(&c).unwrap());
    assert_eq!(fa, fb, "same seed must produce byte-identical instances");
    assert_ne!(fa, fc, "different seeds must differ");
}

#[test]
fn verify_passes_and_reports_sorted_rows() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    assert_eq!(ncjn(&gen_args("7", inst.to_str().unwrap()), &[]).status.code(), Some(0));
    let out = ncjn(&["verify", inst.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("# tol = default"));
    assert!(text.contains("check_id,seed,n,beta,p,lambda,lhs,rhs,ratio,status,wall_ms"));
    assert!(!text.contains(",fail,"), "no row may fail");
    let ids: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("check_id,") && !l.is_empty())
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert!(!ids.is_empty());
    assert!(ids.windows(2).all(|w| w[0] <= w[1]), "rows not sorted by check_id");
}

#[test]
fn verify_json_mirror_and_tol_header() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    assert_eq!(ncjn(&gen_args("9", inst.to_str().unwrap()), &[]).status.code(), Some(0));
    let out = ncjn(
        &["verify", inst.to_str().unwrap(), "--checks", "moment,atoms", "--tol", "1e-6"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("# tol = 0.000001 (override)"));

    let out = ncjn(
        &["verify", inst.to_str().unwrap(), "--checks", "moment", "--format", "json"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["records"].as_array().map(|a| !a.is_empty()).unwrap_or(false));
    assert_eq!(doc["summary"]["fail"], 0);
}

#[test]
fn zero_martingale_instance_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("zero.json");
    let zeros = vec![0.0f64; 8];
    let doc = serde_json::json!({
        "seed": 0,
        "filtration": {"kind": "dyadic", "depth": 3},
        "operator": {"diagonal": {"values": zeros}},
        "params": {
            "levels": [1, 2, 3],
            "betas": [0.0, 0.5],
            "ps": [1.0, 3.0],
            "lambda_max": 4.0,
            "lambda_steps": 3,
            "variants": ["bmo", "conditioned"],
            "proj_rule": "both"
        }
    });
    fs::write(&inst, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let out = ncjn(&["verify", inst.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(!stdout(&out).contains(",fail,"));
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(ncjn(&["verify", bad.to_str().unwrap()], &[]).status.code(), Some(2));

    // Structurally valid JSON but inconsistent content.
    let wrong = dir.path().join("wrong.json");
    fs::write(
        &wrong,
        serde_json::json!({
            "seed": 1,
            "filtration": {"kind": "dyadic", "depth": 3},
            "operator": {"diagonal": {"values": [1.0, 2.0]}},
            "params": {"levels": [1], "betas": [0.0], "ps": [2.0], "lambda_max": 2.0,
                        "lambda_steps": 2, "variants": ["bmo"], "proj_rule": "both"}
        })
        .to_string(),
    )
    .unwrap();
    assert_eq!(ncjn(&["verify", wrong.to_str().unwrap()], &[]).status.code(), Some(2));

    assert_eq!(ncjn(&["verify", "/nonexistent/inst.json"], &[]).status.code(), Some(2));
    assert_eq!(
        ncjn(&["gen", "--seed", "1", "--profile", "bogus"], &[]).status.code(),
        Some(2)
    );
}

fn sweep_config(dir: &Path) -> String {
    let cfg = dir.join("sweep.toml");
    fs::write(
        &cfg,
        "seeds = [3, 1]\nprofiles = [\"dyadic\"]\nchecks = [\"moment\", \"classical\", \"atoms\"]\n\
         levels = 4\nbetas = [0.0]\nps = [1.0, 3.0]\n",
    )
    .unwrap();
    cfg.to_str().unwrap().to_string()
}

#[test]
fn sweep_is_deterministic_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path());
    let one = ncjn(&["sweep", &cfg], &[("NCJN_THREADS", "1")]);
    let four = ncjn(&["sweep", &cfg], &[("NCJN_THREADS", "4")]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(four.status.code(), Some(0));
    assert_eq!(
        strip_wall(&stdout(&one)),
        strip_wall(&stdout(&four)),
        "sweep output depends on scheduling"
    );
    let seeds: Vec<u64> = stdout(&one)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("check_id,") && !l.is_empty())
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(seeds.windows(2).all(|w| w[0] <= w[1]), "records not ordered by seed");
    assert!(seeds.contains(&1) && seeds.contains(&3));
}

#[test]
fn sweep_empty_seed_list_yields_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "seeds = []\nprofiles = [\"dyadic\"]\n").unwrap();
    let out = ncjn(&["sweep", cfg.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let data: Vec<&str> =
        text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).collect();
    assert_eq!(data, vec!["check_id,seed,n,beta,p,lambda,lhs,rhs,ratio,status,wall_ms"]);
    assert!(text.contains("# summary: total=0"));
}

#[test]
fn invalid_sweep_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "seeds = [1]\nprofiles = [\"dyadic\"]\nunknown_key = true\n").unwrap();
    assert_eq!(ncjn(&["sweep", cfg.to_str().unwrap()], &[]).status.code(), Some(2));
    fs::write(&cfg, "seeds = [1]\nprofiles = [\"no-such-profile\"]\n").unwrap();
    assert_eq!(ncjn(&["sweep", cfg.to_str().unwrap()], &[]).status.code(), Some(2));
}

#[test]
fn report_summarizes_and_flags_failures() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let csv = dir.path().join("run.csv");
    assert_eq!(ncjn(&gen_args("5", inst.to_str().unwrap()), &[]).status.code(), Some(0));
    let out = ncjn(
        &["verify", inst.to_str().unwrap(), "--checks", "moment", "--out", csv.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));

    let rep = ncjn(&["report", csv.to_str().unwrap()], &[]);
    assert_eq!(rep.status.code(), Some(0));
    assert!(stdout(&rep).contains("fail=0"));

    // Flip one passing row to a failure; the summary must exit 1.
    let text = fs::read_to_string(&csv).unwrap().replacen(",pass,", ",fail,", 1);
    fs::write(&csv, text).unwrap();
    let rep = ncjn(&["report", csv.to_str().unwrap()], &[]);
    assert_eq!(rep.status.code(), Some(1));

    let rep = ncjn(&["report", csv.to_str().unwrap(), "--format", "json"], &[]);
    assert_eq!(rep.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&rep)).unwrap();
    assert_eq!(doc["summary"]["fail"], 1);

    let garbage = dir.path().join("garbage.csv");
    fs::write(&garbage, "this,is,not,a,report\n").unwrap();
    assert_eq!(ncjn(&["report", garbage.to_str().unwrap()], &[]).status.code(), Some(2));
}
