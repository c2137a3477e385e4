//! End-to-end tests of the `omg` binary: determinism, replay, slope fitting,
//! and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use omg_cli::output::{csv_split, COLUMNS};

fn omg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omg"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = omg().args(args).output().expect("spawn omg");
    assert!(
        out.status.success(),
        "omg {:?} failed: {}\n{}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// CSV bytes with the wall_ns column blanked (the one permitted source of
/// nondeterminism).
fn normalized_csv(path: &Path) -> String {
    let wall_idx = COLUMNS.iter().position(|c| *c == "wall_ns").unwrap();
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let mut out = String::new();
    out.push_str(lines.next().unwrap());
    out.push('\n');
    for line in lines {
        let mut fields = csv_split(line);
        fields[wall_idx].clear();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

const HEDGE_CONFIG: &str = r#"
algorithm = "hedge_selfplay"
horizons = [1024]
seeds = [7]

[adversary]
kind = "theorem1_scenario2"
d1 = 2
d2 = 2
"#;

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, HEDGE_CONFIG).unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run_ok(&["run", "--config", cfg.to_str().unwrap(), "--out", out_a.to_str().unwrap()]);
    run_ok(&["run", "--config", cfg.to_str().unwrap(), "--out", out_b.to_str().unwrap()]);
    assert_eq!(
        normalized_csv(&out_a.join("results.csv")),
        normalized_csv(&out_b.join("results.csv"))
    );
}

#[test]
fn parallel_execution_matches_serial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        HEDGE_CONFIG.replace("seeds = [7]", "seeds = [1, 2, 3, 4, 5, 6]"),
    )
    .unwrap();
    let serial = dir.path().join("serial");
    let parallel = dir.path().join("parallel");
    run_ok(&[
        "run", "--config", cfg.to_str().unwrap(), "--out", serial.to_str().unwrap(), "--jobs", "1",
    ]);
    run_ok(&[
        "run", "--config", cfg.to_str().unwrap(), "--out", parallel.to_str().unwrap(), "--jobs", "4",
    ]);
    assert_eq!(
        normalized_csv(&serial.join("results.csv")),
        normalized_csv(&parallel.join("results.csv"))
    );
}

#[test]
fn sublinearity_spot_check_on_fixed_matching_pennies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        r#"
algorithm = "omg_rftl"
horizons = [256, 512]
seeds = [7]

[adversary]
kind = "fixed"
d1 = 2
d2 = 2
matrix = [[1.0, -1.0], [-1.0, 1.0]]
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    run_ok(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = fs::read_to_string(out.join("results.csv")).unwrap();
    let ne_idx = COLUMNS.iter().position(|c| *c == "ne_regret").unwrap();
    let mut by_t = std::collections::BTreeMap::new();
    for line in text.lines().skip(1) {
        let f = csv_split(line);
        if f[6].is_empty() && !f[ne_idx].is_empty() {
            by_t.insert(f[4].parse::<u64>().unwrap(), f[ne_idx].parse::<f64>().unwrap());
        }
    }
    let r256 = by_t[&256];
    let r512 = by_t[&512];
    // Golden behavior recorded on the first verified run: the learner pins
    // the equilibrium of the constant game, so both regrets are solver-eps
    // sized and doubling the horizon cannot double the regret.
    assert!(r512 <= r256 * 2.0 + 1e-12, "r256 = {r256}, r512 = {r512}");
    assert!(r256 <= 1e-8 && r512 <= 1e-8);
}

#[test]
fn replay_passes_and_detects_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, HEDGE_CONFIG).unwrap();
    let out = dir.path().join("rec");
    run_ok(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);

    let ok = omg()
        .args(["replay", "--config", cfg.to_str().unwrap(), "--recorded", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));

    // Perturb one payoff cell and expect a named divergence.
    let csv_path = out.join("results.csv");
    let text = fs::read_to_string(&csv_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let payoff_idx = COLUMNS.iter().position(|c| *c == "payoff").unwrap();
    let mut fields = csv_split(&lines[5]);
    let old: f64 = fields[payoff_idx].parse().unwrap();
    fields[payoff_idx] = format!("{}", old + 0.5);
    lines[5] = fields.join(",");
    fs::write(&csv_path, lines.join("\n") + "\n").unwrap();

    let bad = omg()
        .args(["replay", "--config", cfg.to_str().unwrap(), "--recorded", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(3));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("column payoff"), "{err}");
    assert!(err.contains("round 5"), "{err}");
    assert!(err.contains("seed=7"), "{err}");
}

#[test]
fn replay_with_different_seed_diverges_at_round_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let bandit = r#"
algorithm = "bandit_omg_rftl"
horizons = [128]
seeds = [3]

[adversary]
kind = "random_bounded"
d1 = 2
d2 = 2
"#;
    fs::write(&cfg, bandit).unwrap();
    let out = dir.path().join("rec");
    run_ok(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);

    // Recording made with another seed: divergence is reported in round 1.
    let cfg2 = dir.path().join("exp2.toml");
    fs::write(&cfg2, bandit.replace("seeds = [3]", "seeds = [4]")).unwrap();
    let out2 = dir.path().join("rec2");
    run_ok(&["run", "--config", cfg2.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    // Same config bytes must be presented, so copy the fresh manifest hash
    // by replaying config 3 against recording 4 after aligning the hash:
    // instead, rewrite recording 4's manifest hash to match config 3.
    let manifest_path = out2.join("manifest.json");
    let manifest = fs::read_to_string(&manifest_path).unwrap();
    let hash3 = omg_cli::runner::config_sha256(bandit);
    let hash4 = omg_cli::runner::config_sha256(&bandit.replace("seeds = [3]", "seeds = [4]"));
    fs::write(&manifest_path, manifest.replace(&hash4, &hash3)).unwrap();

    let bad = omg()
        .args(["replay", "--config", cfg.to_str().unwrap(), "--recorded", out2.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(3));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("round 1") || err.contains("seed"), "{err}");
}

#[test]
fn replay_requires_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, HEDGE_CONFIG).unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    let out = omg()
        .args(["replay", "--config", cfg.to_str().unwrap(), "--recorded", empty.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("manifest"));
}

#[test]
fn slope_subcommand_recovers_growth_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        HEDGE_CONFIG.replace("horizons = [1024]", "horizons = [256, 512, 1024, 2048, 4096]"),
    )
    .unwrap();
    let out = dir.path().join("out");
    run_ok(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let slope_out = run_ok(&["slope", "--in", out.join("results.csv").to_str().unwrap()]);
    let text = String::from_utf8_lossy(&slope_out.stdout);
    assert!(text.contains("algorithm=hedge_selfplay"), "{text}");
    let slope: f64 = text
        .split("slope=")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    // Hedge self-play on scenario 2 accumulates NE regret nearly linearly.
    assert!(slope > 0.9, "slope {slope}");
}

#[test]
fn failed_cells_are_marked_and_exit_is_numeric() {
    // floor = 0 passes config validation (it is legal for the
    // full-information learner) but the bandit learner rejects it at run
    // time: the cell must be marked failed, the run must finish, and the
    // exit code must be 3.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        r#"
algorithm = "bandit_omg_rftl"
horizons = [128]
seeds = [1, 2]

[adversary]
kind = "theorem1_scenario2"
d1 = 2
d2 = 2

[params]
schedule = "explicit"
eta = 2.0
floor = 0.0
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = omg()
        .args(["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let text = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let status_idx = COLUMNS.iter().position(|c| *c == "status").unwrap();
    let failed_rows = text
        .lines()
        .skip(1)
        .filter(|l| csv_split(l)[status_idx].starts_with("failed:"))
        .count();
    assert_eq!(failed_rows, 2);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["failed_cells"].as_array().unwrap().len(), 2);
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, "algorithm = \"omg_rftl\"\nbogus_key = 1\n").unwrap();
    let out = omg()
        .args(["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn jsonl_mirror_matches_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, HEDGE_CONFIG).unwrap();
    let out = dir.path().join("out");
    run_ok(&[
        "run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jsonl",
    ]);
    let csv_rows = fs::read_to_string(out.join("results.csv")).unwrap().lines().count() - 1;
    let jsonl = fs::read_to_string(out.join("results.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), csv_rows);
    let first: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(first["algorithm"], "hedge_selfplay");
    assert_eq!(first["t"], 1);
}
