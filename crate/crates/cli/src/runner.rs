//! Cell execution, result assembly, replay comparison, and slope fitting.
//!
//! Cells are embarrassingly parallel: a worker pool executes them and the
//! results are sorted by cell key before writing, so `--jobs N` never changes
//! the output bytes.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use omg_core::metrics::{ne_regret_vs, slope_fit, SlopeFit};
use omg_core::sim::{run_bandit, run_full_info, run_hedge_selfplay, RunOptions, RunOutcome};

use crate::config::{Algorithm, Cell, ExperimentConfig};
use crate::output::{csv_header, csv_split, OutputRow, COLUMNS, REPLAY_SKIP_COLUMN};

pub struct RunArtifacts {
    pub rows: Vec<OutputRow>,
    pub failed_cells: Vec<String>,
    pub manifest: Value,
}

pub fn config_sha256(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Execute every cell of the config and assemble ordered output rows plus
/// the manifest.
pub fn execute(
    config: &ExperimentConfig,
    config_text: &str,
    jobs: Option<usize>,
    seed_override: Option<u64>,
) -> Result<RunArtifacts, String> {
    let cells = config.cells(seed_override)?;
    for cell in &cells {
        if cell.params.is_some_and(|p| p.floor_clamped) {
            eprintln!(
                "warning: T={} {}x{}: schedule floor exp(-eta G) exceeds min(1/d1, 1/d2); \
                 clamped to half that bound",
                cell.horizon, cell.spec.d1, cell.spec.d2
            );
        }
    }
    let opts = RunOptions {
        comparator_eps: config.solver_eps,
        ne_regret_running: config.ne_regret_running,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| format!("worker pool: {e}"))?;
    let mut results: Vec<(Vec<OutputRow>, Option<String>)> =
        pool.install(|| cells.par_iter().map(|cell| run_cell(cell, &opts)).collect());

    // Order-normalize by cell key (cells() already yields a deterministic
    // order, but parallel collection plus explicit sort keeps that contract
    // independent of the iterator plumbing).
    let mut keyed: Vec<(usize, _)> = results.drain(..).enumerate().collect();
    keyed.sort_by_key(|(i, _)| cells[*i].key());
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (i, (cell_rows, error)) in keyed {
        if let Some(e) = error {
            let k = cells[i].key();
            failed.push(format!(
                "{} {} {}x{} T={} seed={}: {e}",
                k.0, k.1, k.2, k.3, k.4, k.5
            ));
        }
        rows.extend(cell_rows);
    }

    let manifest = json!({
        "tool": "omg",
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": config_sha256(config_text),
        "algorithm": config.algorithm.name(),
        "horizons": config.horizons,
        "seeds": match seed_override {
            Some(s) => vec![s],
            None => config.seeds.clone(),
        },
        "solver_eps": config.solver_eps,
        "columns": COLUMNS,
        "cells": cells.len(),
        "failed_cells": failed,
    });
    Ok(RunArtifacts { rows, failed_cells: failed_iter(&manifest), manifest })
}

fn failed_iter(manifest: &Value) -> Vec<String> {
    manifest["failed_cells"]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_str().map(String::from)).collect())
        .unwrap_or_default()
}

fn run_cell(cell: &Cell, opts: &RunOptions) -> (Vec<OutputRow>, Option<String>) {
    let start = Instant::now();
    let outcome = match cell.algorithm {
        Algorithm::OmgRftl | Algorithm::SpRftlCustom => {
            run_full_info(&cell.spec, cell.params.as_ref().expect("learner params"), opts)
        }
        Algorithm::BanditOmgRftl => {
            run_bandit(&cell.spec, cell.params.as_ref().expect("learner params"), opts)
        }
        Algorithm::HedgeSelfplay => run_hedge_selfplay(&cell.spec, cell.hedge_eta, opts),
    };
    match outcome {
        Ok(out) => match summarize(cell, &out, opts, start) {
            Ok(rows) => {
                if out.stability_violations > 0 {
                    let msg = format!("{} stability violations", out.stability_violations);
                    (rows_with_failure(cell, &msg), Some(msg))
                } else {
                    (rows, None)
                }
            }
            Err(e) => (rows_with_failure(cell, &e), Some(e)),
        },
        Err(e) => {
            let msg = e.to_string();
            (rows_with_failure(cell, &msg), Some(msg))
        }
    }
}

fn blank_row(cell: &Cell) -> OutputRow {
    let key = cell.key();
    OutputRow {
        algorithm: key.0,
        adversary: key.1,
        d1: cell.spec.d1,
        d2: cell.spec.d2,
        horizon: cell.horizon,
        seed: cell.seed,
        t: None,
        payoff: None,
        cum_payoff: None,
        ne_regret_running: None,
        row_regret: None,
        col_regret: None,
        gap: None,
        ne_regret: None,
        ne_regret_mixed: None,
        ne_regret_restricted: None,
        wall_ns: None,
        status: None,
    }
}

fn rows_with_failure(cell: &Cell, msg: &str) -> Vec<OutputRow> {
    let mut row = blank_row(cell);
    row.status = Some(format!("failed: {msg}"));
    vec![row]
}

fn summarize(
    cell: &Cell,
    out: &RunOutcome,
    opts: &RunOptions,
    start: Instant,
) -> Result<Vec<OutputRow>, String> {
    let mut rows = Vec::with_capacity(out.per_round.len() + 1);
    for r in &out.per_round {
        let mut row = blank_row(cell);
        row.t = Some(r.t);
        row.payoff = Some(r.payoff);
        row.cum_payoff = Some(r.cum_payoff);
        row.ne_regret_running = r.ne_regret_running;
        row.row_regret = Some(r.row_regret);
        row.col_regret = Some(r.col_regret);
        row.gap = Some(r.gap);
        rows.push(row);
    }

    let eps = opts.comparator_eps;
    let full = ne_regret_vs(&out.ledger, 0.0, eps, false).map_err(|e| e.to_string())?;
    let mixed = ne_regret_vs(&out.ledger, 0.0, eps, true).map_err(|e| e.to_string())?;
    let floor = cell.params.map(|p| p.floor).unwrap_or(0.0);
    let restricted = ne_regret_vs(&out.ledger, floor, eps, false).map_err(|e| e.to_string())?;

    let mut summary = blank_row(cell);
    let last = out.per_round.last();
    summary.cum_payoff = Some(out.ledger.cum_payoff());
    summary.row_regret = last.map(|r| r.row_regret);
    summary.col_regret = last.map(|r| r.col_regret);
    summary.gap = last.map(|r| r.gap);
    summary.ne_regret = Some(full);
    summary.ne_regret_mixed = Some(mixed);
    summary.ne_regret_restricted = Some(restricted);
    summary.wall_ns = Some(start.elapsed().as_nanos());
    summary.status = Some("ok".into());
    rows.push(summary);
    Ok(rows)
}

pub fn write_artifacts(out_dir: &Path, artifacts: &RunArtifacts, jsonl: bool) -> Result<(), String> {
    fs::create_dir_all(out_dir).map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    let mut csv = String::with_capacity(artifacts.rows.len() * 64);
    csv.push_str(&csv_header());
    csv.push('\n');
    for row in &artifacts.rows {
        csv.push_str(&row.csv_line());
        csv.push('\n');
    }
    fs::write(out_dir.join("results.csv"), csv).map_err(|e| e.to_string())?;
    if jsonl {
        let mut text = String::new();
        for row in &artifacts.rows {
            text.push_str(&row.json_value().to_string());
            text.push('\n');
        }
        fs::write(out_dir.join("results.jsonl"), text).map_err(|e| e.to_string())?;
    }
    let manifest =
        serde_json::to_string_pretty(&artifacts.manifest).map_err(|e| e.to_string())?;
    fs::write(out_dir.join("manifest.json"), manifest + "\n").map_err(|e| e.to_string())?;
    Ok(())
}

pub enum ReplayVerdict {
    Pass { cells: usize },
    Fail { message: String },
}

/// Re-run the config and compare against a recorded output directory.
/// Numeric columns must agree to 0 ULP; `wall_ns` is a timing measurement
/// and is skipped.
pub fn replay(config: &ExperimentConfig, config_text: &str, recorded: &Path) -> Result<ReplayVerdict, String> {
    let manifest_path = recorded.join("manifest.json");
    let manifest_text = fs::read_to_string(&manifest_path)
        .map_err(|e| format!("missing manifest {}: {e}", manifest_path.display()))?;
    let manifest: Value =
        serde_json::from_str(&manifest_text).map_err(|e| format!("manifest parse: {e}"))?;
    let recorded_hash = manifest["config_sha256"].as_str().unwrap_or_default();
    let current_hash = config_sha256(config_text);
    if recorded_hash != current_hash {
        return Err(format!(
            "config hash mismatch: recorded {recorded_hash}, current {current_hash}"
        ));
    }

    let recorded_csv = fs::read_to_string(recorded.join("results.csv"))
        .map_err(|e| format!("missing recorded results.csv: {e}"))?;
    let fresh = execute(config, config_text, None, None)?;

    let recorded_lines: Vec<&str> = recorded_csv.lines().collect();
    if recorded_lines.is_empty() || recorded_lines[0] != csv_header() {
        return Err("recorded results.csv has an unexpected header".into());
    }
    if recorded_lines.len() - 1 != fresh.rows.len() {
        return Ok(ReplayVerdict::Fail {
            message: format!(
                "row count differs: recorded {}, fresh {}",
                recorded_lines.len() - 1,
                fresh.rows.len()
            ),
        });
    }

    let float_columns: Vec<usize> = COLUMNS
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            matches!(
                **c,
                "payoff"
                    | "cum_payoff"
                    | "ne_regret_running"
                    | "row_regret"
                    | "col_regret"
                    | "gap"
                    | "ne_regret"
                    | "ne_regret_mixed"
                    | "ne_regret_restricted"
            )
        })
        .map(|(i, _)| i)
        .collect();
    let skip_idx = COLUMNS.iter().position(|c| *c == REPLAY_SKIP_COLUMN).unwrap();

    for (line_no, (rec_line, fresh_row)) in
        recorded_lines[1..].iter().zip(fresh.rows.iter()).enumerate()
    {
        let rec = csv_split(rec_line);
        let new = csv_split(&fresh_row.csv_line());
        if rec.len() != COLUMNS.len() {
            return Ok(ReplayVerdict::Fail {
                message: format!("recorded line {} has {} fields", line_no + 2, rec.len()),
            });
        }
        for col in 0..COLUMNS.len() {
            if col == skip_idx {
                continue;
            }
            let equal = if float_columns.contains(&col) {
                match (rec[col].is_empty(), new[col].is_empty()) {
                    (true, true) => true,
                    (false, false) => {
                        let a: f64 = rec[col].parse().map_err(|e| format!("parse: {e}"))?;
                        let b: f64 = new[col].parse().map_err(|e| format!("parse: {e}"))?;
                        a.to_bits() == b.to_bits()
                    }
                    _ => false,
                }
            } else {
                rec[col] == new[col]
            };
            if !equal {
                let cell = format!(
                    "algorithm={} adversary={} T={} seed={}",
                    rec[0], rec[1], rec[4], rec[5]
                );
                let round = if rec[6].is_empty() { "summary".to_string() } else { rec[6].clone() };
                return Ok(ReplayVerdict::Fail {
                    message: format!(
                        "first divergence at cell [{cell}], round {round}, column {}: \
                         recorded `{}` vs fresh `{}`",
                        COLUMNS[col], rec[col], new[col]
                    ),
                });
            }
        }
    }
    Ok(ReplayVerdict::Pass { cells: manifest["cells"].as_u64().unwrap_or(0) as usize })
}

pub struct GroupSlope {
    pub algorithm: String,
    pub adversary: String,
    pub d1: String,
    pub d2: String,
    pub fit: SlopeFit,
    pub points: usize,
}

/// Fit ln(ne_regret) against ln(T) from a results CSV: summary rows are
/// grouped by (algorithm, adversary, d1, d2) and seed-averaged per horizon.
pub fn slope_from_csv(csv_text: &str) -> Result<Vec<GroupSlope>, String> {
    let mut lines = csv_text.lines();
    let header = lines.next().ok_or("empty CSV")?;
    if header != csv_header() {
        return Err("unexpected CSV header (expected omg run output)".into());
    }
    let t_idx = 6;
    let ne_idx = COLUMNS.iter().position(|c| *c == "ne_regret").unwrap();
    let status_idx = COLUMNS.iter().position(|c| *c == "status").unwrap();

    use std::collections::BTreeMap;
    type GroupKey = (String, String, String, String);
    let mut groups: BTreeMap<GroupKey, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for line in lines {
        let f = csv_split(line);
        if f.len() != COLUMNS.len() || !f[t_idx].is_empty() {
            continue; // per-round row
        }
        if f[status_idx] != "ok" || f[ne_idx].is_empty() {
            continue;
        }
        let horizon: u64 = f[4].parse().map_err(|e| format!("bad T field: {e}"))?;
        let ne: f64 = f[ne_idx].parse().map_err(|e| format!("bad ne_regret field: {e}"))?;
        groups
            .entry((f[0].clone(), f[1].clone(), f[2].clone(), f[3].clone()))
            .or_default()
            .entry(horizon)
            .or_default()
            .push(ne);
    }
    if groups.is_empty() {
        return Err("no summary rows found in the CSV".into());
    }
    let mut out = Vec::new();
    for ((algorithm, adversary, d1, d2), by_t) in groups {
        let points: Vec<(f64, f64)> = by_t
            .iter()
            .map(|(t, vals)| (*t as f64, vals.iter().sum::<f64>() / vals.len() as f64))
            .collect();
        let fit = slope_fit(&points).map_err(|e| {
            format!("group {algorithm}/{adversary}: {e} (need >= 4 distinct horizons)")
        })?;
        out.push(GroupSlope { algorithm, adversary, d1, d2, fit, points: points.len() });
    }
    Ok(out)
}
