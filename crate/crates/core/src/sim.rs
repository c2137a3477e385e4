//! Deterministic single-run drivers: one (algorithm, adversary, horizon,
//! seed) cell executed start to finish, producing a ledger plus per-round
//! diagnostics. The orchestration layer (CLI) fans cells out in parallel;
//! nothing here shares mutable state across runs.

use crate::adversaries::AdversarySpec;
use crate::error::Result;
use crate::game::MixedStrategy;
use crate::learners::{
    hedge_default_eta, hedge_step, BanditLearner, FullInfoLearner, LearnerParams,
};
use crate::metrics::{individual_regrets, RunLedger};
use crate::rng::{stream, StreamId};
use crate::saddle::comparator_value;

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Certificate tolerance for comparator oracles.
    pub comparator_eps: f64,
    /// Compute the running NE regret every round (one comparator solve per
    /// round; expensive, off by default).
    pub ne_regret_running: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { comparator_eps: crate::saddle::DEFAULT_EPS, ne_regret_running: false }
    }
}

/// Per-round derived quantities, in round order.
#[derive(Debug, Clone)]
pub struct PerRound {
    pub t: usize,
    pub payoff: f64,
    pub cum_payoff: f64,
    pub row_regret: f64,
    pub col_regret: f64,
    /// Empirical duality gap so far (row_regret + col_regret).
    pub gap: f64,
    pub ne_regret_running: Option<f64>,
    /// Iterate movement and its bound; absent for Hedge (no inner solver).
    pub movement_l1: Option<f64>,
    pub movement_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub ledger: RunLedger,
    pub per_round: Vec<PerRound>,
    /// Rounds whose iterate movement exceeded the stability bound (full
    /// information only; always expected to be zero).
    pub stability_violations: usize,
}

fn running_row(ledger: &RunLedger, t: usize, opts: &RunOptions) -> Result<PerRound> {
    let (row_regret, col_regret) = individual_regrets(ledger);
    let ne = if opts.ne_regret_running {
        let comparator = comparator_value(&ledger.matrix_sum()?, 0.0, opts.comparator_eps)?;
        Some((ledger.cum_payoff() - comparator).abs())
    } else {
        None
    };
    let record = ledger.records().last().expect("round just pushed");
    Ok(PerRound {
        t,
        payoff: record.payoff,
        cum_payoff: ledger.cum_payoff(),
        row_regret,
        col_regret,
        gap: row_regret + col_regret,
        ne_regret_running: ne,
        movement_l1: None,
        movement_bound: None,
    })
}

/// Full-information follow-the-leader run. The pair for round `t` is read
/// off the learner before the adversary's matrix for round `t` is shown to
/// it; the emission itself sees only history through `t - 1`.
pub fn run_full_info(
    spec: &AdversarySpec,
    params: &LearnerParams,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    spec.validate()?;
    let mut learner = FullInfoLearner::new(spec.d1, spec.d2, *params)?;
    let mut ledger = RunLedger::new(spec.d1, spec.d2, false);
    let mut per_round = Vec::with_capacity(spec.horizon);
    let mut violations = 0usize;
    for t in 1..=spec.horizon {
        let a = spec.emit(t, ledger.records())?;
        let (x, y) = learner.current_pair();
        ledger.push_full_info(t, x.clone(), y.clone(), &a)?;
        let report = learner.step(&a)?;
        if report.movement_l1 > report.movement_bound + 1e-12 {
            violations += 1;
        }
        let mut row = running_row(&ledger, t, opts)?;
        row.movement_l1 = Some(report.movement_l1);
        row.movement_bound = Some(report.movement_bound);
        per_round.push(row);
    }
    Ok(RunOutcome { ledger, per_round, stability_violations: violations })
}

/// Bandit follow-the-leader run. The learner sees only the payoff entry of
/// its sampled actions; the true matrix goes to the ledger for offline
/// accounting.
pub fn run_bandit(
    spec: &AdversarySpec,
    params: &LearnerParams,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    spec.validate()?;
    let rng = stream(spec.seed, StreamId::Learner, 0);
    let mut learner = BanditLearner::new(spec.d1, spec.d2, *params, rng)?;
    let mut ledger = RunLedger::new(spec.d1, spec.d2, true);
    let mut per_round = Vec::with_capacity(spec.horizon);
    for t in 1..=spec.horizon {
        let a = spec.emit(t, ledger.records())?;
        let (x, y) = learner.current_pair();
        let actions = learner.current_actions();
        ledger.push_bandit(t, x.clone(), y.clone(), actions, &a)?;
        let observed = a.entry(actions.0, actions.1);
        let (report, _est) = learner.step(observed)?;
        let mut row = running_row(&ledger, t, opts)?;
        row.movement_l1 = Some(report.movement_l1);
        row.movement_bound = Some(report.movement_bound);
        per_round.push(row);
    }
    Ok(RunOutcome { ledger, per_round, stability_violations: 0 })
}

/// Hedge self-play baseline: each player independently runs multiplicative
/// weights on its own payoffs (`eta` defaults to the fixed-horizon tuning).
pub fn run_hedge_selfplay(
    spec: &AdversarySpec,
    eta_override: Option<f64>,
    opts: &RunOptions,
) -> Result<RunOutcome> {
    spec.validate()?;
    let eta_row = eta_override.unwrap_or_else(|| hedge_default_eta(spec.d1, spec.horizon));
    let eta_col = eta_override.unwrap_or_else(|| hedge_default_eta(spec.d2, spec.horizon));
    let mut x = MixedStrategy::uniform(spec.d1, 0.0)?;
    let mut y = MixedStrategy::uniform(spec.d2, 0.0)?;
    let mut ledger = RunLedger::new(spec.d1, spec.d2, false);
    let mut per_round = Vec::with_capacity(spec.horizon);
    for t in 1..=spec.horizon {
        let a = spec.emit(t, ledger.records())?;
        ledger.push_full_info(t, x.clone(), y.clone(), &a)?;
        let row_losses = a.times_col(y.weights());
        let col_gains = a.times_row(x.weights());
        x = hedge_step(&x, &row_losses, eta_row, true)?;
        y = hedge_step(&y, &col_gains, eta_col, false)?;
        per_round.push(running_row(&ledger, t, opts)?);
    }
    Ok(RunOutcome { ledger, per_round, stability_violations: 0 })
}
