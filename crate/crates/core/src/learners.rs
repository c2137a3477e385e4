//! The online algorithms: saddle-point follow-the-regularized-leader over
//! restricted simplexes (full information), its bandit variant driven by
//! one-point matrix estimates, and a Hedge baseline.
//!
//! Both follow-the-leader learners keep a running matrix sum `S` and, after
//! absorbing round `t`, play the saddle point of
//! `x' S y + (t / eta) (R_X(x) - R_Y(y))` over the floored simplexes. The
//! pair for round `t` is always fixed before the round-`t` matrix (or its
//! sampled entry) is seen: `step` consumes the observation and returns the
//! *next* pair.

use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::game::{MixedStrategy, PayoffMatrix};
use crate::rng::sample_categorical;
use crate::saddle::{solve_warm, RegularizedObjective};

/// How the learner's `eta` and floor were derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    /// Caller supplied `eta` and the floor directly.
    Explicit,
    /// Full-information schedule: `eta = sqrt(T) / G`, floor `exp(-eta G)`,
    /// clamped to `min(1/d1, 1/d2) / 2` when the exponential is infeasible.
    Theorem3,
    /// Bandit schedule: floor `T^(-1/6)`, `eta = T^(1/6)`; the floor must be
    /// strictly feasible for both action sets.
    Theorem5,
}

/// Learner tuning: `eta`, the simplex floor (theta in full information,
/// delta under bandit feedback), and the horizon the schedule was derived
/// from.
#[derive(Debug, Clone, Copy)]
pub struct LearnerParams {
    pub eta: f64,
    pub floor: f64,
    pub horizon: usize,
    pub mode: ScheduleMode,
    /// True when the schedule's floor was clamped to stay feasible.
    pub floor_clamped: bool,
    /// Declared bound on per-round matrix entries (the l1 Lipschitz
    /// constant G of the payoff).
    pub payoff_bound: f64,
}

impl LearnerParams {
    pub fn explicit(eta: f64, floor: f64, horizon: usize, payoff_bound: f64) -> Result<Self> {
        if eta <= 0.0 || !eta.is_finite() {
            return Err(CoreError::Config(format!("eta must be positive, got {eta}")));
        }
        if !(0.0..=1.0).contains(&floor) || floor.is_nan() {
            return Err(CoreError::Config(format!("floor must lie in [0, 1], got {floor}")));
        }
        Ok(Self { eta, floor, horizon, mode: ScheduleMode::Explicit, floor_clamped: false, payoff_bound })
    }

    /// `eta = sqrt(T) / G`, `theta = exp(-eta G) = exp(-sqrt(T))`. The
    /// schedule presumes `theta <= min(1/d1, 1/d2)`; for small horizons with
    /// many actions the floor is clamped down to half that bound and the
    /// `floor_clamped` flag is set.
    pub fn theorem3(horizon: usize, payoff_bound: f64, d1: usize, d2: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(CoreError::Config("horizon must be >= 1".into()));
        }
        if payoff_bound <= 0.0 || !payoff_bound.is_finite() {
            return Err(CoreError::Config("payoff bound must be positive".into()));
        }
        let eta = (horizon as f64).sqrt() / payoff_bound;
        let cap = 1.0 / d1.max(d2) as f64;
        let mut floor = (-eta * payoff_bound).exp();
        let mut clamped = false;
        if floor == 0.0 {
            // exp underflow at extreme horizons; keep the simplex nonempty.
            floor = f64::MIN_POSITIVE;
        }
        if floor > cap {
            floor = cap / 2.0;
            clamped = true;
        }
        Ok(Self {
            eta,
            floor,
            horizon,
            mode: ScheduleMode::Theorem3,
            floor_clamped: clamped,
            payoff_bound,
        })
    }

    /// `delta = T^(-1/6)`, `eta = T^(1/6)`. Errors when the floor is not
    /// strictly below `min(1/d1, 1/d2)`.
    pub fn theorem5(horizon: usize, payoff_bound: f64, d1: usize, d2: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(CoreError::Config("horizon must be >= 1".into()));
        }
        let delta = (horizon as f64).powf(-1.0 / 6.0);
        let cap = 1.0 / d1.max(d2) as f64;
        if delta >= cap {
            return Err(CoreError::Config(format!(
                "bandit floor {delta:.4} must be below min(1/d1, 1/d2) = {cap:.4}; increase the horizon"
            )));
        }
        Ok(Self {
            eta: (horizon as f64).powf(1.0 / 6.0),
            floor: delta,
            horizon,
            mode: ScheduleMode::Theorem5,
            floor_clamped: false,
            payoff_bound,
        })
    }
}

/// Per-entry compensated accumulator for the running matrix sum.
#[derive(Debug, Clone)]
pub struct MatrixAccum {
    rows: usize,
    cols: usize,
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl MatrixAccum {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, sum: vec![0.0; rows * cols], comp: vec![0.0; rows * cols] }
    }

    pub fn add_matrix(&mut self, m: &PayoffMatrix) {
        debug_assert_eq!((m.rows(), m.cols()), (self.rows, self.cols));
        for (k, &v) in m.entries().iter().enumerate() {
            self.add_at(k, v);
        }
    }

    pub fn add_entry(&mut self, i: usize, j: usize, v: f64) {
        self.add_at(i * self.cols + j, v);
    }

    fn add_at(&mut self, k: usize, v: f64) {
        let y = v - self.comp[k];
        let t = self.sum[k] + y;
        self.comp[k] = (t - self.sum[k]) - y;
        self.sum[k] = t;
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.sum[i * self.cols + j]
    }

    /// Snapshot as a payoff matrix with the observed max-abs bound.
    pub fn snapshot(&self) -> Result<PayoffMatrix> {
        let bound = self.sum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        PayoffMatrix::new(self.rows, self.cols, self.sum.clone(), bound)
    }
}

/// What one learner step produced: the pair for the next round plus solver
/// diagnostics used by the stability instrumentation.
#[derive(Debug, Clone)]
pub struct StepReport {
    /// l1 movement of the joint iterate, `|x_t - x_{t+1}| + |y_t - y_{t+1}|`.
    pub movement_l1: f64,
    /// Movement bound for this round: the exact-arithmetic follow-the-leader
    /// bound `(4 eta / t)(G + G_R / eta)` plus the solver slack
    /// `2 sqrt(g_t eta / t) + 2 sqrt(g_{t-1} eta / (t-1))` from the measured
    /// certificate gaps (strong convexity converts a gap into a distance).
    pub movement_bound: f64,
    /// Certified gap of the solve that produced the next pair.
    pub solver_gap: f64,
    /// Gap target the solver was asked for this round.
    pub eps_used: f64,
    pub solver_iterations: u64,
}

/// Inner-solve tolerance for round `t`: `1e-6 / t^2`, floored at the f64
/// noise level of evaluating the accumulated objective (summed over any
/// horizon the series stays bounded, so regret slopes are unaffected).
fn inner_eps(t: usize, objective_scale: f64) -> f64 {
    let series = 1e-6 / (t as f64 * t as f64);
    let noise_floor = 64.0 * f64::EPSILON * objective_scale.max(1.0);
    series.max(noise_floor)
}

fn reg_lipschitz(floor: f64) -> f64 {
    if floor > 0.0 {
        floor.ln().abs().max(1.0)
    } else {
        1.0
    }
}

/// Follow-the-leader state shared by the full-information and bandit
/// learners: the accumulated matrix sum, the current pair, and the last two
/// certificate gaps (for the movement bound).
#[derive(Debug, Clone)]
struct FtlState {
    t: usize,
    accum: MatrixAccum,
    pair: (MixedStrategy, MixedStrategy),
    prev_gap: f64,
}

impl FtlState {
    fn new(d1: usize, d2: usize, floor: f64) -> Result<Self> {
        Ok(Self {
            t: 0,
            accum: MatrixAccum::zeros(d1, d2),
            pair: (MixedStrategy::uniform(d1, floor)?, MixedStrategy::uniform(d2, floor)?),
            prev_gap: 0.0,
        })
    }

    /// Absorb the round's matrix contribution (already added to `accum`) and
    /// advance the iterate by one regularized follow-the-leader solve.
    fn advance(&mut self, params: &LearnerParams) -> Result<StepReport> {
        self.t += 1;
        let t = self.t;
        let s = self.accum.snapshot()?;
        let reg_scale = t as f64 / params.eta;
        let scale = s.max_abs() + reg_scale * (1.0 + reg_lipschitz(params.floor));
        let eps = inner_eps(t, scale);
        let obj = RegularizedObjective::new(s, reg_scale, params.floor, params.floor)?;
        let cert = solve_warm(&obj, eps, Some((&self.pair.0, &self.pair.1)))
            .map_err(|e| match e {
                CoreError::NonConvergence { target, best_gap, iterations } => {
                    CoreError::NonConvergence { target, best_gap, iterations }
                }
                other => other,
            })?;

        let movement = self.pair.0.l1_distance(&cert.x) + self.pair.1.l1_distance(&cert.y);
        let g = params.payoff_bound;
        let gr = reg_lipschitz(params.floor);
        let exact_bound = (4.0 * params.eta / t as f64) * (g + gr / params.eta);
        let mut slack = 2.0 * (cert.gap.max(0.0) * params.eta / t as f64).sqrt();
        if t > 1 {
            slack += 2.0 * (self.prev_gap.max(0.0) * params.eta / (t - 1) as f64).sqrt();
        }
        let report = StepReport {
            movement_l1: movement,
            movement_bound: exact_bound + slack,
            solver_gap: cert.gap,
            eps_used: eps,
            solver_iterations: cert.iterations,
        };
        self.prev_gap = cert.gap;
        self.pair = (cert.x, cert.y);
        Ok(report)
    }
}

/// Full-information saddle-point follow-the-regularized-leader (the
/// entropy-regularized instantiation played over restricted simplexes).
#[derive(Debug, Clone)]
pub struct FullInfoLearner {
    params: LearnerParams,
    state: FtlState,
}

impl FullInfoLearner {
    pub fn new(d1: usize, d2: usize, params: LearnerParams) -> Result<Self> {
        Ok(Self { state: FtlState::new(d1, d2, params.floor)?, params })
    }

    /// The pair committed for the upcoming round.
    pub fn current_pair(&self) -> (&MixedStrategy, &MixedStrategy) {
        (&self.state.pair.0, &self.state.pair.1)
    }

    pub fn params(&self) -> &LearnerParams {
        &self.params
    }

    pub fn round(&self) -> usize {
        self.state.t
    }

    /// Observe the revealed matrix for the round just played and compute the
    /// pair for the next round.
    pub fn step(&mut self, a: &PayoffMatrix) -> Result<StepReport> {
        if a.max_abs() > self.params.payoff_bound + 1e-12 {
            return Err(CoreError::Config(format!(
                "matrix entry magnitude {} exceeds the declared bound {}",
                a.max_abs(),
                self.params.payoff_bound
            )));
        }
        self.state.accum.add_matrix(a);
        self.state.advance(&self.params)
    }
}

/// A single-entry unbiased estimate of a payoff matrix: the observed entry
/// scaled by the inverse probability of sampling it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnePointEstimate {
    pub i: usize,
    pub j: usize,
    /// `A_{ij} / (x_i y_j)`.
    pub scaled_value: f64,
    pub d1: usize,
    pub d2: usize,
}

impl OnePointEstimate {
    /// Materialize the estimate as a matrix (zero except at `(i, j)`).
    pub fn to_matrix(&self) -> Result<PayoffMatrix> {
        let mut entries = vec![0.0; self.d1 * self.d2];
        entries[self.i * self.d2 + self.j] = self.scaled_value;
        PayoffMatrix::new(self.d1, self.d2, entries, self.scaled_value.abs())
    }
}

/// Build the estimate from an already-observed entry. `x` and `y` are the
/// strategies the actions were sampled from.
pub fn estimate_from_observation(
    observed: f64,
    actions: (usize, usize),
    x: &MixedStrategy,
    y: &MixedStrategy,
) -> Result<OnePointEstimate> {
    let (i, j) = actions;
    if i >= x.dim() || j >= y.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "actions {actions:?} out of range for {}x{}",
            x.dim(),
            y.dim()
        )));
    }
    let px = x.weights()[i];
    let py = y.weights()[j];
    if px <= 0.0 || py <= 0.0 {
        return Err(CoreError::Domain(
            "one-point estimate needs strictly positive sampling probabilities".into(),
        ));
    }
    Ok(OnePointEstimate {
        i,
        j,
        scaled_value: observed / (px * py),
        d1: x.dim(),
        d2: y.dim(),
    })
}

/// Sample `i' ~ x`, `j' ~ y` independently (inverse CDF in ascending index
/// order, row index drawn first) and form the one-point estimate of `a`.
/// Its expectation over the sampling equals `a` entrywise.
pub fn one_point_estimate(
    a: &PayoffMatrix,
    x: &MixedStrategy,
    y: &MixedStrategy,
    rng: &mut ChaCha8Rng,
) -> Result<OnePointEstimate> {
    if x.dim() != a.rows() || y.dim() != a.cols() {
        return Err(CoreError::DimensionMismatch(format!(
            "estimate: matrix is {}x{}, strategies are {} and {}",
            a.rows(),
            a.cols(),
            x.dim(),
            y.dim()
        )));
    }
    let i = sample_categorical(x.weights(), rng);
    let j = sample_categorical(y.weights(), rng);
    estimate_from_observation(a.entry(i, j), (i, j), x, y)
}

/// Bandit follow-the-leader: accumulates one-point estimates instead of true
/// matrices and plays over delta-floored simplexes. Owns the action-sampling
/// stream so runs are reproducible.
#[derive(Debug, Clone)]
pub struct BanditLearner {
    params: LearnerParams,
    state: FtlState,
    actions: (usize, usize),
    rng: ChaCha8Rng,
}

impl BanditLearner {
    pub fn new(d1: usize, d2: usize, params: LearnerParams, mut rng: ChaCha8Rng) -> Result<Self> {
        if params.floor <= 0.0 {
            return Err(CoreError::Config(
                "bandit learner requires a strictly positive floor".into(),
            ));
        }
        let state = FtlState::new(d1, d2, params.floor)?;
        let i = sample_categorical(state.pair.0.weights(), &mut rng);
        let j = sample_categorical(state.pair.1.weights(), &mut rng);
        Ok(Self { params, state, actions: (i, j), rng })
    }

    pub fn current_pair(&self) -> (&MixedStrategy, &MixedStrategy) {
        (&self.state.pair.0, &self.state.pair.1)
    }

    /// The pure actions committed for the upcoming round.
    pub fn current_actions(&self) -> (usize, usize) {
        self.actions
    }

    pub fn params(&self) -> &LearnerParams {
        &self.params
    }

    /// Consume the observed payoff entry for the committed actions, fold the
    /// one-point estimate into the running sum, advance the iterate, and
    /// sample the actions for the next round from the new pair.
    pub fn step(&mut self, observed: f64) -> Result<(StepReport, OnePointEstimate)> {
        let est = estimate_from_observation(
            observed,
            self.actions,
            &self.state.pair.0,
            &self.state.pair.1,
        )?;
        self.state.accum.add_entry(est.i, est.j, est.scaled_value);
        let report = self.state.advance(&self.params)?;
        self.actions = (
            sample_categorical(self.state.pair.0.weights(), &mut self.rng),
            sample_categorical(self.state.pair.1.weights(), &mut self.rng),
        );
        Ok((report, est))
    }
}

/// One multiplicative-weights update: `w_i <- w_i exp(-eta loss_i)` when
/// minimizing (`+` when maximizing), renormalized. The largest exponent is
/// subtracted before exponentiation to avoid overflow.
pub fn hedge_step(
    weights: &MixedStrategy,
    loss: &[f64],
    eta: f64,
    minimize: bool,
) -> Result<MixedStrategy> {
    if loss.len() != weights.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "hedge: {} weights vs {} losses",
            weights.dim(),
            loss.len()
        )));
    }
    if loss.iter().any(|l| !l.is_finite()) {
        return Err(CoreError::Domain("hedge losses must be finite".into()));
    }
    if eta <= 0.0 || !eta.is_finite() {
        return Err(CoreError::Domain(format!("hedge eta must be positive, got {eta}")));
    }
    let sign = if minimize { -1.0 } else { 1.0 };
    let exponents: Vec<f64> = loss.iter().map(|&l| sign * eta * l).collect();
    let top = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = weights
        .weights()
        .iter()
        .zip(&exponents)
        .map(|(&wi, &e)| wi * (e - top).exp())
        .collect();
    let s: f64 = w.iter().sum();
    if s <= 0.0 || s.is_nan() {
        return Err(CoreError::Domain("hedge update collapsed to zero mass".into()));
    }
    w.iter_mut().for_each(|v| *v /= s);
    MixedStrategy::new(w, 0.0)
}

/// Standard fixed-horizon Hedge tuning `sqrt(8 ln d / T)`.
pub fn hedge_default_eta(d: usize, horizon: usize) -> f64 {
    (8.0 * (d as f64).ln() / horizon.max(1) as f64).sqrt()
}
