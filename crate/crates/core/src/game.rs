//! Domain types for matrix games: bounded payoff matrices, mixed strategies on
//! (possibly restricted) probability simplexes, per-round records, Lipschitz
//! constants of the bilinear payoff, and closed-form linear best responses.

use crate::error::{CoreError, Result};

/// Absolute tolerance on simplex invariants after any arithmetic operation.
pub const STRATEGY_TOL: f64 = 1e-12;

/// A bounded `d1 x d2` real payoff matrix. `bound` is a certified upper bound
/// on the absolute value of every entry; `x' A y` is then `bound`-Lipschitz in
/// `(x, y)` with respect to the l1 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>, // row-major
    bound: f64,
}

impl PayoffMatrix {
    /// Build a matrix from row-major entries with an explicit bound.
    ///
    /// Rejects dimensions below 2 (the one-point estimator requires
    /// `d1, d2 >= 2`), non-finite entries, and entries exceeding the bound.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>, bound: f64) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(CoreError::Config(format!(
                "payoff matrix must be at least 2x2, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(CoreError::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if !bound.is_finite() || bound < 0.0 {
            return Err(CoreError::Domain(format!("matrix bound must be finite and >= 0, got {bound}")));
        }
        for &v in &entries {
            if !v.is_finite() {
                return Err(CoreError::Domain("matrix entries must be finite".into()));
            }
            if v.abs() > bound {
                return Err(CoreError::Domain(format!(
                    "matrix entry {v} exceeds declared bound {bound}"
                )));
            }
        }
        Ok(Self { rows, cols, entries, bound })
    }

    /// Build from nested rows, deriving the bound as the max absolute entry.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(CoreError::DimensionMismatch("ragged rows".into()));
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        let bound = entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self::new(r, c, entries, bound)
    }

    /// The all-zero matrix (bound 0).
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols], 0.0)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest absolute entry actually present.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `A y`: the row player's score vector against `y`.
    pub fn times_col(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.cols);
        self.entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A' x`: the column player's score vector against `x`.
    pub fn times_row(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, &xi) in self.entries.chunks_exact(self.cols).zip(x) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += xi * a;
            }
        }
        out
    }
}

/// A probability vector over `d` actions with every weight at least `floor`.
/// `floor = 0` is the full simplex; `floor = theta > 0` is the restricted
/// simplex used by the entropy-regularized learners.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    weights: Vec<f64>,
    floor: f64,
}

impl MixedStrategy {
    /// Validate and construct. The weight sum must already be within `1e-6`
    /// of 1 (anything further off is a logic error upstream); it is then
    /// renormalized exactly and checked against the simplex invariants.
    pub fn new(weights: Vec<f64>, floor: f64) -> Result<Self> {
        let d = weights.len();
        if d < 2 {
            return Err(CoreError::Config(format!("strategy needs >= 2 actions, got {d}")));
        }
        check_floor(floor, d)?;
        let sum: f64 = weights.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > 1e-6 {
            return Err(CoreError::Domain(format!("strategy weights sum to {sum}, expected 1")));
        }
        let weights: Vec<f64> = weights.into_iter().map(|w| w / sum).collect();
        let s = Self { weights, floor };
        s.validate()?;
        Ok(s)
    }

    /// The uniform distribution on `d` actions.
    pub fn uniform(d: usize, floor: f64) -> Result<Self> {
        Self::new(vec![1.0 / d as f64; d], floor)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Reinterpret the same point with a different floor (e.g. to view a
    /// restricted-simplex point as a full-simplex one). Fails if some weight
    /// is below the new floor.
    pub fn with_floor(&self, floor: f64) -> Result<Self> {
        Self::new(self.weights.clone(), floor)
    }

    pub fn l1_distance(&self, other: &MixedStrategy) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.weights
            .iter()
            .zip(other.weights.iter())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    fn validate(&self) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > STRATEGY_TOL {
            return Err(CoreError::Domain(format!(
                "strategy sum {sum} outside 1 +/- {STRATEGY_TOL}"
            )));
        }
        for &w in &self.weights {
            if !w.is_finite() || w < self.floor - STRATEGY_TOL {
                return Err(CoreError::Domain(format!(
                    "strategy weight {w} below floor {}",
                    self.floor
                )));
            }
        }
        Ok(())
    }
}

fn check_floor(floor: f64, d: usize) -> Result<()> {
    if !floor.is_finite() || floor < 0.0 {
        return Err(CoreError::Domain(format!("floor must be finite and >= 0, got {floor}")));
    }
    if floor > 1.0 / d as f64 + STRATEGY_TOL {
        return Err(CoreError::EmptyRestrictedSimplex { theta: floor, dim: d });
    }
    Ok(())
}

/// One completed round of play: the strategies committed before the matrix
/// was revealed, the realized payoff, and (for bandit runs) the sampled
/// action pair. `matrix_id` identifies the emitted matrix (the round index).
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub t: usize,
    pub x: MixedStrategy,
    pub y: MixedStrategy,
    /// Sampled pure actions; present only in bandit runs.
    pub actions: Option<(usize, usize)>,
    /// `x' A y` in full-information runs, the observed entry in bandit runs.
    pub payoff: f64,
    pub matrix_id: u64,
}

impl RoundRecord {
    pub fn full_info(t: usize, x: MixedStrategy, y: MixedStrategy, a: &PayoffMatrix) -> Result<Self> {
        let p = payoff(a, &x, &y)?;
        Ok(Self { t, x, y, actions: None, payoff: p, matrix_id: t as u64 })
    }

    pub fn bandit(
        t: usize,
        x: MixedStrategy,
        y: MixedStrategy,
        actions: (usize, usize),
        a: &PayoffMatrix,
    ) -> Result<Self> {
        if actions.0 >= a.rows() || actions.1 >= a.cols() {
            return Err(CoreError::DimensionMismatch(format!(
                "actions {actions:?} out of range for {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        let p = a.entry(actions.0, actions.1);
        Ok(Self { t, x, y, actions: Some(actions), payoff: p, matrix_id: t as u64 })
    }
}

/// The expected payoff `x' A y`.
pub fn payoff(a: &PayoffMatrix, x: &MixedStrategy, y: &MixedStrategy) -> Result<f64> {
    if x.dim() != a.rows() || y.dim() != a.cols() {
        return Err(CoreError::DimensionMismatch(format!(
            "payoff: matrix is {}x{}, strategies are {} and {}",
            a.rows(),
            a.cols(),
            x.dim(),
            y.dim()
        )));
    }
    Ok(bilinear(a, x.weights(), y.weights()))
}

pub(crate) fn bilinear(a: &PayoffMatrix, x: &[f64], y: &[f64]) -> f64 {
    let ay = a.times_col(y);
    x.iter().zip(ay.iter()).map(|(xi, s)| xi * s).sum()
}

/// Lipschitz constant of `(x, y) -> x' A y` with respect to the l1 norm:
/// the entry bound `c`.
pub fn lipschitz_l1(a: &PayoffMatrix) -> f64 {
    a.bound()
}

/// Lipschitz constant with respect to the l2 norm: `sqrt(c) (sqrt(d1) + sqrt(d2))`.
///
/// The `sqrt(c)` factor is reproduced as stated even though it is
/// dimensionally odd for `c < 1` (scaling a matrix by `s` scales the constant
/// by `sqrt(s)`, not `s`).
pub fn lipschitz_l2(a: &PayoffMatrix) -> f64 {
    a.bound().sqrt() * ((a.rows() as f64).sqrt() + (a.cols() as f64).sqrt())
}

/// Project `z` onto the restricted simplex `{ w : sum w = 1, w_i >= theta }`
/// by the canonical rule: clip every coordinate below `theta` up to `theta`,
/// then remove the added mass from the coordinates strictly above `theta`
/// proportionally to their slack, iterating until feasible.
///
/// The output always satisfies `|| out - z ||_1 <= 2 theta (d - 1)`: the mass
/// added to clipped coordinates is at most `theta (d - 1)` (at least one
/// coordinate starts at or above the mean `1/d >= theta`), and the l1
/// distance is twice the total added mass.
pub fn project_restricted(z: &MixedStrategy, theta: f64) -> Result<MixedStrategy> {
    let d = z.dim();
    check_floor(theta, d)?;
    let mut w = z.weights().to_vec();
    for _pass in 0..d {
        let mut surplus = 0.0;
        for wi in w.iter_mut() {
            if *wi < theta {
                surplus += theta - *wi;
                *wi = theta;
            }
        }
        if surplus <= 0.0 {
            break;
        }
        let slack: f64 = w.iter().map(|&wi| (wi - theta).max(0.0)).sum();
        if slack <= 0.0 {
            // Every coordinate pinned: only possible when theta = 1/d.
            break;
        }
        let ratio = surplus / slack;
        for wi in w.iter_mut() {
            if *wi > theta {
                *wi -= (*wi - theta) * ratio.min(1.0);
            }
        }
        if w.iter().all(|&wi| wi >= theta) {
            break;
        }
    }
    // Guard against round-off just below the floor before renormalizing.
    for wi in w.iter_mut() {
        if *wi < theta {
            *wi = theta;
        }
    }
    MixedStrategy::new(w, theta)
}

/// The extreme point of the restricted simplex optimizing a linear score:
/// weight `theta` on every coordinate plus the remaining `1 - theta d` on the
/// best coordinate, ties broken by lowest index.
pub fn best_response_linear(score: &[f64], theta: f64, maximize: bool) -> Result<MixedStrategy> {
    let d = score.len();
    if d < 2 {
        return Err(CoreError::Config(format!("score needs >= 2 coordinates, got {d}")));
    }
    check_floor(theta, d)?;
    let best = select_best(score, maximize);
    let mut w = vec![theta; d];
    w[best] += 1.0 - theta * d as f64;
    MixedStrategy::new(w, theta)
}

/// Optimal value of `score . w` over the restricted simplex (the value
/// attained by [`best_response_linear`]). Exact: no iteration involved.
pub fn linear_opt_value(score: &[f64], theta: f64, maximize: bool) -> f64 {
    let best = select_best(score, maximize);
    let base: f64 = score.iter().sum::<f64>() * theta;
    base + (1.0 - theta * score.len() as f64) * score[best]
}

fn select_best(score: &[f64], maximize: bool) -> usize {
    let mut best = 0;
    for (i, &s) in score.iter().enumerate().skip(1) {
        let better = if maximize { s > score[best] } else { s < score[best] };
        if better {
            best = i;
        }
    }
    best
}
