//! Negative-entropy regularizers over restricted simplexes and the exact
//! optimizer of a linear-plus-entropy objective (a softmax with coordinates
//! clipped at the simplex floor).

use crate::error::{CoreError, Result};
use crate::game::{MixedStrategy, STRATEGY_TOL};

/// `R(x) = sum_i x_i ln x_i + ln d`, nonnegative on the whole simplex
/// (zero at uniform, `ln d` at a vertex).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegEntropy {
    dim: usize,
    offset: f64,
}

impl NegEntropy {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(CoreError::Config(format!("entropy regularizer needs dim >= 2, got {dim}")));
        }
        Ok(Self { dim, offset: (dim as f64).ln() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `sum x_i ln x_i + ln d`, with the `0 ln 0 = 0` convention.
    pub fn value(&self, x: &MixedStrategy) -> f64 {
        debug_assert_eq!(x.dim(), self.dim);
        self.value_slice(x.weights())
    }

    pub fn value_slice(&self, w: &[f64]) -> f64 {
        w.iter().map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 }).sum::<f64>() + self.offset
    }

    /// `grad_i = 1 + ln x_i`. Requires a strictly positive point; the
    /// learners always run with a positive floor so this never fires on
    /// algorithm paths.
    pub fn gradient(&self, x: &MixedStrategy) -> Result<Vec<f64>> {
        debug_assert_eq!(x.dim(), self.dim);
        if x.weights().iter().any(|&w| w <= 0.0) {
            return Err(CoreError::Domain(
                "entropy gradient undefined at a zero coordinate; use a positive floor".into(),
            ));
        }
        Ok(x.weights().iter().map(|&w| 1.0 + w.ln()).collect())
    }

    /// The l-infinity bound on the gradient over the theta-restricted
    /// simplex: `max(|ln theta|, 1)`.
    pub fn lipschitz_bound(&self, theta: f64) -> Result<f64> {
        if theta <= 0.0 || !theta.is_finite() {
            return Err(CoreError::Domain(format!(
                "entropy Lipschitz bound needs theta > 0, got {theta}"
            )));
        }
        if theta > 1.0 / self.dim as f64 + STRATEGY_TOL {
            return Err(CoreError::EmptyRestrictedSimplex { theta, dim: self.dim });
        }
        Ok(theta.ln().abs().max(1.0))
    }
}

/// The unique optimizer of a linear-plus-entropy objective over the
/// theta-restricted simplex:
///
/// * `maximize`: `argmax score . w - scale * R(w)`
/// * otherwise:  `argmin score . w + scale * R(w)`
///
/// The unconstrained-over-the-simplex solution is `softmax(score / scale)`;
/// when some coordinates would fall below `theta` the KKT conditions clip
/// them at `theta` and rescale the rest, which is solved exactly by a sorted
/// threshold scan on the dual multiplier (no iterative tolerance: the KKT
/// residual is at machine precision).
pub fn clipped_softmax(
    score: &[f64],
    scale: f64,
    theta: f64,
    maximize: bool,
) -> Result<MixedStrategy> {
    Ok(clipped_softmax_with_value(score, scale, theta, maximize)?.0)
}

/// As [`clipped_softmax`], also returning the attained objective value
/// (`score . w - scale R(w)` when maximizing, `score . w + scale R(w)` when
/// minimizing).
pub fn clipped_softmax_with_value(
    score: &[f64],
    scale: f64,
    theta: f64,
    maximize: bool,
) -> Result<(MixedStrategy, f64)> {
    let d = score.len();
    if d < 2 {
        return Err(CoreError::Config(format!("score needs >= 2 coordinates, got {d}")));
    }
    if scale <= 0.0 || !scale.is_finite() {
        return Err(CoreError::Domain(format!("entropy scale must be positive, got {scale}")));
    }
    if theta < 0.0 || theta > 1.0 / d as f64 + STRATEGY_TOL {
        return Err(CoreError::EmptyRestrictedSimplex { theta, dim: d });
    }
    if score.iter().any(|s| !s.is_finite()) {
        return Err(CoreError::Domain("non-finite score".into()));
    }

    // Shift so exponents are <= 0; the sign folds minimization into the
    // maximizing form.
    let sign = if maximize { 1.0 } else { -1.0 };
    let logits: Vec<f64> = score.iter().map(|&s| sign * s / scale).collect();
    let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = logits.iter().map(|&l| l - top).collect();

    // Order coordinates by logit, descending; ties by index for determinism.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        shifted[b].partial_cmp(&shifted[a]).unwrap().then(a.cmp(&b))
    });

    // Water-filling: with the k largest coordinates free, the free mass is
    // 1 - (d - k) theta and free weights are proportional to exp(shifted).
    // Take the largest k whose smallest free weight still clears theta.
    let exps: Vec<f64> = order.iter().map(|&i| shifted[i].exp()).collect();
    let mut prefix = 0.0;
    let mut prefix_sums = Vec::with_capacity(d);
    for &e in &exps {
        prefix += e;
        prefix_sums.push(prefix);
    }
    let mut chosen = 1;
    for k in (1..=d).rev() {
        let free_mass = 1.0 - theta * (d - k) as f64;
        if free_mass <= 0.0 {
            continue;
        }
        let smallest = exps[k - 1] * free_mass / prefix_sums[k - 1];
        if smallest >= theta {
            chosen = k;
            break;
        }
    }

    let free_mass = 1.0 - theta * (d - chosen) as f64;
    let mut w = vec![theta; d];
    let norm = prefix_sums[chosen - 1];
    for r in 0..chosen {
        w[order[r]] = exps[r] * free_mass / norm;
    }
    // Pin the free-coordinate sum exactly (ratios preserved, so the KKT
    // stationarity conditions still hold exactly).
    let free_sum: f64 = (0..chosen).map(|r| w[order[r]]).sum();
    if free_sum > 0.0 {
        let correction = free_mass / free_sum;
        for r in 0..chosen {
            w[order[r]] *= correction;
        }
    }

    let strategy = MixedStrategy::new(w, theta)?;
    let reg = NegEntropy::new(d)?;
    let lin: f64 = score.iter().zip(strategy.weights()).map(|(s, w)| s * w).sum();
    let value = if maximize {
        lin - scale * reg.value(&strategy)
    } else {
        lin + scale * reg.value(&strategy)
    };
    Ok((strategy, value))
}
