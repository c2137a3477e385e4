//! Certified saddle-point computation for bilinear and entropy-regularized
//! bilinear games over (restricted) probability simplexes.
//!
//! [`solve`] returns a strategy pair together with a duality-gap certificate
//! computed from exact best responses, so a returned gap is a proof of
//! approximate optimality independent of the iteration path. The engine is a
//! mirror-prox (extragradient) scheme with entropy Bregman steps; every gap
//! check also tries cheap closed-form candidates (ergodic average, best
//! response pair, and an active-set equalizer refinement) which typically
//! certify bilinear games to near machine precision long before the
//! first-order iteration alone would.

use crate::error::{CoreError, Result};
use crate::game::{
    best_response_linear, linear_opt_value, MixedStrategy, PayoffMatrix, STRATEGY_TOL,
};
use crate::regularizers::{clipped_softmax, clipped_softmax_with_value, NegEntropy};

/// Default certificate tolerance for comparator oracles.
pub const DEFAULT_EPS: f64 = 1e-8;
/// Default iteration cap for the mirror-prox loop.
pub const DEFAULT_MAX_ITERATIONS: u64 = 1_000_000;

const CHECK_EVERY: u64 = 25;
/// Largest per-side dimension for which bilinear games get an exact
/// active-set enumeration pass before any first-order iteration.
const ENUMERATION_DIM: usize = 6;

/// The objective `F(x, y) = x' S y + c R_X(x) - c R_Y(y)` over
/// `Delta_{floor_x} x Delta_{floor_y}`. `c = 0` is the pure bilinear game;
/// `c > 0` makes the problem `c`-strongly convex-concave and the saddle
/// point unique.
#[derive(Debug, Clone)]
pub struct RegularizedObjective {
    s: PayoffMatrix,
    reg_scale: f64,
    floor_x: f64,
    floor_y: f64,
    reg_x: NegEntropy,
    reg_y: NegEntropy,
}

impl RegularizedObjective {
    pub fn new(s: PayoffMatrix, reg_scale: f64, floor_x: f64, floor_y: f64) -> Result<Self> {
        if !reg_scale.is_finite() || reg_scale < 0.0 {
            return Err(CoreError::Domain(format!(
                "regularization scale must be finite and >= 0, got {reg_scale}"
            )));
        }
        let (d1, d2) = (s.rows(), s.cols());
        check_floor(floor_x, d1)?;
        check_floor(floor_y, d2)?;
        Ok(Self {
            reg_x: NegEntropy::new(d1)?,
            reg_y: NegEntropy::new(d2)?,
            s,
            reg_scale,
            floor_x,
            floor_y,
        })
    }

    /// Pure bilinear game on the full simplexes.
    pub fn bilinear(s: PayoffMatrix) -> Result<Self> {
        Self::new(s, 0.0, 0.0, 0.0)
    }

    pub fn matrix(&self) -> &PayoffMatrix {
        &self.s
    }

    pub fn reg_scale(&self) -> f64 {
        self.reg_scale
    }

    pub fn floor_x(&self) -> f64 {
        self.floor_x
    }

    pub fn floor_y(&self) -> f64 {
        self.floor_y
    }

    /// `F(x, y)` at a feasible pair.
    pub fn value(&self, x: &MixedStrategy, y: &MixedStrategy) -> Result<f64> {
        self.check_pair(x, y)?;
        Ok(self.value_raw(x.weights(), y.weights()))
    }

    fn value_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        let sy = self.s.times_col(y);
        let bilinear: f64 = x.iter().zip(sy.iter()).map(|(a, b)| a * b).sum();
        if self.reg_scale == 0.0 {
            bilinear
        } else {
            bilinear
                + self.reg_scale * (self.reg_x.value_slice(x) - self.reg_y.value_slice(y))
        }
    }

    fn check_pair(&self, x: &MixedStrategy, y: &MixedStrategy) -> Result<()> {
        if x.dim() != self.s.rows() || y.dim() != self.s.cols() {
            return Err(CoreError::DimensionMismatch(format!(
                "objective is {}x{}, strategies are {} and {}",
                self.s.rows(),
                self.s.cols(),
                x.dim(),
                y.dim()
            )));
        }
        let feasible = |w: &MixedStrategy, floor: f64| {
            w.weights().iter().all(|&v| v >= floor - STRATEGY_TOL)
        };
        if !feasible(x, self.floor_x) || !feasible(y, self.floor_y) {
            return Err(CoreError::Domain(
                "strategy pair infeasible for the objective's floors".into(),
            ));
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

/// A solver result: the pair, the objective value at the pair, and the
/// certified duality gap (always computed from exact inner optima).
#[derive(Debug, Clone)]
pub struct SaddleCertificate {
    pub x: MixedStrategy,
    pub y: MixedStrategy,
    pub value: f64,
    pub gap: f64,
    pub iterations: u64,
}

/// `max_{y'} F(x, y') - min_{x'} F(x', y)`, evaluating both inner optima
/// exactly: closed-form linear best responses when `c = 0`, clipped softmax
/// when `c > 0`. Nonnegative by weak duality; clamped at 0 against round-off.
pub fn duality_gap(obj: &RegularizedObjective, x: &MixedStrategy, y: &MixedStrategy) -> Result<f64> {
    obj.check_pair(x, y)?;
    Ok(duality_gap_raw(obj, x.weights(), y.weights()))
}

fn duality_gap_raw(obj: &RegularizedObjective, x: &[f64], y: &[f64]) -> f64 {
    let col_score = obj.s.times_row(x); // S' x, the column player's payoffs
    let row_score = obj.s.times_col(y); // S y, the row player's losses
    let c = obj.reg_scale;
    let gap = if c == 0.0 {
        linear_opt_value(&col_score, obj.floor_y, true)
            - linear_opt_value(&row_score, obj.floor_x, false)
    } else {
        // clipped_softmax cannot fail here: floors were validated at
        // construction and scores are finite.
        let (_, vmax) = clipped_softmax_with_value(&col_score, c, obj.floor_y, true)
            .expect("validated objective");
        let (_, vmin) = clipped_softmax_with_value(&row_score, c, obj.floor_x, false)
            .expect("validated objective");
        (vmax + c * obj.reg_x.value_slice(x)) - (vmin - c * obj.reg_y.value_slice(y))
    };
    gap.max(0.0)
}

/// Solve to certified gap `eps` from the uniform pair.
pub fn solve(obj: &RegularizedObjective, eps: f64) -> Result<SaddleCertificate> {
    solve_with(obj, eps, None, DEFAULT_MAX_ITERATIONS)
}

/// Solve to certified gap `eps`, warm-started from a caller-supplied pair.
pub fn solve_warm(
    obj: &RegularizedObjective,
    eps: f64,
    warm: Option<(&MixedStrategy, &MixedStrategy)>,
) -> Result<SaddleCertificate> {
    solve_with(obj, eps, warm, DEFAULT_MAX_ITERATIONS)
}

/// Minimax value of the bilinear game `x' S y` over
/// `Delta_theta x Delta_theta`, certified to `eps`. `theta = 0` is the
/// equilibrium-regret comparator; `theta > 0` supports restricted-set
/// diagnostics.
pub fn comparator_value(matrix_sum: &PayoffMatrix, theta: f64, eps: f64) -> Result<f64> {
    let obj = RegularizedObjective::new(matrix_sum.clone(), 0.0, theta, theta)?;
    Ok(solve(&obj, eps)?.value)
}

struct Best {
    x: Vec<f64>,
    y: Vec<f64>,
    gap: f64,
}

pub fn solve_with(
    obj: &RegularizedObjective,
    eps: f64,
    warm: Option<(&MixedStrategy, &MixedStrategy)>,
    max_iterations: u64,
) -> Result<SaddleCertificate> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(CoreError::Domain(format!("solver eps must be positive, got {eps}")));
    }
    let d1 = obj.s.rows();
    let d2 = obj.s.cols();
    let c = obj.reg_scale;

    // Candidates are clamped onto the floored simplex before their gap is
    // evaluated, so a certificate's gap is the gap of exactly the strategies
    // it returns.
    let mut best: Option<Best> = None;
    let consider = |xw: &[f64], yw: &[f64], best: &mut Option<Best>| -> f64 {
        let xf = clamp_normalize(xw, obj.floor_x);
        let yf = clamp_normalize(yw, obj.floor_y);
        let gap = duality_gap_raw(obj, &xf, &yf);
        if best.as_ref().is_none_or(|b| gap < b.gap) {
            *best = Some(Best { x: xf, y: yf, gap });
        }
        gap
    };

    let finish = |best: Best, iterations: u64| -> Result<SaddleCertificate> {
        let x = MixedStrategy::new(best.x, obj.floor_x)?;
        let y = MixedStrategy::new(best.y, obj.floor_y)?;
        let value = obj.value(&x, &y)?;
        Ok(SaddleCertificate { x, y, value: value_or_zero(value), gap: best.gap, iterations })
    };

    // Warm start and the uniform pair are free candidates; symmetric games
    // and slowly-moving follow-the-leader objectives often certify here.
    let uniform_x = vec![1.0 / d1 as f64; d1];
    let uniform_y = vec![1.0 / d2 as f64; d2];
    if let Some((wx, wy)) = warm {
        obj.check_pair(wx, wy)?;
        if consider(wx.weights(), wy.weights(), &mut best) <= eps {
            return finish(best.unwrap(), 0);
        }
    }
    if consider(&uniform_x, &uniform_y, &mut best) <= eps {
        return finish(best.unwrap(), 0);
    }

    // Exact active-set enumeration for small bilinear games: every candidate
    // free-set pair yields an equalizer system whose solution is checked by
    // the same exact gap certificate.
    if c == 0.0 && d1 <= ENUMERATION_DIM && d2 <= ENUMERATION_DIM {
        'outer: for fx_mask in 1u32..(1 << d1) {
            let fx = mask_to_set(fx_mask, d1);
            for fy_mask in 1u32..(1 << d2) {
                let fy = mask_to_set(fy_mask, d2);
                if let Some((xw, yw)) = equalizer_candidate(obj, &fx, &fy) {
                    if consider(&xw, &yw, &mut best) <= eps {
                        break 'outer;
                    }
                }
            }
        }
        if let Some(b) = best.as_ref() {
            if b.gap <= eps {
                return finish(best.unwrap(), 0);
            }
        }
    }

    // Mirror-prox with entropy Bregman steps. The entropy terms of the
    // objective are folded into each prox step in closed form (the prox is a
    // clipped softmax either way), so the step size only needs to cover the
    // bilinear part: 1/(2 max|S|), halved when the certified gap stagnates.
    let max_abs = obj.s.max_abs();
    let mut tau = 0.5 / max_abs.max(1e-12);

    let interior_floor_x = obj.floor_x.max(1e-300);
    let interior_floor_y = obj.floor_y.max(1e-300);
    let mut cur_x = best
        .as_ref()
        .map(|b| interiorize(&b.x, interior_floor_x))
        .unwrap_or_else(|| uniform_x.clone());
    let mut cur_y = best
        .as_ref()
        .map(|b| interiorize(&b.y, interior_floor_y))
        .unwrap_or_else(|| uniform_y.clone());

    let mut avg_x = vec![0.0; d1];
    let mut avg_y = vec![0.0; d2];
    let mut avg_n = 0usize;
    let mut stagnant_checks = 0u32;
    let mut gap_at_last_check = f64::INFINITY;

    // Composite mirror step from base point `w` along the bilinear gradient
    // `g`: argmin_z tau (<g, z> +/- c R(z)) + KL(z, w) over the floored
    // simplex, which is the clipped softmax of `+/- tau g - (1 + ln w)` at
    // entropy scale `1 + tau c`.
    let mirror = |w: &[f64], g: &[f64], tau: f64, floor: f64, maximize: bool| -> Vec<f64> {
        let sign = if maximize { -1.0 } else { 1.0 };
        let score: Vec<f64> = w
            .iter()
            .zip(g)
            .map(|(&wi, &gi)| sign * tau * gi - (1.0 + wi.max(1e-300).ln()))
            .collect();
        clipped_softmax(&score, 1.0 + tau * c, floor, false)
            .expect("mirror step is always feasible")
            .weights()
            .to_vec()
    };

    let mut iterations = 0u64;
    while iterations < max_iterations {
        iterations += 1;

        let gx = obj.s.times_col(&cur_y);
        let gy = obj.s.times_row(&cur_x);
        let half_x = mirror(&cur_x, &gx, tau, obj.floor_x, false);
        let half_y = mirror(&cur_y, &gy, tau, obj.floor_y, true);
        let gxh = obj.s.times_col(&half_y);
        let gyh = obj.s.times_row(&half_x);
        cur_x = mirror(&cur_x, &gxh, tau, obj.floor_x, false);
        cur_y = mirror(&cur_y, &gyh, tau, obj.floor_y, true);

        for (a, h) in avg_x.iter_mut().zip(&half_x) {
            *a += h;
        }
        for (a, h) in avg_y.iter_mut().zip(&half_y) {
            *a += h;
        }
        avg_n += 1;

        if !iterations.is_multiple_of(CHECK_EVERY) {
            continue;
        }

        let mean_x: Vec<f64> = avg_x.iter().map(|v| v / avg_n as f64).collect();
        let mean_y: Vec<f64> = avg_y.iter().map(|v| v / avg_n as f64).collect();
        consider(&mean_x, &mean_y, &mut best);
        consider(&half_x, &half_y, &mut best);
        consider(&cur_x, &cur_y, &mut best);

        // Best-response pair from the average (exact extreme point for c = 0,
        // regularized best response for c > 0).
        let br = best_response_pair(obj, &mean_x, &mean_y);
        if let Some((bx, by)) = br {
            consider(&bx, &by, &mut best);
        }

        if c == 0.0 {
            for (xw, yw) in polish_candidates(obj, &mean_x, &mean_y) {
                consider(&xw, &yw, &mut best);
            }
            let bsnap = best.as_ref().map(|b| (b.x.clone(), b.y.clone()));
            if let Some((bx, by)) = bsnap {
                for (xw, yw) in polish_candidates(obj, &bx, &by) {
                    consider(&xw, &yw, &mut best);
                }
            }
        }

        let current = best.as_ref().map(|b| b.gap).unwrap_or(f64::INFINITY);
        if current <= eps {
            return finish(best.unwrap(), iterations);
        }
        // Step-size backoff applies only to the merely convex-concave case;
        // with c > 0 the fixed step contracts linearly and halving it would
        // stall the iteration.
        if c == 0.0 {
            if current > 0.7 * gap_at_last_check {
                stagnant_checks += 1;
                if stagnant_checks >= 8 {
                    tau *= 0.5;
                    stagnant_checks = 0;
                    if let Some(b) = best.as_ref() {
                        cur_x = interiorize(&b.x, interior_floor_x);
                        cur_y = interiorize(&b.y, interior_floor_y);
                    }
                    avg_x.iter_mut().for_each(|v| *v = 0.0);
                    avg_y.iter_mut().for_each(|v| *v = 0.0);
                    avg_n = 0;
                }
            } else {
                stagnant_checks = 0;
            }
            gap_at_last_check = current;
        }
    }

    let best_gap = best.as_ref().map(|b| b.gap).unwrap_or(f64::INFINITY);
    Err(CoreError::NonConvergence { target: eps, best_gap, iterations })
}

fn value_or_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0 // normalize -0.0
    } else {
        v
    }
}

fn mask_to_set(mask: u32, d: usize) -> Vec<usize> {
    (0..d).filter(|i| mask & (1 << i) != 0).collect()
}

fn interiorize(w: &[f64], floor: f64) -> Vec<f64> {
    let mut v: Vec<f64> = w.iter().map(|&x| x.max(floor)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn clamp_normalize(w: &[f64], floor: f64) -> Vec<f64> {
    let mut v: Vec<f64> = w.iter().map(|&x| x.max(floor)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn best_response_pair(
    obj: &RegularizedObjective,
    x: &[f64],
    y: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let row_score = obj.s.times_col(y);
    let col_score = obj.s.times_row(x);
    if obj.reg_scale == 0.0 {
        let bx = best_response_linear(&row_score, obj.floor_x, false).ok()?;
        let by = best_response_linear(&col_score, obj.floor_y, true).ok()?;
        Some((bx.weights().to_vec(), by.weights().to_vec()))
    } else {
        let bx = clipped_softmax(&row_score, obj.reg_scale, obj.floor_x, false).ok()?;
        let by = clipped_softmax(&col_score, obj.reg_scale, obj.floor_y, true).ok()?;
        Some((bx.weights().to_vec(), by.weights().to_vec()))
    }
}

/// Candidate pairs from active-set identification: coordinates clearly above
/// the floor are treated as free, the rest pinned at the floor, and the free
/// coordinates are solved to equalize the opponent's payoffs (the KKT
/// stationarity conditions of the bilinear game). Tried at several activity
/// tolerances; every candidate is vetted by the exact gap certificate.
fn polish_candidates(
    obj: &RegularizedObjective,
    x: &[f64],
    y: &[f64],
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut sets: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for tol in [1e-2, 1e-4, 1e-6] {
        let fx = active_set(x, obj.floor_x, tol);
        let fy = active_set(y, obj.floor_y, tol);
        if !sets.iter().any(|(a, b)| a == &fx && b == &fy) {
            sets.push((fx, fy));
        }
    }
    sets.into_iter()
        .filter_map(|(fx, fy)| equalizer_candidate(obj, &fx, &fy))
        .collect()
}

fn active_set(w: &[f64], floor: f64, tol: f64) -> Vec<usize> {
    let top = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (top - floor).max(1e-300);
    let set: Vec<usize> = w
        .iter()
        .enumerate()
        .filter(|(_, &v)| v - floor > tol * span)
        .map(|(i, _)| i)
        .collect();
    if set.is_empty() {
        let argmax = w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        vec![argmax]
    } else {
        set
    }
}

/// Solve the free-set equalizer system for a bilinear game: pins coordinates
/// outside the free sets at the floor and chooses the free coordinates of
/// each side so the opponent is indifferent across the other side's free set.
/// Returns `None` when the linear system is unsolvable or the solution is
/// infeasible.
fn equalizer_candidate(
    obj: &RegularizedObjective,
    free_x: &[usize],
    free_y: &[usize],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let y = solve_equalizer_side(
        obj.s.cols(),
        |i, j| obj.s.entry(i, j),
        free_x,
        free_y,
        obj.floor_y,
    )?;
    let x = solve_equalizer_side(
        obj.s.rows(),
        |j, i| obj.s.entry(i, j),
        free_y,
        free_x,
        obj.floor_x,
    )?;
    Some((x, y))
}

/// Find a length-`cols` vector `w` supported on `free_w` (others pinned at
/// `floor`) with `(M w)_i` equal across `i` in `free_eq`, where `M` is read
/// through `entry(i, j)`. The unknown common value is solved jointly with `w`.
fn solve_equalizer_side(
    cols: usize,
    entry: impl Fn(usize, usize) -> f64,
    free_eq: &[usize],
    free_w: &[usize],
    floor: f64,
) -> Option<Vec<f64>> {
    let k = free_w.len();
    let pinned_mass = floor * (cols - k) as f64;
    let free_mass = 1.0 - pinned_mass;
    if free_mass < -STRATEGY_TOL {
        return None;
    }
    // Unknowns: the k free weights plus the equalized value u.
    let n = k + 1;
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(free_eq.len() + 1);
    let mut b: Vec<f64> = Vec::with_capacity(free_eq.len() + 1);
    for &i in free_eq {
        let mut row = vec![0.0; n];
        for (idx, &j) in free_w.iter().enumerate() {
            row[idx] = entry(i, j);
        }
        row[k] = -1.0;
        let pinned: f64 = (0..cols)
            .filter(|j| !free_w.contains(j))
            .map(|j| entry(i, j))
            .sum::<f64>()
            * floor;
        a.push(row);
        b.push(-pinned);
    }
    let mut sum_row = vec![0.0; n];
    sum_row[..k].fill(1.0);
    a.push(sum_row);
    b.push(free_mass);

    let sol = least_squares(&a, &b)?;
    let mut w = vec![floor; cols];
    for (idx, &j) in free_w.iter().enumerate() {
        let v = sol[idx];
        if !v.is_finite() || v < floor - 1e-9 {
            return None;
        }
        w[j] = v.max(floor);
    }
    // Re-pin the free-coordinate sum exactly after clamping.
    let free_sum: f64 = free_w.iter().map(|&j| w[j]).sum();
    if free_sum <= 0.0 || free_mass <= 0.0 {
        return (free_mass.abs() <= STRATEGY_TOL).then_some(w);
    }
    let scale = free_mass / free_sum;
    if !(0.5..=2.0).contains(&scale) {
        return None;
    }
    for &j in free_w {
        w[j] *= scale;
        if w[j] < floor - STRATEGY_TOL {
            return None;
        }
    }
    Some(w)
}

/// Least squares for a small dense system: direct elimination when square,
/// normal equations (with an escalating ridge on near-singularity) otherwise.
fn least_squares(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = a.len();
    let n = a.first()?.len();
    if m == n {
        if let Some(sol) = gaussian_solve(a.to_vec(), b.to_vec()) {
            return Some(sol);
        }
    }
    // Normal equations A'A w = A'b.
    let mut ata = vec![vec![0.0; n]; n];
    let mut atb = vec![0.0; n];
    for r in 0..m {
        for i in 0..n {
            atb[i] += a[r][i] * b[r];
            for j in 0..n {
                ata[i][j] += a[r][i] * a[r][j];
            }
        }
    }
    let scale = (0..n).map(|i| ata[i][i].abs()).fold(0.0f64, f64::max).max(1e-300);
    for ridge in [0.0, 1e-12, 1e-9, 1e-6] {
        let mut sys = ata.clone();
        for (i, row) in sys.iter_mut().enumerate() {
            row[i] += ridge * scale;
        }
        if let Some(sol) = gaussian_solve(sys, atb.clone()) {
            return Some(sol);
        }
    }
    None
}

fn gaussian_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            let (pivot_row, rest) = a.split_at_mut(col + 1);
            let target = &mut rest[row - col - 1];
            for (t, p) in target[col..n].iter_mut().zip(&pivot_row[col][col..n]) {
                *t -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut v = b[col];
        for k in col + 1..n {
            v -= a[col][k] * x[k];
        }
        x[col] = v / a[col][col];
        if !x[col].is_finite() {
            return None;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamId};
    use rand::Rng;

    fn mp() -> PayoffMatrix {
        PayoffMatrix::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    fn indifference() -> PayoffMatrix {
        PayoffMatrix::from_rows(vec![vec![1.0, -1.0], vec![1.0, -1.0]]).unwrap()
    }

    /// Brute-force minimax oracle for 2x2 games at a fixed grid resolution.
    fn grid_minimax_2x2(s: &PayoffMatrix, res: f64) -> f64 {
        let steps = (1.0 / res) as usize;
        let mut outer = f64::INFINITY;
        for ia in 0..=steps {
            let a = ia as f64 * res;
            let x = [a, 1.0 - a];
            let col = s.times_row(&x);
            let inner = col[0].max(col[1]);
            outer = outer.min(inner);
        }
        outer
    }

    fn random_matrix<R: Rng>(d1: usize, d2: usize, scale: f64, rng: &mut R) -> PayoffMatrix {
        let entries: Vec<f64> = (0..d1 * d2).map(|_| rng.gen_range(-scale..scale)).collect();
        PayoffMatrix::new(d1, d2, entries, scale).unwrap()
    }

    #[test]
    fn gap_is_zero_at_matching_pennies_saddle() {
        let obj = RegularizedObjective::bilinear(mp()).unwrap();
        let u = MixedStrategy::uniform(2, 0.0).unwrap();
        assert_eq!(duality_gap(&obj, &u, &u).unwrap(), 0.0);
    }

    #[test]
    fn gap_hand_case() {
        let obj = RegularizedObjective::bilinear(mp()).unwrap();
        let x = MixedStrategy::new(vec![1.0, 0.0], 0.0).unwrap();
        let y = MixedStrategy::uniform(2, 0.0).unwrap();
        assert!((duality_gap(&obj, &x, &y).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gap_rejects_infeasible_inputs() {
        let obj = RegularizedObjective::new(mp(), 1.0, 0.2, 0.2).unwrap();
        let x = MixedStrategy::new(vec![1.0, 0.0], 0.0).unwrap();
        let u = MixedStrategy::uniform(2, 0.2).unwrap();
        assert!(matches!(duality_gap(&obj, &x, &u), Err(CoreError::Domain(_))));
    }

    #[test]
    fn solve_matching_pennies_exactly() {
        let obj = RegularizedObjective::bilinear(mp()).unwrap();
        let cert = solve(&obj, 1e-9).unwrap();
        assert!(cert.gap <= 1e-9);
        assert!(cert.value.abs() <= 1e-9);
        // For matching pennies the gap equals |x0-x1| + |y0-y1|, so a tiny
        // gap pins both strategies to uniform.
        assert!((cert.x.weights()[0] - 0.5).abs() <= 1e-9);
        assert!((cert.y.weights()[0] - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn solve_indifference_game_value_one() {
        let obj = RegularizedObjective::bilinear(indifference()).unwrap();
        let cert = solve(&obj, 1e-9).unwrap();
        assert!(cert.gap <= 1e-9);
        assert!((cert.value - 1.0).abs() <= 1e-9);
        assert!((cert.y.weights()[0] - 1.0).abs() <= 1e-9);
        let oracle = grid_minimax_2x2(&indifference(), 1e-3);
        assert!((cert.value - oracle).abs() <= 2e-3);
    }

    #[test]
    fn solve_pure_entropy_game_stays_uniform() {
        let s = PayoffMatrix::zeros(2, 2).unwrap();
        let theta = (-2.0f64).exp();
        let obj = RegularizedObjective::new(s, 1.0, theta, theta).unwrap();
        let cert = solve(&obj, 1e-9).unwrap();
        assert_eq!(cert.x.weights(), &[0.5, 0.5]);
        assert_eq!(cert.y.weights(), &[0.5, 0.5]);
        assert_eq!(cert.value, 0.0);
        assert_eq!(cert.iterations, 0);
    }

    #[test]
    fn comparator_scenario_sums() {
        // Scenario 1: T/2 matching pennies + T/2 zero matrices.
        let t = 512.0;
        let s1 = PayoffMatrix::from_rows(vec![
            vec![t / 2.0, -t / 2.0],
            vec![-t / 2.0, t / 2.0],
        ])
        .unwrap();
        assert!(comparator_value(&s1, 0.0, 1e-8).unwrap().abs() <= 1e-8);

        // Scenario 2 at T = 4: matching pennies block plus the
        // player-1-indifferent block. The grid-search oracle and the solver
        // agree that the joint minimax value is 0 (the sum matrix has a zero
        // row player 1 can retreat to).
        let s2 = PayoffMatrix::from_rows(vec![vec![4.0, -4.0], vec![0.0, 0.0]]).unwrap();
        let oracle = grid_minimax_2x2(&s2, 1e-3);
        assert!(oracle.abs() <= 2e-3, "grid oracle found {oracle}");
        let v = comparator_value(&s2, 0.0, 1e-8).unwrap();
        assert!(v.abs() <= 1e-8, "comparator found {v}");
    }

    #[test]
    fn comparator_constant_game() {
        let s = PayoffMatrix::from_rows(vec![vec![0.3, 0.3], vec![0.3, 0.3]]).unwrap();
        let v = comparator_value(&s, 0.0, 1e-8).unwrap();
        assert!((v - 0.3).abs() <= 1e-8);
    }

    #[test]
    fn strong_convexity_makes_solution_unique_across_warm_starts() {
        let mut rng = stream(31, StreamId::Probe, 0);
        for _ in 0..10 {
            let s = random_matrix(3, 3, 2.0, &mut rng);
            let c = 0.5;
            let theta = 0.05;
            let obj = RegularizedObjective::new(s, c, theta, theta).unwrap();
            let eps = 1e-10;
            let w1 = MixedStrategy::new(vec![0.9, 0.05, 0.05], theta).unwrap();
            let w2 = MixedStrategy::new(vec![0.05, 0.05, 0.9], theta).unwrap();
            let c1 = solve_warm(&obj, eps, Some((&w1, &w1))).unwrap();
            let c2 = solve_warm(&obj, eps, Some((&w2, &w2))).unwrap();
            let bound = 10.0 * (eps / c).sqrt();
            assert!(c1.x.l1_distance(&c2.x) <= bound);
            assert!(c1.y.l1_distance(&c2.y) <= bound);
        }
    }

    #[test]
    fn restricted_comparator_close_to_full() {
        let mut rng = stream(32, StreamId::Probe, 0);
        for _ in 0..10 {
            let rounds = 10;
            let mut sum = vec![0.0; 9];
            for _ in 0..rounds {
                let m = random_matrix(3, 3, 1.0, &mut rng);
                for (acc, e) in sum.iter_mut().zip(m.entries()) {
                    *acc += e;
                }
            }
            let s = PayoffMatrix::new(3, 3, sum, rounds as f64).unwrap();
            let theta = 0.05;
            let full = comparator_value(&s, 0.0, 1e-8).unwrap();
            let restricted = comparator_value(&s, theta, 1e-8).unwrap();
            // Per-round Lipschitz constant 1, distance bound 2 theta (d-1).
            let bound = 1.0 * 2.0 * theta * 2.0 * rounds as f64;
            assert!((full - restricted).abs() <= bound + 1e-7);
        }
    }

    #[test]
    fn regularized_comparator_sandwich() {
        let mut rng = stream(33, StreamId::Probe, 0);
        for _ in 0..8 {
            let rounds = 8usize;
            let eta = 3.0;
            let mut sum = vec![0.0; 4];
            for _ in 0..rounds {
                let m = random_matrix(2, 2, 1.0, &mut rng);
                for (acc, e) in sum.iter_mut().zip(m.entries()) {
                    *acc += e;
                }
            }
            let s = PayoffMatrix::new(2, 2, sum, rounds as f64).unwrap();
            let theta = 0.1;
            let unreg = comparator_value(&s, theta, 1e-9).unwrap();
            let c = rounds as f64 / eta;
            let obj = RegularizedObjective::new(s, c, theta, theta).unwrap();
            let reg = solve(&obj, 1e-9).unwrap().value;
            let ln2 = std::f64::consts::LN_2;
            assert!(reg - unreg <= c * ln2 + 1e-7, "upper: {} vs {}", reg - unreg, c * ln2);
            assert!(reg - unreg >= -c * ln2 - 1e-7, "lower");
        }
    }

    #[test]
    fn certificates_hold_on_random_objectives() {
        let mut rng = stream(34, StreamId::Probe, 0);
        for k in 0..30 {
            let d1 = 2 + (k % 4);
            let d2 = 2 + ((k / 2) % 4);
            let s = random_matrix(d1, d2, 5.0, &mut rng);
            let c = if k % 3 == 0 { 0.0 } else { 10f64.powf(rng.gen_range(-2.0..1.0)) };
            let theta = [0.0, (-2.0f64).exp(), 1.0 / (2.0 * d1.max(d2) as f64)][k % 3];
            let obj = RegularizedObjective::new(s, c, theta, theta).unwrap();
            let cert = solve(&obj, 1e-8).unwrap();
            assert!(cert.gap <= 1e-8, "instance {k}: gap {}", cert.gap);
            let recheck = duality_gap(&obj, &cert.x, &cert.y).unwrap();
            assert!(recheck <= 1e-8, "instance {k}: recheck {recheck}");
        }
    }

    #[test]
    fn iteration_cap_reports_best_gap() {
        let mut rng = stream(35, StreamId::Probe, 0);
        // Large enough to skip enumeration, too few iterations to certify.
        let s = random_matrix(8, 8, 1.0, &mut rng);
        let obj = RegularizedObjective::bilinear(s).unwrap();
        match solve_with(&obj, 1e-13, None, 10) {
            Err(CoreError::NonConvergence { best_gap, iterations, .. }) => {
                assert!(best_gap.is_finite());
                assert_eq!(iterations, 10);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RegularizedObjective::new(mp(), -1.0, 0.0, 0.0).is_err());
        assert!(RegularizedObjective::new(mp(), 1.0, 0.7, 0.0).is_err());
        let obj = RegularizedObjective::bilinear(mp()).unwrap();
        assert!(solve(&obj, 0.0).is_err());
    }
}
