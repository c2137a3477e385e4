//! Payoff-matrix sequence generators.
//!
//! Emission at round `t` is a pure function of `(spec, t)` and the recorded
//! history through round `t - 1`; the signature makes it impossible for an
//! adversary to react to the strategies committed for round `t` itself.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::game::{PayoffMatrix, RoundRecord};
use crate::rng::{stream, StreamId};

/// The matching-pennies matrix `[[1, -1], [-1, 1]]`.
pub fn matching_pennies() -> PayoffMatrix {
    PayoffMatrix::from_rows(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).expect("static matrix")
}

/// The player-1-indifferent matrix `[[1, -1], [1, -1]]` (both rows equal, so
/// the row player cannot influence the payoff).
pub fn indifference_game() -> PayoffMatrix {
    PayoffMatrix::from_rows(vec![vec![1.0, -1.0], vec![1.0, -1.0]]).expect("static matrix")
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum AdversaryKind {
    /// The configured matrix every round.
    Fixed(Vec<Vec<f64>>),
    /// Matching pennies for the first half, the zero matrix after.
    Theorem1Scenario1,
    /// Matching pennies for the first half, the indifference game after.
    Theorem1Scenario2,
    /// I.i.d. entries uniform in `[-c, c]` from the run's stream.
    RandomBounded,
    /// Picks the matrix in `{+MP, -MP}` maximizing the row player's expected
    /// loss against the previous round's strategies.
    AdaptiveBestResponse,
}

/// A fully materialized adversary for one run cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    pub d1: usize,
    pub d2: usize,
    /// Bound on emitted entry magnitudes.
    pub bound: f64,
    pub horizon: usize,
    pub seed: u64,
}

impl AdversarySpec {
    pub fn validate(&self) -> Result<()> {
        if self.d1 < 2 || self.d2 < 2 {
            return Err(CoreError::Config(format!(
                "adversary needs d1, d2 >= 2, got {}x{}",
                self.d1, self.d2
            )));
        }
        if self.bound <= 0.0 || !self.bound.is_finite() {
            return Err(CoreError::Config(format!(
                "adversary bound must be positive, got {}",
                self.bound
            )));
        }
        if self.horizon == 0 {
            return Err(CoreError::Config("horizon must be >= 1".into()));
        }
        match &self.kind {
            AdversaryKind::Theorem1Scenario1 | AdversaryKind::Theorem1Scenario2 => {
                if !self.horizon.is_multiple_of(2) {
                    return Err(CoreError::Config(format!(
                        "two-scenario adversaries need an even horizon, got {}",
                        self.horizon
                    )));
                }
                if self.d1 != 2 || self.d2 != 2 {
                    return Err(CoreError::Config(
                        "two-scenario adversaries are 2x2 games".into(),
                    ));
                }
                if self.bound < 1.0 {
                    return Err(CoreError::Config(
                        "two-scenario adversaries emit entries of magnitude 1; bound must be >= 1"
                            .into(),
                    ));
                }
            }
            AdversaryKind::AdaptiveBestResponse => {
                if self.d1 != 2 || self.d2 != 2 {
                    return Err(CoreError::Config("the adaptive adversary is a 2x2 game".into()));
                }
                if self.bound < 1.0 {
                    return Err(CoreError::Config(
                        "the adaptive adversary emits entries of magnitude 1; bound must be >= 1"
                            .into(),
                    ));
                }
            }
            AdversaryKind::Fixed(rows) => {
                let m = PayoffMatrix::from_rows(rows.clone())?;
                if m.rows() != self.d1 || m.cols() != self.d2 {
                    return Err(CoreError::Config(format!(
                        "fixed matrix is {}x{} but the adversary declares {}x{}",
                        m.rows(),
                        m.cols(),
                        self.d1,
                        self.d2
                    )));
                }
                if m.max_abs() > self.bound {
                    return Err(CoreError::Config(
                        "fixed matrix entries exceed the declared bound".into(),
                    ));
                }
            }
            AdversaryKind::RandomBounded => {}
        }
        Ok(())
    }

    /// Emit the matrix for round `t` (1-based). Only history strictly before
    /// round `t` is visible: the slice is truncated to `t - 1` records before
    /// any kind-specific logic runs.
    pub fn emit(&self, t: usize, history: &[RoundRecord]) -> Result<PayoffMatrix> {
        if t == 0 || t > self.horizon {
            return Err(CoreError::Config(format!(
                "round {t} outside 1..={}",
                self.horizon
            )));
        }
        let visible = &history[..history.len().min(t - 1)];
        match &self.kind {
            AdversaryKind::Fixed(rows) => PayoffMatrix::from_rows(rows.clone()),
            AdversaryKind::Theorem1Scenario1 => {
                if t <= self.horizon / 2 {
                    Ok(matching_pennies())
                } else {
                    PayoffMatrix::zeros(2, 2)
                }
            }
            AdversaryKind::Theorem1Scenario2 => {
                if t <= self.horizon / 2 {
                    Ok(matching_pennies())
                } else {
                    Ok(indifference_game())
                }
            }
            AdversaryKind::RandomBounded => {
                let mut rng = stream(self.seed, StreamId::Adversary, t as u64);
                let entries: Vec<f64> = (0..self.d1 * self.d2)
                    .map(|_| rng.gen_range(-self.bound..=self.bound))
                    .collect();
                PayoffMatrix::new(self.d1, self.d2, entries, self.bound)
            }
            AdversaryKind::AdaptiveBestResponse => {
                let mp = matching_pennies();
                let Some(last) = visible.last() else {
                    return Ok(mp);
                };
                let loss: f64 = {
                    let sy = mp.times_col(last.y.weights());
                    last.x.weights().iter().zip(&sy).map(|(a, b)| a * b).sum()
                };
                // Row loss under -MP is exactly -loss; ties keep +MP.
                if loss >= -loss {
                    Ok(mp)
                } else {
                    PayoffMatrix::from_rows(vec![vec![-1.0, 1.0], vec![1.0, -1.0]])
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::MixedStrategy;

    fn spec(kind: AdversaryKind, horizon: usize) -> AdversarySpec {
        AdversarySpec { kind, d1: 2, d2: 2, bound: 1.0, horizon, seed: 9 }
    }

    #[test]
    fn scenario_matrices_follow_the_construction() {
        let s2 = spec(AdversaryKind::Theorem1Scenario2, 4);
        s2.validate().unwrap();
        assert_eq!(s2.emit(3, &[]).unwrap(), indifference_game());
        assert_eq!(s2.emit(2, &[]).unwrap(), matching_pennies());

        let s1 = spec(AdversaryKind::Theorem1Scenario1, 4);
        assert_eq!(s1.emit(4, &[]).unwrap(), PayoffMatrix::zeros(2, 2).unwrap());
        assert_eq!(s1.emit(1, &[]).unwrap(), matching_pennies());
    }

    #[test]
    fn fixed_kind_emits_the_configured_matrix() {
        let rows = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let s = spec(AdversaryKind::Fixed(rows), 7);
        s.validate().unwrap();
        for t in 1..=7 {
            assert_eq!(s.emit(t, &[]).unwrap(), matching_pennies());
        }
    }

    #[test]
    fn odd_horizon_rejected_for_scenarios() {
        let s = spec(AdversaryKind::Theorem1Scenario1, 5);
        assert!(matches!(s.validate(), Err(CoreError::Config(_))));
    }

    #[test]
    fn random_sequences_are_reproducible_and_bounded() {
        let s = AdversarySpec {
            kind: AdversaryKind::RandomBounded,
            d1: 3,
            d2: 4,
            bound: 0.7,
            horizon: 20,
            seed: 123,
        };
        s.validate().unwrap();
        for t in 1..=20 {
            let a = s.emit(t, &[]).unwrap();
            let b = s.emit(t, &[]).unwrap();
            assert_eq!(a.entries(), b.entries());
            assert!(a.max_abs() <= 0.7);
        }
        let other = AdversarySpec { seed: 124, ..s.clone() };
        assert_ne!(s.emit(1, &[]).unwrap().entries(), other.emit(1, &[]).unwrap().entries());
    }

    #[test]
    fn adaptive_adversary_targets_previous_round_only() {
        let s = spec(AdversaryKind::AdaptiveBestResponse, 10);
        s.validate().unwrap();
        let x = MixedStrategy::new(vec![0.9, 0.1], 0.0).unwrap();
        let y = MixedStrategy::new(vec![0.8, 0.2], 0.0).unwrap();
        let mp = matching_pennies();
        let r1 = RoundRecord::full_info(1, x.clone(), y.clone(), &mp).unwrap();
        // x' MP y = (0.9-0.1)(0.8-0.2) = 0.48 > 0, so +MP maximizes the row
        // player's loss.
        let a = s.emit(2, std::slice::from_ref(&r1)).unwrap();
        assert_eq!(a, mp);

        // Flip the column player: loss becomes negative, -MP is emitted.
        let y2 = MixedStrategy::new(vec![0.2, 0.8], 0.0).unwrap();
        let r1b = RoundRecord::full_info(1, x.clone(), y2, &mp).unwrap();
        let b = s.emit(2, std::slice::from_ref(&r1b)).unwrap();
        assert_eq!(b.entry(0, 0), -1.0);

        // Records at index >= t-1 are invisible: appending a wild round-2
        // record cannot change the round-2 emission.
        let wild = RoundRecord::full_info(
            2,
            MixedStrategy::new(vec![0.0, 1.0], 0.0).unwrap(),
            MixedStrategy::new(vec![1.0, 0.0], 0.0).unwrap(),
            &mp,
        )
        .unwrap();
        let a_again = s.emit(2, &[r1, wild]).unwrap();
        assert_eq!(a, a_again);
    }

    #[test]
    fn emit_rejects_out_of_range_rounds() {
        let s = spec(AdversaryKind::Theorem1Scenario1, 4);
        assert!(s.emit(0, &[]).is_err());
        assert!(s.emit(5, &[]).is_err());
    }
}
