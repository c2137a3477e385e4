//! Experiment configuration: a strict TOML schema (unknown keys rejected)
//! expanded into independent run cells.

use serde::{Deserialize, Serialize};

use omg_core::adversaries::{AdversaryKind, AdversarySpec};
use omg_core::learners::LearnerParams;
use omg_core::{CoreError, PayoffMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    OmgRftl,
    BanditOmgRftl,
    HedgeSelfplay,
    SpRftlCustom,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::OmgRftl => "omg_rftl",
            Algorithm::BanditOmgRftl => "bandit_omg_rftl",
            Algorithm::HedgeSelfplay => "hedge_selfplay",
            Algorithm::SpRftlCustom => "sp_rftl_custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleName {
    Explicit,
    Theorem3,
    Theorem5,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    pub kind: AdversaryKindName,
    pub d1: usize,
    pub d2: usize,
    #[serde(default = "default_bound")]
    pub bound: f64,
    /// Required for `kind = "fixed"`, rejected otherwise.
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKindName {
    Fixed,
    Theorem1Scenario1,
    Theorem1Scenario2,
    RandomBounded,
    AdaptiveBestResponse,
}

impl AdversaryKindName {
    pub fn name(&self) -> &'static str {
        match self {
            AdversaryKindName::Fixed => "fixed",
            AdversaryKindName::Theorem1Scenario1 => "theorem1_scenario1",
            AdversaryKindName::Theorem1Scenario2 => "theorem1_scenario2",
            AdversaryKindName::RandomBounded => "random_bounded",
            AdversaryKindName::AdaptiveBestResponse => "adaptive_best_response",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub schedule: Option<ScheduleName>,
    pub eta: Option<f64>,
    pub floor: Option<f64>,
    pub hedge_eta: Option<f64>,
}

fn default_bound() -> f64 {
    1.0
}

fn default_eps() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_eps")]
    pub solver_eps: f64,
    #[serde(default)]
    pub ne_regret_running: bool,
    pub adversary: AdversaryConfig,
    #[serde(default)]
    pub params: ParamsConfig,
}

/// One independent run: everything needed to execute and identify it.
#[derive(Debug, Clone)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub spec: AdversarySpec,
    pub horizon: usize,
    pub seed: u64,
    /// Resolved learner parameters (absent for Hedge).
    pub params: Option<LearnerParams>,
    pub hedge_eta: Option<f64>,
}

impl Cell {
    /// Stable ordering / identification key.
    pub fn key(&self) -> (String, String, usize, usize, usize, u64) {
        (
            self.algorithm.name().to_string(),
            kind_name(&self.spec.kind).to_string(),
            self.spec.d1,
            self.spec.d2,
            self.horizon,
            self.seed,
        )
    }
}

pub fn kind_name(kind: &AdversaryKind) -> &'static str {
    match kind {
        AdversaryKind::Fixed(_) => "fixed",
        AdversaryKind::Theorem1Scenario1 => "theorem1_scenario1",
        AdversaryKind::Theorem1Scenario2 => "theorem1_scenario2",
        AdversaryKind::RandomBounded => "random_bounded",
        AdversaryKind::AdaptiveBestResponse => "adaptive_best_response",
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), String> {
        if self.horizons.is_empty() {
            return Err("config error: `horizons` must list at least one horizon".into());
        }
        if self.seeds.is_empty() {
            return Err("config error: `seeds` must list at least one seed".into());
        }
        if self.solver_eps <= 0.0 || !self.solver_eps.is_finite() {
            return Err(format!(
                "config error: `solver_eps` must be positive, got {}",
                self.solver_eps
            ));
        }
        match (self.adversary.kind, self.adversary.matrix.is_some()) {
            (AdversaryKindName::Fixed, false) => {
                return Err("config error: `adversary.matrix` is required for kind = \"fixed\"".into())
            }
            (k, true) if k != AdversaryKindName::Fixed => {
                return Err(format!(
                    "config error: `adversary.matrix` is only valid for kind = \"fixed\", not {:?}",
                    self.adversary.kind
                ))
            }
            _ => {}
        }
        let schedule = self.resolved_schedule();
        match schedule {
            ScheduleName::Explicit => {
                if self.algorithm == Algorithm::HedgeSelfplay {
                    // hedge takes hedge_eta, not eta/floor
                } else if self.params.eta.is_none() || self.params.floor.is_none() {
                    return Err(
                        "config error: schedule = \"explicit\" requires `params.eta` and `params.floor`"
                            .into(),
                    );
                }
            }
            _ => {
                if self.params.eta.is_some() || self.params.floor.is_some() {
                    return Err(
                        "config error: `params.eta`/`params.floor` are only valid with schedule = \"explicit\""
                            .into(),
                    );
                }
            }
        }
        if self.params.hedge_eta.is_some() && self.algorithm != Algorithm::HedgeSelfplay {
            return Err("config error: `params.hedge_eta` is only valid for hedge_selfplay".into());
        }
        // Materialize every cell now so parameter problems surface as config
        // errors before anything runs.
        self.cells(None).map(|_| ())
    }

    fn resolved_schedule(&self) -> ScheduleName {
        if let Some(s) = self.params.schedule {
            return s;
        }
        match self.algorithm {
            Algorithm::OmgRftl => ScheduleName::Theorem3,
            Algorithm::BanditOmgRftl => ScheduleName::Theorem5,
            Algorithm::SpRftlCustom => ScheduleName::Explicit,
            Algorithm::HedgeSelfplay => ScheduleName::Explicit,
        }
    }

    fn kind(&self) -> Result<AdversaryKind, String> {
        Ok(match self.adversary.kind {
            AdversaryKindName::Fixed => {
                let rows = self.adversary.matrix.clone().expect("validated");
                // Surface malformed matrices as config errors.
                PayoffMatrix::from_rows(rows.clone()).map_err(|e| format!("config error: {e}"))?;
                AdversaryKind::Fixed(rows)
            }
            AdversaryKindName::Theorem1Scenario1 => AdversaryKind::Theorem1Scenario1,
            AdversaryKindName::Theorem1Scenario2 => AdversaryKind::Theorem1Scenario2,
            AdversaryKindName::RandomBounded => AdversaryKind::RandomBounded,
            AdversaryKindName::AdaptiveBestResponse => AdversaryKind::AdaptiveBestResponse,
        })
    }

    /// Expand into run cells; `seed_override` replaces the configured seed
    /// list with a single seed.
    pub fn cells(&self, seed_override: Option<u64>) -> Result<Vec<Cell>, String> {
        let kind = self.kind()?;
        let schedule = self.resolved_schedule();
        let seeds: Vec<u64> = match seed_override {
            Some(s) => vec![s],
            None => self.seeds.clone(),
        };
        let mut cells = Vec::new();
        for &horizon in &self.horizons {
            let spec_proto = AdversarySpec {
                kind: kind.clone(),
                d1: self.adversary.d1,
                d2: self.adversary.d2,
                bound: self.adversary.bound,
                horizon,
                seed: 0,
            };
            spec_proto
                .validate()
                .map_err(|e| format!("config error (T = {horizon}): {e}"))?;
            let params = match self.algorithm {
                Algorithm::HedgeSelfplay => None,
                _ => Some(
                    self.learner_params(schedule, horizon)
                        .map_err(|e| format!("config error (T = {horizon}): {e}"))?,
                ),
            };
            for &seed in &seeds {
                cells.push(Cell {
                    algorithm: self.algorithm,
                    spec: AdversarySpec { seed, ..spec_proto.clone() },
                    horizon,
                    seed,
                    params,
                    hedge_eta: self.params.hedge_eta,
                });
            }
        }
        Ok(cells)
    }

    fn learner_params(
        &self,
        schedule: ScheduleName,
        horizon: usize,
    ) -> Result<LearnerParams, CoreError> {
        let (d1, d2) = (self.adversary.d1, self.adversary.d2);
        let bound = self.adversary.bound;
        match schedule {
            ScheduleName::Theorem3 => LearnerParams::theorem3(horizon, bound, d1, d2),
            ScheduleName::Theorem5 => LearnerParams::theorem5(horizon, bound, d1, d2),
            ScheduleName::Explicit => LearnerParams::explicit(
                self.params.eta.expect("validated"),
                self.params.floor.expect("validated"),
                horizon,
                bound,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
algorithm = "omg_rftl"
horizons = [256, 512]
seeds = [1, 2]

[adversary]
kind = "theorem1_scenario2"
d1 = 2
d2 = 2
"#;

    #[test]
    fn parses_and_expands_cells() {
        let c = ExperimentConfig::parse(GOOD).unwrap();
        let cells = c.cells(None).unwrap();
        assert_eq!(cells.len(), 4);
        assert!(cells.iter().all(|c| c.params.is_some()));
        let c2 = c.cells(Some(7)).unwrap();
        assert_eq!(c2.len(), 2);
        assert!(c2.iter().all(|c| c.seed == 7));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{GOOD}\nunknown_key = 1\n");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(err.contains("unknown"), "{err}");
    }

    #[test]
    fn empty_horizons_rejected() {
        let bad = GOOD.replace("horizons = [256, 512]", "horizons = []");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn odd_horizon_for_scenarios_rejected() {
        let bad = GOOD.replace("horizons = [256, 512]", "horizons = [255]");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(err.contains("even"), "{err}");
    }

    #[test]
    fn fixed_requires_matrix() {
        let bad = GOOD.replace("theorem1_scenario2", "fixed");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn explicit_params_only_with_explicit_schedule() {
        let bad = format!("{GOOD}\n[params]\neta = 2.0\n");
        assert!(ExperimentConfig::parse(&bad).is_err());

        let good = format!("{GOOD}\n[params]\nschedule = \"explicit\"\neta = 2.0\nfloor = 0.1\n");
        let good = good.replace("omg_rftl", "sp_rftl_custom");
        assert!(ExperimentConfig::parse(&good).is_ok());
    }

    #[test]
    fn bandit_small_horizon_is_a_config_error() {
        let bad = GOOD
            .replace("omg_rftl", "bandit_omg_rftl")
            .replace("horizons = [256, 512]", "horizons = [64]");
        let err = ExperimentConfig::parse(&bad).unwrap_err();
        assert!(err.contains("T = 64"), "{err}");
    }
}
