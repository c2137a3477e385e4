//! Online matrix games: two-player zero-sum games whose payoff matrix may
//! change arbitrarily every round.
//!
//! The crate provides:
//!
//! * domain types for bounded payoff matrices and (restricted-)simplex mixed
//!   strategies ([`game`]),
//! * negative-entropy regularizers and exact linear-plus-entropy best
//!   responses ([`regularizers`]),
//! * a certified saddle-point solver for bilinear and entropy-regularized
//!   bilinear games, used both as the learners' inner step and as the
//!   equilibrium comparator oracle ([`saddle`]),
//! * the online learners: saddle-point follow-the-leader over restricted
//!   simplexes, its bandit variant built on one-point matrix estimates, and a
//!   Hedge baseline ([`learners`]),
//! * payoff-sequence generators, including the two-scenario construction that
//!   separates individual regret from equilibrium regret ([`adversaries`]),
//! * regret accounting and growth-rate fitting ([`metrics`]), and
//! * deterministic single-run simulation drivers ([`sim`]).

pub mod adversaries;
pub mod error;
pub mod game;
pub mod learners;
pub mod metrics;
pub mod regularizers;
pub mod rng;
pub mod saddle;
pub mod sim;

pub use error::{CoreError, Result};
pub use game::{MixedStrategy, PayoffMatrix, RoundRecord};
pub use learners::{LearnerParams, OnePointEstimate, ScheduleMode};
pub use metrics::RunLedger;
pub use regularizers::NegEntropy;
pub use saddle::{RegularizedObjective, SaddleCertificate};
