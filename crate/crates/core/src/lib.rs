//! Locally private counting queries on `[0, n]`.
//!
//! * [`channel`]: truncated geometric and k-RR mechanisms, privacy verifiers.
//! * [`estimator`]: iterative Bayesian update and channel inversion.
//! * [`metrics`]: Kantorovich (Wasserstein-1) and total variation distances.
//! * [`sampling`]: priors, seeded i.i.d. sampling, empirical distributions.
//! * [`rng`]: reproducible random streams keyed by experiment coordinates.

pub mod channel;
pub mod distribution;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod sampling;

pub use channel::{
    build_krr, build_truncated_geometric, calibrate_epsilon_for_radius, Channel, GroundMetric,
    LineMetric, Mechanism, PrivacyLevel,
};
pub use distribution::Distribution;
pub use error::{Error, Result};
pub use estimator::{ibu_run, ibu_step, log_likelihood, IbuResult, InversionOutcome, StopReason};
pub use metrics::{kantorovich_1d, kantorovich_lp, total_variation};
