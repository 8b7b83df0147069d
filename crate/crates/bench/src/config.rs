//! Experiment configuration, loadable from TOML.

use std::f64::consts::LN_2;
use std::path::Path;

use geoldp::channel::calibrate_epsilon_for_radius;
use geoldp::sampling::{binomial_prior, k_point_prior, k_point_prior_on};
use geoldp::{build_krr, build_truncated_geometric, Channel, Distribution, PrivacyLevel};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    Geometric,
    Krr,
    /// Noiseless channel; the large-epsilon limit of both mechanisms.
    Identity,
}

/// One mechanism column of the grid. `epsilon` may be given directly or
/// derived from a likelihood-ratio budget over a radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub name: String,
    pub kind: MechanismKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_log_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
}

impl MechanismSpec {
    pub fn geometric(name: &str, epsilon: f64) -> Self {
        Self {
            name: name.into(),
            kind: MechanismKind::Geometric,
            epsilon: Some(epsilon),
            target_log_ratio: None,
            radius: None,
        }
    }

    pub fn krr(name: &str, epsilon: f64) -> Self {
        Self {
            kind: MechanismKind::Krr,
            ..Self::geometric(name, epsilon)
        }
    }

    pub fn identity(name: &str) -> Self {
        Self {
            name: name.into(),
            kind: MechanismKind::Identity,
            epsilon: None,
            target_log_ratio: None,
            radius: None,
        }
    }

    pub fn level(&self) -> Result<Option<PrivacyLevel>> {
        if self.kind == MechanismKind::Identity {
            return Ok(None);
        }
        let level = match (self.epsilon, self.target_log_ratio, self.radius) {
            (Some(eps), None, None) => PrivacyLevel::new(eps)?,
            (None, Some(target), Some(radius)) => calibrate_epsilon_for_radius(target, radius)?,
            _ => {
                return Err(BenchError::Config(format!(
                    "mechanism '{}' needs either epsilon or target_log_ratio + radius",
                    self.name
                )))
            }
        };
        Ok(Some(level))
    }

    /// Builds the channel on `[0, n]`; k-RR uses the alphabet size `n + 1`.
    pub fn build(&self, n: usize) -> Result<Channel> {
        let channel = match (self.kind, self.level()?) {
            (MechanismKind::Geometric, Some(level)) => build_truncated_geometric(n, level)?,
            (MechanismKind::Krr, Some(level)) => build_krr(n + 1, level)?,
            _ => Channel::identity(n)?,
        };
        Ok(channel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    Binomial,
    KPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub name: String,
    pub kind: PriorKind,
    /// Binomial success probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<f64>,
    /// Support size of a k-point prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Fixed support points for a k-point prior; drawn at random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<usize>>,
}

impl PriorSpec {
    pub fn binomial(name: &str, success: f64) -> Self {
        Self {
            name: name.into(),
            kind: PriorKind::Binomial,
            success: Some(success),
            k: None,
            support: None,
        }
    }

    pub fn k_point(name: &str, k: usize) -> Self {
        Self {
            name: name.into(),
            kind: PriorKind::KPoint,
            success: None,
            k: Some(k),
            support: None,
        }
    }

    /// Whether building the prior consumes randomness.
    pub fn is_random(&self) -> bool {
        self.kind == PriorKind::KPoint
    }

    pub fn build(&self, n: usize, rng: &mut dyn RngCore) -> Result<Distribution> {
        let dist = match self.kind {
            PriorKind::Binomial => binomial_prior(n, self.success.unwrap_or(0.5))?,
            PriorKind::KPoint => match &self.support {
                Some(points) => k_point_prior_on(n, points, rng)?,
                None => k_point_prior(n, self.k.unwrap_or(4), rng)?,
            },
        };
        Ok(dist)
    }
}

fn default_n() -> usize {
    100
}

fn default_mechanisms() -> Vec<MechanismSpec> {
    vec![
        MechanismSpec {
            name: "geometric".into(),
            kind: MechanismKind::Geometric,
            epsilon: None,
            target_log_ratio: Some(LN_2),
            radius: Some(10),
        },
        MechanismSpec::krr("krr", LN_2),
    ]
}

fn default_priors() -> Vec<PriorSpec> {
    vec![
        PriorSpec::binomial("binomial", 0.5),
        PriorSpec::k_point("4-point", 4),
    ]
}

fn default_sizes() -> Vec<usize> {
    vec![1000, 10_000, 50_000, 100_000]
}

fn default_repetitions() -> usize {
    20
}

fn default_iterations() -> usize {
    5000
}

fn default_seed() -> u64 {
    20_190_601
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_mechanisms")]
    pub mechanisms: Vec<MechanismSpec>,
    #[serde(default = "default_priors")]
    pub priors: Vec<PriorSpec>,
    #[serde(default = "default_sizes")]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_iterations")]
    pub ibu_iterations: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    /// Draw a fresh random prior for every replicate instead of one per suite.
    #[serde(default)]
    pub redraw_prior: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: default_n(),
            mechanisms: default_mechanisms(),
            priors: default_priors(),
            sample_sizes: default_sizes(),
            repetitions: default_repetitions(),
            ibu_iterations: default_iterations(),
            master_seed: default_seed(),
            redraw_prior: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(BenchError::Config(msg));
        if self.n == 0 {
            return fail("n must be at least 1".into());
        }
        if self.mechanisms.is_empty() || self.priors.is_empty() || self.sample_sizes.is_empty() {
            return fail("mechanisms, priors and sample_sizes must be non-empty".into());
        }
        if self.sample_sizes.iter().any(|&s| s == 0 || s > u32::MAX as usize) {
            return fail("sample sizes must lie in [1, 2^32)".into());
        }
        if self.mechanisms.len() > 1 << 16 || self.priors.len() > 1 << 16 {
            return fail("at most 65536 mechanisms and priors".into());
        }
        for (i, s) in self.sample_sizes.iter().enumerate() {
            if self.sample_sizes[..i].contains(s) {
                return fail(format!("duplicate sample size {s}"));
            }
        }
        if self.repetitions == 0 || self.ibu_iterations == 0 {
            return fail("repetitions and ibu_iterations must be at least 1".into());
        }
        for (i, m) in self.mechanisms.iter().enumerate() {
            if self.mechanisms[..i].iter().any(|o| o.name == m.name) {
                return fail(format!("duplicate mechanism name '{}'", m.name));
            }
            m.level()?;
        }
        for (i, p) in self.priors.iter().enumerate() {
            if self.priors[..i].iter().any(|o| o.name == p.name) {
                return fail(format!("duplicate prior name '{}'", p.name));
            }
            match p.kind {
                PriorKind::Binomial => {
                    let s = p.success.unwrap_or(0.5);
                    if !(s > 0.0 && s < 1.0) {
                        return fail(format!("prior '{}': success must lie in (0, 1)", p.name));
                    }
                }
                PriorKind::KPoint => {
                    let k = p.support.as_ref().map_or(p.k.unwrap_or(4), Vec::len);
                    if k < 2 || k > self.n + 1 {
                        return fail(format!("prior '{}': k must lie in [2, n + 1]", p.name));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.mechanisms.len() * self.priors.len() * self.sample_sizes.len() * self.repetitions
    }

    pub fn mechanism_index(&self, name: &str) -> Option<usize> {
        self.mechanisms.iter().position(|m| m.name == name)
    }

    pub fn prior_index(&self, name: &str) -> Option<usize> {
        self.priors.iter().position(|p| p.name == name)
    }

    pub fn size_index(&self, size: usize) -> Option<usize> {
        self.sample_sizes.iter().position(|&s| s == size)
    }
}
