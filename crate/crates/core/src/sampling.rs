//! Priors over `[0, n]`, i.i.d. sampling, and empirical distributions.

use rand::Rng;
use rand_distr::{Distribution as _, Exp1};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::rng::StreamKey;

/// First index whose cumulative mass exceeds `u`.
///
/// Zero-mass bins are never selected. If rounding leaves `u` at or above
/// the final cumulative value, the last bin with mass is returned.
pub fn inverse_cdf_index(cdf: &[f64], u: f64) -> usize {
    let idx = cdf.partition_point(|&c| c <= u);
    if idx < cdf.len() {
        return idx;
    }
    (0..cdf.len())
        .rev()
        .find(|&i| {
            let prev = if i == 0 { 0.0 } else { cdf[i - 1] };
            cdf[i] > prev
        })
        .unwrap_or(cdf.len() - 1)
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

/// Observed values in `[0, n]`, with the stream that produced them if known.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    values: Vec<usize>,
    lineage: Option<StreamKey>,
}

impl SampleSet {
    pub fn new(n: usize, values: Vec<usize>) -> Result<Self> {
        if let Some(&v) = values.iter().find(|&&v| v > n) {
            return Err(Error::OutOfDomain { value: v, n });
        }
        Ok(Self {
            n,
            values,
            lineage: None,
        })
    }

    pub fn with_lineage(mut self, key: StreamKey) -> Self {
        self.lineage = Some(key);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lineage(&self) -> Option<&StreamKey> {
        self.lineage.as_ref()
    }
}

/// Binomial(n, p) weights, built in log space from the ratio recurrence and
/// normalized once.
pub fn binomial_prior(n: usize, success: f64) -> Result<Distribution> {
    if !(success > 0.0 && success < 1.0) {
        return Err(Error::InvalidSuccessProbability(success));
    }
    if n == 0 {
        return Err(Error::DomainTooSmall(n));
    }
    let log_odds = success.ln() - (1.0 - success).ln();
    let mut logs = Vec::with_capacity(n + 1);
    let mut current = n as f64 * (1.0 - success).ln();
    logs.push(current);
    for i in 0..n {
        current += ((n - i) as f64).ln() - ((i + 1) as f64).ln() + log_odds;
        logs.push(current);
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Distribution::normalized(logs.into_iter().map(|l| (l - peak).exp()).collect())
}

/// `k` distinct support points chosen uniformly from `[0, n]`, weighted by a
/// uniform draw from the simplex (normalized standard exponentials).
pub fn k_point_prior<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Distribution> {
    if n == 0 {
        return Err(Error::DomainTooSmall(n));
    }
    if k < 2 || k > n + 1 {
        return Err(Error::InvalidSupportSize { k, max: n + 1 });
    }
    let mut support = rand::seq::index::sample(rng, n + 1, k).into_vec();
    support.sort_unstable();
    k_point_prior_on(n, &support, rng)
}

/// Like [`k_point_prior`] but with the support fixed by the caller.
pub fn k_point_prior_on<R: Rng + ?Sized>(
    n: usize,
    support: &[usize],
    rng: &mut R,
) -> Result<Distribution> {
    if support.len() < 2 || support.len() > n + 1 {
        return Err(Error::InvalidSupportSize {
            k: support.len(),
            max: n + 1,
        });
    }
    let mut weights = vec![0.0; n + 1];
    for &s in support {
        if s > n {
            return Err(Error::OutOfDomain { value: s, n });
        }
        if weights[s] != 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "support point {s} repeated"
            )));
        }
        // Exp1 is strictly positive almost surely; guard the measure-zero case.
        let draw: f64 = Exp1.sample(rng);
        weights[s] = draw.max(f64::MIN_POSITIVE);
    }
    Distribution::normalized(weights)
}

/// `count` i.i.d. draws by inverse-CDF over the fixed order `0..=n`, one
/// uniform per draw.
pub fn draw_samples<R: Rng + ?Sized>(
    dist: &Distribution,
    count: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::ZeroCount("sample count"));
    }
    let cdf = cumulative(dist.weights());
    let values = (0..count)
        .map(|_| inverse_cdf_index(&cdf, rng.random::<f64>()))
        .collect();
    SampleSet::new(dist.n(), values)
}

/// Frequencies of each value in `[0, n]`.
pub fn empirical(samples: &SampleSet) -> Result<Distribution> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut counts = vec![0u64; samples.n() + 1];
    for &v in samples.values() {
        counts[v] += 1;
    }
    let total = samples.len() as f64;
    Distribution::new(counts.into_iter().map(|c| c as f64 / total).collect())
}
