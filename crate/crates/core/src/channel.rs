//! Obfuscation mechanisms as explicit row-stochastic matrices.
//!
//! A [`Channel`] on `[0, n]` holds `C[i][j] = P[report j | true value i]`.
//! Constructors cover the truncated geometric mechanism (metric privacy
//! under `d(i, j) = |i - j|`) and k-ary randomized response (plain local
//! privacy). The verifiers return the smallest privacy parameter a channel
//! satisfies instead of a yes/no answer.

use rand::Rng;

use crate::distribution::Distribution;
use crate::error::{Error, Result};

/// Row sums must equal 1 to within this tolerance.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Allowed gap between `alpha^k` by repeated multiplication and `exp(-eps*k)`.
pub const POWER_DRIFT_TOLERANCE: f64 = 1e-12;

/// Slack used by the boolean privacy checks.
pub const VERIFY_SLACK: f64 = 1e-9;

/// Privacy parameter `epsilon > 0` with its decay rate `alpha = exp(-epsilon)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyLevel {
    epsilon: f64,
    alpha: f64,
}

impl PrivacyLevel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Self {
            epsilon,
            alpha: (-epsilon).exp(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Which construction produced a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Geometric,
    Krr,
    Custom,
}

impl Mechanism {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::Geometric => "geometric",
            Mechanism::Krr => "krr",
            Mechanism::Custom => "custom",
        }
    }
}

/// Ground distance on `[0, n]`.
pub trait GroundMetric {
    fn distance(&self, i: usize, j: usize) -> f64;
}

/// `d(i, j) = scale * |i - j|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMetric {
    pub scale: f64,
}

impl LineMetric {
    pub const UNIT: LineMetric = LineMetric { scale: 1.0 };
}

impl Default for LineMetric {
    fn default() -> Self {
        Self::UNIT
    }
}

impl GroundMetric for LineMetric {
    fn distance(&self, i: usize, j: usize) -> f64 {
        self.scale * i.abs_diff(j) as f64
    }
}

impl<F> GroundMetric for F
where
    F: Fn(usize, usize) -> f64,
{
    fn distance(&self, i: usize, j: usize) -> f64 {
        self(i, j)
    }
}

/// Checks the metric axioms exhaustively on `[0, n]`.
pub fn check_metric<D: GroundMetric + ?Sized>(d: &D, n: usize) -> Result<()> {
    const TOL: f64 = 1e-12;
    for i in 0..=n {
        if d.distance(i, i).abs() > TOL {
            return Err(Error::InvalidMetric(format!("d({i},{i}) != 0")));
        }
        for j in 0..=n {
            let dij = d.distance(i, j);
            if !dij.is_finite() || dij < 0.0 {
                return Err(Error::InvalidMetric(format!("d({i},{j}) = {dij}")));
            }
            if (dij - d.distance(j, i)).abs() > TOL {
                return Err(Error::InvalidMetric(format!("symmetry at ({i},{j})")));
            }
            for k in 0..=n {
                if dij > d.distance(i, k) + d.distance(k, j) + TOL {
                    return Err(Error::InvalidMetric(format!(
                        "triangle inequality at ({i},{k},{j})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Row-stochastic matrix on `[0, n]` with cached row CDFs for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    n: usize,
    matrix: Vec<f64>,
    row_cdfs: Vec<f64>,
    label: Mechanism,
}

impl Channel {
    fn from_flat(n: usize, matrix: Vec<f64>, label: Mechanism) -> Result<Self> {
        let size = n + 1;
        if matrix.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                found: matrix.len(),
            });
        }
        for (idx, &v) in matrix.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidEntry {
                    row: idx / size,
                    col: idx % size,
                    value: v,
                });
            }
        }
        let mut row_cdfs = Vec::with_capacity(matrix.len());
        for (row, chunk) in matrix.chunks_exact(size).enumerate() {
            let mut acc = 0.0;
            for &v in chunk {
                acc += v;
                row_cdfs.push(acc);
            }
            if (acc - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NotStochastic { row, sum: acc });
            }
        }
        Ok(Self {
            n,
            matrix,
            row_cdfs,
            label,
        })
    }

    /// Wraps an arbitrary square row-stochastic matrix.
    pub fn custom(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::DomainTooSmall(rows.len().saturating_sub(1)));
        }
        let size = rows.len();
        let mut flat = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    found: row.len(),
                });
            }
            flat.extend(row);
        }
        Self::from_flat(size - 1, flat, Mechanism::Custom)
    }

    /// The noiseless channel, i.e. the `epsilon -> infinity` limit of both mechanisms.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DomainTooSmall(n));
        }
        let size = n + 1;
        let mut flat = vec![0.0; size * size];
        for i in 0..size {
            flat[i * size + i] = 1.0;
        }
        Self::from_flat(n, flat, Mechanism::Custom)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rows (and columns), `n + 1`.
    pub fn size(&self) -> usize {
        self.n + 1
    }

    pub fn label(&self) -> Mechanism {
        self.label
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let size = self.size();
        &self.matrix[i * size..(i + 1) * size]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.matrix
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.matrix.chunks_exact(self.size())
    }

    /// Output distribution `p C` for input distribution `p`.
    pub fn push_forward(&self, p: &Distribution) -> Result<Vec<f64>> {
        if p.len() != self.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                found: p.len(),
            });
        }
        let mut out = vec![0.0; self.size()];
        for (pi, row) in p.weights().iter().zip(self.rows()) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += pi * c;
            }
        }
        Ok(out)
    }

    /// Reports `j` with probability `C[x][j]`, consuming one uniform draw.
    pub fn apply<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Result<usize> {
        if x > self.n {
            return Err(Error::OutOfDomain { value: x, n: self.n });
        }
        let size = self.size();
        let cdf = &self.row_cdfs[x * size..(x + 1) * size];
        Ok(crate::sampling::inverse_cdf_index(cdf, rng.random::<f64>()))
    }
}

/// `alpha^0 ..= alpha^n` by repeated multiplication, checked against `exp`.
fn alpha_powers(level: PrivacyLevel, n: usize) -> Result<Vec<f64>> {
    let mut powers = Vec::with_capacity(n + 1);
    let mut current = 1.0_f64;
    for k in 0..=n {
        let exact = (-level.epsilon() * k as f64).exp();
        let drift = (current - exact).abs();
        if drift > POWER_DRIFT_TOLERANCE {
            return Err(Error::PowerDrift { exponent: k, drift });
        }
        powers.push(current);
        current *= level.alpha();
    }
    Ok(powers)
}

/// Truncated geometric mechanism on `[0, n]`.
///
/// Interior columns carry `(1-a)/(1+a) * a^|i-j|`; columns `0` and `n`
/// absorb the two tails of the untruncated geometric, `a^i/(1+a)` and
/// `a^(n-i)/(1+a)`.
pub fn build_truncated_geometric(n: usize, level: PrivacyLevel) -> Result<Channel> {
    if n == 0 {
        return Err(Error::DomainTooSmall(n));
    }
    let alpha = level.alpha();
    let powers = alpha_powers(level, n)?;
    let edge = 1.0 / (1.0 + alpha);
    let inner = (1.0 - alpha) / (1.0 + alpha);
    let size = n + 1;
    let mut flat = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let v = if j == 0 {
                edge * powers[i]
            } else if j == n {
                edge * powers[n - i]
            } else {
                inner * powers[i.abs_diff(j)]
            };
            flat.push(v);
        }
    }
    Channel::from_flat(n, flat, Mechanism::Geometric)
}

/// k-ary randomized response: the true value with weight `e^eps`, every
/// other value with weight 1, normalized by `k - 1 + e^eps`.
pub fn build_krr(k: usize, level: PrivacyLevel) -> Result<Channel> {
    if k < 2 {
        return Err(Error::AlphabetTooSmall(k));
    }
    let boost = level.epsilon().exp();
    let norm = (k - 1) as f64 + boost;
    let keep = boost / norm;
    let flip = 1.0 / norm;
    let mut flat = vec![flip; k * k];
    for i in 0..k {
        flat[i * k + i] = keep;
    }
    Channel::from_flat(k - 1, flat, Mechanism::Krr)
}

/// Smallest `eps` with `C[x][y] <= e^eps C[x'][y]` for all `x, x', y`.
///
/// Infinite when some column mixes zero and non-zero entries.
pub fn tightest_ldp_epsilon(ch: &Channel) -> f64 {
    let size = ch.size();
    let mut worst = 0.0_f64;
    for y in 0..size {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for x in 0..size {
            let v = ch.entry(x, y);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi == 0.0 {
            continue;
        }
        if lo == 0.0 {
            return f64::INFINITY;
        }
        worst = worst.max((hi / lo).ln());
    }
    worst
}

/// Smallest `eps` with `C[x][y] <= e^(eps d(x,x')) C[x'][y]` for all triples.
pub fn tightest_d_privacy_epsilon<D: GroundMetric + ?Sized>(ch: &Channel, d: &D) -> Result<f64> {
    check_metric(d, ch.n())?;
    let size = ch.size();
    let mut worst = 0.0_f64;
    for y in 0..size {
        for x in 0..size {
            let a = ch.entry(x, y);
            for xp in 0..size {
                if x == xp {
                    continue;
                }
                let b = ch.entry(xp, y);
                if a == 0.0 && b == 0.0 {
                    continue;
                }
                if b == 0.0 {
                    return Ok(f64::INFINITY);
                }
                let log_ratio = (a / b).ln();
                if log_ratio <= 0.0 {
                    continue;
                }
                let dist = d.distance(x, xp);
                if dist == 0.0 {
                    return Ok(f64::INFINITY);
                }
                worst = worst.max(log_ratio / dist);
            }
        }
    }
    Ok(worst)
}

pub fn satisfies_ldp(ch: &Channel, epsilon: f64) -> bool {
    tightest_ldp_epsilon(ch) <= epsilon + VERIFY_SLACK
}

pub fn satisfies_d_privacy<D: GroundMetric + ?Sized>(
    ch: &Channel,
    d: &D,
    epsilon: f64,
) -> Result<bool> {
    Ok(tightest_d_privacy_epsilon(ch, d)? <= epsilon + VERIFY_SLACK)
}

/// Spreads a log-likelihood budget evenly over `radius` unit steps, so the
/// geometric mechanism's ratio between values at most `radius` apart stays
/// within `e^target_log_ratio`.
pub fn calibrate_epsilon_for_radius(target_log_ratio: f64, radius: usize) -> Result<PrivacyLevel> {
    if radius == 0 || !(target_log_ratio.is_finite() && target_log_ratio > 0.0) {
        return Err(Error::InvalidCalibration);
    }
    PrivacyLevel::new(target_log_ratio / radius as f64)
}
