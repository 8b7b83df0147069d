//! Reconstruction of the input distribution from noisy reports.
//!
//! The iterative Bayesian update (IBU) is the EM iteration for a known
//! channel `C`:
//!
//! ```text
//! p'_i = sum_j q_j * p_i C[i][j] / sum_h p_h C[h][j]
//! ```
//!
//! Each step cannot decrease `L(p) = sum_j q_j ln (pC)_j`, and the limit is
//! a maximum-likelihood estimate of the prior given the empirical report
//! distribution `q`. When `q C^-1` is itself a probability vector it is
//! that limit, which gives a second, independent route.
//!
//! All sums run in ascending index order so results are bit-reproducible.

use crate::channel::Channel;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

/// Default likelihood-improvement tolerance for [`ibu_run`].
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Lowest coordinate of `q C^-1` still treated as non-negative.
pub const INVERSION_NEGATIVE_SLACK: f64 = 1e-10;

/// Allowed gap between the mass of `q C^-1` and 1.
pub const INVERSION_MASS_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// One step improved the log-likelihood by less than the tolerance.
    Tolerance,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IbuResult {
    pub estimate: Distribution,
    pub iterations_run: usize,
    /// `L(p_0), L(p_1), ..., L(p_K)`: the starting point followed by one
    /// entry per step.
    pub likelihood_trace: Vec<f64>,
    pub stop: StopReason,
}

impl IbuResult {
    pub fn final_log_likelihood(&self) -> f64 {
        *self.likelihood_trace.last().expect("trace holds the initial value")
    }
}

fn check_dims(ch: &Channel, q: &Distribution, p: &Distribution) -> Result<()> {
    for len in [q.len(), p.len()] {
        if len != ch.size() {
            return Err(Error::DimensionMismatch {
                expected: ch.size(),
                found: len,
            });
        }
    }
    Ok(())
}

/// `predicted[j] = sum_h p_h C[h][j]`.
fn predict(ch: &Channel, p: &[f64], predicted: &mut [f64]) {
    predicted.fill(0.0);
    for (ph, row) in p.iter().zip(ch.rows()) {
        if *ph == 0.0 {
            continue;
        }
        for (out, c) in predicted.iter_mut().zip(row) {
            *out += ph * c;
        }
    }
}

fn likelihood_from_prediction(q: &[f64], predicted: &[f64]) -> f64 {
    let mut total = 0.0;
    for (qy, py) in q.iter().zip(predicted) {
        if *qy == 0.0 {
            continue;
        }
        if *py <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += qy * py.ln();
    }
    total
}

/// Writes one update into `next`, given the prediction for `p`.
///
/// Entries of `p` that are exactly zero stay zero; the caller decides
/// whether that is allowed.
fn update(ch: &Channel, q: &[f64], p: &[f64], predicted: &[f64], next: &mut [f64]) -> Result<()> {
    let mut ratio = vec![0.0; q.len()];
    for (column, ((r, qj), pj)) in ratio.iter_mut().zip(q).zip(predicted).enumerate() {
        if *qj == 0.0 {
            continue;
        }
        if *pj <= 0.0 {
            return Err(Error::ZeroPredictedMass { column });
        }
        *r = qj / pj;
    }
    for ((out, pi), row) in next.iter_mut().zip(p).zip(ch.rows()) {
        let mut acc = 0.0;
        for (c, r) in row.iter().zip(&ratio) {
            acc += c * r;
        }
        *out = pi * acc;
    }
    Ok(())
}

/// One IBU step from a full-support `p`.
pub fn ibu_step(ch: &Channel, q: &Distribution, p: &Distribution) -> Result<Distribution> {
    check_dims(ch, q, p)?;
    if let Some(i) = p.weights().iter().position(|w| *w <= 0.0) {
        return Err(Error::NotFullSupport(i));
    }
    let mut predicted = vec![0.0; ch.size()];
    predict(ch, p.weights(), &mut predicted);
    let mut next = vec![0.0; ch.size()];
    update(ch, q.weights(), p.weights(), &predicted, &mut next)?;
    Distribution::new(next)
}

/// `sum_y q_y ln (theta C)_y`, skipping outputs with `q_y = 0`.
pub fn log_likelihood(theta: &Distribution, ch: &Channel, q: &Distribution) -> Result<f64> {
    check_dims(ch, q, theta)?;
    let mut predicted = vec![0.0; ch.size()];
    predict(ch, theta.weights(), &mut predicted);
    Ok(likelihood_from_prediction(q.weights(), &predicted))
}

/// Iterates [`ibu_step`] from `init` for at most `max_iters` steps.
///
/// With `tol > 0` the run stops as soon as one step improves the
/// log-likelihood by less than `tol`. `tol = 0` runs exactly `max_iters`
/// steps. Iterates may lose support through underflow; such coordinates
/// stay at zero.
pub fn ibu_run(
    ch: &Channel,
    q: &Distribution,
    init: &Distribution,
    max_iters: usize,
    tol: f64,
) -> Result<IbuResult> {
    check_dims(ch, q, init)?;
    if max_iters == 0 {
        return Err(Error::ZeroCount("max_iters"));
    }
    if let Some(i) = init.weights().iter().position(|w| *w <= 0.0) {
        return Err(Error::NotFullSupport(i));
    }
    let size = ch.size();
    let qw = q.weights();
    let mut current = init.weights().to_vec();
    let mut next = vec![0.0; size];
    let mut predicted = vec![0.0; size];
    let mut trace = Vec::with_capacity(max_iters + 1);

    predict(ch, &current, &mut predicted);
    trace.push(likelihood_from_prediction(qw, &predicted));
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;
    while iterations < max_iters {
        update(ch, qw, &current, &predicted, &mut next)?;
        std::mem::swap(&mut current, &mut next);
        predict(ch, &current, &mut predicted);
        let value = likelihood_from_prediction(qw, &predicted);
        let improvement = value - trace[trace.len() - 1];
        trace.push(value);
        iterations += 1;
        if tol > 0.0 && improvement < tol {
            stop = StopReason::Tolerance;
            break;
        }
    }
    Ok(IbuResult {
        estimate: Distribution::new(current)?,
        iterations_run: iterations,
        likelihood_trace: trace,
        stop,
    })
}

pub fn invert_channel(ch: &Channel) -> Result<SquareMatrix> {
    SquareMatrix::from_row_major(ch.size(), ch.as_slice().to_vec())?.inverse()
}

#[derive(Debug, Clone, PartialEq)]
pub enum InversionOutcome {
    /// `q C^-1` was a probability vector (after clamping round-off).
    Distribution(Distribution),
    /// `q C^-1` has clearly negative coordinates or the wrong mass.
    NotADistribution(Vec<f64>),
}

impl InversionOutcome {
    pub fn distribution(&self) -> Option<&Distribution> {
        match self {
            InversionOutcome::Distribution(d) => Some(d),
            InversionOutcome::NotADistribution(_) => None,
        }
    }
}

/// The closed-form estimate `q C^-1`.
pub fn inversion_estimate(ch: &Channel, q: &Distribution) -> Result<InversionOutcome> {
    let inverse = invert_channel(ch)?;
    let raw = inverse.left_mul(q.weights())?;
    let mass: f64 = raw.iter().sum();
    let admissible = raw.iter().all(|v| *v >= -INVERSION_NEGATIVE_SLACK)
        && (mass - 1.0).abs() <= INVERSION_MASS_SLACK;
    if !admissible {
        return Ok(InversionOutcome::NotADistribution(raw));
    }
    let clamped = raw.into_iter().map(|v| v.max(0.0)).collect();
    Ok(InversionOutcome::Distribution(Distribution::normalized(clamped)?))
}
