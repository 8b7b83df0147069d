//! Experiment cells and suite execution.
//!
//! A cell is one (mechanism, prior, sample size, replicate) combination. Each
//! cell derives its own random streams from the master seed, so results do
//! not depend on which worker runs it or in what order:
//!
//! | stream  | cell coordinate                         | replicate coordinate |
//! |---------|-----------------------------------------|----------------------|
//! | prior   | `prior`                                 | `replicate`, or 0 unless `redraw_prior` |
//! | samples | `prior << 32 \| sample_size`            | `replicate`          |
//! | noise   | `mechanism << 48 \| prior << 32 \| sample_size` | `replicate` |
//!
//! `sample_size` is the size itself, not its position in the grid, so a
//! reduced grid reproduces the matching cells of a larger one. The sample
//! stream ignores the mechanism: every mechanism obfuscates the same
//! underlying sample.

use std::time::Instant;

use geoldp::estimator::ibu_run;
use geoldp::metrics::kantorovich_1d;
use geoldp::rng::{Purpose, StreamKey};
use geoldp::sampling::{draw_samples, empirical, SampleSet};
use geoldp::{Channel, Distribution};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};

/// Grid coordinates of a cell, as indices into the configuration lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub mechanism: usize,
    pub prior: usize,
    pub size: usize,
    pub replicate: usize,
}

impl CellId {
    pub fn prior_key(&self, cfg: &ExperimentConfig) -> StreamKey {
        let replicate = if cfg.redraw_prior { self.replicate } else { 0 };
        StreamKey::new(cfg.master_seed, self.prior as u64, replicate as u64, Purpose::Prior)
    }

    pub fn samples_key(&self, cfg: &ExperimentConfig) -> StreamKey {
        let cell = ((self.prior as u64) << 32) | cfg.sample_sizes[self.size] as u64;
        StreamKey::new(cfg.master_seed, cell, self.replicate as u64, Purpose::Samples)
    }

    pub fn noise_key(&self, cfg: &ExperimentConfig) -> StreamKey {
        let cell = ((self.mechanism as u64) << 48)
            | ((self.prior as u64) << 32)
            | cfg.sample_sizes[self.size] as u64;
        StreamKey::new(cfg.master_seed, cell, self.replicate as u64, Purpose::Noise)
    }
}

/// Every cell of the grid in canonical order: mechanism, prior, size, replicate.
pub fn grid(cfg: &ExperimentConfig) -> Vec<CellId> {
    let mut cells = Vec::with_capacity(cfg.cell_count());
    for mechanism in 0..cfg.mechanisms.len() {
        for prior in 0..cfg.priors.len() {
            for size in 0..cfg.sample_sizes.len() {
                for replicate in 0..cfg.repetitions {
                    cells.push(CellId {
                        mechanism,
                        prior,
                        size,
                        replicate,
                    });
                }
            }
        }
    }
    cells
}

/// Human-readable coordinates of a cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellLabel {
    pub mechanism: String,
    pub prior: String,
    pub sample_size: usize,
    pub replicate: usize,
}

impl CellLabel {
    pub fn of(cfg: &ExperimentConfig, cell: CellId) -> Self {
        Self {
            mechanism: cfg.mechanisms[cell.mechanism].name.clone(),
            prior: cfg.priors[cell.prior].name.clone(),
            sample_size: cfg.sample_sizes[cell.size],
            replicate: cell.replicate,
        }
    }

    /// File-name fragment, e.g. `geometric_binomial_100000_r0`.
    pub fn slug(&self) -> String {
        let clean = |s: &str| -> String {
            s.chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '-' })
                .collect()
        };
        format!(
            "{}_{}_{}_r{}",
            clean(&self.mechanism),
            clean(&self.prior),
            self.sample_size,
            self.replicate
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub cell: CellLabel,
    /// Kantorovich distance from the true prior to the IBU estimate.
    pub kantorovich_estimate: f64,
    /// Kantorovich distance from the true prior to the raw noisy histogram.
    pub kantorovich_noisy: f64,
    pub final_log_likelihood: f64,
    pub iterations_run: usize,
    pub likelihood_trace: Option<Vec<f64>>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub cell: CellLabel,
    pub reason: String,
}

/// Everything one cell computes, before trace-retention policy is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutput {
    pub prior: Distribution,
    pub samples: SampleSet,
    pub noisy: Distribution,
    pub estimate: Distribution,
    pub record: ExperimentRecord,
}

/// Channels and fixed priors shared by all cells of a suite.
pub struct Prepared {
    channels: Vec<Channel>,
    fixed_priors: Vec<Option<Distribution>>,
}

impl Prepared {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let channels = cfg
            .mechanisms
            .iter()
            .map(|m| m.build(cfg.n))
            .collect::<Result<Vec<_>>>()?;
        let mut fixed_priors = Vec::with_capacity(cfg.priors.len());
        for (idx, spec) in cfg.priors.iter().enumerate() {
            if spec.is_random() && cfg.redraw_prior {
                fixed_priors.push(None);
            } else {
                let key = StreamKey::new(cfg.master_seed, idx as u64, 0, Purpose::Prior);
                fixed_priors.push(Some(spec.build(cfg.n, &mut key.rng())?));
            }
        }
        Ok(Self {
            channels,
            fixed_priors,
        })
    }

    pub fn channel(&self, mechanism: usize) -> &Channel {
        &self.channels[mechanism]
    }

    pub fn prior(&self, cfg: &ExperimentConfig, cell: CellId) -> Result<Distribution> {
        match &self.fixed_priors[cell.prior] {
            Some(d) => Ok(d.clone()),
            None => cfg.priors[cell.prior].build(cfg.n, &mut cell.prior_key(cfg).rng()),
        }
    }
}

/// Runs one cell: sample the prior, obfuscate every sample, take the noisy
/// histogram, run IBU from the uniform distribution for the configured
/// number of iterations, and measure distances to the true prior.
pub fn run_cell(cfg: &ExperimentConfig, prepared: &Prepared, cell: CellId) -> Result<CellOutput> {
    let started = Instant::now();
    let channel = prepared.channel(cell.mechanism);
    let prior = prepared.prior(cfg, cell)?;
    let samples_key = cell.samples_key(cfg);
    let samples = draw_samples(&prior, cfg.sample_sizes[cell.size], &mut samples_key.rng())?
        .with_lineage(samples_key);

    let noise_key = cell.noise_key(cfg);
    let mut noise = noise_key.rng();
    let reports = samples
        .values()
        .iter()
        .map(|&x| channel.apply(x, &mut noise))
        .collect::<geoldp::Result<Vec<_>>>()?;
    let reports = SampleSet::new(cfg.n, reports)?.with_lineage(noise_key);
    let noisy = empirical(&reports)?;

    let init = Distribution::uniform(cfg.n)?;
    let ibu = ibu_run(channel, &noisy, &init, cfg.ibu_iterations, 0.0)?;
    let record = ExperimentRecord {
        cell: CellLabel::of(cfg, cell),
        kantorovich_estimate: kantorovich_1d(&prior, &ibu.estimate)?,
        kantorovich_noisy: kantorovich_1d(&prior, &noisy)?,
        final_log_likelihood: ibu.final_log_likelihood(),
        iterations_run: ibu.iterations_run,
        likelihood_trace: Some(ibu.likelihood_trace),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    Ok(CellOutput {
        prior,
        samples,
        noisy,
        estimate: ibu.estimate,
        record,
    })
}

/// Looks up a cell by its labels.
pub fn find_cell(
    cfg: &ExperimentConfig,
    mechanism: &str,
    prior: &str,
    sample_size: usize,
    replicate: usize,
) -> Result<CellId> {
    let describe = || format!("{mechanism}/{prior}/{sample_size}/r{replicate}");
    let mechanism = cfg
        .mechanism_index(mechanism)
        .ok_or_else(|| BenchError::UnknownCell(describe()))?;
    let prior = cfg
        .prior_index(prior)
        .ok_or_else(|| BenchError::UnknownCell(describe()))?;
    let size = cfg
        .size_index(sample_size)
        .ok_or_else(|| BenchError::UnknownCell(describe()))?;
    if replicate >= cfg.repetitions {
        return Err(BenchError::UnknownCell(describe()));
    }
    Ok(CellId {
        mechanism,
        prior,
        size,
        replicate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub workers: usize,
    /// Keep likelihood traces for every replicate rather than replicate 0 only.
    pub full_traces: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            full_traces: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    /// Successful cells in canonical grid order.
    pub records: Vec<ExperimentRecord>,
    pub failures: Vec<CellFailure>,
}

/// Runs every cell of the grid on a pool of `options.workers` threads.
pub fn run_suite(cfg: &ExperimentConfig, options: SuiteOptions) -> Result<SuiteOutcome> {
    let prepared = Prepared::new(cfg)?;
    let cells = grid(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()?;
    let results: Vec<std::result::Result<ExperimentRecord, CellFailure>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&cell| match run_cell(cfg, &prepared, cell) {
                Ok(out) => {
                    let mut record = out.record;
                    if !options.full_traces && cell.replicate != 0 {
                        record.likelihood_trace = None;
                    }
                    Ok(record)
                }
                Err(err) => Err(CellFailure {
                    cell: CellLabel::of(cfg, cell),
                    reason: err.to_string(),
                }),
            })
            .collect()
    });
    let mut outcome = SuiteOutcome {
        records: Vec::with_capacity(results.len()),
        failures: Vec::new(),
    };
    for r in results {
        match r {
            Ok(rec) => outcome.records.push(rec),
            Err(f) => outcome.failures.push(f),
        }
    }
    Ok(outcome)
}
