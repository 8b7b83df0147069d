//! Summaries, mechanism profiles, and the on-disk output formats.
//!
//! All CSV files are comma-separated with a header row and LF line endings.
//! Reals are written in scientific notation with 17 significant digits.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{BenchError, Result};
use crate::harness::{CellFailure, CellLabel, ExperimentRecord, SuiteOutcome};

pub const RECORDS_HEADER: [&str; 8] = [
    "mechanism",
    "prior",
    "sample_size",
    "replicate",
    "kantorovich_estimate",
    "kantorovich_noisy",
    "final_log_likelihood",
    "wall_time_s",
];

pub const SUMMARY_HEADER: [&str; 7] = ["mechanism", "prior", "sample_size", "mean", "std", "min", "max"];

/// 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub mechanism: String,
    pub prior: String,
    pub sample_size: usize,
    pub replicates: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single replicate.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean ratio `versus / baseline` for one (prior, sample size) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub prior: String,
    pub sample_size: usize,
    pub numerator: String,
    pub denominator: String,
    pub ratio: f64,
}

/// Statistics of `kantorovich_estimate` per (mechanism, prior, size), in
/// order of first appearance.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, String, usize)> = Vec::new();
    let mut groups: BTreeMap<(String, String, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        let key = (r.cell.mechanism.clone(), r.cell.prior.clone(), r.cell.sample_size);
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r.kantorovich_estimate);
    }
    order
        .into_iter()
        .map(|key| {
            let values = &groups[&key];
            let count = values.len() as f64;
            let mean = values.iter().sum::<f64>() / count;
            let std = if values.len() > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                mechanism: key.0,
                prior: key.1,
                sample_size: key.2,
                replicates: values.len(),
                mean,
                std,
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

/// `mean(versus) / mean(baseline)` for every (prior, size) where both appear.
pub fn mean_ratios(summary: &[SummaryRow], baseline: &str, versus: &str) -> Vec<RatioRow> {
    summary
        .iter()
        .filter(|row| row.mechanism == baseline)
        .filter_map(|base| {
            summary
                .iter()
                .find(|o| {
                    o.mechanism == versus && o.prior == base.prior && o.sample_size == base.sample_size
                })
                .map(|other| RatioRow {
                    prior: base.prior.clone(),
                    sample_size: base.sample_size,
                    numerator: versus.to_string(),
                    denominator: baseline.to_string(),
                    ratio: other.mean / base.mean,
                })
        })
        .collect()
}

/// `P[output = j | true = x]` for every `j`.
pub fn mechanism_profile(cfg: &ExperimentConfig, mechanism: usize, x: usize) -> Result<Vec<(usize, f64)>> {
    if x > cfg.n {
        return Err(geoldp::Error::OutOfDomain { value: x, n: cfg.n }.into());
    }
    let spec = cfg
        .mechanisms
        .get(mechanism)
        .ok_or_else(|| BenchError::UnknownCell(format!("mechanism #{mechanism}")))?;
    let channel = spec.build(cfg.n)?;
    Ok(channel.row(x).iter().copied().enumerate().collect())
}

pub fn write_profile(path: &Path, profile: &[(usize, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["output_value", "probability"])?;
    for (j, p) in profile {
        w.write_record([j.to_string(), fmt_real(*p)])?;
    }
    w.flush()?;
    Ok(())
}

/// `wall_time_s` is left empty unless `with_wall_time`, which keeps the file
/// reproducible byte-for-byte.
pub fn write_records(path: &Path, records: &[ExperimentRecord], with_wall_time: bool) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        w.write_record([
            r.cell.mechanism.clone(),
            r.cell.prior.clone(),
            r.cell.sample_size.to_string(),
            r.cell.replicate.to_string(),
            fmt_real(r.kantorovich_estimate),
            fmt_real(r.kantorovich_noisy),
            fmt_real(r.final_log_likelihood),
            if with_wall_time { fmt_real(r.wall_time_s) } else { String::new() },
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != RECORDS_HEADER {
        return Err(BenchError::Records(format!("unexpected header {header:?}")));
    }
    let real = |s: &str, line: usize| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| BenchError::Records(format!("line {line}: bad number '{s}'")))
    };
    let int = |s: &str, line: usize| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| BenchError::Records(format!("line {line}: bad integer '{s}'")))
    };
    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let row = row?;
        let line = idx + 2;
        records.push(ExperimentRecord {
            cell: CellLabel {
                mechanism: row[0].to_string(),
                prior: row[1].to_string(),
                sample_size: int(&row[2], line)?,
                replicate: int(&row[3], line)?,
            },
            kantorovich_estimate: real(&row[4], line)?,
            kantorovich_noisy: real(&row[5], line)?,
            final_log_likelihood: real(&row[6], line)?,
            iterations_run: 0,
            likelihood_trace: None,
            wall_time_s: if row[7].is_empty() { f64::NAN } else { real(&row[7], line)? },
        });
    }
    Ok(records)
}

pub fn write_summary(path: &Path, summary: &[SummaryRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for s in summary {
        w.write_record([
            s.mechanism.clone(),
            s.prior.clone(),
            s.sample_size.to_string(),
            fmt_real(s.mean),
            fmt_real(s.std),
            fmt_real(s.min),
            fmt_real(s.max),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ratios(path: &Path, ratios: &[RatioRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["prior", "sample_size", "numerator", "denominator", "ratio"])?;
    for r in ratios {
        w.write_record([
            r.prior.clone(),
            r.sample_size.to_string(),
            r.numerator.clone(),
            r.denominator.clone(),
            fmt_real(r.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(path: &Path, trace: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["iteration", "log_likelihood"])?;
    for (i, v) in trace.iter().enumerate() {
        w.write_record([i.to_string(), fmt_real(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_failures(path: &Path, failures: &[CellFailure]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["mechanism", "prior", "sample_size", "replicate", "reason"])?;
    for f in failures {
        w.write_record([
            f.cell.mechanism.clone(),
            f.cell.prior.clone(),
            f.cell.sample_size.to_string(),
            f.cell.replicate.to_string(),
            f.reason.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["mechanism", "prior", "sample_size", "replicate", "wall_time_s"])?;
    for r in records {
        w.write_record([
            r.cell.mechanism.clone(),
            r.cell.prior.clone(),
            r.cell.sample_size.to_string(),
            r.cell.replicate.to_string(),
            fmt_real(r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ResolvedMechanism<'a> {
    name: &'a str,
    kind: crate::config::MechanismKind,
    epsilon: Option<f64>,
    alphabet_size: usize,
}

#[derive(Debug, Serialize)]
struct StreamDerivation {
    generator: &'static str,
    seed: &'static str,
    purpose_tags: BTreeMap<&'static str, u64>,
    prior_cell: &'static str,
    samples_cell: &'static str,
    noise_cell: &'static str,
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    format_version: u32,
    config: &'a ExperimentConfig,
    resolved_mechanisms: Vec<ResolvedMechanism<'a>>,
    ibu_init: &'static str,
    ibu_tolerance: f64,
    full_traces: bool,
    stream_derivation: StreamDerivation,
    records: usize,
    failures: usize,
}

pub fn write_meta(path: &Path, cfg: &ExperimentConfig, outcome: &SuiteOutcome, full_traces: bool) -> Result<()> {
    use geoldp::rng::Purpose;
    let resolved_mechanisms = cfg
        .mechanisms
        .iter()
        .map(|m| {
            Ok(ResolvedMechanism {
                name: &m.name,
                kind: m.kind,
                epsilon: m.level()?.map(|l| l.epsilon()),
                alphabet_size: cfg.n + 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = Meta {
        format_version: 1,
        config: cfg,
        resolved_mechanisms,
        ibu_init: "uniform",
        ibu_tolerance: 0.0,
        full_traces,
        stream_derivation: StreamDerivation {
            generator: "ChaCha8",
            seed: "SHA-256(\"geoldp/stream/v1\" || master_seed || cell || replicate || purpose), u64 little-endian",
            purpose_tags: BTreeMap::from([
                ("prior", Purpose::Prior.tag()),
                ("samples", Purpose::Samples.tag()),
                ("noise", Purpose::Noise.tag()),
            ]),
            prior_cell: "prior_index; replicate = 0 unless redraw_prior",
            samples_cell: "prior_index << 32 | sample_size",
            noise_cell: "mechanism_index << 48 | prior_index << 32 | sample_size",
        },
        records: outcome.records.len(),
        failures: outcome.failures.len(),
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn trace_path(dir: &Path, cell: &CellLabel) -> PathBuf {
    dir.join(format!("trace_{}.csv", cell.slug()))
}

/// Writes every artifact of a suite run into `dir`.
pub fn write_suite(
    dir: &Path,
    cfg: &ExperimentConfig,
    outcome: &SuiteOutcome,
    full_traces: bool,
    with_wall_time: bool,
) -> Result<Vec<SummaryRow>> {
    fs::create_dir_all(dir)?;
    write_records(&dir.join("records.csv"), &outcome.records, with_wall_time)?;
    let summary = summarize(&outcome.records);
    write_summary(&dir.join("summary.csv"), &summary)?;
    write_ratios(&dir.join("ratios.csv"), &mean_ratios(&summary, "geometric", "krr"))?;
    write_failures(&dir.join("failures.csv"), &outcome.failures)?;
    write_timings(&dir.join("timings.csv"), &outcome.records)?;
    for r in &outcome.records {
        if let Some(trace) = &r.likelihood_trace {
            write_trace(&trace_path(dir, &r.cell), trace)?;
        }
    }
    write_meta(&dir.join("meta.json"), cfg, outcome, full_traces)?;
    Ok(summary)
}
