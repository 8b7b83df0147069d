//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Thresholds are fixed here and never tuned per run.

use std::f64::consts::LN_2;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use geoldp::channel::{tightest_d_privacy_epsilon, tightest_ldp_epsilon, LineMetric};
use geoldp::distribution::l1_distance;
use geoldp::estimator::{ibu_run, inversion_estimate, invert_channel};
use geoldp::linalg::SquareMatrix;
use geoldp::metrics::{kantorovich_1d, kantorovich_lp};
use geoldp::rng::{stream, Purpose};
use geoldp::sampling::{draw_samples, empirical, k_point_prior};
use geoldp::{build_krr, build_truncated_geometric, Distribution, PrivacyLevel};
use geoldp_bench::{mean_ratios, run_suite, summarize, ExperimentConfig, SuiteOptions};

const ACCEPTANCE_SEED: u64 = 0x5EED_2019;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn within(elapsed: Duration, limit: Duration, checks: &mut Vec<(bool, String)>) {
    checks.push((
        elapsed <= limit,
        format!("runtime {:.2}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()),
    ));
}

fn fold(checks: Vec<(bool, String)>) -> Verdict {
    let passed = checks.iter().all(|(ok, _)| *ok);
    let detail = checks
        .into_iter()
        .map(|(ok, msg)| format!("{}{}", if ok { "" } else { "[x] " }, msg))
        .collect::<Vec<_>>()
        .join("; ");
    Verdict::new(passed, detail)
}

fn geometric_100() -> geoldp::Channel {
    build_truncated_geometric(100, PrivacyLevel::new(LN_2 / 10.0).unwrap()).unwrap()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let g = geometric_100();
    let ratio = g.entry(50, 50) / g.entry(50, 60);
    let eps = tightest_d_privacy_epsilon(&g, &LineMetric::UNIT).unwrap();
    let mut checks = vec![
        ((ratio - 2.0).abs() <= 1e-9, format!("G[50][50]/G[50][60] = {ratio:.15}")),
        (
            (eps - LN_2 / 10.0).abs() <= 1e-12,
            format!("tightest d-privacy eps - ln2/10 = {:.3e}", eps - LN_2 / 10.0),
        ),
    ];
    within(start.elapsed(), Duration::from_secs(1), &mut checks);
    fold(checks)
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let krr = build_krr(101, PrivacyLevel::new(LN_2).unwrap()).unwrap();
    let krr_eps = tightest_ldp_epsilon(&krr);
    let geo_eps = tightest_ldp_epsilon(&geometric_100());
    let mut checks = vec![
        (
            (krr_eps - LN_2).abs() <= 1e-12,
            format!("kRR(101, ln2) ldp eps - ln2 = {:.3e}", krr_eps - LN_2),
        ),
        (
            (geo_eps - 10.0 * LN_2).abs() <= 1e-9,
            format!("geometric(100, ln2/10) ldp eps - 10 ln2 = {:.3e}", geo_eps - 10.0 * LN_2),
        ),
    ];
    within(start.elapsed(), Duration::from_secs(1), &mut checks);
    fold(checks)
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let g = geometric_100();
    let inverse = invert_channel(&g).unwrap();
    let forward = SquareMatrix::from_row_major(101, g.as_slice().to_vec()).unwrap();
    let residual = forward.matmul(&inverse).unwrap().identity_residual();

    let uniform = Distribution::uniform(100).unwrap();
    let mut prior_rng = stream(ACCEPTANCE_SEED, 3, 0, Purpose::Prior);
    let (mut worst_inv, mut worst_ibu, mut worst_gap_ll) = (0.0_f64, 0.0_f64, 0.0_f64);
    let (mut admissible, mut worst_cross) = (0usize, 0.0_f64);
    for trial in 0..50u64 {
        // Uniform draw from the simplex: full support almost surely.
        let pi = k_point_prior(100, 101, &mut prior_rng).unwrap();
        let q = Distribution::new(g.push_forward(&pi).unwrap()).unwrap();
        let inv = inversion_estimate(&g, &q).unwrap();
        worst_inv = worst_inv.max(
            inv.distribution()
                .map_or(f64::INFINITY, |r| l1_distance(r.weights(), pi.weights())),
        );
        let ibu = ibu_run(&g, &q, &uniform, 5000, 0.0).unwrap();
        worst_ibu = worst_ibu.max(l1_distance(ibu.estimate.weights(), pi.weights()));
        let best = geoldp::log_likelihood(&pi, &g, &q).unwrap();
        worst_gap_ll = worst_gap_ll.max(best - ibu.final_log_likelihood());

        // Sampled reports: compare only when the inverse image is admissible.
        let mut rng = stream(ACCEPTANCE_SEED, 3, trial, Purpose::Samples);
        let clean = draw_samples(&pi, 100_000, &mut rng).unwrap();
        let mut noise = stream(ACCEPTANCE_SEED, 3, trial, Purpose::Noise);
        let reports: Vec<usize> = clean
            .values()
            .iter()
            .map(|&x| g.apply(x, &mut noise).unwrap())
            .collect();
        let q_hat = empirical(&geoldp::sampling::SampleSet::new(100, reports).unwrap()).unwrap();
        if let Some(r) = inversion_estimate(&g, &q_hat).unwrap().distribution() {
            admissible += 1;
            let limit = ibu_run(&g, &q_hat, &uniform, 5000, 0.0).unwrap();
            worst_cross = worst_cross.max(l1_distance(r.weights(), limit.estimate.weights()));
        }
    }
    let mut checks = vec![
        (residual <= 1e-8, format!("|G G^-1 - I|max = {residual:.3e}")),
        (worst_inv <= 1e-8, format!("inversion worst L1 = {worst_inv:.3e}")),
        (
            worst_ibu <= 1e-6,
            format!(
                "IBU(5000) worst L1 = {worst_ibu:.3e} (log-likelihood gap to pi {worst_gap_ll:.3e})"
            ),
        ),
        (
            worst_cross <= 1e-4,
            format!("sampled q: {admissible}/50 admissible, worst inversion-vs-IBU L1 = {worst_cross:.3e}"),
        ),
    ];
    within(start.elapsed(), Duration::from_secs(60), &mut checks);
    fold(checks)
}

fn improvement_by(trace: &[f64], step: usize) -> f64 {
    let total = trace[trace.len() - 1] - trace[0];
    (trace[step] - trace[0]) / total
}

fn criteria_4_and_5() -> (Verdict, Verdict) {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        master_seed: ACCEPTANCE_SEED,
        ..ExperimentConfig::default()
    };
    let outcome = run_suite(
        &cfg,
        SuiteOptions {
            workers: 1,
            full_traces: true,
        },
    )
    .unwrap();
    let suite_time = start.elapsed();

    // Criterion 4
    let mut worst_drop = 0.0_f64;
    for r in &outcome.records {
        let trace = r.likelihood_trace.as_ref().unwrap();
        for w in trace.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
    }
    let find = |mech: &str| {
        outcome
            .records
            .iter()
            .find(|r| {
                r.cell.mechanism == mech
                    && r.cell.prior == "binomial"
                    && r.cell.sample_size == 100_000
                    && r.cell.replicate == 0
            })
            .unwrap()
    };
    let geo = improvement_by(find("geometric").likelihood_trace.as_ref().unwrap(), 50);
    let krr = improvement_by(find("krr").likelihood_trace.as_ref().unwrap(), 50);
    let mut c4 = vec![
        (
            outcome.failures.is_empty() && outcome.records.len() == 320,
            format!("{} cells, {} failures", outcome.records.len(), outcome.failures.len()),
        ),
        (worst_drop <= 1e-9, format!("largest per-step decrease {worst_drop:.3e}")),
        (geo >= 0.99, format!("geometric share of gain by step 50 = {geo:.5}")),
        (krr < 0.99, format!("kRR share of gain by step 50 = {krr:.5}")),
    ];
    within(suite_time, Duration::from_secs(300), &mut c4);

    // Criterion 5
    let summary = summarize(&outcome.records);
    let ratio = mean_ratios(&summary, "geometric", "krr")
        .into_iter()
        .find(|r| r.prior == "binomial" && r.sample_size == 100_000)
        .unwrap()
        .ratio;
    let mut c5 = vec![
        (ratio >= 2.0, format!("binomial N=100000 mean kRR / mean geometric = {ratio:.3}")),
        (
            summary.iter().all(|s| s.mean >= 0.0 && s.min <= s.mean && s.mean <= s.max),
            "min <= mean <= max in every group".to_string(),
        ),
        (
            outcome
                .records
                .iter()
                .all(|r| r.kantorovich_estimate.is_finite() && r.final_log_likelihood.is_finite()),
            "finite distances and likelihoods".to_string(),
        ),
    ];
    within(suite_time, Duration::from_secs(30 * 60), &mut c5);

    let slice_start = Instant::now();
    let slice_cfg = ExperimentConfig {
        priors: vec![cfg.priors[0].clone()],
        sample_sizes: vec![100_000],
        ..cfg.clone()
    };
    let slice = run_suite(&slice_cfg, SuiteOptions::default()).unwrap();
    let slice_time = slice_start.elapsed();
    let matches = slice.records.iter().all(|s| {
        outcome
            .records
            .iter()
            .any(|r| r.cell == s.cell && r.kantorovich_estimate == s.kantorovich_estimate)
    });
    c5.push((
        slice.records.len() == 40 && matches,
        format!("acceptance slice: {} cells, identical to full-suite cells", slice.records.len()),
    ));
    c5.push((
        slice_time <= Duration::from_secs(600),
        format!("slice runtime {:.2}s (limit 600s)", slice_time.as_secs_f64()),
    ));
    (fold(c4), fold(c5))
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let mut rng = stream(ACCEPTANCE_SEED, 6, 0, Purpose::Other(6));
    use rand::Rng;
    let random_dist = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        Distribution::normalized((0..=n).map(|_| rng.random::<f64>()).collect()).unwrap()
    };
    let mut worst_oracle = 0.0_f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let (a, b) = (random_dist(n, &mut rng), random_dist(n, &mut rng));
        let closed = kantorovich_1d(&a, &b).unwrap();
        let lp = kantorovich_lp(&a, &b, &LineMetric::UNIT).unwrap();
        worst_oracle = worst_oracle.max((closed - lp).abs());
    }
    let (mut worst_sym, mut worst_tri) = (0.0_f64, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let (x, y, z) = (
            random_dist(n, &mut rng),
            random_dist(n, &mut rng),
            random_dist(n, &mut rng),
        );
        let xy = kantorovich_1d(&x, &y).unwrap();
        worst_sym = worst_sym.max((xy - kantorovich_1d(&y, &x).unwrap()).abs());
        let via = kantorovich_1d(&x, &z).unwrap() + kantorovich_1d(&z, &y).unwrap();
        worst_tri = worst_tri.max(xy - via);
    }
    let mut checks = vec![
        (worst_oracle <= 1e-9, format!("closed form vs transport worst gap {worst_oracle:.3e}")),
        (worst_sym <= 1e-9, format!("symmetry worst gap {worst_sym:.3e}")),
        (worst_tri <= 1e-9, format!("triangle worst excess {worst_tri:.3e}")),
    ];
    within(start.elapsed(), Duration::from_secs(10), &mut checks);
    fold(checks)
}

fn run_cli(out: &Path, workers: usize) -> Duration {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_geoldp"))
        .args(["--seed", &ACCEPTANCE_SEED.to_string(), "--workers", &workers.to_string()])
        .arg("--out")
        .arg(out)
        .arg("run")
        .stdout(std::process::Stdio::null())
        .status()
        .expect("spawn geoldp");
    assert!(status.success(), "geoldp run failed");
    start.elapsed()
}

fn criterion_7() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let (one, eight) = (dir.path().join("w1"), dir.path().join("w8"));
    let t1 = run_cli(&one, 1);
    let t8 = run_cli(&eight, 8);
    let same = |file: &str| {
        let a = std::fs::read(one.join(file)).unwrap();
        let b = std::fs::read(eight.join(file)).unwrap();
        !a.is_empty() && a == b
    };
    fold(vec![
        (same("records.csv"), "records.csv identical (workers 1 vs 8)".to_string()),
        (same("summary.csv"), "summary.csv identical (workers 1 vs 8)".to_string()),
        (
            t1.max(t8) <= Duration::from_secs(30 * 60),
            format!("runtimes {:.1}s / {:.1}s", t1.as_secs_f64(), t8.as_secs_f64()),
        ),
    ])
}

fn main() {
    let (c4, c5) = criteria_4_and_5();
    let verdicts = [
        ("1 calibration", criterion_1()),
        ("2 privacy verifiers", criterion_2()),
        ("3 inversion oracle", criterion_3()),
        ("4 EM monotonicity", c4),
        ("5 utility ordering", c5),
        ("6 Kantorovich oracle", criterion_6()),
        ("7 determinism", criterion_7()),
    ];
    let mut failed = 0;
    for (name, v) in &verdicts {
        println!(
            "criterion {name:<22} {}  {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {} failed", verdicts.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
