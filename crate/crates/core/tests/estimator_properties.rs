use geoldp::channel::{build_krr, build_truncated_geometric, PrivacyLevel};
use geoldp::distribution::l1_distance;
use geoldp::estimator::{ibu_run, ibu_step, inversion_estimate, log_likelihood, InversionOutcome};
use geoldp::{Channel, Distribution};
use proptest::collection::vec;
use proptest::prelude::*;

fn channel(kind: bool, n: usize, eps: f64) -> Channel {
    let level = PrivacyLevel::new(eps).unwrap();
    if kind {
        build_truncated_geometric(n, level).unwrap()
    } else {
        build_krr(n + 1, level).unwrap()
    }
}

/// Strictly positive raw weights, normalized.
fn positive(raw: &[f64]) -> Distribution {
    Distribution::normalized(raw.iter().map(|v| v + 1e-3).collect()).unwrap()
}

/// Non-negative weights that may have holes; at least one entry survives.
fn sparse(raw: &[f64]) -> Distribution {
    let mut w: Vec<f64> = raw.iter().map(|v| if *v < 0.3 { 0.0 } else { *v }).collect();
    if w.iter().all(|v| *v == 0.0) {
        w[0] = 1.0;
    }
    Distribution::normalized(w).unwrap()
}

fn permute(w: &[f64], perm: &[usize]) -> Vec<f64> {
    perm.iter().map(|&i| w[i]).collect()
}

fn domain() -> impl Strategy<Value = (bool, f64, Vec<f64>, Vec<f64>)> {
    (2usize..15).prop_flat_map(|size| {
        (
            any::<bool>(),
            0.05f64..2.5,
            vec(0.0f64..1.0, size),
            vec(0.0f64..1.0, size),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn step_yields_distribution_and_never_lowers_likelihood(
        (kind, eps, p_raw, q_raw) in domain()
    ) {
        let n = p_raw.len() - 1;
        let ch = channel(kind, n, eps);
        let p = positive(&p_raw);
        let q = sparse(&q_raw);
        let next = ibu_step(&ch, &q, &p).unwrap();
        prop_assert!(next.weights().iter().all(|v| *v >= 0.0));
        prop_assert!((next.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let before = log_likelihood(&p, &ch, &q).unwrap();
        let after = log_likelihood(&next, &ch, &q).unwrap();
        prop_assert!(after >= before - 1e-9, "{} -> {}", before, after);
    }

    #[test]
    fn realizable_reports_are_fixed_points((kind, eps, p_raw, _q) in domain()) {
        let n = p_raw.len() - 1;
        let ch = channel(kind, n, eps);
        let p = positive(&p_raw);
        let q = Distribution::new(ch.push_forward(&p).unwrap()).unwrap();
        let next = ibu_step(&ch, &q, &p).unwrap();
        for (a, b) in next.weights().iter().zip(p.weights()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn run_trace_is_monotone((kind, eps, p_raw, q_raw) in domain()) {
        let n = p_raw.len() - 1;
        let ch = channel(kind, n, eps);
        let q = sparse(&q_raw);
        let init = positive(&p_raw);
        let r = ibu_run(&ch, &q, &init, 300, 0.0).unwrap();
        for w in r.likelihood_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn permutation_equivariance(
        (kind, eps, p_raw, q_raw) in domain(),
        seed in any::<u64>(),
    ) {
        let n = p_raw.len() - 1;
        let size = n + 1;
        let ch = channel(kind, n, eps);
        // Fisher-Yates driven by a simple LCG so the permutation is a pure function of seed.
        let mut perm: Vec<usize> = (0..size).collect();
        let mut state = seed | 1;
        for i in (1..size).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let rows: Vec<Vec<f64>> = perm
            .iter()
            .map(|&i| permute(ch.row(i), &perm))
            .collect();
        let relabeled = Channel::custom(rows).unwrap();
        let q = sparse(&q_raw);
        let init = positive(&p_raw);
        let base = ibu_run(&ch, &q, &init, 200, 0.0).unwrap();
        let q_p = Distribution::new(permute(q.weights(), &perm)).unwrap();
        let init_p = Distribution::new(permute(init.weights(), &perm)).unwrap();
        let moved = ibu_run(&relabeled, &q_p, &init_p, 200, 0.0).unwrap();
        let expected = permute(base.estimate.weights(), &perm);
        prop_assert!(l1_distance(moved.estimate.weights(), &expected) < 1e-10);
    }
}

#[test]
fn inversion_agrees_with_ibu_limit_when_admissible() {
    let ch = build_truncated_geometric(3, PrivacyLevel::new(0.8).unwrap()).unwrap();
    let pi = Distribution::new(vec![0.3, 0.2, 0.25, 0.25]).unwrap();
    let image = ch.push_forward(&pi).unwrap();
    // Perturb the exact image slightly, staying inside the admissible region.
    let q = Distribution::normalized(
        image
            .iter()
            .enumerate()
            .map(|(i, v)| v * (1.0 + 0.01 * (i as f64 - 1.5)))
            .collect(),
    )
    .unwrap();
    let inv = inversion_estimate(&ch, &q).unwrap();
    let InversionOutcome::Distribution(r) = inv else {
        panic!("perturbed image should stay admissible");
    };
    let limit = ibu_run(&ch, &q, &Distribution::uniform(3).unwrap(), 5000, 0.0).unwrap();
    assert!(l1_distance(r.weights(), limit.estimate.weights()) < 1e-4);
}
