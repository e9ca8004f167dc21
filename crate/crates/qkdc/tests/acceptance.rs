//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p qkdc --test acceptance`.

#[path = "common/fock.rs"]
mod fock;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qkdc::bounds::{
    c_eps, chebyshev_dh_bound, dephasing_boundary, erasure_boundary, erasure_epsilon, inv_gaussian_cdf,
    meta_converse_point,
};
use qkdc::divergences::{hypothesis_test_divergence, hypothesis_test_divergence_classical_iid, sandwiched_renyi};
use qkdc::gaussian::{asymptotic_bound, channel_rel_entropy_and_variance, family_variance, finite_n_bound, BosonicChannelParams};
use qkdc::privstate::{approximate_private_state, privacy_test, projector_overlap, PrivateState};
use qkdc::qcore::linalg::{random_density_mat, random_unitary, real_diag};
use qkdc::qcore::{apply_channel, maximally_entangled, random_state, sample_separable, trace_distance};
use qkdc::simulate::{make_channel, teleport_simulate, weyl_covariance, ChannelFamily};
use qkdc::{CMat, DensityOperator, QuantumChannel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn with_budget(o: Outcome, elapsed: Duration, budget: Option<Duration>) -> Outcome {
    match budget {
        Some(b) if elapsed > b => outcome(false, format!("{}; runtime {:.2?} exceeds {:?}", o.detail, elapsed, b)),
        _ => o,
    }
}

fn log_grid(lo: f64, hi: f64, steps: usize) -> Vec<u64> {
    let mut v: Vec<u64> = (0..steps)
        .map(|i| (lo * (hi / lo).powf(i as f64 / (steps - 1) as f64)).round() as u64)
        .collect();
    v.dedup();
    v
}

fn random_commuting_qubit_pair(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, DensityOperator, DensityOperator) {
    let draw = |rng: &mut ChaCha8Rng| {
        // Occasionally rank-deficient to exercise the support handling.
        let x: f64 = if rng.random_bool(0.1) { if rng.random_bool(0.5) { 0.0 } else { 1.0 } } else { rng.random() };
        vec![x, 1.0 - x]
    };
    let p = draw(rng);
    let mut q = draw(rng);
    if q.iter().all(|&x| x == 0.0) || (p[0] > 0.0 && q[0] == 0.0 && p[1] > 0.0 && q[1] == 0.0) {
        q = vec![0.5, 0.5];
    }
    let u = random_unitary(2, rng);
    let rot = |d: &[f64]| {
        let m = &u * real_diag(d) * u.adjoint();
        DensityOperator::new(m, vec![2]).unwrap()
    };
    let (rho, sigma) = (rot(&p), rot(&q));
    (p, q, rho, sigma)
}

fn random_channel(d: usize, kraus: usize, rng: &mut ChaCha8Rng) -> QuantumChannel {
    let u = random_unitary(d * kraus, rng);
    let ks: Vec<CMat> = (0..kraus).map(|i| u.view((i * d, 0), (d, d)).into_owned()).collect();
    QuantumChannel::new(ks, d, d).unwrap()
}

fn random_full_state(d: usize, rng: &mut ChaCha8Rng) -> DensityOperator {
    DensityOperator::new(random_density_mat(d, rng), vec![d]).unwrap()
}

/// Dephasing boundary against the exact hypothesis-testing rate of the
/// dephased maximally entangled state versus its classical part.
fn criterion_1() -> Outcome {
    let (gamma, eps) = (0.1, 0.05);
    let (p, q) = ([1.0 - gamma, gamma], [0.5, 0.5]);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for n in [200u64, 500, 1000] {
        let exact = hypothesis_test_divergence_classical_iid(&p, &q, eps, n).unwrap() / n as f64;
        let boundary = dephasing_boundary(gamma, n, eps).unwrap().value_bits;
        let scaled = (boundary - exact).abs() * n as f64;
        worst = worst.max(scaled);
        pass &= scaled <= 2.0;
    }
    outcome(pass, format!("max n*|gap| = {worst:.4} (limit 2)"))
}

fn criterion_2() -> Outcome {
    let mut residual: f64 = 0.0;
    let mut points = 0;
    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for n in [10u64, 30, 100, 300, 1000] {
            for eps in [0.01, 0.1] {
                let r = erasure_boundary(p, n, eps).unwrap();
                residual = residual.max((erasure_epsilon(p, n, r.value_bits) - eps).abs());
                points += 1;
            }
        }
    }
    let mut worst_gap: f64 = 0.0;
    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for n in [100u64, 300, 1000, 3000, 10_000] {
            for eps in [0.01, 0.05, 0.1, 0.25] {
                let r = erasure_boundary(p, n, eps).unwrap();
                let expansion = 1.0 - p + (p * (1.0 - p) / n as f64).sqrt() * inv_gaussian_cdf(eps).unwrap();
                worst_gap = worst_gap.max((r.value_bits - expansion).abs() * n as f64);
            }
        }
    }
    let pass = points == 50 && residual <= 1e-10 && worst_gap <= 5.0;
    outcome(pass, format!("{points} points, max residual {residual:.2e} (limit 1e-10); max n*|gap| = {worst_gap:.4} (limit 5)"))
}

fn criterion_3() -> Outcome {
    let shield_dims = (2usize, 2usize);
    let states = 10_000u64;
    let twists = 10u64;
    let mut separable_excess: f64 = f64::NEG_INFINITY;
    let mut approx_slack: f64 = f64::INFINITY;
    for k in [2usize, 3, 4] {
        let shield = random_state(vec![shield_dims.0, shield_dims.1], 1000 + k as u64).unwrap();
        let projectors: Vec<CMat> = (0..twists)
            .map(|t| PrivateState::random_twist(k, shield.clone(), 100 * k as u64 + t).unwrap().privacy_projector())
            .collect();
        let excess = (0..states)
            .into_par_iter()
            .map(|s| {
                let seed = (k as u64) << 32 | s;
                let terms = 1 + (s % 6) as usize;
                let sep = sample_separable(k * shield_dims.0, k * shield_dims.1, terms, seed)
                    .unwrap()
                    .regroup(vec![k, shield_dims.0, k, shield_dims.1])
                    .unwrap()
                    .permute(&[0, 2, 1, 3])
                    .unwrap();
                projectors.iter().map(|pi| projector_overlap(pi, sep.matrix())).fold(f64::NEG_INFINITY, f64::max)
                    - 1.0 / k as f64
            })
            .reduce(|| f64::NEG_INFINITY, f64::max);
        separable_excess = separable_excess.max(excess);

        let slack = (0..200u64)
            .into_par_iter()
            .map(|s| {
                let seed = 7_000_000 + ((k as u64) << 20) + s;
                let gamma = PrivateState::random_twist(k, random_state(vec![2, 2], seed).unwrap(), seed).unwrap();
                let junk = random_state(gamma.dims(), seed + 1).unwrap();
                let eps = [0.01, 0.05, 0.1, 0.2][(s % 4) as usize];
                let (rho, _) = approximate_private_state(&gamma, &junk, eps).unwrap();
                privacy_test(&gamma, &rho).unwrap() - (1.0 - eps)
            })
            .reduce(|| f64::INFINITY, f64::min);
        approx_slack = approx_slack.min(slack);
    }
    let pass = separable_excess <= 1e-9 && approx_slack >= -1e-9;
    outcome(
        pass,
        format!("max Tr(Pi sigma) - 1/K = {separable_excess:.3e} (limit 1e-9); min pass - (1-eps) = {approx_slack:.3e} (limit -1e-9)"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut np_err: f64 = 0.0;
    for _ in 0..1000 {
        let (p, q, rho, sigma) = random_commuting_qubit_pair(&mut rng);
        let eps: f64 = rng.random_range(0.01..0.99);
        let quantum = hypothesis_test_divergence(&rho, &sigma, eps).unwrap().value;
        let classical = hypothesis_test_divergence_classical_iid(&p, &q, eps, 1).unwrap();
        let err = if quantum.is_infinite() && classical.is_infinite() { 0.0 } else { (quantum - classical).abs() };
        np_err = np_err.max(err);
    }
    let mut dpi_violation: f64 = f64::NEG_INFINITY;
    for _ in 0..100 {
        let rho = random_full_state(2, &mut rng);
        let sigma = random_full_state(2, &mut rng);
        let ch = random_channel(2, 2, &mut rng);
        let eps: f64 = rng.random_range(0.01..0.99);
        let before = hypothesis_test_divergence(&rho, &sigma, eps).unwrap().value;
        let after = hypothesis_test_divergence(&apply_channel(&ch, &rho, 0).unwrap(), &apply_channel(&ch, &sigma, 0).unwrap(), eps)
            .unwrap()
            .value;
        dpi_violation = dpi_violation.max(after - before);
    }
    let pass = np_err <= 1e-10 && dpi_violation <= 1e-8;
    outcome(pass, format!("max |quantum - classical| = {np_err:.2e} (limit 1e-10); max DPI violation = {dpi_violation:.2e} (limit 1e-8)"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut min_slack = f64::INFINITY;
    for i in 0..1000 {
        let d = 2 + i % 2;
        let rho = random_full_state(d, &mut rng);
        let sigma = random_full_state(d, &mut rng);
        let eps: f64 = rng.random_range(0.01..0.99);
        let alpha: f64 = rng.random_range(1.01..5.0);
        let dh = hypothesis_test_divergence(&rho, &sigma, eps).unwrap().value;
        let renyi = sandwiched_renyi(&rho, &sigma, alpha).unwrap();
        let rhs = renyi + alpha / (alpha - 1.0) * (1.0 / (1.0 - eps)).log2();
        min_slack = min_slack.min(rhs - dh);
    }
    outcome(min_slack >= -1e-9, format!("min slack = {min_slack:.3e} (limit -1e-9)"))
}

/// Commuting pairs with at most two distinct likelihood ratios, so the exact
/// computation scales to n = 10^4.
const PAIRS: [(&[f64], &[f64]); 3] = [
    (&[0.9, 0.1], &[0.5, 0.5]),
    (&[0.7, 0.3], &[0.4, 0.6]),
    (&[0.4, 0.4, 0.2, 0.0], &[0.25, 0.25, 0.25, 0.25]),
];

fn moments(p: &[f64], q: &[f64]) -> (f64, f64) {
    let d: f64 = p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).log2()).sum();
    let v: f64 = p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * ((a / b).log2() - d).powi(2)).sum();
    (d, v)
}

fn criterion_6() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (p, q) in PAIRS {
        let (d, v) = moments(p, q);
        for n in log_grid(10.0, 1e4, 25) {
            for eps in [0.05, 0.25, 0.5, 0.75] {
                let exact = hypothesis_test_divergence_classical_iid(p, q, eps, n).unwrap();
                let nf = n as f64;
                let expansion = nf * d + (nf * v).sqrt() * inv_gaussian_cdf(eps).unwrap();
                worst = worst.max((exact - expansion).abs() / nf.log2());
            }
        }
    }
    outcome(worst <= 3.0, format!("max |exact - expansion| / log n = {worst:.4} (limit 3)"))
}

fn criterion_7() -> Outcome {
    let mut min_margin = f64::INFINITY;
    let mut n_grid: Vec<u64> = (1..=20).collect();
    n_grid.extend(log_grid(20.0, 1e4, 25));
    for (p, q) in PAIRS {
        let (d, v) = moments(p, q);
        for &n in &n_grid {
            for eps in [0.01, 0.05, 0.25, 0.5, 0.75, 0.9] {
                let exact = hypothesis_test_divergence_classical_iid(p, q, eps, n).unwrap() / n as f64;
                min_margin = min_margin.min(chebyshev_dh_bound(d, v, eps, n).unwrap() - exact);
            }
        }
    }
    let c_half = c_eps(0.5);
    let pass = min_margin >= 0.0 && c_half == 54f64.log2();
    outcome(pass, format!("min (bound - exact) = {min_margin:.4e}; C(0.5) = {c_half:.17} vs log 54 = {:.17}", 54f64.log2()))
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (f, spec) in [
        ("dephasing", ChannelFamily::Dephasing { gamma: 0.3 }),
        ("erasure", ChannelFamily::Erasure { p: 0.4, d: 2 }),
    ] {
        let ch = make_channel(&spec).unwrap();
        let cov = weyl_covariance(&spec).unwrap();
        for s in 0..100u64 {
            let seed = s + if f == "erasure" { 10_000 } else { 0 };
            let input = random_state(vec![2], seed).unwrap();
            let sim = teleport_simulate(&ch, &cov, &input).unwrap();
            let direct = apply_channel(&ch, &input, 0).unwrap();
            worst = worst.max(trace_distance(&sim, &direct).unwrap());
            count += 1;
        }
    }
    outcome(worst <= 1e-9, format!("{count} inputs, max trace distance {worst:.2e} (limit 1e-9)"))
}

fn criterion_9() -> Outcome {
    let families = [
        BosonicChannelParams::Thermal { eta: 0.6, nb: 0.5 },
        BosonicChannelParams::Thermal { eta: 0.9, nb: 0.1 },
        BosonicChannelParams::Amplifier { gain: 1.5, nb: 0.5 },
        BosonicChannelParams::Amplifier { gain: 2.0, nb: 0.5 },
        BosonicChannelParams::Additive { xi: 0.3 },
        BosonicChannelParams::Additive { xi: 0.7 },
    ];
    let mut limit_rel: f64 = 0.0;
    let mut fock_abs: f64 = 0.0;
    for p in &families {
        let (d, v) = channel_rel_entropy_and_variance(p, 1e6).unwrap();
        let (d_inf, v_inf) = (asymptotic_bound(p).unwrap(), family_variance(p).unwrap());
        limit_rel = limit_rel.max(((d - d_inf) / d_inf).abs()).max(((v - v_inf) / v_inf).abs());
        let (d3, v3) = channel_rel_entropy_and_variance(p, 3.0).unwrap();
        let (fd, fv, _) = fock::oracle(p, 3.0);
        fock_abs = fock_abs.max((d3 - fd).abs()).max((v3 - fv).abs());
    }
    let pure_loss = finite_n_bound(&BosonicChannelParams::pure_loss(0.5), 100, 0.1).unwrap().value_bits;
    let expected = 1.0 + c_eps(0.1) / 100.0;
    let pass = limit_rel <= 1e-4 && fock_abs <= 1e-6 && pure_loss == expected;
    outcome(
        pass,
        format!(
            "mu=1e6 max rel err {limit_rel:.2e} (limit 1e-4); mu=3 max Fock deviation {fock_abs:.2e} (limit 1e-6); pure loss {pure_loss:.15} vs {expected:.15}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let spec = ChannelFamily::MeasurePrepare {
        states: vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.6, 0.0], [0.0, 0.8]]],
    };
    let ch = make_channel(&spec).unwrap();
    let psi = maximally_entangled(2).unwrap();
    let tau = apply_channel(&ch, &psi, 1).unwrap();
    let mut worst: f64 = 0.0;
    for eps in [0.1, 0.5, 0.9] {
        let v = meta_converse_point(&ch, &psi, &tau, eps).unwrap();
        worst = worst.max((v + (1.0 - eps).log2()).abs());
    }
    outcome(worst <= 1e-10, format!("max |value + log(1-eps)| = {worst:.2e} (limit 1e-10)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("dephasing third-order boundary", criterion_1, Some(Duration::from_secs(10))),
        ("erasure exact boundary", criterion_2, None),
        ("privacy test", criterion_3, Some(Duration::from_secs(60))),
        ("Neyman-Pearson correctness", criterion_4, None),
        ("Renyi bridge", criterion_5, None),
        ("second-order law", criterion_6, None),
        ("Chebyshev dominance", criterion_7, None),
        ("teleportation simulation", criterion_8, Some(Duration::from_secs(5))),
        ("Gaussian limits", criterion_9, None),
        ("entanglement-breaking bound", criterion_10, None),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run);
        let elapsed = start.elapsed();
        let o = match result {
            Ok(o) => with_budget(o, elapsed, *budget),
            Err(_) => outcome(false, "panicked".into()),
        };
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} ({name}): {} [{:.2?}]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            elapsed
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

