//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities (run with `--nocapture` to see the lines for
//! passing criteria too). Tolerances are pinned in the constants below.
//!
//! The shared strong-error run (criteria 1-3) uses the reference
//! configuration κ=13, ν=√2, d=2, m=0, x0=(0.7,0.7), T=1 with the ladder
//! n ∈ {8,...,128}, ref_n = 8192 and 10⁴ paths, all under master seed 42.

use std::sync::OnceLock;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ballsde::analysis::{
    analytic_second_moment, distance_monotonicity, envelope_constant, mc_projected_radial_moments,
    mc_wf_terminal_mean, radial_moment, second_moment_decay_bound, strong_error_pair, ErrorReport,
};
use ballsde::linalg::{norm, norm_sq, skew_identities_check, DenseMatrix};
use ballsde::model::{ModelParams, TimeGrid};
use ballsde::schemes::{backward_root, projection, WrightFisherParams};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const MASTER_SEED: u64 = 42;

const LADDER: [usize; 5] = [8, 16, 32, 64, 128];
const REF_N: usize = 8192;
const LADDER_PATHS: usize = 10_000;

const SLOPE_BAND: (f64, f64) = (-0.65, -0.35);
const MOMENT_AGREEMENT_TOL: f64 = 1e-10;
const MC_MOMENT_N: usize = 2048;
const MC_MOMENT_PATHS: usize = 100_000;

fn reference_params() -> ModelParams<f64> {
    ModelParams::isotropic(2, 13.0, SQRT_2, vec![0.7, 0.7], 1.0)
}

/// Criteria 1-3 share one Monte Carlo run.
fn ladder_reports() -> &'static (ErrorReport, ErrorReport) {
    static REPORTS: OnceLock<(ErrorReport, ErrorReport)> = OnceLock::new();
    REPORTS.get_or_init(|| {
        strong_error_pair(&reference_params(), &LADDER, REF_N, LADDER_PATHS, MASTER_SEED)
            .expect("ladder run completes")
    })
}

#[test]
fn criterion_1_strong_rate_transformed_state() {
    let report = &ladder_reports().0;
    let slope = report.slopes.max_of_mean.expect("ladder has a slope");
    let pass = (SLOPE_BAND.0..=SLOPE_BAND.1).contains(&slope);
    println!(
        "ACCEPTANCE C1 {}: max-of-mean slope {:.4} (band [{}, {}]); errors {:?}",
        if pass { "PASS" } else { "FAIL" },
        slope,
        SLOPE_BAND.0,
        SLOPE_BAND.1,
        report.err_max_of_mean
    );
    assert!(
        pass,
        "fitted max-of-mean slope {slope:.4} outside [{}, {}]; per-n errors {:?}",
        SLOPE_BAND.0, SLOPE_BAND.1, report.err_max_of_mean
    );
}

#[test]
fn criterion_2_strong_rate_projected_state() {
    let (transformed, projected) = ladder_reports();
    // per-n domination: projecting both sides can only shrink the error
    let mut dominated = true;
    for i in 0..LADDER.len() {
        if projected.err_max_of_mean[i] > transformed.err_max_of_mean[i] + 1e-12 {
            dominated = false;
        }
    }
    let slope = projected.slopes.max_of_mean.expect("ladder has a slope");
    let slope_ok = (SLOPE_BAND.0..=SLOPE_BAND.1).contains(&slope);
    println!(
        "ACCEPTANCE C2 {}: projected slope {:.4} (band [{}, {}]), dominated_by_theorem={}; errors {:?}",
        if slope_ok && dominated { "PASS" } else { "FAIL" },
        slope,
        SLOPE_BAND.0,
        SLOPE_BAND.1,
        dominated,
        projected.err_max_of_mean
    );
    assert!(
        dominated,
        "projected error exceeds transformed-state error somewhere on the ladder"
    );
    assert!(
        slope_ok,
        "fitted projected slope {slope:.4} outside [{}, {}]; per-n errors {:?}",
        SLOPE_BAND.0, SLOPE_BAND.1, projected.err_max_of_mean
    );
}

#[test]
fn criterion_3_mean_of_max_bounded_by_quarter_rate() {
    let report = &ladder_reports().0;
    let c = envelope_constant(&LADDER, &report.err_mean_of_max, 0.25);
    let mut worst_slack = f64::INFINITY;
    for (i, &n) in LADDER.iter().enumerate() {
        let bound = c * (n as f64).powf(-0.25);
        worst_slack = worst_slack.min(bound - report.err_mean_of_max[i]);
    }
    let pass = worst_slack >= -1e-12 && c.is_finite();
    println!(
        "ACCEPTANCE C3 {}: mean-of-max <= C*n^(-1/4) with fitted C = {:.4}; slope {:.4}; errors {:?}",
        if pass { "PASS" } else { "FAIL" },
        c,
        report.slopes.mean_of_max.unwrap_or(f64::NAN),
        report.err_mean_of_max
    );
    assert!(pass, "mean-of-max errors escape the fitted n^(-1/4) envelope");
}

#[test]
fn criterion_4_two_route_moment_agreement() {
    let params = reference_params();
    let mut worst = 0.0f64;
    for i in 0..=10 {
        let t = 0.1 * i as f64;
        let via_expm = radial_moment(&params, 1, t, 4).unwrap();
        let via_ode = analytic_second_moment(&params, t).unwrap();
        worst = worst.max((via_expm - via_ode).abs());
    }
    let pass = worst <= MOMENT_AGREEMENT_TOL;
    println!(
        "ACCEPTANCE C4 {}: max |expm - ode| = {:.3e} (tol {:.0e})",
        if pass { "PASS" } else { "FAIL" },
        worst,
        MOMENT_AGREEMENT_TOL
    );
    assert!(pass, "two moment routes disagree by {worst:.3e}");
}

#[test]
fn criterion_5_mc_moment_matches_analytic() {
    let params = reference_params();
    let table = mc_projected_radial_moments(
        &params,
        &[1],
        &[1.0],
        MC_MOMENT_N,
        MC_MOMENT_PATHS,
        MASTER_SEED,
    )
    .unwrap();
    let estimate = table[0][0];
    let target = analytic_second_moment(&params, 1.0).unwrap();
    let allowance = 3.0 * estimate.se + 0.5 / (MC_MOMENT_N as f64).sqrt();
    let diff = (estimate.mean - target).abs();
    let pass = diff <= allowance;
    println!(
        "ACCEPTANCE C5 {}: MC {:.6} vs analytic {:.6}, |diff| = {:.2e} <= {:.2e}",
        if pass { "PASS" } else { "FAIL" },
        estimate.mean,
        target,
        diff,
        allowance
    );
    assert!(pass, "MC second moment off by {diff:.2e} (allowance {allowance:.2e})");
}

#[test]
fn criterion_6_decay_bound_on_analytic_moment() {
    let params = reference_params();
    let mut worst_violation = 0.0f64;
    let mut worst_t = 0.0f64;
    for i in 0..=100 {
        let t = 0.05 * i as f64;
        let moment = analytic_second_moment(&params, t).unwrap();
        let bound = second_moment_decay_bound(&params, t);
        if moment - bound > worst_violation {
            worst_violation = moment - bound;
            worst_t = t;
        }
    }
    let pass = worst_violation == 0.0;
    println!(
        "ACCEPTANCE C6 {}: worst moment-bound gap {:.6} at t = {:.2} (exact check over t in [0,5])",
        if pass { "PASS" } else { "FAIL" },
        worst_violation,
        worst_t
    );
    assert!(
        pass,
        "analytic second moment exceeds the exponential envelope by {worst_violation:.6} at t = {worst_t:.2}; \
         the moment tends to d*nu^2/(d*nu^2+2*kappa) = {:.6} while the envelope tends to 0",
        4.0 / 30.0
    );
}

#[test]
fn criterion_7_wright_fisher_radial_oracle() {
    let params = reference_params();
    let wf = WrightFisherParams::complement_radius_sq_law(&params).unwrap();
    let grid = TimeGrid::new(1.0f64, MC_MOMENT_N).unwrap();
    let estimate = mc_wf_terminal_mean(&wf, &grid, MC_MOMENT_PATHS, MASTER_SEED).unwrap();
    let target = 1.0 - analytic_second_moment(&params, 1.0).unwrap();
    let allowance = 3.0 * estimate.se;
    let diff = (estimate.mean - target).abs();
    let pass = diff <= allowance;
    println!(
        "ACCEPTANCE C7 {}: WF mean {:.6} vs 1 - m2 = {:.6}, |diff| = {:.2e} <= 3se = {:.2e}",
        if pass { "PASS" } else { "FAIL" },
        estimate.mean,
        target,
        diff,
        allowance
    );
    assert!(pass, "WF oracle off by {diff:.2e} (3se = {allowance:.2e})");
}

#[test]
fn criterion_8_property_suites() {
    // projection idempotence and optimality, 1e5 random points
    let mut rng = StdRng::seed_from_u64(MASTER_SEED);
    for _ in 0..100_000 {
        let d = rng.gen_range(2..=4usize);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let px = projection(&x);
        for (a, b) in projection(&px).iter().zip(px.iter()) {
            assert!((a - b).abs() <= 1e-15, "projection not idempotent");
        }
        // optimality against a sampled ball point, exact comparison
        let mut y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&y);
        if r > 1.0 {
            for v in y.iter_mut() {
                *v /= r;
            }
        }
        let dist = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b.iter()).map(|(p, q)| (p - q) * (p - q)).sum()
        };
        assert!(dist(&x, &px) <= dist(&x, &y), "projection not optimal");
    }
    println!("ACCEPTANCE C8a PASS: projection idempotence/optimality over 1e5 samples");

    // skew identities, 1000 random matrices at the stated tolerances
    for _ in 0..1000 {
        let d = rng.gen_range(2..=6usize);
        let mut a = DenseMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            for j in (i + 1)..d {
                let v = rng.gen_range(-5.0..5.0);
                a.set(i, j, v);
                a.set(j, i, -v);
            }
        }
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (inner, square_inner, neg_norm) = skew_identities_check(&a, &x).unwrap();
        let scale = a.norm_frobenius();
        assert!(inner.abs() <= 1e-12 * scale * norm_sq(&x));
        assert!((square_inner - neg_norm).abs() <= 1e-10 * scale * scale * norm_sq(&x));
    }
    println!("ACCEPTANCE C8b PASS: skew identities over 1000 random matrices");

    // backward root: positivity and implicit-equation residual over 1e6 draws
    let mut worst_residual = 0.0f64;
    for _ in 0..1_000_000 {
        let b = rng.gen_range(-20.0..20.0);
        let nu: f64 = rng.gen_range(0.1..3.0);
        let ratio = rng.gen_range(0.51..30.0);
        let kappa = ratio * nu * nu;
        let dt = rng.gen_range(1e-6..0.25);
        let c = kappa - nu * nu / 2.0;
        if c <= 1e-9 {
            continue;
        }
        let y = backward_root(b, kappa, nu, dt).unwrap();
        assert!(y > 0.0, "root not positive for b={b}, kappa={kappa}, nu={nu}, dt={dt}");
        let residual = (y - b - c * dt / y).abs() / b.abs().max(1.0);
        worst_residual = worst_residual.max(residual);
        assert!(residual <= 1e-12, "residual {residual:.2e} for b={b}");
    }
    println!("ACCEPTANCE C8c PASS: root residual <= 1e-12 over 1e6 draws (worst {worst_residual:.2e})");

    // coupling sanity: scheme vs itself on the same path is exactly zero
    let params = reference_params();
    let (transformed, projected) =
        strong_error_pair(&params, &[64], 64, 200, MASTER_SEED).unwrap();
    assert_eq!(transformed.err_max_of_mean, vec![0.0]);
    assert_eq!(transformed.err_mean_of_max, vec![0.0]);
    assert_eq!(projected.err_max_of_mean, vec![0.0]);
    println!("ACCEPTANCE C8d PASS: coupling zero-error at n = ref_n");

    // bit-identical reruns at 1, 4 and 8 threads
    let run = || strong_error_pair(&params, &[8, 16, 32], 256, 300, MASTER_SEED).unwrap();
    let mut outcomes = Vec::new();
    for threads in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        outcomes.push(pool.install(run));
    }
    assert_eq!(outcomes[0], outcomes[1]);
    assert_eq!(outcomes[0], outcomes[2]);
    println!("ACCEPTANCE C8e PASS: bit-identical reports at 1, 4, 8 threads");
}

#[test]
fn criterion_9_distance_monotonicity_experiments() {
    // the two pinned paired-path configurations
    let configs = [(1.0f64, 312_500usize), (1.2, 112_500)];
    for (kappa, n) in configs {
        let params = ModelParams::isotropic(2, kappa, SQRT_2, vec![0.0, 0.0], 1.0);
        let report =
            distance_monotonicity(&params, &[0.0, 0.0], &[-0.7, 0.2], n, MASTER_SEED).unwrap();
        let pass = report.above_threshold_count == 0
            && report.final_distance <= report.initial_distance;
        println!(
            "ACCEPTANCE C9 {}: kappa={kappa}, n={n}: D0={:.4}, Dn={:.4}, increases={}, max_inc={:.2e}, above 10*dt^(1/4)={}",
            if pass { "PASS" } else { "FAIL" },
            report.initial_distance,
            report.final_distance,
            report.increase_count,
            report.max_increase,
            report.above_threshold_count
        );
        assert_eq!(
            report.above_threshold_count, 0,
            "kappa={kappa}: {} steps exceed the 10*dt^(1/4) allowance",
            report.above_threshold_count
        );
        assert!(
            report.final_distance <= report.initial_distance,
            "kappa={kappa}: distance grew over the horizon"
        );
    }
}
