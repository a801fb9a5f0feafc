//! Strong-error estimation, convergence-order fitting, moment oracles and
//! the distance-monotonicity experiment.
//!
//! The exact solution is unavailable, so strong errors are measured against
//! the backward scheme on a fine reference grid driven by the *same* Brownian
//! path (the coarse increments are exact sums of the fine ones). Moments have
//! two independent routes: the closed-form solution of the second-moment ODE
//! and the matrix exponential of the radial generator, which must agree to
//! near machine precision.
//!
//! All Monte Carlo loops are data-parallel over path indices with per-path
//! seeds, and every aggregation uses a fixed pairwise reduction tree, so
//! results are bit-identical across thread counts.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{expm, norm_sq, DenseMatrix};
use crate::model::{validate, ModelParams, TimeGrid};
use crate::noise::{coarsen, sample_path, SeedSpec};
use crate::scalar::{real, Real};
use crate::schemes::{
    projection, simulate_backward, simulate_backward_at_boundary, simulate_wf,
    WrightFisherParams,
};

// ---------------------------------------------------------------------------
// Deterministic reductions
// ---------------------------------------------------------------------------

/// Sums `f(lo..hi)` over a fixed binary tree determined only by the index
/// range, so the result does not depend on evaluation parallelism.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
    let len = hi - lo;
    if len <= 32 {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    } else {
        let mid = lo + len / 2;
        pairwise_sum_by(lo, mid, f) + pairwise_sum_by(mid, hi, f)
    }
}

/// Pairwise sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_by(0, xs.len(), &|i| xs[i])
}

/// Mean and standard error of the mean, both via pairwise sums. A singleton
/// sample reports zero standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (0.0, 0.0);
    }
    let mean = pairwise_sum(values) / m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let var = pairwise_sum_by(0, m, &|i| {
        let d = values[i] - mean;
        d * d
    }) / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

/// Runs `f` over path indices `0..paths` in parallel, collecting results in
/// index order. The per-path computation is a pure function of the index, so
/// the output is independent of thread count and scheduling.
pub fn try_parallel_paths<V, F>(paths: usize, f: F) -> Result<Vec<V>>
where
    V: Send,
    F: Fn(u64) -> Result<V> + Sync + Send,
{
    (0..paths as u64).into_par_iter().map(f).collect()
}

// ---------------------------------------------------------------------------
// Slope fitting
// ---------------------------------------------------------------------------

/// Least-squares slope of log(err) against log(n), equally weighted.
/// Returns `None` with fewer than two positive error values; the standard
/// error of the slope needs at least three.
pub fn fit_loglog_slope(n_values: &[usize], errs: &[f64]) -> (Option<f64>, Option<f64>) {
    let points: Vec<(f64, f64)> = n_values
        .iter()
        .zip(errs.iter())
        .filter(|(_, &e)| e > 0.0)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect();
    let m = points.len();
    if m < 2 {
        return (None, None);
    }
    let mf = m as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / mf;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = points.iter().map(|p| (p.0 - xbar) * (p.0 - xbar)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    let slope = sxy / sxx;
    if m < 3 {
        return (Some(slope), None);
    }
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let stderr = (ss_res / (mf - 2.0) / sxx).sqrt();
    (Some(slope), Some(stderr))
}

/// Smallest constant C such that err_i ≤ C·n_i^{-decay} holds across the
/// ladder; the empirical counterpart of an upper bound of order n^{-decay}.
pub fn envelope_constant(n_values: &[usize], errs: &[f64], decay: f64) -> f64 {
    n_values
        .iter()
        .zip(errs.iter())
        .map(|(&n, &e)| e * (n as f64).powf(decay))
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Strong error
// ---------------------------------------------------------------------------

/// Which discrete object is compared against the fine-grid reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorTarget {
    /// The transformed state (Y₀, X): the full (d+1)-dimensional error.
    TransformedState,
    /// The projected scheme: X components projected onto the ball on both
    /// sides before differencing.
    ProjectedState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopePair {
    pub max_of_mean: Option<f64>,
    pub mean_of_max: Option<f64>,
}

/// Per-run strong-error statistics and fitted convergence order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    #[serde(rename = "n")]
    pub n_values: Vec<usize>,
    #[serde(rename = "M")]
    pub paths: usize,
    pub ref_n: usize,
    /// max_k E[|e(k)|²]^{1/2} per n.
    pub err_max_of_mean: Vec<f64>,
    /// E[max_k |e(k)|²]^{1/2} per n.
    pub err_mean_of_max: Vec<f64>,
    /// Delta-method standard errors of the two statistics above.
    pub se_max_of_mean: Vec<f64>,
    pub se_mean_of_max: Vec<f64>,
    pub slopes: SlopePair,
    pub stderr: SlopePair,
    /// Set when κ/ν² ≤ 6, i.e. outside the regime of the rate guarantee.
    pub regime_warning: bool,
}

impl ErrorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per n: the CSV face of the report.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "n,err_max_of_mean,se_max_of_mean,err_mean_of_max,se_mean_of_max"
        )?;
        for (i, &n) in self.n_values.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                n,
                self.err_max_of_mean[i],
                self.se_max_of_mean[i],
                self.err_mean_of_max[i],
                self.se_mean_of_max[i]
            )?;
        }
        Ok(())
    }
}

struct PerLevel {
    sq: Vec<f64>,
    max: f64,
}

struct PathStats {
    transformed: Vec<PerLevel>,
    projected: Vec<PerLevel>,
}

fn check_ladder(n_values: &[usize], ref_n: usize, paths: usize) -> Result<()> {
    if n_values.is_empty() {
        return Err(Error::InvalidConfig("empty n ladder".into()));
    }
    if !n_values.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidConfig(
            "n ladder must be strictly increasing".into(),
        ));
    }
    for &n in n_values {
        if n == 0 || ref_n % n != 0 {
            return Err(Error::IndivisibleRefinement { n: ref_n, r: n.max(1) });
        }
    }
    if paths < 100 {
        return Err(Error::InvalidConfig(format!(
            "strong-error estimation needs at least 100 paths, got {paths}"
        )));
    }
    Ok(())
}

/// Coupled strong-error run producing both functionals for both targets in a
/// single pass over the Monte Carlo paths.
///
/// Per path: one fine Brownian path at `ref_n` drives the reference
/// simulation, the same path coarsened drives each scheme level, and errors
/// are recorded at the shared coarse grid points. Requires κ/ν² > 1/2; when
/// κ/ν² ≤ 6 the run proceeds but the reports carry `regime_warning`.
pub fn strong_error_pair<T: Real>(
    params: &ModelParams<T>,
    n_values: &[usize],
    ref_n: usize,
    paths: usize,
    master_seed: u64,
) -> Result<(ErrorReport, ErrorReport)> {
    let regime = validate(params)?;
    if !regime.backward_solvable {
        return Err(Error::RegimeViolation(format!(
            "strong-error run needs kappa/nu^2 > 1/2, got {}",
            regime.ratio
        )));
    }
    check_ladder(n_values, ref_n, paths)?;
    let ref_grid = TimeGrid::new(params.horizon, ref_n)?;
    let d = params.d;
    let m = params.m();

    let stats: Vec<PathStats> = try_parallel_paths(paths, |path_index| {
        let fine = sample_path::<T>(SeedSpec::new(master_seed, path_index), &ref_grid, d, m);
        let reference = simulate_backward(params, &fine)?;
        let mut transformed = Vec::with_capacity(n_values.len());
        let mut projected = Vec::with_capacity(n_values.len());
        for &n in n_values {
            let stride = ref_n / n;
            let coarse_path = coarsen(&fine, stride)?;
            let coarse = simulate_backward(params, &coarse_path)?;
            let mut level_y = PerLevel { sq: Vec::with_capacity(n + 1), max: 0.0 };
            let mut level_x = PerLevel { sq: Vec::with_capacity(n + 1), max: 0.0 };
            for k in 0..=n {
                let fine_k = k * stride;
                let dy0 = reference.y0(fine_k) - coarse.y0(k);
                let mut sq_y = dy0 * dy0;
                for (a, b) in reference.x(fine_k).iter().zip(coarse.x(k).iter()) {
                    let dx = *a - *b;
                    sq_y = sq_y + dx * dx;
                }
                let sq_y = sq_y.to_f64_lossy();
                level_y.max = level_y.max.max(sq_y);
                level_y.sq.push(sq_y);

                let pr = projection(reference.x(fine_k));
                let pc = projection(coarse.x(k));
                let mut sq_x = T::zero();
                for (a, b) in pr.iter().zip(pc.iter()) {
                    let dx = *a - *b;
                    sq_x = sq_x + dx * dx;
                }
                let sq_x = sq_x.to_f64_lossy();
                level_x.max = level_x.max.max(sq_x);
                level_x.sq.push(sq_x);
            }
            transformed.push(level_y);
            projected.push(level_x);
        }
        Ok(PathStats { transformed, projected })
    })?;

    let build = |select: &dyn Fn(&PathStats) -> &[PerLevel]| -> ErrorReport {
        let mut err_max_of_mean = Vec::with_capacity(n_values.len());
        let mut err_mean_of_max = Vec::with_capacity(n_values.len());
        let mut se_max_of_mean = Vec::with_capacity(n_values.len());
        let mut se_mean_of_max = Vec::with_capacity(n_values.len());
        let mf = paths as f64;
        for (level, &n) in n_values.iter().enumerate() {
            // max over grid points of the per-point mean squared error
            let mut best = 0.0f64;
            let mut best_k = 0usize;
            for k in 0..=n {
                let mean_sq =
                    pairwise_sum_by(0, paths, &|i| select(&stats[i])[level].sq[k]) / mf;
                if mean_sq > best {
                    best = mean_sq;
                    best_k = k;
                }
            }
            let err = best.sqrt();
            err_max_of_mean.push(err);
            let column: Vec<f64> = (0..paths)
                .map(|i| select(&stats[i])[level].sq[best_k])
                .collect();
            let (_, se_sq) = mean_and_se(&column);
            se_max_of_mean.push(if err > 0.0 { se_sq / (2.0 * err) } else { 0.0 });

            // mean over paths of the per-path max squared error
            let maxima: Vec<f64> = (0..paths).map(|i| select(&stats[i])[level].max).collect();
            let (mean_max, se_max) = mean_and_se(&maxima);
            let err = mean_max.sqrt();
            err_mean_of_max.push(err);
            se_mean_of_max.push(if err > 0.0 { se_max / (2.0 * err) } else { 0.0 });
        }
        let (slope_mm, stderr_mm) = fit_loglog_slope(n_values, &err_max_of_mean);
        let (slope_mx, stderr_mx) = fit_loglog_slope(n_values, &err_mean_of_max);
        ErrorReport {
            n_values: n_values.to_vec(),
            paths,
            ref_n,
            err_max_of_mean,
            err_mean_of_max,
            se_max_of_mean,
            se_mean_of_max,
            slopes: SlopePair { max_of_mean: slope_mm, mean_of_max: slope_mx },
            stderr: SlopePair { max_of_mean: stderr_mm, mean_of_max: stderr_mx },
            regime_warning: !regime.rate_theorem,
        }
    };

    let transformed = build(&|s: &PathStats| &s.transformed);
    let projected = build(&|s: &PathStats| &s.projected);
    Ok((transformed, projected))
}

/// Strong error for one target; see [`strong_error_pair`].
pub fn strong_error<T: Real>(
    params: &ModelParams<T>,
    n_values: &[usize],
    ref_n: usize,
    paths: usize,
    master_seed: u64,
    target: ErrorTarget,
) -> Result<ErrorReport> {
    let (transformed, projected) =
        strong_error_pair(params, n_values, ref_n, paths, master_seed)?;
    Ok(match target {
        ErrorTarget::TransformedState => transformed,
        ErrorTarget::ProjectedState => projected,
    })
}

// ---------------------------------------------------------------------------
// Analytic moments
// ---------------------------------------------------------------------------

/// Closed-form E[|X(t)|²]: the radial second moment satisfies the linear ODE
/// dE/dt = dν² − (dν² + 2κ)E (the martingale term of the radial dynamics has
/// zero expectation), so E(t) = s + (|x0|² − s)e^{−(dν²+2κ)t} with
/// s = dν²/(dν²+2κ).
pub fn analytic_second_moment<T: Real>(params: &ModelParams<T>, t: T) -> Result<T> {
    if t < T::zero() {
        return Err(Error::OutOfRange {
            name: "t",
            value: t.to_f64_lossy(),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let nu_sq = params.nu * params.nu;
    let dv = real::<T>(params.d as f64) * nu_sq;
    let decay = dv + real::<T>(2.0) * params.kappa;
    let s = dv / decay;
    Ok(s + (norm_sq(&params.x0) - s) * (-decay * t).exp())
}

/// The exponential envelope (|x0|² + dν²·t)·e^{−(dν²+2κ)t}.
pub fn second_moment_decay_bound<T: Real>(params: &ModelParams<T>, t: T) -> T {
    let nu_sq = params.nu * params.nu;
    let dv = real::<T>(params.d as f64) * nu_sq;
    let decay = dv + real::<T>(2.0) * params.kappa;
    (norm_sq(&params.x0) + dv * t) * (-decay * t).exp()
}

/// Action of the generator on radial monomials y^k, y = |X|², truncated at
/// degree K. Lower bidiagonal: L y^k lives in span{y^{k−1}, y^k}, so moments
/// of order ≤ K evolve exactly under the truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix<T> {
    pub truncation: usize,
    pub matrix: DenseMatrix<T>,
}

/// Builds the (K+1)×(K+1) radial generator matrix:
/// L y^k = [k·dν² + 2ν²k(k−1)]·y^{k−1} − [k(dν²+2κ) + 2ν²k(k−1)]·y^k.
pub fn radial_generator<T: Real>(params: &ModelParams<T>, truncation: usize) -> Result<GeneratorMatrix<T>> {
    if truncation < 1 {
        return Err(Error::OutOfRange {
            name: "K",
            value: truncation as f64,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let nu_sq = params.nu * params.nu;
    let dv = real::<T>(params.d as f64) * nu_sq;
    let two = real::<T>(2.0);
    let mut g = DenseMatrix::zeros(truncation + 1, truncation + 1);
    for k in 1..=truncation {
        let kf = real::<T>(k as f64);
        let pair = two * nu_sq * kf * (kf - T::one());
        g.set(k, k - 1, kf * dv + pair);
        g.set(k, k, -(kf * (dv + two * params.kappa) + pair));
    }
    Ok(GeneratorMatrix { truncation, matrix: g })
}

/// E[(|X(t)|²)^k] via the matrix exponential of the radial generator: the
/// moment vector m(t) = (E[y⁰], …, E[y^K]) solves dm/dt = G·m, so
/// m(t) = e^{tG}·m(0) with m(0) the powers of |x0|². The k = 1 case must
/// reproduce [`analytic_second_moment`]; that agreement is the tested
/// convention check.
pub fn radial_moment<T: Real>(
    params: &ModelParams<T>,
    degree: usize,
    t: T,
    truncation: usize,
) -> Result<T> {
    if degree < 1 || degree > truncation {
        return Err(Error::DegreeExceeded { degree, truncation });
    }
    let generator = radial_generator(params, truncation)?;
    let propagator = expm(&generator.matrix, t)?;
    let y0 = norm_sq(&params.x0);
    let mut result = T::zero();
    let mut power = T::one();
    for j in 0..=truncation {
        result = result + propagator.get(degree, j) * power;
        power = power * y0;
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Monte Carlo moment estimates
// ---------------------------------------------------------------------------

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
}

fn time_to_index<T: Real>(grid: &TimeGrid<T>, t: T) -> Result<usize> {
    let pos = (t / grid.dt).to_f64_lossy().round();
    if !(0.0..=(grid.n as f64)).contains(&pos) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t.to_f64_lossy(),
            lo: 0.0,
            hi: grid.horizon.to_f64_lossy(),
        });
    }
    Ok(pos as usize)
}

/// Monte Carlo estimates of E[(|X̄^{(n)}(t)|²)^k] from the projection scheme,
/// for each requested time (rounded to the nearest grid point) and degree.
/// Returned as `out[time][degree]`.
pub fn mc_projected_radial_moments<T: Real>(
    params: &ModelParams<T>,
    degrees: &[usize],
    times: &[T],
    n: usize,
    paths: usize,
    master_seed: u64,
) -> Result<Vec<Vec<McEstimate>>> {
    let grid = TimeGrid::new(params.horizon, n)?;
    let indices: Vec<usize> = times
        .iter()
        .map(|&t| time_to_index(&grid, t))
        .collect::<Result<_>>()?;
    let d = params.d;
    let m = params.m();

    let samples: Vec<Vec<f64>> = try_parallel_paths(paths, |path_index| {
        let path = sample_path::<T>(SeedSpec::new(master_seed, path_index), &grid, d, m);
        let sim = simulate_backward(params, &path)?;
        let mut row = Vec::with_capacity(indices.len() * degrees.len());
        for &idx in &indices {
            let projected = projection(sim.x(idx));
            let r2 = norm_sq(&projected).to_f64_lossy();
            for &deg in degrees {
                row.push(r2.powi(deg as i32));
            }
        }
        Ok(row)
    })?;

    let mut out = Vec::with_capacity(indices.len());
    for (ti, _) in indices.iter().enumerate() {
        let mut per_degree = Vec::with_capacity(degrees.len());
        for di in 0..degrees.len() {
            let col: Vec<f64> = (0..paths).map(|i| samples[i][ti * degrees.len() + di]).collect();
            let (mean, se) = mean_and_se(&col);
            per_degree.push(McEstimate { mean, se });
        }
        out.push(per_degree);
    }
    Ok(out)
}

/// Monte Carlo estimate of E[y(T)] for the clamped Wright–Fisher scheme.
pub fn mc_wf_terminal_mean<T: Real>(
    wf: &WrightFisherParams<T>,
    grid: &TimeGrid<T>,
    paths: usize,
    master_seed: u64,
) -> Result<McEstimate> {
    let samples: Vec<f64> = try_parallel_paths(paths, |path_index| {
        let path = simulate_wf(wf, grid, SeedSpec::new(master_seed, path_index));
        Ok(path.terminal().to_f64_lossy())
    })?;
    let (mean, se) = mean_and_se(&samples);
    Ok(McEstimate { mean, se })
}

// ---------------------------------------------------------------------------
// Moment-property diagnostics
// ---------------------------------------------------------------------------

/// Inverse-moment boundedness diagnostic for the radial coordinate.
#[derive(Debug, Clone, Serialize)]
pub struct InverseMomentStats {
    pub q: f64,
    pub times: Vec<f64>,
    /// E[Y₀^{(n)}(t)^{−q}] per requested time.
    pub estimates: Vec<f64>,
    pub max_estimate: f64,
    /// Estimate from the first half of the paths divided by the full-sample
    /// estimate, at the time where it deviates most from 1; values far from
    /// 1 indicate an unstable (diverging) estimate.
    pub worst_half_sample_ratio: f64,
}

/// Monte Carlo estimates of E[Y₀^{(n)}(t)^{−q}] over the sample times.
///
/// This is a boundedness diagnostic, not a proof: it runs scheme samples, and
/// requires 0 ≤ q < κ/ν² with κ/ν² ≥ 1 (the regime where the exact inverse
/// moment is known to be finite).
pub fn inverse_moment_check<T: Real>(
    params: &ModelParams<T>,
    q: f64,
    t_samples: &[T],
    n: usize,
    paths: usize,
    master_seed: u64,
) -> Result<InverseMomentStats> {
    let regime = validate(params)?;
    if regime.ratio < 1.0 {
        return Err(Error::RegimeViolation(format!(
            "inverse-moment diagnostic needs kappa/nu^2 >= 1, got {}",
            regime.ratio
        )));
    }
    if q < 0.0 || q >= regime.ratio {
        return Err(Error::RegimeViolation(format!(
            "inverse moment of order q = {q} requires 0 <= q < kappa/nu^2 = {}",
            regime.ratio
        )));
    }
    let grid = TimeGrid::new(params.horizon, n)?;
    let indices: Vec<usize> = t_samples
        .iter()
        .map(|&t| time_to_index(&grid, t))
        .collect::<Result<_>>()?;
    let d = params.d;
    let m = params.m();

    let samples: Vec<Vec<f64>> = try_parallel_paths(paths, |path_index| {
        let path = sample_path::<T>(SeedSpec::new(master_seed, path_index), &grid, d, m);
        let sim = simulate_backward(params, &path)?;
        Ok(indices
            .iter()
            .map(|&idx| sim.y0(idx).to_f64_lossy().powf(-q))
            .collect())
    })?;

    let half = paths / 2;
    let mut estimates = Vec::with_capacity(indices.len());
    let mut worst_ratio = 1.0f64;
    for ti in 0..indices.len() {
        let full = pairwise_sum_by(0, paths, &|i| samples[i][ti]) / paths as f64;
        estimates.push(full);
        if half > 0 && full > 0.0 {
            let head = pairwise_sum_by(0, half, &|i| samples[i][ti]) / half as f64;
            let ratio = head / full;
            if (ratio - 1.0).abs() > (worst_ratio - 1.0).abs() {
                worst_ratio = ratio;
            }
        }
    }
    let max_estimate = estimates.iter().copied().fold(0.0, f64::max);
    Ok(InverseMomentStats {
        q,
        times: t_samples.iter().map(|t| t.to_f64_lossy()).collect(),
        estimates,
        max_estimate,
        worst_half_sample_ratio: worst_ratio,
    })
}

/// Hölder-regularity diagnostic of the scheme's increments.
#[derive(Debug, Clone, Serialize)]
pub struct HolderStats {
    pub q: f64,
    /// Lags in steps (dyadic) and in time units.
    pub lags: Vec<usize>,
    pub lag_times: Vec<f64>,
    /// moments[c][l] = E[|Y_c(t+Δ)−Y_c(t)|^q] at lag l; coordinate order is
    /// y0 first, then x_1..x_d.
    pub moments: Vec<Vec<f64>>,
    /// Per-coordinate fitted slope of log-moment against log-lag
    /// (theory: q/2 in the diffusive window).
    pub slopes: Vec<f64>,
}

/// Estimates E[|Y_i(t)−Y_i(s)|^q] over dyadic lags and fits the growth
/// exponent per coordinate.
///
/// Lags run from one step up to n/64 steps so the window stays inside the
/// diffusive regime (mean reversion flattens the scaling at lags comparable
/// to 1/κ). Requires 2 ≤ q < κ/ν².
pub fn holder_check<T: Real>(
    params: &ModelParams<T>,
    q: f64,
    n: usize,
    paths: usize,
    master_seed: u64,
) -> Result<HolderStats> {
    let regime = validate(params)?;
    if !(q >= 2.0 && q < regime.ratio) {
        return Err(Error::RegimeViolation(format!(
            "Hölder diagnostic requires 2 <= q < kappa/nu^2 = {}, got q = {q}",
            regime.ratio
        )));
    }
    let mut lags = Vec::new();
    let mut lag = 1usize;
    while lag <= n / 64 {
        lags.push(lag);
        lag *= 2;
    }
    if lags.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "n = {n} leaves fewer than three dyadic lags below n/64"
        )));
    }
    let grid = TimeGrid::new(params.horizon, n)?;
    let d = params.d;
    let m = params.m();
    let coords = d + 1;

    // per path: mean over non-overlapping pairs, per coordinate and lag
    let samples: Vec<Vec<f64>> = try_parallel_paths(paths, |path_index| {
        let path = sample_path::<T>(SeedSpec::new(master_seed, path_index), &grid, d, m);
        let sim = simulate_backward(params, &path)?;
        let mut row = vec![0.0f64; coords * lags.len()];
        for (li, &lag) in lags.iter().enumerate() {
            let pairs = n / lag;
            let mut acc = vec![0.0f64; coords];
            for p in 0..pairs {
                let (k0, k1) = (p * lag, (p + 1) * lag);
                acc[0] += (sim.y0(k1) - sim.y0(k0)).to_f64_lossy().abs().powf(q);
                for c in 0..d {
                    acc[1 + c] +=
                        (sim.x(k1)[c] - sim.x(k0)[c]).to_f64_lossy().abs().powf(q);
                }
            }
            for c in 0..coords {
                row[c * lags.len() + li] = acc[c] / pairs as f64;
            }
        }
        Ok(row)
    })?;

    let lag_times: Vec<f64> = lags
        .iter()
        .map(|&l| l as f64 * grid.dt.to_f64_lossy())
        .collect();
    let mut moments = Vec::with_capacity(coords);
    let mut slopes = Vec::with_capacity(coords);
    for c in 0..coords {
        let per_lag: Vec<f64> = (0..lags.len())
            .map(|li| pairwise_sum_by(0, paths, &|i| samples[i][c * lags.len() + li]) / paths as f64)
            .collect();
        // least squares of log-moment vs log-lag-time
        let xs: Vec<f64> = lag_times.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = per_lag.iter().map(|v| v.ln()).collect();
        let mf = xs.len() as f64;
        let xbar = xs.iter().sum::<f64>() / mf;
        let ybar = ys.iter().sum::<f64>() / mf;
        let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
        let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
        slopes.push(sxy / sxx);
        moments.push(per_lag);
    }
    Ok(HolderStats {
        q,
        lags,
        lag_times,
        moments,
        slopes,
    })
}

// ---------------------------------------------------------------------------
// Distance monotonicity
// ---------------------------------------------------------------------------

/// Outcome of the paired-path distance experiment.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceReport {
    /// D_0 = |Y¹(0) − Y²(0)|.
    pub initial_distance: f64,
    /// D_n at the horizon.
    pub final_distance: f64,
    /// Steps with D_{k+1} > D_k (the discrete scheme fluctuates at noise
    /// scale even where the exact flow is monotone).
    pub increase_count: usize,
    /// Largest single-step increase observed.
    pub max_increase: f64,
    /// The Δt-dependent allowance 10·Δt^{1/4}.
    pub threshold: f64,
    /// Steps whose increase exceeds the allowance.
    pub above_threshold_count: usize,
    /// The full distance sequence D_0..D_n (not serialized; written as CSV).
    #[serde(skip)]
    pub distances: Vec<f64>,
}

/// Simulates two backward-scheme paths from different starting points under
/// the *same* Brownian path and reports the evolution of the distance
/// |Y¹(t_k) − Y²(t_k)| in the transformed space.
///
/// Requires the monotone regime (ν = √2 exactly, all skew matrices zero,
/// κ ≥ 1), where the exact-process distance is a.s. nonincreasing. The
/// discrete analogue is only approximate, so the report counts increases
/// instead of asserting monotonicity.
pub fn distance_monotonicity<T: Real>(
    params: &ModelParams<T>,
    x0_a: &[T],
    x0_b: &[T],
    n: usize,
    master_seed: u64,
) -> Result<DistanceReport> {
    let regime = validate(params)?;
    if !regime.swart_monotone {
        return Err(Error::RegimeViolation(
            "distance experiment needs kappa >= 1, nu = sqrt(2) and zero skew matrices".into(),
        ));
    }
    let mut pa = params.clone();
    pa.x0 = x0_a.to_vec();
    let mut pb = params.clone();
    pb.x0 = x0_b.to_vec();
    validate(&pa)?;
    validate(&pb)?;

    let grid = TimeGrid::new(params.horizon, n)?;
    let shared = sample_path::<T>(SeedSpec::new(master_seed, 0), &grid, params.d, params.m());
    let sim_a = simulate_backward_at_boundary(&pa, &shared)?;
    let sim_b = simulate_backward_at_boundary(&pb, &shared)?;

    let mut distances = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let dy0 = sim_a.y0(k) - sim_b.y0(k);
        let mut sq = dy0 * dy0;
        for (a, b) in sim_a.x(k).iter().zip(sim_b.x(k).iter()) {
            let dx = *a - *b;
            sq = sq + dx * dx;
        }
        distances.push(sq.sqrt().to_f64_lossy());
    }
    let threshold = 10.0 * grid.dt.to_f64_lossy().powf(0.25);
    let mut increase_count = 0usize;
    let mut above_threshold_count = 0usize;
    let mut max_increase = 0.0f64;
    for w in distances.windows(2) {
        let inc = w[1] - w[0];
        if inc > 0.0 {
            increase_count += 1;
            max_increase = max_increase.max(inc);
            if inc > threshold {
                above_threshold_count += 1;
            }
        }
    }
    Ok(DistanceReport {
        initial_distance: distances[0],
        final_distance: *distances.last().expect("non-empty"),
        increase_count,
        max_increase,
        threshold,
        above_threshold_count,
        distances,
    })
}
