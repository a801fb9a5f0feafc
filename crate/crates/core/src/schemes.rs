//! The numerical schemes.
//!
//! Three integrators live here:
//!
//! * the drift-implicit (backward) Euler–Maruyama scheme for the transformed
//!   system in (Y₀, X) coordinates, whose implicit radial equation is a
//!   quadratic with a closed-form positive root — this is what keeps Y₀ > 0;
//! * the projection scheme, which maps the X component of those iterates back
//!   onto the unit ball with the nearest-point projection;
//! * a plain forward Euler–Maruyama baseline, kept only to demonstrate that
//!   the naive scheme exits the ball;
//!
//! plus a clamped Wright–Fisher simulator for the radial coordinate, used as
//! an independent oracle: |X|² and 1−|X|² are Wright–Fisher diffusions with
//! explicit parameters, so their simulated means can be checked against the
//! closed-form moments in `analysis`.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, norm_sq};
use crate::model::{lift, AugmentedState, ModelParams, TimeGrid};
use crate::noise::{sample_path, BrownianPath, SeedSpec};
use crate::scalar::{real, Real};

/// Nearest-point projection onto the unit ball: x if |x| ≤ 1, else x/|x|.
pub fn projection<T: Real>(x: &[T]) -> Vec<T> {
    let mut out = x.to_vec();
    projection_in_place(&mut out);
    out
}

/// In-place variant of [`projection`].
pub fn projection_in_place<T: Real>(x: &mut [T]) {
    let r = norm(x);
    if r > T::one() {
        for v in x.iter_mut() {
            *v = *v / r;
        }
    }
}

/// Positive root of the implicit radial step `y = b + (κ − ν²/2)·dt / y`.
///
/// Requires κ/ν² > 1/2 so the singular-drift coefficient is positive; the
/// root y = ½(b + √(b² + 4(κ−ν²/2)dt)) is then unique in (0,∞). For b < 0 the
/// equivalent conjugate form 2(κ−ν²/2)dt / (√(b²+4(κ−ν²/2)dt) − b) is used to
/// avoid the cancellation between b and the square root.
pub fn backward_root<T: Real>(b: T, kappa: T, nu: T, dt: T) -> Result<T> {
    let c = kappa - nu * nu / real::<T>(2.0);
    if !(c > T::zero()) {
        return Err(Error::RegimeViolation(format!(
            "backward step needs kappa/nu^2 > 1/2, got kappa - nu^2/2 = {}",
            c.to_f64_lossy()
        )));
    }
    if !(dt > T::zero()) {
        return Err(Error::NonPositiveParam {
            name: "dt",
            value: dt.to_f64_lossy(),
        });
    }
    Ok(root_from_coeff(b, c, dt))
}

#[inline]
fn root_from_coeff<T: Real>(b: T, c: T, dt: T) -> T {
    let disc = (b * b + real::<T>(4.0) * c * dt).sqrt();
    if b >= T::zero() {
        real::<T>(0.5) * (b + disc)
    } else {
        (real::<T>(2.0) * c * dt) / (disc - b)
    }
}

/// Stepper holding precomputed coefficients and scratch buffers so that path
/// simulation does not allocate per step.
struct BackwardStepper<'a, T: Real> {
    params: &'a ModelParams<T>,
    singular: T,
    linear: T,
    degenerate: bool,
    ax: Vec<T>,
    aax: Vec<T>,
    rotation: Vec<T>,
}

impl<'a, T: Real> BackwardStepper<'a, T> {
    fn new(params: &'a ModelParams<T>) -> Result<Self> {
        let singular = params.singular_drift_coeff();
        if !(singular > T::zero()) {
            return Err(Error::RegimeViolation(format!(
                "backward scheme needs kappa/nu^2 > 1/2, got ratio = {}",
                (params.kappa / (params.nu * params.nu)).to_f64_lossy()
            )));
        }
        Ok(Self {
            params,
            singular,
            linear: params.radial_linear_coeff(),
            degenerate: false,
            ax: vec![T::zero(); params.d],
            aax: vec![T::zero(); params.d],
            rotation: vec![T::zero(); params.d],
        })
    }

    /// Accepts κ/ν² = 1/2 exactly (up to representation noise), where the
    /// singular drift coefficient vanishes and the radial update degenerates
    /// to the explicit y' = max(b_k, 0). Positivity is no longer structural
    /// there: the exact process does touch the sphere in that regime, so the
    /// clamp mirrors its boundary behavior. Used by the distance experiment,
    /// whose monotone regime includes this corner (κ = 1, ν = √2).
    fn new_allowing_degenerate_boundary(params: &'a ModelParams<T>) -> Result<Self> {
        let singular = params.singular_drift_coeff();
        let boundary_tol = real::<T>(1e-12) * params.kappa.max(T::one());
        if singular > T::zero() {
            return Self::new(params);
        }
        if singular.abs() <= boundary_tol {
            return Ok(Self {
                params,
                singular: T::zero(),
                linear: params.radial_linear_coeff(),
                degenerate: true,
                ax: vec![T::zero(); params.d],
                aax: vec![T::zero(); params.d],
                rotation: vec![T::zero(); params.d],
            });
        }
        Err(Error::RegimeViolation(format!(
            "backward scheme needs kappa/nu^2 >= 1/2, got kappa - nu^2/2 = {}",
            singular.to_f64_lossy()
        )))
    }

    /// One step of the scheme. Only the radial equation is implicit; the X
    /// update is explicit in the current iterate, including the diffusion
    /// factor ν·Y₀(t_k).
    fn step(&mut self, y0: T, x: &mut [T], dw: &[T], dwhat: &[T], dt: T) -> Result<T> {
        let p = self.params;
        let b = y0 - p.nu * dot(x, dw) - self.linear * y0 * dt;
        let y0_new = if self.degenerate {
            b.max(T::zero())
        } else {
            root_from_coeff(b, self.singular, dt)
        };

        // Rotation terms are evaluated on the current x before it is overwritten.
        p.a0.apply_into(x, &mut self.ax)?;
        for i in 0..p.d {
            self.rotation[i] = self.ax[i] * dt;
        }
        let half = real::<T>(0.5);
        for (matrix, &dwp) in p.a.iter().zip(dwhat.iter()) {
            matrix.apply_into(x, &mut self.ax)?;
            matrix.apply_into(&self.ax, &mut self.aax)?;
            for i in 0..p.d {
                self.rotation[i] = self.rotation[i] + self.ax[i] * dwp + half * self.aax[i] * dt;
            }
        }
        for i in 0..p.d {
            x[i] = x[i] - p.kappa * x[i] * dt + p.nu * y0 * dw[i] + self.rotation[i];
        }
        Ok(y0_new)
    }
}

/// One backward Euler–Maruyama step from an explicit state.
///
/// Computes b_k = y0 − ν⟨x, dW⟩ − (κ − ν²/2 + dν²/2)·y0·dt, the implicit root
/// for the new y0, and the explicit X update
/// x' = x − κx·dt + ν·y0·dW + A₀x·dt + Σ_p A_p x·dŴ_p + ½ Σ_p A_p²x·dt.
pub fn backward_step<T: Real>(
    state: &AugmentedState<T>,
    dw: &[T],
    dwhat: &[T],
    params: &ModelParams<T>,
    dt: T,
) -> Result<AugmentedState<T>> {
    if !(state.y0 > T::zero()) {
        return Err(Error::RegimeViolation(format!(
            "backward step requires y0 > 0, got {}",
            state.y0.to_f64_lossy()
        )));
    }
    if dw.len() != params.d || dwhat.len() != params.m() {
        return Err(Error::DimensionMismatch {
            context: "backward step increments",
            expected: params.d + params.m(),
            got: dw.len() + dwhat.len(),
        });
    }
    if !(dt > T::zero()) {
        return Err(Error::NonPositiveParam {
            name: "dt",
            value: dt.to_f64_lossy(),
        });
    }
    let mut stepper = BackwardStepper::new(params)?;
    let mut x = state.x.clone();
    let y0 = stepper.step(state.y0, &mut x, dw, dwhat, dt)?;
    Ok(AugmentedState { y0, x })
}

/// Time-indexed backward-scheme states, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardPath<T> {
    pub grid: TimeGrid<T>,
    d: usize,
    y0s: Vec<T>,
    xs: Vec<T>,
}

impl<T: Real> BackwardPath<T> {
    /// Number of stored states, n + 1.
    pub fn num_states(&self) -> usize {
        self.y0s.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn y0(&self, k: usize) -> T {
        self.y0s[k]
    }

    #[inline]
    pub fn x(&self, k: usize) -> &[T] {
        &self.xs[k * self.d..(k + 1) * self.d]
    }

    pub fn state(&self, k: usize) -> AugmentedState<T> {
        AugmentedState {
            y0: self.y0(k),
            x: self.x(k).to_vec(),
        }
    }

    pub fn y0s(&self) -> &[T] {
        &self.y0s
    }

    pub fn min_y0(&self) -> T {
        self.y0s.iter().copied().fold(T::infinity(), T::min)
    }
}

fn check_path_consistency<T: Real>(params: &ModelParams<T>, path: &BrownianPath<T>) -> Result<()> {
    if path.d() != params.d || path.m() != params.m() {
        return Err(Error::PathMismatch(format!(
            "noise dimensions (d={}, m={}) vs model (d={}, m={})",
            path.d(),
            path.m(),
            params.d,
            params.m()
        )));
    }
    if path.grid.horizon != params.horizon {
        return Err(Error::PathMismatch(format!(
            "horizon {} vs model {}",
            path.grid.horizon.to_f64_lossy(),
            params.horizon.to_f64_lossy()
        )));
    }
    Ok(())
}

fn run_backward<T: Real>(
    mut stepper: BackwardStepper<'_, T>,
    params: &ModelParams<T>,
    path: &BrownianPath<T>,
) -> Result<BackwardPath<T>> {
    check_path_consistency(params, path)?;
    let start = lift(&params.x0)?;
    let n = path.grid.n;
    let dt = path.grid.dt;

    let mut y0s = Vec::with_capacity(n + 1);
    let mut xs = Vec::with_capacity((n + 1) * params.d);
    let mut y0 = start.y0;
    let mut x = start.x;
    y0s.push(y0);
    xs.extend_from_slice(&x);
    for k in 0..n {
        y0 = stepper.step(y0, &mut x, path.dw(k), path.dwhat(k), dt)?;
        y0s.push(y0);
        xs.extend_from_slice(&x);
    }
    Ok(BackwardPath {
        grid: path.grid,
        d: params.d,
        y0s,
        xs,
    })
}

/// Runs the backward scheme over a whole Brownian path, starting from the
/// lift of x0. The returned path has n+1 states and, in the solvable regime,
/// strictly positive y0 everywhere.
pub fn simulate_backward<T: Real>(
    params: &ModelParams<T>,
    path: &BrownianPath<T>,
) -> Result<BackwardPath<T>> {
    run_backward(BackwardStepper::new(params)?, params, path)
}

/// Like [`simulate_backward`], but also accepts parameters sitting exactly on
/// the solvability boundary κ/ν² = 1/2, where the radial update degenerates
/// to the explicit form clamped at zero. The distance experiment needs this
/// corner of the monotone regime.
pub(crate) fn simulate_backward_at_boundary<T: Real>(
    params: &ModelParams<T>,
    path: &BrownianPath<T>,
) -> Result<BackwardPath<T>> {
    run_backward(
        BackwardStepper::new_allowing_degenerate_boundary(params)?,
        params,
        path,
    )
}

/// Time-indexed sequence of d-vector states: the projection scheme's output
/// (all |x| ≤ 1) or the raw forward Euler–Maruyama baseline (may exit).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPath<T> {
    pub grid: TimeGrid<T>,
    d: usize,
    xs: Vec<T>,
}

impl<T: Real> VectorPath<T> {
    pub fn num_states(&self) -> usize {
        self.xs.len() / self.d
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn x(&self, k: usize) -> &[T] {
        &self.xs[k * self.d..(k + 1) * self.d]
    }

    pub fn max_norm(&self) -> T {
        (0..self.num_states())
            .map(|k| norm(self.x(k)))
            .fold(T::zero(), T::max)
    }
}

/// Applies the nearest-point projection to the X component of every state.
pub fn project_path<T: Real>(path: &BackwardPath<T>) -> VectorPath<T> {
    let mut xs = path.xs.clone();
    for k in 0..path.num_states() {
        projection_in_place(&mut xs[k * path.d..(k + 1) * path.d]);
    }
    VectorPath {
        grid: path.grid,
        d: path.d,
        xs,
    }
}

/// One forward Euler–Maruyama step for the ball SDE, with the radicand
/// 1 − |x|² clamped at zero once the iterate leaves the ball. Baseline only;
/// it is not rate-certified and is expected to exit the state space.
pub fn forward_em_step<T: Real>(
    x: &[T],
    dw: &[T],
    dwhat: &[T],
    params: &ModelParams<T>,
    dt: T,
) -> Vec<T> {
    debug_assert_eq!(x.len(), params.d);
    debug_assert_eq!(dw.len(), params.d);
    debug_assert_eq!(dwhat.len(), params.m());
    let diffusion = params.nu * (T::one() - norm_sq(x)).max(T::zero()).sqrt();
    let a0x = params.a0.apply(x).expect("dimension checked");
    let half = real::<T>(0.5);
    let mut out = vec![T::zero(); params.d];
    for i in 0..params.d {
        out[i] = x[i] - params.kappa * x[i] * dt + diffusion * dw[i] + a0x[i] * dt;
    }
    for (matrix, &dwp) in params.a.iter().zip(dwhat.iter()) {
        let ax = matrix.apply(x).expect("dimension checked");
        let aax = matrix.apply(&ax).expect("dimension checked");
        for i in 0..params.d {
            out[i] = out[i] + ax[i] * dwp + half * aax[i] * dt;
        }
    }
    out
}

/// Runs the forward Euler–Maruyama baseline over a whole path.
pub fn simulate_forward_em<T: Real>(
    params: &ModelParams<T>,
    path: &BrownianPath<T>,
) -> Result<VectorPath<T>> {
    check_path_consistency(params, path)?;
    let n = path.grid.n;
    let mut xs = Vec::with_capacity((n + 1) * params.d);
    let mut x = params.x0.clone();
    xs.extend_from_slice(&x);
    for k in 0..n {
        x = forward_em_step(&x, path.dw(k), path.dwhat(k), params, path.grid.dt);
        xs.extend_from_slice(&x);
    }
    Ok(VectorPath {
        grid: path.grid,
        d: params.d,
        xs,
    })
}

/// Parameters of the Wright–Fisher diffusion
/// dy = (a − b·y) dt + γ √(y(1−y)) dW̃ on [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrightFisherParams<T> {
    pub a: T,
    pub b: T,
    pub gamma: T,
    pub y0: T,
}

impl<T: Real> WrightFisherParams<T> {
    pub fn new(a: T, b: T, gamma: T, y0: T) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("gamma", gamma)] {
            if !(v > T::zero()) {
                return Err(Error::NonPositiveParam {
                    name,
                    value: v.to_f64_lossy(),
                });
            }
        }
        if y0 < T::zero() || y0 > T::one() {
            return Err(Error::OutOfRange {
                name: "y0",
                value: y0.to_f64_lossy(),
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self { a, b, gamma, y0 })
    }

    /// 2a/γ² ≥ 1: the boundary 0 is inaccessible (the strong solution stays
    /// in [0,1] iff both boundary flags hold).
    pub fn zero_inaccessible(&self) -> bool {
        real::<T>(2.0) * self.a / (self.gamma * self.gamma) >= T::one()
    }

    /// 2(b−a)/γ² ≥ 1: the boundary 1 is inaccessible.
    pub fn one_inaccessible(&self) -> bool {
        real::<T>(2.0) * (self.b - self.a) / (self.gamma * self.gamma) >= T::one()
    }

    /// The law of |X(t)|² under the ball SDE: a = dν², b = dν² + 2κ, γ = 2ν,
    /// started at |x0|².
    pub fn radius_sq_law(params: &ModelParams<T>) -> Result<Self> {
        let nu_sq = params.nu * params.nu;
        let two = real::<T>(2.0);
        let dv = real::<T>(params.d as f64) * nu_sq;
        Self::new(
            dv,
            dv + two * params.kappa,
            two * params.nu,
            norm_sq(&params.x0),
        )
    }

    /// The law of 1 − |X(t)|²: a = 2κ, b = dν² + 2κ, γ = 2ν, started at
    /// 1 − |x0|².
    pub fn complement_radius_sq_law(params: &ModelParams<T>) -> Result<Self> {
        let nu_sq = params.nu * params.nu;
        let two = real::<T>(2.0);
        let dv = real::<T>(params.d as f64) * nu_sq;
        Self::new(
            two * params.kappa,
            dv + two * params.kappa,
            two * params.nu,
            T::one() - norm_sq(&params.x0),
        )
    }
}

/// One Euler step of the Wright–Fisher diffusion, clamped back to [0,1].
///
/// The exact process stays in [0,1] in the valid regime but the discrete step
/// can exit; clamping is the simplest boundary-preserving fix and its bias is
/// second-order at the step sizes used here.
pub fn wf_step<T: Real>(y: T, wf: &WrightFisherParams<T>, dn: T, dt: T) -> T {
    let radicand = (y * (T::one() - y)).max(T::zero());
    let next = y + (wf.a - wf.b * y) * dt + wf.gamma * radicand.sqrt() * dn;
    next.max(T::zero()).min(T::one())
}

/// Time-indexed scalar states of the Wright–Fisher simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPath<T> {
    pub grid: TimeGrid<T>,
    values: Vec<T>,
}

impl<T: Real> RadialPath<T> {
    pub fn num_states(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn value(&self, k: usize) -> T {
        self.values[k]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn terminal(&self) -> T {
        *self.values.last().expect("non-empty path")
    }
}

/// Simulates the clamped Wright–Fisher scheme with its own one-dimensional
/// driving noise drawn from `seed`.
pub fn simulate_wf<T: Real>(
    wf: &WrightFisherParams<T>,
    grid: &TimeGrid<T>,
    seed: SeedSpec,
) -> RadialPath<T> {
    let noise = sample_path::<T>(seed, grid, 1, 0);
    let mut values = Vec::with_capacity(grid.n + 1);
    let mut y = wf.y0;
    values.push(y);
    for k in 0..grid.n {
        y = wf_step(y, wf, noise.dw(k)[0], grid.dt);
        values.push(y);
    }
    RadialPath { grid: *grid, values }
}
