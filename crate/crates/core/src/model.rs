//! Domain types for the SDE on the unit ball and its discretization.
//!
//! The model is
//!
//! ```text
//! dX = -κ X dt + ν √(1-|X|²) dW + A₀ X dt + Σ_p A_p X ∘ dŴ_p
//! ```
//!
//! with κ ≥ 0, ν > 0, skew-symmetric A₀, A₁, …, A_m and X(0) strictly inside
//! the unit ball. [`validate`] checks those structural requirements as hard
//! errors and reports which parameter regimes hold as flags: each regime
//! unlocks a different guarantee (solvability of the drift-implicit step,
//! pathwise uniqueness, the L² convergence rate, distance monotonicity).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, norm_sq, DenseMatrix};
use crate::scalar::{real, Real};

/// Tolerance for accepting a point as "inside the ball" when lifting; covers
/// accumulated rounding of exact-process states sitting on the sphere.
pub const BALL_TOLERANCE: f64 = 1e-12;

/// Full parameter set of the SDE: dimension, mean reversion κ, diffusion
/// scale ν, skew matrices, initial point and horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    /// State dimension d ≥ 2.
    pub d: usize,
    /// Mean-reversion rate κ ≥ 0 (units 1/time).
    pub kappa: T,
    /// Diffusion scale ν > 0 (units 1/√time).
    pub nu: T,
    /// Skew drift matrix A₀ (d×d).
    pub a0: DenseMatrix<T>,
    /// Skew noise matrices A₁..A_m (each d×d); `a.len()` is m.
    pub a: Vec<DenseMatrix<T>>,
    /// Initial point, |x0| < 1.
    pub x0: Vec<T>,
    /// Time horizon T > 0.
    pub horizon: T,
}

impl<T: Real> ModelParams<T> {
    /// Number of rotational noise components m.
    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// κ − ν²/2, the coefficient of the singular drift of the radial
    /// coordinate; the drift-implicit step is solvable iff this is positive.
    pub fn singular_drift_coeff(&self) -> T {
        self.kappa - self.nu * self.nu / real::<T>(2.0)
    }

    /// κ − ν²/2 + dν²/2, the linear drift coefficient of the radial
    /// coordinate.
    pub fn radial_linear_coeff(&self) -> T {
        let nu_sq = self.nu * self.nu;
        self.kappa - nu_sq / real::<T>(2.0) + real::<T>(self.d as f64) * nu_sq / real::<T>(2.0)
    }

    /// Isotropic model: no rotational terms (A₀ = 0, m = 0).
    pub fn isotropic(d: usize, kappa: T, nu: T, x0: Vec<T>, horizon: T) -> Self {
        Self {
            d,
            kappa,
            nu,
            a0: DenseMatrix::zeros(d, d),
            a: Vec::new(),
            x0,
            horizon,
        }
    }

    /// Parses a model from the TOML configuration format.
    ///
    /// Keys: `d`, `m` (optional, defaults to the number of matrices in `A`),
    /// `kappa`, `nu`, `A0` (optional, nested row-major array, defaults to
    /// zero), `A` (optional array of nested row-major matrices), `x0`, `T`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawModelConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        raw.into_params()
    }

    /// Re-serializes the parameters in the configuration key layout, for
    /// manifests that echo resolved inputs.
    pub fn to_config(&self) -> RawModelConfig {
        RawModelConfig {
            d: self.d,
            m: Some(self.m()),
            kappa: self.kappa.to_f64_lossy(),
            nu: self.nu.to_f64_lossy(),
            a0: Some(matrix_rows(&self.a0)),
            a: Some(self.a.iter().map(matrix_rows).collect()),
            x0: self.x0.iter().map(|v| v.to_f64_lossy()).collect(),
            horizon: self.horizon.to_f64_lossy(),
        }
    }
}

fn matrix_rows<T: Real>(m: &DenseMatrix<T>) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_f64_lossy()).collect())
        .collect()
}

/// Serde image of the model configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawModelConfig {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub kappa: f64,
    pub nu: f64,
    #[serde(rename = "A0", default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Vec<Vec<f64>>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<Vec<f64>>>>,
    pub x0: Vec<f64>,
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl RawModelConfig {
    pub fn into_params<T: Real>(self) -> Result<ModelParams<T>> {
        let d = self.d;
        let to_matrix = |rows: &[Vec<f64>]| -> Result<DenseMatrix<T>> {
            let converted: Vec<Vec<T>> = rows
                .iter()
                .map(|r| r.iter().map(|&v| real::<T>(v)).collect())
                .collect();
            DenseMatrix::from_rows(&converted)
        };
        let a0 = match &self.a0 {
            Some(rows) => to_matrix(rows)?,
            None => DenseMatrix::zeros(d, d),
        };
        let a: Vec<DenseMatrix<T>> = self
            .a
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .map(|rows| to_matrix(rows))
            .collect::<Result<_>>()?;
        if let Some(m) = self.m {
            if m != a.len() {
                return Err(Error::InvalidConfig(format!(
                    "m = {m} but A lists {} matrices",
                    a.len()
                )));
            }
        }
        Ok(ModelParams {
            d,
            kappa: real(self.kappa),
            nu: real(self.nu),
            a0,
            a,
            x0: self.x0.iter().map(|&v| real(v)).collect(),
            horizon: real(self.horizon),
        })
    }
}

/// Which parameter regimes hold, as plain threshold checks on κ/ν².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    /// κ/ν².
    pub ratio: f64,
    /// κ/ν² > √2 − 1: pathwise uniqueness holds for the SDE.
    pub pathwise_unique: bool,
    /// κ/ν² > 1/2: the drift-implicit radial step has a unique positive root.
    pub backward_solvable: bool,
    /// κ/ν² > 6: the L² convergence-rate guarantee applies.
    pub rate_theorem: bool,
    /// κ ≥ 1, ν = √2 (bit-exact) and all skew matrices zero: the distance
    /// between two solutions driven by the same noise is a.s. nonincreasing.
    pub swart_monotone: bool,
}

/// Ratio threshold for pathwise uniqueness.
pub fn pathwise_unique_threshold() -> f64 {
    std::f64::consts::SQRT_2 - 1.0
}

/// Ratio threshold for drift-implicit solvability.
pub const BACKWARD_SOLVABLE_THRESHOLD: f64 = 0.5;

/// Ratio threshold for the convergence-rate guarantee.
pub const RATE_THEOREM_THRESHOLD: f64 = 6.0;

/// Validates raw model parameters.
///
/// Structural problems (non-skew matrices, an initial point on or outside the
/// sphere, non-positive ν or T, inconsistent dimensions) are errors; parameter
/// regimes are reported as flags, never errors.
pub fn validate<T: Real>(params: &ModelParams<T>) -> Result<RegimeReport> {
    if params.d < 2 {
        return Err(Error::OutOfRange {
            name: "d",
            value: params.d as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    if !(params.nu > T::zero()) {
        return Err(Error::NonPositiveParam {
            name: "nu",
            value: params.nu.to_f64_lossy(),
        });
    }
    if !(params.horizon > T::zero()) {
        return Err(Error::NonPositiveParam {
            name: "T",
            value: params.horizon.to_f64_lossy(),
        });
    }
    if params.kappa < T::zero() {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: params.kappa.to_f64_lossy(),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if params.x0.len() != params.d {
        return Err(Error::DimensionMismatch {
            context: "x0",
            expected: params.d,
            got: params.x0.len(),
        });
    }
    for (index, matrix) in std::iter::once(&params.a0).chain(params.a.iter()).enumerate() {
        if matrix.rows() != params.d || matrix.cols() != params.d {
            return Err(Error::DimensionMismatch {
                context: "skew matrix",
                expected: params.d,
                got: matrix.rows().max(matrix.cols()),
            });
        }
        for i in 0..params.d {
            for j in 0..params.d {
                if matrix.get(i, j) != -matrix.get(j, i) {
                    return Err(Error::NonSkewMatrix {
                        index,
                        i,
                        j,
                        value: matrix.get(i, j).to_f64_lossy(),
                        mirrored: matrix.get(j, i).to_f64_lossy(),
                    });
                }
            }
        }
    }
    let x0_norm = norm(&params.x0);
    if x0_norm >= T::one() {
        return Err(Error::InitialPointOnBoundary {
            norm: x0_norm.to_f64_lossy(),
        });
    }

    let ratio = (params.kappa / (params.nu * params.nu)).to_f64_lossy();
    let rotation_free = params.a0.is_zero() && params.a.iter().all(DenseMatrix::is_zero);
    Ok(RegimeReport {
        ratio,
        pathwise_unique: ratio > pathwise_unique_threshold(),
        backward_solvable: ratio > BACKWARD_SOLVABLE_THRESHOLD,
        rate_theorem: ratio > RATE_THEOREM_THRESHOLD,
        swart_monotone: params.kappa >= T::one() && params.nu == T::SQRT_2 && rotation_free,
    })
}

/// The transformed state (Y₀, X₁..X_d).
///
/// For exact-process states Y₀ = √(1−|X|²), so Y₀² + |X|² = 1 and Y₀ ∈ [0,1].
/// Iterates of the drift-implicit scheme only satisfy Y₀ > 0; their X part is
/// unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState<T> {
    pub y0: T,
    pub x: Vec<T>,
}

/// Lifts a point of the ball to the transformed state (√(1−|x|²), x).
///
/// A radicand in [−tolerance, 0) is clamped to 0 rather than rejected, so that
/// states rounded just past the sphere still lift. Points further outside are
/// an error.
pub fn lift<T: Real>(x: &[T]) -> Result<AugmentedState<T>> {
    let ns = norm_sq(x);
    let radicand = T::one() - ns;
    if radicand < -real::<T>(BALL_TOLERANCE) {
        return Err(Error::OutsideBall {
            norm: ns.sqrt().to_f64_lossy(),
        });
    }
    Ok(AugmentedState {
        y0: radicand.max(T::zero()).sqrt(),
        x: x.to_vec(),
    })
}

/// Uniform time grid t_k = k·T/n, k = 0..n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub horizon: T,
    pub n: usize,
    pub dt: T,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(horizon: T, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGrid { n });
        }
        if !(horizon > T::zero()) {
            return Err(Error::NonPositiveParam {
                name: "T",
                value: horizon.to_f64_lossy(),
            });
        }
        Ok(Self {
            horizon,
            n,
            dt: horizon / real::<T>(n as f64),
        })
    }

    /// t_k = k·dt; t_n equals the horizon up to one rounding.
    pub fn time(&self, k: usize) -> T {
        real::<T>(k as f64) * self.dt
    }

    /// The grid with every step split into `r` substeps.
    pub fn refined(&self, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::IndivisibleRefinement { n: self.n, r });
        }
        Self::new(self.horizon, self.n * r)
    }

    /// The grid keeping every `r`-th point; `r` must divide n.
    pub fn coarsened(&self, r: usize) -> Result<Self> {
        if r == 0 || self.n % r != 0 {
            return Err(Error::IndivisibleRefinement { n: self.n, r });
        }
        Self::new(self.horizon, self.n / r)
    }
}
