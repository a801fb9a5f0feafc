//! Small dense matrix/vector utilities.
//!
//! Only what the schemes and the moment formula need: skew-matrix application,
//! the skew identities used by the radial dynamics, and a matrix exponential
//! for the moment generator. Matrices here are tiny (d ≤ a few, generator
//! truncation ≤ 32), so everything is stored dense and computed naively.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Dot product with a fixed left-to-right summation order.
///
/// The order matters: reproducibility guarantees elsewhere in the crate rely
/// on bit-stable arithmetic, so vector reductions never reassociate.
#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (&ai, &bi) in a.iter().zip(b.iter()) {
        acc = acc + ai * bi;
    }
    acc
}

/// Squared Euclidean norm, fixed summation order.
#[inline]
pub fn norm_sq<T: Real>(x: &[T]) -> T {
    dot(x, x)
}

/// Euclidean norm.
#[inline]
pub fn norm<T: Real>(x: &[T]) -> T {
    norm_sq(x).sqrt()
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds a matrix from nested row vectors, checking that rows are even.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    context: "matrix row",
                    expected: c,
                    got: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(r, c, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    /// Exact entrywise skew-symmetry check: `a_ij == -a_ji` with no tolerance.
    pub fn is_skew(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) != -self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == T::zero())
    }

    /// Matrix–vector product `A x`.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.rows];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    /// Matrix–vector product writing into a caller-provided buffer.
    pub fn apply_into(&self, x: &[T], out: &mut [T]) -> Result<()> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                got: x.len(),
            });
        }
        debug_assert_eq!(out.len(), self.rows);
        for i in 0..self.rows {
            out[i] = dot(&self.entries[i * self.cols..(i + 1) * self.cols], x);
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix sum",
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        let mut best = T::zero();
        for j in 0..self.cols {
            let mut sum = T::zero();
            for i in 0..self.rows {
                sum += self.get(i, j).abs();
            }
            if sum > best {
                best = sum;
            }
        }
        best
    }

    pub fn norm_frobenius(&self) -> T {
        norm(&self.entries)
    }
}

/// Evaluates the two skew identities at a point: returns
/// `(⟨Ax,x⟩, ⟨A²x,x⟩, -|Ax|²)`.
///
/// For skew-symmetric `A` the first is 0 and the last two coincide; this is
/// what removes the rotational noise from the radial dynamics. Used by
/// property tests, not by the stepping hot path.
pub fn skew_identities_check<T: Real>(a: &DenseMatrix<T>, x: &[T]) -> Result<(T, T, T)> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let ax = a.apply(x)?;
    let aax = a.apply(&ax)?;
    Ok((dot(&ax, x), dot(&aax, x), -norm_sq(&ax)))
}

/// Matrix exponential `e^{tG}` by scaling-and-squaring with a fixed-order
/// truncated Taylor series.
///
/// The argument is scaled so that `‖tG/2^s‖₁ ≤ 0.5`, the series is summed to
/// order 13 (truncation error below 2^-14/14! relative at that norm), and the
/// result is squared back `s` times. Adequate for the small generator
/// matrices used here; no balancing is applied.
pub fn expm<T: Real>(g: &DenseMatrix<T>, t: T) -> Result<DenseMatrix<T>> {
    if !g.is_square() {
        return Err(Error::NonSquare {
            rows: g.rows(),
            cols: g.cols(),
        });
    }
    if t < T::zero() {
        return Err(Error::OutOfRange {
            name: "t",
            value: t.to_f64_lossy(),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let n = g.rows();
    let scaled = g.scale(t);
    let norm = scaled.norm_one().to_f64_lossy();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let base = scaled.scale(real::<T>(0.5).powi(squarings as i32));

    const SERIES_ORDER: usize = 13;
    let mut acc = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for j in 1..=SERIES_ORDER {
        term = term.matmul(&base)?.scale(T::one() / real::<T>(j as f64));
        acc = acc.add(&term)?;
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation_generator() -> DenseMatrix<f64> {
        DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap()
    }

    #[test]
    fn apply_identity_is_identity() {
        let id = DenseMatrix::<f64>::identity(3);
        let x = vec![1.5, -2.0, 0.25];
        assert_eq!(id.apply(&x).unwrap(), x);
    }

    #[test]
    fn apply_rotation_generator() {
        let a = rotation_generator();
        assert_eq!(a.apply(&[1.0, 0.0]).unwrap(), vec![0.0, -1.0]);
    }

    #[test]
    fn apply_scaled_rotation() {
        // direct arithmetic: ((0,10),(-10,0)) * (0.7,0.7) = (7,-7)
        let a = DenseMatrix::<f64>::from_rows(&[vec![0.0, 10.0], vec![-10.0, 0.0]]).unwrap();
        let y = a.apply(&[0.7, 0.7]).unwrap();
        assert!((y[0] - 7.0).abs() < 1e-14);
        assert!((y[1] + 7.0).abs() < 1e-14);
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let a = rotation_generator();
        assert!(matches!(
            a.apply(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn skew_check_is_exact() {
        let mut a = rotation_generator();
        assert!(a.is_skew());
        a.set(0, 1, 1.0 + 1e-15);
        assert!(!a.is_skew());
    }

    #[test]
    fn skew_identities_on_rotation_generator() {
        // A² = -I, so ⟨A²x,x⟩ = -|x|² = -1 = -|Ax|² at a unit x.
        let a = rotation_generator();
        let (inner, square_inner, neg_norm) = skew_identities_check(&a, &[1.0, 0.0]).unwrap();
        assert_eq!(inner, 0.0);
        assert!((square_inner + 1.0).abs() < 1e-15);
        assert!((neg_norm + 1.0).abs() < 1e-15);
    }

    #[test]
    fn skew_identities_on_zero_matrix() {
        let z = DenseMatrix::<f64>::zeros(3, 3);
        let (i1, i2, i3) = skew_identities_check(&z, &[0.3, -0.4, 1.0]).unwrap();
        assert_eq!((i1, i2, i3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn expm_at_zero_is_identity() {
        let g = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, -4.0]]).unwrap();
        assert_eq!(expm(&g, 0.0).unwrap(), DenseMatrix::identity(2));
    }

    #[test]
    fn expm_diagonal() {
        let g = DenseMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let e = expm(&g, 0.5).unwrap();
        assert!((e.get(0, 0) - (-0.5f64).exp()).abs() < 1e-14);
        assert!((e.get(1, 1) - 1.0f64.exp()).abs() < 1e-14);
        assert_eq!(e.get(0, 1), 0.0);
        assert_eq!(e.get(1, 0), 0.0);
    }

    #[test]
    fn expm_nilpotent_terminates_exactly() {
        let g = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let e = expm(&g, 1.0).unwrap();
        assert_eq!(e.get(0, 0), 1.0);
        assert_eq!(e.get(0, 1), 1.0);
        assert_eq!(e.get(1, 0), 0.0);
        assert_eq!(e.get(1, 1), 1.0);
    }

    #[test]
    fn expm_rejects_non_square() {
        let g = DenseMatrix::<f64>::zeros(2, 3);
        assert!(matches!(expm(&g, 1.0), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn expm_first_order_matches_finite_difference() {
        // (expm(G,h) - I)/h -> G with O(h) error; the error ratio between
        // h=1e-3 and h=1e-4 should be about 10.
        let g = DenseMatrix::from_rows(&[vec![-2.0, 1.0], vec![0.5, -1.0]]).unwrap();
        let err_at = |h: f64| -> f64 {
            let e = expm(&g, h).unwrap();
            let mut worst = 0.0f64;
            for i in 0..2 {
                for j in 0..2 {
                    let id = if i == j { 1.0 } else { 0.0 };
                    let fd = (e.get(i, j) - id) / h;
                    worst = worst.max((fd - g.get(i, j)).abs());
                }
            }
            worst
        };
        let (e3, e4) = (err_at(1e-3), err_at(1e-4));
        let ratio = e3 / e4;
        assert!(ratio > 5.0 && ratio < 20.0, "ratio = {ratio}");
    }
}
