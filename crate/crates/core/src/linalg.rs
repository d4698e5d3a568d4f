//! Dense eigendecomposition of small general complex matrices.
//!
//! nalgebra reduces `A` to Hessenberg form; a single-shift complex QR
//! iteration with Givens rotations then yields the Schur form `A = Q T Q†`.
//! Wilkinson shifts are replaced by exceptional shifts every tenth sweep
//! without deflation, which breaks the cycles plain shifted QR falls into on
//! symmetric matrices with zero diagonal. Eigenvectors of `T` come from
//! back-substitution and are rotated back with `Q`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Largest dimension handled by [`eigendecompose`].
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} exceeds the small-matrix limit of {MAX_DIM}")]
    TooLarge(usize),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("QR iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error(
        "eigenpair {index} has residual {residual:.3e} above {tolerance:.3e} \
         (matrix is defective or nearly so)"
    )]
    Residual {
        index: usize,
        residual: f64,
        tolerance: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    /// Unit-norm right eigenvectors; column `k` pairs with `values[k]`.
    pub vectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> DVector<Complex64> {
        self.vectors.column(k).into_owned()
    }

    /// Largest `|⟨v_i, v_j⟩|` over distinct pairs; close to 1 when two
    /// eigenvectors have (nearly) merged.
    pub fn max_overlap(&self) -> f64 {
        let n = self.values.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let dot = self.vectors.column(i).dotc(&self.vectors.column(j));
                worst = worst.max(dot.norm());
            }
        }
        worst
    }
}

/// Relative residual tolerance: `‖Av − λv‖ ≤ 1e-8 ‖A‖_F`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Iteration budget per eigenvalue, as in the reference LAPACK driver.
const SWEEPS_PER_EIGENVALUE: usize = 30;

/// Rotation `[c, s; -s̄, c]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, a / na * b.conj() / r)
}

fn rotate_rows(
    h: &mut DMatrix<Complex64>,
    i: usize,
    cols: std::ops::Range<usize>,
    c: f64,
    s: Complex64,
) {
    for col in cols {
        let (x, y) = (h[(i, col)], h[(i + 1, col)]);
        h[(i, col)] = x * c + s * y;
        h[(i + 1, col)] = -s.conj() * x + y * c;
    }
}

fn rotate_cols(
    h: &mut DMatrix<Complex64>,
    j: usize,
    rows: std::ops::Range<usize>,
    c: f64,
    s: Complex64,
) {
    for row in rows {
        let (x, y) = (h[(row, j)], h[(row, j + 1)]);
        h[(row, j)] = x * c + s.conj() * y;
        h[(row, j + 1)] = -s * x + y * c;
    }
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let (l1, l2) = (mean + disc, mean - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition `(Q, T)` with `A = Q T Q†`.
fn schur(a: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), EigenError> {
    let n = a.nrows();
    let (mut q, mut h) = nalgebra::linalg::Hessenberg::new(a.clone()).unpack();
    let zero = Complex64::new(0.0, 0.0);
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = zero;
        }
    }
    let budget = SWEEPS_PER_EIGENVALUE * n.max(1);
    let mut total = 0;
    let mut hi = n.saturating_sub(1);
    let mut sweeps = 0;
    while hi > 0 {
        let block_norm = h.norm();
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if scale == 0.0 {
                scale = block_norm;
            }
            if sub <= f64::EPSILON * scale || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = zero;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            sweeps = 0;
            continue;
        }
        if total == budget {
            return Err(EigenError::NoConvergence(budget));
        }
        total += 1;
        sweeps += 1;

        let shift = if sweeps % 10 == 0 {
            h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // Implicit single-shift sweep over the active block lo..=hi.
        let (mut x, mut y) = (h[(lo, lo)] - shift, h[(lo + 1, lo)]);
        for k in lo..hi {
            let (c, s) = givens(x, y);
            let first_col = if k == lo { lo } else { k - 1 };
            rotate_rows(&mut h, k, first_col..n, c, s);
            rotate_cols(&mut h, k, 0..(k + 3).min(hi + 1), c, s);
            rotate_cols(&mut q, k, 0..n, c, s);
            if k > lo {
                h[(k + 1, k - 1)] = zero;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    Ok((q, h))
}

/// Eigenvalues only, in Schur order. No residual check is made, so this
/// also serves defective matrices.
pub fn eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>, EigenError> {
    check_input(a)?;
    let (_, t) = schur(a)?;
    Ok((0..a.nrows()).map(|k| t[(k, k)]).collect())
}

fn check_input(a: &DMatrix<Complex64>) -> Result<(), EigenError> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(EigenError::NotSquare { rows, cols });
    }
    if rows > MAX_DIM {
        return Err(EigenError::TooLarge(rows));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    Ok(())
}

/// Eigenvalues and unit right eigenvectors of a general complex matrix.
pub fn eigendecompose(a: &DMatrix<Complex64>) -> Result<EigenDecomposition, EigenError> {
    check_input(a)?;
    let n = a.nrows();
    let (q, t) = schur(a)?;

    let scale = t.norm().max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    let zero = Complex64::new(0.0, 0.0);

    for k in 0..n {
        let lambda = t[(k, k)];
        values.push(lambda);
        // Solve (T - λI) x = 0 with x_k = 1 and x_j = 0 for j > k.
        let mut x = DVector::<Complex64>::from_element(n, zero);
        x[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = zero;
            for j in i + 1..=k {
                s += t[(i, j)] * x[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < tiny {
                d = Complex64::new(tiny, 0.0);
            }
            x[i] = -s / d;
        }
        let mut v = &q * x;
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        vectors.set_column(k, &v);
    }

    let a_norm = a.norm();
    let tolerance = RESIDUAL_TOLERANCE * a_norm.max(f64::MIN_POSITIVE);
    for (k, &lambda) in values.iter().enumerate() {
        let v = vectors.column(k);
        let r = a * v - v * lambda;
        let residual = r.norm();
        if residual > tolerance {
            return Err(EigenError::Residual {
                index: k,
                residual,
                tolerance,
            });
        }
    }
    Ok(EigenDecomposition { values, vectors })
}
