//! Small dense linear-algebra helpers for hermitian complex matrices.
//!
//! Complex hermitian eigenproblems are solved through the standard real
//! embedding `H = A + iB  ->  [[A, -B], [B, A]]`, which is symmetric when `H`
//! is hermitian and whose spectrum is that of `H` with every eigenvalue
//! doubled. This keeps the crate on nalgebra's real symmetric solver.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::C64;

/// Apply a 2x2 operator to qubit `q` of an `n_qubits`-register state vector
/// (qubit 0 is the most significant bit).
pub fn apply_single_qubit(state: &mut DVector<C64>, u: &Matrix2<C64>, q: usize, n_qubits: usize) {
    let bit = 1 << (n_qubits - 1 - q);
    for idx in 0..state.len() {
        if idx & bit == 0 {
            let a = state[idx];
            let b = state[idx | bit];
            state[idx] = u[(0, 0)] * a + u[(0, 1)] * b;
            state[idx | bit] = u[(1, 0)] * a + u[(1, 1)] * b;
        }
    }
}

/// Real symmetric embedding of a hermitian complex matrix.
pub fn realify(h: &DMatrix<C64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = h[(i, j)];
            out[(i, j)] = v.re;
            out[(i, j + n)] = -v.im;
            out[(i + n, j)] = v.im;
            out[(i + n, j + n)] = v.re;
        }
    }
    out
}

fn unrealify(m: &DMatrix<f64>) -> DMatrix<C64> {
    let n = m.nrows() / 2;
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // Average the two copies of each block; they agree up to rounding.
            let re = 0.5 * (m[(i, j)] + m[(i + n, j + n)]);
            let im = 0.5 * (m[(i + n, j)] - m[(i, j + n)]);
            out[(i, j)] = C64::new(re, im);
        }
    }
    out
}

pub fn max_hermiticity_defect(h: &DMatrix<C64>) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a hermitian complex matrix, sorted in decreasing order.
pub fn hermitian_eigenvalues(h: &DMatrix<C64>) -> Result<Vec<f64>> {
    let defect = max_hermiticity_defect(h);
    let scale = h
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    if defect > 1e-8 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let eig = realify(h).symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // The embedding doubles every eigenvalue; keep one copy of each pair.
    Ok(vals.into_iter().step_by(2).collect())
}

/// Smallest eigenvalue of a hermitian complex matrix.
pub fn min_hermitian_eigenvalue(h: &DMatrix<C64>) -> Result<f64> {
    let vals = hermitian_eigenvalues(h)?;
    Ok(*vals.last().expect("nonempty spectrum"))
}

/// Positive-semidefinite square root of a hermitian matrix. Eigenvalues in
/// `[-clamp, 0)` are treated as zero; anything more negative is an error.
pub fn hermitian_sqrt(h: &DMatrix<C64>, clamp: f64) -> Result<DMatrix<C64>> {
    let defect = max_hermiticity_defect(h);
    let scale = h
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    if defect > 1e-8 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let eig = realify(h).symmetric_eigen();
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < 0.0 {
            if *v < -clamp {
                return Err(Error::IndefiniteCovariance {
                    min_eigenvalue: *v,
                    tolerance: clamp,
                });
            }
            *v = 0.0;
        }
        *v = v.sqrt();
    }
    let d = DMatrix::from_diagonal(&vals);
    let sqrt_real = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    Ok(unrealify(&sqrt_real))
}

/// Factor `L` of a real symmetric PSD matrix with `L L^T = K`, via the
/// symmetric eigendecomposition. Eigenvalues in `[-rel_tol * max_eig, 0)`
/// are clamped to zero (rounding makes borderline PSD matrices slightly
/// indefinite); anything more negative is reported as an indefiniteness
/// error naming the most negative eigenvalue.
pub fn psd_factor(k: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let eig = k.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let tol = rel_tol * max_eig.max(f64::MIN_POSITIVE);
    let most_negative = eig.eigenvalues.iter().copied().fold(0.0f64, f64::min);
    if most_negative < -tol {
        return Err(Error::IndefiniteCovariance {
            min_eigenvalue: most_negative,
            tolerance: tol,
        });
    }
    let sqrt = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()),
    );
    let mut out = eig.eigenvectors;
    for (mut col, s) in out.column_iter_mut().zip(sqrt.iter()) {
        col *= *s;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hermitian_eigenvalues_known() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
        let h =
            DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let vals = hermitian_eigenvalues(&h).unwrap();
        assert_abs_diff_eq!(vals[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.3, 0.4),
                c(0.0, -0.2),
                c(0.3, -0.4),
                c(1.5, 0.0),
                c(0.1, 0.0),
                c(0.0, 0.2),
                c(0.1, 0.0),
                c(1.0, 0.0),
            ],
        );
        // Make it comfortably PSD.
        let h = &a * a.adjoint();
        let s = hermitian_sqrt(&h, 1e-12).unwrap();
        let back = &s * &s;
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(back[(i, j)].re, h[(i, j)].re, epsilon = 1e-10);
                assert_abs_diff_eq!(back[(i, j)].im, h[(i, j)].im, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let h =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(hermitian_eigenvalues(&h).is_err());
    }

    #[test]
    fn psd_factor_reproduces_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let l = psd_factor(&m, 1e-12).unwrap();
        let back = &l * l.transpose();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(back[(i, j)], m[(i, j)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn psd_factor_flags_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        match psd_factor(&m, 1e-10) {
            Err(Error::IndefiniteCovariance { min_eigenvalue, .. }) => {
                assert_abs_diff_eq!(min_eigenvalue, -0.5, epsilon = 1e-12);
            }
            other => panic!("expected indefiniteness error, got {other:?}"),
        }
        // A tiny negative eigenvalue within the relative tolerance is clamped.
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-13]);
        assert!(psd_factor(&m, 1e-10).is_ok());
    }
}
