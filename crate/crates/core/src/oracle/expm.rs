//! Dense complex matrix exponential by scaling and squaring.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest one-norm the Taylor series is evaluated at after scaling.
const SCALED_NORM: f64 = 0.25;
const MAX_TERMS: usize = 30;

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// e^M: scale M by 2^-s so that ‖M‖₁ ≤ 1/4, sum the Taylor series until
/// the next term is below `tol` relative to the partial sum, then square
/// s times.
pub fn expm(m: &DMatrix<Complex64>, tol: f64) -> DMatrix<Complex64> {
    assert!(m.is_square(), "expm needs a square matrix");
    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > SCALED_NORM { (norm / SCALED_NORM).log2().ceil() as u32 } else { 0 };
    let scaled = m * Complex64::new(0.5f64.powi(squarings as i32), 0.0);

    let mut sum = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=MAX_TERMS {
        term = &term * &scaled * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if one_norm(&term) <= tol * one_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_and_nilpotent() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-3.0, 2.0)]));
        let e = expm(&d, 1e-16);
        assert!((e[(0, 0)] - c(1.0, 0.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - c(-3.0, 2.0).exp()).norm() < 1e-15);
        let n = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(5.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let e = expm(&n, 1e-16);
        assert!((e[(0, 1)] - c(5.0, 1.0)).norm() < 1e-13);
        assert!((e[(1, 0)]).norm() < 1e-15);
    }

    // exp(iH) through the Hermitian eigendecomposition, V e^{iλ} V†.
    #[test]
    fn agrees_with_spectral_route() {
        let n = 12;
        let h = DMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (i as f64, j as f64);
            if i == j { c(a.sin() * 3.0, 0.0) } else { c((a * b + 1.0).cos(), (a - b) * 0.3) }
        });
        let h = (&h + h.adjoint()) * c(0.5, 0.0);
        let eig = SymmetricEigen::new(h.clone());
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| c(0.0, l).exp()));
        let spectral = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
        let direct = expm(&(h * c(0.0, 1.0)), 1e-16);
        assert!((direct - spectral).norm() < 1e-11);
    }
}
