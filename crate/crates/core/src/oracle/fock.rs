use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::expm::expm;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest probability allowed outside the truncated space when preparing
/// a state.
pub const TRUNCATION_TAIL: f64 = 1e-8;

/// Ladder operators on the first `dim` oscillator levels.
#[derive(Debug, Clone)]
pub struct FockSpace {
    dim: usize,
    sqrt: Vec<f64>,
    pub lowering: DMatrix<Complex64>,
    pub raising: DMatrix<Complex64>,
    pub number: DMatrix<Complex64>,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        let sqrt: Vec<f64> = (0..=dim).map(|n| (n as f64).sqrt()).collect();
        let lowering = DMatrix::from_fn(dim, dim, |m, n| if n == m + 1 { Complex64::new(sqrt[n], 0.0) } else { ZERO });
        let raising = lowering.adjoint();
        let number = DMatrix::from_fn(dim, dim, |m, n| if m == n { Complex64::new(m as f64, 0.0) } else { ZERO });
        Ok(Self { dim, sqrt, lowering, raising, number })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// √n for n = 0..=dim.
    pub(crate) fn sqrt_table(&self) -> &[f64] {
        &self.sqrt
    }

    /// Number of levels needed to hold a state of mean amplitude up to
    /// `amplitude` with thermal excess `n_bar`.
    pub fn dim_for(amplitude: f64, n_bar: f64) -> usize {
        let occupation = amplitude * amplitude + n_bar;
        let spread = occupation.sqrt();
        ((occupation + 10.0 * spread + 25.0 + 40.0 * n_bar).ceil() as usize).max(30)
    }
}

/// Builds the ladder operators; see [`FockSpace::new`].
pub fn build_space(dim: usize) -> Result<FockSpace> {
    FockSpace::new(dim)
}

/// Density matrix in a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(v: &DVector<Complex64>) -> Self {
        Self { entries: v * v.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Frobenius norm of ρ − ρ†.
    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).norm()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Population of level `n`.
    pub fn population(&self, n: usize) -> f64 {
        self.entries[(n, n)].re
    }

    /// Copy into a space of dimension `dim`, zero-padding or cropping.
    pub fn resized(&self, dim: usize) -> Self {
        let old = self.dim();
        Self { entries: DMatrix::from_fn(dim, dim, |m, n| if m < old && n < old { self.entries[(m, n)] } else { ZERO }) }
    }
}

/// Coefficients e^{−|α|²/2} αⁿ/√n! of |α⟩ on the first `dim` levels
/// (not renormalized).
pub(crate) fn coherent_amplitudes(dim: usize, alpha: Complex64) -> DVector<Complex64> {
    let mut v = DVector::from_element(dim, ZERO);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    v[0] = c;
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        v[n] = c;
    }
    v
}

pub fn coherent_state(space: &FockSpace, alpha: Complex64) -> Result<DensityMatrix> {
    let v = coherent_amplitudes(space.dim(), alpha);
    let kept = v.norm_squared();
    let tail = 1.0 - kept;
    if tail > TRUNCATION_TAIL {
        return Err(Error::TruncationOverflow { dim: space.dim(), tail });
    }
    Ok(DensityMatrix::from_pure(&(v / Complex64::new(kept.sqrt(), 0.0))))
}

/// |1⟩⟨1|, the state whose Husimi function is e^{−|α|²}|α|²/π.
pub fn excited_state(space: &FockSpace) -> DensityMatrix {
    let mut entries = DMatrix::from_element(space.dim(), space.dim(), ZERO);
    entries[(1, 1)] = ONE;
    DensityMatrix { entries }
}

pub fn fock_state(space: &FockSpace, n: usize) -> DensityMatrix {
    let mut entries = DMatrix::from_element(space.dim(), space.dim(), ZERO);
    entries[(n, n)] = ONE;
    DensityMatrix { entries }
}

/// Thermal state of mean occupation `n_bar` (geometric populations).
pub fn thermal_state(space: &FockSpace, n_bar: f64) -> Result<DensityMatrix> {
    let r = n_bar / (n_bar + 1.0);
    let pops: Vec<f64> = (0..space.dim()).map(|n| r.powi(n as i32) / (n_bar + 1.0)).collect();
    let tail = r.powi(space.dim() as i32);
    if tail > TRUNCATION_TAIL {
        return Err(Error::TruncationOverflow { dim: space.dim(), tail });
    }
    let entries = DMatrix::from_fn(space.dim(), space.dim(), |m, n| if m == n { Complex64::new(pops[m], 0.0) } else { ZERO });
    Ok(DensityMatrix { entries })
}

/// Displacement operator D(μ) = exp(μa† − μ*a) on `dim` levels.
pub fn displacement_operator(dim: usize, mu: Complex64) -> Result<DMatrix<Complex64>> {
    let space = FockSpace::new(dim)?;
    let generator = &space.raising * mu - &space.lowering * mu.conj();
    Ok(expm(&generator, 1e-16))
}

/// Columns D(μ)|n⟩, n = 0..count, on the first `space.dim()` levels.
///
/// The exponential is taken in a padded space so that the truncation of the
/// generator does not reach the retained levels.
pub fn displaced_fock_vectors(space: &FockSpace, mu: Complex64, count: usize) -> Result<Vec<DVector<Complex64>>> {
    let dim = space.dim();
    let padded = 2 * dim + 20;
    let d = displacement_operator(padded, mu)?;
    (0..count)
        .map(|n| {
            let full = d.column(n);
            let v = DVector::from_iterator(dim, full.iter().take(dim).copied());
            let tail = 1.0 - v.norm_squared();
            if tail > TRUNCATION_TAIL {
                Err(Error::TruncationOverflow { dim, tail })
            } else {
                Ok(v)
            }
        })
        .collect()
}

/// Σ_n p_n |μ, n⟩⟨μ, n| over displaced Fock states.
pub fn displaced_mixture(space: &FockSpace, mu: Complex64, weights: &[f64]) -> Result<DensityMatrix> {
    let vectors = displaced_fock_vectors(space, mu, weights.len())?;
    let mut entries = DMatrix::from_element(space.dim(), space.dim(), ZERO);
    for (v, &p) in vectors.iter().zip(weights) {
        if p != 0.0 {
            entries += (v * v.adjoint()) * Complex64::new(p, 0.0);
        }
    }
    Ok(DensityMatrix { entries })
}

/// D(shift) ρ D(shift)†.
pub fn displace(space: &FockSpace, rho: &DensityMatrix, shift: Complex64) -> Result<DensityMatrix> {
    let dim = space.dim();
    let padded = 2 * dim + 20;
    let d = displacement_operator(padded, shift)?;
    let big = rho.resized(padded);
    let moved = &d * &big.entries * d.adjoint();
    let out = DensityMatrix { entries: moved.view((0, 0), (dim, dim)).into_owned() };
    let tail = 1.0 - out.trace().re / rho.trace().re;
    if tail > TRUNCATION_TAIL {
        return Err(Error::TruncationOverflow { dim, tail });
    }
    Ok(out)
}
