//! Green-function propagation of arbitrary Q-distributions on the
//! quadrature plane.
//!
//! From a point source at β′ placed at time s, the distribution at time t
//! is Gaussian with mean
//!
//! ```text
//! μ_ss e^{iΔ_d t} + (β′ − μ_ss e^{iΔ_d s}) e^{−ν̄γ (t − s)}
//! ```
//!
//! and per-quadrature variance [1 − e^{−2ν̄γ(t−s)}] σ_ss². The mean is
//! affine in the source with a real contraction factor, so the kernel
//! factorizes into x and y parts and the convolution is done as two 1D
//! passes of direct summation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::gaussian;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::model::DerivedParams;

/// Mass tolerance for inputs and outputs of [`evolve_field`].
pub const MASS_TOLERANCE: f64 = 1e-4;
/// Fewest lattice cells allowed per kernel standard deviation.
pub const MIN_CELLS_PER_SIGMA: f64 = 3.0;

/// Q-density sampled on a lattice of the quadrature plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QField {
    pub lattice: Lattice,
    /// Row-major, y slow.
    pub values: Vec<f64>,
}

impl QField {
    pub fn from_fn(lattice: Lattice, f: impl Fn(Complex64) -> f64 + Sync) -> Self {
        let values = (0..lattice.len()).into_par_iter().map(|i| f(lattice.point(i))).collect();
        Self { lattice, values }
    }

    /// e^{−|β|²}|β|²/π, the one-photon ring.
    pub fn excited_ring(lattice: Lattice) -> Self {
        Self::from_fn(lattice, |b| {
            let r2 = b.norm_sqr();
            (-r2).exp() * r2 / PI
        })
    }

    /// Coherent-state Gaussian of variance 1/2 centred on `alpha0`.
    pub fn coherent(lattice: Lattice, alpha0: Complex64) -> Self {
        Self::from_fn(lattice, |b| gaussian(b, alpha0, 0.5))
    }

    pub fn mass(&self) -> f64 {
        self.lattice.integrate(&self.values)
    }

    pub fn mean(&self) -> Complex64 {
        let re = self.lattice.integrate_with(&self.values, |p, v| p.re * v);
        let im = self.lattice.integrate_with(&self.values, |p, v| p.im * v);
        Complex64::new(re, im) / self.mass()
    }

    /// Per-quadrature variance, E|β − mean|²/2.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        0.5 * self.lattice.integrate_with(&self.values, |p, v| (p - m).norm_sqr() * v) / self.mass()
    }

    /// Trapezoidal L¹ distance to another field on the same lattice.
    pub fn l1_distance(&self, other: &QField) -> f64 {
        assert_eq!(self.lattice, other.lattice, "fields live on different lattices");
        let diff: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).collect();
        self.lattice.integrate(&diff)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Default lattice: half-width max(6, |μ_ss| + 7σ_ss), 256 points a side,
/// centred on the origin. Holds the one-photon ring and coherent starts
/// up to |α₀| ≈ 2 with tail mass below 1e-9.
pub fn default_lattice(params: &DerivedParams) -> Lattice {
    let half = (6.0f64).max(params.mu_ss.norm() + 7.0 * params.sigma2_ss.sqrt());
    Lattice::square(Complex64::new(0.0, 0.0), half, 256)
}

/// Point-source variance after `elapsed` seconds.
pub fn kernel_variance(params: &DerivedParams, elapsed: f64) -> f64 {
    -(-2.0 * params.decay_rate() * elapsed).exp_m1() * params.sigma2_ss
}

/// Mean at `t` of the kernel started at `source` at time `s`.
pub fn kernel_mean(params: &DerivedParams, source: Complex64, s: f64, t: f64) -> Complex64 {
    let rot = |tau: f64| Complex64::from_polar(1.0, params.delta_d * tau);
    params.mu_ss * rot(t) + (source - params.mu_ss * rot(s)) * (-params.decay_rate() * (t - s)).exp()
}

/// G(β, t | β′, s).
pub fn green_function_between(params: &DerivedParams, beta: Complex64, source: Complex64, s: f64, t: f64) -> Result<f64> {
    if t <= s {
        return Err(Error::ZeroTime);
    }
    Ok(gaussian(beta, kernel_mean(params, source, s, t), kernel_variance(params, t - s)))
}

/// G(β | β₀, t) from a source placed at t = 0.
pub fn green_function(params: &DerivedParams, beta: Complex64, source: Complex64, t: f64) -> Result<f64> {
    green_function_between(params, beta, source, 0.0, t)
}

/// Propagates `initial` (given at t = 0) to time `t` by quadrature of the
/// convolution with [`green_function`]. The output lives on the same
/// lattice.
pub fn evolve_field(params: &DerivedParams, initial: &QField, t: f64) -> Result<QField> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let mass = initial.mass();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::FieldNotNormalized(mass));
    }
    if t == 0.0 {
        return Ok(initial.clone());
    }
    let lattice = initial.lattice;
    let variance = kernel_variance(params, t);
    let sigma = variance.sqrt();
    let cell = lattice.dx().max(lattice.dy());
    if sigma < MIN_CELLS_PER_SIGMA * cell {
        return Err(Error::GridTooCoarse { sigma, cell });
    }

    let shift = kernel_mean(params, Complex64::new(0.0, 0.0), 0.0, t);
    let contraction = (-params.decay_rate() * t).exp();
    let norm = 1.0 / (2.0 * PI * variance).sqrt();
    // K[out][src] = w_src · N(out − shift − k·src; σ²)
    let kernel = |n: usize, coord: &(dyn Fn(usize) -> f64 + Sync), weights: &[f64], offset: f64| -> Vec<f64> {
        let mut k = vec![0.0; n * n];
        k.par_chunks_mut(n).enumerate().for_each(|(o, row)| {
            let out = coord(o);
            for (src, slot) in row.iter_mut().enumerate() {
                let z = out - offset - contraction * coord(src);
                *slot = weights[src] * norm * (-z * z / (2.0 * variance)).exp();
            }
        });
        k
    };
    let (nx, ny) = (lattice.nx, lattice.ny);
    let kx = kernel(nx, &|i| lattice.x(i), &lattice.x_weights(), shift.re);
    let ky = kernel(ny, &|i| lattice.y(i), &lattice.y_weights(), shift.im);

    // pass over x: partial[iy_src][ix_out]
    let mut partial = vec![0.0; nx * ny];
    partial.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
        let src = &initial.values[iy * nx..(iy + 1) * nx];
        for (ix, slot) in row.iter_mut().enumerate() {
            let k = &kx[ix * nx..(ix + 1) * nx];
            *slot = k.iter().zip(src).map(|(a, b)| a * b).sum();
        }
    });
    // pass over y
    let mut values = vec![0.0; nx * ny];
    values.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
        let k = &ky[iy * ny..(iy + 1) * ny];
        for (iy_src, &w) in k.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let src = &partial[iy_src * nx..(iy_src + 1) * nx];
            for (slot, v) in row.iter_mut().zip(src) {
                *slot += w * v;
            }
        }
    });
    Ok(QField { lattice, values })
}

/// Samples of the mean trajectory plus the limit-cycle radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOverlay {
    pub times: Vec<f64>,
    pub means: Vec<Complex64>,
    pub limit_cycle_radius: f64,
}

/// Mean trajectory from `alpha0` on an increasing time grid.
pub fn trajectory_overlay(params: &DerivedParams, alpha0: Complex64, t_grid: &[f64]) -> Result<TrajectoryOverlay> {
    if t_grid.iter().any(|&t| t < 0.0) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimeGrid);
    }
    let means = t_grid.iter().map(|&t| kernel_mean(params, alpha0, 0.0, t)).collect();
    Ok(TrajectoryOverlay { times: t_grid.to_vec(), means, limit_cycle_radius: params.mu_ss.norm() })
}
