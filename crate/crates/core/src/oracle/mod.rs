//! Brute-force reference: the master equation integrated directly on a
//! truncated Fock space, with Husimi-Q and moment readout.
//!
//! The integrator works in the displaced rotating frame of the master
//! equation. Use [`DerivedParams::quadrature_to_master`] to place an
//! initial state given on the quadrature plane, and
//! [`DerivedParams::master_to_quadrature`] to bring readouts back.
//!
//! [`DerivedParams::quadrature_to_master`]: crate::model::DerivedParams::quadrature_to_master
//! [`DerivedParams::master_to_quadrature`]: crate::model::DerivedParams::master_to_quadrature

mod evolve;
mod expm;
mod fock;

pub use evolve::{
    default_step, evolve, generator_bound, evolve_fixed_step, evolve_keep_states, husimi_q, moments, rhs, Moments, OracleRun,
    OracleSample, HERMITICITY_TOLERANCE, TRACE_TOLERANCE,
};
pub use expm::expm;
pub use fock::{
    build_space, coherent_state, displace, displaced_fock_vectors, displaced_mixture, displacement_operator,
    excited_state, fock_state, thermal_state, DensityMatrix, FockSpace, TRUNCATION_TAIL,
};

use num_complex::Complex64;

use crate::analytic::{relaxed_variance, super_poisson_auto, EvolutionSpec};
use crate::error::Result;
use crate::model::DerivedParams;

/// Coherent state for the quadrature-plane mean `alpha0`, placed in the
/// master-equation frame at t = 0.
pub fn coherent_initial(space: &FockSpace, params: &DerivedParams, alpha0: Complex64) -> Result<DensityMatrix> {
    coherent_state(space, params.quadrature_to_master(alpha0, 0.0))
}

/// The one-photon ring |1⟩⟨1| of the quadrature plane, placed in the
/// master-equation frame at t = 0.
pub fn excited_initial(space: &FockSpace, params: &DerivedParams) -> Result<DensityMatrix> {
    displace(space, &excited_state(space), Complex64::new(params.alpha_d, 0.0))
}

/// The steady state as a mixture of displaced Fock states in the
/// master-equation frame. The displacement is the frame image of μ_ss,
/// which does not move in that frame.
pub fn steady_state_density(space: &FockSpace, params: &DerivedParams, tail: f64) -> Result<DensityMatrix> {
    let sp = super_poisson_auto(params, tail);
    displaced_mixture(space, params.master_frame_fixed_point(), &sp.weights)
}

/// Mean of a master-frame readout, mapped to the quadrature plane.
pub fn quadrature_mean(params: &DerivedParams, sample: &OracleSample) -> Complex64 {
    params.master_to_quadrature(sample.moments.mean, sample.t)
}

/// Truncation for a run from `alpha0` up to `t_end`: the largest
/// master-frame amplitude along the analytic mean, fed to
/// [`FockSpace::dim_for`].
pub fn suggested_dim(params: &DerivedParams, alpha0: Complex64, t_end: f64) -> usize {
    let spec = EvolutionSpec::new(*params, alpha0);
    let n = 2000;
    let amplitude = (0..=n)
        .map(|k| {
            let t = t_end * k as f64 / n as f64;
            params.quadrature_to_master(spec.mean_at(t), t).norm()
        })
        .fold(0.0, f64::max);
    FockSpace::dim_for(amplitude + 1.0, params.n_bar)
}

/// Oracle readout against the closed form, sample by sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub t: Vec<f64>,
    pub analytic_mean: Vec<Complex64>,
    pub oracle_mean: Vec<Complex64>,
    pub analytic_variance: Vec<f64>,
    pub oracle_variance: Vec<f64>,
}

impl Comparison {
    /// Builds the comparison for a run started from a state with
    /// quadrature mean `alpha0` and Q variance `initial_variance`.
    pub fn new(run: &OracleRun, alpha0: Complex64, initial_variance: f64) -> Self {
        let d = &run.params;
        let spec = EvolutionSpec::new(*d, alpha0);
        let t: Vec<f64> = run.samples.iter().map(|s| s.t).collect();
        Self {
            analytic_mean: t.iter().map(|&t| spec.mean_at(t)).collect(),
            oracle_mean: run.samples.iter().map(|s| quadrature_mean(d, s)).collect(),
            analytic_variance: t.iter().map(|&t| relaxed_variance(d, initial_variance, t)).collect(),
            oracle_variance: run.samples.iter().map(|s| s.moments.second_central).collect(),
            t,
        }
    }

    /// max |Δμ| over the run, relative to the largest analytic |μ|.
    pub fn max_rel_err_mean(&self) -> f64 {
        let scale = self.analytic_mean.iter().map(|m| m.norm()).fold(0.0, f64::max);
        let worst = self.analytic_mean.iter().zip(&self.oracle_mean).map(|(a, o)| (a - o).norm()).fold(0.0, f64::max);
        if scale > 0.0 { worst / scale } else { worst }
    }

    /// max |Δσ²|/σ².
    pub fn max_rel_err_variance(&self) -> f64 {
        self.analytic_variance
            .iter()
            .zip(&self.oracle_variance)
            .map(|(a, o)| (a - o).abs() / a)
            .fold(0.0, f64::max)
    }
}
