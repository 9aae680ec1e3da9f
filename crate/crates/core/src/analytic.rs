//! Closed-form evolution of the Husimi distribution.
//!
//! Starting from a coherent state |α₀⟩ the distribution stays Gaussian on
//! the quadrature plane,
//!
//! ```text
//! Q(α, t) = exp(−|α − μ(t)|² / 2σ²(t)) / 2πσ²(t)
//! μ(t)    = μ_ss e^{iΔ_d t} + (α₀ − μ_ss) e^{−ν̄γ t}
//! σ²(t)   = [1 − e^{−2ν̄γ t}] ν/4ν̄ + 1/2
//! ```
//!
//! The quadrature plane is the static frame in which the limit cycle is a
//! circle. The master equation itself lives in a displaced rotating frame;
//! [`DerivedParams::quadrature_to_master`] maps between the two and is what
//! [`fp_residual`] and the reference integrator use.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::model::DerivedParams;

/// Mean and per-quadrature variance of a Gaussian Q-distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub mean: Complex64,
    pub variance: f64,
}

impl GaussianState {
    pub fn density(&self, alpha: Complex64) -> f64 {
        gaussian(alpha, self.mean, self.variance)
    }

    pub fn peak(&self) -> f64 {
        1.0 / (2.0 * PI * self.variance)
    }
}

#[inline]
pub(crate) fn gaussian(alpha: Complex64, mean: Complex64, variance: f64) -> f64 {
    (-(alpha - mean).norm_sqr() / (2.0 * variance)).exp() / (2.0 * PI * variance)
}

/// A trajectory of the Gaussian solution from the initial mean `alpha0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpec {
    pub derived: DerivedParams,
    pub alpha0: Complex64,
}

impl EvolutionSpec {
    pub fn new(derived: DerivedParams, alpha0: Complex64) -> Self {
        Self { derived, alpha0 }
    }

    pub fn mean_at(&self, t: f64) -> Complex64 {
        debug_assert!(t >= 0.0);
        let d = &self.derived;
        d.mu_ss * Complex64::from_polar(1.0, d.delta_d * t) + (self.alpha0 - d.mu_ss) * (-d.decay_rate() * t).exp()
    }

    pub fn variance_at(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        let d = &self.derived;
        -(-2.0 * d.decay_rate() * t).exp_m1() * d.nu / (4.0 * d.nu_bar) + 0.5
    }

    pub fn state_at(&self, t: f64) -> GaussianState {
        GaussianState { mean: self.mean_at(t), variance: self.variance_at(t) }
    }

    /// Q-density on the quadrature plane.
    pub fn q_value(&self, alpha: Complex64, t: f64) -> f64 {
        self.state_at(t).density(alpha)
    }

    /// Q-density at a point of the master-equation frame.
    pub fn q_value_master(&self, alpha: Complex64, t: f64) -> f64 {
        self.q_value(self.derived.master_to_quadrature(alpha, t), t)
    }

    /// Mean qubit energy ħω_q′(|μ|² + 2σ² − 1) in joules.
    pub fn energy_at(&self, t: f64) -> f64 {
        HBAR * self.derived.omega_q_lin * self.photon_number_at(t)
    }

    /// Energy in units of ħω_q′.
    pub fn photon_number_at(&self, t: f64) -> f64 {
        self.mean_at(t).norm_sqr() + 2.0 * self.variance_at(t) - 1.0
    }
}

/// Per-quadrature Q variance at `t` for a start of variance `initial`.
/// Holds for any initial Q shape, not only Gaussians, because the
/// propagator contracts the start by e^{−ν̄γt} and adds Gaussian spread.
pub fn relaxed_variance(derived: &DerivedParams, initial: f64, t: f64) -> f64 {
    // monotone in t under rounding
    let filled = -(-2.0 * derived.decay_rate() * t).exp_m1();
    initial + (derived.sigma2_ss - initial) * filled
}

/// The limit-cycle Gaussian, taken at the phase reference t = 0.
pub fn steady_state(derived: &DerivedParams) -> GaussianState {
    GaussianState { mean: derived.mu_ss, variance: derived.sigma2_ss }
}

/// The limit-cycle Gaussian at time `t`, with its mean moved along the
/// circle of radius |μ_ss|.
pub fn limit_cycle_state(derived: &DerivedParams, t: f64) -> GaussianState {
    GaussianState {
        mean: derived.mu_ss * Complex64::from_polar(1.0, derived.delta_d * t),
        variance: derived.sigma2_ss,
    }
}

/// Husimi density of the thermal state of occupation n̄.
pub fn gibbs_q(derived: &DerivedParams, alpha: Complex64) -> f64 {
    let w = derived.n_bar + 1.0;
    (-alpha.norm_sqr() / w).exp() / (PI * w)
}

/// Geometric weights of the steady state over displaced Fock states
/// |μ_ss, n⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperPoissonState {
    pub mu_ss: Complex64,
    pub weights: Vec<f64>,
    /// 1 − Σ p_n over the retained levels.
    pub deficit: f64,
}

impl SuperPoissonState {
    /// Common ratio p_{n+1}/p_n = (2σ_ss² − 1)/2σ_ss².
    pub fn ratio(&self) -> f64 {
        match self.weights.as_slice() {
            [p0, ..] => 1.0 - p0,
            [] => 0.0,
        }
    }

    /// Mean occupation above the displacement, Σ n p_n.
    pub fn excess_photons(&self) -> f64 {
        self.weights.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

pub fn super_poisson(derived: &DerivedParams, n_max: usize) -> SuperPoissonState {
    let two_s = 2.0 * derived.sigma2_ss;
    let ratio = (two_s - 1.0) / two_s;
    let weights: Vec<f64> = (0..=n_max).map(|n| ratio.powi(n as i32) / two_s).collect();
    let deficit = ratio.powi(n_max as i32 + 1);
    SuperPoissonState { mu_ss: derived.mu_ss, weights, deficit }
}

/// [`super_poisson`] truncated at the first level where the retained
/// weight reaches `1 − tail`.
pub fn super_poisson_auto(derived: &DerivedParams, tail: f64) -> SuperPoissonState {
    let two_s = 2.0 * derived.sigma2_ss;
    let ratio = (two_s - 1.0) / two_s;
    // deficit after n_max is ratio^(n_max + 1)
    let n_max = if ratio <= tail { 0 } else { (tail.ln() / ratio.ln()).ceil() as usize - 1 };
    super_poisson(derived, n_max)
}

/// Default differencing step in α-plane units.
pub const FP_DEFAULT_STEP: f64 = 1e-3;

/// Residual budget relative to the peak density.
pub const FP_RESIDUAL_BUDGET: f64 = 1e-4;

/// Checks that the analytic Q satisfies the Fokker-Planck equation
///
/// ```text
/// ∂Q/∂t = [(ν̄γ + iΔ_d) ∂_α α − η ∂_α + h.c.] Q + (1 − ν)γ ∂²Q/∂α∂α*
/// ```
///
/// at the master-frame point `alpha` and time `t`, using central
/// differences of step `h` in Re α and Im α and `h / rate` in time, where
/// `rate` is [`DerivedParams::fastest_rate`]. The residual |LHS − RHS| is
/// returned in density units (divided by `rate`). It fails with
/// [`Error::StepTooLarge`] when the residual exceeds
/// [`FP_RESIDUAL_BUDGET`] times the peak density at `t`.
pub fn fp_residual(spec: &EvolutionSpec, alpha: Complex64, t: f64, h: f64) -> Result<f64> {
    let d = &spec.derived;
    let rate = d.fastest_rate();
    let ht = h / rate;
    if !(h > 0.0) || t <= ht {
        return Err(Error::InvalidArgument(format!(
            "fp_residual needs h > 0 and t > h/rate (t = {t:e}, h = {h:e})"
        )));
    }
    let q = |a: Complex64, s: f64| spec.q_value_master(a, s);
    let ex = Complex64::new(h, 0.0);
    let ey = Complex64::new(0.0, h);

    let q0 = q(alpha, t);
    let qxp = q(alpha + ex, t);
    let qxm = q(alpha - ex, t);
    let qyp = q(alpha + ey, t);
    let qym = q(alpha - ey, t);

    let dq_dt = (q(alpha, t + ht) - q(alpha, t - ht)) / (2.0 * ht);
    let qx = (qxp - qxm) / (2.0 * h);
    let qy = (qyp - qym) / (2.0 * h);
    let qxx = (qxp - 2.0 * q0 + qxm) / (h * h);
    let qyy = (qyp - 2.0 * q0 + qym) / (h * h);

    let d_alpha = Complex64::new(qx, -qy) * 0.5;
    let drift = Complex64::new(d.decay_rate(), d.delta_d) * (q0 + alpha * d_alpha) - d.eta * d_alpha;
    let diffusion = (1.0 - d.nu) * d.gamma * 0.25 * (qxx + qyy);
    let rhs = 2.0 * drift.re + diffusion;

    let residual = (dq_dt - rhs).abs() / rate;
    let budget = FP_RESIDUAL_BUDGET * spec.state_at(t).peak();
    if residual > budget {
        return Err(Error::StepTooLarge { residual, budget });
    }
    Ok(residual)
}
