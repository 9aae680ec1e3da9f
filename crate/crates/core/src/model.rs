//! Physical inputs and the closed-form symbols derived from them.
//!
//! Every frequency and rate is angular (rad/s). Constructors taking
//! `*_over_2pi` arguments accept ordinary frequencies in Hz and multiply by
//! 2π on the way in.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B, TWO_PI};
use crate::error::{Error, Result};

/// Experiment-level inputs of the qubit, defect, bath and drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Linearized qubit frequency ω_q′.
    pub omega_q_lin: f64,
    /// Defect level spacing ω_c.
    pub omega_c: f64,
    /// Drive frequency ω_d.
    pub omega_d: f64,
    /// Qubit-defect coupling g.
    pub g: f64,
    /// Defect relaxation rate γ_c.
    pub gamma_c: f64,
    /// Drive strength Ω. Zero switches the drive off.
    pub drive: f64,
    /// Bath temperature in kelvin.
    pub temperature: f64,
}

impl PhysicalParams {
    /// Builds parameters from detunings, all given as ordinary frequencies
    /// in Hz: `delta_c = ω_q′ − ω_c`, `delta_d = ω_q′ − ω_d`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_detunings_over_2pi(
        omega_q_lin: f64,
        delta_c: f64,
        delta_d: f64,
        g: f64,
        gamma_c: f64,
        drive: f64,
        temperature: f64,
    ) -> Self {
        Self {
            omega_q_lin: TWO_PI * omega_q_lin,
            omega_c: TWO_PI * (omega_q_lin - delta_c),
            omega_d: TWO_PI * (omega_q_lin - delta_d),
            g: TWO_PI * g,
            gamma_c: TWO_PI * gamma_c,
            drive: TWO_PI * drive,
            temperature,
        }
    }

    /// Common device of the phase study: ω_q′/2π = 4.5 GHz,
    /// Δ_c/2π = 110 kHz, g/2π = 400 kHz, γ_c/2π = 1 MHz, T = 10 mK.
    /// Only the drive is left to the caller.
    pub fn reference_device(delta_d_over_2pi: f64, drive_over_2pi: f64) -> Self {
        Self::from_detunings_over_2pi(4.5e9, 110e3, delta_d_over_2pi, 400e3, 1e6, drive_over_2pi, 0.010)
    }

    /// Same device with a different drive.
    pub fn with_drive_over_2pi(self, delta_d_over_2pi: f64, drive_over_2pi: f64) -> Self {
        Self {
            omega_d: self.omega_q_lin - TWO_PI * delta_d_over_2pi,
            drive: TWO_PI * drive_over_2pi,
            ..self
        }
    }

    pub fn delta_d(&self) -> f64 {
        self.omega_q_lin - self.omega_d
    }

    pub fn delta_c(&self) -> f64 {
        self.omega_q_lin - self.omega_c
    }

    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("omega_q_lin", self.omega_q_lin),
            ("omega_c", self.omega_c),
            ("omega_d", self.omega_d),
            ("g", self.g),
            ("gamma_c", self.gamma_c),
            ("temperature", self.temperature),
        ];
        for (name, value) in strictly_positive.into_iter().chain([("drive", self.drive)]) {
            if !value.is_finite() {
                return Err(Error::NonFinite { name, value });
            }
        }
        for (name, value) in strictly_positive {
            if value <= 0.0 {
                return Err(Error::NonPositiveInput { name, value });
            }
        }
        if self.drive < 0.0 {
            return Err(Error::NonPositiveInput { name: "drive", value: self.drive });
        }
        Ok(())
    }
}

/// All closed-form symbols the dynamics depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// ω_q′, kept for the energy readout.
    pub omega_q_lin: f64,
    /// Δ_d = ω_q′ − ω_d.
    pub delta_d: f64,
    /// Δ_c = ω_q′ − ω_c.
    pub delta_c: f64,
    /// α_d = Ω/Δ_d.
    pub alpha_d: f64,
    /// Thermal inversion ν of the defect.
    pub nu: f64,
    /// ν̄ = 1/2 − ν.
    pub nu_bar: f64,
    /// Equivalent photon number n̄ = ν/2ν̄.
    pub n_bar: f64,
    /// Defect-mediated decay rate γ.
    pub gamma: f64,
    /// Effective drive under relaxation η.
    pub eta: f64,
    /// Limit-cycle point μ_ss.
    pub mu_ss: Complex64,
    /// Steady-state variance σ_ss² = ν/4ν̄ + 1/2.
    pub sigma2_ss: f64,
}

impl DerivedParams {
    /// Envelope decay rate ν̄γ of the mean.
    pub fn decay_rate(&self) -> f64 {
        self.nu_bar * self.gamma
    }

    /// Time after which the transient is treated as gone: ten envelope
    /// decay times or ten limit-cycle periods, whichever is longer.
    pub fn relaxation_horizon(&self) -> f64 {
        (10.0 / self.decay_rate()).max(10.0 * TWO_PI / self.delta_d.abs())
    }

    /// Largest rate in the generator, used to pick integration and
    /// differencing steps.
    pub fn fastest_rate(&self) -> f64 {
        self.delta_d.abs().max(self.decay_rate()).max(self.eta.abs())
    }

    /// Steady-state mean in the displaced rotating frame of the master
    /// equation, η/(ν̄γ + iΔ_d). Equals `mu_ss + alpha_d`.
    pub fn master_frame_fixed_point(&self) -> Complex64 {
        self.eta / Complex64::new(self.decay_rate(), self.delta_d)
    }

    /// Maps a quadrature-plane coordinate β at time `t` to the displaced
    /// rotating frame in which the master equation is written:
    /// α = β·e^{−iΔ_d t} + α_d.
    pub fn quadrature_to_master(&self, beta: Complex64, t: f64) -> Complex64 {
        beta * Complex64::from_polar(1.0, -self.delta_d * t) + self.alpha_d
    }

    /// Inverse of [`quadrature_to_master`](Self::quadrature_to_master):
    /// β = e^{iΔ_d t}(α − α_d).
    pub fn master_to_quadrature(&self, alpha: Complex64, t: f64) -> Complex64 {
        (alpha - self.alpha_d) * Complex64::from_polar(1.0, self.delta_d * t)
    }
}

/// Computes every derived symbol.
pub fn derive(p: &PhysicalParams) -> Result<DerivedParams> {
    p.validate()?;
    let delta_d = p.delta_d();
    if delta_d == 0.0 {
        return Err(Error::ResonantDrive);
    }
    let delta_c = p.delta_c();
    let x = boltzmann_exponent(p.omega_c, p.temperature);
    let nu = fermi(x);
    let nu_bar = 0.5 * (0.5 * x).tanh();
    let n_bar = nu / (2.0 * nu_bar);
    let gamma = 2.0 * p.g * p.g * p.gamma_c / (p.gamma_c * p.gamma_c + delta_c * delta_c);
    let alpha_d = p.drive / delta_d;
    let eta = drive_decay(alpha_d, p.g, p.gamma_c, delta_d, delta_c, nu);
    let mu_ss = eta / Complex64::new(nu_bar * gamma, delta_d) - alpha_d;
    let sigma2_ss = nu / (4.0 * nu_bar) + 0.5;
    Ok(DerivedParams {
        omega_q_lin: p.omega_q_lin,
        delta_d,
        delta_c,
        alpha_d,
        nu,
        nu_bar,
        n_bar,
        gamma,
        eta,
        mu_ss,
        sigma2_ss,
    })
}

/// η: two Lorentzians, the two-photon (drive + defect emission) channel
/// minus the one-photon channel through the defect.
pub fn drive_decay(alpha_d: f64, g: f64, gamma_c: f64, delta_d: f64, delta_c: f64, nu: f64) -> f64 {
    let gc2 = gamma_c * gamma_c;
    let sum = delta_d + delta_c;
    let diff = delta_d - delta_c;
    alpha_d * g * g * ((1.0 - nu) * gamma_c / (gc2 + sum * sum) - nu * gamma_c / (gc2 + diff * diff))
}

/// Occupation of the excited defect level, (e^{ħω_c/k_BT} + 1)⁻¹.
pub fn thermal_inversion(omega_c: f64, temperature: f64) -> Result<f64> {
    positive("omega_c", omega_c)?;
    positive("temperature", temperature)?;
    Ok(fermi(boltzmann_exponent(omega_c, temperature)))
}

/// Bose occupation (e^{ħω/k_BT} − 1)⁻¹ evaluated directly, independent of
/// the ν/2ν̄ route used by [`derive`].
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    positive("omega", omega)?;
    positive("temperature", temperature)?;
    Ok(1.0 / boltzmann_exponent(omega, temperature).exp_m1())
}

/// Temperature T·ω_q′/ω_c at which the qubit thermalizes through the defect.
pub fn effective_temperature(p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    Ok(p.temperature * p.omega_q_lin / p.omega_c)
}

/// ω_q′ = ω_q − χ(n̄_q − 1) for an anharmonic qubit of bare frequency ω_q
/// and anharmonicity χ.
pub fn linearized_frequency(omega_q: f64, chi: f64, mean_photons: f64) -> f64 {
    omega_q - chi * (mean_photons - 1.0)
}

/// ω_q′ for a coherent initial state, whose mean photon number is |α₀|².
pub fn linearized_frequency_coherent(omega_q: f64, chi: f64, alpha0: Complex64) -> f64 {
    linearized_frequency(omega_q, chi, alpha0.norm_sqr())
}

fn boltzmann_exponent(omega: f64, temperature: f64) -> f64 {
    HBAR * omega / (K_B * temperature)
}

fn fermi(x: f64) -> f64 {
    // exp overflows to inf for large x, giving exactly 0
    1.0 / (x.exp() + 1.0)
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { name, value });
    }
    if value <= 0.0 {
        return Err(Error::NonPositiveInput { name, value });
    }
    Ok(())
}
