//! TOML run configuration.
//!
//! ```toml
//! [physical]
//! omega_q_lin_over_2pi = 4.5e9
//! delta_c_over_2pi = 110e3      # or omega_c_over_2pi
//! delta_d_over_2pi = -570e3     # or omega_d_over_2pi
//! g_over_2pi = 400e3
//! gamma_c_over_2pi = 1e6
//! drive_over_2pi = 100e3
//! temperature = 0.010
//!
//! [initial]
//! kind = "coherent"             # or "excited"
//! alpha0_re = 1.0
//! alpha0_im = 0.0
//! ```
//!
//! Every key is optional and falls back to the values above. Unknown keys
//! are rejected.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Thresholds;
use crate::model::PhysicalParams;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub physical: PhysicalSection,
    pub initial: InitialSection,
    pub analysis: AnalysisSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalSection {
    pub omega_q_lin_over_2pi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_c_over_2pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_c_over_2pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_d_over_2pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_d_over_2pi: Option<f64>,
    pub g_over_2pi: f64,
    pub gamma_c_over_2pi: f64,
    pub drive_over_2pi: f64,
    /// Kelvin.
    pub temperature: f64,
}

impl Default for PhysicalSection {
    fn default() -> Self {
        Self {
            omega_q_lin_over_2pi: 4.5e9,
            omega_c_over_2pi: None,
            delta_c_over_2pi: None,
            omega_d_over_2pi: None,
            delta_d_over_2pi: None,
            g_over_2pi: 400e3,
            gamma_c_over_2pi: 1e6,
            drive_over_2pi: 100e3,
            temperature: 0.010,
        }
    }
}

const DEFAULT_DELTA_C: f64 = 110e3;
const DEFAULT_DELTA_D: f64 = -570e3;

impl PhysicalSection {
    /// Detunings Δ_c/2π and Δ_d/2π in Hz, whichever way they were given.
    pub fn detunings(&self) -> Result<(f64, f64), String> {
        let pick = |absolute: Option<f64>, detuning: Option<f64>, default: f64, name: &str| match (absolute, detuning) {
            (Some(_), Some(_)) => Err(format!("[physical] sets both omega_{name}_over_2pi and delta_{name}_over_2pi")),
            (Some(w), None) => Ok(self.omega_q_lin_over_2pi - w),
            (None, Some(d)) => Ok(d),
            (None, None) => Ok(default),
        };
        Ok((
            pick(self.omega_c_over_2pi, self.delta_c_over_2pi, DEFAULT_DELTA_C, "c")?,
            pick(self.omega_d_over_2pi, self.delta_d_over_2pi, DEFAULT_DELTA_D, "d")?,
        ))
    }

    pub fn to_params(&self) -> Result<PhysicalParams, String> {
        let (delta_c, delta_d) = self.detunings()?;
        let p = PhysicalParams::from_detunings_over_2pi(
            self.omega_q_lin_over_2pi,
            delta_c,
            delta_d,
            self.g_over_2pi,
            self.gamma_c_over_2pi,
            self.drive_over_2pi,
            self.temperature,
        );
        p.validate().map_err(|e| format!("[physical] {e}"))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    #[default]
    Coherent,
    /// The one-photon Fock state.
    Excited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub kind: InitialKind,
    pub alpha0_re: f64,
    pub alpha0_im: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self { kind: InitialKind::Coherent, alpha0_re: 1.0, alpha0_im: 0.0 }
    }
}

impl InitialSection {
    /// Quadrature-plane mean of the initial state.
    pub fn mean(&self) -> Complex64 {
        match self.kind {
            InitialKind::Coherent => Complex64::new(self.alpha0_re, self.alpha0_im),
            InitialKind::Excited => Complex64::new(0.0, 0.0),
        }
    }

    /// Per-quadrature Q variance of the initial state.
    pub fn variance(&self) -> f64 {
        match self.kind {
            InitialKind::Coherent => 0.5,
            InitialKind::Excited => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    /// End of evolve/oracle runs in seconds; defaults to 10/(ν̄γ).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    pub samples: usize,

    /// Fock truncation; chosen from the trajectory when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_dim: Option<usize>,
    /// Cap on the RK4 step in seconds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_dt_max: Option<f64>,
    /// Repeat the oracle run at twice the truncation and report deltas.
    pub oracle_check_truncation: bool,

    /// Frame times in seconds; six frames at ν̄γt = 0, 1/4, 1/2, 1, 2, 10
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_times: Option<Vec<f64>>,
    pub lattice_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_half_width: Option<f64>,
    pub trajectory_samples: usize,

    pub phase_delta_min_over_2pi: f64,
    pub phase_delta_max_over_2pi: f64,
    pub phase_delta_points: usize,
    pub phase_drive_min_over_2pi: f64,
    pub phase_drive_max_over_2pi: f64,
    pub phase_drive_points: usize,
    pub prominence: f64,
    pub revive_gain: f64,

    pub poincare_min: f64,
    pub poincare_max: f64,
    pub poincare_samples: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let th = Thresholds::default();
        Self {
            t_end: None,
            samples: 401,
            oracle_dim: None,
            oracle_dt_max: None,
            oracle_check_truncation: false,
            frame_times: None,
            lattice_points: 256,
            lattice_half_width: None,
            trajectory_samples: 400,
            phase_delta_min_over_2pi: -2.5e6,
            phase_delta_max_over_2pi: 0.5e6,
            phase_delta_points: 200,
            phase_drive_min_over_2pi: 10e3,
            phase_drive_max_over_2pi: 1e6,
            phase_drive_points: 200,
            prominence: th.prominence,
            revive_gain: th.revive_gain,
            poincare_min: 0.01,
            poincare_max: 1.5,
            poincare_samples: 150,
        }
    }
}

impl AnalysisSection {
    pub fn thresholds(&self) -> Thresholds {
        Thresholds { prominence: self.prominence, revive_gain: self.revive_gain }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    pub format: Format,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }
}
