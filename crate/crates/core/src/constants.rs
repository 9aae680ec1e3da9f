//! Physical constants (CODATA 2018, exact SI values where defined).

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant in J/K.
pub const K_B: f64 = 1.380_649e-23;

pub const TWO_PI: f64 = std::f64::consts::TAU;
