use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fock::{coherent_amplitudes, DensityMatrix, FockSpace};
use crate::error::{Error, Result};
use crate::model::DerivedParams;

/// Trace drift tolerated by [`evolve`].
pub const TRACE_TOLERANCE: f64 = 1e-6;
/// ‖ρ − ρ†‖ tolerated by [`evolve`].
pub const HERMITICITY_TOLERANCE: f64 = 1e-8;

/// Coefficients of the master equation
///
/// ```text
/// dρ/dt = −iΔ_d[a†a, ρ] + η[a† − a, ρ]
///         + (γ/2)(1 − ν)(2aρa† − {a†a, ρ})
///         + (γ/2)ν(2a†ρa − {aa†, ρ})
/// ```
///
/// applied element-wise on the truncated basis, so a step costs O(N²).
/// The anticommutator with aa† uses the truncated product, which keeps the
/// generator exactly trace-free.
struct Generator<'a> {
    sqrt: &'a [f64],
    dim: usize,
    delta_d: f64,
    eta: f64,
    emission: f64,
    absorption: f64,
}

impl<'a> Generator<'a> {
    fn new(space: &'a FockSpace, params: &DerivedParams) -> Self {
        Self {
            sqrt: space.sqrt_table(),
            dim: space.dim(),
            delta_d: params.delta_d,
            eta: params.eta,
            emission: 0.5 * params.gamma * (1.0 - params.nu),
            absorption: 0.5 * params.gamma * params.nu,
        }
    }

    fn apply(&self, rho: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        let n_dim = self.dim;
        let s = self.sqrt;
        let last = n_dim - 1;
        // (aa†)_kk
        let aad = |k: usize| if k < last { (k + 1) as f64 } else { 0.0 };
        let minus_i_delta = Complex64::new(0.0, -self.delta_d);
        for n in 0..n_dim {
            for m in 0..n_dim {
                let v = rho[(m, n)];
                let mut acc = minus_i_delta * (m as f64 - n as f64) * v;

                let mut drive = Complex64::new(0.0, 0.0);
                if m >= 1 {
                    drive += rho[(m - 1, n)] * s[m];
                }
                if n < last {
                    drive -= rho[(m, n + 1)] * s[n + 1];
                }
                if m < last {
                    drive -= rho[(m + 1, n)] * s[m + 1];
                }
                if n >= 1 {
                    drive += rho[(m, n - 1)] * s[n];
                }
                acc += drive * self.eta;

                let mut emit = -v * (m + n) as f64;
                if m < last && n < last {
                    emit += rho[(m + 1, n + 1)] * (2.0 * s[m + 1] * s[n + 1]);
                }
                acc += emit * self.emission;

                if self.absorption != 0.0 {
                    let mut absorb = -v * (aad(m) + aad(n));
                    if m >= 1 && n >= 1 {
                        absorb += rho[(m - 1, n - 1)] * (2.0 * s[m] * s[n]);
                    }
                    acc += absorb * self.absorption;
                }
                out[(m, n)] = acc;
            }
        }
    }
}

/// dρ/dt of the master equation.
pub fn rhs(space: &FockSpace, params: &DerivedParams, rho: &DensityMatrix) -> DensityMatrix {
    assert_eq!(rho.dim(), space.dim(), "state and space dimensions differ");
    let mut out = DMatrix::from_element(space.dim(), space.dim(), Complex64::new(0.0, 0.0));
    Generator::new(space, params).apply(&rho.entries, &mut out);
    DensityMatrix { entries: out }
}

/// First moment and Husimi-equivalent variance of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// ⟨a⟩.
    pub mean: Complex64,
    /// (⟨a†a⟩ − |⟨a⟩|² + 1)/2, the per-quadrature variance of the Husimi
    /// distribution: 1/2 for any coherent state, (n̄ + 1)/2 for a thermal
    /// state.
    pub second_central: f64,
    /// ⟨a†a⟩.
    pub photons: f64,
}

pub fn moments(space: &FockSpace, rho: &DensityMatrix) -> Moments {
    let s = space.sqrt_table();
    let e = &rho.entries;
    let mut mean = Complex64::new(0.0, 0.0);
    let mut photons = 0.0;
    for m in 0..space.dim() {
        photons += m as f64 * e[(m, m)].re;
        if m >= 1 {
            // Tr(ρa) = Σ ρ_{m,m−1} √m
            mean += e[(m, m - 1)] * s[m];
        }
    }
    Moments { mean, second_central: 0.5 * (photons - mean.norm_sqr() + 1.0), photons }
}

/// ⟨α|ρ|α⟩/π at each sample.
pub fn husimi_q(space: &FockSpace, rho: &DensityMatrix, grid: &[Complex64]) -> Vec<f64> {
    let dim = space.dim();
    grid.par_iter()
        .map(|&alpha| {
            let v = coherent_amplitudes(dim, alpha);
            let rv = &rho.entries * &v;
            v.dotc(&rv).re / PI
        })
        .collect()
}

/// Readout at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSample {
    pub t: f64,
    pub moments: Moments,
    pub trace: f64,
    pub hermiticity: f64,
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub params: DerivedParams,
    pub initial: DensityMatrix,
    pub t_grid: Vec<f64>,
    pub samples: Vec<OracleSample>,
    /// Full states at each sample time, when requested.
    pub states: Option<Vec<DensityMatrix>>,
    pub final_state: DensityMatrix,
    pub dt: f64,
}

impl OracleRun {
    pub fn max_trace_drift(&self) -> f64 {
        self.samples.iter().map(|s| (s.trace - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Step used by [`evolve`]: `min(dt_max, 0.01 / fastest rate)`.
pub fn default_step(space: &FockSpace, params: &DerivedParams, dt_max: f64) -> f64 {
    dt_max.min(0.01 / params.fastest_rate()).min(1.0 / generator_bound(space, params))
}

/// Upper bound on the spectral radius of the truncated generator. Steps
/// below 2.7 over this bound keep RK4 stable.
pub fn generator_bound(space: &FockSpace, params: &DerivedParams) -> f64 {
    let n = space.dim() as f64;
    params.delta_d.abs() * (n - 1.0) + 4.0 * params.eta.abs() * n.sqrt() + 2.0 * params.gamma * n
}

/// Integrates the master equation with fixed-step classic RK4 and records
/// moments at every time in `t_grid`. The trace is never renormalized;
/// drift beyond [`TRACE_TOLERANCE`] or hermiticity loss beyond
/// [`HERMITICITY_TOLERANCE`] aborts the run.
pub fn evolve(
    space: &FockSpace,
    params: &DerivedParams,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    dt_max: f64,
) -> Result<OracleRun> {
    integrate(space, params, rho0, t_grid, default_step(space, params, dt_max), false)
}

/// Like [`evolve`] but also keeps every sampled density matrix.
pub fn evolve_keep_states(
    space: &FockSpace,
    params: &DerivedParams,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    dt_max: f64,
) -> Result<OracleRun> {
    integrate(space, params, rho0, t_grid, default_step(space, params, dt_max), true)
}

/// RK4 with exactly the step `dt` (rounded down so that it divides each
/// sampling interval). Exposed for order checks.
pub fn evolve_fixed_step(
    space: &FockSpace,
    params: &DerivedParams,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    dt: f64,
) -> Result<OracleRun> {
    integrate(space, params, rho0, t_grid, dt, false)
}

fn integrate(
    space: &FockSpace,
    params: &DerivedParams,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    dt: f64,
    keep_states: bool,
) -> Result<OracleRun> {
    if rho0.dim() != space.dim() {
        return Err(Error::InvalidArgument(format!(
            "initial state has dimension {} but the space has {}",
            rho0.dim(),
            space.dim()
        )));
    }
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimeGrid);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {dt:e}")));
    }

    let generator = Generator::new(space, params);
    let dim = space.dim();
    let zeros = || DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (zeros(), zeros(), zeros(), zeros(), zeros());
    let mut rho = rho0.entries.clone();

    let mut samples = Vec::with_capacity(t_grid.len());
    let mut states = keep_states.then(Vec::new);
    let mut t = 0.0;
    for &target in t_grid {
        let span = target - t;
        let steps = if span > 0.0 { (span / dt).ceil() as usize } else { 0 };
        if steps > 0 {
            let h = span / steps as f64;
            for _ in 0..steps {
                generator.apply(&rho, &mut k1);
                tmp.copy_from(&rho);
                tmp += &k1 * Complex64::new(0.5 * h, 0.0);
                generator.apply(&tmp, &mut k2);
                tmp.copy_from(&rho);
                tmp += &k2 * Complex64::new(0.5 * h, 0.0);
                generator.apply(&tmp, &mut k3);
                tmp.copy_from(&rho);
                tmp += &k3 * Complex64::new(h, 0.0);
                generator.apply(&tmp, &mut k4);
                k1 += &k2 * Complex64::new(2.0, 0.0);
                k1 += &k3 * Complex64::new(2.0, 0.0);
                k1 += &k4;
                rho += &k1 * Complex64::new(h / 6.0, 0.0);
            }
        }
        t = target;

        let state = DensityMatrix { entries: rho.clone() };
        let trace = state.trace().re;
        let drift = (trace - 1.0).abs();
        if !(drift <= TRACE_TOLERANCE) {
            return Err(Error::TraceDrift { t, drift });
        }
        let hermiticity = state.hermiticity_deviation();
        if !(hermiticity <= HERMITICITY_TOLERANCE) {
            return Err(Error::HermiticityLoss { t, deviation: hermiticity });
        }
        samples.push(OracleSample { t, moments: moments(space, &state), trace, hermiticity });
        if let Some(states) = states.as_mut() {
            states.push(state);
        }
    }

    Ok(OracleRun {
        params: *params,
        initial: rho0.clone(),
        t_grid: t_grid.to_vec(),
        samples,
        states,
        final_state: DensityMatrix { entries: rho },
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::EvolutionSpec;
    use crate::model::{derive, PhysicalParams};
    use crate::oracle::fock::{build_space, coherent_state, excited_state, fock_state, thermal_state};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(delta_d: f64, drive: f64, temperature: f64) -> DerivedParams {
        derive(&PhysicalParams { temperature, ..PhysicalParams::reference_device(delta_d, drive) }).unwrap()
    }

    fn dense_rhs(space: &FockSpace, d: &DerivedParams, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let a = &space.lowering;
        let ad = &space.raising;
        let num = ad * a;
        let aad = a * ad;
        let i = c(0.0, 1.0);
        let comm = |x: &DMatrix<Complex64>| x * rho - rho * x;
        let e = 0.5 * d.gamma * (1.0 - d.nu);
        let b = 0.5 * d.gamma * d.nu;
        comm(&num) * (-i * d.delta_d)
            + comm(&(ad - a)) * c(d.eta, 0.0)
            + (a * rho * ad * c(2.0, 0.0) - &num * rho - rho * &num) * c(e, 0.0)
            + (ad * rho * a * c(2.0, 0.0) - &aad * rho - rho * &aad) * c(b, 0.0)
    }

    #[test]
    fn elementwise_generator_matches_dense_products() {
        let space = build_space(12).unwrap();
        let d = params(-570e3, 300e3, 0.15);
        let rho = DMatrix::from_fn(12, 12, |m, n| c(((m * 7 + n * 3) as f64).sin(), ((m + 2 * n) as f64).cos()));
        let fast = rhs(&space, &d, &DensityMatrix { entries: rho.clone() });
        assert!((fast.entries - dense_rhs(&space, &d, &rho)).norm() < 1e-6 * d.gamma);
    }

    #[test]
    fn vacuum_is_dark_under_pure_decay() {
        let space = build_space(10).unwrap();
        let d = params(-2e6, 0.0, 1e-4);
        assert_eq!(d.nu, 0.0);
        let out = rhs(&space, &d, &fock_state(&space, 0));
        assert_eq!(out.frobenius_norm(), 0.0);
    }

    #[test]
    fn coherent_and_excited_moments() {
        let space = build_space(40).unwrap();
        let m = moments(&space, &coherent_state(&space, c(1.2, -0.4)).unwrap());
        assert!((m.mean - c(1.2, -0.4)).norm() < 1e-13);
        assert!((m.second_central - 0.5).abs() < 1e-12);
        let m = moments(&space, &excited_state(&space));
        assert_eq!(m.mean, c(0.0, 0.0));
        assert_eq!(m.photons, 1.0);
        let m = moments(&space, &thermal_state(&space, 0.3).unwrap());
        assert!((m.second_central - 0.65).abs() < 1e-8);
    }

    #[test]
    fn husimi_closed_forms() {
        let space = build_space(30).unwrap();
        let grid: Vec<Complex64> = (0..50).map(|k| Complex64::from_polar(0.1 * k as f64, 0.37 * k as f64)).collect();
        let vac = husimi_q(&space, &fock_state(&space, 0), &grid);
        let exc = husimi_q(&space, &excited_state(&space), &grid);
        for (k, a) in grid.iter().enumerate() {
            let r2 = a.norm_sqr();
            assert!((vac[k] - (-r2).exp() / PI).abs() < 1e-14);
            assert!((exc[k] - (-r2).exp() * r2 / PI).abs() < 1e-12);
        }
        let ring = husimi_q(&space, &excited_state(&space), &[c(0.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(ring[0], 0.0);
        assert!((ring[1] - (-1f64).exp() / PI).abs() < 1e-15);
        let coh = husimi_q(&space, &coherent_state(&space, c(1.0, 0.0)).unwrap(), &[c(1.0, 0.0)]);
        assert!((coh[0] - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn undriven_cold_decay_matches_closed_form() {
        let d = params(-2e6, 0.0, 1e-4);
        let alpha0 = c(1.0, 0.0);
        let space = build_space(30).unwrap();
        let rho0 = coherent_state(&space, alpha0).unwrap();
        let t_end = 10.0 / d.decay_rate();
        let grid: Vec<f64> = (1..=40).map(|k| k as f64 * t_end / 40.0).collect();
        let run = evolve(&space, &d, &rho0, &grid, f64::INFINITY).unwrap();
        for s in &run.samples {
            let expected = alpha0 * (-Complex64::new(d.decay_rate(), d.delta_d) * s.t).exp();
            assert!((s.moments.mean - expected).norm() <= 1e-6 * expected.norm());
        }
        let spec = EvolutionSpec::new(d, alpha0);
        let last = run.samples.last().unwrap();
        let mapped = d.master_to_quadrature(last.moments.mean, last.t);
        assert!((mapped - spec.mean_at(last.t)).norm() <= 1e-6 * spec.mean_at(last.t).norm());
    }

    #[test]
    fn rk4_is_fourth_order() {
        let d = params(-570e3, 100e3, 0.05);
        let space = build_space(30).unwrap();
        let rho0 = coherent_state(&space, c(0.5, 0.0)).unwrap();
        let t_end = 2.0 / d.decay_rate();
        let exact = d.master_frame_fixed_point()
            + (c(0.5, 0.0) - d.master_frame_fixed_point()) * (-Complex64::new(d.decay_rate(), d.delta_d) * t_end).exp();
        let base = 1.0 / generator_bound(&space, &d);
        let errs: Vec<f64> = [1.0, 0.5, 0.25]
            .iter()
            .map(|f| {
                let run = evolve_fixed_step(&space, &d, &rho0, &[t_end], base * f).unwrap();
                (run.samples[0].moments.mean - exact).norm()
            })
            .collect();
        let r1 = errs[0] / errs[1];
        let r2 = errs[1] / errs[2];
        assert!((r1 - 16.0).abs() < 2.0 && (r2 - 16.0).abs() < 2.0, "{errs:?}");
    }

    #[test]
    fn rejects_bad_grids() {
        let d = params(-2e6, 0.0, 0.01);
        let space = build_space(5).unwrap();
        let rho0 = fock_state(&space, 0);
        assert_eq!(evolve(&space, &d, &rho0, &[], 1.0).unwrap_err(), Error::InvalidTimeGrid);
        assert_eq!(evolve(&space, &d, &rho0, &[1e-6, 1e-6], 1.0).unwrap_err(), Error::InvalidTimeGrid);
    }

    #[test]
    fn trace_drift_is_reported() {
        // a step far beyond the RK4 stability region blows the solution up
        let d = params(-2e6, 0.0, 0.01);
        let space = build_space(20).unwrap();
        let rho0 = coherent_state(&space, c(1.0, 0.0)).unwrap();
        let err = evolve_fixed_step(&space, &d, &rho0, &[1e-4], 50.0 / d.fastest_rate()).unwrap_err();
        assert!(matches!(err, Error::TraceDrift { .. } | Error::HermiticityLoss { .. }));
    }
}
