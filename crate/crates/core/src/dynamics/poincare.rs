use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::EvolutionSpec;
use crate::error::{Error, Result};
use crate::model::DerivedParams;

/// How far around the limit cycle the mean travelled before returning to
/// the positive x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winding {
    HalfCircle,
    FullCircle,
    /// Any other number of half turns.
    HalfTurns(u32),
}

impl Winding {
    fn from_half_turns(n: u32) -> Self {
        match n {
            1 => Winding::HalfCircle,
            2 => Winding::FullCircle,
            n => Winding::HalfTurns(n),
        }
    }

    /// Turns as a number: 0.5 for half circle, 1 for full circle.
    pub fn turns(self) -> f64 {
        match self {
            Winding::HalfCircle => 0.5,
            Winding::FullCircle => 1.0,
            Winding::HalfTurns(n) => 0.5 * n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    /// Re μ at the return.
    pub x: f64,
    pub t: f64,
    pub winding: Winding,
}

/// Search window 4π/|Δ_d| + 10/ν̄γ.
pub fn recurrence_horizon(params: &DerivedParams) -> f64 {
    4.0 * PI / params.delta_d.abs() + 10.0 / params.decay_rate()
}

/// First t > 0 at which μ(t) crosses the real axis with Re μ > 0, starting
/// from the point α₀ on the positive x-axis. Crossings are bracketed on a
/// grid of min(period, decay time)/256 and bisected until |Im μ| < 1e-12
/// or the bracket cannot shrink further.
pub fn first_recurrence(params: &DerivedParams, alpha0: f64) -> Result<Recurrence> {
    if !(alpha0 > 0.0) {
        return Err(Error::NonPositiveInput { name: "alpha0", value: alpha0 });
    }
    if params.delta_d == 0.0 {
        return Err(Error::ResonantDrive);
    }
    let spec = EvolutionSpec::new(*params, Complex64::new(alpha0, 0.0));
    let im = |t: f64| spec.mean_at(t).im;
    let period = 2.0 * PI / params.delta_d.abs();
    let dt = period.min(1.0 / params.decay_rate()) / 256.0;
    let t_end = recurrence_horizon(params);

    let steps = (t_end / dt).ceil() as usize;
    let mut t_lo = dt;
    let mut f_lo = im(t_lo);
    for k in 2..=steps {
        let t_hi = k as f64 * dt;
        let f_hi = im(t_hi);
        if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
            let t = if f_lo == 0.0 { t_lo } else { bisect(&im, t_lo, t_hi, f_lo) };
            let x = spec.mean_at(t).re;
            if x > 0.0 {
                let half_turns = (params.delta_d.abs() * t / PI).round() as u32;
                return Ok(Recurrence { x, t, winding: Winding::from_half_turns(half_turns) });
            }
        }
        t_lo = t_hi;
        f_lo = f_hi;
    }
    Err(Error::NoRecurrence(t_end))
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid.abs() < 1e-12 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sampled return map with the derived landmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareSeries {
    pub alpha0: Vec<f64>,
    /// P(α₀); `None` where no return was found.
    pub returns: Vec<Option<f64>>,
    pub winding: Vec<Option<Winding>>,
    /// Root of P(α₀) − α₀.
    pub fixed_point: Option<f64>,
    /// α₀ where the winding of the first return flips.
    pub partition: Option<f64>,
    /// Least-squares slope of P below the partition (or over the whole
    /// range when there is none).
    pub slope_below: Option<f64>,
    pub slope_above: Option<f64>,
}

/// Samples excluded next to the partition when fitting zone slopes.
pub const PARTITION_GUARD: usize = 3;

/// Samples P on `n_samples` evenly spaced starting points in `range` and
/// extracts the fixed point, the winding partition, and the slope of each
/// zone.
pub fn poincare_map(params: &DerivedParams, range: (f64, f64), n_samples: usize) -> Result<PoincareSeries> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo) || n_samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lo < hi and at least two samples, got ({lo}, {hi}) x {n_samples}"
        )));
    }
    let alpha0: Vec<f64> = (0..n_samples).map(|k| lo + (hi - lo) * k as f64 / (n_samples - 1) as f64).collect();
    let results: Vec<Option<Recurrence>> = alpha0.par_iter().map(|&a| first_recurrence(params, a).ok()).collect();
    let returns: Vec<Option<f64>> = results.iter().map(|r| r.map(|r| r.x)).collect();
    let winding: Vec<Option<Winding>> = results.iter().map(|r| r.map(|r| r.winding)).collect();

    let flip = (1..n_samples).find(|&k| matches!((winding[k - 1], winding[k]), (Some(a), Some(b)) if a != b));
    let partition = flip.map(|k| {
        let reference = winding[k - 1];
        let (mut a, mut b) = (alpha0[k - 1], alpha0[k]);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if first_recurrence(params, mid).ok().map(|r| r.winding) == reference {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    });

    let zone_fit = |range: std::ops::Range<usize>| {
        let pts: Vec<(f64, f64)> = range.filter_map(|k| returns[k].map(|p| (alpha0[k], p))).collect();
        least_squares_slope(&pts)
    };
    let (slope_below, slope_above) = match flip {
        Some(k) => (
            zone_fit(0..k.saturating_sub(PARTITION_GUARD)),
            zone_fit((k + PARTITION_GUARD).min(n_samples)..n_samples),
        ),
        None => (zone_fit(0..n_samples), None),
    };

    let fixed_point = (1..n_samples).find_map(|k| {
        let (pa, pb) = (returns[k - 1]?, returns[k]?);
        if winding[k - 1] != winding[k] {
            return None;
        }
        let (ga, gb) = (pa - alpha0[k - 1], pb - alpha0[k]);
        if ga == 0.0 {
            return Some(alpha0[k - 1]);
        }
        if ga.signum() == gb.signum() {
            return None;
        }
        let gap = |a: f64| first_recurrence(params, a).map(|r| r.x - a).unwrap_or(f64::NAN);
        let (mut a, mut b, mut fa) = (alpha0[k - 1], alpha0[k], ga);
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = gap(mid);
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    });

    Ok(PoincareSeries { alpha0, returns, winding, fixed_point, partition, slope_below, slope_above })
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive, PhysicalParams};

    fn params() -> DerivedParams {
        derive(&PhysicalParams::reference_device(-2.5e6, 1e6)).unwrap()
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 0.5 * k as f64 + 2.0)).collect();
        assert!((least_squares_slope(&pts).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(least_squares_slope(&pts[..1]), None);
    }

    #[test]
    fn start_on_the_cycle_returns_near_itself() {
        let d = params();
        let r = d.mu_ss.norm();
        let rec = first_recurrence(&d, r).unwrap();
        assert_eq!(rec.winding, Winding::FullCircle);
        assert!((rec.x - r).abs() < 1e-3);
        assert!(rec.t > 0.0 && rec.t < recurrence_horizon(&d));
    }

    #[test]
    fn zones_and_continuity() {
        let d = params();
        let near = first_recurrence(&d, 0.3).unwrap();
        let far = first_recurrence(&d, 1.3).unwrap();
        assert_eq!(near.winding, Winding::FullCircle);
        assert_eq!(far.winding, Winding::HalfCircle);
        let a = first_recurrence(&d, 0.5).unwrap().x;
        let b = first_recurrence(&d, 0.5 + 1e-7).unwrap().x;
        assert!(b > a && (b - a) < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let d = params();
        assert!(first_recurrence(&d, 0.0).is_err());
        assert!(poincare_map(&d, (1.0, 0.5), 10).is_err());
    }
}
