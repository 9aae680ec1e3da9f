use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::EvolutionSpec;
use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::model::{derive, DerivedParams, PhysicalParams};

/// The four kinds of transient the mean can follow toward its limit cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// I: the radius wiggles on its way down.
    Oscillating,
    /// II: the radius collapses and then swings back up.
    CollapseRevive,
    /// III: no appreciable dip on the way down.
    MonotonicDecay,
    /// IV: the limit cycle lies outside the starting point.
    Amplifying,
}

impl Phase {
    pub fn numeral(self) -> &'static str {
        match self {
            Phase::Oscillating => "I",
            Phase::CollapseRevive => "II",
            Phase::MonotonicDecay => "III",
            Phase::Amplifying => "IV",
        }
    }

    /// 1..=4, the integer written to CSV.
    pub fn code(self) -> u8 {
        match self {
            Phase::Oscillating => 1,
            Phase::CollapseRevive => 2,
            Phase::MonotonicDecay => 3,
            Phase::Amplifying => 4,
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.numeral())
    }
}

/// Decision thresholds, in units of |α₀|.
///
/// Applied to r(t) = |μ(t)| on [0, t_end]:
///
/// 1. IV iff |μ_ss| > |α₀|.
/// 2. A local minimum of r qualifies when its prominence exceeds
///    `prominence`.
/// 3. III iff no minimum qualifies.
/// 4. II iff some qualifying minimum is followed later by a value of r
///    above it by more than `revive_gain`.
/// 5. I otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub prominence: f64,
    pub revive_gain: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { prominence: 0.05, revive_gain: 0.12 }
    }
}

/// Sample times for radius features: resolution min(period, decay time)/64
/// up to ten decay times, then period/64 up to the relaxation horizon.
pub fn feature_times(params: &DerivedParams) -> Vec<f64> {
    let decay_time = 1.0 / params.decay_rate();
    let period = TWO_PI / params.delta_d.abs();
    let t_end = params.relaxation_horizon();
    let dense_end = (10.0 * decay_time).min(t_end);
    let dt_dense = period.min(decay_time) / 64.0;
    let dt_sparse = period / 64.0;
    let mut times = Vec::new();
    let n_dense = (dense_end / dt_dense).ceil() as usize;
    times.extend((0..n_dense).map(|k| k as f64 * dense_end / n_dense as f64));
    if t_end > dense_end {
        let n_sparse = ((t_end - dense_end) / dt_sparse).ceil().max(1.0) as usize;
        times.extend((0..=n_sparse).map(|k| dense_end + k as f64 * (t_end - dense_end) / n_sparse as f64));
    } else {
        times.push(t_end);
    }
    times
}

pub fn classify(params: &DerivedParams, alpha0: Complex64) -> Result<Phase> {
    classify_with(params, alpha0, &Thresholds::default())
}

pub fn classify_with(params: &DerivedParams, alpha0: Complex64, thresholds: &Thresholds) -> Result<Phase> {
    if (alpha0 - params.mu_ss).norm() < 1e-9 {
        return Err(Error::DegenerateStart);
    }
    let scale = alpha0.norm();
    if params.mu_ss.norm() > scale {
        return Ok(Phase::Amplifying);
    }
    let spec = EvolutionSpec::new(*params, alpha0);
    let r: Vec<f64> = feature_times(params).into_iter().map(|t| spec.mean_at(t).norm()).collect();

    // largest value strictly after each index
    let mut later_max = vec![f64::NEG_INFINITY; r.len()];
    for i in (0..r.len().saturating_sub(1)).rev() {
        later_max[i] = later_max[i + 1].max(r[i + 1]);
    }

    let prominence = thresholds.prominence * scale;
    let mut any_qualifying = false;
    for i in 1..r.len().saturating_sub(1) {
        if !(r[i] < r[i - 1] && r[i] <= r[i + 1]) || !exceeds_prominence(&r, i, prominence) {
            continue;
        }
        any_qualifying = true;
        if later_max[i] - r[i] > thresholds.revive_gain * scale {
            return Ok(Phase::CollapseRevive);
        }
    }
    Ok(if any_qualifying { Phase::Oscillating } else { Phase::MonotonicDecay })
}

/// Whether the minimum at `i` rises by more than `threshold` on both sides
/// before r drops below r[i] again.
fn exceeds_prominence(r: &[f64], i: usize, threshold: f64) -> bool {
    let base = r[i];
    let side = |iter: &mut dyn Iterator<Item = &f64>| {
        for &v in iter {
            if v < base {
                return false;
            }
            if v - base > threshold {
                return true;
            }
        }
        false
    };
    side(&mut r[..i].iter().rev()) && side(&mut r[i + 1..].iter())
}

/// Labels over a (Δ_d, Ω) grid. `labels[j * delta_d.len() + i]` belongs to
/// `delta_d_over_2pi[i]`, `drive_over_2pi[j]`; `None` where the cell could
/// not be evaluated (exact resonance, degenerate start).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub delta_d_over_2pi: Vec<f64>,
    pub drive_over_2pi: Vec<f64>,
    pub labels: Vec<Option<Phase>>,
}

impl PhaseDiagram {
    pub fn get(&self, i_delta: usize, j_drive: usize) -> Option<Phase> {
        self.labels[j_drive * self.delta_d_over_2pi.len() + i_delta]
    }

    /// Interior cells whose four neighbours all carry a different label.
    pub fn islands(&self) -> Vec<(usize, usize)> {
        let (nx, ny) = (self.delta_d_over_2pi.len(), self.drive_over_2pi.len());
        let mut out = Vec::new();
        for j in 1..ny.saturating_sub(1) {
            for i in 1..nx.saturating_sub(1) {
                let here = self.get(i, j);
                if here.is_none() {
                    continue;
                }
                let neighbours = [self.get(i - 1, j), self.get(i + 1, j), self.get(i, j - 1), self.get(i, j + 1)];
                if neighbours.iter().all(|n| n.is_some() && *n != here) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Evenly spaced axis with `n` points including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Classifies every cell of the grid, in parallel on the current rayon
/// pool. The result does not depend on the number of workers.
pub fn phase_diagram(
    base: &PhysicalParams,
    delta_d_over_2pi: &[f64],
    drive_over_2pi: &[f64],
    alpha0: Complex64,
    thresholds: &Thresholds,
) -> PhaseDiagram {
    let nx = delta_d_over_2pi.len();
    let labels = (0..nx * drive_over_2pi.len())
        .into_par_iter()
        .map(|k| {
            let p = base.with_drive_over_2pi(delta_d_over_2pi[k % nx], drive_over_2pi[k / nx]);
            derive(&p).and_then(|d| classify_with(&d, alpha0, thresholds)).ok()
        })
        .collect();
    PhaseDiagram { delta_d_over_2pi: delta_d_over_2pi.to_vec(), drive_over_2pi: drive_over_2pi.to_vec(), labels }
}
