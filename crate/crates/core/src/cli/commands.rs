use num_complex::Complex64;
use serde_json::{json, Value};

use super::config::{InitialKind, RunConfig};
use super::output::{json_f64, Sink, Table};
use super::CliError;
use crate::analytic::{relaxed_variance, EvolutionSpec};
use crate::constants::{HBAR, TWO_PI};
use crate::dynamics::{linspace, phase_diagram, poincare_map, Phase};
use crate::lattice::Lattice;
use crate::model::{derive, effective_temperature, DerivedParams, PhysicalParams};
use crate::oracle::{build_space, coherent_initial, evolve, excited_initial, suggested_dim, Comparison, OracleRun};
use crate::propagator::{default_lattice, evolve_field, trajectory_overlay, QField};

fn physical(config: &RunConfig) -> Result<PhysicalParams, CliError> {
    config.physical.to_params().map_err(CliError::Config)
}

fn derived(config: &RunConfig) -> Result<(PhysicalParams, DerivedParams), CliError> {
    let p = physical(config)?;
    Ok((p, derive(&p)?))
}

fn complex(z: Complex64) -> Value {
    json!({ "re": json_f64(z.re), "im": json_f64(z.im), "abs": json_f64(z.norm()) })
}

fn quantity(value: f64, unit: &str) -> Value {
    json!({ "value": json_f64(value), "unit": unit })
}

fn t_end(config: &RunConfig, d: &DerivedParams) -> Result<f64, CliError> {
    let t = config.analysis.t_end.unwrap_or(10.0 / d.decay_rate());
    if !(t > 0.0 && t.is_finite()) {
        return Err(CliError::Config(format!("[analysis] t_end must be positive, got {t}")));
    }
    Ok(t)
}

fn time_grid(config: &RunConfig, d: &DerivedParams) -> Result<Vec<f64>, CliError> {
    let n = config.analysis.samples;
    if n < 2 {
        return Err(CliError::Config("[analysis] samples must be at least 2".into()));
    }
    Ok(linspace(0.0, t_end(config, d)?, n))
}

pub fn derive_report(config: &RunConfig) -> Result<Value, CliError> {
    let (p, d) = derived(config)?;
    Ok(json!({
        "omega_q_lin": quantity(d.omega_q_lin, "rad/s"),
        "omega_c": quantity(p.omega_c, "rad/s"),
        "omega_d": quantity(p.omega_d, "rad/s"),
        "delta_d": quantity(d.delta_d, "rad/s"),
        "delta_c": quantity(d.delta_c, "rad/s"),
        "g": quantity(p.g, "rad/s"),
        "gamma_c": quantity(p.gamma_c, "rad/s"),
        "drive": quantity(p.drive, "rad/s"),
        "temperature": quantity(p.temperature, "K"),
        "alpha_d": quantity(d.alpha_d, "1"),
        "nu": quantity(d.nu, "1"),
        "nu_bar": quantity(d.nu_bar, "1"),
        "n_bar": quantity(d.n_bar, "1"),
        "gamma": quantity(d.gamma, "1/s"),
        "eta": quantity(d.eta, "1/s"),
        "decay_rate": quantity(d.decay_rate(), "1/s"),
        "relaxation_horizon": quantity(d.relaxation_horizon(), "s"),
        "mu_ss": complex(d.mu_ss),
        "sigma2_ss": quantity(d.sigma2_ss, "1"),
        "effective_temperature": quantity(effective_temperature(&p)?, "K"),
        "limit_cycle_frequency": quantity(d.delta_d / TWO_PI, "Hz"),
    }))
}

pub fn cmd_derive(config: &RunConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let report = derive_report(config)?;
    sink.json("derive.json", &report)?;
    Ok(report)
}

fn trajectory_table(d: &DerivedParams, config: &RunConfig, times: &[f64]) -> Table {
    let spec = EvolutionSpec::new(*d, config.initial.mean());
    let mut table = Table::new(vec!["t", "re_mu", "im_mu", "sigma2", "energy"]);
    for &t in times {
        let mu = spec.mean_at(t);
        let sigma2 = relaxed_variance(d, config.initial.variance(), t);
        let energy = HBAR * d.omega_q_lin * (mu.norm_sqr() + 2.0 * sigma2 - 1.0);
        table.push(vec![t, mu.re, mu.im, sigma2, energy]);
    }
    table
}

pub fn cmd_evolve(config: &RunConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let (p, d) = derived(config)?;
    let times = time_grid(config, &d)?;
    sink.table("evolve", &trajectory_table(&d, config, &times))?;
    let reference = derive(&PhysicalParams { drive: 0.0, ..p })?;
    sink.table("evolve_reference", &trajectory_table(&reference, config, &times))?;
    Ok(json!({ "samples": times.len(), "t_end": json_f64(*times.last().unwrap()) }))
}

fn oracle_run(d: &DerivedParams, config: &RunConfig, dim: usize, times: &[f64]) -> Result<OracleRun, CliError> {
    let space = build_space(dim)?;
    let rho0 = match config.initial.kind {
        InitialKind::Coherent => coherent_initial(&space, d, config.initial.mean())?,
        InitialKind::Excited => excited_initial(&space, d)?,
    };
    let dt_max = config.analysis.oracle_dt_max.unwrap_or(f64::INFINITY);
    Ok(evolve(&space, d, &rho0, times, dt_max)?)
}

pub fn cmd_oracle(config: &RunConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let (_, d) = derived(config)?;
    let times = time_grid(config, &d)?;
    let mean0 = config.initial.mean();
    let dim = config.analysis.oracle_dim.unwrap_or_else(|| suggested_dim(&d, mean0, *times.last().unwrap()));
    let run = oracle_run(&d, config, dim, &times)?;
    let cmp = Comparison::new(&run, mean0, config.initial.variance());

    let mut table = Table::new(vec![
        "t",
        "analytic_re_mu",
        "analytic_im_mu",
        "oracle_re_mu",
        "oracle_im_mu",
        "analytic_sigma2",
        "oracle_sigma2",
    ]);
    for k in 0..cmp.t.len() {
        let (a, o) = (cmp.analytic_mean[k], cmp.oracle_mean[k]);
        table.push(vec![cmp.t[k], a.re, a.im, o.re, o.im, cmp.analytic_variance[k], cmp.oracle_variance[k]]);
    }
    sink.table("oracle", &table)?;

    let mut summary = json!({
        "dim": dim,
        "dt": json_f64(run.dt),
        "max_rel_err_mu": json_f64(cmp.max_rel_err_mean()),
        "max_rel_err_sigma2": json_f64(cmp.max_rel_err_variance()),
        "max_trace_drift": json_f64(run.max_trace_drift()),
    });
    if config.analysis.oracle_check_truncation {
        let wide = oracle_run(&d, config, 2 * dim, &times)?;
        let wide_cmp = Comparison::new(&wide, mean0, config.initial.variance());
        let delta_mu =
            cmp.oracle_mean.iter().zip(&wide_cmp.oracle_mean).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let delta_sigma2 = cmp
            .oracle_variance
            .iter()
            .zip(&wide_cmp.oracle_variance)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        summary["truncation_check"] = json!({
            "dim": 2 * dim,
            "max_delta_mu": json_f64(delta_mu),
            "max_delta_sigma2": json_f64(delta_sigma2),
        });
    }
    sink.json("oracle_summary.json", &summary)?;
    Ok(summary)
}

/// Six frames at ν̄γt = 0, 1/4, 1/2, 1, 2, 10.
pub fn default_frame_times(d: &DerivedParams) -> Vec<f64> {
    [0.0, 0.25, 0.5, 1.0, 2.0, 10.0].iter().map(|x| x / d.decay_rate()).collect()
}

pub fn cmd_qdist(config: &RunConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let (_, d) = derived(config)?;
    let a = &config.analysis;
    let frames = a.frame_times.clone().unwrap_or_else(|| default_frame_times(&d));
    if frames.is_empty() || frames.iter().any(|&t| !(t >= 0.0)) || frames.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("[analysis] frame_times must be non-negative and increasing".into()));
    }
    if a.lattice_points < 2 {
        return Err(CliError::Config("[analysis] lattice_points must be at least 2".into()));
    }
    let lattice = match a.lattice_half_width {
        Some(w) => Lattice::square(Complex64::new(0.0, 0.0), w, a.lattice_points),
        None => Lattice { nx: a.lattice_points, ny: a.lattice_points, ..default_lattice(&d) },
    };
    let initial = match config.initial.kind {
        InitialKind::Coherent => QField::coherent(lattice, config.initial.mean()),
        InitialKind::Excited => QField::excited_ring(lattice),
    };

    let mut meta = Vec::new();
    for (k, &t) in frames.iter().enumerate() {
        let field = evolve_field(&d, &initial, t)?;
        let mut table = Table::new(vec!["x", "y", "q"]);
        for (i, &q) in field.values.iter().enumerate() {
            let b = field.lattice.point(i);
            table.push(vec![b.re, b.im, q]);
        }
        sink.table(&format!("frame_{k:03}"), &table)?;
        meta.push(json!({
            "index": k,
            "t": json_f64(t),
            "mass": json_f64(field.mass()),
            "mean": complex(field.mean()),
            "variance": json_f64(field.variance()),
        }));
    }

    let t_last = *frames.last().unwrap();
    let n = a.trajectory_samples.max(2);
    let overlay = trajectory_overlay(&d, config.initial.mean(), &linspace(0.0, t_last.max(f64::MIN_POSITIVE), n))?;
    let mut traj = Table::new(vec!["t", "re_mu", "im_mu"]);
    for (t, m) in overlay.times.iter().zip(&overlay.means) {
        traj.push(vec![*t, m.re, m.im]);
    }
    sink.table("trajectory", &traj)?;
    let summary = json!({
        "frames": meta,
        "limit_cycle_radius": json_f64(overlay.limit_cycle_radius),
        "lattice": {
            "x_min": json_f64(lattice.x_min), "x_max": json_f64(lattice.x_max),
            "y_min": json_f64(lattice.y_min), "y_max": json_f64(lattice.y_max),
            "nx": lattice.nx, "ny": lattice.ny,
        },
    });
    sink.json("frames.json", &summary)?;
    Ok(summary)
}

pub fn cmd_phases(config: &RunConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let base = physical(config)?;
    let a = &config.analysis;
    let deltas = linspace(a.phase_delta_min_over_2pi, a.phase_delta_max_over_2pi, a.phase_delta_points);
    let drives = linspace(a.phase_drive_min_over_2pi, a.phase_drive_max_over_2pi, a.phase_drive_points);
    let diagram = phase_diagram(&base, &deltas, &drives, config.initial.mean(), &a.thresholds());

    let code = |p: Option<Phase>| p.map_or(0, |p| p.code());
    let mut table = Table::new(vec!["delta_d_over_2pi", "drive_over_2pi", "label"]);
    for (j, &w) in drives.iter().enumerate() {
        for (i, &dd) in deltas.iter().enumerate() {
            table.push(vec![dd, w, code(diagram.get(i, j)) as f64]);
        }
    }
    sink.table("phases", &table)?;
    let mut counts = [0usize; 5];
    for &l in &diagram.labels {
        counts[code(l) as usize] += 1;
    }
    let summary = json!({
        "delta_d_over_2pi": deltas.iter().map(|&x| json_f64(x)).collect::<Vec<_>>(),
        "drive_over_2pi": drives.iter().map(|&x| json_f64(x)).collect::<Vec<_>>(),
        "labels": diagram.labels.iter().map(|&l| code(l)).collect::<Vec<_>>(),
        "counts": { "undefined": counts[0], "I": counts[1], "II": counts[2], "III": counts[3], "IV": counts[4] },
        "islands": diagram.islands().len(),
    });
    sink.json("phases.json", &summary)?;
    Ok(summary)
}

pub fn cmd_poincare(config: &RunConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let (_, d) = derived(config)?;
    let a = &config.analysis;
    let series = poincare_map(&d, (a.poincare_min, a.poincare_max), a.poincare_samples)
        .map_err(|e| CliError::Config(format!("[analysis] {e}")))?;
    let mut table = Table::new(vec!["alpha0", "p", "turns"]);
    for k in 0..series.alpha0.len() {
        table.push(vec![
            series.alpha0[k],
            series.returns[k].unwrap_or(f64::NAN),
            series.winding[k].map_or(f64::NAN, |w| w.turns()),
        ]);
    }
    sink.table("poincare", &table)?;
    let opt = |x: Option<f64>| x.map_or(Value::Null, json_f64);
    let summary = json!({
        "fixed_point": opt(series.fixed_point),
        "partition": opt(series.partition),
        "slope_below": opt(series.slope_below),
        "slope_above": opt(series.slope_above),
        "limit_cycle_radius": json_f64(d.mu_ss.norm()),
        "gaps": series.returns.iter().filter(|r| r.is_none()).count(),
    });
    sink.json("poincare.json", &summary)?;
    Ok(summary)
}
