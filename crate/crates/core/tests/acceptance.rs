//! Acceptance gate. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use std::time::Instant;

use ctls_dynamics::analytic::{fp_residual, gibbs_q, limit_cycle_state, steady_state, EvolutionSpec};
use ctls_dynamics::dynamics::{classify, linspace, phase_diagram, poincare_map, Phase, Thresholds};
use ctls_dynamics::lattice::Lattice;
use ctls_dynamics::model::{derive, DerivedParams, PhysicalParams};
use ctls_dynamics::oracle::{
    build_space, coherent_initial, evolve, husimi_q, rhs, steady_state_density, suggested_dim, Comparison,
    FockSpace, HERMITICITY_TOLERANCE, TRACE_TOLERANCE,
};
use ctls_dynamics::propagator::{default_lattice, evolve_field, QField};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAPTION_POINTS: [(f64, f64, Phase); 4] = [
    (-2e6, 100e3, Phase::Oscillating),
    (-570e3, 100e3, Phase::CollapseRevive),
    (50e3, 100e3, Phase::MonotonicDecay),
    (100e3, 500e3, Phase::Amplifying),
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn device(delta: f64, drive: f64) -> DerivedParams {
    derive(&PhysicalParams::reference_device(delta, drive)).unwrap()
}

fn at_temperature(delta: f64, drive: f64, temperature: f64) -> DerivedParams {
    derive(&PhysicalParams { temperature, ..PhysicalParams::reference_device(delta, drive) }).unwrap()
}

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

/// Oracle from a coherent start over [0, t_end]; returns worst relative
/// errors of mean (pointwise) and variance.
fn oracle_errors(d: &DerivedParams, alpha0: Complex64, t_end: f64) -> Result<(f64, f64, usize), String> {
    let dim = suggested_dim(d, alpha0, t_end).max(30);
    let space = build_space(dim).map_err(|e| e.to_string())?;
    let rho0 = coherent_initial(&space, d, alpha0).map_err(|e| e.to_string())?;
    let times = linspace(0.0, t_end, 401);
    let run = evolve(&space, d, &rho0, &times, f64::INFINITY).map_err(|e| e.to_string())?;
    let cmp = Comparison::new(&run, alpha0, 0.5);
    let mean_err = cmp
        .analytic_mean
        .iter()
        .zip(&cmp.oracle_mean)
        .map(|(a, o)| (a - o).norm() / a.norm())
        .fold(0.0, f64::max);
    Ok((mean_err, cmp.max_rel_err_variance(), dim))
}

fn ac1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (delta, drive, _) in CAPTION_POINTS {
        let d = device(delta, drive);
        match oracle_errors(&d, c(1.0, 0.0), 10.0 / d.decay_rate()) {
            Ok((em, ev, dim)) => {
                pass &= em <= 1e-2 && ev <= 1e-2;
                parts.push(format!("({:.0}k,{:.0}k) dim {dim} mu {em:.1e} s2 {ev:.1e}", delta / 1e3, drive / 1e3));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("({delta},{drive}) error {e}"));
            }
        }
    }
    let cold = at_temperature(-570e3, 0.0, 1e-4);
    assert_eq!(cold.nu, 0.0);
    match oracle_errors(&cold, c(1.0, 0.0), 10.0 / cold.decay_rate()) {
        Ok((em, ev, _)) => {
            pass &= em <= 1e-6 && ev <= 1e-6;
            parts.push(format!("undriven cold mu {em:.1e} s2 {ev:.1e}"));
        }
        Err(e) => {
            pass = false;
            parts.push(format!("undriven cold error {e}"));
        }
    }
    Outcome { id: "AC1", pass, detail: format!("oracle vs closed form: {}", parts.join("; ")) }
}

fn ac2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (delta, drive, expected) in CAPTION_POINTS {
        let got = classify(&device(delta, drive), c(1.0, 0.0));
        pass &= got == Ok(expected);
        parts.push(format!("({:.0}k,{:.0}k)->{}", delta / 1e3, drive / 1e3, got.map_or("err".into(), |p| p.to_string())));
    }
    let base = PhysicalParams::reference_device(-570e3, 100e3);
    let deltas = linspace(-2.5e6, 0.5e6, 200);
    let drives = linspace(10e3, 1e6, 200);
    let start = Instant::now();
    let diagram = phase_diagram(&base, &deltas, &drives, c(1.0, 0.0), &Thresholds::default());
    let elapsed = start.elapsed().as_secs_f64();
    let undefined = diagram.labels.iter().filter(|l| l.is_none()).count();
    let islands = diagram.islands().len();
    pass &= elapsed < 60.0 && undefined == 0 && islands == 0;
    Outcome {
        id: "AC2",
        pass,
        detail: format!(
            "labels {}; 200x200 diagram in {elapsed:.1} s, {undefined} undefined, {islands} isolated cells",
            parts.join(" ")
        ),
    }
}

fn ac3() -> Outcome {
    let d = device(-2.5e6, 1e6);
    let s = poincare_map(&d, (0.01, 1.5), 150).unwrap();
    let within = |v: Option<f64>, target: f64, tol: f64| v.is_some_and(|v| (v - target).abs() <= tol);
    let pass = within(s.fixed_point, 0.40, 0.03)
        && within(s.partition, 0.89, 0.05)
        && within(s.slope_below, 0.67, 0.05)
        && within(s.slope_above, 0.82, 0.05);
    let f = |v: Option<f64>| v.map_or("none".into(), |v| format!("{v:.4}"));
    Outcome {
        id: "AC3",
        pass,
        detail: format!(
            "fixed point {} partition {} slopes {} / {}",
            f(s.fixed_point),
            f(s.partition),
            f(s.slope_below),
            f(s.slope_above)
        ),
    }
}

/// Husimi of the oracle's state at `t_end` from a coherent start, against
/// the Gaussian `expected` on the quadrature plane.
fn long_time_husimi_error(d: &DerivedParams, t_end: f64, grid: &Lattice, expected: impl Fn(Complex64) -> f64) -> f64 {
    let alpha0 = c(1.0, 0.0);
    let space = build_space(suggested_dim(d, alpha0, t_end)).unwrap();
    let rho0 = coherent_initial(&space, d, alpha0).unwrap();
    let run = evolve(&space, d, &rho0, &[t_end], f64::INFINITY).unwrap();
    let points: Vec<Complex64> = grid.points().map(|b| d.quadrature_to_master(b, t_end)).collect();
    let q = husimi_q(&space, &run.final_state, &points);
    grid.points().zip(q).map(|(b, q)| (q - expected(b)).abs()).fold(0.0, f64::max)
}

fn ac4() -> Outcome {
    let grid = Lattice::square(c(0.0, 0.0), 4.0, 64);
    let mut pass = true;
    let mut parts = Vec::new();
    for temperature in [0.010, 0.150] {
        let d = at_temperature(-570e3, 0.0, temperature);
        let ss = steady_state(&d);
        let pointwise = grid.points().map(|b| (ss.density(b) - gibbs_q(&d, b)).abs()).fold(0.0, f64::max);
        let oracle = long_time_husimi_error(&d, 15.0 / d.decay_rate(), &grid, |b| gibbs_q(&d, b));
        pass &= pointwise <= 1e-12 && oracle <= 1e-4;
        parts.push(format!("{:.0} mK: closed form {pointwise:.1e}, oracle {oracle:.1e}", temperature * 1e3));
    }
    Outcome { id: "AC4", pass, detail: format!("Gibbs limit: {}", parts.join("; ")) }
}

fn ac5() -> Outcome {
    let mut cases: Vec<(String, DerivedParams)> =
        CAPTION_POINTS.iter().map(|&(dd, w, _)| (format!("({:.0}k,{:.0}k)", dd / 1e3, w / 1e3), device(dd, w))).collect();
    cases.push(("150 mK (-300k,500k)".into(), at_temperature(-300e3, 500e3, 0.150)));
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, d) in cases {
        let centre = d.master_frame_fixed_point();
        let space = build_space(FockSpace::dim_for(centre.norm(), d.n_bar)).unwrap();
        let rho = steady_state_density(&space, &d, 1e-14).unwrap();
        let stationarity = rhs(&space, &d, &rho).frobenius_norm() / rho.frobenius_norm();
        let grid = Lattice::square(centre, 4.0, 48);
        let points: Vec<Complex64> = grid.points().collect();
        let q = husimi_q(&space, &rho, &points);
        let ss = steady_state(&d);
        let husimi = points
            .iter()
            .zip(q)
            .map(|(&a, q)| (q - ss.density(d.master_to_quadrature(a, 0.0))).abs())
            .fold(0.0, f64::max);
        pass &= stationarity <= 1e-6 && husimi <= 1e-6;
        parts.push(format!("{name} dim {} rhs {stationarity:.1e} Q {husimi:.1e}", space.dim()));
    }
    Outcome { id: "AC5", pass, detail: format!("super-Poisson steady state: {}", parts.join("; ")) }
}

fn ac6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut pass = true;
    let mut parts = Vec::new();
    for (delta, drive, _) in CAPTION_POINTS {
        let d = device(delta, drive);
        let spec = EvolutionSpec::new(d, c(1.0, 0.0));
        let (mut lo, mut hi, mut failures) = (f64::INFINITY, f64::NEG_INFINITY, 0);
        for _ in 0..100 {
            let t = rng.random_range(0.05..10.0) / d.decay_rate();
            let state = spec.state_at(t);
            let offset = Complex64::from_polar(rng.random_range(0.0..2.0) * state.variance.sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
            let alpha = d.quadrature_to_master(state.mean + offset, t);
            let ratio = match (fp_residual(&spec, alpha, t, 2e-3), fp_residual(&spec, alpha, t, 1e-3)) {
                (Ok(coarse), Ok(fine)) => coarse / fine,
                _ => f64::NAN,
            };
            if !((ratio - 4.0).abs() <= 0.5) {
                failures += 1;
            }
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        pass &= failures == 0;
        parts.push(format!("({:.0}k,{:.0}k) ratio in [{lo:.3}, {hi:.3}]", delta / 1e3, drive / 1e3));
    }
    Outcome { id: "AC6", pass, detail: format!("Fokker-Planck residual order: {}", parts.join("; ")) }
}

fn ac7() -> Outcome {
    let d = device(-300e3, 500e3);
    let lattice = default_lattice(&d);
    let ring = QField::excited_ring(lattice);
    let vacuum = QField::coherent(lattice, c(0.0, 0.0));
    let frames = [0.0, 0.25, 0.5, 1.0, 2.0, 10.0].map(|x| x / d.decay_rate());
    let mut worst_mass: f64 = 0.0;
    let mut last = None;
    for &t in &frames {
        let a = evolve_field(&d, &ring, t).unwrap();
        let b = evolve_field(&d, &vacuum, t).unwrap();
        worst_mass = worst_mass.max((a.mass() - 1.0).abs()).max((b.mass() - 1.0).abs());
        last = Some((a, b, t));
    }
    let (a, b, t) = last.unwrap();
    let target = limit_cycle_state(&d, t);
    let gaussian = QField::from_fn(lattice, |z| target.density(z));
    let (ab, ag, bg) = (a.l1_distance(&b), a.l1_distance(&gaussian), b.l1_distance(&gaussian));
    let pass = ab <= 1e-3 && ag <= 1e-3 && bg <= 1e-3 && worst_mass <= 1e-4;
    Outcome {
        id: "AC7",
        pass,
        detail: format!(
            "L1 ring-vacuum {ab:.1e}, ring-steady {ag:.1e}, vacuum-steady {bg:.1e}; worst mass error {worst_mass:.1e}"
        ),
    }
}

/// Random valid parameters light enough for a short oracle run.
fn light_params() -> impl Strategy<Value = (DerivedParams, Complex64, Complex64)> {
    (
        prop_oneof![-3e6..-50e3f64, 50e3..3e6f64],
        0.0..300e3f64,
        0.005..0.1f64,
        (-1.2..1.2f64, -1.2..1.2f64),
        (-1.2..1.2f64, -1.2..1.2f64),
    )
        .prop_map(|(delta, drive, temperature, a, b)| {
            (at_temperature(delta, drive, temperature), c(a.0, a.1), c(b.0, b.1))
        })
}

fn ac8() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 200, failure_persistence: None, ..Config::default() });
    let result = runner.run(&light_params(), |(d, alpha0, alpha1)| {
        // closed-form invariants
        let spec0 = EvolutionSpec::new(d, alpha0);
        let spec1 = EvolutionSpec::new(d, alpha1);
        let times = linspace(0.0, 5.0 / d.decay_rate(), 41);
        for w in times.windows(2) {
            prop_assert!(spec0.variance_at(w[1]) >= spec0.variance_at(w[0]));
        }
        for &t in &times {
            let gap = (spec0.mean_at(t) - spec1.mean_at(t)).norm();
            let bound = (alpha0 - alpha1).norm() * (-d.decay_rate() * t).exp();
            prop_assert!(gap <= bound * (1.0 + 1e-12) + 1e-15);
        }
        let t_mid = times[7];
        let state = spec0.state_at(t_mid);
        let grid = Lattice::square(state.mean, 8.0 * state.variance.sqrt(), 161);
        let mass = grid.integrate(&grid.points().map(|z| state.density(z)).collect::<Vec<_>>());
        prop_assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");

        // density-matrix invariants along a short oracle run
        let t_end = 0.5 / d.decay_rate();
        let space = build_space(suggested_dim(&d, alpha0, t_end)).unwrap();
        let rho0 = coherent_initial(&space, &d, alpha0).unwrap();
        let run = evolve(&space, &d, &rho0, &linspace(0.0, t_end, 3), f64::INFINITY)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        for s in &run.samples {
            prop_assert!((s.trace - 1.0).abs() <= TRACE_TOLERANCE);
            prop_assert!(s.hermiticity <= HERMITICITY_TOLERANCE);
        }
        // zero eigenvalues of a pure start pick up the RK4 error, which
        // shrinks as h^4; hold it to the integrity tolerance
        let min_eig = run.final_state.min_eigenvalue();
        prop_assert!(min_eig >= -TRACE_TOLERANCE, "min eigenvalue {min_eig}");
        Ok(())
    });
    Outcome {
        id: "AC8",
        pass: result.is_ok(),
        detail: match result {
            Ok(()) => "200 random draws: trace, hermiticity, positivity, normalization, variance growth, contraction".into(),
            Err(e) => format!("property failed: {e}"),
        },
    }
}

fn main() {
    let criteria: [fn() -> Outcome; 8] = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8];
    let mut failed = 0;
    for criterion in criteria {
        let start = Instant::now();
        let outcome = criterion();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {} {} ({:.1} s)", outcome.id, outcome.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
