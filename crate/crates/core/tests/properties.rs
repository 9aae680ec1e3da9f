use ctls_dynamics::analytic::{relaxed_variance, super_poisson_auto, EvolutionSpec};
use ctls_dynamics::dynamics::{classify, first_recurrence};
use ctls_dynamics::lattice::Lattice;
use ctls_dynamics::model::{derive, DerivedParams, PhysicalParams};
use ctls_dynamics::propagator::{evolve_field, kernel_mean, kernel_variance, QField};
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = DerivedParams> {
    (prop_oneof![-3e6..-20e3f64, 20e3..3e6f64], 0.0..1e6f64, 0.002..0.3f64).prop_map(|(delta, drive, temperature)| {
        derive(&PhysicalParams { temperature, ..PhysicalParams::reference_device(delta, drive) }).unwrap()
    })
}

fn point() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y)| Complex64::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn derived_symbols_are_consistent(d in params()) {
        prop_assert!(d.nu > 0.0 && d.nu < 0.5);
        prop_assert!((d.nu + d.nu_bar - 0.5).abs() < 1e-15);
        prop_assert!(d.gamma > 0.0 && d.sigma2_ss >= 0.5);
        prop_assert!((2.0 * d.sigma2_ss - 1.0 - d.n_bar).abs() < 1e-12 * (1.0 + d.n_bar));
        let fixed = d.master_frame_fixed_point();
        prop_assert!((fixed - (d.mu_ss + d.alpha_d)).norm() < 1e-9 * (1.0 + fixed.norm()));
    }

    #[test]
    fn frame_maps_are_inverse(d in params(), b in point(), t in 0.0..1e-5f64) {
        let back = d.master_to_quadrature(d.quadrature_to_master(b, t), t);
        prop_assert!((back - b).norm() < 1e-12 * (1.0 + b.norm() + d.alpha_d.abs()));
    }

    #[test]
    fn variance_grows_toward_steady_value(d in params(), t in 0.0..20.0f64, s in 0.0..20.0f64) {
        let spec = EvolutionSpec::new(d, Complex64::new(1.0, 0.0));
        let (a, b) = (t.min(s) / d.decay_rate(), t.max(s) / d.decay_rate());
        prop_assert!(spec.variance_at(a) <= spec.variance_at(b));
        prop_assert!(spec.variance_at(b) <= d.sigma2_ss * (1.0 + 1e-15));
        let ring = relaxed_variance(&d, 1.0, a);
        prop_assert!(ring >= d.sigma2_ss.min(1.0) - 1e-15 && ring <= d.sigma2_ss.max(1.0) + 1e-15);
    }

    #[test]
    fn starts_contract_at_the_decay_rate(d in params(), a in point(), b in point(), x in 0.0..15.0f64) {
        let t = x / d.decay_rate();
        let gap = (EvolutionSpec::new(d, a).mean_at(t) - EvolutionSpec::new(d, b).mean_at(t)).norm();
        prop_assert!(gap <= (a - b).norm() * (-x).exp() * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn super_poisson_weights_are_a_distribution(d in params()) {
        let sp = super_poisson_auto(&d, 1e-12);
        let total: f64 = sp.weights.iter().sum();
        prop_assert!(sp.weights.iter().all(|&w| w >= 0.0));
        prop_assert!((total + sp.deficit - 1.0).abs() < 1e-12);
        prop_assert!(sp.weights.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn kernel_moments_compose(d in params(), x in 0.05..5.0f64, y in 0.05..5.0f64, src in point()) {
        let (s, t) = (x / d.decay_rate(), (x + y) / d.decay_rate());
        // two hops: mean transported and variances added with contraction
        let via = kernel_mean(&d, kernel_mean(&d, src, 0.0, s), s, t);
        prop_assert!((via - kernel_mean(&d, src, 0.0, t)).norm() < 1e-9 * (1.0 + src.norm() + d.mu_ss.norm()));
        let composed = kernel_variance(&d, s) * (-2.0 * y).exp() + kernel_variance(&d, t - s);
        prop_assert!((composed - kernel_variance(&d, t)).abs() < 1e-12);
    }

    #[test]
    fn phase_labels_are_rotation_invariant(d in params(), phase in 0.0..std::f64::consts::TAU) {
        let start = Complex64::new(1.0, 0.0);
        prop_assume!((start - d.mu_ss).norm() > 1e-6);
        let base = classify(&d, start);
        let rot = Complex64::from_polar(1.0, phase);
        let mut turned = d;
        turned.mu_ss *= rot;
        prop_assert_eq!(classify(&turned, start * rot), base);
    }

    #[test]
    fn recurrence_lands_on_positive_axis(d in params(), a in 0.05..1.5f64) {
        if let Ok(r) = first_recurrence(&d, a) {
            let m = EvolutionSpec::new(d, Complex64::new(a, 0.0)).mean_at(r.t);
            prop_assert!(m.re > 0.0 && m.im.abs() < 1e-9 * (1.0 + m.re));
            prop_assert!((m.re - r.x).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn propagated_fields_keep_mass_and_sign(d in params(), x in 0.2..4.0f64, a in point()) {
        let sigma = d.sigma2_ss.sqrt();
        let half = 6.0f64.max(d.mu_ss.norm() + 7.0 * sigma).max(a.norm() + 6.0);
        let kernel_sigma = kernel_variance(&d, x / d.decay_rate()).sqrt();
        let points = ((2.0 * half / (kernel_sigma / 4.0)).ceil() as usize).max(96);
        let lattice = Lattice::square(Complex64::new(0.0, 0.0), half, points);
        let start = QField::coherent(lattice, a);
        let end = evolve_field(&d, &start, x / d.decay_rate()).unwrap();
        prop_assert!((end.mass() - 1.0).abs() < 1e-4, "mass {}", end.mass());
        prop_assert!(end.min_value() >= 0.0);
        let expected = EvolutionSpec::new(d, a).mean_at(x / d.decay_rate());
        prop_assert!((end.mean() - expected).norm() < 1e-3);
    }
}
