//! Property-based invariants.

use cogbeam::analytic::{
    bessel_i0, lambert_w0, normalizer_a_n, rab_m2_cdf, ratio_cdf, ratio_pdf, RatioDistParams,
};
use cogbeam::espar::{build_basis, element_currents, pattern_value, pattern_weights, EsparConfig};
use cogbeam::rab::draw_weights;
use cogbeam::simulator::{growth_flatness, Experiment, GrowthLaw, Mode, NetworkConfig};
use cogbeam::stats::{empirical_cdf, EmpiricalDist};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lambert_residual_and_monotonicity(x in -0.36787944117144233f64..1e6, dx in 0.0f64..10.0) {
        let w = lambert_w0(x).unwrap();
        let res = (w * w.exp() - x).abs() / x.abs().max(1e-300);
        prop_assert!(res <= 1e-12 || (w * w.exp() - x).abs() <= 1e-15, "x={x}: residual {res}");
        prop_assert!(lambert_w0(x + dx).unwrap() >= w);
    }

    #[test]
    fn bessel_is_even_and_at_least_one(x in -30.0f64..30.0) {
        let a = bessel_i0(x).unwrap();
        prop_assert!(a >= 1.0);
        prop_assert_eq!(a, bessel_i0(-x).unwrap());
    }

    #[test]
    fn quantile_identity(n in 2u64..10_000_000, k in 0.0f64..60.0, rho in 0.05f64..20.0) {
        let p = RatioDistParams::new(k, rho).unwrap();
        let a = normalizer_a_n(n, &p).unwrap();
        let f = ratio_cdf(a, &p).unwrap();
        prop_assert!((f - (1.0 - 1.0 / n as f64)).abs() <= 1e-9, "N={n} K={k} rho={rho}: {f}");
    }

    #[test]
    fn ratio_law_is_a_distribution(z in 0.0f64..1e4, dz in 0.0f64..100.0, k in 0.0f64..200.0, rho in 0.05f64..20.0) {
        let p = RatioDistParams::new(k, rho).unwrap();
        prop_assert_eq!(ratio_cdf(0.0, &p).unwrap(), 0.0);
        let f = ratio_cdf(z, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(ratio_cdf(z + dz, &p).unwrap() >= f);
        prop_assert!(ratio_pdf(z, &p).unwrap() >= 0.0);
        let g = rab_m2_cdf(z, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert!(rab_m2_cdf(z + dz, &p).unwrap() >= g - 1e-15);
    }

    #[test]
    fn weights_have_unit_energy(m in 1usize..32, seed in any::<u64>()) {
        let w = draw_weights::<f64, _>(m, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let energy: f64 = w.phasors().map(|c| c.norm_sqr()).sum();
        prop_assert!((energy - 1.0).abs() <= 1e-12);
        prop_assert!(w.phases.iter().all(|p| (0.0..std::f64::consts::TAU).contains(p)));
    }

    #[test]
    fn growth_flatness_is_linear_and_zero_on_its_law(c in 0.1f64..10.0, offset in -5.0f64..5.0) {
        let n: Vec<usize> = vec![16, 32, 64, 128, 256, 512];
        for law in [GrowthLaw::LogN, GrowthLaw::LogLogN] {
            let on_law: Vec<f64> = n.iter().map(|&x| c * law.eval(x as f64)).collect();
            prop_assert!(growth_flatness(&n, &on_law, law).unwrap().abs() <= 1e-12);
        }
        let v: Vec<f64> = n.iter().map(|&x| (x as f64).ln() + offset).collect();
        let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
        let s1 = growth_flatness(&n, &v, GrowthLaw::None).unwrap();
        let s2 = growth_flatness(&n, &scaled, GrowthLaw::None).unwrap();
        prop_assert!((s2 - c * s1).abs() <= 1e-12 * c.max(1.0));
        prop_assert!((s1 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn empirical_cdf_is_monotone(xs in prop::collection::vec(-1e3f64..1e3, 1..200), a in -2e3f64..2e3, b in 0.0f64..1e3) {
        let d = EmpiricalDist::new(xs).unwrap();
        let lo = empirical_cdf(&d, a);
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(empirical_cdf(&d, a + b) >= lo);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn espar_pattern_reconstructs(m in 1usize..=4, x in prop::collection::vec(-200.0f64..200.0, 3)) {
        let cfg = EsparConfig::with_synthetic_admittance(m).unwrap();
        let reactances = &x[..m - 1];
        let currents = element_currents(&cfg, reactances).unwrap();
        let basis = build_basis(&cfg, 128).unwrap();
        prop_assert!(basis.max_off_diagonal() <= 1e-8);
        let w = pattern_weights(&currents, &basis).unwrap();
        for &theta in basis.theta_grid.iter().step_by(7) {
            let direct = pattern_value(&currents, &cfg, theta);
            let expanded = basis.expand(&w, theta);
            prop_assert!((direct - expanded).norm() <= 1e-8 * direct.norm().max(1.0));
        }
        let parseval: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((parseval - basis.pattern_energy(&currents)).abs() <= 1e-8 * parseval.max(1.0));
    }

    #[test]
    fn capacity_is_reproducible(seed in any::<u64>(), n in 1usize..20, k in 0.0f64..20.0) {
        let cfg = NetworkConfig::<f64> { mode: Mode::Rab, n_users: n, k_factor: k, trials: 300, seed, ..NetworkConfig::default() };
        let a = Experiment::new(cfg.clone()).unwrap().ergodic_capacity().unwrap();
        let b = Experiment::new(cfg).unwrap().ergodic_capacity().unwrap();
        prop_assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        prop_assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }
}

#[test]
fn capacity_does_not_depend_on_thread_count() {
    let cfg = NetworkConfig::<f64> {
        n_users: 40,
        k_factor: 10.0,
        trials: 5000,
        seed: 3,
        ..NetworkConfig::default()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| Experiment::new(cfg.clone()).unwrap().ergodic_capacity().unwrap())
    };
    let one = run(1);
    for threads in [2, 4, 7] {
        let other = run(threads);
        assert_eq!(one.mean.to_bits(), other.mean.to_bits());
        assert_eq!(one.stderr.to_bits(), other.stderr.to_bits());
    }
}
