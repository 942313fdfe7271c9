use ifl::bounds::{heat_kernel_sandwich, max_lemma, riesz_upper_front, white1d_fronts, InitialCondition};
use ifl::cli::ExperimentConfig;
use ifl::feynman_kac::{mean_field, pair_energy, power_law_cell_weights, ClipPolicy};
use ifl::front_lab::{chaos_tail_bound, ScaleKind};
use ifl::kernels::{heat_kernel, lambda_eval, SpaceCovariance, SpectralMeasure, TimeCovariance};
use ifl::bounds::ModelParams;
use ifl::spectral::{c_n, d_n};
use proptest::prelude::*;

fn riesz_params() -> impl Strategy<Value = (usize, f64)> {
    (1usize..=3).prop_flat_map(|d| (Just(d), 0.05..(d as f64).min(2.0) - 0.05))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tail_decreases_and_mass_increases((d, beta) in riesz_params(), n in 0.01f64..100.0, k in 1.01f64..10.0) {
        let mu = SpectralMeasure::riesz(d, beta).unwrap();
        prop_assert!(c_n(&mu, n * k) <= c_n(&mu, n));
        prop_assert!(d_n(&mu, n * k) >= d_n(&mu, n));
    }

    #[test]
    fn riesz_kernel_is_radial(beta in 0.1f64..1.9, r in 0.01f64..10.0, phi in 0.0f64..std::f64::consts::TAU) {
        let l = SpaceCovariance::Riesz { beta };
        let a = lambda_eval(&l, &[r, 0.0]).unwrap();
        let b = lambda_eval(&l, &[r * phi.cos(), r * phi.sin()]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
        let h1 = heat_kernel(1.3, &[r, 0.0]);
        let h2 = heat_kernel(1.3, &[r * phi.cos(), r * phi.sin()]);
        prop_assert!((h1 - h2).abs() <= 1e-12 * h1.max(1e-300));
    }

    #[test]
    fn sandwich_holds(d in 1usize..=3, t in 0.1f64..4.0, m in 0.2f64..3.0, x in prop::collection::vec(-4.0f64..4.0, 3), kappa in 0.1f64..3.0) {
        let s = heat_kernel_sandwich(t, m, &x[..d], kappa).unwrap();
        prop_assert!(s.holds(1e-9), "{:?}", s);
    }

    #[test]
    fn max_lemma_dominates(a in 0.1f64..5.0, b in 0.1f64..5.0, beta in 0.05f64..1.95, x in 0.001f64..100.0) {
        let (xs, v) = max_lemma(a, b, beta).unwrap();
        let f = |x: f64| a * x.powf(-beta) - b * x.powi(-2);
        prop_assert!(f(x) <= v + 1e-12 * v.abs().max(1.0));
        prop_assert!((f(xs) - v).abs() <= 1e-12 * v.abs().max(1.0));
    }

    #[test]
    fn chaos_ratio_at_most_half((d, beta) in riesz_params(), lambda in 0.1f64..3.0, p in 2u32..6, c in 0.2f64..3.0, t in 0.5f64..10.0) {
        let m = ModelParams { d, lambda, p, u0: InitialCondition::indicator(1.0, 1.0) };
        let mu = SpectralMeasure::riesz(d, beta).unwrap();
        if let Ok(ch) = chaos_tail_bound(&m, &mu, &TimeCovariance::Constant { c }, t, 30) {
            for term in &ch.terms {
                prop_assert!(term.ratio <= 0.5 + 1e-12);
            }
            prop_assert!(ch.total <= 2.0);
        }
    }

    #[test]
    fn white_front_ratio_is_coupling_free(l1 in 0.1f64..5.0, l2 in 0.1f64..5.0, p in 2u32..6, delta in 0.05f64..0.95) {
        let (u1, w1) = white1d_fronts(l1, p, delta).unwrap();
        let (u2, w2) = white1d_fronts(l2, p, delta).unwrap();
        prop_assert!(((u1 / w1) / (u2 / w2) - 1.0).abs() < 1e-12);
        prop_assert!(w1 < u1);
    }

    #[test]
    fn riesz_upper_scales_with_coupling((d, beta) in riesz_params(), lambda in 0.1f64..3.0) {
        let a = riesz_upper_front(d, beta, lambda, 2).unwrap().bound;
        let b = riesz_upper_front(d, beta, 2.0 * lambda, 2).unwrap().bound;
        prop_assert!((b / a / 2f64.powf(2.0 / (2.0 - beta)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_field_is_bounded_and_radially_decreasing(t in 0.05f64..10.0, r in 0.0f64..5.0, dr in 0.01f64..2.0) {
        let u0 = InitialCondition::indicator(1.0, 1.0);
        let a = mean_field(&u0, t, &[r]).unwrap();
        let b = mean_field(&u0, t, &[r + dr]).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn power_law_weights_are_positive(alpha in 0.05f64..0.95, n in 2usize..200) {
        let w = power_law_cell_weights(alpha, 1.0 / n as f64, n);
        prop_assert!(w.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn pair_energy_is_symmetric(seed in 0u64..1000) {
        let n = 24;
        let a: Vec<f64> = (0..=n).map(|k| ((k as f64 + seed as f64) * 0.37).sin()).collect();
        let b: Vec<f64> = (0..=n).map(|k| ((k as f64 * 1.3 + seed as f64) * 0.11).cos()).collect();
        let g = TimeCovariance::PowerLaw { alpha: 0.4 };
        let l = SpaceCovariance::Riesz { beta: 0.5 };
        let e1 = pair_energy(&a, &b, 1, 1.0, &g, &l, ClipPolicy::default()).unwrap();
        let e2 = pair_energy(&b, &a, 1, 1.0, &g, &l, ClipPolicy::default()).unwrap();
        prop_assert!((e1.value - e2.value).abs() <= 1e-12 * e1.value);
        prop_assert!(e1.value > 0.0);
    }

    #[test]
    fn config_round_trips(d in 1usize..=3, lambda in 0.0f64..5.0, p in 2u32..8, delta in 0.01f64..0.99, seed in any::<u64>(), alpha in 0.01f64..0.99) {
        let mut c = ExperimentConfig::default();
        c.model.d = d;
        c.model.lambda = lambda;
        c.model.p = p;
        c.front.delta = delta;
        c.front.scale = ScaleKind::Eta;
        c.mc.seed = seed;
        c.gamma = TimeCovariance::PowerLaw { alpha };
        c.lambda_kernel = SpaceCovariance::Riesz { beta: 0.5 };
        let text = c.to_json();
        let back = ExperimentConfig::from_json(&text).unwrap();
        prop_assert_eq!(&back, &c, "{}", text);
        prop_assert_eq!(back.to_json(), text);
    }
}
