//! Oracle suite: every closed-form or independently computed reference value
//! the library is expected to reproduce, plus reduced-size Monte Carlo checks.

use std::f64::consts::{E, PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{
    heat_kernel_sandwich, lower_front_bound, m_restriction, max_lemma, moment_upper_bound, riesz_upper_front,
    simplex_bound_check, white1d_fronts, InitialCondition, ModelParams,
};
use crate::error::Result;
use crate::feynman_kac::{
    mean_field, moment_estimate, pair_energy, sample_paths, small_ball_mc, ClipPolicy, Monitoring, MonteCarloParams,
};
use crate::front_lab::{
    chaos_tail_bound, chaos_tail_bound_riesz, compare_bounds, front_scan, normalized_log_moment, polar_gaussian_constant,
    time_double_integral, FrontInterval, FrontModel, ScaleKind, Sign, Verdict,
};
use crate::bounds::front_bounds;
use crate::kernels::{
    big_gamma, dalang_check, gamma_eval, lambda_eval, riesz_fourier_constant, spectral_measure, Atom, Envelope,
    SpaceCovariance, SpectralMeasure, TimeCovariance,
};
use crate::special_fn::{
    bessel_first_zero, gamma_fn, ln_gamma, mittag_leffler, mittag_leffler_series, normal_cdf, small_ball_asymptotic,
    small_ball_exact_1d,
};
use crate::spectral::{c_n, d_n, eta, n_threshold, theta_scale, vartheta};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    /// Allowed gap; its meaning is given by `kind`.
    pub tolerance: f64,
    pub kind: &'static str,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Default)]
struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn push(&mut self, name: &str, value: f64, expected: f64, tolerance: f64, kind: &'static str, pass: bool) {
        self.checks.push(Check {
            name: name.into(),
            value,
            expected,
            tolerance,
            kind,
            pass,
            note: None,
        });
    }

    fn abs(&mut self, name: &str, value: f64, expected: f64, tol: f64) {
        let pass = (value - expected).abs() <= tol;
        self.push(name, value, expected, tol, "abs", pass);
    }

    fn rel(&mut self, name: &str, value: f64, expected: f64, tol: f64) {
        let pass = ((value - expected) / expected).abs() <= tol;
        self.push(name, value, expected, tol, "rel", pass);
    }

    fn holds(&mut self, name: &str, ok: bool) {
        self.push(name, ok as u8 as f64, 1.0, 0.0, "holds", ok);
    }

    fn note(&mut self, note: String) {
        if let Some(c) = self.checks.last_mut() {
            c.note = Some(note);
        }
    }

    /// A failed computation is a failed check, not an abort.
    fn run(&mut self, name: &str, f: impl FnOnce(&mut Suite) -> Result<()>) {
        if let Err(e) = f(self) {
            self.push(name, f64::NAN, f64::NAN, 0.0, "error", false);
            self.note(e.to_string());
        }
    }
}

fn model(d: usize, lambda: f64, p: u32) -> ModelParams {
    ModelParams {
        d,
        lambda,
        p,
        u0: InitialCondition::indicator(1.0, 1.0),
    }
}

fn riesz_half() -> SpectralMeasure {
    SpectralMeasure::riesz(1, 0.5).expect("valid Riesz measure")
}

fn kernels(s: &mut Suite) {
    s.run("kernels", |s| {
        s.abs("gamma power law at s=4", gamma_eval(&TimeCovariance::PowerLaw { alpha: 0.5 }, 4.0)?, 0.5, 1e-14);
        s.abs("big gamma power law t=4", big_gamma(&TimeCovariance::PowerLaw { alpha: 0.5 }, 4.0)?, 4.0, 1e-10);
        s.abs("riesz kernel at x=4", lambda_eval(&SpaceCovariance::Riesz { beta: 0.5 }, &[4.0])?, 0.5, 1e-14);
        s.abs(
            "mollified white at 0",
            lambda_eval(&SpaceCovariance::MollifiedWhite { eps: 1.0 }, &[0.0])?,
            0.398_942_280_401_432_7,
            1e-12,
        );
        s.rel("riesz fourier constant d=1", riesz_fourier_constant(1, 0.5)?, (2.0 * PI).sqrt(), 1e-12);
        s.rel("riesz fourier constant d=2", riesz_fourier_constant(2, 1.0)?, 2.0 * PI, 1e-12);
        s.rel("dalang integral riesz d=1", dalang_check(&riesz_half())?.value(), 11.136_655_993_663_416, 1e-8);
        let white = spectral_measure(&SpaceCovariance::White1D, 1)?;
        s.rel("dalang integral white", dalang_check(&white)?.value(), PI, 1e-8);
        Ok(())
    });
}

fn spectral(s: &mut Suite) {
    s.run("spectral", |s| {
        let mu = riesz_half();
        s.rel("C_1 riesz", c_n(&mu, 1.0), 3.342_171_032_841_334, 1e-8);
        s.rel("D_1 riesz", d_n(&mu, 1.0), 10.026_513_098_524_002, 1e-8);
        let closed = |g: f64| (4.0 / 3.0 * (2.0 * PI).sqrt() * 16.0 * g / PI).powf(2.0 / 3.0);
        let n1 = n_threshold(&mu, 2, 1.0, 1.0)?;
        s.rel("N_t bisection vs closed form", n1, closed(1.0), 1e-8);
        s.rel("N_t oracle", n1, 6.617_071_902_926_934, 1e-8);
        s.rel("N_t at Gamma=8", n_threshold(&mu, 2, 1.0, 8.0)?, 26.468_287_611_707_734, 1e-8);
        let th = theta_scale(&mu, 2, 1.0, 1.0)?;
        s.rel("theta = N sqrt 3", th.theta, th.n_cut * 3f64.sqrt(), 1e-10);
        s.rel("theta oracle", th.theta, 11.461_104_733_205_923, 1e-8);
        s.rel("vartheta Gamma=8", vartheta(8.0, 0.5)?, 4.0, 1e-12);
        s.rel("eta power law", eta(&TimeCovariance::PowerLaw { alpha: 0.5 }, 4.0, 0.5, 0.5)?, 2f64.powf(2.0 / 3.0), 1e-9);
        Ok(())
    });
}

fn special(s: &mut Suite) {
    s.run("special functions", |s| {
        s.abs("Gamma(1/2)", gamma_fn(0.5)?, PI.sqrt(), 1e-13);
        s.rel("Gamma(1/4) Gamma(3/4)", gamma_fn(0.25)? * gamma_fn(0.75)?, PI * SQRT_2, 1e-13);
        s.abs("j_{-1/2}", bessel_first_zero(-0.5)?, PI / 2.0, 1e-8);
        s.abs("j_0", bessel_first_zero(0.0)?, 2.404_825_557_695_773, 1e-8);
        s.abs("j_{1/2}", bessel_first_zero(0.5)?, PI, 1e-8);
        let mut worst: f64 = 0.0;
        for k in 0..=50 {
            let z = 0.1 * k as f64;
            worst = worst.max((mittag_leffler(1.0, z)?.value / z.exp() - 1.0).abs());
        }
        s.abs("E_1(z) = exp(z) on [0,5], max rel gap", worst, 0.0, 1e-10);
        let ratio = mittag_leffler_series(0.5, 3.0)?.value / (2.0 * 9f64.exp());
        s.push("E_{1/2}(3) / 2e^9", ratio, 1.0, 0.02, "abs", (0.98..=1.02).contains(&ratio));
        let mut convex = true;
        let xs: Vec<f64> = (0..100).map(|k| 0.1 + 0.1 * k as f64).collect();
        for w in xs.windows(3) {
            convex &= ln_gamma(w[0])? + ln_gamma(w[2])? - 2.0 * ln_gamma(w[1])? >= -1e-13;
        }
        s.holds("log-convexity of Gamma on a 100-point grid", convex);
        let rate = -2.0 * 0.25 * small_ball_asymptotic(-0.5, 0.5)?.ln();
        s.rel("small-ball exponent d=1", rate, PI * PI / 4.0, 1e-10);
        s.rel("small-ball rate d=3 eps=1", small_ball_asymptotic(0.5, 1.0)?, (-PI * PI / 2.0).exp(), 1e-10);
        Ok(())
    });
}

fn bounds(s: &mut Suite) {
    s.run("bounds", |s| {
        let mu = riesz_half();
        let g1 = TimeCovariance::Constant { c: 1.0 };
        let g2 = TimeCovariance::Constant { c: 2.0 };
        let m = model(1, 1.0, 2);
        let r1 = moment_upper_bound(&m, &mu, &g1, 1.0, &[0.0], 1.0)?.rate_term;
        s.rel("moment bound rate term", r1, 0.5 * 131.356_921_705_515_2, 1e-8);
        let r2 = moment_upper_bound(&m, &mu, &g2, 1.0, &[0.0], 1.0)?.rate_term;
        s.rel("rate term under doubled Gamma", r2 / r1, 2f64.powf(4.0 / 3.0), 1e-8);

        let env = Envelope { c: 1.0, r: 1.0 };
        let lf = lower_front_bound(2, 1.0, 2, env, 1.0, 0.5)?;
        s.abs("C_{beta,delta}", lf.c_beta_delta, 0.010_807_191_814_415_308, 1e-6);
        s.abs("lower front d=2", lf.bound, 0.103_957_644_328_905_93, 1e-4);
        s.abs("riesz upper front", riesz_upper_front(1, 0.5, 1.0, 2)?.bound, 5.219_212_140_909_204, 1e-3);
        let p5 = riesz_upper_front(2, 1.0, 1.0, 5)?.bound / riesz_upper_front(2, 1.0, 1.0, 2)?.bound;
        s.rel("riesz upper p=2 -> 5 at beta=1", p5, 4.0, 1e-12);
        let (wu, wl) = white1d_fronts(1.0, 2, 0.5)?;
        s.abs("white upper front", wu, 2.828_427_124_746_19, 1e-4);
        s.abs("white lower front", wl, 0.017_185_858_405_765_742, 1e-4);
        s.rel(
            "M_min white",
            m_restriction(&m, &SpaceCovariance::White1D, 0.5, 0.5)?,
            182.801_032_070_403_28,
            1e-9,
        );
        let envk = SpaceCovariance::LowerRieszEnvelope {
            beta: 1.0,
            envelope: Envelope { c: 1.0, r: 100.0 },
        };
        s.rel("M_min envelope", m_restriction(&model(2, 1.0, 2), &envk, 0.5, 0.5)?, 46.265_487_703_574_27, 1e-9);

        for (a, b, xs, mx) in [(1.0, 1.0, 2.0, 0.25), (2.0, 1.0, 1.0, 1.0), (1.0, 2.0, 4.0, 0.125)] {
            let (x, v) = max_lemma(a, b, 1.0)?;
            s.abs(&format!("max lemma argmax A={a} B={b}"), x, xs, 1e-12);
            s.abs(&format!("max lemma max A={a} B={b}"), v, mx, 1e-12);
        }

        let sw = heat_kernel_sandwich(1.0, 1.0, &[0.0], 1.0)?;
        s.abs("heat integral d=1", sw.integral, 0.682_689_492_137_085_9, 1e-10);
        s.holds("sandwich d=1", sw.holds(1e-9));
        let sw = heat_kernel_sandwich(2.0, 1.0, &[3.0, 0.0], 0.5)?;
        s.abs("heat integral d=2", sw.integral, 0.030_202_536_804_344_82, 1e-9);
        s.holds("sandwich d=2", sw.holds(1e-9));

        let c = simplex_bound_check(&SpectralMeasure::single_atom(1, 1.0, 1.0), 2.0, 1.0, 1)?;
        s.abs("simplex atom inside", c.lhs, 1.0 - (-1f64).exp(), 1e-12);
        s.holds("simplex atom inside holds", c.holds && c.rhs == 1.0);
        let c = simplex_bound_check(&SpectralMeasure::single_atom(1, 2.0, 4.0), 1.0, 1.0, 1)?;
        s.abs("simplex atom outside", c.lhs, 1.0 - (-4f64).exp(), 1e-12);
        s.holds("simplex atom outside holds", c.holds && c.rhs == 1.0);
        let two = SpectralMeasure::Atomic {
            d: 1,
            atoms: vec![
                Atom {
                    location: vec![1.0],
                    mass: 1.0,
                },
                Atom {
                    location: vec![3.0],
                    mass: 2.0,
                },
            ],
        };
        let c = simplex_bound_check(&two, 2.0, 1.0, 2)?;
        s.abs("simplex two atoms n=2", c.lhs, 0.574_074_470_552_319_2, 1e-9);
        s.holds("simplex two atoms holds", c.holds);
        Ok(())
    });
}

fn line(n: usize, t: f64, slope: f64) -> Vec<f64> {
    (0..=n).map(|k| slope * t * k as f64 / n as f64).collect()
}

fn feynman_kac(s: &mut Suite, seed: u64) {
    s.run("feynman-kac", |s| {
        let n = 1 << 12;
        let flat = line(n, 1.0, 0.0);
        let e = pair_energy(
            &flat,
            &flat,
            1,
            1.0,
            &TimeCovariance::PowerLaw { alpha: 0.5 },
            &SpaceCovariance::ConstantLevel { level: 1.0 },
            ClipPolicy::default(),
        )?;
        s.abs("pair energy power law", e.value, 8.0 / 3.0, 1e-6);
        let e = pair_energy(
            &line(n, 1.0, 1.0),
            &line(n, 1.0, -1.0),
            1,
            1.0,
            &TimeCovariance::Constant { c: 1.0 },
            &SpaceCovariance::Riesz { beta: 0.5 },
            ClipPolicy::off(),
        )?;
        s.abs("pair energy prescribed riesz paths", e.value, 1.104_569_499_661_587, 1e-5);

        let one = ModelParams {
            u0: InitialCondition::one(),
            ..model(1, 1.0, 2)
        };
        let g1 = TimeCovariance::Constant { c: 1.0 };
        let flat_l = SpaceCovariance::ConstantLevel { level: 1.0 };
        let mc = MonteCarloParams::new(64, 16, seed);
        let est = moment_estimate(&one, &g1, &flat_l, 1.0, &[0.0], &mc)?;
        s.abs("zero-variance moment", est.value, E, 1e-12);
        s.holds("zero-variance stderr", est.stderr == 0.0);

        let free = model(1, 0.0, 2);
        let riesz = SpaceCovariance::Riesz { beta: 0.5 };
        let est = moment_estimate(&free, &g1, &riesz, 1.0, &[0.0], &mc)?;
        s.abs("uncoupled moment x=0", est.value, 0.466_064_942_674_392_3, 1e-10);
        let est = moment_estimate(&free, &g1, &riesz, 1.0, &[2.0], &mc)?;
        s.abs("uncoupled moment x=2", est.value, 0.024_744_974_994_771_224, 1e-10);
        let u0 = InitialCondition::indicator(1.0, 1.0);
        s.abs("mean field x=0", mean_field(&u0, 1.0, &[0.0])?, 0.682_689_492_137_085_9, 1e-12);
        s.abs("mean field x=2", mean_field(&u0, 1.0, &[2.0])?, normal_cdf(3.0) - normal_cdf(1.0), 1e-12);

        let r = 2000u64;
        let ends: Vec<f64> = (0..2 * r).map(|k| sample_paths(1, 1, 4.0, 1 << 12, seed, k).endpoint(0)[0]).collect();
        let var = ends.iter().map(|v| v * v).sum::<f64>() / ends.len() as f64;
        let tol = 3.0 * SQRT_2 * 4.0 / (ends.len() as f64).sqrt();
        s.abs("Var B_4", var, 4.0, tol);
        let (a, b): (Vec<f64>, Vec<f64>) = ends.chunks(2).map(|c| (c[0], c[1])).unzip();
        let sa = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let corr = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / (sa * sb);
        s.abs("cross-replica correlation", corr, 0.0, 3.0 / (r as f64).sqrt());

        let sb2 = small_ball_mc(1, 2.0, 1 << 10, 200_000, seed, Monitoring::BridgeKill)?;
        let exact = small_ball_exact_1d(2.0)?;
        s.abs("small ball eps=2", sb2.p_hat, exact, 3.0 * sb2.stderr);
        s.abs("reflection series eps=2", exact, 0.908_999_476_153_633_8, 1e-12);
        let sb04 = small_ball_mc(1, 0.4, 1 << 12, 200_000, seed, Monitoring::Grid)?;
        s.rel("small ball exponent eps=0.4", -2.0 * 0.16 * sb04.p_hat.ln(), PI * PI / 4.0, 0.15);
        Ok(())
    });
}

fn riesz_front_model(lambda: f64) -> FrontModel {
    FrontModel {
        model: model(1, lambda, 2),
        gamma: TimeCovariance::Constant { c: 1.0 },
        lambda: SpaceCovariance::Riesz { beta: 0.5 },
        delta: 0.5,
    }
}

fn front_lab(s: &mut Suite, seed: u64) {
    s.run("front lab", |s| {
        let ti = time_double_integral(&TimeCovariance::PowerLaw { alpha: 0.5 }, 1.0)?;
        s.abs("time double integral power law", ti.symmetrized, 8.0 / 3.0, 1e-8);
        for g in [
            TimeCovariance::Constant { c: 1.0 },
            TimeCovariance::PowerLaw { alpha: 0.3 },
            TimeCovariance::PowerLaw { alpha: 0.7 },
        ] {
            let ti = time_double_integral(&g, 2.0)?;
            s.abs(&format!("two-way time integral {g:?}"), ti.brute, ti.symmetrized, 1e-8);
        }
        let ti = time_double_integral(&TimeCovariance::Constant { c: 1.0 }, 2.0)?;
        s.abs("time double integral constant t=2", ti.symmetrized, 4.0, 1e-12);
        s.note(format!("printed-factor form gives {}", ti.printed_form));
        let (q, c) = polar_gaussian_constant(1, 0.5)?;
        s.rel("polar gaussian constant", q, c, 1e-9);
        s.rel("polar gaussian oracle", c, 3.625_609_908_221_908, 1e-12);

        let fm = FrontModel {
            model: ModelParams {
                u0: InitialCondition::one(),
                ..model(1, 1.0, 2)
            },
            gamma: TimeCovariance::Constant { c: 1.0 },
            lambda: SpaceCovariance::ConstantLevel { level: 1.0 },
            delta: 0.5,
        };
        let f = normalized_log_moment(&fm, 2.0, 0.0, ScaleKind::Vartheta, &MonteCarloParams::new(16, 8, seed))?;
        s.abs("zero-variance functional", f.s_value, 1.0, 1e-12);
        let f = normalized_log_moment(&riesz_front_model(0.0), 400.0, 0.5, ScaleKind::Vartheta, &MonteCarloParams::new(16, 8, seed))?;
        s.abs("uncoupled functional -> -p rho^2/2", f.s_value, -0.25, 0.05);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst_ratio: f64 = 0.0;
        let mut worst_total: f64 = 0.0;
        for _ in 0..20 {
            let m = model(1, rng.random_range(0.2..3.0), rng.random_range(2u32..6));
            let beta = rng.random_range(0.1..0.9);
            let g = TimeCovariance::Constant { c: rng.random_range(0.5..2.0) };
            let t = rng.random_range(0.5..8.0);
            let ch = chaos_tail_bound(&m, &SpectralMeasure::riesz(1, beta)?, &g, t, 30)?;
            worst_ratio = ch.terms.iter().map(|c| c.ratio).fold(worst_ratio, f64::max);
            worst_total = worst_total.max(ch.total);
        }
        s.push("chaos ratio, 20 random sets", worst_ratio, 0.5, 1e-12, "max", worst_ratio <= 0.5 + 1e-12);
        s.push("chaos total, 20 random sets", worst_total, 2.0, 0.0, "max", worst_total <= 2.0);

        let ch = chaos_tail_bound_riesz(1, 0.5, &model(1, 1.0, 2), &TimeCovariance::Constant { c: 1.0 }, 1.0, 60)?;
        let asym = ch.asymptotic.unwrap_or(f64::NAN);
        let large = matches!(ch.regime, Some(crate::special_fn::MlRegime::Asymptotic));
        let close = ((ch.total - asym) / asym).abs() <= 0.05;
        s.push("riesz chaos total vs asymptotic", ch.total, asym, 0.05, "rel", close || !large);
        if !large {
            s.note("series regime: asymptotic comparison flagged, not enforced".into());
        }

        let fm = riesz_front_model(1.0);
        let upper = riesz_upper_front(1, 0.5, 1.0, 2)?.bound;
        let mc = MonteCarloParams::new(100_000, 32, seed);
        let scan = front_scan(&fm, &[0.01, 2.0 * upper], &[2.0, 4.0, 8.0], ScaleKind::Vartheta, &mc)?;
        let near = &scan.verdicts[0];
        let far = &scan.verdicts[1];
        s.holds("front sign POSITIVE at rho=0.01", near.sign == Sign::Positive);
        s.holds("front sign NEGATIVE at twice the riesz upper front", far.sign == Sign::Negative);
        let fb = front_bounds(&fm.model, &fm.gamma, &fm.lambda, fm.delta)?;
        let cmp = compare_bounds(FrontInterval::from_scan(&scan), &fb, ScaleKind::Vartheta, 0.05);
        let ok = cmp.iter().any(|c| c.bound == "riesz_upper" && c.verdict == Verdict::Consistent);
        s.holds("riesz front scan consistent with the upper bound", ok);

        let white = FrontModel {
            model: model(1, 1.0, 2),
            gamma: TimeCovariance::Constant { c: 1.0 },
            lambda: SpaceCovariance::MollifiedWhite { eps: 0.01 },
            delta: 0.5,
        };
        let scan = front_scan(&white, &[0.05, 0.5, 2.0, 8.0], &[1.0, 2.0], ScaleKind::Eta, &MonteCarloParams::new(20_000, 32, seed))?;
        let interval = FrontInterval::from_scan(&scan);
        s.push(
            "mollified white front above white lower bound",
            interval.hi,
            0.017_185_858_405_765_742,
            0.05,
            "min",
            interval.hi >= 0.017_185_858_405_765_742 * 0.95,
        );
        Ok(())
    });
}

/// Runs every check; never panics on a numerical failure.
pub fn run_suite(seed: u64) -> Vec<Check> {
    let mut s = Suite::default();
    kernels(&mut s);
    spectral(&mut s);
    special(&mut s);
    bounds(&mut s);
    feynman_kac(&mut s, seed);
    front_lab(&mut s, seed);
    s.checks
}
