//! Closed-form front bounds and the auxiliary lemmas they rest on.
//!
//! Constants are evaluated exactly as printed, including those whose
//! derivation passes through the time symmetrization step (see
//! [`PRINTED_SYMMETRIZATION_FACTOR`]).

use std::f64::consts::{E, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{big_gamma, riesz_fourier_constant, Envelope, SpaceCovariance, SpectralMeasure, TimeCovariance};
use crate::quad::{integrate, QuadTol};
use crate::special_fn::{bessel_first_zero, gamma_fn, unit_ball_volume, unit_sphere_area};
use crate::spectral::{check_delta, theta_scale};

/// Factor in front of `int_0^t gamma(u)(t-u) du` as printed in the lower-front
/// argument. Direct quadrature gives 2; see `front_lab::time_double_integral`.
pub const PRINTED_SYMMETRIZATION_FACTOR: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum U0Shape {
    /// `C_u0 1_{B_M}`.
    Indicator,
    /// `||u0|| exp(-|y|^2 / 2M^2) 1_{B_M}`.
    Bump,
    /// `u0 = ||u0||` everywhere. Not compactly supported; only meant for
    /// zero-variance checks.
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub shape: U0Shape,
    /// Support radius `M`.
    pub m: f64,
    /// Support ratio `r >= 1` (white-noise case: `u0` supported in `B_{rM}`).
    #[serde(default = "one")]
    pub r: f64,
    /// Lower level `C_u0` on `B_M`.
    pub level: f64,
    pub sup_norm: f64,
}

fn one() -> f64 {
    1.0
}

impl InitialCondition {
    pub fn indicator(m: f64, level: f64) -> Self {
        Self {
            shape: U0Shape::Indicator,
            m,
            r: 1.0,
            level,
            sup_norm: level,
        }
    }

    pub fn one() -> Self {
        Self {
            shape: U0Shape::One,
            m: 1.0,
            r: 1.0,
            level: 1.0,
            sup_norm: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::config("model.u0.m", format!("must be positive, got {}", self.m)));
        }
        if !(self.r >= 1.0) {
            return Err(Error::config("model.u0.r", format!("must be >= 1, got {}", self.r)));
        }
        if !(self.level > 0.0) {
            return Err(Error::config("model.u0.level", format!("must be positive, got {}", self.level)));
        }
        let floor = match self.shape {
            U0Shape::Bump => self.sup_norm * (-0.5f64).exp(),
            _ => self.sup_norm,
        };
        if !(self.level <= floor * (1.0 + 1e-12)) {
            return Err(Error::config(
                "model.u0.level",
                format!("must not exceed the minimum of u0 on B_M ({floor}), got {}", self.level),
            ));
        }
        Ok(())
    }

    /// `u0` at a point of squared radius `r2`.
    pub fn eval_r2(&self, r2: f64) -> f64 {
        let m2 = self.m * self.m;
        match self.shape {
            U0Shape::One => self.sup_norm,
            _ if r2 > m2 => 0.0,
            U0Shape::Indicator => self.level,
            U0Shape::Bump => self.sup_norm * (-0.5 * r2 / m2).exp(),
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.eval_r2(y.iter().map(|v| v * v).sum())
    }

    pub fn is_compact(&self) -> bool {
        self.shape != U0Shape::One
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    /// Coupling `lambda >= 0`.
    pub lambda: f64,
    pub p: u32,
    pub u0: InitialCondition,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::config("model.d", "must be >= 1"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("model.lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if self.p < 2 {
            return Err(Error::config("model.p", format!("must be an integer >= 2, got {}", self.p)));
        }
        self.u0.validate()
    }

    fn pm1(&self) -> f64 {
        self.p as f64 - 1.0
    }
}

/// Log of the explicit moment upper bound, split so the growth term is visible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentUpperBound {
    pub log_bound: f64,
    /// `(p/4) t D_{N_t} / C_{N_t}`.
    pub rate_term: f64,
    pub theta: f64,
    pub n_cut: f64,
}

/// `log` of
/// `2^{p/2} e^{(p/4) t D/C} (2 pi t)^{-dp/4} e^{-|x|^2 p / (4t(k+1))} e^{M^2 p/(4tk)} w_d^{p/2} M^{dp/2} ||u0||^p`.
pub fn moment_upper_bound(
    model: &ModelParams,
    mu: &SpectralMeasure,
    gamma: &TimeCovariance,
    t: f64,
    x: &[f64],
    kappa: f64,
) -> Result<MomentUpperBound> {
    if !(t > 0.0) || !(kappa > 0.0) {
        return Err(Error::domain("moment upper bound needs t > 0 and kappa > 0"));
    }
    let big_g = big_gamma(gamma, t)?;
    let th = theta_scale(mu, model.p, model.lambda, big_g)?;
    let p = model.p as f64;
    let d = model.d as f64;
    let m = model.u0.m;
    let x2: f64 = x.iter().map(|v| v * v).sum();
    let rate_term = 0.25 * p * t * th.rate();
    let log_bound = 0.5 * p * 2f64.ln() + rate_term - 0.25 * d * p * (2.0 * PI * t).ln()
        - x2 * p / (4.0 * t * (kappa + 1.0))
        + m * m * p / (4.0 * t * kappa)
        + 0.5 * p * unit_ball_volume(model.d).ln()
        + 0.5 * d * p * m.ln()
        + p * model.u0.sup_norm.ln();
    Ok(MomentUpperBound {
        log_bound,
        rate_term,
        theta: th.theta,
        n_cut: th.n_cut,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerFront {
    pub c_beta_delta: f64,
    pub j_nu: f64,
    pub bound: f64,
}

/// `sqrt(C_{beta,delta}) lambda^{2/(2-beta)} (p-1)^{1/(2-beta)}`.
pub fn lower_front_bound(
    d: usize,
    coupling: f64,
    p: u32,
    envelope: Envelope,
    beta: f64,
    delta: f64,
) -> Result<LowerFront> {
    let df = d as f64;
    if !(beta >= 0.0 && beta < df.min(2.0)) {
        return Err(Error::domain(format!("lower front needs 0 <= beta < min(2, d), got {beta}")));
    }
    check_delta(delta)?;
    if p < 2 || !(coupling >= 0.0) || !(envelope.c > 0.0) {
        return Err(Error::domain("lower front needs p >= 2, lambda >= 0, C_Lambda > 0"));
    }
    let q = 1.0 / (2.0 - beta);
    let j_nu = bessel_first_zero((df - 2.0) / 2.0)?;
    let h = 0.5 * beta;
    let c = 2.0
        * (h.powf(beta * q) - h.powf(2.0 * q))
        * (1.0 - delta).powf(2.0 * q)
        * delta
        * j_nu.powf(-2.0 * beta * q)
        * envelope.c.powf(2.0 * q)
        * (2.0 * (1.0 - delta)).sqrt();
    let bound = c.sqrt() * coupling.powf(2.0 * q) * (p as f64 - 1.0).powf(q);
    Ok(LowerFront {
        c_beta_delta: c,
        j_nu,
        bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszUpper {
    pub bound: f64,
    /// `B = Lambda_beta Gamma(beta/2) Gamma(1-beta/2) / (2^{d-2} pi^{d/2} Gamma(d/2))`.
    pub b_const: f64,
}

/// Upper front in the `vartheta` scale for the Riesz kernel.
pub fn riesz_upper_front(d: usize, beta: f64, coupling: f64, p: u32) -> Result<RieszUpper> {
    let df = d as f64;
    if !(beta > 0.0 && beta < df.min(2.0)) {
        return Err(Error::domain(format!("Riesz upper front needs 0 < beta < min(2, d), got {beta}")));
    }
    if p < 2 || !(coupling >= 0.0) {
        return Err(Error::domain("Riesz upper front needs p >= 2 and lambda >= 0"));
    }
    let q = 1.0 / (2.0 - beta);
    let g = gamma_fn((df - beta) / 2.0)? * gamma_fn(1.0 - beta / 2.0)? / gamma_fn(df / 2.0)?;
    let scale = (p as f64 - 1.0).powf(q) * coupling.powf(2.0 * q);
    let displayed = 2.0 * SQRT_2 * g.powf(q) * scale;
    let b_const = riesz_fourier_constant(d, beta)? * gamma_fn(beta / 2.0)? * gamma_fn(1.0 - beta / 2.0)?
        / (2f64.powf(df - 2.0) * PI.powf(df / 2.0) * gamma_fn(df / 2.0)?);
    let via_b = SQRT_2 * b_const.powf(q) * scale;
    if displayed > 0.0 {
        let gap = (via_b / displayed - 1.0).abs();
        if gap > 1e-12 {
            return Err(Error::IdentityMismatch {
                lhs: via_b,
                rhs: displayed,
                gap,
            });
        }
    }
    Ok(RieszUpper {
        bound: displayed,
        b_const,
    })
}

/// `(upper, lower)` fronts for space-white noise in `d = 1`.
pub fn white1d_fronts(coupling: f64, p: u32, delta: f64) -> Result<(f64, f64)> {
    check_delta(delta)?;
    if p < 2 || !(coupling >= 0.0) {
        return Err(Error::domain("white-noise fronts need p >= 2 and lambda >= 0"));
    }
    let s = (p as f64 - 1.0) * coupling * coupling;
    let upper = 2.0 * SQRT_2 * s;
    let lower = 2.0 * SQRT_2 / (E * E * PI.powf(1.5)) * (1.0 - delta).powf(1.5) * delta.sqrt() * s;
    Ok((upper, lower))
}

/// Smallest support radius `M` the lower front needs when `Gamma_inf < inf`.
pub fn m_restriction(model: &ModelParams, lambda: &SpaceCovariance, delta: f64, gamma_inf: f64) -> Result<f64> {
    check_delta(delta)?;
    if !gamma_inf.is_finite() {
        return Err(Error::NotApplicable(
            "Gamma_t grows without bound, so no restriction on M is needed".into(),
        ));
    }
    if !(gamma_inf > 0.0) || model.lambda == 0.0 {
        return Err(Error::NotApplicable("the restriction needs Gamma_inf > 0 and lambda > 0".into()));
    }
    let denom_common = model.lambda * model.lambda * model.pm1() * (1.0 - delta) * gamma_inf;
    if lambda.is_white() && model.d == 1 {
        return Ok(SQRT_2 * PI.powf(2.5) * E * E / (4.0 * denom_common));
    }
    let (env, beta) = lambda
        .riesz_envelope(model.d)
        .ok_or_else(|| Error::NotApplicable("kernel has no Riesz-type lower envelope".into()))?;
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::NotApplicable(format!("restriction needs 0 < beta < 2, got {beta}")));
    }
    let j = bessel_first_zero((model.d as f64 - 2.0) / 2.0)?;
    let m = 2.0 * (2f64.powf(beta - 1.0) * j * j / (beta * denom_common * env.c)).powf(1.0 / (2.0 - beta));
    if env.r < m {
        return Err(Error::NotApplicable(format!(
            "envelope radius R = {} is below the required {m}",
            env.r
        )));
    }
    Ok(m)
}

/// Maximizer and maximum of `f(x) = A x^{-beta} - B x^{-2}` on `x > 0`.
pub fn max_lemma(a: f64, b: f64, beta: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0 && beta > 0.0 && beta < 2.0) {
        return Err(Error::domain("max lemma needs A, B > 0 and 0 < beta < 2"));
    }
    let q = 1.0 / (2.0 - beta);
    let x = (2.0 * b / (beta * a)).powf(q);
    let h = 0.5 * beta;
    let v = (h.powf(beta * q) - h.powf(2.0 * q)) * a.powf(2.0 * q) * b.powf(-beta * q);
    Ok((x, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: f64,
    pub integral: f64,
    pub upper: f64,
}

impl Sandwich {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.integral + slack && self.integral <= self.upper + slack
    }
}

/// Heat-kernel mass of a ball with its two Gaussian envelopes.
pub fn heat_kernel_sandwich(t: f64, m: f64, x: &[f64], kappa: f64) -> Result<Sandwich> {
    if !(t > 0.0 && kappa > 0.0 && m >= 0.0) || x.is_empty() {
        return Err(Error::domain("sandwich needs t, kappa > 0, M >= 0, d >= 1"));
    }
    if m == 0.0 {
        return Ok(Sandwich {
            lower: 0.0,
            integral: 0.0,
            upper: 0.0,
        });
    }
    let d = x.len();
    let x2: f64 = x.iter().map(|v| v * v).sum();
    let pre = (2.0 * PI * t).powf(-(d as f64) / 2.0) * unit_ball_volume(d) * m.powi(d as i32);
    let lower = pre * (-(kappa + 1.0) * x2 / (2.0 * t)).exp() * (-m * m * (1.0 + 1.0 / kappa) / (2.0 * t)).exp();
    let upper = pre * (-x2 / (2.0 * t * (kappa + 1.0))).exp() * (m * m / (2.0 * t * kappa)).exp();
    let integral = ball_heat_integral(t, m, x2.sqrt(), d, |_| 1.0)?;
    Ok(Sandwich { lower, integral, upper })
}

/// `int_{|y| <= M} p_t(y - x) w(|y|) dy` with `|x| = r`.
pub(crate) fn ball_heat_integral<W: Fn(f64) -> f64>(t: f64, m: f64, r: f64, d: usize, w: W) -> Result<f64> {
    let s = (2.0 * t).sqrt();
    if d == 1 && r - m < 5.0 * s {
        let probe = w(0.0);
        if w(m) == probe && w(0.5 * m) == probe {
            let mass = 0.5 * (libm::erf((m - r) / s) + libm::erf((m + r) / s));
            return Ok(probe * mass);
        }
    }
    Ok(log_ball_heat_integral(t, m, r, d, w)?.exp())
}

/// `log` of [`ball_heat_integral`], finite far beyond the underflow range.
///
/// The factor `exp(-(r - M)_+^2 / 2t)` is pulled out analytically; the rest
/// is radial times angular adaptive quadrature (plain quadrature in `d = 1`).
pub(crate) fn log_ball_heat_integral<W: Fn(f64) -> f64>(t: f64, m: f64, r: f64, d: usize, w: W) -> Result<f64> {
    let tol = QuadTol::new(1e-300, 1e-12);
    let gap = (r - m).max(0.0);
    let shift = gap * gap / (2.0 * t);
    let log_norm = -(d as f64) / 2.0 * (2.0 * PI * t).ln();
    let v = if d == 1 {
        let k = |y: f64| w(y.abs()) * (shift - (y - r) * (y - r) / (2.0 * t)).exp();
        integrate(k, -m, m, tol)?.value
    } else {
        let k = d as i32 - 2;
        let radial = |rho: f64| -> f64 {
            if rho == 0.0 {
                return 0.0;
            }
            let base = (shift - (rho - r) * (rho - r) / (2.0 * t)).exp();
            if base == 0.0 {
                return 0.0;
            }
            let c = rho * r / t;
            let ang = integrate(|phi: f64| (-c * (1.0 - phi.cos())).exp() * phi.sin().powi(k), 0.0, PI, tol)
                .map_or(f64::NAN, |q| q.value);
            w(rho) * rho.powi(d as i32 - 1) * base * ang
        };
        unit_sphere_area(d - 1) * integrate(radial, 0.0, m, tol)?.value
    };
    if !v.is_finite() {
        return Err(Error::QuadratureFailure {
            tol: 1e-12,
            estimate: f64::INFINITY,
        });
    }
    Ok(v.ln() - shift + log_norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimplexCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `int int_{S_{t,n}} e^{-sum w_i |xi_i|^2} dw mu(d xi) <= sum_k C(n,k) t^k/k! D^k C^{n-k}`
/// for an atomic `mu` and `n <= 3`.
pub fn simplex_bound_check(mu: &SpectralMeasure, n_cut: f64, t: f64, n: usize) -> Result<SimplexCheck> {
    let SpectralMeasure::Atomic { atoms, .. } = mu else {
        return Err(Error::domain("simplex check needs an atomic spectral measure"));
    };
    if !(1..=3).contains(&n) || !(t > 0.0) || !(n_cut > 0.0) {
        return Err(Error::domain("simplex check needs n in 1..=3, t > 0, N > 0"));
    }
    let rates: Vec<(f64, f64)> = atoms.iter().map(|a| (a.radius().powi(2), a.mass)).collect();
    // phi(w) = sum_k m_k e^{-w a_k}; Phi1(s) = int_0^s phi exactly
    let phi = |w: f64| rates.iter().map(|(a, m)| m * (-a * w).exp()).sum::<f64>();
    let phi1 = |s: f64| {
        rates
            .iter()
            .map(|(a, m)| if *a == 0.0 { m * s } else { -m * (-a * s).exp_m1() / a })
            .sum::<f64>()
    };
    let tol = QuadTol::new(1e-14, 1e-12);
    let phi2 = |s: f64| -> f64 {
        integrate(|w| phi(w) * phi1(s - w), 0.0, s, tol)
            .map(|q| q.value)
            .unwrap_or(f64::NAN)
    };
    let lhs = match n {
        1 => phi1(t),
        2 => phi2(t),
        _ => integrate(|w| phi(w) * phi2(t - w), 0.0, t, tol)?.value,
    };
    if !lhs.is_finite() {
        return Err(Error::QuadratureFailure {
            tol: 1e-12,
            estimate: f64::INFINITY,
        });
    }
    let c = crate::spectral::c_n(mu, n_cut);
    let dd = crate::spectral::d_n(mu, n_cut);
    let mut rhs = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
            fact *= k as f64;
        }
        rhs += binom * t.powi(k as i32) / fact * dd.powi(k as i32) * c.powi((n - k) as i32);
    }
    Ok(SimplexCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-10),
    })
}

/// Every closed-form front constant that applies to a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontBounds {
    /// Cap on the upper front in the `theta` scale.
    pub nu_bar_cap: f64,
    pub lower_front: Option<f64>,
    pub riesz_upper: Option<f64>,
    pub white_upper: Option<f64>,
    pub white_lower: Option<f64>,
    pub c_beta_delta: Option<f64>,
    pub b_const: Option<f64>,
    pub j_nu: f64,
    pub m_min: Option<f64>,
    pub printed_symmetrization_factor: f64,
}

pub fn front_bounds(
    model: &ModelParams,
    gamma: &TimeCovariance,
    lambda: &SpaceCovariance,
    delta: f64,
) -> Result<FrontBounds> {
    model.validate()?;
    check_delta(delta)?;
    let d = model.d;
    let j_nu = bessel_first_zero((d as f64 - 2.0) / 2.0)?;
    let mut out = FrontBounds {
        nu_bar_cap: 1.0,
        lower_front: None,
        riesz_upper: None,
        white_upper: None,
        white_lower: None,
        c_beta_delta: None,
        b_const: None,
        j_nu,
        m_min: None,
        printed_symmetrization_factor: PRINTED_SYMMETRIZATION_FACTOR,
    };
    if let Some((env, beta)) = lambda.riesz_envelope(d) {
        if beta < (d as f64).min(2.0) {
            let lf = lower_front_bound(d, model.lambda, model.p, env, beta, delta)?;
            out.lower_front = Some(lf.bound);
            out.c_beta_delta = Some(lf.c_beta_delta);
        }
    }
    if let SpaceCovariance::Riesz { beta } = lambda {
        let ru = riesz_upper_front(d, *beta, model.lambda, model.p)?;
        out.riesz_upper = Some(ru.bound);
        out.b_const = Some(ru.b_const);
    }
    if lambda.is_white() && d == 1 {
        let (u, l) = white1d_fronts(model.lambda, model.p, delta)?;
        out.white_upper = Some(u);
        out.white_lower = Some(l);
    }
    out.m_min = m_restriction(model, lambda, delta, gamma.gamma_infinity()).ok();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Atom;

    fn model(d: usize, lambda: f64, p: u32) -> ModelParams {
        ModelParams {
            d,
            lambda,
            p,
            u0: InitialCondition::indicator(1.0, 1.0),
        }
    }

    #[test]
    fn riesz_upper_examples() {
        let r = riesz_upper_front(1, 0.5, 1.0, 2).unwrap();
        assert!((r.bound - 5.219_212_140_909_204).abs() < 1e-9);
        let r2 = riesz_upper_front(1, 0.5, 2.0, 2).unwrap();
        assert!((r2.bound / r.bound - 2f64.powf(2.0 / 1.5)).abs() < 1e-12);
        let a = riesz_upper_front(2, 1.0, 1.0, 2).unwrap().bound;
        let b = riesz_upper_front(2, 1.0, 1.0, 5).unwrap().bound;
        assert!((b / a - 4.0).abs() < 1e-12);
        assert!(riesz_upper_front(1, 1.0, 1.0, 2).is_err());
    }

    #[test]
    fn b_constant_grid() {
        for (d, beta) in [(1, 0.3), (1, 0.7), (2, 1.0), (3, 1.5)] {
            let r = riesz_upper_front(d, beta, 1.0, 2).unwrap();
            let df = d as f64;
            let g = gamma_fn((df - beta) / 2.0).unwrap() * gamma_fn(1.0 - beta / 2.0).unwrap()
                / gamma_fn(df / 2.0).unwrap();
            assert!((r.b_const / (2f64.powf(2.0 - beta) * g) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_front_example() {
        let env = Envelope { c: 1.0, r: f64::INFINITY };
        let lf = lower_front_bound(2, 1.0, 2, env, 1.0, 0.5).unwrap();
        assert!((lf.c_beta_delta - 0.010_807_191_814_415_308).abs() < 1e-12);
        assert!((lf.bound - 0.103_957_644_328_905_93).abs() < 1e-12);
        assert_eq!(lower_front_bound(2, 0.0, 2, env, 1.0, 0.5).unwrap().bound, 0.0);
        assert!(lower_front_bound(2, 1.0, 2, env, 1.0, 1.0 - 1e-12).unwrap().bound < 1e-8);
        assert!(lower_front_bound(2, 1.0, 2, env, 2.0, 0.5).is_err());
        assert!(lower_front_bound(2, 1.0, 2, env, 1.0, 1.0).is_err());
    }

    #[test]
    fn white_fronts() {
        let (u, l) = white1d_fronts(1.0, 2, 0.5).unwrap();
        assert!((u - 2.828_427_124_746_19).abs() < 1e-12);
        assert!((l - 0.017_185_858_405_765_742).abs() < 1e-14);
        assert_eq!(white1d_fronts(0.0, 2, 0.5).unwrap(), (0.0, 0.0));
        let (u3, l3) = white1d_fronts(1.0, 3, 0.5).unwrap();
        assert!((u3 / u - 2.0).abs() < 1e-12 && (l3 / l - 2.0).abs() < 1e-12);
    }

    #[test]
    fn m_restriction_examples() {
        let white = m_restriction(&model(1, 1.0, 2), &SpaceCovariance::White1D, 0.5, 0.5).unwrap();
        assert!((white - 182.801_032_070_403_28).abs() < 1e-9);
        let env = SpaceCovariance::LowerRieszEnvelope {
            beta: 1.0,
            envelope: Envelope { c: 1.0, r: 100.0 },
        };
        let m = m_restriction(&model(2, 1.0, 2), &env, 0.5, 0.5).unwrap();
        assert!((m - 46.265_487_703_574_27).abs() < 1e-9);
        assert!(matches!(
            m_restriction(&model(2, 1.0, 2), &env, 0.5, f64::INFINITY),
            Err(Error::NotApplicable(_))
        ));
        let tight = SpaceCovariance::LowerRieszEnvelope {
            beta: 1.0,
            envelope: Envelope { c: 1.0, r: 10.0 },
        };
        assert!(m_restriction(&model(2, 1.0, 2), &tight, 0.5, 0.5).is_err());
    }

    #[test]
    fn max_lemma_examples() {
        assert_eq!(max_lemma(1.0, 1.0, 1.0).unwrap(), (2.0, 0.25));
        assert_eq!(max_lemma(2.0, 1.0, 1.0).unwrap(), (1.0, 1.0));
        let (x, v) = max_lemma(1.0, 2.0, 1.0).unwrap();
        assert!((x - 4.0).abs() < 1e-15 && (v - 0.125).abs() < 1e-15);
    }

    #[test]
    fn sandwich_examples() {
        let s = heat_kernel_sandwich(1.0, 1.0, &[0.0], 1.0).unwrap();
        assert!((s.integral - 0.682_689_492_137_085_9).abs() < 1e-14);
        assert!(s.holds(0.0));
        let z = heat_kernel_sandwich(1.0, 0.0, &[0.0], 1.0).unwrap();
        assert_eq!((z.lower, z.integral, z.upper), (0.0, 0.0, 0.0));
        let s2 = heat_kernel_sandwich(2.0, 1.0, &[3.0, 0.0], 0.5).unwrap();
        assert!((s2.integral - 0.030_202_536_804_344_82).abs() < 1e-11);
        assert!(s2.holds(0.0));
    }

    #[test]
    fn log_ball_integral_far_out() {
        // d = 1, M = 1, t = 1, r = 40: log(Phi(41) - Phi(39)) = log Phi(-39) to leading order
        let lv = log_ball_heat_integral(1.0, 1.0, 40.0, 1, |_| 1.0).unwrap();
        // Mills ratio: log Phi(-x) = -x^2/2 - log(x sqrt(2 pi)) + log(1 - 1/x^2 + 3/x^4)
        let x: f64 = 39.0;
        let expect = -x * x / 2.0 - (x * (2.0 * PI).sqrt()).ln() + (1.0 - 1.0 / (x * x) + 3.0 / x.powi(4)).ln();
        assert!((lv - expect).abs() < 1e-5, "{lv} vs {expect}");
        let near = log_ball_heat_integral(1.0, 1.0, 2.0, 1, |_| 1.0).unwrap();
        assert!((near.exp() - 0.157_305_355_899_826_96).abs() < 1e-13);
        let d2 = log_ball_heat_integral(2.0, 1.0, 3.0, 2, |_| 1.0).unwrap();
        assert!((d2.exp() - 0.030_202_536_804_344_82).abs() < 1e-11);
    }

    #[test]
    fn ball_integral_d3_matches_closed_form() {
        // centered ball in d = 3: P(|B_1| <= 1) = erf(1/sqrt 2) - sqrt(2/pi) e^{-1/2}
        let v = ball_heat_integral(1.0, 1.0, 0.0, 3, |_| 1.0).unwrap();
        let exact = libm::erf(std::f64::consts::FRAC_1_SQRT_2) - (2.0 / PI).sqrt() * (-0.5f64).exp();
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn simplex_examples() {
        let a = SpectralMeasure::single_atom(1, 1.0, 1.0);
        let c = simplex_bound_check(&a, 2.0, 1.0, 1).unwrap();
        assert!((c.lhs - (1.0 - (-1f64).exp())).abs() < 1e-14);
        assert_eq!(c.rhs, 1.0);
        assert!(c.holds);
        let b = SpectralMeasure::single_atom(1, 2.0, 4.0);
        let c = simplex_bound_check(&b, 1.0, 1.0, 1).unwrap();
        assert!((c.lhs - (1.0 - (-4f64).exp())).abs() < 1e-14);
        assert_eq!(c.rhs, 1.0);
        let two = SpectralMeasure::Atomic {
            d: 1,
            atoms: vec![
                Atom { location: vec![1.0], mass: 1.0 },
                Atom { location: vec![3.0], mass: 2.0 },
            ],
        };
        let c = simplex_bound_check(&two, 2.0, 1.0, 2).unwrap();
        assert!((c.lhs - 0.574_074_470_552_319_2).abs() < 1e-11);
        assert!(c.holds);
        assert!(simplex_bound_check(&two, 2.0, 1.0, 3).unwrap().holds);
    }

    #[test]
    fn moment_bound_rate_term() {
        let mu = SpectralMeasure::riesz(1, 0.5).unwrap();
        let g = TimeCovariance::Constant { c: 1.0 };
        let m = model(1, 1.0, 2);
        let b = moment_upper_bound(&m, &mu, &g, 1.0, &[0.0], 1.0).unwrap();
        assert!((b.rate_term - 0.5 * 131.356_921_705_515_2).abs() < 1e-6);
        let b2 = moment_upper_bound(&m, &mu, &TimeCovariance::Constant { c: 2.0 }, 1.0, &[0.0], 1.0).unwrap();
        assert!((b2.rate_term / b.rate_term - 2f64.powf(4.0 / 3.0)).abs() < 1e-8);
        let quiet = moment_upper_bound(&model(1, 0.0, 2), &mu, &g, 1.0, &[0.0], 1.0).unwrap();
        assert_eq!(quiet.rate_term, 0.0);
        // what is left is the product of heat-kernel sandwich upper bounds
        let s = heat_kernel_sandwich(1.0, 1.0, &[0.0], 1.0).unwrap();
        assert!((quiet.log_bound - (2.0 * (2.0 * s.upper).sqrt().ln())).abs() < 1e-12);
    }

    #[test]
    fn front_bounds_for_riesz() {
        let fb = front_bounds(
            &model(1, 1.0, 2),
            &TimeCovariance::Constant { c: 1.0 },
            &SpaceCovariance::Riesz { beta: 0.5 },
            0.5,
        )
        .unwrap();
        assert!(fb.riesz_upper.unwrap() > 5.219);
        assert!(fb.white_upper.is_none());
        assert!(fb.m_min.is_none());
        assert_eq!(fb.printed_symmetrization_factor, 4.0);
    }

    #[test]
    fn u0_levels() {
        let u = InitialCondition::indicator(1.0, 2.0);
        assert_eq!(u.eval(&[0.5]), 2.0);
        assert_eq!(u.eval(&[1.5]), 0.0);
        let bad = InitialCondition { level: 3.0, ..u };
        assert!(bad.validate().is_err());
        let bump = InitialCondition {
            shape: U0Shape::Bump,
            m: 1.0,
            r: 1.0,
            level: 0.5,
            sup_norm: 1.0,
        };
        assert!(bump.validate().is_ok());
        assert!((bump.eval(&[1.0]) - (-0.5f64).exp()).abs() < 1e-15);
    }
}
