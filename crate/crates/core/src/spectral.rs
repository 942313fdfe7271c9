//! Spectral truncation quantities `C_N`, `D_N`, the threshold frequency
//! `N_t`, and the front scale functions `theta_t`, `eta_t`, `vartheta_t`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{big_gamma, interpolate, tabulated_radial_integral, SpectralMeasure, TimeCovariance};
use crate::special_fn::unit_sphere_area;

/// Upper end of the geometric bracket search for `N_t`.
pub const THRESHOLD_SEARCH_CAP: f64 = 1e12;
/// Relative tolerance of the `N_t` bisection.
pub const THRESHOLD_REL_TOL: f64 = 1e-10;

/// High-frequency tail `C_N = int_{|xi| > N} mu(d xi) / |xi|^2` (may be `+inf`).
pub fn c_n(mu: &SpectralMeasure, n: f64) -> f64 {
    debug_assert!(n >= 0.0);
    match mu {
        SpectralMeasure::RieszDensity { d, beta, constant } => {
            if *beta >= 2.0 || n == 0.0 {
                f64::INFINITY
            } else {
                constant * unit_sphere_area(*d) * n.powf(beta - 2.0) / (2.0 - beta)
            }
        }
        SpectralMeasure::Atomic { atoms, .. } => atoms
            .iter()
            .filter_map(|a| {
                let r = a.radius();
                (r > n).then(|| a.mass / (r * r))
            })
            .sum(),
        SpectralMeasure::Lebesgue1D => {
            if n == 0.0 {
                f64::INFINITY
            } else {
                2.0 / n
            }
        }
        SpectralMeasure::TabulatedRadial { d, radii, density } => {
            let hi = *radii.last().expect("non-empty table");
            if n >= hi {
                return 0.0;
            }
            if n == 0.0 && *d <= 2 && (density[0] > 0.0 || density[1] > 0.0) {
                return f64::INFINITY;
            }
            let k = *d as i32 - 3;
            unit_sphere_area(*d)
                * tabulated_radial_integral(radii, n, hi, |r| interpolate(radii, density, r) * r.powi(k))
        }
    }
}

/// Low-frequency mass `D_N = mu{|xi| <= N}` (closed ball).
pub fn d_n(mu: &SpectralMeasure, n: f64) -> f64 {
    debug_assert!(n >= 0.0);
    match mu {
        SpectralMeasure::RieszDensity { d, beta, constant } => {
            constant * unit_sphere_area(*d) * n.powf(*beta) / beta
        }
        SpectralMeasure::Atomic { atoms, .. } => atoms
            .iter()
            .filter(|a| a.radius() <= n)
            .map(|a| a.mass)
            .sum(),
        SpectralMeasure::Lebesgue1D => 2.0 * n,
        SpectralMeasure::TabulatedRadial { d, radii, density } => {
            let k = *d as i32 - 1;
            let hi = n.min(*radii.last().expect("non-empty table"));
            unit_sphere_area(*d)
                * tabulated_radial_integral(radii, 0.0, hi, |r| interpolate(radii, density, r) * r.powi(k))
        }
    }
}

/// `tau = (2 pi)^d / (32 (p - 1) lambda^2 Gamma_t)`, the level `C_N` must reach.
pub fn threshold_level(d: usize, p: u32, coupling: f64, big_gamma_t: f64) -> f64 {
    (2.0 * PI).powi(d as i32) / (32.0 * (p as f64 - 1.0) * coupling * coupling * big_gamma_t)
}

/// `N_t = inf { N >= 0 : C_N <= tau }` by geometric bracketing and bisection.
pub fn n_threshold(mu: &SpectralMeasure, p: u32, coupling: f64, big_gamma_t: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::domain(format!("moment order p must be >= 2, got {p}")));
    }
    if !(coupling >= 0.0) || !(big_gamma_t >= 0.0) {
        return Err(Error::domain("coupling and Gamma_t must be non-negative"));
    }
    if coupling == 0.0 || big_gamma_t == 0.0 {
        return Ok(0.0);
    }
    let tau = threshold_level(mu.dim(), p, coupling, big_gamma_t);
    if c_n(mu, 0.0) <= tau {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while c_n(mu, hi) > tau {
        lo = hi;
        hi *= 2.0;
        if hi > THRESHOLD_SEARCH_CAP {
            return Err(Error::NoFiniteThreshold {
                tau,
                cap: THRESHOLD_SEARCH_CAP,
            });
        }
    }
    while hi - lo > THRESHOLD_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if c_n(mu, mid) <= tau {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `(N_t, C_{N_t}, D_{N_t}, theta_t)` for the given coupling and `Gamma_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaScale {
    pub n_cut: f64,
    pub c: f64,
    pub d: f64,
    pub theta: f64,
}

impl ThetaScale {
    /// `D / C` with the convention `D / inf = 0`.
    pub fn rate(&self) -> f64 {
        self.theta * self.theta
    }
}

/// `theta_t = sqrt(D_{N_t} / C_{N_t})`. When `C_{N_t} = +inf` (only possible at
/// `N_t = 0`), `theta_t = 0`; when `C_{N_t} = 0` the scale is degenerate.
pub fn theta_scale(mu: &SpectralMeasure, p: u32, coupling: f64, big_gamma_t: f64) -> Result<ThetaScale> {
    let n_cut = n_threshold(mu, p, coupling, big_gamma_t)?;
    let c = c_n(mu, n_cut);
    let d = d_n(mu, n_cut);
    let theta = if c == f64::INFINITY {
        0.0
    } else if c == 0.0 {
        return Err(Error::ScaleUndefined(format!(
            "C_N vanishes at N_t = {n_cut} (mu has no mass beyond N_t), so theta_t is infinite"
        )));
    } else {
        (d / c).sqrt()
    };
    Ok(ThetaScale { n_cut, c, d, theta })
}

/// `vartheta_t = Gamma_t^{1/(2 - beta)}`.
pub fn vartheta(big_gamma_t: f64, beta: f64) -> Result<f64> {
    if !(0.0..2.0).contains(&beta) {
        return Err(Error::domain(format!("scale exponent needs 0 <= beta < 2, got {beta}")));
    }
    Ok(big_gamma_t.powf(1.0 / (2.0 - beta)))
}

/// `eta_t = Gamma_{t delta^2}^{1/(2 - beta)}`.
pub fn eta(gamma: &TimeCovariance, t: f64, delta: f64, beta: f64) -> Result<f64> {
    check_delta(delta)?;
    vartheta(big_gamma(gamma, t * delta * delta)?, beta)
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralQuantities {
    pub n_cut: f64,
    pub c_n: f64,
    pub d_n: f64,
    pub big_gamma_t: f64,
    pub theta: f64,
    pub eta: Option<f64>,
    pub vartheta: Option<f64>,
    pub delta: f64,
}

/// Every scale value defined for the inputs. `beta = None` leaves `eta` and
/// `vartheta` unset.
#[allow(clippy::too_many_arguments)]
pub fn scale_functions(
    mu: &SpectralMeasure,
    gamma: &TimeCovariance,
    beta: Option<f64>,
    p: u32,
    coupling: f64,
    t: f64,
    delta: f64,
) -> Result<SpectralQuantities> {
    check_delta(delta)?;
    let big_gamma_t = big_gamma(gamma, t)?;
    let th = theta_scale(mu, p, coupling, big_gamma_t)?;
    let (eta_v, vartheta_v) = match beta {
        Some(b) => (Some(eta(gamma, t, delta, b)?), Some(vartheta(big_gamma_t, b)?)),
        None => (None, None),
    };
    Ok(SpectralQuantities {
        n_cut: th.n_cut,
        c_n: th.c,
        d_n: th.d,
        big_gamma_t,
        theta: th.theta,
        eta: eta_v,
        vartheta: vartheta_v,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{spectral_measure, SpaceCovariance};

    fn riesz_half() -> SpectralMeasure {
        SpectralMeasure::riesz(1, 0.5).unwrap()
    }

    #[test]
    fn riesz_c_and_d() {
        let mu = riesz_half();
        let root = (2.0 * PI).sqrt();
        assert!((c_n(&mu, 1.0) - 4.0 / 3.0 * root).abs() < 1e-12);
        assert!((d_n(&mu, 1.0) - 4.0 * root).abs() < 1e-12);
        assert_eq!(c_n(&mu, 0.0), f64::INFINITY);
        assert_eq!(d_n(&mu, 0.0), 0.0);
        assert!(c_n(&mu, 1e300) < 1e-100);
    }

    #[test]
    fn atomic_c_and_d() {
        let mu = SpectralMeasure::single_atom(1, 2.0, 8.0);
        assert_eq!(c_n(&mu, 1.0), 2.0);
        assert_eq!(d_n(&mu, 1.0), 0.0);
        assert_eq!(d_n(&mu, 2.0), 8.0);
        assert_eq!(c_n(&mu, 2.0), 0.0);
    }

    #[test]
    fn threshold_examples() {
        let mu = riesz_half();
        let n1 = n_threshold(&mu, 2, 1.0, 1.0).unwrap();
        assert!((n1 / 6.617_071_902_926_933 - 1.0).abs() < 1e-9);
        let n8 = n_threshold(&mu, 2, 1.0, 8.0).unwrap();
        assert!((n8 / 26.468_287_611_707_734 - 1.0).abs() < 1e-9);
        assert_eq!(n_threshold(&mu, 2, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(n_threshold(&mu, 2, 1.0, 0.0).unwrap(), 0.0);
        assert!(n_threshold(&mu, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn threshold_for_atoms_lands_on_atom_radius() {
        // C_N = 8/4 = 2 for N < 2, and 0 after; tau = 2 pi / (32 * 1 * 1 * 1) < 2
        let mu = SpectralMeasure::single_atom(1, 2.0, 8.0);
        let n = n_threshold(&mu, 2, 1.0, 1.0).unwrap();
        assert!((n - 2.0).abs() < 1e-9);
    }

    #[test]
    fn theta_identity_for_riesz() {
        let mu = riesz_half();
        let th = theta_scale(&mu, 2, 1.0, 1.0).unwrap();
        assert!((th.theta / (th.n_cut * 3f64.sqrt()) - 1.0).abs() < 1e-12);
        assert!((th.theta - 11.461_104_733_205_923).abs() < 1e-6);
    }

    #[test]
    fn zero_coupling_gives_zero_theta() {
        let th = theta_scale(&riesz_half(), 2, 0.0, 1.0).unwrap();
        assert_eq!(th.n_cut, 0.0);
        assert_eq!(th.theta, 0.0);
    }

    #[test]
    fn constant_level_is_degenerate() {
        let mu = spectral_measure(&SpaceCovariance::ConstantLevel { level: 1.0 }, 1).unwrap();
        assert!(matches!(theta_scale(&mu, 2, 1.0, 1.0), Err(Error::ScaleUndefined(_))));
    }

    #[test]
    fn scale_function_examples() {
        let g8 = TimeCovariance::Constant { c: 1.0 };
        let q = scale_functions(&riesz_half(), &g8, Some(0.5), 2, 1.0, 8.0, 0.5).unwrap();
        assert!((q.vartheta.unwrap() - 4.0).abs() < 1e-12);
        let pl = TimeCovariance::PowerLaw { alpha: 0.5 };
        let e = eta(&pl, 4.0, 0.5, 0.5).unwrap();
        assert!((e - 2f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!(eta(&pl, 4.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn lebesgue_threshold_closed_form() {
        // C_N = 2/N <= tau  =>  N_t = 2 / tau
        let tau = threshold_level(1, 3, 0.7, 2.0);
        let n = n_threshold(&SpectralMeasure::Lebesgue1D, 3, 0.7, 2.0).unwrap();
        assert!((n / (2.0 / tau) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tabulated_matches_gaussian_closed_form() {
        // mollified white, d = 1, eps = 1: D_1 = int_{-1}^{1} e^{-x^2/2} = sqrt(2 pi) erf(1/sqrt 2)
        let mu = spectral_measure(&SpaceCovariance::MollifiedWhite { eps: 1.0 }, 1).unwrap();
        let exact = (2.0 * PI).sqrt() * libm::erf(std::f64::consts::FRAC_1_SQRT_2);
        assert!((d_n(&mu, 1.0) - exact).abs() < 1e-6);
        assert!(c_n(&mu, 0.0).is_infinite());
        assert!(c_n(&mu, 0.5) > c_n(&mu, 1.0));
    }
}
