//! Special functions behind the front constants: Euler Gamma, Bessel `J_nu`
//! and its first positive zero, Mittag-Leffler sums, and small-ball
//! probabilities of Brownian motion.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const FACTORIALS: [f64; 21] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Euler Gamma for `x > 0` (Lanczos, g = 7, n = 9; exact factorials for
/// small integers). Valid up to the overflow point near 171.6.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(gamma_pos(x))
}

fn gamma_pos(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 21.0 {
        return FACTORIALS[x as usize - 1];
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_pos(1.0 - x));
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    // split the power so that t^(y+1/2) does not overflow before e^{-t} is applied
    let half_pow = t.powf(0.5 * (y + 0.5));
    (2.0 * PI).sqrt() * half_pow * (half_pow * (-t).exp()) * lanczos_sum(y)
}

/// Natural log of Gamma for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 21.0 {
        return FACTORIALS[x as usize - 1].ln();
    }
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (y + 0.5) * t.ln() - t + lanczos_sum(y).ln()
}

/// `erf` backed by libm.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `J_nu(x) / (x/2)^nu` as a power series in `-x^2/4`. Same sign as `J_nu`
/// for `x > 0`, finite at the origin.
fn bessel_j_reduced(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0 / gamma_pos(nu + 1.0);
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 0.5 * x {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum
}

/// Bessel function of the first kind for real order `nu >= -1/2` and
/// moderate `x > 0` (series evaluation, accurate for `x` up to about 20).
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if nu < -0.5 {
        return Err(Error::domain(format!("bessel_j supports nu >= -1/2, got {nu}")));
    }
    if x < 0.0 {
        return Err(Error::domain("bessel_j requires x >= 0"));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok((0.5 * x).powf(nu) * bessel_j_reduced(nu, x))
}

/// Smallest positive zero `j_nu` of `J_nu`, for `nu >= -1/2`.
pub fn bessel_first_zero(nu: f64) -> Result<f64> {
    if !(nu >= -0.5) {
        return Err(Error::domain(format!(
            "bessel_first_zero supports nu >= -1/2, got {nu}"
        )));
    }
    // j_nu < nu + 1.9 nu^{1/3} + 1.6 for nu >= 0, comfortably inside this scan
    let step = 0.05;
    let limit = 2.0 * nu.max(0.0) + 20.0;
    let mut lo = step;
    let mut f_lo = bessel_j_reduced(nu, lo);
    let mut hi = lo + step;
    loop {
        let f_hi = bessel_j_reduced(nu, hi);
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if f_lo.signum() != f_hi.signum() {
            break;
        }
        lo = hi;
        f_lo = f_hi;
        hi += step;
        if hi > limit {
            return Err(Error::domain(format!("no sign change of J_{nu} below {limit}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = bessel_j_reduced(nu, mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Dimension-dependent geometric constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeConstants {
    pub d: usize,
    /// Volume of the unit ball.
    pub omega: f64,
    /// Surface area of the unit sphere `S^{d-1}`.
    pub sphere_area: f64,
    /// Bessel index `(d - 2) / 2`.
    pub nu: f64,
    /// First positive zero of `J_nu`.
    pub j_nu: f64,
}

impl VolumeConstants {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        let half = d as f64 / 2.0;
        let omega = PI.powf(half) / gamma_pos(half + 1.0);
        let nu = (d as f64 - 2.0) / 2.0;
        Ok(Self {
            d,
            omega,
            sphere_area: d as f64 * omega,
            nu,
            j_nu: bessel_first_zero(nu)?,
        })
    }
}

/// Unit-ball volume `pi^{d/2} / Gamma(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    PI.powf(half) / gamma_pos(half + 1.0)
}

/// Unit-sphere area `2 pi^{d/2} / Gamma(d/2)`.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// Where the Mittag-Leffler evaluation switches to the leading asymptotic,
/// measured on `z^{1/a}`.
pub const MITTAG_LEFFLER_SWITCH: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MlRegime {
    Series,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MittagLeffler {
    /// `E_a(z)`; `+inf` when the value exceeds the f64 range.
    pub value: f64,
    /// `ln E_a(z)`, always finite.
    pub log_value: f64,
    pub regime: MlRegime,
    pub overflow: bool,
}

fn check_ml_domain(a: f64, z: f64) -> Result<()> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::domain(format!("Mittag-Leffler index must lie in (0, 1], got {a}")));
    }
    if !(z >= 0.0) {
        return Err(Error::domain(format!("Mittag-Leffler argument must be >= 0, got {z}")));
    }
    Ok(())
}

/// `E_a(z) = sum_n z^n / Gamma(1 + a n)` for `a in (0, 1]`, `z >= 0`.
pub fn mittag_leffler(a: f64, z: f64) -> Result<MittagLeffler> {
    check_ml_domain(a, z)?;
    if z.powf(1.0 / a) > MITTAG_LEFFLER_SWITCH {
        mittag_leffler_asymptotic(a, z)
    } else {
        mittag_leffler_series(a, z)
    }
}

/// Partial summation with term-ratio stopping at `1e-14`.
pub fn mittag_leffler_series(a: f64, z: f64) -> Result<MittagLeffler> {
    check_ml_domain(a, z)?;
    if z == 0.0 {
        return Ok(MittagLeffler {
            value: 1.0,
            log_value: 0.0,
            regime: MlRegime::Series,
            overflow: false,
        });
    }
    let ln_z = z.ln();
    let mut sum = 1.0;
    let mut prev = 1.0;
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let term = (nf * ln_z - ln_gamma_pos(1.0 + a * nf)).exp();
        sum += term;
        if term < prev && term <= 1e-14 * sum {
            break;
        }
        if !sum.is_finite() {
            return Err(Error::domain("Mittag-Leffler series overflowed"));
        }
        prev = term;
        n += 1;
        if n > 100_000 {
            return Err(Error::domain("Mittag-Leffler series did not converge"));
        }
    }
    Ok(MittagLeffler {
        value: sum,
        log_value: sum.ln(),
        regime: MlRegime::Series,
        overflow: false,
    })
}

/// Leading asymptotic `(1/a) exp(z^{1/a})`.
pub fn mittag_leffler_asymptotic(a: f64, z: f64) -> Result<MittagLeffler> {
    check_ml_domain(a, z)?;
    let log_value = z.powf(1.0 / a) - a.ln();
    let value = log_value.exp();
    Ok(MittagLeffler {
        value,
        log_value,
        regime: MlRegime::Asymptotic,
        overflow: !value.is_finite(),
    })
}

/// `exp(-j_nu^2 / (2 eps^2))`, the small-ball rate of `P(sup_{[0,1]} |B| <= eps)`.
pub fn small_ball_asymptotic(nu: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::domain("small-ball radius must be positive"));
    }
    let j = bessel_first_zero(nu)?;
    Ok((-j * j / (2.0 * eps * eps)).exp())
}

/// Exact `P(sup_{0<=s<=1} |B_s| <= eps)` for one-dimensional Brownian motion.
///
/// Uses the eigenfunction series for small `eps` and the reflection
/// (image) series in normal CDFs for larger `eps`; both converge fast in
/// their own range.
pub fn small_ball_exact_1d(eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::domain("small-ball radius must be positive"));
    }
    if eps < 1.0 {
        let mut sum = 0.0;
        for k in 0..200 {
            let m = (2 * k + 1) as f64;
            let term = (-m * m * PI * PI / (8.0 * eps * eps)).exp() / m;
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            if term < 1e-18 {
                break;
            }
        }
        Ok(4.0 / PI * sum)
    } else {
        let mut sum = 0.0;
        for k in -50i32..=50 {
            let kf = k as f64;
            let piece = normal_cdf((2.0 * kf + 1.0) * eps) - normal_cdf((2.0 * kf - 1.0) * eps);
            if k.rem_euclid(2) == 0 {
                sum += piece;
            } else {
                sum -= piece;
            }
        }
        Ok(sum)
    }
}
