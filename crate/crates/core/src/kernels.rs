//! Covariance kernel families: `gamma` in time, `Lambda` in space, and the
//! spectral measure `mu = F Lambda`.
//!
//! Distributional members (Dirac in time, white noise in space) have no
//! pointwise value. Asking for one is a typed error; consumers branch to the
//! `Gamma_t = 1/2` rule or to the heat-kernel mollification instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{gamma_fn, unit_sphere_area};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TimeCovariance {
    /// `|s|^{-alpha}`, `0 < alpha < 1`.
    PowerLaw { alpha: f64 },
    /// `c > 0` everywhere.
    Constant { c: f64 },
    /// White in time.
    Dirac,
}

impl TimeCovariance {
    pub fn power_law(alpha: f64) -> Result<Self> {
        let g = TimeCovariance::PowerLaw { alpha };
        g.validate()?;
        Ok(g)
    }

    pub fn constant(c: f64) -> Result<Self> {
        let g = TimeCovariance::Constant { c };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TimeCovariance::PowerLaw { alpha } if !(alpha > 0.0 && alpha < 1.0) => Err(
                Error::config("gamma.alpha", format!("must lie in (0, 1), got {alpha}")),
            ),
            TimeCovariance::Constant { c } if !(c > 0.0 && c.is_finite()) => Err(Error::config(
                "gamma.c",
                format!("must be positive and finite, got {c}"),
            )),
            _ => Ok(()),
        }
    }

    /// Singularity exponent at the diagonal (0 for bounded families).
    pub fn singular_exponent(&self) -> f64 {
        match *self {
            TimeCovariance::PowerLaw { alpha } => alpha,
            _ => 0.0,
        }
    }

    /// `lim_{t -> inf} Gamma_t`.
    pub fn gamma_infinity(&self) -> f64 {
        match self {
            TimeCovariance::Dirac => 0.5,
            _ => f64::INFINITY,
        }
    }
}

/// Pointwise value `gamma(|s|)`; `+inf` at the power-law singularity.
pub fn gamma_eval(gamma: &TimeCovariance, s: f64) -> Result<f64> {
    match *gamma {
        TimeCovariance::PowerLaw { alpha } => {
            let a = s.abs();
            Ok(if a == 0.0 { f64::INFINITY } else { a.powf(-alpha) })
        }
        TimeCovariance::Constant { c } => Ok(c),
        TimeCovariance::Dirac => Err(Error::DiracPointwiseEval),
    }
}

/// `Gamma_t = int_0^t gamma(s) ds`, with the convention `Gamma_t = 1/2` for
/// Dirac time covariance.
pub fn big_gamma(gamma: &TimeCovariance, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("Gamma_t needs t >= 0, got {t}")));
    }
    Ok(match *gamma {
        TimeCovariance::PowerLaw { alpha } => t.powf(1.0 - alpha) / (1.0 - alpha),
        TimeCovariance::Constant { c } => c * t,
        TimeCovariance::Dirac => {
            if t > 0.0 {
                0.5
            } else {
                0.0
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    /// `C_Lambda`.
    pub c: f64,
    /// Radius `R` below which `Lambda(x) >= C_Lambda |x|^{-beta}`.
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SpaceCovariance {
    /// `|x|^{-beta}`, `0 < beta < min(2, d)`.
    Riesz { beta: f64 },
    /// `prod_i |x_i|^{2 H_i - 2}` with `H_i in (1/2, 1)`.
    Fractional { hurst: Vec<f64> },
    /// Constant level `Lambda_0 > 0`.
    ConstantLevel { level: f64 },
    /// Heat kernel `p_eps` standing in for white noise.
    MollifiedWhite { eps: f64 },
    /// White in space, `d = 1` only.
    #[serde(rename = "white1d")]
    White1D,
    /// A kernel known through `Lambda(x) >= C |x|^{-beta}` on `|x| <= R`.
    /// Pointwise it evaluates to the envelope itself (zero outside `B_R`),
    /// the smallest kernel compatible with the bound.
    LowerRieszEnvelope { beta: f64, envelope: Envelope },
}

impl SpaceCovariance {
    pub fn validate(&self, d: usize) -> Result<()> {
        let dmax = (d as f64).min(2.0);
        match self {
            SpaceCovariance::Riesz { beta } => {
                if !(*beta > 0.0 && *beta < dmax) {
                    return Err(Error::config(
                        "lambda.beta",
                        format!("Riesz needs 0 < beta < min(2, d) = {dmax}, got {beta}"),
                    ));
                }
            }
            SpaceCovariance::Fractional { hurst } => {
                if hurst.len() != d {
                    return Err(Error::config(
                        "lambda.hurst",
                        format!("needs one Hurst index per dimension ({d}), got {}", hurst.len()),
                    ));
                }
                if let Some(h) = hurst.iter().find(|h| !(**h > 0.5 && **h < 1.0)) {
                    return Err(Error::config(
                        "lambda.hurst",
                        format!("every index must lie in (1/2, 1), got {h}"),
                    ));
                }
                let beta = self.beta(d).unwrap_or(f64::NAN);
                if !(beta > 0.0 && beta < 2.0) {
                    return Err(Error::config(
                        "lambda.hurst",
                        format!("beta = 2d - 2 sum H must lie in (0, 2), got {beta}"),
                    ));
                }
            }
            SpaceCovariance::ConstantLevel { level } => {
                if !(*level > 0.0 && level.is_finite()) {
                    return Err(Error::config("lambda.level", "must be positive and finite"));
                }
            }
            SpaceCovariance::MollifiedWhite { eps } => {
                if !(*eps > 0.0 && eps.is_finite()) {
                    return Err(Error::config("lambda.eps", "must be positive and finite"));
                }
            }
            SpaceCovariance::White1D => {
                if d != 1 {
                    return Err(Error::config(
                        "lambda.family",
                        format!("white1d requires d = 1, got d = {d}"),
                    ));
                }
            }
            SpaceCovariance::LowerRieszEnvelope { beta, envelope } => {
                if !(*beta >= 0.0 && *beta < dmax) {
                    return Err(Error::config(
                        "lambda.beta",
                        format!("envelope needs 0 <= beta < min(2, d) = {dmax}, got {beta}"),
                    ));
                }
                if !(envelope.c > 0.0 && envelope.c.is_finite()) {
                    return Err(Error::config("lambda.envelope.c", "must be positive and finite"));
                }
                if !(envelope.r > 0.0) {
                    return Err(Error::config("lambda.envelope.r", "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Scaling exponent `beta` used by the front scale functions. White noise
    /// in `d = 1` (and its mollification) scales like `beta = 1`; a constant
    /// level like `beta = 0`.
    pub fn beta(&self, d: usize) -> Option<f64> {
        match self {
            SpaceCovariance::Riesz { beta } => Some(*beta),
            SpaceCovariance::LowerRieszEnvelope { beta, .. } => Some(*beta),
            SpaceCovariance::Fractional { hurst } => {
                Some(2.0 * d as f64 - 2.0 * hurst.iter().sum::<f64>())
            }
            SpaceCovariance::ConstantLevel { .. } => Some(0.0),
            SpaceCovariance::MollifiedWhite { .. } | SpaceCovariance::White1D => {
                (d == 1).then_some(1.0)
            }
        }
    }

    /// `(C_Lambda, R, beta)` of a Riesz-type lower envelope, when one exists.
    pub fn riesz_envelope(&self, d: usize) -> Option<(Envelope, f64)> {
        match self {
            SpaceCovariance::Riesz { beta } => Some((
                Envelope {
                    c: 1.0,
                    r: f64::INFINITY,
                },
                *beta,
            )),
            SpaceCovariance::LowerRieszEnvelope { beta, envelope } => Some((*envelope, *beta)),
            SpaceCovariance::ConstantLevel { level } => Some((
                Envelope {
                    c: *level,
                    r: f64::INFINITY,
                },
                0.0,
            )),
            SpaceCovariance::Fractional { .. } => None,
            SpaceCovariance::MollifiedWhite { .. } | SpaceCovariance::White1D => {
                let _ = d;
                None
            }
        }
    }

    pub fn is_white(&self) -> bool {
        matches!(self, SpaceCovariance::White1D | SpaceCovariance::MollifiedWhite { .. })
    }

    /// Value at radius `r` for the families with a singularity at the
    /// origin: `C r^{-beta}`. Used as the clip ceiling in pair quadrature.
    pub fn singular_ceiling(&self, d: usize, r: f64) -> Option<f64> {
        match self {
            SpaceCovariance::Riesz { beta } => Some(r.powf(-beta)),
            SpaceCovariance::Fractional { .. } => self.beta(d).map(|b| r.powf(-b)),
            SpaceCovariance::LowerRieszEnvelope { beta, envelope } if *beta > 0.0 => {
                Some(envelope.c * r.powf(-beta))
            }
            _ => None,
        }
    }
}

/// Heat kernel `p_t(x) = (2 pi t)^{-d/2} exp(-|x|^2 / 2t)`.
pub fn heat_kernel(t: f64, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    heat_kernel_r2(t, x.len(), r2)
}

pub(crate) fn heat_kernel_r2(t: f64, d: usize, r2: f64) -> f64 {
    (2.0 * PI * t).powf(-(d as f64) / 2.0) * (-r2 / (2.0 * t)).exp()
}

/// Pointwise `Lambda(x)`; `+inf` at the Riesz singularity.
pub fn lambda_eval(lambda: &SpaceCovariance, x: &[f64]) -> Result<f64> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    match lambda {
        SpaceCovariance::Riesz { beta } => Ok(if r2 == 0.0 {
            f64::INFINITY
        } else {
            r2.powf(-0.5 * beta)
        }),
        SpaceCovariance::Fractional { hurst } => Ok(x
            .iter()
            .zip(hurst)
            .map(|(xi, h)| {
                let a = xi.abs();
                if a == 0.0 {
                    f64::INFINITY
                } else {
                    a.powf(2.0 * h - 2.0)
                }
            })
            .product()),
        SpaceCovariance::ConstantLevel { level } => Ok(*level),
        SpaceCovariance::MollifiedWhite { eps } => Ok(heat_kernel_r2(*eps, x.len(), r2)),
        SpaceCovariance::White1D => Err(Error::WhitePointwiseEval),
        SpaceCovariance::LowerRieszEnvelope { beta, envelope } => {
            let r = r2.sqrt();
            Ok(if r > envelope.r {
                0.0
            } else if r == 0.0 && *beta > 0.0 {
                f64::INFINITY
            } else {
                envelope.c * r.powf(-beta)
            })
        }
    }
}

/// `Lambda_beta = pi^{d/2} 2^{d-beta} Gamma((d-beta)/2) / Gamma(beta/2)`, the
/// constant in `F |x|^{-beta} = Lambda_beta |xi|^{beta-d}`.
pub fn riesz_fourier_constant(d: usize, beta: f64) -> Result<f64> {
    let df = d as f64;
    if !(beta > 0.0 && beta < df) {
        return Err(Error::domain(format!("Riesz Fourier constant needs 0 < beta < d = {d}, got {beta}")));
    }
    Ok(PI.powf(df / 2.0) * 2f64.powf(df - beta) * gamma_fn((df - beta) / 2.0)? / gamma_fn(beta / 2.0)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: Vec<f64>,
    pub mass: f64,
}

impl Atom {
    pub fn radius(&self) -> f64 {
        self.location.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Spectral measure on `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralMeasure {
    /// `Lambda_beta |xi|^{beta - d} d xi`.
    RieszDensity { d: usize, beta: f64, constant: f64 },
    /// Finite sum of point masses.
    Atomic { d: usize, atoms: Vec<Atom> },
    /// Lebesgue measure on the line (white noise in space).
    Lebesgue1D,
    /// Radial density `rho(|xi|) d xi`, linearly interpolated between
    /// `radii` and zero beyond the last radius.
    TabulatedRadial {
        d: usize,
        radii: Vec<f64>,
        density: Vec<f64>,
    },
}

impl SpectralMeasure {
    pub fn riesz(d: usize, beta: f64) -> Result<Self> {
        Ok(SpectralMeasure::RieszDensity {
            d,
            beta,
            constant: riesz_fourier_constant(d, beta)?,
        })
    }

    /// Single atom at `|xi| = radius` along the first axis.
    pub fn single_atom(d: usize, radius: f64, mass: f64) -> Self {
        let mut location = vec![0.0; d];
        location[0] = radius;
        SpectralMeasure::Atomic {
            d,
            atoms: vec![Atom { location, mass }],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SpectralMeasure::RieszDensity { d, .. }
            | SpectralMeasure::Atomic { d, .. }
            | SpectralMeasure::TabulatedRadial { d, .. } => *d,
            SpectralMeasure::Lebesgue1D => 1,
        }
    }

    /// Non-negativity, finiteness and shape checks. Atomic and tabulated
    /// measures have finite total mass, hence are tempered once these hold.
    pub fn validate(&self) -> Result<()> {
        match self {
            SpectralMeasure::RieszDensity { d, beta, constant } => {
                if !(*beta > 0.0 && *beta < *d as f64) || !(*constant > 0.0) {
                    return Err(Error::domain("Riesz density needs 0 < beta < d and a positive constant"));
                }
            }
            SpectralMeasure::Atomic { d, atoms } => {
                for a in atoms {
                    if a.location.len() != *d {
                        return Err(Error::domain("atom location has the wrong dimension"));
                    }
                    if !(a.mass >= 0.0 && a.mass.is_finite()) {
                        return Err(Error::domain("atom masses must be finite and non-negative"));
                    }
                    if a.location.iter().any(|v| !v.is_finite()) {
                        return Err(Error::domain("atom locations must be finite"));
                    }
                }
            }
            SpectralMeasure::Lebesgue1D => {}
            SpectralMeasure::TabulatedRadial { radii, density, .. } => {
                if radii.len() != density.len() || radii.len() < 2 {
                    return Err(Error::domain("tabulated measure needs matching radii/density of length >= 2"));
                }
                if radii[0] != 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::domain("tabulated radii must start at 0 and increase strictly"));
                }
                if density.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::domain("tabulated density must be finite and non-negative"));
                }
            }
        }
        Ok(())
    }
}

/// Spectral measure of a space covariance in dimension `d`.
pub fn spectral_measure(lambda: &SpaceCovariance, d: usize) -> Result<SpectralMeasure> {
    match lambda {
        SpaceCovariance::Riesz { beta } => SpectralMeasure::riesz(d, *beta),
        SpaceCovariance::ConstantLevel { level } => Ok(SpectralMeasure::Atomic {
            d,
            atoms: vec![Atom {
                location: vec![0.0; d],
                mass: (2.0 * PI).powi(d as i32) * level,
            }],
        }),
        SpaceCovariance::White1D => Ok(SpectralMeasure::Lebesgue1D),
        SpaceCovariance::MollifiedWhite { eps } => {
            // F p_eps (xi) = exp(-eps |xi|^2 / 2), tabulated out to where it is below 1e-30
            let r_max = (2.0 * 69.1 / eps).sqrt();
            let n = 4096;
            let radii: Vec<f64> = (0..=n).map(|k| r_max * k as f64 / n as f64).collect();
            let density = radii.iter().map(|r| (-eps * r * r / 2.0).exp()).collect();
            Ok(SpectralMeasure::TabulatedRadial { d, radii, density })
        }
        SpaceCovariance::Fractional { .. } => Err(Error::NotApplicable(
            "the fractional kernel's spectral density is anisotropic and only used through beta".into(),
        )),
        SpaceCovariance::LowerRieszEnvelope { .. } => Err(Error::NotApplicable(
            "an envelope-only kernel has no determined spectral measure".into(),
        )),
    }
}

/// Outcome of the integrability check `int mu(d xi) / (1 + |xi|^2)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Dalang {
    Finite(f64),
    Divergent { reason: String },
}

impl Dalang {
    pub fn value(&self) -> f64 {
        match self {
            Dalang::Finite(v) => *v,
            Dalang::Divergent { .. } => f64::INFINITY,
        }
    }

    pub fn is_admissible(&self) -> bool {
        matches!(self, Dalang::Finite(_))
    }
}

const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_08,
];

fn gl5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GL5_X.iter().zip(GL5_W).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// `int_{lo}^{hi} f` across a piecewise-smooth radial table, splitting
/// geometrically where `hi / lo` is large so `r^{-k}` weights stay resolved.
pub(crate) fn tabulated_radial_integral<F: Fn(f64) -> f64>(
    radii: &[f64],
    lo: f64,
    hi: f64,
    f: F,
) -> f64 {
    let mut total = 0.0;
    for w in radii.windows(2) {
        let a = w[0].max(lo);
        let b = w[1].min(hi);
        if b <= a {
            continue;
        }
        if a > 0.0 && b / a > 2.0 {
            let mut x = a;
            while x < b {
                let y = (2.0 * x).min(b);
                total += gl5(&f, x, y);
                x = y;
            }
        } else {
            total += gl5(&f, a, b);
        }
    }
    total
}

pub(crate) fn interpolate(radii: &[f64], density: &[f64], r: f64) -> f64 {
    let last = radii.len() - 1;
    if r >= radii[last] {
        return if r == radii[last] { density[last] } else { 0.0 };
    }
    let k = radii.partition_point(|x| *x <= r).saturating_sub(1);
    let (r0, r1) = (radii[k], radii[k + 1]);
    let w = (r - r0) / (r1 - r0);
    density[k] * (1.0 - w) + density[k + 1] * w
}

/// `int mu(d xi) / (1 + |xi|^2)`; finite exactly when the measure is admissible.
pub fn dalang_check(mu: &SpectralMeasure) -> Result<Dalang> {
    mu.validate()?;
    Ok(match mu {
        SpectralMeasure::RieszDensity { d, beta, constant } => {
            if *beta >= 2.0 {
                Dalang::Divergent {
                    reason: format!(
                        "|xi|^(beta - d) / (1 + |xi|^2) is not integrable at infinity for beta = {beta} >= 2"
                    ),
                }
            } else {
                // int_0^inf r^{beta-1} / (1 + r^2) dr = (pi/2) / sin(pi beta / 2)
                Dalang::Finite(
                    constant * unit_sphere_area(*d) * (PI / 2.0) / (PI * beta / 2.0).sin(),
                )
            }
        }
        SpectralMeasure::Atomic { atoms, .. } => Dalang::Finite(
            atoms
                .iter()
                .map(|a| a.mass / (1.0 + a.radius().powi(2)))
                .sum(),
        ),
        SpectralMeasure::Lebesgue1D => Dalang::Finite(PI),
        SpectralMeasure::TabulatedRadial { d, radii, density } => {
            let area = unit_sphere_area(*d);
            let dm1 = *d as i32 - 1;
            let hi = *radii.last().expect("validated");
            Dalang::Finite(
                area * tabulated_radial_integral(radii, 0.0, hi, |r| {
                    interpolate(radii, density, r) * r.powi(dm1) / (1.0 + r * r)
                }),
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_eval_examples() {
        let g = TimeCovariance::power_law(0.5).unwrap();
        assert_eq!(gamma_eval(&g, 4.0).unwrap(), 0.5);
        assert_eq!(gamma_eval(&g, -4.0).unwrap(), 0.5);
        assert_eq!(gamma_eval(&g, 0.0).unwrap(), f64::INFINITY);
        let c = TimeCovariance::constant(1.0).unwrap();
        assert_eq!(gamma_eval(&c, -7.0).unwrap(), 1.0);
        assert_eq!(
            gamma_eval(&TimeCovariance::Dirac, 1.0),
            Err(Error::DiracPointwiseEval)
        );
    }

    #[test]
    fn time_family_validation() {
        assert!(TimeCovariance::power_law(0.0).is_err());
        assert!(TimeCovariance::power_law(1.0).is_err());
        assert!(TimeCovariance::constant(0.0).is_err());
        assert!(TimeCovariance::constant(-1.0).is_err());
    }

    #[test]
    fn big_gamma_examples() {
        let g = TimeCovariance::power_law(0.5).unwrap();
        assert!((big_gamma(&g, 4.0).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(big_gamma(&TimeCovariance::Dirac, 3.0).unwrap(), 0.5);
        assert_eq!(big_gamma(&TimeCovariance::Constant { c: 1.0 }, 3.0).unwrap(), 3.0);
        assert!(big_gamma(&g, -1.0).is_err());
    }

    #[test]
    fn lambda_eval_examples() {
        let r = SpaceCovariance::Riesz { beta: 0.5 };
        assert_eq!(lambda_eval(&r, &[4.0]).unwrap(), 0.5);
        assert_eq!(lambda_eval(&r, &[0.0]).unwrap(), f64::INFINITY);
        let c = SpaceCovariance::ConstantLevel { level: 2.0 };
        assert_eq!(lambda_eval(&c, &[3.0, -1.0]).unwrap(), 2.0);
        let m = SpaceCovariance::MollifiedWhite { eps: 1.0 };
        assert!((lambda_eval(&m, &[0.0]).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(
            lambda_eval(&SpaceCovariance::White1D, &[0.0]),
            Err(Error::WhitePointwiseEval)
        );
        let f = SpaceCovariance::Fractional { hurst: vec![0.75, 0.75] };
        assert!((lambda_eval(&f, &[4.0, 4.0]).unwrap() - 0.25).abs() < 1e-15);
        let e = SpaceCovariance::LowerRieszEnvelope {
            beta: 1.0,
            envelope: Envelope { c: 2.0, r: 1.0 },
        };
        assert_eq!(lambda_eval(&e, &[0.5, 0.0]).unwrap(), 4.0);
        assert_eq!(lambda_eval(&e, &[2.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn space_family_validation() {
        assert!(SpaceCovariance::Riesz { beta: 1.0 }.validate(1).is_err());
        assert!(SpaceCovariance::Riesz { beta: 0.9 }.validate(1).is_ok());
        assert!(SpaceCovariance::Riesz { beta: 2.0 }.validate(3).is_err());
        assert!(SpaceCovariance::White1D.validate(2).is_err());
        assert!(SpaceCovariance::Fractional { hurst: vec![0.7] }.validate(2).is_err());
        assert!(SpaceCovariance::Fractional { hurst: vec![0.4, 0.9] }.validate(2).is_err());
        // 2*2 - 2*(0.55+0.55) = 1.8
        assert!(SpaceCovariance::Fractional { hurst: vec![0.55, 0.55] }.validate(2).is_ok());
        assert_eq!(
            SpaceCovariance::Fractional { hurst: vec![0.55, 0.55] }.beta(2).map(|b| (b * 1e12).round() / 1e12),
            Some(1.8)
        );
    }

    #[test]
    fn riesz_constant_examples() {
        assert!((riesz_fourier_constant(1, 0.5).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-13);
        assert!((riesz_fourier_constant(2, 1.0).unwrap() - 2.0 * PI).abs() < 1e-13);
        let big = riesz_fourier_constant(3, 2.0 - 1e-9).unwrap();
        assert!(big.is_finite() && big > 0.0);
        assert!(riesz_fourier_constant(1, 1.0).is_err());
        assert!(riesz_fourier_constant(2, 0.0).is_err());
    }

    #[test]
    fn dalang_examples() {
        let mu = SpectralMeasure::riesz(1, 0.5).unwrap();
        let v = dalang_check(&mu).unwrap().value();
        assert!((v - 11.136_655_993_663_416).abs() < 1e-11);
        let atom = spectral_measure(&SpaceCovariance::ConstantLevel { level: 1.5 }, 2).unwrap();
        let v = dalang_check(&atom).unwrap().value();
        assert!((v - (2.0 * PI).powi(2) * 1.5).abs() < 1e-12);
        assert_eq!(dalang_check(&SpectralMeasure::Lebesgue1D).unwrap(), Dalang::Finite(PI));
    }

    #[test]
    fn dalang_riesz_threshold_at_two() {
        for beta in [1.5, 1.9, 1.999] {
            assert!(dalang_check(&SpectralMeasure::riesz(3, beta).unwrap()).unwrap().is_admissible());
        }
        for beta in [2.0, 2.001, 2.5] {
            let r = dalang_check(&SpectralMeasure::riesz(3, beta).unwrap()).unwrap();
            assert!(!r.is_admissible());
            assert_eq!(r.value(), f64::INFINITY);
        }
    }

    #[test]
    fn mollified_white_measure_integrates() {
        // int_R exp(-eps xi^2 / 2) / (1 + xi^2) d xi for eps = 1: pi e^{1/2} erfc(1/sqrt 2)
        let mu = spectral_measure(&SpaceCovariance::MollifiedWhite { eps: 1.0 }, 1).unwrap();
        let v = dalang_check(&mu).unwrap().value();
        let expected = PI * 0.5f64.exp() * libm::erfc(std::f64::consts::FRAC_1_SQRT_2);
        assert!((v - expected).abs() < 1e-5, "{v} vs {expected}");
    }

    #[test]
    fn invalid_measures_rejected() {
        let bad = SpectralMeasure::Atomic {
            d: 1,
            atoms: vec![Atom { location: vec![1.0], mass: -1.0 }],
        };
        assert!(dalang_check(&bad).is_err());
        let bad = SpectralMeasure::TabulatedRadial {
            d: 1,
            radii: vec![0.0, 1.0],
            density: vec![1.0, -0.5],
        };
        assert!(dalang_check(&bad).is_err());
    }
}
