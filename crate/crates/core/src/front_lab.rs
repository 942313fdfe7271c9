//! Experiment harness: the normalized log-moment functional over `(rho, t)`
//! grids, sign classification and front brackets, the chaos-series bounds,
//! and comparison of empirical brackets with the analytic constants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bounds::{FrontBounds, ModelParams, PRINTED_SYMMETRIZATION_FACTOR};
use crate::error::{Error, Result};
use crate::feynman_kac::{
    estimate_from_replicas, exact_moment, simulate_replicas, MomentEstimate, MonteCarloParams, ReplicaSample, CI_Z,
};
use crate::kernels::{big_gamma, spectral_measure, SpaceCovariance, SpectralMeasure, TimeCovariance};
use crate::quad::{integrate, integrate_power_singular, integrate_to_infinity, QuadTol};
use crate::special_fn::{gamma_fn, mittag_leffler, unit_sphere_area, MlRegime};
use crate::spectral::{eta, theta_scale, vartheta};

/// Factor in `int_0^t int_0^t gamma(s - r) ds dr = K int_0^t gamma(u)(t - u) du`
/// confirmed by direct quadrature.
pub const SYMMETRIZATION_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeDoubleIntegral {
    /// Two-dimensional quadrature.
    pub brute: f64,
    /// `2 int_0^t gamma(u)(t - u) du`.
    pub symmetrized: f64,
    /// Closed form of the double integral.
    pub exact: f64,
    /// The same 1-d integral with the printed factor, kept for the record.
    pub printed_form: f64,
}

/// `int_0^t int_0^t gamma(s - r) ds dr`, computed two ways that must agree.
pub fn time_double_integral(gamma: &TimeCovariance, t: f64) -> Result<TimeDoubleIntegral> {
    if !(t > 0.0) {
        return Err(Error::domain("time double integral needs t > 0"));
    }
    let tol = QuadTol::new(1e-14, 1e-13);
    let (brute, one_d, exact) = match *gamma {
        TimeCovariance::Dirac => {
            return Err(Error::NotApplicable(
                "the Dirac covariance is not locally integrable as a function".into(),
            ))
        }
        TimeCovariance::Constant { c } => {
            let inner = |s: f64| integrate(|_| c, 0.0, s, tol).map_or(f64::NAN, |q| q.value)
                + integrate(|_| c, s, t, tol).map_or(f64::NAN, |q| q.value);
            let brute = integrate(inner, 0.0, t, tol)?.value;
            let one_d = integrate(|u| c * (t - u), 0.0, t, tol)?.value;
            (brute, one_d, c * t * t)
        }
        TimeCovariance::PowerLaw { alpha } => {
            // inner integral split at the diagonal; each half is singular at one end
            let inner = |s: f64| {
                let left = integrate_power_singular(|_| 1.0, s, alpha, tol).map_or(f64::NAN, |q| q.value);
                let right = integrate_power_singular(|_| 1.0, t - s, alpha, tol).map_or(f64::NAN, |q| q.value);
                left + right
            };
            let brute = integrate(inner, 0.0, t, tol)?.value;
            let one_d = integrate_power_singular(|u| t - u, t, alpha, tol)?.value;
            (brute, one_d, 2.0 * t.powf(2.0 - alpha) / ((1.0 - alpha) * (2.0 - alpha)))
        }
    };
    let symmetrized = SYMMETRIZATION_FACTOR * one_d;
    let gap = (brute / symmetrized - 1.0).abs();
    if !(gap <= 1e-8) {
        return Err(Error::IdentityMismatch {
            lhs: brute,
            rhs: symmetrized,
            gap,
        });
    }
    Ok(TimeDoubleIntegral {
        brute,
        symmetrized,
        exact,
        printed_form: PRINTED_SYMMETRIZATION_FACTOR * one_d,
    })
}

/// `int_{R^d} e^{-|eta|^2} |eta|^{beta - d} d eta` by radial quadrature,
/// paired with the closed form `pi^{d/2} Gamma(beta/2) / Gamma(d/2)`.
pub fn polar_gaussian_constant(d: usize, beta: f64) -> Result<(f64, f64)> {
    if d == 0 || !(beta > 0.0) {
        return Err(Error::domain("polar constant needs d >= 1 and beta > 0"));
    }
    let tol = QuadTol::new(1e-15, 1e-13);
    let df = d as f64;
    let head = if beta < 1.0 {
        integrate_power_singular(|r| (-r * r).exp(), 1.0, 1.0 - beta, tol)?.value
    } else {
        integrate(|r: f64| (-r * r).exp() * r.powf(beta - 1.0), 0.0, 1.0, tol)?.value
    };
    let tail = integrate_to_infinity(|r: f64| (-r * r).exp() * r.powf(beta - 1.0), 1.0, tol)?.value;
    let quad = unit_sphere_area(d) * (head + tail);
    let closed = PI.powf(df / 2.0) * gamma_fn(beta / 2.0)? / gamma_fn(df / 2.0)?;
    Ok((quad, closed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKind {
    Theta,
    Eta,
    Vartheta,
}

impl ScaleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScaleKind::Theta => "theta",
            ScaleKind::Eta => "eta",
            ScaleKind::Vartheta => "vartheta",
        }
    }
}

impl std::str::FromStr for ScaleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta" => Ok(ScaleKind::Theta),
            "eta" => Ok(ScaleKind::Eta),
            "vartheta" => Ok(ScaleKind::Vartheta),
            other => Err(Error::config("front.scale", format!("expected theta, eta or vartheta, got {other}"))),
        }
    }
}

/// The model pieces every front computation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontModel {
    pub model: ModelParams,
    pub gamma: TimeCovariance,
    pub lambda: SpaceCovariance,
    pub delta: f64,
}

impl FrontModel {
    /// Front scale at horizon `t`.
    pub fn scale(&self, kind: ScaleKind, t: f64) -> Result<f64> {
        let d = self.model.d;
        let beta = || {
            self.lambda
                .beta(d)
                .ok_or_else(|| Error::ScaleUndefined("the space covariance exposes no beta".into()))
        };
        let s = match kind {
            ScaleKind::Theta => {
                let mu: SpectralMeasure = spectral_measure(&self.lambda, d)?;
                theta_scale(&mu, self.model.p, self.model.lambda, big_gamma(&self.gamma, t)?)?.theta
            }
            ScaleKind::Eta => eta(&self.gamma, t, self.delta, beta()?)?,
            ScaleKind::Vartheta => vartheta(big_gamma(&self.gamma, t)?, beta()?)?,
        };
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::ScaleUndefined(format!("{} scale is {s} at t = {t}", kind.as_str())));
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontFunctional {
    pub rho: f64,
    pub t: f64,
    pub scale_kind: ScaleKind,
    pub scale: f64,
    /// `|x| = rho t scale`.
    pub radius: f64,
    /// `log E u^p(t, x) / (t scale^2)`; `-inf` when no replica reached `supp u0`.
    pub s_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_rep: u64,
    pub clip_events: u64,
    pub zero_mass: bool,
}

fn functional_from(
    est: Result<MomentEstimate>,
    rho: f64,
    t: f64,
    kind: ScaleKind,
    scale: f64,
    n_rep: u64,
) -> Result<FrontFunctional> {
    let norm = t * scale * scale;
    let radius = rho * t * scale;
    match est {
        Ok(e) => {
            let (lo, hi) = e.log_ci(CI_Z);
            Ok(FrontFunctional {
                rho,
                t,
                scale_kind: kind,
                scale,
                radius,
                s_value: e.log_value / norm,
                ci_low: lo / norm,
                ci_high: hi / norm,
                n_rep: e.n_rep,
                clip_events: e.clip_events,
                zero_mass: e.log_value == f64::NEG_INFINITY,
            })
        }
        Err(Error::AllZeroMass(diag)) => Ok(FrontFunctional {
            rho,
            t,
            scale_kind: kind,
            scale,
            radius,
            s_value: f64::NEG_INFINITY,
            ci_low: f64::NEG_INFINITY,
            ci_high: diag.log_upper_bound / norm,
            n_rep,
            clip_events: 0,
            zero_mass: true,
        }),
        Err(e) => Err(e),
    }
}

fn axis_point(d: usize, r: f64) -> Vec<f64> {
    let mut x = vec![0.0; d];
    x[0] = r;
    x
}

/// Replicas for one horizon, shared by every `rho` at that horizon.
#[derive(Debug, Clone)]
pub struct HorizonSamples {
    pub t: f64,
    pub scale: f64,
    pub mc: MonteCarloParams,
    samples: Option<Vec<ReplicaSample>>,
}

impl HorizonSamples {
    pub fn new(fm: &FrontModel, kind: ScaleKind, t: f64, mc: MonteCarloParams) -> Result<Self> {
        fm.model.validate()?;
        mc.validate()?;
        let scale = fm.scale(kind, t)?;
        let exact = fm.model.lambda == 0.0;
        let samples = if exact {
            None
        } else {
            Some(simulate_replicas(
                fm.model.p as usize,
                fm.model.d,
                &fm.gamma,
                &fm.lambda,
                t,
                &mc,
                true,
            )?)
        };
        Ok(Self { t, scale, mc, samples })
    }

    pub fn functional(&self, fm: &FrontModel, kind: ScaleKind, rho: f64) -> Result<FrontFunctional> {
        if !(rho >= 0.0) {
            return Err(Error::domain(format!("rho must be >= 0, got {rho}")));
        }
        let x = axis_point(fm.model.d, rho * self.t * self.scale);
        let est = match &self.samples {
            None => exact_moment(&fm.model, self.t, &x, &self.mc)
                .map(|e| e.expect("uncoupled model has a closed form")),
            Some(s) => estimate_from_replicas(&fm.model, s, self.t, &x, &self.mc),
        };
        functional_from(est, rho, self.t, kind, self.scale, self.mc.n_rep)
    }
}

/// `S` at `|x| = rho t scale` for one `(rho, t)`.
pub fn normalized_log_moment(
    fm: &FrontModel,
    t: f64,
    rho: f64,
    kind: ScaleKind,
    mc: &MonteCarloParams,
) -> Result<FrontFunctional> {
    HorizonSamples::new(fm, kind, t, *mc)?.functional(fm, kind, rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Sign {
    Positive,
    Negative,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    NonMonotone,
    /// Fewer than two finite values.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoVerdict {
    pub rho: f64,
    pub sign: Sign,
    pub trend: Trend,
}

#[derive(Debug, Clone)]
pub struct FrontScan {
    pub scale_kind: ScaleKind,
    pub rho_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Row-major over `(t, rho)`.
    pub rows: Vec<FrontFunctional>,
    pub verdicts: Vec<RhoVerdict>,
    pub horizons: Vec<HorizonSamples>,
}

fn classify(series: &[&FrontFunctional]) -> Sign {
    let last: Vec<_> = series.iter().rev().take(2).collect();
    if last.iter().all(|f| f.ci_low > 0.0) {
        Sign::Positive
    } else if last.iter().all(|f| f.ci_high < 0.0) {
        Sign::Negative
    } else {
        Sign::Undecided
    }
}

fn trend(series: &[&FrontFunctional]) -> Trend {
    let vals: Vec<f64> = series.iter().map(|f| f.s_value).filter(|v| v.is_finite()).collect();
    if vals.len() < 2 {
        return Trend::Unknown;
    }
    if vals.windows(2).all(|w| w[1] >= w[0]) {
        Trend::Increasing
    } else if vals.windows(2).all(|w| w[1] <= w[0]) {
        Trend::Decreasing
    } else {
        Trend::NonMonotone
    }
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() || g.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config(name, "grid must be non-empty and strictly increasing"));
    }
    Ok(())
}

impl FrontScan {
    fn sign_at(&self, fm: &FrontModel, rho: f64) -> Result<(Sign, Trend, Vec<FrontFunctional>)> {
        let fs: Vec<FrontFunctional> = self
            .horizons
            .iter()
            .map(|h| h.functional(fm, self.scale_kind, rho))
            .collect::<Result<_>>()?;
        let refs: Vec<&FrontFunctional> = fs.iter().collect();
        Ok((classify(&refs), trend(&refs), fs))
    }
}

/// Evaluates `S` on the grid and classifies each `rho` from the two largest
/// horizons. Horizon `k` uses replicas `offset + k n_rep ..`.
pub fn front_scan(
    fm: &FrontModel,
    rho_grid: &[f64],
    t_grid: &[f64],
    kind: ScaleKind,
    mc: &MonteCarloParams,
) -> Result<FrontScan> {
    check_grid("front.rho_grid", rho_grid)?;
    check_grid("front.t_grid", t_grid)?;
    let horizons: Vec<HorizonSamples> = t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut m = *mc;
            m.replica_offset = mc.replica_offset + k as u64 * mc.n_rep;
            HorizonSamples::new(fm, kind, t, m)
        })
        .collect::<Result<_>>()?;
    let mut scan = FrontScan {
        scale_kind: kind,
        rho_grid: rho_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        rows: Vec::new(),
        verdicts: Vec::new(),
        horizons,
    };
    let mut by_rho = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let (sign, tr, fs) = scan.sign_at(fm, rho)?;
        scan.verdicts.push(RhoVerdict { rho, sign, trend: tr });
        by_rho.push(fs);
    }
    for k in 0..t_grid.len() {
        for fs in &by_rho {
            scan.rows.push(fs[k].clone());
        }
    }
    Ok(scan)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub refinements: usize,
}

/// `[largest POSITIVE rho below the first NEGATIVE, first NEGATIVE rho]`.
pub fn estimate_front_bracket(scan: &FrontScan) -> Result<Bracket> {
    let hi = scan
        .verdicts
        .iter()
        .find(|v| v.sign == Sign::Negative)
        .map(|v| v.rho)
        .ok_or_else(|| Error::NoBracket("no NEGATIVE classification in the scan".into()))?;
    let lo = scan
        .verdicts
        .iter()
        .filter(|v| v.sign == Sign::Positive && v.rho < hi)
        .map(|v| v.rho)
        .next_back()
        .ok_or_else(|| Error::NoBracket("no POSITIVE classification below the first NEGATIVE one".into()))?;
    Ok(Bracket { lo, hi, refinements: 0 })
}

/// Bisects a bracket on the scan's replicas, stopping at the first
/// UNDECIDED midpoint.
pub fn refine_front_bracket(fm: &FrontModel, scan: &FrontScan, mut b: Bracket, max_steps: usize) -> Result<Bracket> {
    for _ in 0..max_steps {
        let mid = 0.5 * (b.lo + b.hi);
        match scan.sign_at(fm, mid)?.0 {
            Sign::Positive => b.lo = mid,
            Sign::Negative => b.hi = mid,
            Sign::Undecided => break,
        }
        b.refinements += 1;
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChaosTermBound {
    pub n: usize,
    pub term: f64,
    /// `term_{n+1} / term_n`.
    pub ratio: f64,
    /// Riesz form only: the term before the log-convexity step.
    pub term_before_convexity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosSeries {
    pub terms: Vec<ChaosTermBound>,
    pub partial_sum: f64,
    /// Sum of the whole series (geometric sum, or Mittag-Leffler value).
    pub total: f64,
    /// Riesz form: regime of the Mittag-Leffler evaluation.
    pub regime: Option<MlRegime>,
    /// Riesz form: `(4/(2-beta)) exp((B(p-1) lambda^2 Gamma_t)^{2/(2-beta)} t)`.
    pub asymptotic: Option<f64>,
}

/// Geometric chaos bound `term_n = (8 (p-1) lambda^2 Gamma_t C_{N_t} / (2 pi)^d)^{n/2}`.
pub fn chaos_tail_bound(model: &ModelParams, mu: &SpectralMeasure, gamma: &TimeCovariance, t: f64, n_max: usize) -> Result<ChaosSeries> {
    let g = big_gamma(gamma, t)?;
    let th = theta_scale(mu, model.p, model.lambda, g)?;
    let q = if model.lambda == 0.0 || g == 0.0 {
        0.0
    } else {
        8.0 * (model.p as f64 - 1.0) * model.lambda * model.lambda * g * th.c / (2.0 * PI).powi(model.d as i32)
    };
    let r = q.sqrt();
    let terms: Vec<ChaosTermBound> = (0..=n_max)
        .map(|n| ChaosTermBound {
            n,
            term: r.powi(n as i32),
            ratio: r,
            term_before_convexity: None,
        })
        .collect();
    let partial_sum = terms.iter().map(|c| c.term).sum();
    Ok(ChaosSeries {
        terms,
        partial_sum,
        total: 1.0 / (1.0 - r),
        regime: None,
        asymptotic: None,
    })
}

/// Riesz chaos bound `term_n = (B(p-1) lambda^2 Gamma_t)^{n/2} t^{n(2-beta)/4} / Gamma(n(2-beta)/4 + 1)`,
/// summed as `E_{(2-beta)/4}(z)`.
pub fn chaos_tail_bound_riesz(
    d: usize,
    beta: f64,
    model: &ModelParams,
    gamma: &TimeCovariance,
    t: f64,
    n_max: usize,
) -> Result<ChaosSeries> {
    let b = crate::bounds::riesz_upper_front(d, beta, 1.0, 2)?.b_const;
    let g = big_gamma(gamma, t)?;
    let k = b * (model.p as f64 - 1.0) * model.lambda * model.lambda * g;
    let a = (2.0 - beta) / 4.0;
    let z = k.sqrt() * t.powf(a);
    let ln_z = z.ln();
    let mut terms = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let nf = n as f64;
        let after = if n == 0 { 1.0 } else { (nf * ln_z - crate::special_fn::ln_gamma(a * nf + 1.0)?).exp() };
        let before = if n == 0 {
            1.0
        } else {
            (nf * ln_z - 0.5 * crate::special_fn::ln_gamma(2.0 * a * nf + 1.0)?).exp()
        };
        terms.push(ChaosTermBound {
            n,
            term: after,
            ratio: f64::NAN,
            term_before_convexity: Some(before),
        });
    }
    for n in 0..n_max {
        terms[n].ratio = terms[n + 1].term / terms[n].term;
    }
    if let Some(last) = terms.last_mut() {
        let nf = n_max as f64;
        last.ratio =
            (ln_z + crate::special_fn::ln_gamma(a * nf + 1.0)? - crate::special_fn::ln_gamma(a * (nf + 1.0) + 1.0)?).exp();
    }
    let partial_sum = terms.iter().map(|c| c.term).sum();
    let ml = mittag_leffler(a, z)?;
    Ok(ChaosSeries {
        terms,
        partial_sum,
        total: ml.value,
        regime: Some(ml.regime),
        asymptotic: Some(4.0 / (2.0 - beta) * (k.powf(2.0 / (2.0 - beta)) * t).exp()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    NotComparable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundVerdict {
    pub bound: &'static str,
    pub value: f64,
    pub scale: ScaleKind,
    pub verdict: Verdict,
}

/// Where the scan places the front: above every POSITIVE `rho` below the
/// first NEGATIVE one, and below that NEGATIVE `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontInterval {
    pub lo: f64,
    pub hi: f64,
}

impl FrontInterval {
    pub fn from_scan(scan: &FrontScan) -> Self {
        let hi = scan
            .verdicts
            .iter()
            .find(|v| v.sign == Sign::Negative)
            .map_or(f64::INFINITY, |v| v.rho);
        let lo = scan
            .verdicts
            .iter()
            .filter(|v| v.sign == Sign::Positive && v.rho < hi)
            .map(|v| v.rho)
            .next_back()
            .unwrap_or(0.0);
        Self { lo, hi }
    }
}

impl From<Bracket> for FrontInterval {
    fn from(b: Bracket) -> Self {
        Self { lo: b.lo, hi: b.hi }
    }
}

/// One-sided, advisory check of an empirical front interval against each
/// bound living in the scan's scale.
pub fn compare_bounds(interval: FrontInterval, bounds: &FrontBounds, kind: ScaleKind, slack: f64) -> Vec<BoundVerdict> {
    let candidates: [(&'static str, Option<f64>, ScaleKind, bool); 5] = [
        ("nu_bar_cap", Some(bounds.nu_bar_cap), ScaleKind::Theta, true),
        ("riesz_upper", bounds.riesz_upper, ScaleKind::Vartheta, true),
        ("white_upper", bounds.white_upper, ScaleKind::Vartheta, true),
        ("lower_front", bounds.lower_front, ScaleKind::Eta, false),
        ("white_lower", bounds.white_lower, ScaleKind::Eta, false),
    ];
    candidates
        .into_iter()
        .filter_map(|(name, value, scale, upper)| {
            let value = value?;
            let verdict = if scale != kind {
                Verdict::NotComparable
            } else if (upper && interval.lo <= value * (1.0 + slack))
                || (!upper && interval.hi >= value * (1.0 - slack))
            {
                Verdict::Consistent
            } else {
                Verdict::Inconsistent
            };
            Some(BoundVerdict {
                bound: name,
                value,
                scale,
                verdict,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{front_bounds, InitialCondition};

    fn riesz_model(lambda: f64, u0: InitialCondition) -> FrontModel {
        FrontModel {
            model: ModelParams { d: 1, lambda, p: 2, u0 },
            gamma: TimeCovariance::Constant { c: 1.0 },
            lambda: SpaceCovariance::Riesz { beta: 0.5 },
            delta: 0.5,
        }
    }

    #[test]
    fn double_integral_examples() {
        let one = time_double_integral(&TimeCovariance::Constant { c: 1.0 }, 2.0).unwrap();
        assert_eq!(one.exact, 4.0);
        assert!((one.brute - 4.0).abs() < 1e-13 && (one.symmetrized - 4.0).abs() < 1e-13);
        assert!((one.printed_form - 8.0).abs() < 1e-12);
        let pl = time_double_integral(&TimeCovariance::PowerLaw { alpha: 0.5 }, 1.0).unwrap();
        assert!((pl.brute - 8.0 / 3.0).abs() < 1e-10);
        assert!((pl.exact - 8.0 / 3.0).abs() < 1e-15);
        let c3 = time_double_integral(&TimeCovariance::Constant { c: 3.0 }, 1.0).unwrap();
        assert!((c3.symmetrized - 3.0).abs() < 1e-13);
        assert!(time_double_integral(&TimeCovariance::Dirac, 1.0).is_err());
    }

    #[test]
    fn polar_constants() {
        for (d, beta) in [(1, 0.5), (2, 1.0), (3, 1.5)] {
            let (q, c) = polar_gaussian_constant(d, beta).unwrap();
            assert!((q / c - 1.0).abs() < 1e-8, "d={d} beta={beta}: {q} vs {c}");
        }
        let (q, _) = polar_gaussian_constant(1, 0.5).unwrap();
        assert!((q - 3.625_609_908_221_908).abs() < 1e-9);
    }

    #[test]
    fn uncoupled_scan_is_negative() {
        let fm = riesz_model(0.0, InitialCondition::indicator(1.0, 1.0));
        let mc = MonteCarloParams::new(10, 8, 1);
        // lambda = 0 makes theta vanish, so use the vartheta scale
        let scan = front_scan(&fm, &[0.5, 1.0, 2.0], &[2.0, 4.0, 8.0], ScaleKind::Vartheta, &mc).unwrap();
        assert!(scan.verdicts.iter().all(|v| v.sign == Sign::Negative));
        assert!(matches!(estimate_front_bracket(&scan), Err(Error::NoBracket(_))));
        let fb = front_bounds(&fm.model, &fm.gamma, &fm.lambda, 0.5).unwrap();
        let v = compare_bounds(FrontInterval::from_scan(&scan), &fb, ScaleKind::Vartheta, 0.1);
        assert!(v.iter().all(|b| b.verdict != Verdict::Inconsistent));
        assert!(matches!(
            normalized_log_moment(&fm, 1.0, 0.5, ScaleKind::Theta, &mc),
            Err(Error::ScaleUndefined(_))
        ));
    }

    #[test]
    fn uncoupled_functional_tends_to_gaussian_tail() {
        let fm = riesz_model(0.0, InitialCondition::indicator(1.0, 1.0));
        let mc = MonteCarloParams::new(10, 8, 1);
        let rho = 0.5;
        let f = normalized_log_moment(&fm, 400.0, rho, ScaleKind::Vartheta, &mc).unwrap();
        // scale-free limit -p rho^2 / 2
        assert!((f.s_value + rho * rho).abs() < 0.05, "{}", f.s_value);
    }

    #[test]
    fn zero_variance_functional() {
        let fm = FrontModel {
            model: ModelParams {
                d: 1,
                lambda: 1.0,
                p: 2,
                u0: InitialCondition::one(),
            },
            gamma: TimeCovariance::Constant { c: 1.0 },
            lambda: SpaceCovariance::ConstantLevel { level: 1.0 },
            delta: 0.5,
        };
        let mc = MonteCarloParams::new(16, 8, 2);
        let f = normalized_log_moment(&fm, 2.0, 0.0, ScaleKind::Vartheta, &mc).unwrap();
        // Gamma_2 = 2 and beta = 0 give scale sqrt 2; S = lambda^2 p(p-1) t / (2 scale^2) = 1
        assert!((f.s_value - 1.0).abs() < 1e-14);
        assert_eq!(f.ci_low, f.ci_high);
    }

    #[test]
    fn bracket_from_signs() {
        let mk = |rho, sign| RhoVerdict {
            rho,
            sign,
            trend: Trend::Unknown,
        };
        let scan = FrontScan {
            scale_kind: ScaleKind::Vartheta,
            rho_grid: vec![1.0, 2.0, 3.0, 4.0],
            t_grid: vec![],
            rows: vec![],
            verdicts: vec![
                mk(1.0, Sign::Positive),
                mk(2.0, Sign::Positive),
                mk(3.0, Sign::Negative),
                mk(4.0, Sign::Negative),
            ],
            horizons: vec![],
        };
        let b = estimate_front_bracket(&scan).unwrap();
        assert_eq!((b.lo, b.hi), (2.0, 3.0));
    }

    #[test]
    fn geometric_chaos_at_threshold() {
        let mu = SpectralMeasure::riesz(1, 0.5).unwrap();
        let m = ModelParams {
            d: 1,
            lambda: 1.0,
            p: 2,
            u0: InitialCondition::indicator(1.0, 1.0),
        };
        let s = chaos_tail_bound(&m, &mu, &TimeCovariance::Constant { c: 1.0 }, 1.0, 30).unwrap();
        assert_eq!(s.terms[0].term, 1.0);
        assert!((s.terms[0].ratio - 0.5).abs() < 1e-9);
        assert!(s.terms[0].ratio <= 0.5 + 1e-12);
        assert!(s.total <= 2.0 + 1e-9 && s.partial_sum <= s.total);
    }

    #[test]
    fn riesz_chaos_matches_asymptotic() {
        let m = ModelParams {
            d: 1,
            lambda: 1.0,
            p: 2,
            u0: InitialCondition::indicator(1.0, 1.0),
        };
        let s = chaos_tail_bound_riesz(1, 0.5, &m, &TimeCovariance::Constant { c: 1.0 }, 1.0, 200).unwrap();
        assert!((s.partial_sum / s.total - 1.0).abs() < 1e-10);
        let asym = s.asymptotic.unwrap();
        assert!((s.total / asym - 1.0).abs() < 0.05, "{} vs {asym}", s.total);
        for c in &s.terms {
            assert!(c.term >= c.term_before_convexity.unwrap() * (1.0 - 1e-12));
        }
    }
}
