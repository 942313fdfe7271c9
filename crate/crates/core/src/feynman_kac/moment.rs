use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::{ClipPolicy, PairEnergyPlan};
use super::paths::sample_paths;
use crate::bounds::{ball_heat_integral, log_ball_heat_integral, InitialCondition, ModelParams};
use crate::error::{Error, Result};
use crate::kernels::{SpaceCovariance, TimeCovariance};
use crate::quad::pairwise_sum;

/// Width of the reported confidence bands, in standard errors.
pub const CI_Z: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloParams {
    pub n_rep: u64,
    pub n_steps: usize,
    pub seed: u64,
    /// First replica index; grid points of one experiment use disjoint ranges.
    #[serde(default)]
    pub replica_offset: u64,
    #[serde(default)]
    pub clip: ClipPolicy,
}

impl MonteCarloParams {
    pub fn new(n_rep: u64, n_steps: usize, seed: u64) -> Self {
        Self {
            n_rep,
            n_steps,
            seed,
            replica_offset: 0,
            clip: ClipPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rep < 2 {
            return Err(Error::config("mc.n_rep", format!("must be >= 2, got {}", self.n_rep)));
        }
        if self.n_steps < 2 {
            return Err(Error::config("mc.n_steps", format!("must be >= 2, got {}", self.n_steps)));
        }
        if let Some(f) = self.clip.factor {
            if !(f > 0.0) {
                return Err(Error::config("mc.clip.factor", format!("must be positive, got {f}")));
            }
        }
        Ok(())
    }
}

/// One replica of the moment formula with the spatial shift `x` left open:
/// the path endpoints and the summed pair energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaSample {
    /// `B_t^i`, `p * d` values.
    pub endpoints: Vec<f64>,
    /// `sum_{i<j} int int gamma(s - r) Lambda(B_s^i - B_r^j) ds dr`.
    pub energy: f64,
    pub clip_events: u64,
}

/// Replicas `offset .. offset + n_rep`, evaluated in parallel and returned in
/// index order. With `with_energy = false` the energies are left at zero.
pub fn simulate_replicas(
    p: usize,
    d: usize,
    gamma: &TimeCovariance,
    lambda: &SpaceCovariance,
    t: f64,
    mc: &MonteCarloParams,
    with_energy: bool,
) -> Result<Vec<ReplicaSample>> {
    let plan = if with_energy {
        Some(PairEnergyPlan::new(gamma, lambda, d, t, mc.n_steps, mc.clip)?)
    } else {
        None
    };
    (0..mc.n_rep)
        .into_par_iter()
        .map(|k| {
            let ens = sample_paths(p, d, t, mc.n_steps, mc.seed, mc.replica_offset + k);
            let endpoints: Vec<f64> = (0..p).flat_map(|i| ens.endpoint(i).to_vec()).collect();
            let (mut energy, mut clip_events) = (0.0, 0u64);
            if let Some(plan) = &plan {
                let mids: Vec<Vec<f64>> = (0..p).map(|i| plan.midpoints(ens.path(i))).collect();
                let mut parts = Vec::with_capacity(p * (p - 1) / 2);
                for i in 0..p {
                    for j in i + 1..p {
                        let e = plan.energy_from_midpoints(&mids[i], &mids[j])?;
                        parts.push(e.value);
                        clip_events += e.clip_events;
                    }
                }
                energy = pairwise_sum(&parts);
            }
            Ok(ReplicaSample {
                endpoints,
                energy,
                clip_events,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub p: u32,
    pub t: f64,
    pub x: Vec<f64>,
    pub lambda: f64,
    pub value: f64,
    pub stderr: f64,
    pub log_value: f64,
    pub log_stderr: f64,
    pub n_rep: u64,
    pub n_steps: usize,
    pub seed: u64,
    pub clip_events: u64,
    /// True when the value is a closed form (`lambda = 0` or `p = 1`).
    pub exact: bool,
}

impl MomentEstimate {
    /// `[log(value - z se), log(value + z se)]`, lower end `-inf` when the
    /// band reaches zero. Zero-variance estimates collapse to `log_value`.
    pub fn log_ci(&self, z: f64) -> (f64, f64) {
        if self.stderr == 0.0 {
            return (self.log_value, self.log_value);
        }
        let lo = self.value - z * self.stderr;
        let lo = if lo > 0.0 { lo.ln() } else { f64::NEG_INFINITY };
        (lo, (self.value + z * self.stderr).ln())
    }
}

/// What is known when no replica reaches the support of `u0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroMassDiagnostics {
    pub n_rep: u64,
    /// `P(|B_t + x| <= M)` for one path.
    pub hit_probability: f64,
    /// Upper confidence bound on `log E u^p(t, x)` by Cauchy-Schwarz:
    /// `p log ||u0|| + (p/2) log q + (1/2) log(E e^{2 lambda^2 I} + z se)`
    /// with `q` the hit probability above.
    pub log_upper_bound: f64,
}

/// `p_t u0 (x)`.
pub fn mean_field(u0: &InitialCondition, t: f64, x: &[f64]) -> Result<f64> {
    if !(t > 0.0) || x.is_empty() {
        return Err(Error::domain("mean field needs t > 0 and d >= 1"));
    }
    if !u0.is_compact() {
        return Ok(u0.sup_norm);
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    ball_heat_integral(t, u0.m, r, x.len(), |rho| u0.eval_r2(rho * rho))
}

/// `log p_t u0 (x)`, finite where [`mean_field`] underflows.
pub fn log_mean_field(u0: &InitialCondition, t: f64, x: &[f64]) -> Result<f64> {
    let m = mean_field(u0, t, x)?;
    if m > 1e-280 || !u0.is_compact() {
        return Ok(m.ln());
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    log_ball_heat_integral(t, u0.m, r, x.len(), |rho| u0.eval_r2(rho * rho))
}

fn check_model(model: &ModelParams) -> Result<()> {
    if model.d == 0 {
        return Err(Error::config("model.d", "must be >= 1"));
    }
    if !(model.lambda >= 0.0 && model.lambda.is_finite()) {
        return Err(Error::config("model.lambda", "must be >= 0"));
    }
    if model.p < 1 {
        return Err(Error::config("model.p", "must be >= 1"));
    }
    model.u0.validate()
}

/// Monte Carlo estimate of `E u^p(t, x)` via the moment formula.
pub fn moment_estimate(
    model: &ModelParams,
    gamma: &TimeCovariance,
    lambda: &SpaceCovariance,
    t: f64,
    x: &[f64],
    mc: &MonteCarloParams,
) -> Result<MomentEstimate> {
    check_model(model)?;
    mc.validate()?;
    if x.len() != model.d {
        return Err(Error::domain(format!("x has {} coordinates, model has d = {}", x.len(), model.d)));
    }
    if !(t > 0.0) {
        return Err(Error::domain("moment needs t > 0"));
    }
    if let Some(e) = exact_moment(model, t, x, mc)? {
        return Ok(e);
    }
    let samples = simulate_replicas(model.p as usize, model.d, gamma, lambda, t, mc, true)?;
    estimate_from_replicas(model, &samples, t, x, mc)
}

/// Closed forms: independence of the paths when `lambda = 0`, and `p = 1`.
pub fn exact_moment(model: &ModelParams, t: f64, x: &[f64], mc: &MonteCarloParams) -> Result<Option<MomentEstimate>> {
    if model.lambda != 0.0 && model.p >= 2 {
        return Ok(None);
    }
    let m = mean_field(&model.u0, t, x)?;
    let value = m.powi(model.p as i32);
    let log_value = if value > 0.0 {
        value.ln()
    } else {
        model.p as f64 * log_mean_field(&model.u0, t, x)?
    };
    Ok(Some(MomentEstimate {
        p: model.p,
        t,
        x: x.to_vec(),
        lambda: model.lambda,
        value,
        stderr: 0.0,
        log_value,
        log_stderr: 0.0,
        n_rep: mc.n_rep,
        n_steps: mc.n_steps,
        seed: mc.seed,
        clip_events: 0,
        exact: true,
    }))
}

/// Log-sum-exp mean and standard error of `exp(logs)`. Returns
/// `(log_mean, stderr / mean)`, or `None` when every weight is zero.
fn log_mean_and_rel_se(logs: &[f64]) -> Option<(f64, f64)> {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return None;
    }
    let n = logs.len() as f64;
    let scaled: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let mean = pairwise_sum(&scaled) / n;
    let dev: Vec<f64> = scaled.iter().map(|s| (s - mean) * (s - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    Some((top + mean.ln(), (var / n).sqrt() / mean))
}

/// Moment estimate at shift `x` from replicas simulated without it.
pub fn estimate_from_replicas(
    model: &ModelParams,
    samples: &[ReplicaSample],
    t: f64,
    x: &[f64],
    mc: &MonteCarloParams,
) -> Result<MomentEstimate> {
    let d = model.d;
    let p = model.p as usize;
    let l2 = model.lambda * model.lambda;
    let logs: Vec<f64> = samples
        .iter()
        .map(|s| {
            let mut acc = l2 * s.energy;
            for i in 0..p {
                let r2: f64 = s.endpoints[i * d..(i + 1) * d]
                    .iter()
                    .zip(x)
                    .map(|(b, xc)| (b + xc) * (b + xc))
                    .sum();
                acc += model.u0.eval_r2(r2).ln();
            }
            acc
        })
        .collect();
    let clip_events = samples.iter().map(|s| s.clip_events).sum();
    let Some((log_value, rel_se)) = log_mean_and_rel_se(&logs) else {
        return Err(Error::AllZeroMass(Box::new(zero_mass_diagnostics(model, samples, t, x)?)));
    };
    let value = log_value.exp();
    Ok(MomentEstimate {
        p: model.p,
        t,
        x: x.to_vec(),
        lambda: model.lambda,
        value,
        stderr: value * rel_se,
        log_value,
        log_stderr: rel_se,
        n_rep: samples.len() as u64,
        n_steps: mc.n_steps,
        seed: mc.seed,
        clip_events,
        exact: false,
    })
}

fn zero_mass_diagnostics(model: &ModelParams, samples: &[ReplicaSample], t: f64, x: &[f64]) -> Result<ZeroMassDiagnostics> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let log_q = log_ball_heat_integral(t, model.u0.m, r, model.d, |_| 1.0)?;
    let l2 = model.lambda * model.lambda;
    let twice: Vec<f64> = samples.iter().map(|s| 2.0 * l2 * s.energy).collect();
    let (log_m2, rel) = log_mean_and_rel_se(&twice).expect("exponential weights are positive");
    let p = model.p as f64;
    let log_upper_bound = p * model.u0.sup_norm.ln() + 0.5 * p * log_q + 0.5 * (log_m2 + (1.0 + CI_Z * rel).ln());
    Ok(ZeroMassDiagnostics {
        n_rep: samples.len() as u64,
        hit_probability: log_q.exp(),
        log_upper_bound,
    })
}
