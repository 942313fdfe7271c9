use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{heat_kernel_r2, SpaceCovariance, TimeCovariance};
use crate::quad::pairwise_sum;

/// Ceiling on Riesz-type midpoint values, `Lambda(factor * sqrt(h))`.
/// `factor = None` disables clipping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipPolicy {
    pub factor: Option<f64>,
}

impl Default for ClipPolicy {
    fn default() -> Self {
        Self { factor: Some(1.0) }
    }
}

impl ClipPolicy {
    pub fn off() -> Self {
        Self { factor: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEnergy {
    pub value: f64,
    pub clip_events: u64,
}

/// `Lambda` specialised for fast evaluation on coordinate differences.
#[derive(Debug, Clone, PartialEq)]
enum PointKernel {
    Riesz { half_beta: f64 },
    Fractional { exps: Vec<f64> },
    Level(f64),
    Heat { eps: f64 },
    Envelope { c: f64, half_beta: f64, r2max: f64 },
}

impl PointKernel {
    fn new(lambda: &SpaceCovariance, d: usize) -> Result<Self> {
        Ok(match lambda {
            SpaceCovariance::Riesz { beta } => PointKernel::Riesz { half_beta: 0.5 * beta },
            SpaceCovariance::Fractional { hurst } => {
                if hurst.len() != d {
                    return Err(Error::domain("one Hurst index per coordinate is required"));
                }
                PointKernel::Fractional {
                    exps: hurst.iter().map(|h| 2.0 * h - 2.0).collect(),
                }
            }
            SpaceCovariance::ConstantLevel { level } => PointKernel::Level(*level),
            SpaceCovariance::MollifiedWhite { eps } => PointKernel::Heat { eps: *eps },
            SpaceCovariance::White1D => return Err(Error::WhitePointwiseEval),
            SpaceCovariance::LowerRieszEnvelope { beta, envelope } => PointKernel::Envelope {
                c: envelope.c,
                half_beta: 0.5 * beta,
                r2max: envelope.r * envelope.r,
            },
        })
    }

    #[inline]
    fn neg_pow_r2(r2: f64, half_beta: f64) -> f64 {
        if half_beta == 0.25 {
            1.0 / r2.sqrt().sqrt()
        } else if half_beta == 0.5 {
            1.0 / r2.sqrt()
        } else {
            r2.powf(-half_beta)
        }
    }

    #[inline]
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2 = || a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        match self {
            PointKernel::Riesz { half_beta } => Self::neg_pow_r2(r2(), *half_beta),
            PointKernel::Fractional { exps } => a
                .iter()
                .zip(b)
                .zip(exps)
                .map(|((x, y), e)| (x - y).abs().powf(*e))
                .product(),
            PointKernel::Level(v) => *v,
            PointKernel::Heat { eps } => heat_kernel_r2(*eps, a.len(), r2()),
            PointKernel::Envelope { c, half_beta, r2max } => {
                let q = r2();
                if q > *r2max {
                    0.0
                } else if *half_beta == 0.0 {
                    *c
                } else {
                    c * Self::neg_pow_r2(q, *half_beta)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TimeWeights {
    /// Same weight for every cell pair.
    Flat(f64),
    /// Weight depends on the cell offset `|a - b|`.
    Banded(Vec<f64>),
    /// Diagonal only, weight per cell.
    Diagonal(f64),
}

/// Everything about the pair quadrature that does not depend on the paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEnergyPlan {
    d: usize,
    n_steps: usize,
    kernel: PointKernel,
    weights: TimeWeights,
    ceiling: f64,
}

/// `int int_{cell a} int_{cell a+k} |s - r|^{-alpha} ds dr` for `k = 0..n`.
pub fn power_law_cell_weights(alpha: f64, h: f64, n: usize) -> Vec<f64> {
    let q = 2.0 - alpha;
    let scale = h.powf(q) / ((1.0 - alpha) * q);
    let mut w = Vec::with_capacity(n);
    for k in 0..n {
        let second_diff = match k {
            0 => 2.0,
            1 => 2f64.powf(q) - 2.0,
            _ if k < 8 => {
                let kf = k as f64;
                (kf + 1.0).powf(q) - 2.0 * kf.powf(q) + (kf - 1.0).powf(q)
            }
            _ => {
                // k^q ((1+u)^q - 2 + (1-u)^q) = 2 k^q sum_{m even >= 2} C(q, m) u^m
                let kf = k as f64;
                let u2 = 1.0 / (kf * kf);
                let mut coef = q * (q - 1.0) / 2.0;
                let mut um = u2;
                let mut m = 2.0;
                let mut acc = 0.0;
                loop {
                    let term = coef * um;
                    acc += term;
                    if term.abs() <= 1e-17 * acc.abs() {
                        break;
                    }
                    coef *= (q - m) * (q - m - 1.0) / ((m + 1.0) * (m + 2.0));
                    um *= u2;
                    m += 2.0;
                }
                2.0 * kf.powf(q) * acc
            }
        };
        w.push(scale * second_diff);
    }
    w
}

impl PairEnergyPlan {
    pub fn new(
        gamma: &TimeCovariance,
        lambda: &SpaceCovariance,
        d: usize,
        t: f64,
        n_steps: usize,
        clip: ClipPolicy,
    ) -> Result<Self> {
        if n_steps < 1 || !(t > 0.0) {
            return Err(Error::domain("pair energy needs t > 0 and n_steps >= 1"));
        }
        let kernel = PointKernel::new(lambda, d)?;
        let h = t / n_steps as f64;
        let weights = match *gamma {
            TimeCovariance::Constant { c } => TimeWeights::Flat(c * h * h),
            TimeCovariance::PowerLaw { alpha } => TimeWeights::Banded(power_law_cell_weights(alpha, h, n_steps)),
            TimeCovariance::Dirac => TimeWeights::Diagonal(0.5 * h),
        };
        let ceiling = match clip.factor {
            Some(f) => lambda.singular_ceiling(d, f * h.sqrt()).unwrap_or(f64::INFINITY),
            None => f64::INFINITY,
        };
        Ok(Self {
            d,
            n_steps,
            kernel,
            weights,
            ceiling,
        })
    }

    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }

    /// Cell midpoints of a grid path, `n_steps * d` values.
    pub fn midpoints(&self, path: &[f64]) -> Vec<f64> {
        let d = self.d;
        debug_assert_eq!(path.len(), (self.n_steps + 1) * d);
        (0..self.n_steps * d).map(|k| 0.5 * (path[k] + path[k + d])).collect()
    }

    /// Pair energy from precomputed midpoints.
    pub fn energy_from_midpoints(&self, mi: &[f64], mj: &[f64]) -> Result<PairEnergy> {
        let d = self.d;
        let n = self.n_steps;
        let mut clips = 0u64;
        let mut lam = |a: usize, b: usize| {
            let v = self.kernel.eval(&mi[a * d..(a + 1) * d], &mj[b * d..(b + 1) * d]);
            if v > self.ceiling {
                clips += 1;
                self.ceiling
            } else {
                v
            }
        };
        let value = match &self.weights {
            TimeWeights::Diagonal(w) => {
                let vals: Vec<f64> = (0..n).map(|a| lam(a, a)).collect();
                w * pairwise_sum(&vals)
            }
            TimeWeights::Flat(w) => {
                let mut rows = Vec::with_capacity(n);
                let mut buf = vec![0.0; n];
                for a in 0..n {
                    for (b, slot) in buf.iter_mut().enumerate() {
                        *slot = lam(a, b);
                    }
                    rows.push(pairwise_sum(&buf));
                }
                w * pairwise_sum(&rows)
            }
            TimeWeights::Banded(wk) => {
                let mut rows = Vec::with_capacity(n);
                let mut buf = vec![0.0; n];
                for a in 0..n {
                    for (b, slot) in buf.iter_mut().enumerate() {
                        *slot = wk[a.abs_diff(b)] * lam(a, b);
                    }
                    rows.push(pairwise_sum(&buf));
                }
                pairwise_sum(&rows)
            }
        };
        if !value.is_finite() {
            return Err(Error::domain(
                "pair energy is infinite (paths meet at a kernel singularity with clipping disabled)",
            ));
        }
        Ok(PairEnergy {
            value,
            clip_events: clips,
        })
    }
}

/// `int_0^t int_0^t gamma(s - r) Lambda(b^i_s - b^j_r) ds dr` for two grid
/// paths with `(n_steps + 1) * d` coordinates each.
pub fn pair_energy(
    path_i: &[f64],
    path_j: &[f64],
    d: usize,
    t: f64,
    gamma: &TimeCovariance,
    lambda: &SpaceCovariance,
    clip: ClipPolicy,
) -> Result<PairEnergy> {
    if path_i.len() != path_j.len() || !path_i.len().is_multiple_of(d) || path_i.len() < 2 * d {
        return Err(Error::domain("paths must share a grid of at least two points"));
    }
    let n = path_i.len() / d - 1;
    let plan = PairEnergyPlan::new(gamma, lambda, d, t, n, clip)?;
    plan.energy_from_midpoints(&plan.midpoints(path_i), &plan.midpoints(path_j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, t: f64, slope: f64) -> Vec<f64> {
        (0..=n).map(|k| slope * t * k as f64 / n as f64).collect()
    }

    #[test]
    fn constant_everything_is_t_squared() {
        let n = 64;
        let e = pair_energy(
            &line(n, 1.0, 0.0),
            &line(n, 1.0, 0.0),
            1,
            1.0,
            &TimeCovariance::Constant { c: 1.0 },
            &SpaceCovariance::ConstantLevel { level: 1.0 },
            ClipPolicy::default(),
        )
        .unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn power_law_weights_sum_exactly() {
        for n in [1usize, 7, 64, 1000] {
            let w = power_law_cell_weights(0.5, 1.0 / n as f64, n);
            let total: f64 = (0..n).map(|a| (0..n).map(|b| w[a.abs_diff(b)]).sum::<f64>()).sum();
            assert!((total - 8.0 / 3.0).abs() < 1e-11, "n = {n}: {total}");
        }
    }

    #[test]
    fn series_branch_matches_direct_formula() {
        let q: f64 = 1.3;
        let w = power_law_cell_weights(0.7, 1.0, 12);
        for k in [8usize, 9, 11] {
            let kf = k as f64;
            let direct = ((kf + 1.0).powf(q) - 2.0 * kf.powf(q) + (kf - 1.0).powf(q)) / (0.3 * q);
            assert!((w[k] / direct - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dirac_uses_half_weight() {
        let n = 32;
        let e = pair_energy(
            &line(n, 2.0, 0.0),
            &line(n, 2.0, 0.0),
            1,
            2.0,
            &TimeCovariance::Dirac,
            &SpaceCovariance::ConstantLevel { level: 3.0 },
            ClipPolicy::default(),
        )
        .unwrap();
        assert!((e.value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn riesz_clip_is_counted() {
        let n = 16;
        let z = line(n, 1.0, 0.0);
        let e = pair_energy(
            &z,
            &z,
            1,
            1.0,
            &TimeCovariance::Constant { c: 1.0 },
            &SpaceCovariance::Riesz { beta: 0.5 },
            ClipPolicy::default(),
        )
        .unwrap();
        assert_eq!(e.clip_events, (n * n) as u64);
        // every cell sits at the ceiling h^{-1/4}
        assert!((e.value - (1.0f64 / 16.0).powf(-0.25)).abs() < 1e-12);
        assert!(pair_energy(
            &z,
            &z,
            1,
            1.0,
            &TimeCovariance::Constant { c: 1.0 },
            &SpaceCovariance::Riesz { beta: 0.5 },
            ClipPolicy::off()
        )
        .is_err());
    }

    #[test]
    fn white_is_rejected() {
        let z = line(4, 1.0, 0.0);
        let r = pair_energy(
            &z,
            &z,
            1,
            1.0,
            &TimeCovariance::Constant { c: 1.0 },
            &SpaceCovariance::White1D,
            ClipPolicy::default(),
        );
        assert_eq!(r.unwrap_err(), Error::WhitePointwiseEval);
    }
}
