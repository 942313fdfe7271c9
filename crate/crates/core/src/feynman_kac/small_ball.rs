use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::paths::{replica_rng, StreamDomain};
use crate::error::{Error, Result};

/// How the supremum over `[0, 1]` is monitored between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Monitoring {
    /// Only grid points are checked. Biased upwards; the bias shrinks with
    /// `n_steps`.
    #[default]
    Grid,
    /// Each step also kills the path with the Brownian-bridge probability of
    /// an excursion past the barrier between the two grid points (radial
    /// tangent-plane barrier when `d > 1`).
    BridgeKill,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallBall {
    pub p_hat: f64,
    pub stderr: f64,
    pub n_inside: u64,
    pub n_rep: u64,
}

/// Kill probabilities below this are treated as zero and draw no uniform.
const KILL_FLOOR: f64 = 1e-15;

fn bridge_cross(gap_a: f64, gap_b: f64, h: f64) -> f64 {
    let arg = 2.0 * gap_a * gap_b / h;
    // -ln(KILL_FLOOR) is about 34.5; skip the exp well away from the barrier
    if arg > 35.0 {
        0.0
    } else {
        (-arg).exp()
    }
}

fn stays_inside(d: usize, eps: f64, n_steps: usize, seed: u64, replica: u64, mode: Monitoring) -> bool {
    let mut rng = replica_rng(seed, StreamDomain::SmallBall, replica);
    let h = 1.0 / n_steps as f64;
    let sd = h.sqrt();
    let eps2 = eps * eps;
    let mut pos = vec![0.0; d];
    let mut prev = vec![0.0; d];
    for _ in 0..n_steps {
        prev.copy_from_slice(&pos);
        for c in pos.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *c += sd * z;
        }
        let r2: f64 = pos.iter().map(|v| v * v).sum();
        if r2 > eps2 {
            return false;
        }
        if mode == Monitoring::BridgeKill {
            let kill = if d == 1 {
                let (a, b) = (prev[0], pos[0]);
                let up = bridge_cross(eps - a, eps - b, h);
                let down = bridge_cross(eps + a, eps + b, h);
                1.0 - (1.0 - up) * (1.0 - down)
            } else {
                let ra = prev.iter().map(|v| v * v).sum::<f64>().sqrt();
                bridge_cross(eps - ra, eps - r2.sqrt(), h)
            };
            if kill > KILL_FLOOR && rng.random::<f64>() < kill {
                return false;
            }
        }
    }
    true
}

/// Monte Carlo estimate of `P(sup_{0<=s<=1} |B_s| <= eps)`.
pub fn small_ball_mc(d: usize, eps: f64, n_steps: usize, n_rep: u64, seed: u64, mode: Monitoring) -> Result<SmallBall> {
    if d == 0 || !(eps > 0.0) || n_steps < 1 || n_rep < 2 {
        return Err(Error::domain("small ball needs d >= 1, eps > 0, n_steps >= 1, n_rep >= 2"));
    }
    let n_inside: u64 = (0..n_rep)
        .into_par_iter()
        .map(|k| stays_inside(d, eps, n_steps, seed, k, mode) as u64)
        .sum();
    let n = n_rep as f64;
    let p_hat = n_inside as f64 / n;
    let stderr = (p_hat * (1.0 - p_hat) / (n - 1.0)).sqrt();
    Ok(SmallBall {
        p_hat,
        stderr,
        n_inside,
        n_rep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::small_ball_exact_1d;

    #[test]
    fn wide_ball_always_holds() {
        let s = small_ball_mc(1, 10.0, 64, 2000, 1, Monitoring::Grid).unwrap();
        assert_eq!(s.p_hat, 1.0);
        let s = small_ball_mc(2, 10.0, 64, 2000, 1, Monitoring::BridgeKill).unwrap();
        assert_eq!(s.p_hat, 1.0);
    }

    #[test]
    fn grid_bias_is_upward_and_shrinks() {
        let exact = small_ball_exact_1d(1.0).unwrap();
        let coarse = small_ball_mc(1, 1.0, 16, 40_000, 4, Monitoring::Grid).unwrap();
        let fine = small_ball_mc(1, 1.0, 256, 40_000, 4, Monitoring::Grid).unwrap();
        assert!(coarse.p_hat - exact > 3.0 * coarse.stderr);
        assert!(fine.p_hat - exact < coarse.p_hat - exact);
    }

    #[test]
    fn bridge_kill_removes_bias() {
        let exact = small_ball_exact_1d(1.0).unwrap();
        let s = small_ball_mc(1, 1.0, 16, 40_000, 5, Monitoring::BridgeKill).unwrap();
        assert!((s.p_hat - exact).abs() < 4.0 * s.stderr, "{} vs {exact}", s.p_hat);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| small_ball_mc(1, 1.0, 32, 3000, 8, Monitoring::BridgeKill).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
