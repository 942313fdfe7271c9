//! Monte Carlo for the moment formula
//! `E u^p(t,x) = E[prod_i u0(B_t^i + x) exp(lambda^2 sum_{i<j} int int gamma(s-r) Lambda(B_s^i - B_r^j) ds dr)]`,
//! the mean field `p_t u0`, and small-ball probabilities.

mod energy;
mod moment;
mod paths;
mod small_ball;

pub use energy::{pair_energy, power_law_cell_weights, ClipPolicy, PairEnergy, PairEnergyPlan};
pub use moment::{
    estimate_from_replicas, exact_moment, log_mean_field, mean_field, moment_estimate, simulate_replicas, MomentEstimate,
    MonteCarloParams, ReplicaSample, ZeroMassDiagnostics, CI_Z,
};
pub use paths::{replica_rng, sample_paths, BrownianEnsemble, StreamDomain};
pub use small_ball::{small_ball_mc, Monitoring, SmallBall};
