use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Key separating the random streams of different experiments that share a
/// master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamDomain {
    Paths = 1,
    SmallBall = 2,
}

/// Counter-based stream for `(master_seed, domain, replica)`. Streams for
/// distinct replicas never overlap, so results do not depend on which worker
/// evaluates which replica.
pub fn replica_rng(master_seed: u64, domain: StreamDomain, replica: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replica);
    rng
}

/// `p` independent `d`-dimensional Brownian paths on a uniform grid of
/// `n_steps` cells over `[0, t]`, all started at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianEnsemble {
    pub p: usize,
    pub d: usize,
    pub t: f64,
    pub n_steps: usize,
    /// Layout `[path][grid point 0..=n_steps][coordinate]`.
    positions: Vec<f64>,
    pub master_seed: u64,
    pub replica: u64,
}

impl BrownianEnsemble {
    pub fn h(&self) -> f64 {
        self.t / self.n_steps as f64
    }

    /// Grid positions of path `i`, `(n_steps + 1) * d` values.
    pub fn path(&self, i: usize) -> &[f64] {
        let len = (self.n_steps + 1) * self.d;
        &self.positions[i * len..(i + 1) * len]
    }

    /// `B_t^i`.
    pub fn endpoint(&self, i: usize) -> &[f64] {
        let p = self.path(i);
        &p[self.n_steps * self.d..]
    }

    /// Increments of path `i`, `n_steps * d` values.
    pub fn increments(&self, i: usize) -> Vec<f64> {
        let p = self.path(i);
        (self.d..p.len()).map(|k| p[k] - p[k - self.d]).collect()
    }
}

pub fn sample_paths(p: usize, d: usize, t: f64, n_steps: usize, master_seed: u64, replica: u64) -> BrownianEnsemble {
    assert!(p >= 1 && d >= 1 && n_steps >= 1 && t > 0.0);
    let mut rng = replica_rng(master_seed, StreamDomain::Paths, replica);
    let sd = (t / n_steps as f64).sqrt();
    let len = (n_steps + 1) * d;
    let mut positions = vec![0.0; p * len];
    for i in 0..p {
        let path = &mut positions[i * len..(i + 1) * len];
        for k in 1..=n_steps {
            for c in 0..d {
                let z: f64 = StandardNormal.sample(&mut rng);
                path[k * d + c] = path[(k - 1) * d + c] + sd * z;
            }
        }
    }
    BrownianEnsemble {
        p,
        d,
        t,
        n_steps,
        positions,
        master_seed,
        replica,
    }
}
