use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{c, CMatrix, CVector, CovariantUnitary, DensityMatrix, PureState, RMatrix};

/// Seed for a reproducible random stream. The same `(master_seed, stream_id)`
/// always yields the same sample sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl Seed {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            stream_id: 0,
        }
    }

    pub fn with_stream(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Child seed for sub-task `k`. Distinct `k` give distinct streams, and the
    /// mapping only depends on `(self, k)`, so parallel tasks stay reproducible.
    pub fn derive(&self, k: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: splitmix64(self.stream_id ^ 0x9E37_79B9_7F4A_7C15)
                .wrapping_add(splitmix64(k.wrapping_add(1))),
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn ginibre(d: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    })
}

/// Hilbert–Schmidt random state `GG†/tr(GG†)` with `G` complex Ginibre.
pub fn random_density(d: usize, seed: Seed) -> DensityMatrix {
    let mut rng = seed.rng();
    random_density_from(d, &mut rng)
}

pub(crate) fn random_density_from(d: usize, rng: &mut ChaCha20Rng) -> DensityMatrix {
    let g = ginibre(d, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::from_trusted(w.unscale(tr))
}

/// Haar-random pure state (normalised complex Gaussian vector).
pub fn random_pure(d: usize, seed: Seed) -> PureState {
    let mut rng = seed.rng();
    random_pure_from(d, &mut rng)
}

pub(crate) fn random_pure_from(d: usize, rng: &mut ChaCha20Rng) -> PureState {
    let v = CVector::from_fn(d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    let n = v.norm();
    PureState::from_trusted(v.unscale(n))
}

/// Haar-distributed real orthogonal matrix: QR of a real Gaussian matrix with
/// the signs of `diag(R)` absorbed into `Q`.
pub fn haar_orthogonal(d: usize, seed: Seed) -> CovariantUnitary {
    let mut rng = seed.rng();
    haar_orthogonal_from(d, &mut rng)
}

pub(crate) fn haar_orthogonal_from(d: usize, rng: &mut ChaCha20Rng) -> CovariantUnitary {
    let g: RMatrix = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    CovariantUnitary::from_trusted(q)
}
