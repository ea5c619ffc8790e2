use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::random::{haar_orthogonal_from, random_pure_from};
use crate::matcore::{c, hermitian_eigen, CMatrix, Seed};

/// Eigenvalue tolerance for leaving the operator interval.
const INTERVAL_TOL: f64 = 1e-10;

/// I.i.d. random operators in `[0, 𝕀]` with a known mean `M = m·𝕀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChernoffModel {
    /// `|ψ⟩⟨ψ|` for Haar-random `ψ`; `M = 𝕀/d`.
    Projector,
    /// `O A Oᵀ` for Haar-random orthogonal `O` and `A = diag(1, (d−1)/d, …, 1/d)`;
    /// `M = tr(A)/d · 𝕀`.
    HaarOrthogonal,
}

impl ChernoffModel {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "projector" => Ok(Self::Projector),
            "haar-orthogonal" => Ok(Self::HaarOrthogonal),
            other => Err(Error::Config(format!(
                "unknown generator `{other}` (expected projector or haar-orthogonal)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Projector => "projector",
            Self::HaarOrthogonal => "haar-orthogonal",
        }
    }

    /// Scalar `m` with `M = m·𝕀`; also the floor `μ`.
    pub fn mean_scalar(&self, d: usize) -> f64 {
        match self {
            Self::Projector => 1.0 / d as f64,
            Self::HaarOrthogonal => self.spectrum(d).iter().sum::<f64>() / d as f64,
        }
    }

    fn spectrum(&self, d: usize) -> Vec<f64> {
        (0..d).map(|j| (d - j) as f64 / d as f64).collect()
    }

    fn draw(&self, d: usize, rng: &mut ChaCha20Rng) -> CMatrix {
        match self {
            Self::Projector => {
                let psi = random_pure_from(d, rng);
                let v = psi.amplitudes();
                v * v.adjoint()
            }
            Self::HaarOrthogonal => {
                let o = haar_orthogonal_from(d, rng).to_complex();
                let a = CMatrix::from_diagonal(&self.spectrum(d).iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>().into());
                &o * a * o.transpose()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernoffReport {
    pub generator: ChernoffModel,
    pub d: usize,
    #[serde(rename = "N")]
    pub n_samples: usize,
    pub mu: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub empirical_failures: usize,
    pub lower_failures: usize,
    pub upper_failures: usize,
    /// `2d·exp(−Nμε²/2)`.
    pub bound: f64,
    /// `3·√(b(1−b)/trials)` for `b = min(bound, 1)`.
    pub margin: f64,
    pub seed: u64,
}

impl ChernoffReport {
    pub fn frequency(&self) -> f64 {
        self.empirical_failures as f64 / self.trials as f64
    }

    pub fn holds(&self) -> bool {
        self.bound >= 1.0 || self.frequency() <= self.bound + self.margin
    }
}

/// Run `trials` batches of `N` samples and count batches whose average leaves
/// `[(1−ε)M, (1+ε)M]`.
pub fn chernoff_experiment(
    d: usize,
    n_samples: usize,
    trials: usize,
    epsilon: f64,
    generator: ChernoffModel,
    seed: Seed,
) -> Result<ChernoffReport> {
    if d == 0 || n_samples == 0 || trials == 0 {
        return Err(Error::InvalidInput("d, N and trials must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let m = generator.mean_scalar(d);
    let (lo, hi) = ((1.0 - epsilon) * m, (1.0 + epsilon) * m);
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.derive(t as u64).rng();
            let mut acc = CMatrix::zeros(d, d);
            for _ in 0..n_samples {
                acc += generator.draw(d, &mut rng);
            }
            let mean = acc.unscale(n_samples as f64);
            let eig = hermitian_eigen(&mean);
            let below = *eig.values.last().expect("non-empty") - lo < -INTERVAL_TOL;
            let above = hi - eig.values[0] < -INTERVAL_TOL;
            (below, above)
        })
        .collect();
    let lower_failures = outcomes.iter().filter(|o| o.0).count();
    let upper_failures = outcomes.iter().filter(|o| o.1).count();
    let empirical_failures = outcomes.iter().filter(|o| o.0 || o.1).count();
    let bound = 2.0 * d as f64 * (-(n_samples as f64) * m * epsilon * epsilon / 2.0).exp();
    let b = bound.min(1.0);
    Ok(ChernoffReport {
        generator,
        d,
        n_samples,
        mu: m,
        epsilon,
        trials,
        empirical_failures,
        lower_failures,
        upper_failures,
        bound,
        margin: 3.0 * (b * (1.0 - b) / trials as f64).sqrt(),
        seed: seed.master_seed,
    })
}
