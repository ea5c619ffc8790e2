//! Covariant unitary ensembles and deimaginarization protocols.
//!
//! An ensemble `{(p_k, O_k)}` of real orthogonal matrices acts as the twirl
//! `ρ ↦ Σ_k p_k O_k ρ O_kᵀ`. Real states stay real under every member, so the
//! twirl is a free operation; the question is how many members it takes to drive
//! `ρ^{⊗n}` close to the real set. The randomness rate of an `N`-member uniform
//! ensemble is `log₂ N / n`.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaginarity::{imag_distance, is_covariant_unitary, re_im_parts, rei, skew_canonical_form};
use crate::matcore::{
    checked_dim, dim_cap, tensor_power_with_cap, CMatrix, CovariantUnitary, DensityMatrix, RMatrix, Seed,
};

pub const WEIGHT_TOL: f64 = 1e-12;
pub const MEMBER_TOL: f64 = 1e-10;

/// Finite weighted list of covariant unitaries, or a named sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryEnsemble {
    inner: Inner,
}

#[derive(Debug, Clone, PartialEq)]
enum Inner {
    Explicit(Vec<(f64, CovariantUnitary)>),
    RealPauli { n_qubits: usize },
    HaarOrthogonal { d: usize },
}

/// Shape of an ensemble without its members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EnsembleKind {
    ExplicitList { size: usize },
    RealPauli { n_qubits: usize },
    HaarOrthogonal { d: usize },
}

impl UnitaryEnsemble {
    /// Validated explicit ensemble: non-negative weights summing to one and
    /// members that are real orthogonal of a common dimension.
    pub fn explicit(members: Vec<(f64, CovariantUnitary)>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidInput("ensemble has no members".into()));
        };
        let d = first.1.dim();
        if members.iter().any(|(_, o)| o.dim() != d) {
            return Err(Error::Shape("ensemble members differ in dimension".into()));
        }
        if members.iter().any(|(w, _)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("ensemble weights must be non-negative".into()));
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidInput(format!("ensemble weights sum to {total}")));
        }
        for (_, o) in &members {
            if !is_covariant_unitary(&o.to_complex(), MEMBER_TOL) {
                return Err(Error::InvalidInput("ensemble member is not real orthogonal".into()));
            }
        }
        Ok(Self {
            inner: Inner::Explicit(members),
        })
    }

    /// Equal weights over the given members.
    pub fn uniform(members: Vec<CovariantUnitary>) -> Result<Self> {
        let w = 1.0 / members.len().max(1) as f64;
        Self::explicit(members.into_iter().map(|o| (w, o)).collect())
    }

    pub fn real_pauli(n_qubits: usize) -> Result<Self> {
        real_pauli_group(n_qubits)
    }

    pub fn haar_orthogonal(d: usize) -> Self {
        Self {
            inner: Inner::HaarOrthogonal { d },
        }
    }

    pub fn kind(&self) -> EnsembleKind {
        match &self.inner {
            Inner::Explicit(m) => EnsembleKind::ExplicitList { size: m.len() },
            Inner::RealPauli { n_qubits } => EnsembleKind::RealPauli { n_qubits: *n_qubits },
            Inner::HaarOrthogonal { d } => EnsembleKind::HaarOrthogonal { d: *d },
        }
    }

    pub fn dim(&self) -> usize {
        match &self.inner {
            Inner::Explicit(m) => m[0].1.dim(),
            Inner::RealPauli { n_qubits } => 1 << n_qubits,
            Inner::HaarOrthogonal { d } => *d,
        }
    }

    /// Number of members, `None` for the continuous Haar sampler.
    pub fn group_size(&self) -> Option<usize> {
        match &self.inner {
            Inner::Explicit(m) => Some(m.len()),
            Inner::RealPauli { n_qubits } => Some(1usize << (2 * n_qubits)),
            Inner::HaarOrthogonal { .. } => None,
        }
    }

    /// Weight of member `i` (finite kinds).
    pub fn weight(&self, i: usize) -> f64 {
        match &self.inner {
            Inner::Explicit(m) => m[i].0,
            Inner::RealPauli { n_qubits } => 1.0 / (1usize << (2 * n_qubits)) as f64,
            Inner::HaarOrthogonal { .. } => 0.0,
        }
    }

    /// Member `i` as a matrix (finite kinds).
    pub fn member(&self, i: usize) -> Result<CovariantUnitary> {
        match &self.inner {
            Inner::Explicit(m) => m
                .get(i)
                .map(|(_, o)| o.clone())
                .ok_or_else(|| Error::InvalidInput(format!("member {i} out of range"))),
            Inner::RealPauli { n_qubits } => Ok(PauliString::from_index(i, *n_qubits).matrix()),
            Inner::HaarOrthogonal { .. } => Err(Error::InvalidInput(
                "the Haar sampler has no indexed members".into(),
            )),
        }
    }

    /// All members with weights; fails for the Haar sampler.
    pub fn members(&self) -> Result<Vec<(f64, CovariantUnitary)>> {
        let size = self.group_size().ok_or_else(|| {
            Error::InvalidInput("the Haar sampler cannot be materialised; draw samples instead".into())
        })?;
        (0..size).map(|i| Ok((self.weight(i), self.member(i)?))).collect()
    }

    /// `O_i M O_iᵀ` for member `i`; real-Pauli members use their signed-permutation form.
    pub fn conjugate_member(&self, i: usize, m: &CMatrix) -> Result<CMatrix> {
        match &self.inner {
            Inner::RealPauli { n_qubits } => Ok(PauliString::from_index(i, *n_qubits).conjugate(m)),
            _ => Ok(self.member(i)?.conjugate(m)),
        }
    }

    /// `O_i M` for member `i`; `M` may be rectangular with `dim` rows.
    pub fn left_multiply_member(&self, i: usize, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.dim() {
            return Err(Error::Shape(format!("operand has {} rows, ensemble dimension {}", m.nrows(), self.dim())));
        }
        match &self.inner {
            Inner::RealPauli { n_qubits } => {
                let p = PauliString::from_index(i, *n_qubits);
                let mut out = CMatrix::zeros(m.nrows(), m.ncols());
                for j in 0..p.dim {
                    out.row_mut(j ^ p.x).copy_from(&m.row(j).scale(p.sign(j)));
                }
                Ok(out)
            }
            _ => Ok(self.member(i)?.to_complex() * m),
        }
    }

    /// One member drawn from the ensemble distribution.
    pub fn sample(&self, rng: &mut ChaCha20Rng) -> Draw {
        match &self.inner {
            Inner::Explicit(m) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = m.len() - 1;
                for (i, (w, _)) in m.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                Draw::Index(pick)
            }
            Inner::RealPauli { n_qubits } => Draw::Index(rng.random_range(0..1usize << (2 * n_qubits))),
            Inner::HaarOrthogonal { d } => Draw::Matrix(crate::matcore::random::haar_orthogonal_from(*d, rng)),
        }
    }

    fn conjugate_draw(&self, draw: &Draw, m: &CMatrix) -> Result<CMatrix> {
        match draw {
            Draw::Index(i) => self.conjugate_member(*i, m),
            Draw::Matrix(o) => Ok(o.conjugate(m)),
        }
    }

    /// Whether member products stay in the ensemble up to sign, which lets the
    /// exhaustive search fix its first member to the identity.
    fn is_group(&self) -> bool {
        matches!(self.inner, Inner::RealPauli { .. })
    }
}

/// A sampled ensemble member.
#[derive(Debug, Clone)]
pub enum Draw {
    Index(usize),
    Matrix(CovariantUnitary),
}

/// Tensor product of `{𝕀, σ_x, σ_z, σ_xσ_z}` factors, stored as bit masks:
/// `P|j⟩ = (−1)^{|j ∧ z|} |j ⊕ x⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PauliString {
    x: usize,
    z: usize,
    dim: usize,
}

impl PauliString {
    /// Base-4 digits of `index`, first qubit most significant: 0 → 𝕀, 1 → σ_x, 2 → σ_z, 3 → σ_xσ_z.
    fn from_index(index: usize, n_qubits: usize) -> Self {
        let (mut x, mut z) = (0, 0);
        for q in 0..n_qubits {
            let digit = (index >> (2 * (n_qubits - 1 - q))) & 3;
            let bit = 1 << (n_qubits - 1 - q);
            if digit == 1 || digit == 3 {
                x |= bit;
            }
            if digit == 2 || digit == 3 {
                z |= bit;
            }
        }
        Self {
            x,
            z,
            dim: 1 << n_qubits,
        }
    }

    fn sign(&self, j: usize) -> f64 {
        if (j & self.z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    fn matrix(&self) -> CovariantUnitary {
        let mut m = RMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            m[(j ^ self.x, j)] = self.sign(j);
        }
        CovariantUnitary::from_trusted(m)
    }

    fn conjugate(&self, m: &CMatrix) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d, d);
        for j in 0..d {
            let sj = self.sign(j);
            for k in 0..d {
                out[(j ^ self.x, k ^ self.x)] = m[(j, k)] * (sj * self.sign(k));
            }
        }
        out
    }
}

fn pauli_generators() -> [CovariantUnitary; 4] {
    [0, 1, 2, 3].map(|i| PauliString::from_index(i, 1).matrix())
}

/// `{(½, 𝕀), (½, σ_z)}` on a qubit.
pub fn qubit_z_twirl() -> UnitaryEnsemble {
    let [id, _, z, _] = pauli_generators();
    UnitaryEnsemble::uniform(vec![id, z]).expect("static ensemble")
}

/// Uniform over `{𝕀, σ_x, σ_z, σ_xσ_z}`; flattens every qubit state to `𝕀/2`.
pub fn full_qubit_twirl() -> UnitaryEnsemble {
    let [id, x, z, xz] = pauli_generators();
    UnitaryEnsemble::uniform(vec![id, x, z, xz]).expect("static ensemble")
}

/// Uniform ensemble of the `4ⁿ` tensor products of `{𝕀, σ_x, σ_z, σ_xσ_z}`.
pub fn real_pauli_group(n_qubits: usize) -> Result<UnitaryEnsemble> {
    if n_qubits == 0 {
        return Err(Error::InvalidInput("real Pauli group needs at least one qubit".into()));
    }
    checked_dim(2, n_qubits, dim_cap())?;
    Ok(UnitaryEnsemble {
        inner: Inner::RealPauli { n_qubits },
    })
}

/// Ensemble of `2^r` covariant unitaries that erases the imaginary part of `ρ`.
///
/// With `O Im(ρ) Oᵀ` in block form, flipping the sign of one block with `σ_z`
/// negates that block's imaginary part; averaging over all `b ∈ {0,1}^r` of
/// `Oᵀ (𝕀_{d−2r} ⊕_k σ_z^{b_k}) O` cancels every block.
pub fn exact_erasure_ensemble(rho: &DensityMatrix) -> Result<UnitaryEnsemble> {
    let (_, im) = re_im_parts(rho);
    let form = skew_canonical_form(&im)?;
    let d = form.d;
    let offset = d - 2 * form.r;
    let o = form.o.real();
    let count = 1usize << form.r;
    let members = (0..count)
        .map(|bits| {
            let mut flip = RMatrix::identity(d, d);
            for k in 0..form.r {
                if bits >> k & 1 == 1 {
                    // σ_z on block k
                    let i = offset + 2 * k + 1;
                    flip[(i, i)] = -1.0;
                }
            }
            CovariantUnitary::from_trusted(o.transpose() * flip * o)
        })
        .collect();
    UnitaryEnsemble::uniform(members)
}

/// `Σ_k w_k O_k ρ O_kᵀ` over all members.
pub fn apply_ensemble(rho: &DensityMatrix, ens: &UnitaryEnsemble) -> Result<DensityMatrix> {
    if ens.dim() != rho.dim() {
        return Err(Error::Shape(format!(
            "ensemble dimension {} vs state dimension {}",
            ens.dim(),
            rho.dim()
        )));
    }
    let size = ens.group_size().ok_or_else(|| {
        Error::InvalidInput("the Haar sampler cannot be applied exactly; use sampled_twirl".into())
    })?;
    let d = rho.dim();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..size {
        out += ens.conjugate_member(i, rho.matrix())?.scale(ens.weight(i));
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Named source of ensemble members for `n`-copy protocols.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    /// Real Pauli group on `log₂(dⁿ)` qubits; requires a power-of-two dimension.
    RealPauli,
    /// Haar-random orthogonal matrices on the `dⁿ`-dimensional space.
    HaarOrthogonal,
    /// A fixed ensemble on the `dⁿ`-dimensional space.
    Fixed(UnitaryEnsemble),
}

impl Sampler {
    pub fn label(&self) -> &'static str {
        match self {
            Sampler::RealPauli => "real-pauli",
            Sampler::HaarOrthogonal => "haar-orthogonal",
            Sampler::Fixed(_) => "fixed",
        }
    }

    pub fn ensemble_for(&self, dim: usize) -> Result<UnitaryEnsemble> {
        match self {
            Sampler::RealPauli => {
                if !dim.is_power_of_two() || dim < 2 {
                    return Err(Error::InvalidInput(format!(
                        "real-Pauli sampling needs a power-of-two dimension, got {dim}"
                    )));
                }
                real_pauli_group(dim.trailing_zeros() as usize)
            }
            Sampler::HaarOrthogonal => Ok(UnitaryEnsemble::haar_orthogonal(dim)),
            Sampler::Fixed(ens) => {
                if ens.dim() != dim {
                    return Err(Error::Shape(format!(
                        "fixed ensemble has dimension {}, protocol needs {dim}",
                        ens.dim()
                    )));
                }
                Ok(ens.clone())
            }
        }
    }
}

/// Uniform average of `size` i.i.d. conjugations of `ρ^{⊗n}` and its imaginarity gap.
pub fn sampled_twirl(
    rho: &DensityMatrix,
    n: usize,
    size: usize,
    sampler: &Sampler,
    seed: Seed,
) -> Result<(DensityMatrix, f64)> {
    if size == 0 {
        return Err(Error::InvalidInput("ensemble size N must be at least 1".into()));
    }
    let power = tensor_power_with_cap(rho, n, dim_cap())?;
    let ens = sampler.ensemble_for(power.dim())?;
    twirl_power(&power, &ens, size, seed)
}

fn twirl_power(power: &DensityMatrix, ens: &UnitaryEnsemble, size: usize, seed: Seed) -> Result<(DensityMatrix, f64)> {
    let mut rng = seed.rng();
    let d = power.dim();
    let mut acc = CMatrix::zeros(d, d);
    for _ in 0..size {
        let draw = ens.sample(&mut rng);
        acc += ens.conjugate_draw(&draw, power.matrix())?;
    }
    let out = DensityMatrix::from_trusted(acc.unscale(size as f64));
    let gap = imag_distance(&out);
    Ok((out, gap))
}

/// Average over every member of a finite ensemble on `ρ^{⊗n}`.
pub fn exhaustive_twirl(rho: &DensityMatrix, n: usize, sampler: &Sampler) -> Result<(DensityMatrix, f64)> {
    let power = tensor_power_with_cap(rho, n, dim_cap())?;
    let ens = sampler.ensemble_for(power.dim())?;
    let out = apply_ensemble(&power, &ens)?;
    let gap = imag_distance(&out);
    Ok((out, gap))
}

/// How the threshold search evaluates a candidate ensemble size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum ThresholdSearch {
    /// Doubling then bisection on the `quantile` of `trials` sampled twirls.
    Sampled {
        trials: usize,
        quantile: f64,
        max_size: Option<usize>,
    },
    /// Smallest multiset of members whose uniform twirl meets the target.
    Exhaustive {
        max_size: Option<usize>,
        max_evaluations: usize,
    },
}

impl ThresholdSearch {
    pub fn sampled(trials: usize, quantile: f64) -> Self {
        Self::Sampled {
            trials,
            quantile,
            max_size: None,
        }
    }

    pub fn exhaustive() -> Self {
        Self::Exhaustive {
            max_size: None,
            max_evaluations: 1 << 22,
        }
    }
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        Self::sampled(32, 0.5)
    }
}

/// Default size ceiling for the Haar sampler, which has no finite group size.
pub const HAAR_MAX_SIZE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub n: usize,
    pub epsilon: f64,
    pub n_star: usize,
    pub rate: f64,
    pub trials: usize,
    pub quantile: f64,
    pub saturated: bool,
    pub seed: Seed,
}

impl ThresholdResult {
    pub const CSV_HEADER: &'static str = "state_label,n,epsilon,trials,quantile,N_star,rate,saturated,seed";

    pub fn csv_row(&self, state_label: &str) -> String {
        format!(
            "{},{},{:?},{},{:?},{},{:?},{},{}",
            state_label,
            self.n,
            self.epsilon,
            self.trials,
            self.quantile,
            self.n_star,
            self.rate,
            self.saturated,
            self.seed.master_seed
        )
    }
}

/// Smallest ensemble size `N★` whose twirl of `ρ^{⊗n}` has `imag_distance ≤ ε`.
///
/// Meeting `imag_distance ≤ ε` certifies the trace-distance criterion with the
/// real witness `σ_n = Θ(output)`.
pub fn threshold_rate(
    rho: &DensityMatrix,
    n: usize,
    epsilon: f64,
    sampler: &Sampler,
    search: ThresholdSearch,
    seed: Seed,
) -> Result<ThresholdResult> {
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 2), got {epsilon}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let power = tensor_power_with_cap(rho, n, dim_cap())?;
    let ens = sampler.ensemble_for(power.dim())?;
    let finish = |n_star: usize, trials: usize, quantile: f64, saturated: bool| ThresholdResult {
        n,
        epsilon,
        n_star,
        rate: (n_star as f64).log2() / n as f64,
        trials,
        quantile,
        saturated,
        seed,
    };

    // A single member never changes the gap, so N = 1 reduces to the input.
    if imag_distance(&power) <= epsilon {
        let (trials, quantile) = match search {
            ThresholdSearch::Sampled { trials, quantile, .. } => (trials, quantile),
            ThresholdSearch::Exhaustive { .. } => (1, 1.0),
        };
        return Ok(finish(1, trials, quantile, false));
    }

    match search {
        ThresholdSearch::Sampled {
            trials,
            quantile,
            max_size,
        } => {
            if trials == 0 {
                return Err(Error::InvalidInput("trials must be at least 1".into()));
            }
            if !(quantile > 0.0 && quantile <= 1.0) {
                return Err(Error::InvalidInput(format!("quantile must lie in (0, 1], got {quantile}")));
            }
            let max = max_size
                .or(ens.group_size())
                .unwrap_or(HAAR_MAX_SIZE)
                .max(1);
            let stat = |size: usize| -> Result<f64> {
                let mut gaps = (0..trials)
                    .into_par_iter()
                    .map(|t| twirl_power(&power, &ens, size, seed.derive(t as u64)).map(|r| r.1))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(quantile_of(&mut gaps, quantile))
            };
            let ok = |size: usize| stat(size).map(|g| g <= epsilon);

            let mut lo = 1usize;
            let mut hi = 2usize.min(max);
            loop {
                if ok(hi)? {
                    break;
                }
                if hi >= max {
                    return Ok(finish(max, trials, quantile, true));
                }
                lo = hi;
                hi = (hi * 2).min(max);
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if ok(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(finish(hi, trials, quantile, false))
        }
        ThresholdSearch::Exhaustive {
            max_size,
            max_evaluations,
        } => {
            let group = ens.group_size().ok_or_else(|| {
                Error::InvalidInput("exhaustive search needs a finite ensemble".into())
            })?;
            let max = max_size.unwrap_or(group).max(1);
            let anchored = ens.is_group();
            let conj: Vec<CMatrix> = (0..group)
                .map(|i| ens.conjugate_member(i, power.matrix()))
                .collect::<Result<_>>()?;
            for size in 2..=max {
                let (free, pool) = if anchored { (size - 1, group) } else { (size, group) };
                if multiset_count(pool, free).is_none_or(|c| c > max_evaluations as u128) {
                    return Ok(finish(group.min(max), 1, 1.0, true));
                }
                if search_multisets(&conj, power.matrix(), anchored, size, epsilon) {
                    return Ok(finish(size, 1, 1.0, false));
                }
            }
            Ok(finish(max, 1, 1.0, true))
        }
    }
}

/// Nearest-rank quantile.
fn quantile_of(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let rank = ((q * values.len() as f64).ceil() as usize).clamp(1, values.len());
    values[rank - 1]
}

fn multiset_count(pool: usize, k: usize) -> Option<u128> {
    // C(pool + k − 1, k)
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.checked_mul(pool as u128 + i)? / (i + 1);
    }
    Some(acc)
}

fn search_multisets(conj: &[CMatrix], power: &CMatrix, anchored: bool, size: usize, epsilon: f64) -> bool {
    let free = if anchored { size - 1 } else { size };
    let base = if anchored { power.clone() } else { CMatrix::zeros(power.nrows(), power.ncols()) };
    // Split on the first free index for parallelism; deeper levels recurse.
    (0..conj.len()).into_par_iter().any(|first| {
        let mut partial = base.clone();
        partial += &conj[first];
        descend(conj, &mut partial, first, free - 1, size, epsilon)
    })
}

fn descend(conj: &[CMatrix], partial: &mut CMatrix, start: usize, remaining: usize, size: usize, epsilon: f64) -> bool {
    if remaining == 0 {
        return twirl_meets(partial, size, epsilon);
    }
    for i in start..conj.len() {
        *partial += &conj[i];
        let hit = descend(conj, partial, i, remaining - 1, size, epsilon);
        *partial -= &conj[i];
        if hit {
            return true;
        }
    }
    false
}

/// `imag_distance(sum/size) ≤ ε`, skipping the eigensolve when the Frobenius
/// norm (a lower bound on the trace norm) already exceeds `ε`.
fn twirl_meets(sum: &CMatrix, size: usize, epsilon: f64) -> bool {
    let scale = 0.5 / size as f64;
    let skew = (sum - sum.transpose()).scale(scale);
    let frob = skew.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if frob > epsilon {
        return false;
    }
    crate::matcore::trace_norm(&skew).map(|t| t <= epsilon).unwrap_or(false)
}

/// `⌈2^{I_r(ρ^{⊗n}) + 3nδ}⌉`, the ensemble size that makes the operator
/// Chernoff bound non-trivial in the achievability argument.
pub fn chernoff_sufficient_n(rho: &DensityMatrix, n: usize, delta: f64) -> Result<u64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let power = tensor_power_with_cap(rho, n, dim_cap())?;
    let exponent = rei(&power).max(0.0) + 3.0 * n as f64 * delta;
    if exponent >= 63.0 {
        return Err(Error::Domain(format!("2^{exponent} does not fit in 64 bits")));
    }
    let value = exponent.exp2();
    // rounding noise in the entropy must not push an exact power of two up by one
    let nearest = value.round();
    if (value - nearest).abs() <= 1e-9 * value {
        return Ok(nearest as u64);
    }
    Ok(value.ceil() as u64)
}

/// `σ_z^{⊗n}` as a real orthogonal matrix.
pub fn sigma_z_power(n: usize) -> CovariantUnitary {
    let z = PauliString::from_index(2, 1).matrix();
    (1..n).fold(z.clone(), |acc, _| acc.kron(&z))
}

/// Identity element check helper used in tests and reports.
pub fn is_identity(o: &CovariantUnitary) -> bool {
    let d = o.dim();
    (o.real() - RMatrix::identity(d, d)).iter().all(|x| x.abs() < 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaginarity::is_real_state;
    use crate::matcore::{c, random_density, trace_norm, MaxAbs};

    fn half_identity() -> CMatrix {
        CMatrix::identity(2, 2).scale(0.5)
    }

    #[test]
    fn z_twirl_examples() {
        let ens = qubit_z_twirl();
        let out = apply_ensemble(&DensityMatrix::plus_i(), &ens).unwrap();
        assert!((out.matrix() - half_identity()).max_abs() < 1e-15);
        let diag = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        assert_eq!(apply_ensemble(&diag, &ens).unwrap(), diag);
        let plus = DensityMatrix::from_trusted(CMatrix::from_element(2, 2, c(0.5, 0.0)));
        let out = apply_ensemble(&plus, &ens).unwrap();
        assert!((out.matrix() - half_identity()).max_abs() < 1e-15);
    }

    #[test]
    fn full_twirl_flattens() {
        let ens = full_qubit_twirl();
        for k in 0..20 {
            let rho = random_density(2, Seed::new(k));
            let out = apply_ensemble(&rho, &ens).unwrap();
            assert!(trace_norm(&(out.matrix() - half_identity())).unwrap() <= 1e-12);
        }
        let out = apply_ensemble(&DensityMatrix::diagonal(&[0.7, 0.3]).unwrap(), &ens).unwrap();
        assert!((out.matrix() - half_identity()).max_abs() < 1e-15);
    }

    #[test]
    fn real_pauli_members_match_generators() {
        let ens = real_pauli_group(1).unwrap();
        let full = full_qubit_twirl();
        for i in 0..4 {
            assert_eq!(ens.member(i).unwrap(), full.member(i).unwrap());
        }
        let xz = ens.member(3).unwrap();
        assert_eq!(xz.real(), &RMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
    }

    #[test]
    fn real_pauli_fast_conjugation_matches_dense() {
        let ens = real_pauli_group(3).unwrap();
        let rho = random_density(8, Seed::new(5));
        for i in 0..64 {
            let fast = ens.conjugate_member(i, rho.matrix()).unwrap();
            let dense = ens.member(i).unwrap().conjugate(rho.matrix());
            assert!((fast - dense).max_abs() < 1e-15);
            assert!(is_covariant_unitary(&ens.member(i).unwrap().to_complex(), 1e-10));
        }
    }

    #[test]
    fn real_pauli_full_average_is_maximally_mixed() {
        for nq in 1..=3 {
            let ens = real_pauli_group(nq).unwrap();
            let d = 1 << nq;
            let rho = random_density(d, Seed::new(nq as u64));
            let out = apply_ensemble(&rho, &ens).unwrap();
            let target = CMatrix::identity(d, d).unscale(d as f64);
            assert!(trace_norm(&(out.matrix() - target)).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn exact_erasure_examples() {
        let real = DensityMatrix::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let ens = exact_erasure_ensemble(&real).unwrap();
        assert_eq!(ens.group_size(), Some(1));
        assert!(is_identity(&ens.member(0).unwrap()));

        let ens = exact_erasure_ensemble(&DensityMatrix::plus_i()).unwrap();
        assert_eq!(ens.group_size(), Some(2));
        let out = apply_ensemble(&DensityMatrix::plus_i(), &ens).unwrap();
        assert!((out.matrix() - half_identity()).max_abs() < 1e-12);

        for k in 0..10 {
            let rho = random_density(5, Seed::new(40 + k));
            let ens = exact_erasure_ensemble(&rho).unwrap();
            assert!(ens.group_size().unwrap() <= 4);
            let out = apply_ensemble(&rho, &ens).unwrap();
            assert!(imag_distance(&out) <= 1e-10);
        }
    }

    #[test]
    fn apply_ensemble_errors() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(apply_ensemble(&rho, &qubit_z_twirl()), Err(Error::Shape(_))));
        let haar = UnitaryEnsemble::haar_orthogonal(3);
        assert!(matches!(apply_ensemble(&rho, &haar), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn explicit_validation() {
        let id = CovariantUnitary::identity(2);
        assert!(UnitaryEnsemble::explicit(vec![(0.6, id.clone())]).is_err());
        assert!(UnitaryEnsemble::explicit(vec![(1.5, id.clone()), (-0.5, id.clone())]).is_err());
        assert!(UnitaryEnsemble::explicit(vec![]).is_err());
        assert!(UnitaryEnsemble::explicit(vec![(0.5, id.clone()), (0.5, CovariantUnitary::identity(3))]).is_err());
        let singleton = UnitaryEnsemble::explicit(vec![(1.0, id)]).unwrap();
        let rho = random_density(2, Seed::new(3));
        assert!((apply_ensemble(&rho, &singleton).unwrap().matrix() - rho.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn sampled_twirl_examples() {
        // full group on 2 copies: exact flattening
        let (_, gap) = exhaustive_twirl(&DensityMatrix::plus_i(), 2, &Sampler::RealPauli).unwrap();
        assert!(gap <= 1e-12);
        // real state stays real
        let real = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
        for sampler in [Sampler::RealPauli, Sampler::HaarOrthogonal] {
            let (out, gap) = sampled_twirl(&real, 2, 5, &sampler, Seed::new(1)).unwrap();
            assert!(gap <= 1e-12);
            assert!(is_real_state(&out, 1e-10));
        }
        // a single identity member leaves the single-copy gap
        let id = Sampler::Fixed(UnitaryEnsemble::uniform(vec![CovariantUnitary::identity(2)]).unwrap());
        let (_, gap) = sampled_twirl(&DensityMatrix::plus_i(), 1, 1, &id, Seed::new(0)).unwrap();
        assert!((gap - 1.0).abs() < 1e-12);
        // determinism
        let a = sampled_twirl(&DensityMatrix::plus_i(), 3, 7, &Sampler::RealPauli, Seed::new(9)).unwrap();
        let b = sampled_twirl(&DensityMatrix::plus_i(), 3, 7, &Sampler::RealPauli, Seed::new(9)).unwrap();
        assert_eq!(a.0, b.0);
        assert!(matches!(
            sampled_twirl(&DensityMatrix::maximally_mixed(3), 1, 2, &Sampler::RealPauli, Seed::new(0)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn threshold_examples() {
        let real = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
        let r = threshold_rate(&real, 3, 0.01, &Sampler::RealPauli, ThresholdSearch::default(), Seed::new(1)).unwrap();
        assert_eq!((r.n_star, r.rate, r.saturated), (1, 0.0, false));

        let p = DensityMatrix::plus_i();
        let r = threshold_rate(&p, 1, 1e-9, &Sampler::RealPauli, ThresholdSearch::exhaustive(), Seed::new(1)).unwrap();
        assert_eq!(r.n_star, 2);
        assert!(!r.saturated);

        let a = threshold_rate(&p, 2, 0.2, &Sampler::RealPauli, ThresholdSearch::sampled(8, 0.5), Seed::new(4)).unwrap();
        let b = threshold_rate(&p, 2, 0.2, &Sampler::RealPauli, ThresholdSearch::sampled(8, 0.5), Seed::new(4)).unwrap();
        assert_eq!(a, b);
        assert!(a.n_star >= 2 && a.n_star <= 16);

        assert!(threshold_rate(&p, 1, 2.5, &Sampler::RealPauli, ThresholdSearch::default(), Seed::new(0)).is_err());
    }

    #[test]
    fn threshold_saturates_when_target_unreachable() {
        // {𝕀} can never erase anything
        let id = Sampler::Fixed(UnitaryEnsemble::uniform(vec![CovariantUnitary::identity(2)]).unwrap());
        let r = threshold_rate(
            &DensityMatrix::plus_i(),
            1,
            0.5,
            &id,
            ThresholdSearch::Sampled { trials: 4, quantile: 0.5, max_size: Some(8) },
            Seed::new(0),
        )
        .unwrap();
        assert!(r.saturated);
        assert_eq!(r.n_star, 8);
    }

    #[test]
    fn chernoff_size_examples() {
        let real = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        for n in 1..=6 {
            let want = (0.3 * n as f64).exp2();
            let want = if (want - want.round()).abs() < 1e-9 { want.round() } else { want.ceil() };
            assert_eq!(chernoff_sufficient_n(&real, n, 0.1).unwrap(), want as u64);
        }
        assert_eq!(chernoff_sufficient_n(&DensityMatrix::plus_i(), 2, 0.1).unwrap(), 4);
        let mut prev = 0;
        for k in 1..10 {
            let v = chernoff_sufficient_n(&DensityMatrix::plus_i(), 2, 0.05 * k as f64).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn quantile_nearest_rank() {
        let mut v = vec![0.4, 0.1, 0.3, 0.2];
        assert_eq!(quantile_of(&mut v, 0.5), 0.2);
        assert_eq!(quantile_of(&mut v, 1.0), 0.4);
        assert_eq!(quantile_of(&mut v, 0.01), 0.1);
    }
}
