//! δ-typical sets and typical subspaces.
//!
//! A sequence `x₁…x_n` is δ-typical for `p` when
//! `2^{−n(H+δ)} ≤ Π_i p_{x_i} ≤ 2^{−n(H−δ)}`. The classical mode counts typical
//! sequences by composition class, so it scales to large `n`; the operator mode
//! builds the projector onto the span of typical eigenbasis product states.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    checked_dim, dim_cap, hermitian_eigen, tensor_power_with_cap, trace_norm, von_neumann_entropy, CMatrix,
    CVector, DensityMatrix, EIG_CLIP,
};

/// Relative slack on the window edges, absorbing rounding in `Σ log₂ p`.
const WINDOW_SLACK: f64 = 1e-12;

/// Shannon entropy in bits.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

fn validate_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidInput("empty probability vector".into()));
    }
    if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidInput("probabilities must be finite and non-negative".into()));
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("probabilities sum to {s}")));
    }
    Ok(())
}

fn validate_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    Ok(())
}

/// Whether `log₂ Π p` lies in `[−n(H+δ), −n(H−δ)]`.
fn in_window(log_prob: f64, n: usize, entropy: f64, delta: f64) -> bool {
    let n = n as f64;
    let lo = -n * (entropy + delta);
    let hi = -n * (entropy - delta);
    let slack = WINDOW_SLACK * n.max(1.0) * (entropy + delta).max(1.0);
    log_prob >= lo - slack && log_prob <= hi + slack
}

pub fn is_typical(seq: &[usize], probs: &[f64], n: usize, delta: f64) -> Result<bool> {
    validate_probs(probs)?;
    validate_delta(delta)?;
    if seq.len() != n {
        return Err(Error::InvalidInput(format!("sequence length {} differs from n = {n}", seq.len())));
    }
    if let Some(&bad) = seq.iter().find(|&&s| s >= probs.len()) {
        return Err(Error::InvalidInput(format!("symbol {bad} outside alphabet of size {}", probs.len())));
    }
    if seq.iter().any(|&s| probs[s] == 0.0) {
        return Ok(false);
    }
    let log_prob: f64 = seq.iter().map(|&s| probs[s].log2()).sum();
    Ok(in_window(log_prob, n, shannon_entropy(probs), delta))
}

/// Size and probability mass of the δ-typical set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalSet {
    pub probs: Vec<f64>,
    pub n: usize,
    pub delta: f64,
    /// Exact count, decimal string so it survives JSON for any `n`.
    pub member_count: String,
    pub mass: f64,
}

impl TypicalSet {
    pub fn member_count_big(&self) -> BigUint {
        self.member_count.parse().expect("decimal count")
    }

    /// `2^{n(H+δ)}`.
    pub fn count_bound_log2(&self) -> f64 {
        self.n as f64 * (shannon_entropy(&self.probs) + self.delta)
    }
}

/// Exact typical-set count and mass, summed over composition classes.
///
/// All sequences with the same symbol counts `(k_1, …, k_d)` share one
/// probability, so the sum runs over `C(n+d−1, d−1)` classes. Counts are exact
/// big integers; each class mass is `multinomial · Π p_i^{k_i}`, evaluated in
/// log space only when the direct product would underflow.
pub fn typical_stats(probs: &[f64], n: usize, delta: f64) -> Result<TypicalSet> {
    validate_probs(probs)?;
    validate_delta(delta)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let entropy = shannon_entropy(probs);
    let d = probs.len();
    let ln_fact = ln_factorials(n);

    let mut count = BigUint::ZERO;
    let mut mass = 0.0;
    let mut comp = vec![0usize; d];
    for_each_composition(n, d, &mut comp, 0, &mut |k: &[usize]| {
        if k.iter().zip(probs).any(|(&ki, &p)| ki > 0 && p == 0.0) {
            return;
        }
        let log_prob: f64 = k
            .iter()
            .zip(probs)
            .filter(|(&ki, _)| ki > 0)
            .map(|(&ki, &p)| ki as f64 * p.log2())
            .sum();
        if !in_window(log_prob, n, entropy, delta) {
            return;
        }
        let multi = multinomial(n, k);
        let direct = multi.to_f64().unwrap_or(f64::INFINITY)
            * k.iter().zip(probs).map(|(&ki, &p)| p.powi(ki as i32)).product::<f64>();
        let term = if direct.is_finite() && direct > 1e-280 {
            direct
        } else {
            let ln_multi = ln_fact[n] - k.iter().map(|&ki| ln_fact[ki]).sum::<f64>();
            (ln_multi + log_prob * std::f64::consts::LN_2).exp()
        };
        count += multi;
        mass += term;
    });
    Ok(TypicalSet {
        probs: probs.to_vec(),
        n,
        delta,
        member_count: count.to_string(),
        mass: mass.min(1.0),
    })
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

fn multinomial(n: usize, k: &[usize]) -> BigUint {
    // product of binomials C(n_remaining, k_i)
    let mut acc = BigUint::one();
    let mut remaining = n;
    for &ki in k {
        acc *= binomial(remaining, ki);
        remaining -= ki;
    }
    acc
}

fn binomial(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Visit compositions of `n` into `d` parts in lexicographic order of `k`.
fn for_each_composition(n: usize, d: usize, comp: &mut [usize], pos: usize, f: &mut impl FnMut(&[usize])) {
    if pos == d - 1 {
        comp[pos] = n;
        f(comp);
        return;
    }
    for k in 0..=n {
        comp[pos] = k;
        for_each_composition(n - k, d, comp, pos + 1, f);
    }
}

/// Projector onto the δ-typical subspace of `ρ^{⊗n}`.
#[derive(Debug, Clone)]
pub struct TypicalProjector {
    pub n: usize,
    pub delta: f64,
    /// Typical eigenvalue-index sequences, lexicographic.
    pub basis_indices: Vec<Vec<usize>>,
    pub projector: CMatrix,
    /// Dimension of the typical subspace.
    pub dim: usize,
    /// `tr[Π ρ^{⊗n} Π]`.
    pub mu: f64,
    /// Eigenvectors of `ρ` (columns) the product basis is built from.
    pub eigenbasis: CMatrix,
    pub eigenvalues: Vec<f64>,
    /// `S(ρ)` in bits.
    pub entropy: f64,
    /// Whether `Π` is real in the reference basis.
    pub pi_real: bool,
}

impl TypicalProjector {
    /// `log₂` of the dimension bound `2^{n(S+δ)}`.
    pub fn dim_bound_log2(&self) -> f64 {
        self.n as f64 * (self.entropy + self.delta)
    }

    /// Smallest eigenvalue of `Π − 2^{n(S−δ)} Π ρ^{⊗n} Π`.
    pub fn operator_bound_slack(&self, power: &DensityMatrix) -> f64 {
        let scale = (self.n as f64 * (self.entropy - self.delta)).exp2();
        let sandwich = &self.projector * power.matrix() * &self.projector;
        let gap = &self.projector - sandwich.scale(scale);
        hermitian_eigen(&gap).values.last().copied().unwrap_or(0.0)
    }

    /// `max |Π² − Π|` and `max |Π − Π†|`.
    pub fn projector_defect(&self) -> f64 {
        let p = &self.projector;
        let idem = (p * p - p).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let herm = (p - p.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        idem.max(herm)
    }
}

pub fn typical_projector(rho: &DensityMatrix, n: usize, delta: f64) -> Result<TypicalProjector> {
    validate_delta(delta)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let d = rho.dim();
    let total = checked_dim(d, n, dim_cap())?;
    let eig = hermitian_eigen(rho.matrix());
    let probs: Vec<f64> = eig.values.iter().map(|&x| if x > EIG_CLIP { x } else { 0.0 }).collect();
    let entropy = von_neumann_entropy(rho);

    let mut basis_indices = Vec::new();
    let mut projector = CMatrix::zeros(total, total);
    let mut mu = 0.0;
    let mut seq = vec![0usize; n];
    for idx in 0..total {
        let mut rest = idx;
        for slot in seq.iter_mut().rev() {
            *slot = rest % d;
            rest /= d;
        }
        if seq.iter().any(|&s| probs[s] == 0.0) {
            continue;
        }
        let log_prob: f64 = seq.iter().map(|&s| probs[s].log2()).sum();
        if !in_window(log_prob, n, entropy, delta) {
            continue;
        }
        mu += seq.iter().map(|&s| probs[s]).product::<f64>();
        let mut v = eig.vector(seq[0]);
        for &s in &seq[1..] {
            v = v.kronecker(&eig.vector(s));
        }
        let v: CVector = v;
        projector += &v * v.adjoint();
        basis_indices.push(seq.clone());
    }
    let dim = basis_indices.len();
    let pi_real = dim == 0 || {
        let m = &projector;
        trace_norm(&(m - m.transpose())).map(|t| t / dim as f64 <= 1e-10).unwrap_or(false)
    };
    Ok(TypicalProjector {
        n,
        delta,
        basis_indices,
        projector,
        dim,
        mu,
        eigenbasis: eig.vectors,
        eigenvalues: probs,
        entropy,
        pi_real,
    })
}

/// Gap `‖ρ^{⊗n} − Πρ^{⊗n}Π‖₁` and its gentle-measurement bound `2√(2ε′)`, `ε′ = 1 − μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GentleTruncation {
    pub lhs: f64,
    pub bound: f64,
    pub epsilon: f64,
    pub holds: bool,
}

pub fn gentle_truncation_check(rho: &DensityMatrix, n: usize, delta: f64) -> Result<GentleTruncation> {
    let tp = typical_projector(rho, n, delta)?;
    let power = tensor_power_with_cap(rho, n, dim_cap())?;
    Ok(truncation_from(&tp, &power))
}

pub(crate) fn truncation_from(tp: &TypicalProjector, power: &DensityMatrix) -> GentleTruncation {
    let sandwich = &tp.projector * power.matrix() * &tp.projector;
    let lhs = trace_norm(&(power.matrix() - sandwich)).unwrap_or(f64::NAN);
    let epsilon = (1.0 - tp.mu).max(0.0);
    let bound = 2.0 * (2.0 * epsilon).sqrt();
    GentleTruncation {
        lhs,
        bound,
        epsilon,
        holds: lhs <= bound + 1e-8,
    }
}

/// One row of the typicality CSV report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalityRow {
    pub d: usize,
    pub n: usize,
    pub delta: f64,
    #[serde(rename = "D")]
    pub dim: usize,
    pub mass: f64,
    pub dim_bound: f64,
    pub op_bound_ok: bool,
    pub pi_real: bool,
}

impl TypicalityRow {
    pub const CSV_HEADER: &'static str = "d,n,delta,D,mass,dim_bound,op_bound_ok,pi_real";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:?},{},{:?},{:?},{},{}",
            self.d, self.n, self.delta, self.dim, self.mass, self.dim_bound, self.op_bound_ok, self.pi_real
        )
    }
}

pub fn typicality_row(rho: &DensityMatrix, n: usize, delta: f64) -> Result<TypicalityRow> {
    let tp = typical_projector(rho, n, delta)?;
    let power = tensor_power_with_cap(rho, n, dim_cap())?;
    Ok(TypicalityRow {
        d: rho.dim(),
        n,
        delta,
        dim: tp.dim,
        mass: tp.mu,
        dim_bound: tp.dim_bound_log2().exp2(),
        op_bound_ok: tp.operator_bound_slack(&power) >= -1e-9,
        pi_real: tp.pi_real,
    })
}
