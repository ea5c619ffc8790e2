use serde::{Deserialize, Serialize};

use super::{Check, DEFAULT_SLACK};
use crate::error::{Error, Result};
use crate::imaginarity::theta_state;
use crate::matcore::{
    checked_dim, dim_cap, purify, tensor_power_with_cap, von_neumann_entropy, CMatrix, CVector, DensityMatrix,
    PureState,
};
use crate::protocols::{apply_ensemble, UnitaryEnsemble};

/// Entropies of `|ψ̄⟩ = Σ_k √w_k |k⟩_E ⊗ (O_k ⊗ 𝕀)|ψ^{⊗n}⟩_{AZ}` and the chain
/// `log₂N ≥ S(E) ≥ S(EZ) − S(Z) = S(𝒪(ρ^{⊗n})) − nS(ρ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    pub log2_size: f64,
    pub s_e: f64,
    pub s_ez: f64,
    pub s_z: f64,
    pub s_a: f64,
    /// `S(𝒪(ρ^{⊗n}))` computed directly from the channel output.
    pub s_output: f64,
    /// `n·S(ρ)`.
    pub n_s_rho: f64,
}

impl ConverseReport {
    /// Every inequality and equality of the chain as `lhs ≤ bound`.
    pub fn checks(&self) -> Vec<(&'static str, Check)> {
        vec![
            ("log2N>=S(E)", Check::new(self.s_e, self.log2_size)),
            ("S(E)>=S(EZ)-S(Z)", Check::new(self.s_ez - self.s_z, self.s_e)),
            ("S(EZ)=S(A)", Check::new((self.s_ez - self.s_a).abs(), 0.0)),
            ("S(A)=S(output)", Check::new((self.s_a - self.s_output).abs(), 0.0)),
            ("S(Z)=nS(rho)", Check::new((self.s_z - self.n_s_rho).abs(), 0.0)),
            ("log2N>=S(output)-nS(rho)", Check::new(self.s_output - self.n_s_rho, self.log2_size)),
        ]
    }

    pub fn worst_margin(&self) -> f64 {
        self.checks().iter().map(|(_, c)| c.margin()).fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.holds(DEFAULT_SLACK))
    }
}

pub fn converse_chain(rho: &DensityMatrix, ens: &UnitaryEnsemble, n: usize) -> Result<ConverseReport> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let size = ens
        .group_size()
        .ok_or_else(|| Error::InvalidInput("converse chain needs a finite ensemble".into()))?;
    let cap = dim_cap();
    let d = rho.dim();
    let dn = checked_dim(d, n, cap)?;
    if ens.dim() != dn {
        return Err(Error::Shape(format!("ensemble dimension {} vs dⁿ = {dn}", ens.dim())));
    }
    let psi = purify(rho);
    let r = psi.dim() / d;
    let rn = checked_dim(r, n, cap)?;
    let total = size
        .checked_mul(dn)
        .and_then(|x| x.checked_mul(rn))
        .filter(|&x| x <= cap)
        .ok_or(Error::ResourceLimit { dim: size.saturating_mul(dn).saturating_mul(rn), cap })?;

    // ψ as a d×r amplitude matrix; its n-th Kronecker power is ψ^{⊗n} with A factors before Z factors
    let base = CMatrix::from_fn(d, r, |a, z| psi.amplitudes()[a * r + z]);
    let mut power = base.clone();
    for _ in 1..n {
        power = power.kronecker(&base);
    }
    let mut amps = CVector::zeros(total);
    for k in 0..size {
        let rotated = ens.left_multiply_member(k, &power)?.scale(ens.weight(k).sqrt());
        let offset = k * dn * rn;
        for a in 0..dn {
            for z in 0..rn {
                amps[offset + a * rn + z] = rotated[(a, z)];
            }
        }
    }
    let state = PureState::from_trusted(amps);
    let dims = [size, dn, rn];
    let s_e = von_neumann_entropy(&state.reduce(&dims, &[0])?);
    let s_ez = von_neumann_entropy(&state.reduce(&dims, &[0, 2])?);
    let s_z = von_neumann_entropy(&state.reduce(&dims, &[2])?);
    let s_a = von_neumann_entropy(&state.reduce(&dims, &[1])?);
    let rho_n = tensor_power_with_cap(rho, n, cap)?;
    let s_output = von_neumann_entropy(&apply_ensemble(&rho_n, ens)?);
    Ok(ConverseReport {
        n,
        size,
        log2_size: (size as f64).log2(),
        s_e,
        s_ez,
        s_z,
        s_a,
        s_output,
        n_s_rho: n as f64 * von_neumann_entropy(rho),
    })
}

/// `S(Θ(𝒪(ρ̂))) ≥ Σ_k w_k S(Θ(O_k ρ̂ O_kᵀ)) ≥ S(Θ(ρ̂))` for `ρ̂ = ρ^{⊗n}`.
///
/// Returns the concavity step and the covariance step; the second is an equality.
pub fn concavity_step_check(rho: &DensityMatrix, ens: &UnitaryEnsemble, n: usize) -> Result<(Check, Check)> {
    let size = ens
        .group_size()
        .ok_or_else(|| Error::InvalidInput("concavity check needs a finite ensemble".into()))?;
    let power = tensor_power_with_cap(rho, n, dim_cap())?;
    let out = apply_ensemble(&power, ens)?;
    let lhs = von_neumann_entropy(&theta_state(&out));
    let mut mid = 0.0;
    for k in 0..size {
        let rotated = DensityMatrix::from_trusted(ens.conjugate_member(k, power.matrix())?);
        mid += ens.weight(k) * von_neumann_entropy(&theta_state(&rotated));
    }
    let base = von_neumann_entropy(&theta_state(&power));
    Ok((Check::new(mid, lhs), Check::new(base, mid)))
}
