use serde::{Deserialize, Serialize};

use super::Check;
use crate::error::{Error, Result};
use crate::imaginarity::{is_covariant_unitary, theta_state};
use crate::matcore::{hermitian_eigen, hermitize, trace_norm, von_neumann_entropy, CMatrix, CovariantUnitary, DensityMatrix};

/// Spectrum tolerance for an effect `0 ≤ X ≤ 𝕀`.
const EFFECT_TOL: f64 = 1e-10;

/// `η(x) = x − x log₂ x` for `x ≤ 1/e`, `x + 1/e` above.
///
/// The breakpoint and the `1/e` offset are kept as printed even though base-2
/// logs make the two branches disagree at `x = 1/e`.
pub fn fannes_eta(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("η is defined for x ≥ 0, got {x}")));
    }
    let inv_e = (-1.0f64).exp();
    Ok(if x <= inv_e {
        if x == 0.0 {
            0.0
        } else {
            x - x * x.log2()
        }
    } else {
        x + inv_e
    })
}

/// `|S(ρ) − S(σ)| ≤ η(‖ρ−σ‖₁)·log₂ d`.
pub fn check_fannes(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Check> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape(format!("dimensions {} and {} differ", rho.dim(), sigma.dim())));
    }
    let eps = trace_norm(&(rho.matrix() - sigma.matrix()))?;
    let lhs = (von_neumann_entropy(rho) - von_neumann_entropy(sigma)).abs();
    let bound = fannes_eta(eps)? * (rho.dim() as f64).log2();
    Ok(Check::new(lhs, bound))
}

/// Gentle-measurement instance: `ε = 1 − tr(ρX)`, gap `‖ρ − √X ρ √X‖₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GentleCheck {
    pub epsilon: f64,
    pub lhs: f64,
    /// `2√(2ε)`.
    pub bound: f64,
    /// `2√2·ε`, diagnostic only.
    pub literal_bound: f64,
}

impl GentleCheck {
    pub fn standard(&self) -> Check {
        Check::new(self.lhs, self.bound)
    }

    pub fn literal(&self) -> Check {
        Check::new(self.lhs, self.literal_bound)
    }
}

pub fn check_gentle(rho: &DensityMatrix, x: &CMatrix) -> Result<GentleCheck> {
    if x.shape() != (rho.dim(), rho.dim()) {
        return Err(Error::Shape(format!(
            "effect is {}x{}, state dimension {}",
            x.nrows(),
            x.ncols(),
            rho.dim()
        )));
    }
    if crate::matcore::hermitian_defect(x) > EFFECT_TOL {
        return Err(Error::InvalidInput("effect must be Hermitian".into()));
    }
    let eig = hermitian_eigen(&hermitize(x));
    let (hi, lo) = (eig.values[0], *eig.values.last().expect("non-empty"));
    if lo < -EFFECT_TOL || hi > 1.0 + EFFECT_TOL {
        return Err(Error::InvalidInput(format!("effect spectrum [{lo:.3e}, {hi:.3e}] leaves [0, 1]")));
    }
    let sqrt_x = eig.map_spectrum(|v| v.clamp(0.0, 1.0).sqrt());
    let post = &sqrt_x * rho.matrix() * &sqrt_x;
    let lhs = trace_norm(&(rho.matrix() - post))?;
    let epsilon = (1.0 - (rho.matrix() * x).trace().re).max(0.0);
    Ok(GentleCheck {
        epsilon,
        lhs,
        bound: 2.0 * (2.0 * epsilon).sqrt(),
        literal_bound: 2.0 * 2f64.sqrt() * epsilon,
    })
}

/// `S(ρ) ≤ S(Θ(ρ))`.
pub fn check_l4(rho: &DensityMatrix) -> Check {
    Check::new(von_neumann_entropy(rho), von_neumann_entropy(&theta_state(rho)))
}

/// `|S(Θ(OρOᵀ)) − S(Θ(ρ))| ≤ 0`; the matrix must be real orthogonal.
pub fn check_l6(rho: &DensityMatrix, o: &CMatrix) -> Result<Check> {
    if !is_covariant_unitary(o, CovariantUnitary::ORTHO_TOL) {
        return Err(Error::InvalidInput("O is not a real orthogonal matrix".into()));
    }
    let o = CovariantUnitary::from_complex(o)?;
    let rotated = o.apply(rho)?;
    let lhs = (von_neumann_entropy(&theta_state(&rotated)) - von_neumann_entropy(&theta_state(rho))).abs();
    Ok(Check::new(lhs, 0.0))
}
