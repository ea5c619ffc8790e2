use super::{
    ensure_square, hermitian_defect, hermitian_eigen, CMatrix, DensityMatrix, MaxAbs, EIG_CLIP,
};
use crate::error::Result;

/// `x log₂ x` with the convention `0 log 0 = 0`; inputs at or below the clip count as zero.
pub fn xlog2x(x: f64) -> f64 {
    if x <= EIG_CLIP {
        0.0
    } else {
        x * x.log2()
    }
}

/// `S(ρ) = −tr ρ log₂ ρ` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let s: f64 = -rho.eigenvalues().into_iter().map(xlog2x).sum::<f64>();
    s.max(0.0)
}

/// Weight `ρ` places outside the support of `σ` beyond which the divergence is infinite.
const SUPPORT_TOL: f64 = 1e-10;

/// `D(ρ‖σ) = tr ρ log₂ ρ − tr ρ log₂ σ` in bits.
///
/// Returns `f64::INFINITY` when the support of `ρ` is not contained in the
/// support of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(crate::Error::Shape(format!(
            "relative entropy of {}-dim and {}-dim states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let neg_s: f64 = rho.eigenvalues().into_iter().map(xlog2x).sum();
    let es = hermitian_eigen(sigma.matrix());
    let mut cross = 0.0;
    let mut outside = 0.0;
    for (i, &lam) in es.values.iter().enumerate() {
        let v = es.vectors.column(i);
        let weight = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        if lam > EIG_CLIP {
            cross += weight * lam.log2();
        } else {
            outside += weight.max(0.0);
        }
    }
    if outside > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    Ok(neg_s - cross)
}

/// Trace norm: sum of singular values (sum of |eigenvalues| for Hermitian input).
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    ensure_square(m, "trace-norm argument")?;
    let scale = m.max_abs().max(1.0);
    if hermitian_defect(m) <= 1e-14 * scale {
        return Ok(hermitian_eigen(m).values.iter().map(|x| x.abs()).sum());
    }
    Ok(m.clone().svd(false, false).singular_values.iter().sum())
}
