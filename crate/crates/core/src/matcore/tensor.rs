use super::{
    checked_dim, dim_cap, hermitian_eigen, CMatrix, CVector, DensityMatrix, PureState, EIG_CLIP,
};
use crate::error::{Error, Result};

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `ρ^{⊗n}` in the lexicographic composite basis, bounded by [`dim_cap`](super::dim_cap).
pub fn tensor_power(rho: &DensityMatrix, n: usize) -> Result<DensityMatrix> {
    tensor_power_with_cap(rho, n, dim_cap())
}

pub fn tensor_power_with_cap(rho: &DensityMatrix, n: usize, cap: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("tensor power needs n >= 1".into()));
    }
    checked_dim(rho.dim(), n, cap)?;
    let mut out = rho.matrix().clone();
    for _ in 1..n {
        out = out.kronecker(rho.matrix());
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Index bookkeeping for splitting a composite index into kept and traced parts.
pub(crate) struct FactorSplit {
    pub kept_dim: usize,
    pub traced_dim: usize,
    table: Vec<usize>,
}

impl FactorSplit {
    pub fn new(dims: &[usize], keep: &[usize], total: usize) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Shape("factor dimensions must be positive".into()));
        }
        let prod: usize = dims.iter().product();
        if prod != total {
            return Err(Error::Shape(format!(
                "factor dimensions {dims:?} multiply to {prod}, state dimension is {total}"
            )));
        }
        let mut kept = vec![false; dims.len()];
        for &k in keep {
            if k >= dims.len() {
                return Err(Error::Shape(format!(
                    "kept factor {k} out of range for {} factors",
                    dims.len()
                )));
            }
            kept[k] = true;
        }
        let kept_dim: usize = dims
            .iter()
            .zip(&kept)
            .filter(|(_, &k)| k)
            .map(|(d, _)| d)
            .product();
        let traced_dim = total / kept_dim;
        // Row-major strides of the full index.
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let mut table = vec![0usize; total];
        let mut digits = vec![0usize; dims.len()];
        for k in 0..kept_dim {
            for t in 0..traced_dim {
                // split k and t into digits over kept / traced factors, last factor fastest
                let (mut kr, mut tr) = (k, t);
                for f in (0..dims.len()).rev() {
                    if kept[f] {
                        digits[f] = kr % dims[f];
                        kr /= dims[f];
                    } else {
                        digits[f] = tr % dims[f];
                        tr /= dims[f];
                    }
                }
                table[k * traced_dim + t] = digits.iter().zip(&strides).map(|(d, s)| d * s).sum();
            }
        }
        Ok(Self {
            kept_dim,
            traced_dim,
            table,
        })
    }

    pub fn index(&self, kept: usize, traced: usize) -> usize {
        self.table[kept * self.traced_dim + traced]
    }
}

/// Reduced state on the factors listed in `keep`; kept factors stay in ascending order.
pub fn partial_trace(
    state: &DensityMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<DensityMatrix> {
    let split = FactorSplit::new(dims, keep, state.dim())?;
    let (kd, td) = (split.kept_dim, split.traced_dim);
    let m = state.matrix();
    let mut out = CMatrix::zeros(kd, kd);
    for a in 0..kd {
        for b in 0..kd {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for t in 0..td {
                acc += m[(split.index(a, t), split.index(b, t))];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Purification `Σ_i √p_i |v_i⟩_A |i⟩_Z` with `dim Z = rank ρ`.
///
/// The amplitude of `|a⟩_A|z⟩_Z` sits at index `a·rank + z`.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let eig = hermitian_eigen(rho.matrix());
    let kept: Vec<usize> = (0..rho.dim())
        .filter(|&i| eig.values[i] > EIG_CLIP)
        .collect();
    let rank = kept.len().max(1);
    let total: f64 = kept.iter().map(|&i| eig.values[i]).sum();
    let d = rho.dim();
    let mut psi = CVector::zeros(d * rank);
    for (z, &i) in kept.iter().enumerate() {
        let amp = (eig.values[i] / total).sqrt();
        for a in 0..d {
            psi[a * rank + z] = eig.vectors[(a, i)] * amp;
        }
    }
    PureState::from_trusted(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c;
    use crate::matcore::MaxAbs;

    #[test]
    fn tensor_power_examples() {
        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        assert_eq!(tensor_power(&rho, 1).unwrap(), rho);
        let sq = tensor_power(&rho, 2).unwrap();
        let want = [0.5625, 0.1875, 0.1875, 0.0625];
        for (i, w) in want.iter().enumerate() {
            assert!((sq.matrix()[(i, i)].re - w).abs() < 1e-15);
        }
        let mm = tensor_power(&DensityMatrix::maximally_mixed(2), 3).unwrap();
        assert!((mm.matrix() - CMatrix::identity(8, 8).unscale(8.0)).max_abs() < 1e-15);
        assert_eq!(
            tensor_power_with_cap(&rho, 5, 16),
            Err(Error::ResourceLimit { dim: 32, cap: 16 })
        );
    }

    #[test]
    fn partial_trace_examples() {
        let a = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        let b = DensityMatrix::plus_i();
        let ab = DensityMatrix::from_trusted(kron(a.matrix(), b.matrix()));
        assert!(
            (partial_trace(&ab, &[2, 2], &[0]).unwrap().matrix() - a.matrix()).max_abs() < 1e-15
        );
        assert!(
            (partial_trace(&ab, &[2, 2], &[1]).unwrap().matrix() - b.matrix()).max_abs() < 1e-15
        );

        let s = 0.5f64.sqrt();
        let bell = CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let bell = DensityMatrix::from_pure(&bell).unwrap();
        for keep in [0, 1] {
            let r = partial_trace(&bell, &[2, 2], &[keep]).unwrap();
            assert!((r.matrix() - CMatrix::identity(2, 2).unscale(2.0)).max_abs() < 1e-15);
        }

        let mut ghz = CVector::zeros(8);
        ghz[0] = c(s, 0.0);
        ghz[7] = c(s, 0.0);
        let ghz = DensityMatrix::from_pure(&ghz).unwrap();
        let r = partial_trace(&ghz, &[2, 2, 2], &[0, 1]).unwrap();
        let mut want = CMatrix::zeros(4, 4);
        want[(0, 0)] = c(0.5, 0.0);
        want[(3, 3)] = c(0.5, 0.0);
        assert!((r.matrix() - want).max_abs() < 1e-15);

        assert!(matches!(
            partial_trace(&ghz, &[2, 3], &[0]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn partial_trace_of_middle_factor() {
        // |0⟩⟨0| ⊗ 𝕀/3 ⊗ plus-i, trace the middle factor
        let p0 = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let mid = DensityMatrix::maximally_mixed(3);
        let pi = DensityMatrix::plus_i();
        let full = DensityMatrix::from_trusted(kron(&kron(p0.matrix(), mid.matrix()), pi.matrix()));
        let r = partial_trace(&full, &[2, 3, 2], &[0, 2]).unwrap();
        assert!((r.matrix() - kron(p0.matrix(), pi.matrix())).max_abs() < 1e-15);
        let r = partial_trace(&full, &[2, 3, 2], &[1]).unwrap();
        assert!((r.matrix() - mid.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn purify_examples() {
        let pure = DensityMatrix::plus_i();
        let psi = purify(&pure);
        assert_eq!(psi.dim(), 2);
        assert!((psi.density().matrix() - pure.matrix()).max_abs() < 1e-12);

        let mm = DensityMatrix::maximally_mixed(2);
        let psi = purify(&mm);
        assert_eq!(psi.dim(), 4);
        let schmidt = psi.reduce(&[2, 2], &[1]).unwrap().eigenvalues();
        assert!(schmidt.iter().all(|&x| (x - 0.5).abs() < 1e-12));

        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        let psi = purify(&rho);
        let a = psi.amplitudes();
        assert!((a[0] - c(0.75f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!((a[3] - c(0.5, 0.0)).norm() < 1e-12);
        assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
    }
}
