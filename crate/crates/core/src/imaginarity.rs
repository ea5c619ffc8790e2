//! Imaginarity structure relative to the fixed reference basis.
//!
//! The symmetrizing channel `Θ(M) = (M + Mᵀ)/2` projects onto real symmetric
//! matrices. For a state `ρ`, `Θ(ρ) = Re ρ` is the closest real state in relative
//! entropy, which gives the closed form `I_r(ρ) = S(Θ(ρ)) − S(ρ)` for the relative
//! entropy of imaginarity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    c, dim_cap, ensure_square, hermitian_eigen, tensor_power_with_cap, trace_norm,
    von_neumann_entropy, CMatrix, CVector, CovariantUnitary, DensityMatrix, MaxAbs, RMatrix,
};

/// Eigenvalues of `iA` at or below this count as zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-10;

/// Transpose in the reference basis. For an `n`-fold composite in the
/// lexicographic basis this equals the product of the per-factor transposes.
pub fn transpose_ref(m: &CMatrix) -> Result<CMatrix> {
    ensure_square(m, "transpose argument")?;
    Ok(m.transpose())
}

/// `Θ(M) = (M + Mᵀ)/2`.
pub fn theta(m: &CMatrix) -> Result<CMatrix> {
    ensure_square(m, "Θ argument")?;
    Ok((m + m.transpose()).scale(0.5))
}

/// `Θ(ρ)`, again a state.
pub fn theta_state(rho: &DensityMatrix) -> DensityMatrix {
    let m = rho.matrix();
    DensityMatrix::from_trusted((m + m.transpose()).scale(0.5))
}

/// `(Re ρ, Im ρ)` with `Re ρ = (ρ+ρᵀ)/2` real symmetric and `Im ρ = (ρ−ρᵀ)/(2i)` real antisymmetric.
pub fn re_im_parts(rho: &DensityMatrix) -> (RMatrix, RMatrix) {
    let m = rho.matrix();
    let re = (m + m.transpose()).scale(0.5).map(|z| z.re);
    let im = (m - m.transpose()).scale(0.5).map(|z| z.im);
    (re, im)
}

/// `ρ` is real iff `‖ρ − ρᵀ‖₁ ≤ tol`.
pub fn is_real_state(rho: &DensityMatrix, tol: f64) -> bool {
    let m = rho.matrix();
    trace_norm(&(m - m.transpose()))
        .map(|x| x <= tol)
        .unwrap_or(false)
}

/// Kraus operators with real entries satisfying completeness.
pub fn is_real_operation(kraus: &[CMatrix], tol: f64) -> bool {
    let Some(first) = kraus.first() else {
        return false;
    };
    let (rows, cols) = first.shape();
    if kraus.iter().any(|k| k.shape() != (rows, cols)) {
        return false;
    }
    if kraus
        .iter()
        .flat_map(|k| k.iter())
        .any(|z| z.im.abs() > tol)
    {
        return false;
    }
    let mut sum = CMatrix::zeros(cols, cols);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    (sum - CMatrix::identity(cols, cols)).max_abs() <= tol
}

/// Unitary with real entries, i.e. a real orthogonal matrix; conjugation by it commutes with Θ.
pub fn is_covariant_unitary(u: &CMatrix, tol: f64) -> bool {
    if u.nrows() != u.ncols() {
        return false;
    }
    let d = u.nrows();
    if u.iter().any(|z| z.im.abs() > tol) {
        return false;
    }
    (u * u.adjoint() - CMatrix::identity(d, d)).max_abs() <= tol
}

/// Relative entropy of imaginarity `S(Θ(ρ)) − S(ρ)` in bits.
pub fn rei(rho: &DensityMatrix) -> f64 {
    von_neumann_entropy(&theta_state(rho)) - von_neumann_entropy(rho)
}

/// `‖ρ − Θ(ρ)‖₁`, the trace norm of `i·Im ρ`. The true trace distance to the set
/// of real states lies in `[imag_distance/2, imag_distance]`.
pub fn imag_distance(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    trace_norm(&(m - m.transpose()).scale(0.5)).unwrap_or(f64::NAN)
}

/// `I_r(ρ^{⊗n})` and `I_r(ρ^{⊗n})/n` for `n = 1..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReiSequence {
    pub rho_label: String,
    pub values: Vec<ReiPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReiPoint {
    pub n: usize,
    pub rei: f64,
    pub rei_per_copy: f64,
}

pub fn rei_sequence(rho: &DensityMatrix, n_max: usize, label: &str) -> Result<ReiSequence> {
    rei_sequence_with_cap(rho, n_max, label, dim_cap())
}

pub fn rei_sequence_with_cap(
    rho: &DensityMatrix,
    n_max: usize,
    label: &str,
    cap: usize,
) -> Result<ReiSequence> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    // fail before doing any work
    crate::matcore::checked_dim(rho.dim(), n_max, cap)?;
    let values = (1..=n_max)
        .map(|n| {
            let power = tensor_power_with_cap(rho, n, cap)?;
            let value = rei(&power);
            Ok(ReiPoint {
                n,
                rei: value,
                rei_per_copy: value / n as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReiSequence {
        rho_label: label.to_string(),
        values,
    })
}

/// `O A Oᵀ = 0_{d−2r} ⊕_k λ_k [[0,1],[−1,0]]` for a real antisymmetric `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewCanonicalForm {
    pub o: CovariantUnitary,
    /// Block strengths, descending.
    pub lambdas: Vec<f64>,
    pub r: usize,
    pub d: usize,
}

impl SkewCanonicalForm {
    /// The block matrix `0_{d−2r} ⊕_k λ_k [[0,1],[−1,0]]`.
    pub fn block_matrix(&self) -> RMatrix {
        let mut b = RMatrix::zeros(self.d, self.d);
        let offset = self.d - 2 * self.r;
        for (k, &lam) in self.lambdas.iter().enumerate() {
            let i = offset + 2 * k;
            b[(i, i + 1)] = lam;
            b[(i + 1, i)] = -lam;
        }
        b
    }

    /// `max |O A Oᵀ − blocks|`.
    pub fn residual(&self, a: &RMatrix) -> f64 {
        let o = self.o.real();
        (o * a * o.transpose() - self.block_matrix()).max_abs()
    }
}

/// Canonical form of a real antisymmetric matrix.
///
/// `iA` is Hermitian with spectrum `±λ_k` and zeros. For an eigenvector
/// `x + iy` of `iA` with eigenvalue `λ > 0`, `Ax = λy` and `Ay = −λx`, with
/// `x ⟂ y` and `|x| = |y|`, so the rows `√2·y, √2·x` of `O` carry one block.
/// Zero modes are completed to an orthonormal basis by Gram–Schmidt.
pub fn skew_canonical_form(a: &RMatrix) -> Result<SkewCanonicalForm> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "matrix is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let d = a.nrows();
    let sym_defect = (a + a.transpose()).max_abs();
    if sym_defect > 1e-10 || a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "matrix is not antisymmetric (‖A + Aᵀ‖ = {sym_defect:.3e})"
        )));
    }
    let ia = a.map(|x| c(0.0, x));
    let eig = hermitian_eigen(&ia);

    let mut lambdas = Vec::new();
    let mut block_rows: Vec<CVector> = Vec::new();
    for (i, &lam) in eig.values.iter().enumerate() {
        if lam <= ZERO_MODE_TOL {
            break;
        }
        lambdas.push(lam);
        block_rows.push(eig.vector(i));
    }
    let r = lambdas.len();

    let mut rows: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(d);
    for v in &block_rows {
        let x = v.map(|z| z.re * std::f64::consts::SQRT_2);
        let y = v.map(|z| z.im * std::f64::consts::SQRT_2);
        rows.push(y);
        rows.push(x);
    }
    // Re-orthonormalise the block vectors against rounding drift.
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(d);
    for v in rows {
        basis.push(gram_schmidt_step(&basis, v).expect("block vectors are independent"));
    }
    let mut zero_modes = Vec::new();
    for j in 0..d {
        if basis.len() + zero_modes.len() == d {
            break;
        }
        let mut all: Vec<_> = basis.clone();
        all.extend(zero_modes.iter().cloned());
        if let Some(u) = gram_schmidt_step(
            &all,
            nalgebra::DVector::from_fn(d, |i, _| if i == j { 1.0 } else { 0.0 }),
        ) {
            zero_modes.push(u);
        }
    }

    let mut o = RMatrix::zeros(d, d);
    for (i, row) in zero_modes.iter().chain(basis.iter()).enumerate() {
        o.set_row(i, &row.transpose());
    }
    Ok(SkewCanonicalForm {
        o: CovariantUnitary::from_trusted(o),
        lambdas,
        r,
        d,
    })
}

fn gram_schmidt_step(
    basis: &[nalgebra::DVector<f64>],
    mut v: nalgebra::DVector<f64>,
) -> Option<nalgebra::DVector<f64>> {
    // two passes for stability
    for _ in 0..2 {
        for b in basis {
            let p = b.dot(&v);
            v -= b * p;
        }
    }
    let n = v.norm();
    (n > 1e-8).then(|| v / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{haar_orthogonal, random_density, relative_entropy, tensor_power, Seed};

    fn sigma_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    #[test]
    fn transpose_examples() {
        let p = DensityMatrix::plus_i();
        let t = transpose_ref(p.matrix()).unwrap();
        let want =
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.5, 0.0)]);
        assert!((t - want).max_abs() < 1e-15);
        let rho = random_density(2, Seed::new(1));
        let rr = rho.matrix().kronecker(rho.matrix());
        let lhs = transpose_ref(&rr).unwrap();
        let rhs = rho
            .matrix()
            .transpose()
            .kronecker(&rho.matrix().transpose());
        assert_eq!(lhs, rhs);
        assert!(matches!(
            transpose_ref(&CMatrix::zeros(2, 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn theta_examples() {
        let p = DensityMatrix::plus_i();
        let t = theta(p.matrix()).unwrap();
        assert!((t.clone() - CMatrix::identity(2, 2).scale(0.5)).max_abs() < 1e-15);
        assert_eq!(theta(&t).unwrap(), t);
        let real = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        assert_eq!(&theta(real.matrix()).unwrap(), real.matrix());
    }

    #[test]
    fn re_im_examples() {
        let (re, im) = re_im_parts(&DensityMatrix::plus_i());
        assert!((re - RMatrix::identity(2, 2) * 0.5).max_abs() < 1e-15);
        let want = RMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert!((im.clone() - want).max_abs() < 1e-15);
        assert!((im.clone() + im.transpose()).max_abs() < 1e-12);
        let rho = random_density(4, Seed::new(3));
        let (re, im) = re_im_parts(&rho);
        let back = re.map(|x| c(x, 0.0)) + im.map(|x| c(0.0, x));
        assert!((back - rho.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn realness_predicates() {
        assert!(is_real_state(
            &DensityMatrix::diagonal(&[0.2, 0.8]).unwrap(),
            1e-12
        ));
        assert!(!is_real_state(&DensityMatrix::plus_i(), 1e-6));
        let rho = random_density(5, Seed::new(9));
        assert!(is_real_state(&theta_state(&rho), 1e-10));

        let id = CMatrix::identity(2, 2);
        let s =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        assert!(is_real_operation(std::slice::from_ref(&id), 1e-12));
        assert!(!is_real_operation(std::slice::from_ref(&s), 1e-12));
        let p0 =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let p1 =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(is_real_operation(&[p0.clone(), p1], 1e-12));
        assert!(!is_real_operation(&[p0], 1e-12), "incomplete Kraus set");

        assert!(is_covariant_unitary(&sigma_z(), 1e-12));
        assert!(!is_covariant_unitary(&s, 1e-12));
        let xz =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(is_covariant_unitary(&xz, 1e-12));
    }

    #[test]
    fn rei_examples() {
        assert!((rei(&DensityMatrix::plus_i()) - 1.0).abs() < 1e-12);
        assert!(rei(&DensityMatrix::diagonal(&[0.1, 0.2, 0.7]).unwrap()).abs() < 1e-12);
        for k in 0..20 {
            let rho = random_density(2 + k % 5, Seed::new(k as u64));
            let d = relative_entropy(&rho, &theta_state(&rho)).unwrap();
            assert!((rei(&rho) - d).abs() < 1e-8);
        }
    }

    #[test]
    fn rei_sequence_plus_i() {
        let seq = rei_sequence(&DensityMatrix::plus_i(), 3, "plus-i").unwrap();
        for p in &seq.values {
            assert!((p.rei - 1.0).abs() < 1e-9);
            assert!((p.rei_per_copy - 1.0 / p.n as f64).abs() < 1e-9);
        }
        let real = rei_sequence(&DensityMatrix::diagonal(&[0.4, 0.6]).unwrap(), 4, "diag").unwrap();
        assert!(real.values.iter().all(|p| p.rei.abs() < 1e-12));
        assert!(matches!(
            rei_sequence_with_cap(&DensityMatrix::plus_i(), 5, "x", 16),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn theta_of_plus_i_power_is_two_orthogonal_pure_states() {
        // brute force: Θ(ρ^{⊗n}) = ½(P + Q) with P = |+i⟩⟨+i|^{⊗n}, Q = |−i⟩⟨−i|^{⊗n}
        let p = DensityMatrix::plus_i();
        let q = DensityMatrix::from_trusted(p.matrix().transpose());
        for n in 1..=4 {
            let pn = tensor_power(&p, n).unwrap();
            let qn = tensor_power(&q, n).unwrap();
            let mix = (pn.matrix() + qn.matrix()).scale(0.5);
            assert!((theta_state(&pn).matrix() - mix).max_abs() < 1e-14);
        }
    }

    #[test]
    fn imag_distance_examples() {
        assert!((imag_distance(&DensityMatrix::plus_i()) - 1.0).abs() < 1e-12);
        assert!(imag_distance(&DensityMatrix::maximally_mixed(3)).abs() < 1e-15);
    }

    #[test]
    fn skew_form_examples() {
        let zero = skew_canonical_form(&RMatrix::zeros(3, 3)).unwrap();
        assert_eq!(zero.r, 0);
        assert_eq!(zero.o.real(), &RMatrix::identity(3, 3));

        let lam = 0.7;
        let a = RMatrix::from_row_slice(2, 2, &[0.0, lam, -lam, 0.0]);
        let f = skew_canonical_form(&a).unwrap();
        assert_eq!(f.r, 1);
        assert!((f.lambdas[0] - lam).abs() < 1e-12);
        assert!(f.residual(&a) < 1e-12);

        for k in 0..10 {
            let rho = random_density(5, Seed::new(100 + k));
            let (_, im) = re_im_parts(&rho);
            let f = skew_canonical_form(&im).unwrap();
            assert!(f.r <= 2);
            assert!(f.residual(&im) < 1e-9, "residual {}", f.residual(&im));
            let o = f.o.real();
            assert!((o * o.transpose() - RMatrix::identity(5, 5)).max_abs() < 1e-10);
            assert!(f.lambdas.windows(2).all(|w| w[0] >= w[1]));
        }
        assert!(matches!(
            skew_canonical_form(&RMatrix::identity(2, 2)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn skew_form_degenerate_blocks() {
        // two equal blocks rotated by a random orthogonal matrix
        let mut b = RMatrix::zeros(5, 5);
        for i in [1, 3] {
            b[(i, i + 1)] = 0.3;
            b[(i + 1, i)] = -0.3;
        }
        let q = haar_orthogonal(5, Seed::new(77));
        let a = q.real() * b * q.real().transpose();
        let f = skew_canonical_form(&a).unwrap();
        assert_eq!(f.r, 2);
        assert!(f.residual(&a) < 1e-9);
    }

    #[test]
    fn covariance_identity_for_orthogonal_matrices() {
        for k in 0..10 {
            let o = haar_orthogonal(4, Seed::new(k));
            let x = random_density(4, Seed::new(1000 + k)).into_matrix();
            let lhs = theta(&o.conjugate(&x)).unwrap();
            let rhs = o.conjugate(&theta(&x).unwrap());
            assert!(trace_norm(&(lhs - rhs)).unwrap() <= 1e-10);
        }
    }
}
