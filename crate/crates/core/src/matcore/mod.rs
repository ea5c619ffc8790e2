//! Dense complex matrix kernel.
//!
//! Everything here works on `nalgebra` dense matrices over `Complex64`. The
//! validated wrappers ([`DensityMatrix`], [`PureState`], [`CovariantUnitary`])
//! check their invariants once at construction; operations that are known to
//! preserve them build the wrappers without re-checking.

mod eigen;
mod entropy;
mod io;
pub(crate) mod random;
mod tensor;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use entropy::{relative_entropy, trace_norm, von_neumann_entropy, xlog2x};
pub use io::{matrix_from_json, matrix_to_json, read_matrix_file, write_matrix_file, MatrixFile};
pub use random::{haar_orthogonal, random_density, random_pure, Seed};
pub use tensor::{kron, partial_trace, purify, tensor_power, tensor_power_with_cap};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Eigenvalues at or below this are treated as exact zeros.
pub const EIG_CLIP: f64 = 1e-12;

/// Tolerance for Hermiticity and unit trace of a density matrix.
pub const STATE_TOL: f64 = 1e-10;

pub const DEFAULT_DIM_CAP: usize = 4096;

/// Environment variable that overrides [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "IMLAB_DIM_CAP";

/// Current dimension cap, read from `IMLAB_DIM_CAP` when set.
pub fn dim_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_DIM_CAP)
}

/// `base^exp`, or a resource-limit error when it exceeds `cap` (or overflows).
pub fn checked_dim(base: usize, exp: usize, cap: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..exp {
        dim = match dim.checked_mul(base) {
            Some(v) if v <= cap => v,
            _ => {
                return Err(Error::ResourceLimit {
                    dim: dim.saturating_mul(base),
                    cap,
                })
            }
        };
    }
    Ok(dim)
}

/// Largest entry magnitude.
pub trait MaxAbs {
    fn max_abs(&self) -> f64;
}

impl MaxAbs for CMatrix {
    fn max_abs(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl MaxAbs for RMatrix {
    fn max_abs(&self) -> f64 {
        self.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Promote a real matrix to a complex one.
pub fn complexify(m: &RMatrix) -> CMatrix {
    m.map(|x| c(x, 0.0))
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn ensure_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..d {
        for k in j..d {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

/// Hermitian part `(M + M†)/2`, used to strip rounding noise.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// A valid density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let d = ensure_square(&m, "density matrix")?;
        if d == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm = hermitian_defect(&m);
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {:.12} + {:.3e}i is not 1",
                tr.re, tr.im
            )));
        }
        let m = hermitize(&m);
        let min_eig = hermitian_eigen(&m).values.last().copied().unwrap_or(0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self(m))
    }

    /// Wrap a matrix that is a state by construction (channel outputs, products).
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self(hermitize(&m))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalised) vector.
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState(
                "zero or non-finite state vector".into(),
            ));
        }
        let v = psi.unscale(norm);
        Ok(Self::from_trusted(&v * v.adjoint()))
    }

    /// `diag(p)` for a probability vector.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidState("empty probability vector".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidState(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("probabilities sum to {s}")));
        }
        let d = probs.len();
        Ok(Self(CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                c(probs[i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        })))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(identity(d).unscale(d as f64))
    }

    /// `(|0⟩ + i|1⟩)/√2`, the maximally imaginary qubit state.
    pub fn plus_i() -> Self {
        let psi = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        Self::from_pure(&psi).expect("static state")
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Spectrum in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.0).values
    }

    /// Number of eigenvalues above [`EIG_CLIP`].
    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&x| x > EIG_CLIP).count()
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::Shape(format!(
                "operator is {}x{}, state dimension {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        Ok(Self::from_trusted(u * &self.0 * u.adjoint()))
    }
}

/// A normalised state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(CVector);

impl PureState {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        Ok(Self(amplitudes))
    }

    pub(crate) fn from_trusted(amplitudes: CVector) -> Self {
        Self(amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(&self.0 * self.0.adjoint())
    }

    /// Reduced state on the factors in `keep` (ascending factor order), computed
    /// straight from the amplitudes without forming `|ψ⟩⟨ψ|`.
    pub fn reduce(&self, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
        let split = tensor::FactorSplit::new(dims, keep, self.dim())?;
        let (kd, td) = (split.kept_dim, split.traced_dim);
        // amplitudes as a kept x traced matrix
        let mut m = CMatrix::zeros(kd, td);
        for k in 0..kd {
            for t in 0..td {
                m[(k, t)] = self.0[split.index(k, t)];
            }
        }
        Ok(DensityMatrix::from_trusted(&m * m.adjoint()))
    }
}

/// A real orthogonal matrix. Conjugation by such a matrix commutes with the
/// transpose in the reference basis, so these are the covariant free unitaries.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantUnitary(RMatrix);

impl CovariantUnitary {
    pub const ORTHO_TOL: f64 = 1e-10;

    pub fn new(o: RMatrix) -> Result<Self> {
        if o.nrows() != o.ncols() {
            return Err(Error::Shape(format!(
                "orthogonal matrix must be square, got {}x{}",
                o.nrows(),
                o.ncols()
            )));
        }
        let defect = (&o * o.transpose() - RMatrix::identity(o.nrows(), o.nrows())).max_abs();
        if !(defect <= Self::ORTHO_TOL) {
            return Err(Error::InvalidInput(format!(
                "matrix is not orthogonal (defect {defect:.3e})"
            )));
        }
        Ok(Self(o))
    }

    /// Accept a complex matrix whose entries are real within `1e-12`.
    pub fn from_complex(u: &CMatrix) -> Result<Self> {
        let max_im = u.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if max_im > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "matrix has imaginary entries (max {max_im:.3e})"
            )));
        }
        Self::new(u.map(|z| z.re))
    }

    pub(crate) fn from_trusted(o: RMatrix) -> Self {
        Self(o)
    }

    pub fn identity(d: usize) -> Self {
        Self(RMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn real(&self) -> &RMatrix {
        &self.0
    }

    pub fn to_complex(&self) -> CMatrix {
        complexify(&self.0)
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// `O M Oᵀ` for an arbitrary complex matrix.
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        let o = self.to_complex();
        &o * m * o.transpose()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "unitary dimension {} vs state dimension {}",
                self.dim(),
                rho.dim()
            )));
        }
        Ok(DensityMatrix::from_trusted(self.conjugate(rho.matrix())))
    }
}
