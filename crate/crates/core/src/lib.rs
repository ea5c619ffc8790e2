//! Numerical laboratory for the resource theory of imaginarity.
//!
//! States are dense complex matrices written in a fixed reference basis. A state is
//! *real* (free) when it equals its transpose in that basis, and the covariant free
//! unitaries are exactly the real orthogonal matrices. The crate provides:
//!
//! - [`matcore`]: Hermitian eigendecomposition, entropies, norms, tensor algebra,
//!   purification and seeded sampling.
//! - [`imaginarity`]: the symmetrizing channel `Θ(M) = (M + Mᵀ)/2`, the relative
//!   entropy of imaginarity and its finite-copy sequence, realness predicates and
//!   the canonical form of real antisymmetric matrices.
//! - [`protocols`]: covariant unitary ensembles, twirls and randomness-cost searches.
//! - [`typicality`]: δ-typical sets (classical, by composition class) and typical
//!   projectors (operator mode).
//! - [`verify`]: numerical checks of the entropy inequalities and concentration
//!   bounds used in the cost analysis.
//! - [`cli`]: configuration parsing and dispatch for the `imlab` binary.
//!
//! All logarithms are base 2.

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod imaginarity;
pub mod matcore;
pub mod protocols;
pub mod report;
pub mod typicality;
pub mod verify;

pub use error::{Error, Result};
pub use matcore::{CMatrix, CovariantUnitary, DensityMatrix, PureState, Seed};
