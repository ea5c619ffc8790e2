use std::cmp::Ordering;

use num_complex::Complex64;

use super::{hermitize, CMatrix, CVector};

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    /// `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.vectors.nrows();
        let mut out = CMatrix::zeros(d, d);
        for (i, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(i);
            out += (v * v.adjoint()).scale(f(lam));
        }
        out
    }
}

const TIE_TOL: f64 = 1e-10;
const COMPONENT_TOL: f64 = 1e-12;

/// Eigendecomposition of a Hermitian matrix with a deterministic vector convention.
///
/// Eigenvalues are sorted descending. Every eigenvector has its phase fixed so
/// that its largest-magnitude component (first one on ties) is real positive.
/// Within a group of eigenvalues equal up to `1e-10`, vectors are then ordered
/// lexicographically, largest first, on the `(re, im)` components.
pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let d = m.nrows();
    if d == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut pairs: Vec<(f64, CVector)> = (0..d)
        .map(|i| {
            let v = fix_phase(eig.eigenvectors.column(i).into_owned());
            (eig.eigenvalues[i], v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));

    // Reorder inside tie groups.
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d
            && (pairs[start].0 - pairs[end].0).abs() <= TIE_TOL * pairs[start].0.abs().max(1.0)
        {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by_cached_key(|p| lex_key(&p.1));
        }
        start = end;
    }

    let values = pairs.iter().map(|p| p.0).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (i, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(i, v);
    }
    HermitianEigen { values, vectors }
}

fn fix_phase(v: CVector) -> CVector {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v;
    }
    let pivot = v
        .iter()
        .find(|z| z.norm() >= max - COMPONENT_TOL)
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    v.map(|z| z * phase)
}

/// Components snapped to a `COMPONENT_TOL` grid and negated, so an ascending
/// sort on the key is a descending lexicographic order (and a total order).
fn lex_key(v: &CVector) -> Vec<i64> {
    v.iter()
        .flat_map(|z| [z.re, z.im])
        .map(|x| -((x / COMPONENT_TOL).round() as i64))
        .collect()
}
