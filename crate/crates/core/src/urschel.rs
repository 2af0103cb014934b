//! Urschel vertices of a subspace, split into shallow and deep.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nodal::{Sign, SignPattern};

const RANK_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UrschelClassification {
    pub non_urschel: Vec<usize>,
    pub shallow: Vec<usize>,
    pub deep: Vec<usize>,
}

impl UrschelClassification {
    /// Shallow and deep vertices together, ascending.
    pub fn urschel(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.shallow.iter().chain(&self.deep).copied().collect();
        all.sort_unstable();
        all
    }

    pub fn is_urschel(&self, v: usize) -> bool {
        self.shallow.binary_search(&v).is_ok() || self.deep.binary_search(&v).is_ok()
    }

    fn from_mask(g: &Graph, is_urschel: &[bool]) -> Self {
        let mut c = UrschelClassification { non_urschel: vec![], shallow: vec![], deep: vec![] };
        for v in 0..g.n() {
            if !is_urschel[v] {
                c.non_urschel.push(v);
            } else if g.neighbors(v).unwrap_or(&[]).iter().any(|&w| !is_urschel[w]) {
                c.shallow.push(v);
            } else {
                c.deep.push(v);
            }
        }
        c
    }
}

/// Orthonormalize with two passes of classical Gram–Schmidt per vector.
pub fn orthonormalize(basis: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let n = basis[0].len();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(basis.len());
    for (i, v) in basis.iter().enumerate() {
        if v.len() != n {
            return Err(Error::Dimension { expected: n, found: v.len() });
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let norm = w.norm();
        if norm <= RANK_REL_TOL * v.norm() || norm == 0.0 {
            return Err(Error::RankDeficient(i));
        }
        out.push(w / norm);
    }
    Ok(out)
}

/// Classify the vertices for the span of `basis`.
///
/// A vertex is Urschel when the 2-norm of its row in an orthonormal basis is
/// at most `zero_tol` times the largest row norm. The row norm is invariant
/// under orthogonal changes of basis, so the result depends only on the span.
pub fn classify_subspace(
    g: &Graph,
    basis: &[DVector<f64>],
    zero_tol: f64,
) -> Result<UrschelClassification> {
    let q = orthonormalize(basis)?;
    if q[0].len() != g.n() {
        return Err(Error::Dimension { expected: g.n(), found: q[0].len() });
    }
    let rows: Vec<f64> =
        (0..g.n()).map(|v| q.iter().map(|b| b[v] * b[v]).sum::<f64>().sqrt()).collect();
    let scale = rows.iter().copied().fold(0.0, f64::max);
    let mask: Vec<bool> = rows.iter().map(|&r| r <= zero_tol * scale).collect();
    Ok(UrschelClassification::from_mask(g, &mask))
}

/// Classification for `span{f}`, read directly off the sign pattern.
pub fn classify_pattern(g: &Graph, p: &SignPattern) -> Result<UrschelClassification> {
    if p.len() != g.n() {
        return Err(Error::Dimension { expected: g.n(), found: p.len() });
    }
    let mask: Vec<bool> = p.signs().iter().map(|&s| s == Sign::Zero).collect();
    Ok(UrschelClassification::from_mask(g, &mask))
}

pub fn classify_vector(g: &Graph, f: &DVector<f64>, zero_tol: f64) -> Result<UrschelClassification> {
    classify_pattern(g, &crate::nodal::sign_pattern(f, zero_tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn nowhere_zero_vector_has_no_urschel_vertices() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let c = classify_subspace(&g, &[v(&[1.0, -2.0, 0.5])], 1e-7).unwrap();
        assert_eq!(c.non_urschel, vec![0, 1, 2]);
        assert!(c.urschel().is_empty());
    }

    #[test]
    fn ladder_eigenspace() {
        // Two 3-paths 0-1-2 and 3-4-5 with middle vertices 6, 7 joined to 1 and 4.
        let g = Graph::new(8, [(0, 1), (1, 2), (3, 4), (4, 5), (6, 1), (6, 4), (7, 1), (7, 4)])
            .unwrap();
        let a = v(&[1.0, 0.0, -1.0, 1.0, 0.0, -1.0, 0.0, 0.0]);
        let b = v(&[1.0, 0.0, -1.0, -1.0, 0.0, 1.0, 0.0, 0.0]);
        let c = classify_subspace(&g, &[a, b], 1e-7).unwrap();
        assert_eq!(c.non_urschel, vec![0, 2, 3, 5]);
        assert_eq!(c.shallow, vec![1, 4]);
        assert_eq!(c.deep, vec![6, 7]);
    }

    #[test]
    fn basis_independence() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let a = v(&[1.0, 0.0, 0.0, 1.0]);
        let b = v(&[0.0, 1e-12, 0.0, 1.0]);
        let c1 = classify_subspace(&g, &[a.clone(), b.clone()], 1e-7).unwrap();
        let c2 = classify_subspace(&g, &[&a + &b, &a - &b * 3.0], 1e-7).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(c1.urschel(), vec![1, 2]);
    }

    #[test]
    fn bad_bases() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        assert_eq!(classify_subspace(&g, &[], 1e-7), Err(Error::EmptyBasis));
        assert_eq!(
            classify_subspace(&g, &[v(&[1.0, 1.0]), v(&[2.0, 2.0])], 1e-7),
            Err(Error::RankDeficient(1))
        );
    }

    #[test]
    fn vector_matches_pattern() {
        let g = Graph::new(5, (1..5).map(|i| (0, i))).unwrap();
        let f = v(&[0.0, 1.0, 1.0, -1.0, -1.0]);
        let a = classify_vector(&g, &f, 1e-7).unwrap();
        let b = classify_subspace(&g, &[f], 1e-7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shallow, vec![0]);
    }
}
