//! Splitting a multiple eigenvalue with a diagonal perturbation.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nodal::{self, snd, urschel_profile, wnd};
use crate::specmat::{eig_sym, orient, EigGroup, GeneralizedLaplacian, Spectrum, SymMatrix};

const MAX_DOUBLINGS: usize = 60;
const ROW_RANK_TOL: f64 = 1e-8;

/// `Qᵀ M₁ Q` for the orthonormal columns `basis`.
pub fn reduce_to_small(basis: &[DVector<f64>], m1: &SymMatrix) -> DMatrix<f64> {
    let m = basis.len();
    let images: Vec<DVector<f64>> = basis.iter().map(|q| m1.mul_vec(q)).collect();
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let x = 0.5 * (basis[i].dot(&images[j]) + basis[j].dot(&images[i]));
            out[(i, j)] = x;
            out[(j, i)] = x;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingDiagonal {
    /// Chosen coordinates, in the order their weights grow.
    pub coords: Vec<usize>,
    /// `(vertex, value)` pairs of the diagonal.
    pub d: Vec<(usize, f64)>,
    pub ratio: f64,
    pub doublings: usize,
    pub min_gap: f64,
    pub split_tol: f64,
}

impl SplittingDiagonal {
    pub fn matrix(&self, n: usize) -> SymMatrix {
        let mut diag = vec![0.0; n];
        for &(v, x) in &self.d {
            diag[v] = x;
        }
        SymMatrix::diagonal(&diag)
    }

    pub fn norm_inf(&self) -> f64 {
        self.d.iter().fold(0.0, |a, &(_, x)| a.max(x.abs()))
    }
}

/// Pick `m` coordinates whose rows of `Q` are independent, by greedy
/// row-pivoted elimination.
fn independent_rows(basis: &[DVector<f64>]) -> Result<Vec<usize>> {
    let m = basis.len();
    let n = basis[0].len();
    let mut rows: Vec<DVector<f64>> =
        (0..n).map(|c| DVector::from_iterator(m, basis.iter().map(|q| q[c]))).collect();
    let mut chosen = Vec::with_capacity(m);
    for step in 0..m {
        let mut best = None;
        let mut best_norm = 0.0;
        for (c, r) in rows.iter().enumerate() {
            if chosen.contains(&c) {
                continue;
            }
            let nr = r.norm();
            if nr > best_norm {
                best_norm = nr;
                best = Some(c);
            }
        }
        let c = match best {
            Some(c) if best_norm > ROW_RANK_TOL => c,
            _ => return Err(Error::RankDeficient(step)),
        };
        let pivot = &rows[c] / best_norm;
        for r in rows.iter_mut() {
            let proj = pivot.dot(r);
            r.axpy(-proj, &pivot, 1.0);
        }
        chosen.push(c);
    }
    Ok(chosen)
}

fn min_gap(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// A diagonal `D` whose compression `QᵀDQ` has `m` distinct eigenvalues.
///
/// Weights `r⁰, …, r^{m-1}` sit on `m` coordinates with independent rows;
/// `r` doubles from 2 until the smallest gap exceeds `1e-6 (1 + ‖d‖∞)`.
pub fn splitting_diagonal(basis: &[DVector<f64>]) -> Result<SplittingDiagonal> {
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    let m = basis.len();
    let coords = independent_rows(basis)?;
    let mut r = 2.0f64;
    for doublings in 0..=MAX_DOUBLINGS {
        let d: Vec<(usize, f64)> =
            coords.iter().enumerate().map(|(i, &c)| (c, r.powi(i as i32))).collect();
        let sd = SplittingDiagonal { coords: coords.clone(), d, ratio: r, doublings, min_gap: 0.0, split_tol: 0.0 };
        let small = reduce_to_small(basis, &sd.matrix(basis[0].len()));
        let vals = eig_sym(&SymMatrix::new(small)?)?.values().to_vec();
        let gap = if m == 1 { f64::INFINITY } else { min_gap(&vals) };
        let split_tol = 1e-6 * (1.0 + sd.norm_inf());
        if gap > split_tol {
            return Ok(SplittingDiagonal { min_gap: gap, split_tol, ..sd });
        }
        r *= 2.0;
    }
    Err(Error::Splitting(format!("eigenvalues still collide after {MAX_DOUBLINGS} doublings")))
}

/// Distinguished orthonormal basis of an eigenspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitBasis {
    pub k: usize,
    pub m: usize,
    pub lambda: f64,
    pub d: Vec<(usize, f64)>,
    /// Eigenvalues of `QᵀDQ`, ascending; `lambda_prime[j]` belongs to `basis[j]`.
    pub lambda_prime: Vec<f64>,
    #[serde(serialize_with = "serialize_vectors")]
    pub basis: Vec<DVector<f64>>,
    pub min_gap: Option<f64>,
}

fn serialize_vectors<S: serde::Serializer>(v: &[DVector<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(x.as_slice())?;
    }
    seq.end()
}

pub fn split_group(spec: &Spectrum, group: &EigGroup) -> Result<SplitBasis> {
    let e = spec.group_basis(group);
    if group.m == 1 {
        return Ok(SplitBasis {
            k: group.k,
            m: 1,
            lambda: group.lambda,
            d: Vec::new(),
            lambda_prime: vec![0.0],
            basis: e,
            min_gap: None,
        });
    }
    let sd = splitting_diagonal(&e)?;
    let small = reduce_to_small(&e, &sd.matrix(spec.n()));
    let small_spec = eig_sym(&SymMatrix::new(small)?)?;
    let basis = small_spec
        .vectors()
        .iter()
        .map(|y| {
            let mut v = e.iter().zip(y.iter()).fold(DVector::zeros(spec.n()), |acc, (q, &c)| acc + q * c);
            v /= v.norm();
            orient(&mut v);
            v
        })
        .collect();
    Ok(SplitBasis {
        k: group.k,
        m: group.m,
        lambda: group.lambda,
        d: sd.d,
        lambda_prime: small_spec.values().to_vec(),
        basis,
        min_gap: Some(sd.min_gap),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiBoundRecord {
    pub j: usize,
    pub index: usize,
    pub bound: usize,
    pub pattern: String,
    pub snd: usize,
    pub wnd: usize,
    /// `None` when the zero count exceeds the enumeration budget.
    pub un: Option<usize>,
    pub holds: Option<bool>,
}

/// Brute-force `UN(f_{k+j}) ≤ k + min(j, m-1-j)` for each split vector.
pub fn verify_multi_bounds(
    g: &Graph,
    sb: &SplitBasis,
    zero_tol: f64,
    max_zeros: usize,
) -> Result<Vec<MultiBoundRecord>> {
    let m = sb.m;
    sb.basis
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let p = nodal::sign_pattern(f, zero_tol)?;
            let bound = sb.k + j.min(m - 1 - j);
            let un = match urschel_profile(g, &p, max_zeros) {
                Ok(prof) => Some(prof.un()),
                Err(Error::EnumerationBudget { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(MultiBoundRecord {
                j,
                index: sb.k + j,
                bound,
                pattern: p.to_string(),
                snd: snd(g, &p)?,
                wnd: wnd(g, &p)?,
                un,
                holds: un.map(|u| u <= bound),
            })
        })
        .collect()
}

/// Largest `|λ_{k+j}(M + εD̂) - λ - ε λ̂′_j|` with `D̂ = D / ‖d‖∞`.
pub fn split_first_order_check(lap: &GeneralizedLaplacian, sb: &SplitBasis, eps: f64) -> Result<f64> {
    if sb.d.is_empty() {
        return Ok(0.0);
    }
    let n = lap.n();
    let scale = sb.d.iter().fold(0.0f64, |a, &(_, x)| a.max(x.abs()));
    let mut diag = vec![0.0; n];
    for &(v, x) in &sb.d {
        diag[v] = x / scale;
    }
    let spec = eig_sym(&lap.matrix().add_scaled(&SymMatrix::diagonal(&diag), eps))?;
    Ok((0..sb.m)
        .map(|j| (spec.value(sb.k + j) - sb.lambda - eps * sb.lambda_prime[j] / scale).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specmat::{classical_laplacian, group_eigenvalues, group_of};
    use approx::assert_abs_diff_eq;

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn reduce_identity_and_coordinate_space() {
        let basis = [e(4, 0), e(4, 1)];
        assert_eq!(reduce_to_small(&basis, &SymMatrix::identity(4)), DMatrix::identity(2, 2));
        let d = SymMatrix::diagonal(&[3.0, -1.0, 7.0, 9.0]);
        assert_eq!(reduce_to_small(&basis, &d), DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0])));
    }

    #[test]
    fn coordinate_space_split() {
        let sd = splitting_diagonal(&[e(3, 0), e(3, 1)]).unwrap();
        assert_eq!(sd.d, vec![(0, 1.0), (1, 2.0)]);
        assert_eq!(sd.doublings, 0);
    }

    #[test]
    fn star_group_splits() {
        let g = Graph::new(5, (1..5).map(|i| (0, i))).unwrap();
        let lap = classical_laplacian(&g);
        let spec = eig_sym(lap.matrix()).unwrap();
        let groups = group_eigenvalues(&spec, spec.default_group_tol());
        let grp = group_of(&groups, 2).unwrap();
        let sb = split_group(&spec, grp).unwrap();
        assert_eq!(sb.basis.len(), 3);
        assert!(sb.min_gap.unwrap() > 1e-6);
        for (i, v) in sb.basis.iter().enumerate() {
            assert_abs_diff_eq!((lap.matrix().mul_vec(v) - v).amax(), 0.0, epsilon = 1e-10);
            for (j, w) in sb.basis.iter().enumerate() {
                assert_abs_diff_eq!(v.dot(w), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
            }
        }
        let records = verify_multi_bounds(&g, &sb, 1e-7, 22).unwrap();
        assert_eq!(records.iter().map(|r| r.bound).collect::<Vec<_>>(), vec![2, 3, 2]);
        assert!(records.iter().all(|r| r.holds == Some(true)));
        assert!(split_first_order_check(&lap, &sb, 1e-3).unwrap() < 1e-5);
    }

    #[test]
    fn simple_group_passthrough() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let spec = eig_sym(classical_laplacian(&g).matrix()).unwrap();
        let grp = EigGroup { k: 2, m: 1, lambda: spec.value(2), ambiguous: false };
        let sb = split_group(&spec, &grp).unwrap();
        assert_eq!(sb.basis, vec![spec.vector(2).clone()]);
        let rec = verify_multi_bounds(&g, &sb, 1e-7, 22).unwrap();
        assert_eq!(rec[0].bound, 2);
    }
}
