//! Dense symmetric matrices, generalized Laplacians, the cyclic Jacobi
//! eigensolver, eigenvalue grouping and shifted pseudoinverses.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Absolute tolerance for the symmetry check on construction.
pub const SYM_TOL: f64 = 1e-10;
/// Relative kernel threshold used by [`shifted_pseudoinverse`].
pub const RANK_TOL: f64 = 1e-9;
/// Relative eigenvalue grouping tolerance, scaled by `1 + spectral radius`.
pub const GROUP_TOL_REL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

/// A dense real symmetric matrix, stored exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension { expected: m.nrows(), found: m.ncols() });
        }
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = (m[(i, j)] - m[(j, i)]).abs();
                if diff > SYM_TOL || diff.is_nan() {
                    return Err(Error::NotSymmetric { i, j, diff });
                }
            }
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(SymMatrix(sym))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, found: row.len() });
            }
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        SymMatrix::new(m)
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Set entries `(i, j)` and `(j, i)` together.
    pub fn set_sym(&mut self, i: usize, j: usize, value: f64) {
        self.0[(i, j)] = value;
        self.0[(j, i)] = value;
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.0.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.0.norm()
    }

    pub fn shifted(&self, lambda: f64) -> SymMatrix {
        let n = self.n();
        SymMatrix(&self.0 - DMatrix::identity(n, n) * lambda)
    }

    /// `self + eps * other`.
    pub fn add_scaled(&self, other: &SymMatrix, eps: f64) -> SymMatrix {
        SymMatrix(&self.0 + &other.0 * eps)
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }

    /// Nonzero upper-triangle entries `(i, j, value)` with `i <= j`.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                let x = self.0[(i, j)];
                if x != 0.0 {
                    out.push((i, j, x));
                }
            }
        }
        out
    }

    /// Parse `n` whitespace-separated rows of `n` reals; `#` lines are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|s| {
                    s.parse::<f64>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("{s:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        SymMatrix::from_rows(&rows)
    }

    pub fn to_text(&self) -> String {
        self.0
            .row_iter()
            .map(|r| r.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ") + "\n")
            .collect()
    }
}

/// A symmetric matrix supported on a graph with strictly negative edge entries.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedLaplacian {
    g: Graph,
    m: SymMatrix,
}

impl GeneralizedLaplacian {
    pub fn new(g: Graph, m: SymMatrix) -> Result<Self> {
        let n = g.n();
        if m.n() != n {
            return Err(Error::Dimension { expected: n, found: m.n() });
        }
        for u in 0..n {
            for v in (u + 1)..n {
                let value = m.get(u, v);
                if g.has_edge(u, v) {
                    if value.is_nan() || value >= 0.0 {
                        return Err(Error::NonNegativeEdge { u, v, value });
                    }
                } else if value != 0.0 {
                    return Err(Error::NotSupported { u, v, value });
                }
            }
        }
        Ok(GeneralizedLaplacian { g, m })
    }

    pub fn graph(&self) -> &Graph {
        &self.g
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.m
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    /// Smallest `|m[u][v]|` over edges, or `1.0` for an edgeless graph.
    pub fn min_edge_magnitude(&self) -> f64 {
        self.g
            .edges()
            .iter()
            .map(|&(u, v)| self.m.get(u, v).abs())
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))))
            .unwrap_or(1.0)
    }
}

/// `D_G - A_G`.
pub fn classical_laplacian(g: &Graph) -> GeneralizedLaplacian {
    let n = g.n();
    let mut m = DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        m[(u, v)] = -1.0;
        m[(v, u)] = -1.0;
        m[(u, u)] += 1.0;
        m[(v, v)] += 1.0;
    }
    GeneralizedLaplacian { g: g.clone(), m: SymMatrix(m) }
}

/// Ascending eigenvalues with an orthonormal eigenvector for each.
/// Indices in the public accessors are 1-based, matching `λ_1 ≤ … ≤ λ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    vectors: Vec<DVector<f64>>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn vector(&self, k: usize) -> &DVector<f64> {
        &self.vectors[k - 1]
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// Grouping tolerance used when none is supplied: `1e-9 * (1 + ρ)`.
    pub fn default_group_tol(&self) -> f64 {
        GROUP_TOL_REL * (1.0 + self.spectral_radius())
    }

    /// Orthonormal basis of the eigenspace of a group.
    pub fn group_basis(&self, group: &EigGroup) -> Vec<DVector<f64>> {
        (group.k..group.k + group.m).map(|k| self.vector(k).clone()).collect()
    }
}

/// Cyclic Jacobi eigendecomposition. Deterministic; sweeps stop one sweep
/// after the off-diagonal Frobenius norm first drops to `1e-12 * ‖M‖_F`.
pub fn eig_sym(m: &SymMatrix) -> Result<Spectrum> {
    let n = m.n();
    let mut a = m.matrix().clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = JACOBI_REL_TOL * m.norm_fro();

    let off_norm = |a: &DMatrix<f64>| {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[(p, q)] * a[(p, q)];
            }
        }
        (2.0 * s).sqrt()
    };

    // One sweep past the threshold: convergence is quadratic, so structural
    // zeros drop from ~1e-12 to roundoff.
    let mut converged = false;
    let mut polished = false;
    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= threshold {
            if polished {
                converged = true;
                break;
            }
            polished = true;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        let new_p = c * arp - s * arq;
                        let new_q = s * arp + c * arq;
                        a[(r, p)] = new_p;
                        a[(p, r)] = new_p;
                        a[(r, q)] = new_q;
                        a[(q, r)] = new_q;
                    }
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > threshold {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_norm: off });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut col: DVector<f64> = v.column(i).into_owned();
            col /= col.norm();
            orient(&mut col);
            col
        })
        .collect();
    Ok(Spectrum { values, vectors })
}

/// Thin singular value decomposition `A = U diag(σ) Vᵀ`, σ descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    /// Orthonormal basis of the column space, keeping `σ > rel · σ_max`.
    pub fn column_space(&self, rel: f64) -> Vec<DVector<f64>> {
        let cut = rel * self.sigma.first().copied().unwrap_or(0.0);
        (0..self.sigma.len())
            .filter(|&i| self.sigma[i] > cut && self.sigma[i] > 0.0)
            .map(|i| self.u.column(i).into_owned())
            .collect()
    }

    /// Least-norm least-squares solution, dropping `σ ≤ rel · σ_max`.
    pub fn solve(&self, b: &DVector<f64>, rel: f64) -> DVector<f64> {
        let cut = rel * self.sigma.first().copied().unwrap_or(0.0);
        let mut x = DVector::zeros(self.v.nrows());
        for (i, &s) in self.sigma.iter().enumerate() {
            if s > cut && s > 0.0 {
                let c = self.u.column(i).dot(b) / s;
                x.axpy(c, &self.v.column(i), 1.0);
            }
        }
        x
    }
}

/// One-sided (Hestenes) Jacobi SVD. Columns of `A` are rotated pairwise
/// until mutually orthogonal to working precision.
pub fn svd_jacobi(a: &DMatrix<f64>) -> Result<Svd> {
    let (rows, cols) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    // Columns below this norm are treated as zero and never rotated.
    let negligible = 1e-15 * a.norm();
    let mut converged = cols < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if alpha.sqrt() <= negligible
                    || beta.sqrt() <= negligible
                    || gamma.abs() <= 1e-14 * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let (x, y) = (w[(r, p)], w[(r, q)]);
                    w[(r, p)] = c * x - s * y;
                    w[(r, q)] = s * x + c * y;
                }
                for r in 0..cols {
                    let (x, y) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = c * x - s * y;
                    v[(r, q)] = s * x + c * y;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_norm: f64::NAN });
    }
    let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let u = DMatrix::from_fn(rows, cols, |r, j| {
        let c = order[j];
        if norms[c] > 0.0 { w[(r, c)] / norms[c] } else { 0.0 }
    });
    let v = DMatrix::from_fn(cols, cols, |r, j| v[(r, order[j])]);
    Ok(Svd { u, sigma: order.iter().map(|&c| norms[c]).collect(), v })
}

/// Flip `v` so its first clearly nonzero coordinate is positive.
pub fn orient(v: &mut DVector<f64>) {
    let scale = v.amax();
    if let Some(x) = v.iter().find(|x| x.abs() > 1e-9 * scale) {
        if *x < 0.0 {
            v.neg_mut();
        }
    }
}

/// A maximal run of numerically equal eigenvalues `λ_k = … = λ_{k+m-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigGroup {
    /// 1-based index of the first eigenvalue in the group.
    pub k: usize,
    pub m: usize,
    /// Mean of the grouped eigenvalues.
    pub lambda: f64,
    /// Set when a neighbouring gap lies in `(tol, 2 tol]`.
    pub ambiguous: bool,
}

impl EigGroup {
    pub fn last(&self) -> usize {
        self.k + self.m - 1
    }

    pub fn contains(&self, k: usize) -> bool {
        (self.k..=self.last()).contains(&k)
    }
}

pub fn group_eigenvalues(s: &Spectrum, group_tol: f64) -> Vec<EigGroup> {
    let vals = s.values();
    let mut groups: Vec<EigGroup> = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i == vals.len() || vals[i] - vals[start] > group_tol {
            let slice = &vals[start..i];
            groups.push(EigGroup {
                k: start + 1,
                m: slice.len(),
                lambda: slice.iter().sum::<f64>() / slice.len() as f64,
                ambiguous: false,
            });
            start = i;
        }
    }
    for i in 1..groups.len() {
        let gap = vals[groups[i].k - 1] - vals[groups[i - 1].last() - 1];
        if gap <= 2.0 * group_tol {
            groups[i].ambiguous = true;
            groups[i - 1].ambiguous = true;
        }
    }
    groups
}

/// Group containing the 1-based eigenvalue index `k`.
pub fn group_of(groups: &[EigGroup], k: usize) -> Option<&EigGroup> {
    groups.iter().find(|g| g.contains(k))
}

/// Moore–Penrose pseudoinverse of `M - λI`, built from the eigendecomposition
/// of `M`. Shifted eigenvalues with `|μ| ≤ rank_tol · ‖M‖∞` count as kernel.
pub fn shifted_pseudoinverse(m: &SymMatrix, lambda: f64, rank_tol: f64) -> Result<SymMatrix> {
    let spec = eig_sym(m)?;
    Ok(pseudoinverse_from_spectrum(&spec, lambda, rank_tol * m.norm_inf()))
}

/// Same as [`shifted_pseudoinverse`] for a precomputed spectrum and an
/// absolute kernel threshold.
pub fn pseudoinverse_from_spectrum(spec: &Spectrum, lambda: f64, abs_threshold: f64) -> SymMatrix {
    let n = spec.n();
    let mut out = DMatrix::zeros(n, n);
    for (mu, v) in spec.values().iter().zip(spec.vectors()) {
        let shifted = mu - lambda;
        if shifted.abs() <= abs_threshold {
            continue;
        }
        out += v * v.transpose() * (1.0 / shifted);
    }
    SymMatrix((&out + out.transpose()) * 0.5)
}
