//! Example families with closed-form spectral data, small fixtures, and a
//! seeded random instance generator.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nodal::SignPattern;
use crate::specmat::{classical_laplacian, eig_sym, GeneralizedLaplacian, SymMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedEigenvalue {
    /// 1-based index in the ascending spectrum.
    pub index: usize,
    pub value: f64,
    pub formula: String,
}

/// A vector known to lie in the eigenspace of `λ_index`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedVector {
    pub index: usize,
    pub vector: Vec<f64>,
    pub formula: String,
}

#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub lap: GeneralizedLaplacian,
    pub labels: Vec<String>,
    /// Sorted by index.
    pub expected: Vec<ExpectedEigenvalue>,
    pub vectors: Vec<ExpectedVector>,
    pub notes: String,
}

impl FamilyInstance {
    pub fn graph(&self) -> &Graph {
        self.lap.graph()
    }

    pub fn n(&self) -> usize {
        self.lap.n()
    }
}

fn ev(index: usize, value: f64, formula: impl Into<String>) -> ExpectedEigenvalue {
    ExpectedEigenvalue { index, value, formula: formula.into() }
}

fn sorted_full(mut vals: Vec<(f64, String)>) -> Vec<ExpectedEigenvalue> {
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    vals.into_iter().enumerate().map(|(i, (v, f))| ev(i + 1, v, f)).collect()
}

fn path_graph(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path edges are valid")
}

/// Star with centre 0 and leaves `1..n`.
pub fn star(n: usize) -> Result<FamilyInstance> {
    if n < 3 {
        return Err(Error::InvalidFamily(format!("star needs n >= 3, got {n}")));
    }
    let g = Graph::new(n, (1..n).map(|i| (0, i)))?;
    let mut vals = vec![(0.0, "0".to_string()), (n as f64, "n".to_string())];
    vals.extend((0..n - 2).map(|_| (1.0, "1".to_string())));
    let mut leaf_pair = vec![0.0; n];
    leaf_pair[1] = 1.0;
    leaf_pair[2] = -1.0;
    let mut labels = vec!["c".to_string()];
    labels.extend((1..n).map(|i| format!("l{i}")));
    Ok(FamilyInstance {
        name: "star".into(),
        params: vec![("n".into(), n as f64)],
        lap: classical_laplacian(&g),
        labels,
        expected: sorted_full(vals),
        vectors: vec![ExpectedVector {
            index: 2,
            vector: leaf_pair,
            formula: "zero at the centre, leaf values summing to 0".into(),
        }],
        notes: "classical Laplacian of the star; spectrum 0, 1 (n-2 times), n".into(),
    })
}

/// Path with 2 on the diagonal and -1 between neighbours. This is not the
/// graph Laplacian: both ends carry an extra unit of potential.
pub fn path_dirichlet(n: usize) -> Result<FamilyInstance> {
    if n < 2 {
        return Err(Error::InvalidFamily(format!("path needs n >= 2, got {n}")));
    }
    let g = path_graph(n);
    let mut m = SymMatrix::diagonal(&vec![2.0; n]);
    for i in 1..n {
        m.set_sym(i - 1, i, -1.0);
    }
    let h = (n + 1) as f64;
    let expected = (1..=n)
        .map(|k| ev(k, 2.0 - 2.0 * (PI * k as f64 / h).cos(), format!("2 - 2cos({k}π/{})", n + 1)))
        .collect();
    let vectors = (1..=n)
        .map(|k| ExpectedVector {
            index: k,
            vector: (1..=n).map(|j| (PI * (k * j) as f64 / h).sin()).collect(),
            formula: format!("sin({k}πj/{})", n + 1),
        })
        .collect();
    Ok(FamilyInstance {
        name: "path".into(),
        params: vec![("n".into(), n as f64)],
        lap: GeneralizedLaplacian::new(g, m)?,
        labels: (1..=n).map(|i| format!("v{i}")).collect(),
        expected,
        vectors,
        notes: "path with diagonal 2".into(),
    })
}

/// Roots of `λ² - (3+j)λ + j`, ascending.
pub fn ladder_p_roots(j: usize) -> (f64, f64) {
    quadratic_roots(-(3.0 + j as f64), j as f64)
}

/// Roots of `λ² - (5+j)λ + (j+6)`, ascending.
pub fn ladder_q_roots(j: usize) -> (f64, f64) {
    quadratic_roots(-(5.0 + j as f64), j as f64 + 6.0)
}

/// Roots of `x² + bx + c` with real roots, ascending, computed stably.
fn quadratic_roots(b: f64, c: f64) -> (f64, f64) {
    let disc = (b * b - 4.0 * c).sqrt();
    let q = -0.5 * (b + b.signum() * disc);
    let (r1, r2) = (q, c / q);
    (r1.min(r2), r1.max(r2))
}

/// Two 3-paths `0-1-2` and `3-4-5` plus `j = n - 6` middle vertices, each
/// joined to 1 and 4.
pub fn ladder(n: usize) -> Result<FamilyInstance> {
    if n < 7 {
        return Err(Error::InvalidFamily(format!("ladder needs n >= 7, got {n}")));
    }
    let j = n - 6;
    let mut edges = vec![(0, 1), (1, 2), (3, 4), (4, 5)];
    for w in 6..n {
        edges.push((1, w));
        edges.push((4, w));
    }
    let g = Graph::new(n, edges)?;
    let (p1, p2) = ladder_p_roots(j);
    let (q1, q2) = ladder_q_roots(j);
    let mut vals = vec![
        (0.0, "0".to_string()),
        (p1, format!("smaller root of λ² - {}λ + {j}", 3 + j)),
        (p2, format!("larger root of λ² - {}λ + {j}", 3 + j)),
        (1.0, "1".to_string()),
        (1.0, "1".to_string()),
        (q1, format!("smaller root of λ² - {}λ + {}", 5 + j, j + 6)),
        (q2, format!("larger root of λ² - {}λ + {}", 5 + j, j + 6)),
    ];
    vals.extend((0..j - 1).map(|_| (2.0, "2".to_string())));
    let mut a = vec![0.0; n];
    a[0] = 1.0;
    a[2] = -1.0;
    let mut b = vec![0.0; n];
    b[3] = 1.0;
    b[5] = -1.0;
    let mut labels: Vec<String> = (1..=6).map(|i| format!("v{i}")).collect();
    labels.extend((1..=j).map(|i| format!("m{i}")));
    Ok(FamilyInstance {
        name: "ladder".into(),
        params: vec![("n".into(), n as f64)],
        lap: classical_laplacian(&g),
        labels,
        expected: sorted_full(vals),
        vectors: vec![
            ExpectedVector { index: 3, vector: a, formula: "a(1, 0, -1) on the first path".into() },
            ExpectedVector { index: 3, vector: b, formula: "b(1, 0, -1) on the second path".into() },
        ],
        notes: format!("j = {j} middle vertices; eigenvalue 2 has multiplicity {}", j - 1),
    })
}

/// `(m, multiplicity)` for eigenvalue 1 of the double-left path: the
/// eigenvalue sits at index `m + 1`.
pub fn double_left_index(n: usize) -> (usize, usize) {
    match n % 3 {
        1 => ((n - 1) / 3, 2),
        0 => (n / 3, 1),
        _ => ((n + 1) / 3, 1),
    }
}

/// Path `2-3-…-(n-1)` with two pendant vertices 0 and 1 both joined to 2.
pub fn double_left_path(n: usize) -> Result<FamilyInstance> {
    if n < 4 {
        return Err(Error::InvalidFamily(format!("double-left path needs n >= 4, got {n}")));
    }
    let mut edges = vec![(0, 2), (1, 2)];
    edges.extend((3..n).map(|i| (i - 1, i)));
    let g = Graph::new(n, edges)?;
    let (m, mult) = double_left_index(n);
    let mut odd = vec![0.0; n];
    odd[0] = 1.0;
    odd[1] = -1.0;
    let mut expected = vec![ev(m + 1, 1.0, "1")];
    let mut vectors = vec![ExpectedVector { index: m + 1, vector: odd, formula: "(a, -a, 0, ..., 0)".into() }];
    if mult == 2 {
        expected.push(ev(m + 2, 1.0, "1"));
        let mut even = vec![0.0; n];
        even[0] = 1.0;
        even[1] = 1.0;
        for (i, x) in even.iter_mut().skip(3).enumerate() {
            if i % 3 != 2 {
                *x = if (i / 3) % 2 == 0 { -2.0 } else { 2.0 };
            }
        }
        vectors.push(ExpectedVector {
            index: m + 1,
            vector: even,
            formula: "(a, a, 0, -2a, -2a, 0, 2a, 2a, 0, ...)".into(),
        });
    }
    Ok(FamilyInstance {
        name: "double-left".into(),
        params: vec![("n".into(), n as f64)],
        lap: classical_laplacian(&g),
        labels: (1..=n).map(|i| format!("v{i}")).collect(),
        expected,
        vectors,
        notes: format!("eigenvalue 1 at index {} with multiplicity {mult}", m + 1),
    })
}

/// Laplacian eigenvalues of the path on `n - 1` vertices, used for
/// interlacing with the double-left path.
pub fn path_laplacian_spectrum(len: usize) -> Vec<f64> {
    (1..=len).map(|j| 2.0 - 2.0 * (PI * (j - 1) as f64 / len as f64).cos()).collect()
}

/// Vertex layout of the shallow/deep family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShallowDeepLayout {
    pub s: usize,
    pub k: usize,
    pub ell: usize,
}

impl ShallowDeepLayout {
    pub fn u(&self, i: usize) -> usize {
        i
    }
    pub fn v(&self, i: usize) -> usize {
        self.s + i
    }
    pub fn v_prime(&self, i: usize) -> usize {
        self.s + self.k + i
    }
    pub fn w(&self, i: usize) -> usize {
        self.s + 2 * self.k + i
    }
    pub fn n(&self) -> usize {
        self.s + 2 * self.k + self.ell
    }
}

pub fn default_mu(s: usize, ell: usize) -> f64 {
    1e3 * (1.0 + s as f64 + ell as f64)
}

/// `Δ_G + μ I_U - s I_{v1, v1'}` on two `k`-paths `V`, `V′`, with every
/// `u_i` joined to `v_1` and `v'_1`, and `u_1` joined to every `w_j`.
/// `λ_2 = 0` is simple for large `μ` with eigenvector `+1` on `V`, `-1` on `V′`.
pub fn shallow_deep_family(s: usize, k: usize, ell: usize, mu: Option<f64>) -> Result<FamilyInstance> {
    if s == 0 || k == 0 {
        return Err(Error::InvalidFamily(format!("need s, k >= 1, got s = {s}, k = {k}")));
    }
    let mu = mu.unwrap_or_else(|| default_mu(s, ell));
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::InvalidFamily(format!("mu must be positive, got {mu}")));
    }
    let lay = ShallowDeepLayout { s, k, ell };
    let n = lay.n();
    let mut edges = Vec::new();
    for i in 1..k {
        edges.push((lay.v(i - 1), lay.v(i)));
        edges.push((lay.v_prime(i - 1), lay.v_prime(i)));
    }
    for i in 0..s {
        edges.push((lay.u(i), lay.v(0)));
        edges.push((lay.u(i), lay.v_prime(0)));
    }
    for j in 0..ell {
        edges.push((lay.u(0), lay.w(j)));
    }
    let g = Graph::new(n, edges)?;
    let mut m = classical_laplacian(&g).matrix().clone();
    for i in 0..s {
        m.set_sym(i, i, m.get(i, i) + mu);
    }
    for v in [lay.v(0), lay.v_prime(0)] {
        m.set_sym(v, v, m.get(v, v) - s as f64);
    }
    let mut f2 = vec![0.0; n];
    for i in 0..k {
        f2[lay.v(i)] = 1.0;
        f2[lay.v_prime(i)] = -1.0;
    }
    let mut labels: Vec<String> = (1..=s).map(|i| format!("u{i}")).collect();
    labels.extend((1..=k).map(|i| format!("v{i}")));
    labels.extend((1..=k).map(|i| format!("v'{i}")));
    labels.extend((1..=ell).map(|i| format!("w{i}")));
    Ok(FamilyInstance {
        name: "shallow-deep".into(),
        params: vec![("s".into(), s as f64), ("k".into(), k as f64), ("ell".into(), ell as f64), ("mu".into(), mu)],
        lap: GeneralizedLaplacian::new(g, m)?,
        labels,
        expected: vec![ev(2, 0.0, "0")],
        vectors: vec![ExpectedVector { index: 2, vector: f2, formula: "+1 on V, -1 on V', 0 elsewhere".into() }],
        notes: format!("u shallow ({s}), w deep ({ell}), v and v' non-Urschel ({})", 2 * k),
    })
}

/// General form: two copies of a connected graph `h`; `u_attach[i]` lists
/// the `h`-vertices joined to `u_i` (and their copies); `w_attach[j]` lists
/// the `u` indices joined to `w_j`. The matrix is
/// `Δ_G + μ I_U - diag(number of U-neighbours)` on the two copies of `h`.
pub fn shallow_deep_general(
    h: &Graph,
    u_attach: &[Vec<usize>],
    w_attach: &[Vec<usize>],
    mu: f64,
) -> Result<FamilyInstance> {
    let hn = h.n();
    let s = u_attach.len();
    let ell = w_attach.len();
    if hn == 0 || s == 0 || !h.is_connected() || mu.is_nan() || mu <= 0.0 {
        return Err(Error::InvalidFamily("need a connected nonempty H, s >= 1 and mu > 0".into()));
    }
    let n = s + 2 * hn + ell;
    let v = |i: usize| s + i;
    let vp = |i: usize| s + hn + i;
    let mut edges = Vec::new();
    for &(a, b) in h.edges() {
        edges.push((v(a), v(b)));
        edges.push((vp(a), vp(b)));
    }
    for (i, att) in u_attach.iter().enumerate() {
        for &x in att {
            if x >= hn {
                return Err(Error::VertexOutOfRange { index: x, n: hn });
            }
            edges.push((i, v(x)));
            edges.push((i, vp(x)));
        }
    }
    for (j, att) in w_attach.iter().enumerate() {
        for &i in att {
            if i >= s {
                return Err(Error::VertexOutOfRange { index: i, n: s });
            }
            edges.push((i, s + 2 * hn + j));
        }
    }
    let g = Graph::new(n, edges)?;
    let mut m = classical_laplacian(&g).matrix().clone();
    for i in 0..s {
        m.set_sym(i, i, m.get(i, i) + mu);
    }
    for x in 0..hn {
        for y in [v(x), vp(x)] {
            let u_nbrs = g.neighbors(y)?.iter().filter(|&&z| z < s).count();
            m.set_sym(y, y, m.get(y, y) - u_nbrs as f64);
        }
    }
    let mut f2 = vec![0.0; n];
    for x in 0..hn {
        f2[v(x)] = 1.0;
        f2[vp(x)] = -1.0;
    }
    let mut labels: Vec<String> = (1..=s).map(|i| format!("u{i}")).collect();
    labels.extend((0..hn).map(|i| format!("h{i}")));
    labels.extend((0..hn).map(|i| format!("h'{i}")));
    labels.extend((1..=ell).map(|i| format!("w{i}")));
    Ok(FamilyInstance {
        name: "shallow-deep-general".into(),
        params: vec![("s".into(), s as f64), ("h".into(), hn as f64), ("ell".into(), ell as f64), ("mu".into(), mu)],
        lap: GeneralizedLaplacian::new(g, m)?,
        labels,
        expected: vec![ev(2, 0.0, "0")],
        vectors: vec![ExpectedVector { index: 2, vector: f2, formula: "+1 on H, -1 on H', 0 elsewhere".into() }],
        notes: "generalized shallow/deep construction".into(),
    })
}

/// Blocks `(A, B, D)` of the shallow/deep matrix without the `μ` shift:
/// `A` on `U`, `B` from `U` to the rest, `D` on the rest.
pub fn shallow_deep_blocks(s: usize, k: usize, ell: usize) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let inst = shallow_deep_family(s, k, ell, Some(1.0))?;
    let mut full = inst.lap.matrix().matrix().clone();
    for i in 0..s {
        full[(i, i)] -= 1.0;
    }
    let n = full.nrows();
    let a = full.view((0, 0), (s, s)).into_owned();
    let b = full.view((0, s), (s, n - s)).into_owned();
    let d = full.view((s, s), (n - s, n - s)).into_owned();
    Ok((a, b, d))
}

/// Largest deviations of the top `s` eigenvalues from `μ + α_i` and of the
/// rest from `β_i`, for the shallow/deep matrix at the given `μ`.
pub fn large_mu_deviation(s: usize, k: usize, ell: usize, mu: f64) -> Result<(f64, f64)> {
    let (a, _, d) = shallow_deep_blocks(s, k, ell)?;
    let alpha = eig_sym(&SymMatrix::new(a)?)?;
    let beta = eig_sym(&SymMatrix::new(d)?)?;
    let inst = shallow_deep_family(s, k, ell, Some(mu))?;
    let spec = eig_sym(inst.lap.matrix())?;
    let rest = spec.n() - s;
    let bottom = (0..rest).map(|i| (spec.values()[i] - beta.values()[i]).abs()).fold(0.0, f64::max);
    let top = (0..s).map(|i| (spec.values()[rest + i] - mu - alpha.values()[i]).abs()).fold(0.0, f64::max);
    Ok((top, bottom))
}

/// Block determinant evaluated directly and through both Schur complements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurCheck {
    pub direct: f64,
    /// `det A · det(D - C A⁻¹ B)`, when `A` is invertible.
    pub via_a: Option<f64>,
    /// `det D · det(A - B D⁻¹ C)`, when `D` is invertible.
    pub via_d: Option<f64>,
}

impl SchurCheck {
    /// True when every available Schur value matches `direct` to `rel`.
    pub fn agrees(&self, rel: f64) -> bool {
        let scale = 1.0 + self.direct.abs();
        [self.via_a, self.via_d].iter().flatten().all(|x| (x - self.direct).abs() <= rel * scale)
    }
}

pub fn schur_det_check(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<SchurCheck> {
    let (p, q) = (a.nrows(), d.nrows());
    if a.ncols() != p || d.ncols() != q || b.shape() != (p, q) || c.shape() != (q, p) {
        return Err(Error::Dimension { expected: p + q, found: b.nrows() + c.nrows() });
    }
    let mut full = DMatrix::zeros(p + q, p + q);
    full.view_mut((0, 0), (p, p)).copy_from(a);
    full.view_mut((0, p), (p, q)).copy_from(b);
    full.view_mut((p, 0), (q, p)).copy_from(c);
    full.view_mut((p, p), (q, q)).copy_from(d);
    let direct = full.lu().determinant();
    let via_a = a.clone().try_inverse().map(|ai| a.determinant() * (d - c * ai * b).determinant());
    let via_d = d.clone().try_inverse().map(|di| d.determinant() * (a - b * di * c).determinant());
    if via_a.is_none() && via_d.is_none() {
        return Err(Error::SingularBlock("both A and D are singular"));
    }
    Ok(SchurCheck { direct, via_a, via_d })
}

/// Centre 0 with a zero value, leaves 1, 2 positive and 3, 4 negative; the
/// leaves 1-2-3 are also joined as a path. SND 3, WND 2.
pub fn fan_fixture() -> (Graph, SignPattern) {
    let g = Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3)]).expect("valid");
    (g, SignPattern::parse("0++--").expect("valid"))
}

/// Path `0-1-2` with pattern `(+, 0, 0)`.
pub fn path_fixture() -> (Graph, SignPattern) {
    (path_graph(3), SignPattern::parse("+00").expect("valid"))
}

/// The 4-vertex example in the order `(u1, w1, v1, v1')`.
pub fn worked_example() -> GeneralizedLaplacian {
    let g = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).expect("valid");
    let m = SymMatrix::from_rows(&[
        vec![1.0, -1.0, -1.0, -1.0],
        vec![-1.0, -1.0, 0.0, 0.0],
        vec![-1.0, 0.0, 0.0, 0.0],
        vec![-1.0, 0.0, 0.0, 0.0],
    ])
    .expect("symmetric");
    GeneralizedLaplacian::new(g, m).expect("supported on the star")
}

/// Closed-form pseudoinverse of the 4-vertex example at `λ = 0`.
pub fn worked_example_pseudoinverse() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.0, -0.5, -0.5, //
            0.0, -1.0, 0.5, 0.5, //
            -0.5, 0.5, -0.5, -0.5, //
            -0.5, 0.5, -0.5, -0.5,
        ],
    )
}

/// Erdős–Rényi `G(n, p)` resampled until connected.
pub fn random_connected_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    loop {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::new(n, edges).expect("generated edges are valid");
        if g.is_connected() {
            return g;
        }
    }
}

/// Random generalized Laplacian on `g`: edge weights uniform in
/// `[-2, -0.1]`, diagonal uniform in `[-1, 3]`.
pub fn random_laplacian<R: Rng>(g: &Graph, rng: &mut R) -> GeneralizedLaplacian {
    let n = g.n();
    let mut m = SymMatrix::zeros(n);
    for &(u, v) in g.edges() {
        m.set_sym(u, v, rng.gen_range(-2.0..=-0.1));
    }
    for v in 0..n {
        m.set_sym(v, v, rng.gen_range(-1.0..=3.0));
    }
    GeneralizedLaplacian::new(g.clone(), m).expect("random matrix is supported on g")
}

/// Seeded random instance on `G(n, 0.4)` conditioned on connectivity.
pub fn random_instance(n: usize, seed: u64) -> GeneralizedLaplacian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_connected_graph(n, 0.4, &mut rng);
    random_laplacian(&g, &mut rng)
}

/// Check that `v` lies in the `λ` eigenspace: `‖Mv - λv‖∞ / ‖v‖∞`.
pub fn eigen_residual(m: &SymMatrix, lambda: f64, v: &[f64]) -> f64 {
    let x = DVector::from_column_slice(v);
    (m.mul_vec(&x) - &x * lambda).amax() / x.amax()
}
