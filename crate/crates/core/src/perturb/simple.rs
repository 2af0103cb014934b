//! Sign certificates at a simple eigenvalue.
//!
//! Starting from an eigenvector `f` with zeros, pick a perturbation `M₁`
//! supported on the graph whose first-order correction `f¹` has prescribed
//! signs on a set of free Urschel coordinates, take a validated step
//! `M + εM₁`, and repeat on the perturbed eigenvector until no zeros remain.
//! The final sign vector is a signing of `f` whose SND is at most `k`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{first_order_correction, rayleigh_slope, Generator};
use crate::error::{Error, Result};
use crate::nodal::{self, Sign, SignPattern, Signing};
use crate::specmat::{
    eig_sym, group_eigenvalues, group_of, pseudoinverse_from_spectrum, svd_jacobi, GeneralizedLaplacian,
    Spectrum, SymMatrix, RANK_TOL,
};
use crate::urschel::{self, UrschelClassification};

const PIVOT_TOL: f64 = 1e-8;
const SVD_REL_TOL: f64 = 1e-8;
const REALIZE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub zero_tol: f64,
    /// Overrides the spectrum's default grouping tolerance.
    pub group_tol: Option<f64>,
    /// Certify every sign pattern on the free set instead of just `±`.
    pub all_patterns: bool,
    /// Largest free set for which all patterns are enumerated.
    pub max_pattern_bits: usize,
    pub max_halvings: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            zero_tol: nodal::ZERO_TOL,
            group_tol: None,
            all_patterns: false,
            max_pattern_bits: 10,
            max_halvings: 40,
        }
    }
}

/// The image of the proof's generator set under `f ↦ (M - λI)⁺(-M₁ f)`,
/// projected onto the Urschel coordinates of `f`.
#[derive(Debug, Clone)]
pub struct ImageBasis {
    pub k: usize,
    pub lambda: f64,
    /// Unit eigenvector.
    pub f: DVector<f64>,
    pub pattern: SignPattern,
    pub classification: UrschelClassification,
    /// Urschel vertices, ascending; coordinates of the projected space.
    pub urschel: Vec<usize>,
    pub generators: Vec<Generator>,
    /// Full first-order correction for each generator.
    pub images: Vec<DVector<f64>>,
    /// Orthonormal basis of the projected image, in Urschel coordinates.
    pub basis: Vec<DVector<f64>>,
    /// Free vertices `V′`: any sign pattern on them is realizable.
    pub free: Vec<usize>,
    pinv: SymMatrix,
    rref: DMatrix<f64>,
    pivots: Vec<usize>,
    free_cols: Vec<usize>,
}

/// A perturbation `M₁` and its first-order eigenvector correction.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbDirection {
    /// Normalized so that `‖M₁‖∞ = 1`.
    pub m1: SymMatrix,
    pub f1: DVector<f64>,
    pub eps_used: f64,
}

/// Build the image basis for eigenvalue index `k` (1-based) of `lap`.
pub fn perturbation_image_basis(
    lap: &GeneralizedLaplacian,
    k: usize,
    zero_tol: f64,
    group_tol: Option<f64>,
) -> Result<ImageBasis> {
    let spec = eig_sym(lap.matrix())?;
    check_simple(&spec, k, group_tol.unwrap_or(spec.default_group_tol()))?;
    ImageBasis::from_spectrum(lap, &spec, k, zero_tol, None)
}

fn check_simple(spec: &Spectrum, k: usize, group_tol: f64) -> Result<()> {
    let n = spec.n();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { k, n });
    }
    let groups = group_eigenvalues(spec, group_tol);
    let g = group_of(&groups, k).expect("groups cover every index");
    if g.m != 1 {
        return Err(Error::NotSimple { k, m: g.m });
    }
    Ok(())
}

impl ImageBasis {
    pub fn from_spectrum(
        lap: &GeneralizedLaplacian,
        spec: &Spectrum,
        k: usize,
        zero_tol: f64,
        reference: Option<&DVector<f64>>,
    ) -> Result<ImageBasis> {
        let g = lap.graph();
        let lambda = spec.value(k);
        let mut f = spec.vector(k).clone();
        if reference.is_some_and(|r| f.dot(r) < 0.0) {
            f.neg_mut();
        }
        let pattern = nodal::sign_pattern(&f, zero_tol)?;
        let classification = urschel::classify_pattern(g, &pattern)?;
        let urschel = classification.urschel();
        if urschel.is_empty() {
            return Err(Error::NoUrschelVertices);
        }
        let pinv = pseudoinverse_from_spectrum(spec, lambda, RANK_TOL * lap.matrix().norm_inf());

        let mut generators: Vec<Generator> =
            classification.non_urschel.iter().map(|&v| Generator::Diagonal(v)).collect();
        for &u in &classification.shallow {
            for &v in g.neighbors(u)? {
                if !classification.is_urschel(v) {
                    generators.push(Generator::Edge(u, v));
                }
            }
        }
        let images: Vec<DVector<f64>> =
            generators.iter().map(|gen| -(pinv.mul_vec(&gen.apply(&f)))).collect();

        let a = projected_images(&images, &urschel);
        let basis = column_space(&a)?;
        let u_dim = urschel.len();
        let mut projector = DMatrix::<f64>::identity(u_dim, u_dim);
        for q in &basis {
            projector -= q * q.transpose();
        }
        let (rref, pivots) = rref(projector, PIVOT_TOL);
        let free_cols: Vec<usize> = (0..u_dim).filter(|c| !pivots.contains(c)).collect();
        if free_cols.len() != basis.len() {
            return Err(Error::SingularSystem(format!(
                "image has dimension {} but elimination left {} free coordinates",
                basis.len(),
                free_cols.len()
            )));
        }
        let free = free_cols.iter().map(|&c| urschel[c]).collect();
        Ok(ImageBasis {
            k,
            lambda,
            f,
            pattern,
            classification,
            urschel,
            generators,
            images,
            basis,
            free,
            pinv,
            rref,
            pivots,
            free_cols,
        })
    }

    pub fn pseudoinverse(&self) -> &SymMatrix {
        &self.pinv
    }

    /// Find `M₁` in the span of the generators whose `f¹` equals `target` on
    /// the free set. Pivot coordinates take the values forced by the image.
    pub fn realize(&self, target: &[f64]) -> Result<PerturbDirection> {
        if target.len() != self.free.len() {
            return Err(Error::Dimension { expected: self.free.len(), found: target.len() });
        }
        let mut x = DVector::zeros(self.urschel.len());
        for (&c, &t) in self.free_cols.iter().zip(target) {
            x[c] = t;
        }
        for (row, &p) in self.pivots.iter().enumerate() {
            x[p] = -self.free_cols.iter().map(|&c| self.rref[(row, c)] * x[c]).sum::<f64>();
        }

        let a = projected_images(&self.images, &self.urschel);
        let coeffs = svd_jacobi(&a)?.solve(&x, SVD_REL_TOL);
        let resid = (&a * &coeffs - &x).amax();
        if resid > REALIZE_TOL * (1.0 + x.amax()) {
            return Err(Error::SingularSystem(format!("least-squares residual {resid:e}")));
        }

        let n = self.f.len();
        let mut m1 = SymMatrix::zeros(n);
        for (gen, &c) in self.generators.iter().zip(coeffs.iter()) {
            gen.add_to(&mut m1, c);
        }
        let scale = m1.norm_inf();
        if scale == 0.0 {
            return Err(Error::SingularSystem("zero perturbation".into()));
        }
        let m1 = SymMatrix::zeros(n).add_scaled(&m1, 1.0 / scale);
        let f1 = first_order_correction(&self.pinv, &m1, &self.f);
        Ok(PerturbDirection { m1, f1, eps_used: 0.0 })
    }
}

fn projected_images(images: &[DVector<f64>], coords: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(coords.len(), images.len(), |i, j| images[j][coords[i]])
}

/// Orthonormal basis of the column space, dropping directions below a
/// relative singular-value cut.
fn column_space(a: &DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return Ok(Vec::new());
    }
    Ok(svd_jacobi(a)?.column_space(SVD_REL_TOL))
}

/// Reduced row echelon form with partial pivoting and an absolute pivot
/// threshold. Returns the reduced matrix (pivot rows first) and the pivot
/// column of each pivot row.
pub(crate) fn rref(mut m: DMatrix<f64>, tol: f64) -> (DMatrix<f64>, Vec<usize>) {
    let (rows, cols) = m.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) =
            (r..rows).map(|i| (i, m[(i, c)].abs())).fold((r, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if val <= tol {
            for i in r..rows {
                m[(i, c)] = 0.0;
            }
            continue;
        }
        m.swap_rows(r, best);
        let p = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let factor = m[(i, c)];
                if factor != 0.0 {
                    for j in 0..cols {
                        m[(i, j)] -= factor * m[(r, j)];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

/// Diagnostics for one accepted step `M ← M + εM₁`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub eps: f64,
    pub halvings: usize,
    /// Nonzero upper-triangle entries of `M₁`.
    pub m1: Vec<(usize, usize, f64)>,
    pub free: Vec<usize>,
    pub target: String,
    pub zeros_before: usize,
    pub zeros_after: usize,
    pub eigenvalue: f64,
    pub gap: f64,
    /// `|λ(ε) - λ - ε (f, M₁ f)|`.
    pub slope_error: f64,
    /// `‖v(e) - f - e f¹‖∞` at `e = ε, ε/2, ε/4`, with `(v(e), f) = 1`.
    pub residuals: [f64; 3],
    pub ratios: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigningCertificate {
    pub k: usize,
    /// Requested first-order signs on the free set.
    pub target: String,
    pub signing: Signing,
    pub snd_value: usize,
    pub bound_holds: bool,
    pub chain: Vec<ChainStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimpleCertification {
    pub k: usize,
    pub lambda: f64,
    pub pattern: SignPattern,
    pub classification: UrschelClassification,
    pub free: Vec<usize>,
    pub image_dim: usize,
    pub certificates: Vec<SigningCertificate>,
}

impl SimpleCertification {
    /// Number of distinct certified signings.
    pub fn distinct_signings(&self) -> usize {
        let mut seen: Vec<&Signing> = self.certificates.iter().map(|c| &c.signing).collect();
        seen.sort_by_key(|s| s.to_string());
        seen.dedup();
        seen.len()
    }
}

fn target_string(target: &[f64]) -> String {
    target.iter().map(|&t| if t > 0.0 { '+' } else { '-' }).collect()
}

/// Produce signing certificates for the simple eigenvalue `λ_k`.
pub fn certify_simple(
    lap: &GeneralizedLaplacian,
    k: usize,
    opts: &CertifyOptions,
) -> Result<SimpleCertification> {
    let spec = eig_sym(lap.matrix())?;
    let group_tol = opts.group_tol.unwrap_or(spec.default_group_tol());
    check_simple(&spec, k, group_tol)?;
    let ctx = ImageBasis::from_spectrum(lap, &spec, k, opts.zero_tol, None)?;
    let s = ctx.free.len();
    if s == 0 {
        return Err(Error::SingularSystem("empty free set".into()));
    }

    let targets: Vec<Vec<f64>> = if opts.all_patterns && s <= opts.max_pattern_bits {
        (0..1u64 << s)
            .map(|mask| (0..s).map(|b| if mask >> b & 1 == 1 { 1.0 } else { -1.0 }).collect())
            .collect()
    } else {
        vec![vec![1.0; s], vec![-1.0; s]]
    };

    let certificates = targets
        .iter()
        .map(|t| run_chain(lap, &ctx, t, group_tol, opts))
        .collect::<Result<Vec<_>>>()?;

    Ok(SimpleCertification {
        k,
        lambda: ctx.lambda,
        pattern: ctx.pattern.clone(),
        classification: ctx.classification.clone(),
        free: ctx.free.clone(),
        image_dim: ctx.basis.len(),
        certificates,
    })
}

fn run_chain(
    lap: &GeneralizedLaplacian,
    first: &ImageBasis,
    target: &[f64],
    group_tol: f64,
    opts: &CertifyOptions,
) -> Result<SigningCertificate> {
    let g = lap.graph();
    let k = first.k;
    let original = first.pattern.clone();
    let mut current = lap.clone();
    let mut ctx = first.clone();
    let mut dir = ctx.realize(target)?;
    let mut target_str = target_string(target);
    let mut chain = Vec::new();

    loop {
        let (next, spec, step) = take_step(&current, &ctx, &dir, &target_str, group_tol, opts)?;
        let done = step.zeros_after == 0;
        chain.push(step);
        if done {
            let v = spec.vector(k);
            let aligned = if v.dot(&ctx.f) < 0.0 { -v } else { v.clone() };
            let pattern = nodal::sign_pattern(&aligned, opts.zero_tol)?;
            let signing = Signing::new(pattern).expect("no zeros left");
            if !signing.is_signing_of(&original) {
                return Err(Error::StepValidation("final signs disagree with the original pattern".into()));
            }
            let snd_value = nodal::snd(g, signing.pattern())?;
            return Ok(SigningCertificate {
                k,
                target: target_string(target),
                signing,
                snd_value,
                bound_holds: snd_value <= k,
                chain,
            });
        }
        if chain.len() > g.n() {
            return Err(Error::StepValidation("chain did not terminate".into()));
        }
        current = next;
        ctx = ImageBasis::from_spectrum(&current, &spec, k, opts.zero_tol, Some(&ctx.f))?;
        let ones = vec![1.0; ctx.free.len()];
        if ones.is_empty() {
            return Err(Error::SingularSystem("empty free set in chain".into()));
        }
        dir = ctx.realize(&ones)?;
        target_str = target_string(&ones);
    }
}

fn aligned_vector(spec: &Spectrum, k: usize, reference: &DVector<f64>) -> DVector<f64> {
    let v = spec.vector(k);
    if v.dot(reference) < 0.0 {
        -v
    } else {
        v.clone()
    }
}

fn neighbour_gap(spec: &Spectrum, k: usize) -> f64 {
    let vals = spec.values();
    let lam = vals[k - 1];
    let below = if k >= 2 { lam - vals[k - 2] } else { f64::INFINITY };
    let above = if k < vals.len() { vals[k] - lam } else { f64::INFINITY };
    below.min(above)
}

type StepOutcome = (GeneralizedLaplacian, Spectrum, ChainStep);

fn take_step(
    current: &GeneralizedLaplacian,
    ctx: &ImageBasis,
    dir: &PerturbDirection,
    target: &str,
    group_tol: f64,
    opts: &CertifyOptions,
) -> Result<StepOutcome> {
    let k = ctx.k;
    let g = current.graph();
    let m = current.matrix();
    let f1_u = ctx.urschel.iter().map(|&u| dir.f1[u].abs()).fold(0.0, f64::max);
    let significant: Vec<(usize, Sign)> = ctx
        .urschel
        .iter()
        .filter(|&&u| dir.f1[u].abs() > opts.zero_tol * f1_u)
        .map(|&u| (u, Sign::of(dir.f1[u])))
        .collect();
    let zeros_before = ctx.pattern.zero_count();

    let mut eps = 0.1 * current.min_edge_magnitude() / (1.0 + dir.m1.norm_inf());
    let mut reason = String::new();
    for halvings in 0..=opts.max_halvings {
        let cand = m.add_scaled(&dir.m1, eps);
        let attempt = (|| -> std::result::Result<StepOutcome, String> {
            let lap = GeneralizedLaplacian::new(g.clone(), cand.clone()).map_err(|e| e.to_string())?;
            let spec = eig_sym(&cand).map_err(|e| e.to_string())?;
            let groups = group_eigenvalues(&spec, group_tol);
            let grp = group_of(&groups, k).expect("groups cover every index");
            let gap = neighbour_gap(&spec, k);
            if grp.m != 1 || gap <= 10.0 * group_tol {
                return Err(format!("eigenvalue {k} not isolated (gap {gap:e})"));
            }
            let v = aligned_vector(&spec, k, &ctx.f);
            let q = nodal::sign_pattern(&v, opts.zero_tol).map_err(|e| e.to_string())?;
            if !q.refines(&ctx.pattern) {
                return Err("sign flip on a previously nonzero vertex".into());
            }
            // Raw sign: a predicted entry may still sit under the zero threshold.
            if let Some((u, _)) = significant.iter().find(|(u, s)| Sign::of(v[*u]) != *s) {
                return Err(format!("vertex {u} disagrees with the first-order sign"));
            }
            let zeros_after = q.zero_count();
            if zeros_after >= zeros_before {
                return Err("no new nonzero vertices".into());
            }
            let lambda_eps = spec.value(k);
            let slope_error = (lambda_eps - ctx.lambda - eps * rayleigh_slope(&dir.m1, &ctx.f)).abs();
            let residuals = first_order_residuals(m, dir, ctx, eps).map_err(|e| e.to_string())?;
            let ratios = [residuals[0] / residuals[1], residuals[1] / residuals[2]];
            let step = ChainStep {
                eps,
                halvings,
                m1: dir.m1.triplets(),
                free: ctx.free.clone(),
                target: target.to_string(),
                zeros_before,
                zeros_after,
                eigenvalue: lambda_eps,
                gap,
                slope_error,
                residuals,
                ratios,
            };
            Ok((lap, spec, step))
        })();
        match attempt {
            Ok(out) => return Ok(out),
            Err(r) => reason = r,
        }
        eps *= 0.5;
    }
    Err(Error::StepValidation(format!(
        "no valid step after {} halvings (last eps {eps:e}): {reason}",
        opts.max_halvings
    )))
}

/// `‖v(e) - f - e f¹‖∞` for `e = ε, ε/2, ε/4`, using the normalization
/// `(v(e), f) = 1`.
pub fn first_order_residuals(
    m: &SymMatrix,
    dir: &PerturbDirection,
    ctx: &ImageBasis,
    eps: f64,
) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (i, e) in [eps, eps / 2.0, eps / 4.0].into_iter().enumerate() {
        let spec = eig_sym(&m.add_scaled(&dir.m1, e))?;
        let v = spec.vector(ctx.k);
        let v = v / v.dot(&ctx.f);
        out[i] = (v - &ctx.f - &dir.f1 * e).amax();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use approx::assert_abs_diff_eq;

    fn worked_example() -> GeneralizedLaplacian {
        let g = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let m = SymMatrix::from_rows(&[
            vec![1.0, -1.0, -1.0, -1.0],
            vec![-1.0, -1.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        GeneralizedLaplacian::new(g, m).unwrap()
    }

    fn dirichlet_path(n: usize) -> GeneralizedLaplacian {
        let g = Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap();
        let mut m = SymMatrix::diagonal(&vec![2.0; n]);
        for i in 1..n {
            m.set_sym(i - 1, i, -1.0);
        }
        GeneralizedLaplacian::new(g, m).unwrap()
    }

    #[test]
    fn rref_identifies_free_columns() {
        let (r, pivots) = rref(DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]), 1e-8);
        assert_eq!(pivots, vec![0]);
        assert_abs_diff_eq!(r[(0, 1)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[(1, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn worked_example_image_and_free_set() {
        let ctx = perturbation_image_basis(&worked_example(), 3, 1e-7, None).unwrap();
        assert_eq!(ctx.urschel, vec![0, 1]);
        assert_eq!(ctx.classification.shallow, vec![0]);
        assert_eq!(ctx.classification.deep, vec![1]);
        assert_eq!(ctx.basis.len(), 1);
        assert_eq!(ctx.free, vec![1]);
        let b = &ctx.basis[0];
        assert_abs_diff_eq!(b[0] + b[1], 0.0, epsilon = 1e-12);

        let f = DVector::from_vec(vec![0.0, 0.0, 1.0, -1.0]);
        let m1 = SymMatrix::diagonal(&[0.0, 0.0, 0.0, 1.0]);
        let f1 = first_order_correction(ctx.pseudoinverse(), &m1, &f);
        for (got, want) in f1.iter().zip([-0.5, 0.5, -0.5, -0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn realized_target_signs() {
        let ctx = perturbation_image_basis(&worked_example(), 3, 1e-7, None).unwrap();
        let up = ctx.realize(&[1.0]).unwrap();
        let down = ctx.realize(&[-1.0]).unwrap();
        assert!(up.f1[1] > 0.0 && up.f1[0] < 0.0);
        assert_abs_diff_eq!((&up.f1 + &down.f1).amax(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(up.m1.norm_inf(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(up.f1.dot(&ctx.f), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn worked_example_certificates() {
        let cert = certify_simple(&worked_example(), 3, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.certificates.len(), 2);
        assert_eq!(cert.distinct_signings(), 2);
        let snds: Vec<usize> = cert.certificates.iter().map(|c| c.snd_value).collect();
        assert!(snds.iter().all(|&s| s <= 3));
        assert!(snds.contains(&3));
        assert_eq!(nodal::snd(worked_example().graph(), &cert.pattern).unwrap(), 2);
    }

    #[test]
    fn odd_path_all_patterns() {
        let opts = CertifyOptions { all_patterns: true, ..Default::default() };
        let cert = certify_simple(&dirichlet_path(5), 3, &opts).unwrap();
        assert_eq!(cert.free, vec![1, 3]);
        assert_eq!(cert.certificates.len(), 4);
        assert_eq!(cert.distinct_signings(), 4);
        assert!(cert.certificates.iter().all(|c| c.snd_value == 3));
    }

    #[test]
    fn multiple_eigenvalue_is_rejected() {
        let g = Graph::new(5, (1..5).map(|i| (0, i))).unwrap();
        let lap = crate::specmat::classical_laplacian(&g);
        assert!(matches!(
            certify_simple(&lap, 3, &CertifyOptions::default()),
            Err(Error::NotSimple { k: 3, m: 3 })
        ));
    }
}
