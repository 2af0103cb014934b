//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DVector;
use nodal_core::families::{self, FamilyInstance};
use nodal_core::nodal::{self, snd, urschel_profile, wnd, Sign};
use nodal_core::perturb::{
    certify_simple, first_order_correction, rayleigh_slope, split_group, verify_multi_bounds, CertifyOptions,
};
use nodal_core::specmat::{
    eig_sym, group_eigenvalues, group_of, shifted_pseudoinverse, SymMatrix, RANK_TOL,
};
use nodal_core::urschel::classify_subspace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

const ZT: f64 = nodal::ZERO_TOL;

fn spectrum_tol(m: &SymMatrix) -> f64 {
    1e-8 * (1.0 + m.norm_inf())
}

fn c1_fixtures() -> Outcome {
    let (g, p) = families::fan_fixture();
    let (s, w) = (snd(&g, &p).unwrap(), wnd(&g, &p).unwrap());
    ensure!(s == 3 && w == 2, "fan pattern gave SND {s}, WND {w}");
    let (g, p) = families::path_fixture();
    let prof = urschel_profile(&g, &p, 22).unwrap();
    ensure!(prof.snd_sorted() == vec![1, 2, 2, 3], "path profile {:?}", prof.snd_sorted());
    Ok("SND 3, WND 2; profile [1, 2, 2, 3]".into())
}

fn c2_star() -> Outcome {
    let mut patterns = 0;
    for n in 3..=9 {
        let inst = families::star(n).unwrap();
        let spec = eig_sym(inst.lap.matrix()).unwrap();
        let mut want = vec![0.0, n as f64];
        want.extend(std::iter::repeat_n(1.0, n - 2));
        want.sort_by(f64::total_cmp);
        for (k, (a, b)) in spec.values().iter().zip(&want).enumerate() {
            ensure!((a - b).abs() <= 1e-8, "star {n}: λ_{} = {a}, expected {b}", k + 1);
        }
        let g = inst.graph();
        let leaves = n - 1;
        for code in 0..3usize.pow(leaves as u32) {
            let mut signs = vec![Sign::Zero; n];
            let mut c = code;
            for slot in signs.iter_mut().skip(1) {
                *slot = [Sign::Zero, Sign::Pos, Sign::Neg][c % 3];
                c /= 3;
            }
            let mp = signs.iter().filter(|&&s| s == Sign::Pos).count();
            let mn = signs.iter().filter(|&&s| s == Sign::Neg).count();
            if mp == 0 || mn == 0 {
                continue;
            }
            let f = DVector::from_iterator(
                n,
                signs.iter().map(|s| match s {
                    Sign::Pos => 1.0 / mp as f64,
                    Sign::Neg => -1.0 / mn as f64,
                    Sign::Zero => 0.0,
                }),
            );
            let resid = (inst.lap.matrix().mul_vec(&f) - &f).amax();
            ensure!(resid <= 1e-12, "star {n}: pattern is not a λ = 1 eigenvector");
            let p = nodal::sign_pattern(&f, ZT).unwrap();
            let un = urschel_profile(g, &p, 22).unwrap().un();
            ensure!(un == 1 + mp.min(mn), "star {n}, pattern {p}: UN {un} != 1 + min({mp}, {mn})");
            patterns += 1;
        }
    }
    Ok(format!("n = 3..9 spectra match; {patterns} leaf sign splits give UN = 1 + min(m+, m-)"))
}

/// Real roots of `t³ + pt + q` by the trigonometric formula, ascending.
fn depressed_cubic_roots(p: f64, q: f64) -> [f64; 3] {
    let r = 2.0 * (-p / 3.0).sqrt();
    let phi = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).acos() / 3.0;
    let mut t = [0, 1, 2].map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos());
    t.sort_by(f64::total_cmp);
    t
}

fn c3_worked_example() -> Outcome {
    let lap = families::worked_example();
    let spec = eig_sym(lap.matrix()).unwrap();
    let mut roots = depressed_cubic_roots(-4.0, -2.0).to_vec();
    roots.push(0.0);
    roots.sort_by(f64::total_cmp);
    for (a, b) in spec.values().iter().zip(&roots) {
        ensure!((a - b).abs() <= 1e-8, "eigenvalue {a} vs root {b}");
    }
    ensure!(spec.value(3).abs() <= 1e-8, "λ_3 = {}", spec.value(3));
    let f3 = spec.vector(3);
    let h = 0.5f64.sqrt();
    let dev = (f3 - DVector::from_vec(vec![0.0, 0.0, h, -h])).amax().min((f3 + DVector::from_vec(vec![0.0, 0.0, h, -h])).amax());
    ensure!(dev <= 1e-8, "f_3 not proportional to (0, 0, 1, -1)");

    let n = shifted_pseudoinverse(lap.matrix(), 0.0, RANK_TOL).unwrap();
    let want = families::worked_example_pseudoinverse();
    let err = (n.matrix() - &want).amax();
    ensure!(err <= 1e-9, "pseudoinverse off by {err:e}");

    let f = DVector::from_vec(vec![0.0, 0.0, 1.0, -1.0]);
    let f1 = first_order_correction(&n, &SymMatrix::diagonal(&[0.0, 0.0, 0.0, 1.0]), &f);
    let err = (f1 - DVector::from_vec(vec![-0.5, 0.5, -0.5, -0.5])).amax();
    ensure!(err <= 1e-8, "f¹ off by {err:e}");

    let base = snd(lap.graph(), &nodal::sign_pattern(f3, ZT).unwrap()).unwrap();
    ensure!(base == 2, "SND(f_3) = {base}");
    let cert = certify_simple(&lap, 3, &CertifyOptions::default()).map_err(|e| e.to_string())?;
    let hit = cert.certificates.iter().find(|c| c.snd_value == 3);
    ensure!(hit.is_some(), "no certificate reaches SND 3: {:?}", cert.certificates.iter().map(|c| c.snd_value).collect::<Vec<_>>());
    Ok(format!("roots, N, f¹ match; SND(f_3) = 2, certified signing {} has SND 3", hit.unwrap().signing))
}

fn c4_ladder() -> Outcome {
    for n in 7..=12 {
        let inst = families::ladder(n).unwrap();
        let m = inst.lap.matrix();
        let spec = eig_sym(m).unwrap();
        let tol = spectrum_tol(m);
        for e in &inst.expected {
            ensure!((spec.value(e.index) - e.value).abs() <= tol, "ladder {n}: λ_{} = {} vs {} ({})", e.index, spec.value(e.index), e.value, e.formula);
        }
        let v = spec.values();
        ensure!(v[0].abs() <= tol && v[0] < v[1] && v[1] < 1.0 - 1e-6, "ladder {n}: bottom ordering");
        let groups = group_eigenvalues(&spec, spec.default_group_tol());
        let g3 = group_of(&groups, 3).unwrap();
        ensure!(g3.k == 3 && g3.m == 2 && (g3.lambda - 1.0).abs() <= tol, "ladder {n}: group at 3 is {g3:?}");
        ensure!(v[4] > 1.0 + 1e-6, "ladder {n}: λ_5 = {}", v[4]);
        let twos = groups.iter().filter(|g| (g.lambda - 2.0).abs() <= tol).map(|g| g.m).sum::<usize>();
        ensure!(twos == n - 7, "ladder {n}: eigenvalue 2 multiplicity {twos}");

        let sb = split_group(&spec, g3).map_err(|e| e.to_string())?;
        for (j, f) in sb.basis.iter().enumerate() {
            let a_part = f[0].abs().max(f[2].abs());
            let b_part = f[3].abs().max(f[5].abs());
            let others = (0..n).filter(|i| ![0, 2, 3, 5].contains(i)).map(|i| f[i].abs()).fold(0.0, f64::max);
            ensure!(a_part.min(b_part) <= 1e-6 && others <= 1e-6, "ladder {n}: split vector {j} mixes components");
        }
        let recs = verify_multi_bounds(inst.graph(), &sb, ZT, 22).map_err(|e| e.to_string())?;
        for r in &recs {
            ensure!(r.holds == Some(true) && r.un == Some(2), "ladder {n}: split record {r:?}");
        }
    }
    Ok("n = 7..12 spectra and ordering; split basis is a-only / b-only with UN 2".into())
}

fn c5_double_left() -> Outcome {
    for n in 4..=13 {
        let inst = families::double_left_path(n).unwrap();
        let spec = eig_sym(inst.lap.matrix()).unwrap();
        let tol = spec.default_group_tol();
        let groups = group_eigenvalues(&spec, tol);
        let ones: Vec<_> = groups.iter().filter(|g| (g.lambda - 1.0).abs() <= tol).collect();
        ensure!(ones.len() == 1, "double-left {n}: {} groups at 1", ones.len());
        let grp = ones[0];
        let (m, mult) = families::double_left_index(n);
        let want_mult = if n % 3 == 1 { 2 } else { 1 };
        ensure!(mult == want_mult && grp.m == want_mult && grp.k == m + 1, "double-left {n}: group {grp:?}");

        let c = classify_subspace(inst.graph(), &spec.group_basis(grp), ZT).unwrap();
        if n % 3 == 1 {
            let want: Vec<usize> = (1..=m).map(|i| 3 * i - 1).collect();
            ensure!(c.shallow == want && c.deep.is_empty(), "double-left {n}: {c:?}");
        } else {
            ensure!(c.non_urschel == vec![0, 1], "double-left {n}: {c:?}");
            ensure!(c.shallow == vec![2] && c.deep == (3..n).collect::<Vec<_>>(), "double-left {n}: {c:?}");
        }
    }
    Ok("n = 4..13 multiplicity 2 exactly when n ≡ 1 (mod 3), at index m+1; classifications match".into())
}

/// Instances for the simple-eigenvalue checks, each with an optional index
/// restriction. The shallow/deep family runs at μ = 10 on every index; at
/// the default μ only `f_2` is taken, since the other eigenvectors there have
/// entries of order μ⁻² or smaller that no validated step can resolve.
fn simple_family_instances() -> Vec<(FamilyInstance, Option<usize>)> {
    let mut out: Vec<(FamilyInstance, Option<usize>)> = Vec::new();
    out.extend((3..=9).map(|n| (families::star(n).unwrap(), None)));
    out.extend((3..=9).map(|n| (families::path_dirichlet(n).unwrap(), None)));
    out.extend((7..=12).map(|n| (families::ladder(n).unwrap(), None)));
    out.extend((4..=13).map(|n| (families::double_left_path(n).unwrap(), None)));
    for (s, ell, k) in [(1, 1, 1), (2, 1, 2), (2, 2, 2), (3, 1, 2)] {
        out.push((families::shallow_deep_family(s, k, ell, Some(10.0)).unwrap(), None));
        out.push((families::shallow_deep_family(s, k, ell, None).unwrap(), Some(2)));
    }
    out
}

fn c6_simple_theorems() -> Outcome {
    let opts = CertifyOptions { all_patterns: true, ..Default::default() };
    let mut vectors = 0;
    let mut certs = 0;
    let mut ambiguous = Vec::new();
    for (inst, only) in simple_family_instances() {
        let g = inst.graph();
        let spec = eig_sym(inst.lap.matrix()).unwrap();
        let groups = group_eigenvalues(&spec, spec.default_group_tol());
        for grp in groups.iter().filter(|g| g.m == 1 && only.is_none_or(|k| g.k == k)) {
            let k = grp.k;
            let p = nodal::sign_pattern(spec.vector(k), ZT).unwrap();
            if p.zero_count() == 0 {
                continue;
            }
            if !nodal::near_zero_entries(spec.vector(k), ZT).is_empty() {
                ambiguous.push(format!("{}{:?} k = {k}", inst.name, inst.params));
                continue;
            }
            let label = format!("{} {:?} k = {k}", inst.name, inst.params);
            let cert = certify_simple(&inst.lap, k, &opts).map_err(|e| format!("{label}: {e}"))?;
            ensure!(cert.distinct_signings() >= 2, "{label}: fewer than 2 distinct signings");
            for c in &cert.certificates {
                ensure!(c.signing.is_signing_of(&p), "{label}: certificate is not a signing of f_k");
                ensure!(c.snd_value == snd(g, c.signing.pattern()).unwrap(), "{label}: SND mismatch");
                ensure!(c.snd_value <= k, "{label}: certificate SND {} > k", c.snd_value);
            }
            let prof = urschel_profile(g, &p, 22).unwrap();
            let cls = &cert.classification;
            ensure!(prof.un_i(2).unwrap() <= k, "{label}: UN_2 > k");
            let s = cls.shallow.len();
            ensure!(cert.free.len() >= s, "{label}: free set {} smaller than {s} shallow vertices", cert.free.len());
            ensure!(prof.un_i(1 << s).unwrap() <= k, "{label}: UN_2^s > k");
            if cls.deep.is_empty() {
                let u = cls.urschel().len();
                ensure!(cert.free.len() == u, "{label}: free set {:?} misses Urschel vertices", cert.free);
                ensure!(cert.distinct_signings() == 1 << u, "{label}: {} of {} patterns certified", cert.distinct_signings(), 1 << u);
                ensure!(prof.un_max() <= k, "{label}: UN_max {} > k", prof.un_max());
            }
            vectors += 1;
            certs += cert.certificates.len();
        }
    }
    ensure!(vectors > 0, "no simple eigenvector with zeros found");
    Ok(format!(
        "{vectors} eigenvectors, {certs} certificates, all SND ≤ k; threshold-ambiguous zeros skipped: [{}]",
        ambiguous.join("; ")
    ))
}

fn c7_tightness() -> Outcome {
    for (s, ell, k) in [(1, 1, 1), (2, 1, 2), (2, 2, 2), (3, 1, 2)] {
        let inst = families::shallow_deep_family(s, k, ell, None).unwrap();
        let spec = eig_sym(inst.lap.matrix()).unwrap();
        let groups = group_eigenvalues(&spec, spec.default_group_tol());
        let g2 = group_of(&groups, 2).unwrap();
        ensure!(g2.m == 1 && spec.value(2).abs() <= 1e-8, "(s, ℓ, k) = ({s}, {ell}, {k}): λ_2 = {} in {g2:?}", spec.value(2));
        let p = nodal::sign_pattern(spec.vector(2), ZT).unwrap();
        let prof = urschel_profile(inst.graph(), &p, 22).unwrap();
        let a = prof.un_i(1 << s).unwrap();
        ensure!(a <= 2, "({s}, {ell}, {k}): UN_2^s = {a}");
        if ell >= 1 {
            let b = prof.un_i((1 << s) + 1).unwrap();
            ensure!(b == 3, "({s}, {ell}, {k}): UN_(2^s+1) = {b}");
        }
    }
    Ok("λ_2 = 0 simple; UN_2^s ≤ 2 and UN_(2^s+1) = 3 on all four instances".into())
}

fn c8_multi_bound() -> Outcome {
    let mut cases: Vec<(FamilyInstance, usize, usize)> =
        (5..=8).map(|n| (families::star(n).unwrap(), 2, n - 2)).collect();
    cases.push((families::double_left_path(7).unwrap(), 3, 2));
    let mut summary = Vec::new();
    for (inst, k, m) in cases {
        let spec = eig_sym(inst.lap.matrix()).unwrap();
        let groups = group_eigenvalues(&spec, spec.default_group_tol());
        let grp = group_of(&groups, k).unwrap();
        ensure!(grp.k == k && grp.m == m, "{} n = {}: group {grp:?}", inst.name, inst.n());
        let sb = split_group(&spec, grp).map_err(|e| e.to_string())?;
        let recs = verify_multi_bounds(inst.graph(), &sb, ZT, 22).map_err(|e| e.to_string())?;
        for r in &recs {
            ensure!(r.holds == Some(true), "{} n = {}: j = {} UN {:?} > {}", inst.name, inst.n(), r.j, r.un, r.bound);
        }
        summary.push(format!("{}{}", inst.name, inst.n()));
    }
    Ok(format!("split bases satisfy the two-sided bound on {}", summary.join(", ")))
}

fn c9_first_order() -> Outcome {
    let mut worst_slope: f64 = 0.0;
    let mut ratios = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.gen_range(5..=10);
        let g = families::random_connected_graph(n, 0.4, &mut rng);
        let lap = families::random_laplacian(&g, &mut rng);
        let spec = eig_sym(lap.matrix()).unwrap();
        let gap = |k: usize| {
            let v = spec.values();
            let below = if k > 1 { v[k - 1] - v[k - 2] } else { f64::INFINITY };
            let above = if k < n { v[k] - v[k - 1] } else { f64::INFINITY };
            below.min(above)
        };
        let k = (1..=n).max_by(|&a, &b| gap(a).total_cmp(&gap(b))).unwrap();

        let mut m1 = SymMatrix::zeros(n);
        for v in 0..n {
            m1.set_sym(v, v, rng.gen_range(-1.0..1.0));
        }
        for &(u, v) in g.edges() {
            m1.set_sym(u, v, rng.gen_range(-1.0..1.0));
        }
        let m1 = SymMatrix::zeros(n).add_scaled(&m1, 1.0 / m1.norm_inf());

        let f = spec.vector(k).clone();
        let lam1 = rayleigh_slope(&m1, &f);
        let pinv = shifted_pseudoinverse(lap.matrix(), spec.value(k), RANK_TOL).unwrap();
        let f1 = first_order_correction(&pinv, &m1, &f);
        let resid = |e: f64| {
            let s = eig_sym(&lap.matrix().add_scaled(&m1, e)).unwrap();
            let v = s.vector(k);
            let v = v / v.dot(&f);
            ((v - &f - &f1 * e).amax(), s.value(k))
        };
        for eps in [1e-2, 1e-3] {
            let (r0, lam_eps) = resid(eps);
            let slope_err = (lam_eps - spec.value(k) - eps * lam1).abs();
            worst_slope = worst_slope.max(slope_err / (eps * eps));
            ensure!(slope_err <= 50.0 * eps * eps, "seed {seed}, ε = {eps}: eigenvalue error {slope_err:e}");
            let (r1, _) = resid(eps / 2.0);
            let ratio = r0 / r1;
            ensure!((2.5..=5.5).contains(&ratio), "seed {seed}, ε = {eps}: halving ratio {ratio}");
            ratios.push(ratio);
        }
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    Ok(format!("20 instances; max |Δλ - ελ₁|/ε² = {worst_slope:.3}; halving ratios in [{lo:.3}, {hi:.3}]"))
}

fn c10_large_mu() -> Outcome {
    let (s, ell, k) = (2, 2, 2);
    let devs: Vec<(f64, f64)> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&mu| families::large_mu_deviation(s, k, ell, mu).unwrap())
        .collect();
    for w in devs.windows(2) {
        let top = w[0].0 / w[1].0;
        let bottom = w[0].1 / w[1].1;
        ensure!((5.0..=20.0).contains(&top), "top deviation ratio {top} ({devs:?})");
        ensure!((5.0..=20.0).contains(&bottom), "bottom deviation ratio {bottom} ({devs:?})");
    }
    Ok(format!(
        "deviations (top, bottom): {}",
        devs.iter().map(|(a, b)| format!("({a:.2e}, {b:.2e})")).collect::<Vec<_>>().join(", ")
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 fixture exactness", c1_fixtures),
        ("2 star family", c2_star),
        ("3 four-vertex worked example", c3_worked_example),
        ("4 ladder family", c4_ladder),
        ("5 double-left-end path", c5_double_left),
        ("6 simple-eigenvalue theorems", c6_simple_theorems),
        ("7 shallow/deep tightness", c7_tightness),
        ("8 multiple-eigenvalue bound", c8_multi_bound),
        ("9 first-order perturbation numerics", c9_first_order),
        ("10 large-mu split", c10_large_mu),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let out = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS criterion {name} ({secs:.2}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.2}s): {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
