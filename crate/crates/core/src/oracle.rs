//! Brute-force verification of the nodal bounds on every eigenvector of an
//! instance, plus residual audits of the eigendecomposition.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nodal::{self, snd, urschel_profile, wnd, SignPattern, UrschelProfile};
use crate::perturb::{
    certify_simple, split_first_order_check, split_group, verify_multi_bounds, CertifyOptions,
    MultiBoundRecord, SimpleCertification, SplitBasis,
};
use crate::specmat::{eig_sym, group_eigenvalues, EigGroup, GeneralizedLaplacian, Spectrum};
use crate::urschel::{classify_pattern, classify_subspace, UrschelClassification};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    pub zero_tol: f64,
    pub group_tol: Option<f64>,
    pub max_zeros: usize,
    /// Restrict per-vector work to one 1-based index.
    pub k: Option<usize>,
    pub certify: bool,
    pub certify_all_patterns: bool,
    pub split_multi: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            zero_tol: nodal::ZERO_TOL,
            group_tol: None,
            max_zeros: nodal::MAX_ZEROS,
            k: None,
            certify: false,
            certify_all_patterns: false,
            split_multi: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub value: usize,
    pub bound: usize,
    pub holds: bool,
    /// False when the zero pattern is threshold-ambiguous; such failures
    /// are reported but not counted as violations.
    pub conclusive: bool,
}

fn check(name: &'static str, value: usize, bound: usize) -> BoundCheck {
    BoundCheck { name, value, bound, holds: value <= bound, conclusive: true }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub ell: usize,
    pub un: usize,
    pub un_max: usize,
    pub histogram: Vec<(usize, u64)>,
    pub witnesses: Vec<(usize, String)>,
}

impl From<&UrschelProfile> for ProfileSummary {
    fn from(p: &UrschelProfile) -> Self {
        ProfileSummary {
            ell: p.ell,
            un: p.un(),
            un_max: p.un_max(),
            histogram: p.histogram.clone(),
            witnesses: p.witnesses.iter().map(|(v, s)| (*v, s.to_string())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenRecord {
    pub k: usize,
    pub lambda: f64,
    pub group_k: usize,
    pub group_m: usize,
    pub vector: Vec<f64>,
    pub pattern: String,
    pub zeros: usize,
    /// Zero entries that sit close to the threshold.
    pub near_zero: Vec<usize>,
    pub snd: usize,
    pub wnd: usize,
    pub classification: UrschelClassification,
    pub profile: Option<ProfileSummary>,
    /// Why the signing enumeration was skipped, if it was.
    pub skipped: Option<String>,
    pub checks: Vec<BoundCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRecord {
    pub group: EigGroup,
    pub classification: UrschelClassification,
    pub split: Option<SplitBasis>,
    pub multi_bounds: Vec<MultiBoundRecord>,
    pub first_order_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub k: usize,
    pub check: &'static str,
    pub value: usize,
    pub bound: usize,
    pub pattern: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationRecord {
    pub k: usize,
    pub result: Option<SimpleCertification>,
    pub error: Option<String>,
    /// Every certificate has `UN(f_k) ≤ SND ≤ k`.
    pub sandwich_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Audit {
    pub max_residual: f64,
    pub max_orthogonality_error: f64,
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub n: usize,
    pub group_tol: f64,
    pub eigenvalues: Vec<f64>,
    pub groups: Vec<EigGroup>,
    pub audit: Audit,
    pub records: Vec<EigenRecord>,
    pub group_records: Vec<GroupRecord>,
    pub certifications: Vec<CertificationRecord>,
    pub violations: Vec<Violation>,
    pub all_bounds_hold: bool,
}

pub fn audit(m: &GeneralizedLaplacian, spec: &Spectrum) -> Audit {
    let mat = m.matrix();
    let n = spec.n();
    let scale = mat.norm_inf().max(f64::MIN_POSITIVE);
    let mut max_residual: f64 = 0.0;
    let mut recon = DMatrix::<f64>::zeros(n, n);
    for (lam, v) in spec.values().iter().zip(spec.vectors()) {
        max_residual = max_residual.max((mat.mul_vec(v) - v * *lam).amax() / scale);
        recon += v * v.transpose() * *lam;
    }
    let mut orth: f64 = 0.0;
    for (i, a) in spec.vectors().iter().enumerate() {
        for (j, b) in spec.vectors().iter().enumerate().skip(i) {
            let want = if i == j { 1.0 } else { 0.0 };
            orth = orth.max((a.dot(b) - want).abs());
        }
    }
    let diff = recon - mat.matrix();
    let reconstruction_error =
        diff.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    Audit { max_residual, max_orthogonality_error: orth, reconstruction_error }
}

fn vanishes_on_component(g: &Graph, p: &SignPattern) -> bool {
    g.connected_components(&(0..g.n()).collect::<Vec<_>>())
        .unwrap_or_default()
        .iter()
        .any(|part| part.iter().all(|&v| p.signs()[v] == nodal::Sign::Zero))
}

fn eigen_record(g: &Graph, spec: &Spectrum, group: &EigGroup, k: usize, opts: &OracleOptions) -> Result<EigenRecord> {
    let f = spec.vector(k);
    let p = nodal::sign_pattern(f, opts.zero_tol)?;
    let s = snd(g, &p)?;
    let w = wnd(g, &p)?;
    let classification = classify_pattern(g, &p)?;
    let zeros = p.zero_count();
    let k0 = group.k;
    let m = group.m;

    let mut checks = vec![check("wnd_le_k", w, k0), check("snd_le_k_plus_m_minus_1", s, k0 + m - 1)];
    if zeros == 0 {
        checks.push(check("nowhere_zero_snd_le_k", s, k0));
    }

    let (profile, skipped) = if vanishes_on_component(g, &p) {
        (None, Some("pattern vanishes on a component".to_string()))
    } else {
        match urschel_profile(g, &p, opts.max_zeros) {
            Ok(prof) => (Some(prof), None),
            Err(e @ Error::EnumerationBudget { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        }
    };

    if let Some(prof) = &profile {
        checks.push(check("wnd_le_un", w, prof.un()));
        checks.push(check("un_le_snd", prof.un(), s));
        if m == 1 && zeros > 0 {
            let shallow = classification.shallow.len() as u32;
            checks.push(check("un_2_le_k", prof.un_i(2).expect("at least two signings"), k));
            let idx = 1u64 << shallow.min(63);
            if let Some(v) = prof.un_i(idx) {
                checks.push(check("un_2s_le_k", v, k));
            }
            if classification.deep.is_empty() {
                checks.push(check("un_max_le_k_no_deep", prof.un_max(), k));
            }
        }
    }

    let near_zero = nodal::near_zero_entries(f, opts.zero_tol);
    if !near_zero.is_empty() {
        for c in &mut checks {
            c.conclusive = false;
        }
    }

    Ok(EigenRecord {
        k,
        lambda: spec.value(k),
        group_k: k0,
        group_m: m,
        vector: f.iter().copied().collect(),
        pattern: p.to_string(),
        zeros,
        near_zero,
        snd: s,
        wnd: w,
        classification,
        profile: profile.as_ref().map(ProfileSummary::from),
        skipped,
        checks,
    })
}

/// Run every bound check on every eigenvector of `lap`.
pub fn verify_instance(lap: &GeneralizedLaplacian, opts: &OracleOptions) -> Result<VerificationReport> {
    let g = lap.graph();
    let n = lap.n();
    let spec = eig_sym(lap.matrix())?;
    let group_tol = opts.group_tol.unwrap_or(spec.default_group_tol());
    let groups = group_eigenvalues(&spec, group_tol);
    if let Some(k) = opts.k {
        if k == 0 || k > n {
            return Err(Error::IndexOutOfRange { k, n });
        }
    }
    let wanted = |k: usize| opts.k.is_none_or(|x| x == k);

    let mut records = Vec::new();
    let mut group_records = Vec::new();
    let mut certifications = Vec::new();
    for group in &groups {
        for k in group.k..=group.last() {
            if wanted(k) {
                records.push(eigen_record(g, &spec, group, k, opts)?);
            }
        }
        if group.m > 1 && (group.k..=group.last()).any(wanted) {
            let classification = classify_subspace(g, &spec.group_basis(group), opts.zero_tol)?;
            let (split, multi_bounds, first_order_error) = if opts.split_multi {
                let sb = split_group(&spec, group)?;
                let bounds = verify_multi_bounds(g, &sb, opts.zero_tol, opts.max_zeros)?;
                let err = split_first_order_check(lap, &sb, 1e-3)?;
                (Some(sb), bounds, Some(err))
            } else {
                (None, Vec::new(), None)
            };
            group_records.push(GroupRecord { group: group.clone(), classification, split, multi_bounds, first_order_error });
        }
    }

    if opts.certify {
        let copts = CertifyOptions {
            zero_tol: opts.zero_tol,
            group_tol: Some(group_tol),
            all_patterns: opts.certify_all_patterns,
            ..Default::default()
        };
        for rec in records.iter().filter(|r| r.group_m == 1 && r.zeros > 0) {
            if !rec.near_zero.is_empty() {
                certifications.push(CertificationRecord {
                    k: rec.k,
                    result: None,
                    error: Some(format!("zero pattern is threshold-ambiguous at {:?}", rec.near_zero)),
                    sandwich_holds: None,
                });
                continue;
            }
            let out = certify_simple(lap, rec.k, &copts);
            let sandwich = match (&out, &rec.profile) {
                (Ok(c), Some(p)) => Some(c.certificates.iter().all(|cert| p.un <= cert.snd_value && cert.snd_value <= rec.k)),
                _ => None,
            };
            let (result, error) = match out {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            certifications.push(CertificationRecord { k: rec.k, result, error, sandwich_holds: sandwich });
        }
    }

    let mut violations = Vec::new();
    for rec in &records {
        for c in rec.checks.iter().filter(|c| !c.holds && c.conclusive) {
            violations.push(Violation {
                k: rec.k,
                check: c.name,
                value: c.value,
                bound: c.bound,
                pattern: rec.pattern.clone(),
                vector: rec.vector.clone(),
            });
        }
    }
    for gr in &group_records {
        for b in gr.multi_bounds.iter().filter(|b| b.holds == Some(false)) {
            violations.push(Violation {
                k: b.index,
                check: "split_un_le_two_sided_bound",
                value: b.un.unwrap_or(0),
                bound: b.bound,
                pattern: b.pattern.clone(),
                vector: gr.split.as_ref().map(|s| s.basis[b.j].iter().copied().collect()).unwrap_or_default(),
            });
        }
    }
    let all_bounds_hold = violations.is_empty()
        && certifications.iter().all(|c| c.sandwich_holds != Some(false));

    Ok(VerificationReport {
        n,
        group_tol,
        eigenvalues: spec.values().to_vec(),
        groups,
        audit: audit(lap, &spec),
        records,
        group_records,
        certifications,
        violations,
        all_bounds_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn star_passes_and_reaches_two_weak_domains() {
        let inst = families::star(5).unwrap();
        let rep = verify_instance(&inst.lap, &OracleOptions { split_multi: true, ..Default::default() }).unwrap();
        assert!(rep.all_bounds_hold, "{:?}", rep.violations);
        let ones: Vec<&EigenRecord> = rep.records.iter().filter(|r| r.group_k == 2).collect();
        assert_eq!(ones.len(), 3);
        assert!(ones.iter().all(|r| r.wnd == 2));
        assert_eq!(rep.group_records.len(), 1);
        assert_eq!(rep.group_records[0].multi_bounds.len(), 3);
    }

    #[test]
    fn odd_path_middle_vector() {
        let inst = families::path_dirichlet(5).unwrap();
        let rep = verify_instance(&inst.lap, &OracleOptions { k: Some(3), certify: true, ..Default::default() }).unwrap();
        assert_eq!(rep.records.len(), 1);
        let prof = rep.records[0].profile.as_ref().unwrap();
        assert_eq!((prof.un, prof.un_max), (3, 3));
        assert_eq!(rep.certifications.len(), 1);
        assert_eq!(rep.certifications[0].sandwich_holds, Some(true));
        assert!(rep.all_bounds_hold);
    }

    #[test]
    fn audit_is_tight() {
        let rep = verify_instance(&families::ladder(9).unwrap().lap, &OracleOptions::default()).unwrap();
        assert!(rep.audit.max_residual < 1e-12);
        assert!(rep.audit.max_orthogonality_error < 1e-12);
        assert!(rep.audit.reconstruction_error < 1e-8);
    }
}
