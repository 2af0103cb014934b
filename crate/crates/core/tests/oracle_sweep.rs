use nalgebra::DMatrix;
use nodal_core::families::{self, schur_det_check, FamilyInstance};
use nodal_core::oracle::{verify_instance, OracleOptions};
use nodal_core::specmat::SymMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn five_hundred_random_instances_have_no_violations() {
    let opts = OracleOptions { split_multi: true, ..Default::default() };
    let mut with_zeros = 0;
    for seed in 0..500u64 {
        let n = 2 + (seed % 9) as usize;
        let lap = families::random_instance(n, seed);
        let rep = verify_instance(&lap, &opts).unwrap();
        assert!(rep.all_bounds_hold, "seed {seed}: {:?}", rep.violations);
        assert!(rep.audit.max_residual <= 1e-9, "seed {seed}: residual {}", rep.audit.max_residual);
        with_zeros += rep.records.iter().filter(|r| r.zeros > 0).count();
    }
    // Random weights almost never produce exact zeros.
    assert!(with_zeros < 10, "{with_zeros} eigenvectors with zeros");
}

fn all_families() -> Vec<FamilyInstance> {
    let mut out = Vec::new();
    out.extend((3..=9).map(|n| families::star(n).unwrap()));
    out.extend((2..=9).map(|n| families::path_dirichlet(n).unwrap()));
    out.extend((7..=12).map(|n| families::ladder(n).unwrap()));
    out.extend((4..=13).map(|n| families::double_left_path(n).unwrap()));
    for (s, ell, k) in [(1, 1, 1), (2, 1, 2), (2, 2, 2), (3, 1, 2), (2, 3, 2)] {
        out.push(families::shallow_deep_family(s, k, ell, None).unwrap());
    }
    out
}

#[test]
fn family_instances_have_no_violations() {
    let opts = OracleOptions { split_multi: true, ..Default::default() };
    for inst in all_families() {
        let rep = verify_instance(&inst.lap, &opts).unwrap();
        assert!(rep.all_bounds_hold, "{} {:?}: {:?}", inst.name, inst.params, rep.violations);
        if inst.name == "shallow-deep" {
            // The tightness vector has structural zeros; its checks must count.
            assert!(rep.records[1].checks.iter().all(|c| c.conclusive && c.holds));
        } else {
            assert!(rep.records.iter().all(|r| r.near_zero.is_empty()), "{} {:?}", inst.name, inst.params);
        }
        for gr in &rep.group_records {
            for b in &gr.multi_bounds {
                assert_ne!(b.holds, Some(false), "{} {:?}: {b:?}", inst.name, inst.params);
            }
        }
    }
}

#[test]
fn certificates_are_sandwiched_by_brute_force() {
    let opts = OracleOptions { certify: true, ..Default::default() };
    let mut checked = 0;
    for inst in [families::star(3).unwrap(), families::path_dirichlet(7).unwrap(), families::ladder(9).unwrap()]
        .into_iter()
        .chain((4..=10).map(|n| families::double_left_path(n).unwrap()))
    {
        let rep = verify_instance(&inst.lap, &opts).unwrap();
        for c in &rep.certifications {
            assert_eq!(c.error, None, "{} {:?} k = {}", inst.name, inst.params, c.k);
            assert_eq!(c.sandwich_holds, Some(true));
            checked += 1;
        }
    }
    assert!(checked >= 5);
}

#[test]
fn schur_identity_on_random_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let mut block = || DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        let (a, b, c, d) = (block(), block(), block(), block());
        let a = a + DMatrix::identity(4, 4) * 3.0;
        let chk = schur_det_check(&a, &b, &c, &d).unwrap();
        assert!(chk.agrees(1e-9), "{chk:?}");
        assert!(chk.via_a.is_some());
    }
}

#[test]
fn schur_identity_on_shifted_worked_example() {
    let m = families::worked_example();
    for shift in [0.5, 1.7, -2.25] {
        let s = m.matrix().shifted(shift);
        let full = s.matrix();
        let a = full.view((0, 0), (2, 2)).into_owned();
        let b = full.view((0, 2), (2, 2)).into_owned();
        let c = full.view((2, 0), (2, 2)).into_owned();
        let d = full.view((2, 2), (2, 2)).into_owned();
        let chk = schur_det_check(&a, &b, &c, &d).unwrap();
        assert!(chk.agrees(1e-9), "shift {shift}: {chk:?}");
        let spec = nodal_core::eig_sym(&SymMatrix::new(full.clone()).unwrap()).unwrap();
        let product: f64 = spec.values().iter().product();
        assert!((product - chk.direct).abs() <= 1e-9 * (1.0 + product.abs()));
    }
}
