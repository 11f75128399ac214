use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsylv::gen::{perturb_phi_rhs, perturb_rhs, planted_phi_system, planted_system, PhiDims, SystemDims};
use qsylv::phi::{check_phi_system, solve_phi_system};
use qsylv::sylvester::{check_system, residuals, solve_system, FourTermEquation, SylvesterSystem};
use qsylv::{Error, Involution, QuatMatrix};
use qsylv_oracle::*;

fn ones_system() -> SylvesterSystem {
    let one = QuatMatrix::identity(1);
    let eq = FourTermEquation::new(
        one.clone(),
        one.clone(),
        one.clone(),
        one.clone(),
        one.clone(),
        one.clone(),
        one,
    )
    .unwrap();
    SylvesterSystem::new(vec![eq]).unwrap()
}

fn zero_system(k: usize, d: usize) -> SylvesterSystem {
    let z = || QuatMatrix::zeros(d, d);
    let eqs = (0..k)
        .map(|_| FourTermEquation::new(z(), z(), z(), z(), z(), z(), z()).unwrap())
        .collect();
    SylvesterSystem::new(eqs).unwrap()
}

/// Tall enough that a random right-hand side is outside the range.
fn overdetermined(k: usize) -> SystemDims {
    SystemDims {
        p: vec![4; k],
        q: vec![4; k],
        a: vec![1; k],
        b: vec![1; k],
        z: vec![(1, 1); k + 1],
    }
}

fn flatten(ms: &[QuatMatrix]) -> DVector<f64> {
    DVector::from_iterator(
        ms.iter().map(|m| 4 * m.rows() * m.cols()).sum(),
        ms.iter().flat_map(|m| m.data().iter().flat_map(|q| q.to_array())),
    )
}

#[test]
fn unit_scalar_equation_is_four_identities() {
    let rls = realify(&ones_system());
    assert_eq!(rls.m.shape(), (4, 16));
    let i4 = DMatrix::<f64>::identity(4, 4);
    for blk in 0..4 {
        assert_eq!(rls.m.view((0, 4 * blk), (4, 4)), i4);
    }
    let names: Vec<&str> = rls.layout.iter().map(|b| b.name.as_str()).collect();
    assert_eq!(names, ["X1", "Y1", "Z1", "Z2"]);
    assert_eq!(rls.b.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
    assert!(oracle_consistent(&rls, None));
}

#[test]
fn zero_system_has_zero_realification() {
    let rls = realify(&zero_system(2, 2));
    assert!(rls.m.iter().all(|&v| v == 0.0));
    assert!(rls.b.iter().all(|&v| v == 0.0));
    assert!(oracle_consistent(&rls, None));
    let (v, residual) = oracle_solve(&rls);
    assert!(v.iter().all(|&x| x == 0.0));
    assert_eq!(residual, 0.0);
}

#[test]
fn zero_map_with_nonzero_rhs_is_inconsistent() {
    let mut rls = realify(&zero_system(1, 1));
    rls.b[2] = 1.0;
    let verdict = oracle_verdict(&rls, None);
    assert!(!verdict.consistent);
    assert_eq!((verdict.rank_m, verdict.rank_augmented), (0, 1));
}

#[test]
fn planted_unknowns_satisfy_the_real_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 1..=3 {
        let dims = SystemDims::random(&mut rng, k, 1, 3);
        let (sys, plant) = planted_system(&mut rng, &dims, None);
        let rls = realify(&sys);
        let mut blocks = plant.x.clone();
        blocks.extend(plant.y.iter().cloned());
        blocks.extend(plant.z.iter().cloned());
        let v = flatten(&blocks);
        let scale = 1.0 + rls.b.norm();
        assert!((&rls.m * &v - &rls.b).norm() <= 1e-12 * scale);
        assert!(oracle_consistent(&rls, None));
        let (_, residual) = oracle_solve(&rls);
        assert!(residual <= 1e-10 * scale, "k={k}: residual {residual:e}");
    }
}

#[test]
fn unpacked_residuals_match_the_oracle_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 1..=3 {
        for consistent in [true, false] {
            let (sys, _) = planted_system(&mut rng, &overdetermined(k), None);
            let sys = if consistent {
                sys
            } else {
                perturb_rhs(&mut rng, &sys, k - 1, 1.0)
            };
            let (sol, residual) = oracle_solution(&sys);
            let total = sol.residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
            let scale = 1.0 + realify(&sys).b.norm();
            assert!((total - residual).abs() <= 1e-10 * scale);
            assert_eq!(residuals(&sys, &sol).unwrap(), sol.residuals);
        }
    }
}

#[test]
fn inconsistent_residual_is_clearly_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (sys, _) = planted_system(&mut rng, &overdetermined(1), None);
    let bad = perturb_rhs(&mut rng, &sys, 0, 1.0);
    let rls = realify(&bad);
    let verdict = oracle_verdict(&rls, None);
    assert!(!verdict.consistent);
    let (_, residual) = oracle_solve(&rls);
    assert!(residual > 10.0 * verdict.tol);
}

#[test]
fn oracle_checker_and_solver_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for trial in 0..24 {
        let k = 1 + trial % 3;
        let dims = if trial % 2 == 0 {
            overdetermined(k)
        } else {
            SystemDims::random(&mut rng, k, 1, 3)
        };
        let (sys, _) = planted_system(&mut rng, &dims, None);
        let sys = if trial % 4 < 2 {
            sys
        } else {
            perturb_rhs(&mut rng, &sys, trial % k, 1.0)
        };
        let oracle = oracle_consistent(&realify(&sys), None);
        let checked = check_system(&sys, None).unwrap().consistent;
        let solved = match solve_system(&sys, None) {
            Ok(_) => true,
            Err(Error::InconsistentSystem(_)) => false,
            Err(e) => panic!("trial {trial}: {e}"),
        };
        assert_eq!(oracle, checked, "trial {trial}");
        assert_eq!(oracle, solved, "trial {trial}");
    }
}

#[test]
fn certified_inconsistent_is_rejected_by_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let (sys, attempts) = certified_inconsistent(&mut rng, &overdetermined(2), None, 100).unwrap();
    assert!(attempts >= 1);
    assert!(!oracle_consistent(&realify(&sys), None));
}

#[test]
fn underdetermined_systems_cannot_be_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let dims = SystemDims {
        p: vec![1],
        q: vec![1],
        a: vec![2],
        b: vec![2],
        z: vec![(1, 1), (1, 1)],
    };
    assert!(certified_inconsistent(&mut rng, &dims, None, 5).is_none());
}

#[test]
fn phi_realification_appends_symmetry_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let phi = Involution::from_axis([0.0, 0.0, 1.0]).unwrap();
    let dims = PhiDims::uniform(2, 2);
    let (ps, plant) = planted_phi_system(&mut rng, phi, &dims, None);
    let rls = realify_phi(&ps);
    assert_eq!(rls.m.nrows(), 4 * (2 * 4) + 4 * (3 * 4));
    let mut blocks = plant.x.clone();
    blocks.extend(plant.z.iter().cloned());
    let v = flatten(&blocks);
    let scale = 1.0 + rls.b.norm();
    assert!((&rls.m * &v - &rls.b).norm() <= 1e-12 * scale);
    assert!(oracle_consistent(&rls, None));
    let (sol, residual) = oracle_phi_solution(&ps);
    assert!(residual <= 1e-10 * scale);
    assert!(sol.phi_defects.iter().all(|&d| d <= 1e-10 * scale));
}

#[test]
fn phi_oracle_agrees_with_checker_and_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let axes = [[0.0, 0.0, 1.0], [1.0, 2.0, -2.0]];
    for trial in 0..12 {
        let phi = Involution::from_axis(axes[trial % 2]).unwrap();
        let k = 1 + trial % 3;
        let dims = PhiDims {
            p: vec![3; k],
            a: vec![1; k],
            s: vec![1; k + 1],
        };
        let (ps, _) = planted_phi_system(&mut rng, phi, &dims, None);
        let ps = if trial < 6 {
            ps
        } else {
            perturb_phi_rhs(&mut rng, &ps, 0, 1.0)
        };
        let oracle = oracle_consistent(&realify_phi(&ps), None);
        assert_eq!(oracle, trial < 6, "trial {trial}");
        assert_eq!(check_phi_system(&ps, None).unwrap().consistent, oracle, "trial {trial}");
        assert_eq!(solve_phi_system(&ps, None).is_ok(), oracle, "trial {trial}");
    }
}

#[test]
fn unpack_reads_row_major_components() {
    let layout = vec![UnknownBlock {
        name: "Z1".into(),
        rows: 1,
        cols: 2,
        offset: 0,
    }];
    let v: Vec<f64> = (0..8).map(f64::from).collect();
    let m = &unpack(&layout, &v)[0];
    assert_eq!(m.get(0, 1).to_array(), [4.0, 5.0, 6.0, 7.0]);
}
