//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qsylv::gen::{
    perturb_phi_rhs, planted_phi_system, planted_system, random_matrix, random_matrix_with_rank, PhiDims, SystemDims,
};
use qsylv::linalg::{self, adjoint_pairing_gap, complex_adjoint, marsaglia_styan_check, pinv, projectors};
use qsylv::phi::{check_phi_system, solve_phi_system, to_general_system};
use qsylv::sylvester::{check_system, lemma1_aux, lemma1_consistent, reduce_system, solve_system, SylvesterSystem};
use qsylv::{Error, Involution, QuatMatrix};
use qsylv_oracle::{certified_inconsistent, oracle_consistent, realify};

const PENROSE_TOL: f64 = 1e-10;
const ADJOINT_MUL_TOL: f64 = 1e-12;
const PAIRING_TOL: f64 = 1e-10;
const MARGIN_FLOOR: f64 = 1e3;
const LEMMA_TOL_RES: f64 = 1e-10;
const SOLVE_TOL: f64 = 1e-8;
const PLANTED_BUDGET: Duration = Duration::from_secs(60);
const PHI_DEFECT_TOL: f64 = 1e-10;
const PROPERTY_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `‖a − b‖ / ‖b‖`, zero when both vanish.
fn rel(a: &QuatMatrix, b: &QuatMatrix) -> f64 {
    let d = (a - b).fro_norm();
    if d == 0.0 {
        0.0
    } else {
        d / b.fro_norm().max(f64::MIN_POSITIVE)
    }
}

fn random_shape(rng: &mut ChaCha8Rng, hi: usize) -> (usize, usize) {
    (rng.random_range(1..=hi), rng.random_range(1..=hi))
}

fn random_axis(rng: &mut ChaCha8Rng) -> Involution {
    loop {
        let n = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if let Ok(phi) = Involution::from_axis(n) {
            return phi;
        }
    }
}

fn maybe_deficient(rng: &mut ChaCha8Rng, rows: usize, cols: usize, deficient: bool) -> QuatMatrix {
    if deficient {
        let r = rng.random_range(0..rows.min(cols));
        random_matrix_with_rank(rng, rows, cols, r)
    } else {
        random_matrix(rng, rows, cols)
    }
}

fn penrose() -> Outcome {
    let worst = (0..500u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng(1_000 + t);
            let (m, n) = random_shape(&mut rng, 8);
            let a = maybe_deficient(&mut rng, m, n, t % 3 == 0);
            let x = pinv(&a);
            let ax = &a * &x;
            let xa = &x * &a;
            [
                rel(&(&ax * &a), &a),
                rel(&(&x * &ax), &x),
                rel(&ax.conj_transpose(), &ax),
                rel(&xa.conj_transpose(), &xa),
            ]
            .into_iter()
            .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        worst <= PENROSE_TOL,
        format!("500 matrices, worst relative axiom residual {worst:.2e} (limit {PENROSE_TOL:e})"),
    )
}

fn adjoint() -> Outcome {
    let (mul, pair) = (0..200u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng(2_000 + t);
            let (m, n) = random_shape(&mut rng, 8);
            let p = rng.random_range(1..=8);
            let a = random_matrix(&mut rng, m, n);
            let b = random_matrix(&mut rng, n, p);
            let (ca, cb) = (complex_adjoint(&a), complex_adjoint(&b));
            let mul = (complex_adjoint(&(&a * &b)) - &ca * &cb).norm() / (ca.norm() * cb.norm());
            let sigma_max = linalg::singular_values(&a)[0];
            (mul, adjoint_pairing_gap(&a) / sigma_max)
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    outcome(
        mul <= ADJOINT_MUL_TOL && pair <= PAIRING_TOL,
        format!("200 trials, multiplicativity {mul:.2e} (limit {ADJOINT_MUL_TOL:e}), pairing gap {pair:.2e}·σmax (limit {PAIRING_TOL:e})"),
    )
}

fn clean(m: &QuatMatrix) -> bool {
    linalg::rank(m, None).margin().is_none_or(|g| g >= MARGIN_FLOOR)
}

fn marsaglia_styan() -> Outcome {
    let mut rng = rng(3_000);
    let (mut held, mut skipped) = (0, 0);
    let mut trials = 0;
    while trials < 200 {
        let (m, n) = random_shape(&mut rng, 6);
        let (p, q) = random_shape(&mut rng, 6);
        let deficient = trials % 2 == 0;
        let a = maybe_deficient(&mut rng, m, n, deficient);
        let b = maybe_deficient(&mut rng, m, p, deficient);
        let c = maybe_deficient(&mut rng, q, n, deficient);
        let ab = QuatMatrix::hstack(&[&a, &b]).unwrap();
        let ac = QuatMatrix::vstack(&[&a, &c]).unwrap();
        if ![&a, &b, &c, &ab, &ac].into_iter().all(clean) {
            skipped += 1;
            continue;
        }
        trials += 1;
        if marsaglia_styan_check(&a, &b, &c).unwrap().holds() {
            held += 1;
        }
    }
    outcome(
        held == 200,
        format!(
            "{held}/200 triples satisfy both identities exactly ({skipped} resampled for margin < {MARGIN_FLOOR:e})"
        ),
    )
}

fn single_equation(sys: &SylvesterSystem) -> (bool, bool) {
    let lemma = lemma1_consistent(&lemma1_aux(&sys.equations()[0]), LEMMA_TOL_RES).consistent;
    let rank = check_system(sys, None).unwrap().consistent;
    (lemma, rank)
}

fn k1_dims(rng: &mut ChaCha8Rng, tall: bool) -> SystemDims {
    if tall {
        let mut d = SystemDims::random(rng, 1, 1, 2);
        d.p = vec![rng.random_range(2..=4)];
        d.q = vec![rng.random_range(2..=4)];
        d
    } else {
        SystemDims::random(rng, 1, 1, 4)
    }
}

fn lemma_vs_rank() -> Outcome {
    let consistent: Vec<(bool, bool)> = (0..200u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng(4_000 + t);
            let dims = k1_dims(&mut rng, t % 2 == 0);
            let deficient = (t % 3 == 0).then(|| rng.random_range(1..=2));
            single_equation(&planted_system(&mut rng, &dims, deficient).0)
        })
        .collect();
    let inconsistent: Vec<(bool, bool)> = (0..200u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng(5_000 + t);
            loop {
                let dims = k1_dims(&mut rng, true);
                let deficient = (t % 3 == 0).then_some(1);
                if let Some((sys, _)) = certified_inconsistent(&mut rng, &dims, deficient, 20) {
                    return single_equation(&sys);
                }
            }
        })
        .collect();
    let agree = consistent.iter().chain(&inconsistent).filter(|(l, r)| l == r).count();
    let right = consistent.iter().filter(|v| **v == (true, true)).count()
        + inconsistent.iter().filter(|v| **v == (false, false)).count();
    outcome(
        agree == 400,
        format!("{agree}/400 verdicts agree ({right}/400 match the planted/certified truth)"),
    )
}

struct PlantedStats {
    check_pass: bool,
    residual: f64,
    gap: f64,
    oracle: bool,
    reduced_pass: Option<bool>,
    solved: bool,
}

fn planted_trial(k: usize, t: u64) -> PlantedStats {
    let mut rng = rng(6_000 + 100 * k as u64 + t);
    let dims = SystemDims::random(&mut rng, k, 1, 5);
    let deficient = t.is_multiple_of(3).then(|| rng.random_range(1..=2));
    let (sys, _) = planted_system(&mut rng, &dims, deficient);
    let check_pass = check_system(&sys, None).unwrap().consistent;
    let (solved, residual, gap) = match solve_system(&sys, None) {
        Ok(sol) => {
            let residual = sol
                .residuals
                .iter()
                .zip(sys.equations())
                .map(|(r, eq)| r / (1.0 + eq.e().fro_norm()))
                .fold(0.0, f64::max);
            let gap = sol
                .shared_z_gaps
                .iter()
                .zip(&sol.z[1..])
                .map(|(g, z)| g / (1.0 + z.fro_norm()))
                .fold(0.0, f64::max);
            (true, residual, gap)
        }
        Err(_) => (false, f64::INFINITY, f64::INFINITY),
    };
    let oracle = oracle_consistent(&realify(&sys), None);
    let reduced_pass = match reduce_system(&sys) {
        Ok((Some(hat), _)) => Some(check_system(&hat, None).unwrap().consistent),
        Ok((None, _)) => None,
        Err(_) => Some(false),
    };
    PlantedStats {
        check_pass,
        residual,
        gap,
        oracle,
        reduced_pass,
        solved,
    }
}

fn planted(stats: &[PlantedStats], elapsed: Duration) -> Outcome {
    let checks = stats.iter().filter(|s| s.check_pass).count();
    let solved = stats.iter().filter(|s| s.solved).count();
    let oracle = stats.iter().filter(|s| s.oracle).count();
    let residual = stats.iter().map(|s| s.residual).fold(0.0, f64::max);
    let gap = stats.iter().map(|s| s.gap).fold(0.0, f64::max);
    let n = stats.len();
    outcome(
        checks == n
            && solved == n
            && oracle == n
            && residual <= SOLVE_TOL
            && gap <= SOLVE_TOL
            && elapsed <= PLANTED_BUDGET,
        format!(
            "{n} systems (k=1..4): checks {checks}/{n}, solved {solved}/{n}, oracle {oracle}/{n}, \
             worst residual {residual:.2e}, worst shared-Z gap {gap:.2e} (limit {SOLVE_TOL:e}), {:.1}s (limit {}s)",
            elapsed.as_secs_f64(),
            PLANTED_BUDGET.as_secs()
        ),
    )
}

fn reduction(stats: &[PlantedStats]) -> Outcome {
    let reduced: Vec<bool> = stats.iter().filter_map(|s| s.reduced_pass).collect();
    let pass = reduced.iter().filter(|&&p| p).count();
    outcome(
        pass == reduced.len() && !reduced.is_empty(),
        format!(
            "{pass}/{} reduced systems (k ≥ 2) pass every rank condition",
            reduced.len()
        ),
    )
}

fn inconsistency() -> Outcome {
    let results: Vec<(bool, bool)> = (0..200u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng(7_000 + t);
            let k = 1 + (t % 3) as usize;
            loop {
                let mut dims = SystemDims::random(&mut rng, k, 1, 2);
                dims.p.iter_mut().chain(dims.q.iter_mut()).for_each(|d| *d += 2);
                dims.z.iter_mut().for_each(|z| *z = (1, 1));
                let deficient = (t % 2 == 0).then(|| rng.random_range(1..=2));
                if let Some((sys, _)) = certified_inconsistent(&mut rng, &dims, deficient, 20) {
                    let flagged = !check_system(&sys, None).unwrap().consistent;
                    let rejected = matches!(solve_system(&sys, None), Err(Error::InconsistentSystem(_)));
                    return (flagged, rejected);
                }
            }
        })
        .collect();
    let flagged = results.iter().filter(|r| r.0).count();
    let rejected = results.iter().filter(|r| r.1).count();
    outcome(
        flagged == 200 && rejected == 200,
        format!("200 certified-inconsistent systems (k ≤ 3): {flagged} flagged by a rank condition, {rejected} rejected by the solver"),
    )
}

fn phi_systems() -> (usize, usize, usize, f64, f64) {
    let axes = [
        Involution::from_axis([0.0, 0.0, 1.0]).unwrap(),
        Involution::from_axis([1.0, -2.0, 2.0]).unwrap(),
    ];
    let results: Vec<(bool, bool, f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng(8_000 + t);
            let phi = axes[(t % 2) as usize];
            let k = 1 + (t % 3) as usize;
            let dims = PhiDims::random(&mut rng, k, 1, 4);
            let (ps, _) = planted_phi_system(&mut rng, phi, &dims, (t % 4 == 0).then_some(1));
            let (residual, defect) = match solve_phi_system(&ps, None) {
                Ok(sol) => {
                    let r = sol
                        .residuals
                        .iter()
                        .zip(ps.equations())
                        .map(|(r, eq)| r / (1.0 + eq.e().fro_norm()))
                        .fold(0.0, f64::max);
                    let d = sol
                        .phi_defects
                        .iter()
                        .zip(&sol.z)
                        .map(|(d, z)| d / (1.0 + z.fro_norm()))
                        .fold(0.0, f64::max);
                    (r, d)
                }
                Err(_) => (f64::INFINITY, f64::INFINITY),
            };
            let agree = |ps: &qsylv::phi::PhiSystem| {
                let general = check_system(&to_general_system(ps).unwrap(), None).unwrap().consistent;
                check_phi_system(ps, None).unwrap().consistent == general
            };
            let bad = perturb_phi_rhs(&mut rng, &ps, 0, 1.0);
            (agree(&ps), agree(&bad), residual, defect)
        })
        .collect();
    let agree = results.iter().filter(|r| r.0).count();
    let agree_perturbed = results.iter().filter(|r| r.1).count();
    let solved = results.iter().filter(|r| r.2.is_finite()).count();
    let residual = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let defect = results.iter().map(|r| r.3).fold(0.0, f64::max);
    (agree + agree_perturbed, solved, results.len(), residual, defect)
}

/// Worst deviation over 100 trials of one involution property.
fn property(seed: u64, f: impl Fn(&mut ChaCha8Rng, &Involution) -> f64 + Sync) -> f64 {
    (0..100u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng(seed + t);
            let phi = random_axis(&mut rng);
            f(&mut rng, &phi)
        })
        .reduce(|| 0.0, f64::max)
}

fn phi_properties() -> [(&'static str, f64); 5] {
    let shape_deficient = |rng: &mut ChaCha8Rng, t: bool| {
        let (m, n) = random_shape(rng, 6);
        maybe_deficient(rng, m, n, t)
    };
    [
        (
            "(AB)_φ = B_φ A_φ",
            property(9_000, |rng, phi| {
                let (m, n) = random_shape(rng, 6);
                let p = rng.random_range(1..=6);
                let a = random_matrix(rng, m, n);
                let b = random_matrix(rng, n, p);
                rel(
                    &(&a * &b).phi_transpose(phi),
                    &(&b.phi_transpose(phi) * &a.phi_transpose(phi)),
                )
            }),
        ),
        (
            "(A_φ)_φ = A",
            property(9_100, |rng, phi| {
                let a = shape_deficient(rng, false);
                rel(&a.phi_transpose(phi).phi_transpose(phi), &a)
            }),
        ),
        (
            "r(A) = r(A_φ)",
            property(9_200, |rng, phi| {
                let d = rng.random_bool(0.5);
                let a = shape_deficient(rng, d);
                (linalg::rank(&a, None).rank != linalg::rank(&a.phi_transpose(phi), None).rank) as u8 as f64
            }),
        ),
        (
            "(A_φ)† = (A†)_φ",
            property(9_300, |rng, phi| {
                let d = rng.random_bool(0.5);
                let a = shape_deficient(rng, d);
                rel(&pinv(&a.phi_transpose(phi)), &pinv(&a).phi_transpose(phi))
            }),
        ),
        (
            "(L_A)_φ = R_{A_φ}, (R_A)_φ = L_{A_φ}",
            property(9_400, |rng, phi| {
                let d = rng.random_bool(0.5);
                let a = shape_deficient(rng, d);
                let p = projectors(&a);
                let q = projectors(&a.phi_transpose(phi));
                let n = a.rows().max(a.cols()) as f64;
                ((&p.l.phi_transpose(phi) - &q.r).fro_norm() / n).max((&p.r.phi_transpose(phi) - &q.l).fro_norm() / n)
            }),
        ),
    ]
}

fn phi_layer() -> Outcome {
    let (agree, solved, n, residual, defect) = phi_systems();
    let props = phi_properties();
    let props_ok = props.iter().all(|(_, worst)| *worst <= PROPERTY_TOL);
    let prop_text: Vec<String> = props
        .iter()
        .map(|(name, worst)| format!("{name} {worst:.1e}"))
        .collect();
    outcome(
        agree == 2 * n && solved == n && residual <= SOLVE_TOL && defect <= PHI_DEFECT_TOL && props_ok,
        format!(
            "{n} planted systems, two axes: solved {solved}/{n}, worst residual {residual:.2e} (limit {SOLVE_TOL:e}), \
             worst φ-defect {defect:.2e} (limit {PHI_DEFECT_TOL:e}), φ/general check agreement {agree}/{} \
             (planted and perturbed); properties, worst over 100 each (limit {PROPERTY_TOL:e}): {}",
            2 * n,
            prop_text.join(", ")
        ),
    )
}

fn cli_golden() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut problems = common::run_scenario(a.path());
    problems.extend(common::run_scenario(b.path()));
    problems.extend(common::compare_runs(a.path(), b.path()));
    problems.extend(common::compare_golden(a.path()));
    let steps = common::SCENARIO.len();
    let detail = if problems.is_empty() {
        format!("{steps} invocations run twice: exit codes as documented, outputs byte-identical to each other and to the golden files")
    } else {
        problems.join("; ")
    };
    outcome(problems.is_empty(), detail)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut all = true;
    let mut last = Instant::now();
    let mut report = |n: usize, name: &str, o: Outcome| {
        all &= o.pass;
        let secs = last.elapsed().as_secs_f64();
        last = Instant::now();
        println!(
            "criterion {n} [{}] {name}: {} [{secs:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    };
    report(1, "Penrose axioms", penrose());
    report(2, "complex adjoint", adjoint());
    report(3, "Marsaglia-Styan identities", marsaglia_styan());
    report(4, "projector test vs rank conditions at k=1", lemma_vs_rank());
    let t = Instant::now();
    let stats: Vec<PlantedStats> = (1..=4)
        .flat_map(|k| (0..50u64).map(move |t| (k, t)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(k, t)| planted_trial(k, t))
        .collect();
    report(5, "planted-system soundness", planted(&stats, t.elapsed()));
    report(6, "inconsistency detection", inconsistency());
    report(7, "reduction consistency", reduction(&stats));
    report(8, "φ-Hermitian layer", phi_layer());
    report(9, "CLI determinism and exit codes", cli_golden());
    println!(
        "acceptance: {} in {:.1}s",
        if all { "all criteria pass" } else { "FAILURES" },
        start.elapsed().as_secs_f64()
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
