//! Reference verdicts by realification.
//!
//! A system of quaternion matrix equations is linear over the reals in the
//! real components of its unknowns. [`realify`] writes it as one real system
//! `M v = b` by pushing every real basis unknown through the equations, one
//! column at a time, without any Kronecker-product bookkeeping. Consistency
//! is then `rank[M b] = rank M`, and the minimum-norm least-squares solution
//! gives a reference solution.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use qsylv::gen::{perturb_phi_rhs, perturb_rhs, planted_phi_system, planted_system, PhiDims, SystemDims};
use qsylv::phi::{PhiSolution, PhiSystem};
use qsylv::sylvester::{SylvesterSystem, SystemSolution};
use qsylv::{Involution, QuatMatrix, Quaternion};

/// `2⁻⁴⁰`, as in the main rank decisions.
const TOL_FACTOR: f64 = 9.094_947_017_729_282e-13;

/// One unknown matrix and where its real components sit in `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownBlock {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// First column of `M` belonging to this block; entry `(r, c)`
    /// component `t` is at `offset + 4·(r·cols + c) + t`.
    pub offset: usize,
}

#[derive(Clone, Debug)]
pub struct RealLinearSystem {
    pub m: DMatrix<f64>,
    pub b: DVector<f64>,
    pub layout: Vec<UnknownBlock>,
}

fn layout(shapes: &[(String, usize, usize)]) -> Vec<UnknownBlock> {
    let mut offset = 0;
    shapes
        .iter()
        .map(|(name, rows, cols)| {
            let block = UnknownBlock {
                name: name.clone(),
                rows: *rows,
                cols: *cols,
                offset,
            };
            offset += 4 * rows * cols;
            block
        })
        .collect()
}

fn unknown_count(layout: &[UnknownBlock]) -> usize {
    layout.iter().map(|b| 4 * b.rows * b.cols).sum()
}

/// Splits a real vector into the quaternion matrices of `layout`.
pub fn unpack(layout: &[UnknownBlock], v: &[f64]) -> Vec<QuatMatrix> {
    layout
        .iter()
        .map(|blk| {
            QuatMatrix::from_fn(blk.rows, blk.cols, |r, c| {
                let o = blk.offset + 4 * (r * blk.cols + c);
                Quaternion::new(v[o], v[o + 1], v[o + 2], v[o + 3])
            })
        })
        .collect()
}

fn flatten(ms: &[QuatMatrix]) -> Vec<f64> {
    ms.iter()
        .flat_map(|m| m.data().iter().flat_map(|q| q.to_array()))
        .collect()
}

/// Columns of `M` from the images of the real basis unknowns.
fn build(
    layout: Vec<UnknownBlock>,
    rhs: &[QuatMatrix],
    map: impl Fn(&[QuatMatrix]) -> Vec<QuatMatrix> + Sync,
) -> RealLinearSystem {
    let n = unknown_count(&layout);
    let b = DVector::from_vec(flatten(rhs));
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            flatten(&map(&unpack(&layout, &e)))
        })
        .collect();
    let rows = b.len();
    let m = DMatrix::from_fn(rows, n, |r, c| columns[c][r]);
    RealLinearSystem { m, b, layout }
}

/// Unknowns `X_1..X_k`, `Y_1..Y_k`, `Z_1..Z_{k+1}`, in that order.
pub fn realify(sys: &SylvesterSystem) -> RealLinearSystem {
    let k = sys.k();
    let mut shapes = Vec::new();
    for (i, eq) in sys.equations().iter().enumerate() {
        shapes.push((format!("X{}", i + 1), eq.a().cols(), eq.e().cols()));
    }
    for (i, eq) in sys.equations().iter().enumerate() {
        shapes.push((format!("Y{}", i + 1), eq.e().rows(), eq.b().rows()));
    }
    for (j, (r, c)) in sys.z_shapes().into_iter().enumerate() {
        shapes.push((format!("Z{}", j + 1), r, c));
    }
    let rhs: Vec<QuatMatrix> = sys.equations().iter().map(|eq| eq.e().clone()).collect();
    build(layout(&shapes), &rhs, |u| {
        let (x, rest) = u.split_at(k);
        let (y, z) = rest.split_at(k);
        sys.equations()
            .iter()
            .enumerate()
            .map(|(i, eq)| {
                let ax = eq.a() * &x[i];
                let yb = &y[i] * eq.b();
                let czd = &(eq.c() * &z[i]) * eq.d();
                let fzg = &(eq.f() * &z[i + 1]) * eq.g();
                &(&(&ax + &yb) + &czd) + &fzg
            })
            .collect()
    })
}

/// Unknowns `X_1..X_k`, `Z_1..Z_{k+1}`; after the `k` equations come the
/// rows `Z_j − (Z_j)_φ = 0`.
pub fn realify_phi(ps: &PhiSystem) -> RealLinearSystem {
    let k = ps.k();
    let phi: Involution = *ps.involution();
    let mut shapes = Vec::new();
    for (i, eq) in ps.equations().iter().enumerate() {
        shapes.push((format!("X{}", i + 1), eq.a().cols(), eq.e().rows()));
    }
    let sizes = ps.z_sizes();
    for (j, &s) in sizes.iter().enumerate() {
        shapes.push((format!("Z{}", j + 1), s, s));
    }
    let mut rhs: Vec<QuatMatrix> = ps.equations().iter().map(|eq| eq.e().clone()).collect();
    rhs.extend(sizes.iter().map(|&s| QuatMatrix::zeros(s, s)));
    build(layout(&shapes), &rhs, |u| {
        let (x, z) = u.split_at(k);
        let mut out: Vec<QuatMatrix> = ps
            .equations()
            .iter()
            .enumerate()
            .map(|(i, eq)| {
                let ax = eq.a() * &x[i];
                let c_phi = eq.c().phi_transpose(&phi);
                let f_phi = eq.f().phi_transpose(&phi);
                let czc = &(eq.c() * &z[i]) * &c_phi;
                let fzf = &(eq.f() * &z[i + 1]) * &f_phi;
                &(&(&ax + &ax.phi_transpose(&phi)) + &czc) + &fzf
            })
            .collect();
        out.extend(z.iter().map(|zj| zj - &zj.phi_transpose(&phi)));
        out
    })
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Descending.
fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("SVD of a finite matrix converges")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleVerdict {
    pub consistent: bool,
    pub rank_m: usize,
    pub rank_augmented: usize,
    pub tol: f64,
}

/// Compares `rank M` with `rank [M b]` under one absolute tolerance,
/// by default `max(rows, cols+1)·σ_max([M b])·2⁻⁴⁰`.
pub fn oracle_verdict(rls: &RealLinearSystem, tol: Option<f64>) -> OracleVerdict {
    let (rows, cols) = rls.m.shape();
    let mut aug = DMatrix::zeros(rows, cols + 1);
    aug.view_mut((0, 0), (rows, cols)).copy_from(&rls.m);
    aug.set_column(cols, &rls.b);
    let s_aug = singular_values(&aug);
    let s_m = singular_values(&rls.m);
    let sigma_max = s_aug.first().copied().unwrap_or(0.0);
    let tol = tol.unwrap_or(rows.max(cols + 1) as f64 * sigma_max * TOL_FACTOR);
    let rank_m = s_m.iter().filter(|&&s| s > tol).count();
    let rank_augmented = s_aug.iter().filter(|&&s| s > tol).count();
    OracleVerdict {
        consistent: rank_m == rank_augmented,
        rank_m,
        rank_augmented,
        tol,
    }
}

pub fn oracle_consistent(rls: &RealLinearSystem, tol: Option<f64>) -> bool {
    oracle_verdict(rls, tol).consistent
}

/// Minimum-norm least-squares solution and `‖M v − b‖₂`.
pub fn oracle_solve(rls: &RealLinearSystem) -> (DVector<f64>, f64) {
    let (rows, cols) = rls.m.shape();
    if rows == 0 || cols == 0 {
        return (DVector::zeros(cols), rls.b.norm());
    }
    let svd = to_faer(&rls.m).thin_svd().expect("SVD of a finite matrix converges");
    let (u, right, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let sigma_max = s[0];
    let eps = rows.max(cols) as f64 * sigma_max * TOL_FACTOR;
    let mut v = DVector::zeros(cols);
    for i in (0..rows.min(cols)).take_while(|&i| s[i] > eps) {
        let coef = (0..rows).map(|r| u[(r, i)] * rls.b[r]).sum::<f64>() / s[i];
        for c in 0..cols {
            v[c] += coef * right[(c, i)];
        }
    }
    let residual = (&rls.m * &v - &rls.b).norm();
    (v, residual)
}

/// Reference solution of a general system, with residuals filled in.
pub fn oracle_solution(sys: &SylvesterSystem) -> (SystemSolution, f64) {
    let rls = realify(sys);
    let (v, residual) = oracle_solve(&rls);
    let mut blocks = unpack(&rls.layout, v.as_slice());
    let k = sys.k();
    let z = blocks.split_off(2 * k);
    let y = blocks.split_off(k);
    let mut sol = SystemSolution::new(blocks, y, z, Vec::new());
    sol.residuals = qsylv::sylvester::residuals(sys, &sol).expect("layout matches the system");
    (sol, residual)
}

pub fn oracle_phi_solution(ps: &PhiSystem) -> (PhiSolution, f64) {
    let rls = realify_phi(ps);
    let (v, residual) = oracle_solve(&rls);
    let mut blocks = unpack(&rls.layout, v.as_slice());
    let z = blocks.split_off(ps.k());
    let mut sol = PhiSolution::new(blocks, z, Vec::new());
    sol.residuals = qsylv::phi::phi_residuals(ps, &sol).expect("layout matches the system");
    let phi = ps.involution();
    sol.phi_defects = sol.z.iter().map(|z| (z - &z.phi_transpose(phi)).fro_norm()).collect();
    (sol, residual)
}

/// A planted system with one right-hand side perturbed, kept only once the
/// oracle certifies it inconsistent. Returns the system and the number of
/// attempts, or `None` after `max_attempts` failures.
pub fn certified_inconsistent<R: Rng + ?Sized>(
    rng: &mut R,
    dims: &SystemDims,
    deficient: Option<usize>,
    max_attempts: usize,
) -> Option<(SylvesterSystem, usize)> {
    for attempt in 1..=max_attempts {
        let (sys, _) = planted_system(rng, dims, deficient);
        let index = rng.random_range(0..sys.k());
        let bad = perturb_rhs(rng, &sys, index, 1.0);
        if !oracle_consistent(&realify(&bad), None) {
            return Some((bad, attempt));
        }
    }
    None
}

pub fn certified_inconsistent_phi<R: Rng + ?Sized>(
    rng: &mut R,
    phi: Involution,
    dims: &PhiDims,
    deficient: Option<usize>,
    max_attempts: usize,
) -> Option<(PhiSystem, usize)> {
    for attempt in 1..=max_attempts {
        let (ps, _) = planted_phi_system(rng, phi, dims, deficient);
        let index = rng.random_range(0..ps.k());
        let bad = perturb_phi_rhs(rng, &ps, index, 1.0);
        if !oracle_consistent(&realify_phi(&bad), None) {
            return Some((bad, attempt));
        }
    }
    None
}
