//! Seeded random instances: Gaussian quaternion matrices and planted systems.
//!
//! Every real component is drawn from a standard normal. A planted system
//! draws coefficients and unknowns, then computes each right-hand side from
//! the equation, so it is consistent by construction.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::QuatMatrix;
use crate::phi::{PhiEquation, PhiSolution, PhiSystem};
use crate::quat::{Involution, Quaternion};
use crate::sylvester::{FourTermEquation, SylvesterSystem, SystemSolution};

pub fn random_quaternion<R: Rng + ?Sized>(rng: &mut R) -> Quaternion {
    Quaternion::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> QuatMatrix {
    QuatMatrix::from_fn(rows, cols, |_, _| random_quaternion(rng))
}

/// Product of Gaussian `rows×r` and `r×cols` factors (`r` clipped to the shape).
pub fn random_matrix_with_rank<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, r: usize) -> QuatMatrix {
    let r = r.min(rows).min(cols);
    let left = random_matrix(rng, rows, r);
    let right = random_matrix(rng, r, cols);
    &left * &right
}

/// `B + B_φ` for a Gaussian `B`.
pub fn random_phi_hermitian<R: Rng + ?Sized>(rng: &mut R, phi: &Involution, n: usize) -> QuatMatrix {
    let b = random_matrix(rng, n, n);
    &b + &b.phi_transpose(phi)
}

/// Dimensions of a chained system.
///
/// Equation `i` has `E_i: p[i]×q[i]`, `A_i: p[i]×a[i]`, `B_i: b[i]×q[i]`;
/// the unknown `Z_j` is `z[j].0 × z[j].1` for `j = 0..=k`, so `C_i, D_i`
/// are sized by `z[i]` and `F_i, G_i` by `z[i+1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemDims {
    pub p: Vec<usize>,
    pub q: Vec<usize>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub z: Vec<(usize, usize)>,
}

impl SystemDims {
    pub fn uniform(k: usize, d: usize) -> Self {
        SystemDims {
            p: vec![d; k],
            q: vec![d; k],
            a: vec![d; k],
            b: vec![d; k],
            z: vec![(d, d); k + 1],
        }
    }

    /// Every dimension drawn uniformly from `lo..=hi`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, k: usize, lo: usize, hi: usize) -> Self {
        let mut d = || rng.random_range(lo..=hi);
        SystemDims {
            p: (0..k).map(|_| d()).collect(),
            q: (0..k).map(|_| d()).collect(),
            a: (0..k).map(|_| d()).collect(),
            b: (0..k).map(|_| d()).collect(),
            z: (0..=k).map(|_| (d(), d())).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }
}

/// Coefficient generator: full Gaussian, or rank-limited products when
/// `deficient` is set.
fn coefficient<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, deficient: Option<usize>) -> QuatMatrix {
    match deficient {
        Some(r) => random_matrix_with_rank(rng, rows, cols, r),
        None => random_matrix(rng, rows, cols),
    }
}

/// A consistent system together with the unknowns it was built from.
pub fn planted_system<R: Rng + ?Sized>(
    rng: &mut R,
    dims: &SystemDims,
    deficient: Option<usize>,
) -> (SylvesterSystem, SystemSolution) {
    let k = dims.k();
    assert!(k >= 1, "planted system needs k >= 1");
    let z: Vec<QuatMatrix> = dims.z.iter().map(|&(r, c)| random_matrix(rng, r, c)).collect();
    let mut equations = Vec::with_capacity(k);
    let mut xs = Vec::with_capacity(k);
    let mut ys = Vec::with_capacity(k);
    for i in 0..k {
        let (p, q) = (dims.p[i], dims.q[i]);
        let (c, d) = dims.z[i];
        let (f, g) = dims.z[i + 1];
        let a_mat = coefficient(rng, p, dims.a[i], deficient);
        let b_mat = coefficient(rng, dims.b[i], q, deficient);
        let c_mat = coefficient(rng, p, c, deficient);
        let d_mat = coefficient(rng, d, q, deficient);
        let f_mat = coefficient(rng, p, f, deficient);
        let g_mat = coefficient(rng, g, q, deficient);
        let x = random_matrix(rng, dims.a[i], q);
        let y = random_matrix(rng, p, dims.b[i]);
        let e =
            &(&(&(&a_mat * &x) + &(&y * &b_mat)) + &(&(&c_mat * &z[i]) * &d_mat)) + &(&(&f_mat * &z[i + 1]) * &g_mat);
        equations.push(
            FourTermEquation::new(a_mat, b_mat, c_mat, d_mat, f_mat, g_mat, e).expect("planted shapes are consistent"),
        );
        xs.push(x);
        ys.push(y);
    }
    let sys = SylvesterSystem::new(equations).expect("planted chain is consistent");
    let solution = SystemSolution::new(xs, ys, z, vec![0.0; k]);
    (sys, solution)
}

/// Adds a Gaussian perturbation of the given size to `E_index`.
pub fn perturb_rhs<R: Rng + ?Sized>(rng: &mut R, sys: &SylvesterSystem, index: usize, size: f64) -> SylvesterSystem {
    let mut equations = sys.equations().to_vec();
    let eq = &equations[index];
    let (p, q) = eq.e().shape();
    let e = eq.e() + &random_matrix(rng, p, q).scale(size);
    equations[index] = eq.with_rhs(e).expect("same shape");
    SylvesterSystem::new(equations).expect("chain unchanged")
}

/// Dimensions of a φ-system: equation `i` has `E_i: p[i]×p[i]`,
/// `A_i: p[i]×a[i]`, and `Z_j` is `s[j]×s[j]` for `j = 0..=k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiDims {
    pub p: Vec<usize>,
    pub a: Vec<usize>,
    pub s: Vec<usize>,
}

impl PhiDims {
    pub fn uniform(k: usize, d: usize) -> Self {
        PhiDims {
            p: vec![d; k],
            a: vec![d; k],
            s: vec![d; k + 1],
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, k: usize, lo: usize, hi: usize) -> Self {
        let mut d = || rng.random_range(lo..=hi);
        PhiDims {
            p: (0..k).map(|_| d()).collect(),
            a: (0..k).map(|_| d()).collect(),
            s: (0..=k).map(|_| d()).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }
}

/// A consistent φ-system built from a random `X_i` and φ-Hermitian `Z_j`.
pub fn planted_phi_system<R: Rng + ?Sized>(
    rng: &mut R,
    phi: Involution,
    dims: &PhiDims,
    deficient: Option<usize>,
) -> (PhiSystem, PhiSolution) {
    let k = dims.k();
    assert!(k >= 1, "planted system needs k >= 1");
    let z: Vec<QuatMatrix> = dims
        .s
        .iter()
        .map(|&n| random_phi_hermitian(rng, &phi, n).scale(0.5))
        .collect();
    let mut equations = Vec::with_capacity(k);
    let mut xs = Vec::with_capacity(k);
    for i in 0..k {
        let p = dims.p[i];
        let a_mat = coefficient(rng, p, dims.a[i], deficient);
        let c_mat = coefficient(rng, p, dims.s[i], deficient);
        let f_mat = coefficient(rng, p, dims.s[i + 1], deficient);
        let x = random_matrix(rng, dims.a[i], p);
        let ax = &a_mat * &x;
        let e = &(&(&ax + &ax.phi_transpose(&phi)) + &(&(&c_mat * &z[i]) * &c_mat.phi_transpose(&phi)))
            + &(&(&f_mat * &z[i + 1]) * &f_mat.phi_transpose(&phi));
        // remove rounding asymmetry
        let e = (&e + &e.phi_transpose(&phi)).scale(0.5);
        equations.push(PhiEquation::new(a_mat, c_mat, f_mat, e).expect("planted shapes are consistent"));
        xs.push(x);
    }
    let sys = PhiSystem::new(phi, equations).expect("planted phi-system is valid");
    let solution = PhiSolution::new(xs, z, vec![0.0; k]);
    (sys, solution)
}

/// Adds a φ-Hermitian perturbation to `E_index`.
pub fn perturb_phi_rhs<R: Rng + ?Sized>(rng: &mut R, sys: &PhiSystem, index: usize, size: f64) -> PhiSystem {
    let phi = *sys.involution();
    let mut equations = sys.equations().to_vec();
    let eq = &equations[index];
    let n = eq.e().rows();
    let e = eq.e() + &random_phi_hermitian(rng, &phi, n).scale(0.5 * size);
    equations[index] = eq.with_rhs(e).expect("same shape");
    PhiSystem::new(phi, equations).expect("still valid")
}
