//! Constructive solution of a chained system.
//!
//! Each equation alone has a general solution in which `Z_i` and `Z_{i+1}`
//! depend on free matrices `T_{i1..i8}`. Equation `i` yields one expression
//! for `Z_{i+1}` (through `T_{i1}, T_{i2}, T_{i3}`) and equation `i+1` yields
//! another (through `T_{i+1,2}, T_{i+1,4}, T_{i+1,5}`). Equating them gives
//! `k-1` new equations of the same four-term shape,
//!
//! ```text
//! Â_i [T_{i1}; T_{i+1,4}] + [T_{i3}, T_{i+1,5}] B̂_i
//!     + Ĉ_i T_{i2} D̂_i + F̂_i T_{i+1,2} Ĝ_i = Ê_i
//! ```
//!
//! with `Â_i = [L_{M_i} L_{S_i}, −L_{A11,i+1}]`,
//! `B̂_i = [R_{D11,i}; −R_{B11,i+1}]`, `Ĉ_i = L_{M_i}`, `D̂_i = R_{N_i}`,
//! `F̂_i = A11_{i+1}† S_{i+1}`, `Ĝ_i = R_{N_{i+1}} D11_{i+1} B11_{i+1}†`
//! and `Ê_i` the difference of the two particular solutions. The solver
//! recurses on that system and substitutes its solution back.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Inconsistency};
use crate::gen::random_matrix;
use crate::linalg::truncate;
use crate::matrix::{chain, QuatMatrix};

use super::conditions::check_system;
use super::lemma::{lemma1_aux_with, lemma1_consistent, Lemma1Aux};
use super::{FourTermEquation, SylvesterSystem};

/// How unconstrained free matrices are filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ParamPolicy {
    /// All zero: the particular solution.
    #[default]
    Zero,
    /// Standard-normal entries from a seeded generator.
    Seeded(u64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Relative tolerance of the per-equation projector tests.
    pub tol_res: f64,
    /// Relative tolerance for the final residuals and shared-`Z` agreement.
    pub tol_verify: f64,
    /// Absolute rank tolerance; `None` uses the default relative one.
    pub tol_rank: Option<f64>,
    pub params: ParamPolicy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_res: 1e-10,
            tol_verify: 1e-8,
            tol_rank: None,
            params: ParamPolicy::Zero,
        }
    }
}

/// `X_1..X_k`, `Y_1..Y_k`, `Z_1..Z_{k+1}` and per-equation residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSolution {
    pub x: Vec<QuatMatrix>,
    pub y: Vec<QuatMatrix>,
    pub z: Vec<QuatMatrix>,
    pub residuals: Vec<f64>,
    /// `‖Z'_i − Z_{i+1}‖_F` between the value of each shared unknown implied
    /// by equation `i` and the one used (from equation `i+1`). Empty unless
    /// produced by the solver.
    pub shared_z_gaps: Vec<f64>,
}

impl SystemSolution {
    pub fn new(x: Vec<QuatMatrix>, y: Vec<QuatMatrix>, z: Vec<QuatMatrix>, residuals: Vec<f64>) -> Self {
        SystemSolution {
            x,
            y,
            z,
            residuals,
            shared_z_gaps: Vec::new(),
        }
    }
}

/// How the stacked unknowns of each reduced equation split back into the
/// free matrices of the original ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitInfo {
    /// `X̂_i = [T_{i1}; T_{i+1,4}]`: row counts of the two parts.
    pub x_rows: Vec<(usize, usize)>,
    /// `Ŷ_i = [T_{i3}, T_{i+1,5}]`: column counts of the two parts.
    pub y_cols: Vec<(usize, usize)>,
}

/// `‖A_i X_i + Y_i B_i + C_i Z_i D_i + F_i Z_{i+1} G_i − E_i‖_F` for every `i`.
pub fn residuals(sys: &SylvesterSystem, sol: &SystemSolution) -> Result<Vec<f64>, Error> {
    let k = sys.k();
    if sol.x.len() != k || sol.y.len() != k || sol.z.len() != k + 1 {
        return Err(Error::Shape(format!(
            "solution has {} X, {} Y and {} Z blocks; a system of {k} equations needs {k}, {k} and {}",
            sol.x.len(),
            sol.y.len(),
            sol.z.len(),
            k + 1
        )));
    }
    sys.equations()
        .iter()
        .enumerate()
        .map(|(i, eq)| {
            Ok(eq
                .apply(&sol.x[i], &sol.y[i], &sol.z[i], &sol.z[i + 1])?
                .try_sub(eq.e())?
                .fro_norm())
        })
        .collect()
}

struct Params {
    rng: Option<ChaCha8Rng>,
}

impl Params {
    fn new(policy: ParamPolicy) -> Self {
        Params {
            rng: match policy {
                ParamPolicy::Zero => None,
                ParamPolicy::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            },
        }
    }

    fn draw(&mut self, rows: usize, cols: usize) -> QuatMatrix {
        match &mut self.rng {
            Some(rng) => random_matrix(rng, rows, cols),
            None => QuatMatrix::zeros(rows, cols),
        }
    }
}

/// An equation failing its projector test somewhere in the recursion.
struct Failure {
    level: usize,
    equation: usize,
    residuals: [f64; 4],
}

fn analyse(sys: &SylvesterSystem, opts: &SolveOptions, level: usize) -> Result<Vec<Lemma1Aux>, Failure> {
    let mut auxes = Vec::with_capacity(sys.k());
    for (i, eq) in sys.equations().iter().enumerate() {
        let aux = lemma1_aux_with(eq, opts.tol_rank);
        let verdict = lemma1_consistent(&aux, opts.tol_res);
        if !verdict.consistent {
            return Err(Failure {
                level,
                equation: i + 1,
                residuals: verdict.residuals,
            });
        }
        auxes.push(aux);
    }
    Ok(auxes)
}

fn norm_sum<const N: usize>(terms: &[QuatMatrix; N]) -> f64 {
    terms.iter().map(QuatMatrix::fro_norm).sum()
}

/// Builds the `k-1` equations linking consecutive free matrices.
fn hatted(auxes: &[Lemma1Aux], tol: Option<f64>) -> (Option<SylvesterSystem>, SplitInfo) {
    let clean = |m: QuatMatrix, reference: f64| match tol {
        Some(_) => m,
        None => truncate(&m, reference),
    };
    let mut equations = Vec::with_capacity(auxes.len().saturating_sub(1));
    let mut split = SplitInfo {
        x_rows: Vec::new(),
        y_cols: Vec::new(),
    };
    for pair in auxes.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        let a_hat = QuatMatrix::hstack(&[&(&cur.m.l * &cur.s.l), &-&next.a11.l]).expect("square projectors");
        let b_hat = QuatMatrix::vstack(&[&cur.d11.r, &-&next.b11.r]).expect("square projectors");
        let f_hat = &next.a11.pinv * &next.s.m;
        let g_hat = chain(&[&next.n.r, &next.d11.m, &next.b11.pinv]);
        let p_terms = next.z_particular_terms();
        let q_terms = cur.z_next_particular_terms();
        let e_hat = &(&(&(&p_terms[0] - &p_terms[1]) - &p_terms[2]) - &q_terms[0]) - &q_terms[1];
        let e_ref = norm_sum(&p_terms) + norm_sum(&q_terms);
        split.x_rows.push((cur.m.l.rows(), next.a11.l.rows()));
        split.y_cols.push((cur.d11.r.cols(), next.b11.r.cols()));
        let f_ref = next.a11.pinv.fro_norm() * next.s.m.fro_norm();
        let g_ref = next.d11.m.fro_norm() * next.b11.pinv.fro_norm();
        equations.push(
            FourTermEquation::new(
                clean(a_hat, 1.0),
                clean(b_hat, 1.0),
                cur.m.l.clone(),
                cur.n.r.clone(),
                clean(f_hat, f_ref),
                clean(g_hat, g_ref),
                clean(e_hat, e_ref),
            )
            .expect("hatted shapes follow from the chain"),
        );
    }
    let sys = if equations.is_empty() {
        None
    } else {
        Some(SylvesterSystem::new(equations).expect("hatted chain follows from the original"))
    };
    (sys, split)
}

/// The reduced system in the free matrices, or `None` when `k = 1`.
pub fn reduce_system(sys: &SylvesterSystem) -> Result<(Option<SylvesterSystem>, SplitInfo), Error> {
    reduce_system_with(sys, &SolveOptions::default())
}

pub fn reduce_system_with(
    sys: &SylvesterSystem,
    opts: &SolveOptions,
) -> Result<(Option<SylvesterSystem>, SplitInfo), Error> {
    let auxes = analyse(sys, opts, 0).map_err(|f| Error::InconsistentEquation {
        index: f.equation,
        residuals: f.residuals,
    })?;
    Ok(hatted(&auxes, opts.tol_rank))
}

/// Unverified solution of one recursion level.
struct Partial {
    x: Vec<QuatMatrix>,
    y: Vec<QuatMatrix>,
    z: Vec<QuatMatrix>,
    gaps: Vec<f64>,
}

fn solve_level(
    sys: &SylvesterSystem,
    opts: &SolveOptions,
    params: &mut Params,
    level: usize,
) -> Result<Partial, Failure> {
    let auxes = analyse(sys, opts, level)?;
    let k = auxes.len();
    let dims: Vec<_> = sys.equations().iter().map(FourTermEquation::dims).collect();

    // T_{i1}, T_{i2}, T_{i3}, T_{i4}, T_{i5} for every equation.
    let mut t1 = Vec::with_capacity(k);
    let mut t2 = Vec::with_capacity(k);
    let mut t3 = Vec::with_capacity(k);
    let mut t4 = Vec::with_capacity(k);
    let mut t5 = Vec::with_capacity(k);
    let (reduced, split) = hatted(&auxes, opts.tol_rank);
    match reduced {
        None => {
            let d = dims[0];
            t1.push(params.draw(d.f, d.g));
            t2.push(params.draw(d.f, d.g));
            t3.push(params.draw(d.f, d.g));
            t4.push(params.draw(d.c, d.d));
            t5.push(params.draw(d.c, d.d));
        }
        Some(reduced) => {
            let inner = solve_level(&reduced, opts, params, level + 1)?;
            t4.push(params.draw(dims[0].c, dims[0].d));
            t5.push(params.draw(dims[0].c, dims[0].d));
            for i in 0..k - 1 {
                let (top, bottom) = split.x_rows[i];
                let (left, right) = split.y_cols[i];
                let (x, y) = (&inner.x[i], &inner.y[i]);
                t1.push(x.submatrix(0, 0, top, x.cols()).expect("split rows"));
                t4.push(x.submatrix(top, 0, bottom, x.cols()).expect("split rows"));
                t3.push(y.submatrix(0, 0, y.rows(), left).expect("split columns"));
                t5.push(y.submatrix(0, left, y.rows(), right).expect("split columns"));
            }
            let d = dims[k - 1];
            t1.push(params.draw(d.f, d.g));
            t3.push(params.draw(d.f, d.g));
            t2 = inner.z;
        }
    }

    let mut z: Vec<QuatMatrix> = (0..k)
        .map(|i| auxes[i].z_general(&auxes[i].z_particular(), &t2[i], &t4[i], &t5[i]))
        .collect();
    let z_next: Vec<QuatMatrix> = (0..k)
        .map(|i| auxes[i].z_next_general(&auxes[i].z_next_particular(), &t1[i], &t2[i], &t3[i]))
        .collect();
    let gaps = (0..k - 1).map(|i| (&z_next[i] - &z[i + 1]).fro_norm()).collect();
    z.push(z_next[k - 1].clone());

    let mut x = Vec::with_capacity(k);
    let mut y = Vec::with_capacity(k);
    for (i, aux) in auxes.iter().enumerate() {
        let d = dims[i];
        let t6 = params.draw(d.a, d.q);
        let t7 = params.draw(d.a, d.b);
        let t8 = params.draw(d.p, d.b);
        let (xi, yi) = aux.xy(&z[i], &z[i + 1], &t6, &t7, &t8);
        x.push(xi);
        y.push(yi);
    }
    Ok(Partial { x, y, z, gaps })
}

/// Solves with zero free matrices, or seeded random ones when `param_seed`
/// is given.
pub fn solve_system(sys: &SylvesterSystem, param_seed: Option<u64>) -> Result<SystemSolution, Error> {
    let params = param_seed.map_or(ParamPolicy::Zero, ParamPolicy::Seeded);
    solve_system_with(
        sys,
        &SolveOptions {
            params,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_system_with(sys: &SylvesterSystem, opts: &SolveOptions) -> Result<SystemSolution, Error> {
    let mut params = Params::new(opts.params);
    let partial = match solve_level(sys, opts, &mut params, 0) {
        Ok(p) => p,
        Err(f) => {
            let report = check_system(sys, opts.tol_rank)?;
            return Err(Error::InconsistentSystem(Box::new(Inconsistency {
                level: f.level,
                equation: f.equation,
                residuals: f.residuals,
                report,
            })));
        }
    };
    let mut sol = SystemSolution::new(partial.x, partial.y, partial.z, Vec::new());
    sol.residuals = residuals(sys, &sol)?;
    sol.shared_z_gaps = partial.gaps;
    for (i, eq) in sys.equations().iter().enumerate() {
        let bound = opts.tol_verify * (1.0 + eq.e().fro_norm());
        if sol.residuals[i] > bound {
            return Err(Error::Verification {
                equation: i + 1,
                residual: sol.residuals[i],
                bound,
            });
        }
    }
    for (i, &gap) in sol.shared_z_gaps.iter().enumerate() {
        let bound = opts.tol_verify * (1.0 + sol.z[i + 1].fro_norm());
        if gap > bound {
            return Err(Error::Verification {
                equation: i + 1,
                residual: gap,
                bound,
            });
        }
    }
    Ok(sol)
}
