//! Chained four-term Sylvester systems
//!
//! ```text
//! A_i X_i + Y_i B_i + C_i Z_i D_i + F_i Z_{i+1} G_i = E_i,   i = 1..k
//! ```
//!
//! with three entry points:
//!
//! * [`lemma`]: the single-equation projector test and closed-form general
//!   solution,
//! * [`conditions`]: the rank-equality families that decide consistency of
//!   the whole chain,
//! * [`solve`]: the constructive solver, which equates the two parametrized
//!   expressions for every shared `Z_{i+1}` and recurses on the resulting
//!   `(k-1)`-equation system in the free parameters.

pub mod conditions;
pub mod lemma;
pub mod solve;

pub use conditions::{
    build_condition, check_families, check_system, condition_list, evaluate_condition, ConditionMatrices,
    ConsistencyReport, Family, RankCondition, Window,
};
pub use lemma::{
    lemma1_aux, lemma1_aux_with, lemma1_consistent, lemma1_solve, lemma1_solve_with, EquationSolution, FreeParams,
    Lemma1Aux, Lemma1Verdict,
};
pub use solve::{
    reduce_system, reduce_system_with, residuals, solve_system, solve_system_with, ParamPolicy, SolveOptions,
    SplitInfo, SystemSolution,
};

use crate::error::Error;
use crate::matrix::QuatMatrix;

/// `A X + Y B + C Z D + F Z' G = E`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourTermEquation {
    a: QuatMatrix,
    b: QuatMatrix,
    c: QuatMatrix,
    d: QuatMatrix,
    f: QuatMatrix,
    g: QuatMatrix,
    e: QuatMatrix,
}

/// Sizes of one equation: `E` is `p×q`, `X` is `a×q`, `Y` is `p×b`,
/// `Z` is `c×d`, `Z'` is `f×g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EquationDims {
    pub p: usize,
    pub q: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    pub f: usize,
    pub g: usize,
}

impl FourTermEquation {
    pub fn new(
        a: QuatMatrix,
        b: QuatMatrix,
        c: QuatMatrix,
        d: QuatMatrix,
        f: QuatMatrix,
        g: QuatMatrix,
        e: QuatMatrix,
    ) -> Result<Self, Error> {
        let (p, q) = e.shape();
        let rows = [("A", &a), ("C", &c), ("F", &f)];
        for (name, m) in rows {
            if m.rows() != p {
                return Err(Error::Shape(format!("{name} has {} rows but E has {p}", m.rows())));
            }
        }
        let cols = [("B", &b), ("D", &d), ("G", &g)];
        for (name, m) in cols {
            if m.cols() != q {
                return Err(Error::Shape(format!("{name} has {} columns but E has {q}", m.cols())));
            }
        }
        Ok(FourTermEquation { a, b, c, d, f, g, e })
    }

    pub fn a(&self) -> &QuatMatrix {
        &self.a
    }
    pub fn b(&self) -> &QuatMatrix {
        &self.b
    }
    pub fn c(&self) -> &QuatMatrix {
        &self.c
    }
    pub fn d(&self) -> &QuatMatrix {
        &self.d
    }
    pub fn f(&self) -> &QuatMatrix {
        &self.f
    }
    pub fn g(&self) -> &QuatMatrix {
        &self.g
    }
    pub fn e(&self) -> &QuatMatrix {
        &self.e
    }

    pub fn with_rhs(&self, e: QuatMatrix) -> Result<Self, Error> {
        FourTermEquation::new(
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
            self.f.clone(),
            self.g.clone(),
            e,
        )
    }

    pub fn dims(&self) -> EquationDims {
        EquationDims {
            p: self.e.rows(),
            q: self.e.cols(),
            a: self.a.cols(),
            b: self.b.rows(),
            c: self.c.cols(),
            d: self.d.rows(),
            f: self.f.cols(),
            g: self.g.rows(),
        }
    }

    /// `A X + Y B + C Z D + F Z' G`
    pub fn apply(&self, x: &QuatMatrix, y: &QuatMatrix, z: &QuatMatrix, w: &QuatMatrix) -> Result<QuatMatrix, Error> {
        let ax = self.a.matmul(x)?;
        let yb = y.matmul(&self.b)?;
        let czd = self.c.matmul(z)?.matmul(&self.d)?;
        let fwg = self.f.matmul(w)?.matmul(&self.g)?;
        ax.try_add(&yb)?.try_add(&czd)?.try_add(&fwg)
    }
}

/// `k ≥ 1` equations where the second `Z` of equation `i` is the first `Z`
/// of equation `i+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SylvesterSystem {
    equations: Vec<FourTermEquation>,
}

impl SylvesterSystem {
    pub fn new(equations: Vec<FourTermEquation>) -> Result<Self, Error> {
        if equations.is_empty() {
            return Err(Error::EmptySystem);
        }
        for (i, pair) in equations.windows(2).enumerate() {
            let (prev, next) = (pair[0].dims(), pair[1].dims());
            if (prev.f, prev.g) != (next.c, next.d) {
                return Err(Error::Shape(format!(
                    "Z_{} is {}x{} in equation {} but {}x{} in equation {}",
                    i + 2,
                    prev.f,
                    prev.g,
                    i + 1,
                    next.c,
                    next.d,
                    i + 2
                )));
            }
        }
        Ok(SylvesterSystem { equations })
    }

    pub fn k(&self) -> usize {
        self.equations.len()
    }

    pub fn equations(&self) -> &[FourTermEquation] {
        &self.equations
    }

    pub fn equation(&self, i: usize) -> &FourTermEquation {
        &self.equations[i]
    }

    /// Shapes of `Z_1..Z_{k+1}`.
    pub fn z_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes: Vec<(usize, usize)> = self.equations.iter().map(|e| (e.c.cols(), e.d.rows())).collect();
        let last = self.equations.last().expect("nonempty").dims();
        shapes.push((last.f, last.g));
        shapes
    }

    pub fn zero(dims: &crate::gen::SystemDims) -> Self {
        let k = dims.k();
        let eqs = (0..k)
            .map(|i| {
                let (p, q) = (dims.p[i], dims.q[i]);
                let (c, d) = dims.z[i];
                let (f, g) = dims.z[i + 1];
                FourTermEquation::new(
                    QuatMatrix::zeros(p, dims.a[i]),
                    QuatMatrix::zeros(dims.b[i], q),
                    QuatMatrix::zeros(p, c),
                    QuatMatrix::zeros(d, q),
                    QuatMatrix::zeros(p, f),
                    QuatMatrix::zeros(g, q),
                    QuatMatrix::zeros(p, q),
                )
                .expect("zero shapes are consistent")
            })
            .collect();
        SylvesterSystem::new(eqs).expect("zero chain is consistent")
    }
}
