//! One equation `A X + Y B + C Z D + F Z' G = E`.
//!
//! Projecting with `R_A` on the left and `L_B` on the right removes `X` and
//! `Y` and leaves the two-sided equation
//! `A₁₁ Z B₁₁ + C₁₁ Z' D₁₁ = E₁₁`, which has the auxiliaries
//!
//! ```text
//! A₁₁ = R_A C    B₁₁ = D L_B    C₁₁ = R_A F    D₁₁ = G L_B
//! E₁₁ = R_A E L_B
//! M = R_{A₁₁} C₁₁    N = D₁₁ L_{B₁₁}    S = C₁₁ L_M
//! ```
//!
//! The equation is solvable iff
//! `R_M R_{A₁₁} E₁₁ = 0`, `E₁₁ L_{B₁₁} L_N = 0`, `R_{A₁₁} E₁₁ L_{D₁₁} = 0`
//! and `R_{C₁₁} E₁₁ L_{B₁₁} = 0`.

use rand::Rng;

use crate::error::Error;
use crate::gen::random_matrix;
use crate::linalg::QuatSvd;
use crate::matrix::{chain, QuatMatrix};

use super::{EquationDims, FourTermEquation};

/// A derived matrix with its decomposition and the pieces we need from it.
#[derive(Clone, Debug)]
pub(crate) struct Factored {
    pub m: QuatMatrix,
    pub pinv: QuatMatrix,
    pub l: QuatMatrix,
    pub r: QuatMatrix,
}

impl Factored {
    /// Decomposes `m`, first discarding the part below the rank tolerance.
    ///
    /// With `tol = None` the tolerance is relative to
    /// `max(σ_max(m), reference)`; a product of projectors and data of norm
    /// `reference` carries rounding of that size even where it vanishes.
    pub fn new(m: QuatMatrix, reference: f64, tol: Option<f64>) -> Factored {
        let svd = match tol {
            Some(t) => QuatSvd::new(&m, Some(t)),
            None => QuatSvd::with_reference(&m, reference),
        };
        let m = if svd.rank() == m.rows().min(m.cols()) {
            m
        } else {
            svd.truncated()
        };
        Factored {
            pinv: svd.pinv(),
            l: svd.left_projector(),
            r: svd.right_projector(),
            m,
        }
    }
}

/// The auxiliary matrices of one equation, with cached pseudoinverses and
/// projectors.
#[derive(Clone, Debug)]
pub struct Lemma1Aux {
    eq: FourTermEquation,
    pub(crate) a: Factored,
    pub(crate) b: Factored,
    pub(crate) a11: Factored,
    pub(crate) b11: Factored,
    pub(crate) c11: Factored,
    pub(crate) d11: Factored,
    pub(crate) e11: QuatMatrix,
    pub(crate) m: Factored,
    pub(crate) n: Factored,
    pub(crate) s: Factored,
}

impl Lemma1Aux {
    pub fn equation(&self) -> &FourTermEquation {
        &self.eq
    }
    pub fn a11(&self) -> &QuatMatrix {
        &self.a11.m
    }
    pub fn b11(&self) -> &QuatMatrix {
        &self.b11.m
    }
    pub fn c11(&self) -> &QuatMatrix {
        &self.c11.m
    }
    pub fn d11(&self) -> &QuatMatrix {
        &self.d11.m
    }
    pub fn e11(&self) -> &QuatMatrix {
        &self.e11
    }
    pub fn m11(&self) -> &QuatMatrix {
        &self.m.m
    }
    pub fn n11(&self) -> &QuatMatrix {
        &self.n.m
    }
    pub fn s11(&self) -> &QuatMatrix {
        &self.s.m
    }

    /// The three terms of the particular part of `Z`,
    /// `A₁₁†E₁₁B₁₁† − A₁₁†C₁₁M†E₁₁B₁₁† − A₁₁†S C₁₁†E₁₁N†D₁₁B₁₁†`.
    pub fn z_particular_terms(&self) -> [QuatMatrix; 3] {
        let (a11p, b11p, e11) = (&self.a11.pinv, &self.b11.pinv, &self.e11);
        [
            chain(&[a11p, e11, b11p]),
            chain(&[a11p, &self.c11.m, &self.m.pinv, e11, b11p]),
            chain(&[a11p, &self.s.m, &self.c11.pinv, e11, &self.n.pinv, &self.d11.m, b11p]),
        ]
    }

    pub fn z_particular(&self) -> QuatMatrix {
        let [t1, t2, t3] = self.z_particular_terms();
        &(&t1 - &t2) - &t3
    }

    /// The two terms of the particular part of `Z'`,
    /// `M†E₁₁D₁₁† + S†S C₁₁†E₁₁N†`.
    pub fn z_next_particular_terms(&self) -> [QuatMatrix; 2] {
        [
            chain(&[&self.m.pinv, &self.e11, &self.d11.pinv]),
            chain(&[&self.s.pinv, &self.s.m, &self.c11.pinv, &self.e11, &self.n.pinv]),
        ]
    }

    pub fn z_next_particular(&self) -> QuatMatrix {
        let [t1, t2] = self.z_next_particular_terms();
        &t1 + &t2
    }

    /// `P − A₁₁† S T₂ R_N D₁₁ B₁₁† + L_{A₁₁} T₄ + T₅ R_{B₁₁}`
    pub fn z_general(&self, p: &QuatMatrix, t2: &QuatMatrix, t4: &QuatMatrix, t5: &QuatMatrix) -> QuatMatrix {
        let coupled = chain(&[&self.a11.pinv, &self.s.m, t2, &self.n.r, &self.d11.m, &self.b11.pinv]);
        &(&(p - &coupled) + &(&self.a11.l * t4)) + &(t5 * &self.b11.r)
    }

    /// `Q + L_M L_S T₁ + L_M T₂ R_N + T₃ R_{D₁₁}`
    pub fn z_next_general(&self, q: &QuatMatrix, t1: &QuatMatrix, t2: &QuatMatrix, t3: &QuatMatrix) -> QuatMatrix {
        let a = chain(&[&self.m.l, &self.s.l, t1]);
        let b = chain(&[&self.m.l, t2, &self.n.r]);
        &(&(q + &a) + &b) + &(t3 * &self.d11.r)
    }

    /// `X = A†E' − T₇B + L_A T₆`, `Y = R_A E' B† + A T₇ + T₈ R_B` with
    /// `E' = E − C Z D − F Z' G`.
    pub fn xy(
        &self,
        z: &QuatMatrix,
        z_next: &QuatMatrix,
        t6: &QuatMatrix,
        t7: &QuatMatrix,
        t8: &QuatMatrix,
    ) -> (QuatMatrix, QuatMatrix) {
        let eq = &self.eq;
        let rest = &(eq.e() - &chain(&[eq.c(), z, eq.d()])) - &chain(&[eq.f(), z_next, eq.g()]);
        let x = &(&(&self.a.pinv * &rest) - &(t7 * eq.b())) + &(&self.a.l * t6);
        let y = &(&chain(&[&self.a.r, &rest, &self.b.pinv]) + &(eq.a() * t7)) + &(t8 * &self.b.r);
        (x, y)
    }
}

pub fn lemma1_aux(eq: &FourTermEquation) -> Lemma1Aux {
    lemma1_aux_with(eq, None)
}

/// As [`lemma1_aux`], with an absolute rank tolerance for every
/// decomposition.
pub fn lemma1_aux_with(eq: &FourTermEquation, tol: Option<f64>) -> Lemma1Aux {
    let a = Factored::new(eq.a().clone(), 0.0, tol);
    let b = Factored::new(eq.b().clone(), 0.0, tol);
    let a11 = Factored::new(&a.r * eq.c(), eq.c().fro_norm(), tol);
    let b11 = Factored::new(eq.d() * &b.l, eq.d().fro_norm(), tol);
    let c11 = Factored::new(&a.r * eq.f(), eq.f().fro_norm(), tol);
    let d11 = Factored::new(eq.g() * &b.l, eq.g().fro_norm(), tol);
    let e11 = chain(&[&a.r, eq.e(), &b.l]);
    let m = Factored::new(&a11.r * &c11.m, eq.f().fro_norm(), tol);
    let n = Factored::new(&d11.m * &b11.l, eq.g().fro_norm(), tol);
    let s = Factored::new(&c11.m * &m.l, eq.f().fro_norm(), tol);
    Lemma1Aux {
        eq: eq.clone(),
        a,
        b,
        a11,
        b11,
        c11,
        d11,
        e11,
        m,
        n,
        s,
    }
}

/// Outcome of the four projector tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma1Verdict {
    pub consistent: bool,
    /// Frobenius norms of `R_M R_{A₁₁} E₁₁`, `E₁₁ L_{B₁₁} L_N`,
    /// `R_{A₁₁} E₁₁ L_{D₁₁}`, `R_{C₁₁} E₁₁ L_{B₁₁}`.
    pub residuals: [f64; 4],
    /// Each residual passes when it is at most this.
    pub bound: f64,
}

pub fn lemma1_consistent(aux: &Lemma1Aux, tol_res: f64) -> Lemma1Verdict {
    let e = &aux.e11;
    let residuals = [
        chain(&[&aux.m.r, &aux.a11.r, e]).fro_norm(),
        chain(&[e, &aux.b11.l, &aux.n.l]).fro_norm(),
        chain(&[&aux.a11.r, e, &aux.d11.l]).fro_norm(),
        chain(&[&aux.c11.r, e, &aux.b11.l]).fro_norm(),
    ];
    let bound = tol_res * (1.0 + e.fro_norm());
    Lemma1Verdict {
        consistent: residuals.iter().all(|&r| r <= bound),
        residuals,
        bound,
    }
}

/// The eight free matrices of the general solution.
///
/// With `E: p×q`, `X: a×q`, `Y: p×b`, `Z: c×d`, `Z': f×g`:
/// `T₁, T₂, T₃` are `f×g`; `T₄, T₅` are `c×d`; `T₆` is `a×q`; `T₇` is
/// `a×b`; `T₈` is `p×b`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeParams {
    pub t: [QuatMatrix; 8],
}

impl FreeParams {
    fn shapes(d: &EquationDims) -> [(usize, usize); 8] {
        [
            (d.f, d.g),
            (d.f, d.g),
            (d.f, d.g),
            (d.c, d.d),
            (d.c, d.d),
            (d.a, d.q),
            (d.a, d.b),
            (d.p, d.b),
        ]
    }

    pub fn zeros(d: &EquationDims) -> FreeParams {
        FreeParams {
            t: Self::shapes(d).map(|(r, c)| QuatMatrix::zeros(r, c)),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: &EquationDims) -> FreeParams {
        FreeParams {
            t: Self::shapes(d).map(|(r, c)| random_matrix(rng, r, c)),
        }
    }

    /// `T_index` (1-based).
    pub fn get(&self, index: usize) -> &QuatMatrix {
        &self.t[index - 1]
    }

    fn check(&self, d: &EquationDims) -> Result<(), Error> {
        for (i, (t, want)) in self.t.iter().zip(Self::shapes(d)).enumerate() {
            if t.shape() != want {
                return Err(Error::Shape(format!(
                    "T{} is {}x{}, expected {}x{}",
                    i + 1,
                    t.rows(),
                    t.cols(),
                    want.0,
                    want.1
                )));
            }
        }
        Ok(())
    }
}

/// `(X, Y, Z, Z')` for one equation.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationSolution {
    pub x: QuatMatrix,
    pub y: QuatMatrix,
    pub z: QuatMatrix,
    pub z_next: QuatMatrix,
}

pub fn lemma1_solve(eq: &FourTermEquation, t: &FreeParams, tol_res: f64) -> Result<EquationSolution, Error> {
    lemma1_solve_with(&lemma1_aux(eq), t, tol_res)
}

pub fn lemma1_solve_with(aux: &Lemma1Aux, t: &FreeParams, tol_res: f64) -> Result<EquationSolution, Error> {
    t.check(&aux.eq.dims())?;
    let verdict = lemma1_consistent(aux, tol_res);
    if !verdict.consistent {
        return Err(Error::InconsistentEquation {
            index: 1,
            residuals: verdict.residuals,
        });
    }
    let [t1, t2, t3, t4, t5, t6, t7, t8] = &t.t;
    let z = aux.z_general(&aux.z_particular(), t2, t4, t5);
    let z_next = aux.z_next_general(&aux.z_next_particular(), t1, t2, t3);
    let (x, y) = aux.xy(&z, &z_next, t6, t7, t8);
    Ok(EquationSolution { x, y, z, z_next })
}
