//! Systems with φ-Hermitian structure,
//!
//! ```text
//! A_i X_i + (A_i X_i)_φ + C_i Z_i (C_i)_φ + F_i Z_{i+1} (F_i)_φ = E_i,
//! Z_j = (Z_j)_φ,
//! ```
//!
//! for a nonstandard involution φ and φ-Hermitian `E_i`. Substituting
//! `B = A_φ`, `D = C_φ`, `G = F_φ` gives a general chained system; any of
//! its solutions averaged with its φ-transpose solves the structured one.

use crate::error::Error;
use crate::matrix::QuatMatrix;
use crate::quat::Involution;
use crate::sylvester::{
    check_families, solve_system_with, ConsistencyReport, Family, FourTermEquation, ParamPolicy, SolveOptions,
    SylvesterSystem,
};

/// `A X + (A X)_φ + C Z C_φ + F Z' F_φ = E` with `E` square.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiEquation {
    a: QuatMatrix,
    c: QuatMatrix,
    f: QuatMatrix,
    e: QuatMatrix,
}

impl PhiEquation {
    pub fn new(a: QuatMatrix, c: QuatMatrix, f: QuatMatrix, e: QuatMatrix) -> Result<Self, Error> {
        if !e.is_square() {
            return Err(Error::NonSquare {
                rows: e.rows(),
                cols: e.cols(),
            });
        }
        let p = e.rows();
        for (name, m) in [("A", &a), ("C", &c), ("F", &f)] {
            if m.rows() != p {
                return Err(Error::Shape(format!("{name} has {} rows but E has {p}", m.rows())));
            }
        }
        Ok(PhiEquation { a, c, f, e })
    }

    pub fn a(&self) -> &QuatMatrix {
        &self.a
    }
    pub fn c(&self) -> &QuatMatrix {
        &self.c
    }
    pub fn f(&self) -> &QuatMatrix {
        &self.f
    }
    pub fn e(&self) -> &QuatMatrix {
        &self.e
    }

    pub fn with_rhs(&self, e: QuatMatrix) -> Result<Self, Error> {
        PhiEquation::new(self.a.clone(), self.c.clone(), self.f.clone(), e)
    }

    /// `A X + (A X)_φ + C Z C_φ + F Z' F_φ`
    pub fn apply(
        &self,
        phi: &Involution,
        x: &QuatMatrix,
        z: &QuatMatrix,
        z_next: &QuatMatrix,
    ) -> Result<QuatMatrix, Error> {
        let ax = self.a.matmul(x)?;
        let czc = self.c.matmul(z)?.matmul(&self.c.phi_transpose(phi))?;
        let fzf = self.f.matmul(z_next)?.matmul(&self.f.phi_transpose(phi))?;
        ax.try_add(&ax.phi_transpose(phi))?.try_add(&czc)?.try_add(&fzf)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiSystem {
    phi: Involution,
    equations: Vec<PhiEquation>,
}

impl PhiSystem {
    /// Checks the chain (`Z_{i+1}` is square of size `F_i` columns = `C_{i+1}`
    /// columns) and that every `E_i` is φ-Hermitian to within
    /// `1e-12·‖E_i‖_F`.
    pub fn new(phi: Involution, equations: Vec<PhiEquation>) -> Result<Self, Error> {
        if equations.is_empty() {
            return Err(Error::EmptySystem);
        }
        for (i, pair) in equations.windows(2).enumerate() {
            let (f, c) = (pair[0].f.cols(), pair[1].c.cols());
            if f != c {
                return Err(Error::Shape(format!(
                    "Z_{} has size {f} in equation {} but {c} in equation {}",
                    i + 2,
                    i + 1,
                    i + 2
                )));
            }
        }
        for (i, eq) in equations.iter().enumerate() {
            let defect = (&eq.e - &eq.e.phi_transpose(&phi)).fro_norm();
            if defect > 1e-12 * eq.e.fro_norm() {
                return Err(Error::NotPhiHermitian { index: i + 1, defect });
            }
        }
        Ok(PhiSystem { phi, equations })
    }

    pub fn involution(&self) -> &Involution {
        &self.phi
    }

    pub fn k(&self) -> usize {
        self.equations.len()
    }

    pub fn equations(&self) -> &[PhiEquation] {
        &self.equations
    }

    /// Sizes of the square unknowns `Z_1..Z_{k+1}`.
    pub fn z_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.equations.iter().map(|e| e.c.cols()).collect();
        sizes.push(self.equations.last().expect("nonempty").f.cols());
        sizes
    }
}

/// `B_i = (A_i)_φ`, `D_i = (C_i)_φ`, `G_i = (F_i)_φ`.
pub fn to_general_system(ps: &PhiSystem) -> Result<SylvesterSystem, Error> {
    let phi = &ps.phi;
    let eqs = ps
        .equations
        .iter()
        .map(|eq| {
            FourTermEquation::new(
                eq.a.clone(),
                eq.a.phi_transpose(phi),
                eq.c.clone(),
                eq.c.phi_transpose(phi),
                eq.f.clone(),
                eq.f.phi_transpose(phi),
                eq.e.clone(),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    SylvesterSystem::new(eqs)
}

/// Families evaluated by [`check_phi_system`].
pub const PHI_FAMILIES: [Family; 4] = [Family::Eq2a, Family::Eq3a, Family::Eq4, Family::Eq5];

/// Rank conditions of the structured system: the general families with
/// `C_m`/`F_n` (`Eq4`) and `(C_m)_φ`/`(F_n)_φ` (`Eq5`) ladder ends, plus the
/// single-equation conditions. The remaining general families are φ-duals
/// of these or of each other, except the `Eq6`/`Eq7` pair, which
/// [`check_phi_system_strict`] evaluates as well.
pub fn check_phi_system(ps: &PhiSystem, tol: Option<f64>) -> Result<ConsistencyReport, Error> {
    check_families(&to_general_system(ps)?, &PHI_FAMILIES, tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrictPhiReport {
    /// [`PHI_FAMILIES`] only.
    pub listed: ConsistencyReport,
    /// All eight general families.
    pub full: ConsistencyReport,
}

impl StrictPhiReport {
    /// The extra families changed the verdict.
    pub fn disagrees(&self) -> bool {
        self.listed.consistent != self.full.consistent
    }
}

pub fn check_phi_system_strict(ps: &PhiSystem, tol: Option<f64>) -> Result<StrictPhiReport, Error> {
    let sys = to_general_system(ps)?;
    let full = check_families(&sys, &Family::ALL, tol)?;
    let listed = ConsistencyReport::new(
        full.conditions
            .iter()
            .filter(|c| PHI_FAMILIES.contains(&c.family))
            .cloned()
            .collect(),
    );
    Ok(StrictPhiReport { listed, full })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiSolution {
    pub x: Vec<QuatMatrix>,
    pub z: Vec<QuatMatrix>,
    pub residuals: Vec<f64>,
    /// `‖Z_j − (Z_j)_φ‖_F`; empty unless produced by the solver.
    pub phi_defects: Vec<f64>,
}

impl PhiSolution {
    pub fn new(x: Vec<QuatMatrix>, z: Vec<QuatMatrix>, residuals: Vec<f64>) -> Self {
        PhiSolution {
            x,
            z,
            residuals,
            phi_defects: Vec::new(),
        }
    }
}

/// `‖A_i X_i + (A_i X_i)_φ + C_i Z_i (C_i)_φ + F_i Z_{i+1} (F_i)_φ − E_i‖_F`.
pub fn phi_residuals(ps: &PhiSystem, sol: &PhiSolution) -> Result<Vec<f64>, Error> {
    let k = ps.k();
    if sol.x.len() != k || sol.z.len() != k + 1 {
        return Err(Error::Shape(format!(
            "solution has {} X and {} Z blocks; a system of {k} equations needs {k} and {}",
            sol.x.len(),
            sol.z.len(),
            k + 1
        )));
    }
    ps.equations
        .iter()
        .enumerate()
        .map(|(i, eq)| {
            Ok(eq
                .apply(&ps.phi, &sol.x[i], &sol.z[i], &sol.z[i + 1])?
                .try_sub(&eq.e)?
                .fro_norm())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiHermitianCheck {
    pub hermitian: bool,
    /// `‖a − a_φ‖_F`
    pub defect: f64,
}

/// `a` is φ-Hermitian when `‖a − a_φ‖_F ≤ 1e-10·(1 + ‖a‖_F)`.
pub fn phi_hermitian_check(phi: &Involution, a: &QuatMatrix) -> Result<PhiHermitianCheck, Error> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let defect = (a - &a.phi_transpose(phi)).fro_norm();
    Ok(PhiHermitianCheck {
        hermitian: defect <= 1e-10 * (1.0 + a.fro_norm()),
        defect,
    })
}

pub fn solve_phi_system(ps: &PhiSystem, param_seed: Option<u64>) -> Result<PhiSolution, Error> {
    let params = param_seed.map_or(ParamPolicy::Zero, ParamPolicy::Seeded);
    solve_phi_system_with(
        ps,
        &SolveOptions {
            params,
            ..SolveOptions::default()
        },
    )
}

/// Solves the substituted general system, then symmetrizes:
/// `X_i = (X̂_i + (Ŷ_i)_φ)/2`, `Z_j = (Ẑ_j + (Ẑ_j)_φ)/2`.
pub fn solve_phi_system_with(ps: &PhiSystem, opts: &SolveOptions) -> Result<PhiSolution, Error> {
    let phi = &ps.phi;
    let general = solve_system_with(&to_general_system(ps)?, opts)?;
    let x = general
        .x
        .iter()
        .zip(&general.y)
        .map(|(x, y)| (x + &y.phi_transpose(phi)).scale(0.5))
        .collect();
    let z: Vec<QuatMatrix> = general
        .z
        .iter()
        .map(|z| (z + &z.phi_transpose(phi)).scale(0.5))
        .collect();
    let mut sol = PhiSolution::new(x, z, Vec::new());
    sol.residuals = phi_residuals(ps, &sol)?;
    sol.phi_defects = sol.z.iter().map(|z| (z - &z.phi_transpose(phi)).fro_norm()).collect();
    for (i, eq) in ps.equations.iter().enumerate() {
        let bound = opts.tol_verify * (1.0 + eq.e.fro_norm());
        if sol.residuals[i] > bound {
            return Err(Error::Verification {
                equation: i + 1,
                residual: sol.residuals[i],
                bound,
            });
        }
    }
    Ok(sol)
}
