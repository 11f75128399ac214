//! Rank, Moore–Penrose inverse and projectors over H.
//!
//! Everything goes through the complex adjoint: writing `A = A₁ + A₂ j` with
//! `A₁ = W + X i` and `A₂ = Y + Z i`,
//!
//! ```text
//! χ(A) = [  A₁       A₂     ]
//!        [ -conj(A₂) conj(A₁) ]
//! ```
//!
//! `χ` is an injective `*`-homomorphism, so one complex SVD of the `2m×2n`
//! adjoint gives the rank (`rank_C / 2`), the pseudoinverse
//! (`χ(A†) = χ(A)†`) and the projectors. Singular values of `χ(A)` come in
//! equal pairs; the quaternionic singular values are the de-duplicated list.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Error;
use crate::matrix::QuatMatrix;
use crate::quat::Quaternion;

pub type ComplexMatrix = DMatrix<Complex64>;

/// Thin SVD `a = U·diag(σ)·Vᴴ`, σ descending; returns `(U, σ, Vᴴ)`.
fn thin_svd(a: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let (m, n) = a.shape();
    let svd = faer::Mat::<Complex64>::from_fn(m, n, |i, j| a[(i, j)])
        .thin_svd()
        .expect("SVD of a finite matrix converges");
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let k = m.min(n);
    (
        ComplexMatrix::from_fn(m, k, |i, j| u[(i, j)]),
        (0..k).map(|i| s[i].re).collect(),
        ComplexMatrix::from_fn(k, n, |i, j| v[(j, i)].conj()),
    )
}

/// `2⁻⁴⁰`
pub const DEFAULT_TOL_FACTOR: f64 = 9.094_947_017_729_282e-13;

/// `max(rows, cols) · scale · 2⁻⁴⁰`
pub fn default_tol(rows: usize, cols: usize, scale: f64) -> f64 {
    rows.max(cols) as f64 * scale * DEFAULT_TOL_FACTOR
}

pub fn complex_adjoint(a: &QuatMatrix) -> ComplexMatrix {
    let (m, n) = a.shape();
    let mut out = ComplexMatrix::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let q = a.get(i, j);
            let a1 = Complex64::new(q.w, q.x);
            let a2 = Complex64::new(q.y, q.z);
            out[(i, j)] = a1;
            out[(i, n + j)] = a2;
            out[(m + i, j)] = -a2.conj();
            out[(m + i, n + j)] = a1.conj();
        }
    }
    out
}

/// Inverse of [`complex_adjoint`], averaging the redundant blocks.
pub fn from_complex_adjoint(c: &ComplexMatrix) -> Result<QuatMatrix, Error> {
    let (rr, cc) = c.shape();
    if rr % 2 != 0 || cc % 2 != 0 {
        return Err(Error::Shape(format!(
            "complex adjoint must have even dimensions, got {rr}x{cc}"
        )));
    }
    let (m, n) = (rr / 2, cc / 2);
    Ok(QuatMatrix::from_fn(m, n, |i, j| {
        let a1 = (c[(i, j)] + c[(m + i, n + j)].conj()) * 0.5;
        let a2 = (c[(i, n + j)] - c[(m + i, j)].conj()) * 0.5;
        Quaternion::new(a1.re, a1.im, a2.re, a2.im)
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankResult {
    pub rank: usize,
    /// Quaternionic singular values, descending.
    pub singular_values: Vec<f64>,
    pub tol_used: f64,
}

impl RankResult {
    /// Smallest singular value counted in the rank.
    pub fn smallest_kept(&self) -> Option<f64> {
        self.rank.checked_sub(1).map(|i| self.singular_values[i])
    }

    /// Largest singular value treated as zero.
    pub fn largest_dropped(&self) -> Option<f64> {
        self.singular_values.get(self.rank).copied()
    }

    /// How many times the rank decision could be mis-scaled before flipping:
    /// `min(σ_kept / tol, tol / σ_dropped)`. `None` means no finite bound
    /// (nothing kept and nothing nonzero dropped).
    pub fn margin(&self) -> Option<f64> {
        let above = self.smallest_kept().map(|s| s / self.tol_used);
        let below = self.largest_dropped().filter(|&s| s > 0.0).map(|s| self.tol_used / s);
        match (above, below) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        }
        .filter(|m| m.is_finite())
    }
}

/// SVD of `χ(A)` with its rank decision.
#[derive(Clone, Debug)]
pub struct QuatSvd {
    rows: usize,
    cols: usize,
    /// Left singular vectors of the adjoint, columns sorted by descending σ.
    u: ComplexMatrix,
    /// Adjoint singular values, descending (length `2·min(m, n)`).
    sigma: Vec<f64>,
    /// Rows are right singular vectors (conjugated), sorted like `sigma`.
    v_t: ComplexMatrix,
    rank: usize,
    tol: f64,
}

impl QuatSvd {
    /// Rank decided with `tol` if given, otherwise with [`default_tol`]
    /// scaled by `σ_max`.
    pub fn new(a: &QuatMatrix, tol: Option<f64>) -> Self {
        Self::build(a, |sigma_max| {
            tol.unwrap_or_else(|| default_tol(a.rows(), a.cols(), sigma_max))
        })
    }

    /// Default tolerance, but scaled by `max(σ_max, reference)`, for products
    /// of projectors with data of norm `reference`.
    pub fn with_reference(a: &QuatMatrix, reference: f64) -> Self {
        Self::build(a, |sigma_max| default_tol(a.rows(), a.cols(), sigma_max.max(reference)))
    }

    fn build(a: &QuatMatrix, tol_of: impl FnOnce(f64) -> f64) -> Self {
        let (m, n) = a.shape();
        if a.is_empty() {
            return QuatSvd {
                rows: m,
                cols: n,
                u: ComplexMatrix::zeros(2 * m, 0),
                sigma: Vec::new(),
                v_t: ComplexMatrix::zeros(0, 2 * n),
                rank: 0,
                tol: tol_of(0.0),
            };
        }
        let (u, sigma, v_t) = thin_svd(&complex_adjoint(a));
        let sigma_max = sigma.first().copied().unwrap_or(0.0);
        let tol = tol_of(sigma_max);
        let rank = pair_values(&sigma).iter().filter(|&&s| s > tol).count();
        QuatSvd {
            rows: m,
            cols: n,
            u,
            sigma,
            v_t,
            rank,
            tol,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn adjoint_singular_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn singular_values(&self) -> Vec<f64> {
        pair_values(&self.sigma)
    }

    pub fn rank_result(&self) -> RankResult {
        RankResult {
            rank: self.rank,
            singular_values: self.singular_values(),
            tol_used: self.tol,
        }
    }

    pub fn pinv(&self) -> QuatMatrix {
        let k = 2 * self.rank;
        if k == 0 {
            return QuatMatrix::zeros(self.cols, self.rows);
        }
        let v = self.v_t.rows(0, k).adjoint();
        let mut u_h = self.u.columns(0, k).adjoint();
        for (r, mut row) in u_h.row_iter_mut().enumerate() {
            row /= Complex64::from(self.sigma[r]);
        }
        from_complex_adjoint(&(v * u_h)).expect("adjoint of even size")
    }

    /// `L_A = I − A†A`, exactly zero when `A` has full column rank.
    pub fn left_projector(&self) -> QuatMatrix {
        if self.rank == self.cols {
            return QuatMatrix::zeros(self.cols, self.cols);
        }
        let k = 2 * self.rank;
        let v = self.v_t.rows(0, k).adjoint();
        let p = ComplexMatrix::identity(2 * self.cols, 2 * self.cols) - &v * v.adjoint();
        from_complex_adjoint(&p).expect("adjoint of even size")
    }

    /// `R_A = I − AA†`, exactly zero when `A` has full row rank.
    pub fn right_projector(&self) -> QuatMatrix {
        if self.rank == self.rows {
            return QuatMatrix::zeros(self.rows, self.rows);
        }
        let k = 2 * self.rank;
        let u = self.u.columns(0, k);
        let p = ComplexMatrix::identity(2 * self.rows, 2 * self.rows) - u * u.adjoint();
        from_complex_adjoint(&p).expect("adjoint of even size")
    }

    /// Best approximation of the decomposed matrix with the decided rank.
    pub fn truncated(&self) -> QuatMatrix {
        let k = 2 * self.rank;
        if k == 0 {
            return QuatMatrix::zeros(self.rows, self.cols);
        }
        let mut u = self.u.columns(0, k).into_owned();
        for (c, mut col) in u.column_iter_mut().enumerate() {
            col *= Complex64::from(self.sigma[c]);
        }
        from_complex_adjoint(&(u * self.v_t.rows(0, k))).expect("adjoint of even size")
    }
}

fn pair_values(sigma: &[f64]) -> Vec<f64> {
    sigma
        .chunks(2)
        .map(|p| p.iter().sum::<f64>() / p.len() as f64)
        .collect()
}

/// Largest gap between the two members of a singular-value pair of `χ(A)`.
pub fn adjoint_pairing_gap(a: &QuatMatrix) -> f64 {
    let svd = QuatSvd::new(a, None);
    svd.sigma
        .chunks(2)
        .map(|p| if p.len() == 2 { (p[0] - p[1]).abs() } else { p[0] })
        .fold(0.0, f64::max)
}

pub fn singular_values(a: &QuatMatrix) -> Vec<f64> {
    QuatSvd::new(a, None).singular_values()
}

/// Numerical rank; `tol` overrides the default `max(m,n)·σ_max·2⁻⁴⁰`.
pub fn rank(a: &QuatMatrix, tol: Option<f64>) -> RankResult {
    QuatSvd::new(a, tol).rank_result()
}

/// Rank with the tolerance scaled by `max(σ_max, reference)`.
pub fn rank_with_reference(a: &QuatMatrix, reference: f64) -> RankResult {
    QuatSvd::with_reference(a, reference).rank_result()
}

pub fn pinv(a: &QuatMatrix) -> QuatMatrix {
    QuatSvd::new(a, None).pinv()
}

pub fn pinv_with_tol(a: &QuatMatrix, tol: Option<f64>) -> QuatMatrix {
    QuatSvd::new(a, tol).pinv()
}

/// Drops the part of `a` below the default tolerance relative to
/// `max(σ_max, reference)`.
pub fn truncate(a: &QuatMatrix, reference: f64) -> QuatMatrix {
    let svd = QuatSvd::with_reference(a, reference);
    if svd.rank == a.rows().min(a.cols()) {
        a.clone()
    } else {
        svd.truncated()
    }
}

/// `L_A = I − A†A` and `R_A = I − AA†`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projectors {
    pub l: QuatMatrix,
    pub r: QuatMatrix,
}

pub fn projectors(a: &QuatMatrix) -> Projectors {
    let svd = QuatSvd::new(a, None);
    Projectors {
        l: svd.left_projector(),
        r: svd.right_projector(),
    }
}

/// The rank quantities of the Marsaglia–Styan identities
/// `r(A) + r(R_A B) = r(B) + r(R_B A) = r[A B]` and
/// `r(A) + r(C L_A) = r(C) + r(A L_C) = r[A; C]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MarsagliaStyan {
    pub a_plus_ra_b: usize,
    pub b_plus_rb_a: usize,
    pub rank_ab: usize,
    pub a_plus_c_la: usize,
    pub c_plus_a_lc: usize,
    pub rank_a_over_c: usize,
}

impl MarsagliaStyan {
    pub fn holds(&self) -> bool {
        self.a_plus_ra_b == self.b_plus_rb_a
            && self.b_plus_rb_a == self.rank_ab
            && self.a_plus_c_la == self.c_plus_a_lc
            && self.c_plus_a_lc == self.rank_a_over_c
    }
}

pub fn marsaglia_styan_check(a: &QuatMatrix, b: &QuatMatrix, c: &QuatMatrix) -> Result<MarsagliaStyan, Error> {
    if a.rows() != b.rows() {
        return Err(Error::Shape(format!("A has {} rows but B has {}", a.rows(), b.rows())));
    }
    if a.cols() != c.cols() {
        return Err(Error::Shape(format!(
            "A has {} columns but C has {}",
            a.cols(),
            c.cols()
        )));
    }
    let (sa, sb, sc) = (QuatSvd::new(a, None), QuatSvd::new(b, None), QuatSvd::new(c, None));
    let r = |m: &QuatMatrix, reference: &QuatMatrix| rank_with_reference(m, reference.fro_norm()).rank;
    Ok(MarsagliaStyan {
        a_plus_ra_b: sa.rank + r(&(&sa.right_projector() * b), b),
        b_plus_rb_a: sb.rank + r(&(&sb.right_projector() * a), a),
        rank_ab: rank(&QuatMatrix::hstack(&[a, b])?, None).rank,
        a_plus_c_la: sa.rank + r(&(c * &sa.left_projector()), c),
        c_plus_a_lc: sc.rank + r(&(a * &sc.left_projector()), a),
        rank_a_over_c: rank(&QuatMatrix::vstack(&[a, c])?, None).rank,
    })
}
