//! Rank-equality solvability conditions.
//!
//! Each condition compares the rank of a block matrix built from a window
//! `m..=n` of equations against the sum of the ranks of two coefficient
//! blocks. [`Family::Eq2a`] to [`Family::Eq3b`] involve one equation;
//! [`Family::Eq4`] to [`Family::Eq7`] couple a whole window through the
//! shared unknowns, with the right-hand sides entering as
//! `E_m, −E_{m+1}, E_{m+2}, …`. The four window families differ only in
//! which end of the ladder keeps an outer `C_m`/`D_m` and `F_n`/`G_n` block.

use std::fmt;

use rayon::prelude::*;

use crate::block::{BlockSpec, Cell, Sign};
use crate::error::Error;
use crate::linalg::{rank, RankResult};
use crate::matrix::QuatMatrix;

use super::{FourTermEquation, SylvesterSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `r[E A C F; B 0 0 0] = r[A C F] + r(B)`
    Eq2a,
    /// `r[E A; B 0; D 0; G 0] = r[B; D; G] + r(A)`
    Eq2b,
    /// `r[E A C; B 0 0; G 0 0] = r[A C] + r[B; G]`
    Eq3a,
    /// `r[E A F; B 0 0; D 0 0] = r[A F] + r[B; D]`
    Eq3b,
    /// Window ladder keeping `C_m` and `F_n`.
    Eq4,
    /// Window ladder keeping `D_m` and `G_n`.
    Eq5,
    /// Window ladder keeping `C_m` and `G_n`.
    Eq6,
    /// Window ladder keeping `D_m` and `F_n`.
    Eq7,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Eq2a,
        Family::Eq2b,
        Family::Eq3a,
        Family::Eq3b,
        Family::Eq4,
        Family::Eq5,
        Family::Eq6,
        Family::Eq7,
    ];

    pub fn is_single(self) -> bool {
        matches!(self, Family::Eq2a | Family::Eq2b | Family::Eq3a | Family::Eq3b)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Eq2a => "EQ2a",
            Family::Eq2b => "EQ2b",
            Family::Eq3a => "EQ3a",
            Family::Eq3b => "EQ3b",
            Family::Eq4 => "EQ4",
            Family::Eq5 => "EQ5",
            Family::Eq6 => "EQ6",
            Family::Eq7 => "EQ7",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s))
    }

    /// `(C_m on the left, D_m on top, F_n on the right, G_n at the bottom)`
    fn ends(self) -> (bool, bool, bool, bool) {
        match self {
            Family::Eq4 => (true, false, true, false),
            Family::Eq5 => (false, true, false, true),
            Family::Eq6 => (true, false, false, true),
            Family::Eq7 => (false, true, true, false),
            _ => unreachable!("single-equation family"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// 1-based equation window `m..=n`; single-equation families use `m = n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub m: usize,
    pub n: usize,
}

impl Window {
    pub fn single(i: usize) -> Window {
        Window { m: i, n: i }
    }

    pub fn range(m: usize, n: usize) -> Window {
        Window { m, n }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionMatrices {
    pub lhs: QuatMatrix,
    pub rhs_a: QuatMatrix,
    pub rhs_b: QuatMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Row {
    DTop,
    P(usize),
    G(usize),
    GBottom,
    B(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Col {
    CLeft,
    Q(usize),
    F(usize),
    FRight,
    A(usize),
}

struct Ladder<'a> {
    eqs: &'a [FourTermEquation],
    rows: Vec<Row>,
    cols: Vec<Col>,
}

impl<'a> Ladder<'a> {
    fn window(eqs: &'a [FourTermEquation], family: Family) -> Ladder<'a> {
        let len = eqs.len();
        let (c_left, d_top, f_right, g_bottom) = family.ends();
        let mut rows = Vec::new();
        if d_top {
            rows.push(Row::DTop);
        }
        for j in 0..len {
            rows.push(Row::P(j));
            if j + 1 < len {
                rows.push(Row::G(j));
            }
        }
        if g_bottom {
            rows.push(Row::GBottom);
        }
        rows.extend((0..len).map(Row::B));
        let mut cols = Vec::new();
        if c_left {
            cols.push(Col::CLeft);
        }
        for j in 0..len {
            cols.push(Col::Q(j));
            if j + 1 < len {
                cols.push(Col::F(j));
            }
        }
        if f_right {
            cols.push(Col::FRight);
        }
        cols.extend((0..len).map(Col::A));
        Ladder { eqs, rows, cols }
    }

    fn single(eq: &'a FourTermEquation, family: Family) -> Ladder<'a> {
        use Col::*;
        use Row::*;
        let (rows, cols) = match family {
            Family::Eq2a => (vec![P(0), B(0)], vec![Q(0), A(0), CLeft, FRight]),
            Family::Eq2b => (vec![P(0), B(0), DTop, GBottom], vec![Q(0), A(0)]),
            Family::Eq3a => (vec![P(0), B(0), GBottom], vec![Q(0), A(0), CLeft]),
            Family::Eq3b => (vec![P(0), B(0), DTop], vec![Q(0), A(0), FRight]),
            _ => unreachable!("window family"),
        };
        Ladder {
            eqs: std::slice::from_ref(eq),
            rows,
            cols,
        }
    }

    fn cell(&self, row: Row, col: Col) -> Cell<'a> {
        let eqs = self.eqs;
        let last = eqs.len() - 1;
        match (row, col) {
            (Row::P(j), Col::Q(k)) if j == k => Cell::Signed(Sign::alternating(j), eqs[j].e()),
            (Row::P(j), Col::F(k)) if j == k => Cell::Mat(eqs[j].f()),
            (Row::P(j), Col::F(k)) if j == k + 1 => Cell::Mat(eqs[j].c()),
            (Row::G(j), Col::Q(k)) if j == k => Cell::Mat(eqs[j].g()),
            (Row::G(j), Col::Q(k)) if k == j + 1 => Cell::Mat(eqs[k].d()),
            (Row::P(0), Col::CLeft) => Cell::Mat(eqs[0].c()),
            (Row::DTop, Col::Q(0)) => Cell::Mat(eqs[0].d()),
            (Row::P(j), Col::FRight) if j == last => Cell::Mat(eqs[last].f()),
            (Row::GBottom, Col::Q(k)) if k == last => Cell::Mat(eqs[last].g()),
            (Row::P(j), Col::A(k)) if j == k => Cell::Mat(eqs[j].a()),
            (Row::B(j), Col::Q(k)) if j == k => Cell::Mat(eqs[j].b()),
            _ => Cell::Zero,
        }
    }

    fn assemble(&self, rows: &[Row], cols: &[Col]) -> Result<QuatMatrix, Error> {
        let grid = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| self.cell(r, c)).collect())
            .collect();
        BlockSpec::new(grid)?.assemble()
    }

    fn matrices(&self) -> Result<ConditionMatrices, Error> {
        let lhs = self.assemble(&self.rows, &self.cols)?;
        let p_rows: Vec<Row> = self.rows.iter().copied().filter(|r| matches!(r, Row::P(_))).collect();
        let q_cols: Vec<Col> = self.cols.iter().copied().filter(|c| matches!(c, Col::Q(_))).collect();
        let other_rows: Vec<Row> = self.rows.iter().copied().filter(|r| !matches!(r, Row::P(_))).collect();
        let other_cols: Vec<Col> = self.cols.iter().copied().filter(|c| !matches!(c, Col::Q(_))).collect();
        Ok(ConditionMatrices {
            lhs,
            rhs_a: self.assemble(&p_rows, &other_cols)?,
            rhs_b: self.assemble(&other_rows, &q_cols)?,
        })
    }
}

/// The block matrices of one condition: its left side and the two blocks
/// whose ranks add up to the right side.
pub fn build_condition(sys: &SylvesterSystem, family: Family, window: Window) -> Result<ConditionMatrices, Error> {
    let k = sys.k();
    let Window { m, n } = window;
    if m == 0 || m > n || n > k || (family.is_single() && m != n) {
        return Err(Error::BadWindow { m, n, k });
    }
    let eqs = &sys.equations()[m - 1..n];
    let ladder = if family.is_single() {
        Ladder::single(&eqs[0], family)
    } else {
        Ladder::window(eqs, family)
    };
    ladder.matrices()
}

/// One evaluated condition.
#[derive(Clone, Debug, PartialEq)]
pub struct RankCondition {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub lhs_rank: usize,
    pub rhs_rank: usize,
    /// How far the left-side rank decision is from its tolerance (see
    /// [`RankResult::margin`]); `None` when there is nothing to decide.
    pub margin_lhs: Option<f64>,
    /// Smaller margin of the two right-side blocks.
    pub margin_rhs: Option<f64>,
    pub pass: bool,
}

impl RankCondition {
    /// Smallest of the two margins.
    pub fn margin(&self) -> Option<f64> {
        match (self.margin_lhs, self.margin_rhs) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

fn min_margin(a: &RankResult, b: &RankResult) -> Option<f64> {
    match (a.margin(), b.margin()) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// Ranks `cond` with `tol` (absolute; default relative tolerance otherwise).
pub fn evaluate_condition(
    sys: &SylvesterSystem,
    family: Family,
    window: Window,
    tol: Option<f64>,
) -> Result<RankCondition, Error> {
    let mats = build_condition(sys, family, window)?;
    let lhs = rank(&mats.lhs, tol);
    let ra = rank(&mats.rhs_a, tol);
    let rb = rank(&mats.rhs_b, tol);
    let rhs_rank = ra.rank + rb.rank;
    Ok(RankCondition {
        family,
        m: window.m,
        n: window.n,
        lhs_rank: lhs.rank,
        rhs_rank,
        margin_lhs: lhs.margin(),
        margin_rhs: min_margin(&ra, &rb),
        pass: lhs.rank == rhs_rank,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub conditions: Vec<RankCondition>,
    pub consistent: bool,
}

impl ConsistencyReport {
    pub fn new(conditions: Vec<RankCondition>) -> Self {
        let consistent = conditions.iter().all(|c| c.pass);
        ConsistencyReport { conditions, consistent }
    }

    pub fn first_failure(&self) -> Option<&RankCondition> {
        self.conditions.iter().find(|c| !c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RankCondition> {
        self.conditions.iter().filter(|c| !c.pass)
    }

    /// Smallest margin over all conditions.
    pub fn min_margin(&self) -> Option<f64> {
        self.conditions
            .iter()
            .filter_map(RankCondition::margin)
            .min_by(f64::total_cmp)
    }
}

/// Every `(family, window)` pair of the given families: single families for
/// `i = 1..k`, then window families for `1 ≤ m ≤ n ≤ k`.
pub fn condition_list(k: usize, families: &[Family]) -> Vec<(Family, Window)> {
    let mut list = Vec::new();
    for i in 1..=k {
        for &f in families.iter().filter(|f| f.is_single()) {
            list.push((f, Window::single(i)));
        }
    }
    for m in 1..=k {
        for n in m..=k {
            for &f in families.iter().filter(|f| !f.is_single()) {
                list.push((f, Window::range(m, n)));
            }
        }
    }
    list
}

/// Evaluates the listed families over all windows, in parallel.
pub fn check_families(
    sys: &SylvesterSystem,
    families: &[Family],
    tol: Option<f64>,
) -> Result<ConsistencyReport, Error> {
    let conditions = condition_list(sys.k(), families)
        .into_par_iter()
        .map(|(f, w)| evaluate_condition(sys, f, w, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConsistencyReport::new(conditions))
}

/// All eight families over all windows.
pub fn check_system(sys: &SylvesterSystem, tol: Option<f64>) -> Result<ConsistencyReport, Error> {
    check_families(sys, &Family::ALL, tol)
}
