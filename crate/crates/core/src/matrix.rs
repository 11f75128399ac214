//! Dense row-major quaternion matrices.
//!
//! Zero-dimension matrices (`0×n`, `m×0`) are ordinary values: they take part
//! in products, stacking and block assembly like any other block, which is
//! what lets degenerate windows of the rank conditions collapse without
//! special cases.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::Error;
use crate::quat::{Involution, Quaternion};

#[derive(Clone, Debug, PartialEq)]
pub struct QuatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QuatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self, Error> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(QuatMatrix { rows, cols, data })
    }

    /// Builds a matrix from rows of entries; rejects ragged input.
    pub fn from_rows(rows: &[Vec<Quaternion>]) -> Result<Self, Error> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(QuatMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Real matrix embedded in H.
    pub fn from_real(rows: &[&[f64]]) -> Result<Self, Error> {
        let rows: Vec<Vec<Quaternion>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| Quaternion::real(v)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QuatMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        QuatMatrix {
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Quaternion::ONE } else { Quaternion::ZERO })
    }

    pub fn scalar(q: Quaternion) -> Self {
        QuatMatrix {
            rows: 1,
            cols: 1,
            data: vec![q],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Quaternion] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|q| q.is_zero())
    }

    pub fn matmul(&self, other: &QuatMatrix) -> Result<QuatMatrix, Error> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = QuatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for l in 0..self.cols {
                let a = self.data[i * self.cols + l];
                if a.is_zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(l)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &QuatMatrix, op: &str) -> Result<(), Error> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "cannot {op} {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &QuatMatrix) -> Result<QuatMatrix, Error> {
        self.check_same_shape(other, "add")?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &QuatMatrix) -> Result<QuatMatrix, Error> {
        self.check_same_shape(other, "subtract")?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    fn zip_map(&self, other: &QuatMatrix, f: impl Fn(Quaternion, Quaternion) -> Quaternion) -> QuatMatrix {
        QuatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Quaternion) -> Quaternion) -> QuatMatrix {
        QuatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&q| f(q)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> QuatMatrix {
        self.map(|q| q.scale(s))
    }

    /// `α·A` (scalar on the left).
    pub fn left_scalar(&self, alpha: Quaternion) -> QuatMatrix {
        self.map(|q| alpha * q)
    }

    /// `A·α` (scalar on the right).
    pub fn right_scalar(&self, alpha: Quaternion) -> QuatMatrix {
        self.map(|q| q * alpha)
    }

    pub fn transpose(&self) -> QuatMatrix {
        QuatMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `A*`: conjugate transpose.
    pub fn conj_transpose(&self) -> QuatMatrix {
        QuatMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// `A_φ`: the involution applied entrywise to `Aᵀ`.
    pub fn phi_transpose(&self, phi: &Involution) -> QuatMatrix {
        QuatMatrix::from_fn(self.cols, self.rows, |i, j| phi.apply(self.get(j, i)))
    }

    pub fn hstack(blocks: &[&QuatMatrix]) -> Result<QuatMatrix, Error> {
        let Some(first) = blocks.first() else {
            return Ok(QuatMatrix::zeros(0, 0));
        };
        let rows = first.rows;
        if let Some(b) = blocks.iter().find(|b| b.rows != rows) {
            return Err(Error::Shape(format!(
                "hstack: block with {} rows next to block with {rows}",
                b.rows
            )));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for b in blocks {
                data.extend_from_slice(b.row(i));
            }
        }
        Ok(QuatMatrix { rows, cols, data })
    }

    pub fn vstack(blocks: &[&QuatMatrix]) -> Result<QuatMatrix, Error> {
        let Some(first) = blocks.first() else {
            return Ok(QuatMatrix::zeros(0, 0));
        };
        let cols = first.cols;
        if let Some(b) = blocks.iter().find(|b| b.cols != cols) {
            return Err(Error::Shape(format!(
                "vstack: block with {} columns under block with {cols}",
                b.cols
            )));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Ok(QuatMatrix { rows, cols, data })
    }

    /// Copies out the `rows×cols` block whose top-left entry is `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<QuatMatrix, Error> {
        if r0 + rows > self.rows || c0 + cols > self.cols {
            return Err(Error::Shape(format!(
                "block ({r0}, {c0}) of size {rows}x{cols} exceeds {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(QuatMatrix::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j)))
    }

    /// Frobenius norm `sqrt(Σ |a_ij|²)`.
    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }
}

impl<'a> Mul<&'a QuatMatrix> for &'a QuatMatrix {
    type Output = QuatMatrix;

    /// Panics on a shape mismatch; use [`QuatMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &'a QuatMatrix) -> QuatMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl<'a> Add<&'a QuatMatrix> for &'a QuatMatrix {
    type Output = QuatMatrix;
    fn add(self, rhs: &'a QuatMatrix) -> QuatMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<'a> Sub<&'a QuatMatrix> for &'a QuatMatrix {
    type Output = QuatMatrix;
    fn sub(self, rhs: &'a QuatMatrix) -> QuatMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &QuatMatrix {
    type Output = QuatMatrix;
    fn neg(self) -> QuatMatrix {
        self.map(|q| -q)
    }
}

/// Product of a chain of matrices, left to right.
pub fn chain(factors: &[&QuatMatrix]) -> QuatMatrix {
    let (first, rest) = factors.split_first().expect("empty product chain");
    rest.iter().fold((*first).clone(), |acc, m| &acc * *m)
}
