//! Block-matrix assembly with inferred zero blocks.

use crate::error::Error;
use crate::matrix::QuatMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `(-1)^n`
    pub fn alternating(n: usize) -> Sign {
        if n.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Cell<'a> {
    Mat(&'a QuatMatrix),
    Signed(Sign, &'a QuatMatrix),
    /// Zero block; its size comes from the other cells in its row and column.
    Zero,
}

impl<'a> Cell<'a> {
    fn matrix(&self) -> Option<&'a QuatMatrix> {
        match *self {
            Cell::Mat(m) | Cell::Signed(_, m) => Some(m),
            Cell::Zero => None,
        }
    }
}

/// A rectangular grid of cells.
#[derive(Clone, Debug, Default)]
pub struct BlockSpec<'a> {
    grid: Vec<Vec<Cell<'a>>>,
}

/// Row heights and column widths of an assembled grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub heights: Vec<usize>,
    pub widths: Vec<usize>,
}

impl BlockLayout {
    pub fn row_offset(&self, r: usize) -> usize {
        self.heights[..r].iter().sum()
    }

    pub fn col_offset(&self, c: usize) -> usize {
        self.widths[..c].iter().sum()
    }
}

impl<'a> BlockSpec<'a> {
    pub fn new(grid: Vec<Vec<Cell<'a>>>) -> Result<Self, Error> {
        if let Some(first) = grid.first() {
            let width = first.len();
            if let Some(r) = grid.iter().position(|row| row.len() != width) {
                return Err(Error::Shape(format!(
                    "block grid row {r} has {} cells, expected {width}",
                    grid[r].len()
                )));
            }
        }
        Ok(BlockSpec { grid })
    }

    pub fn layout(&self) -> Result<BlockLayout, Error> {
        let n_rows = self.grid.len();
        let n_cols = self.grid.first().map_or(0, Vec::len);
        let mut heights = vec![None; n_rows];
        let mut widths = vec![None; n_cols];
        for (r, row) in self.grid.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                let Some(m) = cell.matrix() else { continue };
                match heights[r] {
                    None => heights[r] = Some(m.rows()),
                    Some(h) if h != m.rows() => {
                        return Err(Error::Shape(format!(
                            "block ({r}, {c}) has {} rows, block row {r} has height {h}",
                            m.rows()
                        )))
                    }
                    _ => {}
                }
                match widths[c] {
                    None => widths[c] = Some(m.cols()),
                    Some(w) if w != m.cols() => {
                        return Err(Error::Shape(format!(
                            "block ({r}, {c}) has {} columns, block column {c} has width {w}",
                            m.cols()
                        )))
                    }
                    _ => {}
                }
            }
        }
        let heights = heights
            .into_iter()
            .enumerate()
            .map(|(r, h)| h.ok_or_else(|| Error::Shape(format!("block row {r} has no sized cell"))))
            .collect::<Result<Vec<_>, _>>()?;
        let widths = widths
            .into_iter()
            .enumerate()
            .map(|(c, w)| w.ok_or_else(|| Error::Shape(format!("block column {c} has no sized cell"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BlockLayout { heights, widths })
    }

    pub fn assemble(&self) -> Result<QuatMatrix, Error> {
        let layout = self.layout()?;
        let rows: usize = layout.heights.iter().sum();
        let cols: usize = layout.widths.iter().sum();
        let mut data = vec![crate::Quaternion::ZERO; rows * cols];
        for (r, row) in self.grid.iter().enumerate() {
            let r0 = layout.row_offset(r);
            for (c, cell) in row.iter().enumerate() {
                let c0 = layout.col_offset(c);
                let (m, negate) = match *cell {
                    Cell::Mat(m) => (m, false),
                    Cell::Signed(s, m) => (m, s == Sign::Minus),
                    Cell::Zero => continue,
                };
                for i in 0..m.rows() {
                    let dst = &mut data[(r0 + i) * cols + c0..(r0 + i) * cols + c0 + m.cols()];
                    for (d, &v) in dst.iter_mut().zip(m.row(i)) {
                        *d = if negate { -v } else { v };
                    }
                }
            }
        }
        QuatMatrix::new(rows, cols, data)
    }
}
