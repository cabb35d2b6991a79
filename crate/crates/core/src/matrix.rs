//! Materialized 2D strings and grammar expansion.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::grammar::{Axis, Grammar2D, RuleSource, Side, SymbolId, Tslp2D, TslpProduction};
use crate::validate::DEFAULT_HOLE_MARKER;

/// Default cap on the number of cells materialized by `expand`.
pub const DEFAULT_MAX_CELLS: u64 = 1 << 26;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    height: usize,
    width: usize,
    cells: Vec<char>,
}

impl Matrix {
    pub fn filled(height: usize, width: usize, c: char) -> Self {
        Matrix { height, width, cells: vec![c; height * width] }
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().chars().count());
        let mut cells = Vec::with_capacity(height * width);
        for (i, r) in rows.iter().enumerate() {
            let before = cells.len();
            cells.extend(r.as_ref().chars());
            if cells.len() - before != width {
                return Err(Error::DimensionMismatch(format!("row {} has a different width", i + 1)));
            }
        }
        Ok(Matrix { height, width, cells })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// 1-based access.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> char {
        assert!(row >= 1 && row <= self.height && col >= 1 && col <= self.width, "({row}, {col}) out of range");
        self.cells[(row - 1) * self.width + col - 1]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, c: char) {
        assert!(row >= 1 && row <= self.height && col >= 1 && col <= self.width, "({row}, {col}) out of range");
        self.cells[(row - 1) * self.width + col - 1] = c;
    }

    pub fn row(&self, row: usize) -> &[char] {
        &self.cells[(row - 1) * self.width..row * self.width]
    }

    pub fn row_string(&self, row: usize) -> String {
        self.row(row).iter().collect()
    }

    pub fn col_string(&self, col: usize) -> String {
        (1..=self.height).map(|r| self.get(r, col)).collect()
    }

    /// All rows concatenated top to bottom.
    pub fn linearized(&self) -> String {
        self.cells.iter().collect()
    }

    pub fn rotate_cw(&self) -> Matrix {
        let mut out = Matrix::filled(self.width, self.height, ' ');
        for r in 1..=self.height {
            for c in 1..=self.width {
                out.set(c, self.height - r + 1, self.get(r, c));
            }
        }
        out
    }

    /// Copy of the `h`×`w` block whose top-left cell is (`row`, `col`).
    pub fn submatrix(&self, row: usize, col: usize, h: usize, w: usize) -> Matrix {
        let mut out = Matrix::filled(h, w, ' ');
        for r in 0..h {
            for c in 0..w {
                out.set(r + 1, c + 1, self.get(row + r, col + c));
            }
        }
        out
    }

    /// Overwrites the block at (`row`, `col`) with `other`.
    pub fn paste(&mut self, row: usize, col: usize, other: &Matrix) {
        for r in 1..=other.height {
            for c in 1..=other.width {
                self.set(row + r - 1, col + c - 1, other.get(r, c));
            }
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 1..=self.height {
            let s: String = self.row(r).iter().collect();
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.height, self.width)?;
        fmt::Display::fmt(self, f)
    }
}

/// Expands symbol `s` of a plain grammar.
pub fn expand(g: &Grammar2D, s: SymbolId, max_cells: u64) -> Result<Matrix> {
    expand_in(g, g.geometry()?, s, max_cells, DEFAULT_HOLE_MARKER)
}

/// Expands symbol `s` of a holed grammar; the hole of a context is filled
/// with `hole_marker`.
pub fn expand_tslp(t: &Tslp2D, s: SymbolId, max_cells: u64, hole_marker: char) -> Result<Matrix> {
    expand_in(t, t.geometry()?, s, max_cells, hole_marker)
}

pub(crate) fn expand_in<S: RuleSource + ?Sized>(
    src: &S,
    geo: &Geometry,
    s: SymbolId,
    max_cells: u64,
    hole_marker: char,
) -> Result<Matrix> {
    let d = geo.dims(s);
    if d.area() > max_cells as u128 {
        return Err(Error::AreaLimitExceeded { symbol: s, cells: d.area(), limit: max_cells });
    }
    let mut m = Matrix::filled(d.height as usize, d.width as usize, hole_marker);
    // (symbol, top row, left col), both 1-based
    let mut stack = vec![(s, 1u64, 1u64)];
    while let Some((sym, r, c)) = stack.pop() {
        use TslpProduction::*;
        match src.production(sym) {
            GTerminal(ch) => m.set(r as usize, c as usize, ch),
            GHConcat(a, b) => {
                stack.push((a, r, c));
                stack.push((b, r, c + geo.dims(a).width));
            }
            GVConcat(a, b) => {
                stack.push((a, r, c));
                stack.push((b, r + geo.dims(a).height, c));
            }
            Apply { ctx, arg } => {
                let h = geo.hole(ctx).expect("apply target is a context");
                stack.push((ctx, r, c));
                stack.push((arg, r + h.row - 1, c + h.col - 1));
            }
            HoleConcat { axis, hole_side, ground, hole: (p, q) } => {
                if hole_side == Side::Second {
                    stack.push((ground, r, c));
                } else {
                    match axis {
                        Axis::Horizontal => stack.push((ground, r, c + q)),
                        Axis::Vertical => stack.push((ground, r + p, c)),
                    }
                }
            }
            CtxConcat { axis, ctx_side, ctx, ground } => {
                let (first, second) = if ctx_side == Side::First { (ctx, ground) } else { (ground, ctx) };
                stack.push((first, r, c));
                match axis {
                    Axis::Horizontal => stack.push((second, r, c + geo.dims(first).width)),
                    Axis::Vertical => stack.push((second, r + geo.dims(first).height, c)),
                }
            }
            Compose { outer, inner } => {
                let h = geo.hole(outer).expect("outer is a context");
                stack.push((outer, r, c));
                stack.push((inner, r + h.row - 1, c + h.col - 1));
            }
        }
    }
    Ok(m)
}
