//! Per-symbol dimensions, hole placement and derivation depth.
//!
//! Coordinates are 1-based: a hole at `(row, col)` has its top-left cell in
//! that row and column of the symbol's bounding box.

use serde::{Deserialize, Serialize};

use crate::error::DIM_LIMIT;
use crate::grammar::{Axis, Side, SymbolId, TslpProduction};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub height: u64,
    pub width: u64,
}

impl Dims {
    pub const fn new(height: u64, width: u64) -> Self {
        Dims { height, width }
    }

    pub fn area(&self) -> u128 {
        self.height as u128 * self.width as u128
    }
}

/// The hole of a context symbol: its size and the 1-based position of its
/// top-left cell.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hole {
    pub height: u64,
    pub width: u64,
    pub row: u64,
    pub col: u64,
}

impl Hole {
    pub fn dims(&self) -> Dims {
        Dims::new(self.height, self.width)
    }

    #[inline]
    pub fn contains(&self, row: u64, col: u64) -> bool {
        row >= self.row && row < self.row + self.height && col >= self.col && col < self.col + self.width
    }
}

/// Immutable geometry of every symbol in a grammar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub(crate) dims: Vec<Dims>,
    pub(crate) holes: Vec<Option<Hole>>,
    pub(crate) depth: Vec<u32>,
}

impl Geometry {
    #[inline]
    pub fn dims(&self, s: SymbolId) -> Dims {
        self.dims[s.index()]
    }

    #[inline]
    pub fn hole(&self, s: SymbolId) -> Option<Hole> {
        self.holes[s.index()]
    }

    /// Height of the derivation tree below `s`; a terminal production has depth 1.
    #[inline]
    pub fn depth(&self, s: SymbolId) -> u32 {
        self.depth[s.index()]
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Number of derived characters of `s` (frame area for contexts).
    pub fn weight(&self, s: SymbolId) -> u64 {
        let d = self.dims(s);
        let area = (d.height * d.width) as u128;
        let hole = self.hole(s).map_or(0, |h| h.dims().area());
        (area - hole) as u64
    }
}

/// Geometry of one symbol, derived from its production and its children.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct NodeGeometry {
    pub dims: Dims,
    pub hole: Option<Hole>,
    pub depth: u32,
}

/// Why a production's geometry could not be derived.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeometryFault {
    Dimension(String),
    Hole(String),
    Overflow(String),
}

fn checked_add(a: u64, b: u64, what: &str) -> Result<u64, GeometryFault> {
    match a.checked_add(b) {
        Some(v) if v <= DIM_LIMIT => Ok(v),
        _ => Err(GeometryFault::Overflow(format!("{what}: {a} + {b} exceeds 2^62"))),
    }
}

fn check_area(d: Dims) -> Result<Dims, GeometryFault> {
    if d.area() > DIM_LIMIT as u128 {
        return Err(GeometryFault::Overflow(format!("area {}x{} exceeds 2^62", d.height, d.width)));
    }
    Ok(d)
}

/// Derives the geometry of a production from the geometry of its children.
/// `child` must return the geometry of every referenced symbol; sort checks
/// (ground vs context) are the caller's job.
pub fn derive(
    prod: &TslpProduction,
    child: impl Fn(SymbolId) -> NodeGeometry,
) -> Result<NodeGeometry, GeometryFault> {
    use GeometryFault::*;
    use TslpProduction::*;
    let ground = |dims: Dims, depth: u32| Ok(NodeGeometry { dims: check_area(dims)?, hole: None, depth });
    match *prod {
        GTerminal(_) => ground(Dims::new(1, 1), 1),
        GHConcat(a, b) => {
            let (ga, gb) = (child(a), child(b));
            if ga.dims.height != gb.dims.height {
                return Err(Dimension(format!(
                    "horizontal concatenation of heights {} and {}",
                    ga.dims.height, gb.dims.height
                )));
            }
            let w = checked_add(ga.dims.width, gb.dims.width, "width")?;
            ground(Dims::new(ga.dims.height, w), 1 + ga.depth.max(gb.depth))
        }
        GVConcat(a, b) => {
            let (ga, gb) = (child(a), child(b));
            if ga.dims.width != gb.dims.width {
                return Err(Dimension(format!(
                    "vertical concatenation of widths {} and {}",
                    ga.dims.width, gb.dims.width
                )));
            }
            let h = checked_add(ga.dims.height, gb.dims.height, "height")?;
            ground(Dims::new(h, ga.dims.width), 1 + ga.depth.max(gb.depth))
        }
        Apply { ctx, arg } => {
            let (gc, ga) = (child(ctx), child(arg));
            let hole = gc.hole.ok_or_else(|| Hole("apply target has no hole".into()))?;
            if hole.dims() != ga.dims {
                return Err(Dimension(format!(
                    "argument {}x{} does not fit hole {}x{}",
                    ga.dims.height, ga.dims.width, hole.height, hole.width
                )));
            }
            ground(gc.dims, 1 + gc.depth.max(ga.depth))
        }
        HoleConcat { axis, hole_side, ground: g, hole: (p, q) } => {
            let gg = child(g);
            if p == 0 || q == 0 {
                return Err(Hole(format!("empty hole {p}x{q}")));
            }
            let (dims, row, col) = match axis {
                Axis::Horizontal => {
                    if p != gg.dims.height {
                        return Err(Dimension(format!(
                            "hole height {p} differs from ground height {}",
                            gg.dims.height
                        )));
                    }
                    let w = checked_add(q, gg.dims.width, "width")?;
                    let col = if hole_side == Side::First { 1 } else { gg.dims.width + 1 };
                    (Dims::new(p, w), 1, col)
                }
                Axis::Vertical => {
                    if q != gg.dims.width {
                        return Err(Dimension(format!(
                            "hole width {q} differs from ground width {}",
                            gg.dims.width
                        )));
                    }
                    let h = checked_add(p, gg.dims.height, "height")?;
                    let row = if hole_side == Side::First { 1 } else { gg.dims.height + 1 };
                    (Dims::new(h, q), row, 1)
                }
            };
            Ok(NodeGeometry {
                dims: check_area(dims)?,
                hole: Some(crate::geometry::Hole { height: p, width: q, row, col }),
                depth: 1 + gg.depth,
            })
        }
        CtxConcat { axis, ctx_side, ctx, ground: g } => {
            let (gc, gg) = (child(ctx), child(g));
            let hole = gc.hole.ok_or_else(|| Hole("context argument has no hole".into()))?;
            let (dims, hole) = match axis {
                Axis::Horizontal => {
                    if gc.dims.height != gg.dims.height {
                        return Err(Dimension(format!(
                            "horizontal concatenation of heights {} and {}",
                            gc.dims.height, gg.dims.height
                        )));
                    }
                    let w = checked_add(gc.dims.width, gg.dims.width, "width")?;
                    let shift = if ctx_side == Side::First { 0 } else { gg.dims.width };
                    (Dims::new(gc.dims.height, w), crate::geometry::Hole { col: hole.col + shift, ..hole })
                }
                Axis::Vertical => {
                    if gc.dims.width != gg.dims.width {
                        return Err(Dimension(format!(
                            "vertical concatenation of widths {} and {}",
                            gc.dims.width, gg.dims.width
                        )));
                    }
                    let h = checked_add(gc.dims.height, gg.dims.height, "height")?;
                    let shift = if ctx_side == Side::First { 0 } else { gg.dims.height };
                    (Dims::new(h, gc.dims.width), crate::geometry::Hole { row: hole.row + shift, ..hole })
                }
            };
            Ok(NodeGeometry { dims: check_area(dims)?, hole: Some(hole), depth: 1 + gc.depth.max(gg.depth) })
        }
        Compose { outer, inner } => {
            let (go, gi) = (child(outer), child(inner));
            let ho = go.hole.ok_or_else(|| Hole("outer context has no hole".into()))?;
            let hi = gi.hole.ok_or_else(|| Hole("inner context has no hole".into()))?;
            if ho.dims() != gi.dims {
                return Err(Dimension(format!(
                    "inner context {}x{} does not fit outer hole {}x{}",
                    gi.dims.height, gi.dims.width, ho.height, ho.width
                )));
            }
            let hole = crate::geometry::Hole { row: ho.row + hi.row - 1, col: ho.col + hi.col - 1, ..hi };
            Ok(NodeGeometry { dims: go.dims, hole: Some(hole), depth: 1 + go.depth.max(gi.depth) })
        }
    }
}
