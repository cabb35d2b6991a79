//! Naive random access by descending the derivation tree.

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::grammar::{Axis, Grammar2D, RuleSource, Side, SymbolId, Tslp2D, TslpProduction};

/// A character together with the number of productions visited to find it.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Access {
    pub ch: char,
    pub visits: u32,
}

pub fn access_plain(g: &Grammar2D, x: u64, y: u64) -> Result<Access> {
    access_in(g, g.geometry()?, g.start(), x, y)
}

pub fn access_tslp(t: &Tslp2D, x: u64, y: u64) -> Result<Access> {
    access_in(t, t.geometry()?, t.start(), x, y)
}

/// Descends from `sym`, which must be a ground symbol. A query inside a
/// context never lies in that context's hole, so no stack is needed.
pub(crate) fn access_in<S: RuleSource + ?Sized>(
    src: &S,
    geo: &Geometry,
    sym: SymbolId,
    x: u64,
    y: u64,
) -> Result<Access> {
    let d = geo.dims(sym);
    if x < 1 || y < 1 || x > d.height || y > d.width {
        return Err(Error::OutOfBounds { row: x, col: y, height: d.height, width: d.width });
    }
    let (mut sym, mut x, mut y) = (sym, x, y);
    let mut visits = 0;
    loop {
        visits += 1;
        use TslpProduction::*;
        match src.production(sym) {
            GTerminal(ch) => return Ok(Access { ch, visits }),
            GHConcat(a, b) => {
                let w = geo.dims(a).width;
                if y <= w {
                    sym = a;
                } else {
                    sym = b;
                    y -= w;
                }
            }
            GVConcat(a, b) => {
                let h = geo.dims(a).height;
                if x <= h {
                    sym = a;
                } else {
                    sym = b;
                    x -= h;
                }
            }
            Apply { ctx, arg } | Compose { outer: ctx, inner: arg } => {
                let h = geo.hole(ctx).ok_or(Error::InternalHoleHit { symbol: ctx })?;
                if h.contains(x, y) {
                    sym = arg;
                    x -= h.row - 1;
                    y -= h.col - 1;
                } else {
                    sym = ctx;
                }
            }
            HoleConcat { axis, hole_side, ground, hole: (p, q) } => {
                let in_ground = match (axis, hole_side) {
                    (Axis::Horizontal, Side::First) => y > q,
                    (Axis::Horizontal, Side::Second) => y <= geo.dims(ground).width,
                    (Axis::Vertical, Side::First) => x > p,
                    (Axis::Vertical, Side::Second) => x <= geo.dims(ground).height,
                };
                if !in_ground {
                    return Err(Error::InternalHoleHit { symbol: sym });
                }
                if hole_side == Side::First {
                    match axis {
                        Axis::Horizontal => y -= q,
                        Axis::Vertical => x -= p,
                    }
                }
                sym = ground;
            }
            CtxConcat { axis, ctx_side, ctx, ground } => {
                let (first, second) = if ctx_side == Side::First { (ctx, ground) } else { (ground, ctx) };
                let fd = geo.dims(first);
                match axis {
                    Axis::Horizontal if y > fd.width => {
                        y -= fd.width;
                        sym = second;
                    }
                    Axis::Vertical if x > fd.height => {
                        x -= fd.height;
                        sym = second;
                    }
                    _ => sym = first,
                }
            }
        }
    }
}
