//! Random access through unwound rules.
//!
//! Every reachable symbol is unwound `K` levels into at most `2^K` frontier
//! regions. The region boundaries cut the symbol's box into a grid; a query
//! finds its grid cell with two predecessor lookups and jumps straight to the
//! frontier symbol `K` levels below, so a query visits about `depth / K`
//! rules instead of `depth`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::access::{access_plain, access_tslp, Access};
use crate::error::{Error, Result};
use crate::geometry::{Dims, Geometry, Hole};
use crate::grammar::{Axis, Grammar2D, Side, SymbolId, Tslp2D, TslpProduction};

/// Largest stored key not above a query, by rank.
pub trait Predecessor: Sized {
    /// `keys` must be sorted and distinct.
    fn from_sorted(keys: Vec<u64>) -> Self;
    /// Position of the predecessor of `x` in key order.
    fn rank(&self, x: u64) -> Option<usize>;
    fn key(&self, rank: usize) -> u64;
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn predecessor(&self, x: u64) -> Option<u64> {
        self.rank(x).map(|r| self.key(r))
    }
}

/// Sorted array with a branch-free binary search.
#[derive(Clone, Debug, Default)]
pub struct SortedArray {
    keys: Vec<u64>,
}

impl Predecessor for SortedArray {
    fn from_sorted(keys: Vec<u64>) -> Self {
        debug_assert!(keys.windows(2).all(|w| w[0] < w[1]));
        SortedArray { keys }
    }

    #[inline]
    fn rank(&self, x: u64) -> Option<usize> {
        let keys = &self.keys;
        if keys.is_empty() || keys[0] > x {
            return None;
        }
        // invariant: keys[base] <= x
        let (mut base, mut n) = (0usize, keys.len());
        while n > 1 {
            let half = n / 2;
            base = if keys[base + half] <= x { base + half } else { base };
            n -= half;
        }
        Some(base)
    }

    fn key(&self, rank: usize) -> u64 {
        self.keys[rank]
    }

    fn len(&self) -> usize {
        self.keys.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FastParams {
    pub epsilon: f64,
    pub k: u32,
    pub b_bound: u64,
    pub area: u128,
}

impl FastParams {
    pub fn new(epsilon: f64, area: u128) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        let loglog = if area >= 2 { (area as f64).log2().log2() } else { 0.0 };
        let k = ((epsilon / 3.0) * loglog).floor();
        // cap keeps 2^K frontier entries addressable; no real grammar is deep enough to notice
        let k = if k.is_finite() && k >= 1.0 { (k as u32).min(16) } else { 1 };
        Ok(FastParams { epsilon, k, b_bound: 1 << k, area })
    }
}

/// 1-based inclusive rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Rect {
    pub x1: u64,
    pub x2: u64,
    pub y1: u64,
    pub y2: u64,
}

impl Rect {
    fn at(row: u64, col: u64, d: Dims) -> Rect {
        Rect { x1: row, x2: row + d.height - 1, y1: col, y2: col + d.width - 1 }
    }

    pub fn area(&self) -> u128 {
        (self.x2 - self.x1 + 1) as u128 * (self.y2 - self.y1 + 1) as u128
    }

    pub fn contains(&self, x: u64, y: u64) -> bool {
        (self.x1..=self.x2).contains(&x) && (self.y1..=self.y2).contains(&y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    Rect(Rect),
    Frame { outer: Rect, inner: Rect },
}

impl Region {
    pub fn area(&self) -> u128 {
        match self {
            Region::Rect(r) => r.area(),
            Region::Frame { outer, inner } => outer.area() - inner.area(),
        }
    }

    pub fn contains(&self, x: u64, y: u64) -> bool {
        match self {
            Region::Rect(r) => r.contains(x, y),
            Region::Frame { outer, inner } => outer.contains(x, y) && !inner.contains(x, y),
        }
    }

    fn outer(&self) -> Rect {
        match *self {
            Region::Rect(r) | Region::Frame { outer: r, .. } => r,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FrontierItem {
    Symbol(SymbolId),
    Terminal(char),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UnwoundRule {
    pub owner: SymbolId,
    pub frontier: Vec<(FrontierItem, Region)>,
    pub hole_region: Option<Rect>,
}

fn region_of(geo: &Geometry, s: SymbolId, row: u64, col: u64) -> Region {
    let outer = Rect::at(row, col, geo.dims(s));
    match geo.hole(s) {
        None => Region::Rect(outer),
        Some(h) => Region::Frame { outer, inner: hole_rect(row, col, h) },
    }
}

fn hole_rect(row: u64, col: u64, h: Hole) -> Rect {
    Rect::at(row + h.row - 1, col + h.col - 1, h.dims())
}

/// Truncates the derivation of `owner` at depth `k`, keeping terminals
/// reached earlier. Bare holes introduced along the way belong to the
/// owner's hole and are dropped.
pub fn unwind(t: &Tslp2D, geo: &Geometry, owner: SymbolId, k: u32) -> UnwoundRule {
    let mut frontier = Vec::new();
    let mut stack = vec![(owner, 1u64, 1u64, 0u32)];
    while let Some((s, row, col, level)) = stack.pop() {
        use TslpProduction::*;
        let rule = t.rule(s);
        if let GTerminal(c) = rule {
            frontier.push((FrontierItem::Terminal(c), region_of(geo, s, row, col)));
            continue;
        }
        if level == k {
            frontier.push((FrontierItem::Symbol(s), region_of(geo, s, row, col)));
            continue;
        }
        let next = level + 1;
        let mut push_pair = |first: SymbolId, second: SymbolId, axis: Axis| {
            let d = geo.dims(first);
            let (r2, c2) = match axis {
                Axis::Horizontal => (row, col + d.width),
                Axis::Vertical => (row + d.height, col),
            };
            stack.push((second, r2, c2, next));
            stack.push((first, row, col, next));
        };
        match rule {
            GTerminal(_) => unreachable!(),
            GHConcat(a, b) => push_pair(a, b, Axis::Horizontal),
            GVConcat(a, b) => push_pair(a, b, Axis::Vertical),
            Apply { ctx, arg: inner } | Compose { outer: ctx, inner } => {
                let h = geo.hole(ctx).expect("validated context");
                stack.push((inner, row + h.row - 1, col + h.col - 1, next));
                stack.push((ctx, row, col, next));
            }
            HoleConcat { axis, hole_side, ground, hole: (p, q) } => {
                let (r, c) = match (hole_side, axis) {
                    (Side::Second, _) => (row, col),
                    (Side::First, Axis::Horizontal) => (row, col + q),
                    (Side::First, Axis::Vertical) => (row + p, col),
                };
                stack.push((ground, r, c, next));
            }
            CtxConcat { axis, ctx_side, ctx, ground } => {
                let (a, b) = if ctx_side == Side::First { (ctx, ground) } else { (ground, ctx) };
                push_pair(a, b, axis);
            }
        }
    }
    let hole_region = geo.hole(owner).map(|h| hole_rect(1, 1, h));
    UnwoundRule { owner, frontier, hole_region }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Target {
    Symbol(SymbolId),
    Terminal(char),
    Hole,
}

/// Where a grid cell leads and how to translate coordinates into the
/// target's frame.
#[derive(Clone, Copy, Debug)]
struct Cell {
    target: Target,
    dr: u64,
    dc: u64,
}

#[derive(Clone, Debug)]
pub struct RuleGrid<P: Predecessor = SortedArray> {
    xs: P,
    ys: P,
    cells: Vec<Cell>,
}

impl<P: Predecessor> RuleGrid<P> {
    fn build(rule: &UnwoundRule, d: Dims) -> Self {
        let mut xs = vec![1u64];
        let mut ys = vec![1u64];
        let mut add = |r: &Rect| {
            xs.extend([r.x1, r.x2 + 1]);
            ys.extend([r.y1, r.y2 + 1]);
        };
        for (_, reg) in &rule.frontier {
            if let Region::Frame { outer, inner } = reg {
                add(outer);
                add(inner);
            } else {
                add(&reg.outer());
            }
        }
        if let Some(h) = &rule.hole_region {
            add(h);
        }
        for v in [&mut xs, &mut ys] {
            v.sort_unstable();
            v.dedup();
        }
        // keep only starts of non-empty strips inside the box
        xs.retain(|&x| x <= d.height);
        ys.retain(|&y| y <= d.width);
        let mut cells = Vec::with_capacity(xs.len() * ys.len());
        for &x in &xs {
            for &y in &ys {
                let cell = match rule.frontier.iter().find(|(_, reg)| reg.contains(x, y)) {
                    Some((FrontierItem::Terminal(c), _)) => Cell { target: Target::Terminal(*c), dr: 0, dc: 0 },
                    Some((FrontierItem::Symbol(s), reg)) => {
                        let o = reg.outer();
                        Cell { target: Target::Symbol(*s), dr: o.x1 - 1, dc: o.y1 - 1 }
                    }
                    None => Cell { target: Target::Hole, dr: 0, dc: 0 },
                };
                cells.push(cell);
            }
        }
        RuleGrid { xs: P::from_sorted(xs), ys: P::from_sorted(ys), cells }
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn x_coords(&self) -> Vec<u64> {
        (0..self.xs.len()).map(|i| self.xs.key(i)).collect()
    }

    pub fn y_coords(&self) -> Vec<u64> {
        (0..self.ys.len()).map(|i| self.ys.key(i)).collect()
    }
}

/// Immutable index; queries may run concurrently.
#[derive(Clone, Debug)]
pub struct FastAccessIndex<P: Predecessor = SortedArray> {
    params: FastParams,
    tslp: Tslp2D,
    dims: Dims,
    depth: u32,
    grids: Vec<Option<RuleGrid<P>>>,
    max_frontier: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexStats {
    pub rules: usize,
    pub cells: usize,
    pub max_cells_per_rule: usize,
    pub max_frontier: usize,
}

pub fn build_fast(t: &Tslp2D, epsilon: f64) -> Result<FastAccessIndex> {
    FastAccessIndex::build(t, epsilon)
}

pub fn access_fast<P: Predecessor>(idx: &FastAccessIndex<P>, x: u64, y: u64) -> Result<Access> {
    idx.access(x, y)
}

impl<P: Predecessor> FastAccessIndex<P> {
    pub fn build(t: &Tslp2D, epsilon: f64) -> Result<Self> {
        let geo = t.geometry()?;
        let start = t.start();
        let dims = geo.dims(start);
        let params = FastParams::new(epsilon, dims.area())?;
        let mut grids: Vec<Option<RuleGrid<P>>> = (0..t.len()).map(|_| None).collect();
        let mut max_frontier = 0;
        let mut stack = vec![start];
        let mut seen = vec![false; t.len()];
        seen[start.index()] = true;
        while let Some(s) = stack.pop() {
            let rule = unwind(t, geo, s, params.k);
            max_frontier = max_frontier.max(rule.frontier.len());
            for (item, _) in &rule.frontier {
                if let FrontierItem::Symbol(c) = *item {
                    if !seen[c.index()] {
                        seen[c.index()] = true;
                        stack.push(c);
                    }
                }
            }
            grids[s.index()] = Some(RuleGrid::build(&rule, geo.dims(s)));
        }
        Ok(FastAccessIndex { params, tslp: t.clone(), dims, depth: geo.depth(start), grids, max_frontier })
    }

    pub fn params(&self) -> FastParams {
        self.params
    }

    pub fn tslp(&self) -> &Tslp2D {
        &self.tslp
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Depth of the indexed grammar.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn grid(&self, s: SymbolId) -> Option<&RuleGrid<P>> {
        self.grids.get(s.index()).and_then(Option::as_ref)
    }

    pub fn stats(&self) -> IndexStats {
        let live = || self.grids.iter().flatten();
        IndexStats {
            rules: live().count(),
            cells: live().map(|g| g.cells.len()).sum(),
            max_cells_per_rule: live().map(|g| g.cells.len()).max().unwrap_or(0),
            max_frontier: self.max_frontier,
        }
    }

    pub fn access(&self, x: u64, y: u64) -> Result<Access> {
        let d = self.dims;
        if x < 1 || y < 1 || x > d.height || y > d.width {
            return Err(Error::OutOfBounds { row: x, col: y, height: d.height, width: d.width });
        }
        let (mut sym, mut x, mut y) = (self.tslp.start(), x, y);
        let mut visits = 0;
        loop {
            visits += 1;
            let g = self.grids[sym.index()].as_ref().expect("reachable symbol has a grid");
            let (i, j) = match (g.xs.rank(x), g.ys.rank(y)) {
                (Some(i), Some(j)) => (i, j),
                _ => unreachable!("grids start at coordinate 1"),
            };
            let cell = g.cells[i * g.ys.len() + j];
            match cell.target {
                Target::Terminal(ch) => return Ok(Access { ch, visits }),
                Target::Symbol(s) => {
                    sym = s;
                    x -= cell.dr;
                    y -= cell.dc;
                }
                Target::Hole => return Err(Error::InternalHoleHit { symbol: sym }),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PathReport {
    pub path: String,
    pub mean_visits: f64,
    pub max_visits: u32,
    pub nanos_per_query: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub queries: usize,
    pub seed: u64,
    pub threads: usize,
    pub params: FastParams,
    pub paths: Vec<PathReport>,
}

/// Uniform positions over an `h`×`w` box, fixed by `seed`.
pub fn sample_positions(d: Dims, count: usize, seed: u64) -> Vec<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (rng.gen_range(1..=d.height), rng.gen_range(1..=d.width))).collect()
}

fn run_path<F>(name: &str, positions: &[(u64, u64)], threads: usize, f: F) -> Result<PathReport>
where
    F: Fn(u64, u64) -> Result<Access> + Sync,
{
    let started = Instant::now();
    let threads = threads.max(1);
    let chunk = positions.len().div_ceil(threads).max(1);
    let parts: Vec<Result<(u64, u32)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = positions
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || {
                    let (mut sum, mut max) = (0u64, 0u32);
                    for &(x, y) in part {
                        let a = f(x, y)?;
                        sum += a.visits as u64;
                        max = max.max(a.visits);
                    }
                    Ok((sum, max))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("bench worker panicked")).collect()
    });
    let elapsed = started.elapsed();
    let (mut sum, mut max) = (0u64, 0u32);
    for p in parts {
        let (s, m) = p?;
        sum += s;
        max = max.max(m);
    }
    let n = positions.len();
    let mean = |v: f64| if n == 0 { 0.0 } else { v / n as f64 };
    Ok(PathReport {
        path: name.to_string(),
        mean_visits: mean(sum as f64),
        max_visits: max,
        nanos_per_query: mean(elapsed.as_nanos() as f64),
    })
}

/// Times the plain path (when given), the holed path over the indexed
/// grammar, and the fast path on the same sampled positions.
pub fn bench_access<P: Predecessor + Sync>(
    plain: Option<&Grammar2D>,
    idx: &FastAccessIndex<P>,
    queries: usize,
    seed: u64,
    threads: usize,
) -> Result<BenchReport> {
    let positions = sample_positions(idx.dims(), queries, seed);
    let mut paths = Vec::new();
    if let Some(g) = plain {
        if g.dims()? != idx.dims() {
            return Err(Error::DimensionMismatch(format!(
                "plain grammar is {:?}, index is {:?}",
                g.dims()?,
                idx.dims()
            )));
        }
        paths.push(run_path("plain", &positions, threads, |x, y| access_plain(g, x, y))?);
    }
    let t = idx.tslp();
    t.geometry()?;
    paths.push(run_path("tslp", &positions, threads, |x, y| access_tslp(t, x, y))?);
    paths.push(run_path("fast", &positions, threads, |x, y| idx.access(x, y))?);
    Ok(BenchReport { queries, seed, threads: threads.max(1), params: idx.params(), paths })
}
