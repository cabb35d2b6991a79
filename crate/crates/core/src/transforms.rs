//! Expansion-preserving grammar transforms and the row-wise rebalancing
//! pipeline for plain 2D grammars.

use std::collections::HashMap;

use serde::Serialize;

use crate::balance::balance_1d;
use crate::builder::PlainBuilder;
use crate::error::{Error, Result};
use crate::grammar::{Axis, Grammar1D, Grammar2D, Production2D, RuleSource, SymbolId, Tslp2D, TslpProduction};

/// Balanced binary concatenation tree over `parts`, built by halving.
/// Returns the root; a single part is returned unchanged.
pub fn concat_balanced(b: &mut PlainBuilder, parts: &[SymbolId], axis: Axis) -> Result<SymbolId> {
    match parts.len() {
        0 => Err(Error::Parameter("concatenation of zero parts".into())),
        1 => Ok(parts[0]),
        k => {
            let left = concat_balanced(b, &parts[..k / 2], axis)?;
            let right = concat_balanced(b, &parts[k / 2..], axis)?;
            b.concat(axis, left, right)
        }
    }
}

/// Extends `g` with a balanced concatenation of `parts`. The returned grammar
/// keeps `g`'s start symbol.
pub fn concat_gadget(g: &Grammar2D, parts: &[SymbolId], axis: Axis) -> Result<(Grammar2D, SymbolId)> {
    let mut b = PlainBuilder::from_grammar(g)?;
    for &p in parts {
        if p.index() >= g.len() {
            return Err(Error::Parameter(format!("symbol {p} is not defined")));
        }
    }
    let root = concat_balanced(&mut b, parts, axis)?;
    Ok((b.finish(g.start()), root))
}

/// Rotation by 90 degrees clockwise. Ids and labels are unchanged.
pub fn rotate_cw(g: &Grammar2D) -> Grammar2D {
    let rules = g
        .rules()
        .iter()
        .map(|&r| match r {
            Production2D::Terminal(c) => Production2D::Terminal(c),
            Production2D::HConcat(l, r) => Production2D::VConcat(l, r),
            Production2D::VConcat(t, b) => Production2D::HConcat(b, t),
        })
        .collect();
    Grammar2D::new(rules, g.labels().to_vec(), g.start())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginSide {
    Top,
    Bottom,
    Left,
    Right,
}

impl std::str::FromStr for MarginSide {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" => Ok(MarginSide::Top),
            "bottom" => Ok(MarginSide::Bottom),
            "left" => Ok(MarginSide::Left),
            "right" => Ok(MarginSide::Right),
            _ => Err(Error::Parameter(format!("unknown side {s:?}"))),
        }
    }
}

fn reachable<S: RuleSource + ?Sized>(src: &S) -> Vec<bool> {
    let mut seen = vec![false; src.symbol_count()];
    let mut stack = vec![src.start()];
    seen[src.start().index()] = true;
    while let Some(s) = stack.pop() {
        for c in src.production(s).children() {
            if !seen[c.index()] {
                seen[c.index()] = true;
                stack.push(c);
            }
        }
    }
    seen
}

/// One margin row or column as a 1D grammar. Left and right margins are
/// read top to bottom.
pub fn margin_slp(g: &Grammar2D, side: MarginSide) -> Result<Grammar1D> {
    g.geometry()?;
    let (order, _) = crate::validate::topo_order(g);
    let live = reachable(g);
    let mut b = PlainBuilder::new();
    let mut map: Vec<Option<SymbolId>> = vec![None; g.len()];
    for s in order {
        if !live[s.index()] {
            continue;
        }
        let m = |x: SymbolId| map[x.index()].expect("children first");
        let id = match (g.rule(s), side) {
            (Production2D::Terminal(c), _) => b.terminal(c),
            (Production2D::HConcat(l, r), MarginSide::Top | MarginSide::Bottom) => b.h(m(l), m(r))?,
            (Production2D::VConcat(t, bt), MarginSide::Left | MarginSide::Right) => b.h(m(t), m(bt))?,
            (Production2D::VConcat(t, _), MarginSide::Top) => m(t),
            (Production2D::VConcat(_, bt), MarginSide::Bottom) => m(bt),
            (Production2D::HConcat(l, _), MarginSide::Left) => m(l),
            (Production2D::HConcat(_, r), MarginSide::Right) => m(r),
        };
        map[s.index()] = Some(id);
    }
    let start = map[g.start().index()].expect("start is reachable");
    Grammar1D::new(prune_plain(&b.finish(start)))
}

/// Symbols whose expansions concatenate to a substring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubstringDecomposition {
    pub symbols: Vec<SymbolId>,
    pub source_range: (u64, u64),
}

/// Covers `S[i..=j]` by at most `2·depth + 2` symbols.
pub fn decompose_substring(g: &Grammar1D, i: u64, j: u64) -> Result<SubstringDecomposition> {
    let g2 = g.as_2d();
    let geo = g2.geometry()?;
    let len = g.length();
    if i < 1 || j < i || j > len {
        return Err(Error::OutOfBounds { row: i, col: j, height: 1, width: len });
    }
    let w = |s: SymbolId| geo.dims(s).width;
    let (mut sym, mut lo, mut hi) = (g.start(), i, j);
    // descend to the lowest node containing both ends
    let split = loop {
        if lo == 1 && hi == w(sym) {
            return Ok(SubstringDecomposition { symbols: vec![sym], source_range: (i, j) });
        }
        match g2.rule(sym) {
            Production2D::HConcat(a, b) => {
                let wa = w(a);
                if hi <= wa {
                    sym = a;
                } else if lo > wa {
                    sym = b;
                    lo -= wa;
                    hi -= wa;
                } else {
                    break (a, b, wa);
                }
            }
            _ => unreachable!("a terminal always covers its whole range"),
        }
    };
    let (a, b, wa) = split;
    let mut out = Vec::new();

    // suffix of `a` starting at `lo`
    let mut pending = Vec::new();
    let (mut s, mut from) = (a, lo);
    while from != 1 {
        let Production2D::HConcat(x, y) = g2.rule(s) else { unreachable!() };
        if from > w(x) {
            from -= w(x);
            s = y;
        } else {
            pending.push(y);
            s = x;
        }
    }
    out.push(s);
    out.extend(pending.into_iter().rev());

    // prefix of `b` ending at `hi - wa`
    let (mut s, mut to) = (b, hi - wa);
    while to != w(s) {
        let Production2D::HConcat(x, y) = g2.rule(s) else { unreachable!() };
        if to <= w(x) {
            s = x;
        } else {
            out.push(x);
            to -= w(x);
            s = y;
        }
    }
    out.push(s);
    Ok(SubstringDecomposition { symbols: out, source_range: (i, j) })
}

/// Row symbols `X_i` of a plain grammar, created on demand in a builder.
struct RowTable<'a> {
    g: &'a Grammar2D,
    memo: HashMap<(SymbolId, u64), SymbolId>,
}

impl RowTable<'_> {
    /// Symbol deriving row `i` of `x`.
    fn row(&mut self, b: &mut PlainBuilder, x: SymbolId, i: u64) -> Result<SymbolId> {
        let geo = self.g.geometry()?;
        // frames of an explicit DFS: (symbol, row, children resolved)
        let mut stack = vec![(x, i, false)];
        while let Some(&(s, r, ready)) = stack.last() {
            if self.memo.contains_key(&(s, r)) {
                stack.pop();
                continue;
            }
            match self.g.rule(s) {
                Production2D::Terminal(c) => {
                    let t = b.terminal(c);
                    self.memo.insert((s, r), t);
                    stack.pop();
                }
                Production2D::VConcat(t, bt) => {
                    let ht = geo.dims(t).height;
                    let (c, cr) = if r <= ht { (t, r) } else { (bt, r - ht) };
                    match self.memo.get(&(c, cr)) {
                        Some(&id) => {
                            self.memo.insert((s, r), id);
                            stack.pop();
                        }
                        None => stack.push((c, cr, false)),
                    }
                }
                Production2D::HConcat(l, rt) => {
                    if ready {
                        let id = b.h(self.memo[&(l, r)], self.memo[&(rt, r)])?;
                        self.memo.insert((s, r), id);
                        stack.pop();
                    } else {
                        stack.last_mut().unwrap().2 = true;
                        stack.push((rt, r, false));
                        stack.push((l, r, false));
                    }
                }
            }
        }
        Ok(self.memo[&(x, i)])
    }
}

/// 1D grammar deriving `T[1]·T[2]·…·T[N]`.
pub fn linearize_rows(g: &Grammar2D) -> Result<Grammar1D> {
    let d = g.dims()?;
    if d.area() > crate::error::DIM_LIMIT as u128 {
        return Err(Error::Overflow { symbol: g.start(), detail: "linearized length exceeds 2^62".into() });
    }
    let mut b = PlainBuilder::new();
    let mut rows = RowTable { g, memo: HashMap::new() };
    let mut parts = Vec::with_capacity(d.height as usize);
    for i in 1..=d.height {
        parts.push(rows.row(&mut b, g.start(), i)?);
    }
    let root = concat_balanced(&mut b, &parts, Axis::Horizontal)?;
    Grammar1D::new(b.finish(root))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RebalanceStats {
    pub input_size: u64,
    pub output_size: u64,
    pub input_depth: u32,
    pub output_depth: u32,
    pub linearized_depth: u32,
    pub height: u64,
    pub width: u64,
}

/// Equivalent plain grammar of depth `O(log M)`: linearize, balance the
/// 1D grammar, cut each row out of it and stack the rows.
pub fn rebalance_plain_2d(g: &Grammar2D) -> Result<(Grammar2D, RebalanceStats)> {
    let d = g.dims()?;
    if d.height > d.width {
        return Err(Error::Parameter(format!(
            "height {} exceeds width {}; rotate first",
            d.height, d.width
        )));
    }
    let lin = linearize_rows(g)?;
    let bal = balance_1d(&lin)?;
    let mut b = PlainBuilder::from_grammar(bal.as_2d())?;
    let mut rows = Vec::with_capacity(d.height as usize);
    for i in 0..d.height {
        let dec = decompose_substring(&bal, i * d.width + 1, (i + 1) * d.width)?;
        rows.push(concat_balanced(&mut b, &dec.symbols, Axis::Horizontal)?);
    }
    let root = concat_balanced(&mut b, &rows, Axis::Vertical)?;
    let out = prune_plain(&b.finish(root));
    let stats = RebalanceStats {
        input_size: g.size(),
        output_size: out.size(),
        input_depth: g.depth()?,
        output_depth: out.depth()?,
        linearized_depth: bal.depth(),
        height: d.height,
        width: d.width,
    };
    Ok((out, stats))
}

fn prune_rules<P: Copy>(
    src: &impl RuleSource,
    rules: &[P],
    labels: &[Option<String>],
    remap: impl Fn(P, &dyn Fn(SymbolId) -> SymbolId) -> P,
) -> (Vec<P>, Vec<Option<String>>, SymbolId) {
    let live = reachable(src);
    let mut ids = vec![SymbolId(u32::MAX); rules.len()];
    let mut next = 0;
    for (i, &l) in live.iter().enumerate() {
        if l {
            ids[i] = SymbolId(next);
            next += 1;
        }
    }
    let f = |s: SymbolId| ids[s.index()];
    let mut out = Vec::with_capacity(next as usize);
    let mut out_labels = Vec::with_capacity(next as usize);
    for (i, &l) in live.iter().enumerate() {
        if l {
            out.push(remap(rules[i], &f));
            out_labels.push(labels[i].clone());
        }
    }
    (out, out_labels, f(src.start()))
}

/// Drops symbols unreachable from the start and renumbers the rest in order.
pub fn prune_plain(g: &Grammar2D) -> Grammar2D {
    let (rules, labels, start) = prune_rules(g, g.rules(), g.labels(), |p, f| match p {
        Production2D::Terminal(c) => Production2D::Terminal(c),
        Production2D::HConcat(a, b) => Production2D::HConcat(f(a), f(b)),
        Production2D::VConcat(a, b) => Production2D::VConcat(f(a), f(b)),
    });
    Grammar2D::new(rules, labels, start)
}

pub fn prune_tslp(t: &Tslp2D) -> Tslp2D {
    let (rules, labels, start) = prune_rules(t, t.rules(), t.labels(), |p, f| {
        use TslpProduction::*;
        match p {
            GTerminal(c) => GTerminal(c),
            GHConcat(a, b) => GHConcat(f(a), f(b)),
            GVConcat(a, b) => GVConcat(f(a), f(b)),
            Apply { ctx, arg } => Apply { ctx: f(ctx), arg: f(arg) },
            Compose { outer, inner } => Compose { outer: f(outer), inner: f(inner) },
            HoleConcat { axis, hole_side, ground, hole } => HoleConcat { axis, hole_side, ground: f(ground), hole },
            CtxConcat { axis, ctx_side, ctx, ground } => CtxConcat { axis, ctx_side, ctx: f(ctx), ground: f(ground) },
        }
    });
    Tslp2D::new(rules, labels, start)
}
