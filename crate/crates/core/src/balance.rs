//! Depth balancing of derivation DAGs.
//!
//! The ground symbols are split into vertex-disjoint chains along edges that
//! keep both the number of root paths and the expansion weight in the same
//! power-of-two class. Along a chain every node is a one-hole context applied
//! to the next one. The contexts of a chain are arranged in a weight-balanced
//! composition tree, and each node entered from outside its chain becomes
//! `Apply(suffix composition, chain end)`. Each input symbol yields a constant
//! number of output symbols.

use serde::Serialize;

use crate::builder::{PlainBuilder, TslpBuilder};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::grammar::{Axis, Grammar1D, Grammar2D, Side, SymbolId, SymbolKind, Tslp2D, TslpProduction};
use crate::transforms::{prune_plain, prune_tslp};
use crate::validate::topo_order;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BalanceStats {
    pub input_size: u64,
    pub output_size: u64,
    pub input_depth: u32,
    pub output_depth: u32,
    /// `N·M` of the derived string.
    pub string_area: u128,
}

impl BalanceStats {
    /// Output depth divided by `log2` of the string area (at least 1).
    pub fn depth_ratio(&self) -> f64 {
        self.output_depth as f64 / (self.string_area as f64).log2().max(1.0)
    }

    pub fn size_ratio(&self) -> f64 {
        self.output_size as f64 / self.input_size as f64
    }
}

fn class(x: u128) -> u32 {
    127 - x.leading_zeros()
}

#[derive(Clone, Copy, Debug)]
struct TreeNode {
    left: usize,
    right: usize,
    parent: Option<usize>,
    leaf: Option<usize>,
}

struct Chain {
    nodes: Vec<SymbolId>,
    tree: Vec<TreeNode>,
    leaf_node: Vec<usize>,
    full: Vec<Option<SymbolId>>,
    suffix: Vec<Option<Option<SymbolId>>>,
    end: Option<SymbolId>,
}

/// Weight-balanced binary tree over leaves `lo..hi`; returns the root.
fn build_tree(tree: &mut Vec<TreeNode>, leaf_node: &mut [usize], prefix: &[f64], lo: usize, hi: usize) -> usize {
    let id = tree.len();
    tree.push(TreeNode { left: 0, right: 0, parent: None, leaf: None });
    if hi - lo == 1 {
        tree[id].leaf = Some(lo);
        leaf_node[lo] = id;
        return id;
    }
    let total = prefix[hi] - prefix[lo];
    let half = prefix[lo] + total / 2.0;
    // first split point whose left part reaches half the weight
    let mut m = lo + 1 + prefix[lo + 1..hi].partition_point(|&p| p < half);
    m = m.min(hi - 1);
    // the split one earlier may be more even
    if m > lo + 1 {
        let cost = |k: usize| (prefix[k] - prefix[lo]).max(prefix[hi] - prefix[k]);
        if cost(m - 1) <= cost(m) {
            m -= 1;
        }
    }
    let l = build_tree(tree, leaf_node, prefix, lo, m);
    let r = build_tree(tree, leaf_node, prefix, m, hi);
    tree[id].left = l;
    tree[id].right = r;
    tree[l].parent = Some(id);
    tree[r].parent = Some(id);
    id
}

struct Balancer<'a> {
    t: &'a Tslp2D,
    geo: &'a Geometry,
    chain_of: Vec<(usize, usize)>,
    chains: Vec<Chain>,
    var: Vec<Option<SymbolId>>,
    ctx: Vec<Option<SymbolId>>,
    out: TslpBuilder,
}

impl Balancer<'_> {
    fn ground(&self, s: SymbolId) -> SymbolId {
        self.var[s.index()].expect("ground symbol entered from outside its chain")
    }

    fn context(&self, s: SymbolId) -> SymbolId {
        self.ctx[s.index()].expect("contexts are copied before use")
    }

    /// The production of `s` with every reference mapped to the output.
    fn copy(&mut self, s: SymbolId) -> Result<SymbolId> {
        use TslpProduction::*;
        let p = match self.t.rule(s) {
            GTerminal(c) => GTerminal(c),
            GHConcat(a, b) => GHConcat(self.ground(a), self.ground(b)),
            GVConcat(a, b) => GVConcat(self.ground(a), self.ground(b)),
            Apply { ctx, arg } => Apply { ctx: self.context(ctx), arg: self.ground(arg) },
            Compose { outer, inner } => Compose { outer: self.context(outer), inner: self.context(inner) },
            HoleConcat { axis, hole_side, ground, hole } => HoleConcat { axis, hole_side, ground: self.ground(ground), hole },
            CtxConcat { axis, ctx_side, ctx, ground } => {
                CtxConcat { axis, ctx_side, ctx: self.context(ctx), ground: self.ground(ground) }
            }
        };
        self.out.add(p)
    }

    /// Context for chain position `l`: the node with its chain child cut out.
    fn atom(&mut self, c: usize, l: usize) -> Result<SymbolId> {
        let v = self.chains[c].nodes[l];
        let next = self.chains[c].nodes[l + 1];
        let hole = self.geo.dims(next);
        let (axis, a, b) = match self.t.rule(v) {
            TslpProduction::GHConcat(a, b) => (Axis::Horizontal, a, b),
            TslpProduction::GVConcat(a, b) => (Axis::Vertical, a, b),
            TslpProduction::Apply { ctx, .. } => return Ok(self.context(ctx)),
            _ => unreachable!("chain nodes have a chain child"),
        };
        let (side, sibling) = if a == next { (Side::First, b) } else { (Side::Second, a) };
        let g = self.ground(sibling);
        self.out.hole_concat(axis, side, g, hole)
    }

    fn full(&mut self, c: usize, node: usize) -> Result<SymbolId> {
        if let Some(s) = self.chains[c].full[node] {
            return Ok(s);
        }
        let tn = self.chains[c].tree[node];
        let s = match tn.leaf {
            Some(l) => self.atom(c, l)?,
            None => {
                let l = self.full(c, tn.left)?;
                let r = self.full(c, tn.right)?;
                self.out.compose(l, r)?
            }
        };
        self.chains[c].full[node] = Some(s);
        Ok(s)
    }

    /// Composition of all leaves right of `node`'s subtree, `None` if empty.
    fn suffix(&mut self, c: usize, node: usize) -> Result<Option<SymbolId>> {
        if let Some(s) = self.chains[c].suffix[node] {
            return Ok(s);
        }
        let tn = self.chains[c].tree[node];
        let s = match tn.parent {
            None => None,
            Some(p) => {
                let up = self.suffix(c, p)?;
                if self.chains[c].tree[p].left == node {
                    let sib = self.full(c, self.chains[c].tree[p].right)?;
                    Some(match up {
                        Some(u) => self.out.compose(sib, u)?,
                        None => sib,
                    })
                } else {
                    up
                }
            }
        };
        self.chains[c].suffix[node] = Some(s);
        Ok(s)
    }

    fn end(&mut self, c: usize) -> Result<SymbolId> {
        if let Some(e) = self.chains[c].end {
            return Ok(e);
        }
        let last = *self.chains[c].nodes.last().unwrap();
        let e = self.copy(last)?;
        self.chains[c].end = Some(e);
        Ok(e)
    }

    fn var_for(&mut self, s: SymbolId) -> Result<SymbolId> {
        let (c, i) = self.chain_of[s.index()];
        let end = self.end(c)?;
        if i + 1 == self.chains[c].nodes.len() {
            return Ok(end);
        }
        let atom = self.atom(c, i)?;
        let leaf = self.chains[c].leaf_node[i];
        let ctx = match self.suffix(c, leaf)? {
            Some(rest) => self.out.compose(atom, rest)?,
            None => atom,
        };
        self.out.apply(ctx, end)
    }
}

/// Equivalent holed grammar of depth `O(log NM)` and size `O(|G|)`.
/// Context symbols of the input are kept as they are, with their ground
/// references redirected; only the ground layer is rebalanced.
pub fn balance_to_tslp(t: &Tslp2D) -> Result<(Tslp2D, BalanceStats)> {
    let geo = t.geometry()?;
    let n = t.len();
    let (order, _) = topo_order(t);

    let mut live = vec![false; n];
    live[t.start().index()] = true;
    let mut paths = vec![0u128; n];
    paths[t.start().index()] = 1;
    for &s in order.iter().rev() {
        if !live[s.index()] {
            continue;
        }
        let k = paths[s.index()];
        for c in t.rule(s).children() {
            live[c.index()] = true;
            paths[c.index()] = paths[c.index()].saturating_add(k);
        }
    }
    let weight = |s: SymbolId| geo.weight(s) as u128;

    let mut sc_child = vec![None; n];
    let mut sc_parent: Vec<Option<SymbolId>> = vec![None; n];
    for &s in &order {
        if !live[s.index()] {
            continue;
        }
        let candidates: &[SymbolId] = &match t.rule(s) {
            TslpProduction::GHConcat(a, b) | TslpProduction::GVConcat(a, b) => {
                // heavier child first, ties to the first argument
                if weight(b) > weight(a) {
                    [b, a]
                } else {
                    [a, b]
                }
            }
            TslpProduction::Apply { arg, .. } => [arg, arg],
            _ => continue,
        };
        for &c in candidates {
            let same = class(paths[s.index()]) == class(paths[c.index()]) && class(weight(s)) == class(weight(c));
            if same && sc_parent[c.index()].is_none() && c != s {
                sc_child[s.index()] = Some(c);
                sc_parent[c.index()] = Some(s);
                break;
            }
        }
    }

    let mut chains = Vec::new();
    let mut chain_of = vec![(usize::MAX, 0); n];
    for &head in &order {
        let h = head.index();
        if !live[h] || t.kind(head) != SymbolKind::Ground || sc_parent[h].is_some() {
            continue;
        }
        let mut nodes = vec![head];
        while let Some(c) = sc_child[nodes.last().unwrap().index()] {
            nodes.push(c);
        }
        let ci = chains.len();
        for (i, v) in nodes.iter().enumerate() {
            chain_of[v.index()] = (ci, i);
        }
        let k = nodes.len() - 1;
        let mut tree = Vec::new();
        let mut leaf_node = vec![0; k];
        if k > 0 {
            let entry: Vec<f64> = (0..k)
                .map(|l| {
                    let above = if l == 0 { 0 } else { paths[nodes[l - 1].index()] };
                    (paths[nodes[l].index()] - above) as f64
                })
                .collect();
            let exit: Vec<f64> = (0..k)
                .map(|l| {
                    let v = nodes[l];
                    let w = match t.rule(v) {
                        TslpProduction::GHConcat(a, b) | TslpProduction::GVConcat(a, b) => {
                            if a == nodes[l + 1] {
                                weight(b)
                            } else {
                                weight(a)
                            }
                        }
                        TslpProduction::Apply { ctx, .. } => weight(ctx),
                        _ => unreachable!(),
                    };
                    w as f64
                })
                .collect();
            let (e_sum, w_sum): (f64, f64) = (entry.iter().sum(), exit.iter().sum());
            let mut prefix = vec![0.0; k + 1];
            for l in 0..k {
                let e = if e_sum > 0.0 { entry[l] / e_sum } else { 0.0 };
                prefix[l + 1] = prefix[l] + e + exit[l] / w_sum;
            }
            build_tree(&mut tree, &mut leaf_node, &prefix, 0, k);
        }
        let size = tree.len();
        chains.push(Chain { nodes, tree, leaf_node, full: vec![None; size], suffix: vec![None; size], end: None });
    }

    let mut b = Balancer {
        t,
        geo,
        chain_of,
        chains,
        var: vec![None; n],
        ctx: vec![None; n],
        out: TslpBuilder::new(),
    };
    for &s in &order {
        if !live[s.index()] {
            continue;
        }
        if t.kind(s) == SymbolKind::Context {
            let c = b.copy(s)?;
            b.ctx[s.index()] = Some(c);
            continue;
        }
        let above = sc_parent[s.index()].map_or(0, |p| paths[p.index()]);
        if paths[s.index()] > above {
            let v = b.var_for(s)?;
            b.var[s.index()] = Some(v);
        }
    }
    let start = b.var[t.start().index()].expect("the start symbol has one root path");
    let out = prune_tslp(&b.out.finish(start));
    let stats = BalanceStats {
        input_size: t.size(),
        output_size: out.size(),
        input_depth: t.depth()?,
        output_depth: out.depth()?,
        string_area: geo.dims(t.start()).area(),
    };
    Ok((out, stats))
}

pub fn balance_plain(g: &Grammar2D) -> Result<(Tslp2D, BalanceStats)> {
    balance_to_tslp(&Tslp2D::from_plain(g))
}

/// Replaces every context `u·*·v` of a height-1 holed grammar by its two
/// sides, giving a plain 1D grammar.
pub fn eliminate_contexts_1d(t: &Tslp2D) -> Result<Grammar1D> {
    let geo = t.geometry()?;
    for i in 0..t.len() {
        let s = SymbolId(i as u32);
        let h = geo.dims(s).height;
        if h != 1 {
            return Err(Error::NotOneDimensional { symbol: s, height: h });
        }
    }
    let (order, _) = topo_order(t);
    let mut b = PlainBuilder::new();
    let mut ground: Vec<Option<SymbolId>> = vec![None; t.len()];
    let mut sides: Vec<(Option<SymbolId>, Option<SymbolId>)> = vec![(None, None); t.len()];
    let cat = |b: &mut PlainBuilder, x: Option<SymbolId>, y: Option<SymbolId>| -> Result<Option<SymbolId>> {
        Ok(match (x, y) {
            (Some(x), Some(y)) => Some(b.h(x, y)?),
            (x, None) => x,
            (None, y) => y,
        })
    };
    let not_1d = |s: SymbolId| Error::NotOneDimensional { symbol: s, height: 2 };
    for s in order {
        let g = |x: SymbolId| ground[x.index()].expect("children first");
        use TslpProduction::*;
        match t.rule(s) {
            GTerminal(c) => ground[s.index()] = Some(b.terminal(c)),
            GHConcat(x, y) => ground[s.index()] = Some(b.h(g(x), g(y))?),
            GVConcat(..) => return Err(not_1d(s)),
            Apply { ctx, arg } => {
                let (l, r) = sides[ctx.index()];
                let left = cat(&mut b, l, Some(g(arg)))?;
                ground[s.index()] = cat(&mut b, left, r)?;
            }
            HoleConcat { axis: Axis::Horizontal, hole_side, ground: e, .. } => {
                sides[s.index()] = match hole_side {
                    Side::First => (None, Some(g(e))),
                    Side::Second => (Some(g(e)), None),
                };
            }
            CtxConcat { axis: Axis::Horizontal, ctx_side, ctx, ground: e } => {
                let (l, r) = sides[ctx.index()];
                sides[s.index()] = match ctx_side {
                    Side::First => (l, cat(&mut b, r, Some(g(e)))?),
                    Side::Second => (cat(&mut b, Some(g(e)), l)?, r),
                };
            }
            Compose { outer, inner } => {
                let (ol, or) = sides[outer.index()];
                let (il, ir) = sides[inner.index()];
                sides[s.index()] = (cat(&mut b, ol, il)?, cat(&mut b, ir, or)?);
            }
            HoleConcat { .. } | CtxConcat { .. } => return Err(not_1d(s)),
        }
    }
    let start = ground[t.start().index()].expect("start is ground");
    Grammar1D::new(prune_plain(&b.finish(start)))
}

/// Balanced equivalent of a 1D grammar.
pub fn balance_1d(g: &Grammar1D) -> Result<Grammar1D> {
    let (t, _) = balance_plain(g.as_2d())?;
    eliminate_contexts_1d(&t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::Production2D as P;
    use crate::geometry::Dims;
    use crate::matrix::{expand, expand_tslp};

    fn hole(h: u64, w: u64) -> Dims {
        Dims::new(h, w)
    }

    fn s(i: u32) -> SymbolId {
        SymbolId(i)
    }

    fn caterpillar(g: u32) -> Grammar2D {
        let mut rules = vec![P::Terminal('a'), P::HConcat(s(0), s(0))];
        for i in 2..=g {
            rules.push(P::HConcat(s(i - 1), s(0)));
        }
        Grammar2D::from_rules(rules, s(g))
    }

    fn doubling(g: u32) -> Grammar2D {
        let mut rules = vec![P::Terminal('a')];
        for i in 1..g {
            rules.push(P::HConcat(s(i - 1), s(i - 1)));
        }
        Grammar2D::from_rules(rules, s(g - 1))
    }

    #[test]
    fn caterpillar_gets_shallow() {
        let g = caterpillar(64);
        let (t, st) = balance_plain(&g).unwrap();
        assert!(t.validate().is_ok(), "{}", t.validate());
        assert_eq!(
            expand_tslp(&t, t.start(), 1000, '#').unwrap(),
            expand(&g, g.start(), 1000).unwrap()
        );
        assert!(st.output_depth < 64, "{st:?}");
        let one = eliminate_contexts_1d(&t).unwrap();
        assert_eq!(one.expand_string(1000).unwrap(), "a".repeat(65));
    }

    #[test]
    fn doubling_stays_shallow() {
        let g = doubling(10);
        let (t, st) = balance_plain(&g).unwrap();
        assert!(st.output_depth <= st.input_depth + 4, "{st:?}");
        assert_eq!(expand_tslp(&t, t.start(), 1 << 12, '#').unwrap().row_string(1), "a".repeat(512));
    }

    #[test]
    fn single_terminal() {
        let g = Grammar1D::new(Grammar2D::from_rules(vec![P::Terminal('q')], s(0))).unwrap();
        let b = balance_1d(&g).unwrap();
        assert_eq!(b.as_2d().rules(), &[P::Terminal('q')]);
    }

    #[test]
    fn elimination_by_hand() {
        // *·b applied to a
        let mut tb = TslpBuilder::new();
        let a = tb.terminal('a');
        let bb = tb.terminal('b');
        let c = tb.hole_concat(Axis::Horizontal, Side::First, bb, hole(1, 1)).unwrap();
        let r = tb.apply(c, a).unwrap();
        let g = eliminate_contexts_1d(&tb.finish(r)).unwrap();
        assert_eq!(g.expand_string(10).unwrap(), "ab");

        // (u*v) composed with (s*t), applied to w
        let mut tb = TslpBuilder::new();
        let [u, v, s_, t_, w] = ['u', 'v', 's', 't', 'w'].map(|c| tb.terminal(c));
        let st = tb.hole_concat(Axis::Horizontal, Side::Second, s_, hole(1, 1)).unwrap();
        let st = tb
            .add(TslpProduction::CtxConcat { axis: Axis::Horizontal, ctx_side: Side::First, ctx: st, ground: t_ })
            .unwrap();
        let uv = tb.hole_concat(Axis::Horizontal, Side::Second, u, hole(1, 3)).unwrap();
        let uv = tb
            .add(TslpProduction::CtxConcat { axis: Axis::Horizontal, ctx_side: Side::First, ctx: uv, ground: v })
            .unwrap();
        let comp = tb.compose(uv, st).unwrap();
        let root = tb.apply(comp, w).unwrap();
        let g = eliminate_contexts_1d(&tb.finish(root)).unwrap();
        assert_eq!(g.expand_string(10).unwrap(), "uswtv");
    }

    #[test]
    fn two_dimensional_input_is_rejected() {
        let g = Grammar2D::from_rules(vec![P::Terminal('a'), P::VConcat(s(0), s(0))], s(1));
        assert!(matches!(
            eliminate_contexts_1d(&Tslp2D::from_plain(&g)),
            Err(Error::NotOneDimensional { .. })
        ));
    }
}
