//! Incremental grammar construction with hash-consing and eager dimension
//! checks.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{derive, Dims, GeometryFault, NodeGeometry};
use crate::grammar::{Axis, Grammar2D, Production2D, Side, SymbolId, Tslp2D, TslpProduction};

fn fault(f: GeometryFault, at: SymbolId) -> Error {
    match f {
        GeometryFault::Dimension(d) | GeometryFault::Hole(d) => Error::DimensionMismatch(d),
        GeometryFault::Overflow(detail) => Error::Overflow { symbol: at, detail },
    }
}

/// Builder for plain grammars. Identical productions share one symbol.
#[derive(Clone, Debug, Default)]
pub struct PlainBuilder {
    rules: Vec<Production2D>,
    labels: Vec<Option<String>>,
    geo: Vec<NodeGeometry>,
    index: HashMap<Production2D, SymbolId>,
}

impl PlainBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts from the productions of a valid grammar, keeping its ids.
    pub fn from_grammar(g: &Grammar2D) -> Result<Self> {
        let geo = g.geometry()?;
        let mut b = PlainBuilder {
            rules: g.rules().to_vec(),
            labels: g.labels().to_vec(),
            geo: Vec::with_capacity(g.len()),
            index: HashMap::with_capacity(g.len()),
        };
        for (i, &r) in g.rules().iter().enumerate() {
            let s = SymbolId(i as u32);
            b.geo.push(NodeGeometry { dims: geo.dims(s), hole: None, depth: geo.depth(s) });
            b.index.entry(r).or_insert(s);
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn dims(&self, s: SymbolId) -> Dims {
        self.geo[s.index()].dims
    }

    pub fn depth(&self, s: SymbolId) -> u32 {
        self.geo[s.index()].depth
    }

    pub fn rule(&self, s: SymbolId) -> Production2D {
        self.rules[s.index()]
    }

    pub fn add(&mut self, p: Production2D) -> Result<SymbolId> {
        if let Some(&s) = self.index.get(&p) {
            return Ok(s);
        }
        let id = SymbolId(self.rules.len() as u32);
        let node = derive(&p.into(), |c| self.geo[c.index()]).map_err(|f| fault(f, id))?;
        self.rules.push(p);
        self.labels.push(None);
        self.geo.push(node);
        self.index.insert(p, id);
        Ok(id)
    }

    pub fn terminal(&mut self, c: char) -> SymbolId {
        self.add(Production2D::Terminal(c)).expect("terminals always fit")
    }

    pub fn h(&mut self, a: SymbolId, b: SymbolId) -> Result<SymbolId> {
        self.add(Production2D::HConcat(a, b))
    }

    pub fn v(&mut self, a: SymbolId, b: SymbolId) -> Result<SymbolId> {
        self.add(Production2D::VConcat(a, b))
    }

    pub fn concat(&mut self, axis: Axis, a: SymbolId, b: SymbolId) -> Result<SymbolId> {
        match axis {
            Axis::Horizontal => self.h(a, b),
            Axis::Vertical => self.v(a, b),
        }
    }

    pub fn set_label(&mut self, s: SymbolId, label: impl Into<String>) {
        self.labels[s.index()] = Some(label.into());
    }

    pub fn finish(self, start: SymbolId) -> Grammar2D {
        Grammar2D::new(self.rules, self.labels, start)
    }
}

/// Builder for holed grammars.
#[derive(Clone, Debug, Default)]
pub struct TslpBuilder {
    rules: Vec<TslpProduction>,
    labels: Vec<Option<String>>,
    geo: Vec<NodeGeometry>,
    index: HashMap<TslpProduction, SymbolId>,
}

impl TslpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn geometry(&self, s: SymbolId) -> NodeGeometry {
        self.geo[s.index()]
    }

    pub fn dims(&self, s: SymbolId) -> Dims {
        self.geo[s.index()].dims
    }

    pub fn rule(&self, s: SymbolId) -> TslpProduction {
        self.rules[s.index()]
    }

    /// Adds a production; references must already exist and have the right sort.
    pub fn add(&mut self, p: TslpProduction) -> Result<SymbolId> {
        if let Some(&s) = self.index.get(&p) {
            return Ok(s);
        }
        let id = SymbolId(self.rules.len() as u32);
        let (refs, k) = p.references();
        for &(c, kind) in &refs[..k] {
            if c.index() >= self.rules.len() || self.rules[c.index()].kind() != kind {
                return Err(Error::DimensionMismatch(format!("reference to {c} must be a {kind:?} symbol")));
            }
        }
        let node = derive(&p, |c| self.geo[c.index()]).map_err(|f| fault(f, id))?;
        self.rules.push(p);
        self.labels.push(None);
        self.geo.push(node);
        self.index.insert(p, id);
        Ok(id)
    }

    pub fn terminal(&mut self, c: char) -> SymbolId {
        self.add(TslpProduction::GTerminal(c)).expect("terminals always fit")
    }

    pub fn concat(&mut self, axis: Axis, a: SymbolId, b: SymbolId) -> Result<SymbolId> {
        match axis {
            Axis::Horizontal => self.add(TslpProduction::GHConcat(a, b)),
            Axis::Vertical => self.add(TslpProduction::GVConcat(a, b)),
        }
    }

    pub fn apply(&mut self, ctx: SymbolId, arg: SymbolId) -> Result<SymbolId> {
        self.add(TslpProduction::Apply { ctx, arg })
    }

    pub fn compose(&mut self, outer: SymbolId, inner: SymbolId) -> Result<SymbolId> {
        self.add(TslpProduction::Compose { outer, inner })
    }

    pub fn hole_concat(&mut self, axis: Axis, hole_side: Side, ground: SymbolId, hole: Dims) -> Result<SymbolId> {
        self.add(TslpProduction::HoleConcat { axis, hole_side, ground, hole: (hole.height, hole.width) })
    }

    pub fn set_label(&mut self, s: SymbolId, label: impl Into<String>) {
        self.labels[s.index()] = Some(label.into());
    }

    pub fn finish(self, start: SymbolId) -> Tslp2D {
        Tslp2D::new(self.rules, self.labels, start)
    }
}
