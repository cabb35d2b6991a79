//! Plain and holed two-dimensional grammars.
//!
//! Symbols are dense indices into a production table. A plain grammar
//! ([`Grammar2D`]) has terminal, horizontal and vertical productions; a holed
//! grammar ([`Tslp2D`]) adds context symbols deriving a rectangle with one
//! rectangular hole, plus substitution and composition. Both are immutable;
//! every transform builds a new grammar.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dims, Geometry};
use crate::validate::{self, ValidationReport};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolId(pub u32);

impl SymbolId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Which argument of a binary concatenation. `First` is left (horizontal)
/// or top (vertical).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    First,
    Second,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Production2D {
    Terminal(char),
    HConcat(SymbolId, SymbolId),
    VConcat(SymbolId, SymbolId),
}

impl Production2D {
    pub fn children(&self) -> impl Iterator<Item = SymbolId> {
        let (a, b) = match *self {
            Production2D::Terminal(_) => (None, None),
            Production2D::HConcat(l, r) | Production2D::VConcat(l, r) => (Some(l), Some(r)),
        };
        a.into_iter().chain(b)
    }

    pub fn rhs_len(&self) -> u64 {
        match self {
            Production2D::Terminal(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum TslpProduction {
    GTerminal(char),
    GHConcat(SymbolId, SymbolId),
    GVConcat(SymbolId, SymbolId),
    /// Fill the hole of `ctx` with the ground string `arg`.
    Apply { ctx: SymbolId, arg: SymbolId },
    /// A bare hole of `hole` = (height, width) concatenated with a ground symbol.
    HoleConcat { axis: Axis, hole_side: Side, ground: SymbolId, hole: (u64, u64) },
    /// A context concatenated with a ground symbol; the result keeps the context's hole.
    CtxConcat { axis: Axis, ctx_side: Side, ctx: SymbolId, ground: SymbolId },
    /// `outer(inner(*))`.
    Compose { outer: SymbolId, inner: SymbolId },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    Ground,
    Context,
}

impl TslpProduction {
    pub fn kind(&self) -> SymbolKind {
        match self {
            TslpProduction::GTerminal(_)
            | TslpProduction::GHConcat(..)
            | TslpProduction::GVConcat(..)
            | TslpProduction::Apply { .. } => SymbolKind::Ground,
            _ => SymbolKind::Context,
        }
    }

    /// Referenced symbols together with the sort each reference must have.
    pub fn references(&self) -> ([(SymbolId, SymbolKind); 2], usize) {
        use SymbolKind::*;
        use TslpProduction::*;
        let none = (SymbolId(0), Ground);
        match *self {
            GTerminal(_) => ([none, none], 0),
            GHConcat(a, b) | GVConcat(a, b) => ([(a, Ground), (b, Ground)], 2),
            Apply { ctx, arg } => ([(ctx, Context), (arg, Ground)], 2),
            HoleConcat { ground, .. } => ([(ground, Ground), none], 1),
            CtxConcat { ctx, ground, .. } => ([(ctx, Context), (ground, Ground)], 2),
            Compose { outer, inner } => ([(outer, Context), (inner, Context)], 2),
        }
    }

    pub fn children(&self) -> impl Iterator<Item = SymbolId> {
        let (refs, n) = self.references();
        refs.into_iter().take(n).map(|(s, _)| s)
    }

    /// Number of right-hand-side symbols; a bare hole counts as one.
    pub fn rhs_len(&self) -> u64 {
        match self {
            TslpProduction::GTerminal(_) => 1,
            _ => 2,
        }
    }
}

impl From<Production2D> for TslpProduction {
    fn from(p: Production2D) -> Self {
        match p {
            Production2D::Terminal(c) => TslpProduction::GTerminal(c),
            Production2D::HConcat(a, b) => TslpProduction::GHConcat(a, b),
            Production2D::VConcat(a, b) => TslpProduction::GVConcat(a, b),
        }
    }
}

/// Uniform read access to a production table, used by validation and
/// geometry so both grammar flavours share one implementation.
pub trait RuleSource {
    fn symbol_count(&self) -> usize;
    fn production(&self, id: SymbolId) -> TslpProduction;
    fn start(&self) -> SymbolId;
    fn label(&self, id: SymbolId) -> Option<&str>;
}

/// Human-readable name: the label if there is one, else the numeric id.
pub fn display_name<S: RuleSource + ?Sized>(src: &S, id: SymbolId) -> String {
    if id.index() < src.symbol_count() {
        if let Some(l) = src.label(id) {
            return l.to_string();
        }
    }
    format!("_{}", id.0)
}

fn normalize_labels(labels: Vec<Option<String>>, n: usize) -> Vec<Option<String>> {
    let mut labels = labels;
    labels.resize(n, None);
    labels
}

/// A plain 2D straight-line program.
#[derive(Debug)]
pub struct Grammar2D {
    rules: Vec<Production2D>,
    labels: Vec<Option<String>>,
    start: SymbolId,
    geometry: OnceLock<Result<Geometry>>,
}

impl Clone for Grammar2D {
    fn clone(&self) -> Self {
        Grammar2D {
            rules: self.rules.clone(),
            labels: self.labels.clone(),
            start: self.start,
            geometry: self.geometry.clone(),
        }
    }
}

impl PartialEq for Grammar2D {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules && self.start == other.start && self.labels == other.labels
    }
}

impl Grammar2D {
    /// Wraps a production table without checking it; see [`Grammar2D::validate`].
    pub fn new(rules: Vec<Production2D>, labels: Vec<Option<String>>, start: SymbolId) -> Self {
        let n = rules.len();
        Grammar2D { rules, labels: normalize_labels(labels, n), start, geometry: OnceLock::new() }
    }

    pub fn from_rules(rules: Vec<Production2D>, start: SymbolId) -> Self {
        Self::new(rules, Vec::new(), start)
    }

    pub fn rules(&self) -> &[Production2D] {
        &self.rules
    }

    pub fn rule(&self, id: SymbolId) -> Production2D {
        self.rules[id.index()]
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Total number of right-hand-side symbols.
    pub fn size(&self) -> u64 {
        self.rules.iter().map(Production2D::rhs_len).sum()
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate(self, None)
    }

    /// Cached geometry; fails with [`Error::Invalid`] on a malformed grammar.
    pub fn geometry(&self) -> Result<&Geometry> {
        self.geometry.get_or_init(|| validate::checked_geometry(self, None)).as_ref().map_err(Clone::clone)
    }

    pub fn dims(&self) -> Result<Dims> {
        Ok(self.geometry()?.dims(self.start))
    }

    pub fn depth(&self) -> Result<u32> {
        Ok(self.geometry()?.depth(self.start))
    }

    /// Same productions with a different start symbol.
    pub fn with_start(&self, start: SymbolId) -> Grammar2D {
        Grammar2D::new(self.rules.clone(), self.labels.clone(), start)
    }

    /// Structural equality: productions and start, labels ignored.
    pub fn same_structure(&self, other: &Grammar2D) -> bool {
        self.rules == other.rules && self.start == other.start
    }
}

impl RuleSource for Grammar2D {
    fn symbol_count(&self) -> usize {
        self.rules.len()
    }
    fn production(&self, id: SymbolId) -> TslpProduction {
        self.rules[id.index()].into()
    }
    fn start(&self) -> SymbolId {
        self.start
    }
    fn label(&self, id: SymbolId) -> Option<&str> {
        self.labels.get(id.index()).and_then(|l| l.as_deref())
    }
}

/// A 2D SLP with holes.
#[derive(Debug)]
pub struct Tslp2D {
    rules: Vec<TslpProduction>,
    labels: Vec<Option<String>>,
    start: SymbolId,
    geometry: OnceLock<Result<Geometry>>,
}

impl Clone for Tslp2D {
    fn clone(&self) -> Self {
        Tslp2D {
            rules: self.rules.clone(),
            labels: self.labels.clone(),
            start: self.start,
            geometry: self.geometry.clone(),
        }
    }
}

impl PartialEq for Tslp2D {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules && self.start == other.start && self.labels == other.labels
    }
}

impl Tslp2D {
    pub fn new(rules: Vec<TslpProduction>, labels: Vec<Option<String>>, start: SymbolId) -> Self {
        let n = rules.len();
        Tslp2D { rules, labels: normalize_labels(labels, n), start, geometry: OnceLock::new() }
    }

    pub fn from_rules(rules: Vec<TslpProduction>, start: SymbolId) -> Self {
        Self::new(rules, Vec::new(), start)
    }

    /// Views a plain grammar as a holed one with the same ids.
    pub fn from_plain(g: &Grammar2D) -> Self {
        Tslp2D::new(g.rules.iter().map(|&p| p.into()).collect(), g.labels.clone(), g.start)
    }

    pub fn rules(&self) -> &[TslpProduction] {
        &self.rules
    }

    pub fn rule(&self, id: SymbolId) -> TslpProduction {
        self.rules[id.index()]
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn kind(&self, id: SymbolId) -> SymbolKind {
        self.rules[id.index()].kind()
    }

    pub fn size(&self) -> u64 {
        self.rules.iter().map(TslpProduction::rhs_len).sum()
    }

    pub fn has_contexts(&self) -> bool {
        self.rules.iter().any(|r| r.kind() == SymbolKind::Context)
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate(self, Some(validate::DEFAULT_HOLE_MARKER))
    }

    pub fn geometry(&self) -> Result<&Geometry> {
        self.geometry.get_or_init(|| validate::checked_geometry(self, None)).as_ref().map_err(Clone::clone)
    }

    pub fn dims(&self) -> Result<Dims> {
        Ok(self.geometry()?.dims(self.start))
    }

    pub fn depth(&self) -> Result<u32> {
        Ok(self.geometry()?.depth(self.start))
    }

    pub fn same_structure(&self, other: &Tslp2D) -> bool {
        self.rules == other.rules && self.start == other.start
    }

    /// The plain grammar with the same ids, if no production uses a hole.
    pub fn to_plain(&self) -> Option<Grammar2D> {
        let rules = self
            .rules
            .iter()
            .map(|r| match *r {
                TslpProduction::GTerminal(c) => Some(Production2D::Terminal(c)),
                TslpProduction::GHConcat(a, b) => Some(Production2D::HConcat(a, b)),
                TslpProduction::GVConcat(a, b) => Some(Production2D::VConcat(a, b)),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Grammar2D::new(rules, self.labels.clone(), self.start))
    }
}

impl RuleSource for Tslp2D {
    fn symbol_count(&self) -> usize {
        self.rules.len()
    }
    fn production(&self, id: SymbolId) -> TslpProduction {
        self.rules[id.index()]
    }
    fn start(&self) -> SymbolId {
        self.start
    }
    fn label(&self, id: SymbolId) -> Option<&str> {
        self.labels.get(id.index()).and_then(|l| l.as_deref())
    }
}

/// A one-dimensional SLP: a plain grammar of height 1 built from horizontal
/// concatenations only.
#[derive(Debug, Clone, PartialEq)]
pub struct Grammar1D(Grammar2D);

impl Grammar1D {
    pub fn new(g: Grammar2D) -> Result<Self> {
        if let Some(sym) = g.rules.iter().position(|r| matches!(r, Production2D::VConcat(..))) {
            let id = SymbolId(sym as u32);
            let height = g.geometry()?.dims(id).height;
            return Err(Error::NotOneDimensional { symbol: id, height });
        }
        g.geometry()?;
        Ok(Grammar1D(g))
    }

    pub fn as_2d(&self) -> &Grammar2D {
        &self.0
    }

    pub fn into_2d(self) -> Grammar2D {
        self.0
    }

    pub fn start(&self) -> SymbolId {
        self.0.start
    }

    pub fn length(&self) -> u64 {
        self.0.geometry().expect("validated at construction").dims(self.0.start).width
    }

    pub fn depth(&self) -> u32 {
        self.0.geometry().expect("validated at construction").depth(self.0.start)
    }

    pub fn size(&self) -> u64 {
        self.0.size()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Expands the derived string. Fails if longer than `max_len`.
    pub fn expand_string(&self, max_len: u64) -> Result<String> {
        let m = crate::matrix::expand(&self.0, self.0.start, max_len)?;
        Ok(m.row_string(1))
    }
}
