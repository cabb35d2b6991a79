//! Well-formedness checks. Violations are collected as data; a grammar is
//! well-formed iff its report is empty.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{derive, Geometry, GeometryFault, NodeGeometry};
use crate::grammar::{display_name, RuleSource, SymbolId, SymbolKind, TslpProduction};

pub const DEFAULT_HOLE_MARKER: char = '#';

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    /// The symbol lies on a cycle of the reference relation.
    Cycle,
    UndefinedReference { target: u32 },
    WrongSort { target: u32, expected: SymbolKind },
    DimensionMismatch { detail: String },
    HoleGeometry { detail: String },
    Overflow { detail: String },
    StartNotGround,
    StartUndefined,
    InvalidLabel { label: String },
    DuplicateLabel { label: String },
    HoleMarkerInAlphabet { marker: char },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub symbol: u32,
    pub name: String,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "symbol {} (id {}): ", self.name, self.symbol)?;
        match &self.kind {
            ViolationKind::Cycle => write!(f, "lies on a reference cycle"),
            ViolationKind::UndefinedReference { target } => write!(f, "references undefined symbol {target}"),
            ViolationKind::WrongSort { target, expected } => {
                write!(f, "reference to {target} must be a {expected:?} symbol")
            }
            ViolationKind::DimensionMismatch { detail } => write!(f, "dimension mismatch: {detail}"),
            ViolationKind::HoleGeometry { detail } => write!(f, "hole geometry: {detail}"),
            ViolationKind::Overflow { detail } => write!(f, "overflow: {detail}"),
            ViolationKind::StartNotGround => write!(f, "start symbol is a context"),
            ViolationKind::StartUndefined => write!(f, "start symbol is undefined"),
            ViolationKind::InvalidLabel { label } => write!(f, "label {label:?} is not [A-Za-z0-9_]+"),
            ViolationKind::DuplicateLabel { label } => write!(f, "label {label:?} used twice"),
            ViolationKind::HoleMarkerInAlphabet { marker } => {
                write!(f, "terminal {marker:?} collides with the hole marker")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, pred: impl Fn(&ViolationKind) -> bool) -> bool {
        self.violations.iter().any(|v| pred(&v.kind))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate<S: RuleSource + ?Sized>(src: &S, hole_marker: Option<char>) -> ValidationReport {
    analyze(src, hole_marker).0
}

pub(crate) fn checked_geometry<S: RuleSource + ?Sized>(src: &S, hole_marker: Option<char>) -> Result<Geometry> {
    match analyze(src, hole_marker) {
        (report, Some(geo)) if report.is_ok() => Ok(geo),
        (report, _) => {
            if let Some(v) = report.violations.iter().find(|v| matches!(v.kind, ViolationKind::Overflow { .. })) {
                if let ViolationKind::Overflow { detail } = &v.kind {
                    return Err(Error::Overflow { symbol: SymbolId(v.symbol), detail: detail.clone() });
                }
            }
            Err(Error::Invalid(report))
        }
    }
}

fn valid_label(l: &str) -> bool {
    !l.is_empty() && l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Post-order of all defined symbols over defined references, plus the set
/// of symbols on a cycle.
pub(crate) fn topo_order<S: RuleSource + ?Sized>(src: &S) -> (Vec<SymbolId>, Vec<bool>) {
    let n = src.symbol_count();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut on_cycle = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(SymbolId, usize)> = Vec::new();
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        stack.push((SymbolId(root as u32), 0));
        state[root] = 1;
        while let Some(&mut (sym, ref mut next)) = stack.last_mut() {
            let prod = src.production(sym);
            let (refs, k) = prod.references();
            if *next < k {
                let child = refs[*next].0;
                *next += 1;
                if child.index() >= n {
                    continue;
                }
                match state[child.index()] {
                    0 => {
                        state[child.index()] = 1;
                        stack.push((child, 0));
                    }
                    1 => {
                        // back edge: mark every symbol on the stack from `child` upward
                        on_cycle[child.index()] = true;
                        for &(s, _) in stack.iter().rev() {
                            on_cycle[s.index()] = true;
                            if s == child {
                                break;
                            }
                        }
                    }
                    _ => {}
                }
            } else {
                state[sym.index()] = 2;
                order.push(sym);
                stack.pop();
            }
        }
    }
    (order, on_cycle)
}

pub(crate) fn analyze<S: RuleSource + ?Sized>(src: &S, hole_marker: Option<char>) -> (ValidationReport, Option<Geometry>) {
    let n = src.symbol_count();
    let mut violations = Vec::new();
    let push = |violations: &mut Vec<Violation>, s: SymbolId, kind: ViolationKind| {
        violations.push(Violation { symbol: s.0, name: display_name(src, s), kind });
    };

    let mut seen_labels = std::collections::HashMap::new();
    for i in 0..n {
        let s = SymbolId(i as u32);
        if let Some(l) = src.label(s) {
            if !valid_label(l) {
                push(&mut violations, s, ViolationKind::InvalidLabel { label: l.to_string() });
            } else if seen_labels.insert(l.to_string(), s).is_some() {
                push(&mut violations, s, ViolationKind::DuplicateLabel { label: l.to_string() });
            }
        }
    }

    // references and sorts; `broken[s]` marks symbols whose geometry cannot be derived
    let mut broken = vec![false; n];
    for i in 0..n {
        let s = SymbolId(i as u32);
        let prod = src.production(s);
        if let (Some(marker), TslpProduction::GTerminal(c)) = (hole_marker, prod) {
            if c == marker {
                push(&mut violations, s, ViolationKind::HoleMarkerInAlphabet { marker });
            }
        }
        let (refs, k) = prod.references();
        for &(target, expected) in &refs[..k] {
            if target.index() >= n {
                push(&mut violations, s, ViolationKind::UndefinedReference { target: target.0 });
                broken[i] = true;
            } else if src.production(target).kind() != expected {
                push(&mut violations, s, ViolationKind::WrongSort { target: target.0, expected });
                broken[i] = true;
            }
        }
    }

    let start = src.start();
    if start.index() >= n {
        push(&mut violations, start, ViolationKind::StartUndefined);
    } else if src.production(start).kind() != SymbolKind::Ground {
        push(&mut violations, start, ViolationKind::StartNotGround);
    }

    let (order, on_cycle) = topo_order(src);
    for (i, &c) in on_cycle.iter().enumerate() {
        if c {
            push(&mut violations, SymbolId(i as u32), ViolationKind::Cycle);
            broken[i] = true;
        }
    }

    let placeholder = NodeGeometry { dims: crate::geometry::Dims::new(0, 0), hole: None, depth: 0 };
    let mut nodes: Vec<Option<NodeGeometry>> = vec![None; n];
    for &s in &order {
        if broken[s.index()] {
            continue;
        }
        let prod = src.production(s);
        let deps_ok = prod.children().all(|c| nodes[c.index()].is_some());
        if !deps_ok {
            broken[s.index()] = true;
            continue;
        }
        match derive(&prod, |c| nodes[c.index()].unwrap_or(placeholder)) {
            Ok(g) => nodes[s.index()] = Some(g),
            Err(fault) => {
                broken[s.index()] = true;
                let kind = match fault {
                    GeometryFault::Dimension(detail) => ViolationKind::DimensionMismatch { detail },
                    GeometryFault::Hole(detail) => ViolationKind::HoleGeometry { detail },
                    GeometryFault::Overflow(detail) => ViolationKind::Overflow { detail },
                };
                push(&mut violations, s, kind);
            }
        }
    }

    // hole sanity for every derived context
    for (i, node) in nodes.iter().enumerate() {
        if let Some(NodeGeometry { dims, hole: Some(h), .. }) = node {
            let inside = h.row >= 1
                && h.col >= 1
                && h.row + h.height - 1 <= dims.height
                && h.col + h.width - 1 <= dims.width;
            if !inside || dims.area() <= h.dims().area() {
                push(
                    &mut violations,
                    SymbolId(i as u32),
                    ViolationKind::HoleGeometry {
                        detail: format!("hole {}x{} at ({}, {}) in {}x{}", h.height, h.width, h.row, h.col, dims.height, dims.width),
                    },
                );
            }
        }
    }

    violations.sort_by_key(|v| v.symbol);
    let report = ValidationReport { violations };
    if !report.is_ok() {
        return (report, None);
    }
    let mut dims = Vec::with_capacity(n);
    let mut holes = Vec::with_capacity(n);
    let mut depth = Vec::with_capacity(n);
    for node in nodes {
        let node = node.expect("all symbols derived when report is empty");
        dims.push(node.dims);
        holes.push(node.hole);
        depth.push(node.depth);
    }
    (report, Some(Geometry { dims, holes, depth }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{Axis, Grammar2D, Production2D as P, Side, Tslp2D, TslpProduction as T};

    fn s(i: u32) -> SymbolId {
        SymbolId(i)
    }

    /// A=0, B=1, C=A|B, H(*)=* over C, T=H(C)
    pub(crate) fn example_tslp() -> Tslp2D {
        Tslp2D::new(
            vec![
                T::GTerminal('0'),
                T::GTerminal('1'),
                T::GHConcat(s(0), s(1)),
                T::HoleConcat { axis: Axis::Vertical, hole_side: Side::First, ground: s(2), hole: (1, 2) },
                T::Apply { ctx: s(3), arg: s(2) },
            ],
            ["A", "B", "C", "H", "T"].iter().map(|l| Some(l.to_string())).collect(),
            s(4),
        )
    }

    #[test]
    fn example_is_well_formed() {
        let t = example_tslp();
        assert!(t.validate().is_ok(), "{}", t.validate());
        let geo = t.geometry().unwrap();
        assert_eq!(geo.dims(s(4)), crate::geometry::Dims::new(2, 2));
        let h = geo.hole(s(3)).unwrap();
        assert_eq!((h.height, h.width, h.row, h.col), (1, 2, 1, 1));
    }

    #[test]
    fn self_reference_is_a_cycle() {
        let g = Grammar2D::new(vec![P::Terminal('a'), P::HConcat(s(1), s(1))], vec![None, Some("X".into())], s(1));
        let r = g.validate();
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::Cycle && v.name == "X"), "{r}");
    }

    #[test]
    fn longer_cycle_names_all_members() {
        let g = Grammar2D::from_rules(vec![P::HConcat(s(1), s(1)), P::VConcat(s(2), s(2)), P::HConcat(s(0), s(0))], s(0));
        let r = g.validate();
        let cyc: Vec<u32> = r.violations.iter().filter(|v| v.kind == ViolationKind::Cycle).map(|v| v.symbol).collect();
        assert_eq!(cyc, vec![0, 1, 2]);
    }

    #[test]
    fn width_mismatch_in_vertical_concat() {
        // A = a, B = a|a, C = A over B
        let g = Grammar2D::new(
            vec![P::Terminal('a'), P::HConcat(s(0), s(0)), P::VConcat(s(0), s(1))],
            vec![Some("A".into()), Some("B".into()), Some("C".into())],
            s(2),
        );
        let r = g.validate();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].name, "C");
        assert!(matches!(r.violations[0].kind, ViolationKind::DimensionMismatch { .. }));
    }

    #[test]
    fn undefined_reference_and_start_checks() {
        let g = Grammar2D::from_rules(vec![P::HConcat(s(0), s(7))], s(0));
        let r = g.validate();
        assert!(r.has(|k| matches!(k, ViolationKind::UndefinedReference { target: 7 })));

        let t = Tslp2D::from_rules(
            vec![T::GTerminal('a'), T::HoleConcat { axis: Axis::Horizontal, hole_side: Side::First, ground: s(0), hole: (1, 1) }],
            s(1),
        );
        assert!(t.validate().has(|k| *k == ViolationKind::StartNotGround));
    }

    #[test]
    fn sorts_are_checked() {
        let t = Tslp2D::from_rules(vec![T::GTerminal('a'), T::Apply { ctx: s(0), arg: s(0) }], s(1));
        assert!(t.validate().has(|k| matches!(k, ViolationKind::WrongSort { target: 0, .. })));
    }

    #[test]
    fn hole_marker_collision() {
        let t = Tslp2D::from_rules(vec![T::GTerminal('#')], s(0));
        assert!(t.validate().has(|k| matches!(k, ViolationKind::HoleMarkerInAlphabet { .. })));
    }

    #[test]
    fn overflow_is_reported() {
        // doubling 63 times exceeds 2^62
        let mut rules = vec![P::Terminal('a')];
        for i in 0..63 {
            rules.push(P::HConcat(s(i), s(i)));
        }
        let g = Grammar2D::from_rules(rules, s(63));
        assert!(matches!(g.geometry(), Err(Error::Overflow { .. })));
    }

    #[test]
    fn apply_dimension_mismatch() {
        let t = Tslp2D::from_rules(
            vec![
                T::GTerminal('a'),
                T::HoleConcat { axis: Axis::Horizontal, hole_side: Side::First, ground: s(0), hole: (1, 2) },
                T::Apply { ctx: s(1), arg: s(0) },
            ],
            s(2),
        );
        let r = t.validate();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].symbol, 2);
    }

    #[test]
    fn bad_labels() {
        let g = Grammar2D::new(vec![P::Terminal('a'), P::Terminal('b')], vec![Some("a-b".into()), None], s(0));
        assert!(g.validate().has(|k| matches!(k, ViolationKind::InvalidLabel { .. })));
        let g = Grammar2D::new(vec![P::Terminal('a'), P::Terminal('b')], vec![Some("x".into()), Some("x".into())], s(0));
        assert!(g.validate().has(|k| matches!(k, ViolationKind::DuplicateLabel { .. })));
    }
}
