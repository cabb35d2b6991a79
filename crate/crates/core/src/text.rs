//! Line-based text format.
//!
//! ```text
//! TSLP2D v1
//! start T
//! A T 0
//! B T 1
//! C H A B
//! H HV T C 1 2
//! T A H C
//! ```
//!
//! Names are labels; a name of the form `_<digits>` denotes an anonymous
//! symbol. Terminals that are whitespace are written `U+XXXX`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grammar::{Axis, Grammar2D, RuleSource, Side, SymbolId, Tslp2D, TslpProduction};

pub const PLAIN_HEADER: &str = "SLP2D v1";
pub const TSLP_HEADER: &str = "TSLP2D v1";

#[derive(Clone, Debug, PartialEq)]
pub enum ParsedGrammar {
    Plain(Grammar2D),
    Tslp(Tslp2D),
}

impl ParsedGrammar {
    /// The holed view; plain grammars keep their ids.
    pub fn into_tslp(self) -> Tslp2D {
        match self {
            ParsedGrammar::Plain(g) => Tslp2D::from_plain(&g),
            ParsedGrammar::Tslp(t) => t,
        }
    }
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn is_anonymous(name: &str) -> bool {
    name.len() > 1 && name.starts_with('_') && name[1..].bytes().all(|b| b.is_ascii_digit())
}

struct Names {
    ids: HashMap<String, SymbolId>,
    order: Vec<String>,
}

impl Names {
    fn id(&mut self, name: &str) -> SymbolId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = SymbolId(self.order.len() as u32);
        self.ids.insert(name.to_string(), id);
        self.order.push(name.to_string());
        id
    }
}

fn parse_char(tok: &str, line: usize) -> Result<char> {
    let mut it = tok.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => {
            let hex = tok.strip_prefix("U+").ok_or_else(|| perr(line, format!("bad terminal {tok:?}")))?;
            u32::from_str_radix(hex, 16)
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| perr(line, format!("bad code point {tok:?}")))
        }
    }
}

fn parse_dim(tok: &str, line: usize) -> Result<u64> {
    tok.parse::<u64>().map_err(|_| perr(line, format!("bad dimension {tok:?}")))
}

fn side(tok: &str, first: &str, second: &str, line: usize) -> Result<Side> {
    if tok == first {
        Ok(Side::First)
    } else if tok == second {
        Ok(Side::Second)
    } else {
        Err(perr(line, format!("expected {first} or {second}, got {tok:?}")))
    }
}

/// Parses either format. Validation is left to the caller.
pub fn parse(input: &str) -> Result<ParsedGrammar> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let holed = match header.trim() {
        PLAIN_HEADER => false,
        TSLP_HEADER => true,
        other => return Err(perr(hl, format!("unknown header {other:?}"))),
    };
    let (sl, start_line) = lines.next().ok_or_else(|| perr(hl, "missing start line"))?;
    let toks: Vec<&str> = start_line.split_whitespace().collect();
    if toks.len() < 2 || toks[0] != "start" || (toks.len() > 2 && !toks[2].starts_with('#')) {
        return Err(perr(sl, "expected `start <ID>`"));
    }
    let start_name = toks[1].to_string();

    let mut names = Names { ids: HashMap::new(), order: Vec::new() };
    let mut defs: Vec<(usize, SymbolId, TslpProduction)> = Vec::new();
    for (ln, raw) in lines {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(perr(ln, "expected `<ID> <KIND> ...`"));
        }
        let arity = match toks[1] {
            "T" => 1,
            "H" | "V" | "A" | "C" => 2,
            "CH" | "CV" => 3,
            "HH" | "HV" => 4,
            k => return Err(perr(ln, format!("unknown production kind {k:?}"))),
        };
        if !holed && !matches!(toks[1], "T" | "H" | "V") {
            return Err(perr(ln, format!("production kind {} needs the {TSLP_HEADER} header", toks[1])));
        }
        if toks.len() < 2 + arity {
            return Err(perr(ln, format!("{} expects {arity} arguments", toks[1])));
        }
        if toks.len() > 2 + arity && !toks[2 + arity].starts_with('#') {
            return Err(perr(ln, format!("unexpected token {:?}", toks[2 + arity])));
        }
        let a = &toks[2..2 + arity];
        let id = names.id(toks[0]);
        let prod = match toks[1] {
            "T" => TslpProduction::GTerminal(parse_char(a[0], ln)?),
            "H" => TslpProduction::GHConcat(names.id(a[0]), names.id(a[1])),
            "V" => TslpProduction::GVConcat(names.id(a[0]), names.id(a[1])),
            "A" => TslpProduction::Apply { ctx: names.id(a[0]), arg: names.id(a[1]) },
            "C" => TslpProduction::Compose { outer: names.id(a[0]), inner: names.id(a[1]) },
            "HH" | "HV" => {
                let (axis, s) = if toks[1] == "HH" {
                    (Axis::Horizontal, side(a[0], "L", "R", ln)?)
                } else {
                    (Axis::Vertical, side(a[0], "T", "B", ln)?)
                };
                TslpProduction::HoleConcat {
                    axis,
                    hole_side: s,
                    ground: names.id(a[1]),
                    hole: (parse_dim(a[2], ln)?, parse_dim(a[3], ln)?),
                }
            }
            _ => {
                let (axis, s) = if toks[1] == "CH" {
                    (Axis::Horizontal, side(a[0], "L", "R", ln)?)
                } else {
                    (Axis::Vertical, side(a[0], "T", "B", ln)?)
                };
                TslpProduction::CtxConcat { axis, ctx_side: s, ctx: names.id(a[1]), ground: names.id(a[2]) }
            }
        };
        defs.push((ln, id, prod));
    }

    // Defined names come first, in definition order, so that ids are dense.
    let mut order: Vec<Option<(usize, TslpProduction)>> = vec![None; names.order.len()];
    for &(ln, id, prod) in &defs {
        if order[id.index()].is_some() {
            return Err(perr(ln, format!("symbol {} defined twice", names.order[id.index()])));
        }
        order[id.index()] = Some((ln, prod));
    }
    let mut remap: Vec<SymbolId> = vec![SymbolId(0); names.order.len()];
    let mut next = 0u32;
    for &(_, id, _) in &defs {
        remap[id.index()] = SymbolId(next);
        next += 1;
    }
    for (i, slot) in order.iter().enumerate() {
        if slot.is_none() {
            remap[i] = SymbolId(next);
            next += 1;
        }
    }
    let start = match names.ids.get(&start_name) {
        Some(&id) => remap[id.index()],
        None => SymbolId(next),
    };
    let r = |s: SymbolId| remap[s.index()];
    let mut rules = Vec::with_capacity(defs.len());
    let mut labels = Vec::with_capacity(defs.len());
    for &(_, id, prod) in &defs {
        use TslpProduction::*;
        rules.push(match prod {
            GTerminal(c) => GTerminal(c),
            GHConcat(a, b) => GHConcat(r(a), r(b)),
            GVConcat(a, b) => GVConcat(r(a), r(b)),
            Apply { ctx, arg } => Apply { ctx: r(ctx), arg: r(arg) },
            Compose { outer, inner } => Compose { outer: r(outer), inner: r(inner) },
            HoleConcat { axis, hole_side, ground, hole } => HoleConcat { axis, hole_side, ground: r(ground), hole },
            CtxConcat { axis, ctx_side, ctx, ground } => CtxConcat { axis, ctx_side, ctx: r(ctx), ground: r(ground) },
        });
        let name = &names.order[id.index()];
        labels.push(if is_anonymous(name) { None } else { Some(name.clone()) });
    }
    let t = Tslp2D::new(rules, labels, start);
    if holed {
        Ok(ParsedGrammar::Tslp(t))
    } else {
        Ok(ParsedGrammar::Plain(t.to_plain().expect("plain header admits plain productions only")))
    }
}

pub fn parse_plain(input: &str) -> Result<Grammar2D> {
    match parse(input)? {
        ParsedGrammar::Plain(g) => Ok(g),
        ParsedGrammar::Tslp(t) => t.to_plain().ok_or_else(|| perr(1, "grammar uses holes")),
    }
}

pub fn parse_tslp(input: &str) -> Result<Tslp2D> {
    Ok(parse(input)?.into_tslp())
}

fn name<S: RuleSource + ?Sized>(src: &S, s: SymbolId) -> String {
    crate::grammar::display_name(src, s)
}

fn char_token(c: char) -> String {
    if c.is_whitespace() || c.is_control() {
        format!("U+{:04X}", c as u32)
    } else {
        c.to_string()
    }
}

fn emit_rules<S: RuleSource + ?Sized>(src: &S, header: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "start {}", name(src, src.start()));
    for i in 0..src.symbol_count() {
        let s = SymbolId(i as u32);
        let n = |x| name(src, x);
        let _ = match src.production(s) {
            TslpProduction::GTerminal(c) => writeln!(out, "{} T {}", n(s), char_token(c)),
            TslpProduction::GHConcat(a, b) => writeln!(out, "{} H {} {}", n(s), n(a), n(b)),
            TslpProduction::GVConcat(a, b) => writeln!(out, "{} V {} {}", n(s), n(a), n(b)),
            TslpProduction::Apply { ctx, arg } => writeln!(out, "{} A {} {}", n(s), n(ctx), n(arg)),
            TslpProduction::Compose { outer, inner } => writeln!(out, "{} C {} {}", n(s), n(outer), n(inner)),
            TslpProduction::HoleConcat { axis, hole_side, ground, hole: (p, q) } => {
                let (kind, sd) = side_tokens(axis, hole_side);
                writeln!(out, "{} H{kind} {sd} {} {p} {q}", n(s), n(ground))
            }
            TslpProduction::CtxConcat { axis, ctx_side, ctx, ground } => {
                let (kind, sd) = side_tokens(axis, ctx_side);
                writeln!(out, "{} C{kind} {sd} {} {}", n(s), n(ctx), n(ground))
            }
        };
    }
    out
}

fn side_tokens(axis: Axis, s: Side) -> (char, char) {
    match (axis, s) {
        (Axis::Horizontal, Side::First) => ('H', 'L'),
        (Axis::Horizontal, Side::Second) => ('H', 'R'),
        (Axis::Vertical, Side::First) => ('V', 'T'),
        (Axis::Vertical, Side::Second) => ('V', 'B'),
    }
}

pub fn emit_plain(g: &Grammar2D) -> String {
    emit_rules(g, PLAIN_HEADER)
}

pub fn emit_tslp(t: &Tslp2D) -> String {
    emit_rules(t, TSLP_HEADER)
}
