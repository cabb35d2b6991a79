//! Gadget grammars over `{0, 1, $}`: binary counters, shifted counter
//! tilings, the padded two-block gadget `C(N, M)`, sequences of such gadgets
//! and the nested spiral. Each builder has a cell-by-cell reference matrix.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::builder::PlainBuilder;
use crate::error::{Error, Result};
use crate::grammar::{Axis, Grammar2D, Production2D, SymbolId};
use crate::matrix::Matrix;
use crate::transforms::prune_plain;

const MAX_BITS: u32 = 20;

fn bits_ok(n: u32) -> Result<()> {
    if n > MAX_BITS {
        return Err(Error::Parameter(format!("bit width {n} exceeds {MAX_BITS}")));
    }
    Ok(())
}

/// Plain builder with memoized all-zero rectangles, repetitions and
/// rotations.
pub struct GadgetBuilder {
    pub b: PlainBuilder,
    zero_memo: HashMap<(u64, u64), SymbolId>,
    zeros: HashSet<SymbolId>,
    rep_memo: HashMap<(SymbolId, u64, bool), SymbolId>,
    rot_memo: HashMap<SymbolId, SymbolId>,
}

impl Default for GadgetBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl GadgetBuilder {
    pub fn new() -> Self {
        GadgetBuilder {
            b: PlainBuilder::new(),
            zero_memo: HashMap::new(),
            zeros: HashSet::new(),
            rep_memo: HashMap::new(),
            rot_memo: HashMap::new(),
        }
    }

    /// All-zero `h`×`w` block in `O(log h + log w)` symbols.
    pub fn zero(&mut self, h: u64, w: u64) -> Result<SymbolId> {
        assert!(h >= 1 && w >= 1, "empty zero block");
        if let Some(&s) = self.zero_memo.get(&(h, w)) {
            return Ok(s);
        }
        let s = if h == 1 && w == 1 {
            self.b.terminal('0')
        } else if h == 1 {
            if w.is_multiple_of(2) {
                let half = self.zero(1, w / 2)?;
                self.b.h(half, half)?
            } else {
                let rest = self.zero(1, w - 1)?;
                let one = self.zero(1, 1)?;
                self.b.h(rest, one)?
            }
        } else if h.is_multiple_of(2) {
            let half = self.zero(h / 2, w)?;
            self.b.v(half, half)?
        } else {
            let rest = self.zero(h - 1, w)?;
            let row = self.zero(1, w)?;
            self.b.v(rest, row)?
        };
        self.zero_memo.insert((h, w), s);
        self.zeros.insert(s);
        Ok(s)
    }

    /// `k ≥ 1` copies of `s` along `axis`.
    pub fn repeat(&mut self, s: SymbolId, k: u64, axis: Axis) -> Result<SymbolId> {
        assert!(k >= 1);
        if k == 1 {
            return Ok(s);
        }
        let key = (s, k, axis == Axis::Vertical);
        if let Some(&r) = self.rep_memo.get(&key) {
            return Ok(r);
        }
        let r = if k.is_multiple_of(2) {
            let half = self.repeat(s, k / 2, axis)?;
            self.b.concat(axis, half, half)?
        } else {
            let rest = self.repeat(s, k - 1, axis)?;
            self.b.concat(axis, rest, s)?
        };
        self.rep_memo.insert(key, r);
        Ok(r)
    }

    /// Vertical concatenation of the present parts, top to bottom.
    pub fn vstack(&mut self, parts: &[Option<SymbolId>]) -> Result<Option<SymbolId>> {
        let mut acc: Option<SymbolId> = None;
        for &p in parts.iter().flatten() {
            acc = Some(match acc {
                Some(a) => self.b.v(a, p)?,
                None => p,
            });
        }
        Ok(acc)
    }

    /// Symbol deriving the clockwise rotation of `s`.
    pub fn rotate(&mut self, s: SymbolId) -> Result<SymbolId> {
        if let Some(&r) = self.rot_memo.get(&s) {
            return Ok(r);
        }
        let r = if self.zeros.contains(&s) {
            let d = self.b.dims(s);
            self.zero(d.width, d.height)?
        } else {
            match self.b.rule(s) {
                Production2D::Terminal(_) => s,
                Production2D::HConcat(l, r) => {
                    let (l, r) = (self.rotate(l)?, self.rotate(r)?);
                    self.b.v(l, r)?
                }
                Production2D::VConcat(t, bt) => {
                    let (t, bt) = (self.rotate(t)?, self.rotate(bt)?);
                    self.b.h(bt, t)?
                }
            }
        };
        self.rot_memo.insert(s, r);
        Ok(r)
    }

    /// Counter column `Bin_{2^n}` of size `2^n × (n+2)`.
    pub fn bin(&mut self, n: u32) -> Result<SymbolId> {
        bits_ok(n)?;
        let dollar = self.b.terminal('$');
        if n == 0 {
            return self.b.h(dollar, dollar);
        }
        let (mut zcol, mut ocol) = (self.b.terminal('0'), self.b.terminal('1'));
        // s derives the bare counter of height 2^i
        let mut s = self.b.v(zcol, ocol)?;
        for _ in 1..n {
            zcol = self.b.v(zcol, zcol)?;
            ocol = self.b.v(ocol, ocol)?;
            let top = self.b.h(zcol, s)?;
            let bottom = self.b.h(ocol, s)?;
            s = self.b.v(top, bottom)?;
        }
        let mut dcol = dollar;
        for _ in 0..n {
            dcol = self.b.v(dcol, dcol)?;
        }
        let left = self.b.h(dcol, s)?;
        self.b.h(left, dcol)
    }

    /// `ShiftBin_{2^n}` of size `2^{n+1} × 2^n(n+2)`.
    pub fn shiftbin(&mut self, n: u32) -> Result<SymbolId> {
        let mut a = self.bin(n)?;
        let w = n as u64 + 2;
        let zero = self.b.terminal('0');
        // zero row of width n+2 as a chain
        let mut z = zero;
        for _ in 1..w {
            z = self.b.h(z, zero)?;
        }
        for i in 1..=n {
            if i > 1 {
                let col = self.b.v(z, z)?;
                z = self.b.h(col, col)?;
            }
            let lower = self.b.v(a, z)?;
            let upper = self.b.v(z, a)?;
            a = self.b.h(lower, upper)?;
        }
        let mut row = self.zero_row_chain(n)?;
        for _ in 0..n {
            row = self.b.h(row, row)?;
        }
        self.b.v(a, row)
    }

    fn zero_row_chain(&mut self, n: u32) -> Result<SymbolId> {
        let zero = self.b.terminal('0');
        let mut z = zero;
        for _ in 1..n as u64 + 2 {
            z = self.b.h(z, zero)?;
        }
        Ok(z)
    }
}

/// `M' = 2^n`, the largest power of two with `M'(n+2) ≤ M/2`.
pub fn shiftbin_order(m: u64) -> Option<u32> {
    let mut best = None;
    for n in 0..40u32 {
        if (1u64 << n) * (n as u64 + 2) * 2 <= m {
            best = Some(n);
        } else {
            break;
        }
    }
    best
}

/// Derived parameters of `C(N, M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CnmParams {
    pub n: u64,
    pub m: u64,
    /// `log2 M'`.
    pub bits: u32,
    pub m_prime: u64,
    pub block_width: u64,
    pub left_copies: u64,
    pub right_copies: u64,
    pub left_pad: u64,
    pub right_pad: u64,
    pub zero_width: u64,
}

impl CnmParams {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        let bits = shiftbin_order(m).ok_or_else(|| Error::Parameter(format!("M = {m} is below 4")))?;
        bits_ok(bits)?;
        let mp = 1u64 << bits;
        if n == 0 {
            return Err(Error::Parameter("N must be positive".into()));
        }
        let bw = mp * (bits as u64 + 2);
        // below 2M' rows no copy fits and the gadget is all zero
        let left = n / (2 * mp);
        let right = n.saturating_sub(mp) / (2 * mp);
        Ok(CnmParams {
            n,
            m,
            bits,
            m_prime: mp,
            block_width: bw,
            left_copies: left,
            right_copies: right,
            left_pad: n - left * 2 * mp,
            right_pad: n.saturating_sub(mp) - right * 2 * mp,
            zero_width: m - 2 * bw,
        })
    }
}

/// `C(N, M)` as a left block next to the right part; the right part is a
/// constant zero strip of height `M'` over a body holding the shifted copies,
/// their padding and the zero columns. Both the left block and the body grow
/// by prepending a strip of `2b` rows, which keeps every bottom padding.
#[derive(Clone, Copy, Debug)]
struct CnmParts {
    left: SymbolId,
    top: SymbolId,
    body: SymbolId,
}

impl GadgetBuilder {
    fn cnm_parts(&mut self, p: &CnmParams, block: SymbolId) -> Result<CnmParts> {
        let bw = p.block_width;
        let copies = if p.left_copies > 0 { Some(self.repeat(block, p.left_copies, Axis::Vertical)?) } else { None };
        let pad = if p.left_pad > 0 { Some(self.zero(p.left_pad, bw)?) } else { None };
        let left = self.vstack(&[copies, pad])?.expect("N is positive");
        let top = self.zero(p.m_prime, p.m - bw)?;
        let body = if p.right_copies == 0 {
            self.zero(p.n - p.m_prime, p.m - bw)?
        } else {
            let copies = self.repeat(block, p.right_copies, Axis::Vertical)?;
            let pad = if p.right_pad > 0 { Some(self.zero(p.right_pad, bw)?) } else { None };
            let shifted = self.vstack(&[Some(copies), pad])?.unwrap();
            if p.zero_width > 0 {
                let z = self.zero(p.n - p.m_prime, p.zero_width)?;
                self.b.h(shifted, z)?
            } else {
                shifted
            }
        };
        Ok(CnmParts { left, top, body })
    }

    fn cnm_assemble(&mut self, parts: &CnmParts) -> Result<SymbolId> {
        let right = self.b.v(parts.top, parts.body)?;
        self.b.h(parts.left, right)
    }

    /// `C(N, M)`.
    pub fn cnm(&mut self, n: u64, m: u64) -> Result<SymbolId> {
        Ok(self.cnm_sequence(n, m, 1, 0)?[0])
    }

    /// Roots deriving `C(N + i·b, M)` for `i = 0..=k`.
    pub fn cnm_sequence(&mut self, n: u64, m: u64, b: u64, k: u64) -> Result<Vec<SymbolId>> {
        let p = CnmParams::new(n, m)?;
        if k > 0 && (b == 0 || !b.is_multiple_of(p.m_prime) || b > n) {
            return Err(Error::Parameter(format!(
                "step {b} must be a positive multiple of M' = {} and at most N = {n}",
                p.m_prime
            )));
        }
        if n <= p.m_prime {
            if k > 0 {
                return Err(Error::Parameter(format!("sequences need N = {n} above M' = {}", p.m_prime)));
            }
            return Ok(vec![self.zero(n, m)?]);
        }
        let block = self.shiftbin(p.bits)?;
        let mut roots = vec![SymbolId(0); k as usize + 1];
        for parity in 0..2u64.min(k + 1) {
            let start = CnmParams::new(n + parity * b, m)?;
            let mut parts = self.cnm_parts(&start, block)?;
            roots[parity as usize] = self.cnm_assemble(&parts)?;
            if k < 2 {
                continue;
            }
            // V1': b/M' copies; V2': the 2b-row zero block right of them
            let v1 = self.repeat(block, b / p.m_prime, Axis::Vertical)?;
            let strip = if p.zero_width > 0 {
                let v2 = self.zero(2 * b, p.zero_width)?;
                self.b.h(v1, v2)?
            } else {
                v1
            };
            let mut i = parity + 2;
            while i <= k {
                parts.left = self.b.v(v1, parts.left)?;
                parts.body = self.b.v(strip, parts.body)?;
                roots[i as usize] = self.cnm_assemble(&parts)?;
                i += 2;
            }
        }
        Ok(roots)
    }
}

pub fn build_bin(n: u32) -> Result<Grammar2D> {
    let mut g = GadgetBuilder::new();
    let s = g.bin(n)?;
    Ok(g.b.finish(s))
}

pub fn build_shiftbin(n: u32) -> Result<Grammar2D> {
    let mut g = GadgetBuilder::new();
    let s = g.shiftbin(n)?;
    Ok(g.b.finish(s))
}

pub fn build_cnm(n: u64, m: u64) -> Result<Grammar2D> {
    let mut g = GadgetBuilder::new();
    let s = g.cnm(n, m)?;
    Ok(prune_plain(&g.b.finish(s)))
}

/// One grammar holding `C(N + i·b, M)` for `i = 0..=k`; the start is `C_k`.
pub fn build_cnm_sequence(n: u64, m: u64, b: u64, k: u64) -> Result<(Grammar2D, Vec<SymbolId>)> {
    let mut g = GadgetBuilder::new();
    let roots = g.cnm_sequence(n, m, b, k)?;
    Ok((g.b.finish(*roots.last().unwrap()), roots))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpiralParams {
    pub n: u64,
    pub c: u64,
    pub delta_prime: f64,
    pub lambda: u64,
    pub m_prime: u64,
    pub delta: u64,
}

impl SpiralParams {
    pub fn new(n: u64, c: u64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() || c == 0 {
            return Err(Error::Parameter(format!("spiral needs N a power of two ≥ 4 and c ≥ 1, got N = {n}, c = {c}")));
        }
        let log_n = n.trailing_zeros() as u64;
        let delta_prime = n as f64 / (8 * c * log_n) as f64;
        let lambda = 2 * c * log_n;
        let bits = (0..40u32)
            .take_while(|&b| ((1u64 << b) * (b as u64 + 2)) as f64 <= delta_prime / 2.0)
            .last()
            .ok_or_else(|| Error::Parameter(format!("N = {n} too small: Δ' = {delta_prime:.3}")))?;
        let m_prime = 1u64 << bits;
        let delta = (delta_prime.floor() as u64) / m_prime * m_prime;
        if delta == 0 || shiftbin_order(delta) != Some(bits) {
            return Err(Error::Parameter(format!("Δ = {delta} does not re-derive M' = {m_prime}")));
        }
        if n <= 2 * lambda * delta {
            return Err(Error::Parameter(format!("center side N - 2λΔ = {n} - {} is not positive", 2 * lambda * delta)));
        }
        Ok(SpiralParams { n, c, delta_prime, lambda, m_prime, delta })
    }
}

/// The `N × N` spiral of rotated and unrotated `C(·, Δ)` gadgets around an
/// all-zero center.
pub fn build_spiral(n: u64, c: u64) -> Result<Grammar2D> {
    let p = SpiralParams::new(n, c)?;
    let (lam, d) = (p.lambda, p.delta);
    let mut g = GadgetBuilder::new();
    let base = n - (2 * lam - 1) * d;
    let seq = g.cnm_sequence(base, d, d, 2 * lam - 1)?;
    // gadget(j) derives C(N - jΔ, Δ)
    let gadget = |j: u64| seq[(2 * lam - 1 - j) as usize];
    let mut rotated = HashMap::new();
    let mut rot = |g: &mut GadgetBuilder, j: u64| -> Result<SymbolId> {
        if let Some(&r) = rotated.get(&j) {
            return Ok(r);
        }
        let r = g.rotate(gadget(j))?;
        rotated.insert(j, r);
        Ok(r)
    };
    let mut f3 = g.zero(n - (2 * lam - 1) * d, n - 2 * lam * d)?;
    let mut f0 = f3;
    for i in (0..lam).rev() {
        if i + 1 < lam {
            let gt = rot(&mut g, 2 * i + 2)?;
            f3 = g.b.v(gt, f0)?;
        }
        let f2 = g.b.h(gadget(2 * i + 1), f3)?;
        let gt = rot(&mut g, 2 * i + 1)?;
        let f1 = g.b.v(f2, gt)?;
        f0 = g.b.h(f1, gadget(2 * i))?;
    }
    Ok(prune_plain(&g.b.finish(f0)))
}

fn bin_row(n: u32, k: u64) -> String {
    let mut s = String::with_capacity(n as usize + 2);
    s.push('$');
    for bit in (0..n).rev() {
        s.push(if (k >> bit) & 1 == 1 { '1' } else { '0' });
    }
    s.push('$');
    s
}

fn check_cells(h: u64, w: u64, max_cells: u64) -> Result<()> {
    let cells = h as u128 * w as u128;
    if cells > max_cells as u128 {
        return Err(Error::AreaLimitExceeded { symbol: SymbolId(0), cells, limit: max_cells });
    }
    Ok(())
}

pub fn reference_bin(n: u32, max_cells: u64) -> Result<Matrix> {
    bits_ok(n)?;
    let rows = 1u64 << n;
    check_cells(rows, n as u64 + 2, max_cells)?;
    let rows: Vec<String> = (0..rows).map(|k| bin_row(n, k)).collect();
    Matrix::from_rows(&rows)
}

/// Block `j` of the tiling holds `Bin` in rows `j+1..=j+N`.
pub fn reference_shiftbin(n: u32, max_cells: u64) -> Result<Matrix> {
    bits_ok(n)?;
    let big = 1u64 << n;
    let w = n as u64 + 2;
    check_cells(2 * big, big * w, max_cells)?;
    let mut m = Matrix::filled(2 * big as usize, (big * w) as usize, '0');
    for j in 0..big {
        for k in 0..big {
            let row = bin_row(n, k);
            for (c, ch) in row.chars().enumerate() {
                m.set((j + k + 1) as usize, (j * w) as usize + c + 1, ch);
            }
        }
    }
    Ok(m)
}

pub fn reference_cnm(n: u64, m: u64, max_cells: u64) -> Result<Matrix> {
    let p = CnmParams::new(n, m)?;
    check_cells(n, m, max_cells)?;
    let sb = reference_shiftbin(p.bits, max_cells)?;
    let hb = 2 * p.m_prime;
    let mut out = Matrix::filled(n as usize, m as usize, '0');
    for r in 1..=n {
        for c in 1..=2 * p.block_width {
            let (rr, cc, copies) = if c <= p.block_width {
                (r as i64, c, p.left_copies)
            } else {
                (r as i64 - p.m_prime as i64, c - p.block_width, p.right_copies)
            };
            if rr >= 1 && (rr as u64) <= copies * hb {
                let local = (rr as u64 - 1) % hb + 1;
                out.set(r as usize, c as usize, sb.get(local as usize, cc as usize));
            }
        }
    }
    Ok(out)
}

/// Number of distinct `n`-bit words `b` occurring as `$b$` in `row`.
pub fn distinct_blocks(row: &str, n: usize) -> usize {
    let chars: Vec<char> = row.chars().collect();
    let mut seen = HashSet::new();
    for i in 0..chars.len() {
        if chars[i] != '$' || i + n + 1 >= chars.len() || chars[i + n + 1] != '$' {
            continue;
        }
        let word = &chars[i + 1..i + n + 1];
        if word.iter().all(|&c| c == '0' || c == '1') {
            seen.insert(word.iter().collect::<String>());
        }
    }
    seen.len()
}

/// Deterministic valid grammar with `g` symbols and dims at most `max_dim`;
/// the start is the last symbol.
pub fn random_grammar(seed: u64, g: usize, max_dim: u64) -> Grammar2D {
    assert!(g >= 1 && max_dim >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = ['a', 'b', 'c', 'd'];
    let mut rules: Vec<Production2D> = Vec::with_capacity(g);
    let mut dims: Vec<(u64, u64)> = Vec::with_capacity(g);
    let terminal = |rng: &mut ChaCha8Rng| Production2D::Terminal(alphabet[rng.gen_range(0..alphabet.len())]);
    while rules.len() < g {
        let mut made = None;
        if !rules.is_empty() && rng.gen_bool(0.85) {
            for _ in 0..8 {
                let a = rng.gen_range(0..rules.len());
                let (ha, wa) = dims[a];
                let horizontal = rng.gen_bool(0.5);
                let fits: Vec<usize> = (0..rules.len())
                    .filter(|&b| {
                        let (hb, wb) = dims[b];
                        if horizontal {
                            hb == ha && wa + wb <= max_dim
                        } else {
                            wb == wa && ha + hb <= max_dim
                        }
                    })
                    .collect();
                if fits.is_empty() {
                    continue;
                }
                let b = fits[rng.gen_range(0..fits.len())];
                let (a, b) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
                let (sa, sb) = (SymbolId(a as u32), SymbolId(b as u32));
                made = Some(if horizontal {
                    (Production2D::HConcat(sa, sb), (ha, dims[a].1 + dims[b].1))
                } else {
                    (Production2D::VConcat(sa, sb), (dims[a].0 + dims[b].0, wa))
                });
                break;
            }
        }
        let (p, d) = made.unwrap_or_else(|| (terminal(&mut rng), (1, 1)));
        rules.push(p);
        dims.push(d);
    }
    Grammar2D::from_rules(rules, SymbolId(g as u32 - 1))
}
