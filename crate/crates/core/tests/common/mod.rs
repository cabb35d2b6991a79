#![allow(dead_code)]

use gridslp::fast::sample_positions;
use gridslp::gadgets::*;
use gridslp::*;

pub struct Named {
    pub name: String,
    pub grammar: Grammar2D,
}

/// Spiral 2^12, ShiftBin_8, a few C gadgets and 100 random grammars.
pub fn corpus() -> Vec<Named> {
    let mut out = vec![
        Named { name: "spiral-4096".into(), grammar: build_spiral(1 << 12, 1).unwrap() },
        Named { name: "shiftbin-8".into(), grammar: build_shiftbin(8).unwrap() },
    ];
    for (n, m) in [(64, 64), (256, 128), (200, 96), (1000, 40)] {
        out.push(Named { name: format!("cnm-{n}x{m}"), grammar: build_cnm(n, m).unwrap() });
    }
    for seed in 0..100 {
        out.push(Named { name: format!("random-{seed}"), grammar: random_grammar(seed, 40, 64) });
    }
    out
}

/// Cells where a holed grammar disagrees with a plain one, over `samples`
/// seeded positions.
pub fn sampled_mismatches(g: &Grammar2D, t: &Tslp2D, samples: usize, seed: u64) -> usize {
    let d = g.dims().unwrap();
    assert_eq!(t.dims().unwrap(), d);
    sample_positions(d, samples, seed)
        .into_iter()
        .filter(|&(x, y)| access_plain(g, x, y).unwrap().ch != access_tslp(t, x, y).unwrap().ch)
        .count()
}

pub fn log2(x: f64) -> f64 {
    x.log2()
}
