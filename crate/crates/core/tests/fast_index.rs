mod common;

use common::corpus;
use gridslp::balance::balance_plain;
use gridslp::fast::*;
use gridslp::gadgets::*;
use gridslp::text::parse_tslp;
use gridslp::*;

fn balanced_shiftbin() -> Tslp2D {
    balance_plain(&build_shiftbin(8).unwrap()).unwrap().0
}

#[test]
fn example_grammar_cell() {
    let t = parse_tslp(
        "TSLP2D v1\nstart S\nA T 0\nB T 1\nX H A B\nY HV T X 1 2\nS A Y X\n",
    )
    .unwrap();
    let (b, _) = gridslp::balance::balance_to_tslp(&t).unwrap();
    let idx = build_fast(&b, 3.0).unwrap();
    assert_eq!(access_fast(&idx, 2, 2).unwrap().ch, '1');
    assert_eq!(access_fast(&idx, 2, 1).unwrap().ch, '0');
}

#[test]
fn regions_tile_every_rule() {
    let t = balanced_shiftbin();
    let geo = t.geometry().unwrap();
    let params = FastParams::new(3.0, geo.dims(t.start()).area()).unwrap();
    for s in 0..t.len() as u32 {
        let s = SymbolId(s);
        let rule = unwind(&t, geo, s, params.k);
        assert!(rule.frontier.len() as u64 <= params.b_bound);
        let d = geo.dims(s);
        let hole: u128 = rule.hole_region.map_or(0, |h| h.area());
        let sum: u128 = rule.frontier.iter().map(|(_, r)| r.area()).sum();
        assert_eq!(sum + hole, d.area(), "symbol {s}");
        if d.area() <= 4096 {
            for x in 1..=d.height {
                for y in 1..=d.width {
                    let hits = rule.frontier.iter().filter(|(_, r)| r.contains(x, y)).count()
                        + rule.hole_region.is_some_and(|h| h.contains(x, y)) as usize;
                    assert_eq!(hits, 1, "symbol {s} cell ({x},{y})");
                }
            }
        }
    }
}

#[test]
fn shiftbin_queries_match_holed_access() {
    let t = balanced_shiftbin();
    let idx = build_fast(&t, 3.0).unwrap();
    for (x, y) in sample_positions(idx.dims(), 1000, 11) {
        assert_eq!(access_fast(&idx, x, y).unwrap().ch, access_tslp(&t, x, y).unwrap().ch);
    }
    assert!(matches!(access_fast(&idx, 0, 1), Err(Error::OutOfBounds { .. })));
    assert!(matches!(access_fast(&idx, 1, idx.dims().width + 1), Err(Error::OutOfBounds { .. })));
}

#[test]
fn index_size_within_budget() {
    for item in corpus().iter().take(6) {
        let (t, _) = balance_plain(&item.grammar).unwrap();
        let idx = build_fast(&t, 3.0).unwrap();
        let st = idx.stats();
        let b = idx.params().b_bound as usize;
        assert!(st.max_frontier <= b, "{}", item.name);
        assert!(st.cells <= st.rules * (b + 2) * (b + 2), "{}: {st:?}", item.name);
    }
}

#[test]
fn grid_coordinates_start_at_one() {
    let idx = build_fast(&balanced_shiftbin(), 2.0).unwrap();
    let g = idx.grid(idx.tslp().start()).unwrap();
    assert_eq!(g.x_coords()[0], 1);
    assert_eq!(g.y_coords()[0], 1);
    assert_eq!(g.cell_count(), g.x_coords().len() * g.y_coords().len());
}

#[test]
fn bench_reports() {
    let g = build_shiftbin(6).unwrap();
    let (t, _) = balance_plain(&g).unwrap();
    let idx = build_fast(&t, 3.0).unwrap();
    let empty = bench_access(Some(&g), &idx, 0, 1, 1).unwrap();
    assert!(empty.paths.iter().all(|p| p.mean_visits == 0.0 && p.max_visits == 0));
    let a = bench_access(Some(&g), &idx, 500, 4, 1).unwrap();
    let b = bench_access(Some(&g), &idx, 500, 4, 3).unwrap();
    let visits = |r: &BenchReport| r.paths.iter().map(|p| (p.path.clone(), p.mean_visits, p.max_visits)).collect::<Vec<_>>();
    assert_eq!(visits(&a), visits(&b));
    assert_eq!(a.paths.iter().map(|p| p.path.as_str()).collect::<Vec<_>>(), ["plain", "tslp", "fast"]);
    let json = serde_json::to_value(&a).unwrap();
    for key in ["path", "meanVisits", "maxVisits", "nanosPerQuery"] {
        assert!(json["paths"][0].get(key).is_some(), "{key}");
    }
}
