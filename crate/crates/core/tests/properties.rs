mod common;

use gridslp::balance::*;
use gridslp::fast::*;
use gridslp::gadgets::random_grammar;
use gridslp::text::*;
use gridslp::transforms::*;
use gridslp::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn predecessor_matches_scan(mut keys in proptest::collection::vec(0u64..500, 0..40), x in 0u64..600) {
        keys.sort_unstable();
        keys.dedup();
        let want = keys.iter().copied().filter(|&k| k <= x).max();
        prop_assert_eq!(SortedArray::from_sorted(keys).predecessor(x), want);
    }

    #[test]
    fn random_grammars_agree_on_every_path(seed in any::<u64>(), g in 1usize..60) {
        let gr = random_grammar(seed, g, 32);
        prop_assert!(gr.validate().is_ok());
        let m = expand(&gr, gr.start(), DEFAULT_MAX_CELLS).unwrap();
        let (t, st) = balance_plain(&gr).unwrap();
        prop_assert!(t.validate().is_ok());
        prop_assert_eq!(st.input_size, gr.size());
        let idx = build_fast(&t, 2.0).unwrap();
        let bound = idx.depth().div_ceil(idx.params().k) + 1;
        for x in 1..=m.height() as u64 {
            for y in 1..=m.width() as u64 {
                let want = m.get(x as usize, y as usize);
                prop_assert_eq!(access_plain(&gr, x, y).unwrap().ch, want);
                prop_assert_eq!(access_tslp(&t, x, y).unwrap().ch, want);
                let f = access_fast(&idx, x, y).unwrap();
                prop_assert_eq!(f.ch, want);
                prop_assert!(f.visits <= bound);
            }
        }
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), g in 1usize..40) {
        let gr = random_grammar(seed, g, 16);
        prop_assert!(parse_plain(&emit_plain(&gr)).unwrap().same_structure(&gr));
        let (t, _) = balance_plain(&gr).unwrap();
        prop_assert!(parse_tslp(&emit_tslp(&t)).unwrap().same_structure(&t));
    }

    #[test]
    fn four_rotations_are_identity(seed in any::<u64>()) {
        let gr = random_grammar(seed, 30, 16);
        let r = rotate_cw(&rotate_cw(&rotate_cw(&rotate_cw(&gr))));
        let a = expand(&gr, gr.start(), DEFAULT_MAX_CELLS).unwrap();
        prop_assert_eq!(expand(&r, r.start(), DEFAULT_MAX_CELLS).unwrap(), a.clone());
        let once = rotate_cw(&gr);
        prop_assert_eq!(expand(&once, once.start(), DEFAULT_MAX_CELLS).unwrap(), a.rotate_cw());
    }

    #[test]
    fn substring_pieces_concatenate(seed in any::<u64>(), a in 0u64..1000, b in 0u64..1000) {
        let gr = random_grammar(seed, 30, 16);
        let lin = linearize_rows(&gr).unwrap();
        let s: Vec<char> = lin.expand_string(1 << 20).unwrap().chars().collect();
        let n = s.len() as u64;
        let (i, j) = { let (x, y) = (a % n + 1, b % n + 1); (x.min(y), x.max(y)) };
        let d = decompose_substring(&lin, i, j).unwrap();
        prop_assert!(d.symbols.len() as u32 <= 2 * lin.depth() + 2);
        let g2 = lin.as_2d();
        let got: String = d.symbols.iter().map(|&sym| {
            let m = expand(g2, sym, 1 << 20).unwrap();
            m.row_string(1)
        }).collect();
        let want: String = s[(i - 1) as usize..j as usize].iter().collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn rebalance_preserves_expansion(seed in any::<u64>()) {
        let mut gr = random_grammar(seed, 25, 12);
        let d = gr.dims().unwrap();
        if d.height > d.width {
            gr = rotate_cw(&gr);
        }
        let (r, _) = rebalance_plain_2d(&gr).unwrap();
        prop_assert_eq!(
            expand(&r, r.start(), DEFAULT_MAX_CELLS).unwrap(),
            expand(&gr, gr.start(), DEFAULT_MAX_CELLS).unwrap()
        );
    }
}
