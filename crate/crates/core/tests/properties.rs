use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rangecount::emd::{exact_emd, exact_emd_1d, greedy_matching_cost_exact};
use rangecount::gadgets::{gen_cellsampling_lb, gen_emd_lb, Witness};
use rangecount::mst::{exact_mst, prim_mst, spanner_mst_exact, wspd, ExplicitSpanner};
use rangecount::oracle::scan_count;
use rangecount::primitives::{kth_lex, kth_zorder};
use rangecount::{Color, Domain, ExactOracle, Point, QuadCell, QueryLedger, RangeCountOracle, Rect, Shift};

fn points(d: usize, delta: i64, max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(0..delta, d), 1..max)
        .prop_map(|v| v.iter().map(|c| Point::new(c)).collect())
}

fn rect(d: usize, delta: i64) -> impl Strategy<Value = Rect> {
    (prop::collection::vec(-2..delta + 2, d), prop::collection::vec(-2..delta + 2, d)).prop_map(move |(a, b)| {
        let dom = Domain::new(d, delta).unwrap();
        let lo: Vec<i64> = a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect();
        let hi: Vec<i64> = a.iter().zip(&b).map(|(x, y)| *x.max(y)).collect();
        Rect::new(&dom, &lo, &hi)
    })
}

fn instance() -> impl Strategy<Value = (usize, Vec<Point>, Vec<Rect>)> {
    (1usize..=3).prop_flat_map(|d| (Just(d), points(d, 64, 120), prop::collection::vec(rect(d, 64), 1..30)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_counts_match_scan((d, pts, rects) in instance()) {
        let dom = Domain::new(d, 64).unwrap();
        let o = ExactOracle::build(dom, &pts).unwrap();
        for r in &rects {
            prop_assert_eq!(o.count_unmetered(r), scan_count(&pts, r));
        }
    }

    #[test]
    fn selection_is_rank_exact((d, pts, _) in instance()) {
        let dom = Domain::new(d, 64).unwrap();
        let o = ExactOracle::build(dom, &pts).unwrap();
        let mut sorted = pts.clone();
        sorted.sort();
        let root = QuadCell::root(&dom, &Shift::ZERO);
        let mut z = Vec::new();
        for k in 1..=pts.len() as u64 {
            let mut l = QueryLedger::new();
            prop_assert_eq!(kth_lex(&o, &dom.full_rect(), k, &mut l).unwrap(), sorted[k as usize - 1]);
            prop_assert!(l.total() <= 2 * d as u64 * 6 + 4);
            let mut l = QueryLedger::new();
            z.push(kth_zorder(&o, &root, k, &mut l).unwrap());
            prop_assert!(l.total() <= (1u64 << d) * 7);
        }
        // z-order selection is a permutation of the multiset
        z.sort();
        prop_assert_eq!(z, sorted);
    }

    #[test]
    fn one_dimensional_emd_agrees_with_assignment(
        red in prop::collection::vec(0i64..1000, 1..40),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blue: Vec<i64> = red.iter().map(|_| rand::Rng::gen_range(&mut rng, 0..1000)).collect();
        let r: Vec<Point> = red.iter().map(|&x| Point::new(&[x])).collect();
        let b: Vec<Point> = blue.iter().map(|&x| Point::new(&[x])).collect();
        prop_assert!((exact_emd_1d(&r, &b).unwrap() as f64 - exact_emd(&r, &b).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn greedy_cost_dominates_emd(red in points(2, 128, 40), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dom = Domain::new(2, 128).unwrap();
        let blue: Vec<Point> = red.iter().map(|_| {
            Point::new(&[rand::Rng::gen_range(&mut rng, 0..128), rand::Rng::gen_range(&mut rng, 0..128)])
        }).collect();
        let shift = Shift::random(&dom, &mut rng);
        let greedy = greedy_matching_cost_exact(&dom, &red, &blue, &shift).unwrap() as f64;
        prop_assert!(greedy + 1e-6 >= exact_emd(&red, &blue).unwrap());
    }

    #[test]
    fn kruskal_equals_prim(pts in points(2, 256, 80)) {
        prop_assert!((exact_mst(&pts).unwrap() - prim_mst(&pts)).abs() < 1e-6);
    }

    #[test]
    fn spanner_sandwich(pts in points(2, 128, 60), half in any::<bool>()) {
        let eps = if half { 0.5 } else { 0.25 };
        let dom = Domain::new(2, 128).unwrap();
        let exact = exact_mst(&pts).unwrap();
        let sp = spanner_mst_exact(dom, &pts, eps).unwrap();
        prop_assert!(exact <= sp + 1e-9);
        prop_assert!(sp <= (1.0 + eps) * exact + 1e-9);
    }

    #[test]
    fn wspd_covers_each_ordered_pair_once(pts in points(2, 32, 25)) {
        let dom = Domain::new(2, 32).unwrap();
        let o = ExactOracle::build(dom, &pts).unwrap();
        let root = QuadCell::root(&dom, &Shift::ZERO);
        let pairs = wspd(&root, &root, 0.5, &o, &mut QueryLedger::new());
        let sp = ExplicitSpanner::build(dom, &pts, 0.5).unwrap();
        let v = &sp.vertices;
        for p in v {
            for q in v {
                if p != q {
                    let hits = pairs.iter().filter(|w| w.a.contains_point(p) && w.b.contains_point(q)).count();
                    prop_assert_eq!(hits, 1);
                }
            }
        }
    }

    #[test]
    fn gadget_populations(d in 1usize..=2, n in 1u64..600, pick in 0usize..3) {
        let s = [1u64, 4, 16][pick];
        prop_assume!(s <= n);
        let inst = gen_emd_lb(d, n, s, None, Witness::Random, &mut ChaCha8Rng::seed_from_u64(n)).unwrap();
        prop_assert!(inst.params.n >= n);
        prop_assert_eq!(inst.points.count(Color::Red) as u64, inst.params.n);
        prop_assert_eq!(inst.points.count(Color::Blue) as u64, inst.params.n);
        let cs = gen_cellsampling_lb(n, 1 + pick as u64, Witness::Random, &mut ChaCha8Rng::seed_from_u64(n)).unwrap();
        prop_assert_eq!(cs.points.len() as u64, cs.params.n);
    }
}
