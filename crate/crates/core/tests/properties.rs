use std::sync::Arc;

use proptest::prelude::*;
use scws_core::estimator::cumulative_matches;
use scws_core::pool::build_pool;
use scws_core::sketch::icws_feature_draw;
use scws_core::*;

fn weighted_set() -> impl Strategy<Value = WeightedSet> {
    prop::collection::btree_map(0u64..500, 1e-3f64..1e3, 1..40)
        .prop_map(|m| WeightedSet::from_pairs(m).unwrap())
}

fn pair() -> impl Strategy<Value = (WeightedSet, WeightedSet)> {
    (weighted_set(), weighted_set())
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop::sample::select(Scheme::ALL.to_vec())
}

fn config(scheme: Scheme, k: usize) -> SketchConfig {
    let pool = Arc::new(build_pool(997, 42).unwrap());
    SketchConfig::for_scheme(scheme, k, 42, pool).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prefix_of_longer_sketch(s in weighted_set(), scheme in scheme(), short in 1usize..100) {
        let long = build_sketch(&s, &config(scheme, 300)).unwrap();
        let direct = build_sketch(&s, &config(scheme, short)).unwrap();
        prop_assert_eq!(long.prefix(short).unwrap(), direct);
    }

    #[test]
    fn entry_order_does_not_matter(s in weighted_set(), scheme in scheme(), seed in any::<u64>()) {
        let mut pairs: Vec<(FeatureId, f64)> = s.iter().collect();
        // deterministic shuffle driven by the seed
        let n = pairs.len();
        let mut x = seed;
        for i in (1..n).rev() {
            x = scws_core::rng::mix64(x);
            pairs.swap(i, (x % (i as u64 + 1)) as usize);
        }
        let permuted = WeightedSet::from_pairs(pairs).unwrap();
        let cfg = config(scheme, 64);
        prop_assert_eq!(build_sketch(&s, &cfg).unwrap(), build_sketch(&permuted, &cfg).unwrap());
    }

    #[test]
    fn sketching_is_deterministic(s in weighted_set(), scheme in scheme()) {
        let a = build_sketch(&s, &config(scheme, 64)).unwrap();
        let b = build_sketch(&s, &config(scheme, 64)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn scws_max_set_picks_from_an_operand((s, o) in pair()) {
        let pool = build_pool(4000, 9).unwrap();
        let m = s.elementwise_max(&o);
        for k in 0..64 {
            let zm = scws_minhash(&m, k, &pool).unwrap();
            let zs = scws_minhash(&s, k, &pool).unwrap();
            let zo = scws_minhash(&o, k, &pool).unwrap();
            prop_assert!(zm == zs || zm == zo, "k={} max={} s={} o={}", k, zm, zs, zo);
        }
    }

    #[test]
    fn scws_scale_invariance(s in weighted_set(), alpha in prop::sample::select(vec![1e-3, 0.5, 1.0, 7.3, 1e3])) {
        let cfg = config(Scheme::Scws, 128);
        let scaled = s.scaled(alpha).unwrap();
        prop_assert_eq!(build_sketch(&s, &cfg).unwrap(), build_sketch(&scaled, &cfg).unwrap());
    }

    #[test]
    fn icws_t_within_floor_bounds(w in 1e-12f64..1e12, z in any::<u64>(), k in any::<u64>(), seed in any::<u64>()) {
        let rand = SeededDraws { base_seed: seed }.draw(z, k);
        let d = icws_feature_draw(w.ln(), rand);
        prop_assert!(d.satisfies_floor_bound(w.ln()));
        prop_assert!(d.r > 0.0 && d.c > 0.0 && (0.0..1.0).contains(&d.beta));
        prop_assert!(d.y > 0.0 && d.a > 0.0);
        prop_assert!((d.y - (d.r * (d.t as f64 - d.beta)).exp()).abs() <= 1e-12 * d.y);
    }

    #[test]
    fn estimator_symmetric_and_bounded((s, o) in pair(), scheme in scheme()) {
        let e1 = wjs_exact(&s, &o).unwrap().value();
        let e2 = wjs_exact(&o, &s).unwrap().value();
        prop_assert_eq!(e1, e2);
        prop_assert!((0.0..=1.0).contains(&e1));

        let cfg = config(scheme, 128);
        let a = build_sketch(&s, &cfg).unwrap();
        let b = build_sketch(&o, &cfg).unwrap();
        let ab = estimate(&a, &b).unwrap().value();
        prop_assert_eq!(ab, estimate(&b, &a).unwrap().value());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(estimate(&a, &a).unwrap().value(), 1.0);

        let cum = cumulative_matches(&a, &b).unwrap();
        for len in [1usize, 17, 128] {
            let pa = a.prefix(len).unwrap();
            let pb = b.prefix(len).unwrap();
            prop_assert_eq!(estimate(&pa, &pb).unwrap().value(), cum[len - 1] as f64 / len as f64);
        }
    }

    #[test]
    fn bbit_vector_shape(s in weighted_set(), bits in 1u32..=16, k in 1usize..300) {
        let sk = build_sketch(&s, &config(Scheme::Scws, k)).unwrap();
        let v = vectorize(&sk, bits).unwrap();
        prop_assert_eq!(v.indices().len(), k);
        prop_assert_eq!(v.dimension(), (k as u64) << bits);
        for (slot, idx) in v.indices().iter().enumerate() {
            prop_assert!(*idx >> bits == slot as u64);
        }
    }

    #[test]
    fn bbit_slot_locality(s in weighted_set(), bits in 1u32..=16, slot in 0usize..32, new_id in any::<u64>()) {
        let sk = build_sketch(&s, &config(Scheme::Icws0, 32)).unwrap();
        let mut ids = sk.ids().to_vec();
        ids[slot] = FeatureId(new_id);
        let changed = Sketch::zero_bit(Scheme::Icws0, sk.origin(), ids).unwrap();
        let a = vectorize(&sk, bits).unwrap();
        let b = vectorize(&changed, bits).unwrap();
        for k in 0..32 {
            if k != slot {
                prop_assert_eq!(a.indices()[k], b.indices()[k]);
            }
        }
    }

    #[test]
    fn libsvm_round_trip(label in -5i64..5, m in prop::collection::btree_map(1u64..100_000, 1e-9f64..1e9, 0..30)) {
        let s = WeightedSet::from_pairs(m).unwrap();
        let line = format_libsvm_line(label, &s);
        let (l2, s2) = parse_libsvm_line(&line).unwrap();
        prop_assert_eq!(label, l2);
        prop_assert_eq!(s, s2);
    }

    #[test]
    fn rescale_properties(rows in prop::collection::vec(weighted_set(), 1..12)) {
        let once = rescale_unit(Dataset::new(rows.clone())).unwrap();
        let twice = rescale_unit(once.clone()).unwrap();
        prop_assert_eq!(&once.rows, &twice.rows);
        for (orig, scaled) in rows.iter().zip(&once.rows) {
            prop_assert!(scaled.weights().iter().all(|w| *w > 0.0 && *w <= 1.0));
            prop_assert_eq!(orig.ids(), scaled.ids());
        }
        // within-column ratios survive, and the row holding a column's max maps to 1
        let col = rows[0].ids()[0];
        let col_rows: Vec<(f64, f64)> = rows
            .iter()
            .zip(&once.rows)
            .filter(|(r, _)| r.weight(col) > 0.0)
            .map(|(r, s)| (r.weight(col), s.weight(col)))
            .collect();
        for w in col_rows.windows(2) {
            let before = w[0].0 / w[1].0;
            let after = w[0].1 / w[1].1;
            prop_assert!((before - after).abs() <= 1e-12 * before.abs().max(1.0));
        }
        let max_orig = col_rows.iter().map(|c| c.0).fold(0.0, f64::max);
        for (o, sc) in &col_rows {
            prop_assert_eq!(*o == max_orig, *sc == 1.0);
        }
    }
}

#[test]
fn rescale_can_move_row_argmax() {
    // per-column scaling preserves column argmax rows, not row argmax features
    let rows = vec![
        WeightedSet::from_pairs([(1u64, 2.0), (2, 5.0)]).unwrap(),
        WeightedSet::from_pairs([(2u64, 10.0)]).unwrap(),
    ];
    let r = rescale_unit(Dataset::new(rows)).unwrap();
    assert_eq!(r.rows[0].weights(), &[1.0, 0.5]);
}
