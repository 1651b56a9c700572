use proptest::prelude::*;
use thematic_core::divergence::{aggregate, chebyshev, euclidean, squared_euclidean, ClassAggregate};
use thematic_core::{DivergenceRecord, Label, Metric};

fn normalize(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..200).prop_flat_map(|n| {
        (
            prop::collection::vec(0.001f64..1.0, n).prop_map(normalize),
            prop::collection::vec(0.001f64..1.0, n).prop_map(normalize),
        )
    })
}

proptest! {
    #[test]
    fn metric_identities_and_bounds((p, q) in pair()) {
        let ch = chebyshev(&p, &q).unwrap();
        let e = euclidean(&p, &q).unwrap();
        let se = squared_euclidean(&p, &q).unwrap();
        prop_assert!((se - e * e).abs() <= 1e-12);
        prop_assert!(ch <= e);
        prop_assert!(ch <= 1.0 && e <= 2f64.sqrt() && se <= 2.0);
        prop_assert_eq!(ch, chebyshev(&q, &p).unwrap());
        prop_assert_eq!(e, euclidean(&q, &p).unwrap());
        prop_assert_eq!(se, squared_euclidean(&q, &p).unwrap());
        prop_assert_eq!(chebyshev(&p, &p).unwrap(), 0.0);
        prop_assert_eq!(squared_euclidean(&p, &p).unwrap(), 0.0);
        if p != q {
            prop_assert!(ch > 0.0);
        }
    }

    #[test]
    fn permutation_invariance((p, q) in pair(), rot in 0usize..200) {
        let k = rot % p.len();
        let mut pp = p.clone();
        let mut qq = q.clone();
        pp.rotate_left(k);
        qq.rotate_left(k);
        pp.reverse();
        qq.reverse();
        prop_assert_eq!(chebyshev(&p, &q).unwrap(), chebyshev(&pp, &qq).unwrap());
        prop_assert!((squared_euclidean(&p, &q).unwrap() - squared_euclidean(&pp, &qq).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn record_consistency((p, q) in pair()) {
        let r = DivergenceRecord::compute("x", Label::Fake, 2, &p, &q).unwrap();
        prop_assert!((r.d_se - r.d_e * r.d_e).abs() <= 1e-12);
        prop_assert!(r.d_ch <= r.d_e);
        prop_assert_eq!(r.n_topics, p.len());
    }

    #[test]
    fn aggregate_of_constant_and_shuffled(c in -3.0f64..3.0, n in 1usize..30, seed in any::<u64>()) {
        let a = ClassAggregate::from_values(Label::Real, Metric::Chebyshev, 1, 10, &vec![c; n]).unwrap();
        prop_assert!((a.mean - c).abs() <= 1e-12 * c.abs().max(1.0));
        prop_assert_eq!(a.median, c);

        let values: Vec<f64> = (0..n).map(|i| ((i as u64).wrapping_mul(seed | 1) % 97) as f64).collect();
        let mut shuffled = values.clone();
        shuffled.reverse();
        shuffled.rotate_left((seed as usize) % n);
        let x = ClassAggregate::from_values(Label::Fake, Metric::Euclidean, 1, 10, &values).unwrap();
        let y = ClassAggregate::from_values(Label::Fake, Metric::Euclidean, 1, 10, &shuffled).unwrap();
        prop_assert_eq!(x.median, y.median);
        prop_assert!(x.ci_half_width >= 0.0);
    }
}

#[test]
fn bulk_random_pairs() {
    // 10,000 deterministic pairs of lengths 2..=200
    let mut rng = thematic_core::topicmodel::rng::Xoshiro256::seed_from_u64(17);
    for i in 0..10_000 {
        let n = 2 + i % 199;
        let p = normalize((0..n).map(|_| rng.next_f64() + 1e-9).collect());
        let q = normalize((0..n).map(|_| rng.next_f64() + 1e-9).collect());
        let ch = chebyshev(&p, &q).unwrap();
        let e = euclidean(&p, &q).unwrap();
        let se = squared_euclidean(&p, &q).unwrap();
        assert!((se - e * e).abs() <= 1e-12);
        assert!(ch <= e && ch <= 1.0 && e <= 2f64.sqrt());
        assert!(ch > 0.0);
    }
}

#[test]
fn aggregate_emits_one_row_per_group() {
    let mut recs = Vec::new();
    for (i, label) in [Label::Fake, Label::Real, Label::Fake].into_iter().enumerate() {
        for n in [10, 20] {
            recs.push(DivergenceRecord {
                doc_id: format!("d{i}"),
                label,
                l: 3,
                n_topics: n,
                d_ch: 0.1 * i as f64,
                d_e: 0.2 * i as f64,
                d_se: 0.04 * (i * i) as f64,
            });
        }
    }
    let aggs = aggregate(&recs, &Metric::ALL).unwrap();
    assert_eq!(aggs.len(), 3 * 2 * 2);
    let fake10 = aggs
        .iter()
        .find(|a| a.metric == Metric::Euclidean && a.n_topics == 10 && a.label == Label::Fake)
        .unwrap();
    assert_eq!(fake10.count, 2);
    assert!((fake10.mean - 0.2).abs() < 1e-15);
}
