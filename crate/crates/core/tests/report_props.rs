use aeronet::report::compute_distribution;
use proptest::prelude::*;

proptest! {
    #[test]
    fn percentiles_are_monotone(s in prop::collection::vec(-1e9f64..1e9, 1..200), q in prop::collection::vec(0.0f64..=100.0, 2..20)) {
        let r = compute_distribution(&s).unwrap();
        let mut q = q;
        q.sort_by(f64::total_cmp);
        let v: Vec<f64> = q.iter().map(|q| r.percentile(*q)).collect();
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(r.percentile(0.0), r.min());
        prop_assert_eq!(r.percentile(100.0), r.max());
        prop_assert!(r.percentiles.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn cdf_is_monotone_and_complements_ccdf(s in prop::collection::vec(-100f64..100.0, 1..100), xs in prop::collection::vec(-120f64..120.0, 1..30)) {
        let r = compute_distribution(&s).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let f: Vec<f64> = xs.iter().map(|x| r.cdf(*x)).collect();
        prop_assert!(f.windows(2).all(|w| w[0] <= w[1]));
        for x in &xs {
            prop_assert!((r.cdf(*x) + r.ccdf(*x) - 1.0).abs() <= f64::EPSILON);
        }
        let curve = r.curve();
        prop_assert_eq!(curve.last().unwrap().1, 1.0);
    }
}
