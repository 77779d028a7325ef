use akcdf::estimators::{epanechnikov_cdf, EstimatorKind, FittedEstimator, Sample};
use proptest::prelude::*;

fn observations(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-2f64..40.0, 1..max_len)
}

fn kind() -> impl Strategy<Value = EstimatorKind> {
    (1usize..=10).prop_map(|j| EstimatorKind::from_index(j).unwrap())
}

fn fit(kind: EstimatorKind, obs: Vec<f64>, b: f64) -> FittedEstimator {
    FittedEstimator::new(kind, Sample::new(obs).unwrap(), Some(b)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn values_lie_in_unit_interval(k in kind(), obs in observations(25), b in 1e-3f64..0.95, x in 0.0f64..120.0) {
        let v = fit(k, obs, b).evaluate(x).unwrap();
        prop_assert!((0.0..=1.0).contains(&v), "{k:?} gave {v}");
    }

    #[test]
    fn edf_is_rank_count(obs in observations(60), x in 0.0f64..45.0) {
        let n = obs.len();
        let count = obs.iter().filter(|v| **v <= x).count();
        let e = FittedEstimator::edf(Sample::new(obs).unwrap());
        prop_assert_eq!(e.evaluate(x).unwrap(), count as f64 / n as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn nondecreasing_in_x(k in kind(), obs in observations(15), b in 1e-3f64..0.95) {
        let e = fit(k, obs, b);
        let mut prev = 0.0;
        for i in 0..=400 {
            let x = 1e-4 * 1.04f64.powi(i);
            let v = e.evaluate(x).unwrap();
            prop_assert!(v >= prev - 1e-12, "{k:?} at x = {x}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn limits_at_the_ends(k in kind(), obs in observations(15), b in 1e-2f64..0.95) {
        let e = fit(k, obs.clone(), b);
        let hi = e.evaluate(1e15).unwrap();
        prop_assert!((hi - 1.0).abs() < 1e-9, "{k:?}: F(large) = {hi}");
        let lo = e.evaluate(1e-12).unwrap();
        let at0 = e.evaluate(0.0).unwrap();
        if k == EstimatorKind::Gam {
            // the gamma kernel keeps mass at the origin: Q(1, X/b) = exp(-X/b)
            let limit = obs.iter().map(|v| (-v / b).exp()).sum::<f64>() / obs.len() as f64;
            prop_assert!((at0 - limit).abs() < 1e-12 && (lo - limit).abs() < 1e-9, "{at0} {lo} {limit}");
        } else if k == EstimatorKind::OK {
            // the symmetric kernel spills mass below zero
            let limit = obs.iter().map(|v| epanechnikov_cdf(-v / b)).sum::<f64>() / obs.len() as f64;
            prop_assert!((at0 - limit).abs() < 1e-12 && (lo - limit).abs() < 1e-9, "{at0} {lo} {limit}");
        } else {
            prop_assert!(lo < 1e-6, "{k:?}: F(0+) = {lo}");
            prop_assert_eq!(at0, 0.0);
        }
    }

    #[test]
    fn union_is_weighted_average(k in kind(), a in observations(12), c in observations(12), b in 1e-3f64..0.95, x in 1e-3f64..60.0) {
        let (na, nc) = (a.len() as f64, c.len() as f64);
        let sa = Sample::new(a).unwrap();
        let sc = Sample::new(c).unwrap();
        let joint = FittedEstimator::new(k, sa.union(&sc), Some(b)).unwrap().evaluate(x).unwrap();
        let ea = FittedEstimator::new(k, sa, Some(b)).unwrap().evaluate(x).unwrap();
        let ec = FittedEstimator::new(k, sc, Some(b)).unwrap().evaluate(x).unwrap();
        prop_assert!((joint - (na * ea + nc * ec) / (na + nc)).abs() < 1e-12);
    }
}

#[test]
fn rejects_bad_inputs() {
    assert!(Sample::new(vec![]).is_err());
    assert!(Sample::new(vec![1.0, -2.0]).is_err());
    assert!(Sample::new(vec![0.0]).is_err());
    assert!(Sample::new(vec![f64::NAN]).is_err());
    let s = Sample::new(vec![1.0, 2.0]).unwrap();
    assert!(FittedEstimator::new(EstimatorKind::Gam, s.clone(), None).is_err());
    assert!(FittedEstimator::new(EstimatorKind::LN, s.clone(), Some(0.0)).is_err());
    assert!(FittedEstimator::new(EstimatorKind::RIG, s.clone(), Some(1.0)).is_err());
    assert!(FittedEstimator::new(EstimatorKind::BS, s.clone(), Some(0.1)).unwrap().evaluate(-1.0).is_err());
    assert!(FittedEstimator::new(EstimatorKind::EDF, s, None).is_ok());
}

#[test]
fn sample_keeps_draw_order() {
    let s = Sample::new(vec![3.0, 1.0, 2.0]).unwrap();
    assert_eq!(s.original(), [3.0, 1.0, 2.0]);
    assert_eq!(s.sorted(), [1.0, 2.0, 3.0]);
    assert_eq!(s.max(), 3.0);
}
