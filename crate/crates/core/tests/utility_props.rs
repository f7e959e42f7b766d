mod common;

use common::{any_utility, piecewise_linear};
use eqkit::UtilityFunction;
use proptest::prelude::*;

fn objective(u: &UtilityFunction, lambda: f64, x: f64) -> f64 {
    u.eval(x).unwrap() - lambda * x
}

/// Points in the interior of a linear or smooth piece, away from kinks by more than `h`.
fn interior_points(u: &UtilityFunction) -> Vec<f64> {
    let kinks: Vec<f64> = match u {
        UtilityFunction::Quadratic { .. } => vec![],
        UtilityFunction::CappedLinear { k, beta } => vec![beta / k],
        UtilityFunction::PiecewiseLinear { points } => points.iter().map(|p| p[0]).collect(),
    };
    (1..200)
        .map(|j| j as f64 * 0.137)
        .filter(|x| kinks.iter().all(|k| (x - k).abs() > 1e-3 * x.max(1.0)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn central_differences_match_slopes(u in any_utility()) {
        for x in interior_points(&u) {
            let h = 1e-5 * x.max(1.0);
            let numeric = (u.eval(x + h).unwrap() - u.eval(x - h).unwrap()) / (2.0 * h);
            prop_assert!((numeric - u.slope(x)).abs() <= 1e-6 * u.slope(x).abs().max(1.0),
                "x = {x}: numeric {numeric}, analytic {}", u.slope(x));
        }
    }

    #[test]
    fn interval_endpoints_tie(u in any_utility(), lambda in -20.0..60.0f64) {
        let r = u.best_response(lambda);
        if r.is_bounded() {
            let lo = objective(&u, lambda, r.lo);
            let hi = objective(&u, lambda, r.hi);
            prop_assert!((lo - hi).abs() <= 1e-9 * lo.abs().max(1.0));
        }
    }

    #[test]
    fn demand_is_nonincreasing(u in any_utility(), l1 in -20.0..60.0f64, gap in 1e-6..30.0f64) {
        let l2 = l1 + gap;
        let r1 = u.best_response(l1);
        let r2 = u.best_response(l2);
        prop_assert!(r2.hi <= r1.lo + 1e-12, "{r1:?} at {l1}, {r2:?} at {l2}");
    }

    #[test]
    fn piecewise_kinks_are_slopes(u in piecewise_linear()) {
        let UtilityFunction::PiecewiseLinear { points } = &u else { unreachable!() };
        prop_assert_eq!(u.kink_prices().len(), points.len() - 1);
    }
}

/// 1000 (utility, price) draws against 100 nonnegative challengers each.
#[test]
fn best_responses_beat_challengers() {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(1000));
    let strategy = (any_utility(), -20.0..60.0f64, prop::collection::vec(0.0..60.0f64, 100));
    runner
        .run(&strategy, |(u, lambda, challengers)| {
            let r = u.best_response(lambda);
            if !r.is_attained() {
                // No maximizer: the objective must keep growing along some ray.
                let far = objective(&u, lambda, 1e6);
                prop_assert!(challengers.iter().all(|&y| far > objective(&u, lambda, y)));
                return Ok(());
            }
            let candidates = if r.is_bounded() {
                vec![r.lo, 0.5 * (r.lo + r.hi), r.hi]
            } else {
                vec![r.lo, r.lo + 1.0, r.lo + 10.0]
            };
            for x in candidates {
                let fx = objective(&u, lambda, x);
                for &y in &challengers {
                    prop_assert!(fx >= objective(&u, lambda, y) - 1e-9 * fx.abs().max(1.0), "x={x} y={y} r={r:?}");
                }
            }
            Ok(())
        })
        .unwrap();
}
