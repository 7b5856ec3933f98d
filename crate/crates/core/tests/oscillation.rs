use std::f64::consts::PI;

use cnls_lab::oscillation::{
    canonical_q, criterion_holds, criterion_region, default_resolution, euler_map, euler_unmap, CoefficientPair,
};
use proptest::prelude::*;

fn cauchy_euler(k: f64) -> CoefficientPair {
    CoefficientPair::new(|x: f64| 1.0 / x, move |x: f64| k / (x * x), |x: f64| -1.0 / (x * x))
}

/// Number of sign changes of `y(x)` sampled log-uniformly on `[a, b]`.
fn sign_changes(y: impl Fn(f64) -> f64, a: f64, b: f64) -> usize {
    let n = 200_000;
    let (la, lb) = (a.ln(), b.ln());
    let ys: Vec<f64> = (0..=n)
        .map(|i| y((la + (lb - la) * i as f64 / n as f64).exp()))
        .collect();
    ys.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
}

/// A real solution of `x² y'' + x y' + k y = 0` that has a zero when one
/// exists: `sin(√k ln x)`, `x^√-k - x^-√-k` or `ln x`.
fn euler_solution(k: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let t = x.ln();
        if k > 0.0 {
            (k.sqrt() * t).sin()
        } else if k < 0.0 {
            (t * (-k).sqrt()).sinh()
        } else {
            t
        }
    }
}

#[test]
fn cauchy_euler_region_matches_closed_form() {
    let (a, b) = (1e-6, 1e6);
    for k in [-1.0, -0.1, 0.0, 0.1, 1.0] {
        let oscillates = sign_changes(euler_solution(k), a, b) >= 2;
        let region = criterion_region(&cauchy_euler(k), (a, b), 0.0, default_resolution((a, b), 0.0)).unwrap();
        assert_eq!(!region.is_empty(), oscillates, "k = {k}");
        assert_eq!(!region.is_empty(), k > 0.0, "k = {k}");
        if k > 0.0 {
            assert_eq!(region.intervals, vec![(a, b)]);
        }
    }
}

#[test]
fn spec_examples_for_regions() {
    let r = criterion_region(&CoefficientPair::constant(0.0, 1.0), (0.1, 10.0), 0.0, 4096).unwrap();
    assert_eq!(r.intervals.len(), 1);
    assert!((r.intervals[0].0 - 0.5).abs() < 1e-9);
    assert_eq!(r.intervals[0].1, 10.0);

    let pair = CoefficientPair::new(|x: f64| 1.0 / x, |x: f64| -1.0 / (x * x), |x: f64| -1.0 / (x * x));
    assert!(criterion_region(&pair, (0.1, 10.0), 0.0, 4096).unwrap().is_empty());

    let pair = CoefficientPair::new(|x: f64| 2.0 / x, |_| 1.0, |x: f64| -2.0 / (x * x));
    let r = criterion_region(&pair, (0.1, 20.0), 0.0, 4096).unwrap();
    assert_eq!(r.intervals.len(), 1);
    assert!((r.intervals[0].0 - 0.5).abs() < 1e-9);
    assert_eq!(r.intervals[0].1, 20.0);
}

#[test]
fn large_x_reduces_to_sign_test() {
    for q in [-1e-3, -1e-9, 1e-9, 1e-3] {
        assert_eq!(criterion_holds(q, 1e8, 0.0).unwrap(), q > 0.0, "{q}");
    }
}

#[test]
fn euler_round_trip_examples() {
    assert_eq!(euler_map(0.0), 1.0);
    assert!((euler_unmap(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
    let x = 0.37;
    assert!((euler_map(euler_unmap(x).unwrap()) - x).abs() <= 2.0 * f64::EPSILON * x);
    assert!(euler_unmap(0.0).is_err());
    assert!(euler_unmap(-PI).is_err());
}

proptest! {
    #[test]
    fn constant_pairs_give_the_closed_form_region(b0 in -3.0f64..3.0, c0 in -3.0f64..3.0) {
        let q = (4.0 * c0 - b0 * b0) / 4.0;
        let (lo, hi) = (0.05, 50.0);
        let region = criterion_region(&CoefficientPair::constant(b0, c0), (lo, hi), 0.0, default_resolution((lo, hi), 0.0)).unwrap();
        let edge = if q > 0.0 { 1.0 / (2.0 * q.sqrt()) } else { f64::INFINITY };
        if edge < hi * (1.0 - 1e-6) {
            prop_assert_eq!(region.intervals.len(), 1);
            let (a, b) = region.intervals[0];
            prop_assert!((a - edge.max(lo)).abs() < 1e-8, "{} vs {}", a, edge);
            prop_assert_eq!(b, hi);
        } else if edge > hi * (1.0 + 1e-6) {
            prop_assert!(region.is_empty());
        }
    }

    #[test]
    fn numeric_slope_is_second_order(a in 0.5f64..2.0, x in 0.5f64..5.0) {
        let analytic = CoefficientPair::new(move |x: f64| (a * x).sin(), |_| 0.3, move |x: f64| a * (a * x).cos());
        let numeric = CoefficientPair::numeric(move |x: f64| (a * x).sin(), |_| 0.3);
        let h = 1e-6f64.max(1e-6 * x);
        let diff = (canonical_q(&analytic, x).unwrap() - canonical_q(&numeric, x).unwrap()).abs();
        // Central-difference truncation a³h²/6 for b', halved by q's 2b'/4, plus rounding.
        prop_assert!(diff <= a.powi(3) * h * h / 12.0 + 1e-9, "{}", diff);
    }
}
