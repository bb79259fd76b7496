use std::collections::BTreeMap;

use bl_skorokhod::potentials::{
    builtin_potential, check_slope_bounds, log_mixture_slope_map, potential_from_slope_map, uniform_grid,
};
use proptest::prelude::*;

const P: f64 = 0.5;
const Q: f64 = 0.5 * std::f64::consts::SQRT_2;

/// Φ by composite Simpson on [0, x] of the density, plus ½.
fn phi_simpson(x: f64) -> f64 {
    let n = 4000;
    let h = x / n as f64;
    let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = f(0.0) + f(x);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + s * h / 3.0
}

fn inverse_by_bisection(target: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_simpson(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn log_mixture_k_against_quadrature() {
    let k = log_mixture_slope_map(P, Q, 1.0, 2.0).unwrap();
    for x in [0.25, 1.0, 2.0] {
        let target = P * phi_simpson(x) + Q / 2f64.sqrt() * phi_simpson(2f64.sqrt() * x);
        let oracle = inverse_by_bisection(target);
        assert!((k.k(x) - oracle).abs() < 1e-10, "k({x}) = {} vs {oracle}", k.k(x));
    }
    assert_eq!(k.k(0.0), 0.0);
}

#[test]
fn log_mixture_slope_bounds() {
    let k = log_mixture_slope_map(P, Q, 1.0, 2.0).unwrap();
    let r = check_slope_bounds(&k, &uniform_grid(-8.0, 8.0, 0.01)).unwrap();
    assert!(r.pass(), "{r:?}");
    assert!(r.min_slope >= P - 1e-10 && r.max_slope <= 2f64.sqrt() + 1e-10);
}

#[test]
fn slope_map_potential_is_the_mixture_log_density() {
    let k = log_mixture_slope_map(P, Q, 1.0, 2.0).unwrap();
    let u = potential_from_slope_map(&k).unwrap();
    let mut worst: f64 = 0.0;
    for x in uniform_grid(-8.0, 8.0, 0.05) {
        let closed = -(P * (-0.5 * x * x).exp() + Q * (-x * x).exp()).ln();
        worst = worst.max((u.value(x) - closed).abs());
    }
    assert!(worst <= 1e-10, "worst {worst:e}");
}

fn convex_builtins() -> Vec<bl_skorokhod::potentials::Potential> {
    let c = |v: f64| BTreeMap::from([("c".to_string(), v)]);
    vec![
        builtin_potential("zero", &BTreeMap::new()).unwrap(),
        builtin_potential("linear", &c(-0.7)).unwrap(),
        builtin_potential("quadratic", &c(2.0)).unwrap(),
        builtin_potential("abs", &c(1.3)).unwrap(),
    ]
}

proptest! {
    #[test]
    fn one_sided_derivatives_ordered_and_monotone(x in -20.0f64..20.0, dx in 0.0f64..5.0) {
        for p in convex_builtins() {
            prop_assert!(p.right_derivative(x) - p.left_derivative(x) >= -1e-14);
            prop_assert!(p.left_derivative(x + dx) >= p.left_derivative(x));
            prop_assert!(p.right_derivative(x + dx) >= p.right_derivative(x));
        }
    }
}
