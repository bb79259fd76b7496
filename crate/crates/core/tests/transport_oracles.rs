use std::collections::BTreeMap;

use bl_skorokhod::gaussian::{std_normal_cdf, std_normal_pdf, INV_SQRT_2PI};
use bl_skorokhod::potentials::{builtin_potential, uniform_grid, Potential, Reference};
use bl_skorokhod::transport::TransportMap;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn builtin(name: &str, params: &[(&str, f64)]) -> Potential {
    let map: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_potential(name, &map).unwrap()
}

fn build(name: &str, params: &[(&str, f64)], a: f64) -> TransportMap {
    TransportMap::build(&builtin(name, params), a, 1e-10).unwrap()
}

#[test]
fn zero_potential_is_scaled_identity() {
    for a in [0.5, 1.0, 4.0] {
        let t = build("zero", &[], a);
        assert!((t.normalizer() - 1.0).abs() < 1e-12);
        assert!(t.mean().abs() < 1e-12);
        assert!((t.variance() - a).abs() < 1e-10);
        for x in uniform_grid(-8.0, 8.0, 0.05) {
            assert!((t.transport_g(x) - a.sqrt() * x).abs() < 1e-9, "A = {a}, x = {x}");
            assert!((t.transport_g_prime(x) - a.sqrt()).abs() < 1e-9);
        }
        assert!(t.mu_quantile(0.5).unwrap().abs() < 1e-12);
        assert!((t.mu_cdf(0.0) - 0.5).abs() < 1e-14);
    }
}

#[test]
fn quadratic_potential_gives_half_variance_gaussian() {
    let t = build("quadratic", &[("c", 1.0)], 1.0);
    assert!((t.normalizer() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((t.variance() - 0.5).abs() < 1e-9);
    for x in uniform_grid(-8.0, 8.0, 0.05) {
        assert!((t.transport_g(x) - x * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((t.transport_g_prime(x) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }
    assert!((t.mu_cdf(std::f64::consts::FRAC_1_SQRT_2) - 0.841_344_746_068_542_9).abs() < 1e-12);
}

#[test]
fn linear_potential_is_a_shift() {
    let t = build("linear", &[("c", 1.0)], 1.0);
    assert!((t.normalizer() - 0.5f64.exp()).abs() < 1e-12);
    assert!((t.mean() + 1.0).abs() < 1e-10);
    assert!((t.variance() - 1.0).abs() < 1e-9);
    for x in uniform_grid(-8.0, 8.0, 0.05) {
        assert!((t.transport_g(x) - (x - 1.0)).abs() < 1e-9, "x = {x}");
        assert!((t.transport_g_prime(x) - 1.0).abs() < 1e-9);
    }
    assert!((t.mu_cdf(-1.0) - 0.5).abs() < 1e-12);
    assert!(t.mu_quantile(std_normal_cdf(1.0)).unwrap().abs() < 1e-10);
}

#[test]
fn double_well_quantile_round_trip_and_slope_bound() {
    let t = build("double_well", &[], 1.0);
    let u = 0.123;
    let y = t.mu_quantile(u).unwrap();
    assert!((t.mu_cdf(y) - u).abs() <= 1e-10);
    let b = t.check_g_prime_bound(&uniform_grid(-8.0, 8.0, 0.01));
    assert!(b.pass);
    assert!((b.max_g_prime - 1.0).abs() < 1e-8);
    assert!(b.arg_max.abs() < 1e-9);
    // Here g is the inverse of k(x) = x + x³.
    for x in [-2.0, -0.3, 0.0, 0.7, 1.9] {
        let g = t.transport_g(x);
        assert!((g + g * g * g - x).abs() < 1e-9, "x = {x}");
    }
}

#[test]
fn slope_bound_for_convex_builtins() {
    for (name, params) in [
        ("zero", vec![]),
        ("linear", vec![("c", 1.0)]),
        ("quadratic", vec![("c", 1.0)]),
        ("abs", vec![("c", 1.0)]),
    ] {
        for a in [0.5, 1.0, 4.0] {
            let t = build(name, &params, a);
            let b = t.check_g_prime_bound(&uniform_grid(-8.0, 8.0, 0.01));
            assert!(b.max_g_prime - a.sqrt() <= 1e-8, "{name} A = {a}: {b:?}");
            assert!(t.variance() <= a + 1e-9, "{name} A = {a}");
        }
    }
}

#[test]
fn hazard_inequalities() {
    let grid = uniform_grid(-5.0, 5.0, 0.01);
    for name in ["zero", "linear"] {
        let t = build(name, &[], 1.0);
        let r = t.check_hazard_inequalities(&grid).unwrap();
        assert!(r.pass(), "{name}: {:?}", &r.violations[..r.violations.len().min(3)]);
        // Equality cases.
        assert!(
            r.min_ratio_slack.abs() < 1e-9 && r.min_density_slack.abs() < 1e-9,
            "{name}"
        );
    }
    let t = build("quadratic", &[], 1.0);
    let r = t.check_hazard_inequalities(&grid).unwrap();
    assert!(r.pass());
    assert!(r.min_density_slack > 0.0 && r.min_ratio_slack > 0.0);
    for a in [0.5, 4.0] {
        let t = build("abs", &[], a);
        assert!(t.check_hazard_inequalities(&grid).unwrap().pass());
    }
    let dw = build("double_well", &[], 1.0);
    assert!(dw.check_hazard_inequalities(&grid).is_err());
    assert!(dw.check_g_nonnegative(&[0.5]).is_err());
}

#[test]
fn g_function_nonnegative() {
    let xi: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
    let zero = build("zero", &[], 2.0);
    let g = zero.check_g_nonnegative(&xi).unwrap();
    assert!(g.pass && g.min_g.abs() < 1e-12);
    let quad = build("quadratic", &[], 1.0);
    let expected = INV_SQRT_2PI / std::f64::consts::FRAC_1_SQRT_2 - INV_SQRT_2PI;
    assert!((quad.g_function(0.5).unwrap() - expected).abs() < 1e-12);
    assert!(quad.check_g_nonnegative(&xi).unwrap().pass);
    for a in [0.5, 1.0, 4.0] {
        assert!(build("abs", &[], a).check_g_nonnegative(&xi).unwrap().pass);
    }
}

#[test]
fn analytic_derivative_matches_finite_differences() {
    for (name, a) in [("abs", 1.0), ("double_well", 1.0), ("quadratic", 4.0)] {
        let t = build(name, &[], a);
        let h = 1e-5;
        for x in uniform_grid(-6.0, 6.0, 0.37) {
            let fd = (t.transport_g(x + h) - t.transport_g(x - h)) / (2.0 * h);
            assert!((fd - t.transport_g_prime(x)).abs() < 1e-6, "{name} x = {x}");
        }
    }
}

#[test]
fn scaling_covariance() {
    let a: f64 = 4.0;
    let s = a.sqrt();
    let direct = build("abs", &[], a);
    let scaled = Potential::custom(
        "abs_scaled",
        Reference::Gaussian,
        move |x: f64| (s * x).abs(),
        move |x: f64| s * x.signum(),
    );
    let unit = TransportMap::build(&scaled, 1.0, 1e-10).unwrap();
    for x in uniform_grid(-8.0, 8.0, 0.1) {
        assert!(
            (direct.transport_g(x) - s * unit.transport_g(x)).abs() < 1e-9,
            "x = {x}"
        );
    }
}

#[test]
fn sampling_identity_ks() {
    let t = build("abs", &[], 1.0);
    let n = 100_000;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut xs: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(1e-15..1.0);
            t.mu_quantile(u).unwrap()
        })
        .collect();
    xs.sort_by(f64::total_cmp);
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = t.mu_cdf(*x);
        d = d
            .max((f - i as f64 / n as f64).abs())
            .max(((i + 1) as f64 / n as f64 - f).abs());
    }
    assert!(d <= 1.63 / (n as f64).sqrt(), "KS = {d}");
}

#[test]
fn abs_potential_normalizer_matches_closed_form() {
    // Z = ∫e^{−|x|}φ(x)dx = 2e^{1/2}Φ(−1).
    let t = build("abs", &[], 1.0);
    let z = 2.0 * 0.5f64.exp() * std_normal_cdf(-1.0);
    assert!((t.normalizer() - z).abs() < 1e-12);
    // Density at 0 is φ(0)/Z.
    assert!((t.mu_density(0.0) - std_normal_pdf(0.0) / z).abs() < 1e-12);
}

#[test]
fn fast_table_agrees_with_exact() {
    let t = build("double_well", &[], 1.0);
    for x in uniform_grid(-11.0, 11.0, 0.0137) {
        // Cubic interpolation error on a 0.003 grid; far below the simulation budget.
        let e = (t.transport_g_prime_fast(x) - t.transport_g_prime(x)).abs();
        assert!(e < 1e-7, "x = {x}, error {e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_monotone_and_inverts(u in 1e-9f64..0.999_999, du in 1e-6f64..1e-3) {
        let t = build("abs", &[], 1.0);
        let y = t.mu_quantile(u).unwrap();
        prop_assert!((t.mu_cdf(y) - u).abs() <= 1e-12);
        if u + du < 1.0 {
            prop_assert!(t.mu_quantile(u + du).unwrap() > y);
        }
    }

    #[test]
    fn g_increasing(x in -11.0f64..11.0, dx in 1e-4f64..1.0) {
        let t = build("quadratic", &[("c", 2.0)], 1.5);
        prop_assert!(t.transport_g(x + dx) > t.transport_g(x));
    }
}
