use bl_skorokhod::gaussian::*;
use proptest::prelude::*;

/// Composite Simpson on [a, b] with n (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn cdf_matches_quadrature_of_the_density() {
    let pdf = |y: f64| (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
    for x in [-3.0, -1.0, 0.5, 1.96, 4.0] {
        let oracle = 0.5 + simpson(pdf, 0.0, x, 20_000);
        assert!((std_normal_cdf(x) - oracle).abs() < 1e-14, "x = {x}");
    }
    // Frozen from the oracle above.
    assert!((std_normal_cdf(1.96) - 0.975_002_104_851_78).abs() < 1e-14);
}

#[test]
fn quantile_matches_bisection_oracle() {
    let oracle = bisect(|x| std_normal_cdf(x) - 0.975, 0.0, 5.0);
    let q = std_normal_quantile(0.975).unwrap();
    assert!((q - oracle).abs() < 1e-12);
    assert!((q - 1.959_963_984_540_054).abs() < 1e-12);
    for u in [1e-300, 1e-100, 1e-20, 1e-5, 0.3] {
        let x = std_normal_quantile(u).unwrap();
        assert!(((std_normal_cdf(x) - u) / u).abs() < 1e-12, "u = {u}");
    }
}

#[test]
fn roundtrip_over_a_wide_range() {
    for i in -800..=800 {
        let x = i as f64 / 100.0;
        // The tail holding the smaller probability carries the information.
        let back = if x <= 0.0 {
            std_normal_quantile(std_normal_cdf(x)).unwrap()
        } else {
            std_normal_isf(std_normal_sf(x)).unwrap()
        };
        assert!((back - x).abs() <= 1e-10, "x = {x}, back = {back}");
        // Through Φ alone, accuracy is limited by the spacing of doubles near 1.
        if x > 0.0 && x < 8.0 {
            let direct = std_normal_quantile(std_normal_cdf(x)).unwrap();
            let conditioning = f64::EPSILON / std_normal_pdf(x);
            assert!((direct - x).abs() <= 1e-10 + 4.0 * conditioning, "x = {x}");
        }
    }
}

#[test]
fn quantile_strictly_increasing_on_grid() {
    let grid: Vec<f64> = (1..2000).map(|i| i as f64 / 2000.0).collect();
    let q: Vec<f64> = grid.iter().map(|u| std_normal_quantile(*u).unwrap()).collect();
    assert!(q.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn heat_kernel_closed_form_normalization_and_semigroup() {
    assert!((heat_kernel(1.0, 0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-16);
    let mass = simpson(|x| heat_kernel(4.0, x).unwrap(), -60.0, 60.0, 40_000);
    assert!((mass - 1.0).abs() < 1e-12);
    // ∫p(s; x − y)p(t; y)dy = p(s + t; x) at (s, t, x) = (1, 2, 0.7).
    let (s, t, x) = (1.0, 2.0, 0.7);
    let conv = simpson(
        |y| heat_kernel(s, x - y).unwrap() * heat_kernel(t, y).unwrap(),
        -40.0,
        40.0,
        40_000,
    );
    assert!((conv - heat_kernel(s + t, x).unwrap()).abs() < 1e-12);
}

#[test]
fn density_of_quantile_derivative_is_minus_quantile() {
    let h = 1e-5;
    let xi: f64 = 0.3;
    let fd = (gauss_density_of_quantile(xi + h).unwrap() - gauss_density_of_quantile(xi - h).unwrap()) / (2.0 * h);
    let expected = -std_normal_quantile(xi).unwrap();
    assert!((expected - 0.524_400_512_708_041).abs() < 1e-12);
    assert!((fd - expected).abs() < 1e-8);
}

#[test]
fn density_of_quantile_is_midpoint_concave() {
    let f = |x: f64| gauss_density_of_quantile(x).unwrap();
    // 10³ pairs on a grid in (0, 1).
    let pts: Vec<f64> = (1..=40).map(|i| i as f64 / 41.0).collect();
    let mut pairs = 0;
    for (i, &a) in pts.iter().enumerate() {
        for &b in pts.iter().skip(i + 1) {
            pairs += 1;
            assert!(f(0.5 * (a + b)) >= 0.5 * (f(a) + f(b)) - 1e-12);
        }
    }
    assert!(pairs >= 780);
    let extra: Vec<(f64, f64)> = (0..220)
        .map(|i| (1e-6 * (i + 1) as f64, 1.0 - 1e-3 * (i + 1) as f64))
        .collect();
    for (a, b) in extra {
        assert!(f(0.5 * (a + b)) >= 0.5 * (f(a) + f(b)) - 1e-12);
    }
}

#[test]
fn scaled_density_of_quantile_dominates() {
    let f = |x: f64| gauss_density_of_quantile(x).unwrap();
    for c in [1.0, 1.01, 1.5, 2.0, 10.0, 1000.0] {
        for i in 1..200 {
            let eta = i as f64 / 200.0;
            assert!(c * f(eta / c) - f(eta) >= -1e-12, "c = {c}, eta = {eta}");
        }
    }
}

#[test]
fn density_of_quantile_boundary_limits() {
    assert!(gauss_density_of_quantile(1e-15).unwrap() < 1e-13);
    assert!(gauss_density_of_quantile(1.0 - 1e-15).unwrap() < 1e-13);
}

proptest! {
    #[test]
    fn quantile_inverts_cdf(u in 1e-12f64..0.999_999_999) {
        let x = std_normal_quantile(u).unwrap();
        prop_assert!((std_normal_cdf(x) - u).abs() <= 1e-12);
    }

    #[test]
    fn cdf_monotone(x in -37.0f64..8.0, dx in 1e-6f64..1.0) {
        prop_assert!(std_normal_cdf(x) < std_normal_cdf(x + dx));
    }

    #[test]
    fn heat_kernel_even(t in 1e-3f64..50.0, x in -20.0f64..20.0) {
        prop_assert_eq!(heat_kernel(t, x).unwrap(), heat_kernel(t, -x).unwrap());
    }
}
