//! Standard normal distribution, heat kernel and the map ξ ↦ Φ′(Φ⁻¹(ξ)).
//!
//! Everything here is a pure function of its arguments.

use crate::error::{Error, Result};

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Smallest probability accepted by [`std_normal_quantile`].
pub const MIN_QUANTILE_PROBABILITY: f64 = 1e-300;

/// Beyond this |x| the lower tail is below the subnormal range.
const CDF_SATURATION: f64 = 38.0;

#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ(x), evaluated through `erfc` so the lower tail keeps full relative
/// precision. Saturates to the nearest representable probability for
/// |x| > 38.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    if x < -CDF_SATURATION {
        // Smallest positive subnormal: Φ never reaches exactly 0.
        return f64::from_bits(1);
    }
    if x > CDF_SATURATION {
        return 1.0;
    }
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Upper tail 1 − Φ(x) without cancellation.
#[inline]
pub fn std_normal_sf(x: f64) -> f64 {
    std_normal_cdf(-x)
}

/// Φ⁻¹(u) for u in (0, 1).
///
/// A rational initial guess is polished by safeguarded Halley steps on the
/// lower tail; the upper half is mapped through exact symmetry (1 − u is
/// exact for u ≥ ½), so Φ⁻¹(1 − u) = −Φ⁻¹(u) bit for bit.
pub fn std_normal_quantile(u: f64) -> Result<f64> {
    if !(MIN_QUANTILE_PROBABILITY..1.0).contains(&u) {
        return Err(Error::ProbabilityOutOfRange { name: "u", value: u });
    }
    if u > 0.5 {
        return Ok(-lower_quantile(1.0 - u));
    }
    Ok(lower_quantile(u))
}

/// Inverse of the upper tail: the x with 1 − Φ(x) = q. Keeps full
/// precision for large x, where Φ(x) itself has rounded towards 1.
pub fn std_normal_isf(q: f64) -> Result<f64> {
    std_normal_quantile(q).map(|x| -x)
}

/// Φ⁻¹ on (0, ½]; callers have validated the argument.
fn lower_quantile(u: f64) -> f64 {
    if u == 0.5 {
        return 0.0;
    }
    let mut x = acklam_guess(u);
    // Bracket for the safeguard: Φ⁻¹(u) ∈ [lo, hi].
    let (mut lo, mut hi): (f64, f64) = (-CDF_SATURATION - 1.0, 0.0);
    for _ in 0..8 {
        let cdf = std_normal_cdf(x);
        let pdf = std_normal_pdf(x);
        if cdf == u {
            break;
        }
        if cdf > u {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        if pdf == 0.0 {
            break;
        }
        // Relative residual keeps precision deep in the tail.
        let t = (cdf - u) / pdf;
        let mut next = x - t / (1.0 + 0.5 * x * t);
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Acklam's rational approximation, relative error about 1e-9.
fn acklam_guess(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Heat kernel p(t; x) = exp(−x²/2t)/√(2πt).
pub fn heat_kernel(t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(heat_kernel_unchecked(t, x))
}

#[inline]
pub(crate) fn heat_kernel_unchecked(t: f64, x: f64) -> f64 {
    INV_SQRT_2PI / t.sqrt() * (-0.5 * x * x / t).exp()
}

/// ξ ↦ Φ′(Φ⁻¹(ξ)): concave, symmetric about ½ and vanishing at both ends.
pub fn gauss_density_of_quantile(xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::ProbabilityOutOfRange { name: "xi", value: xi });
    }
    if xi < MIN_QUANTILE_PROBABILITY {
        // Φ′(Φ⁻¹(ξ)) ~ ξ·√(2 log(1/ξ)) underflows to zero here anyway.
        return Ok(0.0);
    }
    Ok(std_normal_pdf(std_normal_quantile(xi)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_median_and_symmetry() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        let x = 1.3;
        assert!((std_normal_cdf(-x) + std_normal_cdf(x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cdf_saturates_inside_unit_interval() {
        assert!(std_normal_cdf(-50.0) > 0.0);
        assert_eq!(std_normal_cdf(50.0), 1.0);
        assert!(std_normal_cdf(-37.5) > 0.0);
    }

    #[test]
    fn quantile_rejects_out_of_range() {
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN, 1e-301] {
            assert!(std_normal_quantile(u).is_err(), "{u}");
        }
        assert!(std_normal_quantile(1e-300).is_ok());
    }

    #[test]
    fn quantile_median_and_roundtrip() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        let u = std_normal_cdf(0.7);
        assert!((std_normal_quantile(u).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn quantile_is_exactly_antisymmetric() {
        // u chosen so that 1 − u is exact.
        for u in [0.25, 0.375, 0.0625, 0.4921875] {
            let lo = std_normal_quantile(u).unwrap();
            let hi = std_normal_quantile(1.0 - u).unwrap();
            assert_eq!(lo, -hi);
        }
    }

    #[test]
    fn heat_kernel_rejects_nonpositive_time() {
        assert!(heat_kernel(0.0, 1.0).is_err());
        assert!(heat_kernel(-1.0, 1.0).is_err());
        assert!((heat_kernel(1.0, 0.0).unwrap() - INV_SQRT_2PI).abs() < 1e-16);
        assert_eq!(heat_kernel(2.0, 1.5).unwrap(), heat_kernel(2.0, -1.5).unwrap());
    }

    #[test]
    fn density_of_quantile_basics() {
        assert!((gauss_density_of_quantile(0.5).unwrap() - INV_SQRT_2PI).abs() < 1e-16);
        let a = gauss_density_of_quantile(0.2).unwrap();
        let b = gauss_density_of_quantile(0.8).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(gauss_density_of_quantile(0.0).is_err());
        assert!(gauss_density_of_quantile(1.0).is_err());
        assert!(gauss_density_of_quantile(1e-12).unwrap() < 1e-10);
    }
}
