//! Expected Brownian local time and the local-time gap E[L^x_A − L^x_T].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingEnsemble;
use crate::error::{Error, Result};
use crate::gaussian::{heat_kernel_unchecked, std_normal_pdf, INV_SQRT_2PI};
use crate::quadrature::{integrate, Neumaier, Tolerance};

/// Relative tolerance allowed when var(X) slightly exceeds A from quadrature noise.
pub const VARIANCE_SLACK: f64 = 1e-9;

const LOCAL_TIME_TOL: Tolerance = Tolerance::absolute(1e-15).with_rel(1e-14);
/// Gaussian tails beyond this many standard deviations are dropped.
const TAIL_SDS: f64 = 40.0;

/// Which of the three equivalent expressions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    /// ∫₀ᵗ p(s; x) ds
    Occupation,
    /// 2∫₀^∞ (y − |x|)⁺ p(t; y) dy
    Reflection,
    /// 2∫₀^∞ (√t·y − |x|)⁺ p(1; y) dy
    Scaled,
}

/// E[L^x_t] for standard Brownian motion started at 0.
pub fn expected_local_time(x: f64, t: f64, formula: Formula) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(match formula {
        Formula::Occupation => occupation(x, t),
        Formula::Reflection => {
            let ax = x.abs();
            let hi = ax + TAIL_SDS * t.sqrt();
            2.0 * integrate(|y| (y - ax) * heat_kernel_unchecked(t, y), ax, hi, LOCAL_TIME_TOL).value
        }
        Formula::Scaled => {
            let (ax, st) = (x.abs(), t.sqrt());
            let lo = ax / st;
            2.0 * integrate(|y| (st * y - ax) * std_normal_pdf(y), lo, lo + TAIL_SDS, LOCAL_TIME_TOL).value
        }
    })
}

/// ∫₀ᵗ p(s; x) ds with s = u², which turns it into
/// √(2/π)∫₀^{√t} exp(−x²/2u²) du, a smooth bounded integrand.
fn occupation(x: f64, t: f64) -> f64 {
    let root_t = t.sqrt();
    let c = 2.0 * INV_SQRT_2PI;
    if x == 0.0 {
        return c * root_t;
    }
    let x2 = x * x;
    // Below u₀ the integrand is smaller than e^{−700}.
    let u0 = (x2 / 1400.0).sqrt();
    if u0 >= root_t {
        return 0.0;
    }
    c * integrate(|u: f64| (-0.5 * x2 / (u * u)).exp(), u0, root_t, LOCAL_TIME_TOL).value
}

/// Occupation formula without the argument check, for residual times ≥ 0.
fn occupation_or_zero(x: f64, t: f64) -> f64 {
    if t > 0.0 {
        occupation(x, t)
    } else {
        0.0
    }
}

/// (A − var_x)⁺, rejecting variances that exceed A beyond quadrature noise.
pub(crate) fn variance_gap(a: f64, var_x: f64) -> Result<f64> {
    if !(var_x >= 0.0) {
        return Err(crate::error::invalid(
            "var_x",
            format!("must be nonnegative, got {var_x}"),
        ));
    }
    if var_x > a * (1.0 + VARIANCE_SLACK) {
        return Err(Error::VarianceExceedsReference { var_x, reference: a });
    }
    Ok((a - var_x).max(0.0))
}

/// Lower estimate ∫₀^{(A − var_x)²/A} p(s; √(x² + A)) ds of the gap.
pub fn est1_lower(x: f64, a: f64, var_x: f64) -> Result<f64> {
    let gap = variance_gap(a, var_x)?;
    Ok(occupation_or_zero((x * x + a).sqrt(), gap * gap / a))
}

/// Upper estimate 2(A(1 + q))^{1/2q} p(1; x/√(A(1 + q))) (A − var_x)^{1/2p}.
pub fn est2_upper(x: f64, a: f64, var_x: f64, p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    let gap = variance_gap(a, var_x)?;
    let q = p / (p - 1.0);
    let s = a * (1.0 + q);
    Ok(2.0 * s.powf(0.5 / q) * std_normal_pdf(x / s.sqrt()) * gap.powf(0.5 / p))
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    #[serde(with = "crate::report::num")]
    pub estimate: f64,
    #[serde(with = "crate::report::num")]
    pub std_error: f64,
}

impl McEstimate {
    pub(crate) fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let n = values.len() as f64;
        let mut s = Neumaier::default();
        values.iter().for_each(|v| s.add(*v));
        let mean = s.sum() / n;
        let mut ss = Neumaier::default();
        values.iter().for_each(|v| ss.add((v - mean) * (v - mean)));
        let var = if values.len() > 1 { ss.sum() / (n - 1.0) } else { 0.0 };
        Ok(Self {
            estimate: mean,
            std_error: (var / n).sqrt(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeGap {
    #[serde(with = "crate::report::num")]
    pub estimate: f64,
    #[serde(with = "crate::report::num")]
    pub std_error: f64,
    /// Paths whose simulated T exceeded A, so A − T was clamped to 0.
    pub clamps: usize,
}

/// E[L^x_A − L^x_T] = E[E[L^{x−z}_{A−t}] at (t, z) = (T, B(T))], averaged over
/// the ensemble.
pub fn local_time_gap_mc(ensemble: &EmbeddingEnsemble, x: f64, a: f64) -> Result<LocalTimeGap> {
    let samples = ensemble.samples();
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let values: Vec<f64> = samples
        .par_iter()
        .map(|s| occupation_or_zero(x - s.bt, a - s.t))
        .collect();
    let clamps = samples.iter().filter(|s| s.t > a).count();
    let m = McEstimate::from_values(&values)?;
    Ok(LocalTimeGap {
        estimate: m.estimate,
        std_error: m.std_error,
        clamps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryCheck {
    #[serde(with = "crate::report::num")]
    pub x: f64,
    #[serde(with = "crate::report::num")]
    pub t: f64,
    pub lhs: McEstimate,
    #[serde(with = "crate::report::num")]
    pub rhs: f64,
    pub pass: bool,
}

/// E[∫₀ᵗ p(s; |x − B(T)|) ds] ≤ ∫₀^{A+t} p(s; x) ds, with a 3·SE allowance.
pub fn auxiliary_inequality_check(ensemble: &EmbeddingEnsemble, x: f64, t: f64, a: f64) -> Result<AuxiliaryCheck> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let values: Vec<f64> = ensemble.samples().par_iter().map(|s| occupation(x - s.bt, t)).collect();
    let lhs = McEstimate::from_values(&values)?;
    let rhs = occupation(x, a + t);
    Ok(AuxiliaryCheck {
        x,
        t,
        lhs,
        rhs,
        pass: lhs.estimate <= rhs + 3.0 * lhs.std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_level_closed_form() {
        for t in [0.5, 1.0, 2.0] {
            let v = expected_local_time(0.0, t, Formula::Occupation).unwrap();
            assert!((v - (2.0 * t / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        }
        assert!(
            (expected_local_time(0.0, 2.0, Formula::Scaled).unwrap() - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-10
        );
    }

    #[test]
    fn unreachable_level_and_symmetry() {
        assert!(expected_local_time(3.0, 0.01, Formula::Occupation).unwrap() < 1e-10);
        let a = expected_local_time(1.2, 1.0, Formula::Occupation).unwrap();
        let b = expected_local_time(-1.2, 1.0, Formula::Occupation).unwrap();
        assert_eq!(a, b);
        assert!(expected_local_time(1.0, 0.0, Formula::Reflection).is_err());
    }

    #[test]
    fn estimates_vanish_at_full_variance() {
        assert_eq!(est1_lower(0.3, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(est2_upper(0.3, 1.0, 1.0, 2.0).unwrap(), 0.0);
        assert!(est2_upper(0.0, 1.0, 0.5, 1.0).is_err());
        assert!(est1_lower(0.0, 1.0, 1.1).is_err());
    }

    #[test]
    fn est2_arithmetic() {
        let v = est2_upper(0.0, 1.0, 0.5, 2.0).unwrap();
        let expected = 2.0 * 3f64.powf(0.25) * INV_SQRT_2PI * 0.5f64.powf(0.25);
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.882_9).abs() < 1e-3);
    }
}
