//! Inequality verdicts: the moment inequality with its variance corrections,
//! the p → 1 and mean-absolute-deviation bounds, the slope-map (appendix)
//! comparisons and Monte Carlo cross-checks through the embedding.

use serde::{Deserialize, Serialize};

use crate::convex::{mad_lower_bound, ConvexTest, Extended};
use crate::embedding::EmbeddingEnsemble;
use crate::error::{Error, Result};
use crate::gaussian::heat_kernel_unchecked;
use crate::local_time::{est1_lower, est2_upper, local_time_gap_mc, variance_gap, LocalTimeGap, McEstimate};
use crate::potentials::{check_slope_bounds, uniform_grid, Reference, SlopeBoundReport};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::report::{num, opt_num};
use crate::transport::TransportMap;

pub const BL1_TOLERANCE: f64 = 1e-8;
/// Includes the nested-quadrature allowance of the correction term.
pub const BL2_TOLERANCE: f64 = 1e-8 + 1e-6;
pub const BL3_TOLERANCE: f64 = 1e-8;
pub const REMARK_TOLERANCE: f64 = 1e-8;
pub const MAD_TOLERANCE: f64 = 1e-9;
pub const APPENDIX_TOLERANCE: f64 = 1e-7;
/// Slope bounds are checked on |x| ≤ this half-width.
pub const SLOPE_GRID_HALF_WIDTH: f64 = 8.0;
pub const SLOPE_GRID_STEP: f64 = 0.01;

/// Gaussian integrals are truncated at this many standard deviations.
const GAUSS_WINDOW_SDS: f64 = 40.0;
const MOMENT_TOL: Tolerance = Tolerance::absolute(1e-15).with_rel(1e-14);

/// E[ψ(Y)] for Y ~ N(0, A).
pub fn moment_lhs(psi: &ConvexTest, a: f64) -> Result<Extended> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(crate::error::invalid("A", format!("must be positive, got {a}")));
    }
    let sd = a.sqrt();
    let half = GAUSS_WINDOW_SDS * sd;
    let mut breaks: Vec<f64> = [-16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0]
        .iter()
        .map(|k| k * sd)
        .chain(psi.kinks().into_iter().filter(|k| k.abs() < half))
        .chain([-half, half])
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let f = |y: f64| psi.eval_or_inf(y) * heat_kernel_unchecked(a, y);
    let r = integrate_with_breaks(f, &breaks, MOMENT_TOL);
    // Truncation diagnostic: the integrand at the cut must be negligible.
    let edge = (f(-half).abs() + f(half).abs()) * half;
    if !r.value.is_finite() || edge > 1e-6 * r.value.abs().max(1e-300) {
        return Ok(Extended::Infinite);
    }
    Ok(Extended::Finite(r.value))
}

/// E[ψ(X − EX)] for X ~ μ.
pub fn moment_rhs(psi: &ConvexTest, map: &TransportMap) -> Extended {
    let mean = map.mean();
    let breaks: Vec<f64> = psi.kinks().iter().map(|k| k + mean).collect();
    match map.expectation(|x| psi.eval_or_inf(x - mean), &breaks) {
        Some(v) => Extended::Finite(v),
        None => Extended::Infinite,
    }
}

/// A one-sided check `margin ≥ −tolerance`, with the infinite-side verdict
/// recorded when no finite margin exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    #[serde(with = "opt_num")]
    pub margin: Option<f64>,
    #[serde(with = "num")]
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn finite(margin: f64, tolerance: f64) -> Self {
        Self {
            margin: Some(margin),
            tolerance,
            pass: margin >= -tolerance,
            note: None,
        }
    }

    fn verdict(pass: bool, tolerance: f64, note: &str) -> Self {
        Self {
            margin: None,
            tolerance,
            pass,
            note: Some(note.to_string()),
        }
    }

    /// `big ≥ small`, following the convention that both sides may be +∞.
    fn dominates(big: Extended, small: Extended, tolerance: f64) -> Self {
        match (big, small) {
            (Extended::Finite(b), Extended::Finite(s)) => Self::finite(b - s, tolerance),
            (Extended::Infinite, Extended::Infinite) => Self::verdict(true, tolerance, "both sides infinite"),
            (Extended::Infinite, Extended::Finite(_)) => Self::verdict(true, tolerance, "larger side infinite"),
            (Extended::Finite(_), Extended::Infinite) => Self::verdict(false, tolerance, "smaller side infinite"),
        }
    }

    /// Whether `pass` follows from the stored margin and tolerance.
    pub fn is_consistent(&self) -> bool {
        match self.margin {
            Some(m) => self.pass == (m >= -self.tolerance),
            None => self.note.is_some(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bl3Entry {
    #[serde(with = "num")]
    pub p: f64,
    #[serde(with = "num")]
    pub q: f64,
    pub constant: Extended,
    /// C(A, ψ, q)·(A − var X)^{1/2p}.
    pub upper_correction: Extended,
    /// True when C = +∞ and the bound is vacuous.
    pub skipped: bool,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemarkEntry {
    /// ψ″(ℝ)(A − var X)^{1/2}/√(2π), absent when ψ″(ℝ) = ∞.
    #[serde(with = "opt_num")]
    pub finite_mass_bound: Option<f64>,
    /// finite_mass_bound − (lhs − rhs).
    pub p_to_one: Option<Check>,
    #[serde(with = "num")]
    pub mad_ratio: f64,
    #[serde(with = "num")]
    pub mad_lower: f64,
    pub mad: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixBounds {
    pub alpha: f64,
    pub beta: Option<f64>,
    /// Further α values for the upper comparison only (no slope check).
    pub extra_alphas: Vec<f64>,
    pub require_slope_bounds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaCheck {
    #[serde(with = "num")]
    pub alpha: f64,
    pub gaussian_moment: Extended,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixEntry {
    #[serde(with = "num")]
    pub alpha: f64,
    #[serde(with = "opt_num")]
    pub beta: Option<f64>,
    pub slope_bounds: SlopeSummary,
    /// E[ψ(X − EX)] ≤ E[ψ(N(0, 1/α))].
    pub upper: Check,
    /// E[ψ(N(0, 1/β))] ≤ E[ψ(X − EX)].
    pub lower: Option<AlphaCheck>,
    pub extra_upper: Vec<AlphaCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeSummary {
    #[serde(with = "num")]
    pub min_slope: f64,
    #[serde(with = "num")]
    pub max_slope: f64,
    #[serde(with = "num")]
    pub lower_bound: f64,
    #[serde(with = "opt_num")]
    pub upper_bound: Option<f64>,
    /// min k′ − √α and √β − max k′.
    #[serde(with = "num")]
    pub lower_margin: f64,
    #[serde(with = "opt_num")]
    pub upper_margin: Option<f64>,
    pub pass: bool,
}

impl SlopeSummary {
    fn from_report(r: &SlopeBoundReport) -> Self {
        Self {
            min_slope: r.min_slope,
            max_slope: r.max_slope,
            lower_bound: r.lower_bound,
            upper_bound: r.upper_bound,
            lower_margin: r.min_slope - r.lower_bound,
            upper_margin: r.upper_bound.map(|u| u - r.max_slope),
            pass: r.pass(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCrosscheck {
    #[serde(with = "num")]
    pub estimate: f64,
    #[serde(with = "num")]
    pub std_error: f64,
    pub target: Extended,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub potential: String,
    pub psi: String,
    #[serde(with = "num")]
    pub a: f64,
    #[serde(with = "num")]
    pub mean_x: f64,
    #[serde(with = "num")]
    pub var_x: f64,
    /// E[ψ(Y − EY)].
    pub lhs: Extended,
    /// E[ψ(X − EX)].
    pub rhs: Extended,
    pub bl1: Check,
    pub bl2_correction: Extended,
    pub bl2: Check,
    pub bl3: Vec<Bl3Entry>,
    pub remark: RemarkEntry,
    pub appendix: Option<AppendixEntry>,
    pub mc_crosscheck: Option<McCrosscheck>,
}

impl VerificationReport {
    /// Every check passes.
    pub fn all_pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass) && self.mc_crosscheck.as_ref().is_none_or(|m| m.pass)
    }

    fn checks(&self) -> Vec<&Check> {
        let mut out = vec![&self.bl1, &self.bl2, &self.remark.mad];
        out.extend(self.bl3.iter().map(|b| &b.check));
        out.extend(self.remark.p_to_one.as_ref());
        if let Some(app) = &self.appendix {
            out.push(&app.upper);
            out.extend(app.lower.as_ref().map(|l| &l.check));
            out.extend(app.extra_upper.iter().map(|e| &e.check));
        }
        out
    }

    /// Pass flags agree with the stored margins and tolerances.
    pub fn passes_are_consistent(&self) -> bool {
        self.checks().iter().all(|c| c.is_consistent())
    }
}

/// Checks of the moment inequality and its corrections for one (ψ, μ)
/// pair. Requires a convex Gaussian-reference potential; slope-map
/// potentials go through [`verify_appendix`].
pub fn verify_theorem(psi: &ConvexTest, map: &TransportMap, p_list: &[f64]) -> Result<VerificationReport> {
    let pot = map.potential();
    if pot.reference() != Reference::Gaussian || !pot.is_convex() {
        return Err(Error::NonConvex(pot.label().to_string()));
    }
    core_report(psi, map, p_list)
}

fn core_report(psi: &ConvexTest, map: &TransportMap, p_list: &[f64]) -> Result<VerificationReport> {
    for p in p_list {
        if !(*p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(*p));
        }
    }
    let a = map.variance_reference();
    let var_x = map.variance();
    let gap = variance_gap(a, var_x)?;
    let lhs = moment_lhs(psi, a)?;
    let rhs = moment_rhs(psi, map);
    let bl1 = Check::dominates(lhs, rhs, BL1_TOLERANCE);

    let bl2_correction = psi.bl2_correction(a, var_x)?;
    let bl2 = match (lhs, rhs, bl2_correction) {
        (Extended::Finite(l), Extended::Finite(r), Extended::Finite(c)) => Check::finite(l - r - c, BL2_TOLERANCE),
        (Extended::Finite(_), Extended::Finite(_), Extended::Infinite) => {
            Check::verdict(false, BL2_TOLERANCE, "infinite correction with finite sides")
        }
        _ => Check::dominates(lhs, rhs, BL2_TOLERANCE),
    };

    let mut bl3 = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let q = p / (p - 1.0);
        let constant = psi.bl3_constant(a, q)?;
        let (upper_correction, skipped, check) = match constant {
            Extended::Infinite => (
                Extended::Infinite,
                true,
                Check::verdict(true, BL3_TOLERANCE, "C = +inf, bound vacuous"),
            ),
            Extended::Finite(c) => {
                let corr = c * gap.powf(0.5 / p);
                let check = match (lhs, rhs) {
                    (Extended::Finite(l), Extended::Finite(r)) => Check::finite(r + corr - l, BL3_TOLERANCE),
                    _ => Check::dominates(rhs, lhs, BL3_TOLERANCE),
                };
                (Extended::Finite(corr), false, check)
            }
        };
        bl3.push(Bl3Entry {
            p,
            q,
            constant,
            upper_correction,
            skipped,
            check,
        });
    }

    let bounds = psi.remark_bounds(a, var_x)?;
    let p_to_one = match (bounds.finite_mass_bound, lhs, rhs) {
        (Some(b), Extended::Finite(l), Extended::Finite(r)) => Some(Check::finite(b - (l - r), REMARK_TOLERANCE)),
        _ => None,
    };
    let mean = map.mean();
    let mad = map
        .expectation(|x| (x - mean).abs(), &[mean])
        .ok_or_else(|| Error::DivergentNormalizer("mean absolute deviation".into()))?;
    let mad_ratio = mad / var_x;
    let mad_lower = mad_lower_bound(a);
    let remark = RemarkEntry {
        finite_mass_bound: bounds.finite_mass_bound,
        p_to_one,
        mad_ratio,
        mad_lower,
        mad: Check::finite(mad_ratio - mad_lower, MAD_TOLERANCE),
    };

    Ok(VerificationReport {
        potential: map.potential().label().to_string(),
        psi: psi.label().to_string(),
        a,
        mean_x: mean,
        var_x,
        lhs,
        rhs,
        bl1,
        bl2_correction,
        bl2,
        bl3,
        remark,
        appendix: None,
        mc_crosscheck: None,
    })
}

/// Slope-map comparisons: E[ψ(X − EX)] ≤ E[ψ(N(0, 1/α))] for α and every
/// extra α, and E[ψ(N(0, 1/β))] ≤ E[ψ(X − EX)] when β is given. The map must
/// have been built from the slope-map potential with A = 1/α. The variance
/// corrections of [`verify_theorem`] are reported as well, with A = 1/α.
pub fn verify_appendix(
    psi: &ConvexTest,
    map: &TransportMap,
    bounds: &AppendixBounds,
    p_list: &[f64],
) -> Result<VerificationReport> {
    let k = map
        .potential()
        .slope_map()
        .ok_or_else(|| crate::error::invalid("potential", "not defined by a slope map"))?;
    let alpha = bounds.alpha;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(crate::error::invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let a = map.variance_reference();
    if ((a * alpha) - 1.0).abs() > 1e-12 {
        return Err(crate::error::invalid(
            "A",
            format!("transport built with A = {a}, expected 1/alpha = {}", 1.0 / alpha),
        ));
    }
    let mut declared = k.clone();
    declared.alpha = alpha;
    declared.beta = bounds.beta;
    let grid = uniform_grid(-SLOPE_GRID_HALF_WIDTH, SLOPE_GRID_HALF_WIDTH, SLOPE_GRID_STEP);
    let slope = check_slope_bounds(&declared, &grid)?;
    if bounds.require_slope_bounds && !slope.pass() {
        let worst = &slope.violations[0];
        return Err(Error::SlopeBoundViolation {
            count: slope.violations.len(),
            worst_x: worst.0,
            worst_slope: worst.1,
        });
    }

    let mut report = core_report(psi, map, p_list)?;
    let upper = Check::dominates(report.lhs, report.rhs, APPENDIX_TOLERANCE);
    let lower = match bounds.beta {
        Some(beta) => {
            let m = moment_lhs(psi, 1.0 / beta)?;
            Some(AlphaCheck {
                alpha: beta,
                gaussian_moment: m,
                check: Check::dominates(report.rhs, m, APPENDIX_TOLERANCE),
            })
        }
        None => None,
    };
    let mut extra_upper = Vec::new();
    for &alt in &bounds.extra_alphas {
        if !(alt > 0.0 && alt.is_finite()) {
            return Err(crate::error::invalid(
                "extra alpha",
                format!("must be positive, got {alt}"),
            ));
        }
        let m = moment_lhs(psi, 1.0 / alt)?;
        extra_upper.push(AlphaCheck {
            alpha: alt,
            gaussian_moment: m,
            check: Check::dominates(m, report.rhs, APPENDIX_TOLERANCE),
        });
    }
    report.appendix = Some(AppendixEntry {
        alpha,
        beta: bounds.beta,
        slope_bounds: SlopeSummary::from_report(&slope),
        upper,
        lower,
        extra_upper,
    });
    Ok(report)
}

/// Sample mean of ψ(B(T)) over the ensemble against E[ψ(X − EX)], which it
/// must straddle within 3·SE.
pub fn mc_crosscheck(psi: &ConvexTest, ensemble: &EmbeddingEnsemble, map: &TransportMap) -> Result<McCrosscheck> {
    if ensemble.provenance() != map.provenance() {
        return Err(Error::ProvenanceMismatch {
            ensemble: ensemble.provenance().to_string(),
            transport: map.provenance(),
        });
    }
    let values: Vec<f64> = ensemble.samples().iter().map(|s| psi.eval_or_inf(s.bt)).collect();
    let m = McEstimate::from_values(&values)?;
    let target = moment_rhs(psi, map);
    let pass = match target {
        Extended::Finite(t) => (m.estimate - t).abs() <= 3.0 * m.std_error + 1e-12 * (1.0 + t.abs()),
        Extended::Infinite => false,
    };
    Ok(McCrosscheck {
        estimate: m.estimate,
        std_error: m.std_error,
        target,
        pass,
    })
}

/// Both sides of the local-time sandwich at one level x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichPoint {
    #[serde(with = "num")]
    pub x: f64,
    #[serde(with = "num")]
    pub est1: f64,
    pub gap: GapEstimate,
    pub est2: Vec<UpperPoint>,
    pub lower_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    #[serde(with = "num")]
    pub estimate: f64,
    #[serde(with = "num")]
    pub std_error: f64,
    pub clamps: usize,
}

impl From<LocalTimeGap> for GapEstimate {
    fn from(g: LocalTimeGap) -> Self {
        Self {
            estimate: g.estimate,
            std_error: g.std_error,
            clamps: g.clamps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperPoint {
    #[serde(with = "num")]
    pub p: f64,
    #[serde(with = "num")]
    pub value: f64,
    pub pass: bool,
}

impl SandwichPoint {
    pub fn pass(&self) -> bool {
        self.lower_pass && self.est2.iter().all(|u| u.pass)
    }
}

/// est1(x) ≤ E[L^x_A − L^x_T] ≤ est2(x, p), each side allowed 3·SE.
pub fn sandwich(
    ensemble: &EmbeddingEnsemble,
    map: &TransportMap,
    x_grid: &[f64],
    p_list: &[f64],
) -> Result<Vec<SandwichPoint>> {
    if ensemble.provenance() != map.provenance() {
        return Err(Error::ProvenanceMismatch {
            ensemble: ensemble.provenance().to_string(),
            transport: map.provenance(),
        });
    }
    let a = map.variance_reference();
    let var_x = map.variance();
    x_grid
        .iter()
        .map(|&x| {
            let gap = local_time_gap_mc(ensemble, x, a)?;
            let lo = est1_lower(x, a, var_x)?;
            let slack = 3.0 * gap.std_error;
            let est2 = p_list
                .iter()
                .map(|&p| {
                    let value = est2_upper(x, a, var_x, p)?;
                    Ok(UpperPoint {
                        p,
                        value,
                        pass: gap.estimate <= value + slack,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SandwichPoint {
                x,
                est1: lo,
                gap: gap.into(),
                est2,
                lower_pass: lo <= gap.estimate + slack,
            })
        })
        .collect()
}
