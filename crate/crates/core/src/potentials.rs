//! One-dimensional potentials.
//!
//! A [`Potential`] either tilts the centered Gaussian reference N(0, A)
//! (μ(dx) ∝ e^{−V(x)} ν(dx)) or is a full log-density against Lebesgue
//! measure (μ(dx) ∝ e^{−U(x)} dx). The slope-map construction
//! U = ½k² − log k′ always produces the latter.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::{std_normal_cdf, std_normal_pdf, std_normal_quantile};

/// Grid used for numerical convexity and slope checks.
pub const CHECK_GRID_HALF_WIDTH: f64 = 10.0;
pub const CHECK_GRID_STEP: f64 = 0.01;
/// Slack for reporting slope-bound violations.
pub const SLOPE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// Tilt of the centered Gaussian reference measure ν = N(0, A).
    Gaussian,
    /// Log-density against Lebesgue measure.
    Lebesgue,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Zero,
    Linear(f64),
    Quadratic(f64),
    Abs(f64),
    DoubleWell,
    /// U(x) = −log Σ wᵢ e^{−κᵢx²/2}, atoms (wᵢ, κᵢ).
    GaussianMixture(Vec<(f64, f64)>),
    FromSlopeMap(SlopeMap),
    Custom {
        value: ScalarFn,
        derivative: ScalarFn,
    },
}

#[derive(Clone)]
pub struct Potential {
    label: String,
    reference: Reference,
    shape: Shape,
    convex: bool,
    kinks: Vec<f64>,
    slope_map: Option<SlopeMap>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("label", &self.label)
            .field("reference", &self.reference)
            .field("convex", &self.convex)
            .field("kinks", &self.kinks)
            .finish()
    }
}

impl Potential {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn reference(&self) -> Reference {
        self.reference
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// Points where the one-sided derivatives may differ.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    /// The slope map this potential was generated from, if any.
    pub fn slope_map(&self) -> Option<&SlopeMap> {
        self.slope_map.as_ref()
    }

    /// Reference variance 1/α implied by the slope map's lower bound.
    pub fn natural_variance(&self) -> Option<f64> {
        self.slope_map.as_ref().map(|k| 1.0 / k.alpha)
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Linear(c) => c * x,
            Shape::Quadratic(c) => 0.5 * c * x * x,
            Shape::Abs(c) => c * x.abs(),
            Shape::DoubleWell => {
                let x2 = x * x;
                0.5 * x2 + x2 * x2 + 0.5 * x2 * x2 * x2 - (3.0 * x2).ln_1p()
            }
            Shape::GaussianMixture(atoms) => mixture_value(atoms, x),
            Shape::FromSlopeMap(k) => {
                let kv = k.k(x);
                0.5 * kv * kv - k.k_prime(x).ln()
            }
            Shape::Custom { value, .. } => value(x),
        }
    }

    pub fn left_derivative(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Abs(c) if x <= 0.0 => -c,
            Shape::Abs(c) => *c,
            _ => self.smooth_derivative(x),
        }
    }

    pub fn right_derivative(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Abs(c) if x < 0.0 => -c,
            Shape::Abs(c) => *c,
            _ => self.smooth_derivative(x),
        }
    }

    fn smooth_derivative(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Linear(c) => *c,
            Shape::Quadratic(c) => c * x,
            Shape::Abs(_) => unreachable!("handled by the one-sided accessors"),
            Shape::DoubleWell => {
                let x2 = x * x;
                x + 4.0 * x2 * x + 3.0 * x2 * x2 * x - 6.0 * x / (1.0 + 3.0 * x2)
            }
            Shape::GaussianMixture(atoms) => mixture_derivative(atoms, x),
            Shape::FromSlopeMap(k) => {
                let (kv, k1, k2) = (k.k(x), k.k_prime(x), k.k_second(x));
                kv * k1 - k2 / k1
            }
            Shape::Custom { derivative, .. } => derivative(x),
        }
    }

    /// A user-supplied smooth potential. Convexity is decided by the grid test.
    pub fn custom<V, D>(label: impl Into<String>, reference: Reference, value: V, derivative: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let mut p = Self {
            label: label.into(),
            reference,
            shape: Shape::Custom {
                value: Arc::new(value),
                derivative: Arc::new(derivative),
            },
            convex: false,
            kinks: Vec::new(),
            slope_map: None,
        };
        p.convex = grid_convexity(&p);
        p
    }

    fn new(label: String, reference: Reference, shape: Shape, kinks: Vec<f64>) -> Self {
        let mut p = Self {
            label,
            reference,
            shape,
            convex: false,
            kinks,
            slope_map: None,
        };
        p.convex = grid_convexity(&p);
        p
    }
}

fn mixture_value(atoms: &[(f64, f64)], x: f64) -> f64 {
    let x2 = x * x;
    let exps: Vec<f64> = atoms.iter().map(|(w, k)| w.ln() - 0.5 * k * x2).collect();
    let m = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = exps.iter().map(|e| (e - m).exp()).sum();
    -(m + s.ln())
}

fn mixture_derivative(atoms: &[(f64, f64)], x: f64) -> f64 {
    let x2 = x * x;
    let exps: Vec<f64> = atoms.iter().map(|(w, k)| w.ln() - 0.5 * k * x2).collect();
    let m = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for ((_, k), e) in atoms.iter().zip(&exps) {
        let w = (e - m).exp();
        num += k * w;
        den += w;
    }
    x * num / den
}

/// Midpoint-free convexity test: one-sided derivatives ordered and
/// nondecreasing along the check grid.
fn grid_convexity(p: &Potential) -> bool {
    let n = (2.0 * CHECK_GRID_HALF_WIDTH / CHECK_GRID_STEP).round() as usize;
    let mut prev_right = f64::NEG_INFINITY;
    for i in 0..=n {
        let x = -CHECK_GRID_HALF_WIDTH + i as f64 * CHECK_GRID_STEP;
        let (l, r) = (p.left_derivative(x), p.right_derivative(x));
        if !(l.is_finite() && r.is_finite()) {
            return false;
        }
        let slack = 1e-12 * (1.0 + l.abs().max(prev_right.abs().min(1e300)));
        if r - l < -1e-14 || l < prev_right - slack {
            return false;
        }
        prev_right = r;
    }
    true
}

/// Built-in potential catalog.
///
/// | name          | parameters         | potential                          |
/// |---------------|--------------------|------------------------------------|
/// | `zero`        |                    | V ≡ 0                              |
/// | `linear`      | `c` (default 1)    | V = c·x                            |
/// | `quadratic`   | `c` > 0 (default 1)| V = c·x²/2                         |
/// | `abs`         | `c` > 0 (default 1)| V = c·\|x\|                        |
/// | `double_well` |                    | U from k(x) = x + x³ (Lebesgue)    |
/// | `log_mixture` | `p`, `q`, `a`, `b` | U = −log(pe^{−ax²/2} + qe^{−bx²/2})|
pub fn builtin_potential(name: &str, params: &BTreeMap<String, f64>) -> Result<Potential> {
    let allowed: &[&str] = match name {
        "zero" | "double_well" => &[],
        "linear" | "quadratic" | "abs" => &["c"],
        "log_mixture" => &["p", "q", "a", "b"],
        other => return Err(Error::UnknownPotential(other.to_string())),
    };
    if let Some(key) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(invalid(key, format!("not a parameter of `{name}`")));
    }
    let get = |key: &str, default: Option<f64>| -> Result<f64> {
        match params.get(key).copied().or(default) {
            Some(v) if v.is_finite() => Ok(v),
            Some(v) => Err(invalid(key, format!("must be finite, got {v}"))),
            None => Err(invalid(key, "required")),
        }
    };
    let positive = |key: &str, v: f64| -> Result<f64> {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(invalid(key, format!("must be positive, got {v}")))
        }
    };
    let p = match name {
        "zero" => Potential::new("zero".into(), Reference::Gaussian, Shape::Zero, vec![]),
        "linear" => {
            let c = get("c", Some(1.0))?;
            Potential::new(format!("linear({c})"), Reference::Gaussian, Shape::Linear(c), vec![])
        }
        "quadratic" => {
            let c = positive("c", get("c", Some(1.0))?)?;
            Potential::new(
                format!("quadratic({c})"),
                Reference::Gaussian,
                Shape::Quadratic(c),
                vec![],
            )
        }
        "abs" => {
            let c = positive("c", get("c", Some(1.0))?)?;
            Potential::new(format!("abs({c})"), Reference::Gaussian, Shape::Abs(c), vec![0.0])
        }
        "double_well" => {
            let mut p = Potential::new("double_well".into(), Reference::Lebesgue, Shape::DoubleWell, vec![]);
            p.slope_map = Some(SlopeMap::polynomial(vec![0.0, 1.0, 0.0, 1.0], 1.0, None)?);
            p
        }
        "log_mixture" => {
            let (pw, qw) = (get("p", None)?, get("q", None)?);
            let (a, b) = (get("a", None)?, get("b", None)?);
            let k = log_mixture_slope_map(pw, qw, a, b)?;
            let mut p = Potential::new(
                format!("log_mixture({pw},{qw},{a},{b})"),
                Reference::Lebesgue,
                Shape::GaussianMixture(vec![(pw, a), (qw, b)]),
                vec![],
            );
            p.slope_map = Some(k);
            p
        }
        _ => unreachable!(),
    };
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SlopeKind {
    /// k(x) = Σ cᵢ xⁱ.
    Polynomial(Vec<f64>),
    /// k(x) = Φ⁻¹(Σ ρᵢ/√κᵢ · Φ(√κᵢ x)) over atoms (ρᵢ, κᵢ) with Σ ρᵢ/√κᵢ = 1.
    GaussianMixture(Vec<(f64, f64)>),
}

/// An increasing map k with k′ ≥ √α (and optionally k′ ≤ √β).
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeMap {
    pub kind: SlopeKind,
    pub alpha: f64,
    pub beta: Option<f64>,
}

impl SlopeMap {
    pub fn polynomial(coeffs: Vec<f64>, alpha: f64, beta: Option<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coeffs", "need finite polynomial coefficients"));
        }
        Self::checked(SlopeKind::Polynomial(coeffs), alpha, beta)
    }

    fn checked(kind: SlopeKind, alpha: f64, beta: Option<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be positive, got {alpha}")));
        }
        if let Some(b) = beta {
            if !(b >= alpha && b.is_finite()) {
                return Err(invalid("beta", format!("must be finite and ≥ alpha, got {b}")));
            }
        }
        Ok(Self { kind, alpha, beta })
    }

    pub fn label(&self) -> String {
        match &self.kind {
            SlopeKind::Polynomial(c) => {
                let terms: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                format!("slope_poly[{}]", terms.join(","))
            }
            SlopeKind::GaussianMixture(atoms) => {
                let terms: Vec<String> = atoms.iter().map(|(r, k)| format!("{r}:{k}")).collect();
                format!("slope_mixture[{}]", terms.join(","))
            }
        }
    }

    pub fn k(&self, x: f64) -> f64 {
        match &self.kind {
            SlopeKind::Polynomial(c) => horner(c, x),
            SlopeKind::GaussianMixture(atoms) => {
                // k is odd; evaluate on x ≤ 0 where the CDF mixture is accurate.
                let xn = -x.abs();
                let m = mixture_cdf(atoms, xn).max(crate::gaussian::MIN_QUANTILE_PROBABILITY);
                let v = std_normal_quantile(m.min(0.5)).expect("probability in range");
                if x > 0.0 {
                    -v
                } else {
                    v
                }
            }
        }
    }

    pub fn k_prime(&self, x: f64) -> f64 {
        match &self.kind {
            SlopeKind::Polynomial(c) => horner(&derivative(c), x),
            SlopeKind::GaussianMixture(atoms) => {
                let xn = -x.abs();
                let kv = self.k(xn);
                mixture_numerator(atoms, xn) / std_normal_pdf(kv)
            }
        }
    }

    pub fn k_second(&self, x: f64) -> f64 {
        match &self.kind {
            SlopeKind::Polynomial(c) => horner(&derivative(&derivative(c)), x),
            SlopeKind::GaussianMixture(atoms) => {
                // k″ = N′/φ(k) + k·k′², with N the numerator of k′.
                let xn = -x.abs();
                let kv = self.k(xn);
                let k1 = self.k_prime(xn);
                let dn: f64 = atoms
                    .iter()
                    .map(|(r, kap)| -r * kap * xn * std_normal_pdf(kap.sqrt() * xn))
                    .sum();
                let v = dn / std_normal_pdf(kv) + kv * k1 * k1;
                if x > 0.0 {
                    -v
                } else {
                    v
                }
            }
        }
    }
}

fn mixture_cdf(atoms: &[(f64, f64)], x: f64) -> f64 {
    atoms
        .iter()
        .map(|(r, k)| r / k.sqrt() * std_normal_cdf(k.sqrt() * x))
        .sum()
}

fn mixture_numerator(atoms: &[(f64, f64)], x: f64) -> f64 {
    atoms.iter().map(|(r, k)| r * std_normal_pdf(k.sqrt() * x)).sum()
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect()
}

/// The slope map of a two-atom log-mixture of centered Gaussians, with
/// declared bounds α = p², β = b.
pub fn log_mixture_slope_map(p: f64, q: f64, a: f64, b: f64) -> Result<SlopeMap> {
    for (name, v) in [("p", p), ("q", q), ("a", a), ("b", b)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    if a >= b {
        return Err(invalid("a", format!("need a < b, got a = {a}, b = {b}")));
    }
    mixture_slope_map(&[(p, a), (q, b)], p * p, Some(b))
}

/// General finite mixing measure ρ = Σ ρᵢ δ_{κᵢ}; requires Σ ρᵢ/√κᵢ = 1.
pub fn mixture_slope_map(atoms: &[(f64, f64)], alpha: f64, beta: Option<f64>) -> Result<SlopeMap> {
    if atoms.is_empty() {
        return Err(invalid("atoms", "need at least one atom"));
    }
    let residual: f64 = atoms.iter().map(|(r, k)| r / k.sqrt()).sum::<f64>() - 1.0;
    if residual.abs() > 1e-12 {
        return Err(Error::MixtureConstraint(residual));
    }
    SlopeMap::checked(SlopeKind::GaussianMixture(atoms.to_vec()), alpha, beta)
}

/// U(x) = ½k(x)² − log k′(x), a log-density against Lebesgue measure with
/// normalizer √(2π).
pub fn potential_from_slope_map(k: &SlopeMap) -> Result<Potential> {
    let n = (2.0 * CHECK_GRID_HALF_WIDTH / CHECK_GRID_STEP).round() as usize;
    for i in 0..=n {
        let x = -CHECK_GRID_HALF_WIDTH + i as f64 * CHECK_GRID_STEP;
        let slope = k.k_prime(x);
        if !(slope > 0.0) {
            return Err(Error::NonPositiveSlope { x, slope });
        }
    }
    let mut p = Potential::new(
        format!("U[{}]", k.label()),
        Reference::Lebesgue,
        Shape::FromSlopeMap(k.clone()),
        vec![],
    );
    p.slope_map = Some(k.clone());
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeBoundReport {
    pub min_slope: f64,
    pub argmin: f64,
    pub max_slope: f64,
    pub argmax: f64,
    pub lower_bound: f64,
    pub upper_bound: Option<f64>,
    /// Grid points (x, k′(x)) outside the declared bounds by more than 1e-10.
    pub violations: Vec<(f64, f64)>,
}

impl SlopeBoundReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Min/max of k′ over `grid` and the points violating √α ≤ k′ ≤ √β.
pub fn check_slope_bounds(k: &SlopeMap, grid: &[f64]) -> Result<SlopeBoundReport> {
    if grid.is_empty() {
        return Err(invalid("grid", "must be nonempty"));
    }
    let lower = k.alpha.sqrt();
    let upper = k.beta.map(f64::sqrt);
    let mut report = SlopeBoundReport {
        min_slope: f64::INFINITY,
        argmin: f64::NAN,
        max_slope: f64::NEG_INFINITY,
        argmax: f64::NAN,
        lower_bound: lower,
        upper_bound: upper,
        violations: Vec::new(),
    };
    for &x in grid {
        let s = k.k_prime(x);
        if s < report.min_slope {
            report.min_slope = s;
            report.argmin = x;
        }
        if s > report.max_slope {
            report.max_slope = s;
            report.argmax = x;
        }
        let low = s < lower - SLOPE_SLACK;
        let high = upper.is_some_and(|u| s > u + SLOPE_SLACK);
        if low || high || !s.is_finite() {
            report.violations.push((x, s));
        }
    }
    Ok(report)
}

/// Uniform grid on [lo, hi] with the given step, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}
