//! Convex test functions ψ, stored through ψ(0), ψ′₋(0) and the measure ψ″:
//!
//! ψ(x) = ψ(0) + ψ′₋(0)·x + ∫_{[0,∞)} (x − y)⁺ ψ″(dy) + ∫_{(−∞,0)} (y − x)⁺ ψ″(dy).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{std_normal_pdf, INV_SQRT_2PI};
use crate::local_time::{est1_lower, variance_gap};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use crate::report::format_number;

/// A value in ℝ ∪ {+∞}. Serialized as a decimal string, with `"inf"` for +∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Serialize for Extended {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_number(self.to_f64()))
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = crate::report::num::deserialize(d)?;
        if v == f64::INFINITY {
            Ok(Extended::Infinite)
        } else if v.is_finite() {
            Ok(Extended::Finite(v))
        } else {
            Err(serde::de::Error::custom(format!("invalid extended value {v}")))
        }
    }
}

impl Extended {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(*v),
            Extended::Infinite => None,
        }
    }

    /// +∞ for the infinite marker.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// One density term c·|x|^e of ψ″.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityTerm {
    pub coeff: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexTest {
    label: String,
    value_at_zero: f64,
    left_slope_at_zero: f64,
    atoms: Vec<(f64, f64)>,
    density: Vec<DensityTerm>,
}

/// Starting half-width for the density integrals; doubled until the tail
/// increment is negligible.
const DENSITY_WINDOW: f64 = 16.0;
const MAX_DOUBLINGS: u32 = 14;
const DENSITY_TOL: Tolerance = Tolerance::absolute(1e-15).with_rel(1e-13);

impl ConvexTest {
    /// General constructor. Masses and coefficients must be finite and ≥ 0,
    /// exponents finite and ≥ 0.
    pub fn new(
        label: impl Into<String>,
        value_at_zero: f64,
        left_slope_at_zero: f64,
        atoms: Vec<(f64, f64)>,
        density: Vec<DensityTerm>,
    ) -> Result<Self> {
        if !value_at_zero.is_finite() || !left_slope_at_zero.is_finite() {
            return Err(crate::error::invalid("psi", "value and slope at 0 must be finite"));
        }
        for (loc, mass) in &atoms {
            if !loc.is_finite() || !(mass.is_finite() && *mass >= 0.0) {
                return Err(crate::error::invalid("atoms", format!("bad atom ({loc}, {mass})")));
            }
        }
        for t in &density {
            if !(t.coeff.is_finite() && t.coeff >= 0.0) || !(t.exponent.is_finite() && t.exponent >= 0.0) {
                return Err(crate::error::invalid(
                    "density",
                    format!("bad term {}·|x|^{}", t.coeff, t.exponent),
                ));
            }
        }
        let atoms = atoms.into_iter().filter(|(_, m)| *m > 0.0).collect();
        let density = density.into_iter().filter(|t| t.coeff > 0.0).collect();
        Ok(Self {
            label: label.into(),
            value_at_zero,
            left_slope_at_zero,
            atoms,
            density,
        })
    }

    /// ψ(x) = |x|.
    pub fn abs() -> Self {
        Self::new("abs", 0.0, -1.0, vec![(0.0, 2.0)], vec![]).expect("valid")
    }

    /// ψ(x) = x².
    pub fn square() -> Self {
        Self::new(
            "square",
            0.0,
            0.0,
            vec![],
            vec![DensityTerm {
                coeff: 2.0,
                exponent: 0.0,
            }],
        )
        .expect("valid")
    }

    /// ψ(x) = |x|^p for p ≥ 2.
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
        let term = DensityTerm {
            coeff: p * (p - 1.0),
            exponent: p - 2.0,
        };
        Self::new(format!("power({p})"), 0.0, 0.0, vec![], vec![term])
    }

    /// ψ(x) = (x − K)⁺.
    pub fn call(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(crate::error::invalid("K", "must be finite"));
        }
        let (value, slope) = if k < 0.0 { (-k, 1.0) } else { (0.0, 0.0) };
        Self::new(format!("call({k})"), value, slope, vec![(k, 1.0)], vec![])
    }

    /// ψ(x) = max(|x| − K, 0) for K ≥ 0.
    pub fn corridor(k: f64) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(crate::error::invalid("K", format!("must be finite and ≥ 0, got {k}")));
        }
        if k == 0.0 {
            return Self::new("corridor(0)", 0.0, -1.0, vec![(0.0, 2.0)], vec![]);
        }
        Self::new(format!("corridor({k})"), 0.0, 0.0, vec![(-k, 1.0), (k, 1.0)], vec![])
    }

    /// Atoms plus the density Σ cₖ|x|ᵏ.
    pub fn from_atoms_and_poly(
        label: impl Into<String>,
        value_at_zero: f64,
        left_slope_at_zero: f64,
        atoms: Vec<(f64, f64)>,
        poly_coeffs: &[f64],
    ) -> Result<Self> {
        let density = poly_coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| DensityTerm {
                coeff: *c,
                exponent: k as f64,
            })
            .collect();
        Self::new(label, value_at_zero, left_slope_at_zero, atoms, density)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }
    pub fn left_slope_at_zero(&self) -> f64 {
        self.left_slope_at_zero
    }
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
    pub fn density_terms(&self) -> &[DensityTerm] {
        &self.density
    }

    /// Atom locations: the kinks of ψ.
    pub fn kinks(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.atoms.iter().map(|(l, _)| *l).collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    /// Polynomial growth degree of ψ: 1 with atoms only, e + 2 with density.
    pub fn growth_degree(&self) -> f64 {
        self.density.iter().map(|t| t.exponent + 2.0).fold(1.0, f64::max)
    }

    pub fn has_density(&self) -> bool {
        !self.density.is_empty()
    }

    /// ψ″ as a function (density part only).
    pub fn density_at(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.density.iter().map(|t| t.coeff * ax.powf(t.exponent)).sum()
    }

    /// ψ(x) from the measure representation, in closed form per term.
    pub fn eval_psi(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::DivergentReconstruction(x));
        }
        let mut v = self.value_at_zero + self.left_slope_at_zero * x;
        for (loc, mass) in &self.atoms {
            v += mass
                * if *loc >= 0.0 {
                    (x - loc).max(0.0)
                } else {
                    (loc - x).max(0.0)
                };
        }
        // ∫₀^{|x|} (|x| − y)·c·y^e dy = c|x|^{e+2}/((e+1)(e+2)) on either side.
        let ax = x.abs();
        for t in &self.density {
            v += t.coeff * ax.powf(t.exponent + 2.0) / ((t.exponent + 1.0) * (t.exponent + 2.0));
        }
        if !v.is_finite() {
            return Err(Error::DivergentReconstruction(x));
        }
        Ok(v)
    }

    /// ψ(x) with a non-finite result mapped to +∞; only used inside
    /// integrals where the weight makes the product negligible.
    pub(crate) fn eval_or_inf(&self, x: f64) -> f64 {
        self.eval_psi(x).unwrap_or(f64::INFINITY)
    }

    /// Midpoint convexity of the reconstruction on a grid.
    pub fn check_midpoint_convexity(&self, grid: &[f64]) -> bool {
        grid.windows(3).all(|w| {
            let (a, b) = (w[0], w[2]);
            let m = 0.5 * (a + b);
            match (self.eval_psi(a), self.eval_psi(m), self.eval_psi(b)) {
                (Ok(fa), Ok(fm), Ok(fb)) => fm <= 0.5 * (fa + fb) + 1e-12 * (1.0 + fa.abs() + fb.abs()),
                _ => false,
            }
        })
    }

    /// ψ″(ℝ).
    pub fn total_mass(&self) -> Extended {
        if self.has_density() {
            return Extended::Infinite;
        }
        Extended::Finite(self.atoms.iter().map(|(_, m)| m).sum())
    }

    /// ∫ f dψ″ = Σ mass·f(loc) + ∫ f·density, or +∞ when the density integral
    /// keeps growing as the window doubles. `f` should be ≥ 0.
    pub fn integrate_against_second_derivative<F: Fn(f64) -> f64>(&self, f: F) -> Extended {
        let mut total: f64 = self.atoms.iter().map(|(loc, m)| m * f(*loc)).sum();
        if !total.is_finite() {
            return Extended::Infinite;
        }
        if !self.has_density() {
            return Extended::Finite(total);
        }
        let g = |x: f64| f(x) * self.density_at(x);
        let mut half = DENSITY_WINDOW;
        let mut value = integrate_with_breaks(g, &[-half, -1.0, 0.0, 1.0, half], DENSITY_TOL).value;
        for _ in 0..MAX_DOUBLINGS {
            let outer = integrate_with_breaks(g, &[-2.0 * half, -half], DENSITY_TOL).value
                + integrate_with_breaks(g, &[half, 2.0 * half], DENSITY_TOL).value;
            value += outer;
            half *= 2.0;
            if !value.is_finite() {
                return Extended::Infinite;
            }
            if outer.abs() <= 1e-15 * value.abs() || (outer == 0.0 && value == 0.0) {
                total += value;
                return Extended::Finite(total);
            }
        }
        Extended::Infinite
    }

    /// ½∫ψ″(dx) ∫₀^{(A−var_x)²/A} p(s; √(x² + A)) ds.
    pub fn bl2_correction(&self, a: f64, var_x: f64) -> Result<Extended> {
        check_variance_reference(a)?;
        if variance_gap(a, var_x)? == 0.0 {
            return Ok(Extended::Finite(0.0));
        }
        // Validation happened above, so est1_lower cannot fail below.
        let v = self.integrate_against_second_derivative(|x| est1_lower(x, a, var_x).unwrap_or(f64::NAN));
        Ok(match v {
            Extended::Finite(v) => Extended::Finite(0.5 * v),
            Extended::Infinite => Extended::Infinite,
        })
    }

    /// C(A, ψ, q) = (A(1 + q))^{1/2q} ∫ψ″(dx) p(1; x/√(A(1 + q))).
    pub fn bl3_constant(&self, a: f64, q: f64) -> Result<Extended> {
        check_variance_reference(a)?;
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::InvalidExponent(q));
        }
        let s = a * (1.0 + q);
        let root = s.sqrt();
        Ok(
            match self.integrate_against_second_derivative(|x| std_normal_pdf(x / root)) {
                Extended::Finite(v) => Extended::Finite(s.powf(0.5 / q) * v),
                Extended::Infinite => Extended::Infinite,
            },
        )
    }

    /// The p → 1 bound ψ″(ℝ)(A − var_x)^{1/2}/√(2π) (when ψ″(ℝ) < ∞) and the
    /// mean-absolute-deviation lower bound 1/√(2πA).
    pub fn remark_bounds(&self, a: f64, var_x: f64) -> Result<RemarkBounds> {
        check_variance_reference(a)?;
        let gap = variance_gap(a, var_x)?;
        Ok(RemarkBounds {
            finite_mass_bound: self.total_mass().finite().map(|m| m * gap.sqrt() * INV_SQRT_2PI),
            mad_lower: mad_lower_bound(a),
        })
    }
}

/// 1/√(2πA): lower bound on E|X − EX|/var(X).
pub fn mad_lower_bound(a: f64) -> f64 {
    INV_SQRT_2PI / a.sqrt()
}

fn check_variance_reference(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(crate::error::invalid("A", format!("must be positive, got {a}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemarkBounds {
    /// `None` when ψ″ has infinite total mass.
    pub finite_mass_bound: Option<f64>,
    pub mad_lower: f64,
}

/// ψ specification as accepted in experiment configs:
/// `"abs"`, `"square"`, `{"power": p}`, `{"call": K}`, `{"corridor": K}` or
/// `{"atoms": [[loc, mass], …], "density_poly_coeffs": [c0, c1, …]}` with
/// optional `value_at_zero`, `left_slope_at_zero` and `label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PsiSpec {
    Named(String),
    Power {
        power: f64,
    },
    Call {
        call: f64,
    },
    Corridor {
        corridor: f64,
    },
    Custom {
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        value_at_zero: f64,
        #[serde(default)]
        left_slope_at_zero: f64,
        #[serde(default)]
        atoms: Vec<(f64, f64)>,
        #[serde(default)]
        density_poly_coeffs: Vec<f64>,
    },
}

impl PsiSpec {
    pub fn build(&self) -> Result<ConvexTest> {
        match self {
            PsiSpec::Named(name) => match name.as_str() {
                "abs" => Ok(ConvexTest::abs()),
                "square" => Ok(ConvexTest::square()),
                other => Err(Error::UnknownConvexTest(other.to_string())),
            },
            PsiSpec::Power { power } => ConvexTest::power(*power),
            PsiSpec::Call { call } => ConvexTest::call(*call),
            PsiSpec::Corridor { corridor } => ConvexTest::corridor(*corridor),
            PsiSpec::Custom {
                label,
                value_at_zero,
                left_slope_at_zero,
                atoms,
                density_poly_coeffs,
            } => {
                if atoms.is_empty() && density_poly_coeffs.is_empty() && label.is_none() {
                    // Guards against `{}` silently becoming a linear ψ.
                    return Err(Error::UnknownConvexTest("empty specification".into()));
                }
                ConvexTest::from_atoms_and_poly(
                    label.clone().unwrap_or_else(|| "custom".into()),
                    *value_at_zero,
                    *left_slope_at_zero,
                    atoms.clone(),
                    density_poly_coeffs,
                )
            }
        }
    }
}

/// Parses a JSON ψ specification.
/// Both the bare form and the wrapped form `{"psi": …}` are accepted.
pub fn parse_psi_spec(text: &str) -> Result<ConvexTest> {
    let config = |e: serde_json::Error| Error::Config(e.to_string());
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(config)?;
    let wrapped = match &mut value {
        serde_json::Value::Object(map) if map.len() == 1 => map.remove("psi"),
        _ => None,
    };
    if let Some(inner) = wrapped {
        value = inner;
    }
    let spec: PsiSpec = serde_json::from_value(value).map_err(config)?;
    spec.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_match_closed_forms() {
        let abs = ConvexTest::abs();
        assert_eq!(abs.eval_psi(3.0).unwrap(), 3.0);
        assert_eq!(abs.eval_psi(-2.5).unwrap(), 2.5);
        assert_eq!(ConvexTest::square().eval_psi(-1.5).unwrap(), 2.25);
        assert_eq!(ConvexTest::call(1.0).unwrap().eval_psi(0.5).unwrap(), 0.0);
        let put_like = ConvexTest::call(-1.0).unwrap();
        assert_eq!(put_like.eval_psi(-3.0).unwrap(), 0.0);
        assert_eq!(put_like.eval_psi(2.0).unwrap(), 3.0);
        let c = ConvexTest::corridor(1.0).unwrap();
        assert_eq!(c.eval_psi(0.3).unwrap(), 0.0);
        assert_eq!(c.eval_psi(-2.0).unwrap(), 1.0);
        assert_eq!(ConvexTest::corridor(0.0).unwrap().eval_psi(-2.0).unwrap(), 2.0);
        let cube = ConvexTest::power(3.0).unwrap();
        assert!((cube.eval_psi(-2.0).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConvexTest::power(1.5).is_err());
        assert!(ConvexTest::corridor(-1.0).is_err());
        assert!(ConvexTest::new("x", 0.0, 0.0, vec![(0.0, -1.0)], vec![]).is_err());
        assert!(ConvexTest::abs().eval_psi(f64::INFINITY).is_err());
        assert!(parse_psi_spec("\"cosh\"").is_err());
        assert!(parse_psi_spec("{}").is_err());
        assert!(parse_psi_spec("{\"power\": 3, \"call\": 1}").is_err());
    }

    #[test]
    fn atom_integrals_and_infinite_mass() {
        let abs = ConvexTest::abs();
        let v = abs.integrate_against_second_derivative(|x| crate::gaussian::heat_kernel(1.0, x).unwrap());
        assert!((v.to_f64() - 2.0 * INV_SQRT_2PI).abs() < 1e-15);
        assert_eq!(
            ConvexTest::square().integrate_against_second_derivative(|_| 1.0),
            Extended::Infinite
        );
        let call = ConvexTest::call(1.0).unwrap();
        assert_eq!(
            call.integrate_against_second_derivative(|x| x * x),
            Extended::Finite(1.0)
        );
        assert_eq!(ConvexTest::square().total_mass(), Extended::Infinite);
        assert_eq!(abs.total_mass(), Extended::Finite(2.0));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(parse_psi_spec("\"abs\"").unwrap(), ConvexTest::abs());
        assert_eq!(
            parse_psi_spec("{\"power\": 3}").unwrap(),
            ConvexTest::power(3.0).unwrap()
        );
        assert_eq!(parse_psi_spec("{\"call\": 1}").unwrap(), ConvexTest::call(1.0).unwrap());
        let c = parse_psi_spec("{\"atoms\": [[0, 2]], \"left_slope_at_zero\": -1}").unwrap();
        assert_eq!(c.eval_psi(-4.0).unwrap(), 4.0);
        let q = parse_psi_spec("{\"density_poly_coeffs\": [2]}").unwrap();
        assert_eq!(q.eval_psi(3.0).unwrap(), 9.0);
    }
}
