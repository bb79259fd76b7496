//! Machine-readable output: the JSON experiment report (every real number as
//! a decimal string with 17 significant digits) and the summary CSV.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::convex::Extended;
use crate::embedding::{LawCheck, TBoundCheck, WaldCheck};
use crate::error::{Error, Result};
use crate::local_time::AuxiliaryCheck;
use crate::potentials::Reference;
use crate::transport::{GCheck, GPrimeBound};
use crate::verifier::{SandwichPoint, VerificationReport};

/// 17 significant digits in scientific notation; round-trips every f64.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_number(s: &str) -> Option<f64> {
    match s {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Serde adapter for `f64` as a decimal string. Plain JSON numbers are
/// accepted when reading.
pub mod num {
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_number(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = f64;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or a decimal string")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                super::parse_number(v).ok_or_else(|| E::custom(format!("not a number: `{v}`")))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
        }
        d.deserialize_any(Visitor)
    }
}

/// Serde adapter for `Option<f64>`: `null` or a decimal string.
pub mod opt_num {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_str(&super::format_number(*x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::num")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// Serde adapter for `Vec<f64>`.
pub mod vec_num {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|x| super::format_number(*x))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::num")] f64);
        Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    #[serde(with = "num")]
    pub a: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    #[serde(with = "vec_num")]
    pub p_list: Vec<f64>,
    #[serde(with = "num")]
    pub quadrature_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardSummary {
    pub points: usize,
    #[serde(with = "num")]
    pub min_ratio_slack: f64,
    #[serde(with = "num")]
    pub min_density_slack: f64,
    pub violations: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSummary {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    #[serde(with = "num")]
    pub mean_g: f64,
    pub clamp_count: usize,
    pub wald: WaldCheck,
    pub t_bound: TBoundCheck,
    pub law: LawCheck,
    pub sandwich: Vec<SandwichPoint>,
    pub auxiliary: Vec<AuxiliaryCheck>,
}

impl EmbeddingSummary {
    pub fn pass(&self) -> bool {
        self.wald.pass
            && self.t_bound.pass
            && self.law.pass
            && self.sandwich.iter().all(|s| s.pass())
            && self.auxiliary.iter().all(|a| a.pass)
    }
}

/// Per-potential transport diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSummary {
    pub label: String,
    pub reference: Reference,
    #[serde(with = "num")]
    pub a: f64,
    #[serde(with = "num")]
    pub log_normalizer: f64,
    #[serde(with = "num")]
    pub mean: f64,
    #[serde(with = "num")]
    pub variance: f64,
    pub g_prime_bound: GPrimeBound,
    /// Only for convex Gaussian-reference potentials.
    pub hazard: Option<HazardSummary>,
    pub g_nonnegative: Option<GCheck>,
    pub embedding: Option<EmbeddingSummary>,
}

impl PotentialSummary {
    pub fn pass(&self) -> bool {
        self.g_prime_bound.pass
            && self.hazard.as_ref().is_none_or(|h| h.pass)
            && self.g_nonnegative.as_ref().is_none_or(|g| g.pass)
            && self.embedding.as_ref().is_none_or(|e| e.pass())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub settings: RunSettings,
    pub potentials: Vec<PotentialSummary>,
    pub entries: Vec<VerificationReport>,
    pub all_pass: bool,
}

impl ExperimentReport {
    pub fn new(settings: RunSettings, potentials: Vec<PotentialSummary>, entries: Vec<VerificationReport>) -> Self {
        let all_pass = potentials.iter().all(|p| p.pass()) && entries.iter().all(|e| e.all_pass());
        Self {
            settings,
            potentials,
            entries,
            all_pass,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per (potential, ψ, p).
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for e in &self.entries {
            for b in &e.bl3 {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    csv_field(&e.potential),
                    csv_field(&e.psi),
                    format_number(b.p),
                    format_number(e.a),
                    format_number(e.var_x),
                    ext(e.lhs),
                    ext(e.rhs),
                    opt(e.bl1.margin),
                    ext(e.bl2_correction),
                    opt(e.bl2.margin),
                    ext(b.constant),
                    opt(b.check.margin),
                    e.bl1.pass,
                    e.bl2.pass,
                    b.check.pass,
                );
            }
        }
        out
    }
}

pub const SUMMARY_HEADER: &str =
    "potential,psi,p,A,var_x,lhs,rhs,bl1_margin,bl2_correction,bl2_margin,bl3_constant,bl3_margin,bl1_pass,bl2_pass,bl3_pass";

fn ext(v: Extended) -> String {
    format_number(v.to_f64())
}

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses a JSON report written by [`ExperimentReport::to_json`].
pub fn parse_report(text: &str) -> Result<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_through_strings() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0, f64::INFINITY] {
            let s = format_number(v);
            assert_eq!(parse_number(&s), Some(v), "{s}");
        }
        assert_eq!(format_number(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("power(3)"), "power(3)");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }

    #[test]
    fn malformed_report_rejected() {
        assert!(parse_report("{").is_err());
        assert!(parse_report("{}").is_err());
    }
}
