//! Experiment configuration: which potentials and test functions to run,
//! with simulation and quadrature settings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::convex::{ConvexTest, PsiSpec};
use crate::embedding::MIN_STEPS;
use crate::error::{Error, Result};
use crate::potentials::{
    builtin_potential, log_mixture_slope_map, mixture_slope_map, potential_from_slope_map, Potential, SlopeMap,
};
use crate::verifier::AppendixBounds;

pub const DEFAULT_A: f64 = 1.0;
pub const DEFAULT_N_PATHS: usize = 100_000;
pub const DEFAULT_N_STEPS: usize = 2048;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_P_LIST: [f64; 3] = [1.5, 2.0, 4.0];
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-10;
pub const DEFAULT_SANDWICH_GRID: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
pub const DEFAULT_OUTPUT_DIR: &str = "bl-out";

/// A potential, either from the built-in catalog or generated by a slope map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PotentialSpec {
    Family {
        family: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        params: BTreeMap<String, f64>,
    },
    SlopeMap {
        slope_map: SlopeMapSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SlopeMapSpec {
    /// k(x) = Σ cᵢ xⁱ.
    Polynomial {
        coeffs: Vec<f64>,
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        extra_alphas: Vec<f64>,
    },
    /// Two-atom log-mixture; α = p², β = b, and α = a as an extra upper check
    /// unless `extra_alphas` is given.
    LogMixture {
        p: f64,
        q: f64,
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        extra_alphas: Option<Vec<f64>>,
    },
    /// General finite mixing measure, atoms as (weight, κ).
    Mixture {
        atoms: Vec<(f64, f64)>,
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        extra_alphas: Vec<f64>,
    },
}

/// A potential ready for transport, with the reference variance it runs at.
#[derive(Debug, Clone)]
pub struct ResolvedPotential {
    pub potential: Potential,
    pub a: f64,
    /// Present for slope-map potentials, whose reference variance is 1/α.
    pub appendix: Option<AppendixBounds>,
}

impl PotentialSpec {
    pub fn family(name: &str) -> Self {
        Self::Family {
            family: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    /// Builds the potential. `a` is used for Gaussian-reference potentials;
    /// slope-map potentials run at A = 1/α.
    pub fn resolve(&self, a: f64) -> Result<ResolvedPotential> {
        let (potential, extra) = match self {
            PotentialSpec::Family { family, params } => {
                let p = builtin_potential(family, params)?;
                let extra = match family.as_str() {
                    "log_mixture" => vec![params["a"]],
                    _ => vec![],
                };
                (p, extra)
            }
            PotentialSpec::SlopeMap { slope_map } => {
                let (k, extra) = slope_map.build()?;
                (potential_from_slope_map(&k)?, extra)
            }
        };
        Ok(match potential.slope_map() {
            Some(k) => {
                let bounds = AppendixBounds {
                    alpha: k.alpha,
                    beta: k.beta,
                    extra_alphas: extra,
                    require_slope_bounds: true,
                };
                ResolvedPotential {
                    a: 1.0 / k.alpha,
                    appendix: Some(bounds),
                    potential,
                }
            }
            None => ResolvedPotential {
                potential,
                a,
                appendix: None,
            },
        })
    }
}

impl SlopeMapSpec {
    fn build(&self) -> Result<(SlopeMap, Vec<f64>)> {
        Ok(match self {
            SlopeMapSpec::Polynomial {
                coeffs,
                alpha,
                beta,
                extra_alphas,
            } => (
                SlopeMap::polynomial(coeffs.clone(), *alpha, *beta)?,
                extra_alphas.clone(),
            ),
            SlopeMapSpec::LogMixture {
                p,
                q,
                a,
                b,
                extra_alphas,
            } => (
                log_mixture_slope_map(*p, *q, *a, *b)?,
                extra_alphas.clone().unwrap_or_else(|| vec![*a]),
            ),
            SlopeMapSpec::Mixture {
                atoms,
                alpha,
                beta,
                extra_alphas,
            } => (mixture_slope_map(atoms, *alpha, *beta)?, extra_alphas.clone()),
        })
    }
}

/// Parses a JSON potential specification and builds it at reference variance `a`.
pub fn parse_potential_spec(text: &str, a: f64) -> Result<ResolvedPotential> {
    let spec: PotentialSpec = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    spec.resolve(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potentials: Vec<PotentialSpec>,
    /// Reference variance; ignored for slope-map potentials.
    #[serde(rename = "A", default = "default_a")]
    pub a: f64,
    pub psis: Vec<PsiSpec>,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_quadrature_tol")]
    pub quadrature_tol: f64,
    #[serde(default = "default_sandwich_grid")]
    pub sandwich_grid: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

fn default_a() -> f64 {
    DEFAULT_A
}
fn default_p_list() -> Vec<f64> {
    DEFAULT_P_LIST.to_vec()
}
fn default_n_paths() -> usize {
    DEFAULT_N_PATHS
}
fn default_n_steps() -> usize {
    DEFAULT_N_STEPS
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_quadrature_tol() -> f64 {
    DEFAULT_QUADRATURE_TOL
}
fn default_sandwich_grid() -> Vec<f64> {
    DEFAULT_SANDWICH_GRID.to_vec()
}
fn default_output_dir() -> String {
    DEFAULT_OUTPUT_DIR.to_string()
}

impl ExperimentConfig {
    /// Default settings with the given potentials and test functions.
    pub fn with(potentials: Vec<PotentialSpec>, psis: Vec<PsiSpec>) -> Self {
        Self {
            potentials,
            a: DEFAULT_A,
            psis,
            p_list: default_p_list(),
            n_paths: DEFAULT_N_PATHS,
            n_steps: DEFAULT_N_STEPS,
            seed: DEFAULT_SEED,
            quadrature_tol: DEFAULT_QUADRATURE_TOL,
            sandwich_grid: default_sandwich_grid(),
            output_dir: default_output_dir(),
        }
    }

    /// Zero, linear, quadratic, abs, the double well and the log-mixture,
    /// against |x|, x², |x|³, (x − 1)⁺ and max(|x| − 1, 0).
    pub fn default_matrix() -> Self {
        let one = |name: &str, key: &str, v: f64| PotentialSpec::Family {
            family: name.to_string(),
            params: BTreeMap::from([(key.to_string(), v)]),
        };
        let potentials = vec![
            PotentialSpec::family("zero"),
            one("linear", "c", 1.0),
            one("quadratic", "c", 1.0),
            one("abs", "c", 1.0),
            PotentialSpec::family("double_well"),
            PotentialSpec::SlopeMap {
                slope_map: SlopeMapSpec::LogMixture {
                    p: 0.5,
                    q: 0.5 * std::f64::consts::SQRT_2,
                    a: 1.0,
                    b: 2.0,
                    extra_alphas: None,
                },
            },
        ];
        let psis = vec![
            PsiSpec::Named("abs".into()),
            PsiSpec::Named("square".into()),
            PsiSpec::Power { power: 3.0 },
            PsiSpec::Call { call: 1.0 },
            PsiSpec::Corridor { corridor: 1.0 },
        ];
        Self::with(potentials, psis)
    }

    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Checks the settings and that every potential and ψ builds.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("A must be positive and finite, got {}", self.a));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if self.n_steps < MIN_STEPS {
            return bad(format!("n_steps must be at least {MIN_STEPS}, got {}", self.n_steps));
        }
        if self.p_list.is_empty() {
            return bad("p_list must be nonempty".into());
        }
        if let Some(p) = self.p_list.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
            return bad(format!("every p must lie in (1, inf), got {p}"));
        }
        if !(self.quadrature_tol > 0.0 && self.quadrature_tol < 1e-3) {
            return bad(format!(
                "quadrature_tol must lie in (0, 1e-3), got {}",
                self.quadrature_tol
            ));
        }
        if self.sandwich_grid.iter().any(|x| !x.is_finite()) {
            return bad("sandwich_grid must be finite".into());
        }
        if self.output_dir.trim().is_empty() {
            return bad("output_dir must be nonempty".into());
        }
        if self.potentials.is_empty() || self.psis.is_empty() {
            return bad("need at least one potential and one psi".into());
        }
        for (i, p) in self.potentials.iter().enumerate() {
            p.resolve(self.a)
                .map_err(|e| Error::Config(format!("potentials[{i}]: {e}")))?;
        }
        self.build_psis()?;
        Ok(())
    }

    pub fn resolve_potentials(&self) -> Result<Vec<ResolvedPotential>> {
        self.potentials
            .iter()
            .enumerate()
            .map(|(i, p)| {
                p.resolve(self.a)
                    .map_err(|e| Error::Config(format!("potentials[{i}]: {e}")))
            })
            .collect()
    }

    pub fn build_psis(&self) -> Result<Vec<ConvexTest>> {
        self.psis
            .iter()
            .enumerate()
            .map(|(i, s)| s.build().map_err(|e| Error::Config(format!("psis[{i}]: {e}"))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(r#"{"potentials":[{"family":"zero"}],"psis":["abs"]}"#).unwrap();
        assert_eq!(cfg.a, 1.0);
        assert_eq!(cfg.n_paths, 100_000);
        assert_eq!(cfg.n_steps, 2048);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.p_list, vec![1.5, 2.0, 4.0]);
        assert_eq!(cfg.quadrature_tol, 1e-10);
    }

    #[test]
    fn default_matrix_round_trips() {
        let cfg = ExperimentConfig::default_matrix();
        cfg.validate().unwrap();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn invalid_settings_rejected() {
        for text in [
            r#"{"potentials":[{"family":"zero"}],"psis":["abs"],"n_paths":0}"#,
            r#"{"potentials":[{"family":"zero"}],"psis":["abs"],"p_list":[1.0]}"#,
            r#"{"potentials":[{"family":"zero"}],"psis":["abs"],"A":-1}"#,
            r#"{"potentials":[{"family":"nope"}],"psis":["abs"]}"#,
            r#"{"potentials":[{"family":"zero"}],"psis":["cosh"]}"#,
            r#"{"potentials":[],"psis":["abs"]}"#,
            r#"{"potentials":[{"family":"zero"}],"psis":["abs"],"bogus":1}"#,
            r#"{"potentials":[{"family":"zero"}]"#,
        ] {
            assert!(
                matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn slope_map_entries_fix_their_variance() {
        let r = parse_potential_spec(
            r#"{"slope_map":{"kind":"polynomial","coeffs":[0,1,0,1],"alpha":1}}"#,
            4.0,
        )
        .unwrap();
        assert_eq!(r.a, 1.0);
        let r = parse_potential_spec(
            r#"{"slope_map":{"kind":"log_mixture","p":0.5,"q":0.7071067811865476,"a":1,"b":2}}"#,
            1.0,
        )
        .unwrap();
        assert_eq!(r.a, 4.0);
        let b = r.appendix.unwrap();
        assert_eq!((b.alpha, b.beta, b.extra_alphas), (0.25, Some(2.0), vec![1.0]));
        assert_eq!(parse_potential_spec(r#"{"family":"abs"}"#, 2.0).unwrap().a, 2.0);
    }
}
