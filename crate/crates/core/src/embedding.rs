//! Bass's Skorokhod embedding: the Clark integrand a(s, y) = E[g′(y + W_{1−s})],
//! simulated stopping times T = ∫₀¹ a(s, W_s)² ds and the embedded values
//! B(T) = g(W₁) − E[g(W₁)].

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{std_normal_pdf, std_normal_quantile};
use crate::quadrature::{integrate_with_breaks, GaussHermite, Tolerance};
use crate::transport::{TransportMap, G_DOMAIN};

pub const HERMITE_NODES: usize = 64;
pub const TABLE_S: usize = 256;
pub const TABLE_Y: usize = 1024;
/// Half-width of the tabulated y range.
pub const TABLE_Y_HALF_WIDTH: f64 = 8.0;
/// Below this residual time the smoothing is skipped and g′ used directly.
const DIRECT_RESIDUAL: f64 = 1e-6;
pub const MIN_STEPS: usize = 16;
/// Environment variable capping the simulation worker count.
pub const THREADS_ENV: &str = "BL_EMBED_THREADS";

/// Quadrature rule for T along a discretized path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRule {
    #[default]
    Trapezoid,
    /// Diagnostics only: exposes the sensitivity to discretization.
    LeftEndpoint,
}

/// a(s, y) for one transport map: direct Gauss–Hermite evaluation plus a
/// tensor table for bulk path evaluation.
pub struct ClarkIntegrand<'a> {
    map: &'a TransportMap,
    hermite: GaussHermite,
    table: Vec<f64>,
    mean_g: f64,
}

impl<'a> ClarkIntegrand<'a> {
    pub fn new(map: &'a TransportMap) -> Self {
        let hermite = GaussHermite::new(HERMITE_NODES);
        let mut c = Self {
            map,
            hermite,
            table: Vec::new(),
            mean_g: 0.0,
        };
        c.mean_g = c.compute_mean_of_g();
        let mut table = vec![0.0; TABLE_S * TABLE_Y];
        for (i, row) in table.chunks_mut(TABLE_Y).enumerate() {
            let s = i as f64 / (TABLE_S - 1) as f64;
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = c.smoothed(s, table_y(j), |x| map.transport_g_prime_fast(x));
            }
        }
        c.table = table;
        c
    }

    pub fn transport(&self) -> &TransportMap {
        self.map
    }

    fn smoothed<F: Fn(f64) -> f64>(&self, s: f64, y: f64, g_prime: F) -> f64 {
        let residual = 1.0 - s;
        if residual < DIRECT_RESIDUAL {
            return g_prime(y);
        }
        self.hermite.expectation(y, residual.sqrt(), g_prime)
    }

    /// E[g′(y + √(1 − s)·Z)] by Gauss–Hermite with exact g′.
    pub fn clark_integrand(&self, s: f64, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(crate::error::invalid("s", format!("must lie in [0, 1], got {s}")));
        }
        Ok(self.smoothed(s, y, |x| self.map.transport_g_prime(x)))
    }

    /// Bilinear interpolation in the precomputed table; falls back to the
    /// direct rule outside the tabulated y range.
    pub fn clark_integrand_tabulated(&self, s: f64, y: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let ts = s * (TABLE_S - 1) as f64;
        let i = (ts.floor() as usize).min(TABLE_S - 2);
        self.interpolate(i, ts - i as f64, y)
            .unwrap_or_else(|| self.smoothed(s, y, |x| self.map.transport_g_prime_fast(x)))
    }

    #[inline]
    fn interpolate(&self, row: usize, ws: f64, y: f64) -> Option<f64> {
        let ty = (y + TABLE_Y_HALF_WIDTH) / table_y_step();
        if !(ty >= 0.0 && ty <= (TABLE_Y - 1) as f64) {
            return None;
        }
        let j = (ty.floor() as usize).min(TABLE_Y - 2);
        let wy = ty - j as f64;
        let r0 = &self.table[row * TABLE_Y..];
        let r1 = &self.table[(row + 1) * TABLE_Y..];
        let lo = r0[j] + wy * (r0[j + 1] - r0[j]);
        let hi = r1[j] + wy * (r1[j + 1] - r1[j]);
        Some(lo + ws * (hi - lo))
    }

    /// E[g(W₁)] = ∫ g(z)φ(z) dz, which equals the mean of μ.
    pub fn mean_of_g(&self) -> f64 {
        self.mean_g
    }

    fn compute_mean_of_g(&self) -> f64 {
        // g′ has kinks where the potential does; split there.
        let mut breaks = vec![-G_DOMAIN, 0.0, G_DOMAIN];
        for k in self.map.potential().kinks() {
            if let Ok(z) = std_normal_quantile(self.map.mu_cdf(*k)) {
                if z.abs() < G_DOMAIN {
                    breaks.push(z);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let tol = Tolerance::absolute(1e-14).with_rel(1e-13);
        integrate_with_breaks(|z| self.map.transport_g(z) * std_normal_pdf(z), &breaks, tol).value
    }

    /// Simulates `n_paths` Brownian paths on {i/n_steps} and records
    /// (T, B(T), W₁) for each. Path i draws its increments from ChaCha8 stream
    /// i under `seed`, so the result does not depend on the worker count.
    pub fn simulate(&self, n_paths: usize, n_steps: usize, seed: u64, rule: TimeRule) -> Result<EmbeddingEnsemble> {
        if n_paths == 0 {
            return Err(crate::error::invalid("n_paths", "must be at least 1"));
        }
        if n_steps < MIN_STEPS {
            return Err(crate::error::invalid(
                "n_steps",
                format!("must be at least {MIN_STEPS}"),
            ));
        }
        let a = self.map.variance_reference();
        let h = 1.0 / n_steps as f64;
        let sd = h.sqrt();
        // Table row and weight for each time node.
        let rows: Vec<(usize, f64)> = (0..=n_steps)
            .map(|i| {
                let ts = i as f64 * h * (TABLE_S - 1) as f64;
                let r = (ts.floor() as usize).min(TABLE_S - 2);
                (r, ts - r as f64)
            })
            .collect();
        let run = |path: usize| -> Sample {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(path as u64);
            let a_at = |i: usize, w: f64| -> f64 {
                let (r, ws) = rows[i];
                self.interpolate(r, ws, w)
                    .unwrap_or_else(|| self.smoothed(i as f64 * h, w, |x| self.map.transport_g_prime_fast(x)))
            };
            let mut w = 0.0;
            let a0 = a_at(0, 0.0);
            let mut sum = match rule {
                TimeRule::Trapezoid => 0.5 * a0 * a0,
                TimeRule::LeftEndpoint => a0 * a0,
            };
            for i in 1..=n_steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                w += sd * z;
                let v = a_at(i, w);
                let v2 = v * v;
                sum += match (rule, i == n_steps) {
                    (TimeRule::Trapezoid, true) => 0.5 * v2,
                    (TimeRule::LeftEndpoint, true) => 0.0,
                    _ => v2,
                };
            }
            Sample {
                t: sum * h,
                bt: self.map.transport_g(w) - self.mean_g,
                w1: w,
            }
        };
        let samples: Vec<Sample> = match worker_cap() {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::error::invalid(THREADS_ENV, e.to_string()))?
                .install(|| (0..n_paths).into_par_iter().map(run).collect()),
            None => (0..n_paths).into_par_iter().map(run).collect(),
        };
        let clamp_count = samples.iter().filter(|s| s.t > a).count();
        Ok(EmbeddingEnsemble {
            samples,
            n_steps,
            seed,
            a,
            mean_g: self.mean_g,
            clamp_count,
            rule,
            provenance: self.map.provenance(),
        })
    }
}

fn worker_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|n| *n > 0)
}

#[inline]
fn table_y_step() -> f64 {
    2.0 * TABLE_Y_HALF_WIDTH / (TABLE_Y - 1) as f64
}

#[inline]
fn table_y(j: usize) -> f64 {
    -TABLE_Y_HALF_WIDTH + j as f64 * table_y_step()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    #[serde(rename = "T")]
    #[serde(with = "crate::report::num")]
    pub t: f64,
    #[serde(with = "crate::report::num")]
    pub bt: f64,
    #[serde(with = "crate::report::num")]
    pub w1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingEnsemble {
    samples: Vec<Sample>,
    n_steps: usize,
    seed: u64,
    a: f64,
    mean_g: f64,
    clamp_count: usize,
    rule: TimeRule,
    provenance: String,
}

impl EmbeddingEnsemble {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn variance_reference(&self) -> f64 {
        self.a
    }
    pub fn mean_g(&self) -> f64 {
        self.mean_g
    }
    /// Paths whose discretized T exceeded A.
    pub fn clamp_count(&self) -> usize {
        self.clamp_count
    }
    pub fn rule(&self) -> TimeRule {
        self.rule
    }
    /// Identifies the transport map the ensemble was simulated from.
    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Trapezoid error allowance 2√A/n_steps.
    pub fn discretization_budget(&self) -> f64 {
        2.0 * self.a.sqrt() / self.n_steps as f64
    }

    /// CSV with header `path,T,bt,w1`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.samples.len() + 1));
        out.push_str("path,T,bt,w1\n");
        for (i, s) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{i},{:.16e},{:.16e},{:.16e}", s.t, s.bt, s.w1);
        }
        out
    }
}

/// Parses the CSV written by [`EmbeddingEnsemble::to_csv`]. Paths must be
/// numbered 0, 1, 2, … in order.
pub fn read_ensemble_csv(text: &str) -> Result<Vec<Sample>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == "path,T,bt,w1" => {}
        _ => {
            return Err(Error::Csv {
                line: 1,
                reason: "expected header `path,T,bt,w1`".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Csv {
                line,
                reason: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let path: usize = fields[0].parse().map_err(|_| Error::Csv {
            line,
            reason: format!("bad path index `{}`", fields[0]),
        })?;
        if path != out.len() {
            return Err(Error::Csv {
                line,
                reason: format!("path index {path} out of order"),
            });
        }
        let mut vals = [0.0f64; 3];
        for (v, f) in vals.iter_mut().zip(&fields[1..]) {
            *v = f.parse().map_err(|_| Error::Csv {
                line,
                reason: format!("bad number `{f}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line,
                    reason: format!("non-finite value `{f}`"),
                });
            }
        }
        if vals[0] < 0.0 {
            return Err(Error::Csv {
                line,
                reason: "negative stopping time".into(),
            });
        }
        out.push(Sample {
            t: vals[0],
            bt: vals[1],
            w1: vals[2],
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaldCheck {
    #[serde(with = "crate::report::num")]
    pub mean_t: f64,
    #[serde(with = "crate::report::num")]
    pub std_error: f64,
    #[serde(with = "crate::report::num")]
    pub bias_budget: f64,
    #[serde(with = "crate::report::num")]
    pub var_x: f64,
    pub pass: bool,
}

/// E[T] = var(X): pass iff |mean T − var_x| ≤ 3·SE + 2√A/n_steps.
pub fn wald_check(e: &EmbeddingEnsemble, var_x: f64) -> Result<WaldCheck> {
    let ts: Vec<f64> = e.samples.iter().map(|s| s.t).collect();
    let m = crate::local_time::McEstimate::from_values(&ts)?;
    let budget = e.discretization_budget();
    Ok(WaldCheck {
        mean_t: m.estimate,
        std_error: m.std_error,
        bias_budget: budget,
        var_x,
        pass: (m.estimate - var_x).abs() <= 3.0 * m.std_error + budget,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TBoundCheck {
    #[serde(with = "crate::report::num")]
    pub max_t: f64,
    #[serde(with = "crate::report::num")]
    pub bound: f64,
    pub violation_count: usize,
    pub pass: bool,
}

/// T ≤ A up to 1e-9 relative and the discretization slack.
pub fn t_bound_check(e: &EmbeddingEnsemble) -> Result<TBoundCheck> {
    if e.samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let bound = e.a * (1.0 + 1e-9) + e.discretization_budget();
    let max_t = e.samples.iter().map(|s| s.t).fold(f64::NEG_INFINITY, f64::max);
    let violation_count = e.samples.iter().filter(|s| s.t > bound).count();
    Ok(TBoundCheck {
        max_t,
        bound,
        violation_count,
        pass: violation_count == 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawCheck {
    #[serde(with = "crate::report::num")]
    pub ks_distance: f64,
    #[serde(with = "crate::report::num")]
    pub threshold: f64,
    pub pass: bool,
}

/// Two-sided Kolmogorov–Smirnov distance between the law of bt + mean_g and
/// F_μ, against the 1% critical value 1.63/√n.
pub fn embedded_law_check(e: &EmbeddingEnsemble, map: &TransportMap) -> Result<LawCheck> {
    if e.samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut xs: Vec<f64> = e.samples.iter().map(|s| s.bt + e.mean_g).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = map.mu_cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let threshold = 1.63 / n.sqrt();
    Ok(LawCheck {
        ks_distance: d,
        threshold,
        pass: d <= threshold,
    })
}
