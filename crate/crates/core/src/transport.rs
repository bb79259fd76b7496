//! The monotone transport map g = F_μ⁻¹ ∘ Φ from N(0, 1) to μ.
//!
//! μ has unnormalized density d(x) = exp(−(φ(x) − φ_min)) where φ is the
//! total exponent: V(x) + x²/(2A) for a Gaussian-reference potential and U(x)
//! for a Lebesgue one. F_μ is represented by cumulative cell masses on a
//! window around the mode, with exact Gauss–Legendre evaluation inside a
//! cell. Lower-tail and upper-tail masses are kept separately so that both
//! F_μ⁻¹(u) for small u and F_μ⁻¹(1 − s) for small s keep full precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{std_normal_cdf, std_normal_pdf, std_normal_quantile, SQRT_2PI};
use crate::potentials::{Potential, Reference};
use crate::quadrature::{gl10, gl15, integrate, Neumaier, Tolerance};

/// Number of uniform cells before kinks are inserted.
pub const CELL_COUNT: usize = 4096;
/// Window edges sit where the density has dropped by e^{−DROP} from its peak.
const DENSITY_DROP: f64 = 100.0;
/// Hard cap on the window half-width, in units of √A, beyond the mode.
const WINDOW_CAP: f64 = 16.0;
/// Relative mass allowed at a capped window boundary.
const BOUNDARY_MASS_LIMIT: f64 = 1e-6;
/// g is evaluated exactly for |x| ≤ G_DOMAIN and extrapolated linearly beyond.
pub const G_DOMAIN: f64 = 12.0;
const FAST_TABLE_SIZE: usize = 8192;
/// Relative slack of the one-sided lemma checks.
pub const HAZARD_SLACK: f64 = 1e-9;
pub const G_NONNEGATIVE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct TransportMap {
    potential: Potential,
    a: f64,
    sqrt_a: f64,
    phi_min: f64,
    nodes: Vec<f64>,
    masses: Vec<f64>,
    cum_left: Vec<f64>,
    cum_right: Vec<f64>,
    total: f64,
    log_z: f64,
    mean: f64,
    var: f64,
    tol: f64,
    fast_g_prime: Vec<f64>,
}

/// A value of g together with whether it was obtained by extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub extrapolated: bool,
}

impl TransportMap {
    /// Builds F_μ, Z, the moments of μ and a fast g′ table.
    pub fn build(potential: &Potential, a: f64, tol: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(crate::error::invalid("A", format!("must be positive, got {a}")));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(crate::error::invalid("tol", format!("must be positive, got {tol}")));
        }
        let sqrt_a = a.sqrt();
        let exponent = |x: f64| total_exponent(potential, a, x);

        let (mode, phi_min) = find_mode(&exponent, sqrt_a)?;
        let lo = window_edge(&exponent, mode, phi_min, -sqrt_a)?;
        let hi = window_edge(&exponent, mode, phi_min, sqrt_a)?;

        let mut nodes: Vec<f64> = (0..=CELL_COUNT)
            .map(|i| lo + (hi - lo) * i as f64 / CELL_COUNT as f64)
            .collect();
        nodes.extend(potential.kinks().iter().copied().filter(|k| *k > lo && *k < hi));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();

        let density = |x: f64| (-(exponent(x) - phi_min)).exp();
        let cell_tol = Tolerance::absolute(1e-18).with_rel(1e-15);
        let mut masses = Vec::with_capacity(nodes.len() - 1);
        for w in nodes.windows(2) {
            let r = integrate(density, w[0], w[1], cell_tol);
            if !r.value.is_finite() {
                return Err(Error::NonFinitePotential(0.5 * (w[0] + w[1])));
            }
            if !r.converged {
                return Err(Error::DivergentNormalizer(format!(
                    "cell [{}, {}] did not converge after {} refinement levels",
                    w[0], w[1], cell_tol.max_depth
                )));
            }
            masses.push(r.value);
        }

        let mut cum_left = Vec::with_capacity(masses.len() + 1);
        let mut acc = Neumaier::default();
        cum_left.push(0.0);
        for m in &masses {
            acc.add(*m);
            cum_left.push(acc.sum());
        }
        let mut cum_right = vec![0.0; masses.len() + 1];
        let mut acc = Neumaier::default();
        for (i, m) in masses.iter().enumerate().rev() {
            acc.add(*m);
            cum_right[i] = acc.sum();
        }
        let total = cum_left[masses.len()];
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DivergentNormalizer(format!("total mass {total}")));
        }

        let rule = gl15();
        let mut first = Neumaier::default();
        for w in nodes.windows(2) {
            first.add(rule.apply(&|x: f64| x * density(x), w[0], w[1]));
        }
        let mean = first.sum() / total;
        let mut second = Neumaier::default();
        for w in nodes.windows(2) {
            second.add(rule.apply(&|x: f64| (x - mean) * (x - mean) * density(x), w[0], w[1]));
        }
        let var = second.sum() / total;

        let log_reference = match potential.reference() {
            Reference::Gaussian => (SQRT_2PI * sqrt_a).ln(),
            Reference::Lebesgue => 0.0,
        };
        let log_z = total.ln() - phi_min - log_reference;

        let mut map = Self {
            potential: potential.clone(),
            a,
            sqrt_a,
            phi_min,
            nodes,
            masses,
            cum_left,
            cum_right,
            total,
            log_z,
            mean,
            var,
            tol,
            fast_g_prime: Vec::new(),
        };
        map.fast_g_prime = (0..=FAST_TABLE_SIZE)
            .map(|j| map.transport_g_prime(fast_node(j)))
            .collect();
        Ok(map)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Reference variance A.
    pub fn variance_reference(&self) -> f64 {
        self.a
    }

    pub fn sqrt_a(&self) -> f64 {
        self.sqrt_a
    }

    /// Normalizer Z: ∫e^{−V}dν for a Gaussian reference, ∫e^{−U}dx otherwise.
    pub fn normalizer(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_z
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.var
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// [lo, hi] outside of which μ carries negligible mass.
    pub fn window(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// Identifies the measure an ensemble was simulated from.
    pub fn provenance(&self) -> String {
        format!("{}|A={:.17e}|logZ={:.17e}", self.potential.label(), self.a, self.log_z)
    }

    #[inline]
    fn unnormalized_density(&self, x: f64) -> f64 {
        (-(total_exponent(&self.potential, self.a, x) - self.phi_min)).exp()
    }

    /// F_μ′(x) = e^{−V(x)}ν′(x)/Z.
    pub fn mu_density(&self, x: f64) -> f64 {
        self.unnormalized_density(x) / self.total
    }

    fn cell_of(&self, x: f64) -> usize {
        let n = self.masses.len();
        let i = self.nodes.partition_point(|v| *v <= x);
        i.saturating_sub(1).min(n - 1)
    }

    /// ∫_{x_i}^{y} d for y inside cell i.
    fn partial_left(&self, i: usize, y: f64) -> f64 {
        gl10().apply(&|x: f64| self.unnormalized_density(x), self.nodes[i], y)
    }

    /// ∫_{y}^{x_{i+1}} d for y inside cell i.
    fn partial_right(&self, i: usize, y: f64) -> f64 {
        gl10().apply(&|x: f64| self.unnormalized_density(x), y, self.nodes[i + 1])
    }

    /// F_μ(x).
    pub fn mu_cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.window();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let i = self.cell_of(x);
        if self.cum_left[i] <= 0.5 * self.total {
            (self.cum_left[i] + self.partial_left(i, x)) / self.total
        } else {
            1.0 - (self.cum_right[i + 1] + self.partial_right(i, x)) / self.total
        }
    }

    /// 1 − F_μ(x) without cancellation in the upper tail.
    pub fn mu_survival(&self, x: f64) -> f64 {
        let (lo, hi) = self.window();
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        let i = self.cell_of(x);
        if self.cum_right[i + 1] <= 0.5 * self.total {
            (self.cum_right[i + 1] + self.partial_right(i, x)) / self.total
        } else {
            1.0 - (self.cum_left[i] + self.partial_left(i, x)) / self.total
        }
    }

    /// F_μ⁻¹(u) for u in (0, 1).
    pub fn mu_quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange { name: "u", value: u });
        }
        Ok(if u <= 0.5 {
            self.invert_lower(u * self.total)
        } else {
            self.invert_upper((1.0 - u) * self.total)
        })
    }

    /// Solves ∫_{lo}^{y} d = target.
    fn invert_lower(&self, target: f64) -> f64 {
        let n = self.masses.len();
        let i = self
            .cum_left
            .partition_point(|c| *c <= target)
            .saturating_sub(1)
            .min(n - 1);
        let r = (target - self.cum_left[i]).max(0.0);
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let m = self.masses[i];
        let guess = if m > 0.0 { a + (b - a) * (r / m).min(1.0) } else { a };
        self.newton_in_cell(
            guess,
            a,
            b,
            |y| self.partial_left(i, y) - r,
            |y| self.unnormalized_density(y),
        )
    }

    /// Solves ∫_{y}^{hi} d = target.
    fn invert_upper(&self, target: f64) -> f64 {
        let n = self.masses.len();
        // cum_right is nonincreasing; find i with cum_right[i+1] ≤ target < cum_right[i].
        let i = self
            .cum_right
            .partition_point(|c| *c > target)
            .saturating_sub(1)
            .min(n - 1);
        let r = (target - self.cum_right[i + 1]).max(0.0);
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let m = self.masses[i];
        let guess = if m > 0.0 { b - (b - a) * (r / m).min(1.0) } else { b };
        self.newton_in_cell(
            guess,
            a,
            b,
            |y| r - self.partial_right(i, y),
            |y| self.unnormalized_density(y),
        )
    }

    /// Safeguarded Newton for an increasing residual on [a, b].
    fn newton_in_cell<R, D>(&self, guess: f64, a: f64, b: f64, residual: R, slope: D) -> f64
    where
        R: Fn(f64) -> f64,
        D: Fn(f64) -> f64,
    {
        let (mut lo, mut hi) = (a, b);
        let mut y = guess.clamp(a, b);
        for _ in 0..60 {
            let f = residual(y);
            if f == 0.0 {
                return y;
            }
            if f > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let d = slope(y);
            let mut next = if d > 0.0 { y - f / d } else { f64::NAN };
            if !(next >= lo && next <= hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - y).abs();
            y = next;
            if step <= 2.0 * f64::EPSILON * y.abs().max(self.sqrt_a) || hi - lo <= f64::EPSILON * y.abs() {
                break;
            }
        }
        y
    }

    /// g(x) = F_μ⁻¹(Φ(x)), flagged when |x| exceeds the exact domain.
    pub fn transport_g_checked(&self, x: f64) -> Evaluation {
        if x.abs() > G_DOMAIN {
            let edge = G_DOMAIN.copysign(x);
            let value = self.g_exact(edge) + self.transport_g_prime(edge) * (x - edge);
            return Evaluation {
                value,
                extrapolated: true,
            };
        }
        Evaluation {
            value: self.g_exact(x),
            extrapolated: false,
        }
    }

    pub fn transport_g(&self, x: f64) -> f64 {
        self.transport_g_checked(x).value
    }

    fn g_exact(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.invert_lower(std_normal_cdf(x) * self.total)
        } else {
            self.invert_upper(std_normal_cdf(-x) * self.total)
        }
    }

    /// g′(x) = Φ′(x)/F_μ′(g(x)); constant beyond the exact domain.
    pub fn transport_g_prime(&self, x: f64) -> f64 {
        let x = x.clamp(-G_DOMAIN, G_DOMAIN);
        let y = self.g_exact(x);
        std_normal_pdf(x) * self.total / self.unnormalized_density(y)
    }

    /// Interpolated g′ from a precomputed table (Catmull–Rom), for bulk use.
    pub fn transport_g_prime_fast(&self, x: f64) -> f64 {
        let t = (x + G_DOMAIN) / fast_step();
        if t <= 0.0 {
            return self.fast_g_prime[0];
        }
        if t >= FAST_TABLE_SIZE as f64 {
            return self.fast_g_prime[FAST_TABLE_SIZE];
        }
        let j = t.floor() as usize;
        let s = t - j as f64;
        let p1 = self.fast_g_prime[j];
        let p2 = self.fast_g_prime[j + 1];
        let p0 = if j > 0 { self.fast_g_prime[j - 1] } else { 2.0 * p1 - p2 };
        let p3 = if j + 2 <= FAST_TABLE_SIZE {
            self.fast_g_prime[j + 2]
        } else {
            2.0 * p2 - p1
        };
        let s2 = s * s;
        let s3 = s2 * s;
        0.5 * (2.0 * p1
            + (p2 - p0) * s
            + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * s2
            + (3.0 * p1 - p0 - 3.0 * p2 + p3) * s3)
    }

    /// ∫ h(x) μ(dx), integrating cell by cell with `breaks` (kinks of h)
    /// inserted. Returns `None` when the window edges carry a non-negligible
    /// share of the integral (truncation diagnostics for divergence).
    pub fn expectation<H: Fn(f64) -> f64>(&self, h: H, breaks: &[f64]) -> Option<f64> {
        let rule = gl15();
        let mut extra: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|b| b.is_finite() && *b > self.nodes[0] && *b < self.nodes[self.nodes.len() - 1])
            .collect();
        extra.sort_by(f64::total_cmp);
        let mut acc = Neumaier::default();
        let mut k = 0;
        let integrand = |x: f64| h(x) * self.unnormalized_density(x);
        let mut abs_acc = 0.0;
        for w in self.nodes.windows(2) {
            let mut left = w[0];
            while k < extra.len() && extra[k] <= left {
                k += 1;
            }
            while k < extra.len() && extra[k] < w[1] {
                let v = rule.apply(&integrand, left, extra[k]);
                acc.add(v);
                abs_acc += v.abs();
                left = extra[k];
                k += 1;
            }
            let v = rule.apply(&integrand, left, w[1]);
            acc.add(v);
            abs_acc += v.abs();
        }
        let value = acc.sum() / self.total;
        let (lo, hi) = self.window();
        let width = hi - lo;
        let edge = (integrand(lo).abs() + integrand(hi).abs()) * width / self.total;
        if !value.is_finite() || edge > BOUNDARY_MASS_LIMIT * (abs_acc / self.total).max(1e-300) {
            return None;
        }
        Some(value)
    }

    /// max g′ over `grid` against the bound √A.
    pub fn check_g_prime_bound(&self, grid: &[f64]) -> GPrimeBound {
        let mut best = GPrimeBound {
            max_g_prime: f64::NEG_INFINITY,
            arg_max: f64::NAN,
            bound: self.sqrt_a,
            pass: true,
        };
        for &x in grid {
            let v = self.transport_g_prime(x);
            if v > best.max_g_prime || v.is_nan() {
                best.max_g_prime = v;
                best.arg_max = x;
            }
        }
        best.pass = best.max_g_prime <= self.sqrt_a * (1.0 + 1e-8);
        best
    }

    fn require_convex_gaussian(&self) -> Result<()> {
        if self.potential.reference() != Reference::Gaussian || !self.potential.is_convex() {
            return Err(Error::NonConvex(self.potential.label().to_string()));
        }
        Ok(())
    }

    /// The one-sided lemma inequalities in A = 1 coordinates
    /// (Ṽ(x) = V(√A·x), F̃(x) = F_μ(√A·x)):
    ///
    /// F̃′(x)·Φ(x + Ṽ′±(x)) ≥ Φ′(x + Ṽ′±(x))·F̃(x) and F̃′(x) ≥ Φ′(x + Ṽ′±(x)).
    pub fn check_hazard_inequalities(&self, grid: &[f64]) -> Result<HazardReport> {
        self.require_convex_gaussian()?;
        let mut report = HazardReport {
            points: 0,
            min_ratio_slack: f64::INFINITY,
            min_density_slack: f64::INFINITY,
            violations: Vec::new(),
        };
        for &x in grid {
            let y = self.sqrt_a * x;
            let f_tilde = self.mu_cdf(y);
            let d_tilde = self.sqrt_a * self.mu_density(y);
            if !(f_tilde > 0.0 && d_tilde > 0.0) {
                continue;
            }
            report.points += 1;
            for (side, slope) in [
                (Side::Left, self.potential.left_derivative(y)),
                (Side::Right, self.potential.right_derivative(y)),
            ] {
                let z = x + self.sqrt_a * slope;
                let (cdf_z, pdf_z) = (std_normal_cdf(z), std_normal_pdf(z));
                // Relative slacks: ≥ 0 means the inequality holds.
                let lhs1 = d_tilde * cdf_z;
                let rhs1 = pdf_z * f_tilde;
                let ratio_slack = relative_slack(lhs1, rhs1);
                let density_slack = relative_slack(d_tilde, pdf_z);
                report.min_ratio_slack = report.min_ratio_slack.min(ratio_slack);
                report.min_density_slack = report.min_density_slack.min(density_slack);
                if ratio_slack < -HAZARD_SLACK || density_slack < -HAZARD_SLACK {
                    report.violations.push(HazardViolation {
                        x,
                        side,
                        ratio_slack,
                        density_slack,
                    });
                }
            }
        }
        Ok(report)
    }

    /// G(ξ) = F̃′(F̃⁻¹(ξ)) − Φ′(Φ⁻¹(ξ)) in A = 1 coordinates.
    pub fn g_function(&self, xi: f64) -> Result<f64> {
        let y = self.mu_quantile(xi)?;
        let z = std_normal_quantile(xi)?;
        Ok(self.sqrt_a * self.mu_density(y) - std_normal_pdf(z))
    }

    pub fn check_g_nonnegative(&self, xi_grid: &[f64]) -> Result<GCheck> {
        self.require_convex_gaussian()?;
        let mut out = GCheck {
            min_g: f64::INFINITY,
            arg_min: f64::NAN,
            pass: true,
        };
        for &xi in xi_grid {
            let v = self.g_function(xi)?;
            if v < out.min_g {
                out.min_g = v;
                out.arg_min = xi;
            }
        }
        out.pass = out.min_g >= -G_NONNEGATIVE_SLACK;
        Ok(out)
    }
}

fn relative_slack(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs) / scale
    }
}

fn fast_step() -> f64 {
    2.0 * G_DOMAIN / FAST_TABLE_SIZE as f64
}

fn fast_node(j: usize) -> f64 {
    -G_DOMAIN + j as f64 * fast_step()
}

/// Total exponent φ so that μ(dx) ∝ e^{−φ(x)} dx.
#[inline]
fn total_exponent(potential: &Potential, a: f64, x: f64) -> f64 {
    match potential.reference() {
        Reference::Gaussian => potential.value(x) + 0.5 * x * x / a,
        Reference::Lebesgue => potential.value(x),
    }
}

fn find_mode<E: Fn(f64) -> f64>(exponent: &E, sqrt_a: f64) -> Result<(f64, f64)> {
    let mut half = 40.0 * sqrt_a;
    for _ in 0..8 {
        let n = 4000;
        let mut best = (f64::NAN, f64::INFINITY);
        let mut best_i = 0;
        for i in 0..=n {
            let x = -half + 2.0 * half * i as f64 / n as f64;
            let v = exponent(x);
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::NonFinitePotential(x));
            }
            if v < best.1 {
                best = (x, v);
                best_i = i;
            }
        }
        if !best.1.is_finite() {
            return Err(Error::DivergentNormalizer("potential is +∞ on the search grid".into()));
        }
        if best_i != 0 && best_i != n {
            let h = 2.0 * half / n as f64;
            return Ok(golden_refine(exponent, best.0 - h, best.0 + h, best));
        }
        half *= 4.0;
    }
    Err(Error::DivergentNormalizer(
        "exponent has no interior minimum (density grows at infinity)".into(),
    ))
}

fn golden_refine<E: Fn(f64) -> f64>(f: &E, mut a: f64, mut b: f64, start: (f64, f64)) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut best = start;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if b - a < 1e-12 {
            break;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Walks from the mode in direction `step` until the density has dropped by
/// e^{−DROP}, or errors if the capped boundary still carries mass.
fn window_edge<E: Fn(f64) -> f64>(exponent: &E, mode: f64, phi_min: f64, step: f64) -> Result<f64> {
    let h = step / 8.0;
    let cap = (WINDOW_CAP * 8.0) as usize;
    let mut x = mode;
    for _ in 0..cap {
        x += h;
        let v = exponent(x);
        if v.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::NonFinitePotential(x));
        }
        if v - phi_min > DENSITY_DROP {
            return Ok(x);
        }
    }
    // Capped: the edge density times the window width must be negligible.
    let edge_density = (-(exponent(x) - phi_min)).exp();
    if edge_density > BOUNDARY_MASS_LIMIT {
        return Err(Error::DivergentNormalizer(format!(
            "relative density {edge_density:e} at window boundary x = {x}"
        )));
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GPrimeBound {
    #[serde(with = "crate::report::num")]
    pub max_g_prime: f64,
    #[serde(with = "crate::report::num")]
    pub arg_max: f64,
    #[serde(with = "crate::report::num")]
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardViolation {
    #[serde(with = "crate::report::num")]
    pub x: f64,
    pub side: Side,
    #[serde(with = "crate::report::num")]
    pub ratio_slack: f64,
    #[serde(with = "crate::report::num")]
    pub density_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardReport {
    pub points: usize,
    #[serde(with = "crate::report::num")]
    pub min_ratio_slack: f64,
    #[serde(with = "crate::report::num")]
    pub min_density_slack: f64,
    pub violations: Vec<HazardViolation>,
}

impl HazardReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GCheck {
    #[serde(with = "crate::report::num")]
    pub min_g: f64,
    #[serde(with = "crate::report::num")]
    pub arg_min: f64,
    pub pass: bool,
}
