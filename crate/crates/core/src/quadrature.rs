//! Quadrature rules: Gauss–Legendre, globally adaptive Gauss–Legendre with a
//! bisection error estimate, and Gauss–Hermite for Gaussian expectations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

/// Nodes and weights of an n-point rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Gauss–Legendre rule via Newton iteration on Pₙ.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    #[inline]
    pub fn apply<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }
}

/// Pₙ(z) and Pₙ′(z) by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Shared 15-point rule used by the adaptive integrator.
pub fn gl15() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::gauss_legendre(15))
}

/// Shared 10-point rule for short smooth intervals.
pub fn gl10() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| Rule::gauss_legendre(10))
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Maximum bisection depth of any single interval.
    pub max_depth: u32,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn absolute(abs: f64) -> Self {
        Self {
            abs,
            rel: 0.0,
            max_depth: 30,
            max_intervals: 4000,
        }
    }

    pub const fn with_rel(mut self, rel: f64) -> Self {
        self.rel = rel;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
    depth: u32,
}

impl Piece {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, coarse: f64, depth: u32) -> Self {
        let rule = gl15();
        let m = 0.5 * (a + b);
        let left = rule.apply(f, a, m);
        let right = rule.apply(f, m, b);
        let error = (coarse - left - right).abs();
        Self {
            a,
            b,
            left,
            right,
            error,
            depth,
        }
    }
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Integral {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Like [`integrate`], with the sorted `points` used as initial subdivision
/// (kinks of the integrand belong here).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> Integral {
    assert!(points.len() >= 2, "need at least one interval");
    let rule = gl15();
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let coarse = rule.apply(&f, a, b);
        heap.push(Piece::new(&f, a, b, coarse, 0));
        evaluations += 45;
    }
    if heap.is_empty() {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
            evaluations,
        };
    }
    let mut converged = false;
    loop {
        let (value, error) = totals(&heap);
        if error <= tol.abs.max(tol.rel * value.abs()) || !value.is_finite() {
            converged = value.is_finite();
            break;
        }
        if heap.len() >= tol.max_intervals {
            break;
        }
        let worst = heap.pop().expect("nonempty");
        if worst.depth >= tol.max_depth {
            heap.push(worst);
            break;
        }
        let m = 0.5 * (worst.a + worst.b);
        heap.push(Piece::new(&f, worst.a, m, worst.left, worst.depth + 1));
        heap.push(Piece::new(&f, m, worst.b, worst.right, worst.depth + 1));
        evaluations += 60;
    }
    let (value, error) = totals(&heap);
    Integral {
        value,
        error,
        converged,
        evaluations,
    }
}

fn totals(heap: &BinaryHeap<Piece>) -> (f64, f64) {
    let mut value = Neumaier::default();
    let mut error = 0.0;
    for p in heap.iter() {
        value.add(p.left);
        value.add(p.right);
        error += p.error;
    }
    (value.sum(), error)
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Gauss–Hermite rule rescaled to expectations under N(0, 1):
/// E[f(Z)] ≈ Σ wᵢ f(zᵢ) with Σ wᵢ = 1.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let nf = n as f64;
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let m = n.div_ceil(2);
        let mut z = 0.0;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (pim4, 0.0);
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        // Physicists' nodes for e^{−x²} → standard normal nodes √2·x.
        let total: f64 = w.iter().sum();
        let nodes = x.iter().rev().map(|v| v * std::f64::consts::SQRT_2).collect();
        let weights = w.iter().rev().map(|v| v / total).collect();
        Self { nodes, weights }
    }

    /// E[f(mean + sd·Z)] for Z standard normal.
    #[inline]
    pub fn expectation<F: Fn(f64) -> f64>(&self, mean: f64, sd: f64, f: F) -> f64 {
        let mut s = 0.0;
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mean + sd * z);
        }
        s
    }
}
