//! Gaussian quadrature tables and standard-normal expectations.
//!
//! Smooth integrands use Gauss–Hermite. Integrands with kinks are split at the
//! kinks and integrated with composite Gauss–Legendre on a truncated line,
//! because Hermite rules converge only algebraically across a kink.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type Cache = OnceLock<Mutex<HashMap<usize, Arc<Rule>>>>;

fn cached(cache: &'static Cache, n: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = map.lock().unwrap().get(&n) {
        return r.clone();
    }
    let rule = Arc::new(build(n));
    map.lock().unwrap().entry(n).or_insert(rule).clone()
}

/// Nodes and weights for ∫ e^{-x²} f(x) dx.
pub fn gauss_hermite(n: usize) -> Arc<Rule> {
    static CACHE: Cache = OnceLock::new();
    cached(&CACHE, n, build_hermite)
}

/// Nodes and weights for ∫_{-1}^{1} f(x) dx.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: Cache = OnceLock::new();
    cached(&CACHE, n, build_legendre)
}

fn build_hermite(n: usize) -> Rule {
    // Golub–Welsch eigenvalues as starting points, polished by Newton on the
    // orthonormal recurrence, which also gives accurate small weights.
    let jacobi = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut guesses: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    guesses.sort_by(f64::total_cmp);
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for (i, &guess) in guesses.iter().enumerate() {
        let mut z = guess;
        let mut pp = 0.0;
        for _ in 0..20 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / (pp * pp);
    }
    // symmetrize
    for i in 0..n / 2 {
        let (a, b) = (0.5 * (x[n - 1 - i] - x[i]), 0.5 * (w[i] + w[n - 1 - i]));
        x[i] = -a;
        x[n - 1 - i] = a;
        w[i] = b;
        w[n - 1 - i] = b;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Rule { nodes: x, weights: w }
}

fn build_legendre(n: usize) -> Rule {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    Rule { nodes: x, weights: w }
}

/// Composite Gauss–Legendre over consecutive breakpoints.
pub fn composite_legendre<const K: usize>(
    breaks: &[f64],
    per_panel: usize,
    f: impl Fn(f64) -> [f64; K],
) -> [f64; K] {
    let rule = gauss_legendre(per_panel);
    let mut acc = [0.0; K];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            let v = f(mid + half * x);
            for (slot, vi) in acc.iter_mut().zip(v) {
                *slot += half * wt * vi;
            }
        }
    }
    acc
}

/// Truncation of the standard normal line for piecewise rules.
const Z_MAX: f64 = 12.0;

/// Accuracy target for the doubled-node check.
pub const QUAD_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub nodes: usize,
    /// Re-evaluate with twice the nodes and fail if the result moves by more
    /// than [`QUAD_TOL`].
    pub check: bool,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { nodes: 128, check: true }
    }
}

impl Quadrature {
    pub fn with_nodes(nodes: usize) -> Self {
        Self { nodes, ..Self::default() }
    }

    pub fn unchecked(self) -> Self {
        Self { check: false, ..self }
    }

    /// Run `eval(n)` and, if enabled, compare against `eval(2n)`.
    pub fn run<const K: usize>(&self, what: &str, eval: impl Fn(usize) -> [f64; K]) -> Result<[f64; K]> {
        let coarse = eval(self.nodes);
        if coarse.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("{what}: non-finite quadrature result {coarse:?}")));
        }
        if !self.check {
            return Ok(coarse);
        }
        let fine = eval(2 * self.nodes);
        for (a, b) in coarse.iter().zip(&fine) {
            if (a - b).abs() > QUAD_TOL * b.abs().max(1.0) {
                return Err(Error::Numeric(format!(
                    "{what}: {} vs {} nodes disagree ({a:e} vs {b:e})",
                    self.nodes,
                    2 * self.nodes
                )));
            }
        }
        Ok(fine)
    }
}

fn standard_normal_sum<const K: usize>(n: usize, features: &[(f64, f64)], g: &impl Fn(f64) -> [f64; K]) -> [f64; K] {
    let inside: Vec<(f64, f64)> = features.iter().copied().filter(|(z, _)| z.abs() < Z_MAX).collect();
    if inside.is_empty() {
        let rule = gauss_hermite(n);
        let mut acc = [0.0; K];
        let scale = 1.0 / PI.sqrt();
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            if *w == 0.0 {
                continue;
            }
            let v = g(std::f64::consts::SQRT_2 * x);
            for (slot, vi) in acc.iter_mut().zip(v) {
                *slot += scale * w * vi;
            }
        }
        return acc;
    }
    let mut breaks = vec![-Z_MAX, Z_MAX];
    for (z, scale) in inside {
        breaks.push(z);
        let mut step = scale;
        while step > 0.0 && step < 1.0 {
            breaks.extend([z - step, z + step]);
            step *= 2.0;
        }
    }
    breaks.retain(|z| z.abs() <= Z_MAX);
    let mut z = -Z_MAX + 1.0;
    while z < Z_MAX {
        breaks.push(z);
        z += 1.0;
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let per_panel = (n / 8).max(8);
    composite_legendre(&breaks, per_panel, |z| {
        let dens = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
        g(z).map(|v| v * dens)
    })
}

/// E[g(Z)] for Z ~ N(0,1), where `kinks` lists points (in z) at which g is not smooth.
pub fn normal_expectation<const K: usize>(
    what: &str,
    q: Quadrature,
    kinks: &[f64],
    g: impl Fn(f64) -> [f64; K],
) -> Result<[f64; K]> {
    let features: Vec<(f64, f64)> = kinks.iter().map(|&z| (z, 0.0)).collect();
    q.run(what, |n| standard_normal_sum(n, &features, &g))
}

/// As [`normal_expectation`], with `(location, scale)` pairs in z. Panels are
/// graded geometrically from `scale` around each location; scale 0 is a kink.
pub fn normal_expectation_graded<const K: usize>(
    what: &str,
    q: Quadrature,
    features: &[(f64, f64)],
    g: impl Fn(f64) -> [f64; K],
) -> Result<[f64; K]> {
    q.run(what, |n| standard_normal_sum(n, features, &g))
}
