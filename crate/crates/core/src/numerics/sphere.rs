//! Product-rule quadrature on the unit sphere: Gauss–Legendre in cos(Θ)
//! times the periodic trapezoid rule in Φ.

use crate::error::{Error, Result};
use crate::numerics::quadrature::Integral;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Starting number of Gauss–Legendre nodes in cos(Θ); doubled per refinement.
    pub initial_order: usize,
    pub max_order: usize,
}

impl Default for SphereSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            initial_order: 8,
            max_order: 1024,
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn product_rule<F: Fn(f64, f64) -> f64>(f: &F, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let n_phi = 2 * order;
    let h = 2.0 * PI / n_phi as f64;
    nodes
        .iter()
        .zip(&weights)
        .map(|(&c, &w)| {
            let theta = c.clamp(-1.0, 1.0).acos();
            let ring: f64 = (0..n_phi).map(|j| f(theta, j as f64 * h)).sum();
            w * ring * h
        })
        .sum()
}

/// Integral of `f(Θ, Φ)` over the sphere with measure sin(Θ) dΘ dΦ.
///
/// Refines by doubling the order until two successive estimates agree.
pub fn integrate_sphere<F: Fn(f64, f64) -> f64>(f: F, spec: &SphereSpec) -> Result<Integral> {
    if spec.initial_order < 1 || spec.max_order < spec.initial_order {
        return Err(Error::InvalidSpec("sphere quadrature orders are inconsistent".into()));
    }
    let mut order = spec.initial_order;
    let mut prev = product_rule(&f, order);
    while order * 2 <= spec.max_order {
        order *= 2;
        let next = product_rule(&f, order);
        let diff = (next - prev).abs();
        if diff <= spec.abs_tol.max(spec.rel_tol * next.abs()) {
            return Ok(Integral {
                value: next,
                error: diff,
            });
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged {
        value: prev,
        error: f64::NAN,
        panels: order,
    })
}
