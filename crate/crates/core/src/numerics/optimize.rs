//! Derivative-free optimizers: bounded Nelder–Mead, golden-section search and
//! the coarse-grid seeding used in front of both.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    /// Seed-grid points per free dimension.
    pub seed_grid: usize,
    /// Convergence threshold on the simplex diameter (or bracket width).
    pub simplex_tol: f64,
    pub max_iters: usize,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        Self {
            seed_grid: 64,
            simplex_tol: 1e-10,
            max_iters: 20_000,
        }
    }
}

impl OptimizerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.seed_grid < 2 || !(self.simplex_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidSpec(
                "optimizer spec needs seed_grid >= 2, simplex_tol > 0 and max_iters > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn clamp_into(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..simplex.len() {
        for j in (i + 1)..simplex.len() {
            let dist = simplex[i]
                .iter()
                .zip(&simplex[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d = d.max(dist);
        }
    }
    d
}

/// Minimize `f` inside the box `bounds` starting from `start`.
///
/// Trial points are clamped onto the box, so no evaluation ever leaves it.
/// Returns the best point found; `converged` is false when the iteration
/// budget ran out first.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    bounds: &[(f64, f64)],
    spec: &OptimizerSpec,
) -> Result<Minimum> {
    spec.validate()?;
    let n = start.len();
    if n == 0 || bounds.len() != n {
        return Err(Error::InvalidSpec("start and bounds dimensions differ".into()));
    }
    for (&x, &(lo, hi)) in start.iter().zip(bounds) {
        if !(lo < hi) || x < lo || x > hi {
            return Err(Error::InvalidSpec(format!(
                "start point {x} outside bounds [{lo}, {hi}]"
            )));
        }
    }

    let mut simplex = vec![start.to_vec()];
    for i in 0..n {
        let (lo, hi) = bounds[i];
        let step = 0.05 * (hi - lo);
        let mut p = start.to_vec();
        p[i] = if p[i] + step <= hi { p[i] + step } else { p[i] - step };
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    let eval = |p: &mut Vec<f64>| {
        clamp_into(p, bounds);
        f(p)
    };

    let mut iterations = 0;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diam = diameter(&simplex);
        if diam < spec.simplex_tol {
            return Ok(Minimum {
                x: simplex[0].clone(),
                value: values[0],
                converged: true,
                iterations,
            });
        }
        if iterations >= spec.max_iters {
            return Ok(Minimum {
                x: simplex[0].clone(),
                value: values[0],
                converged: false,
                iterations,
            });
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let mut reflected = along(-1.0);
        let f_r = eval(&mut reflected);
        if f_r < values[0] {
            let mut expanded = along(-2.0);
            let f_e = eval(&mut expanded);
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
            continue;
        }
        if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
            continue;
        }
        let (mut contracted, threshold) = if f_r < values[n] {
            (along(-0.5), f_r)
        } else {
            (along(0.5), values[n])
        };
        let f_c = eval(&mut contracted);
        if f_c < threshold {
            simplex[n] = contracted;
            values[n] = f_c;
            continue;
        }
        // Shrink towards the best vertex.
        let best = simplex[0].clone();
        for i in 1..=n {
            let mut p: Vec<f64> = best
                .iter()
                .zip(&simplex[i])
                .map(|(b, x)| b + 0.5 * (x - b))
                .collect();
            values[i] = eval(&mut p);
            simplex[i] = p;
        }
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_iters: usize) -> Result<Minimum> {
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::InvalidSpec(format!("bad golden-section bracket [{a}, {b}]")));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while hi - lo > tol && iterations < max_iters {
        iterations += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        // Bracket stops shrinking once its ends are adjacent doubles.
        if x1 <= lo || x2 >= hi || x1 >= x2 {
            break;
        }
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(Minimum {
        x: vec![x],
        value,
        converged: hi - lo <= tol || iterations < max_iters,
        iterations,
    })
}

/// Evenly spaced grid on `[lo, hi]` including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Best point of `f` on a tensor grid over `bounds`, `per_dim` points each.
pub fn grid_seed<F: Fn(&[f64]) -> f64>(f: &F, bounds: &[(f64, f64)], per_dim: usize) -> (Vec<f64>, f64) {
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| linspace(lo, hi, per_dim))
        .collect();
    let total = per_dim.pow(bounds.len() as u32);
    let mut best = (Vec::new(), f64::INFINITY);
    let mut point = vec![0.0; bounds.len()];
    for flat in 0..total {
        let mut rem = flat;
        for (k, axis) in axes.iter().enumerate() {
            point[k] = axis[rem % per_dim];
            rem /= per_dim;
        }
        let v = f(&point);
        if v < best.1 {
            best = (point.clone(), v);
        }
    }
    best
}
