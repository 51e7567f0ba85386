//! Two-parameter sweeps of `γ_Q^{-1}` and `δ_Q` with ridge extraction.

use super::config::ScenarioConfig;
use super::output::Table;
use crate::dilation::{delta_q, gamma_q_inv};
use crate::error::{Error, Result};
use crate::numerics::golden_section;
use crate::wavepackets::PacketPairSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub label: String,
    pub values: Vec<f64>,
}

/// Maximum along axis 2 for one axis-1 coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub coordinate: f64,
    /// Refined location of the maximum along axis 2.
    pub argmax: f64,
    pub value: f64,
    /// Index of the best grid node along axis 2.
    pub grid_index: usize,
}

/// Values on an `axis1 × axis2` grid, row-major (axis 2 fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub observable: String,
    pub axis1: Axis,
    pub axis2: Axis,
    pub values: Vec<f64>,
    pub ridge: Vec<RidgePoint>,
    pub metadata: serde_json::Value,
}

impl SweepResult {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis2.values.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.axis2.values.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// CSV with columns `axis1,axis2,value,ridge_flag`.
    pub fn table(&self, file_name: &str) -> Table {
        let mut t = Table::new(file_name, &["axis1", "axis2", "value", "ridge_flag"]);
        let ridge_idx: Vec<Option<usize>> = if self.ridge.len() == self.axis1.values.len() {
            self.ridge.iter().map(|r| Some(r.grid_index)).collect()
        } else {
            vec![None; self.axis1.values.len()]
        };
        for (i, &a) in self.axis1.values.iter().enumerate() {
            for (j, &b) in self.axis2.values.iter().enumerate() {
                let flag = if ridge_idx[i] == Some(j) { 1.0 } else { 0.0 };
                t.push(vec![a, b, self.value(i, j), flag]);
            }
        }
        t
    }

    pub fn ridge_table(&self, file_name: &str) -> Table {
        let mut t = Table::new(file_name, &["axis1", "argmax_axis2", "value"]);
        for r in &self.ridge {
            t.push(vec![r.coordinate, r.argmax, r.value]);
        }
        t
    }

    /// First ridge point on the positive-Δp branch whose predecessor lies on
    /// the negative branch: where the ridge jumps between branches.
    pub fn ridge_endpoint(&self) -> Option<RidgePoint> {
        self.ridge
            .windows(2)
            .find(|w| w[0].argmax < 0.0 && w[1].argmax > 0.0)
            .map(|w| w[1])
    }
}

/// Which sweep: the swept angle and the fixed one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariant {
    /// φ × Δp at fixed θ.
    A,
    /// θ × Δp at φ = 0.
    B,
    /// θ × Δp at φ = π.
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepObservable {
    GammaQ,
    DeltaQ,
}

impl SweepObservable {
    fn eval(self, spec: &PacketPairSpec) -> Result<f64> {
        match self {
            SweepObservable::GammaQ => gamma_q_inv(spec),
            SweepObservable::DeltaQ => delta_q(spec),
        }
    }

    fn label(self) -> &'static str {
        match self {
            SweepObservable::GammaQ => "gamma_q_inv",
            SweepObservable::DeltaQ => "delta_q",
        }
    }
}

/// `n` nodes `i L / n` on the half-open interval `[0, L)`.
pub fn half_open_axis(length: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 * (length / n as f64)).collect()
}

/// `n + 1` nodes on `[-max, max]`, symmetric, with an exact zero in the middle
/// when `n` is even.
pub fn signed_axis(max: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            let k = 2 * i as i64 - n as i64;
            max * k as f64 / n as f64
        })
        .collect()
}

fn sweep_angles(variant: SweepVariant, cfg: &ScenarioConfig) -> (Axis, Box<dyn Fn(f64) -> PacketPairSpec + Sync + '_>) {
    let n = cfg.grid;
    let base = cfg.packets;
    match variant {
        SweepVariant::A => (
            Axis {
                label: "phi".into(),
                values: half_open_axis(PI, n),
            },
            Box::new(move |phi| PacketPairSpec { phi, ..base }),
        ),
        SweepVariant::B | SweepVariant::C => (
            Axis {
                label: "theta".into(),
                values: half_open_axis(FRAC_PI_2, n),
            },
            Box::new(move |theta| PacketPairSpec { theta, ..base }),
        ),
    }
}

/// Grid of an observable over (angle, Δp), `u1 + u2` fixed, with the ridge of
/// maxima along Δp.
///
/// Cells where the superposition has zero norm hold NaN.
pub fn sweep(variant: SweepVariant, observable: SweepObservable, cfg: &ScenarioConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let (axis1, spec_at) = sweep_angles(variant, cfg);
    let sum = cfg.packets.momentum_sum();
    let dmax = cfg.separation_max * cfg.packets.delta;
    let axis2 = Axis {
        label: "separation".into(),
        values: signed_axis(dmax, cfg.grid),
    };
    let eval = |a: f64, d: f64| -> Result<f64> {
        let spec = spec_at(a).with_sum_and_separation(sum, d);
        match observable.eval(&spec) {
            Err(Error::ZeroNormState { .. }) => Ok(f64::NAN),
            r => r,
        }
    };

    let rows: Vec<Result<(Vec<f64>, RidgePoint)>> = axis1
        .values
        .par_iter()
        .map(|&a| {
            let row = axis2.values.iter().map(|&d| eval(a, d)).collect::<Result<Vec<f64>>>()?;
            let ridge = refine_ridge(a, &axis2.values, &row, |d| eval(a, d).unwrap_or(f64::NAN))?;
            Ok((row, ridge))
        })
        .collect();

    let mut values = Vec::with_capacity(axis1.values.len() * axis2.values.len());
    let mut ridge = Vec::with_capacity(axis1.values.len());
    for r in rows {
        let (row, rp) = r?;
        values.extend(row);
        ridge.push(rp);
    }
    let undefined = values.iter().filter(|v| v.is_nan()).count();
    Ok(SweepResult {
        observable: observable.label().into(),
        axis1,
        axis2,
        values,
        ridge,
        metadata: serde_json::json!({
            "config": cfg,
            "variant": variant,
            "momentum_sum": sum,
            "undefined_cells": undefined,
            "version": crate::VERSION,
        }),
    })
}

/// Grid argmax (ties go to the larger coordinate) refined by golden-section
/// search between its neighbours.
fn refine_ridge<F: Fn(f64) -> f64>(coordinate: f64, axis: &[f64], row: &[f64], f: F) -> Result<RidgePoint> {
    let mut best: Option<usize> = None;
    for (j, &v) in row.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.is_none_or(|b| v >= row[b]) {
            best = Some(j);
        }
    }
    let Some(j) = best else {
        return Ok(RidgePoint {
            coordinate,
            argmax: f64::NAN,
            value: f64::NAN,
            grid_index: 0,
        });
    };
    let lo = axis[j.saturating_sub(1)];
    let hi = axis[(j + 1).min(axis.len() - 1)];
    let neg = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let m = golden_section(neg, lo, hi, 1e-12 * (hi - lo), 500)?;
    let (argmax, value) = if -m.value >= row[j] { (m.x[0], -m.value) } else { (axis[j], row[j]) };
    Ok(RidgePoint {
        coordinate,
        argmax,
        value,
        grid_index: j,
    })
}

/// Sweep of `γ_Q^{-1}`: a = φ × Δp at θ from config (π/4 by default),
/// b = θ × Δp at φ = 0, c = θ × Δp at φ = π.
pub fn sweep_fig1(variant: SweepVariant, cfg: &ScenarioConfig) -> Result<SweepResult> {
    sweep(variant, SweepObservable::GammaQ, &fixed_angle(variant, cfg))
}

/// Sweep of `δ_Q`; variant a fixes θ from config (π/8 by default).
pub fn sweep_delta_q(variant: SweepVariant, cfg: &ScenarioConfig) -> Result<SweepResult> {
    sweep(variant, SweepObservable::DeltaQ, &fixed_angle(variant, cfg))
}

fn fixed_angle(variant: SweepVariant, cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut c = cfg.clone();
    match variant {
        SweepVariant::A => {}
        SweepVariant::B => c.packets.phi = 0.0,
        SweepVariant::C => c.packets.phi = PI,
    }
    c
}
