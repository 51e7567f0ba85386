//! Excited-state survival of coherent, mixed and sharp-momentum atoms.

use super::config::ScenarioConfig;
use super::output::Table;
use crate::dilation::gamma_q_inv;
use crate::emission::{rate_total, survival_probability, AtomSpec};
use crate::error::{Error, Result};
use crate::numerics::linspace;
use crate::wavepackets::MotionalState;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const SURVIVAL_HEADER: [&str; 4] = ["t", "s_sup", "s_cl", "s_eigenstate"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurves {
    pub t: Vec<f64>,
    pub s_sup: Vec<f64>,
    pub s_cl: Vec<f64>,
    /// Sharp momentum at the mean momentum of the mixture.
    pub s_eigenstate: Vec<f64>,
    pub eigenstate_momentum: f64,
}

impl SurvivalCurves {
    pub fn table(&self, file_name: &str) -> Table {
        let mut t = Table::new(file_name, &SURVIVAL_HEADER);
        for k in 0..self.t.len() {
            t.push(vec![self.t[k], self.s_sup[k], self.s_cl[k], self.s_eigenstate[k]]);
        }
        t
    }
}

/// Curves on `grid + 1` times over `[0, t_max]`.
pub fn survival_curves(cfg: &ScenarioConfig) -> Result<SurvivalCurves> {
    cfg.validate()?;
    let spec = cfg.packets;
    let sup = MotionalState::Superposition(spec);
    let cl = MotionalState::Mixture(spec);
    sup.validate()?;
    let u_mean = cl.moment(1)?;
    let eig = MotionalState::Eigenstate(u_mean);
    let t = linspace(0.0, cfg.t_max, cfg.grid + 1);
    let rows = t
        .par_iter()
        .map(|&t| {
            Ok([
                survival_probability(t, &sup, &cfg.atom)?,
                survival_probability(t, &cl, &cfg.atom)?,
                survival_probability(t, &eig, &cfg.atom)?,
            ])
        })
        .collect::<Result<Vec<[f64; 3]>>>()?;
    Ok(SurvivalCurves {
        s_sup: rows.iter().map(|r| r[0]).collect(),
        s_cl: rows.iter().map(|r| r[1]).collect(),
        s_eigenstate: rows.iter().map(|r| r[2]).collect(),
        t,
        eigenstate_momentum: u_mean,
    })
}

/// Derivative at 0 of `f` with `f(0)` given, by Richardson extrapolation of
/// forward differences with steps `h, h/2, ..., h/2^(levels-1)`.
pub fn richardson_initial_slope<F: Fn(f64) -> Result<f64>>(f: F, f0: f64, h: f64, levels: usize) -> Result<f64> {
    if levels == 0 || !(h > 0.0) {
        return Err(Error::InvalidSpec("Richardson needs a positive step and at least one level".into()));
    }
    let mut prev: Vec<f64> = Vec::new();
    for k in 0..levels {
        let hk = h / (1u64 << k) as f64;
        let mut row = vec![(f(hk)? - f0) / hk];
        for j in 1..=k {
            let p = (1u64 << j) as f64;
            row.push((p * row[j - 1] - prev[j - 1]) / (p - 1.0));
        }
        prev = row;
    }
    Ok(*prev.last().expect("at least one level"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialSlopes {
    pub slope_sup: f64,
    pub slope_cl: f64,
    /// Initial slope of `S_sup - S_cl`.
    pub slope_diff: f64,
    pub rate_sup: f64,
    pub rate_cl: f64,
    pub gamma_q_inv: f64,
}

pub const RICHARDSON_STEP: f64 = 0.2;
pub const RICHARDSON_LEVELS: usize = 6;

pub fn initial_slopes(cfg: &ScenarioConfig) -> Result<InitialSlopes> {
    initial_slopes_for(&cfg.packets, &cfg.atom)
}

pub fn initial_slopes_for(spec: &crate::wavepackets::PacketPairSpec, atom: &AtomSpec) -> Result<InitialSlopes> {
    let sup = MotionalState::Superposition(*spec);
    let cl = MotionalState::Mixture(*spec);
    let s = |state: &MotionalState, t: f64| survival_probability(t, state, atom);
    let (h, n) = (RICHARDSON_STEP, RICHARDSON_LEVELS);
    Ok(InitialSlopes {
        slope_sup: richardson_initial_slope(|t| s(&sup, t), 1.0, h, n)?,
        slope_cl: richardson_initial_slope(|t| s(&cl, t), 1.0, h, n)?,
        slope_diff: richardson_initial_slope(|t| Ok(s(&sup, t)? - s(&cl, t)?), 0.0, h, n)?,
        rate_sup: rate_total(&sup, atom)?,
        rate_cl: rate_total(&cl, atom)?,
        gamma_q_inv: gamma_q_inv(spec)?,
    })
}
