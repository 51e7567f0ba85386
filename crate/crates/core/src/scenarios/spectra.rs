//! Line-shape panels of coherent and mixed packet pairs, the midpoint
//! upshift and the (Δp, frequency) maps.

use super::config::{ScenarioConfig, ScenarioName};
use super::output::Table;
use super::sweep::{Axis, RidgePoint, SweepResult};
use crate::emission::{line_single_packet, AtomSpec, LineGeometry, SpectrumGrid};
use crate::error::{Error, Result};
use crate::numerics::{golden_section, linspace};
use crate::wavepackets::{MotionalState, PacketPairSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Extra detuning, in natural line widths, beyond the outermost resonance.
const EDGE_WIDTHS: f64 = 5.0;
/// Packet spreads on each side of a centre that the axis must cover.
const SPREAD_WIDTHS: f64 = 3.0;

pub const SPECTRUM_HEADER: [&str; 6] = ["omega_over_Omega", "p_sup", "p_cl", "abs_diff", "rel_diff", "detuning_gamma0"];

/// Line shapes of one packet pair, split into the mixture part and the
/// interference correction so that the difference carries no cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LinePair {
    p_cl: f64,
    diff: f64,
}

fn line_pair(geometry: LineGeometry, s: f64, spec: &PacketPairSpec, atom: &AtomSpec) -> Result<LinePair> {
    let (sn, cs) = spec.theta.sin_cos();
    let (w1, w2) = (cs * cs, sn * sn);
    let sup = MotionalState::Superposition(*spec);
    let (_, comps) = sup.gaussian_components()?.expect("gaussian state");
    let overlap = comps[2].0;
    let delta = spec.delta;
    let single = |c: f64| line_single_packet(geometry, s, c, delta, atom);
    let i1 = if w1 != 0.0 { single(spec.u1)? } else { 0.0 };
    let i2 = if w2 != 0.0 { single(spec.u2)? } else { 0.0 };
    let p_cl = w1 * i1 + w2 * i2;
    let diff = if overlap != 0.0 {
        let im = single(0.5 * (spec.u1 + spec.u2))?;
        // sup - cl = overlap (I_mid - cos²θ I1 - sin²θ I2), grouped so that
        // it vanishes exactly when the packets coincide.
        overlap * (w1 * (im - i1) + w2 * (im - i2))
    } else {
        0.0
    };
    Ok(LinePair { p_cl, diff })
}

/// Detuning interval holding the resonances of all momenta within
/// `SPREAD_WIDTHS` spreads of `[u_lo, u_hi]`.
fn detuning_range(geometry: LineGeometry, u_lo: f64, u_hi: f64, delta: f64, r: f64) -> (f64, f64) {
    let (a, b) = (u_lo - SPREAD_WIDTHS * delta, u_hi + SPREAD_WIDTHS * delta);
    let (ca, cb) = (geometry.centre(a, r), geometry.centre(b, r));
    let (mut lo, mut hi) = (ca.min(cb), ca.max(cb));
    if geometry == LineGeometry::Perpendicular && a < 0.0 && b > 0.0 {
        hi = hi.max(0.0);
    }
    lo -= EDGE_WIDTHS;
    hi += EDGE_WIDTHS;
    (lo, hi)
}

/// Peak of the line of a single packet at rest with spread `delta`.
pub fn stationary_peak(geometry: LineGeometry, delta: f64, atom: &AtomSpec) -> Result<f64> {
    let (lo, hi) = detuning_range(geometry, 0.0, 0.0, delta, atom.line_ratio);
    let f = |s: f64| line_single_packet(geometry, s, 0.0, delta, atom);
    let scan = linspace(lo, hi, 401);
    let mut best = (0, f64::NEG_INFINITY);
    for (k, &s) in scan.iter().enumerate() {
        let v = f(s)?;
        if v > best.1 {
            best = (k, v);
        }
    }
    let a = scan[best.0.saturating_sub(1)];
    let b = scan[(best.0 + 1).min(scan.len() - 1)];
    let m = golden_section(|s| -f(s).unwrap_or(f64::NAN), a, b, 1e-10 * (b - a), 500)?;
    Ok(best.1.max(-m.value))
}

/// Which observable a panel uses.
pub fn panel_geometry(name: ScenarioName) -> Result<LineGeometry> {
    match name {
        ScenarioName::Fig2a | ScenarioName::Fig2b | ScenarioName::Fig3 => Ok(LineGeometry::Parallel),
        ScenarioName::Fig2c | ScenarioName::Fig2d => Ok(LineGeometry::Perpendicular),
        other => Err(Error::InvalidSpec(format!("{other} is not a line-shape scenario"))),
    }
}

/// Coherent and mixed line shapes on `cfg.omega_points` detunings spanning
/// both packet resonances, each divided by the peak of a stationary packet
/// of the same spread.
pub fn spectrum_panels(cfg: &ScenarioConfig) -> Result<SpectrumGrid> {
    cfg.validate()?;
    let geometry = panel_geometry(cfg.scenario)?;
    let spec = cfg.packets;
    let atom = cfg.atom;
    let r = atom.line_ratio;
    MotionalState::Superposition(spec).validate()?;
    let (lo, hi) = detuning_range(geometry, spec.u1.min(spec.u2), spec.u1.max(spec.u2), spec.delta, r);
    let detuning = linspace(lo, hi, cfg.omega_points);
    let normalization = stationary_peak(geometry, spec.delta, &atom)?;
    let pairs = detuning
        .par_iter()
        .map(|&s| line_pair(geometry, s, &spec, &atom))
        .collect::<Result<Vec<_>>>()?;
    let p_cl: Vec<f64> = pairs.iter().map(|p| p.p_cl / normalization).collect();
    let p_sup: Vec<f64> = pairs.iter().map(|p| (p.p_cl + p.diff) / normalization).collect();
    Ok(SpectrumGrid {
        geometry,
        omega_axis: detuning.iter().map(|s| 1.0 + s / r).collect(),
        detuning,
        p_sup,
        p_cl,
        normalization,
        line_ratio: r,
    })
}

pub fn spectrum_table(file_name: &str, grid: &SpectrumGrid) -> Table {
    let mut t = Table::new(file_name, &SPECTRUM_HEADER);
    let (abs, rel) = (grid.abs_diff(), grid.rel_diff());
    for k in 0..grid.detuning.len() {
        t.push(vec![grid.omega_axis[k], grid.p_sup[k], grid.p_cl[k], abs[k], rel[k], grid.detuning[k]]);
    }
    t
}

/// Summary statistics of a panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelStats {
    /// Largest `|p_sup - p_cl| / p_cl` on the grid.
    pub max_rel_diff: f64,
    pub max_rel_diff_detuning: f64,
    /// Largest `|p_sup - p_cl|` in units of the stationary peak.
    pub max_abs_diff: f64,
    /// Local maxima of the mixture curve, as detunings.
    pub cl_peaks: [Option<f64>; 2],
}

pub fn panel_stats(grid: &SpectrumGrid) -> PanelStats {
    let rel = grid.rel_diff();
    let (mut k_rel, mut max_rel) = (0, 0.0);
    for (k, v) in rel.iter().enumerate() {
        if v.abs() > max_rel {
            (k_rel, max_rel) = (k, v.abs());
        }
    }
    let max_abs = grid.abs_diff().into_iter().fold(0.0, f64::max);
    let mut peaks: Vec<(f64, f64)> = (1..grid.p_cl.len().saturating_sub(1))
        .filter(|&k| grid.p_cl[k] > grid.p_cl[k - 1] && grid.p_cl[k] >= grid.p_cl[k + 1])
        .map(|k| (grid.p_cl[k], grid.detuning[k]))
        .collect();
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut top: Vec<f64> = peaks.iter().take(2).map(|p| p.1).collect();
    top.sort_by(f64::total_cmp);
    PanelStats {
        max_rel_diff: max_rel,
        max_rel_diff_detuning: grid.detuning[k_rel],
        max_abs_diff: max_abs,
        cl_peaks: [top.first().copied(), top.get(1).copied()],
    }
}

/// Detuning of the line centre of a sharp momentum at the mean of the two
/// packet centres.
pub fn midpoint_detuning(geometry: LineGeometry, spec: &PacketPairSpec, atom: &AtomSpec) -> f64 {
    geometry.centre(0.5 * (spec.u1 + spec.u2), atom.line_ratio)
}

/// `(p_sup - p_cl)/p_cl` at the midpoint detuning.
pub fn midpoint_upshift(geometry: LineGeometry, spec: &PacketPairSpec, atom: &AtomSpec) -> Result<f64> {
    let p = line_pair(geometry, midpoint_detuning(geometry, spec, atom), spec, atom)?;
    Ok(p.diff / p.p_cl)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpshiftScan {
    pub theta: f64,
    pub phi: f64,
    pub upshift: f64,
    /// Row-major over `thetas × phis`.
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub values: Vec<f64>,
}

/// Midpoint upshift over `θ = i π/(2 n)`, `i < n`, and `φ` on `n + 1` nodes
/// over `[0, π]`; `n` even puts `θ = π/4` on the grid.
pub fn scan_midpoint_upshift(geometry: LineGeometry, template: &PacketPairSpec, atom: &AtomSpec, n: usize) -> Result<UpshiftScan> {
    if n < 2 {
        return Err(Error::InvalidSpec("upshift scan needs at least 2 nodes".into()));
    }
    let thetas: Vec<f64> = (0..n).map(|i| i as f64 * (FRAC_PI_2 / n as f64)).collect();
    let phis = linspace(0.0, PI, n + 1);
    let cells: Vec<(f64, f64)> = thetas.iter().flat_map(|&t| phis.iter().map(move |&p| (t, p))).collect();
    let values = cells
        .par_iter()
        .map(|&(theta, phi)| {
            let spec = PacketPairSpec { theta, phi, ..*template };
            match midpoint_upshift(geometry, &spec, atom) {
                Err(Error::ZeroNormState { .. }) => Ok(f64::NAN),
                r => r,
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if !(values[best] >= *v) && !v.is_nan() {
            best = k;
        }
    }
    Ok(UpshiftScan {
        theta: cells[best].0,
        phi: cells[best].1,
        upshift: values[best],
        thetas,
        phis,
        values,
    })
}

/// Maps over (Δp, detuning) of the normalized coherent line, the absolute
/// difference and the relative difference, at fixed `u1 + u2`.
///
/// Ridges: the coherent-line peak, the largest absolute difference and the
/// largest |relative difference| per Δp.
pub fn fig3_maps(cfg: &ScenarioConfig) -> Result<[SweepResult; 3]> {
    cfg.validate()?;
    let geometry = LineGeometry::Parallel;
    let atom = cfg.atom;
    let r = atom.line_ratio;
    let base = cfg.packets;
    let sum = base.momentum_sum();
    let dmax = cfg.separation_max * base.delta;
    let separations = linspace(0.0, dmax, cfg.grid);
    let (lo, hi) = detuning_range(geometry, 0.5 * (sum - dmax), 0.5 * (sum + dmax), base.delta, r);
    let detuning = linspace(lo, hi, cfg.omega_points);
    let normalization = stationary_peak(geometry, base.delta, &atom)?;

    let cells: Vec<(f64, f64)> = separations
        .iter()
        .flat_map(|&d| detuning.iter().map(move |&s| (d, s)))
        .collect();
    let pairs = cells
        .par_iter()
        .map(|&(d, s)| line_pair(geometry, s, &base.with_sum_and_separation(sum, d), &atom))
        .collect::<Result<Vec<_>>>()?;

    let p_sup: Vec<f64> = pairs.iter().map(|p| (p.p_cl + p.diff) / normalization).collect();
    let abs: Vec<f64> = pairs.iter().map(|p| p.diff.abs() / normalization).collect();
    let rel: Vec<f64> = pairs.iter().map(|p| p.diff / p.p_cl).collect();

    let axis1 = Axis {
        label: "separation".into(),
        values: separations.clone(),
    };
    let axis2 = Axis {
        label: "detuning_gamma0".into(),
        values: detuning.clone(),
    };
    let n2 = detuning.len();
    let ridge_of = |values: &[f64], key: fn(f64) -> f64| -> Vec<RidgePoint> {
        separations
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let row = &values[i * n2..(i + 1) * n2];
                let mut j = 0;
                for k in 1..n2 {
                    if key(row[k]) > key(row[j]) {
                        j = k;
                    }
                }
                RidgePoint {
                    coordinate: d,
                    argmax: detuning[j],
                    value: row[j],
                    grid_index: j,
                }
            })
            .collect()
    };
    let metadata = |observable: &str| {
        serde_json::json!({
            "config": cfg,
            "observable": observable,
            "geometry": geometry,
            "momentum_sum": sum,
            "normalization": normalization,
            "line_ratio": r,
            "version": crate::VERSION,
        })
    };
    let make = |observable: &str, values: Vec<f64>, key: fn(f64) -> f64| SweepResult {
        observable: observable.into(),
        axis1: axis1.clone(),
        axis2: axis2.clone(),
        ridge: ridge_of(&values, key),
        values,
        metadata: metadata(observable),
    };
    Ok([
        make("p_sup", p_sup, |v| v),
        make("abs_diff", abs, |v| v),
        make("rel_diff", rel, f64::abs),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn small(name: ScenarioName, points: usize) -> ScenarioConfig {
        let mut c = ScenarioConfig::defaults(name);
        c.omega_points = points;
        c.grid = 8;
        c
    }

    #[test]
    fn mixture_is_sum_of_single_packets() {
        let cfg = small(ScenarioName::Fig2b, 64);
        let g = spectrum_panels(&cfg).unwrap();
        let p = cfg.packets;
        let (sn, cs) = p.theta.sin_cos();
        for (k, &s) in g.detuning.iter().enumerate() {
            let a = line_single_packet(LineGeometry::Parallel, s, p.u1, p.delta, &cfg.atom).unwrap();
            let b = line_single_packet(LineGeometry::Parallel, s, p.u2, p.delta, &cfg.atom).unwrap();
            let expected = (cs * cs * a + sn * sn * b) / g.normalization;
            assert!((g.p_cl[k] - expected).abs() < 1e-12 * expected.abs().max(1e-300));
        }
    }

    #[test]
    fn degenerate_pair_has_no_difference() {
        let mut cfg = small(ScenarioName::Fig2a, 32);
        cfg.packets.u2 = cfg.packets.u1;
        let g = spectrum_panels(&cfg).unwrap();
        for (a, b) in g.p_sup.iter().zip(&g.p_cl) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn superposition_matches_direct_line() {
        let cfg = small(ScenarioName::Fig2d, 16);
        let g = spectrum_panels(&cfg).unwrap();
        let state = MotionalState::Superposition(cfg.packets);
        for (k, &s) in g.detuning.iter().enumerate() {
            let direct = crate::emission::line_detuning(LineGeometry::Perpendicular, s, &state, &cfg.atom).unwrap();
            let ours = g.p_sup[k] * g.normalization;
            assert!((ours - direct).abs() < 1e-10 * direct.abs().max(1e-6), "{ours} vs {direct}");
        }
    }

    #[test]
    fn axis_covers_both_resonances() {
        let cfg = small(ScenarioName::Fig2a, 2048);
        let g = spectrum_panels(&cfg).unwrap();
        let r = cfg.atom.line_ratio;
        let (lo, hi) = (g.detuning[0], g.detuning[2047]);
        assert!(lo < r * cfg.packets.u1 && r * cfg.packets.u2 < hi);
        assert!((2047.0 / (hi - lo)) >= 20.0);
        let stats = panel_stats(&g);
        let [a, b] = stats.cl_peaks;
        assert!((a.unwrap() - r * cfg.packets.u1).abs() < 3.0);
        assert!((b.unwrap() - r * cfg.packets.u2).abs() < 3.0);
    }

    #[test]
    fn stationary_parallel_peak_near_rest() {
        // Negligible Doppler spread leaves the bare line peak.
        let atom = AtomSpec::new(0.0, 1.0).unwrap();
        let peak = stationary_peak(LineGeometry::Parallel, 1e-9, &atom).unwrap();
        assert!((peak - 3.0 / (8.0 * PI) * 2.0 / PI).abs() < 1e-8);
    }

    #[test]
    fn midpoint_upshift_best_at_balanced_in_phase() {
        let cfg = ScenarioConfig::defaults(ScenarioName::Fig2d);
        let scan = scan_midpoint_upshift(LineGeometry::Perpendicular, &cfg.packets, &cfg.atom, 4).unwrap();
        assert_eq!((scan.theta, scan.phi), (FRAC_PI_4, 0.0));
        assert!(scan.upshift > 0.3);
    }

    #[test]
    fn fig3_relative_difference_peaks_between_resolved_lines() {
        let mut cfg = small(ScenarioName::Fig3, 512);
        cfg.grid = 7;
        let [_, _, rel] = fig3_maps(&cfg).unwrap();
        let r = cfg.atom.line_ratio;
        let sum = cfg.packets.momentum_sum();
        for p in rel.ridge.iter().filter(|p| p.coordinate >= 2.0 * cfg.packets.delta) {
            let (lo, hi) = (0.5 * r * (sum - p.coordinate), 0.5 * r * (sum + p.coordinate));
            assert!(lo < p.argmax && p.argmax < hi, "{p:?}");
        }
    }

    #[test]
    fn fig3_zero_separation_row_vanishes() {
        let mut cfg = small(ScenarioName::Fig3, 64);
        cfg.grid = 4;
        let [p, abs, rel] = fig3_maps(&cfg).unwrap();
        assert_eq!(p.values.len(), 4 * 64);
        assert!(abs.row(0).iter().all(|&v| v == 0.0));
        assert!(rel.row(0).iter().all(|&v| v == 0.0));
    }
}
