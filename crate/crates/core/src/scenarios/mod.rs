//! Named reproductions: parameter sweeps, angular maps, line-shape panels
//! and survival curves, with their CSV/JSON output.

pub mod angular;
pub mod config;
pub mod output;
pub mod spectra;
pub mod survival;
pub mod sweep;

pub use config::{ConfigOverrides, ScenarioConfig, ScenarioName};
pub use output::Table;
pub use sweep::{SweepResult, SweepVariant};

use crate::dilation::{delta_q, extrema_phi_pi, gamma_q_inv, lambert_w0};
use crate::error::Result;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// Tables and summary of one scenario, not yet written.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub name: ScenarioName,
    pub tables: Vec<Table>,
    pub summary: Value,
}

/// Angular maps use the sweep grid size, capped to keep files small.
const ANGULAR_MAX_RESOLUTION: usize = 64;
/// Nodes per angle of the midpoint-upshift scan.
pub const UPSHIFT_SCAN_NODES: usize = 8;

pub fn run(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    use ScenarioName::*;
    cfg.validate()?;
    let name = cfg.scenario;
    let base = name.as_str();
    let (tables, summary) = match name {
        Fig1a | Fig1b | Fig1c | DeltaQa | DeltaQb | DeltaQc => {
            let variant = match name {
                Fig1a | DeltaQa => SweepVariant::A,
                Fig1b | DeltaQb => SweepVariant::B,
                _ => SweepVariant::C,
            };
            let r = match name {
                Fig1a | Fig1b | Fig1c => sweep::sweep_fig1(variant, cfg)?,
                _ => sweep::sweep_delta_q(variant, cfg)?,
            };
            let summary = sweep_summary(&r, cfg)?;
            (vec![r.table(&format!("{base}.csv")), r.ridge_table(&format!("{base}_ridge.csv"))], summary)
        }
        Angular => {
            let n = cfg.grid.clamp(8, ANGULAR_MAX_RESOLUTION);
            let rows = angular::angular_map(&cfg.packets, &cfg.atom, n)?;
            let summary = json!({
                "resolution": n,
                "gamma_q_inv": gamma_q_inv(&cfg.packets)?,
                "delta_q": delta_q(&cfg.packets)?,
                "sphere_sum_diff": angular::sphere_sum(&rows, n, |r| r.diff),
                "sphere_sum_xi0": angular::sphere_sum(&rows, n, |r| r.xi0),
            });
            (vec![angular::angular_table(&format!("{base}.csv"), &rows)], summary)
        }
        Fig2a | Fig2b | Fig2c | Fig2d => {
            let grid = spectra::spectrum_panels(cfg)?;
            let stats = spectra::panel_stats(&grid);
            let geometry = grid.geometry;
            let upshift = spectra::midpoint_upshift(geometry, &cfg.packets, &cfg.atom)?;
            let scan = spectra::scan_midpoint_upshift(geometry, &cfg.packets, &cfg.atom, UPSHIFT_SCAN_NODES)?;
            let summary = json!({
                "geometry": geometry,
                "normalization": grid.normalization,
                "stats": stats,
                "midpoint_detuning": spectra::midpoint_detuning(geometry, &cfg.packets, &cfg.atom),
                "midpoint_upshift": upshift,
                "upshift_scan": {"theta": scan.theta, "phi": scan.phi, "upshift": scan.upshift, "nodes": UPSHIFT_SCAN_NODES},
            });
            (vec![spectra::spectrum_table(&format!("{base}.csv"), &grid)], summary)
        }
        Fig3 => {
            let maps = spectra::fig3_maps(cfg)?;
            let r = cfg.atom.line_ratio;
            let rel = &maps[2];
            let argmax: Vec<Value> = rel
                .ridge
                .iter()
                .map(|p| {
                    let spec = cfg.packets.with_sum_and_separation(cfg.packets.momentum_sum(), p.coordinate);
                    let (a, b) = (r * spec.u1.min(spec.u2), r * spec.u1.max(spec.u2));
                    json!({
                        "separation": p.coordinate,
                        "detuning": p.argmax,
                        "rel_diff": p.value,
                        "peak_detunings": [a, b],
                        "between_peaks": a < p.argmax && p.argmax < b,
                    })
                })
                .collect();
            let summary = json!({
                "normalization": maps[0].metadata["normalization"],
                "max_rel_diff_per_separation": argmax,
            });
            let mut tables: Vec<Table> = maps.iter().map(|m| m.table(&format!("{base}_{}.csv", m.observable))).collect();
            tables.push(rel.ridge_table(&format!("{base}_rel_diff_ridge.csv")));
            (tables, summary)
        }
        Survival => {
            let curves = survival::survival_curves(cfg)?;
            let slopes = survival::initial_slopes(cfg)?;
            let summary = json!({
                "eigenstate_momentum": curves.eigenstate_momentum,
                "initial_slopes": slopes,
                "slope_diff_plus_gamma_q_inv": slopes.slope_diff + slopes.gamma_q_inv,
            });
            (vec![curves.table(&format!("{base}.csv"))], summary)
        }
    };
    Ok(ScenarioRun { name, tables, summary })
}

fn sweep_summary(r: &SweepResult, cfg: &ScenarioConfig) -> Result<Value> {
    let finite = r.values.iter().copied().filter(|v| v.is_finite());
    let grid_max = finite.clone().fold(f64::NEG_INFINITY, f64::max);
    let grid_min = finite.fold(f64::INFINITY, f64::min);
    let delta = cfg.packets.delta;
    let mut s = json!({
        "observable": r.observable,
        "grid_max": grid_max,
        "grid_min": grid_min,
        "undefined_cells": r.metadata["undefined_cells"],
    });
    if matches!(cfg.scenario, ScenarioName::Fig1b) {
        let expected = 2.0 * (1.0 + lambert_w0((-1.0f64).exp())?).sqrt();
        s["ridge_endpoint"] = match r.ridge_endpoint() {
            Some(p) => json!({
                "theta": p.coordinate,
                "separation": p.argmax,
                "separation_over_delta": p.argmax / delta,
                "value": p.value,
                "expected_separation_over_delta": expected,
            }),
            None => Value::Null,
        };
    }
    if matches!(cfg.scenario, ScenarioName::Fig1c) {
        let probe = cfg
            .packets
            .with_sum_and_separation(cfg.packets.momentum_sum(), 1e-6 * delta);
        let ex = extrema_phi_pi(&probe)?;
        s["analytic_extrema"] = json!({
            "max": {"theta": ex.extrema[0].theta_star, "value": ex.extrema[0].value},
            "min": {"theta": ex.extrema[1].theta_star, "value": ex.extrema[1].value},
            "saturation": -0.5 * delta * delta,
        });
    }
    Ok(s)
}

/// Writes the tables, a `<name>.json` sidecar with the effective
/// configuration, and `<name>_summary.json`. Returns the written paths.
pub fn write_run(dir: &Path, run: &ScenarioRun, cfg: &ScenarioConfig) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for t in &run.tables {
        let p = dir.join(&t.file_name);
        output::write_atomic(&p, t.to_csv().as_bytes())?;
        paths.push(p);
    }
    let name = run.name.as_str();
    let files: Vec<&str> = run.tables.iter().map(|t| t.file_name.as_str()).collect();
    let sidecar = json!({
        "scenario": name,
        "config": cfg,
        "version": crate::VERSION,
        "files": files,
        "summary_file": format!("{name}_summary.json"),
    });
    let p = dir.join(format!("{name}.json"));
    output::write_json(&p, &sidecar)?;
    paths.push(p);
    let p = dir.join(format!("{name}_summary.json"));
    output::write_json(&p, &run.summary)?;
    paths.push(p);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2d_writes_three_files() {
        let mut cfg = ScenarioConfig::defaults(ScenarioName::Fig2d);
        cfg.omega_points = 32;
        let run = run(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_run(dir.path(), &run, &cfg).unwrap();
        assert_eq!(paths.len(), 3);
        let csv = std::fs::read_to_string(&paths[0]).unwrap();
        assert!(csv.starts_with("omega_over_Omega,p_sup,p_cl,abs_diff,rel_diff"));
        let side: Value = serde_json::from_str(&std::fs::read_to_string(&paths[1]).unwrap()).unwrap();
        assert_eq!(side["config"]["packets"]["delta"], 8e-9);
        assert_eq!(side["version"], crate::VERSION);
    }

    #[test]
    fn fig1b_summary_reports_endpoint() {
        let mut cfg = ScenarioConfig::defaults(ScenarioName::Fig1b);
        cfg.grid = 16;
        let run = run(&cfg).unwrap();
        let e = &run.summary["ridge_endpoint"];
        let got = e["separation_over_delta"].as_f64().unwrap();
        assert!((got - 2.2610).abs() < 1e-3, "{got}");
    }

    #[test]
    fn every_scenario_runs_small() {
        for name in ScenarioName::ALL {
            let mut cfg = ScenarioConfig::defaults(name);
            cfg.grid = 8;
            cfg.omega_points = 16;
            let r = run(&cfg).unwrap();
            assert!(!r.tables.is_empty(), "{name}");
            for t in &r.tables {
                assert!(!t.rows.is_empty(), "{name} {}", t.file_name);
            }
        }
    }
}
