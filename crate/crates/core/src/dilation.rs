//! Classical and quantum time-dilation factors, the first-moment (quantum
//! Doppler) shift, mean clock readout and the extrema of the quantum term.

use crate::error::{Error, Result};
use crate::numerics::{golden_section, halley, linspace, nelder_mead, OptimizerSpec};
use crate::wavepackets::PacketPairSpec;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, PI};

/// Which sign of the `δ^2/2` term to use in the classical dilation factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaCForm {
    /// `1 - (u1^2 cos^2θ + u2^2 sin^2θ - δ^2/2) / 2`
    #[default]
    Printed,
    /// `1 - ⟨u^2⟩_cl / 2`, the second moment of the mixture density.
    SecondMoment,
}

pub fn gamma_c_inv(spec: &PacketPairSpec, form: GammaCForm) -> Result<f64> {
    spec.validate()?;
    let (s, c) = spec.theta.sin_cos();
    let mean_sq = spec.u1 * spec.u1 * c * c + spec.u2 * spec.u2 * s * s;
    let spread = 0.5 * spec.delta * spec.delta;
    Ok(match form {
        GammaCForm::Printed => 1.0 - 0.5 * (mean_sq - spread),
        GammaCForm::SecondMoment => 1.0 - 0.5 * (mean_sq + spread),
    })
}

/// Quantum correction to the clock rate. Positive when the coherent state
/// ticks (and decays) faster than the mixture.
///
/// This is minus the second-moment difference `K_2` of
/// [`crate::wavepackets::moment_diff_closed`]: the same kernel, negated.
pub fn gamma_q_inv(spec: &PacketPairSpec) -> Result<f64> {
    spec.validate()?;
    let coh = spec.coherence();
    coh.check_norm()?;
    // Adding zero turns a -0 from the θ = 0 edge into +0.
    Ok(coh.printed_gamma_q() + 0.0)
}

/// First-moment difference of the coherent and mixed momentum densities.
pub fn delta_q(spec: &PacketPairSpec) -> Result<f64> {
    spec.validate()?;
    let coh = spec.coherence();
    coh.check_norm()?;
    Ok(coh.first_moment_difference())
}

/// Rate of the mean clock readout, `γ_C^{-1} + γ_Q^{-1}`.
pub fn mean_clock_rate(spec: &PacketPairSpec, form: GammaCForm) -> Result<f64> {
    Ok(gamma_c_inv(spec, form)? + gamma_q_inv(spec)?)
}

/// Mean clock readout after coordinate time `t`, using the printed classical factor.
pub fn mean_clock_time(spec: &PacketPairSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidSpec(format!("time {t} must be non-negative")));
    }
    Ok(mean_clock_rate(spec, GammaCForm::Printed)? * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub gamma_c_inv: f64,
    /// Classical factor from the mixture's second moment.
    pub gamma_c_inv_second_moment: f64,
    pub gamma_q_inv: f64,
    pub delta_q: f64,
    /// Coefficient of `t` in the mean clock readout (printed classical form).
    pub mean_clock_rate: f64,
}

pub fn dilation_report(spec: &PacketPairSpec) -> Result<DilationReport> {
    let gc = gamma_c_inv(spec, GammaCForm::Printed)?;
    let gq = gamma_q_inv(spec)?;
    Ok(DilationReport {
        gamma_c_inv: gc,
        gamma_c_inv_second_moment: gamma_c_inv(spec, GammaCForm::SecondMoment)?,
        gamma_q_inv: gq,
        delta_q: delta_q(spec)?,
        mean_clock_rate: gc + gq,
    })
}

/// Principal branch of the Lambert W function.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch - 4.0 * f64::EPSILON {
        return Err(Error::DomainError(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let start = if x < -0.25 {
        // Series about the branch point in p = sqrt(2 (e x + 1)).
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l = x.ln();
        l - l.ln()
    };
    if start <= -1.0 {
        return Ok(-1.0);
    }
    halley(
        |w| {
            let ew = w.exp();
            (w * ew - x, ew * (w + 1.0), ew * (w + 2.0))
        },
        start,
        1e-15,
        100,
    )
}

/// Location and value of an extremum of `γ_Q^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremumResult {
    pub theta_star: f64,
    pub phi_star: f64,
    /// `u2 - u1` at the extremum.
    pub separation: f64,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub spec: PacketPairSpec,
}

/// The two small-separation extrema at `φ = π`, maximum first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiPiExtrema {
    pub extrema: [ExtremumResult; 2],
    /// Set when the separation is outside the small-separation regime.
    pub warning: Option<String>,
}

/// Analytic extrema of `γ_Q^{-1}` over θ at `φ = π`, valid for `|u2 - u1| ≪ δ`.
///
/// With `s = (u1 + u2)/δ` the extrema sit at
/// `θ = π/4 - (u2 - u1)/(4 (u1 + u2)) (1 ± √(1 + 2 s^2))` and take the values
/// `+δ^2 (√(1 + 2 s^2) - 1)/4` and `-δ^2 (√(1 + 2 s^2) + 1)/4`.
pub fn extrema_phi_pi(spec: &PacketPairSpec) -> Result<PhiPiExtrema> {
    let spec = PacketPairSpec { phi: PI, ..*spec };
    spec.validate()?;
    let sum = spec.momentum_sum();
    if sum == 0.0 {
        return Err(Error::InvalidSpec("extrema at phi = pi need u1 + u2 != 0".into()));
    }
    let d = spec.separation();
    let root = (1.0 + 2.0 * (sum / spec.delta).powi(2)).sqrt();
    let d2 = spec.delta * spec.delta;
    let make = |sign: f64, value: f64| {
        let theta = FRAC_PI_4 - d / (4.0 * sum) * (1.0 + sign * root);
        ExtremumResult {
            theta_star: theta,
            phi_star: PI,
            separation: d,
            value,
            converged: true,
            iterations: 0,
            spec: PacketPairSpec { theta, ..spec },
        }
    };
    let warning = (d.abs() / spec.delta > 1.0).then(|| {
        format!(
            "separation/delta = {:.3} exceeds 1; the phi = pi extremum formulas assume a small separation",
            d.abs() / spec.delta
        )
    });
    Ok(PhiPiExtrema {
        extrema: [
            make(1.0, 0.25 * d2 * (root - 1.0)),
            make(-1.0, -0.25 * d2 * (root + 1.0)),
        ],
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeDim {
    Theta,
    Phi,
    /// `u2 - u1` at fixed `u1 + u2`.
    Separation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeRequest {
    /// Fixed values for every dimension not listed in `free`.
    pub template: PacketPairSpec,
    pub free: Vec<FreeDim>,
    pub objective: Objective,
    /// Search range for the separation; defaults to `[0, 6 δ]`.
    pub separation_range: Option<(f64, f64)>,
    pub optimizer: OptimizerSpec,
}

impl OptimizeRequest {
    pub fn new(template: PacketPairSpec, free: Vec<FreeDim>, objective: Objective) -> Self {
        Self {
            template,
            free,
            objective,
            separation_range: None,
            optimizer: OptimizerSpec::default(),
        }
    }
}

/// Largest θ searched; the range is half-open at π/2.
const THETA_MAX: f64 = FRAC_PI_2 * (1.0 - 1e-12);

impl FreeDim {
    fn bounds(self, req: &OptimizeRequest) -> (f64, f64) {
        match self {
            FreeDim::Theta => (0.0, THETA_MAX),
            FreeDim::Phi => (0.0, PI),
            FreeDim::Separation => req
                .separation_range
                .unwrap_or((0.0, 6.0 * req.template.delta)),
        }
    }

    /// Seed axis: uniform points plus a geometric cluster where the
    /// objective develops structure on small scales (θ → π/4, φ → π,
    /// separation → lower bound).
    fn seed_axis(self, req: &OptimizeRequest) -> Vec<f64> {
        let (lo, hi) = self.bounds(req);
        let mut axis = linspace(lo, hi, req.optimizer.seed_grid);
        let offsets = (2..=30).map(|k| 10f64.powf(-0.5 * k as f64));
        match self {
            FreeDim::Theta => {
                axis.push(FRAC_PI_4);
                for o in offsets {
                    axis.push(FRAC_PI_4 - o);
                    axis.push(FRAC_PI_4 + o);
                }
            }
            FreeDim::Phi => axis.extend(offsets.map(|o| PI - o * PI)),
            FreeDim::Separation => axis.extend(offsets.map(|o| lo + o * (hi - lo))),
        }
        axis.retain(|x| (lo..=hi).contains(x));
        axis.sort_by(f64::total_cmp);
        axis.dedup();
        axis
    }

    fn apply(self, spec: &mut PacketPairSpec, x: f64) {
        match self {
            FreeDim::Theta => spec.theta = x,
            FreeDim::Phi => spec.phi = x,
            FreeDim::Separation => *spec = spec.with_sum_and_separation(spec.momentum_sum(), x),
        }
    }
}

/// Numerical extremum of `γ_Q^{-1}` over the free dimensions.
///
/// A coarse seed grid is refined by golden-section search (one free
/// dimension) or bounded Nelder–Mead. Returns the best point with
/// `converged = false` when the budget runs out.
pub fn optimize_gamma_q(req: &OptimizeRequest) -> Result<ExtremumResult> {
    req.template.validate()?;
    req.optimizer.validate()?;
    if req.free.is_empty() || req.free.len() > 3 {
        return Err(Error::InvalidSpec("between one and three free dimensions are required".into()));
    }
    for (i, d) in req.free.iter().enumerate() {
        if req.free[..i].contains(d) {
            return Err(Error::InvalidSpec(format!("free dimension {d:?} listed twice")));
        }
    }
    if let Some((lo, hi)) = req.separation_range {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidSpec("separation range must be a finite, non-empty interval".into()));
        }
    }

    let sign = match req.objective {
        Objective::Maximize => -1.0,
        Objective::Minimize => 1.0,
    };
    let at = |x: &[f64]| {
        let mut spec = req.template;
        for (dim, &v) in req.free.iter().zip(x) {
            dim.apply(&mut spec, v);
        }
        spec
    };
    // Zero-norm points are excluded from the search.
    let cost = |x: &[f64]| gamma_q_inv(&at(x)).map_or(f64::INFINITY, |v| sign * v);

    let axes: Vec<Vec<f64>> = req.free.iter().map(|d| d.seed_axis(req)).collect();
    let (seed_idx, seed_val) = best_on_grid(&cost, &axes);
    if !seed_val.is_finite() {
        return Err(Error::InvalidSpec("objective is undefined on the whole seed grid".into()));
    }

    let (x, value, converged, iterations) = if req.free.len() == 1 {
        let axis = &axes[0];
        let i = seed_idx[0];
        let lo = axis[i.saturating_sub(1)];
        let hi = axis[(i + 1).min(axis.len() - 1)];
        let tol = req.optimizer.simplex_tol.min(1e-3 * (hi - lo));
        let m = golden_section(|t| cost(&[t]), lo, hi, tol, req.optimizer.max_iters)?;
        // The seed itself can beat the refinement on a flat or kinked objective.
        if seed_val < m.value {
            (vec![axis[i]], seed_val, m.converged, m.iterations)
        } else {
            (m.x, m.value, m.converged, m.iterations)
        }
    } else {
        let start: Vec<f64> = seed_idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
        let bounds: Vec<(f64, f64)> = req.free.iter().map(|d| d.bounds(req)).collect();
        let m = nelder_mead(cost, &start, &bounds, &req.optimizer)?;
        (m.x, m.value, m.converged, m.iterations)
    };

    let spec = at(&x);
    Ok(ExtremumResult {
        theta_star: spec.theta,
        phi_star: spec.phi,
        separation: spec.separation(),
        value: sign * value,
        converged,
        iterations,
        spec,
    })
}

fn best_on_grid<F: Fn(&[f64]) -> f64>(f: &F, axes: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let total: usize = axes.iter().map(Vec::len).product();
    let mut best = (vec![0; axes.len()], f64::INFINITY);
    let mut idx = vec![0; axes.len()];
    let mut point = vec![0.0; axes.len()];
    for flat in 0..total {
        let mut rem = flat;
        for (k, axis) in axes.iter().enumerate() {
            idx[k] = rem % axis.len();
            rem /= axis.len();
            point[k] = axis[idx[k]];
        }
        let v = f(&point);
        if v < best.1 {
            best = (idx.clone(), v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepackets::moment_diff_closed;

    fn fig1(theta: f64, phi: f64, separation: f64) -> PacketPairSpec {
        PacketPairSpec::new(theta, phi, 0.0, 0.0, 0.01)
            .unwrap()
            .with_sum_and_separation(0.05, separation)
    }

    #[test]
    fn gamma_c_limits() {
        let rest = PacketPairSpec::new(0.3, 0.0, 0.0, 0.0, 1e-300).unwrap();
        assert_eq!(gamma_c_inv(&rest, GammaCForm::Printed).unwrap(), 1.0);
        let single = PacketPairSpec::new(0.0, 0.0, 0.05, 0.3, 1e-200).unwrap();
        assert_eq!(gamma_c_inv(&single, GammaCForm::Printed).unwrap(), 1.0 - 0.05 * 0.05 / 2.0);
    }

    #[test]
    fn gamma_c_fig1_hand_value() {
        let s = fig1(FRAC_PI_4, 0.0, 0.02);
        // u1 = 0.015, u2 = 0.035, cos^2 = sin^2 = 1/2.
        let printed = 1.0 - 0.5 * (0.5 * 0.015f64.powi(2) + 0.5 * 0.035f64.powi(2) - 0.5e-4);
        assert!((gamma_c_inv(&s, GammaCForm::Printed).unwrap() - printed).abs() < 1e-15);
        let second = gamma_c_inv(&s, GammaCForm::SecondMoment).unwrap();
        assert!((printed - second - 0.5e-4).abs() < 1e-15);
    }

    #[test]
    fn gamma_q_is_negated_k2() {
        for s in [fig1(0.3, 0.4, 0.013), fig1(1.2, 2.9, -0.04), fig1(FRAC_PI_4, PI, 1e-5)] {
            let k = moment_diff_closed(&s).unwrap();
            assert_eq!(gamma_q_inv(&s).unwrap(), -k.k2);
            assert_eq!(delta_q(&s).unwrap(), k.k1);
        }
    }

    #[test]
    fn gamma_q_hand_values() {
        assert_eq!(gamma_q_inv(&fig1(0.0, 0.2, 0.02)).unwrap(), 0.0);
        let s = PacketPairSpec::new(FRAC_PI_4, 0.0, 0.0, 0.02, 0.01).unwrap();
        assert!((gamma_q_inv(&s).unwrap() - 1.3447e-5).abs() < 1e-9);
    }

    #[test]
    fn saturation_at_phi_pi() {
        let d = 0.01;
        let s = PacketPairSpec::new(FRAC_PI_4, PI, 0.02, 0.02 + 1e-6 * d, d).unwrap();
        let g = gamma_q_inv(&s).unwrap();
        assert!((g + d * d / 2.0).abs() <= 1e-6 * d * d / 2.0, "{g}");
    }

    #[test]
    fn delta_q_hand_value() {
        let s = PacketPairSpec::new(PI / 8.0, 0.0, 0.0, 0.02, 0.01).unwrap();
        let expected = 0.02 / (4.0 * (0.5f64.sqrt() + E));
        assert!((delta_q(&s).unwrap() - expected).abs() <= 1e-14 * expected);
        assert_eq!(delta_q(&fig1(FRAC_PI_4, 0.3, 0.02)).unwrap(), 0.0);
    }

    #[test]
    fn mean_clock_composition() {
        let s = fig1(FRAC_PI_4, 0.0, 0.02);
        assert_eq!(mean_clock_time(&s, 0.0).unwrap(), 0.0);
        let r = dilation_report(&s).unwrap();
        assert_eq!(mean_clock_time(&s, 1.0).unwrap(), r.gamma_c_inv + r.gamma_q_inv);
        let rest = PacketPairSpec::new(0.0, 0.0, 0.0, 0.0, 1e-300).unwrap();
        assert_eq!(mean_clock_time(&rest, 7.5).unwrap(), 7.5);
        assert!(mean_clock_time(&s, -1.0).is_err());
    }

    #[test]
    fn lambert_w_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        let w = lambert_w0(1.0 / E).unwrap();
        assert!((2.0 * (1.0 + w).sqrt() - 2.261).abs() < 1e-3);
        assert!((lambert_w0(-1.0 / E).unwrap() + 1.0).abs() < 1e-7);
        assert!(matches!(lambert_w0(-0.5), Err(Error::DomainError(_))));
    }

    #[test]
    fn phi_pi_extrema_at_equal_momenta() {
        let s = fig1(0.1, PI, 0.0);
        let e = extrema_phi_pi(&s).unwrap();
        let root = 51f64.sqrt();
        assert_eq!(e.extrema[0].theta_star, FRAC_PI_4);
        assert_eq!(e.extrema[1].theta_star, FRAC_PI_4);
        assert!((e.extrema[0].value - 1e-4 * (root - 1.0) / 4.0).abs() < 1e-18);
        assert!((e.extrema[1].value + 1e-4 * (root + 1.0) / 4.0).abs() < 1e-18);
        assert!(e.warning.is_none());
        assert!(extrema_phi_pi(&fig1(0.1, PI, 0.03)).unwrap().warning.is_some());
    }

    #[test]
    fn optimizer_flat_objective() {
        let s = PacketPairSpec::new(FRAC_PI_4, 0.5, 0.03, 0.03, 0.01).unwrap();
        let r = optimize_gamma_q(&OptimizeRequest::new(s, vec![FreeDim::Phi], Objective::Maximize)).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn optimizer_matches_phi_pi_extrema() {
        let d = 1e-6 * 0.01;
        let s = fig1(0.5, PI, d);
        let analytic = extrema_phi_pi(&s).unwrap();
        for (obj, k) in [(Objective::Maximize, 0), (Objective::Minimize, 1)] {
            let r = optimize_gamma_q(&OptimizeRequest::new(s, vec![FreeDim::Theta], obj)).unwrap();
            let a = analytic.extrema[k];
            assert!((r.theta_star - a.theta_star).abs() < 1e-6);
            assert!((r.value - a.value).abs() <= 1e-6 * a.value.abs(), "{} vs {}", r.value, a.value);
        }
    }

    #[test]
    fn optimizer_separation_peak() {
        let s = fig1(FRAC_PI_4, 0.0, 0.0);
        let r = optimize_gamma_q(&OptimizeRequest::new(s, vec![FreeDim::Separation], Objective::Maximize)).unwrap();
        let expected = 2.0 * (1.0 + lambert_w0(1.0 / E).unwrap()).sqrt() * 0.01;
        assert!((r.separation - expected).abs() < 1e-7, "{}", r.separation);
    }

    #[test]
    fn optimizer_two_dimensions_stays_in_bounds() {
        let s = fig1(0.3, 0.3, 0.004);
        let r = optimize_gamma_q(&OptimizeRequest::new(s, vec![FreeDim::Theta, FreeDim::Phi], Objective::Minimize))
            .unwrap();
        assert!((0.0..FRAC_PI_2).contains(&r.theta_star));
        assert!((0.0..=PI).contains(&r.phi_star));
        assert!(r.value < 0.0);
    }
}
