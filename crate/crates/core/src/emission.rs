//! Spontaneous emission from a moving two-level atom: momentum-resolved and
//! total decay rates, the angular distribution with its motional
//! corrections, line shapes along and across the motion, survival
//! probability and the unexpanded emission kernel.
//!
//! Angles: Θ is measured from the motion (z) axis, Φ from the dipole (x) axis.

use crate::dilation::gamma_q_inv;
use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadratureSpec};
use crate::wavepackets::{MotionalState, PacketPairSpec, SUPPORT_WIDTHS};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Transition constants as dimensionless ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// Recoil parameter `ħΩ / m c^2`.
    pub epsilon: f64,
    /// `Ω / Γ0`.
    pub line_ratio: f64,
}

impl Default for AtomSpec {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            line_ratio: 1.5e9,
        }
    }
}

impl AtomSpec {
    pub fn new(epsilon: f64, line_ratio: f64) -> Result<Self> {
        let atom = Self { epsilon, line_ratio };
        atom.validate()?;
        Ok(atom)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidSpec(format!("epsilon = {} must be >= 0", self.epsilon)));
        }
        if !(self.line_ratio > 0.0 && self.line_ratio.is_finite()) {
            return Err(Error::InvalidSpec(format!("line_ratio = {} must be > 0", self.line_ratio)));
        }
        Ok(())
    }

    /// Soft validity warnings for the first-order expansion.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.epsilon > 1e-3 {
            w.push(format!("epsilon = {} is outside the first-order recoil regime", self.epsilon));
        }
        w
    }
}

pub fn xi0(big_theta: f64, big_phi: f64) -> f64 {
    let s = big_theta.sin() * big_phi.cos();
    3.0 / (8.0 * PI) * (1.0 - s * s)
}

pub fn xi1(big_theta: f64, big_phi: f64) -> f64 {
    let s = big_theta.sin() * big_phi.cos();
    3.0 / (4.0 * PI) * big_theta.cos() * (1.0 - 2.0 * s * s)
}

pub fn xi2(big_theta: f64, big_phi: f64) -> f64 {
    let c2 = (2.0 * big_theta).cos();
    let c4 = (4.0 * big_theta).cos();
    3.0 / (16.0 * PI) * (6.0 * c2 + 5.0 * big_phi.cos().powi(2) * (c4 - c2))
}

/// `Γ(u)/Γ0` for a sharp momentum.
pub fn rate_momentum(u: f64, atom: &AtomSpec) -> f64 {
    1.0 - 1.5 * atom.epsilon - 0.5 * u * u
}

/// Total decay rate `Γ/Γ0` of a motional state, from its closed-form second
/// moment (trapezoid for sampled packets).
pub fn rate_total(state: &MotionalState, atom: &AtomSpec) -> Result<f64> {
    atom.validate()?;
    state.validate()?;
    Ok(1.0 - 1.5 * atom.epsilon - 0.5 * state.moment(2)?)
}

/// As [`rate_total`] with the second moment from adaptive quadrature of the density.
pub fn rate_total_quadrature(state: &MotionalState, atom: &AtomSpec) -> Result<f64> {
    atom.validate()?;
    state.validate()?;
    let spec = crate::wavepackets::moment_quadrature_spec();
    Ok(1.0 - 1.5 * atom.epsilon - 0.5 * state.moment_quadrature(2, &spec)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateDiff {
    pub rate_sup: f64,
    pub rate_cl: f64,
    /// `(Γ_sup - Γ_cl)/Γ0`, equal to `γ_Q^{-1}`.
    pub diff: f64,
}

pub fn rate_diff(spec: &PacketPairSpec, atom: &AtomSpec) -> Result<RateDiff> {
    let rate_sup = rate_total(&MotionalState::Superposition(*spec), atom)?;
    let rate_cl = rate_total(&MotionalState::Mixture(*spec), atom)?;
    Ok(RateDiff {
        rate_sup,
        rate_cl,
        diff: gamma_q_inv(spec)?,
    })
}

/// One point of an angular emission pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSample {
    pub big_theta: f64,
    pub big_phi: f64,
    /// `Γ(Θ, Φ)/Γ0` per steradian.
    pub rate_density: f64,
}

/// Emission rate per steradian, `Ξ0 (1 - 3ε/2) + Ξ1 ⟨u⟩ + Ξ2 ⟨u^2⟩/2`.
pub fn angular_rate(big_theta: f64, big_phi: f64, state: &MotionalState, atom: &AtomSpec) -> Result<f64> {
    atom.validate()?;
    state.validate()?;
    Ok(angular_rate_from_moments(big_theta, big_phi, state.moment(1)?, state.moment(2)?, atom))
}

pub(crate) fn angular_rate_from_moments(big_theta: f64, big_phi: f64, m1: f64, m2: f64, atom: &AtomSpec) -> f64 {
    xi0(big_theta, big_phi) * (1.0 - 1.5 * atom.epsilon) + xi1(big_theta, big_phi) * m1 + 0.5 * xi2(big_theta, big_phi) * m2
}

pub fn angular_sample(big_theta: f64, big_phi: f64, state: &MotionalState, atom: &AtomSpec) -> Result<AngularSample> {
    Ok(AngularSample {
        big_theta,
        big_phi,
        rate_density: angular_rate(big_theta, big_phi, state, atom)?,
    })
}

/// Observation direction of a line shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineGeometry {
    /// Along the motion.
    Parallel,
    /// Perpendicular to both the motion and the dipole.
    Perpendicular,
}

impl LineGeometry {
    /// Lorentzian for a sharp momentum `u` at detuning `s = (ω - Ω)/Γ0`,
    /// per unit `s`, without the `3/8π` prefactor.
    pub fn lorentzian(self, s: f64, u: f64, line_ratio: f64) -> f64 {
        let (num, centre, width_sq) = self.profile(u, line_ratio);
        let x = s - centre;
        num / (2.0 * PI * (x * x + 0.25 * width_sq))
    }

    /// Numerator, centre detuning and squared width factor at momentum `u`.
    fn profile(self, u: f64, r: f64) -> (f64, f64, f64) {
        match self {
            LineGeometry::Parallel => (1.0 + 3.0 * u, r * u, 1.0 + 2.0 * u),
            LineGeometry::Perpendicular => (1.0 - 1.5 * u * u, -0.5 * r * u * u, 1.0 - u * u),
        }
    }

    /// Line centre, as detuning, of a sharp momentum `u`.
    pub fn centre(self, u: f64, line_ratio: f64) -> f64 {
        self.profile(u, line_ratio).1
    }

    /// Integration frames `(origin, lo, hi, width)`: the momentum axis is
    /// split into regions, each parametrized by the offset from a resonance
    /// momentum `origin` where the Lorentzian peaks with width `width` in `u`.
    fn frames(self, s: f64, r: f64) -> Vec<(f64, f64, f64, f64)> {
        let inf = f64::INFINITY;
        match self {
            LineGeometry::Parallel => {
                let u = s / r;
                vec![(u, -inf, inf, (1.0 + 2.0 * u).abs().sqrt() / (2.0 * r))]
            }
            LineGeometry::Perpendicular if s < 0.0 => {
                let u = (-2.0 * s / r).sqrt();
                // d(centre)/du = -r u, so half a line width maps to 1/(2 r u).
                let w = (0.5 / (r * u)).min(1.0 / r.sqrt());
                vec![(-u, -inf, 0.0, w), (u, 0.0, inf, w)]
            }
            LineGeometry::Perpendicular => vec![(0.0, -inf, inf, 1.0 / r.sqrt())],
        }
    }

    /// Lorentzian at `u = origin + v`, with the detuning from line centre
    /// formed from `v` directly so that it keeps full relative precision.
    fn lorentzian_in_frame(self, s: f64, r: f64, origin: f64, v: f64) -> f64 {
        let u = origin + v;
        let (num, _, width_sq) = self.profile(u, r);
        let x = match self {
            LineGeometry::Parallel => (-r).mul_add(origin, s) - r * v,
            LineGeometry::Perpendicular => (0.5 * r * origin).mul_add(origin, s) + 0.5 * r * v * (2.0 * origin + v),
        };
        num / (2.0 * PI * (x * x + 0.25 * width_sq))
    }

    /// `∫ G(u - c) L(s; u) du` for one Gaussian of width `delta`.
    fn gaussian_line(self, s: f64, c: f64, delta: f64, r: f64, spec: &QuadratureSpec) -> Result<f64> {
        let half = SUPPORT_WIDTHS * delta;
        let g0 = 1.0 / (PI.sqrt() * delta);
        let mut total = 0.0;
        for (origin, lo, hi, w) in self.frames(s, r) {
            // Centre the offset variable on whichever feature is narrower.
            let origin = if w >= delta { c } else { origin };
            let lo = lo.max(c - half);
            let hi = hi.min(c + half);
            if !(lo < hi) {
                continue;
            }
            let (vlo, vhi) = (lo - origin, hi - origin);
            let shift = origin - c;
            let span = vhi - vlo;
            let mut bps = vec![0.0, -shift];
            let mut off = w;
            while off < span {
                bps.push(-off);
                bps.push(off);
                off *= 10.0;
            }
            let spec = spec.clone().with_breakpoints(bps);
            total += integrate(
                |v| g0 * (-((shift + v) / delta).powi(2)).exp() * self.lorentzian_in_frame(s, r, origin, v),
                vlo,
                vhi,
                &spec,
            )?
            .value;
        }
        Ok(total)
    }
}

/// Tolerances for the momentum integral of a line shape of natural scale `scale`.
fn line_quadrature_spec(scale: f64) -> QuadratureSpec {
    let mut q = QuadratureSpec::with_tolerances(1e-14 * scale, 1e-11);
    q.max_depth = 200;
    q
}

/// Line shape at detuning `s = (ω - Ω)/Γ0`, per unit `s`.
pub fn line_detuning(geometry: LineGeometry, s: f64, state: &MotionalState, atom: &AtomSpec) -> Result<f64> {
    atom.validate()?;
    state.validate()?;
    let r = atom.line_ratio;
    let pref = 3.0 / (8.0 * PI);
    match state {
        MotionalState::Eigenstate(u) => Ok(pref * geometry.lorentzian(s, *u, r)),
        MotionalState::SampledPacket(_) => {
            let (lo, hi) = state.support();
            let scale = 1.0 / ((hi - lo) * r + 1.0);
            let mut bps = Vec::new();
            for (origin, _, _, w) in geometry.frames(s, r) {
                bps.extend([origin - w, origin, origin + w]);
            }
            let spec = line_quadrature_spec(scale);
            Ok(pref * state.expectation(|u| geometry.lorentzian(s, u, r), &bps, &spec)?)
        }
        _ => {
            let (delta, comps) = state.gaussian_components()?.expect("gaussian state");
            let spec = line_quadrature_spec(1.0 / (PI.sqrt() * delta * r + 1.0));
            let mut total = 0.0;
            for (w, c) in comps {
                if w != 0.0 {
                    total += w * geometry.gaussian_line(s, c, delta, r, &spec)?;
                }
            }
            Ok(pref * total)
        }
    }
}

/// Line shape of a single Gaussian packet of spread `delta` centred at `c`,
/// at detuning `s`, per unit `s`.
pub fn line_single_packet(geometry: LineGeometry, s: f64, c: f64, delta: f64, atom: &AtomSpec) -> Result<f64> {
    atom.validate()?;
    let spec = line_quadrature_spec(1.0 / (PI.sqrt() * delta * atom.line_ratio + 1.0));
    Ok(3.0 / (8.0 * PI) * geometry.gaussian_line(s, c, delta, atom.line_ratio, &spec)?)
}

/// Line shape along the motion at `ω/Ω`, per unit `ω/Ω`.
pub fn line_parallel(omega_over_omega: f64, state: &MotionalState, atom: &AtomSpec) -> Result<f64> {
    let s = (omega_over_omega - 1.0) * atom.line_ratio;
    Ok(atom.line_ratio * line_detuning(LineGeometry::Parallel, s, state, atom)?)
}

/// Line shape perpendicular to the motion at `ω/Ω`, per unit `ω/Ω`.
pub fn line_perpendicular(omega_over_omega: f64, state: &MotionalState, atom: &AtomSpec) -> Result<f64> {
    let s = (omega_over_omega - 1.0) * atom.line_ratio;
    Ok(atom.line_ratio * line_detuning(LineGeometry::Perpendicular, s, state, atom)?)
}

/// Line shapes of a coherent and a mixed state on a common detuning axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub geometry: LineGeometry,
    /// `(ω - Ω)/Γ0`, strictly increasing.
    pub detuning: Vec<f64>,
    /// `ω/Ω`; may repeat values when `Ω/Γ0` exceeds double precision.
    pub omega_axis: Vec<f64>,
    /// Per unit detuning, divided by `normalization`.
    pub p_sup: Vec<f64>,
    pub p_cl: Vec<f64>,
    /// Peak of the line of a single packet at rest with the same spread.
    pub normalization: f64,
    pub line_ratio: f64,
}

impl SpectrumGrid {
    pub fn abs_diff(&self) -> Vec<f64> {
        self.p_sup.iter().zip(&self.p_cl).map(|(a, b)| (a - b).abs()).collect()
    }

    /// `(p_sup - p_cl)/p_cl`, signed.
    pub fn rel_diff(&self) -> Vec<f64> {
        self.p_sup.iter().zip(&self.p_cl).map(|(a, b)| (a - b) / b).collect()
    }
}

/// Survival probability of the excited state at time `t` (units of `1/Γ0`).
pub fn survival_probability(t: f64, state: &MotionalState, atom: &AtomSpec) -> Result<f64> {
    atom.validate()?;
    state.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidSpec(format!("time {t} must be finite and >= 0")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let spec = QuadratureSpec::with_tolerances(1e-17, 1e-14);
    state.expectation(|u| (-rate_momentum(u, atom) * t).exp(), &[], &spec)
}

/// Pole frequency `ω0/Ω = 1 + u cos Θ + (u^2/2) cos 2Θ - ε/2`.
pub fn pole_frequency(u: f64, big_theta: f64, atom: &AtomSpec) -> f64 {
    1.0 + u * big_theta.cos() + 0.5 * u * u * (2.0 * big_theta).cos() - 0.5 * atom.epsilon
}

/// `η(ω)/|λ'(ω)|` at `ω/Ω = w`, in units where `Ω = 1`.
pub fn kernel_unexpanded(w: f64, u: f64, big_theta: f64, big_phi: f64, atom: &AtomSpec) -> f64 {
    let (st, ct) = big_theta.sin_cos();
    let (sp, cp) = big_phi.sin_cos();
    let eta = w.powi(3)
        * st
        * ((1.0 - st * st * cp * cp) * (1.0 + atom.epsilon * w) - 2.0 * u * ct
            + u * u * (ct * ct * sp * sp + cp * cp));
    let lambda_prime = -1.0 + u * ct - atom.epsilon * w;
    eta / lambda_prime.abs()
}

/// [`kernel_unexpanded`] at the pole frequency.
pub fn kernel_at_pole(u: f64, big_theta: f64, big_phi: f64, atom: &AtomSpec) -> f64 {
    kernel_unexpanded(pole_frequency(u, big_theta, atom), u, big_theta, big_phi, atom)
}

/// Second-order expansion `(8π/3) sin Θ [Ξ0 (1 - 3ε/2) + Ξ1 u + Ξ2 u^2/2]`.
pub fn kernel_expansion(u: f64, big_theta: f64, big_phi: f64, atom: &AtomSpec) -> f64 {
    8.0 * PI / 3.0 * big_theta.sin() * angular_rate_from_moments(big_theta, big_phi, u, u * u, atom)
}

/// `max |kernel - expansion| / max |expansion|` over an `n × n` midpoint grid
/// in (Θ, Φ).
pub fn kernel_relative_deviation(u: f64, atom: &AtomSpec, n: usize) -> f64 {
    let mut dev: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        let big_theta = (i as f64 + 0.5) * PI / n as f64;
        for j in 0..n {
            let big_phi = (j as f64 + 0.5) * 2.0 * PI / n as f64;
            let e = kernel_expansion(u, big_theta, big_phi, atom);
            dev = dev.max((kernel_at_pole(u, big_theta, big_phi, atom) - e).abs());
            scale = scale.max(e.abs());
        }
    }
    dev / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_sphere, SphereSpec};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    const REST: AtomSpec = AtomSpec {
        epsilon: 0.0,
        line_ratio: 1.5e9,
    };

    #[test]
    fn xi_values() {
        assert!(xi0(FRAC_PI_2, 0.0).abs() < 1e-17);
        assert!((xi0(FRAC_PI_2, FRAC_PI_2) - 3.0 / (8.0 * PI)).abs() < 1e-16);
        assert!((xi1(0.0, 1.3) - 3.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((xi2(0.0, 0.4) - 9.0 / (8.0 * PI)).abs() < 1e-15);
        assert!(xi1(FRAC_PI_2, 0.7).abs() < 1e-16);
    }

    #[test]
    fn xi_sphere_integrals() {
        let spec = SphereSpec::default();
        let i0 = integrate_sphere(xi0, &spec).unwrap().value;
        let i1 = integrate_sphere(xi1, &spec).unwrap().value;
        let i2 = integrate_sphere(xi2, &spec).unwrap().value;
        assert!((i0 - 1.0).abs() < 1e-12);
        assert!(i1.abs() < 1e-12);
        assert!((i2 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_momentum_values() {
        assert_eq!(rate_momentum(0.0, &REST), 1.0);
        assert!((rate_momentum(0.05, &REST) - 0.99875).abs() < 1e-15);
        // 1/γ = sqrt(1 - v^2) with v = u / sqrt(1 + u^2).
        let u: f64 = 0.05;
        let exact = (1.0 - u * u / (1.0 + u * u)).sqrt();
        let diff = (rate_momentum(u, &REST) - exact).abs();
        assert!((diff - 3.0 / 8.0 * u.powi(4)).abs() < 1e-8, "{diff}");
    }

    #[test]
    fn rate_total_eigenstate_and_symmetric_mixture() {
        let atom = AtomSpec::new(1e-4, 1e9).unwrap();
        let e = rate_total(&MotionalState::Eigenstate(0.03), &atom).unwrap();
        assert_eq!(e, rate_momentum(0.03, &atom));
        let mix = PacketPairSpec::new(FRAC_PI_4, 0.0, -0.03, 0.03, 1e-9).unwrap();
        let m = rate_total(&MotionalState::Mixture(mix), &atom).unwrap();
        assert!((m - rate_momentum(0.03, &atom)).abs() < 1e-15);
    }

    #[test]
    fn rate_difference_is_gamma_q() {
        let s = PacketPairSpec::new(0.6, 0.8, 0.01, 0.03, 0.012).unwrap();
        let r = rate_diff(&s, &REST).unwrap();
        assert!((r.rate_sup - r.rate_cl - r.diff).abs() < 1e-12);
        let q_sup = rate_total_quadrature(&MotionalState::Superposition(s), &REST).unwrap();
        let q_cl = rate_total_quadrature(&MotionalState::Mixture(s), &REST).unwrap();
        assert!((q_sup - q_cl - r.diff).abs() < 1e-10);
    }

    #[test]
    fn angular_rate_at_rest_is_dipole() {
        let st = MotionalState::Eigenstate(0.0);
        for (t, p) in [(0.3, 0.1), (1.2, 2.0), (2.9, 5.0)] {
            assert_eq!(angular_rate(t, p, &st, &REST).unwrap(), xi0(t, p));
        }
    }

    #[test]
    fn kernel_at_rest() {
        for (t, p) in [(0.4, 0.2), (1.1, 3.0)] {
            let k = kernel_at_pole(0.0, t, p, &REST);
            assert!((k - 8.0 * PI / 3.0 * t.sin() * xi0(t, p)).abs() < 1e-15);
        }
        let atom = AtomSpec::new(1e-4, 1e9).unwrap();
        assert_eq!(pole_frequency(0.0, 0.7, &atom), 1.0 - 0.5e-4);
    }

    #[test]
    fn kernel_recoil_term_matches_expansion() {
        let atom = AtomSpec::new(1e-6, 1e9).unwrap();
        let (t, p) = (1.0, 0.5);
        let d = kernel_at_pole(0.0, t, p, &atom) - kernel_expansion(0.0, t, p, &atom);
        assert!(d.abs() < 1e-11);
    }

    #[test]
    fn kernel_converges_cubically() {
        let d: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&u| kernel_relative_deviation(u, &REST, 16))
            .collect();
        assert!(d[0] / d[1] >= 7.0 && d[1] / d[2] >= 7.0, "{d:?}");
    }

    #[test]
    fn rest_line_is_unit_lorentzian() {
        let st = MotionalState::Eigenstate(0.0);
        let peak = line_detuning(LineGeometry::Parallel, 0.0, &st, &REST).unwrap();
        let half = line_detuning(LineGeometry::Parallel, 0.5, &st, &REST).unwrap();
        assert!((peak - 3.0 / (8.0 * PI) * 2.0 / PI).abs() < 1e-15);
        assert!((half / peak - 0.5).abs() < 1e-15);
        // Truncated at ±50 full widths: (3/8π)(2/π) atan(100).
        let area = integrate(
            |s| line_detuning(LineGeometry::Parallel, s, &st, &REST).unwrap(),
            -50.0,
            50.0,
            &QuadratureSpec::default().with_breakpoints(vec![0.0]),
        )
        .unwrap()
        .value;
        let expected = 3.0 / (8.0 * PI) * 2.0 / PI * 100f64.atan();
        assert!((area - expected).abs() <= 1e-6 * expected);
        let perp = line_detuning(LineGeometry::Perpendicular, 0.3, &st, &REST).unwrap();
        assert_eq!(perp, line_detuning(LineGeometry::Parallel, 0.3, &st, &REST).unwrap());
    }

    #[test]
    fn omega_and_detuning_forms_agree() {
        let atom = AtomSpec::new(0.0, 1e6).unwrap();
        let st = MotionalState::Eigenstate(2e-6);
        let w = 1.0 + 1.7e-6;
        let a = line_parallel(w, &st, &atom).unwrap();
        let b = line_detuning(LineGeometry::Parallel, (w - 1.0) * 1e6, &st, &atom).unwrap() * 1e6;
        assert!((a - b).abs() <= 1e-12 * b);
    }

    /// Gaussian convolved with a Lorentzian on a dense uniform grid, with
    /// the momentum-dependent width and numerator frozen at the packet centre.
    fn voigt_dense(s: f64, centre: f64, delta: f64, r: f64) -> f64 {
        let n = 400_001;
        let (a, b) = (centre - 12.0 * delta, centre + 12.0 * delta);
        let h = (b - a) / (n - 1) as f64;
        let num = 1.0 + 3.0 * centre;
        let w2 = 1.0 + 2.0 * centre;
        let mut sum = 0.0;
        for i in 0..n {
            let u = a + i as f64 * h;
            let g = (-((u - centre) / delta).powi(2)).exp() / (PI.sqrt() * delta);
            let x = s - r * u;
            let f = g * num / (2.0 * PI * (x * x + 0.25 * w2));
            sum += if i == 0 || i == n - 1 { 0.5 * f } else { f };
        }
        3.0 / (8.0 * PI) * sum * h
    }

    #[test]
    fn single_packet_line_matches_dense_voigt() {
        // δ r = 9 line widths: Doppler broadened but with a Lorentzian core.
        let delta = 6e-9;
        let centre = 3e-8;
        let spec = PacketPairSpec::new(0.0, 0.0, centre, centre, delta).unwrap();
        let st = MotionalState::Mixture(spec);
        for s in [20.0, 41.0, 45.0, 52.5, 80.0] {
            let ours = line_detuning(LineGeometry::Parallel, s, &st, &REST).unwrap();
            let dense = voigt_dense(s, centre, delta, REST.line_ratio);
            // Width and numerator vary by O(u) ~ 1e-7 across the packet.
            assert!((ours - dense).abs() <= 1e-6 * dense, "{s}: {ours} vs {dense}");
        }
    }

    #[test]
    fn narrow_perpendicular_line_integrates() {
        let atom = AtomSpec::new(0.0, 1.5e17).unwrap();
        let spec = PacketPairSpec::new(FRAC_PI_4, 0.0, 2e-8, 4e-8, 8e-9).unwrap();
        for s in [-200.0, -67.5, -30.0, -1.0, 0.0, 2.0] {
            let v = line_detuning(LineGeometry::Perpendicular, s, &MotionalState::Superposition(spec), &atom).unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn survival_basics() {
        let atom = AtomSpec::new(0.0, 1e9).unwrap();
        let eig = MotionalState::Eigenstate(0.04);
        assert_eq!(survival_probability(0.0, &eig, &atom).unwrap(), 1.0);
        let t = 2.5;
        assert_eq!(
            survival_probability(t, &eig, &atom).unwrap(),
            (-rate_momentum(0.04, &atom) * t).exp()
        );
        let narrow = MotionalState::Mixture(PacketPairSpec::new(0.0, 0.0, 0.04, 0.04, 1e-9).unwrap());
        let s = survival_probability(t, &narrow, &atom).unwrap();
        assert!((s - (-rate_momentum(0.04, &atom) * t).exp()).abs() < 1e-14);
    }
}
