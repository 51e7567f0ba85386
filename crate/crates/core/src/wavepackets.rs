//! Gaussian momentum wave packets, their coherent superpositions and
//! classical mixtures, and the moment differences between the two.
//!
//! Momenta are scaled by `m c` throughout: `u = p / (m c)`, `delta = Δ / (m c)`.

use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadratureSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Bracket `1 + cos φ sin 2θ e^{-x}` below which a superposition is treated
/// as having zero norm.
pub const ZERO_NORM_THRESHOLD: f64 = 1e-14;

/// Above this exponent the shared denominator is evaluated with `e^{-x}`
/// factored out.
const LARGE_EXPONENT: f64 = 600.0;

/// Half-width, in units of delta, of the window treated as a packet's support.
pub const SUPPORT_WIDTHS: f64 = 14.0;

/// Two Gaussian packets with weights (cos θ, e^{iφ} sin θ), common spread δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketPairSpec {
    pub theta: f64,
    pub phi: f64,
    pub u1: f64,
    pub u2: f64,
    pub delta: f64,
}

impl PacketPairSpec {
    pub fn new(theta: f64, phi: f64, u1: f64, u2: f64, delta: f64) -> Result<Self> {
        let spec = Self {
            theta,
            phi,
            u1,
            u2,
            delta,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Range checks. The zero-norm condition is checked separately by the
    /// operations that need a normalized superposition.
    pub fn validate(&self) -> Result<()> {
        let Self {
            theta,
            phi,
            u1,
            u2,
            delta,
        } = *self;
        if !(0.0..FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidSpec(format!(
                "theta = {theta} must lie in [0, pi/2)"
            )));
        }
        if !(0.0..=PI).contains(&phi) {
            return Err(Error::InvalidSpec(format!("phi = {phi} must lie in [0, pi]")));
        }
        if !(u1.is_finite() && u2.is_finite()) {
            return Err(Error::InvalidSpec("packet momenta must be finite".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidSpec(format!("delta = {delta} must be positive")));
        }
        Ok(())
    }

    /// Mean-momentum difference `u2 - u1`.
    pub fn separation(&self) -> f64 {
        self.u2 - self.u1
    }

    pub fn momentum_sum(&self) -> f64 {
        self.u1 + self.u2
    }

    /// Same spec with the centres moved to a given sum and separation.
    pub fn with_sum_and_separation(&self, sum: f64, separation: f64) -> Self {
        Self {
            u1: 0.5 * (sum - separation),
            u2: 0.5 * (sum + separation),
            ..*self
        }
    }

    pub(crate) fn coherence(&self) -> Coherence {
        Coherence::new(self)
    }
}

/// Trigonometric and exponential pieces shared by the normalization, the
/// closed-form moments and the time-dilation factors.
///
/// Angles are expanded around θ = π/4 so that `1 - sin 2θ` never suffers
/// cancellation: with t = θ - π/4, cos 2θ = -sin 2t and
/// 1 - sin 2θ = 2 sin^2 t.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Coherence {
    /// cos φ sin 2θ
    pub coh: f64,
    pub cos_phi: f64,
    pub cos_2theta: f64,
    pub sin_4theta: f64,
    pub separation: f64,
    pub sum: f64,
    /// (u2 - u1)^2 / 4δ^2
    pub x: f64,
    /// 1 + cos φ sin 2θ, as a sum of non-negative terms.
    pub one_plus_coh: f64,
}

impl Coherence {
    fn new(spec: &PacketPairSpec) -> Self {
        let t = spec.theta - FRAC_PI_4;
        // Exact zeros at θ = 0 (sin 2θ) and θ = π/4 (cos 2θ).
        let sin_2theta = (2.0 * spec.theta).sin();
        let cos_2theta = -(2.0 * t).sin();
        let sin_4theta = 2.0 * sin_2theta * cos_2theta;
        let cos_phi = spec.phi.cos();
        let half_phi_cos = (0.5 * spec.phi).cos();
        let separation = spec.separation();
        let x = (0.5 * separation / spec.delta).powi(2);
        Self {
            coh: cos_phi * sin_2theta,
            cos_phi,
            cos_2theta,
            sin_4theta,
            separation,
            sum: spec.momentum_sum(),
            x,
            one_plus_coh: 2.0 * t.sin().powi(2) + 2.0 * sin_2theta * half_phi_cos * half_phi_cos,
        }
    }

    /// The normalization bracket `1 + cos φ sin 2θ e^{-x}`.
    pub fn bracket(&self) -> f64 {
        if self.x < 1.0 {
            (-self.x).exp() * (self.x.exp_m1() + self.one_plus_coh)
        } else {
            1.0 + self.coh * (-self.x).exp()
        }
    }

    pub fn check_norm(&self) -> Result<f64> {
        let b = self.bracket();
        if !(b > ZERO_NORM_THRESHOLD) {
            return Err(Error::ZeroNormState {
                bracket: b,
                threshold: ZERO_NORM_THRESHOLD,
            });
        }
        Ok(b)
    }

    /// `numerator / (cos φ sin 2θ + e^{x})` without overflow or cancellation.
    pub fn over_shared_denominator(&self, numerator: f64) -> f64 {
        if self.x <= LARGE_EXPONENT {
            numerator / (self.x.exp_m1() + self.one_plus_coh)
        } else if numerator == 0.0 {
            0.0
        } else {
            let scaled = (numerator.abs().ln() - self.x).exp() * numerator.signum();
            scaled / (1.0 + self.coh * (-self.x).exp())
        }
    }

    /// Printed time-dilation correction; equals minus the second-moment
    /// difference of the densities.
    pub fn printed_gamma_q(&self) -> f64 {
        let bracket = self.separation * self.separation
            - 2.0 * self.separation * self.sum * self.cos_2theta;
        self.over_shared_denominator(self.coh * bracket / 8.0)
    }

    /// First-moment difference (coherent minus classical).
    pub fn first_moment_difference(&self) -> f64 {
        self.over_shared_denominator(self.cos_phi * self.sin_4theta * self.separation / 4.0)
    }
}

/// Normalization constant of the coherent superposition of the unnormalized
/// Gaussians `exp(-(u - u_i)^2 / 2δ^2)`.
pub fn normalization(spec: &PacketPairSpec) -> Result<f64> {
    spec.validate()?;
    let bracket = spec.coherence().check_norm()?;
    Ok((PI.sqrt() * spec.delta * bracket).powf(-0.5))
}

/// `|ψ_sup(u)|^2` evaluated from the complex amplitude.
pub fn density_superposition(u: f64, spec: &PacketPairSpec) -> Result<f64> {
    let n = normalization(spec)?;
    Ok(superposition_amplitude(u, spec, n).norm_sqr())
}

fn superposition_amplitude(u: f64, spec: &PacketPairSpec, norm: f64) -> Complex64 {
    let two_d2 = 2.0 * spec.delta * spec.delta;
    let g1 = (-(u - spec.u1).powi(2) / two_d2).exp();
    let g2 = (-(u - spec.u2).powi(2) / two_d2).exp();
    let phase = Complex64::from_polar(1.0, spec.phi);
    (Complex64::new(spec.theta.cos() * g1, 0.0) + phase * (spec.theta.sin() * g2)) * norm
}

/// Normalized Gaussian density `exp(-(u - c)^2 / δ^2) / (√π δ)`.
pub fn gaussian_density(u: f64, center: f64, delta: f64) -> f64 {
    (-((u - center) / delta).powi(2)).exp() / (PI.sqrt() * delta)
}

/// Classical mixture density `cos^2θ G(u - u1) + sin^2θ G(u - u2)`.
pub fn density_mixture(u: f64, spec: &PacketPairSpec) -> Result<f64> {
    spec.validate()?;
    let (s, c) = spec.theta.sin_cos();
    Ok(c * c * gaussian_density(u, spec.u1, spec.delta) + s * s * gaussian_density(u, spec.u2, spec.delta))
}

/// Moment differences `K_j = (1/j!) ∫ u^j (|ψ_sup|^2 - P_cl) du`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentDiff {
    pub k1: f64,
    pub k2: f64,
}

/// Closed-form `K_1`, `K_2` for the Gaussian pair.
pub fn moment_diff_closed(spec: &PacketPairSpec) -> Result<MomentDiff> {
    spec.validate()?;
    let coh = spec.coherence();
    coh.check_norm()?;
    Ok(MomentDiff {
        k1: coh.first_moment_difference(),
        k2: -coh.printed_gamma_q(),
    })
}

/// A packet given by complex amplitudes on a grid, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPacket {
    grid: Vec<f64>,
    amplitudes: Vec<Complex64>,
}

/// Tolerance on the trapezoid norm of a [`SampledPacket`].
pub const SAMPLED_NORM_TOL: f64 = 1e-8;

impl SampledPacket {
    /// Takes amplitudes that are already square-normalized on the grid.
    pub fn new(grid: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let packet = Self::unchecked(grid, amplitudes)?;
        let norm = packet.trapezoid(|_| 1.0);
        if (norm - 1.0).abs() > SAMPLED_NORM_TOL {
            return Err(Error::InvalidSpec(format!(
                "sampled packet has norm {norm}, expected 1"
            )));
        }
        Ok(packet)
    }

    /// Rescales the amplitudes to unit trapezoid norm.
    pub fn normalized(grid: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut packet = Self::unchecked(grid, amplitudes)?;
        let norm = packet.trapezoid(|_| 1.0);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidSpec("sampled packet has zero norm".into()));
        }
        let scale = norm.sqrt().recip();
        packet.amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(packet)
    }

    fn unchecked(grid: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != amplitudes.len() {
            return Err(Error::InvalidSpec(
                "sampled packet needs matching grid and amplitudes of length >= 2".into(),
            ));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpec("sampled packet grid must be strictly increasing".into()));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidSpec("sampled packet amplitudes must be finite".into()));
        }
        Ok(Self { grid, amplitudes })
    }

    /// Samples `amplitude(u)` on `grid` and normalizes.
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: Vec<f64>, amplitude: F) -> Result<Self> {
        let amps = grid.iter().map(|&u| amplitude(u)).collect();
        Self::normalized(grid, amps)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Interpolated amplitude; zero outside the grid.
    pub fn amplitude(&self, u: f64) -> Complex64 {
        let g = &self.grid;
        if u < g[0] || u > g[g.len() - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let i = g.partition_point(|&x| x <= u).clamp(1, g.len() - 1);
        let (x0, x1) = (g[i - 1], g[i]);
        let w = (u - x0) / (x1 - x0);
        self.amplitudes[i - 1] * (1.0 - w) + self.amplitudes[i] * w
    }

    pub fn density(&self, u: f64) -> f64 {
        self.amplitude(u).norm_sqr()
    }

    /// Trapezoid rule for `∫ f(u) |a(u)|^2 du` on the grid nodes.
    pub fn trapezoid<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let vals: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.amplitudes)
            .map(|(&u, a)| f(u) * a.norm_sqr())
            .collect();
        self.grid
            .windows(2)
            .zip(vals.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }
}

/// Centre-of-mass motional state along the motion axis.
#[derive(Debug, Clone, PartialEq)]
pub enum MotionalState {
    Superposition(PacketPairSpec),
    Mixture(PacketPairSpec),
    /// Sharp momentum `u`.
    Eigenstate(f64),
    SampledPacket(SampledPacket),
}

impl MotionalState {
    pub fn validate(&self) -> Result<()> {
        match self {
            MotionalState::Superposition(s) => {
                s.validate()?;
                s.coherence().check_norm().map(|_| ())
            }
            MotionalState::Mixture(s) => s.validate(),
            MotionalState::Eigenstate(u) if u.is_finite() => Ok(()),
            MotionalState::Eigenstate(u) => Err(Error::InvalidSpec(format!("momentum {u} is not finite"))),
            MotionalState::SampledPacket(_) => Ok(()),
        }
    }

    /// Pointwise density. Eigenstates have none.
    pub fn density(&self, u: f64) -> Result<f64> {
        match self {
            MotionalState::Superposition(s) => density_superposition(u, s),
            MotionalState::Mixture(s) => density_mixture(u, s),
            MotionalState::Eigenstate(_) => Err(Error::InvalidSpec(
                "a momentum eigenstate has no pointwise density".into(),
            )),
            MotionalState::SampledPacket(p) => Ok(p.density(u)),
        }
    }

    /// The density as a weighted sum of normalized Gaussians of width δ,
    /// `Σ w_i G(u - c_i)` with `Σ w_i = 1`. Returns `(delta, [(w_i, c_i)])`.
    ///
    /// The superposition contributes a third component at the packet
    /// midpoint from the interference term.
    pub fn gaussian_components(&self) -> Result<Option<(f64, Vec<(f64, f64)>)>> {
        match self {
            MotionalState::Superposition(s) => {
                s.validate()?;
                let coh = s.coherence();
                let bracket = coh.check_norm()?;
                let (sn, cs) = s.theta.sin_cos();
                let overlap = coh.coh * (-coh.x).exp();
                Ok(Some((
                    s.delta,
                    vec![
                        (cs * cs / bracket, s.u1),
                        (sn * sn / bracket, s.u2),
                        (overlap / bracket, 0.5 * (s.u1 + s.u2)),
                    ],
                )))
            }
            MotionalState::Mixture(s) => {
                s.validate()?;
                let (sn, cs) = s.theta.sin_cos();
                Ok(Some((s.delta, vec![(cs * cs, s.u1), (sn * sn, s.u2)])))
            }
            _ => Ok(None),
        }
    }

    /// Interval outside which the density is negligible (or zero).
    pub fn support(&self) -> (f64, f64) {
        match self {
            MotionalState::Superposition(s) | MotionalState::Mixture(s) => (
                s.u1.min(s.u2) - SUPPORT_WIDTHS * s.delta,
                s.u1.max(s.u2) + SUPPORT_WIDTHS * s.delta,
            ),
            MotionalState::Eigenstate(u) => (*u, *u),
            MotionalState::SampledPacket(p) => (p.grid[0], p.grid[p.grid.len() - 1]),
        }
    }

    /// Points where the density has structure (packet centres).
    pub fn landmarks(&self) -> Vec<f64> {
        match self {
            MotionalState::Superposition(s) | MotionalState::Mixture(s) => {
                vec![s.u1, 0.5 * (s.u1 + s.u2), s.u2]
            }
            MotionalState::Eigenstate(u) => vec![*u],
            MotionalState::SampledPacket(_) => Vec::new(),
        }
    }

    /// `⟨u^j⟩` for j = 1, 2 in closed form, or by trapezoid for sampled packets.
    pub fn moment(&self, j: u32) -> Result<f64> {
        if !(j == 1 || j == 2) {
            return Err(Error::InvalidSpec(format!("moment order {j} not supported")));
        }
        match self {
            MotionalState::Eigenstate(u) => Ok(u.powi(j as i32)),
            MotionalState::SampledPacket(p) => Ok(p.trapezoid(|u| u.powi(j as i32))),
            _ => {
                let (delta, comps) = self.gaussian_components()?.expect("gaussian state");
                Ok(comps
                    .iter()
                    .map(|&(w, c)| {
                        if j == 1 {
                            w * c
                        } else {
                            w * (c * c + 0.5 * delta * delta)
                        }
                    })
                    .sum())
            }
        }
    }

    /// `⟨u^j⟩` by adaptive quadrature of the pointwise density.
    pub fn moment_quadrature(&self, j: u32, spec: &QuadratureSpec) -> Result<f64> {
        match self {
            MotionalState::Eigenstate(_) | MotionalState::SampledPacket(_) => self.moment(j),
            _ => {
                let (a, b) = self.support();
                let spec = spec.clone().with_breakpoints(self.landmarks());
                self.validate()?;
                let r = integrate(
                    |u| u.powi(j as i32) * self.density(u).unwrap_or(f64::NAN),
                    a,
                    b,
                    &spec,
                );
                Ok(r?.value)
            }
        }
    }

    /// `∫ f(u) |ψ(u)|^2 du`, using the Gaussian decomposition where available.
    /// `breakpoints` adds problem-specific forced nodes (e.g. resonances).
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<f64> {
        match self {
            MotionalState::Eigenstate(u) => Ok(f(*u)),
            MotionalState::SampledPacket(p) => {
                let (a, b) = self.support();
                let mut bps: Vec<f64> = breakpoints.to_vec();
                // Kinks of the interpolant.
                if p.grid.len() <= 4096 {
                    bps.extend_from_slice(&p.grid[1..p.grid.len() - 1]);
                }
                let spec = spec.clone().with_breakpoints(bps);
                Ok(integrate(|u| f(u) * p.density(u), a, b, &spec)?.value)
            }
            _ => {
                let (delta, comps) = self.gaussian_components()?.expect("gaussian state");
                let mut total = 0.0;
                for (w, c) in comps {
                    if w == 0.0 {
                        continue;
                    }
                    total += w * gaussian_expectation(&f, c, delta, breakpoints, spec)?;
                }
                Ok(total)
            }
        }
    }
}

/// `∫ f(u) G(u - center) du` over `center ± SUPPORT_WIDTHS δ`.
///
/// Integrates in the offset `v = u - center` so that the Gaussian is exact
/// even when `δ` is many orders of magnitude below `|center|`.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(
    f: &F,
    center: f64,
    delta: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    let half = SUPPORT_WIDTHS * delta;
    let mut bps: Vec<f64> = breakpoints.iter().map(|b| b - center).collect();
    bps.push(0.0);
    let spec = spec.clone().with_breakpoints(bps);
    let g0 = 1.0 / (PI.sqrt() * delta);
    Ok(integrate(|v| f(center + v) * g0 * (-(v / delta).powi(2)).exp(), -half, half, &spec)?.value)
}

/// Quadrature tolerances used for moment oracles.
pub fn moment_quadrature_spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-16, 1e-13)
}

/// `K_j` by direct numerical integration of `u^j / j!` against
/// `|ψ_sup|^2 - P_cl`. Independent of [`moment_diff_closed`].
pub fn moment_diff_quadrature(state_sup: &MotionalState, state_cl: &MotionalState, j: u32) -> Result<f64> {
    if !(j == 1 || j == 2) {
        return Err(Error::InvalidSpec(format!("moment order {j} not supported")));
    }
    state_sup.validate()?;
    state_cl.validate()?;
    let factorial = if j == 1 { 1.0 } else { 2.0 };
    let spec = moment_quadrature_spec();

    let pointwise = |s: &MotionalState| {
        matches!(
            s,
            MotionalState::Superposition(_) | MotionalState::Mixture(_)
        )
    };
    if pointwise(state_sup) && pointwise(state_cl) {
        let (a1, b1) = state_sup.support();
        let (a2, b2) = state_cl.support();
        let mut bps = state_sup.landmarks();
        bps.extend(state_cl.landmarks());
        let spec = spec.with_breakpoints(bps);
        let r = integrate(
            |u| {
                let d = state_sup.density(u).unwrap_or(f64::NAN) - state_cl.density(u).unwrap_or(f64::NAN);
                u.powi(j as i32) * d
            },
            a1.min(a2),
            b1.max(b2),
            &spec,
        )?;
        return Ok(r.value / factorial);
    }
    let sup = state_sup.moment_quadrature(j, &spec)?;
    let cl = state_cl.moment_quadrature(j, &spec)?;
    Ok((sup - cl) / factorial)
}
