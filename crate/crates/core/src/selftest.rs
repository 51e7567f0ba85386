//! Oracle-equivalence and invariant suites, runnable from the command line.
//!
//! Each check compares an implementation value against an independent
//! oracle. `perturb` adds `perturb × scale` to every implementation value
//! before comparison, so a nonzero value exercises the failure path.

use crate::dilation::{delta_q, extrema_phi_pi, gamma_q_inv, lambert_w0, optimize_gamma_q, FreeDim, Objective, OptimizeRequest};
use crate::emission::{angular_rate_from_moments, kernel_relative_deviation, rate_diff, rate_total, rate_total_quadrature, xi0, xi1, xi2, AtomSpec};
use crate::error::{Error, Result};
use crate::numerics::{integrate_sphere, SphereSpec};
use crate::scenarios::survival::initial_slopes_for;
use crate::scenarios::sweep::{sweep_fig1, SweepVariant};
use crate::scenarios::{ScenarioConfig, ScenarioName};
use crate::wavepackets::{moment_diff_quadrature, MotionalState, PacketPairSpec, SampledPacket};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestOptions {
    pub perturb: f64,
    pub seed: u64,
    /// Random cases per randomized check.
    pub cases: usize,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            perturb: 0.0,
            seed: 20240601,
            cases: 200,
        }
    }
}

/// Outcome of one identity over all its cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// Largest `|observed - expected| / allowed` over the cases; at most 1 to pass.
    pub worst_ratio: f64,
    pub worst_observed: f64,
    pub worst_expected: f64,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub version: String,
    pub options: SelftestOptions,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Accumulates cases of one check.
struct Tally {
    suite: &'static str,
    name: &'static str,
    perturb: f64,
    cases: usize,
    worst: (f64, f64, f64),
    detail: Option<String>,
}

impl Tally {
    fn new(suite: &'static str, name: &'static str, perturb: f64) -> Self {
        Self {
            suite,
            name,
            perturb,
            cases: 0,
            worst: (0.0, f64::NAN, f64::NAN),
            detail: None,
        }
    }

    /// Records `observed ≈ expected` within `max(rel |expected|, abs)`.
    /// `scale` is the natural size of the quantity, used for the perturbation.
    fn compare(&mut self, observed: f64, expected: f64, rel: f64, abs: f64, scale: f64) {
        let observed = observed + self.perturb * scale;
        let allowed = (rel * expected.abs()).max(abs);
        let ratio = (observed - expected).abs() / allowed;
        let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
        self.cases += 1;
        if ratio > self.worst.0 || self.cases == 1 {
            self.worst = (ratio, observed, expected);
        }
    }

    /// Records `observed >= bound`.
    fn at_least(&mut self, observed: f64, bound: f64) {
        let ratio = if observed >= bound { bound / observed } else { f64::INFINITY };
        self.cases += 1;
        if ratio > self.worst.0 || self.cases == 1 {
            self.worst = (ratio, observed, bound);
        }
    }

    fn error(&mut self, e: Error) {
        self.cases += 1;
        self.worst = (f64::INFINITY, f64::NAN, f64::NAN);
        self.detail = Some(e.to_string());
    }

    fn finish(self) -> Check {
        Check {
            suite: self.suite.into(),
            name: self.name.into(),
            passed: self.cases > 0 && self.worst.0 <= 1.0,
            cases: self.cases,
            worst_ratio: self.worst.0,
            worst_observed: self.worst.1,
            worst_expected: self.worst.2,
            detail: self.detail,
        }
    }
}

/// Random spec over θ ∈ [0, π/2 - 0.01], φ ∈ [0, π), |u| ≤ 0.1, δ ∈ [1e-3, 0.05].
pub fn random_spec<R: Rng>(rng: &mut R) -> PacketPairSpec {
    PacketPairSpec {
        theta: rng.gen_range(0.0..=FRAC_PI_2 - 0.01),
        phi: rng.gen_range(0.0..PI),
        u1: rng.gen_range(-0.1..=0.1),
        u2: rng.gen_range(-0.1..=0.1),
        delta: rng.gen_range(1e-3..=0.05),
    }
}

fn moments_suite(o: &SelftestOptions, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut k1 = Tally::new("moments", "delta_q_equals_k1_quadrature", o.perturb);
    let mut k2 = Tally::new("moments", "gamma_q_equals_minus_k2_quadrature", o.perturb);
    for _ in 0..o.cases {
        let spec = random_spec(rng);
        let (sup, cl) = (MotionalState::Superposition(spec), MotionalState::Mixture(spec));
        let run = || -> Result<(f64, f64, f64, f64)> {
            Ok((
                delta_q(&spec)?,
                moment_diff_quadrature(&sup, &cl, 1)?,
                gamma_q_inv(&spec)?,
                moment_diff_quadrature(&sup, &cl, 2)?,
            ))
        };
        match run() {
            Ok((dq, q1, gq, q2)) => {
                k1.compare(dq, q1, 1e-10, 1e-14, spec.delta);
                k2.compare(gq, -q2, 1e-10, 1e-14, spec.delta * spec.delta);
            }
            Err(Error::ZeroNormState { .. }) => {}
            Err(e) => {
                k1.error(e);
            }
        }
    }
    vec![k1.finish(), k2.finish()]
}

fn angular_suite(o: &SelftestOptions, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let sphere = SphereSpec::default();
    let mut out = Vec::new();
    for (name, f, expected) in [
        ("xi0_integrates_to_one", xi0 as fn(f64, f64) -> f64, 1.0),
        ("xi1_integrates_to_zero", xi1, 0.0),
        ("xi2_integrates_to_minus_one", xi2, -1.0),
    ] {
        let mut t = Tally::new("angular", name, o.perturb);
        match integrate_sphere(f, &sphere) {
            Ok(r) => t.compare(r.value, expected, 0.0, 1e-12, 1.0),
            Err(e) => t.error(e),
        }
        out.push(t.finish());
    }
    let mut t = Tally::new("angular", "sphere_integral_equals_total_rate", o.perturb);
    for _ in 0..o.cases.min(50) {
        let spec = random_spec(rng);
        let atom = AtomSpec::new(rng.gen_range(0.0..1e-3), 1.5e9).expect("valid atom");
        let sup = MotionalState::Superposition(spec);
        let run = || -> Result<(f64, f64)> {
            let (m1, m2) = (sup.moment(1)?, sup.moment(2)?);
            let s = integrate_sphere(|a, b| angular_rate_from_moments(a, b, m1, m2, &atom), &sphere)?;
            Ok((s.value, rate_total(&sup, &atom)?))
        };
        match run() {
            Ok((s, r)) => t.compare(s, r, 1e-10, 1e-14, 1.0),
            Err(Error::ZeroNormState { .. }) => {}
            Err(e) => t.error(e),
        }
    }
    out.push(t.finish());
    out
}

fn kernel_suite(o: &SelftestOptions) -> Vec<Check> {
    let atom = AtomSpec::new(0.0, 1.5e9).expect("valid atom");
    let devs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&u| kernel_relative_deviation(u, &atom, 16) + o.perturb)
        .collect();
    let mut t = Tally::new("kernel", "expansion_error_is_cubic", 0.0);
    for w in devs.windows(2) {
        t.at_least(w[0] / w[1], 7.0);
    }
    vec![t.finish()]
}

/// Random even real profile about 0: a sum of Gaussians of random widths
/// and signed weights.
fn even_profile<R: Rng>(rng: &mut R, width: f64) -> impl Fn(f64) -> f64 {
    let terms: Vec<(f64, f64)> = (0..3)
        .map(|k| {
            let w = width * rng.gen_range(0.3..1.5);
            let a = if k == 0 { 1.0 } else { rng.gen_range(-0.4..0.4) };
            (a, w)
        })
        .collect();
    move |x: f64| terms.iter().map(|&(a, w)| a * (-(x / w).powi(2)).exp()).sum()
}

fn k1_theorem_suite(o: &SelftestOptions, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut t = Tally::new("moments", "k1_vanishes_for_even_profiles", o.perturb);
    for _ in 0..o.cases.min(100) {
        let width = rng.gen_range(1e-3..0.05);
        let (c1, c2): (f64, f64) = (rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
        let phase = rng.gen_range(0.0..=PI);
        let profile = even_profile(rng, width);
        // A grid symmetric about the midpoint keeps the reflection exact.
        let mid = 0.5 * (c1 + c2);
        let half = 0.5 * (c1 - c2).abs() + 12.0 * width;
        let n = 4001;
        let grid: Vec<f64> = (0..n).map(|i| mid + half * (2.0 * i as f64 / (n - 1) as f64 - 1.0)).collect();
        let (c, s) = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
        let amp = |u: f64| Complex64::new(c * profile(u - c1), 0.0) + Complex64::from_polar(s, phase) * profile(u - c2);
        let run = || -> Result<f64> {
            let sup = MotionalState::SampledPacket(SampledPacket::from_fn(grid.clone(), amp)?);
            let one = MotionalState::SampledPacket(SampledPacket::from_fn(grid.clone(), |u| profile(u - c1).into())?);
            let two = MotionalState::SampledPacket(SampledPacket::from_fn(grid.clone(), |u| profile(u - c2).into())?);
            Ok(sup.moment(1)? - 0.5 * (one.moment(1)? + two.moment(1)?))
        };
        match run() {
            Ok(k1) => t.compare(k1, 0.0, 0.0, 1e-9, width),
            // A phase near π can cancel the packets entirely.
            Err(Error::InvalidSpec(m)) if m.contains("zero norm") => {}
            Err(e) => t.error(e),
        }
    }
    vec![t.finish()]
}

fn extrema_suite(o: &SelftestOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let fig1 = ScenarioConfig::defaults(ScenarioName::Fig1c).packets;
    let small = fig1.with_sum_and_separation(fig1.momentum_sum(), 1e-6 * fig1.delta);
    let run = |spec: PacketPairSpec, objective: Objective| optimize_gamma_q(&OptimizeRequest::new(spec, vec![FreeDim::Theta], objective));

    let mut theta = Tally::new("extrema", "optimizer_theta_matches_analytic", o.perturb);
    let mut value = Tally::new("extrema", "optimizer_value_matches_analytic", o.perturb);
    match extrema_phi_pi(&small) {
        Ok(ex) => {
            for (k, obj) in [Objective::Maximize, Objective::Minimize].into_iter().enumerate() {
                match run(small, obj) {
                    Ok(r) => {
                        theta.compare(r.theta_star, ex.extrema[k].theta_star, 0.0, 1e-6, 1.0);
                        value.compare(r.value, ex.extrema[k].value, 1e-9, 0.0, ex.extrema[k].value.abs());
                    }
                    Err(e) => theta.error(e),
                }
            }
        }
        Err(e) => theta.error(e),
    }
    out.push(theta.finish());
    out.push(value.finish());

    let mut large = Tally::new("extrema", "large_sum_extrema", o.perturb);
    let d = fig1.delta;
    let wide = PacketPairSpec { phi: PI, ..fig1 }.with_sum_and_separation(100.0 * d, 1e-6 * d);
    let expected = 2f64.sqrt() * d * wide.momentum_sum() / 4.0;
    for (obj, sign) in [(Objective::Maximize, 1.0), (Objective::Minimize, -1.0)] {
        match run(wide, obj) {
            Ok(r) => large.compare(r.value, sign * expected, 1e-2, 0.0, expected),
            Err(e) => large.error(e),
        }
    }
    out.push(large.finish());

    let mut sat = Tally::new("extrema", "equal_weight_saturation", o.perturb);
    let balanced = PacketPairSpec { theta: FRAC_PI_4, ..small };
    match gamma_q_inv(&balanced) {
        Ok(g) => sat.compare(g, -0.5 * d * d, 1e-6, 0.0, d * d),
        Err(e) => sat.error(e),
    }
    out.push(sat.finish());

    let mut ridge = Tally::new("extrema", "ridge_endpoint_lambert_w", o.perturb);
    let cfg = ScenarioConfig::defaults(ScenarioName::Fig1b);
    let run_ridge = || -> Result<(f64, f64)> {
        let r = sweep_fig1(SweepVariant::B, &cfg)?;
        let end = r
            .ridge_endpoint()
            .ok_or_else(|| Error::InvalidSpec("ridge has no endpoint".into()))?;
        Ok((end.argmax / cfg.packets.delta, 2.0 * (1.0 + lambert_w0((-1f64).exp())?).sqrt()))
    };
    match run_ridge() {
        Ok((got, want)) => ridge.compare(got, want, 0.0, 1e-3, 1.0),
        Err(e) => ridge.error(e),
    }
    out.push(ridge.finish());
    out
}

fn rates_suite(o: &SelftestOptions, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut closed = Tally::new("rates", "rate_difference_equals_gamma_q", o.perturb);
    let mut quad = Tally::new("rates", "rate_difference_quadrature_equals_gamma_q", o.perturb);
    let atom = AtomSpec::default();
    for k in 0..o.cases {
        let spec = random_spec(rng);
        let run = || -> Result<(f64, f64, Option<f64>)> {
            let r = rate_diff(&spec, &atom)?;
            let q = if k % 4 == 0 {
                Some(
                    rate_total_quadrature(&MotionalState::Superposition(spec), &atom)?
                        - rate_total_quadrature(&MotionalState::Mixture(spec), &atom)?,
                )
            } else {
                None
            };
            Ok((r.rate_sup - r.rate_cl, r.diff, q))
        };
        match run() {
            Ok((d, g, q)) => {
                closed.compare(d, g, 0.0, 1e-12, spec.delta * spec.delta);
                if let Some(q) = q {
                    quad.compare(q, g, 0.0, 1e-10, spec.delta * spec.delta);
                }
            }
            Err(Error::ZeroNormState { .. }) => {}
            Err(e) => closed.error(e),
        }
    }
    vec![closed.finish(), quad.finish()]
}

fn survival_suite(o: &SelftestOptions) -> Vec<Check> {
    let cfg = ScenarioConfig::defaults(ScenarioName::Survival);
    let mut slope = Tally::new("survival", "initial_slope_difference_is_minus_gamma_q", o.perturb);
    match initial_slopes_for(&cfg.packets, &cfg.atom) {
        Ok(s) => {
            slope.compare(s.slope_diff, -s.gamma_q_inv, 0.0, 1e-8, s.gamma_q_inv.abs());
        }
        Err(e) => slope.error(e),
    }
    let mut start = Tally::new("survival", "starts_at_one", o.perturb);
    let sup = MotionalState::Superposition(cfg.packets);
    match crate::emission::survival_probability(0.0, &sup, &cfg.atom) {
        Ok(s) => start.compare(s, 1.0, 0.0, f64::MIN_POSITIVE, 1.0),
        Err(e) => start.error(e),
    }
    vec![slope.finish(), start.finish()]
}

pub fn run_selftest(options: &SelftestOptions) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut checks = Vec::new();
    checks.extend(moments_suite(options, &mut rng));
    checks.extend(k1_theorem_suite(options, &mut rng));
    checks.extend(angular_suite(options, &mut rng));
    checks.extend(kernel_suite(options));
    checks.extend(extrema_suite(options));
    checks.extend(rates_suite(options, &mut rng));
    checks.extend(survival_suite(options));
    SelftestReport {
        version: crate::VERSION.into(),
        options: options.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(perturb: f64) -> SelftestReport {
        run_selftest(&SelftestOptions {
            perturb,
            cases: 20,
            ..Default::default()
        })
    }

    #[test]
    fn clean_build_passes() {
        let r = quick(0.0);
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(r.passed);
    }

    #[test]
    fn perturbation_breaks_identities() {
        let r = quick(1e-6);
        assert!(!r.passed);
        let failed: Vec<&str> = r.failures().iter().map(|c| c.name.as_str()).collect();
        for name in ["xi1_integrates_to_zero", "delta_q_equals_k1_quadrature", "k1_vanishes_for_even_profiles", "rate_difference_equals_gamma_q"] {
            assert!(failed.contains(&name), "{name} not in {failed:?}");
        }
    }
}
