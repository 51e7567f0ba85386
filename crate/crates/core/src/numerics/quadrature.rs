//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! The adaptive driver is global: every iteration bisects the panel with the
//! largest error estimate. Panel values are summed in position order so the
//! result is bit-reproducible for a fixed integrand and spec.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and forced nodes for [`integrate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections applied to any initial panel.
    pub max_depth: u32,
    /// Interior points the panel boundaries are forced through.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_depth: 60,
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidSpec(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidSpec("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// Hard cap on the number of live panels, guarding against integrands whose
/// evaluation noise keeps the error estimate above tolerance.
pub const MAX_PANELS: usize = 20_000;

/// Value and error estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
    /// Error estimate sits at the rounding floor; bisecting cannot help.
    at_floor: bool,
}

/// One application of the 15-point Kronrod rule with its embedded 7-point
/// Gauss estimate. Returns (value, error, at_rounding_floor).
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, bool) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_k = WGK[7] * f_center;
    let mut res_g = WG[3] * f_center;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half.abs();
    let value = res_k * half;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut err = ((res_k - res_g) * half).abs();

    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let mut at_floor = false;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * res_abs;
        if floor >= err {
            err = floor;
            at_floor = true;
        }
    }
    (value, err, at_floor)
}

fn eval_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Panel {
    let (value, error, at_floor) = gauss_kronrod_15(f, a, b);
    Panel {
        a,
        b,
        value,
        error,
        depth,
        at_floor,
    }
}

fn totals(panels: &[Panel]) -> (f64, f64) {
    panels
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

/// Adaptive integration of `f` over `[a, b]`.
///
/// Converges when the summed error estimate is at most
/// `max(abs_tol, rel_tol * |value|)`, or when every remaining panel has hit
/// the floating-point rounding floor.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) || !(a < b) {
        return Err(Error::InvalidSpec(format!(
            "integration interval [{a}, {b}] must be finite with a < b"
        )));
    }

    let mut nodes = vec![a];
    let mut bps: Vec<f64> = spec
        .breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    nodes.extend(bps);
    nodes.push(b);

    let mut panels: Vec<Panel> = nodes
        .windows(2)
        .map(|w| eval_panel(&f, w[0], w[1], 0))
        .collect();

    loop {
        let (value, error) = totals(&panels);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureNotConverged {
                value,
                error,
                panels: panels.len(),
            });
        }
        let target = spec.abs_tol.max(spec.rel_tol * value.abs());
        if error <= target {
            return Ok(Integral { value, error });
        }

        // Worst splittable panel; first index wins ties.
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.at_floor)
            .fold(None::<(usize, f64)>, |acc, (i, p)| match acc {
                Some((_, e)) if e >= p.error => acc,
                _ => Some((i, p.error)),
            });
        let Some((idx, _)) = worst else {
            return Ok(Integral { value, error });
        };

        let p = panels[idx];
        let mid = 0.5 * (p.a + p.b);
        if p.depth >= spec.max_depth || panels.len() >= MAX_PANELS || !(mid > p.a && mid < p.b) {
            return Err(Error::QuadratureNotConverged {
                value,
                error,
                panels: panels.len(),
            });
        }
        let left = eval_panel(&f, p.a, mid, p.depth + 1);
        let right = eval_panel(&f, mid, p.b, p.depth + 1);
        panels[idx] = left;
        panels.insert(idx + 1, right);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand() {
        let r = integrate(|_| 1.0, 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn gaussian_density_over_ten_widths() {
        let d = 0.01;
        let g = |u: f64| (-(u / d).powi(2)).exp() / (std::f64::consts::PI.sqrt() * d);
        let r = integrate(g, -10.0 * d, 10.0 * d, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-12, "{}", r.value);
    }

    #[test]
    fn gaussian_second_moment() {
        let g = |u: f64| u * u * (-u * u).exp() / std::f64::consts::PI.sqrt();
        let r = integrate(g, -12.0, 12.0, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-12, "{}", r.value);
    }

    #[test]
    fn single_panel_exact_to_degree_23() {
        // Kronrod-15 extends Gauss-7 to exactness degree 3*7 + 2.
        let (v, _, _) = gauss_kronrod_15(&|x: f64| x.powi(22) + x.powi(23), 0.0, 1.0);
        let exact = 1.0 / 23.0 + 1.0 / 24.0;
        assert!((v - exact).abs() <= 1e-15, "{v} vs {exact}");
    }

    #[test]
    fn rejects_empty_interval() {
        assert!(integrate(|x| x, 1.0, 1.0, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn narrow_lorentzian_needs_breakpoint() {
        let w = 1e-12;
        let c = 0.0;
        let f = |x: f64| (w / std::f64::consts::PI) / ((x - c).powi(2) + w * w);
        let bps: Vec<f64> = (0..12)
            .flat_map(|k| {
                let o = w * 10f64.powi(k);
                [c - o, c + o]
            })
            .chain([c])
            .collect();
        let spec = QuadratureSpec::default().with_breakpoints(bps);
        let r = integrate(f, -0.3, 0.7, &spec).unwrap();
        let exact = ((0.7 / w).atan() + (0.3 / w).atan()) / std::f64::consts::PI;
        assert!((r.value - exact).abs() <= 1e-10, "{} vs {exact}", r.value);
    }

    #[test]
    fn depth_budget_exhaustion_is_reported() {
        let spec = QuadratureSpec {
            max_depth: 1,
            ..QuadratureSpec::with_tolerances(1e-15, 1e-15)
        };
        let err = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }
}
