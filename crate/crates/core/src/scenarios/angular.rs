//! Angular emission maps: the dipole pattern, its motional corrections and
//! the coherent-minus-classical difference.

use super::output::Table;
use crate::emission::{angular_rate_from_moments, xi0, xi1, xi2, AtomSpec};
use crate::error::{Error, Result};
use crate::wavepackets::{MotionalState, PacketPairSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularRow {
    pub big_theta: f64,
    pub big_phi: f64,
    pub xi0: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub rate_sup: f64,
    pub rate_cl: f64,
    pub diff: f64,
}

pub const ANGULAR_HEADER: [&str; 8] = ["big_theta", "big_phi", "xi0", "xi1", "xi2", "rate_sup", "rate_cl", "diff"];

/// Map on `resolution + 1` polar nodes over `[0, π]` times `resolution`
/// azimuthal nodes over `[0, 2π)`.
pub fn angular_map(spec: &PacketPairSpec, atom: &AtomSpec, resolution: usize) -> Result<Vec<AngularRow>> {
    if resolution < 8 {
        return Err(Error::InvalidSpec(format!("angular resolution {resolution} must be at least 8")));
    }
    atom.validate()?;
    let sup = MotionalState::Superposition(*spec);
    let cl = MotionalState::Mixture(*spec);
    sup.validate()?;
    let (s1, s2) = (sup.moment(1)?, sup.moment(2)?);
    let (c1, c2) = (cl.moment(1)?, cl.moment(2)?);
    let n = resolution;
    let mut rows = Vec::with_capacity((n + 1) * n);
    for i in 0..=n {
        let big_theta = PI * i as f64 / n as f64;
        for j in 0..n {
            let big_phi = 2.0 * PI * j as f64 / n as f64;
            let rate_sup = angular_rate_from_moments(big_theta, big_phi, s1, s2, atom);
            let rate_cl = angular_rate_from_moments(big_theta, big_phi, c1, c2, atom);
            rows.push(AngularRow {
                big_theta,
                big_phi,
                xi0: xi0(big_theta, big_phi),
                xi1: xi1(big_theta, big_phi),
                xi2: xi2(big_theta, big_phi),
                rate_sup,
                rate_cl,
                diff: rate_sup - rate_cl,
            });
        }
    }
    Ok(rows)
}

pub fn angular_table(file_name: &str, rows: &[AngularRow]) -> Table {
    let mut t = Table::new(file_name, &ANGULAR_HEADER);
    for r in rows {
        t.push(vec![r.big_theta, r.big_phi, r.xi0, r.xi1, r.xi2, r.rate_sup, r.rate_cl, r.diff]);
    }
    t
}

/// Riemann sum of `f` over the sphere on the map's nodes (trapezoid in Θ,
/// periodic rectangle rule in Φ).
pub fn sphere_sum<F: Fn(&AngularRow) -> f64>(rows: &[AngularRow], resolution: usize, f: F) -> f64 {
    let n = resolution;
    let (dt, dp) = (PI / n as f64, 2.0 * PI / n as f64);
    rows.iter()
        .enumerate()
        .map(|(k, r)| {
            let i = k / n;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * f(r) * r.big_theta.sin() * dt * dp
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::{delta_q, gamma_q_inv};
    use std::f64::consts::FRAC_PI_4;

    fn spec(theta: f64) -> PacketPairSpec {
        PacketPairSpec::new(theta, 0.0, 0.02, 0.03, 0.01).unwrap()
    }

    #[test]
    fn xi1_vanishes_on_equator() {
        let rows = angular_map(&spec(0.4), &AtomSpec::default(), 16).unwrap();
        for r in rows.iter().filter(|r| (r.big_theta - PI / 2.0).abs() < 1e-15) {
            assert!(r.xi1.abs() < 1e-16);
        }
        assert_eq!(rows.len(), 17 * 16);
    }

    #[test]
    fn difference_is_xi_combination() {
        for theta in [0.3, FRAC_PI_4] {
            let s = spec(theta);
            let (dq, gq) = (delta_q(&s).unwrap(), gamma_q_inv(&s).unwrap());
            for r in angular_map(&s, &AtomSpec::default(), 12).unwrap() {
                // The first-moment part drops out for an equal-weight superposition.
                let expected = r.xi1 * dq - r.xi2 * gq;
                assert!((r.diff - expected).abs() < 1e-12, "{} vs {expected}", r.diff);
            }
        }
    }

    #[test]
    fn sphere_sum_of_difference() {
        let s = spec(0.3);
        let n = 128;
        let rows = angular_map(&s, &AtomSpec::default(), n).unwrap();
        let total = sphere_sum(&rows, n, |r| r.diff);
        assert!((total - gamma_q_inv(&s).unwrap()).abs() < 1e-3 * gamma_q_inv(&s).unwrap().abs());
        assert!(angular_map(&s, &AtomSpec::default(), 7).is_err());
    }
}
