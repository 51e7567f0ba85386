use crate::emission::AtomSpec;
use crate::error::{Error, Result};
use crate::wavepackets::PacketPairSpec;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioName {
    #[serde(rename = "fig1a")]
    Fig1a,
    #[serde(rename = "fig1b")]
    Fig1b,
    #[serde(rename = "fig1c")]
    Fig1c,
    #[serde(rename = "deltaq-a")]
    DeltaQa,
    #[serde(rename = "deltaq-b")]
    DeltaQb,
    #[serde(rename = "deltaq-c")]
    DeltaQc,
    #[serde(rename = "angular")]
    Angular,
    #[serde(rename = "fig2a")]
    Fig2a,
    #[serde(rename = "fig2b")]
    Fig2b,
    #[serde(rename = "fig2c")]
    Fig2c,
    #[serde(rename = "fig2d")]
    Fig2d,
    #[serde(rename = "fig3")]
    Fig3,
    #[serde(rename = "survival")]
    Survival,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 13] = [
        ScenarioName::Fig1a,
        ScenarioName::Fig1b,
        ScenarioName::Fig1c,
        ScenarioName::DeltaQa,
        ScenarioName::DeltaQb,
        ScenarioName::DeltaQc,
        ScenarioName::Angular,
        ScenarioName::Fig2a,
        ScenarioName::Fig2b,
        ScenarioName::Fig2c,
        ScenarioName::Fig2d,
        ScenarioName::Fig3,
        ScenarioName::Survival,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Fig1a => "fig1a",
            ScenarioName::Fig1b => "fig1b",
            ScenarioName::Fig1c => "fig1c",
            ScenarioName::DeltaQa => "deltaq-a",
            ScenarioName::DeltaQb => "deltaq-b",
            ScenarioName::DeltaQc => "deltaq-c",
            ScenarioName::Angular => "angular",
            ScenarioName::Fig2a => "fig2a",
            ScenarioName::Fig2b => "fig2b",
            ScenarioName::Fig2c => "fig2c",
            ScenarioName::Fig2d => "fig2d",
            ScenarioName::Fig3 => "fig3",
            ScenarioName::Survival => "survival",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "unknown scenario '{s}'; valid names: {}",
                    Self::valid_names()
                ))
            })
    }
}

/// Partial parameter set, as read from a config file or command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub scenario: Option<String>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub u1: Option<f64>,
    pub u2: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub line_ratio: Option<f64>,
    pub grid: Option<usize>,
    /// Frequency points per spectrum.
    pub omega_points: Option<usize>,
    /// Largest |u2 - u1| of a sweep, in units of delta.
    pub separation_max: Option<f64>,
    /// End of the survival time grid, in units of 1/Γ0.
    pub t_max: Option<f64>,
    pub out: Option<String>,
    pub json: Option<bool>,
}

impl ConfigOverrides {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("config file: {e}")))
    }

    /// Fields of `other` that are set replace those of `self`.
    pub fn merged_with(&self, other: &ConfigOverrides) -> ConfigOverrides {
        macro_rules! pick {
            ($($f:ident),*) => {
                ConfigOverrides { $($f: other.$f.clone().or_else(|| self.$f.clone())),* }
            };
        }
        pick!(scenario, theta, phi, u1, u2, delta, epsilon, line_ratio, grid, omega_points, separation_max, t_max, out, json)
    }
}

/// Fully resolved parameters of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    /// For sweeps, only `u1 + u2` and the non-swept angle are used.
    pub packets: PacketPairSpec,
    pub atom: AtomSpec,
    pub grid: usize,
    pub omega_points: usize,
    pub separation_max: f64,
    pub t_max: f64,
}

pub const DEFAULT_GRID: usize = 128;
pub const DEFAULT_OMEGA_POINTS: usize = 2048;
pub const DEFAULT_SEPARATION_MAX: f64 = 6.0;

impl ScenarioConfig {
    pub fn defaults(scenario: ScenarioName) -> Self {
        use ScenarioName::*;
        let fig1 = |theta: f64, phi: f64| PacketPairSpec {
            theta,
            phi,
            u1: 0.02,
            u2: 0.03,
            delta: 0.01,
        };
        let fig2 = |delta: f64| PacketPairSpec {
            theta: FRAC_PI_4,
            phi: 0.0,
            u1: 2e-8,
            u2: 4e-8,
            delta,
        };
        let (packets, line_ratio) = match scenario {
            Fig1a => (fig1(FRAC_PI_4, 0.0), 1.5e9),
            Fig1b => (fig1(FRAC_PI_4, 0.0), 1.5e9),
            Fig1c => (fig1(FRAC_PI_4, PI), 1.5e9),
            DeltaQa => (fig1(FRAC_PI_8, 0.0), 1.5e9),
            DeltaQb => (fig1(FRAC_PI_8, 0.0), 1.5e9),
            DeltaQc => (fig1(FRAC_PI_8, PI), 1.5e9),
            Angular => (fig1(FRAC_PI_8, 0.0), 1.5e9),
            Fig2a => (fig2(6e-9), 1.5e9),
            Fig2b => (fig2(8e-9), 1.5e9),
            Fig2c => (fig2(6e-9), 1.5e17),
            Fig2d => (fig2(8e-9), 1.5e17),
            Fig3 => (fig2(8e-9), 1.5e9),
            Survival => (
                PacketPairSpec {
                    theta: FRAC_PI_4,
                    phi: 0.0,
                    u1: 0.015,
                    u2: 0.035,
                    delta: 0.01,
                },
                1.5e9,
            ),
        };
        Self {
            scenario,
            packets,
            atom: AtomSpec {
                epsilon: 0.0,
                line_ratio,
            },
            grid: DEFAULT_GRID,
            omega_points: DEFAULT_OMEGA_POINTS,
            separation_max: DEFAULT_SEPARATION_MAX,
            t_max: 5.0,
        }
    }

    /// Defaults for the scenario named in `overrides`, then the overrides.
    pub fn resolve(overrides: &ConfigOverrides) -> Result<Self> {
        let name = overrides
            .scenario
            .as_deref()
            .ok_or_else(|| Error::InvalidSpec("no scenario name given".into()))?
            .parse()?;
        let mut c = Self::defaults(name);
        c.apply(overrides);
        c.validate()?;
        Ok(c)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        let p = &mut self.packets;
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(p.theta, o.theta);
        set!(p.phi, o.phi);
        set!(p.u1, o.u1);
        set!(p.u2, o.u2);
        set!(p.delta, o.delta);
        set!(self.atom.epsilon, o.epsilon);
        set!(self.atom.line_ratio, o.line_ratio);
        set!(self.grid, o.grid);
        set!(self.omega_points, o.omega_points);
        set!(self.separation_max, o.separation_max);
        set!(self.t_max, o.t_max);
    }

    pub fn validate(&self) -> Result<()> {
        self.packets.validate()?;
        self.atom.validate()?;
        if self.grid < 2 {
            return Err(Error::InvalidSpec(format!("grid = {} must be at least 2", self.grid)));
        }
        if self.omega_points < 2 {
            return Err(Error::InvalidSpec(format!(
                "omega_points = {} must be at least 2",
                self.omega_points
            )));
        }
        if !(self.separation_max > 0.0 && self.separation_max.is_finite()) {
            return Err(Error::InvalidSpec("separation_max must be positive".into()));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidSpec("t_max must be positive".into()));
        }
        Ok(())
    }
}
