//! Time dilation and emission signatures of a two-level atom whose centre of
//! mass is in a coherent superposition, or a classical mixture, of two
//! Gaussian momentum wave packets.
//!
//! All momenta are in units of `m c`, rates in units of the rest-frame decay
//! rate `Γ0`, and frequencies either as `ω/Ω` or as detuning `(ω - Ω)/Γ0`.

pub mod dilation;
pub mod emission;
pub mod error;
pub mod numerics;
pub mod scenarios;
pub mod selftest;
pub mod wavepackets;

pub use dilation::{
    delta_q, dilation_report, extrema_phi_pi, gamma_c_inv, gamma_q_inv, lambert_w0, mean_clock_time,
    optimize_gamma_q, DilationReport, ExtremumResult, FreeDim, GammaCForm, Objective, OptimizeRequest,
    PhiPiExtrema,
};
pub use emission::{AngularSample, AtomSpec, SpectrumGrid};
pub use error::{Error, Result};
pub use wavepackets::{
    density_mixture, density_superposition, moment_diff_closed, moment_diff_quadrature, normalization,
    MomentDiff, MotionalState, PacketPairSpec, SampledPacket,
};

/// Library version recorded in every output sidecar.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
