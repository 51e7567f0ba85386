//! Numerical building blocks shared by the physics modules.

pub mod optimize;
pub mod quadrature;
pub mod roots;
pub mod sphere;

pub use optimize::{golden_section, grid_seed, linspace, nelder_mead, Minimum, OptimizerSpec};
pub use quadrature::{integrate, Integral, QuadratureSpec};
pub use roots::{bisect, halley};
pub use sphere::{gauss_legendre, integrate_sphere, SphereSpec};
