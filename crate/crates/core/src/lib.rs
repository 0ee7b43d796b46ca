//! Point vortex dynamics on closed genus-zero surfaces.
//!
//! Every surface handled here is modelled as the unit sphere carrying a
//! conformal metric `h² g₀`, where `g₀` is the round metric. The crate is
//! split along the same lines as the mathematics:
//!
//! * [`surface`]: points, charts, conformal factors, curvature, geodesics and
//!   the conformal map onto a triaxial ellipsoid.
//! * [`spectral`]: real spherical harmonics on a Gauss–Legendre grid and
//!   inversion of the Laplace–Beltrami operator.
//! * [`greens`]: Green, Robin and Batman functions for conformal metrics.
//! * [`dynamics`]: Hamiltonian, equations of motion, integrators, conserved
//!   quantities and the dipole / Poincaré-section experiments.

pub mod dynamics;
pub mod error;
pub mod greens;
pub mod ode;
pub mod quadrature;
pub mod spectral;
pub mod surface;

pub use error::{Error, Result};

/// Ambient 3-vector.
pub type Vec3 = nalgebra::Vector3<f64>;
