//! Vortex dynamics: the Hamiltonian, equations of motion, conserved
//! quantities, vortices with mass, and the dipole and Poincaré-section
//! experiments.
//!
//! Orientation: the symplectic gradient is `sgrad f = s × ∇₀f / h²`, so a
//! positive vortex makes nearby markers circle counterclockwise seen from
//! outside the sphere.

mod dipole;
mod hamiltonian;
mod mass;
mod momentum;
mod poincare;
mod state;
mod trajectory;

pub use dipole::{
    convergence_order, dipole_experiment, dipole_initial_state, dipole_sweep, pair_midpoint, DipoleReport, DipoleRun,
    DipoleSettings,
};
pub use hamiltonian::{
    hamiltonian, hamiltonian_conformal_rule, hamiltonian_gradients, marker_velocity, planar_velocities,
    reduced_hamiltonian, reduced_velocities, single_vortex_field, stream_function, vortex_velocities,
};
pub use mass::{integrate_mass_vortices, mass_energy, mass_vortex_rhs, MassOptions, MassSample, MassTrajectory};
pub use momentum::momentum_invariants;
pub use poincare::{
    closed_curve_deviation, poincare_section, section_coordinates, section_value, Crossing, CrossingDirection,
    SectionRecord, SectionSpec,
};
pub use state::{closest_pair, MassVortexState, VortexState, COLLISION_GUARD};
pub use trajectory::{
    integrate_trajectory, integrate_trajectory_with, Diagnostics, Sample, Trajectory, TrajectoryOptions,
};
