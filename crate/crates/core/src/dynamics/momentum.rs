use super::state::VortexState;
use crate::surface::{ConformalMetric, Symmetry};

/// Conserved momenta of the rotational symmetries of the metric.
///
/// Round (constant) factor: all three components of `Σ κ_j s_j`.
/// Axisymmetric factor: the single value `Σ κ_j A(s_j · axis)` with
/// `A(t) = ∫₀ᵗ h² dt'`, which reduces to `(Σ κ_j s_j)·axis` when `h ≡ 1`.
/// No symmetry: empty.
pub fn momentum_invariants(metric: &ConformalMetric, st: &VortexState) -> Vec<f64> {
    match metric.symmetry() {
        Symmetry::Round => {
            let m = st
                .positions()
                .iter()
                .zip(st.strengths())
                .fold(crate::Vec3::zeros(), |acc, (p, k)| acc + p.vec() * *k);
            vec![m.x, m.y, m.z]
        }
        Symmetry::Axisymmetric(axis) => {
            let j = st
                .positions()
                .iter()
                .zip(st.strengths())
                .map(|(p, k)| k * metric.axial_primitive(p.vec().dot(axis)).unwrap_or(f64::NAN))
                .sum();
            vec![j]
        }
        Symmetry::Generic => Vec::new(),
    }
}
