//! Real spherical harmonics on a Gauss–Legendre grid, and inversion of the
//! round and conformal Laplacians.

mod coeffs;
mod grid;
mod legendre;

pub use coeffs::SHCoeffs;
pub use grid::{SHField, SphereGrid};

use crate::surface::{ConformalMetric, SpherePoint, TangentVector};
use crate::Vec3;

pub fn sh_analyze(f: &SHField) -> SHCoeffs {
    f.grid().analyze(f.values())
}

pub fn sh_synthesize(c: &SHCoeffs, s: &SpherePoint) -> f64 {
    c.evaluate(s)
}

pub fn spectral_gradient(c: &SHCoeffs, s: &SpherePoint) -> TangentVector {
    c.gradient(s)
}

/// Δ₀⁻¹ on the orthogonal complement of constants; the mean is dropped.
pub fn invert_laplacian_standard(c: &SHCoeffs) -> SHCoeffs {
    if c.get(0, 0) != 0.0 {
        log::trace!("dropping mean {:e} before inverting the Laplacian", c.mean());
    }
    c.map_degree(|l| if l == 0 { 0.0 } else { -1.0 / (l * (l + 1)) as f64 })
}

/// `u` with `Δ₀u = h²(f − f̄)`, where `f̄` is the g̃-mean of `f`; `u` has zero
/// round mean. Since `Δ_g̃ = h⁻²Δ₀` this is `Δ_g̃⁻¹ f` up to a constant.
pub fn inv_laplacian_conformal(metric: &ConformalMetric, f: &SHField) -> SHCoeffs {
    let h2 = metric.h2_grid();
    assert_eq!(h2.len(), f.values().len(), "metric and field grids differ");
    let grid = f.grid();
    let weighted: Vec<f64> = h2.iter().zip(f.values()).map(|(a, b)| a * b).collect();
    let fbar = grid.integrate(&weighted) / metric.total_area();
    let rhs: Vec<f64> = h2
        .iter()
        .zip(f.values())
        .map(|(a, b)| a * (b - fbar))
        .collect();
    invert_laplacian_standard(&grid.analyze(&rhs))
}

/// Round-metric divergence of a tangent field sampled on `grid`, evaluated
/// spectrally at the grid nodes: `div V = Σᵢ eᵢ · ∇₀Vᵢ`.
pub fn divergence(grid: &SphereGrid, field: &[Vec3]) -> Vec<f64> {
    let comp = |k: usize| grid.analyze(&field.iter().map(|v| v[k]).collect::<Vec<_>>());
    let (cx, cy, cz) = (comp(0), comp(1), comp(2));
    grid.points()
        .map(|p| cx.gradient(&p).vec.x + cy.gradient(&p).vec.y + cz.gradient(&p).vec.z)
        .collect()
}
