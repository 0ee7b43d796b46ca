use crate::surface::{chordal_distance, SpherePoint};
use crate::{Error, Result, Vec3};

/// Vortices closer than this chordal distance count as collided.
pub const COLLISION_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct VortexState {
    positions: Vec<SpherePoint>,
    strengths: Vec<f64>,
    total: f64,
}

impl VortexState {
    pub fn new(positions: Vec<SpherePoint>, strengths: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidParameter("a vortex state needs at least one vortex".into()));
        }
        if positions.len() != strengths.len() {
            return Err(Error::InvalidParameter(format!(
                "{} positions but {} strengths",
                positions.len(),
                strengths.len()
            )));
        }
        if let Some(k) = strengths.iter().position(|k| !k.is_finite()) {
            return Err(Error::InvalidParameter(format!("strength of vortex {k} is not finite")));
        }
        check_collisions(&positions)?;
        let total = strengths.iter().sum();
        Ok(Self {
            positions,
            strengths,
            total,
        })
    }

    /// Rebuilds from a flat `[x1, y1, z1, …]` vector, renormalizing each point.
    pub fn from_flat(flat: &[f64], strengths: &[f64]) -> Result<Self> {
        let positions = flat
            .chunks_exact(3)
            .map(|c| SpherePoint::new(Vec3::new(c[0], c[1], c[2])))
            .collect();
        Self::new(positions, strengths.to_vec())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
    pub fn positions(&self) -> &[SpherePoint] {
        &self.positions
    }
    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }
    pub fn total_strength(&self) -> f64 {
        self.total
    }

    pub fn flat(&self) -> Vec<f64> {
        self.positions.iter().flat_map(|p| p.to_array()).collect()
    }

    /// Same positions with every strength negated.
    pub fn reversed(&self) -> Self {
        Self {
            positions: self.positions.clone(),
            strengths: self.strengths.iter().map(|k| -k).collect(),
            total: -self.total,
        }
    }

    /// Applies a rotation (or any orthogonal map) to every position.
    pub fn transformed(&self, r: &nalgebra::Matrix3<f64>) -> Self {
        Self {
            positions: self.positions.iter().map(|p| SpherePoint::new(r * p.vec())).collect(),
            strengths: self.strengths.clone(),
            total: self.total,
        }
    }
}

/// Closest pair `(i, j, chordal distance)`, if there are two or more points.
pub fn closest_pair(positions: &[SpherePoint]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = chordal_distance(&positions[i], &positions[j]);
            if best.is_none_or(|b| d < b.2) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

pub(crate) fn check_collisions(positions: &[SpherePoint]) -> Result<()> {
    match closest_pair(positions) {
        Some((i, j, d)) if d < COLLISION_GUARD => Err(Error::Collision { i, j, distance: d }),
        _ => Ok(()),
    }
}

/// Vortices with mass: positions, momenta `p_j = m_j h² ṡ_j` (ambient,
/// tangent to the sphere), masses and strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct MassVortexState {
    pub positions: Vec<SpherePoint>,
    pub momenta: Vec<Vec3>,
    pub masses: Vec<f64>,
    pub strengths: Vec<f64>,
}

impl MassVortexState {
    pub fn new(positions: Vec<SpherePoint>, momenta: Vec<Vec3>, masses: Vec<f64>, strengths: Vec<f64>) -> Result<Self> {
        let n = positions.len();
        if n == 0 || momenta.len() != n || masses.len() != n || strengths.len() != n {
            return Err(Error::InvalidParameter("mismatched mass-vortex state lengths".into()));
        }
        if let Some(k) = masses.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter(format!("mass of vortex {k} must be positive, got {}", masses[k])));
        }
        check_collisions(&positions)?;
        let momenta = positions.iter().zip(momenta).map(|(s, p)| s.tangent_part(&p)).collect();
        Ok(Self {
            positions,
            momenta,
            masses,
            strengths,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `[s₁, p₁, s₂, p₂, …]`, six numbers per vortex.
    pub fn flat(&self) -> Vec<f64> {
        self.positions
            .iter()
            .zip(&self.momenta)
            .flat_map(|(s, p)| [s.x(), s.y(), s.z(), p.x, p.y, p.z])
            .collect()
    }

    pub fn with_flat(&self, y: &[f64]) -> Self {
        let mut out = self.clone();
        for (k, c) in y.chunks_exact(6).enumerate() {
            out.positions[k] = SpherePoint::new(Vec3::new(c[0], c[1], c[2]));
            out.momenta[k] = Vec3::new(c[3], c[4], c[5]);
        }
        out
    }
}
