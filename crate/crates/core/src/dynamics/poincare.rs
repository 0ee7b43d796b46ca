//! Poincaré sections of the opposite-strength vortex pair.
//!
//! Section functional: height of the pair centre `m = (s₁ + s₂)/|s₁ + s₂|`
//! along the z-axis minus `level`. Crossings are refined by bisection on the
//! integrator's dense output. Each crossing is reported in the coordinates
//! `λ` = longitude of `m` and `q` = z-component of the unit separation
//! `(s₁ − s₂)/|s₁ − s₂|`.

use rayon::prelude::*;

use super::hamiltonian::hamiltonian;
use super::momentum::momentum_invariants;
use super::state::VortexState;
use super::trajectory::{integrate_trajectory_with, normalize_triples, positions_from, TrajectoryOptions};
use crate::greens::GreensEvaluator;
use crate::ode::Control;
use crate::surface::SpherePoint;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    Up,
    Down,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionSpec {
    pub level: f64,
    pub direction: CrossingDirection,
}

#[derive(Debug, Clone)]
pub struct Crossing {
    /// Index of the initial state in the family.
    pub trajectory: usize,
    pub t: f64,
    pub positions: Vec<SpherePoint>,
    pub hamiltonian: f64,
    pub momentum: Vec<f64>,
    /// `|σ|` at the refined crossing.
    pub residual: f64,
    pub lambda: f64,
    pub q: f64,
}

#[derive(Debug, Clone)]
pub struct SectionRecord {
    pub spec: SectionSpec,
    pub crossings: Vec<Crossing>,
    /// `H` at `t = 0` for each trajectory of the family.
    pub initial_hamiltonians: Vec<f64>,
    /// Largest `|H(crossing) − H(0)|` over all crossings.
    pub max_h_deviation: f64,
}

fn centre(p: &[SpherePoint]) -> crate::Vec3 {
    (p[0].vec() + p[1].vec()).normalize()
}

pub fn section_value(spec: &SectionSpec, p: &[SpherePoint]) -> f64 {
    centre(p).z - spec.level
}

/// `(λ, q)` section coordinates of a pair.
pub fn section_coordinates(p: &[SpherePoint]) -> (f64, f64) {
    let m = centre(p);
    let sep = (p[0].vec() - p[1].vec()).normalize();
    (m.y.atan2(m.x), sep.z)
}

fn wanted(dir: CrossingDirection, before: f64, after: f64) -> bool {
    let up = before < 0.0 && after >= 0.0;
    let down = before > 0.0 && after <= 0.0;
    match dir {
        CrossingDirection::Up => up,
        CrossingDirection::Down => down,
        CrossingDirection::Both => up || down,
    }
}

fn check_pair(st: &VortexState) -> Result<()> {
    let k = st.strengths();
    if st.len() != 2 || (k[0] + k[1]).abs() > 1e-12 * k[0].abs() || k[0] == 0.0 {
        return Err(Error::InvalidParameter("Poincaré sections need a pair with κ₁ = −κ₂ ≠ 0".into()));
    }
    Ok(())
}

fn section_run(
    ev: &GreensEvaluator,
    index: usize,
    st: &VortexState,
    spec: &SectionSpec,
    t_end: f64,
    tol: f64,
) -> Result<(f64, Vec<Crossing>)> {
    check_pair(st)?;
    let strengths = st.strengths().to_vec();
    let h0 = hamiltonian(ev, st)?;
    let mut crossings = Vec::new();
    let mut prev = section_value(spec, st.positions());
    let opts = TrajectoryOptions::new(tol, t_end);
    integrate_trajectory_with(ev, st, t_end, &opts, |step| {
        let now = section_value(spec, &positions_from(&step.y1));
        if wanted(spec.direction, prev, now) {
            let sigma = |t: f64| {
                let mut y = step.at(t);
                normalize_triples(&mut y);
                (section_value(spec, &positions_from(&y)), y)
            };
            let (mut a, mut b) = (step.t0, step.t1);
            let (mut fa, _) = sigma(a);
            let (mut t, mut val, mut y) = (b, now, step.y1.clone());
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let (fm, ym) = sigma(mid);
                t = mid;
                val = fm;
                y = ym;
                if fm.abs() < 1e-12 || b - a < 1e-15 * t.abs().max(1.0) {
                    break;
                }
                if (fa < 0.0) == (fm < 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            let s = VortexState::new(positions_from(&y), strengths.clone())?;
            let (lambda, q) = section_coordinates(s.positions());
            crossings.push(Crossing {
                trajectory: index,
                t,
                hamiltonian: hamiltonian(ev, &s)?,
                momentum: momentum_invariants(ev.metric(), &s),
                residual: val.abs(),
                positions: s.positions().to_vec(),
                lambda,
                q,
            });
        }
        prev = now;
        Ok(Control::Continue)
    })?;
    Ok((h0, crossings))
}

/// Integrates each pair in `family` to `t_end` (in parallel; output ordered
/// by family index, then time) and collects the section crossings.
pub fn poincare_section(
    ev: &GreensEvaluator,
    family: &[VortexState],
    spec: &SectionSpec,
    t_end: f64,
    tol: f64,
) -> Result<SectionRecord> {
    let runs = family
        .par_iter()
        .enumerate()
        .map(|(i, st)| section_run(ev, i, st, spec, t_end, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut record = SectionRecord {
        spec: *spec,
        crossings: Vec::new(),
        initial_hamiltonians: Vec::new(),
        max_h_deviation: 0.0,
    };
    for (h0, cs) in runs {
        for c in &cs {
            record.max_h_deviation = record.max_h_deviation.max((c.hamiltonian - h0).abs());
        }
        record.initial_hamiltonians.push(h0);
        record.crossings.extend(cs);
    }
    if record.crossings.is_empty() {
        log::warn!("no section crossings in [0, {t_end}]");
    }
    Ok(record)
}

/// Fits `q(λ)` by a least-squares trigonometric polynomial with `modes`
/// harmonics, separately for each trajectory, and returns the largest
/// residual: small values mean the crossings of each orbit lie on a closed
/// curve (a graph over `λ`). Trajectories with too few points are skipped.
pub fn closed_curve_deviation(record: &SectionRecord, modes: usize) -> f64 {
    let n_traj = record.initial_hamiltonians.len();
    let cols = 2 * modes + 1;
    let mut worst = 0.0f64;
    for k in 0..n_traj {
        let pts: Vec<(f64, f64)> = record
            .crossings
            .iter()
            .filter(|c| c.trajectory == k)
            .map(|c| (c.lambda, c.q))
            .collect();
        if pts.len() < cols + 2 {
            continue;
        }
        let basis = |lam: f64, j: usize| -> f64 {
            if j == 0 {
                1.0
            } else if j % 2 == 1 {
                (j.div_ceil(2) as f64 * lam).cos()
            } else {
                ((j / 2) as f64 * lam).sin()
            }
        };
        let a = nalgebra::DMatrix::from_fn(pts.len(), cols, |r, c| basis(pts[r].0, c));
        let b = nalgebra::DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
        let Ok(coef) = a.clone().svd(true, true).solve(&b, 1e-12) else {
            continue;
        };
        let resid = &a * coef - b;
        worst = worst.max(resid.amax());
    }
    worst
}
