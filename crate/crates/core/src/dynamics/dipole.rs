//! A tight vortex pair travels along a geodesic: with strengths `±4πε` at
//! g̃-distance `2ε` the pair moves with unit speed, and its centre stays
//! `O(ε²)`-close to the geodesic with the same initial data.

use rayon::prelude::*;

use super::hamiltonian::vortex_velocities;
use super::state::VortexState;
use super::trajectory::{integrate_trajectory_with, TrajectoryOptions};
use crate::greens::GreensEvaluator;
use crate::ode::Control;
use crate::quadrature::GaussRule;
use crate::surface::geodesic::exp_map;
use crate::surface::{chordal_distance, geodesic_distance_standard, geodesic_integrate, ConformalMetric, SpherePoint, TangentVector};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone)]
pub struct DipoleSettings {
    pub t_end: f64,
    pub tol: f64,
    /// Number of equally spaced comparison times in `[0, T]`.
    pub samples: usize,
}

impl Default for DipoleSettings {
    fn default() -> Self {
        Self {
            t_end: 2.0,
            tol: 1e-11,
            samples: 400,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DipoleRun {
    pub epsilon: f64,
    pub strength: f64,
    /// g̃-speed of the pair centre at `t = 0`.
    pub initial_speed: f64,
    /// Sup over sample times of the chordal distance between the pair centre
    /// and the unit-speed reference geodesic at the same time.
    pub max_deviation: f64,
    /// Sup of the distance from the pair centre to the plane of the initial
    /// great circle (zero for the round sphere up to integration error).
    pub max_plane_distance: f64,
    /// `(t, centre, geodesic point)` at each comparison time.
    pub track: Vec<(f64, SpherePoint, SpherePoint)>,
}

#[derive(Debug, Clone)]
pub struct DipoleReport {
    pub runs: Vec<DipoleRun>,
    /// Least-squares slope of `ln deviation` against `ln ε`.
    pub fitted_order: Option<f64>,
}

/// Pair centre: the point halving the g̃-length of the short great-circle arc.
pub fn pair_midpoint(metric: &ConformalMetric, a: &SpherePoint, b: &SpherePoint) -> SpherePoint {
    let d = geodesic_distance_standard(a, b);
    let dir = a.tangent_part(&(b.vec() - a.vec()));
    if d == 0.0 || dir.norm() == 0.0 {
        return *a;
    }
    let e = dir.normalize();
    let at = |t: f64| SpherePoint::new(a.vec() * t.cos() + e * t.sin());
    let rule = GaussRule::new(12);
    let length = |t: f64| rule.integrate(0.0, t, |x| metric.h(&at(x)));
    let half = 0.5 * length(d);
    let mut t = 0.5 * d;
    for _ in 0..30 {
        let step = (length(t) - half) / metric.h(&at(t));
        t -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    at(t)
}

/// The pair: `+κ` at `exp(−ε n̂)`, `−κ` at `exp(+ε n̂)` with `κ = 4πε`,
/// `n̂` the g̃-unit normal `−s₀ × d`, so the pair heads along `direction`.
pub fn dipole_initial_state(metric: &ConformalMetric, s0: &SpherePoint, direction: &Vec3, eps: f64, tol: f64) -> Result<VortexState> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("dipole half-separation {eps} outside (0, 0.5)")));
    }
    let d = s0.tangent_part(direction);
    if d.norm() < 1e-12 {
        return Err(Error::InvalidParameter("dipole direction must be tangent and nonzero".into()));
    }
    let n = -s0.rotate(&d.normalize());
    let go = |sign: f64| exp_map(metric, s0, &(n * sign), eps, tol);
    let kappa = 4.0 * std::f64::consts::PI * eps;
    VortexState::new(vec![go(-1.0)?, go(1.0)?], vec![kappa, -kappa])
}

pub fn dipole_experiment(
    ev: &GreensEvaluator,
    s0: &SpherePoint,
    direction: &Vec3,
    eps: f64,
    settings: &DipoleSettings,
) -> Result<DipoleRun> {
    let metric = ev.metric();
    let st = dipole_initial_state(metric, s0, direction, eps, settings.tol * 1e-1)?;
    let (p, kappa) = (st.positions(), st.strengths()[0]);

    let vel = vortex_velocities(ev, &st)?;
    // the centre moves faster than either vortex (they ride parallel
    // curves), so differentiate the midpoint map itself
    let mid0 = pair_midpoint(metric, &p[0], &p[1]);
    let dt = 1e-6;
    let shifted = |t: f64| pair_midpoint(metric, &p[0].exp_round(&(vel[0].vec * t)), &p[1].exp_round(&(vel[1].vec * t)));
    let centre_velocity = (shifted(dt).vec() - shifted(-dt).vec()) / (2.0 * dt);
    let initial_speed = metric.h(&mid0) * centre_velocity.norm();

    let d = s0.tangent_part(direction).normalize();
    let geo = geodesic_integrate(metric, s0, &TangentVector::new(*s0, d / metric.h(s0)), settings.t_end, settings.tol)?;
    let plane_normal = s0.vec().cross(&d).normalize();

    let sep0 = chordal_distance(&p[0], &p[1]);
    let interval = settings.t_end / settings.samples as f64;
    let opts = TrajectoryOptions::new(settings.tol, interval);
    let traj = integrate_trajectory_with(ev, &st, settings.t_end, &opts, |step| {
        let a = SpherePoint::new(Vec3::new(step.y1[0], step.y1[1], step.y1[2]));
        let b = SpherePoint::new(Vec3::new(step.y1[3], step.y1[4], step.y1[5]));
        let sep = chordal_distance(&a, &b);
        if sep > 2.0 * sep0 || sep < 0.5 * sep0 {
            return Err(Error::DipoleBreakup {
                t: step.t1,
                separation: sep,
                initial: sep0,
            });
        }
        Ok(Control::Continue)
    })?;

    let mut max_deviation = 0.0f64;
    let mut max_plane_distance = 0.0f64;
    let mut track = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let mid = pair_midpoint(metric, &s.positions[0], &s.positions[1]);
        let (g, _) = geo.at(s.t);
        max_deviation = max_deviation.max(chordal_distance(&mid, &g));
        max_plane_distance = max_plane_distance.max(mid.vec().dot(&plane_normal).abs());
        track.push((s.t, mid, g));
    }
    Ok(DipoleRun {
        epsilon: eps,
        strength: kappa,
        initial_speed,
        max_deviation,
        max_plane_distance,
        track,
    })
}

/// Runs every `ε` (in parallel, results in input order) and fits the order.
pub fn dipole_sweep(
    ev: &GreensEvaluator,
    s0: &SpherePoint,
    direction: &Vec3,
    epsilons: &[f64],
    settings: &DipoleSettings,
) -> Result<DipoleReport> {
    let runs = epsilons
        .par_iter()
        .map(|&e| dipole_experiment(ev, s0, direction, e, settings))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = runs.iter().map(|r| (r.epsilon, r.max_deviation)).collect();
    Ok(DipoleReport {
        fitted_order: convergence_order(&pts),
        runs,
    })
}

/// Slope of the least-squares line through `(ln ε, ln err)`.
pub fn convergence_order(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(e, d)| *e > 0.0 && *d > 0.0)
        .map(|(e, d)| (e.ln(), d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
