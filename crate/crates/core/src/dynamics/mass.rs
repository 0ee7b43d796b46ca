//! Vortices carrying mass: Hamilton's equations for the twisted symplectic
//! form `Ω_can + Σ κ_j h² ω₀(s_j)` with kinetic energy `Σ |p_j|²/(2 m_j h²)`.

use super::state::{check_collisions, MassVortexState};
use crate::greens::GreensEvaluator;
use crate::ode::{self, Control, Options};
use crate::surface::SpherePoint;
use crate::{Error, Result, Vec3};

/// Whether each vortex also feels its own Robin drift `½ κ_j² R̃(s_j)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MassOptions {
    pub robin_self_term: bool,
}

fn potential_gradients(ev: &GreensEvaluator, st: &MassVortexState, opts: MassOptions) -> Result<Vec<Vec3>> {
    let (p, k) = (&st.positions, &st.strengths);
    let n = p.len();
    let mut g = vec![Vec3::zeros(); n];
    for i in 0..n {
        if opts.robin_self_term {
            g[i] += ev.grad_robin(&p[i]) * (0.5 * k[i] * k[i]);
        }
        for j in 0..n {
            if j != i && k[i] * k[j] != 0.0 {
                g[i] += ev.grad_green(&p[i], &p[j])? * (k[i] * k[j]);
            }
        }
    }
    Ok(g)
}

/// Interaction energy `Σ_{i<j} κ_i κ_j G̃` (+ Robin self terms if enabled)
/// plus kinetic energy.
pub fn mass_energy(ev: &GreensEvaluator, st: &MassVortexState, opts: MassOptions) -> Result<f64> {
    check_collisions(&st.positions)?;
    let (p, k) = (&st.positions, &st.strengths);
    let mut e = 0.0;
    for i in 0..p.len() {
        let h = ev.metric().h(&p[i]);
        e += st.momenta[i].norm_squared() / (2.0 * st.masses[i] * h * h);
        if opts.robin_self_term {
            e += 0.5 * k[i] * k[i] * ev.robin(&p[i]);
        }
        for j in i + 1..p.len() {
            if k[i] * k[j] != 0.0 {
                e += k[i] * k[j] * ev.green(&p[i], &p[j])?;
            }
        }
    }
    Ok(e)
}

/// `(ṡ_j, ṗ_j)` with `ṡ = p/(m h²)` and, writing `v = ṡ`,
/// `ṗ = m h² |v|² (∇₀ ln h − s) − ∇₀V + κ h² (v × s)`.
/// The first term is the geodesic (and constraint) force; the last is the
/// Lorentz-type force of the vortex's own circulation.
pub fn mass_vortex_rhs(ev: &GreensEvaluator, st: &MassVortexState, opts: MassOptions) -> Result<Vec<(Vec3, Vec3)>> {
    if let Some(k) = st.masses.iter().position(|m| *m <= 0.0) {
        return Err(Error::InvalidParameter(format!("vortex {k} has non-positive mass")));
    }
    check_collisions(&st.positions)?;
    let gv = potential_gradients(ev, st, opts)?;
    let mut out = Vec::with_capacity(st.len());
    for j in 0..st.len() {
        let s = &st.positions[j];
        let (h, gl) = ev.metric().h_and_grad_ln_h(s);
        let h2 = h * h;
        let m = st.masses[j];
        let v = s.tangent_part(&st.momenta[j]) / (m * h2);
        let v2 = v.norm_squared();
        let force = (gl - s.vec()) * (m * h2 * v2) - gv[j] + v.cross(s.vec()) * (st.strengths[j] * h2);
        out.push((v, force));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MassSample {
    pub t: f64,
    pub positions: Vec<SpherePoint>,
    pub momenta: Vec<Vec3>,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct MassTrajectory {
    pub samples: Vec<MassSample>,
    pub energy_initial: f64,
    pub max_energy_drift: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

fn project_mass(y: &mut [f64]) {
    for c in y.chunks_exact_mut(6) {
        let s = Vec3::new(c[0], c[1], c[2]).normalize();
        let p = Vec3::new(c[3], c[4], c[5]);
        let p = p - s * s.dot(&p);
        c[..3].copy_from_slice(s.as_slice());
        c[3..].copy_from_slice(p.as_slice());
    }
}

pub fn integrate_mass_vortices(
    ev: &GreensEvaluator,
    st: &MassVortexState,
    t_end: f64,
    tol: f64,
    sample_interval: f64,
    opts: MassOptions,
) -> Result<MassTrajectory> {
    if !(t_end > 0.0 && tol > 0.0 && sample_interval > 0.0) {
        return Err(Error::InvalidParameter("time, tolerance and sample interval must be positive".into()));
    }
    let template = st.clone();
    let record = |t: f64, y: &[f64]| -> Result<MassSample> {
        let s = template.with_flat(y);
        Ok(MassSample {
            t,
            energy: mass_energy(ev, &s, opts)?,
            positions: s.positions,
            momenta: s.momenta,
        })
    };
    let y0 = st.flat();
    let mut samples = vec![record(0.0, &y0)?];
    let n_samples = (t_end / sample_interval).floor() as usize;
    let mut next = 1usize;
    let (t_final, y_final, stats) = ode::integrate(
        |_, y, dy| {
            let s = template.with_flat(y);
            for (k, (v, f)) in mass_vortex_rhs(ev, &s, opts)?.into_iter().enumerate() {
                dy[6 * k..6 * k + 3].copy_from_slice(v.as_slice());
                dy[6 * k + 3..6 * k + 6].copy_from_slice(f.as_slice());
            }
            Ok(())
        },
        project_mass,
        |step| {
            while next <= n_samples {
                let ts = next as f64 * sample_interval;
                if ts > step.t1 || ts >= t_end {
                    break;
                }
                let mut y = step.at(ts);
                project_mass(&mut y);
                samples.push(record(ts, &y)?);
                next += 1;
            }
            Ok(Control::Continue)
        },
        0.0,
        &y0,
        t_end,
        &Options::with_tol(tol),
    )?;
    if samples.last().is_none_or(|s| s.t < t_final) {
        samples.push(record(t_final, &y_final)?);
    }
    let e0 = samples[0].energy;
    let max_energy_drift = samples.iter().map(|s| (s.energy - e0).abs()).fold(0.0, f64::max);
    Ok(MassTrajectory {
        samples,
        energy_initial: e0,
        max_energy_drift,
        steps_accepted: stats.accepted,
        steps_rejected: stats.rejected,
    })
}
