use super::hamiltonian::{hamiltonian, vortex_velocities};
use super::momentum::momentum_invariants;
use super::state::{closest_pair, VortexState};
use crate::greens::GreensEvaluator;
use crate::ode::{self, Control, DenseStep, Options};
use crate::surface::SpherePoint;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryOptions {
    /// Relative and absolute tolerance of the embedded RK pair.
    pub tol: f64,
    /// Spacing of recorded samples; the final time is always recorded.
    pub sample_interval: f64,
    pub max_steps: usize,
}

impl TrajectoryOptions {
    pub fn new(tol: f64, sample_interval: f64) -> Self {
        Self {
            tol,
            sample_interval,
            max_steps: 20_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub positions: Vec<SpherePoint>,
    pub hamiltonian: f64,
    pub momentum: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub h_initial: f64,
    pub h_final: f64,
    pub max_abs_dh: f64,
    /// `max |H(t) − H(0)| / |H(0)|` over the samples.
    pub max_rel_dh: f64,
    /// Whether `max |ΔH| ≤ 100 · tol · |H(0)|` held.
    pub energy_contract_ok: bool,
    pub momentum_initial: Vec<f64>,
    pub momentum_final: Vec<f64>,
    pub max_momentum_drift: f64,
    /// Largest `| |s| − 1 |` over the recorded samples.
    pub max_norm_error: f64,
    /// Largest `| |s| − 1 |` removed by the per-step renormalization.
    pub max_projection_correction: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub strengths: Vec<f64>,
    pub samples: Vec<Sample>,
    pub diagnostics: Diagnostics,
}

pub(crate) fn positions_from(y: &[f64]) -> Vec<SpherePoint> {
    y.chunks_exact(3).map(|c| SpherePoint::new(Vec3::new(c[0], c[1], c[2]))).collect()
}

pub(crate) fn normalize_triples(y: &mut [f64]) {
    for c in y.chunks_exact_mut(3) {
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        c.iter_mut().for_each(|v| *v /= n);
    }
}

pub(crate) fn velocity_rhs(ev: &GreensEvaluator, strengths: &[f64], y: &[f64], dy: &mut [f64]) -> Result<()> {
    let st = VortexState::new(positions_from(y), strengths.to_vec())?;
    for (k, v) in vortex_velocities(ev, &st)?.into_iter().enumerate() {
        dy[3 * k..3 * k + 3].copy_from_slice(v.vec.as_slice());
    }
    Ok(())
}

/// Integrates the vortex system to `t_end`, recording samples at
/// `sample_interval`. `on_step` sees every accepted step (with dense output
/// over the step) and may stop the run.
pub fn integrate_trajectory_with<F>(
    ev: &GreensEvaluator,
    st: &VortexState,
    t_end: f64,
    opts: &TrajectoryOptions,
    mut on_step: F,
) -> Result<Trajectory>
where
    F: FnMut(&DenseStep) -> Result<Control>,
{
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("end time must be positive, got {t_end}")));
    }
    if !(opts.sample_interval > 0.0) {
        return Err(Error::InvalidParameter("sample interval must be positive".into()));
    }
    let strengths = st.strengths().to_vec();
    let metric = ev.metric();
    let record = |t: f64, positions: Vec<SpherePoint>| -> Result<Sample> {
        let s = VortexState::new(positions, strengths.clone())?;
        Ok(Sample {
            t,
            hamiltonian: hamiltonian(ev, &s)?,
            momentum: momentum_invariants(metric, &s),
            positions: s.positions().to_vec(),
        })
    };

    let mut samples = vec![record(0.0, st.positions().to_vec())?];
    let mut next_sample = 1usize;
    let mut last_state = st.flat();
    let mut max_projection_correction = 0.0f64;
    let n_samples = (t_end / opts.sample_interval).floor() as usize;

    let ode_opts = Options {
        max_steps: opts.max_steps,
        ..Options::with_tol(opts.tol)
    };
    let result = ode::integrate(
        |_, y, dy| velocity_rhs(ev, &strengths, y, dy),
        |y: &mut [f64]| {
            for c in y.chunks_exact(3) {
                let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                max_projection_correction = max_projection_correction.max((n - 1.0).abs());
            }
            normalize_triples(y)
        },
        |step| {
            while next_sample <= n_samples {
                let ts = next_sample as f64 * opts.sample_interval;
                if ts > step.t1 || ts >= t_end {
                    break;
                }
                let mut y = step.at(ts);
                normalize_triples(&mut y);
                samples.push(record(ts, positions_from(&y))?);
                next_sample += 1;
            }
            last_state.clone_from(&step.y1);
            on_step(step)
        },
        0.0,
        &st.flat(),
        t_end,
        &ode_opts,
    );
    let (t_final, y_final, stats) = match result {
        Ok(r) => r,
        Err(Error::StepUnderflow { t, step, .. }) => {
            let pair = closest_pair(&positions_from(&last_state)).map(|(i, j, _)| (i, j));
            return Err(Error::StepUnderflow {
                t,
                step,
                closest_pair: pair,
            });
        }
        Err(e) => return Err(e),
    };
    if samples.last().is_none_or(|s| s.t < t_final) {
        samples.push(record(t_final, positions_from(&y_final))?);
    }

    let h0 = samples[0].hamiltonian;
    let max_abs_dh = samples.iter().map(|s| (s.hamiltonian - h0).abs()).fold(0.0, f64::max);
    let m0 = samples[0].momentum.clone();
    let max_momentum_drift = samples
        .iter()
        .map(|s| s.momentum.iter().zip(&m0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let last = samples.last().expect("at least one sample");
    let diagnostics = Diagnostics {
        h_initial: h0,
        h_final: last.hamiltonian,
        max_abs_dh,
        max_rel_dh: if h0 != 0.0 { max_abs_dh / h0.abs() } else { max_abs_dh },
        energy_contract_ok: max_abs_dh <= 100.0 * opts.tol * h0.abs().max(f64::MIN_POSITIVE),
        momentum_initial: m0,
        momentum_final: last.momentum.clone(),
        max_momentum_drift,
        max_norm_error: samples
            .iter()
            .flat_map(|s| s.positions.iter().map(|p| (p.vec().norm() - 1.0).abs()))
            .fold(0.0, f64::max),
        max_projection_correction,
        steps_accepted: stats.accepted,
        steps_rejected: stats.rejected,
        rhs_evaluations: stats.evaluations,
    };
    if !diagnostics.energy_contract_ok {
        log::warn!(
            "energy drift {:e} exceeds 100·tol·|H0| = {:e}",
            max_abs_dh,
            100.0 * opts.tol * h0.abs()
        );
    }
    Ok(Trajectory {
        strengths,
        samples,
        diagnostics,
    })
}

pub fn integrate_trajectory(ev: &GreensEvaluator, st: &VortexState, t_end: f64, tol: f64) -> Result<Trajectory> {
    let opts = TrajectoryOptions::new(tol, t_end / 100.0);
    integrate_trajectory_with(ev, st, t_end, &opts, |_| Ok(Control::Continue))
}
