//! Dormand–Prince 5(4) with step-size control and 5th-order dense output.

use crate::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Options {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub t1: f64,
    /// Endpoint after the projection hook has been applied.
    pub y1: Vec<f64>,
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    /// Interpolated state at `t ∈ [t0, t1]` (unprojected).
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let h = self.t1 - self.t0;
        let th = if h == 0.0 { 1.0 } else { (t - self.t0) / h };
        let th1 = 1.0 - th;
        let r = &self.rcont;
        for i in 0..out.len() {
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.y1.len()];
        self.eval(t, &mut v);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`.
///
/// `project` is applied to every accepted endpoint (e.g. renormalising onto a
/// manifold); the derivative is re-evaluated afterwards. `observe` sees each
/// accepted step and may stop the run early. Returns the final time, state
/// and counters.
pub fn integrate<F, P, O>(
    mut f: F,
    mut project: P,
    mut observe: O,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &Options,
) -> Result<(f64, Vec<f64>, Stats)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    P: FnMut(&mut [f64]),
    O: FnMut(&DenseStep) -> Result<Control>,
{
    let n = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    project(&mut y);
    if t == t_end {
        return Ok((t, y, stats));
    }

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut err_v = vec![0.0; n];

    f(t, &y, &mut k1)?;
    stats.evaluations += 1;

    let span = (t_end - t0).abs();
    let mut h = match opts.h_init {
        Some(h) => h.abs(),
        None => initial_step(&mut f, t, &y, &k1, dir, opts, &mut stats)?,
    }
    .min(opts.h_max)
    .min(span);

    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let safe = 0.9;
    let (facc1, facc2) = (1.0 / 0.2, 1.0 / 10.0);
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        if h < opts.h_min * t.abs().max(1.0) {
            return Err(Error::StepUnderflow {
                t,
                step: h,
                closest_pair: None,
            });
        }
        let last = (t + dir * h - t_end) * dir >= -1e-12 * span.max(1.0);
        if last {
            h = (t_end - t).abs();
        }
        let hs = dir * h;

        for i in 0..n {
            ytmp[i] = y[i] + hs * A21 * k1[i];
        }
        f(t + C2 * hs, &ytmp, &mut k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * hs, &ytmp, &mut k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * hs, &ytmp, &mut k4)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * hs, &ytmp, &mut k5)?;
        for i in 0..n {
            ytmp[i] =
                y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + hs, &ytmp, &mut k6)?;
        for i in 0..n {
            y1[i] =
                y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + hs, &y1, &mut k7)?;
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..n {
            err_v[i] = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (err_v[i] / sk).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            h *= 0.1;
            stats.rejected += 1;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(expo1);
        let fac = (fac11 / facold.powf(beta) / safe).clamp(facc2, facc1);
        let mut hnew = h / fac;

        if err <= 1.0 {
            facold = err.max(1e-4);
            stats.accepted += 1;

            let mut rcont: [Vec<f64>; 5] = Default::default();
            let mut r1 = Vec::with_capacity(n);
            let mut r2 = Vec::with_capacity(n);
            let mut r3 = Vec::with_capacity(n);
            let mut r4 = Vec::with_capacity(n);
            let mut r5 = Vec::with_capacity(n);
            for i in 0..n {
                let ydiff = y1[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                r1.push(y[i]);
                r2.push(ydiff);
                r3.push(bspl);
                r4.push(ydiff - hs * k7[i] - bspl);
                r5.push(
                    hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]),
                );
            }
            rcont[0] = r1;
            rcont[1] = r2;
            rcont[2] = r3;
            rcont[3] = r4;
            rcont[4] = r5;

            let t_new = if last { t_end } else { t + hs };
            let before = y1.clone();
            project(&mut y1);
            if before == y1 {
                std::mem::swap(&mut k1, &mut k7);
            } else {
                f(t_new, &y1, &mut k1)?;
                stats.evaluations += 1;
            }
            let step = DenseStep {
                t0: t,
                t1: t_new,
                y1: y1.clone(),
                rcont,
            };
            t = t_new;
            std::mem::swap(&mut y, &mut y1);
            let ctl = observe(&step)?;
            if last || ctl == Control::Stop {
                return Ok((t, y, stats));
            }
            if hnew > opts.h_max {
                hnew = opts.h_max;
            }
            if last_rejected {
                hnew = hnew.min(h);
            }
            last_rejected = false;
            h = hnew;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= facc1.min(fac11 / safe);
        }
    }
}

fn initial_step<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    opts: &Options,
    stats: &mut Stats,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let sk: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let dnf = rms(f0);
    let dny = rms(y);
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * dny / dnf
    };
    h = h.min(opts.h_max);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + dir * h * b).collect();
    let mut f1 = vec![0.0; n];
    f(t + dir * h, &y1, &mut f1)?;
    stats.evaluations += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let der2 = rms(&diff) / h;
    let der12 = der2.max(dnf);
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    Ok((100.0 * h).min(h1).min(opts.h_max))
}
