//! Invariant suite behind `surfvortex validate`.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use surfvortex_core::dynamics::*;
use surfvortex_core::greens::{green_standard, robin_standard, GreensEvaluator, GREEN_CONSTANT};
use surfvortex_core::quadrature::adaptive;
use surfvortex_core::spectral::*;
use surfvortex_core::surface::*;
use surfvortex_core::{Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    /// `measured >= tolerance` passes instead of `measured < tolerance`.
    pub at_least: bool,
    pub error: Option<String>,
    pub seconds: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && if self.at_least {
                self.measured >= self.tolerance
            } else {
                self.measured < self.tolerance
            }
    }
}

/// Evaluators used by the suite; `robin_shift` corrupts the Robin constant.
struct Ctx {
    robin_shift: f64,
}

impl Ctx {
    fn ev(&self, m: ConformalMetric) -> GreensEvaluator {
        let ev = GreensEvaluator::new(Arc::new(m));
        if self.robin_shift != 0.0 {
            ev.with_corrupted_robin_constant(self.robin_shift)
        } else {
            ev
        }
    }
    fn spheroid(&self, degree: usize) -> Result<GreensEvaluator> {
        Ok(self.ev(ConformalMetric::spheroid(1.0, 0.8, degree)?))
    }
    fn triaxial(&self, degree: usize) -> Result<GreensEvaluator> {
        Ok(self.ev(ellipsoid_conformal_factor(1.2, 1.0, 0.8, degree)?.0))
    }
}

fn point(rng: &mut impl Rng) -> SpherePoint {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    SpherePoint::from_xyz(r * phi.cos(), r * phi.sin(), z)
}

fn separated_state(rng: &mut impl Rng, strengths: &[f64]) -> Result<VortexState> {
    loop {
        let p: Vec<SpherePoint> = strengths.iter().map(|_| point(rng)).collect();
        if closest_pair(&p).is_none_or(|(_, _, d)| d > 0.3) {
            return VortexState::new(p, strengths.to_vec());
        }
    }
}

/// `∫ f dA₀` in polar coordinates about `s0`.
fn polar_integral(s0: &SpherePoint, f: impl Fn(&SpherePoint) -> f64) -> Result<f64> {
    let (e1, e2) = s0.tangent_frame();
    let n = 96;
    adaptive(
        |th: f64| {
            if th < 1e-9 {
                return 0.0;
            }
            let ring: f64 = (0..n)
                .map(|k| {
                    let az = 2.0 * PI * k as f64 / n as f64;
                    f(&SpherePoint::new(s0.vec() * th.cos() + (e1 * az.cos() + e2 * az.sin()) * th.sin()))
                })
                .sum();
            ring * 2.0 * PI / n as f64 * th.sin()
        },
        0.0,
        PI,
        1e-12,
    )
}

/// Richardson limit `d → 0` of a quantity with `O(d²)` error.
fn limit(f: impl Fn(f64) -> f64) -> f64 {
    (100.0 * f(1e-4) - f(1e-3)) / 99.0
}

type CheckFn = fn(&Ctx) -> Result<f64>;

struct Spec {
    name: &'static str,
    tolerance: f64,
    at_least: bool,
    full_only: bool,
    run: CheckFn,
}

const fn below(name: &'static str, tolerance: f64, full_only: bool, run: CheckFn) -> Spec {
    Spec { name, tolerance, at_least: false, full_only, run }
}

const CHECKS: &[Spec] = &[
    below("quadrature: mean of ln sin(θ/2)/2π", 1e-12, false, |_| {
        let m = adaptive(|t: f64| if t == 0.0 { 0.0 } else { (0.5 * t).sin().ln() / (2.0 * PI) * t.sin() * 0.5 }, 0.0, PI, 1e-14)?;
        Ok((m + GREEN_CONSTANT).abs())
    }),
    below("spectral: eigenfunction inversion", 1e-10, false, |_| {
        let grid = SphereGrid::new(24);
        let mut worst = 0.0f64;
        for l in 0..=24usize {
            for m in [-(l as i64), 0, l as i64] {
                let y = SHCoeffs::delta(24, l, m);
                let inv = invert_laplacian_standard(&grid.analyze(&grid.synthesize(&y.laplacian())));
                let mut target = y;
                *target.get_mut(0, 0) = 0.0;
                worst = grid.synthesize(&inv.sub(&target)).iter().fold(worst, |a, v| a.max(v.abs()));
            }
        }
        Ok(worst)
    }),
    below("spectral: conformal inverse forward residual", 1e-8, false, |_| {
        let metric = ConformalMetric::spheroid(1.0, 0.8, 32)?;
        let grid = metric.grid().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut c = SHCoeffs::zeros(32);
        for l in 0..=12usize {
            for m in -(l as i64)..=l as i64 {
                *c.get_mut(l, m) = rng.gen_range(-1.0..1.0) / (1.0 + l as f64);
            }
        }
        let f = SHField::new(grid.clone(), grid.synthesize(&c));
        let u = inv_laplacian_conformal(&metric, &f);
        let h2 = metric.h2_grid();
        let weighted: Vec<f64> = h2.iter().zip(f.values()).map(|(a, b)| a * b).collect();
        let fbar = grid.integrate(&weighted) / metric.total_area();
        let lap = grid.synthesize(&u.laplacian());
        Ok(lap.iter().zip(h2).zip(f.values()).fold(0.0, |a, ((l, h2), f)| a.max((l - h2 * (f - fbar)).abs())))
    }),
    below("greens: symmetry", 1e-10, false, |ctx| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for ev in [ctx.spheroid(32)?, ctx.triaxial(32)?] {
            for _ in 0..10 {
                let (a, b) = (point(&mut rng), point(&mut rng));
                worst = worst.max((ev.green(&a, &b)? - ev.green(&b, &a)?).abs());
            }
        }
        Ok(worst)
    }),
    below("greens: zero g̃-mean", 1e-6, false, |ctx| {
        let ev = ctx.spheroid(32)?;
        let m = ev.metric();
        let s0 = SpherePoint::from_xyz(0.3, -0.2, 0.9);
        let total = polar_integral(&s0, |p| ev.green(p, &s0).unwrap_or(0.0) * m.h(p).powi(2))?;
        Ok((total / m.total_area()).abs())
    }),
    below("robin: round diagonal limit", 1e-6, false, |ctx| {
        let ev = ctx.ev(ConformalMetric::round(8));
        let s = SpherePoint::from_xyz(0.1, 0.7, -0.3);
        let (e1, _) = s.tangent_frame();
        let lim = limit(|d| green_standard(&s.exp_round(&(e1 * d)), &s).unwrap_or(f64::NAN) - d.ln() / (2.0 * PI));
        Ok((lim - ev.robin(&s)).abs())
    }),
    below("robin: conformal diagonal limit", 1e-5, false, |ctx| {
        let ev = ctx.spheroid(32)?;
        let s = SpherePoint::from_xyz(0.5, -0.4, 0.45);
        let h = ev.metric().h(&s);
        let (e1, _) = s.tangent_frame();
        let lim = limit(|d| {
            let f = |sgn: f64| ev.green(&s.exp_round(&(e1 * (sgn * d))), &s).unwrap_or(f64::NAN) - (h * d).ln() / (2.0 * PI);
            0.5 * (f(1.0) + f(-1.0))
        });
        Ok((lim - ev.robin(&s)).abs())
    }),
    below("dynamics: dH · velocities", 1e-10, false, |ctx| {
        let ev = ctx.triaxial(32)?;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let st = separated_state(&mut rng, &[1.0, -0.4, 0.7])?;
        let g = hamiltonian_gradients(&ev, &st)?;
        let v = vortex_velocities(&ev, &st)?;
        Ok(g.iter().zip(&v).map(|(g, v)| g.dot(&v.vec)).sum::<f64>().abs())
    }),
    below("dynamics: two-route conformal Hamiltonian", 1e-10, false, |ctx| {
        let ev = ctx.spheroid(32)?;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let k = [1.0, 0.6, -0.3];
        let (a, b) = (separated_state(&mut rng, &k)?, separated_state(&mut rng, &k)?);
        let direct = hamiltonian(&ev, &a)? - hamiltonian(&ev, &b)?;
        let rule = hamiltonian_conformal_rule(&ev, &a)? - hamiltonian_conformal_rule(&ev, &b)?;
        Ok((direct - rule).abs())
    }),
    below("dynamics: plane-chart velocities", 1e-6, false, |ctx| {
        let ev = ctx.spheroid(32)?;
        let st = VortexState::new(
            vec![SpherePoint::from_lat_lon_deg(-20.0, 15.0), SpherePoint::from_lat_lon_deg(-50.0, 120.0)],
            vec![1.0, -1.0],
        )?;
        let mut worst = 0.0f64;
        for (v, w) in vortex_velocities(&ev, &st)?.iter().zip(&planar_velocities(&ev, &st)?) {
            let p = stereo_push_forward(&v.base, &v.vec)?;
            worst = worst.max((p.x - w.x).hypot(p.y - w.y));
        }
        Ok(worst)
    }),
    below("conservation: round 3-vortex relative H drift", 1e-8, false, |ctx| {
        let ev = ctx.ev(ConformalMetric::round(8));
        let st = VortexState::new(
            vec![
                SpherePoint::from_lat_lon_deg(40.0, 0.0),
                SpherePoint::from_lat_lon_deg(-10.0, 100.0),
                SpherePoint::from_lat_lon_deg(5.0, -130.0),
            ],
            vec![1.0, -0.6, 0.8],
        )?;
        let d = integrate_trajectory(&ev, &st, 20.0, 1e-10)?.diagnostics;
        Ok(d.max_rel_dh.max(d.max_momentum_drift))
    }),
    below("conservation: spheroid axial momentum", 1e-8, false, |ctx| {
        let ev = ctx.spheroid(32)?;
        let st = VortexState::new(
            vec![SpherePoint::from_lat_lon_deg(30.0, 0.0), SpherePoint::from_lat_lon_deg(-20.0, 50.0)],
            vec![1.0, -1.0],
        )?;
        Ok(integrate_trajectory(&ev, &st, 20.0, 1e-10)?.diagnostics.max_momentum_drift)
    }),
    below("greens: off-diagonal Laplacian", 1e-3, true, |ctx| {
        let ev = ctx.triaxial(48)?;
        let m = ev.metric();
        let grid = m.grid().clone();
        let s0 = SpherePoint::from_xyz(0.3, 0.5, 0.6);
        let smooth: Vec<f64> = grid
            .points()
            .map(|p| ev.green(&p, &s0).unwrap_or(0.0) - green_standard(&p, &s0).unwrap_or(0.0))
            .collect();
        let lap = grid.synthesize(&grid.analyze(&smooth).laplacian());
        let mut worst = 0.0f64;
        for ((p, l), h2) in grid.points().zip(&lap).zip(m.h2_grid()) {
            if geodesic_distance_standard(&p, &s0) >= 0.3 {
                worst = worst.max(((l - 1.0 / (4.0 * PI)) / h2 + 1.0 / m.total_area()).abs());
            }
        }
        Ok(worst)
    }),
    below("robin: Steiner identity at L = 48", 1e-4, true, |ctx| Ok(ctx.spheroid(48)?.steiner_residual())),
    below("robin: standard constant vs closed form", 1e-12, true, |ctx| {
        Ok((ctx.ev(ConformalMetric::round(8)).robin_constant() - robin_standard()).abs())
    }),
    Spec {
        name: "dipole: convergence order on the spheroid",
        tolerance: 1.8,
        at_least: true,
        full_only: true,
        run: |ctx| {
            let ev = ctx.spheroid(32)?;
            let s0 = SpherePoint::from_lat_lon_deg(15.0, 0.0);
            let r = dipole_sweep(&ev, &s0, &Vec3::new(0.0, 1.0, 0.6), &[0.1, 0.05, 0.025], &DipoleSettings::default())?;
            Ok(r.fitted_order.unwrap_or(f64::NAN))
        },
    },
    below("mass vortices: κ = 0 vs geodesic", 1e-8, true, |ctx| {
        let ev = ctx.spheroid(32)?;
        let m = ev.metric();
        let s0 = SpherePoint::from_lat_lon_deg(20.0, 10.0);
        let v0 = s0.tangent_part(&Vec3::new(0.2, 0.9, 0.4));
        let st = MassVortexState::new(vec![s0], vec![v0 * m.h(&s0).powi(2)], vec![1.0], vec![0.0])?;
        let run = integrate_mass_vortices(&ev, &st, 5.0, 1e-12, 0.25, MassOptions::default())?;
        let geo = geodesic_integrate(m, &s0, &TangentVector::new(s0, v0), 5.0, 1e-12)?;
        Ok(run.samples.iter().map(|s| chordal_distance(&s.positions[0], &geo.at(s.t).0)).fold(0.0, f64::max))
    }),
    below("poincare: spheroid crossings on closed curves", 1e-3, true, |ctx| {
        let ev = ctx.spheroid(32)?;
        let family = [-30.0, -20.0]
            .iter()
            .map(|lat| {
                dipole_initial_state(ev.metric(), &SpherePoint::from_lat_lon_deg(*lat, 0.0), &Vec3::new(0.0, 1.0, 0.4), 0.15, 1e-12)
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = SectionSpec {
            level: 0.0,
            direction: CrossingDirection::Up,
        };
        let rec = poincare_section(&ev, &family, &spec, 60.0, 1e-11)?;
        if rec.crossings.len() < 10 {
            return Ok(f64::INFINITY);
        }
        Ok(closed_curve_deviation(&rec, 4))
    }),
    below("surface: triaxial conformality residual", 1e-6, true, |_| {
        let map = EllipsoidMap::new(1.2, 1.0, 0.8)?;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            worst = worst.max(map.conformality_residual(&point(&mut rng), 1e-5)?);
        }
        Ok(worst)
    }),
];

/// Runs the suite (checks in parallel, results in a fixed order).
pub fn validate_suite(level: Level, robin_shift: f64) -> Vec<CheckOutcome> {
    let ctx = Ctx { robin_shift };
    CHECKS
        .par_iter()
        .filter(|c| level == Level::Full || !c.full_only)
        .map(|c| {
            let start = Instant::now();
            let (measured, error) = match (c.run)(&ctx) {
                Ok(v) if v.is_nan() => (v, Some("not a number".to_string())),
                Ok(v) => (v, None),
                Err(e) => (f64::NAN, Some(e.to_string())),
            };
            CheckOutcome {
                name: c.name,
                measured,
                tolerance: c.tolerance,
                at_least: c.at_least,
                error,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

pub fn format_table(outcomes: &[CheckOutcome]) -> String {
    let width = outcomes.iter().map(|o| o.name.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for o in outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        let rel = if o.at_least { "≥" } else { "<" };
        let pad = width - o.name.chars().count();
        let detail = match &o.error {
            Some(e) => format!("error: {e}"),
            None => format!("{:.3e} {rel} {:e}", o.measured, o.tolerance),
        };
        s.push_str(&format!("{status}  {}{}  {detail}  ({:.2}s)\n", o.name, " ".repeat(pad), o.seconds));
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    s.push_str(&format!("{} checks, {} failed\n", outcomes.len(), failed));
    s
}
