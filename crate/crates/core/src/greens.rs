//! Green, Robin and Batman functions of `h² g₀`.
//!
//! On the round sphere `G₀(s, s₀) = (1/2π) ln(|s − s₀|/2) + 1/(4π)`; the
//! constant makes the round mean vanish. For the conformal metric, with
//! `u = Δ₀⁻¹h²` (zero round mean) and `Ã` the area,
//!
//! ```text
//! G̃(s, s₀) = G₀(s, s₀) − (u(s) + u(s₀))/Ã + c̃
//! R̃(s)     = R₀ − ln h(s)/2π − 2u(s)/Ã + c̃,      c̃ = Ã⁻² ∫ h² u dA₀
//! ```
//!
//! so that `Δ_g̃ G̃ = δ − 1/Ã`, `G̃` has zero g̃-mean, and `R̃` is the regular
//! part of `G̃` on the diagonal with respect to g̃-distance.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::surface::{
    chordal_distance, geodesic_distance_standard, geodesic_integrate, ConformalMetric, SpherePoint, TangentVector,
};
use crate::{Error, Result, Vec3};

/// Additive constant of the zero-mean round Green function.
pub const GREEN_CONSTANT: f64 = 1.0 / (4.0 * PI);

/// Points closer than this (chordally) are treated as coincident.
pub const SINGULARITY_RADIUS: f64 = 1e-10;

const TWO_PI: f64 = 2.0 * PI;

fn check_distinct(s: &SpherePoint, s0: &SpherePoint) -> Result<f64> {
    let d = chordal_distance(s, s0);
    if d < SINGULARITY_RADIUS {
        Err(Error::Singularity { distance: d })
    } else {
        Ok(d)
    }
}

pub fn green_standard(s: &SpherePoint, s0: &SpherePoint) -> Result<f64> {
    let chord = check_distinct(s, s0)?;
    Ok((0.5 * chord).ln() / TWO_PI + GREEN_CONSTANT)
}

/// `lim (G₀(r, s) − ln d(r, s)/2π) = (1 − 2 ln 2)/(4π)`.
pub fn robin_standard() -> f64 {
    (1.0 - 2.0 * std::f64::consts::LN_2) / (4.0 * PI)
}

/// Gradient of `G₀(·, s₀)` at `s`.
pub fn grad_green_standard(s: &SpherePoint, s0: &SpherePoint) -> Result<Vec3> {
    let chord = check_distinct(s, s0)?;
    let diff = s.vec() - s0.vec();
    Ok(s.tangent_part(&diff) / (TWO_PI * chord * chord))
}

#[derive(Debug, Clone)]
pub struct GreensEvaluator {
    metric: Arc<ConformalMetric>,
    r0: f64,
}

impl GreensEvaluator {
    pub fn new(metric: Arc<ConformalMetric>) -> Self {
        Self {
            metric,
            r0: robin_standard(),
        }
    }

    /// Test hook: shifts the round Robin constant to emulate a broken build.
    #[doc(hidden)]
    pub fn with_corrupted_robin_constant(mut self, delta: f64) -> Self {
        self.r0 += delta;
        self
    }

    pub fn metric(&self) -> &ConformalMetric {
        &self.metric
    }
    pub fn metric_arc(&self) -> &Arc<ConformalMetric> {
        &self.metric
    }
    pub fn robin_constant(&self) -> f64 {
        self.r0
    }

    fn u(&self, s: &SpherePoint) -> f64 {
        if self.metric.is_constant() {
            0.0
        } else {
            self.metric.u_coeffs().evaluate(s)
        }
    }

    /// `∇₀u` at `s`.
    pub fn grad_u(&self, s: &SpherePoint) -> Vec3 {
        if self.metric.is_constant() {
            Vec3::zeros()
        } else {
            self.metric.u_coeffs().gradient(s).vec
        }
    }

    /// `u(s) = (Δ₀⁻¹h²)(s)`.
    pub fn u_value(&self, s: &SpherePoint) -> f64 {
        self.u(s)
    }

    pub fn green(&self, s: &SpherePoint, s0: &SpherePoint) -> Result<f64> {
        let g = green_standard(s, s0)?;
        Ok(g - (self.u(s) + self.u(s0)) / self.metric.total_area() + self.metric.c_tilde())
    }

    /// `∇₀` of `G̃(·, s₀)` at `s`.
    pub fn grad_green(&self, s: &SpherePoint, s0: &SpherePoint) -> Result<Vec3> {
        Ok(grad_green_standard(s, s0)? - self.grad_u(s) / self.metric.total_area())
    }

    pub fn robin(&self, s: &SpherePoint) -> f64 {
        self.r0 - self.metric.ln_h(s) / TWO_PI - 2.0 * self.u(s) / self.metric.total_area() + self.metric.c_tilde()
    }

    /// `∇₀R̃` at `s`.
    pub fn grad_robin(&self, s: &SpherePoint) -> Vec3 {
        let (_, g) = self.metric.h_and_grad_ln_h(s);
        -g / TWO_PI - self.grad_u(s) * (2.0 / self.metric.total_area())
    }

    /// `G̃(s, s₀) − G̃(s, s₁)`: stream function of a unit dipole without
    /// background vorticity; zero g̃-mean.
    pub fn two_point_green(&self, s: &SpherePoint, s0: &SpherePoint, s1: &SpherePoint) -> Result<f64> {
        check_distinct(s, s0)?;
        check_distinct(s, s1)?;
        if s0 == s1 {
            return Ok(0.0);
        }
        Ok(self.green(s, s0)? - self.green(s, s1)?)
    }

    /// g̃-distance between nearby points: exact for constant factors, a
    /// Gauss–Legendre line integral of `h` along the short great-circle arc
    /// up to round distance 1e-2, geodesic shooting beyond.
    pub fn conformal_distance(&self, s1: &SpherePoint, s2: &SpherePoint) -> Result<f64> {
        let d = geodesic_distance_standard(s1, s2);
        if let Some(c) = self.metric.constant_factor() {
            return Ok(c * d);
        }
        if d <= 1e-2 {
            return Ok(arc_length(&self.metric, s1, s2));
        }
        shoot_distance(&self.metric, s1, s2)
    }

    /// `B(s₁, s₂) = (R̃(s₁) + R̃(s₂))/2 − (G̃(s₁, s₂) − ln d̃(s₁, s₂)/2π)`.
    pub fn batman(&self, s1: &SpherePoint, s2: &SpherePoint) -> Result<f64> {
        let g = self.green(s1, s2)?;
        let dt = self.conformal_distance(s1, s2)?;
        Ok(0.5 * (self.robin(s1) + self.robin(s2)) - (g - dt.ln() / TWO_PI))
    }

    /// Grid sup-norm of `Δ₀R̃ − (1/2π) h² (K̃ − 4π/Ã)`; zero in exact arithmetic.
    pub fn steiner_residual(&self) -> f64 {
        let m = &self.metric;
        let grid = m.grid();
        let r: Vec<f64> = grid.points().map(|p| self.robin(&p)).collect();
        let lap_r = grid.synthesize(&grid.analyze(&r).laplacian());
        let area = m.total_area();
        grid.points()
            .zip(m.h2_grid())
            .zip(&lap_r)
            .map(|((p, h2), l)| {
                let rhs = h2 * (m.gaussian_curvature(&p) - 4.0 * PI / area) / TWO_PI;
                (l - rhs).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn green_conformal(ev: &GreensEvaluator, s: &SpherePoint, s0: &SpherePoint) -> Result<f64> {
    ev.green(s, s0)
}

pub fn robin_conformal(ev: &GreensEvaluator, s: &SpherePoint) -> f64 {
    ev.robin(s)
}

pub fn two_point_green(ev: &GreensEvaluator, s: &SpherePoint, s0: &SpherePoint, s1: &SpherePoint) -> Result<f64> {
    ev.two_point_green(s, s0, s1)
}

pub fn batman_function(ev: &GreensEvaluator, s1: &SpherePoint, s2: &SpherePoint) -> Result<f64> {
    ev.batman(s1, s2)
}

pub fn steiner_residual(ev: &GreensEvaluator) -> f64 {
    ev.steiner_residual()
}

/// `∫ h ds` along the short great-circle arc from `a` to `b`.
fn arc_length(metric: &ConformalMetric, a: &SpherePoint, b: &SpherePoint) -> f64 {
    let d = geodesic_distance_standard(a, b);
    let dir = a.tangent_part(&(b.vec() - a.vec()));
    let n = dir.norm();
    if n == 0.0 {
        return 0.0;
    }
    let e = dir / n;
    crate::quadrature::GaussRule::new(16).integrate(0.0, d, |t| {
        metric.h(&SpherePoint::new(a.vec() * t.cos() + e * t.sin()))
    })
}

/// g̃-length of the geodesic from `a` to `b`, by Newton shooting on the
/// initial velocity. Restricted to round distance ≤ π/2, where the
/// near-great-circle guess lies in the basin of the minimizing geodesic.
fn shoot_distance(metric: &ConformalMetric, a: &SpherePoint, b: &SpherePoint) -> Result<f64> {
    let d = geodesic_distance_standard(a, b);
    if d > std::f64::consts::FRAC_PI_2 {
        return Err(Error::Shooting(format!(
            "points {d:.3} rad apart are outside the near-diagonal regime"
        )));
    }
    let tol = 1e-12;
    let (e1, e2) = a.tangent_frame();
    let (f1, f2) = b.tangent_frame();
    let dir = a.tangent_part(&(b.vec() - a.vec())).normalize() * d;
    let mut w = [dir.dot(&e1), dir.dot(&e2)];
    let miss = |w: &[f64; 2]| -> Result<[f64; 2]> {
        let v = e1 * w[0] + e2 * w[1];
        let end = geodesic_integrate(metric, a, &TangentVector::new(*a, v), 1.0, tol)?.end().0;
        let r = end.vec() - b.vec();
        Ok([r.dot(&f1), r.dot(&f2)])
    };
    for _ in 0..30 {
        let r = miss(&w)?;
        if r[0].hypot(r[1]) < 1e-11 {
            let v = e1 * w[0] + e2 * w[1];
            return Ok(metric.h(a) * v.norm());
        }
        let eps = 1e-7;
        let r1 = miss(&[w[0] + eps, w[1]])?;
        let r2 = miss(&[w[0], w[1] + eps])?;
        let j = [
            [(r1[0] - r[0]) / eps, (r2[0] - r[0]) / eps],
            [(r1[1] - r[1]) / eps, (r2[1] - r[1]) / eps],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return Err(Error::Shooting("singular shooting Jacobian (conjugate point?)".into()));
        }
        w[0] -= (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        w[1] -= (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
    }
    Err(Error::Shooting("Newton iteration did not converge".into()))
}
