use crate::ode::{self, Control, DenseStep, Options};
use crate::surface::{ConformalMetric, SpherePoint, TangentVector};
use crate::{Error, Result, Vec3};

/// A geodesic of `h² g₀` with continuous output.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    steps: Vec<DenseStep>,
    t_end: f64,
    /// Initial g̃-speed `h |v|`.
    pub speed: f64,
    /// Largest relative deviation of `h |v|` from `speed` at step ends.
    pub max_speed_drift: f64,
}

impl GeodesicPath {
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Position and ambient velocity at time `t ∈ [0, T]`.
    pub fn at(&self, t: f64) -> (SpherePoint, Vec3) {
        let t = t.clamp(0.0, self.t_end);
        let k = self.steps.partition_point(|s| s.t1 < t).min(self.steps.len() - 1);
        let y = self.steps[k].at(t);
        let p = SpherePoint::new(Vec3::new(y[0], y[1], y[2]));
        let v = p.tangent_part(&Vec3::new(y[3], y[4], y[5]));
        (p, v)
    }

    pub fn end(&self) -> (SpherePoint, Vec3) {
        let y = &self.steps.last().expect("non-empty path").y1;
        (SpherePoint::new(Vec3::new(y[0], y[1], y[2])), Vec3::new(y[3], y[4], y[5]))
    }
}

/// Geodesic acceleration in ambient coordinates, with `f = ln h`:
/// `ẍ = −|v|² x − 2 (∇₀f·v) v + |v|² ∇₀f`.
pub(crate) fn geodesic_rhs(metric: &ConformalMetric, y: &[f64], dy: &mut [f64]) {
    let x = Vec3::new(y[0], y[1], y[2]);
    let v = Vec3::new(y[3], y[4], y[5]);
    let p = SpherePoint::new(x);
    let (_, g) = metric.h_and_grad_ln_h(&p);
    let v2 = v.norm_squared();
    let acc = -x * v2 - v * (2.0 * g.dot(&v)) + g * v2;
    dy[..3].copy_from_slice(v.as_slice());
    dy[3..].copy_from_slice(acc.as_slice());
}

pub(crate) fn project_position_velocity(y: &mut [f64]) {
    let x = Vec3::new(y[0], y[1], y[2]).normalize();
    let v = Vec3::new(y[3], y[4], y[5]);
    let v = v - x * x.dot(&v);
    y[..3].copy_from_slice(x.as_slice());
    y[3..].copy_from_slice(v.as_slice());
}

pub fn geodesic_integrate(
    metric: &ConformalMetric,
    s0: &SpherePoint,
    v0: &TangentVector,
    t_end: f64,
    tol: f64,
) -> Result<GeodesicPath> {
    let speed = metric.h(s0) * v0.norm();
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::InvalidParameter("geodesic needs a nonzero initial velocity".into()));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad geodesic time {t_end}")));
    }
    let mut y0 = [0.0; 6];
    y0[..3].copy_from_slice(s0.vec().as_slice());
    y0[3..].copy_from_slice(s0.tangent_part(&v0.vec).as_slice());
    let mut steps = Vec::new();
    let mut drift = 0.0f64;
    let opts = Options::with_tol(tol);
    if t_end == 0.0 {
        return Err(Error::InvalidParameter("geodesic time must be positive".into()));
    }
    ode::integrate(
        |_, y, dy| {
            geodesic_rhs(metric, y, dy);
            Ok(())
        },
        project_position_velocity,
        |st| {
            let p = SpherePoint::new(Vec3::new(st.y1[0], st.y1[1], st.y1[2]));
            let v = Vec3::new(st.y1[3], st.y1[4], st.y1[5]);
            drift = drift.max((metric.h(&p) * v.norm() / speed - 1.0).abs());
            steps.push(st.clone());
            Ok(Control::Continue)
        },
        0.0,
        &y0,
        t_end,
        &opts,
    )?;
    Ok(GeodesicPath {
        steps,
        t_end,
        speed,
        max_speed_drift: drift,
    })
}

/// Endpoint of the g̃-geodesic from `s` in direction `dir` after g̃-length `len`.
pub(crate) fn exp_map(metric: &ConformalMetric, s: &SpherePoint, dir: &Vec3, len: f64, tol: f64) -> Result<SpherePoint> {
    let d = s.tangent_part(dir);
    let unit = d / (d.norm() * metric.h(s));
    let path = geodesic_integrate(metric, s, &TangentVector::new(*s, unit), len, tol)?;
    Ok(path.end().0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_half_great_circle() {
        let m = ConformalMetric::round(4);
        let s0 = SpherePoint::from_xyz(1.0, 0.0, 0.0);
        let path = geodesic_integrate(&m, &s0, &TangentVector::new(s0, Vec3::z()), std::f64::consts::PI, 1e-12).unwrap();
        let (end, _) = path.end();
        assert!((end.vec() - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-8);
        let (mid, _) = path.at(std::f64::consts::FRAC_PI_2);
        assert!((mid.vec() - Vec3::z()).norm() < 1e-8);
        assert!(path.max_speed_drift < 1e-10);
    }

    #[test]
    fn zero_velocity_rejected() {
        let m = ConformalMetric::round(4);
        let s0 = SpherePoint::NORTH;
        assert!(geodesic_integrate(&m, &s0, &TangentVector::zero(s0), 1.0, 1e-8).is_err());
    }
}
