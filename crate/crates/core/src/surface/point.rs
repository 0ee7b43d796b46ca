use std::f64::consts::PI;

use crate::{Error, Result, Vec3};

/// A point on the unit sphere in 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint(Vec3);

impl SpherePoint {
    pub const NORTH: SpherePoint = SpherePoint(Vec3::new(0.0, 0.0, 1.0));
    pub const SOUTH: SpherePoint = SpherePoint(Vec3::new(0.0, 0.0, -1.0));

    /// Normalizes `v` onto the sphere. Panics on the zero vector.
    pub fn new(v: Vec3) -> Self {
        let n = v.norm();
        assert!(n > 0.0 && n.is_finite(), "cannot project {v:?} to the sphere");
        SpherePoint(v / n)
    }

    pub fn from_xyz(x: f64, y: f64, z: f64) -> Self {
        Self::new(Vec3::new(x, y, z))
    }

    /// Geographic latitude/longitude in degrees.
    pub fn from_lat_lon_deg(lat: f64, lon: f64) -> Self {
        let (la, lo) = (lat.to_radians(), lon.to_radians());
        Self::new(Vec3::new(la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()))
    }

    pub fn lat_lon_deg(&self) -> (f64, f64) {
        let v = self.0;
        let lat = v.z.atan2((v.x * v.x + v.y * v.y).sqrt());
        let lon = v.y.atan2(v.x);
        (lat.to_degrees(), lon.to_degrees())
    }

    pub fn vec(&self) -> &Vec3 {
        &self.0
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }
    pub fn y(&self) -> f64 {
        self.0.y
    }
    pub fn z(&self) -> f64 {
        self.0.z
    }

    /// Projects an ambient vector onto the tangent plane at this point.
    pub fn tangent_part(&self, v: &Vec3) -> Vec3 {
        v - self.0 * self.0.dot(v)
    }

    /// Rotation by +90 degrees in the tangent plane (outward normal orientation).
    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0.cross(v)
    }

    /// Some orthonormal tangent frame `(e1, e2)` with `e1 × e2 = self`.
    pub fn tangent_frame(&self) -> (Vec3, Vec3) {
        let p = self.0;
        let helper = if p.x.abs() < 0.6 {
            Vec3::x()
        } else if p.y.abs() < 0.6 {
            Vec3::y()
        } else {
            Vec3::z()
        };
        let e1 = (helper - p * p.dot(&helper)).normalize();
        let e2 = p.cross(&e1);
        (e1, e2)
    }

    /// Moves along the great circle in tangent direction `v` for arc length `|v|`.
    pub fn exp_round(&self, v: &Vec3) -> SpherePoint {
        let t = self.tangent_part(v);
        let a = t.norm();
        if a == 0.0 {
            return *self;
        }
        SpherePoint::new(self.0 * a.cos() + t * (a.sin() / a))
    }

    /// Ambient coordinates as an array.
    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }
}

impl From<SpherePoint> for Vec3 {
    fn from(p: SpherePoint) -> Vec3 {
        p.0
    }
}

/// Tangent vector anchored at a sphere point, stored in ambient coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: SpherePoint,
    pub vec: Vec3,
}

impl TangentVector {
    /// Builds a tangent vector, removing any normal component of `v`.
    pub fn new(base: SpherePoint, v: Vec3) -> Self {
        Self {
            base,
            vec: base.tangent_part(&v),
        }
    }

    pub fn zero(base: SpherePoint) -> Self {
        Self {
            base,
            vec: Vec3::zeros(),
        }
    }

    /// `J(v) = base × v`: rotation by +90 degrees seen from outside.
    pub fn rotated(&self) -> Self {
        Self {
            base: self.base,
            vec: self.base.rotate(&self.vec),
        }
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }
}

/// Stereographic plane coordinate `z = x + iy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneCoord {
    pub x: f64,
    pub y: f64,
}

impl PlaneCoord {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// Euclidean distance in 3-space.
pub fn chordal_distance(a: &SpherePoint, b: &SpherePoint) -> f64 {
    (a.0 - b.0).norm()
}

/// Great-circle distance in `[0, π]`.
pub fn geodesic_distance_standard(a: &SpherePoint, b: &SpherePoint) -> f64 {
    // atan2 form keeps full precision near 0 and π.
    let cross = a.0.cross(&b.0).norm();
    let dot = a.0.dot(&b.0);
    cross.atan2(dot).clamp(0.0, PI)
}

/// Stereographic projection from the north pole onto the equatorial plane.
pub fn stereo_project(s: &SpherePoint) -> Result<PlaneCoord> {
    let denom = 1.0 - s.z();
    // below this the chart coordinate overflows any useful precision
    if denom <= 1e-14 {
        return Err(Error::ChartDomain);
    }
    Ok(PlaneCoord::new(s.x() / denom, s.y() / denom))
}

/// Inverse of [`stereo_project`].
pub fn stereo_lift(z: &PlaneCoord) -> SpherePoint {
    let r2 = z.norm_sqr();
    let d = 1.0 + r2;
    SpherePoint::new(Vec3::new(2.0 * z.x / d, 2.0 * z.y / d, (r2 - 1.0) / d))
}

/// Pullback factor of the round metric under the stereographic chart, `2 / (1 + |z|²)`.
pub fn stereo_factor(z: &PlaneCoord) -> f64 {
    2.0 / (1.0 + z.norm_sqr())
}

/// Jacobian of the stereographic projection at `s`: the images of ambient
/// tangent vectors, returned as `(dz/dv)` acting on `v`.
pub fn stereo_push_forward(s: &SpherePoint, v: &Vec3) -> Result<PlaneCoord> {
    let denom = 1.0 - s.z();
    if denom <= 1e-14 {
        return Err(Error::ChartDomain);
    }
    let inv = 1.0 / denom;
    let dx = v.x * inv + s.x() * v.z * inv * inv;
    let dy = v.y * inv + s.y() * v.z * inv * inv;
    Ok(PlaneCoord::new(dx, dy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_point() -> impl Strategy<Value = SpherePoint> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| SpherePoint::from_xyz(x, y, z))
    }

    #[test]
    fn chordal_examples() {
        assert_eq!(chordal_distance(&SpherePoint::NORTH, &SpherePoint::SOUTH), 2.0);
        let a = SpherePoint::from_xyz(0.3, -0.2, 0.5);
        assert_eq!(chordal_distance(&a, &a), 0.0);
        let d = chordal_distance(&SpherePoint::from_xyz(1.0, 0.0, 0.0), &SpherePoint::from_xyz(0.0, 1.0, 0.0));
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn geodesic_examples() {
        assert!((geodesic_distance_standard(&SpherePoint::NORTH, &SpherePoint::SOUTH) - PI).abs() < 1e-15);
        let a = SpherePoint::from_xyz(0.3, -0.2, 0.5);
        assert_eq!(geodesic_distance_standard(&a, &a), 0.0);
        let d = geodesic_distance_standard(&SpherePoint::from_xyz(1.0, 0.0, 0.0), &SpherePoint::from_xyz(0.0, 1.0, 0.0));
        assert!((d - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn stereo_examples() {
        let z = stereo_project(&SpherePoint::SOUTH).unwrap();
        assert_eq!((z.x, z.y), (0.0, 0.0));
        let z = stereo_project(&SpherePoint::from_xyz(1.0, 0.0, 0.0)).unwrap();
        assert_eq!((z.x, z.y), (1.0, 0.0));
        assert_eq!(stereo_factor(&PlaneCoord::new(0.0, 0.0)), 2.0);
        assert_eq!(stereo_project(&SpherePoint::NORTH), Err(Error::ChartDomain));
    }

    #[test]
    fn rotation_is_counterclockwise_from_outside() {
        // at the north pole, seen from above, e_x rotates to e_y
        let v = TangentVector::new(SpherePoint::NORTH, Vec3::x()).rotated();
        assert!((v.vec - Vec3::y()).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn chordal_matches_half_angle(a in arb_point(), b in arb_point()) {
            let d = geodesic_distance_standard(&a, &b);
            prop_assert!((chordal_distance(&a, &b) - 2.0 * (d / 2.0).sin()).abs() < 1e-12);
        }

        #[test]
        fn stereo_roundtrip(a in arb_point()) {
            prop_assume!(a.z() < 0.999);
            let back = stereo_lift(&stereo_project(&a).unwrap());
            prop_assert!(chordal_distance(&a, &back) < 1e-12);
        }

        #[test]
        fn castilho_identity(a in arb_point(), b in arb_point()) {
            prop_assume!(a.z() < 0.99 && b.z() < 0.99);
            let (za, zb) = (stereo_project(&a).unwrap(), stereo_project(&b).unwrap());
            let dz2 = (za.x - zb.x).powi(2) + (za.y - zb.y).powi(2);
            let lhs = chordal_distance(&a, &b).powi(2);
            let rhs = stereo_factor(&za) * stereo_factor(&zb) * dz2;
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn pullback_factor_matches_chart(a in arb_point()) {
            prop_assume!(a.z() < 0.9);
            let z = stereo_project(&a).unwrap();
            let (e1, _) = a.tangent_frame();
            let dz = stereo_push_forward(&a, &e1).unwrap();
            // |dz| * h_o = |v| = 1
            let len = (dz.x * dz.x + dz.y * dz.y).sqrt();
            prop_assert!((len * stereo_factor(&z) - 1.0).abs() < 1e-12);
        }
    }
}
