//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use surfvortex_core::quadrature::adaptive;
use surfvortex_core::surface::SpherePoint;
use surfvortex_core::Vec3;

/// Uniform on the sphere (rejection from the ball).
pub fn random_point(rng: &mut impl Rng) -> SpherePoint {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n < 1.0 {
            return SpherePoint::new(v);
        }
    }
}

/// `∫ f dA₀` in polar coordinates about `s0`: adaptive in the polar angle
/// (absorbs the logarithmic singularity), periodic trapezoid in azimuth.
pub fn polar_integral<F: Fn(&SpherePoint) -> f64>(s0: &SpherePoint, f: F) -> f64 {
    let (e1, e2) = s0.tangent_frame();
    let n_az = 96;
    adaptive(
        |th: f64| {
            let ring: f64 = (0..n_az)
                .map(|k| {
                    let az = 2.0 * PI * k as f64 / n_az as f64;
                    let p = SpherePoint::new(s0.vec() * th.cos() + (e1 * az.cos() + e2 * az.sin()) * th.sin());
                    if th < 1e-9 { 0.0 } else { f(&p) }
                })
                .sum();
            ring * 2.0 * PI / n_az as f64 * th.sin()
        },
        0.0,
        PI,
        1e-12,
    )
    .unwrap()
}

/// Richardson extrapolation to `d → 0` of samples with error `a d² + O(d³)`;
/// returns the limit and the spread of the last two samples.
pub fn extrapolate(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (f3, f4) = (f(1e-3), f(1e-4));
    ((100.0 * f4 - f3) / 99.0, (f3 - f4).abs())
}
