//! Conformal map from the unit sphere onto the ellipsoid
//! `x²/a² + y²/b² + z²/c² = 1`.
//!
//! Both surfaces carry sphero-conical coordinates `(θ₁, θ₂)` in which their
//! metrics separate; each coordinate is replaced by its isothermal version
//! (one elliptic-type integral per direction), and the two rectangles of
//! isothermal coordinates are matched by choosing the sphere's modulus `k`
//! so that their aspect ratios agree. Spheroids (two equal axes) go through
//! the isometric latitude instead.

use std::f64::consts::FRAC_PI_2;

use crate::quadrature::adaptive;
use crate::spectral::SHCoeffs;
use crate::surface::{ConformalMetric, SpherePoint, Symmetry, TableField};
use crate::{Error, Result, Vec3};

const QUAD_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct EllipsoidMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Sphere,
    Revolution(Revolution),
    Triaxial(Triaxial),
}

impl EllipsoidMap {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(c > 0.0 && a.is_finite() && a >= b && b >= c) {
            return Err(Error::InvalidParameter(format!(
                "ellipsoid axes must satisfy a ≥ b ≥ c > 0, got ({a}, {b}, {c})"
            )));
        }
        let same = |p: f64, q: f64| (p - q).abs() <= 1e-12 * p;
        let kind = match (same(a, b), same(b, c)) {
            (true, true) => Kind::Sphere,
            (true, false) => Kind::Revolution(Revolution::new(a, c, [Vec3::x(), Vec3::y(), Vec3::z()])),
            // prolate: symmetry axis along x, the long axis
            (false, true) => Kind::Revolution(Revolution::new(b, a, [Vec3::y(), Vec3::z(), Vec3::x()])),
            (false, false) => Kind::Triaxial(Triaxial::new(a, b, c)?),
        };
        Ok(Self { a, b, c, kind })
    }

    pub fn symmetry(&self) -> Symmetry {
        match &self.kind {
            Kind::Sphere => Symmetry::Round,
            Kind::Revolution(r) => Symmetry::Axisymmetric(r.frame[2]),
            Kind::Triaxial(_) => Symmetry::Generic,
        }
    }

    /// Image of `s` on the ellipsoid and the conformal factor `h(s)`.
    pub fn map_point(&self, s: &SpherePoint) -> Result<(Vec3, f64)> {
        match &self.kind {
            Kind::Sphere => Ok((s.vec() * self.a, self.a)),
            Kind::Revolution(r) => r.map_point(s),
            Kind::Triaxial(t) => t.map_point(s),
        }
    }

    pub fn to_ellipsoid(&self, s: &SpherePoint) -> Result<Vec3> {
        Ok(self.map_point(s)?.0)
    }

    pub fn h(&self, s: &SpherePoint) -> Result<f64> {
        Ok(self.map_point(s)?.1)
    }

    /// Anisotropy of the finite-difference pullback at `s`:
    /// `max(| |J e₁|² − |J e₂|² |, 2|J e₁ · J e₂|) / (|J e₁|² + |J e₂|²)`,
    /// which vanishes for a conformal map.
    pub fn conformality_residual(&self, s: &SpherePoint, step: f64) -> Result<f64> {
        let (e1, e2) = s.tangent_frame();
        let diff = |e: Vec3| -> Result<Vec3> {
            let p = self.to_ellipsoid(&s.exp_round(&(e * step)))?;
            let m = self.to_ellipsoid(&s.exp_round(&(-e * step)))?;
            Ok((p - m) / (2.0 * step))
        };
        let (j1, j2) = (diff(e1)?, diff(e2)?);
        let (n1, n2) = (j1.norm_squared(), j2.norm_squared());
        Ok(((n1 - n2).abs()).max(2.0 * j1.dot(&j2).abs()) / (n1 + n2))
    }
}

/// Conformal factor of the ellipsoid with semi-axes `a ≥ b ≥ c`, tabulated
/// as `ln h` on the degree-`degree` grid, together with the point map.
pub fn ellipsoid_conformal_factor(
    a: f64,
    b: f64,
    c: f64,
    degree: usize,
) -> Result<(ConformalMetric, EllipsoidMap)> {
    let map = EllipsoidMap::new(a, b, c)?;
    let label = format!("ellipsoid:{a},{b},{c}");
    let metric = if let Kind::Sphere = map.kind {
        ConformalMetric::scaled(a, degree)?
    } else {
        let grid = crate::spectral::SphereGrid::new(degree);
        let ln_h = grid
            .points()
            .map(|p| map.h(&p).map(f64::ln))
            .collect::<Result<Vec<f64>>>()?;
        let coeffs: SHCoeffs = grid.analyze(&ln_h);
        ConformalMetric::from_table(coeffs, TableField::LnH, map.symmetry(), label, degree)?
    };
    Ok((metric, map))
}

/// Surface of revolution with equatorial radius `eq` and polar radius `pol`
/// about `frame[2]`.
#[derive(Debug, Clone)]
struct Revolution {
    eq: f64,
    e2: f64,
    frame: [Vec3; 3],
}

impl Revolution {
    fn new(eq: f64, pol: f64, frame: [Vec3; 3]) -> Self {
        Self {
            eq,
            e2: 1.0 - pol * pol / (eq * eq),
            frame,
        }
    }

    /// `∫₀^σ e² / (1 − e² u²) du`, the gap between the sphere's and the
    /// spheroid's isometric latitudes at geodetic sine `σ`.
    fn gap(&self, sigma: f64) -> Result<f64> {
        let e2 = self.e2;
        adaptive(|u| e2 / (1.0 - e2 * u * u), 0.0, sigma, QUAD_TOL)
    }

    fn map_point(&self, s: &SpherePoint) -> Result<(Vec3, f64)> {
        let axis = self.frame[2];
        let t = s.vec().dot(&axis).clamp(-1.0, 1.0);
        let tt = t.abs();
        let (sigma, emy2) = if tt >= 1.0 {
            (1.0, 0.0)
        } else {
            let psi = tt.atanh();
            let mut y = psi;
            let mut converged = false;
            for _ in 0..80 {
                let sg = y.tanh();
                let f = y - self.gap(sg)? - psi;
                let step = f * (1.0 - self.e2 * sg * sg) / (1.0 - self.e2);
                y -= step;
                if step.abs() <= 1e-15 * y.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Quadrature(format!("isometric latitude inversion at t = {t}")));
            }
            (y.tanh(), (-2.0 * y).exp())
        };
        let gap = self.gap(sigma)?;
        let rho = (-gap).exp() * (2.0 / (1.0 + tt)) / (1.0 + emy2);
        let n = self.eq / (1.0 - self.e2 * sigma * sigma).sqrt();
        let h = n * rho;
        // geodetic latitude: radius N cos φ, height N (1 − e²) sin φ
        let radial = (s.vec() - axis * t) * h;
        Ok((radial + axis * (n * (1.0 - self.e2) * sigma.copysign(t)), h))
    }
}

#[derive(Debug, Clone)]
struct Triaxial {
    a: f64,
    b: f64,
    c: f64,
    a2: f64,
    b2: f64,
    c2: f64,
    /// Isothermal extents of the ellipsoid's coordinate quarter-rectangle.
    xi_max: f64,
    eta_max: f64,
    k2: f64,
    kp2: f64,
    /// Scale between sphere and ellipsoid isothermal coordinates.
    scale: f64,
}

/// `K(m)`, complete elliptic integral of the first kind with parameter `m = k²`.
fn ellip_k(m: f64) -> f64 {
    let (mut x, mut y) = (1.0, (1.0 - m).sqrt());
    for _ in 0..60 {
        let (nx, ny) = (0.5 * (x + y), (x * y).sqrt());
        x = nx;
        y = ny;
        if (x - y).abs() <= 1e-16 * x {
            break;
        }
    }
    FRAC_PI_2 / x
}

impl Triaxial {
    fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let (a2, b2, c2) = (a * a, b * b, c * c);
        let mut t = Self {
            a,
            b,
            c,
            a2,
            b2,
            c2,
            xi_max: 0.0,
            eta_max: 0.0,
            k2: 0.0,
            kp2: 0.0,
            scale: 0.0,
        };
        t.xi_max = adaptive(|th| t.f1(th), 0.0, FRAC_PI_2, QUAD_TOL)?;
        t.eta_max = adaptive(|th| t.f2(th), 0.0, FRAC_PI_2, QUAD_TOL)?;
        let target = t.eta_max / t.xi_max;
        // K(1−m)/K(m) decreases in m; bisect in logit(m) for accuracy at both ends
        let (mut lo, mut hi) = (-700.0f64, 700.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let m = 1.0 / (1.0 + (-mid).exp());
            let mc = 1.0 / (1.0 + mid.exp());
            if ellip_k(mc) / ellip_k(m) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        t.k2 = 1.0 / (1.0 + (-x).exp());
        t.kp2 = 1.0 / (1.0 + x.exp());
        t.scale = t.xi_max / ellip_k(t.k2);
        Ok(t)
    }

    fn f1(&self, th: f64) -> f64 {
        let s2 = th.sin().powi(2);
        let l1 = self.c2 + (self.b2 - self.c2) * s2;
        (l1 / (self.a2 - self.c2 - (self.b2 - self.c2) * s2)).sqrt()
    }

    fn f2(&self, th: f64) -> f64 {
        let s2 = th.sin().powi(2);
        let l2 = self.b2 + (self.a2 - self.b2) * s2;
        (l2 / (self.b2 - self.c2 + (self.a2 - self.b2) * s2)).sqrt()
    }

    fn g1(&self, th: f64) -> f64 {
        1.0 / (1.0 - self.k2 * th.sin().powi(2)).sqrt()
    }

    fn g2(&self, th: f64) -> f64 {
        1.0 / (self.k2 + self.kp2 * th.sin().powi(2)).sqrt()
    }

    /// Solves `∫₀^θ f = target` on `[0, π/2]` (total integral `total`),
    /// measuring from whichever end is closer for accuracy.
    fn invert<F: Fn(f64) -> f64>(f: F, target: f64, total: f64) -> Result<f64> {
        let from_top = target > 0.5 * total;
        // distance to travel from the chosen endpoint
        let goal = if from_top { total - target } else { target };
        let start = if from_top { FRAC_PI_2 } else { 0.0 };
        let sign = if from_top { -1.0 } else { 1.0 };
        if goal <= 0.0 {
            return Ok(start);
        }
        // φ measures distance from `start`; F(φ) = ∫ over [start, start ± φ]
        let (mut lo, mut hi) = (0.0, FRAC_PI_2);
        let mut phi = FRAC_PI_2 * goal / total;
        let mut acc_phi = 0.0;
        let mut acc = 0.0;
        for _ in 0..100 {
            let (p0, p1) = (start + sign * acc_phi, start + sign * phi);
            let piece = adaptive(&f, p0.min(p1), p0.max(p1), QUAD_TOL)?;
            acc += if phi >= acc_phi { piece } else { -piece };
            acc_phi = phi;
            let resid = acc - goal;
            if resid > 0.0 {
                hi = phi;
            } else {
                lo = phi;
            }
            let mut next = phi - resid / f(start + sign * phi);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - phi).abs() <= 1e-15 || hi - lo <= 1e-15 {
                return Ok(start + sign * next);
            }
            phi = next;
        }
        Err(Error::Quadrature(format!("coordinate inversion for target {target}")))
    }

    fn map_point(&self, s: &SpherePoint) -> Result<(Vec3, f64)> {
        let (x, y, z) = (s.x(), s.y(), s.z());
        let (k2, kp2) = (self.k2, self.kp2);
        // sphere: P = cos²θ₁, Q = sin²θ₂ from the y-equation, the complements
        // from the x- and z-equations to avoid cancellation
        let d = x * x + k2 * y * y - kp2;
        let r = (d * d + 4.0 * k2 * kp2 * y * y).sqrt();
        let (p, q) = if d >= 0.0 {
            let p = (d + r) / (2.0 * k2);
            (p, if d + r > 0.0 { 2.0 * k2 * y * y / (d + r) } else { 0.0 })
        } else {
            ((2.0 * kp2 * y * y) / (-d + r), (-d + r) / (2.0 * kp2))
        };
        let (p, q) = (p.clamp(0.0, 1.0), q.clamp(0.0, 1.0));
        let u = z * z / (k2 + kp2 * q); // sin²θ₁
        let v = x * x / (kp2 + k2 * p); // cos²θ₂
        let th1 = u.sqrt().atan2(p.sqrt());
        let th2 = q.sqrt().atan2(v.sqrt());

        let k_full = ellip_k(k2);
        let kc_full = ellip_k(kp2);
        let xi = if th1 <= FRAC_PI_2 * 0.5 {
            self.scale * adaptive(|t| self.g1(t), 0.0, th1, QUAD_TOL)?
        } else {
            self.xi_max - self.scale * adaptive(|t| self.g1(t), th1, FRAC_PI_2, QUAD_TOL)?
        };
        let eta = if th2 <= FRAC_PI_2 * 0.5 {
            self.scale * adaptive(|t| self.g2(t), 0.0, th2, QUAD_TOL)?
        } else {
            self.eta_max - self.scale * adaptive(|t| self.g2(t), th2, FRAC_PI_2, QUAD_TOL)?
        };
        debug_assert!((self.scale * k_full - self.xi_max).abs() < 1e-8 * self.xi_max);
        debug_assert!((self.scale * kc_full - self.eta_max).abs() < 1e-6 * self.eta_max);

        let t1 = Self::invert(|t| self.f1(t), xi, self.xi_max)?;
        let t2 = Self::invert(|t| self.f2(t), eta, self.eta_max)?;
        let (s1, c1) = t1.sin_cos();
        let (s2, c2) = t2.sin_cos();
        let l1 = self.c2 + (self.b2 - self.c2) * s1 * s1;
        let l2 = self.b2 + (self.a2 - self.b2) * s2 * s2;
        let ac = self.a2 - self.c2;
        let ex = self.a * c2 * ((self.a2 - l1) / ac).sqrt();
        let ey = self.b * c1 * s2;
        let ez = self.c * s1 * ((l2 - self.c2) / ac).sqrt();
        let point = Vec3::new(ex.copysign(x), ey.copysign(y), ez.copysign(z));

        let den = kp2 * q + k2 * p;
        let h = if den > 1e-9 {
            let num = (self.a2 - self.b2) * s2 * s2 + (self.b2 - self.c2) * c1 * c1;
            self.scale * (num / den).sqrt()
        } else {
            self.umbilic_average(s)?
        };
        Ok((point, h))
    }

    /// Near the umbilics the closed form is 0/0; average over a tiny ring.
    fn umbilic_average(&self, s: &SpherePoint) -> Result<f64> {
        let (e1, e2) = s.tangent_frame();
        let delta = 1e-4;
        let n = 8;
        let mut acc = 0.0;
        for k in 0..n {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let p = s.exp_round(&((e1 * ang.cos() + e2 * ang.sin()) * delta));
            acc += self.map_point(&p)?.1;
        }
        Ok(acc / n as f64)
    }
}
