use std::fmt::Write as _;
use std::path::Path;

use super::legendre::LegendreTable;
use crate::surface::{SpherePoint, TangentVector};
use crate::{Error, Result, Vec3};

/// Real spherical-harmonic coefficients `a_{l,m}`, `0 ≤ l ≤ L`, `|m| ≤ l`.
///
/// Basis: `Y_{l,0} = q_l^0`, `Y_{l,m} = √2 q_l^m cos(mφ)` and
/// `Y_{l,-m} = √2 q_l^m sin(mφ)` for `m > 0`; orthonormal on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SHCoeffs {
    degree: usize,
    data: Vec<f64>,
}

#[inline]
fn idx(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

impl SHCoeffs {
    pub fn zeros(degree: usize) -> Self {
        Self {
            degree,
            data: vec![0.0; (degree + 1) * (degree + 1)],
        }
    }

    /// A single unit coefficient at `(l, m)`.
    pub fn delta(degree: usize, l: usize, m: i64) -> Self {
        let mut c = Self::zeros(degree);
        *c.get_mut(l, m) = 1.0;
        c
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        if l > self.degree {
            return 0.0;
        }
        self.data[idx(l, m)]
    }

    pub fn get_mut(&mut self, l: usize, m: i64) -> &mut f64 {
        &mut self.data[idx(l, m)]
    }

    /// `(l, m, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        (0..=self.degree).flat_map(move |l| {
            let l_i = l as i64;
            (-l_i..=l_i).map(move |m| (l, m, self.data[idx(l, m)]))
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Round-sphere mean of the represented field.
    pub fn mean(&self) -> f64 {
        self.data[0] / (4.0 * std::f64::consts::PI).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn map_degree<F: Fn(usize) -> f64>(&self, f: F) -> Self {
        let mut out = self.clone();
        for l in 0..=self.degree {
            let k = f(l);
            for v in &mut out.data[l * l..(l + 1) * (l + 1)] {
                *v *= k;
            }
        }
        out
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            degree: self.degree,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree);
        Self {
            degree: self.degree,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Round Laplacian Δ₀: multiplies degree `l` by `−l(l+1)`.
    pub fn laplacian(&self) -> Self {
        self.map_degree(|l| -((l * (l + 1)) as f64))
    }

    /// Value at an arbitrary point of the sphere.
    pub fn evaluate(&self, s: &SpherePoint) -> f64 {
        let (leg, cs) = self.setup(s);
        let sqrt2 = 2f64.sqrt();
        let mut acc = 0.0;
        for l in 0..=self.degree {
            acc += self.get(l, 0) * leg.q(l, 0);
            for m in 1..=l {
                let (c, sn) = cs[m];
                acc += sqrt2 * leg.q(l, m) * (self.get(l, m as i64) * c + self.get(l, -(m as i64)) * sn);
            }
        }
        acc
    }

    /// Round-metric gradient at `s`. Uses `q/sinθ` for the longitudinal part,
    /// so it is regular at the poles.
    pub fn gradient(&self, s: &SpherePoint) -> TangentVector {
        self.value_and_gradient(s).1
    }

    pub fn value_and_gradient(&self, s: &SpherePoint) -> (f64, TangentVector) {
        let (leg, cs) = self.setup(s);
        let sqrt2 = 2f64.sqrt();
        let (mut val, mut g_theta, mut g_phi) = (0.0, 0.0, 0.0);
        for l in 0..=self.degree {
            let a0 = self.get(l, 0);
            val += a0 * leg.q(l, 0);
            g_theta += a0 * leg.dq_dtheta(l, 0);
            for m in 1..=l {
                let (c, sn) = cs[m];
                let (ac, asn) = (self.get(l, m as i64), self.get(l, -(m as i64)));
                let trig = ac * c + asn * sn;
                let dtrig = m as f64 * (asn * c - ac * sn);
                val += sqrt2 * leg.q(l, m) * trig;
                g_theta += sqrt2 * leg.dq_dtheta(l, m) * trig;
                g_phi += sqrt2 * leg.q_over_sin[super::legendre::tri(l, m)] * dtrig;
            }
        }
        let (x, y, z) = (s.x(), s.y(), s.z());
        let rho = x.hypot(y);
        let (cp, sp) = if rho > 0.0 { (x / rho, y / rho) } else { (1.0, 0.0) };
        let e_theta = Vec3::new(z * cp, z * sp, -rho);
        let e_phi = Vec3::new(-sp, cp, 0.0);
        (val, TangentVector::new(*s, e_theta * g_theta + e_phi * g_phi))
    }

    fn setup(&self, s: &SpherePoint) -> (LegendreTable, Vec<(f64, f64)>) {
        let (x, y, z) = (s.x(), s.y(), s.z());
        let rho = x.hypot(y);
        let leg = LegendreTable::new(self.degree, z, rho);
        let (cp, sp) = if rho > 0.0 { (x / rho, y / rho) } else { (1.0, 0.0) };
        let mut cs = Vec::with_capacity(self.degree + 1);
        cs.push((1.0, 0.0));
        for m in 1..=self.degree {
            let (c, sn): (f64, f64) = cs[m - 1];
            cs.push((c * cp - sn * sp, sn * cp + c * sp));
        }
        (leg, cs)
    }

    /// CSV text: header `l,m,<field>` then one row per coefficient.
    /// Values use 17 significant digits, which round-trips exactly.
    pub fn to_csv(&self, field: &str) -> String {
        let mut s = format!("l,m,{field}\n");
        for (l, m, v) in self.iter() {
            let _ = writeln!(s, "{l},{m},{v:.16e}");
        }
        s
    }

    /// Parses [`SHCoeffs::to_csv`] output; returns the coefficients and the
    /// field name from the header.
    pub fn from_csv(text: &str) -> Result<(Self, String)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Table("empty file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() != 3 || cols[0] != "l" || cols[1] != "m" {
            return Err(Error::Table(format!("bad header {header:?}, expected l,m,<field>")));
        }
        let field = cols[2].to_string();
        let mut rows = Vec::new();
        let mut max_l = 0;
        for (k, line) in lines.enumerate() {
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Table(format!("row {}: {line:?}", k + 2));
            if parts.len() != 3 {
                return Err(bad());
            }
            let l: usize = parts[0].parse().map_err(|_| bad())?;
            let m: i64 = parts[1].parse().map_err(|_| bad())?;
            let v: f64 = parts[2].parse().map_err(|_| bad())?;
            if m.unsigned_abs() as usize > l || !v.is_finite() {
                return Err(bad());
            }
            max_l = max_l.max(l);
            rows.push((l, m, v));
        }
        let mut c = Self::zeros(max_l);
        for (l, m, v) in rows {
            *c.get_mut(l, m) = v;
        }
        Ok((c, field))
    }

    pub fn save(&self, path: &Path, field: &str) -> Result<()> {
        std::fs::write(path, self.to_csv(field))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn y10_at_north_pole() {
        let c = SHCoeffs::delta(4, 1, 0);
        assert!((c.evaluate(&SpherePoint::NORTH) - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        assert_eq!(SHCoeffs::zeros(4).evaluate(&SpherePoint::from_xyz(0.3, 0.2, 0.1)), 0.0);
    }

    #[test]
    fn height_gradient_on_equator_points_north() {
        // z = sqrt(4π/3) Y_{1,0}
        let c = SHCoeffs::delta(3, 1, 0).scaled((4.0 * PI / 3.0).sqrt());
        let g = c.gradient(&SpherePoint::from_xyz(0.0, 1.0, 0.0));
        assert!((g.vec - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let mut c = SHCoeffs::zeros(3);
        for (k, v) in c.data.iter_mut().enumerate() {
            *v = (k as f64 * 0.1).sin() / 3.0 + 1e-300 * k as f64;
        }
        let (back, field) = SHCoeffs::from_csv(&c.to_csv("ln_h")).unwrap();
        assert_eq!(field, "ln_h");
        assert_eq!(back, c);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(SHCoeffs::from_csv("").is_err());
        assert!(SHCoeffs::from_csv("a,b,c\n").is_err());
        assert!(SHCoeffs::from_csv("l,m,h\n1,2,0.5\n").is_err());
        assert!(SHCoeffs::from_csv("l,m,h\n1,0,nan\n").is_err());
    }
}
