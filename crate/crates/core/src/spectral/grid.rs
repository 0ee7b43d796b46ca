use std::f64::consts::PI;
use std::sync::Arc;

use super::legendre::{tri, LegendreTable};
use super::SHCoeffs;
use crate::quadrature::gauss_legendre;
use crate::surface::SpherePoint;
use crate::Vec3;

/// Gauss–Legendre in `cos θ` (L+1 nodes) × 2L+2 uniform longitudes.
///
/// Analysis on this grid is exact for fields of degree ≤ L.
#[derive(Debug)]
pub struct SphereGrid {
    degree: usize,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    weights: Vec<f64>,
    nlon: usize,
    cos_mphi: Vec<f64>,
    sin_mphi: Vec<f64>,
    legendre: Vec<LegendreTable>,
}

impl SphereGrid {
    pub fn new(degree: usize) -> Arc<Self> {
        let nlat = degree + 1;
        let nlon = 2 * degree + 2;
        let (x, w) = gauss_legendre(nlat);
        let sin_theta: Vec<f64> = x.iter().map(|&c| (1.0 - c * c).max(0.0).sqrt()).collect();
        let legendre = x
            .iter()
            .zip(&sin_theta)
            .map(|(&c, &s)| LegendreTable::new(degree, c, s))
            .collect();
        let mut cos_mphi = vec![0.0; nlon * (degree + 1)];
        let mut sin_mphi = vec![0.0; nlon * (degree + 1)];
        for j in 0..nlon {
            for m in 0..=degree {
                // integer arithmetic on the angle keeps the table exactly periodic
                let ang = 2.0 * PI * ((m * j) % nlon) as f64 / nlon as f64;
                cos_mphi[j * (degree + 1) + m] = ang.cos();
                sin_mphi[j * (degree + 1) + m] = ang.sin();
            }
        }
        Arc::new(Self {
            degree,
            cos_theta: x,
            sin_theta,
            weights: w,
            nlon,
            cos_mphi,
            sin_mphi,
            legendre,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn nlat(&self) -> usize {
        self.degree + 1
    }
    pub fn nlon(&self) -> usize {
        self.nlon
    }
    pub fn len(&self) -> usize {
        self.nlat() * self.nlon
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn longitude(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.nlon as f64
    }

    /// Grid node `(i, j)`: latitude ring `i` (north to south), longitude `j`.
    pub fn point(&self, i: usize, j: usize) -> SpherePoint {
        let phi = self.longitude(j);
        let s = self.sin_theta[i];
        SpherePoint::new(Vec3::new(s * phi.cos(), s * phi.sin(), self.cos_theta[i]))
    }

    pub fn points(&self) -> impl Iterator<Item = SpherePoint> + '_ {
        (0..self.nlat()).flat_map(move |i| (0..self.nlon).map(move |j| self.point(i, j)))
    }

    /// Quadrature weight of node `(i, j)` for the round area element.
    pub fn area_weight(&self, i: usize) -> f64 {
        self.weights[i] * 2.0 * PI / self.nlon as f64
    }

    /// `∫ f dA₀` by the grid quadrature.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        (0..self.nlat())
            .map(|i| {
                let ring: f64 = values[i * self.nlon..(i + 1) * self.nlon].iter().sum();
                ring * self.area_weight(i)
            })
            .sum()
    }

    pub fn analyze(&self, values: &[f64]) -> SHCoeffs {
        assert_eq!(values.len(), self.len(), "field does not match grid");
        let big_l = self.degree;
        let mut out = SHCoeffs::zeros(big_l);
        let sqrt2 = 2f64.sqrt();
        let mut cm = vec![0.0; big_l + 1];
        let mut sm = vec![0.0; big_l + 1];
        for i in 0..self.nlat() {
            let ring = &values[i * self.nlon..(i + 1) * self.nlon];
            cm.iter_mut().for_each(|c| *c = 0.0);
            sm.iter_mut().for_each(|c| *c = 0.0);
            for (j, &f) in ring.iter().enumerate() {
                let base = j * (big_l + 1);
                for m in 0..=big_l {
                    cm[m] += f * self.cos_mphi[base + m];
                    sm[m] += f * self.sin_mphi[base + m];
                }
            }
            let wt = self.area_weight(i);
            let leg = &self.legendre[i];
            for m in 0..=big_l {
                let (c, s) = if m == 0 {
                    (cm[0] * wt, 0.0)
                } else {
                    (sqrt2 * cm[m] * wt, sqrt2 * sm[m] * wt)
                };
                for l in m..=big_l {
                    let q = leg.q[tri(l, m)];
                    *out.get_mut(l, m as i64) += q * c;
                    if m > 0 {
                        *out.get_mut(l, -(m as i64)) += q * s;
                    }
                }
            }
        }
        out
    }

    /// Evaluates coefficients (of any degree ≤ this grid's) at every node.
    pub fn synthesize(&self, coeffs: &SHCoeffs) -> Vec<f64> {
        let big_l = self.degree.min(coeffs.degree());
        let sqrt2 = 2f64.sqrt();
        let mut out = vec![0.0; self.len()];
        let mut cm = vec![0.0; big_l + 1];
        let mut sm = vec![0.0; big_l + 1];
        for i in 0..self.nlat() {
            let leg = &self.legendre[i];
            for m in 0..=big_l {
                let (mut c, mut s) = (0.0, 0.0);
                for l in m..=big_l {
                    let q = leg.q[tri(l, m)];
                    c += coeffs.get(l, m as i64) * q;
                    if m > 0 {
                        s += coeffs.get(l, -(m as i64)) * q;
                    }
                }
                cm[m] = c;
                sm[m] = s;
            }
            for j in 0..self.nlon {
                let base = j * (self.degree + 1);
                let mut v = cm[0];
                for m in 1..=big_l {
                    v += sqrt2 * (cm[m] * self.cos_mphi[base + m] + sm[m] * self.sin_mphi[base + m]);
                }
                out[i * self.nlon + j] = v;
            }
        }
        out
    }
}

/// Samples of a scalar field on a [`SphereGrid`].
#[derive(Debug, Clone)]
pub struct SHField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl SHField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "grid shape mismatch");
        Self { grid, values }
    }

    pub fn from_fn<F: FnMut(&SpherePoint) -> f64>(grid: Arc<SphereGrid>, mut f: F) -> Self {
        let values = grid.points().map(|p| f(&p)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn integrate(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}
