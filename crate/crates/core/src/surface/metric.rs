use std::path::Path;
use std::sync::Arc;

use crate::quadrature::GaussRule;
use crate::spectral::{invert_laplacian_standard, SHCoeffs, SphereGrid};
use crate::surface::SpherePoint;
use crate::{Error, Result, Vec3};

pub const DEFAULT_DEGREE: usize = 32;

/// Continuous symmetry group of a metric, as far as the dynamics care.
#[derive(Debug, Clone, PartialEq)]
pub enum Symmetry {
    /// Full rotation group (constant factor).
    Round,
    /// Rotations about the given unit axis.
    Axisymmetric(Vec3),
    Generic,
}

/// Which field an SH table represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableField {
    H,
    LnH,
}

impl TableField {
    pub fn header(self) -> &'static str {
        match self {
            TableField::H => "h",
            TableField::LnH => "ln_h",
        }
    }
}

/// Oblate or prolate spheroid `(x² + y²)/a² + z²/c² = 1`, reached from the
/// sphere by the longitude-preserving conformal map that fixes the equator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spheroid {
    pub a: f64,
    pub c: f64,
    e2: f64,
}

impl Spheroid {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && c > 0.0 && a.is_finite() && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "spheroid semi-axes must be positive, got a={a}, c={c}"
            )));
        }
        Ok(Self {
            a,
            c,
            e2: 1.0 - (c * c) / (a * a),
        })
    }

    /// `e·atanh(e σ)`, continued analytically to `e² < 0`.
    fn q(&self, sigma: f64) -> f64 {
        if self.e2 > 0.0 {
            let e = self.e2.sqrt();
            e * (e * sigma).atanh()
        } else if self.e2 < 0.0 {
            let e = (-self.e2).sqrt();
            -e * (e * sigma).atan()
        } else {
            0.0
        }
    }

    /// Returns `(h, d ln h / dt)` at sphere height `t = z ∈ [-1, 1]`.
    fn profile(&self, t: f64) -> (f64, f64) {
        let tt = t.abs().min(1.0);
        // geodetic parameter y = atanh σ solves y − q(tanh y) = atanh t
        let (sigma, emy2) = if tt >= 1.0 {
            (1.0, 0.0)
        } else {
            let psi = tt.atanh();
            let mut y = psi;
            for _ in 0..60 {
                let s = y.tanh();
                let f = y - self.q(s) - psi;
                let df = (1.0 - self.e2) / (1.0 - self.e2 * s * s);
                let dy = f / df;
                y -= dy;
                if dy.abs() <= 1e-16 * y.abs().max(1.0) {
                    break;
                }
            }
            (y.tanh(), (-2.0 * y).exp())
        };
        let q = self.q(sigma);
        // cosh ψ / cosh y written without overflow
        let rho = (-q).exp() * (2.0 / (1.0 + tt)) / (1.0 + emy2);
        let h = self.a / (1.0 - self.e2 * sigma * sigma).sqrt() * rho;
        let dlnh = -q.sinh() * rho;
        (h, if t < 0.0 { -dlnh } else { dlnh })
    }

    pub fn h(&self, s: &SpherePoint) -> f64 {
        self.profile(s.z()).0
    }
}

#[derive(Debug, Clone)]
pub enum ConformalFactor {
    Constant(f64),
    Spheroid(Spheroid),
    Table { coeffs: SHCoeffs, field: TableField },
}

impl ConformalFactor {
    fn ln_h(&self, s: &SpherePoint) -> f64 {
        match self {
            ConformalFactor::Constant(c) => c.ln(),
            ConformalFactor::Spheroid(sp) => sp.h(s).ln(),
            ConformalFactor::Table { coeffs, field } => match field {
                TableField::LnH => coeffs.evaluate(s),
                TableField::H => coeffs.evaluate(s).ln(),
            },
        }
    }

    fn h(&self, s: &SpherePoint) -> f64 {
        match self {
            ConformalFactor::Constant(c) => *c,
            ConformalFactor::Spheroid(sp) => sp.h(s),
            ConformalFactor::Table { coeffs, field } => match field {
                TableField::LnH => coeffs.evaluate(s).exp(),
                TableField::H => coeffs.evaluate(s),
            },
        }
    }

    fn h_and_grad_ln_h(&self, s: &SpherePoint) -> (f64, Vec3) {
        match self {
            ConformalFactor::Constant(c) => (*c, Vec3::zeros()),
            ConformalFactor::Spheroid(sp) => {
                let (h, d) = sp.profile(s.z());
                (h, (Vec3::z() - s.vec() * s.z()) * d)
            }
            ConformalFactor::Table { coeffs, field } => {
                let (v, g) = coeffs.value_and_gradient(s);
                match field {
                    TableField::LnH => (v.exp(), g.vec),
                    TableField::H => (v, g.vec / v),
                }
            }
        }
    }
}

/// The metric `h² g₀` on the unit sphere, with the spectral data every other
/// module needs computed once at construction.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    label: String,
    factor: ConformalFactor,
    symmetry: Symmetry,
    grid: Arc<SphereGrid>,
    h2_grid: Vec<f64>,
    area: f64,
    ln_h: SHCoeffs,
    lap_ln_h: SHCoeffs,
    u: SHCoeffs,
    c_tilde: f64,
}

impl ConformalMetric {
    pub fn round(degree: usize) -> Self {
        Self::build("round".into(), ConformalFactor::Constant(1.0), Symmetry::Round, degree)
            .expect("round metric is valid")
    }

    pub fn scaled(c: f64, degree: usize) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale factor must be positive, got {c}")));
        }
        Self::build(format!("scaled:{c}"), ConformalFactor::Constant(c), Symmetry::Round, degree)
    }

    pub fn spheroid(a: f64, c: f64, degree: usize) -> Result<Self> {
        let sp = Spheroid::new(a, c)?;
        let symmetry = if a == c { Symmetry::Round } else { Symmetry::Axisymmetric(Vec3::z()) };
        Self::build(format!("spheroid:{a},{c}"), ConformalFactor::Spheroid(sp), symmetry, degree)
    }

    /// A factor given by SH coefficients of `h` or `ln h`.
    pub fn from_table(
        coeffs: SHCoeffs,
        field: TableField,
        symmetry: Symmetry,
        label: String,
        degree: usize,
    ) -> Result<Self> {
        Self::build(label, ConformalFactor::Table { coeffs, field }, symmetry, degree)
    }

    pub fn load_table(path: &Path, degree: usize) -> Result<Self> {
        let (coeffs, name) = SHCoeffs::load(path)?;
        let field = match name.as_str() {
            "h" => TableField::H,
            "ln_h" | "log_h" => TableField::LnH,
            other => {
                return Err(Error::Table(format!(
                    "header must name field h or ln_h, found {other:?}"
                )))
            }
        };
        Self::from_table(coeffs, field, Symmetry::Generic, format!("sh-table:{}", path.display()), degree)
    }

    /// Parses the config names `round`, `scaled:c`, `spheroid:a,c`,
    /// `ellipsoid:a,b,c` and `sh-table:<path>`.
    pub fn from_name(name: &str, degree: usize) -> Result<Self> {
        let (kind, args) = match name.split_once(':') {
            Some((k, a)) => (k.trim(), a.trim()),
            None => (name.trim(), ""),
        };
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .map(|p| {
                    p.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidParameter(format!("bad number {p:?} in metric {name:?}"))
                    })
                })
                .collect()
        };
        let arity = |v: Vec<f64>, n: usize| -> Result<Vec<f64>> {
            if v.len() == n {
                Ok(v)
            } else {
                Err(Error::InvalidParameter(format!(
                    "metric {kind:?} takes {n} parameter(s), got {}",
                    v.len()
                )))
            }
        };
        match kind {
            "round" if args.is_empty() => Ok(Self::round(degree)),
            "scaled" => Self::scaled(arity(nums()?, 1)?[0], degree),
            "spheroid" => {
                let v = arity(nums()?, 2)?;
                Self::spheroid(v[0], v[1], degree)
            }
            "ellipsoid" => {
                let v = arity(nums()?, 3)?;
                Ok(super::ellipsoid_conformal_factor(v[0], v[1], v[2], degree)?.0)
            }
            "sh-table" if !args.is_empty() => Self::load_table(Path::new(args), degree),
            _ => Err(Error::InvalidParameter(format!("unknown metric {name:?}"))),
        }
    }

    fn build(label: String, factor: ConformalFactor, symmetry: Symmetry, degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidParameter(format!("truncation degree {degree} too small")));
        }
        let grid = SphereGrid::new(degree);
        let mut h2_grid = Vec::with_capacity(grid.len());
        let mut ln_h_grid = Vec::with_capacity(grid.len());
        for (node, p) in grid.points().enumerate() {
            let h = factor.h(&p);
            if !(h > 0.0 && h.is_finite()) {
                let (lat_deg, lon_deg) = p.lat_lon_deg();
                return Err(Error::NonPositiveFactor {
                    node,
                    lat_deg,
                    lon_deg,
                    value: h,
                });
            }
            h2_grid.push(h * h);
            ln_h_grid.push(factor.ln_h(&p));
        }
        let area = grid.integrate(&h2_grid);
        let (ln_h, u) = if let ConformalFactor::Constant(c) = factor {
            // exact: no roundoff leaking into higher degrees
            let mut l = SHCoeffs::zeros(degree);
            *l.get_mut(0, 0) = c.ln() * (4.0 * std::f64::consts::PI).sqrt();
            (l, SHCoeffs::zeros(degree))
        } else {
            (grid.analyze(&ln_h_grid), invert_laplacian_standard(&grid.analyze(&h2_grid)))
        };
        let u_grid = grid.synthesize(&u);
        let weighted: Vec<f64> = h2_grid.iter().zip(&u_grid).map(|(a, b)| a * b).collect();
        let c_tilde = grid.integrate(&weighted) / (area * area);
        let lap_ln_h = ln_h.laplacian();
        let tail = (0..=degree as i64)
            .map(|m| ln_h.get(degree, m).abs().max(ln_h.get(degree, -m).abs()))
            .fold(0.0, f64::max);
        if tail > 1e-8 {
            log::warn!("metric {label}: ln h not resolved at degree {degree} (tail coefficient {tail:e})");
        }
        Ok(Self {
            label,
            factor,
            symmetry,
            grid,
            h2_grid,
            area,
            ln_h,
            lap_ln_h,
            u,
            c_tilde,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn factor(&self) -> &ConformalFactor {
        &self.factor
    }
    pub fn symmetry(&self) -> &Symmetry {
        &self.symmetry
    }
    pub fn degree(&self) -> usize {
        self.grid.degree()
    }
    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }
    /// `h²` at the grid nodes, row-major by latitude ring.
    pub fn h2_grid(&self) -> &[f64] {
        &self.h2_grid
    }
    /// `Ã = ∫ h² dA₀`.
    pub fn total_area(&self) -> f64 {
        self.area
    }
    pub fn is_constant(&self) -> bool {
        matches!(self.factor, ConformalFactor::Constant(_))
    }
    pub fn constant_factor(&self) -> Option<f64> {
        match self.factor {
            ConformalFactor::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn h(&self, s: &SpherePoint) -> f64 {
        self.factor.h(s)
    }
    pub fn ln_h(&self, s: &SpherePoint) -> f64 {
        self.factor.ln_h(s)
    }
    /// `(h, ∇₀ ln h)` at `s`.
    pub fn h_and_grad_ln_h(&self, s: &SpherePoint) -> (f64, Vec3) {
        self.factor.h_and_grad_ln_h(s)
    }

    /// Coefficients of `ln h` on this metric's grid.
    pub fn ln_h_coeffs(&self) -> &SHCoeffs {
        &self.ln_h
    }
    /// `u = Δ₀⁻¹h²`, zero round mean.
    pub fn u_coeffs(&self) -> &SHCoeffs {
        &self.u
    }
    /// `c̃ = Ã⁻² ∫ h² u dA₀`.
    pub fn c_tilde(&self) -> f64 {
        self.c_tilde
    }

    /// Gaussian curvature of `h² g₀`: `(1 − Δ₀ ln h) / h²`.
    pub fn gaussian_curvature(&self, s: &SpherePoint) -> f64 {
        let h = self.h(s);
        (1.0 - self.lap_ln_h.evaluate(s)) / (h * h)
    }

    /// For an axisymmetric metric, `A(t) = ∫₀ᵗ h² dt'` along the axis height;
    /// the conserved momentum of a vortex system is `Σ κ_j A(s_j·axis)`.
    pub fn axial_primitive(&self, t: f64) -> Option<f64> {
        let axis = match &self.symmetry {
            Symmetry::Round => Vec3::z(),
            Symmetry::Axisymmetric(a) => *a,
            Symmetry::Generic => return None,
        };
        if let Some(c) = self.constant_factor() {
            return Some(c * c * t);
        }
        let perp = SpherePoint::new(axis).tangent_frame().0;
        let rule = GaussRule::new(48);
        Some(rule.integrate(0.0, t, |x| {
            let p = SpherePoint::new(axis * x + perp * (1.0 - x * x).max(0.0).sqrt());
            let h = self.h(&p);
            h * h
        }))
    }
}

pub fn total_area(metric: &ConformalMetric) -> f64 {
    metric.total_area()
}

pub fn gaussian_curvature(metric: &ConformalMetric, s: &SpherePoint) -> f64 {
    metric.gaussian_curvature(s)
}
