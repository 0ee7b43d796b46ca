//! Scenario files (TOML). Unknown keys are rejected everywhere; positions
//! are geographic degrees.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use surfvortex_core::dynamics::{closest_pair, CrossingDirection, MassVortexState, VortexState};
use surfvortex_core::surface::{ConformalMetric, SpherePoint, DEFAULT_DEGREE};
use surfvortex_core::Vec3;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub surface: SurfaceConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vortices: Vec<VortexConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_vortices: Option<RandomVortices>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub experiment: Experiment,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    /// `round`, `scaled:c`, `spheroid:a,c`, `ellipsoid:a,b,c` or
    /// `sh-table:<path>` (relative paths resolve against the config file).
    pub metric: String,
    #[serde(default = "default_degree")]
    pub degree: usize,
}

fn default_degree() -> usize {
    DEFAULT_DEGREE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexConfig {
    pub lat: f64,
    pub lon: f64,
    pub strength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// Initial velocity `[east, north]` in round-sphere units; only for
    /// vortices with mass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<[f64; 2]>,
}

/// `count` vortices placed uniformly at random (seeded by `seed`), with
/// strengths uniform in `strength` and pairwise chordal distance at least
/// `min_separation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomVortices {
    pub count: usize,
    pub strength: [f64; 2],
    #[serde(default = "default_min_separation")]
    pub min_separation: f64,
}

fn default_min_separation() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub t_end: f64,
    pub tol: f64,
    pub sample_interval: f64,
    /// Mass vortices only: include the `½κ²R̃` self term.
    #[serde(default)]
    pub robin_self_term: bool,
    /// Step budget for plain simulations; exhausting it aborts the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            tol: 1e-10,
            sample_interval: 0.1,
            robin_self_term: false,
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    #[default]
    None,
    /// Tight pairs launched from `(lat, lon)` with the given heading
    /// (degrees clockwise from north), one run per half-separation.
    Dipole {
        lat: f64,
        lon: f64,
        heading: f64,
        epsilons: Vec<f64>,
        #[serde(default = "default_dipole_samples")]
        samples: usize,
    },
    /// One dipole per entry of `latitudes`, all at `lon` with the same
    /// heading and half-separation; crossings of the pair centre through the
    /// plane `z = level`.
    Poincare {
        level: f64,
        crossing: Crossing,
        epsilon: f64,
        heading: f64,
        lon: f64,
        latitudes: Vec<f64>,
        #[serde(default = "default_modes")]
        fourier_modes: usize,
    },
    /// Spectral tables of the metric and its Robin function on a grid of
    /// the given degree.
    GreensTable { grid: usize },
}

fn default_dipole_samples() -> usize {
    400
}

fn default_modes() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Crossing {
    Up,
    Down,
    Both,
}

impl From<Crossing> for CrossingDirection {
    fn from(c: Crossing) -> Self {
        match c {
            Crossing::Up => CrossingDirection::Up,
            Crossing::Down => CrossingDirection::Down,
            Crossing::Both => CrossingDirection::Both,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.resolve_table_path(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn resolve_table_path(&mut self, base: &Path) {
        if let Some(rest) = self.surface.metric.strip_prefix("sh-table:") {
            let p = Path::new(rest.trim());
            if p.is_relative() {
                self.surface.metric = format!("sh-table:{}", base.join(p).display());
            }
        }
    }

    /// Checks everything that does not need the metric itself.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let i = &self.integrator;
        if !(i.t_end > 0.0 && i.t_end.is_finite()) {
            return bad(format!("integrator.t_end must be positive, got {}", i.t_end));
        }
        if !(i.tol > 0.0 && i.tol < 1.0) {
            return bad(format!("integrator.tol must lie in (0, 1), got {}", i.tol));
        }
        if !(i.sample_interval > 0.0 && i.sample_interval.is_finite()) {
            return bad(format!("integrator.sample_interval must be positive, got {}", i.sample_interval));
        }
        if self.surface.degree < 2 {
            return bad(format!("surface.degree must be at least 2, got {}", self.surface.degree));
        }
        for (k, v) in self.vortices.iter().enumerate() {
            if !(v.lat.abs() <= 90.0) || !v.lon.is_finite() || !v.strength.is_finite() {
                return bad(format!("vortex {k}: position or strength out of range"));
            }
            if let Some(m) = v.mass {
                if !(m > 0.0 && m.is_finite()) {
                    return bad(format!("vortex {k}: mass must be positive, got {m}"));
                }
            }
            if v.velocity.is_some() && v.mass.is_none() {
                return bad(format!("vortex {k}: velocity given without mass"));
            }
        }
        let massive = self.vortices.iter().filter(|v| v.mass.is_some()).count();
        if massive != 0 && massive != self.vortices.len() {
            return bad("either every vortex has a mass or none does".into());
        }
        if let Some(r) = &self.random_vortices {
            if massive != 0 {
                return bad("random_vortices cannot be mixed with mass vortices".into());
            }
            if r.count == 0 || !(r.strength[0] <= r.strength[1]) || !(r.min_separation >= 0.0 && r.min_separation < 1.0) {
                return bad("random_vortices needs count ≥ 1, strength [lo, hi] with lo ≤ hi and min_separation in [0, 1)".into());
            }
        }
        match &self.experiment {
            Experiment::None => {
                if self.vortices.is_empty() && self.random_vortices.is_none() {
                    return bad("no vortices given".into());
                }
            }
            Experiment::Dipole { epsilons, samples, lat, .. } => {
                if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0 && *e < 0.5)) {
                    return bad("dipole epsilons must be non-empty and lie in (0, 0.5)".into());
                }
                if *samples == 0 || lat.abs() > 90.0 {
                    return bad("dipole needs samples ≥ 1 and |lat| ≤ 90".into());
                }
            }
            Experiment::Poincare { level, epsilon, latitudes, fourier_modes, .. } => {
                if !(level.abs() < 1.0) || !(*epsilon > 0.0 && *epsilon < 0.5) || latitudes.is_empty() {
                    return bad("poincare needs |level| < 1, epsilon in (0, 0.5) and at least one latitude".into());
                }
                if latitudes.iter().any(|l| l.abs() > 90.0) || *fourier_modes == 0 {
                    return bad("poincare latitudes must satisfy |lat| ≤ 90 and fourier_modes ≥ 1".into());
                }
            }
            Experiment::GreensTable { grid } => {
                if *grid < 2 {
                    return bad(format!("greens-table grid must be at least 2, got {grid}"));
                }
            }
        }
        Ok(())
    }

    /// Builds the metric; a non-positive factor is a configuration error.
    pub fn metric(&self) -> Result<ConformalMetric, CliError> {
        ConformalMetric::from_name(&self.surface.metric, self.surface.degree).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Configured vortices followed by the random ones.
    pub fn vortex_state(&self) -> Result<VortexState, CliError> {
        let mut positions: Vec<SpherePoint> =
            self.vortices.iter().map(|v| SpherePoint::from_lat_lon_deg(v.lat, v.lon)).collect();
        let mut strengths: Vec<f64> = self.vortices.iter().map(|v| v.strength).collect();
        if let Some(r) = &self.random_vortices {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let mut placed = 0;
            let mut attempts = 0;
            while placed < r.count {
                attempts += 1;
                if attempts > 100_000 {
                    return Err(CliError::Config(format!(
                        "could not place {} random vortices {} apart",
                        r.count, r.min_separation
                    )));
                }
                let p = uniform_point(&mut rng);
                let mut all = positions.clone();
                all.push(p);
                if closest_pair(&all).is_some_and(|(_, _, d)| d < r.min_separation) {
                    continue;
                }
                positions.push(p);
                strengths.push(if r.strength[0] == r.strength[1] {
                    r.strength[0]
                } else {
                    rng.gen_range(r.strength[0]..r.strength[1])
                });
                placed += 1;
            }
        }
        VortexState::new(positions, strengths).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn has_masses(&self) -> bool {
        self.vortices.first().is_some_and(|v| v.mass.is_some())
    }

    /// Mass-vortex initial state, `p = m h² v`.
    pub fn mass_state(&self, metric: &ConformalMetric) -> Result<MassVortexState, CliError> {
        let mut positions = Vec::new();
        let mut momenta = Vec::new();
        for v in &self.vortices {
            let s = SpherePoint::from_lat_lon_deg(v.lat, v.lon);
            let [east, north] = v.velocity.unwrap_or([0.0, 0.0]);
            let (e, n) = east_north(&s);
            let mass = v.mass.unwrap_or(1.0);
            momenta.push((e * east + n * north) * (mass * metric.h(&s).powi(2)));
            positions.push(s);
        }
        MassVortexState::new(
            positions,
            momenta,
            self.vortices.iter().map(|v| v.mass.unwrap_or(1.0)).collect(),
            self.vortices.iter().map(|v| v.strength).collect(),
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

fn uniform_point(rng: &mut ChaCha8Rng) -> SpherePoint {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    SpherePoint::from_xyz(r * phi.cos(), r * phi.sin(), z)
}

/// Local east and north unit vectors (any orthonormal pair at the poles).
pub fn east_north(s: &SpherePoint) -> (Vec3, Vec3) {
    let east = Vec3::z().cross(s.vec());
    if east.norm() < 1e-12 {
        return (Vec3::y(), -Vec3::x() * s.z().signum());
    }
    let east = east.normalize();
    (east, s.vec().cross(&east))
}

/// Tangent direction at `s` for a heading in degrees clockwise from north.
pub fn heading_vector(s: &SpherePoint, heading_deg: f64) -> Vec3 {
    let (e, n) = east_north(s);
    let a = heading_deg.to_radians();
    n * a.cos() + e * a.sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        output_dir = "out"
        [surface]
        metric = "round"
        [[vortices]]
        lat = 10.0
        lon = 0.0
        strength = 1.0
        [[vortices]]
        lat = -20.0
        lon = 90.0
        strength = 1.0
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.surface.degree, DEFAULT_DEGREE);
        assert_eq!(cfg.experiment, Experiment::None);
        assert_eq!(cfg.integrator, IntegratorConfig::default());
        assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("metric = \"round\"", "metric = \"round\"\nradius = 2.0");
        assert!(matches!(ScenarioConfig::from_toml(&text), Err(CliError::Config(_))));
        let text = format!("{MINIMAL}\n[experiment]\nkind = \"greens-table\"\ngrid = 8\ncolour = 1\n");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn experiment_tags() {
        let text = format!("{MINIMAL}\n[experiment]\nkind = \"poincare\"\nlevel = 0.0\ncrossing = \"up\"\nepsilon = 0.1\nheading = 20.0\nlon = 0.0\nlatitudes = [-10.0, 0.0]\n");
        let cfg = ScenarioConfig::from_toml(&text).unwrap();
        assert!(matches!(cfg.experiment, Experiment::Poincare { fourier_modes: 4, .. }));
        assert_eq!(ScenarioConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn physical_parameters_checked() {
        let text = MINIMAL.replacen("strength = 1.0", "strength = 1.0\nmass = -1.0", 1);
        assert!(ScenarioConfig::from_toml(&text).is_err());
        let text = MINIMAL.replace("[surface]", "[integrator]\nt_end = -1.0\ntol = 1e-8\nsample_interval = 0.1\n[surface]");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn random_vortices_are_reproducible() {
        let text = "seed = 11\n[surface]\nmetric = \"round\"\n[random_vortices]\ncount = 5\nstrength = [-1.0, 1.0]\n";
        let cfg = ScenarioConfig::from_toml(text).unwrap();
        let (a, b) = (cfg.vortex_state().unwrap(), cfg.vortex_state().unwrap());
        assert_eq!(a.flat(), b.flat());
        assert_eq!(a.len(), 5);
        assert!(closest_pair(a.positions()).unwrap().2 >= 0.2);
    }

    #[test]
    fn heading_zero_points_north() {
        let s = SpherePoint::from_lat_lon_deg(0.0, 0.0);
        assert!((heading_vector(&s, 0.0) - Vec3::z()).norm() < 1e-15);
        assert!((heading_vector(&s, 90.0) - Vec3::y()).norm() < 1e-15);
    }
}
