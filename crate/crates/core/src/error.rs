use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("stereographic chart undefined at the projection pole")]
    ChartDomain,

    #[error("conformal factor must be positive, got {value} at quadrature node {node} (lat {lat_deg:.6} deg, lon {lon_deg:.6} deg)")]
    NonPositiveFactor {
        node: usize,
        lat_deg: f64,
        lon_deg: f64,
        value: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular evaluation: points coincide (distance {distance:e})")]
    Singularity { distance: f64 },

    #[error("vortices {i} and {j} collided (chordal distance {distance:e})")]
    Collision { i: usize, j: usize, distance: f64 },

    #[error("step size underflow at t = {t} (h = {step:e}){}", .closest_pair.map(|(i, j)| format!(", closest pair ({i}, {j})")).unwrap_or_default())]
    StepUnderflow {
        t: f64,
        step: f64,
        closest_pair: Option<(usize, usize)>,
    },

    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("geodesic shooting failed: {0}")]
    Shooting(String),

    #[error("dipole left its geodesic ball: separation {separation:e} vs initial {initial:e} at t = {t}")]
    DipoleBreakup {
        t: f64,
        separation: f64,
        initial: f64,
    },

    #[error("table format: {0}")]
    Table(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
