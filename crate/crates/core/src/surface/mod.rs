//! Points, charts and conformal metrics on the unit sphere.

mod ellipsoid;
pub(crate) mod geodesic;
mod metric;
mod point;

pub use ellipsoid::{ellipsoid_conformal_factor, EllipsoidMap};
pub use geodesic::{geodesic_integrate, GeodesicPath};
pub use metric::{
    gaussian_curvature, total_area, ConformalFactor, ConformalMetric, Spheroid, Symmetry, TableField,
    DEFAULT_DEGREE,
};
pub use point::*;
