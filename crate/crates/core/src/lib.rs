//! Exact lattice-point counts in stretched convex bodies of finite type, the
//! curvature exponents that govern their asymptotics, and the search for
//! volume-preserving stretches that maximise or minimise the counts.
//!
//! Everything is generic over the float type ([`scalar::Real`]); the aliases
//! below fix it to `f64`.

pub mod count;
pub mod domain;
pub mod error;
pub mod exponents;
pub mod harness;
pub mod measure;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod series;
pub mod stretchopt;

pub use count::{count, count_axis_subsets, count_bruteforce, CountRequest, CountResult, LatticeSet};
pub use domain::{boundary_point_from_direction, contains, gauge, graph_derivative, BodySpec, BoundaryPoint, Family};
pub use error::{Error, Result};
pub use exponents::{exponent_report, multitype_at, nu_at, ExponentReport, MultitypeReport, Strategy};
pub use measure::{balanced_factor, section_measure, section_measures, volume, SectionMeasures, StretchFactor};
pub use scalar::Real;
pub use stretchopt::{critical_values_2d, deviation_from_balanced, optimize, OptimizeConfig, OptimumReport};

pub type Body = domain::BodySpec<f64>;
pub type Stretch = measure::StretchFactor<f64>;
pub type Point = domain::BoundaryPoint<f64>;
pub type Request = count::CountRequest<f64>;
pub type Optimum = stretchopt::OptimumReport<f64>;
pub type Exponents = exponents::ExponentReport<f64>;
