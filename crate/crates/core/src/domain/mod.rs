//! Symmetric convex bodies: gauges, membership, boundary frames and graph derivatives.

mod body;
mod boundary;
mod graph;
mod membership;

pub use body::{even_power_sum, BodySpec, Family, GaugeFn, GaugeSeriesFn};
pub use boundary::{boundary_point_from_direction, boundary_point_with_section, BoundaryPoint};
pub use graph::{graph_derivative, graph_derivatives, DerivativeMethod, MAX_SERIES_ORDER};
pub use membership::{contains, ScaledBody};

pub(crate) use body::parse_list;
pub(crate) use boundary::{dot, norm};
pub(crate) use graph::graph_jet;
pub(crate) use membership::int_to;

use crate::error::Result;
use crate::scalar::Real;

/// Minkowski functional of `body` at `x`.
pub fn gauge<F: Real>(body: &BodySpec<F>, x: &[F]) -> Result<F> {
    body.gauge(x)
}
