//! Derivatives of the local boundary graph.
//!
//! Near a boundary point `P` the boundary is `Gamma(V) = P + V - Phi(V) n(P)`
//! for tangent vectors `V`. Along a tangent direction `w` we need the
//! one-variable derivatives of `s -> Phi(s w)` at `s = 0`.

use crate::error::{input, Error, Result};
use crate::roots::bisect;
use crate::scalar::{from_usize, lit, Real};
use crate::series::{Jet, JET_LEN};

use super::boundary::{dot, norm};
use super::{BodySpec, BoundaryPoint};

/// How graph derivatives are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DerivativeMethod {
    /// Exact series coefficients when the body supports them, finite differences otherwise.
    #[default]
    Auto,
    Series,
    FiniteDifference,
}

/// Highest derivative order the series path produces.
pub const MAX_SERIES_ORDER: u32 = (JET_LEN - 1) as u32;

/// `(d/ds)^order Phi(s x)` at `s = 0`, where `x` holds coefficients in the frame of `p`.
pub fn graph_derivative<F: Real>(
    body: &BodySpec<F>,
    p: &BoundaryPoint<F>,
    x: &[F],
    order: u32,
    method: DerivativeMethod,
) -> Result<F> {
    match prepare(body, p, x, order, method)? {
        None => Ok(F::zero()),
        Some((w, true)) => Ok(graph_jet(body, p, &w)?.derivative_at_zero(order as usize)),
        Some((_, false)) if order == 0 => Ok(F::zero()),
        Some((w, false)) => fd_derivative(body, p, &w, order),
    }
}

/// Derivatives of orders `0..=max_order` along `x`.
pub fn graph_derivatives<F: Real>(
    body: &BodySpec<F>,
    p: &BoundaryPoint<F>,
    x: &[F],
    max_order: u32,
    method: DerivativeMethod,
) -> Result<Vec<F>> {
    let len = max_order as usize + 1;
    match prepare(body, p, x, max_order, method)? {
        None => Ok(vec![F::zero(); len]),
        Some((w, true)) => {
            let jet = graph_jet(body, p, &w)?;
            Ok((0..len).map(|k| if k == 0 { F::zero() } else { jet.derivative_at_zero(k) }).collect())
        }
        Some((w, false)) => {
            let mut out = vec![F::zero(); len];
            for (j, o) in out.iter_mut().enumerate().skip(1) {
                *o = fd_derivative(body, p, &w, j as u32)?;
            }
            Ok(out)
        }
    }
}

/// Validates the request; returns the tangent vector and whether to use series,
/// or `None` for the zero direction.
fn prepare<F: Real>(
    body: &BodySpec<F>,
    p: &BoundaryPoint<F>,
    x: &[F],
    order: u32,
    method: DerivativeMethod,
) -> Result<Option<(Vec<F>, bool)>> {
    let d = body.dim();
    if p.dim() != d || x.len() != d - 1 {
        return input(format!("expected {} tangent coefficients for a point in dimension {d}", d - 1));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return input("tangent coefficients must be finite");
    }
    if order > body.smoothness() {
        return input(format!("derivative order {order} exceeds the body's smoothness {}", body.smoothness()));
    }
    let use_series = match method {
        DerivativeMethod::Series => {
            if !body.has_series() {
                return input("series derivatives need even-integer exponents or a series oracle");
            }
            true
        }
        DerivativeMethod::Auto => body.has_series(),
        DerivativeMethod::FiniteDifference => false,
    };
    if use_series && order > MAX_SERIES_ORDER {
        return input(format!("series derivatives are available up to order {MAX_SERIES_ORDER}"));
    }
    if x.iter().all(|v| *v == F::zero()) {
        return Ok(None);
    }
    Ok(Some((p.tangent(x), use_series)))
}

/// Taylor series of `s -> Phi(s w)` by Newton iteration on series arguments.
pub(crate) fn graph_jet<F: Real>(body: &BodySpec<F>, p: &BoundaryPoint<F>, w: &[F]) -> Result<Jet<F>> {
    let grad = body.defining_gradient(&p.coords);
    let slope = dot(&grad, &p.normal);
    if !(slope > F::zero()) {
        return Err(Error::Numerical("defining function has no outward slope at the point".into()));
    }
    let mut phi = Jet::<F>::constant(F::zero());
    // each pass fixes one more coefficient
    for _ in 0..=JET_LEN {
        let y: Vec<Jet<F>> = (0..p.dim()).map(|i| Jet::linear(p.coords[i], w[i]) - phi.scale(p.normal[i])).collect();
        let value = body.defining_series(&y).ok_or_else(|| Error::Input("body has no series evaluation".into()))?;
        phi = phi + (value - Jet::constant(F::one())).scale(slope.recip());
        phi.set_coeff(0, F::zero());
    }
    if phi.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("non-finite graph series coefficient".into()));
    }
    Ok(phi)
}

/// `Phi(s w)`: the distance along `-n` from `P + s w` back to the boundary.
pub(crate) fn graph_value<F: Real>(body: &BodySpec<F>, p: &BoundaryPoint<F>, w: &[F], s: F) -> Result<F> {
    let scale = body.containment_bound();
    let h = |phi: F| {
        let y: Vec<F> = (0..p.dim()).map(|i| p.coords[i] + s * w[i] - phi * p.normal[i]).collect();
        body.gauge_unchecked(&y) - F::one()
    };
    let lo = -scale * lit(1e-6);
    let mut hi = (s.abs() * norm(w)).max(scale * lit(1e-6));
    let mut tries = 0;
    while !(h(hi) < F::zero()) {
        hi = hi + hi;
        tries += 1;
        if tries > 64 || hi > scale + scale {
            return Err(Error::Numerical(format!(
                "could not bracket the graph value at step {s} (outside the local graph)"
            )));
        }
    }
    if !(h(lo) > F::zero()) {
        return Err(Error::Numerical("graph value bracket lost its sign at the tangent plane".into()));
    }
    let (a, b) = bisect(lo, hi, 400, h);
    Ok((a + b) * lit(0.5))
}

/// Central difference of order `j` with Richardson extrapolation over three step sizes.
fn fd_derivative<F: Real>(body: &BodySpec<F>, p: &BoundaryPoint<F>, w: &[F], j: u32) -> Result<F> {
    let scale = body.containment_bound() / norm(w);
    let jf = from_usize::<F>(j as usize);
    let h0 = scale * (lit::<F>(8.0).powf(jf) * F::epsilon()).powf((jf + lit(6.0)).recip());
    if !(h0 > F::min_positive_value()) {
        return Err(Error::Numerical(format!("finite-difference step underflow at order {j}")));
    }
    let binom = binomials::<F>(j);
    let stencil = |h: F| -> Result<F> {
        let mut acc = F::zero();
        for (k, &c) in binom.iter().enumerate() {
            let off = (jf * lit(0.5) - from_usize(k)) * h;
            let v = graph_value(body, p, w, off)?;
            acc = if k % 2 == 0 { acc + c * v } else { acc - c * v };
        }
        Ok(acc / h.powi(j as i32))
    };
    let d1 = stencil(h0)?;
    let d2 = stencil(h0 * lit(0.5))?;
    let d3 = stencil(h0 * lit(0.25))?;
    let r1 = (d2 * lit(4.0) - d1) / lit(3.0);
    let r2 = (d3 * lit(4.0) - d2) / lit(3.0);
    Ok((r2 * lit(16.0) - r1) / lit(15.0))
}

fn binomials<F: Real>(j: u32) -> Vec<F> {
    let mut row = vec![F::one()];
    for k in 1..=j as usize {
        let prev = row[k - 1];
        row.push(prev * from_usize(j as usize + 1 - k) / from_usize(k));
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::boundary_point_from_direction;

    #[test]
    fn sphere_curvature_is_one() {
        let s = BodySpec::<f64>::ball(3, 2.0).unwrap();
        for v in [[1.0, 0.0, 0.0], [0.3, -0.4, 0.8], [0.0, 1.0, 1.0]] {
            let p = boundary_point_from_direction(&s, &v).unwrap();
            for x in [[1.0, 0.0], [0.6, 0.8], [0.0, -1.0]] {
                let exact = graph_derivative(&s, &p, &x, 2, DerivativeMethod::Series).unwrap();
                assert!((exact - 1.0).abs() < 1e-13, "{exact}");
                let fd = graph_derivative(&s, &p, &x, 2, DerivativeMethod::FiniteDifference).unwrap();
                assert!((fd - 1.0).abs() < 1e-8, "{fd}");
            }
        }
    }

    #[test]
    fn superellipse_axis_point_is_flat() {
        let b = BodySpec::<f64>::ball(2, 4.0).unwrap();
        let p = boundary_point_from_direction(&b, &[1.0, 0.0]).unwrap();
        let ds = graph_derivatives(&b, &p, &[1.0], 8, DerivativeMethod::Series).unwrap();
        assert!(ds[2].abs() < 1e-14 && ds[3].abs() < 1e-14);
        assert!((ds[4] - 6.0).abs() < 1e-12);
        // Phi = y^4/4 + 3 y^8/32 + ..
        assert!((ds[8] - 3.0 / 32.0 * 40320.0).abs() < 1e-8);
        let fd = graph_derivative(&b, &p, &[1.0], 4, DerivativeMethod::FiniteDifference).unwrap();
        assert!((fd - 6.0).abs() < 1e-4, "{fd}");
    }

    #[test]
    fn zero_direction_gives_zero() {
        let b = BodySpec::<f64>::ball(2, 4.0).unwrap();
        let p = boundary_point_from_direction(&b, &[0.3, 1.0]).unwrap();
        for j in 1..6 {
            assert_eq!(graph_derivative(&b, &p, &[0.0], j, DerivativeMethod::Auto).unwrap(), 0.0);
        }
    }

    #[test]
    fn generic_oracle_matches_superellipsoid() {
        let g = BodySpec::<f64>::generic(2, "l4", 12, |x| (x[0].powi(4) + x[1].powi(4)).powf(0.25)).unwrap();
        let s = BodySpec::<f64>::ball(2, 4.0).unwrap();
        let v = [0.7, 0.4];
        let pg = boundary_point_from_direction(&g, &v).unwrap();
        let ps = boundary_point_from_direction(&s, &v).unwrap();
        for k in 0..2 {
            assert!((pg.normal[k] - ps.normal[k]).abs() < 1e-9);
        }
        let exact = graph_derivative(&s, &ps, &[1.0], 2, DerivativeMethod::Series).unwrap();
        let fd = graph_derivative(&g, &pg, &[1.0], 2, DerivativeMethod::Auto).unwrap();
        assert!((exact - fd).abs() < 1e-6 * exact.abs(), "{exact} vs {fd}");
    }

    #[test]
    fn order_beyond_smoothness_is_rejected() {
        let g = BodySpec::<f64>::generic(2, "l2", 3, |x| x[0].hypot(x[1])).unwrap();
        let p = boundary_point_from_direction(&g, &[1.0, 0.0]).unwrap();
        assert!(graph_derivative(&g, &p, &[1.0], 4, DerivativeMethod::Auto).is_err());
    }
}
