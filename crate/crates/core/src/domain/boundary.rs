use crate::error::{input, Error, Result};
use crate::scalar::{lit, Real};

use super::BodySpec;

/// A point of the boundary with its outward normal and an oriented tangent frame.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint<F> {
    pub coords: Vec<F>,
    pub normal: Vec<F>,
    /// `d - 1` orthonormal tangent vectors; `{u_1, .., u_{d-1}, -n}` is positively oriented.
    pub frame: Vec<Vec<F>>,
    /// Axis `j` with `P_j = 0` whose section the first `d - 2` frame vectors are tangent to.
    pub section_axis: Option<usize>,
}

impl<F: Real> BoundaryPoint<F> {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Coordinates that vanish at this point.
    pub fn zero_axes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.coords[i] == F::zero()).collect()
    }

    /// Tangent vector `sum_k x_k u_k`.
    pub fn tangent(&self, x: &[F]) -> Vec<F> {
        let mut v = vec![F::zero(); self.dim()];
        for (xk, uk) in x.iter().zip(&self.frame) {
            for (vi, &ui) in v.iter_mut().zip(uk) {
                *vi = *vi + *xk * ui;
            }
        }
        v
    }
}

/// Boundary point on the ray through `v`, with the frame convention that puts
/// the tangent directions of the section by the first vanishing coordinate first.
pub fn boundary_point_from_direction<F: Real>(body: &BodySpec<F>, v: &[F]) -> Result<BoundaryPoint<F>> {
    boundary_point_with_section(body, v, None)
}

/// As [`boundary_point_from_direction`], choosing the section axis explicitly.
///
/// `section_axis` must be a coordinate where `v` vanishes.
pub fn boundary_point_with_section<F: Real>(
    body: &BodySpec<F>,
    v: &[F],
    section_axis: Option<usize>,
) -> Result<BoundaryPoint<F>> {
    let d = body.dim();
    let g = body.gauge(v)?;
    let vn = norm(v);
    if vn < lit(1e-12) || g == F::zero() {
        return Err(Error::DegenerateDirection { norm: vn.to_f64().unwrap_or(0.0) });
    }
    let coords: Vec<F> = v.iter().map(|&x| x / g).collect();
    let grad = body.defining_gradient(&coords);
    let gn = norm(&grad);
    if !(gn.is_finite() && gn > F::zero()) {
        return Err(Error::Numerical(format!("vanishing gradient at boundary point {coords:?}")));
    }
    let normal: Vec<F> = grad.iter().map(|&x| x / gn).collect();

    let zeros: Vec<usize> = (0..d).filter(|&i| coords[i] == F::zero()).collect();
    let section_axis = match section_axis {
        Some(j) if !zeros.contains(&j) => {
            return input(format!("section axis {j} is not a vanishing coordinate of the point"))
        }
        Some(j) => Some(j),
        None => zeros.first().copied(),
    };
    let nonzero: Vec<usize> = (0..d).filter(|i| !zeros.contains(i)).collect();

    let mut frame = nonzero_tangents(&normal, &nonzero);
    for &i in &zeros {
        if Some(i) != section_axis {
            frame.push(unit(d, i));
        }
    }
    if let Some(j) = section_axis {
        frame.push(unit(d, j));
    }
    debug_assert_eq!(frame.len(), d - 1);

    let mut m: Vec<Vec<F>> = frame.clone();
    m.push(normal.iter().map(|&x| -x).collect());
    if determinant(m) < F::zero() {
        for x in frame[0].iter_mut() {
            *x = -*x;
        }
    }
    Ok(BoundaryPoint { coords, normal, frame, section_axis })
}

/// Orthonormal basis of `span{e_i : i in axes}` intersected with `n^perp`.
fn nonzero_tangents<F: Real>(n: &[F], axes: &[usize]) -> Vec<Vec<F>> {
    let d = n.len();
    let mut basis: Vec<Vec<F>> = vec![n.to_vec()];
    let mut pool: Vec<Vec<F>> = axes.iter().map(|&i| unit(d, i)).collect();
    let want = axes.len().saturating_sub(1);
    let mut out = Vec::with_capacity(want);
    while out.len() < want {
        // pivot: the candidate with the largest component left after projection
        let mut best: Option<(F, Vec<F>, usize)> = None;
        for (idx, cand) in pool.iter().enumerate() {
            let r = orthogonalize(cand, &basis);
            let rn = norm(&r);
            if best.as_ref().map_or(true, |(bn, _, _)| rn > *bn) {
                best = Some((rn, r, idx));
            }
        }
        let (rn, r, idx) = best.expect("candidate pool exhausted");
        pool.remove(idx);
        let u: Vec<F> = r.iter().map(|&x| x / rn).collect();
        basis.push(u.clone());
        out.push(u);
    }
    out
}

fn orthogonalize<F: Real>(v: &[F], basis: &[Vec<F>]) -> Vec<F> {
    let mut r = v.to_vec();
    // two passes keep the result orthogonal to rounding level
    for _ in 0..2 {
        for b in basis {
            let c = dot(&r, b);
            for (ri, &bi) in r.iter_mut().zip(b) {
                *ri = *ri - c * bi;
            }
        }
    }
    r
}

pub(crate) fn unit<F: Real>(d: usize, i: usize) -> Vec<F> {
    let mut e = vec![F::zero(); d];
    e[i] = F::one();
    e
}

pub(crate) fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |s, (&x, &y)| s + x * y)
}

pub(crate) fn norm<F: Real>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Determinant by Gaussian elimination with partial pivoting; rows of `m`.
pub(crate) fn determinant<F: Real>(mut m: Vec<Vec<F>>) -> F {
    let n = m.len();
    let mut det = F::one();
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap()).unwrap();
        if m[p][c] == F::zero() {
            return F::zero();
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det = det * m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                let v = m[c][k];
                m[r][k] = m[r][k] - f * v;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_frame(p: &BoundaryPoint<f64>) {
        let d = p.dim();
        assert_eq!(p.frame.len(), d - 1);
        for (a, u) in p.frame.iter().enumerate() {
            assert!(dot(u, &p.normal).abs() < 1e-12);
            for (b, w) in p.frame.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot(u, w) - want).abs() < 1e-12);
            }
        }
        let mut m = p.frame.clone();
        m.push(p.normal.iter().map(|x| -x).collect());
        assert!(determinant(m) > 0.0);
    }

    #[test]
    fn sphere_axis_point() {
        let s = BodySpec::<f64>::ball(3, 2.0).unwrap();
        let p = boundary_point_from_direction(&s, &[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.coords, vec![1.0, 0.0, 0.0]);
        assert_eq!(p.normal, vec![1.0, 0.0, 0.0]);
        check_frame(&p);
    }

    #[test]
    fn superellipse_diagonal_point() {
        let b = BodySpec::<f64>::ball(2, 4.0).unwrap();
        let p = boundary_point_from_direction(&b, &[1.0, 1.0]).unwrap();
        let c = 2f64.powf(-0.25);
        assert!((p.coords[0] - c).abs() < 1e-15 && (p.coords[1] - c).abs() < 1e-15);
        let r = 0.5f64.sqrt();
        assert!((p.normal[0] - r).abs() < 1e-15 && (p.normal[1] - r).abs() < 1e-15);
        check_frame(&p);
    }

    #[test]
    fn section_tangents_come_first() {
        let s = BodySpec::<f64>::ball(3, 2.0).unwrap();
        let p = boundary_point_from_direction(&s, &[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.section_axis, Some(0));
        // u1 lies in the x1 = 0 plane and is tangent to the section circle
        assert_eq!(p.frame[0][0], 0.0);
        assert!((p.frame[0][1].abs() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((p.frame[0][1] + p.frame[0][2]).abs() < 1e-15);
        assert_eq!(p.frame[1], vec![1.0, 0.0, 0.0]);
        check_frame(&p);
    }

    #[test]
    fn degenerate_direction() {
        let s = BodySpec::<f64>::ball(2, 2.0).unwrap();
        assert!(matches!(boundary_point_from_direction(&s, &[1e-13, 0.0]), Err(Error::DegenerateDirection { .. })));
    }

    #[test]
    fn random_frames_are_orthonormal() {
        let b = BodySpec::<f64>::superellipsoid(vec![4.0, 2.0, 6.0, 4.0], vec![1.0, 2.0, 0.5, 1.5]).unwrap();
        for v in [[0.3, -1.0, 0.2, 0.7], [0.0, 1.0, 0.0, -0.4], [1.0, 0.0, 0.0, 0.0], [0.2, 0.3, 0.0, 0.0]] {
            check_frame(&boundary_point_from_direction(&b, &v).unwrap());
        }
    }
}
