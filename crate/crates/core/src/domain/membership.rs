use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{input, Result};
use crate::measure::StretchFactor;
use crate::roots::bisect;
use crate::scalar::{abs_pow, as_small_integer, lit, Real};

use super::BodySpec;

/// The dilated, stretched body `t A Omega`, prepared for repeated lattice membership tests.
///
/// The set is closed: lattice points on the boundary belong to it.
#[derive(Clone, Debug)]
pub struct ScaledBody<F: Real> {
    body: BodySpec<F>,
    t: F,
    a: Vec<F>,
    /// Half-width of `t A Omega` along each axis.
    half: Vec<F>,
    kind: Kind<F>,
}

#[derive(Clone, Debug)]
enum Kind<F> {
    Power {
        p: Vec<F>,
        /// `(t a_i b_i)^{p_i}` as exact rationals, when every `p_i` is an even integer.
        exact: Option<Vec<(u32, BigRational)>>,
        band: F,
    },
    Gauge,
}

impl<F: Real> ScaledBody<F> {
    pub fn new(body: &BodySpec<F>, stretch: &StretchFactor<F>, t: F) -> Result<Self> {
        let d = body.dim();
        if stretch.dim() != d {
            return input(format!("stretch has dimension {}, body has {d}", stretch.dim()));
        }
        if !(t.is_finite() && t > F::zero()) {
            return input(format!("dilation must be positive and finite, got {t}"));
        }
        let a = stretch.diag().to_vec();
        let half: Vec<F> = (0..d).map(|i| t * a[i] * body.extents()[i]).collect();
        let kind = match body.exponents() {
            Some(p) => {
                let exact = body.even_exponents().and_then(|even| {
                    let tr = t.to_rational()?;
                    (0..d)
                        .map(|i| {
                            let c = tr.clone() * a[i].to_rational()? * body.extents()[i].to_rational()?;
                            Some((even[i], num_traits::pow(c, even[i] as usize)))
                        })
                        .collect::<Option<Vec<_>>>()
                });
                Kind::Power { p: p.to_vec(), exact, band: F::arbitration_band() }
            }
            None => Kind::Gauge,
        };
        Ok(ScaledBody { body: body.clone(), t, a, half, kind })
    }

    pub fn dim(&self) -> usize {
        self.half.len()
    }

    pub fn body(&self) -> &BodySpec<F> {
        &self.body
    }

    pub fn t(&self) -> F {
        self.t
    }

    /// `t a_i C_i` where `C_i` is the body's extent along axis `i`.
    pub fn half_widths(&self) -> &[F] {
        &self.half
    }

    /// Largest integer coordinate that can occur along `axis`.
    pub fn max_index(&self, axis: usize) -> i64 {
        let h = self.half[axis];
        h.ceil().to_i64().unwrap_or(i64::MAX)
    }

    /// Whether the integer point `k` lies in the closed body.
    pub fn contains(&self, k: &[i64]) -> bool {
        match &self.kind {
            Kind::Power { p, exact, band } => {
                let s = self.power_sum(p, k);
                if s > F::one() + *band {
                    false
                } else if s < F::one() - *band {
                    true
                } else if let Some(exact) = exact {
                    exact_inside(exact, k)
                } else {
                    s <= F::one()
                }
            }
            Kind::Gauge => {
                let y: Vec<F> = k.iter().zip(&self.a).map(|(&ki, &ai)| int_to::<F>(ki) / ai).collect();
                self.body.gauge_unchecked(&y) <= self.t
            }
        }
    }

    fn power_sum(&self, p: &[F], k: &[i64]) -> F {
        let mut s = F::zero();
        for i in 0..k.len() {
            if k[i] != 0 {
                s = s + abs_pow(int_to::<F>(k[i]) / self.half[i], p[i]);
            }
        }
        s
    }

    /// Floating-point estimate of the largest `x >= 0` with `k` (with `k[axis]`
    /// replaced by `x`) inside the body; negative when the slice is empty.
    pub fn slice_width(&self, k: &[i64], axis: usize) -> F {
        match &self.kind {
            Kind::Power { p, .. } => {
                let mut s = F::zero();
                for i in 0..k.len() {
                    if i != axis && k[i] != 0 {
                        s = s + abs_pow(int_to::<F>(k[i]) / self.half[i], p[i]);
                    }
                }
                let r = F::one() - s;
                if r < F::zero() {
                    -F::one()
                } else {
                    let pa = p[axis];
                    let root = match as_small_integer(pa) {
                        Some(2) => r.sqrt(),
                        _ => r.powf(pa.recip()),
                    };
                    self.half[axis] * root
                }
            }
            Kind::Gauge => {
                let mut y: Vec<F> = k.iter().zip(&self.a).map(|(&ki, &ai)| int_to::<F>(ki) / ai).collect();
                y[axis] = F::zero();
                if self.body.gauge_unchecked(&y) > self.t {
                    return -F::one();
                }
                let ax = self.a[axis];
                let f = |x: F| {
                    let mut z = y.clone();
                    z[axis] = x / ax;
                    self.body.gauge_unchecked(&z) - self.t
                };
                let hi = self.half[axis] * lit(1.01) + F::one();
                let (lo, _) = bisect(F::zero(), hi, 80, f);
                lo
            }
        }
    }
}

fn exact_inside(exact: &[(u32, BigRational)], k: &[i64]) -> bool {
    let mut s = BigRational::zero();
    for (&(p, ref c), &ki) in exact.iter().zip(k) {
        if ki != 0 {
            let num = num_traits::pow(BigInt::from(ki), p as usize);
            s += BigRational::from_integer(num) / c;
        }
    }
    s <= BigRational::one()
}

#[inline]
pub(crate) fn int_to<F: Real>(k: i64) -> F {
    F::from_i64(k).expect("lattice coordinate representable")
}

/// Whether the integer point `k` lies in `t A Omega` (boundary included).
pub fn contains<F: Real>(body: &BodySpec<F>, stretch: &StretchFactor<F>, t: F, k: &[i64]) -> Result<bool> {
    if k.len() != body.dim() {
        return input(format!("point has {} coordinates, body dimension is {}", k.len(), body.dim()));
    }
    Ok(ScaledBody::new(body, stretch, t)?.contains(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> BodySpec<f64> {
        BodySpec::<f64>::ball(2, 2.0).unwrap()
    }

    #[test]
    fn boundary_points_are_inside() {
        let id = StretchFactor::<f64>::identity(2);
        assert!(contains(&disk(), &id, 5.0, &[3, 4]).unwrap());
        assert!(!contains(&disk(), &id, 5.0, &[4, 4]).unwrap());
        let ellipse = BodySpec::<f64>::superellipsoid(vec![2.0, 2.0], vec![2.0, 0.5]).unwrap();
        let b = StretchFactor::<f64>::new(vec![0.5, 2.0]).unwrap();
        assert!(contains(&ellipse, &b, 5.0, &[3, 4]).unwrap());
    }

    #[test]
    fn exact_arbitration_decides_near_ties() {
        // one ulp below 5: (3, 4) is just outside, far below the float resolution of the sum
        let id = StretchFactor::<f64>::identity(2);
        let below = f64::from_bits(5.0f64.to_bits() - 1);
        assert!(!ScaledBody::new(&disk(), &id, below).unwrap().contains(&[3, 4]));
        assert!(ScaledBody::new(&disk(), &id, 5.0).unwrap().contains(&[3, 4]));
        let above = f64::from_bits(5.0f64.to_bits() + 1);
        assert!(!ScaledBody::new(&disk(), &id, above).unwrap().contains(&[4, 4]));
    }

    #[test]
    fn sign_flips_agree() {
        let body = BodySpec::<f64>::superellipsoid(vec![4.0, 6.0, 2.0], vec![1.0, 0.7, 1.3]).unwrap();
        let a = StretchFactor::<f64>::new(vec![1.5, 0.8, 1.0 / 1.2]).unwrap();
        let sb = ScaledBody::new(&body, &a, 7.3).unwrap();
        for k in [[3, 2, 4], [6, 0, 1], [2, 5, 3], [7, 1, 0]] {
            let base = sb.contains(&k);
            for m in 0..8 {
                let f: Vec<i64> = (0..3).map(|i| if m >> i & 1 == 1 { -k[i] } else { k[i] }).collect();
                assert_eq!(sb.contains(&f), base);
            }
        }
    }

    #[test]
    fn generic_slice_width_matches_closed_form() {
        let g = BodySpec::<f64>::generic(2, "l2", 12, |x| x[0].hypot(x[1])).unwrap();
        let id = StretchFactor::<f64>::identity(2);
        let sg = ScaledBody::new(&g, &id, 10.0).unwrap();
        let sd = ScaledBody::new(&disk(), &id, 10.0).unwrap();
        for k0 in 0..=10 {
            let a = sg.slice_width(&[k0, 0], 1);
            let b = sd.slice_width(&[k0, 0], 1);
            // the width has a square-root singularity at the tangent row
            assert!((a - b).abs() < 1e-6, "{a} {b}");
        }
    }
}
