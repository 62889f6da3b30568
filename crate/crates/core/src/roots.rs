//! One-dimensional root finding and minimisation on brackets.

use crate::scalar::{lit, Real};

/// Bisection for a monotone `f` with `f(lo)` and `f(hi)` of opposite signs.
///
/// Returns the bracket `[lo, hi]` shrunk until adjacent in floating point or
/// `max_iter` halvings; `lo` keeps the sign of `f(lo)`. A root exactly at `lo`
/// gives `(lo, lo)`.
pub fn bisect<F: Real>(mut lo: F, mut hi: F, max_iter: usize, f: impl Fn(F) -> F) -> (F, F) {
    let f_lo = f(lo);
    if f_lo == F::zero() {
        return (lo, lo);
    }
    let lo_sign = f_lo > F::zero();
    let half = lit::<F>(0.5);
    for _ in 0..max_iter {
        let mid = lo + (hi - lo) * half;
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        if (f(mid) > F::zero()) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Golden-section search for the minimiser of a unimodal `f` on `[lo, hi]`.
pub fn golden_min<F: Real>(mut lo: F, mut hi: F, tol: F, f: impl Fn(F) -> F) -> F {
    let inv_phi = lit::<F>(0.618_033_988_749_894_9);
    let mut x1 = hi - (hi - lo) * inv_phi;
    let mut x2 = lo + (hi - lo) * inv_phi;
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        if (hi - lo).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * inv_phi;
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * inv_phi;
            f2 = f(x2);
        }
    }
    (lo + hi) * lit(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt_two() {
        let (lo, hi) = bisect(1.0f64, 2.0, 200, |x| x * x - 2.0);
        assert!(lo * lo <= 2.0 && hi * hi >= 2.0);
        assert!((hi - lo) <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_min(-3.0f64, 5.0, 1e-10, |x| (x - 1.25).powi(2));
        assert!((m - 1.25).abs() < 1e-8);
    }
}
