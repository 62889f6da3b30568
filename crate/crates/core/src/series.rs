//! Truncated power series in one variable.
//!
//! `Series<F, N>` holds the Taylor coefficients `c_0 .. c_{N-1}` of a function
//! of `s` around `s = 0`. Arithmetic truncates at order `N - 1`, so evaluating
//! a polynomial (or any composition of the supported elementary functions) on
//! series arguments yields exact Taylor coefficients up to rounding.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::scalar::{from_usize, Real};

/// Number of coefficients carried by [`Jet`].
pub const JET_LEN: usize = 16;

/// Series long enough for every derivative order the library analyses (up to 15).
pub type Jet<F> = Series<F, JET_LEN>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Series<F, const N: usize> {
    c: [F; N],
}

impl<F: Real, const N: usize> Series<F, N> {
    pub fn constant(v: F) -> Self {
        let mut c = [F::zero(); N];
        c[0] = v;
        Series { c }
    }

    /// `v0 + v1 * s`.
    pub fn linear(v0: F, v1: F) -> Self {
        let mut c = [F::zero(); N];
        c[0] = v0;
        if N > 1 {
            c[1] = v1;
        }
        Series { c }
    }

    pub fn from_coeffs(coeffs: &[F]) -> Self {
        let mut c = [F::zero(); N];
        for (dst, &src) in c.iter_mut().zip(coeffs) {
            *dst = src;
        }
        Series { c }
    }

    pub fn coeff(&self, k: usize) -> F {
        self.c[k]
    }

    pub fn set_coeff(&mut self, k: usize, v: F) {
        self.c[k] = v;
    }

    pub fn coeffs(&self) -> &[F; N] {
        &self.c
    }

    /// `k`-th derivative at `s = 0`, i.e. `k! * c_k`.
    pub fn derivative_at_zero(&self, k: usize) -> F {
        let mut fact = F::one();
        for i in 2..=k {
            fact = fact * from_usize(i);
        }
        self.c[k] * fact
    }

    pub fn scale(&self, f: F) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = *x * f;
        }
        Series { c }
    }

    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        let mut b = [F::zero(); N];
        b[0] = a0.recip();
        for n in 1..N {
            let mut acc = F::zero();
            for k in 1..=n {
                acc = acc + self.c[k] * b[n - k];
            }
            b[n] = -acc / a0;
        }
        Series { c: b }
    }

    pub fn exp(&self) -> Self {
        let mut b = [F::zero(); N];
        b[0] = self.c[0].exp();
        for n in 1..N {
            let mut acc = F::zero();
            for k in 1..=n {
                acc = acc + from_usize::<F>(k) * self.c[k] * b[n - k];
            }
            b[n] = acc / from_usize(n);
        }
        Series { c: b }
    }

    /// Natural logarithm; requires a positive constant term.
    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut b = [F::zero(); N];
        b[0] = a0.ln();
        for n in 1..N {
            let mut acc = F::zero();
            for k in 1..n {
                acc = acc + from_usize::<F>(k) * b[k] * self.c[n - k];
            }
            b[n] = (self.c[n] - acc / from_usize(n)) / a0;
        }
        Series { c: b }
    }

    /// Real power; requires a positive constant term.
    pub fn powf(&self, p: F) -> Self {
        self.ln().scale(p).exp()
    }

    pub fn sqrt(&self) -> Self {
        self.powf(F::from(0.5).unwrap())
    }

    /// Absolute value, branching on the sign of the leading nonzero coefficient.
    pub fn abs(&self) -> Self {
        match self.c.iter().find(|x| !x.is_zero()) {
            Some(lead) if *lead < F::zero() => -*self,
            _ => *self,
        }
    }

    pub fn max_abs_coeff(&self) -> F {
        self.c.iter().fold(F::zero(), |m, x| m.max(x.abs()))
    }
}

impl<F: Real, const N: usize> Add for Series<F, N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a = *a + b;
        }
        self
    }
}

impl<F: Real, const N: usize> Sub for Series<F, N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a = *a - b;
        }
        self
    }
}

impl<F: Real, const N: usize> Mul for Series<F, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut c = [F::zero(); N];
        for i in 0..N {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..N - i {
                c[i + j] = c[i + j] + self.c[i] * rhs.c[j];
            }
        }
        Series { c }
    }
}

impl<F: Real, const N: usize> Div for Series<F, N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<F: Real, const N: usize> Neg for Series<F, N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for a in self.c.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl<F: Real, const N: usize> Zero for Series<F, N> {
    fn zero() -> Self {
        Series { c: [F::zero(); N] }
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
}

impl<F: Real, const N: usize> One for Series<F, N> {
    fn one() -> Self {
        Series::constant(F::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = Series<f64, 8>;

    fn close(a: &S, b: &[f64]) {
        for (k, &v) in b.iter().enumerate() {
            assert!((a.coeff(k) - v).abs() < 1e-13, "coeff {k}: {} vs {v}", a.coeff(k));
        }
    }

    #[test]
    fn exp_and_ln_invert() {
        let x = S::linear(0.0, 1.0);
        // exp(s) = sum s^k / k!
        let e = x.exp();
        close(&e, &[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0]);
        let back = e.ln();
        close(&back, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn sqrt_of_one_minus_s_squared() {
        // sqrt(1 - s^2) = 1 - s^2/2 - s^4/8 - s^6/16
        let s = S::linear(0.0, 1.0);
        let r = (S::one() - s * s).sqrt();
        close(&r, &[1.0, 0.0, -0.5, 0.0, -0.125, 0.0, -0.0625]);
    }

    #[test]
    fn division_matches_geometric_series() {
        let s = S::linear(0.0, 1.0);
        let q = S::one() / (S::one() - s);
        close(&q, &[1.0; 8]);
        assert_eq!(q.derivative_at_zero(3), 6.0);
    }

    #[test]
    fn abs_follows_leading_sign() {
        let s = S::from_coeffs(&[0.0, 0.0, -2.0, 1.0]);
        close(&s.abs(), &[0.0, 0.0, 2.0, -1.0]);
    }
}
