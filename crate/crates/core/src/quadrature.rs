//! Gauss-Legendre rules and a product rule over angular boxes.

use crate::scalar::{from_usize, lit, Real};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<F: Real>(n: usize) -> (Vec<F>, Vec<F>) {
    let mut x = vec![F::zero(); n];
    let mut w = vec![F::zero(); n];
    let nf = from_usize::<F>(n);
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (F::PI() * (from_usize::<F>(i) + lit(0.75)) / (nf + lit(0.5))).cos();
        let mut dp = F::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z = z - dz;
            if dz.abs() <= F::epsilon() * lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != F::zero() {
            dp = d;
        }
        let wi = lit::<F>(2.0) / ((F::one() - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `P_n(z)` and `P_n'(z)`.
fn legendre<F: Real>(n: usize, z: F) -> (F, F) {
    let mut p0 = F::one();
    let mut p1 = z;
    if n == 0 {
        return (p0, F::zero());
    }
    for k in 2..=n {
        let kf = from_usize::<F>(k);
        let p2 = ((kf + kf - F::one()) * z * p1 - (kf - F::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = from_usize::<F>(n);
    let d = nf * (z * p1 - p0) / (z * z - F::one());
    (p1, d)
}

/// Product rule for `int_{[lo, hi]^m} f` with `n` nodes per dimension.
pub fn product_rule<F: Real>(m: usize, lo: F, hi: F, n: usize, f: impl Fn(&[F]) -> F) -> F {
    let (x, w) = gauss_legendre::<F>(n);
    let half = (hi - lo) * lit(0.5);
    let mid = (hi + lo) * lit(0.5);
    let nodes: Vec<F> = x.iter().map(|&xi| mid + half * xi).collect();
    let mut idx = vec![0usize; m];
    let mut point = vec![F::zero(); m];
    let mut total = F::zero();
    loop {
        let mut weight = F::one();
        for k in 0..m {
            point[k] = nodes[idx[k]];
            weight = weight * w[idx[k]] * half;
        }
        total = total + weight * f(&point);
        let mut k = 0;
        loop {
            if k == m {
                return total;
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
