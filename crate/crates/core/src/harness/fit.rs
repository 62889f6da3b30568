use crate::scalar::{from_usize, Real};

/// Rows needed before a slope is reported.
pub const MIN_FIT_ROWS: usize = 4;

/// Least-squares slope of `ln y` against `ln t`, skipping rows with `y <= 0` or non-finite values.
pub fn log_log_slope<F: Real>(rows: &[(F, F)]) -> Option<F> {
    let pts: Vec<(F, F)> = rows
        .iter()
        .filter(|(t, y)| t.is_finite() && y.is_finite() && *t > F::zero() && *y > F::zero())
        .map(|&(t, y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < MIN_FIT_ROWS {
        return None;
    }
    let n = from_usize::<F>(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<F>() / n;
    let my = pts.iter().map(|p| p.1).sum::<F>() / n;
    let sxx: F = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: F = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > F::zero()) {
        return None;
    }
    Some(sxy / sxx)
}

/// `max_t y / t^exponent` over rows with finite statistics.
pub fn normalized_constant<F: Real>(rows: &[(F, F)], exponent: F) -> F {
    rows.iter()
        .filter(|(t, y)| t.is_finite() && y.is_finite())
        .fold(F::zero(), |m, &(t, y)| m.max(y / t.powf(exponent)))
}

/// `n` log-spaced points from `a` to `b` inclusive.
pub fn logspace<F: Real>(a: F, b: F, n: usize) -> Vec<F> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    let last = from_usize::<F>(n - 1);
    (0..n)
        .map(|i| match i {
            0 => a,
            _ if i == n - 1 => b,
            _ => (la + (lb - la) * from_usize(i) / last).exp(),
        })
        .collect()
}
