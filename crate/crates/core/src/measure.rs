//! Volumes, section measures and stretching factors.

use std::fmt;

use libm::{lgamma as ln_gamma, tgamma as gamma};

use crate::domain::BodySpec;
use crate::error::{input, Error, Result};
use crate::quadrature::product_rule;
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Positive diagonal matrix of determinant 1.
#[derive(Clone, Debug, PartialEq)]
pub struct StretchFactor<F> {
    diag: Vec<F>,
    a_star: F,
}

impl<F: Real> StretchFactor<F> {
    /// Builds `diag(a)`, renormalising small determinant drift.
    ///
    /// Fails when some entry is not positive or the product is off by more than `1e-6`.
    pub fn new(mut diag: Vec<F>) -> Result<Self> {
        let d = diag.len();
        if d == 0 {
            return input("stretch factor needs at least one entry");
        }
        if let Some(a) = diag.iter().find(|a| !(a.is_finite() && **a > F::zero())) {
            return input(format!("stretch entries must be positive and finite, got {a}"));
        }
        let log_det: F = diag.iter().map(|a| a.ln()).sum();
        let det = log_det.exp();
        if (det - F::one()).abs() > lit(1e-6) {
            return input(format!("stretch factor has determinant {det}, expected 1"));
        }
        // leave inputs like (a, 1/a) untouched; only real drift is corrected
        if (det - F::one()).abs() > F::epsilon() * lit(4.0) * from_usize(d) {
            let s = (log_det / from_usize(d)).exp();
            for a in diag.iter_mut() {
                *a = *a / s;
            }
        }
        let a_star = diag.iter().fold(F::zero(), |m, a| m.max(a.recip()));
        Ok(StretchFactor { diag, a_star })
    }

    pub fn identity(d: usize) -> Self {
        StretchFactor { diag: vec![F::one(); d], a_star: F::one() }
    }

    /// `diag(e^{s_1}, .., e^{s_{d-1}}, e^{-sum s})`.
    pub fn from_log(s: &[F]) -> Result<Self> {
        let last = -s.iter().fold(F::zero(), |a, &v| a + v);
        let mut diag: Vec<F> = s.iter().map(|v| v.exp()).collect();
        diag.push(last.exp());
        Self::new(diag)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[F] {
        &self.diag
    }

    /// `max_i 1/a_i`, the sup-norm of the inverse.
    pub fn a_star(&self) -> F {
        self.a_star
    }

    pub fn determinant(&self) -> F {
        self.diag.iter().fold(F::one(), |p, &a| p * a)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_deviation(&self, other: &Self) -> F {
        self.diag.iter().zip(&other.diag).fold(F::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Coordinates relabelled: new axis `i` is old axis `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        StretchFactor { diag: perm.iter().map(|&i| self.diag[i]).collect(), a_star: self.a_star }
    }
}

impl<F: Real> fmt::Display for StretchFactor<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.diag.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl<F: Real> std::str::FromStr for StretchFactor<F> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::new(crate::domain::parse_list(s, "stretch")?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectionMeasures<F> {
    pub volume: F,
    pub sections: Vec<F>,
    pub method: MeasureMethod,
}

/// Relative change between successive refinements at which quadrature stops.
pub const QUADRATURE_TOL: f64 = 1e-8;
/// Cap on integrand evaluations for one quadrature estimate.
const QUADRATURE_MAX_POINTS: usize = 1 << 22;
// node computation is quadratic in the per-axis count
const QUADRATURE_MAX_NODES: usize = 1 << 12;

/// `|Omega|`.
pub fn volume<F: Real>(body: &BodySpec<F>) -> Result<F> {
    match body.exponents() {
        Some(p) => Ok(closed_form(p, body.extents())),
        None => volume_by_quadrature(body),
    }
}

/// `(d-1)`-measure of the section by `x_j = 0` (axis index from 0).
pub fn section_measure<F: Real>(body: &BodySpec<F>, j: usize) -> Result<F> {
    let d = body.dim();
    if j >= d {
        return input(format!("axis {j} out of range for dimension {d}"));
    }
    match body.exponents() {
        Some(p) => {
            let keep = |v: &[F]| -> Vec<F> { v.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, &x)| x).collect() };
            Ok(closed_form(&keep(p), &keep(body.extents())))
        }
        None if d == 2 => Ok(body.extents()[1 - j] * lit(2.0)),
        None => volume_by_quadrature(&body.section(j)?),
    }
}

pub fn section_measures<F: Real>(body: &BodySpec<F>) -> Result<SectionMeasures<F>> {
    let sections = (0..body.dim()).map(|j| section_measure(body, j)).collect::<Result<Vec<F>>>()?;
    Ok(SectionMeasures {
        volume: volume(body)?,
        sections,
        method: if body.exponents().is_some() { MeasureMethod::ClosedForm } else { MeasureMethod::Quadrature },
    })
}

/// `B = diag(|Omega_j| / (prod_k |Omega_k|)^{1/d})`.
pub fn balanced_factor<F: Real>(body: &BodySpec<F>) -> Result<StretchFactor<F>> {
    let s = section_measures(body)?.sections;
    balanced_from_sections(&s)
}

pub(crate) fn balanced_from_sections<F: Real>(s: &[F]) -> Result<StretchFactor<F>> {
    // ratios to the first section keep equal sections exactly at 1
    let r: Vec<F> = s.iter().map(|&x| x / s[0]).collect();
    let mean = (r.iter().map(|x| x.ln()).sum::<F>() / from_usize(s.len())).exp();
    StretchFactor::new(r.iter().map(|&x| x / mean).collect())
}

/// `2^d prod b_i prod Gamma(1 + 1/p_i) / Gamma(1 + sum 1/p_i)`.
fn closed_form<F: Real>(p: &[F], b: &[F]) -> F {
    let d = p.len();
    let inv: Vec<f64> = p.iter().map(|&x| 1.0 / to_f64(x)).collect();
    let total = 1.0 + inv.iter().sum::<f64>();
    // direct products are a few ulps more accurate while nothing overflows
    if d <= 64 && total < 150.0 {
        let num = inv.iter().fold(2f64.powi(d as i32), |acc, &q| acc * gamma(1.0 + q));
        let scale = b.iter().fold(1.0, |acc, &x| acc * to_f64(x));
        return lit(num / gamma(total) * scale);
    }
    let log = d as f64 * std::f64::consts::LN_2
        + b.iter().map(|&x| to_f64(x).ln()).sum::<f64>()
        + inv.iter().map(|&q| ln_gamma(1.0 + q)).sum::<f64>()
        - ln_gamma(total);
    lit(log.exp())
}

/// `|Omega| = (2^d / d) int g(theta)^{-d} dsigma` over the positive orthant of the sphere.
///
/// Product Gauss-Legendre in hyperspherical angles, doubling the node count
/// until successive estimates agree to [`QUADRATURE_TOL`].
pub fn volume_by_quadrature<F: Real>(body: &BodySpec<F>) -> Result<F> {
    let d = body.dim();
    if d == 1 {
        return Ok(lit::<F>(2.0) / body.gauge_unchecked(&[F::one()]));
    }
    let m = d - 1;
    let integrand = |phi: &[F]| -> F {
        let mut x = vec![F::zero(); d];
        let mut sin_prod = F::one();
        let mut jac = F::one();
        for (k, &a) in phi.iter().enumerate() {
            x[k] = sin_prod * a.cos();
            jac = jac * a.sin().powi((m - 1 - k) as i32);
            sin_prod = sin_prod * a.sin();
        }
        x[d - 1] = sin_prod;
        jac * body.gauge_unchecked(&x).powi(-(d as i32))
    };
    let scale = lit::<F>(2.0).powi(d as i32) / from_usize(d);
    let mut n = 8;
    let mut prev = scale * product_rule(m, F::zero(), F::FRAC_PI_2(), n, integrand);
    let mut change = F::infinity();
    while 2 * n <= QUADRATURE_MAX_NODES && (2 * n).checked_pow(m as u32).map_or(false, |c| c <= QUADRATURE_MAX_POINTS) {
        n *= 2;
        let next = scale * product_rule(m, F::zero(), F::FRAC_PI_2(), n, integrand);
        change = ((next - prev) / next).abs();
        prev = next;
        if change < lit(QUADRATURE_TOL) {
            return Ok(next);
        }
    }
    Err(Error::Quadrature { achieved: to_f64(change) })
}
