//! Multitype of the boundary and the exponents built from it.
//!
//! The multitype at `P` comes from the flag of subspaces of the tangent space
//! on which the derivatives of the graph function vanish up to a given order.
//! The numeric strategy builds that flag from graph derivatives; the analytic
//! strategy reads it off the exponents of a superellipsoid.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{
    boundary_point_with_section, graph_derivative, graph_jet, norm, BodySpec, BoundaryPoint, DerivativeMethod,
    MAX_SERIES_ORDER,
};
use crate::error::{input, Error, Result};
use crate::scalar::{from_usize, lit, Real};
use crate::series::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Closed form for superellipsoids with even-integer exponents.
    Analytic,
    /// Flag construction from graph derivatives.
    Numeric,
}

impl Strategy {
    /// Analytic where available, numeric otherwise.
    pub fn default_for<F: Real>(body: &BodySpec<F>) -> Self {
        if body.even_exponents().is_some() {
            Strategy::Analytic
        } else {
            Strategy::Numeric
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Strategy::Analytic),
            "numeric" => Ok(Strategy::Numeric),
            other => input(format!("unknown strategy `{other}` (expected analytic or numeric)")),
        }
    }
}

/// One step of the flag: after order `order` the vanishing subspace is spanned by `basis`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagStep<F> {
    pub order: u32,
    /// Orthonormal vectors in frame coordinates (`R^{d-1}`); empty at the last step.
    pub basis: Vec<Vec<F>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultitypeReport<F> {
    pub point: BoundaryPoint<F>,
    /// Ascending even contact orders, `d - 1` of them.
    pub multitype: Vec<u32>,
    pub flag: Vec<FlagStep<F>>,
    pub nu: F,
    pub nu2: F,
    pub strategy: Strategy,
}

/// Knobs of the numeric strategy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericConfig {
    /// Highest order probed; `None` means the largest exponent, or 12 for generic bodies.
    pub max_order: Option<u32>,
    pub method: DerivativeMethod,
    pub seed: u64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig { max_order: None, method: DerivativeMethod::Auto, seed: 0x00f1_a65e }
    }
}

/// Default highest order for bodies without exponents.
pub const GENERIC_MAX_ORDER: u32 = 12;

/// Thresholds on normalised Taylor coefficients `c_m L^{m-1}`.
#[derive(Clone, Copy, Debug)]
struct Tolerances {
    /// Below this every coefficient counts as zero.
    zero: f64,
    /// Relative threshold separating zero directions from the rest.
    tau: f64,
    /// Largest odd-order coefficient accepted as zero on a flat subspace.
    odd: f64,
}

const SERIES_TOL: Tolerances = Tolerances { zero: 1e-10, tau: 1e-7, odd: 1e-8 };
const FD_TOL: Tolerances = Tolerances { zero: 1e-5, tau: 1e-4, odd: 1e-3 };

pub fn multitype_at<F: Real>(
    body: &BodySpec<F>,
    point: &BoundaryPoint<F>,
    strategy: Strategy,
) -> Result<MultitypeReport<F>> {
    multitype_with(body, point, strategy, &NumericConfig::default())
}

pub fn multitype_with<F: Real>(
    body: &BodySpec<F>,
    point: &BoundaryPoint<F>,
    strategy: Strategy,
    cfg: &NumericConfig,
) -> Result<MultitypeReport<F>> {
    if point.dim() != body.dim() {
        return input("point and body dimensions differ");
    }
    let (multitype, flag) = match strategy {
        Strategy::Analytic => analytic_flag(body, point)?,
        Strategy::Numeric => {
            let full: Vec<Vec<F>> = (0..body.dim() - 1).map(|k| unit_vec(body.dim() - 1, k)).collect();
            numeric_flag(body, point, full, cfg)?
        }
    };
    let (nu, nu2) = nu_from_multitype(&multitype);
    Ok(MultitypeReport { point: point.clone(), multitype, flag, nu, nu2, strategy })
}

/// `(sum 1/a_i, sum_{i >= 2} 1/a_i)` at `point`.
pub fn nu_at<F: Real>(body: &BodySpec<F>, point: &BoundaryPoint<F>) -> Result<(F, F)> {
    let r = multitype_at(body, point, Strategy::default_for(body))?;
    Ok((r.nu, r.nu2))
}

pub fn nu_from_multitype<F: Real>(a: &[u32]) -> (F, F) {
    let inv = |m: &u32| from_usize::<F>(*m as usize).recip();
    let nu = a.iter().map(inv).fold(F::zero(), |s, v| s + v);
    let nu2 = a.iter().skip(1).map(inv).fold(F::zero(), |s, v| s + v);
    (nu, nu2)
}

fn analytic_flag<F: Real>(body: &BodySpec<F>, point: &BoundaryPoint<F>) -> Result<(Vec<u32>, Vec<FlagStep<F>>)> {
    let even = body
        .even_exponents()
        .ok_or_else(|| Error::Input("analytic multitype needs a superellipsoid with even-integer exponents".into()))?;
    let d = body.dim();
    // frame positions of the vanishing coordinates: e_i for i in Z, in frame order
    let mut flat: Vec<(usize, u32)> = Vec::new();
    for (pos, u) in point.frame.iter().enumerate() {
        if let Some(i) = (0..d).find(|&i| u[i].abs() == F::one()) {
            if point.coords[i] == F::zero() {
                flat.push((pos, even[i]));
            }
        }
    }
    let curved = d - 1 - flat.len();
    let mut multitype: Vec<u32> = vec![2; curved];
    multitype.extend(flat.iter().map(|&(_, p)| p));
    multitype.sort_unstable();
    let mut orders: Vec<u32> = multitype.clone();
    orders.dedup();
    let flag = orders
        .iter()
        .map(|&m| FlagStep {
            order: m,
            basis: flat.iter().filter(|&&(_, p)| p > m).map(|&(pos, _)| unit_vec(d - 1, pos)).collect(),
        })
        .collect();
    Ok((multitype, flag))
}

/// Taylor coefficients of the graph along frame directions, normalised by the body scale.
struct Oracle<'a, F: Real> {
    body: &'a BodySpec<F>,
    point: &'a BoundaryPoint<F>,
    series: bool,
    method: DerivativeMethod,
    scale: F,
    jets: HashMap<Vec<u64>, Jet<F>>,
    fd: HashMap<(Vec<u64>, u32), F>,
}

impl<'a, F: Real> Oracle<'a, F> {
    fn coeff(&mut self, x: &[F], m: u32) -> Result<F> {
        let key: Vec<u64> = x.iter().map(|v| v.to_f64().unwrap_or(0.0).to_bits()).collect();
        let raw = if self.series {
            if !self.jets.contains_key(&key) {
                let w = self.point.tangent(x);
                self.jets.insert(key.clone(), graph_jet(self.body, self.point, &w)?);
            }
            self.jets[&key].coeff(m as usize)
        } else {
            let k = (key, m);
            match self.fd.get(&k) {
                Some(&v) => v,
                None => {
                    let d = graph_derivative(self.body, self.point, x, m, self.method)?;
                    let mut fact = F::one();
                    for i in 2..=m as usize {
                        fact = fact * from_usize(i);
                    }
                    let v = d / fact;
                    self.fd.insert(k, v);
                    v
                }
            }
        };
        Ok(raw * self.scale.powi(m as i32 - 1))
    }
}

/// Builds the flag inside the span of `start` (orthonormal, frame coordinates).
fn numeric_flag<F: Real>(
    body: &BodySpec<F>,
    point: &BoundaryPoint<F>,
    start: Vec<Vec<F>>,
    cfg: &NumericConfig,
) -> Result<(Vec<u32>, Vec<FlagStep<F>>)> {
    let series = match cfg.method {
        DerivativeMethod::Auto => body.has_series(),
        DerivativeMethod::Series => true,
        DerivativeMethod::FiniteDifference => false,
    };
    let max_order = match cfg.max_order {
        Some(m) => m,
        None => match body.exponents() {
            Some(p) => p.iter().fold(0u32, |m, &x| m.max(x.ceil().to_u32().unwrap_or(u32::MAX))),
            None => GENERIC_MAX_ORDER,
        },
    };
    let max_order = max_order.max(2);
    if series && max_order > MAX_SERIES_ORDER {
        return input(format!("orders above {MAX_SERIES_ORDER} are not supported by the series path"));
    }
    if max_order > body.smoothness() {
        return input(format!(
            "multitype analysis to order {max_order} exceeds the body's smoothness {}",
            body.smoothness()
        ));
    }
    let tol = if series { SERIES_TOL } else { FD_TOL };
    let mut oracle = Oracle {
        body,
        point,
        series,
        method: cfg.method,
        scale: body.containment_bound(),
        jets: HashMap::new(),
        fd: HashMap::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = start;
    let mut multitype = Vec::new();
    let mut flag = Vec::new();
    let zero = lit::<F>(tol.zero);
    let tau = lit::<F>(tol.tau);

    for m in 2..=max_order {
        if s.is_empty() {
            break;
        }
        let before = s.len();
        if m == 2 {
            s = hessian_kernel(&mut oracle, &s, zero, tau)?;
        } else if m % 2 == 1 {
            let probes = probe_set(&s, &mut rng);
            for x in &probes {
                let c = oracle.coeff(x, m)?;
                if c.abs() > lit(tol.odd) {
                    return Err(Error::Analysis {
                        order: m,
                        reason: format!("odd derivative {c:e} does not vanish on the flat subspace"),
                    });
                }
            }
        } else {
            s = even_form_kernel(&mut oracle, &s, m, zero, tau, &mut rng)?;
        }
        if s.len() < before {
            multitype.extend(std::iter::repeat(m).take(before - s.len()));
            flag.push(FlagStep { order: m, basis: s.clone() });
        }
    }
    if !s.is_empty() {
        return Err(Error::FiniteType { max_order });
    }
    Ok((multitype, flag))
}

/// Kernel of the second-order form on `span(s)`, via polarisation and a symmetric eigensolver.
fn hessian_kernel<F: Real>(oracle: &mut Oracle<'_, F>, s: &[Vec<F>], zero: F, tau: F) -> Result<Vec<Vec<F>>> {
    let k = s.len();
    let mut q = vec![vec![F::zero(); k]; k];
    for a in 0..k {
        q[a][a] = oracle.coeff(&s[a], 2)?;
        for b in a + 1..k {
            let plus: Vec<F> = s[a].iter().zip(&s[b]).map(|(&x, &y)| x + y).collect();
            let minus: Vec<F> = s[a].iter().zip(&s[b]).map(|(&x, &y)| x - y).collect();
            let v = (oracle.coeff(&plus, 2)? - oracle.coeff(&minus, 2)?) * lit(0.25);
            q[a][b] = v;
            q[b][a] = v;
        }
    }
    let (vals, vecs) = jacobi_eigen(q);
    let lmax = vals.iter().fold(F::zero(), |m, &v| m.max(v));
    let lmin = vals.iter().fold(F::infinity(), |m, &v| m.min(v));
    if lmin < -(zero.max(tau * lmax)) {
        return Err(Error::Analysis {
            order: 2,
            reason: format!("second derivative is indefinite (eigenvalue {lmin:e}); body not convex"),
        });
    }
    if lmax <= zero {
        return Ok(s.to_vec());
    }
    let kernel: Vec<Vec<F>> =
        vals.iter().zip(&vecs).filter(|(&v, _)| v <= tau * lmax).map(|(_, y)| combine(s, y)).collect();
    Ok(align_to_axes(&kernel))
}

/// Zero subspace of the order-`m` form on `span(s)`, found from frame-aligned and sampled probes.
fn even_form_kernel<F: Real>(
    oracle: &mut Oracle<'_, F>,
    s: &[Vec<F>],
    m: u32,
    zero: F,
    tau: F,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<F>>> {
    let probes = probe_set(s, rng);
    let mut values = Vec::with_capacity(probes.len());
    for x in &probes {
        values.push(oracle.coeff(x, m)?);
    }
    let vmax = values.iter().fold(F::zero(), |a, &v| a.max(v));
    let vmin = values.iter().fold(F::infinity(), |a, &v| a.min(v));
    if vmin < -(zero.max(tau * vmax)) {
        return Err(Error::Analysis {
            order: m,
            reason: format!("leading form takes the negative value {vmin:e}; body not convex"),
        });
    }
    if vmax <= zero {
        return Ok(s.to_vec());
    }
    let threshold = tau * vmax;
    let mut cands: Vec<(F, &Vec<F>)> =
        values.iter().zip(&probes).filter(|(&v, _)| v < threshold).map(|(&v, x)| (v, x)).collect();
    cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut span: Vec<Vec<F>> = Vec::new();
    for (_, c) in cands {
        let r = orthogonalize(c, &span);
        let rn = norm(&r);
        if rn >= lit(0.5) {
            span.push(r.iter().map(|&v| v / rn).collect());
        }
    }
    let span = align_to_axes(&span);
    if span.len() >= s.len() {
        return Err(Error::Analysis {
            order: m,
            reason: "form is nonzero but its zero directions span the whole subspace".into(),
        });
    }
    // the zero set must be the whole span, not just the probes
    for _ in 0..8 * span.len() {
        let coef: Vec<F> = (0..span.len()).map(|_| lit(rng.gen_range(-1.0..1.0))).collect();
        let x = combine(&span, &coef);
        let xn = norm(&x);
        if xn < lit(1e-3) {
            continue;
        }
        let x: Vec<F> = x.iter().map(|&v| v / xn).collect();
        let v = oracle.coeff(&x, m)?;
        if v > threshold.max(zero) {
            return Err(Error::Analysis {
                order: m,
                reason: format!("zero directions do not form a subspace (value {v:e} on their span)"),
            });
        }
    }
    Ok(span)
}

/// Unit probes in `span(s)`: basis vectors, normalised sums and differences of pairs, random directions.
fn probe_set<F: Real>(s: &[Vec<F>], rng: &mut ChaCha8Rng) -> Vec<Vec<F>> {
    let k = s.len();
    let h = lit::<F>(0.5).sqrt();
    let mut out: Vec<Vec<F>> = s.to_vec();
    for a in 0..k {
        for b in a + 1..k {
            out.push(s[a].iter().zip(&s[b]).map(|(&x, &y)| (x + y) * h).collect());
            out.push(s[a].iter().zip(&s[b]).map(|(&x, &y)| (x - y) * h).collect());
        }
    }
    if k > 1 {
        for _ in 0..8 * k {
            let coef: Vec<F> = (0..k).map(|_| lit(rng.gen_range(-1.0..1.0))).collect();
            let x = combine(s, &coef);
            let xn = norm(&x);
            if xn > lit(1e-3) {
                out.push(x.iter().map(|&v| v / xn).collect());
            }
        }
    }
    out
}

fn combine<F: Real>(basis: &[Vec<F>], coef: &[F]) -> Vec<F> {
    let n = basis.first().map_or(0, |b| b.len());
    let mut out = vec![F::zero(); n];
    for (b, &c) in basis.iter().zip(coef) {
        for (o, &v) in out.iter_mut().zip(b) {
            *o = *o + c * v;
        }
    }
    out
}

fn orthogonalize<F: Real>(v: &[F], basis: &[Vec<F>]) -> Vec<F> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = crate::domain::dot(&r, b);
            for (ri, &bi) in r.iter_mut().zip(b) {
                *ri = *ri - c * bi;
            }
        }
    }
    r
}

/// Re-expresses the span of `basis` with vectors as close to coordinate axes as possible.
fn align_to_axes<F: Real>(basis: &[Vec<F>]) -> Vec<Vec<F>> {
    if basis.is_empty() {
        return Vec::new();
    }
    let n = basis[0].len();
    let project = |v: &[F]| combine(basis, &basis.iter().map(|b| crate::domain::dot(v, b)).collect::<Vec<F>>());
    let mut pool: Vec<Vec<F>> = (0..n).map(|k| project(&unit_vec(n, k))).collect();
    let mut out: Vec<Vec<F>> = Vec::with_capacity(basis.len());
    while out.len() < basis.len() {
        let (idx, r, rn) = pool
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let r = orthogonalize(c, &out);
                let rn = norm(&r);
                (i, r, rn)
            })
            .fold(None, |best: Option<(usize, Vec<F>, F)>, cand| match best {
                Some(b) if b.2 >= cand.2 => Some(b),
                _ => Some(cand),
            })
            .unwrap();
        pool.remove(idx);
        let mut u: Vec<F> = r.iter().map(|&v| v / rn).collect();
        // snap to an axis when it is one up to rounding
        if let Some(k) = (0..n).find(|&k| (u[k].abs() - F::one()).abs() < lit(1e-10)) {
            u = unit_vec(n, k);
        }
        out.push(u);
    }
    out
}

fn unit_vec<F: Real>(n: usize, k: usize) -> Vec<F> {
    let mut e = vec![F::zero(); n];
    e[k] = F::one();
    e
}

/// Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi rotations.
pub(crate) fn jacobi_eigen<F: Real>(mut a: Vec<Vec<F>>) -> (Vec<F>, Vec<Vec<F>>) {
    let n = a.len();
    let mut v: Vec<Vec<F>> = (0..n).map(|k| unit_vec(n, k)).collect();
    let frob = a.iter().flatten().fold(F::zero(), |s, &x| s + x * x).sqrt();
    for _ in 0..100 {
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(F::zero(), |s, (i, j)| s + a[i][j] * a[i][j])
            .sqrt();
        if off <= F::epsilon() * frob || off == F::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == F::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (lit::<F>(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = (t * t + F::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i][i]).collect();
    let vecs = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    (vals, vecs)
}

/// How the boundary is sampled when minimising the exponents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingConfig {
    /// Quasi-uniform points in addition to the coordinate strata.
    pub samples: usize,
    pub strategy: Option<Strategy>,
    pub numeric: NumericConfig,
    /// Sampled directions closer than this (relative) to a coordinate hyperplane are skipped.
    pub min_coordinate: f64,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            samples: 10_000,
            strategy: None,
            numeric: NumericConfig::default(),
            min_coordinate: 0.05,
            seed: 0x5a3b1e,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentReport<F> {
    /// `nu_Omega = min_P nu(P)`.
    pub nu_min: F,
    /// `1/2 + min_P nu2(P)`.
    pub mu: F,
    pub gamma: F,
    /// Points where `nu(P)` attains its minimum.
    pub nu_minimizers: Vec<BoundaryPoint<F>>,
    /// Points where `nu2(P)` attains its minimum.
    pub nu2_minimizers: Vec<BoundaryPoint<F>>,
    /// Reports at the coordinate strata points, one per nonempty set of nonzero coordinates.
    pub strata: Vec<MultitypeReport<F>>,
    pub sample_count: usize,
    pub strategy: Strategy,
}

/// `min { nu / 2, mu / (2 (d - mu)) }`.
pub fn gamma_from<F: Real>(d: usize, nu: F, mu: F) -> F {
    let two = lit::<F>(2.0);
    (nu / two).min(mu / (two * (from_usize::<F>(d) - mu)))
}

/// Minimises `nu(P)` and `nu2(P)` over the coordinate strata and a quasi-uniform boundary sample.
pub fn exponent_report<F: Real>(body: &BodySpec<F>, cfg: &SamplingConfig) -> Result<ExponentReport<F>> {
    let d = body.dim();
    let strategy = cfg.strategy.unwrap_or_else(|| Strategy::default_for(body));
    let mut dirs: Vec<Vec<F>> = Vec::new();
    for mask in 1u32..(1 << d) {
        dirs.push((0..d).map(|i| if mask >> i & 1 == 1 { F::one() } else { F::zero() }).collect());
    }
    let n_strata = dirs.len();
    dirs.extend(orthant_sample::<F>(d, cfg.samples, cfg.seed, cfg.min_coordinate));

    let reports: Vec<MultitypeReport<F>> = dirs
        .par_iter()
        .map(|v| {
            let p = boundary_point_with_section(body, v, None)?;
            multitype_with(body, &p, strategy, &cfg.numeric)
        })
        .collect::<Result<Vec<_>>>()?;

    let nu_min = reports.iter().fold(F::infinity(), |m, r| m.min(r.nu));
    let nu2_min = reports.iter().fold(F::infinity(), |m, r| m.min(r.nu2));
    let close = |a: F, b: F| (a - b).abs() <= lit(1e-12);
    let nu_minimizers = reports.iter().filter(|r| close(r.nu, nu_min)).map(|r| r.point.clone()).collect();
    let nu2_minimizers = reports.iter().filter(|r| close(r.nu2, nu2_min)).map(|r| r.point.clone()).collect();
    let mu = lit::<F>(0.5) + nu2_min;
    Ok(ExponentReport {
        nu_min,
        mu,
        gamma: gamma_from(d, nu_min, mu),
        nu_minimizers,
        nu2_minimizers,
        sample_count: reports.len(),
        strata: reports[..n_strata].to_vec(),
        strategy,
    })
}

/// Directions in the open positive orthant: equal angles for `d = 2`, a folded
/// spherical Fibonacci lattice for `d = 3`, seeded random directions otherwise.
fn orthant_sample<F: Real>(d: usize, n: usize, seed: u64, min_coord: f64) -> Vec<Vec<F>> {
    let raw: Vec<Vec<f64>> = match d {
        2 => (0..n)
            .map(|k| {
                let th = (k as f64 + 0.5) / n as f64 * std::f64::consts::FRAC_PI_2;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    vec![(r * phi.cos()).abs(), (r * phi.sin()).abs(), z.abs()]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let v: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0f64..1.0)).collect();
                    let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x / vn).collect()
                })
                .collect()
        }
    };
    raw.into_iter()
        .filter(|v| {
            let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().all(|x| x.abs() >= min_coord * vn)
        })
        .map(|v| v.into_iter().map(lit::<F>).collect())
        .collect()
}

/// Multitypes of the section by `x_j = 0` and of the body at a point of that section.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionCheck<F> {
    pub point: BoundaryPoint<F>,
    /// From the restricted graph `Phi(x_1, .., x_{d-2}, 0)`.
    pub section_multitype: Vec<u32>,
    /// From the section body analysed on its own.
    pub direct_section_multitype: Vec<u32>,
    pub full_multitype: Vec<u32>,
    /// `section[i] <= full[i + 1]` for every `i`.
    pub holds: bool,
}

pub fn section_multitype_check<F: Real>(
    body: &BodySpec<F>,
    j: usize,
    direction: &[F],
    strategy: Strategy,
) -> Result<SectionCheck<F>> {
    let d = body.dim();
    if d < 3 {
        return input("section checks need dimension at least 3");
    }
    if j >= d || direction.len() != d || direction[j] != F::zero() {
        return input(format!("direction must lie in the hyperplane x{} = 0", j + 1));
    }
    let point = boundary_point_with_section(body, direction, Some(j))?;
    let cfg = NumericConfig::default();
    let full = multitype_with(body, &point, strategy, &cfg)?.multitype;

    let restricted: Vec<Vec<F>> = (0..d - 2).map(|k| unit_vec(d - 1, k)).collect();
    let section_multitype = match strategy {
        Strategy::Numeric => numeric_flag(body, &point, restricted, &cfg)?.0,
        Strategy::Analytic => {
            // same closed form, applied to the first d - 2 frame vectors
            let mut sub = point.clone();
            sub.frame.truncate(d - 2);
            let (a, _) = analytic_flag_restricted(body, &sub)?;
            a
        }
    };

    let section = body.section(j)?;
    let dir: Vec<F> = direction.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, &x)| x).collect();
    let sp = boundary_point_with_section(&section, &dir, None)?;
    let direct_section_multitype = multitype_with(&section, &sp, strategy, &cfg)?.multitype;

    let holds = section_multitype.iter().enumerate().all(|(i, &a)| a <= full[i + 1]);
    Ok(SectionCheck { point, section_multitype, direct_section_multitype, full_multitype: full, holds })
}

fn analytic_flag_restricted<F: Real>(
    body: &BodySpec<F>,
    sub: &BoundaryPoint<F>,
) -> Result<(Vec<u32>, Vec<FlagStep<F>>)> {
    let even = body
        .even_exponents()
        .ok_or_else(|| Error::Input("analytic multitype needs a superellipsoid with even-integer exponents".into()))?;
    let d = body.dim();
    let mut flat = Vec::new();
    for u in &sub.frame {
        if let Some(i) = (0..d).find(|&i| u[i].abs() == F::one()) {
            if sub.coords[i] == F::zero() {
                flat.push(even[i]);
            }
        }
    }
    let mut a = vec![2; sub.frame.len() - flat.len()];
    a.extend(flat);
    a.sort_unstable();
    Ok((a, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::boundary_point_from_direction;

    fn mt(body: &BodySpec<f64>, v: &[f64], s: Strategy) -> Vec<u32> {
        let p = boundary_point_from_direction(body, v).unwrap();
        multitype_at(body, &p, s).unwrap().multitype
    }

    #[test]
    fn multitype_examples() {
        let sphere = BodySpec::<f64>::ball(3, 2.0).unwrap();
        let ball4 = BodySpec::<f64>::ball(3, 4.0).unwrap();
        let sq = BodySpec::<f64>::ball(2, 4.0).unwrap();
        for s in [Strategy::Analytic, Strategy::Numeric] {
            assert_eq!(mt(&sphere, &[0.3, 0.5, -0.2], s), vec![2, 2]);
            assert_eq!(mt(&sq, &[1.0, 0.0], s), vec![4]);
            assert_eq!(mt(&ball4, &[1.0, 0.0, 0.0], s), vec![4, 4]);
            assert_eq!(mt(&ball4, &[1.0, 1.0, 0.0], s), vec![2, 4]);
            assert_eq!(mt(&ball4, &[1.0, 0.5, 0.3], s), vec![2, 2]);
        }
    }

    #[test]
    fn nu_examples() {
        let disk = BodySpec::<f64>::ball(2, 2.0).unwrap();
        let p = boundary_point_from_direction(&disk, &[0.6, 0.8]).unwrap();
        assert_eq!(nu_at(&disk, &p).unwrap(), (0.5, 0.0));
        let ball4 = BodySpec::<f64>::ball(3, 4.0).unwrap();
        let p = boundary_point_from_direction(&ball4, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(nu_at(&ball4, &p).unwrap(), (0.5, 0.25));
    }

    #[test]
    fn report_examples() {
        let cases: [(BodySpec<f64>, f64, f64, f64); 4] = [
            (BodySpec::<f64>::ball(2, 2.0).unwrap(), 0.5, 0.5, 1.0 / 6.0),
            (BodySpec::<f64>::ball(2, 4.0).unwrap(), 0.25, 0.5, 1.0 / 8.0),
            (BodySpec::<f64>::ball(3, 2.0).unwrap(), 1.0, 1.0, 0.25),
            (BodySpec::<f64>::ball(3, 4.0).unwrap(), 0.5, 0.75, 1.0 / 6.0),
        ];
        for (body, nu, mu, gamma) in cases {
            for s in [Strategy::Analytic, Strategy::Numeric] {
                let cfg = SamplingConfig { samples: 200, strategy: Some(s), ..Default::default() };
                let r = exponent_report(&body, &cfg).unwrap();
                assert!((r.nu_min - nu).abs() < 1e-12, "{body} {s:?}");
                assert!((r.mu - mu).abs() < 1e-12);
                assert!((r.gamma - gamma).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generic_body_by_finite_differences() {
        let g = BodySpec::<f64>::generic(2, "l2", 12, |x| x[0].hypot(x[1])).unwrap();
        let p = boundary_point_from_direction(&g, &[0.6, 0.8]).unwrap();
        assert_eq!(multitype_at(&g, &p, Strategy::Numeric).unwrap().multitype, vec![2]);
        let l4 = BodySpec::<f64>::generic(2, "l4", 12, |x| (x[0].powi(4) + x[1].powi(4)).powf(0.25)).unwrap();
        let p = boundary_point_from_direction(&l4, &[1.0, 0.0]).unwrap();
        assert_eq!(multitype_at(&l4, &p, Strategy::Numeric).unwrap().multitype, vec![4]);
    }

    #[test]
    fn section_check_examples() {
        let sphere = BodySpec::<f64>::ball(3, 2.0).unwrap();
        let c = section_multitype_check(&sphere, 2, &[0.6, 0.8, 0.0], Strategy::Numeric).unwrap();
        assert_eq!((c.section_multitype.clone(), c.full_multitype.clone(), c.holds), (vec![2], vec![2, 2], true));
        let ball4 = BodySpec::<f64>::ball(3, 4.0).unwrap();
        let c = section_multitype_check(&ball4, 2, &[1.0, 0.0, 0.0], Strategy::Numeric).unwrap();
        assert_eq!((c.section_multitype.clone(), c.full_multitype.clone(), c.holds), (vec![4], vec![4, 4], true));
        assert_eq!(c.direct_section_multitype, vec![4]);
        let mixed = BodySpec::<f64>::superellipsoid(vec![4.0, 4.0, 2.0], vec![1.0, 1.0, 1.0]).unwrap();
        let c = section_multitype_check(&mixed, 0, &[0.0, 1.0, 0.0], Strategy::Numeric).unwrap();
        assert_eq!(c.section_multitype, c.direct_section_multitype);
        assert!(c.holds);
    }

    #[test]
    fn jacobi_diagonalises() {
        let (vals, vecs) = jacobi_eigen::<f64>(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut v = vals.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 3.0).abs() < 1e-14);
        for (l, x) in vals.iter().zip(&vecs) {
            let ax = [2.0 * x[0] + x[1], x[0] + 2.0 * x[1]];
            assert!((ax[0] - l * x[0]).abs() < 1e-14 && (ax[1] - l * x[1]).abs() < 1e-14);
        }
    }
}
