use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Error, Result};
use crate::roots::bisect;
use crate::scalar::{abs_pow, as_small_integer, from_usize, lit, Real, Ring};
use crate::series::Jet;

/// Parametric family of a body.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `sum_i |x_i / b_i|^{p_i} <= 1`.
    Superellipsoid,
    /// Any body given by a gauge oracle.
    GenericConvex,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Superellipsoid => "superellipsoid",
            Family::GenericConvex => "generic",
        })
    }
}

pub type GaugeFn<F> = dyn Fn(&[F]) -> F + Send + Sync;
pub type GaugeSeriesFn<F> = dyn Fn(&[Jet<F>]) -> Jet<F> + Send + Sync;

/// A convex body symmetric in every coordinate hyperplane.
///
/// Cloning is cheap; generic oracles are shared behind `Arc`.
#[derive(Clone)]
pub struct BodySpec<F: Real> {
    shape: Shape<F>,
}

#[derive(Clone)]
enum Shape<F: Real> {
    Superellipsoid(Superellipsoid<F>),
    Generic(GenericConvex<F>),
}

#[derive(Clone, Debug, PartialEq)]
struct Superellipsoid<F> {
    p: Vec<F>,
    b: Vec<F>,
    /// Exponents as integers when all of them are even integers.
    even: Option<Vec<u32>>,
    uniform: bool,
}

#[derive(Clone)]
struct GenericConvex<F: Real> {
    dim: usize,
    label: String,
    gauge: Arc<GaugeFn<F>>,
    series: Option<Arc<GaugeSeriesFn<F>>>,
    smoothness: u32,
    extents: Vec<F>,
}

impl<F: Real> fmt::Debug for BodySpec<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BodySpec({self})")
    }
}

impl<F: Real> BodySpec<F> {
    /// Superellipsoid `sum |x_i/b_i|^{p_i} <= 1` with `p_i >= 2`, `b_i > 0`.
    pub fn superellipsoid(p: Vec<F>, b: Vec<F>) -> Result<Self> {
        let d = p.len();
        if d < 2 {
            return input(format!("dimension must be at least 2, got {d}"));
        }
        if b.len() != d {
            return input(format!("expected {d} semiaxes, got {}", b.len()));
        }
        if let Some(pi) = p.iter().find(|x| !(x.is_finite() && **x >= lit(2.0))) {
            return input(format!("exponents must be finite and >= 2, got {pi}"));
        }
        if let Some(bi) = b.iter().find(|x| !(x.is_finite() && **x > F::zero())) {
            return input(format!("semiaxes must be finite and positive, got {bi}"));
        }
        let even = p.iter().map(|&x| as_small_integer(x).filter(|n| n % 2 == 0)).collect::<Option<Vec<u32>>>();
        let uniform = p.iter().all(|&x| x == p[0]);
        Ok(BodySpec { shape: Shape::Superellipsoid(Superellipsoid { p, b, even, uniform }) })
    }

    /// Unit ball of the `p`-norm in dimension `d`.
    pub fn ball(d: usize, p: F) -> Result<Self> {
        Self::superellipsoid(vec![p; d], vec![F::one(); d])
    }

    /// Body given by a gauge oracle.
    ///
    /// `smoothness` is the highest derivative order the oracle supports. The
    /// oracle is spot-checked for symmetry, homogeneity and convexity.
    pub fn generic(
        dim: usize,
        label: impl Into<String>,
        smoothness: u32,
        gauge: impl Fn(&[F]) -> F + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim < 2 {
            return input(format!("dimension must be at least 2, got {dim}"));
        }
        let gauge: Arc<GaugeFn<F>> = Arc::new(gauge);
        let mut extents = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut e = vec![F::zero(); dim];
            e[i] = F::one();
            let g = gauge(&e);
            if !(g.is_finite() && g > F::zero()) {
                return input(format!("gauge of basis vector e{} must be positive, got {g}", i + 1));
            }
            extents.push(g.recip());
        }
        let body = BodySpec {
            shape: Shape::Generic(GenericConvex { dim, label: label.into(), gauge, series: None, smoothness, extents }),
        };
        body.check_sampled(64, 0x5eed)?;
        Ok(body)
    }

    /// Attaches a Taylor-mode evaluation of the gauge, enabling exact graph
    /// derivatives for a generic body. No-op for superellipsoids.
    pub fn with_gauge_series(mut self, series: impl Fn(&[Jet<F>]) -> Jet<F> + Send + Sync + 'static) -> Self {
        if let Shape::Generic(g) = &mut self.shape {
            g.series = Some(Arc::new(series));
        }
        self
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Superellipsoid(s) => s.p.len(),
            Shape::Generic(g) => g.dim,
        }
    }

    pub fn family(&self) -> Family {
        match &self.shape {
            Shape::Superellipsoid(_) => Family::Superellipsoid,
            Shape::Generic(_) => Family::GenericConvex,
        }
    }

    pub fn exponents(&self) -> Option<&[F]> {
        match &self.shape {
            Shape::Superellipsoid(s) => Some(&s.p),
            Shape::Generic(_) => None,
        }
    }

    /// Exponents as integers, when this is a superellipsoid with even-integer exponents.
    pub fn even_exponents(&self) -> Option<&[u32]> {
        match &self.shape {
            Shape::Superellipsoid(s) => s.even.as_deref(),
            Shape::Generic(_) => None,
        }
    }

    /// Half-width of the body along each axis (the semiaxes for a superellipsoid).
    pub fn extents(&self) -> &[F] {
        match &self.shape {
            Shape::Superellipsoid(s) => &s.b,
            Shape::Generic(g) => &g.extents,
        }
    }

    /// Smallest `C` with the body inside `[-C, C]^d`.
    pub fn containment_bound(&self) -> F {
        self.extents().iter().fold(F::zero(), |m, &x| m.max(x))
    }

    /// Highest derivative order available for graph-function analysis.
    pub fn smoothness(&self) -> u32 {
        match &self.shape {
            Shape::Superellipsoid(s) => match s.even {
                Some(_) => u32::MAX,
                None => {
                    let pmin = s.p.iter().fold(F::infinity(), |m, &x| m.min(x));
                    pmin.ceil().to_u32().unwrap_or(2).saturating_sub(1)
                }
            },
            Shape::Generic(g) => g.smoothness,
        }
    }

    /// Whether exact Taylor coefficients of the boundary graph are available.
    pub fn has_series(&self) -> bool {
        match &self.shape {
            Shape::Superellipsoid(s) => s.even.is_some(),
            Shape::Generic(g) => g.series.is_some(),
        }
    }

    /// Minkowski functional `inf { l > 0 : x in l * Body }`.
    pub fn gauge(&self, x: &[F]) -> Result<F> {
        if x.len() != self.dim() {
            return input(format!("point has {} coordinates, body dimension is {}", x.len(), self.dim()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return input("point has non-finite coordinates");
        }
        Ok(self.gauge_unchecked(x))
    }

    pub(crate) fn gauge_unchecked(&self, x: &[F]) -> F {
        match &self.shape {
            Shape::Superellipsoid(s) => s.gauge(x),
            Shape::Generic(g) => (g.gauge)(x),
        }
    }

    /// `sum |x_i / b_i|^{p_i}` for a superellipsoid; membership is `<= 1`.
    pub(crate) fn level_sum(&self, x: &[F]) -> Option<F> {
        match &self.shape {
            Shape::Superellipsoid(s) => Some(s.level_sum(x)),
            Shape::Generic(_) => None,
        }
    }

    /// Defining function evaluated on series arguments; the boundary is its level set 1.
    pub(crate) fn defining_series(&self, y: &[Jet<F>]) -> Option<Jet<F>> {
        match &self.shape {
            Shape::Superellipsoid(s) => {
                let even = s.even.as_ref()?;
                let scaled: Vec<Jet<F>> = y.iter().zip(&s.b).map(|(yi, bi)| yi.scale(bi.recip())).collect();
                Some(even_power_sum(&scaled, even))
            }
            Shape::Generic(g) => g.series.as_ref().map(|f| f(y)),
        }
    }

    /// Gradient of the defining function at `x` (`level_sum` for superellipsoids,
    /// the gauge otherwise).
    pub(crate) fn defining_gradient(&self, x: &[F]) -> Vec<F> {
        match &self.shape {
            Shape::Superellipsoid(s) => x
                .iter()
                .zip(s.p.iter().zip(&s.b))
                .map(|(&xi, (&pi, &bi))| {
                    if xi == F::zero() {
                        F::zero()
                    } else {
                        pi * abs_pow(xi, pi - F::one()) * xi.signum() / bi.powf(pi)
                    }
                })
                .collect(),
            Shape::Generic(g) => {
                if let Some(series) = &g.series {
                    return (0..g.dim)
                        .map(|i| {
                            let y: Vec<Jet<F>> = x
                                .iter()
                                .enumerate()
                                .map(|(k, &xk)| Jet::linear(xk, if k == i { F::one() } else { F::zero() }))
                                .collect();
                            if x[i] == F::zero() {
                                F::zero()
                            } else {
                                series(&y).coeff(1)
                            }
                        })
                        .collect();
                }
                let scale = self.containment_bound();
                (0..g.dim)
                    .map(|i| {
                        if x[i] == F::zero() {
                            // even in x_i
                            return F::zero();
                        }
                        let f = |h: F| {
                            let mut y = x.to_vec();
                            y[i] = y[i] + h;
                            (g.gauge)(&y)
                        };
                        richardson_first_derivative(f, scale * lit(1e-3))
                    })
                    .collect()
            }
        }
    }

    /// Cross-section by the hyperplane `x_j = 0` as a body in dimension `d - 1`.
    pub fn section(&self, j: usize) -> Result<Self> {
        let d = self.dim();
        if j >= d {
            return input(format!("axis {j} out of range for dimension {d}"));
        }
        if d < 3 {
            return input("sections of planar bodies are segments, not bodies");
        }
        match &self.shape {
            Shape::Superellipsoid(s) => {
                let drop = |v: &[F]| v.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, &x)| x).collect();
                Self::superellipsoid(drop(&s.p), drop(&s.b))
            }
            Shape::Generic(g) => {
                let inner = Arc::clone(&g.gauge);
                let gauge = move |x: &[F]| {
                    let mut full = Vec::with_capacity(x.len() + 1);
                    full.extend_from_slice(&x[..j]);
                    full.push(F::zero());
                    full.extend_from_slice(&x[j..]);
                    inner(&full)
                };
                let mut body = Self::generic(d - 1, format!("{}|x{}=0", g.label, j + 1), g.smoothness, gauge)?;
                if let Some(series) = &g.series {
                    let inner = Arc::clone(series);
                    body = body.with_gauge_series(move |x: &[Jet<F>]| {
                        let mut full = Vec::with_capacity(x.len() + 1);
                        full.extend_from_slice(&x[..j]);
                        full.push(Jet::constant(F::zero()));
                        full.extend_from_slice(&x[j..]);
                        inner(&full)
                    });
                }
                Ok(body)
            }
        }
    }

    /// Same body with coordinates relabelled: new axis `i` is old axis `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let d = self.dim();
        let mut seen = vec![false; d];
        if perm.len() != d || perm.iter().any(|&i| i >= d || std::mem::replace(&mut seen[i], true)) {
            return input("not a permutation of the axes");
        }
        match &self.shape {
            Shape::Superellipsoid(s) => {
                Self::superellipsoid(perm.iter().map(|&i| s.p[i]).collect(), perm.iter().map(|&i| s.b[i]).collect())
            }
            Shape::Generic(g) => {
                let inner = Arc::clone(&g.gauge);
                let perm = perm.to_vec();
                let p2 = perm.clone();
                let mut body = Self::generic(d, format!("{}~perm", g.label), g.smoothness, move |x: &[F]| {
                    let mut old = vec![F::zero(); x.len()];
                    for (new_i, &old_i) in perm.iter().enumerate() {
                        old[old_i] = x[new_i];
                    }
                    inner(&old)
                })?;
                if let Some(series) = &g.series {
                    let inner = Arc::clone(series);
                    body = body.with_gauge_series(move |x: &[Jet<F>]| {
                        let mut old = vec![Jet::constant(F::zero()); x.len()];
                        for (new_i, &old_i) in p2.iter().enumerate() {
                            old[old_i] = x[new_i];
                        }
                        inner(&old)
                    });
                }
                Ok(body)
            }
        }
    }

    /// Spot-checks symmetry, homogeneity and convexity of the gauge on random samples.
    pub fn check_sampled(&self, samples: usize, seed: u64) -> Result<()> {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ext = self.extents().to_vec();
        let point =
            |rng: &mut ChaCha8Rng| -> Vec<F> { (0..d).map(|i| ext[i] * lit(rng.gen_range(-2.0..2.0))).collect() };
        let tol = lit::<F>(1e-10).max(F::epsilon() * lit(64.0));
        if self.gauge_unchecked(&vec![F::zero(); d]) != F::zero() {
            return input("gauge of the origin must be zero");
        }
        for _ in 0..samples {
            let x = point(&mut rng);
            let y = point(&mut rng);
            let gx = self.gauge_unchecked(&x);
            let gy = self.gauge_unchecked(&y);
            if !(gx.is_finite() && gx > F::zero()) {
                return input(format!("gauge must be positive away from the origin, got {gx}"));
            }
            let flips: u32 = rng.gen_range(1..(1u32 << d.min(31)));
            let sx: Vec<F> = x.iter().enumerate().map(|(i, &v)| if flips >> i & 1 == 1 { -v } else { v }).collect();
            if (self.gauge_unchecked(&sx) - gx).abs() > tol * gx {
                return input("gauge is not symmetric under coordinate reflections");
            }
            let lam: F = lit(rng.gen_range(0.1..10.0));
            let lx: Vec<F> = x.iter().map(|&v| v * lam).collect();
            if (self.gauge_unchecked(&lx) - lam * gx).abs() > tol * lam * gx {
                return input("gauge is not positively homogeneous");
            }
            let sum: Vec<F> = x.iter().zip(&y).map(|(&a, &b)| a + b).collect();
            if self.gauge_unchecked(&sum) > (gx + gy) * (F::one() + tol) {
                return input("gauge violates the triangle inequality (body not convex)");
            }
        }
        Ok(())
    }
}

impl<F: Real> Superellipsoid<F> {
    fn level_sum(&self, x: &[F]) -> F {
        x.iter()
            .zip(self.p.iter().zip(&self.b))
            .map(|(&xi, (&pi, &bi))| abs_pow(xi / bi, pi))
            .fold(F::zero(), |a, v| a + v)
    }

    fn gauge(&self, x: &[F]) -> F {
        let y: Vec<F> = x.iter().zip(&self.b).map(|(&xi, &bi)| (xi / bi).abs()).collect();
        let m = y.iter().fold(F::zero(), |m, &v| m.max(v));
        if m == F::zero() {
            return F::zero();
        }
        let z: Vec<F> = y.iter().map(|&v| v / m).collect();
        if self.uniform {
            let p = self.p[0];
            let s: F = z.iter().map(|&v| abs_pow(v, p)).fold(F::zero(), |a, v| a + v);
            return m * s.powf(p.recip());
        }
        // sum (z_i / mu)^{p_i} = 1 has a unique root in [1, d^{1/p_min}]
        let pmin = self.p.iter().fold(F::infinity(), |a, &v| a.min(v));
        let h =
            |mu: F| z.iter().zip(&self.p).map(|(&v, &p)| abs_pow(v / mu, p)).fold(F::zero(), |a, v| a + v) - F::one();
        let hi = from_usize::<F>(z.len()).powf(pmin.recip());
        let (lo, hi) = bisect(F::one(), hi, 200, h);
        let mut mu = (lo + hi) * lit(0.5);
        // Newton polish on the bracketed root
        for _ in 0..2 {
            let hv = h(mu);
            let dh: F =
                z.iter().zip(&self.p).map(|(&v, &p)| -p * abs_pow(v / mu, p) / mu).fold(F::zero(), |a, v| a + v);
            if dh == F::zero() {
                break;
            }
            let next = mu - hv / dh;
            if next >= lo.min(hi) && next <= lo.max(hi) {
                mu = next;
            }
        }
        m * mu
    }
}

/// `sum_i y_i^{p_i}` over any ring, for even integer exponents.
pub fn even_power_sum<R: Ring>(y: &[R], exps: &[u32]) -> R {
    y.iter().zip(exps).fold(R::zero(), |acc, (yi, &p)| acc + num_traits::pow(yi.clone(), p as usize))
}

pub(crate) fn richardson_first_derivative<F: Real>(f: impl Fn(F) -> F, h: F) -> F {
    let d = |h: F| (f(h) - f(-h)) / (h + h);
    let d1 = d(h);
    let d2 = d(h * lit(0.5));
    let d3 = d(h * lit(0.25));
    let r1 = (d2 * lit(4.0) - d1) / lit(3.0);
    let r2 = (d3 * lit(4.0) - d2) / lit(3.0);
    (r2 * lit(16.0) - r1) / lit(15.0)
}

impl<F: Real> fmt::Display for BodySpec<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[F]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match &self.shape {
            Shape::Superellipsoid(s) => {
                write!(f, "family=superellipsoid; d={}; p={}; b={}", s.p.len(), join(&s.p), join(&s.b))
            }
            Shape::Generic(g) => write!(f, "family=generic; d={}; label={}", g.dim, g.label),
        }
    }
}

impl<F: Real> FromStr for BodySpec<F> {
    type Err = Error;

    /// Parses `family=superellipsoid; d=3; p=4,4,2; b=1,1,1`.
    ///
    /// A single `p` or `b` value is broadcast to every axis; `b` defaults to all ones.
    fn from_str(s: &str) -> Result<Self> {
        let mut family = None;
        let mut d = None;
        let mut p = None;
        let mut b = None;
        for part in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (key, value) =
                part.split_once('=').ok_or_else(|| Error::Input(format!("expected key=value, got `{part}`")))?;
            let value = value.trim();
            match key.trim() {
                "family" => family = Some(value.to_ascii_lowercase()),
                "d" => {
                    d = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| Error::Input(format!("d must be a positive integer, got `{value}`")))?,
                    )
                }
                "p" => p = Some(parse_list::<F>(value, "p")?),
                "b" => b = Some(parse_list::<F>(value, "b")?),
                other => return input(format!("unknown body key `{other}`")),
            }
        }
        let family = family.ok_or_else(|| Error::Input("missing body key `family`".into()))?;
        if family != "superellipsoid" {
            return input(format!("family `{family}` cannot be specified as text; only `superellipsoid` is supported"));
        }
        let d = d.ok_or_else(|| Error::Input("missing body key `d`".into()))?;
        let broadcast = |v: Vec<F>, key: &str| -> Result<Vec<F>> {
            match v.len() {
                1 => Ok(vec![v[0]; d]),
                n if n == d => Ok(v),
                n => input(format!("key `{key}` has {n} entries, expected {d}")),
            }
        };
        let p = broadcast(p.ok_or_else(|| Error::Input("missing body key `p`".into()))?, "p")?;
        let b = broadcast(b.unwrap_or_else(|| vec![F::one()]), "b")?;
        Self::superellipsoid(p, b)
    }
}

pub(crate) fn parse_list<F: Real>(value: &str, key: &str) -> Result<Vec<F>> {
    value
        .split(',')
        .map(|x| {
            let x = x.trim();
            x.parse::<f64>()
                .ok()
                .and_then(F::from_f64)
                .ok_or_else(|| Error::Input(format!("key `{key}`: `{x}` is not a decimal number")))
        })
        .collect()
}
