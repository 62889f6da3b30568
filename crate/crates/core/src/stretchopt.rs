//! Search for determinant-1 diagonal stretches that maximise `#(N^d ∩ tAΩ)`
//! or minimise `#(Z_+^d ∩ tAΩ)`.
//!
//! The counts are piecewise constant in the stretch. In the plane the
//! breakpoints are enumerated exactly (`Exact2D`); in any dimension a
//! multi-level grid over log-stretches is available (`Grid`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::count::{count_scaled, LatticeSet};
use crate::domain::{int_to, BodySpec, ScaledBody};
use crate::error::{input, Error, PartialOptimum, Result};
use crate::measure::{balanced_factor, section_measures, StretchFactor};
use crate::roots::{bisect, golden_min};
use crate::scalar::{abs_pow, from_usize, lit, to_f64, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Maximise the count of points with all coordinates `>= 1`.
    MaxPositive,
    /// Minimise the count of points with all coordinates `>= 0`.
    MinNonnegative,
}

impl Objective {
    pub fn lattice_set(self) -> LatticeSet {
        match self {
            Objective::MaxPositive => LatticeSet::Positive,
            Objective::MinNonnegative => LatticeSet::Nonnegative,
        }
    }

    fn better(self, a: u64, b: u64) -> bool {
        match self {
            Objective::MaxPositive => a > b,
            Objective::MinNonnegative => a < b,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::MaxPositive => "max-positive",
            Objective::MinNonnegative => "min-nonnegative",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-positive" => Ok(Objective::MaxPositive),
            "min-nonnegative" => Ok(Objective::MinNonnegative),
            other => input(format!("unknown mode `{other}` (expected max-positive or min-nonnegative)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SearchStrategy {
    Exact2D,
    Grid,
}

impl fmt::Display for SearchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchStrategy::Exact2D => "exact2d",
            SearchStrategy::Grid => "grid",
        })
    }
}

impl FromStr for SearchStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact2d" => Ok(SearchStrategy::Exact2D),
            "grid" => Ok(SearchStrategy::Grid),
            other => input(format!("unknown strategy `{other}` (expected exact2d or grid)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizeConfig<F> {
    pub mode: Objective,
    pub strategy: SearchStrategy,
    /// Search region `a_i in [1/K, K]`; `None` picks a default from the section measures.
    pub box_bound: Option<F>,
    pub grid_levels: u32,
    /// Level-0 grid step in log-stretch coordinates.
    pub initial_step: F,
    /// Maximum number of exact count evaluations (and of breakpoints for `Exact2D`).
    pub budget: usize,
    /// Grid points within this many lattice points of the best value are refined too,
    /// so narrow optimal intervals next to near-optimal plateaus are not skipped.
    /// `None`: 1 for planar bodies, 0 otherwise.
    pub refine_slack: Option<u64>,
}

impl<F: Real> OptimizeConfig<F> {
    pub fn new(mode: Objective, strategy: SearchStrategy) -> Self {
        OptimizeConfig {
            mode,
            strategy,
            box_bound: None,
            grid_levels: 10,
            initial_step: lit(0.05),
            budget: 20_000_000,
            refine_slack: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimumReport<F> {
    pub value: u64,
    /// Representatives of the optimal set, each re-verified by an exact count.
    pub optima: Vec<StretchFactor<F>>,
    /// `max` over optima of `max_j |a_j - B_j|`.
    pub sup_deviation: F,
    pub a_star_max: F,
    pub evaluations: usize,
    pub balanced: StretchFactor<F>,
    pub box_bound: F,
    /// Some optimum lies on the edge of the search box.
    pub touches_box: bool,
    /// Breakpoints whose predicted count could not be realised by any float stretch
    /// (isolated optima at irrational stretches).
    pub unresolved: usize,
}

/// `4 d (prod |Omega_j|)^{1/d} / min |Omega_j|`.
pub fn default_box_bound<F: Real>(body: &BodySpec<F>) -> Result<F> {
    let s = section_measures(body)?.sections;
    let d = from_usize::<F>(s.len());
    let gm = (s.iter().map(|x| x.ln()).sum::<F>() / d).exp();
    let mn = s.iter().fold(F::infinity(), |m, &x| m.min(x));
    Ok(lit::<F>(4.0) * d * gm / mn)
}

pub fn optimize<F: Real>(body: &BodySpec<F>, t: F, cfg: &OptimizeConfig<F>) -> Result<OptimumReport<F>> {
    if !(t.is_finite() && t > F::zero()) {
        return Err(Error::Config(format!("dilation must be positive, got {t}")));
    }
    let k = match cfg.box_bound {
        Some(k) => k,
        None => default_box_bound(body)?,
    };
    if !(k.is_finite() && k > F::one()) {
        return Err(Error::Config(format!("box bound must exceed 1, got {k}")));
    }
    let balanced = balanced_factor(body)?;
    match cfg.strategy {
        SearchStrategy::Exact2D => {
            if body.dim() != 2 {
                return Err(Error::Config("the exact2d strategy needs a planar body".into()));
            }
            exact2d(body, t, k, cfg, balanced)
        }
        SearchStrategy::Grid => grid(body, t, k, cfg, balanced),
    }
}

/// `sup` over the reported optima of `max_j |a_j - B_j|`.
pub fn deviation_from_balanced<F: Real>(report: &OptimumReport<F>, b: &StretchFactor<F>) -> Result<F> {
    let mut m = F::zero();
    for a in &report.optima {
        if a.dim() != b.dim() {
            return input("optimum and balanced factor dimensions differ");
        }
        m = m.max(a.max_deviation(b));
    }
    Ok(m)
}

fn finish<F: Real>(
    value: u64,
    optima: Vec<StretchFactor<F>>,
    evaluations: usize,
    balanced: StretchFactor<F>,
    k: F,
    unresolved: usize,
) -> OptimumReport<F> {
    let ln_k = k.ln();
    let edge = ln_k - lit::<F>(1e-9).max(ln_k * lit(1e-12));
    let touches_box = optima.iter().any(|a| {
        let logs: Vec<F> = a.diag().iter().map(|x| x.ln()).collect();
        logs.iter().any(|l| l.abs() >= edge)
    });
    let sup_deviation = optima.iter().fold(F::zero(), |m, a| m.max(a.max_deviation(&balanced)));
    let a_star_max = optima.iter().fold(F::zero(), |m, a| m.max(a.a_star()));
    OptimumReport {
        value,
        optima,
        sup_deviation,
        a_star_max,
        evaluations,
        balanced,
        box_bound: k,
        touches_box,
        unresolved,
    }
}

fn eval<F: Real>(body: &BodySpec<F>, a: &StretchFactor<F>, t: F, set: LatticeSet) -> Result<u64> {
    Ok(count_scaled(&ScaledBody::new(body, a, t)?, set)?.count)
}

fn planar<F: Real>(a: F) -> Result<StretchFactor<F>> {
    StretchFactor::new(vec![a, a.recip()])
}

// ---------------------------------------------------------------------------
// Exact2D

/// In-set interval `[alpha, beta]` in `u = ln a` for one lattice point.
#[derive(Clone, Copy, Debug)]
struct Window<F> {
    lo: F,
    hi: F,
}

/// Level function of a lattice point along `a -> diag(a, 1/a)`: the point is in
/// `t A Omega` iff the level is `<= 1`. Unimodal in `u = ln a`.
struct PointLevel<'a, F: Real> {
    body: &'a BodySpec<F>,
    t: F,
    k: [i64; 2],
}

impl<'a, F: Real> PointLevel<'a, F> {
    fn at(&self, u: F) -> F {
        let x = int_to::<F>(self.k[0]) * (-u).exp();
        let y = int_to::<F>(self.k[1]) * u.exp();
        let (x, y) = (x / self.t, y / self.t);
        self.body.level_sum(&[x, y]).unwrap_or_else(|| self.body.gauge_unchecked(&[x, y]))
    }

    /// Minimiser of the level over `[lo, hi]`.
    fn argmin(&self, lo: F, hi: F) -> F {
        if self.k[0] == 0 {
            return lo;
        }
        if self.k[1] == 0 {
            return hi;
        }
        match self.body.exponents() {
            Some(p) => {
                let b = self.body.extents();
                let x = abs_pow(int_to::<F>(self.k[0]) / (self.t * b[0]), p[0]);
                let y = abs_pow(int_to::<F>(self.k[1]) / (self.t * b[1]), p[1]);
                let u = (p[0] * x / (p[1] * y)).ln() / (p[0] + p[1]);
                u.max(lo).min(hi)
            }
            None => golden_min(lo, hi, lit(1e-12), |u| self.at(u)),
        }
    }

    fn window(&self, lo: F, hi: F) -> Option<Window<F>> {
        let us = self.argmin(lo, hi);
        let m = self.at(us);
        let band = lit::<F>(1e-12);
        if m > F::one() + band {
            return None;
        }
        if m >= F::one() {
            // tangency: a single breakpoint
            return Some(Window { lo: us, hi: us });
        }
        let f = |u: F| self.at(u) - F::one();
        let left = if f(lo) <= F::zero() { lo } else { bisect(lo, us, 200, f).1 };
        let right = if f(hi) <= F::zero() { hi } else { bisect(us, hi, 200, f).0 };
        Some(Window { lo: left, hi: right })
    }
}

fn windows<F: Real>(body: &BodySpec<F>, t: F, k_box: F, first: i64, budget: usize) -> Result<Vec<Window<F>>> {
    let ln_k = k_box.ln();
    let (lo, hi) = (-ln_k, ln_k);
    let ext = body.extents();
    let k1_max = (t * k_box * ext[0]).floor().to_i64().unwrap_or(i64::MAX);
    if k1_max < first {
        return Ok(Vec::new());
    }
    let rows: Vec<Vec<Window<F>>> = (first..=k1_max)
        .into_par_iter()
        .map(|k1| {
            let mut out = Vec::new();
            let mut k2 = first;
            loop {
                let lvl = PointLevel { body, t, k: [k1, k2] };
                match lvl.window(lo, hi) {
                    Some(w) => out.push(w),
                    None => break,
                }
                k2 += 1;
            }
            out
        })
        .collect();
    let total: usize = rows.iter().map(Vec::len).sum();
    if 2 * total > budget {
        return Err(Error::Capacity(format!("{} breakpoints exceed the budget of {budget}", 2 * total)));
    }
    Ok(rows.into_iter().flatten().collect())
}

/// All `a in [1/K, K]` at which some nonnegative lattice point lies on the boundary of
/// `t diag(a, 1/a) Omega`; sorted, with values closer than `1e-13` merged.
pub fn critical_values_2d<F: Real>(body: &BodySpec<F>, t: F, box_bound: F, budget: usize) -> Result<Vec<F>> {
    if body.dim() != 2 {
        return input("critical values are defined for planar bodies");
    }
    if !(t > F::zero()) || !(box_bound > F::one()) {
        return input("need t > 0 and a box bound above 1");
    }
    let ln_k = box_bound.ln();
    let mut vals: Vec<F> = Vec::new();
    for w in windows(body, t, box_bound, 0, budget)? {
        for u in [w.lo, w.hi] {
            if u > -ln_k && u < ln_k {
                vals.push(u.exp());
            }
        }
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<F> = Vec::with_capacity(vals.len());
    for v in vals {
        if out.last().map_or(true, |&l| v - l > lit(1e-13)) {
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
enum Segment<F> {
    /// Breakpoint cluster `[lo, hi]` (width below the clustering tolerance).
    Point { lo: F, hi: F, est: u64 },
    /// Open interval strictly between clusters.
    Open { lo: F, hi: F, est: u64 },
}

impl<F: Copy> Segment<F> {
    fn est(&self) -> u64 {
        match *self {
            Segment::Point { est, .. } | Segment::Open { est, .. } => est,
        }
    }
}

fn sweep<F: Real>(wins: &[Window<F>], ln_k: F, base: u64) -> Vec<Segment<F>> {
    // +1 enters, -1 leaves, 0 marks a box edge
    let mut events: Vec<(F, i8)> = Vec::with_capacity(2 * wins.len() + 2);
    for w in wins {
        events.push((w.lo, 1));
        events.push((w.hi, -1));
    }
    events.push((-ln_k, 0));
    events.push((ln_k, 0));
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let tol = lit::<F>(1e-13);
    let mut segs = Vec::new();
    let mut running = base as i64;
    let mut prev_hi: Option<F> = None;
    let mut i = 0;
    while i < events.len() {
        let start = events[i].0;
        let (mut enters, mut leaves) = (0i64, 0i64);
        let mut j = i;
        while j < events.len() && events[j].0 - start <= tol {
            match events[j].1 {
                1 => enters += 1,
                -1 => leaves += 1,
                _ => {}
            }
            j += 1;
        }
        let end = events[j - 1].0;
        if let Some(p) = prev_hi {
            segs.push(Segment::Open { lo: p, hi: start, est: running as u64 });
        }
        // windows are closed: points leaving here still count at the cluster
        segs.push(Segment::Point { lo: start, hi: end, est: (running + enters) as u64 });
        running += enters - leaves;
        prev_hi = Some(end);
        i = j;
    }
    segs
}

/// Nudges `x` by about one unit in the last place.
fn next_float<F: Real>(x: F, up: bool) -> F {
    let mut d = x.abs().max(F::min_positive_value()) * F::epsilon() * lit(0.25);
    loop {
        let y = if up { x + d } else { x - d };
        if y != x {
            return y;
        }
        d = d + d;
    }
}

struct Verifier<'a, F: Real> {
    body: &'a BodySpec<F>,
    t: F,
    set: LatticeSet,
    lo: F,
    hi: F,
    cache: BTreeMap<u64, u64>,
}

impl<'a, F: Real> Verifier<'a, F> {
    fn count(&mut self, a: F) -> Result<Option<u64>> {
        if !(a >= self.lo && a <= self.hi) {
            return Ok(None);
        }
        let key = to_f64(a).to_bits();
        if let Some(&v) = self.cache.get(&key) {
            return Ok(Some(v));
        }
        let v = eval(self.body, &planar(a)?, self.t, self.set)?;
        self.cache.insert(key, v);
        Ok(Some(v))
    }
}

const ULP_SEARCH: usize = 16;

fn exact2d<F: Real>(
    body: &BodySpec<F>,
    t: F,
    k_box: F,
    cfg: &OptimizeConfig<F>,
    balanced: StretchFactor<F>,
) -> Result<OptimumReport<F>> {
    let mode = cfg.mode;
    let set = mode.lattice_set();
    let ln_k = k_box.ln();
    let first = match mode {
        Objective::MaxPositive => 1,
        Objective::MinNonnegative => 0,
    };
    let wins = windows(body, t, k_box, first, cfg.budget)?;
    let segs = sweep(&wins, ln_k, 0);

    let usable: Vec<&Segment<F>> =
        segs.iter().filter(|s| mode == Objective::MaxPositive || matches!(s, Segment::Open { .. })).collect();
    let best_est = match mode {
        Objective::MaxPositive => usable.iter().map(|s| s.est()).max().unwrap_or(0),
        Objective::MinNonnegative => usable.iter().map(|s| s.est()).min().unwrap_or(0),
    };
    let near = |e: u64| match mode {
        Objective::MaxPositive => e + 1 >= best_est,
        Objective::MinNonnegative => e <= best_est + 1,
    };

    let mut ver = Verifier { body, t, set, lo: k_box.recip(), hi: k_box, cache: BTreeMap::new() };
    // (value, representatives) per verified candidate
    let mut found: Vec<(u64, Vec<F>)> = Vec::new();
    let mut point_claims: Vec<u64> = Vec::new();
    for seg in usable.into_iter().filter(|s| near(s.est())) {
        match *seg {
            Segment::Point { lo, hi, est } => {
                let centre = ((lo + hi) * lit(0.5)).exp();
                let mut trials = vec![centre, lo.exp(), hi.exp()];
                let (mut up, mut down) = (centre, centre);
                for _ in 0..ULP_SEARCH {
                    up = next_float(up, true);
                    down = next_float(down, false);
                    trials.push(up);
                    trials.push(down);
                }
                let mut best: Option<(u64, Vec<F>)> = None;
                for a in trials {
                    if let Some(v) = ver.count(a)? {
                        match &mut best {
                            Some((bv, reps)) if *bv == v => reps.push(a),
                            Some((bv, _)) if !mode.better(v, *bv) => {}
                            _ => best = Some((v, vec![a])),
                        }
                        if v == est && mode == Objective::MaxPositive {
                            break;
                        }
                    }
                }
                point_claims.push(est);
                if let Some(b) = best {
                    found.push(b);
                }
            }
            Segment::Open { lo, hi, .. } => {
                let mid = ((lo + hi) * lit(0.5)).exp();
                let Some(v) = ver.count(mid)? else { continue };
                let mut reps = vec![mid];
                // innermost floats at each end that still realise the interval's count
                let mut a = lo.exp();
                for _ in 0..ULP_SEARCH {
                    a = next_float(a, true);
                    if a >= mid {
                        break;
                    }
                    if ver.count(a)? == Some(v) {
                        reps.push(a);
                        break;
                    }
                }
                let mut a = hi.exp();
                for _ in 0..ULP_SEARCH {
                    a = next_float(a, false);
                    if a <= mid {
                        break;
                    }
                    if ver.count(a)? == Some(v) {
                        reps.push(a);
                        break;
                    }
                }
                found.push((v, reps));
            }
        }
    }
    // identity and the balanced factor are always candidates
    for a in [F::one(), balanced.diag()[0]] {
        if let Some(v) = ver.count(a)? {
            found.push((v, vec![a]));
        }
    }
    let value = found.iter().map(|f| f.0).fold(None, |acc: Option<u64>, v| match acc {
        Some(b) if !mode.better(v, b) => Some(b),
        _ => Some(v),
    });
    let value = value.ok_or_else(|| Error::Numerical("no feasible stretch in the search box".into()))?;
    let unresolved = point_claims.iter().filter(|&&e| mode.better(e, value)).count();
    let mut reps: Vec<F> = found.into_iter().filter(|f| f.0 == value).flat_map(|f| f.1).collect();
    reps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    reps.dedup();
    let optima = reps.into_iter().map(planar).collect::<Result<Vec<_>>>()?;
    Ok(finish(value, optima, ver.cache.len(), balanced, k_box, unresolved))
}

// ---------------------------------------------------------------------------
// Grid

fn grid<F: Real>(
    body: &BodySpec<F>,
    t: F,
    k_box: F,
    cfg: &OptimizeConfig<F>,
    balanced: StretchFactor<F>,
) -> Result<OptimumReport<F>> {
    let d = body.dim();
    let m = d - 1;
    let mode = cfg.mode;
    let set = mode.lattice_set();
    let ln_k = k_box.ln();
    let step0 = cfg.initial_step;
    if !(step0 > F::zero()) {
        return Err(Error::Config("initial grid step must be positive".into()));
    }
    // points are stored as integer multiples of the finest step
    let finest = step0 / lit::<F>(2.0).powi(cfg.grid_levels as i32);
    let unit0 = 1i64 << cfg.grid_levels;
    let to_log = |z: &[i64]| -> Vec<F> { z.iter().map(|&v| int_to::<F>(v) * finest).collect() };
    let feasible = |s: &[F]| {
        let sum = s.iter().fold(F::zero(), |a, &v| a + v);
        s.iter().all(|v| v.abs() <= ln_k) && sum.abs() <= ln_k
    };

    let n0 = (ln_k / step0).floor().to_i64().unwrap_or(0);
    let mut level0: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..m {
        level0 = level0
            .into_iter()
            .flat_map(|p| {
                (-n0..=n0).map(move |v| {
                    let mut q = p.clone();
                    q.push(v * unit0);
                    q
                })
            })
            .collect();
    }
    level0.retain(|z| feasible(&to_log(z)));
    if level0.len() > cfg.budget {
        return Err(Error::Config(format!(
            "budget {} is below the {} points of the level-0 grid",
            cfg.budget,
            level0.len()
        )));
    }

    let mut values: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
    let mut extra: Vec<(Vec<F>, u64)> = Vec::new();
    let evaluate = |pts: &[Vec<i64>]| -> Result<Vec<u64>> {
        pts.par_iter().map(|z| eval(body, &StretchFactor::from_log(&to_log(z))?, t, set)).collect()
    };
    let v0 = evaluate(&level0)?;
    values.extend(level0.into_iter().zip(v0));

    // the balanced factor need not sit on the grid
    let b_log: Vec<F> = balanced.diag()[..m].iter().map(|a| a.ln()).collect();
    if feasible(&b_log) {
        extra.push((b_log, eval(body, &balanced, t, set)?));
    }

    let best_of = |values: &BTreeMap<Vec<i64>, u64>, extra: &[(Vec<F>, u64)]| {
        values.values().chain(extra.iter().map(|e| &e.1)).fold(None, |acc: Option<u64>, &v| match acc {
            Some(b) if !mode.better(v, b) => Some(b),
            _ => Some(v),
        })
    };
    let mut best = best_of(&values, &extra).unwrap_or(0);

    let slack = cfg.refine_slack.unwrap_or(if d == 2 { 1 } else { 0 });
    let within = |v: u64, best: u64| match mode {
        Objective::MaxPositive => v + slack >= best,
        Objective::MinNonnegative => v <= best + slack,
    };

    let mut offsets: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..m {
        offsets = offsets
            .into_iter()
            .flat_map(|p| {
                (-1..=1).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    offsets.retain(|o| o.iter().any(|&v| v != 0));

    for level in 1..=cfg.grid_levels {
        let unit = 1i64 << (cfg.grid_levels - level);
        let centres: Vec<Vec<i64>> = values.iter().filter(|(_, &v)| within(v, best)).map(|(z, _)| z.clone()).collect();
        let mut fresh: BTreeSet<Vec<i64>> = BTreeSet::new();
        for c in &centres {
            for o in &offsets {
                let z: Vec<i64> = c.iter().zip(o).map(|(&a, &b)| a + b * unit).collect();
                if !values.contains_key(&z) && feasible(&to_log(&z)) {
                    fresh.insert(z);
                }
            }
        }
        // the balanced factor seeds a neighbourhood too when it ties
        if let Some((b, v)) = extra.first() {
            if within(*v, best) {
                let z: Vec<i64> = b.iter().map(|&s| (s / finest).round().to_i64().unwrap_or(0)).collect();
                for o in offsets.iter().chain(std::iter::once(&vec![0; m])) {
                    let y: Vec<i64> = z.iter().zip(o).map(|(&a, &b)| a + b * unit).collect();
                    if !values.contains_key(&y) && feasible(&to_log(&y)) {
                        fresh.insert(y);
                    }
                }
            }
        }
        let fresh: Vec<Vec<i64>> = fresh.into_iter().collect();
        if values.len() + extra.len() + fresh.len() > cfg.budget {
            let optima = values
                .iter()
                .filter(|(_, &v)| v == best)
                .map(|(z, _)| to_log(z).iter().map(|&s| to_f64(s)).collect())
                .collect();
            return Err(Error::BudgetExhausted {
                budget: cfg.budget,
                best: Box::new(PartialOptimum { value: best, optima, evaluations: values.len() + extra.len() }),
            });
        }
        let vs = evaluate(&fresh)?;
        values.extend(fresh.into_iter().zip(vs));
        best = best_of(&values, &extra).unwrap_or(best);
    }

    let mut optima = Vec::new();
    for (z, &v) in &values {
        if v == best {
            optima.push(StretchFactor::from_log(&to_log(z))?);
        }
    }
    for (s, v) in &extra {
        if *v == best {
            optima.push(StretchFactor::from_log(s)?);
        }
    }
    Ok(finish(best, optima, values.len() + extra.len(), balanced, k_box, 0))
}
