//! Exact lattice-point counts in `t A Omega`.
//!
//! Counting slices the body along its longest axis: for every integer prefix
//! of the remaining coordinates the slice is an interval whose end is located
//! in floating point and then fixed by the exact membership predicate.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use rayon::prelude::*;

use crate::domain::{BodySpec, ScaledBody};
use crate::error::{input, Error, Result};
use crate::measure::StretchFactor;
use crate::scalar::Real;

/// Which lattice points are counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatticeSet {
    /// All of `Z^d`.
    Full,
    /// Points with every coordinate `>= 1`.
    Positive,
    /// Points with every coordinate `>= 0`.
    Nonnegative,
    /// Points with at least one zero coordinate, i.e. on the union of the coordinate hyperplanes.
    SectionsUnion,
}

impl LatticeSet {
    pub const ALL: [LatticeSet; 4] =
        [LatticeSet::Full, LatticeSet::Positive, LatticeSet::Nonnegative, LatticeSet::SectionsUnion];
}

impl fmt::Display for LatticeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeSet::Full => "full",
            LatticeSet::Positive => "positive",
            LatticeSet::Nonnegative => "nonnegative",
            LatticeSet::SectionsUnion => "sections-union",
        })
    }
}

impl FromStr for LatticeSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(LatticeSet::Full),
            "positive" => Ok(LatticeSet::Positive),
            "nonnegative" => Ok(LatticeSet::Nonnegative),
            "sections-union" => Ok(LatticeSet::SectionsUnion),
            other => {
                input(format!("unknown lattice set `{other}` (expected full, positive, nonnegative or sections-union)"))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct CountRequest<F: Real> {
    pub body: BodySpec<F>,
    pub stretch: StretchFactor<F>,
    pub t: F,
    pub set: LatticeSet,
}

impl<F: Real> CountRequest<F> {
    pub fn new(body: BodySpec<F>, stretch: StretchFactor<F>, t: F, set: LatticeSet) -> Self {
        CountRequest { body, stretch, t, set }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CountResult {
    pub count: u64,
    /// Innermost slices evaluated (points tested, for the brute-force oracle).
    pub slices_visited: u64,
    /// Unit steps applied to floating-point slice ends.
    pub boundary_corrections: u64,
}

impl Add for CountResult {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        CountResult {
            count: self.count + o.count,
            slices_visited: self.slices_visited + o.slices_visited,
            boundary_corrections: self.boundary_corrections + o.boundary_corrections,
        }
    }
}

impl AddAssign for CountResult {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// Largest number of lattice points the slicing counter accepts in its box.
pub const MAX_BOX_POINTS: f64 = 4.611_686_018_427_388e18; // 2^62
/// Largest box the brute-force oracle enumerates.
pub const BRUTEFORCE_CAP: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Full,
    Positive,
    Nonnegative,
}

pub fn count<F: Real>(req: &CountRequest<F>) -> Result<CountResult> {
    let sb = ScaledBody::new(&req.body, &req.stretch, req.t)?;
    count_scaled(&sb, req.set)
}

/// Count on a prepared body.
pub fn count_scaled<F: Real>(sb: &ScaledBody<F>, set: LatticeSet) -> Result<CountResult> {
    let d = sb.dim();
    let all: Vec<usize> = (0..d).collect();
    match set {
        LatticeSet::Full => count_free(sb, &all, Mode::Full),
        LatticeSet::Positive => count_free(sb, &all, Mode::Positive),
        LatticeSet::Nonnegative => count_free(sb, &all, Mode::Nonnegative),
        LatticeSet::SectionsUnion => {
            // inclusion-exclusion over the set T of axes forced to zero
            let mut plus = CountResult::default();
            let mut minus = CountResult::default();
            for mask in 1u32..(1 << d) {
                let free: Vec<usize> = (0..d).filter(|&i| mask >> i & 1 == 0).collect();
                let r = count_free(sb, &free, Mode::Full)?;
                if mask.count_ones() % 2 == 1 {
                    plus += r;
                } else {
                    minus += r;
                }
            }
            Ok(CountResult {
                count: plus.count - minus.count,
                slices_visited: plus.slices_visited + minus.slices_visited,
                boundary_corrections: plus.boundary_corrections + minus.boundary_corrections,
            })
        }
    }
}

/// Points of `t A Omega` whose coordinates in `zero_axes` vanish and whose other coordinates are `>= 1`.
pub fn count_axis_subsets<F: Real>(
    body: &BodySpec<F>,
    stretch: &StretchFactor<F>,
    t: F,
    zero_axes: &[usize],
) -> Result<u64> {
    let sb = ScaledBody::new(body, stretch, t)?;
    count_axis_subsets_scaled(&sb, zero_axes)
}

pub fn count_axis_subsets_scaled<F: Real>(sb: &ScaledBody<F>, zero_axes: &[usize]) -> Result<u64> {
    let d = sb.dim();
    let mut zero = vec![false; d];
    for &i in zero_axes {
        if i >= d {
            return input(format!("axis {i} out of range for dimension {d}"));
        }
        zero[i] = true;
    }
    let free: Vec<usize> = (0..d).filter(|&i| !zero[i]).collect();
    Ok(count_free(sb, &free, Mode::Positive)?.count)
}

fn count_free<F: Real>(sb: &ScaledBody<F>, free: &[usize], mode: Mode) -> Result<CountResult> {
    let d = sb.dim();
    if free.is_empty() {
        // only the origin, which is interior
        return Ok(CountResult { count: 1, ..Default::default() });
    }
    let box_points: f64 = free.iter().map(|&i| 2.0 * sb.max_index(i) as f64 + 1.0).product();
    if !(box_points <= MAX_BOX_POINTS) {
        return Err(Error::Capacity(format!("bounding box holds about {box_points:e} lattice points (limit 2^62)")));
    }
    let mut order = free.to_vec();
    // innermost (first) is the longest axis
    order.sort_by(|&a, &b| sb.half_widths()[b].partial_cmp(&sb.half_widths()[a]).unwrap().then(a.cmp(&b)));
    let inner = order[0];
    let outer = &order[1..];
    let lo = if mode == Mode::Positive { 1 } else { 0 };

    if outer.is_empty() {
        let mut k = vec![0i64; d];
        let mut r = CountResult::default();
        slice(sb, &mut k, inner, mode, 1, &mut r);
        return Ok(r);
    }

    let top = *outer.last().unwrap();
    let rest = &outer[..outer.len() - 1];
    let mut tops = Vec::new();
    {
        let mut k = vec![0i64; d];
        let mut v = lo;
        loop {
            k[top] = v;
            if !sb.contains(&k) {
                break;
            }
            tops.push(v);
            v += 1;
        }
    }
    let total = tops
        .par_iter()
        .map(|&v| {
            let mut k = vec![0i64; d];
            k[top] = v;
            let weight = if mode == Mode::Full && v != 0 { 2 } else { 1 };
            let mut r = CountResult::default();
            recurse(sb, &mut k, rest, inner, mode, lo, weight, &mut r);
            r
        })
        .reduce(CountResult::default, |a, b| a + b);
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Real>(
    sb: &ScaledBody<F>,
    k: &mut [i64],
    axes: &[usize],
    inner: usize,
    mode: Mode,
    lo: i64,
    weight: u64,
    acc: &mut CountResult,
) {
    match axes.split_last() {
        None => slice(sb, k, inner, mode, weight, acc),
        Some((&axis, rest)) => {
            let mut v = lo;
            loop {
                k[axis] = v;
                if !sb.contains(k) {
                    break;
                }
                let w = if mode == Mode::Full && v != 0 { weight * 2 } else { weight };
                recurse(sb, k, rest, inner, mode, lo, w, acc);
                v += 1;
            }
            k[axis] = 0;
        }
    }
}

/// Adds the points of the slice along `axis` through the prefix held in `k`.
fn slice<F: Real>(sb: &ScaledBody<F>, k: &mut [i64], axis: usize, mode: Mode, weight: u64, acc: &mut CountResult) {
    let n = slice_end(sb, k, axis, acc);
    acc.slices_visited += 1;
    let points = match mode {
        Mode::Full if n >= 0 => 2 * n as u64 + 1,
        Mode::Positive if n >= 1 => n as u64,
        Mode::Nonnegative if n >= 0 => n as u64 + 1,
        _ => 0,
    };
    acc.count += weight * points;
}

/// Largest `n` with `k` (with `k[axis] = n`) inside, or `-1` when even `n = 0` is outside.
fn slice_end<F: Real>(sb: &ScaledBody<F>, k: &mut [i64], axis: usize, acc: &mut CountResult) -> i64 {
    let w = sb.slice_width(k, axis);
    let cap = sb.max_index(axis);
    let mut n = if w < F::zero() { -1 } else { w.floor().to_i64().unwrap_or(cap).min(cap) };
    let inside = |k: &mut [i64], n: i64| {
        k[axis] = n;
        sb.contains(k)
    };
    if n >= 0 && !inside(k, n) {
        loop {
            n -= 1;
            acc.boundary_corrections += 1;
            if n < 0 || inside(k, n) {
                break;
            }
        }
    } else {
        while inside(k, n + 1) {
            n += 1;
            acc.boundary_corrections += 1;
        }
    }
    k[axis] = 0;
    n
}

/// Ground truth by testing every point of the bounding box.
pub fn count_bruteforce<F: Real>(req: &CountRequest<F>) -> Result<CountResult> {
    let sb = ScaledBody::new(&req.body, &req.stretch, req.t)?;
    let d = sb.dim();
    let lo = match req.set {
        LatticeSet::Positive => 1,
        LatticeSet::Nonnegative => 0,
        _ => i64::MIN,
    };
    let ranges: Vec<(i64, i64)> = (0..d)
        .map(|i| {
            let m = sb.max_index(i);
            (if lo == i64::MIN { -m } else { lo }, m)
        })
        .collect();
    let total: f64 = ranges.iter().map(|(a, b)| (b - a + 1).max(0) as f64).product();
    if total > BRUTEFORCE_CAP {
        return Err(Error::Capacity(format!("brute force would test {total:e} points (limit {BRUTEFORCE_CAP:e})")));
    }
    let set = req.set;
    let (a0, b0) = ranges[0];
    let r = (a0..=b0)
        .into_par_iter()
        .map(|v| {
            let mut k = vec![0i64; d];
            k[0] = v;
            let mut r = CountResult::default();
            enumerate(&sb, &mut k, 1, &ranges, set, &mut r);
            r
        })
        .reduce(CountResult::default, |a, b| a + b);
    Ok(r)
}

fn enumerate<F: Real>(
    sb: &ScaledBody<F>,
    k: &mut [i64],
    axis: usize,
    ranges: &[(i64, i64)],
    set: LatticeSet,
    acc: &mut CountResult,
) {
    if axis == k.len() {
        acc.slices_visited += 1;
        let wanted = set != LatticeSet::SectionsUnion || k.contains(&0);
        if wanted && sb.contains(k) {
            acc.count += 1;
        }
        return;
    }
    for v in ranges[axis].0..=ranges[axis].1 {
        k[axis] = v;
        enumerate(sb, k, axis + 1, ranges, set, acc);
    }
    k[axis] = 0;
}
