//! Rate and remainder experiments over grids of dilations, with CSV output and
//! config-driven batch runs.

mod config;
mod fit;

pub use config::{parse_config, run_config, write_summary, SummaryRow, SUMMARY_HEADER};
pub use fit::{log_log_slope, logspace, normalized_constant, MIN_FIT_ROWS};

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::count::{count_scaled, LatticeSet};
use crate::domain::{BodySpec, ScaledBody};
use crate::error::{input, Error, Result};
use crate::exponents::{exponent_report, SamplingConfig};
use crate::measure::{balanced_factor, section_measures, StretchFactor};
use crate::scalar::{from_usize, lit, to_f64, Real};
use crate::stretchopt::{optimize, Objective, OptimizeConfig, SearchStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    RateMax,
    RateMin,
    RemainderFull,
    RemainderPositive,
    RemainderNonnegative,
    RemainderSectionsUnion,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::RateMax,
        ExperimentKind::RateMin,
        ExperimentKind::RemainderFull,
        ExperimentKind::RemainderPositive,
        ExperimentKind::RemainderNonnegative,
        ExperimentKind::RemainderSectionsUnion,
    ];

    pub fn is_rate(self) -> bool {
        matches!(self, ExperimentKind::RateMax | ExperimentKind::RateMin)
    }

    pub fn objective(self) -> Option<Objective> {
        match self {
            ExperimentKind::RateMax => Some(Objective::MaxPositive),
            ExperimentKind::RateMin => Some(Objective::MinNonnegative),
            _ => None,
        }
    }

    pub fn lattice_set(self) -> LatticeSet {
        match self {
            ExperimentKind::RateMax | ExperimentKind::RemainderPositive => LatticeSet::Positive,
            ExperimentKind::RateMin | ExperimentKind::RemainderNonnegative => LatticeSet::Nonnegative,
            ExperimentKind::RemainderFull => LatticeSet::Full,
            ExperimentKind::RemainderSectionsUnion => LatticeSet::SectionsUnion,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::RateMax => "rate-max",
            ExperimentKind::RateMin => "rate-min",
            ExperimentKind::RemainderFull => "remainder-full",
            ExperimentKind::RemainderPositive => "remainder-positive",
            ExperimentKind::RemainderNonnegative => "remainder-nonnegative",
            ExperimentKind::RemainderSectionsUnion => "remainder-sections-union",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::Input(format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig<F: Real> {
    pub name: String,
    pub body: BodySpec<F>,
    /// Ascending dilations.
    pub t_grid: Vec<F>,
    pub kind: ExperimentKind,
    /// Used by rate experiments; `mode` is overridden by the kind.
    pub optimizer: OptimizeConfig<F>,
    /// Used by remainder experiments; `None` means the balanced factor.
    pub stretch: Option<StretchFactor<F>>,
    pub sampling: SamplingConfig,
    pub output: Option<PathBuf>,
    /// Acceptance threshold on the fitted slope.
    pub max_slope: Option<F>,
}

impl<F: Real> ExperimentConfig<F> {
    pub fn new(name: impl Into<String>, body: BodySpec<F>, t_grid: Vec<F>, kind: ExperimentKind) -> Self {
        let strategy = if body.dim() == 2 { SearchStrategy::Exact2D } else { SearchStrategy::Grid };
        let mode = kind.objective().unwrap_or(Objective::MaxPositive);
        ExperimentConfig {
            name: name.into(),
            body,
            t_grid,
            kind,
            optimizer: OptimizeConfig::new(mode, strategy),
            stretch: None,
            sampling: SamplingConfig::default(),
            output: None,
            max_slope: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(Error::Config("empty t grid".into()));
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t > F::zero())) {
            return Err(Error::Config("t values must be positive and finite".into()));
        }
        if self.t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("t grid must be strictly ascending".into()));
        }
        if let Some(a) = &self.stretch {
            if a.dim() != self.body.dim() {
                return Err(Error::Config("stretch and body dimensions differ".into()));
            }
        }
        Ok(())
    }
}

/// One dilation of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Row<F> {
    pub t: F,
    /// `None` when the row did not complete.
    pub statistic: Option<F>,
    /// Optimal count (rate) or exact count (remainder).
    pub value: u64,
    /// Rate: the optimum with the largest deviation. Remainder: the stretch used.
    pub stretch: Vec<F>,
    /// Remainder only: the two-term main part and `count - main`.
    pub main_term: Option<F>,
    pub remainder: Option<F>,
    pub a_star_max: F,
    pub touches_box: bool,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit<F> {
    pub kind: ExperimentKind,
    pub dim: usize,
    pub rows: Vec<Row<F>>,
    pub fitted_slope: Option<F>,
    pub theoretical_exponent: F,
    /// `max_t statistic / t^theoretical_exponent`.
    pub constant: F,
}

impl<F: Real> RateFit<F> {
    fn new(kind: ExperimentKind, dim: usize, rows: Vec<Row<F>>, theoretical_exponent: F) -> Self {
        let pairs: Vec<(F, F)> = rows.iter().filter_map(|r| r.statistic.map(|s| (r.t, s))).collect();
        RateFit {
            kind,
            dim,
            fitted_slope: log_log_slope(&pairs),
            constant: normalized_constant(&pairs, theoretical_exponent),
            theoretical_exponent,
            rows,
        }
    }

    pub fn pairs(&self) -> Vec<(F, F)> {
        self.rows.iter().filter_map(|r| r.statistic.map(|s| (r.t, s))).collect()
    }

    pub fn incomplete_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.statistic.is_none()).count()
    }
}

pub fn run_experiment<F: Real>(cfg: &ExperimentConfig<F>) -> Result<RateFit<F>> {
    if cfg.kind.is_rate() {
        rate_experiment(cfg)
    } else {
        remainder_experiment(cfg)
    }
}

/// For each `t`, the sup deviation of the optimal stretches from the balanced factor.
pub fn rate_experiment<F: Real>(cfg: &ExperimentConfig<F>) -> Result<RateFit<F>> {
    let Some(mode) = cfg.kind.objective() else {
        return input(format!("`{}` is not a rate experiment", cfg.kind));
    };
    cfg.validate()?;
    let report = exponent_report(&cfg.body, &cfg.sampling)?;
    let exponent = -report.gamma;
    let ocfg = OptimizeConfig { mode, ..cfg.optimizer };
    let d = cfg.body.dim();
    let rows = cfg
        .t_grid
        .par_iter()
        .map(|&t| match optimize(&cfg.body, t, &ocfg) {
            Ok(r) => {
                let worst = r
                    .optima
                    .iter()
                    .max_by(|a, b| a.max_deviation(&r.balanced).partial_cmp(&b.max_deviation(&r.balanced)).unwrap())
                    .map(|a| a.diag().to_vec())
                    .unwrap_or_else(|| vec![F::nan(); d]);
                let status = if r.touches_box { "box" } else { "ok" };
                Ok(Row {
                    t,
                    statistic: Some(r.sup_deviation),
                    value: r.value,
                    stretch: worst,
                    main_term: None,
                    remainder: None,
                    a_star_max: r.a_star_max,
                    touches_box: r.touches_box,
                    status: status.to_string(),
                })
            }
            Err(Error::BudgetExhausted { best, .. }) => Ok(Row {
                t,
                statistic: None,
                value: best.value,
                stretch: vec![F::nan(); d],
                main_term: None,
                remainder: None,
                a_star_max: F::nan(),
                touches_box: false,
                status: format!("incomplete after {} evaluations", best.evaluations),
            }),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateFit::new(cfg.kind, d, rows, exponent))
}

/// Two-term main part of the count of `set` in `t A Omega`.
pub fn main_terms<F: Real>(body: &BodySpec<F>, a: &StretchFactor<F>, t: F, set: LatticeSet) -> Result<F> {
    let d = body.dim();
    if a.dim() != d {
        return input("stretch and body dimensions differ");
    }
    let m = section_measures(body)?;
    let vol = m.volume * t.powi(d as i32);
    let sect = m.sections.iter().zip(a.diag()).fold(F::zero(), |acc, (&s, &aj)| acc + s / aj) * t.powi(d as i32 - 1);
    let q = lit::<F>(2.0).powi(-(d as i32));
    Ok(match set {
        LatticeSet::Full => vol,
        LatticeSet::Positive => q * (vol - sect),
        LatticeSet::Nonnegative => q * (vol + sect),
        LatticeSet::SectionsUnion => sect,
    })
}

/// `d - 1 - min { nu, mu / (d - mu) }`.
pub fn remainder_exponent<F: Real>(d: usize, nu: F, mu: F) -> F {
    let df = from_usize::<F>(d);
    df - F::one() - nu.min(mu / (df - mu))
}

/// For each `t`, `|count - main terms|` at a fixed stretch.
pub fn remainder_experiment<F: Real>(cfg: &ExperimentConfig<F>) -> Result<RateFit<F>> {
    if cfg.kind.is_rate() {
        return input(format!("`{}` is not a remainder experiment", cfg.kind));
    }
    cfg.validate()?;
    let d = cfg.body.dim();
    let report = exponent_report(&cfg.body, &cfg.sampling)?;
    let exponent = remainder_exponent(d, report.nu_min, report.mu);
    let a = match &cfg.stretch {
        Some(a) => a.clone(),
        None => balanced_factor(&cfg.body)?,
    };
    let set = cfg.kind.lattice_set();
    let rows = cfg
        .t_grid
        .par_iter()
        .map(|&t| {
            let sb = ScaledBody::new(&cfg.body, &a, t)?;
            let count = count_scaled(&sb, set)?.count;
            let main = main_terms(&cfg.body, &a, t, set)?;
            let rem = from_u64::<F>(count) - main;
            Ok(Row {
                t,
                statistic: Some(rem.abs()),
                value: count,
                stretch: a.diag().to_vec(),
                main_term: Some(main),
                remainder: Some(rem),
                a_star_max: a.a_star(),
                touches_box: false,
                status: "ok".to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateFit::new(cfg.kind, d, rows, exponent))
}

fn from_u64<F: Real>(n: u64) -> F {
    F::from(n).expect("count representable as a float")
}

/// 17 significant digits.
pub fn format_real<F: Real>(x: F) -> String {
    let v = to_f64(x);
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Header of the per-row CSV for an experiment of this kind in dimension `d`.
pub fn csv_header(kind: ExperimentKind, d: usize) -> Vec<String> {
    let mut h: Vec<String> = if kind.is_rate() {
        vec!["t".into(), "sup_deviation".into(), "value".into()]
    } else {
        vec!["t".into(), "statistic".into(), "count".into(), "main_term".into(), "remainder".into()]
    };
    h.extend((1..=d).map(|i| format!("a{i}")));
    h.push("a_star".into());
    h.push("status".into());
    h
}

pub fn write_rows<F: Real, W: Write>(fit: &RateFit<F>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(csv_header(fit.kind, fit.dim)).map_err(io)?;
    let opt = |x: Option<F>| x.map(format_real).unwrap_or_default();
    for r in &fit.rows {
        let mut rec = vec![format_real(r.t), opt(r.statistic), r.value.to_string()];
        if !fit.kind.is_rate() {
            rec.push(opt(r.main_term));
            rec.push(opt(r.remainder));
        }
        rec.extend(r.stretch.iter().map(|&a| format_real(a)));
        rec.push(format_real(r.a_star_max));
        rec.push(r.status.clone());
        w.write_record(rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_string<F: Real>(fit: &RateFit<F>) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(fit, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Numerical(e.to_string()))
}
