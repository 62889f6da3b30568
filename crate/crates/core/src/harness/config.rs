//! Line-oriented experiment files:
//!
//! ```text
//! # comment
//! [experiment]
//! name = disk-rate
//! body = family=superellipsoid; d=2; p=2
//! kind = rate-max
//! t_range = 50, 500, 50
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{run_experiment, write_rows, ExperimentConfig, ExperimentKind, RateFit};
use crate::domain::{parse_list, BodySpec};
use crate::error::{Error, Result};
use crate::measure::StretchFactor;
use crate::scalar::{from_usize, Real};
use crate::stretchopt::SearchStrategy;

use super::fit::logspace;

const KEYS: [&str; 15] = [
    "name",
    "body",
    "kind",
    "t",
    "t_logspace",
    "t_range",
    "stretch",
    "strategy",
    "levels",
    "box",
    "step",
    "budget",
    "output",
    "max_slope",
    "samples",
];

pub const SUMMARY_HEADER: [&str; 7] =
    ["name", "experiment", "fitted_slope", "theoretical_exponent", "constant", "threshold", "status"];

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, message: message.into() })
}

struct Block {
    header: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Block {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn require(&self, key: &str) -> Result<(usize, &str)> {
        self.get(key).map_or_else(|| parse_err(self.header, format!("experiment is missing required key `{key}`")), Ok)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse { line, message: format!("cannot parse `{key}` value `{v}`") }),
        }
    }
}

fn split_blocks(text: &str) -> Result<Vec<Block>> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if s.starts_with('[') {
            if s != "[experiment]" {
                return parse_err(line, format!("unknown section header `{s}`"));
            }
            blocks.push(Block { header: line, entries: BTreeMap::new() });
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            return parse_err(line, format!("expected `key = value`, got `{s}`"));
        };
        let Some(block) = blocks.last_mut() else {
            return parse_err(line, "key outside an [experiment] block");
        };
        let k = k.trim();
        if !KEYS.contains(&k) {
            return parse_err(line, format!("unknown key `{k}`"));
        }
        if block.entries.insert(k.to_string(), (line, v.trim().to_string())).is_some() {
            return parse_err(line, format!("duplicate key `{k}`"));
        }
    }
    Ok(blocks)
}

fn t_grid<F: Real>(b: &Block) -> Result<Vec<F>> {
    let given: Vec<&str> = ["t", "t_logspace", "t_range"].into_iter().filter(|k| b.get(k).is_some()).collect();
    if given.len() != 1 {
        return parse_err(b.header, "exactly one of `t`, `t_logspace`, `t_range` is required");
    }
    let (line, v) = b.get(given[0]).unwrap();
    let nums: Vec<F> = parse_list(v, given[0]).map_err(|e| Error::Parse { line, message: e.to_string() })?;
    let bad = |m: &str| parse_err(line, format!("`{}`: {m}", given[0]));
    match given[0] {
        "t" => Ok(nums),
        "t_logspace" => {
            if nums.len() != 3 || nums[2] < F::one() || nums[2].fract() != F::zero() {
                return bad("expected `start, end, count`");
            }
            Ok(logspace(nums[0], nums[1], nums[2].to_usize().unwrap()))
        }
        _ => {
            if nums.len() != 3 || !(nums[2] > F::zero()) || nums[1] < nums[0] {
                return bad("expected `start, end, step` with a positive step");
            }
            let n = ((nums[1] - nums[0]) / nums[2] + F::from(1e-9).unwrap()).floor().to_usize().unwrap();
            if n > 100_000 {
                return bad("too many points");
            }
            Ok((0..=n).map(|i| nums[0] + nums[2] * from_usize(i)).collect())
        }
    }
}

fn build<F: Real>(b: &Block) -> Result<ExperimentConfig<F>> {
    let (_, name) = b.require("name")?;
    let (bl, body) = b.require("body")?;
    let body: BodySpec<F> = body.parse().map_err(|e: Error| Error::Parse { line: bl, message: e.to_string() })?;
    let (kl, kind) = b.require("kind")?;
    let kind: ExperimentKind = kind.parse().map_err(|e: Error| Error::Parse { line: kl, message: e.to_string() })?;
    let mut cfg = ExperimentConfig::new(name, body, t_grid(b)?, kind);
    if let Some((line, v)) = b.get("stretch") {
        let a: StretchFactor<F> = v.parse().map_err(|e: Error| Error::Parse { line, message: e.to_string() })?;
        cfg.stretch = Some(a);
    }
    if let Some((line, v)) = b.get("strategy") {
        cfg.optimizer.strategy =
            v.parse::<SearchStrategy>().map_err(|e| Error::Parse { line, message: e.to_string() })?;
    }
    if let Some(n) = b.parse::<u32>("levels")? {
        cfg.optimizer.grid_levels = n;
    }
    if let Some(k) = b.parse::<f64>("box")? {
        cfg.optimizer.box_bound = Some(F::from(k).unwrap());
    }
    if let Some(s) = b.parse::<f64>("step")? {
        cfg.optimizer.initial_step = F::from(s).unwrap();
    }
    if let Some(n) = b.parse::<usize>("budget")? {
        cfg.optimizer.budget = n;
    }
    if let Some(n) = b.parse::<usize>("samples")? {
        cfg.sampling.samples = n;
    }
    if let Some(s) = b.parse::<f64>("max_slope")? {
        cfg.max_slope = Some(F::from(s).unwrap());
    }
    if let Some((_, v)) = b.get("output") {
        cfg.output = Some(PathBuf::from(v));
    }
    Ok(cfg)
}

/// Parses every block; errors carry the offending line.
pub fn parse_config<F: Real>(text: &str) -> Result<Vec<ExperimentConfig<F>>> {
    let blocks = split_blocks(text)?;
    if blocks.is_empty() {
        return parse_err(1, "no [experiment] blocks");
    }
    let cfgs = blocks.iter().map(build).collect::<Result<Vec<ExperimentConfig<F>>>>()?;
    for (i, c) in cfgs.iter().enumerate() {
        if cfgs[..i].iter().any(|o| o.name == c.name) {
            return parse_err(blocks[i].header, format!("duplicate experiment name `{}`", c.name));
        }
    }
    Ok(cfgs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub experiment: String,
    pub fitted_slope: Option<f64>,
    pub theoretical_exponent: Option<f64>,
    pub constant: Option<f64>,
    pub threshold: Option<f64>,
    /// `pass`, `fail`, `undefined`, `reported` or `error: ..`.
    pub status: String,
    pub output: PathBuf,
}

fn summarize<F: Real>(cfg: &ExperimentConfig<F>, fit: &Result<RateFit<F>>, output: PathBuf) -> SummaryRow {
    let threshold = cfg.max_slope.map(|s| s.to_f64().unwrap());
    let mut row = SummaryRow {
        name: cfg.name.clone(),
        experiment: cfg.kind.to_string(),
        fitted_slope: None,
        theoretical_exponent: None,
        constant: None,
        threshold,
        status: String::new(),
        output,
    };
    match fit {
        Err(e) => row.status = format!("error: {e}"),
        Ok(f) => {
            row.fitted_slope = f.fitted_slope.map(|s| s.to_f64().unwrap());
            row.theoretical_exponent = f.theoretical_exponent.to_f64();
            row.constant = f.constant.to_f64();
            row.status = match (row.fitted_slope, threshold) {
                (_, None) => "reported".into(),
                (None, Some(_)) => "undefined".into(),
                (Some(s), Some(m)) if s <= m => "pass".into(),
                _ => "fail".into(),
            };
            if f.incomplete_rows() > 0 {
                row.status.push_str(&format!(" ({} incomplete rows)", f.incomplete_rows()));
            }
        }
    }
    row
}

/// Runs every experiment of the file at `path`, writing one CSV per experiment and
/// `summary.csv` into `out_dir`. A failing experiment is recorded and the rest still run.
pub fn run_config(path: &Path, out_dir: &Path) -> Result<Vec<SummaryRow>> {
    let text = fs::read_to_string(path)?;
    let cfgs = parse_config::<f64>(&text)?;
    fs::create_dir_all(out_dir)?;
    let mut summary = Vec::new();
    for cfg in &cfgs {
        let output = out_dir.join(cfg.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.name))));
        let fit = run_experiment(cfg);
        let fit = match fit {
            Ok(f) => match fs::File::create(&output).map_err(Error::from).and_then(|file| write_rows(&f, file)) {
                Ok(()) => Ok(f),
                Err(e) => Err(e),
            },
            Err(e) => Err(e),
        };
        summary.push(summarize(cfg, &fit, output));
    }
    let file = fs::File::create(out_dir.join("summary.csv"))?;
    write_summary(&summary, file)?;
    Ok(summary)
}

pub fn write_summary<W: std::io::Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(SUMMARY_HEADER).map_err(io)?;
    let opt = |x: Option<f64>| x.map(super::format_real).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.experiment.clone(),
            opt(r.fitted_slope),
            opt(r.theoretical_exponent),
            opt(r.constant),
            opt(r.threshold),
            r.status.clone(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
