use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use stretchlat::exponents::{SamplingConfig, Strategy};
use stretchlat::harness::{self, logspace, ExperimentConfig, ExperimentKind, RateFit};
use stretchlat::measure::section_measures;
use stretchlat::stretchopt::{Objective, SearchStrategy};
use stretchlat::{Body, LatticeSet, OptimizeConfig, Request, Stretch};

#[derive(Parser)]
#[command(name = "stretchlat", version, about = "Lattice points in stretched convex bodies")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Suppress the human-readable summary on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact lattice-point counts in t·A·Ω.
    Count {
        #[arg(long)]
        body: String,
        #[arg(long)]
        t: f64,
        /// Diagonal of A, comma separated (default: identity).
        #[arg(long)]
        stretch: Option<String>,
        /// full, positive, nonnegative, sections-union or all.
        #[arg(long, default_value = "all")]
        set: String,
    },
    /// Volume, coordinate section measures and the balanced factor.
    Sections {
        #[arg(long)]
        body: String,
    },
    /// Curvature exponents ν, μ and γ.
    Exponents {
        #[arg(long)]
        body: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// analytic or numeric (default depends on the body).
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Optimal stretches at one dilation.
    Optimize {
        #[arg(long)]
        body: String,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value = "max-positive")]
        mode: String,
        #[arg(long)]
        strategy: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Deviation of optimal stretches from the balanced factor over a t grid.
    Rate {
        #[arg(long)]
        body: String,
        #[arg(long, default_value = "max-positive")]
        mode: String,
        #[arg(long)]
        strategy: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Count minus two-term main part over a t grid.
    Remainder {
        #[arg(long)]
        body: String,
        #[arg(long, default_value = "full")]
        set: String,
        /// Default: the balanced factor.
        #[arg(long)]
        stretch: Option<String>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run every experiment of a config file.
    Run {
        config: PathBuf,
        /// Directory for the per-experiment CSVs and summary.csv (default: the config's directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    levels: Option<u32>,
    #[arg(long = "box")]
    box_bound: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated dilations.
    #[arg(long, conflicts_with = "t_logspace")]
    t: Option<String>,
    /// `start,end,count`.
    #[arg(long)]
    t_logspace: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        let nums = |s: &str| -> Result<Vec<f64>> {
            s.split(',').map(|x| x.trim().parse::<f64>().with_context(|| format!("bad number `{x}`"))).collect()
        };
        match (&self.t, &self.t_logspace) {
            (Some(t), None) => nums(t),
            (None, Some(l)) => {
                let v = nums(l)?;
                if v.len() != 3 || v[2] < 1.0 || v[2].fract() != 0.0 {
                    bail!("--t-logspace expects start,end,count");
                }
                Ok(logspace(v[0], v[1], v[2] as usize))
            }
            _ => bail!("give --t or --t-logspace"),
        }
    }
}

fn apply(cfg: &mut OptimizeConfig<f64>, strategy: &Option<String>, s: &SearchArgs) -> Result<()> {
    if let Some(st) = strategy {
        cfg.strategy = st.parse::<SearchStrategy>()?;
    }
    if let Some(l) = s.levels {
        cfg.grid_levels = l;
    }
    cfg.box_bound = s.box_bound;
    if let Some(b) = s.budget {
        cfg.budget = b;
    }
    Ok(())
}

fn default_strategy(body: &Body) -> SearchStrategy {
    if body.dim() == 2 {
        SearchStrategy::Exact2D
    } else {
        SearchStrategy::Grid
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.csv {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn csv_string(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn f(x: f64) -> String {
    harness::format_real(x)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn summary_line(cli: &Cli, fit: &RateFit<f64>) {
    if cli.quiet {
        return;
    }
    let slope = fit.fitted_slope.map_or("undefined".to_string(), |s| format!("{s:.4}"));
    eprintln!(
        "{}: fitted slope {slope}, theoretical exponent {:.4}, constant {:.4e}, {} incomplete rows",
        fit.kind,
        fit.theoretical_exponent,
        fit.constant,
        fit.incomplete_rows()
    );
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Count { body, t, stretch, set } => {
            let b: Body = body.parse()?;
            let a: Stretch = match stretch {
                Some(s) => s.parse()?,
                None => Stretch::identity(b.dim()),
            };
            let sets: Vec<LatticeSet> = if set == "all" { LatticeSet::ALL.to_vec() } else { vec![set.parse()?] };
            let header: Vec<String> =
                ["family", "d", "p", "b", "a", "t", "set", "count"].iter().map(|s| s.to_string()).collect();
            let mut rows = Vec::new();
            for s in sets {
                let r = stretchlat::count(&Request::new(b.clone(), a.clone(), *t, s))?;
                rows.push(vec![
                    b.family().to_string(),
                    b.dim().to_string(),
                    b.exponents().map(join).unwrap_or_default(),
                    join(b.extents()),
                    join(a.diag()),
                    f(*t),
                    s.to_string(),
                    r.count.to_string(),
                ]);
            }
            emit(cli, &csv_string(&header, &rows)?)
        }
        Command::Sections { body } => {
            let b: Body = body.parse()?;
            let m = section_measures(&b)?;
            let bal = stretchlat::balanced_factor(&b)?;
            let mut header = vec!["volume".to_string()];
            header.extend((1..=b.dim()).map(|j| format!("section{j}")));
            header.extend((1..=b.dim()).map(|j| format!("balanced{j}")));
            let mut row = vec![f(m.volume)];
            row.extend(m.sections.iter().map(|&s| f(s)));
            row.extend(bal.diag().iter().map(|&s| f(s)));
            emit(cli, &csv_string(&header, &[row])?)
        }
        Command::Exponents { body, samples, strategy } => {
            let b: Body = body.parse()?;
            let cfg = SamplingConfig {
                samples: *samples,
                strategy: strategy.as_deref().map(str::parse::<Strategy>).transpose()?,
                ..SamplingConfig::default()
            };
            let r = stretchlat::exponent_report(&b, &cfg)?;
            let header: Vec<String> =
                ["nu", "mu", "gamma", "points", "strategy"].iter().map(|s| s.to_string()).collect();
            let row = vec![f(r.nu_min), f(r.mu), f(r.gamma), r.sample_count.to_string(), format!("{:?}", r.strategy)];
            if !cli.quiet {
                for s in &r.strata {
                    eprintln!("point {:?}: multitype {:?}", s.point.coords, s.multitype);
                }
            }
            emit(cli, &csv_string(&header, &[row])?)
        }
        Command::Optimize { body, t, mode, strategy, search } => {
            let b: Body = body.parse()?;
            let mode: Objective = mode.parse()?;
            let mut cfg = OptimizeConfig::new(mode, default_strategy(&b));
            apply(&mut cfg, strategy, search)?;
            let r = stretchlat::optimize(&b, *t, &cfg)?;
            let mut header = vec!["t".to_string(), "mode".to_string()];
            header.extend((1..=b.dim()).map(|j| format!("a{j}")));
            header.push("value".into());
            header.push("deviation".into());
            let rows: Vec<Vec<String>> = r
                .optima
                .iter()
                .map(|a| {
                    let mut row = vec![f(*t), mode.to_string()];
                    row.extend(a.diag().iter().map(|&x| f(x)));
                    row.push(r.value.to_string());
                    row.push(f(a.max_deviation(&r.balanced)));
                    row
                })
                .collect();
            if !cli.quiet {
                eprintln!(
                    "value {} at {} representatives; sup deviation {:.6e}; box {}{}",
                    r.value,
                    r.optima.len(),
                    r.sup_deviation,
                    r.box_bound,
                    if r.touches_box { " (an optimum touches the box)" } else { "" }
                );
            }
            emit(cli, &csv_string(&header, &rows)?)
        }
        Command::Rate { body, mode, strategy, grid, search } => {
            let b: Body = body.parse()?;
            let kind = match mode.parse::<Objective>()? {
                Objective::MaxPositive => ExperimentKind::RateMax,
                Objective::MinNonnegative => ExperimentKind::RateMin,
            };
            let mut cfg = ExperimentConfig::new("rate", b, grid.grid()?, kind);
            cfg.sampling.samples = grid.samples;
            apply(&mut cfg.optimizer, strategy, search)?;
            let fit = harness::rate_experiment(&cfg)?;
            summary_line(cli, &fit);
            emit(cli, &harness::rows_to_string(&fit)?)
        }
        Command::Remainder { body, set, stretch, grid } => {
            let b: Body = body.parse()?;
            let kind = match set.parse::<LatticeSet>()? {
                LatticeSet::Full => ExperimentKind::RemainderFull,
                LatticeSet::Positive => ExperimentKind::RemainderPositive,
                LatticeSet::Nonnegative => ExperimentKind::RemainderNonnegative,
                LatticeSet::SectionsUnion => ExperimentKind::RemainderSectionsUnion,
            };
            let mut cfg = ExperimentConfig::new("remainder", b, grid.grid()?, kind);
            cfg.sampling.samples = grid.samples;
            cfg.stretch = stretch.as_deref().map(str::parse::<Stretch>).transpose()?;
            let fit = harness::remainder_experiment(&cfg)?;
            summary_line(cli, &fit);
            emit(cli, &harness::rows_to_string(&fit)?)
        }
        Command::Run { config, out_dir } => {
            let dir = match out_dir {
                Some(d) => d.clone(),
                None => config.parent().map(PathBuf::from).unwrap_or_default(),
            };
            let rows = harness::run_config(config, &dir)?;
            let mut buf = Vec::new();
            harness::write_summary(&rows, &mut buf)?;
            if let Some(p) = &cli.csv {
                fs::write(p, &buf)?;
            }
            if !cli.quiet {
                for r in &rows {
                    eprintln!("{}: {} -> {}", r.name, r.status, r.output.display());
                }
            }
            if rows.iter().any(|r| r.status.starts_with("error")) {
                bail!("some experiments failed");
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
