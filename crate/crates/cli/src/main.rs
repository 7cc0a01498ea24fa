use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lorentz_cli::compare::{self, CompareParams, Stat};
use lorentz_cli::config::{pick, FileConfig, WORKERS_ENV};
use lorentz_cli::eval::{self, EvalArgs, Kind};
use lorentz_cli::model::AnyModel;
use lorentz_cli::selftest;
use lorentz_cli::simulate::{self, Engine, SimulateParams, Start};
use lorentz_cli::tabulate::{self, Figure, Format};
use lorentz_core::billiard::{Lattice, DEFAULT_MAX_FLIGHT};
use lorentz_core::trajectory::fmt_sig15;

/// Collision kernels, billiard and random flight simulations of the
/// two-dimensional periodic Lorentz gas in the Boltzmann-Grad limit.
#[derive(Debug, Parser)]
#[command(name = "lorentz-bg", version)]
struct Cli {
    /// Flat TOML file of defaults keyed by long flag names.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel random streams; results depend on this count.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print one kernel value with 15 significant digits.
    Eval {
        kind: Kind,
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        /// Angle of v₀ in radians.
        #[arg(long, allow_hyphen_values = true)]
        v0: Option<f64>,
        /// Angle of v in radians.
        #[arg(long, allow_hyphen_values = true)]
        v: Option<f64>,
        /// Angle of v₊ in radians.
        #[arg(long, allow_hyphen_values = true)]
        vplus: Option<f64>,
        /// `specular` or `scaled:<lambda>`.
        #[arg(long)]
        model: Option<AnyModel>,
    },
    /// Write figure data.
    Tabulate {
        figure: Figure,
        /// Output file; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid size (default 300, or 200 intervals in w for fig5).
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        xi_max: Option<f64>,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Simulate trajectories and write a CSV dump and a JSON summary.
    Simulate {
        engine: Engine,
        #[arg(long)]
        rho: Option<f64>,
        /// Collisions per trajectory.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        start: Option<Start>,
        /// Longest free flight followed, in units of the lattice spacing.
        #[arg(long)]
        max_flight: Option<f64>,
        #[arg(long)]
        model: Option<AnyModel>,
        /// Lattice basis `b1x,b1y,b2x,b2y` with unit determinant.
        #[arg(long, allow_hyphen_values = true)]
        lattice: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Compare a statistic with its limit and print a JSON report.
    Compare {
        stat: Stat,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        max_flight: Option<f64>,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Selftest {
        /// Added to the middle branch of Φ; exercises the continuity check.
        #[arg(long, hide = true, allow_hyphen_values = true)]
        perturb_branch: Option<f64>,
    },
}

fn parse_enum<T: ValueEnum>(s: &str, key: &str) -> Result<T> {
    T::from_str(s, false).map_err(|e| anyhow!("bad {key} '{s}' in config file: {e}"))
}

fn file_model(file: &FileConfig) -> Result<Option<AnyModel>> {
    file.model
        .as_deref()
        .map(|s| s.parse::<AnyModel>().map_err(|e| anyhow!(e)))
        .transpose()
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Eval { kind, xi, w, z, a, v0, v, vplus, model } => {
            let args = EvalArgs {
                xi,
                w,
                z,
                a,
                v0,
                v,
                vplus,
                model: pick(model, file_model(&file)?, AnyModel::default()),
            };
            println!("{}", fmt_sig15(eval::evaluate(kind, &args)?));
        }
        Command::Tabulate { figure, out, points, xi_max, format } => {
            let file_format = file.format.as_deref().map(|s| parse_enum(s, "format")).transpose()?;
            let format = pick(format, file_format, Format::Csv);
            let default_points = if figure == Figure::Fig5 { 200 } else { 300 };
            let table = tabulate::tabulate(
                figure,
                pick(points, file.points, default_points),
                pick(xi_max, file.xi_max, 3.0),
            )?;
            let out = out.or(file.out);
            let mut w = open_out(out.as_ref())?;
            table.write(&mut w, format)?;
            w.flush()?;
        }
        Command::Simulate {
            engine,
            rho,
            n,
            samples,
            run,
            start,
            max_flight,
            model,
            lattice,
            out,
            summary,
        } => {
            let file_start = file.start.as_deref().map(|s| parse_enum(s, "start")).transpose()?;
            let lattice = match lattice.or(file.lattice.clone()) {
                Some(s) => simulate::parse_lattice(&s)?,
                None => Lattice::square(),
            };
            let params = SimulateParams {
                rho: pick(rho, file.rho, 1e-3),
                n: pick(n, file.n, 3),
                samples: pick(samples, file.samples, 1000),
                seed: pick(run.seed, file.seed, 0),
                workers: pick(run.workers, file.workers, 1).max(1),
                start: pick(start, file_start, Start::Generic),
                max_flight: pick(max_flight, file.max_flight, DEFAULT_MAX_FLIGHT),
                model: pick(model, file_model(&file)?, AnyModel::default()),
                lattice,
            };
            let default_out = match engine {
                Engine::Billiard => "billiard.csv",
                Engine::Flight => "flight.csv",
            };
            let out = pick(out, file.out.clone(), PathBuf::from(default_out));
            let summary_path = pick(summary, file.summary.clone(), out.with_extension("summary.json"));
            let s = simulate::run(engine, &params, &out, &summary_path)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
        Command::Compare {
            stat,
            rho,
            samples,
            run,
            threshold,
            max_flight,
            out,
        } => {
            let d = CompareParams::defaults(stat);
            let params = CompareParams {
                rho: pick(rho, file.rho, d.rho),
                samples: pick(samples, file.samples, d.samples),
                seed: pick(run.seed, file.seed, d.seed),
                workers: pick(run.workers, file.workers, d.workers).max(1),
                max_flight: pick(max_flight, file.max_flight, d.max_flight),
                threshold: pick(threshold, file.threshold, d.threshold),
            };
            let report = compare::compare(stat, &params)?;
            let json = report.to_json();
            println!("{json}");
            if let Some(p) = out.or(file.out) {
                std::fs::write(&p, format!("{json}\n")).with_context(|| format!("writing {}", p.display()))?;
            }
            if let Some(w) = report.details.get("warning") {
                eprintln!("warning: {}", w.as_str().unwrap_or_default());
            }
            if !report.pass {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Selftest { perturb_branch } => {
            let started = Instant::now();
            let checks = selftest::run(perturb_branch.unwrap_or(0.0))?;
            selftest::print_table(&checks);
            let failed = checks.iter().filter(|c| !c.pass).count();
            println!("{} checks, {} failed, {:.1} s", checks.len(), failed, started.elapsed().as_secs_f64());
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
