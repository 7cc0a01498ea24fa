use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use lorentz_core::billiard::{simulate_ensemble, BilliardConfig, Lattice, StartMode};
use lorentz_core::flight::{simulate_flight_ensemble, FlightSampler};
use lorentz_core::geometry::Vec2;
use lorentz_core::stats::mean_and_se;
use lorentz_core::trajectory::{write_csv, EventRow, TrajectoryRecord};
use serde_json::json;

use crate::model::AnyModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Engine {
    Billiard,
    Flight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Start {
    Generic,
    LatticePoint,
    /// Leaving a scatterer with uniform direction and exit parameter.
    Boundary,
}

impl From<Start> for StartMode {
    fn from(s: Start) -> Self {
        match s {
            Start::Generic => StartMode::Generic,
            Start::LatticePoint => StartMode::LatticePoint,
            Start::Boundary => StartMode::Boundary,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulateParams {
    pub rho: f64,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub start: Start,
    pub max_flight: f64,
    pub model: AnyModel,
    pub lattice: Lattice,
}

/// Parses `"b1x,b1y,b2x,b2y"`.
pub fn parse_lattice(s: &str) -> Result<Lattice> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("lattice '{s}' must be four comma-separated numbers"))?;
    if v.len() != 4 {
        bail!("lattice '{s}' must be four comma-separated numbers");
    }
    Ok(Lattice::new(Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3]))?)
}

/// Counts, truncation and per-collision free path statistics.
pub fn summary<E: EventRow>(engine: Engine, p: &SimulateParams, trajectories: &[TrajectoryRecord<E>]) -> serde_json::Value {
    let truncated = trajectories.iter().filter(|t| t.truncated).count();
    let mut per_k = Vec::new();
    for k in 0..p.n {
        let mut taus: Vec<f64> = trajectories
            .iter()
            .filter_map(|t| t.events.get(k).map(|e| e.tau()))
            .collect();
        if taus.is_empty() {
            break;
        }
        let (mean, se) = mean_and_se(&taus).expect("non-empty");
        taus.sort_by(|a, b| a.total_cmp(b));
        let m = taus.len();
        let median = if m % 2 == 1 {
            taus[m / 2]
        } else {
            0.5 * (taus[m / 2 - 1] + taus[m / 2])
        };
        per_k.push(json!({ "k": k + 1, "count": m, "mean_tau": mean, "se_tau": se, "median_tau": median }));
    }
    let mut out = json!({
        "engine": match engine { Engine::Billiard => "billiard", Engine::Flight => "flight" },
        "samples": p.samples,
        "n": p.n,
        "seed": p.seed,
        "workers": p.workers,
        "nohit": truncated,
        "nohit_rate": if p.samples > 0 { truncated as f64 / p.samples as f64 } else { 0.0 },
        "collisions": per_k,
    });
    if engine == Engine::Billiard {
        out["rho"] = json!(p.rho);
    }
    out
}

fn write_outputs<E: EventRow>(
    trajectories: &[TrajectoryRecord<E>],
    summary: &serde_json::Value,
    out: &Path,
    summary_path: &Path,
) -> Result<()> {
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = BufWriter::new(file);
    write_csv(&mut w, trajectories)?;
    w.flush()?;
    let mut s = File::create(summary_path).with_context(|| format!("creating {}", summary_path.display()))?;
    serde_json::to_writer_pretty(&mut s, summary)?;
    writeln!(s)?;
    Ok(())
}

/// Runs the chosen engine and writes the trajectory CSV and summary JSON.
/// Returns the summary.
pub fn run(engine: Engine, p: &SimulateParams, out: &Path, summary_path: &Path) -> Result<serde_json::Value> {
    let s = match engine {
        Engine::Billiard => {
            let config = BilliardConfig::new(p.rho, p.lattice, p.model)?
                .with_seed(p.seed)
                .with_max_flight(p.max_flight);
            let ens = simulate_ensemble(&config, p.start.into(), p.n, p.samples, p.workers);
            let s = summary(engine, p, &ens.trajectories);
            write_outputs(&ens.trajectories, &s, out, summary_path)?;
            s
        }
        Engine::Flight => {
            if p.start != Start::Generic {
                bail!("the flight engine supports generic starts only");
            }
            let sampler = FlightSampler::new(p.model);
            let trajectories = simulate_flight_ensemble(&sampler, p.n, p.samples, p.seed, p.workers);
            let s = summary(engine, p, &trajectories);
            write_outputs(&trajectories, &s, out, summary_path)?;
            s
        }
    };
    if s["nohit_rate"].as_f64().unwrap_or(0.0) > 0.5 {
        eprintln!(
            "warning: {} of {} trajectories ended in a flight beyond the cap",
            s["nohit"], p.samples
        );
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_parsing() {
        assert!(parse_lattice("1,0,0.37,1").is_ok());
        assert!(parse_lattice("1,0,0").is_err());
        assert!(parse_lattice("2,0,0,2").is_err());
    }
}
