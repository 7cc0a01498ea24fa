//! Statistical comparisons between the billiard, the random flight process
//! and the closed-form laws.

use anyhow::Result;
use lorentz_core::billiard::{simulate_ensemble, BilliardConfig, Ensemble, Lattice, StartMode};
use lorentz_core::flight::{sample_first_impact, sample_xi_given, simulate_flight_ensemble, FlightSampler};
use lorentz_core::geometry::{Specular, Vec2};
use lorentz_core::stats::{
    chi2_two_sample, conditional_xi_table, ks_distance, ks_two_sample, theory_table, ComparisonReport, Ecdf,
    Histogram2d, Law,
};
use lorentz_core::streams::{run_streams, worker_rng};

/// Reports built from fewer samples fail regardless of the distance.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Stat {
    /// Billiard first free path from generic points vs its limit law (KS)
    FplGeneric,
    /// Billiard free path from a boundary start vs the between-collision law (KS)
    FplBetween,
    /// Billiard first free path from a lattice point vs its limit law (KS)
    FplLattice,
    /// Sampled first free path of the flight process vs its law (KS)
    FlightTheory,
    /// Conditional free path sampler on a 5x5 grid of (w, z) (largest KS)
    FlightImpact,
    /// Histogram of (b1, tau2), billiard vs flight (chi-square per dof)
    Joint,
    /// Histogram of (sign b2, sign b3, tau3), billiard vs flight (chi-square per dof)
    Sign,
    /// First free path on a sheared lattice vs the square lattice (two-sample KS)
    LatticeIndependence,
}

impl Stat {
    pub fn name(self) -> &'static str {
        match self {
            Stat::FplGeneric => "fpl-generic",
            Stat::FplBetween => "fpl-between",
            Stat::FplLattice => "fpl-lattice",
            Stat::FlightTheory => "flight-theory",
            Stat::FlightImpact => "flight-impact",
            Stat::Joint => "joint",
            Stat::Sign => "sign",
            Stat::LatticeIndependence => "lattice-independence",
        }
    }

    pub fn default_threshold(self) -> f64 {
        match self {
            Stat::FplGeneric | Stat::FplBetween | Stat::FplLattice | Stat::FlightImpact => 0.01,
            Stat::FlightTheory => 0.005,
            Stat::Joint | Stat::Sign => 1.5,
            Stat::LatticeIndependence => 0.02,
        }
    }

    pub fn default_samples(self) -> usize {
        match self {
            Stat::FlightTheory => 1_000_000,
            _ => 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareParams {
    pub rho: f64,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub max_flight: f64,
    pub threshold: f64,
}

impl CompareParams {
    pub fn defaults(stat: Stat) -> Self {
        CompareParams {
            rho: 1e-3,
            samples: stat.default_samples(),
            seed: 0,
            workers: 1,
            max_flight: lorentz_core::billiard::DEFAULT_MAX_FLIGHT,
            threshold: stat.default_threshold(),
        }
    }
}

pub fn compare(stat: Stat, p: &CompareParams) -> Result<ComparisonReport> {
    let report = match stat {
        Stat::FplGeneric => billiard_ks(stat, p, StartMode::Generic, 0, Law::Generic)?,
        Stat::FplBetween => billiard_ks(stat, p, StartMode::Boundary, 0, Law::Between)?,
        Stat::FplLattice => billiard_ks(stat, p, StartMode::LatticePoint, 0, Law::Lattice)?,
        Stat::FlightTheory => flight_theory(p)?,
        Stat::FlightImpact => flight_impact(p)?,
        Stat::Joint => joint(stat, p, false)?,
        Stat::Sign => joint(stat, p, true)?,
        Stat::LatticeIndependence => lattice_independence(p)?,
    };
    Ok(report.require_samples(MIN_SAMPLES))
}

fn billiard(p: &CompareParams, lattice: Lattice, mode: StartMode, n: usize) -> Result<Ensemble> {
    let config = BilliardConfig::new(p.rho, lattice, Specular)?
        .with_seed(p.seed)
        .with_max_flight(p.max_flight);
    Ok(simulate_ensemble(&config, mode, n, p.samples, p.workers))
}

// free path number `k` (from 0) of every trajectory that got that far
fn taus(ens: &Ensemble, k: usize) -> Vec<f64> {
    ens.trajectories
        .iter()
        .filter_map(|t| t.events.get(k).map(|e| e.tau))
        .collect()
}

fn billiard_ks(stat: Stat, p: &CompareParams, mode: StartMode, k: usize, law: Law) -> Result<ComparisonReport> {
    let ens = billiard(p, Lattice::square(), mode, k + 1)?;
    let sample = taus(&ens, k);
    let n = sample.len();
    let table = theory_table(law);
    let d = if n == 0 {
        1.0
    } else {
        ks_distance(&Ecdf::new(sample)?, |x| table.cdf(x))
    };
    Ok(ComparisonReport::new(stat.name(), n, d, p.threshold)
        .detail("rho", p.rho)
        .detail("seed", p.seed)
        .detail("truncated", ens.truncated))
}

fn flight_theory(p: &CompareParams) -> Result<ComparisonReport> {
    let draws = run_streams(p.samples, p.workers, p.seed, |rng, _| sample_first_impact(rng));
    let xi = Ecdf::new(draws.iter().map(|d| d.0).collect())?;
    let w = Ecdf::new(draws.iter().map(|d| d.1.abs()).collect())?;
    let d_xi = ks_distance(&xi, |x| theory_table(Law::Generic).cdf(x));
    let d_w = ks_distance(&w, |x| theory_table(Law::FirstImpact).cdf(x));
    Ok(ComparisonReport::new(Stat::FlightTheory.name(), p.samples, d_xi, p.threshold)
        .detail("seed", p.seed)
        .detail("impact_ks", d_w))
}

/// Grid values of `w` and `z` for the conditional sampler check.
pub const IMPACT_GRID: [f64; 5] = [-0.8, -0.4, 0.0, 0.4, 0.8];

fn flight_impact(p: &CompareParams) -> Result<ComparisonReport> {
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for (i, &w) in IMPACT_GRID.iter().enumerate() {
        for (j, &z) in IMPACT_GRID.iter().enumerate() {
            let table = conditional_xi_table(w, z)?;
            let mut rng = worker_rng(p.seed, (5 * i + j) as u64);
            let sample = (0..p.samples)
                .map(|_| sample_xi_given(w, z, &mut rng))
                .collect::<lorentz_core::Result<Vec<f64>>>()?;
            let d = ks_distance(&Ecdf::new(sample)?, |x| table.cdf(x));
            worst = worst.max(d);
            cells.push(serde_json::json!({ "w": w, "z": z, "ks": d }));
        }
    }
    Ok(ComparisonReport::new(Stat::FlightImpact.name(), p.samples, worst, p.threshold)
        .detail("seed", p.seed)
        .detail("cells", cells))
}

// Deciles of the between-collision law; the last bin is open.
fn free_path_edges() -> Vec<f64> {
    let t = theory_table(Law::Between);
    let mut x = vec![0.0];
    x.extend((1..10).map(|i| t.inverse(i as f64 / 10.0)));
    x.push(f64::MAX);
    x
}

// One histogram row per (b1) bin, or per sign pattern of (b2, b3).
struct JointKey {
    x: f64,
    tau: f64,
}

fn joint_key(b: [f64; 3], tau: [f64; 3], signs: bool) -> JointKey {
    if signs {
        let k = 2 * (b[1] > 0.0) as u8 + (b[2] > 0.0) as u8;
        JointKey {
            x: k as f64 + 0.5,
            tau: tau[2],
        }
    } else {
        JointKey { x: b[0], tau: tau[1] }
    }
}

fn joint(stat: Stat, p: &CompareParams, signs: bool) -> Result<ComparisonReport> {
    let x_edges: Vec<f64> = if signs {
        (0..=4).map(f64::from).collect()
    } else {
        (0..=10).map(|i| -1.0 + 0.2 * i as f64).collect()
    };
    let y_edges = free_path_edges();
    let mut hb = Histogram2d::new(x_edges.clone(), y_edges.clone())?;
    let mut hf = Histogram2d::new(x_edges, y_edges)?;

    let ens = billiard(p, Lattice::square(), StartMode::Generic, 3)?;
    for t in ens.trajectories.iter().filter(|t| t.events.len() == 3) {
        let e = &t.events;
        let key = joint_key([e[0].b_in, e[1].b_in, e[2].b_in], [e[0].tau, e[1].tau, e[2].tau], signs);
        hb.add(key.x, key.tau);
    }
    let flights = simulate_flight_ensemble(&FlightSampler::new(Specular), 3, p.samples, p.seed.wrapping_add(1), p.workers);
    for t in &flights {
        let e = &t.events;
        let key = joint_key([e[0].b_in, e[1].b_in, e[2].b_in], [e[0].tau, e[1].tau, e[2].tau], signs);
        hf.add(key.x, key.tau);
    }
    let c = chi2_two_sample(&hb.counts, &hf.counts)?;
    let n = hb.total().min(hf.total()) as usize;
    Ok(ComparisonReport::new(stat.name(), n, c.per_dof(), p.threshold)
        .detail("rho", p.rho)
        .detail("seed", p.seed)
        .detail("chi2", c.statistic)
        .detail("dof", c.dof)
        .detail("truncated", ens.truncated))
}

/// Sheared unimodular lattice used for the lattice-independence check.
pub fn sheared_lattice() -> Lattice {
    Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(0.37, 1.0)).expect("unit determinant")
}

fn lattice_independence(p: &CompareParams) -> Result<ComparisonReport> {
    let square = taus(&billiard(p, Lattice::square(), StartMode::Generic, 1)?, 0);
    let shifted = CompareParams {
        seed: p.seed.wrapping_add(1),
        ..*p
    };
    let sheared = taus(&billiard(&shifted, sheared_lattice(), StartMode::Generic, 1)?, 0);
    let n = square.len().min(sheared.len());
    let d = ks_two_sample(&Ecdf::new(square)?, &Ecdf::new(sheared)?);
    Ok(ComparisonReport::new(Stat::LatticeIndependence.name(), n, d, p.threshold)
        .detail("rho", p.rho)
        .detail("seed", p.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_samples_fail_with_warning() {
        let p = CompareParams {
            samples: 10,
            ..CompareParams::defaults(Stat::FplGeneric)
        };
        let r = compare(Stat::FplGeneric, &p).unwrap();
        assert!(!r.pass);
        assert_eq!(r.n, 10);
        assert!(r.details["warning"].as_str().unwrap().contains("insufficient"));
    }

    #[test]
    fn flight_theory_small_run() {
        let p = CompareParams {
            samples: 20_000,
            ..CompareParams::defaults(Stat::FlightTheory)
        };
        let r = compare(Stat::FlightTheory, &p).unwrap();
        assert!(r.distance < 0.02, "{}", r.to_json());
        assert!(r.details["impact_ks"].as_f64().unwrap() < 0.02);
    }
}
