//! Goodness-of-fit tools: empirical CDFs, Kolmogorov–Smirnov distances,
//! binned χ² statistics, and cached CDF tables of the theoretical free path
//! laws.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{fpl_between, fpl_generic, fpl_lattice, phi0, phi0_inner, support_xi_max};
use crate::quadrature::{integrate_value, CdfTable, IntegrationSpec, Tail};

/// Empirical distribution function of a finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    /// Rejects empty samples and NaN values.
    pub fn new(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(&x) = sample.iter().find(|x| x.is_nan()) {
            return Err(Error::NonFinite { x });
        }
        sample.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted: sample })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }
}

/// `sup |F_n − F|`, checking both sides of every jump of the ECDF.
pub fn ks_distance<F: Fn(f64) -> f64>(ecdf: &Ecdf, cdf: F) -> f64 {
    let n = ecdf.len() as f64;
    ecdf.sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// `sup |F_n − G_m|` between two empirical distributions.
pub fn ks_two_sample(a: &Ecdf, b: &Ecdf) -> f64 {
    let (xa, xb) = (a.sorted(), b.sorted());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Minimum expected count per bin after merging.
pub const MIN_EXPECTED: f64 = 5.0;

/// Adjacent bins merged left to right until each group holds at least
/// `min` of `weight`; a short remainder joins the last group.
fn merge_groups(weight: &[f64], min: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, w) in weight.iter().enumerate() {
        acc += w;
        if acc >= min {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < weight.len() {
        match groups.last_mut() {
            Some(last) => last.end = weight.len(),
            None => groups.push(0..weight.len()),
        }
    }
    groups
}

/// Result of a χ² computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2 {
    pub statistic: f64,
    pub dof: usize,
}

impl Chi2 {
    pub fn per_dof(&self) -> f64 {
        if self.dof == 0 {
            f64::INFINITY
        } else {
            self.statistic / self.dof as f64
        }
    }
}

/// `Σ (O − E)²/E` after merging neighbouring bins until every expected
/// count is at least [`MIN_EXPECTED`]; `dof` is the merged bin count minus one.
pub fn chi2_binned(counts: &[f64], expected: &[f64]) -> Result<Chi2> {
    if counts.len() != expected.len() {
        return Err(Error::Config("histograms must share the same binning".into()));
    }
    if !(expected.iter().sum::<f64>() > 0.0) {
        return Err(Error::ZeroMass);
    }
    let groups = merge_groups(expected, MIN_EXPECTED);
    let statistic = groups
        .iter()
        .map(|g| {
            let o: f64 = counts[g.clone()].iter().sum();
            let e: f64 = expected[g.clone()].iter().sum();
            (o - e) * (o - e) / e
        })
        .sum();
    Ok(Chi2 {
        statistic,
        dof: groups.len().saturating_sub(1),
    })
}

/// χ² between two histograms of possibly different totals. Bins are merged
/// until the pooled count of each group is at least `2 ·` [`MIN_EXPECTED`].
pub fn chi2_two_sample(r: &[f64], s: &[f64]) -> Result<Chi2> {
    if r.len() != s.len() {
        return Err(Error::Config("histograms must share the same binning".into()));
    }
    let (tr, ts): (f64, f64) = (r.iter().sum(), s.iter().sum());
    if !(tr > 0.0 && ts > 0.0) {
        return Err(Error::ZeroMass);
    }
    let pooled: Vec<f64> = r.iter().zip(s).map(|(a, b)| a + b).collect();
    let groups = merge_groups(&pooled, 2.0 * MIN_EXPECTED);
    let (kr, ks) = ((ts / tr).sqrt(), (tr / ts).sqrt());
    let statistic = groups
        .iter()
        .map(|g| {
            let a: f64 = r[g.clone()].iter().sum();
            let b: f64 = s[g.clone()].iter().sum();
            let d = kr * a - ks * b;
            d * d / (a + b)
        })
        .sum();
    Ok(Chi2 {
        statistic,
        dof: groups.len().saturating_sub(1),
    })
}

/// Counts of `(x, y)` pairs on a rectangular grid given by bin edges. Values
/// outside the outer edges go to the first or last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2d {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub counts: Vec<f64>,
}

impl Histogram2d {
    pub fn new(x_edges: Vec<f64>, y_edges: Vec<f64>) -> Result<Self> {
        for e in [&x_edges, &y_edges] {
            if e.len() < 2 || e.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Config("bin edges must be strictly increasing".into()));
            }
        }
        let n = (x_edges.len() - 1) * (y_edges.len() - 1);
        Ok(Histogram2d {
            x_edges,
            y_edges,
            counts: vec![0.0; n],
        })
    }

    fn bin(edges: &[f64], v: f64) -> usize {
        edges[1..edges.len() - 1].partition_point(|&e| e <= v)
    }

    pub fn add(&mut self, x: f64, y: f64) {
        let ny = self.y_edges.len() - 1;
        let i = Self::bin(&self.x_edges, x);
        let j = Self::bin(&self.y_edges, y);
        self.counts[i * ny + j] += 1.0;
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

/// Mean and standard error of a sample.
pub fn mean_and_se(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((mean, f64::INFINITY));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Outcome of comparing a statistic against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub name: String,
    pub n: usize,
    pub distance: f64,
    pub threshold: f64,
    pub pass: bool,
    pub details: BTreeMap<String, serde_json::Value>,
}

impl ComparisonReport {
    pub fn new(name: impl Into<String>, n: usize, distance: f64, threshold: f64) -> Self {
        ComparisonReport {
            name: name.into(),
            n,
            distance,
            threshold,
            pass: distance <= threshold,
            details: BTreeMap::new(),
        }
    }

    pub fn detail(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    /// Fails the report when fewer than `min_n` samples went into it, since
    /// a small sample can match any law by chance.
    pub fn require_samples(mut self, min_n: usize) -> Self {
        if self.n < min_n {
            self.pass = false;
            self.details.insert(
                "warning".into(),
                format!("insufficient sample size: {} < {}", self.n, min_n).into(),
            );
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields serialize")
    }
}

/// The theoretical distributions available as cached tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    /// First free path from a generic point.
    Generic,
    /// Free path between consecutive collisions.
    Between,
    /// First free path from a lattice point.
    Lattice,
    /// Absolute impact parameter `|w|` of the first collision.
    FirstImpact,
}

// uniform resolution where the densities vary, geometric out to the tail
fn free_path_nodes() -> Vec<f64> {
    let mut nodes: Vec<f64> = (0..=1024).map(|i| 2.0 * i as f64 / 1024.0).collect();
    let (start, end, n) = (2.0f64, 1e4f64, 3072);
    let ratio = (end / start).ln() / n as f64;
    nodes.extend((1..=n).map(|i| start * (ratio * i as f64).exp()));
    nodes
}

fn generic_table() -> CdfTable {
    let nodes = free_path_nodes();
    let end = *nodes.last().unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    // density ~ 1/(π² ξ²)
    let tail = Tail {
        mass: 1.0 / (pi2 * end),
        power: 1.0,
    };
    CdfTable::from_nodes(|x| fpl_generic(x).unwrap_or(0.0), &nodes, &[], Some(tail))
        .expect("generic free path table")
}

fn between_table() -> CdfTable {
    let nodes = free_path_nodes();
    let end = *nodes.last().unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    // density ~ 1/(π² ξ³)
    let tail = Tail {
        mass: 1.0 / (2.0 * pi2 * end * end),
        power: 2.0,
    };
    CdfTable::from_nodes(|x| fpl_between(x).unwrap_or(0.0), &nodes, &[], Some(tail))
        .expect("between-collision free path table")
}

fn lattice_table() -> CdfTable {
    CdfTable::uniform(|x| fpl_lattice(x).unwrap_or(0.0), 1.0, 4096).expect("lattice table")
}

/// `∫ Φ(ξ, w) dξ`, the marginal density of the first impact parameter.
///
/// Integrated by parts as `∫ ξ ∫Φ₀ dz dξ`, whose integrand is elementary.
pub fn first_impact_density(w: f64) -> Result<f64> {
    crate::error::check_domain(w.abs() < 1.0, "w", w, "|w| < 1")?;
    let aw = w.abs();
    let end = 1.0 / (1.0 - aw);
    let mut cuts = vec![0.5, 1.0 / (1.0 + aw)];
    let mut x = 1.0;
    while x < end {
        cuts.push(x);
        x *= 2.0;
    }
    let spec = IntegrationSpec::new(0.0, end).breakpoints(cuts).abs_tol(1e-11);
    integrate_value(|xi| xi * phi0_inner(xi, aw).unwrap_or(0.0), &spec)
}

fn first_impact_table() -> CdfTable {
    // |w| has density 2∫Φ dξ, log-singular at |w| = 1
    let mut nodes: Vec<f64> = (0..1000).map(|i| 0.99 * i as f64 / 1000.0).collect();
    nodes.extend((0..=400).map(|i| 1.0 - 0.01 * 10f64.powf(-10.0 * i as f64 / 400.0)));
    nodes.push(1.0);
    CdfTable::from_nodes(
        |w| 2.0 * first_impact_density(w.min(1.0 - 1e-15)).unwrap_or(0.0),
        &nodes,
        &[],
        None,
    )
    .expect("first impact table")
}

/// Cached CDF table of `law`, built on first use.
pub fn theory_table(law: Law) -> &'static CdfTable {
    static GENERIC: OnceLock<CdfTable> = OnceLock::new();
    static BETWEEN: OnceLock<CdfTable> = OnceLock::new();
    static LATTICE: OnceLock<CdfTable> = OnceLock::new();
    static IMPACT: OnceLock<CdfTable> = OnceLock::new();
    match law {
        Law::Generic => GENERIC.get_or_init(generic_table),
        Law::Between => BETWEEN.get_or_init(between_table),
        Law::Lattice => LATTICE.get_or_init(lattice_table),
        Law::FirstImpact => IMPACT.get_or_init(first_impact_table),
    }
}

/// CDF table of `ξ` under the normalized density `Φ₀(·, w, z)`.
pub fn conditional_xi_table(w: f64, z: f64) -> Result<CdfTable> {
    phi0(1.0, w, z)?;
    let end = support_xi_max(w, z);
    if !end.is_finite() {
        return Err(Error::Domain {
            param: "w",
            value: w,
            bound: "finite support of phi0(., w, z)",
        });
    }
    let kink = 1.0 / (1.0 + w.abs().max(z.abs()));
    let nodes: Vec<f64> = (0..4096).map(|i| end * i as f64 / 4095.0).collect();
    CdfTable::from_nodes(|x| if x > 0.0 { phi0(x, w, z).unwrap_or(0.0) } else { 0.0 }, &nodes, &[kink], None)
}
