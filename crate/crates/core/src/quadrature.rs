//! Adaptive Gauss–Kronrod integration on finite intervals with known kinks,
//! and monotone CDF tables built from it.
//!
//! The integrator bisects the interval with the largest `|K15 - G7|` until
//! the summed estimate drops below the tolerance. Evaluation order depends
//! only on the inputs, so results are bit-stable from run to run.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Gauss–Kronrod 7/15 abscissae on [-1, 1] (non-negative half) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Largest number of subintervals kept before giving up on the tolerance.
const MAX_INTERVALS: usize = 20_000;

/// Interval, breakpoints and stopping rule of one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationSpec {
    pub lower: f64,
    pub upper: f64,
    pub breakpoints: Vec<f64>,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl IntegrationSpec {
    pub fn new(lower: f64, upper: f64) -> Self {
        IntegrationSpec {
            lower,
            upper,
            breakpoints: Vec::new(),
            abs_tol: 1e-10,
            max_depth: 60,
        }
    }

    /// Interior kinks of the integrand. Points outside the open interval are
    /// dropped; the rest are sorted and deduplicated.
    pub fn breakpoints<I: IntoIterator<Item = f64>>(mut self, points: I) -> Self {
        let (lo, hi) = (self.lower, self.upper);
        let mut pts: Vec<f64> = points
            .into_iter()
            .filter(|p| p.is_finite() && *p > lo && *p < hi)
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        self.breakpoints = pts;
        self
    }

    pub fn abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn max_depth(mut self, depth: u32) -> Self {
        self.max_depth = depth;
        self
    }
}

/// Result of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    /// `false` when the depth or interval budget ran out before `error <= abs_tol`.
    pub converged: bool,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        // largest error first; ties broken by position for determinism
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite { x })
        }
    };
    let fc = eval(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = eval(c - dx)? + eval(c + dx)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Integrates `f` over `spec`, treating each breakpoint-delimited panel as an
/// independent starting interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, spec: &IntegrationSpec) -> Result<Integral> {
    if !(spec.lower < spec.upper) || !spec.lower.is_finite() || !spec.upper.is_finite() {
        return Err(Error::Config(format!(
            "integration interval [{}, {}] must be finite with lower < upper",
            spec.lower, spec.upper
        )));
    }
    let mut edges = Vec::with_capacity(spec.breakpoints.len() + 2);
    edges.push(spec.lower);
    edges.extend(
        spec.breakpoints
            .iter()
            .copied()
            .filter(|p| *p > spec.lower && *p < spec.upper),
    );
    edges.push(spec.upper);

    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;
    for win in edges.windows(2) {
        let (value, error) = kronrod15(&f, win[0], win[1])?;
        total_err += error;
        heap.push(Piece {
            a: win[0],
            b: win[1],
            value,
            error,
            depth: 0,
        });
    }

    let mut done: Vec<Piece> = Vec::new();
    let mut converged = true;
    while total_err > spec.abs_tol {
        let Some(worst) = heap.pop() else {
            converged = false;
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= spec.max_depth
            || mid <= worst.a
            || mid >= worst.b
            || heap.len() + done.len() >= MAX_INTERVALS
        {
            // cannot refine further; park it and keep working on the rest
            done.push(worst);
            if heap.is_empty() || done.len() + heap.len() >= MAX_INTERVALS {
                converged = false;
                break;
            }
            continue;
        }
        let (v1, e1) = kronrod15(&f, worst.a, mid)?;
        let (v2, e2) = kronrod15(&f, mid, worst.b)?;
        total_err += e1 + e2 - worst.error;
        let depth = worst.depth + 1;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            depth,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            depth,
        });
    }

    done.extend(heap.into_vec());
    done.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = pairwise_sum(&done.iter().map(|p| p.value).collect::<Vec<_>>());
    let error: f64 = done.iter().map(|p| p.error).sum();
    Ok(Integral {
        value,
        error,
        converged: converged && error <= spec.abs_tol,
    })
}

/// Convenience wrapper returning only the value.
pub fn integrate_value<F: Fn(f64) -> f64>(f: F, spec: &IntegrationSpec) -> Result<f64> {
    integrate(f, spec).map(|r| r.value)
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Power-law tail appended beyond the last table node: the survival function
/// there is `mass * (x_end / x)^power` (before normalization).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail {
    pub mass: f64,
    pub power: f64,
}

/// Monotone piecewise-linear CDF of a tabulated density.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    x: Vec<f64>,
    cdf: Vec<f64>,
    // strictly increasing subsequence used for inverse queries
    inv_x: Vec<f64>,
    inv_p: Vec<f64>,
    tail: Option<Tail>,
    total: f64,
}

impl CdfTable {
    /// Table on `n` equally spaced nodes of `[0, support_end]`.
    pub fn uniform<F: Fn(f64) -> f64>(pdf: F, support_end: f64, n: usize) -> Result<Self> {
        if n < 2 || !(support_end > 0.0) {
            return Err(Error::Config("cdf table needs n >= 2 and support_end > 0".into()));
        }
        let nodes: Vec<f64> = (0..n)
            .map(|i| support_end * i as f64 / (n - 1) as f64)
            .collect();
        Self::from_nodes(pdf, &nodes, &[], None)
    }

    /// Table on the given increasing nodes. Each panel between neighbouring
    /// nodes is integrated adaptively, split at any of `kinks` inside it.
    pub fn from_nodes<F: Fn(f64) -> f64>(
        pdf: F,
        nodes: &[f64],
        kinks: &[f64],
        tail: Option<Tail>,
    ) -> Result<Self> {
        if nodes.len() < 2 || nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("cdf nodes must be strictly increasing".into()));
        }
        let mut cum = Vec::with_capacity(nodes.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            let spec = IntegrationSpec::new(w[0], w[1])
                .breakpoints(kinks.iter().copied())
                .abs_tol(1e-13 + 1e-11 * (w[1] - w[0]));
            let piece = integrate(&pdf, &spec)?;
            if piece.value < -1e-12 {
                return Err(Error::Config(format!(
                    "negative density mass {} on [{}, {}]",
                    piece.value, w[0], w[1]
                )));
            }
            acc += piece.value.max(0.0);
            cum.push(acc);
        }
        let total = acc + tail.map_or(0.0, |t| t.mass);
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        let cdf: Vec<f64> = cum.iter().map(|c| c / total).collect();
        let mut inv_x = vec![nodes[0]];
        let mut inv_p = vec![cdf[0]];
        for (x, p) in nodes.iter().zip(&cdf).skip(1) {
            if *p > *inv_p.last().unwrap() {
                inv_x.push(*x);
                inv_p.push(*p);
            }
        }
        Ok(CdfTable {
            x: nodes.to_vec(),
            cdf,
            inv_x,
            inv_p,
            tail,
            total,
        })
    }

    /// Mass integrated over the nodes plus the tail, before normalization.
    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let first = self.x[0];
        let last = *self.x.last().unwrap();
        if x <= first {
            return 0.0;
        }
        if x >= last {
            return match self.tail {
                Some(t) if t.mass > 0.0 => 1.0 - t.mass / self.total * (last / x).powf(t.power),
                _ => 1.0,
            };
        }
        let i = self.x.partition_point(|&n| n <= x) - 1;
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let t = (x - x0) / (x1 - x0);
        self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Linear-interpolation inverse; `p` is clamped to the tabulated range,
    /// except that quantiles in the tail invert the power law.
    pub fn inverse(&self, p: f64) -> f64 {
        let p_last = *self.inv_p.last().unwrap();
        let x_last = *self.inv_x.last().unwrap();
        if p >= p_last {
            return match self.tail {
                Some(t) if t.mass > 0.0 && p < 1.0 => {
                    let surv = (1.0 - p) * self.total / t.mass;
                    x_last * surv.powf(-1.0 / t.power)
                }
                _ => x_last,
            };
        }
        if p <= self.inv_p[0] {
            return self.inv_x[0];
        }
        let i = self.inv_p.partition_point(|&q| q <= p) - 1;
        let (p0, p1) = (self.inv_p[i], self.inv_p[i + 1]);
        self.inv_x[i] + (p - p0) / (p1 - p0) * (self.inv_x[i + 1] - self.inv_x[i])
    }
}
