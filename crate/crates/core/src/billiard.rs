//! Exact simulation of the periodic Lorentz gas at finite scatterer radius.
//!
//! Positions are microscopic; a scatterer of radius `ρ` sits on every point
//! of a unimodular lattice. Free path lengths are reported in macroscopic
//! units, `τ = ρ × (microscopic flight length)`.
//!
//! A state is stored as an integer lattice anchor plus a small offset. After
//! each collision the anchor is the scatterer just left, so all ray
//! arithmetic happens relative to a nearby lattice point no matter how far
//! the particle has travelled.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{angle_between, Direction, ScatteringModel, Specular, Vec2};
use crate::streams::{run_streams, StreamRng};
use crate::trajectory::{EventRow, TrajectoryRecord};

/// A lattice `{ k₁ b₁ + k₂ b₂ : k ∈ ℤ² }` with a fundamental cell of area one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    b1: Vec2,
    b2: Vec2,
    // rows of the inverse basis matrix, mapping positions to lattice coordinates
    inv1: Vec2,
    inv2: Vec2,
}

impl Lattice {
    /// `ℤ²`.
    pub fn square() -> Self {
        Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)).unwrap()
    }

    pub fn new(b1: Vec2, b2: Vec2) -> Result<Self> {
        let det = b1.cross(b2);
        if (det.abs() - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "lattice basis must have |det| = 1, got {det}"
            )));
        }
        Ok(Lattice {
            b1,
            b2,
            inv1: Vec2::new(b2.y / det, -b2.x / det),
            inv2: Vec2::new(-b1.y / det, b1.x / det),
        })
    }

    pub fn basis(&self) -> (Vec2, Vec2) {
        (self.b1, self.b2)
    }

    pub fn point(&self, k: [i64; 2]) -> Vec2 {
        self.b1 * k[0] as f64 + self.b2 * k[1] as f64
    }

    fn coords(&self, q: Vec2) -> Vec2 {
        Vec2::new(self.inv1.dot(q), self.inv2.dot(q))
    }

    /// Half the length of the shortest non-zero lattice vector: the largest
    /// radius for which scatterers stay disjoint.
    pub fn packing_radius(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in -3i64..=3 {
            for j in -3i64..=3 {
                if i != 0 || j != 0 {
                    best = best.min(self.point([i, j]).norm());
                }
            }
        }
        0.5 * best
    }
}

/// Geometry, dynamics and run parameters of a billiard simulation.
#[derive(Debug, Clone)]
pub struct BilliardConfig<M = Specular> {
    rho: f64,
    lattice: Lattice,
    model: M,
    /// Cap on a single microscopic flight length.
    pub max_flight: f64,
    pub seed: u64,
}

pub const DEFAULT_MAX_FLIGHT: f64 = 1e7;

impl BilliardConfig<Specular> {
    /// Specular scattering on `ℤ²`.
    pub fn specular(rho: f64) -> Result<Self> {
        BilliardConfig::new(rho, Lattice::square(), Specular)
    }
}

impl<M: ScatteringModel> BilliardConfig<M> {
    pub fn new(rho: f64, lattice: Lattice, model: M) -> Result<Self> {
        let bound = lattice.packing_radius();
        if !(rho > 0.0 && rho < bound) {
            return Err(Error::Domain {
                param: "rho",
                value: rho,
                bound: "0 < rho < packing radius (1/2 for Z^2)",
            });
        }
        Ok(BilliardConfig {
            rho,
            lattice,
            model,
            max_flight: DEFAULT_MAX_FLIGHT,
            seed: 0,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_flight(mut self, max_flight: f64) -> Self {
        self.max_flight = max_flight;
        self
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn model(&self) -> &M {
        &self.model
    }
}

/// Position and velocity of the particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroState {
    /// Lattice point the offset is measured from.
    pub anchor: [i64; 2],
    pub offset: Vec2,
    pub v: Direction,
    /// The scatterer at `anchor` is not a collision candidate on the next
    /// flight: the particle is leaving it, or it was removed.
    pub skip_anchor: bool,
}

impl MicroState {
    /// A free particle at absolute position `q`.
    pub fn at(q: Vec2, v: Direction) -> Self {
        MicroState {
            anchor: [0, 0],
            offset: q,
            v,
            skip_anchor: false,
        }
    }

    /// Absolute microscopic position.
    pub fn position(&self, lattice: &Lattice) -> Vec2 {
        lattice.point(self.anchor) + self.offset
    }
}

/// First scatterer met along a free flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Microscopic flight length.
    pub flight: f64,
    /// Lattice coordinates of the scatterer.
    pub m: [i64; 2],
    /// Boundary coordinate of the hit point, `q_hit = m + ρ w_in`.
    pub w_in: Direction,
}

/// The ray leaves through an infinite-horizon corridor, or at least flies
/// farther than `max_flight` without a collision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoHit;

impl std::fmt::Display for NoHit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "no collision within the flight cap")
    }
}

impl std::error::Error for NoHit {}

/// Finds the first scatterer hit from `state`.
///
/// Lattice points are visited column by column along the lattice axis that
/// the ray crosses, and each column is cut down to the points whose distance
/// to the line is below `ρ`. Columns are processed in order of increasing
/// ray parameter; the walk stops once no later column can beat the best hit.
pub fn next_collision<M: ScatteringModel>(
    state: &MicroState,
    config: &BilliardConfig<M>,
) -> std::result::Result<Hit, NoHit> {
    let lat = &config.lattice;
    let rho = config.rho;
    let v = state.v.to_vec();
    let p = state.offset;
    // signed distance of lattice point j from the line: j₁ c₁ + j₂ c₂ - h₀
    let c = [v.cross(lat.b1), v.cross(lat.b2)];
    let h0 = v.cross(p);
    let (outer, inner) = if c[1].abs() >= c[0].abs() { (0, 1) } else { (1, 0) };

    let x0 = lat.coords(p);
    let dir = lat.coords(v);
    let (x_outer, d_outer) = if outer == 0 { (x0.x, dir.x) } else { (x0.y, dir.y) };
    let inv_row = if outer == 0 { lat.inv1 } else { lat.inv2 };
    let reach = rho * inv_row.norm();
    // ray parameter slack between a column and the points it contains
    let slack = reach / d_outer.abs() + rho;

    let step: i64 = if d_outer > 0.0 { 1 } else { -1 };
    let mut col: i64 = if step > 0 {
        (x_outer - reach).floor() as i64
    } else {
        (x_outer + reach).ceil() as i64
    };

    let mut best: Option<Hit> = None;
    loop {
        let t_col = (col as f64 - x_outer) / d_outer;
        let t_min = t_col - slack;
        if let Some(h) = &best {
            if t_min > h.flight {
                break;
            }
        }
        if t_min > config.max_flight {
            return best.ok_or(NoHit);
        }
        // inner indices with |col c_outer + j c_inner - h0| <= ρ
        let base = col as f64 * c[outer] - h0;
        let ci = c[inner];
        let (mut lo, mut hi) = ((-rho - base) / ci, (rho - base) / ci);
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        let mut j = lo.ceil() as i64;
        let j_end = hi.floor() as i64;
        while j <= j_end {
            let rel = if outer == 0 { [col, j] } else { [j, col] };
            j += 1;
            if state.skip_anchor && rel == [0, 0] {
                continue;
            }
            let delta = lat.point(rel) - p;
            let h = v.cross(delta);
            let disc = rho * rho - h * h;
            if disc < 0.0 {
                continue;
            }
            let root = disc.sqrt();
            let t = v.dot(delta) - root;
            if t <= 0.0 || best.as_ref().is_some_and(|b| b.flight <= t) {
                continue;
            }
            // hit point relative to the centre in the frame of v: (-root, -h)
            let w_in = state.v.rotated((-h).atan2(-root));
            best = Some(Hit {
                flight: t,
                m: [state.anchor[0] + rel[0], state.anchor[1] + rel[1]],
                w_in,
            });
        }
        col += step;
    }
    best.ok_or(NoHit)
}

/// One collision of a billiard trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent {
    /// Macroscopic free path before the collision.
    pub tau: f64,
    pub v_in: Direction,
    pub v_out: Direction,
    /// Lattice coordinates of the scatterer.
    pub m: [i64; 2],
    pub w_in: Direction,
    pub w_out: Direction,
    /// Impact parameter `w_in · v_in^⊥`.
    pub b_in: f64,
    /// Exit parameter `w_out · v_out^⊥`.
    pub s_out: f64,
}

impl EventRow for CollisionEvent {
    const PARAMETER_COLUMN: &'static str = "s_out";

    fn tau(&self) -> f64 {
        self.tau
    }
    fn velocity(&self) -> Direction {
        self.v_out
    }
    fn impact(&self) -> f64 {
        self.b_in
    }
    fn parameter(&self) -> Option<f64> {
        Some(self.s_out)
    }
    fn scatterer(&self) -> Option<[i64; 2]> {
        Some(self.m)
    }
}

/// Flies to the next scatterer, applies the scattering map and leaves the
/// particle on the scatterer boundary.
pub fn step<M: ScatteringModel>(
    state: &MicroState,
    config: &BilliardConfig<M>,
) -> std::result::Result<(CollisionEvent, MicroState), NoHit> {
    let hit = next_collision(state, config)?;
    let (v_out, w_out) = config
        .model
        .scatter(state.v, hit.w_in)
        .expect("ray-circle hit point is always incoming");
    let event = CollisionEvent {
        tau: config.rho * hit.flight,
        v_in: state.v,
        v_out,
        m: hit.m,
        w_in: hit.w_in,
        w_out,
        b_in: angle_between(state.v, hit.w_in).sin(),
        s_out: angle_between(v_out, w_out).sin(),
    };
    let next = MicroState {
        anchor: hit.m,
        offset: w_out.to_vec() * config.rho,
        v: v_out,
        skip_anchor: true,
    };
    Ok((event, next))
}

/// Follows `initial` through `n` collisions. A flight beyond the cap ends
/// the record early with `truncated` set.
pub fn simulate<M: ScatteringModel>(
    initial: &MicroState,
    n: usize,
    config: &BilliardConfig<M>,
) -> TrajectoryRecord<CollisionEvent> {
    let mut events = Vec::with_capacity(n);
    let mut state = *initial;
    let mut truncated = false;
    for _ in 0..n {
        match step(&state, config) {
            Ok((e, s)) => {
                events.push(e);
                state = s;
            }
            Err(NoHit) => {
                truncated = true;
                break;
            }
        }
    }
    TrajectoryRecord {
        x0: initial.position(&config.lattice) * config.rho,
        v0: initial.v,
        events,
        truncated,
    }
}

/// How initial conditions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    /// Uniform in the billiard domain of one fundamental cell.
    Generic,
    /// At a lattice point whose scatterer is removed for the first flight.
    LatticePoint,
    /// Leaving the scatterer at the origin under the invariant collision
    /// measure: uniform direction and uniform exit parameter. The first free
    /// path then follows the law between consecutive collisions.
    Boundary,
}

/// Draws an initial state with uniformly distributed direction.
pub fn sample_initial<M: ScatteringModel, R: Rng + ?Sized>(
    config: &BilliardConfig<M>,
    rng: &mut R,
    mode: StartMode,
) -> MicroState {
    let v = Direction::from_angle(rng.random::<f64>() * TAU);
    match mode {
        StartMode::LatticePoint => MicroState {
            anchor: [0, 0],
            offset: Vec2::ZERO,
            v,
            skip_anchor: true,
        },
        StartMode::Boundary => {
            let s: f64 = 2.0 * rng.random::<f64>() - 1.0;
            MicroState {
                anchor: [0, 0],
                offset: v.rotated(s.asin()).to_vec() * config.rho,
                v,
                skip_anchor: true,
            }
        }
        StartMode::Generic => loop {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let q = config.lattice.b1 * u1 + config.lattice.b2 * u2;
            if distance_to_lattice(&config.lattice, q) >= config.rho {
                break MicroState::at(q, v);
            }
        },
    }
}

/// Distance from `q` to the nearest lattice point.
pub fn distance_to_lattice(lattice: &Lattice, q: Vec2) -> f64 {
    let x = lattice.coords(q);
    let (i0, j0) = (x.x.floor() as i64, x.y.floor() as i64);
    let mut best = f64::INFINITY;
    for i in i0 - 2..=i0 + 3 {
        for j in j0 - 2..=j0 + 3 {
            best = best.min((lattice.point([i, j]) - q).norm());
        }
    }
    best
}

/// Result of an ensemble run.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub trajectories: Vec<TrajectoryRecord<CollisionEvent>>,
    /// Trajectories cut short by a flight beyond the cap.
    pub truncated: usize,
}

/// Simulates `samples` independent trajectories of `n` collisions each,
/// split over `workers` random streams derived from `config.seed`.
pub fn simulate_ensemble<M: ScatteringModel>(
    config: &BilliardConfig<M>,
    mode: StartMode,
    n: usize,
    samples: usize,
    workers: usize,
) -> Ensemble {
    let trajectories = run_streams(samples, workers, config.seed, |rng: &mut StreamRng, _| {
        let start = sample_initial(config, rng, mode);
        simulate(&start, n, config)
    });
    let truncated = trajectories.iter().filter(|t| t.truncated).count();
    Ensemble {
        trajectories,
        truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ScaledReflection;
    use crate::streams::worker_rng;

    #[test]
    fn offset_ray_hits_next_column() {
        let cfg = BilliardConfig::specular(0.1).unwrap();
        let s = MicroState::at(Vec2::new(0.2, 0.05), Direction::E1);
        let hit = next_collision(&s, &cfg).unwrap();
        let expect = 1.0 - (0.01f64 - 0.0025).sqrt() - 0.2;
        assert_eq!(hit.m, [1, 0]);
        assert!((hit.flight - expect).abs() < 1e-12);
        assert!((hit.flight - 0.713_397).abs() < 1e-6);
        assert!(hit.w_in.dot(Direction::E1) < 0.0);
    }

    #[test]
    fn corridor_has_no_hit() {
        let cfg = BilliardConfig::specular(0.1).unwrap().with_max_flight(1e5);
        let s = MicroState::at(Vec2::new(0.5, 0.5), Direction::E1);
        assert_eq!(next_collision(&s, &cfg), Err(NoHit));
    }

    #[test]
    fn head_on() {
        for rho in [0.01, 0.2, 0.45] {
            let cfg = BilliardConfig::specular(rho).unwrap();
            let s = MicroState::at(Vec2::new(0.5, 0.0), Direction::E1);
            let hit = next_collision(&s, &cfg).unwrap();
            assert_eq!(hit.m, [1, 0]);
            assert!((hit.flight - (0.5 - rho)).abs() < 1e-12);
            assert!((hit.w_in.to_vec() + Direction::E1.to_vec()).norm() < 1e-12);
            let (e, _) = step(&s, &cfg).unwrap();
            assert!((e.v_out.to_vec() + Direction::E1.to_vec()).norm() < 1e-12);
            let rec = simulate(&s, 1, &cfg);
            assert_eq!(rec.events.len(), 1);
            assert!((rec.events[0].tau - rho * (0.5 - rho)).abs() < 1e-14);
        }
    }

    #[test]
    fn step_boundary_data() {
        let cfg = BilliardConfig::specular(0.1).unwrap();
        let s = MicroState::at(Vec2::new(0.2, 0.05), Direction::E1);
        let (e, next) = step(&s, &cfg).unwrap();
        assert!(e.w_in.dot(Direction::E1) < 0.0);
        assert!(e.v_out.dot(e.w_out) > 0.0);
        // the particle passes above the centre
        assert!((e.b_in - 0.5).abs() < 1e-12);
        let b_model = Specular.impact_parameter(e.v_in, e.v_out).unwrap();
        assert!((b_model - e.b_in).abs() < 1e-12);
        let s_model = Specular.exit_parameter(e.v_out, e.v_in).unwrap();
        assert!((s_model - e.s_out).abs() < 1e-12);
        assert!((next.offset.norm() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_overlapping_scatterers() {
        assert!(BilliardConfig::specular(0.5).is_err());
        assert!(BilliardConfig::specular(0.6).is_err());
        assert!(BilliardConfig::specular(0.0).is_err());
        assert!(Lattice::new(Vec2::new(2.0, 0.0), Vec2::new(0.0, 1.0)).is_err());
    }

    fn segment_distance(a: Vec2, b: Vec2, c: Vec2) -> f64 {
        let ab = b - a;
        let t = ((c - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
        (a + ab * t - c).norm()
    }

    fn check_trajectory<M: ScatteringModel>(cfg: &BilliardConfig<M>, seed: u64, n: usize) {
        let mut rng = worker_rng(seed, 0);
        let lat = *cfg.lattice();
        let mut state = sample_initial(cfg, &mut rng, StartMode::Generic);
        for _ in 0..n {
            let start = state.position(&lat);
            let (e, next) = step(&state, cfg).unwrap();
            let hit = lat.point(e.m) + e.w_in.to_vec() * cfg.rho();
            assert!(((hit - lat.point(e.m)).norm() - cfg.rho()).abs() < 1e-10);
            // straight segment from start to hit clears every scatterer
            let (lo, hi) = (start, hit);
            let xs = [lo.x.min(hi.x).floor() as i64 - 1, lo.x.max(hi.x).ceil() as i64 + 1];
            let ys = [lo.y.min(hi.y).floor() as i64 - 1, lo.y.max(hi.y).ceil() as i64 + 1];
            if (xs[1] - xs[0]) * (ys[1] - ys[0]) < 200_000 {
                for i in xs[0]..=xs[1] {
                    for j in ys[0]..=ys[1] {
                        let d = segment_distance(lo, hi, lat.point([i, j]));
                        assert!(d >= cfg.rho() - 1e-10, "penetrated scatterer {:?}", [i, j]);
                    }
                }
            }
            assert!(e.v_in.dot(e.w_in) < 0.0 && e.v_out.dot(e.w_out) > 0.0);
            assert!((e.v_out.to_vec().norm() - 1.0).abs() < 1e-12);
            state = next;
        }
    }

    #[test]
    fn no_penetration_and_hit_consistency() {
        check_trajectory(&BilliardConfig::specular(0.2).unwrap(), 1, 500);
        check_trajectory(&BilliardConfig::specular(0.05).unwrap(), 2, 300);
        let sheared = Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(0.37, 1.0)).unwrap();
        check_trajectory(&BilliardConfig::new(0.1, sheared, Specular).unwrap(), 3, 300);
        let soft = ScaledReflection::new(0.6).unwrap();
        check_trajectory(&BilliardConfig::new(0.15, Lattice::square(), soft).unwrap(), 4, 300);
    }

    #[test]
    fn speed_is_conserved_over_many_events() {
        let cfg = BilliardConfig::specular(0.3).unwrap();
        let mut rng = worker_rng(11, 0);
        let start = sample_initial(&cfg, &mut rng, StartMode::Generic);
        let rec = simulate(&start, 10_000, &cfg);
        assert_eq!(rec.events.len(), 10_000);
        for e in &rec.events {
            assert!((e.v_out.to_vec().norm() - 1.0).abs() < 1e-12);
            assert!(e.tau > 0.0);
        }
    }

    #[test]
    fn reversed_flight_retraces() {
        let cfg = BilliardConfig::specular(0.05).unwrap();
        let mut rng = worker_rng(5, 0);
        let mut state = sample_initial(&cfg, &mut rng, StartMode::Generic);
        // start from a scatterer so the reversed flight ends on one
        state = step(&state, &cfg).unwrap().1;
        for _ in 0..200 {
            let (e, next) = step(&state, &cfg).unwrap();
            let back = MicroState {
                anchor: e.m,
                offset: e.w_in.to_vec() * cfg.rho(),
                v: e.v_in.reversed(),
                skip_anchor: true,
            };
            let hit = next_collision(&back, &cfg).unwrap();
            assert_eq!(hit.m, state.anchor);
            assert!((hit.flight * cfg.rho() - e.tau).abs() < 1e-9);
            state = next;
        }
    }

    #[test]
    fn generic_starts_avoid_scatterers() {
        let cfg = BilliardConfig::specular(0.3).unwrap();
        let mut rng = worker_rng(3, 0);
        for _ in 0..100_000 {
            let s = sample_initial(&cfg, &mut rng, StartMode::Generic);
            assert!(distance_to_lattice(cfg.lattice(), s.offset) >= 0.3);
        }
    }

    #[test]
    fn lattice_start_ignores_own_scatterer_once() {
        let cfg = BilliardConfig::specular(0.1).unwrap();
        let s = MicroState {
            anchor: [0, 0],
            offset: Vec2::ZERO,
            v: Direction::E1,
            skip_anchor: true,
        };
        let hit = next_collision(&s, &cfg).unwrap();
        assert_eq!(hit.m, [1, 0]);
        assert!((hit.flight - 0.9).abs() < 1e-12);
    }

    #[test]
    fn boundary_starts_leave_the_origin_scatterer() {
        let cfg = BilliardConfig::specular(0.05).unwrap();
        let mut rng = worker_rng(4, 0);
        let n = 20_000;
        let mut abs_s = 0.0;
        for _ in 0..n {
            let st = sample_initial(&cfg, &mut rng, StartMode::Boundary);
            let out = Direction::from_vec(st.offset);
            assert!((st.offset.norm() - 0.05).abs() < 1e-15);
            assert!(out.dot(st.v) > 0.0);
            abs_s += angle_between(st.v, out).sin().abs();
            assert_ne!(next_collision(&st, &cfg).unwrap().m, [0, 0]);
        }
        // |s| is uniform on (0, 1)
        assert!((abs_s / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn ensembles_are_reproducible() {
        let cfg = BilliardConfig::specular(0.01).unwrap().with_seed(7);
        let a = simulate_ensemble(&cfg, StartMode::Generic, 3, 200, 3);
        let b = simulate_ensemble(&cfg, StartMode::Generic, 3, 200, 3);
        assert_eq!(a.trajectories, b.trajectories);
    }
}
