//! The limiting random flight process: a Markov chain in (free path, impact
//! parameter) driven by the kernels `Φ` and `Φ₀`.
//!
//! Both kernels are sampled by rejection from explicit envelopes,
//!
//! * `Φ(ξ, w) ≤ min(1, A/ξ)` with `A = 1/4` (`sup ξΦ = π²/48`),
//! * `Φ₀(ξ, w, z) ≤ (6/π²) min(1, 1/ξ)`,
//!
//! whose normalized versions can be drawn exactly by inversion. Uniform
//! proposals over the whole support would need an unbounded number of tries
//! as `|w|` or `|z|` approaches one; these envelopes keep the acceptance rate
//! bounded below for `Φ` and decaying only logarithmically in `1 - |z|` for
//! `Φ₀`.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Direction, ScatteringModel, Specular, Vec2};
use crate::kernels::{phi, phi0, support_xi_max, SIX_OVER_PI2};
use crate::streams::run_streams;
use crate::trajectory::{EventRow, TrajectoryRecord};

/// Envelope constant for the first-collision kernel.
pub const FIRST_ENVELOPE: f64 = 0.25;

// largest |z| handed to Φ₀; exit parameters that round to ±1 are pulled in
const Z_LIMIT: f64 = 1.0 - 1e-15;

/// One draw of a collision: free path, impact parameter and new velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub xi: f64,
    pub w: f64,
    pub v_next: Direction,
}

/// Draws `(ξ, w)` with density `Φ(ξ, w)` on `ξ > 0, |w| < 1`.
pub fn sample_first_impact<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let a = FIRST_ENVELOPE;
    let c = 1.0 + (1.0 / a).ln();
    loop {
        // t = 1 - |w| with density ∝ c - ln t: a mixture of U and U₁U₂
        let t = if rng.random::<f64>() < c / (c + 1.0) {
            rng.random::<f64>()
        } else {
            rng.random::<f64>() * rng.random::<f64>()
        };
        let aw = 1.0 - t;
        if t <= 0.0 || aw >= 1.0 {
            continue;
        }
        let w = if rng.random::<bool>() { aw } else { -aw };
        // ξ | w with density ∝ min(1, A/ξ) on (0, 1/t)
        let log_span = (1.0 / (a * t)).ln();
        let xi = if rng.random::<f64>() * (1.0 + log_span) < 1.0 {
            a * rng.random::<f64>()
        } else {
            a * (rng.random::<f64>() * log_span).exp()
        };
        if !(xi > 0.0) {
            continue;
        }
        let envelope = (a / xi).min(1.0);
        let target = phi(xi, w).expect("proposal lies in the domain of phi");
        if rng.random::<f64>() * envelope < target {
            return (xi, w);
        }
    }
}

fn clamp_memory(z: f64) -> f64 {
    z.clamp(-Z_LIMIT, Z_LIMIT)
}

// ξ with density ∝ min(1, 1/ξ) on (0, 1/(1 - |z|))
fn propose_xi<R: Rng + ?Sized>(rng: &mut R, log_span: f64) -> f64 {
    if rng.random::<f64>() * (1.0 + log_span) < 1.0 {
        rng.random::<f64>()
    } else {
        (rng.random::<f64>() * log_span).exp()
    }
}

fn accept_next<R: Rng + ?Sized>(rng: &mut R, xi: f64, w: f64, z: f64) -> bool {
    if !(xi > 0.0) || xi >= support_xi_max(w, z) {
        return false;
    }
    let envelope = SIX_OVER_PI2 * xi.recip().min(1.0);
    let target = phi0(xi, w, z).expect("proposal lies in the domain of phi0");
    rng.random::<f64>() * envelope < target
}

/// Draws `(ξ, w)` with density `Φ₀(ξ, w, z)`.
pub fn sample_next_impact<R: Rng + ?Sized>(z: f64, rng: &mut R) -> (f64, f64) {
    let z = clamp_memory(z);
    let log_span = -(1.0 - z.abs()).ln();
    loop {
        let w = 2.0 * rng.random::<f64>() - 1.0;
        if w <= -1.0 {
            continue;
        }
        let xi = propose_xi(rng, log_span);
        if accept_next(rng, xi, w, z) {
            return (xi, w);
        }
    }
}

/// Draws `ξ` with density proportional to `Φ₀(·, w, z)` at fixed `w`.
///
/// Same proposal and acceptance step as [`sample_next_impact`], so it checks
/// the rejection sampler cell by cell.
pub fn sample_xi_given<R: Rng + ?Sized>(w: f64, z: f64, rng: &mut R) -> Result<f64> {
    let z = clamp_memory(z);
    crate::error::check_domain(w.abs() < 1.0, "w", w, "|w| < 1")?;
    let log_span = -(1.0 - z.abs()).ln();
    loop {
        let xi = propose_xi(rng, log_span);
        if accept_next(rng, xi, w, z) {
            return Ok(xi);
        }
    }
}

/// One collision of the random flight process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightEvent {
    /// Free path before the collision.
    pub tau: f64,
    pub v_in: Direction,
    pub v_out: Direction,
    /// Impact parameter of the collision.
    pub b_in: f64,
    /// Memory variable `z = -s` of the previous collision; absent for the first.
    pub z_prev: Option<f64>,
    /// Collision position.
    pub x: Vec2,
}

impl EventRow for FlightEvent {
    const PARAMETER_COLUMN: &'static str = "z_prev";

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
        self.z_prev
    }
    fn scatterer(&self) -> Option<[i64; 2]> {
        None
    }
}

/// Sampler of the random flight process for a given scattering model.
#[derive(Debug, Clone, Default)]
pub struct FlightSampler<M = Specular> {
    model: M,
}

impl<M: ScatteringModel> FlightSampler<M> {
    pub fn new(model: M) -> Self {
        FlightSampler { model }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    fn turn(&self, v: Direction, w: f64) -> Direction {
        self.model
            .direction_from_impact(v, w)
            .expect("sampled impact parameters lie in (-1, 1)")
    }

    /// Memory variable `z = -s(v, v_prev)` for a particle that left its last
    /// collision with velocity `v` after arriving with `v_prev`.
    pub fn memory(&self, v_prev: Direction, v: Direction) -> Result<f64> {
        Ok(-self.model.exit_parameter(v, v_prev)?)
    }

    /// First collision from a generic initial point with velocity `v0`.
    pub fn sample_first<R: Rng + ?Sized>(&self, v0: Direction, rng: &mut R) -> Draw {
        let (xi, w) = sample_first_impact(rng);
        Draw {
            xi,
            w,
            v_next: self.turn(v0, w),
        }
    }

    /// Next collision of a particle moving with `v` whose last collision
    /// turned `v_prev` into `v`.
    pub fn sample_next<R: Rng + ?Sized>(
        &self,
        v_prev: Direction,
        v: Direction,
        rng: &mut R,
    ) -> Result<(Draw, f64)> {
        let z = self.memory(v_prev, v)?;
        let (xi, w) = sample_next_impact(z, rng);
        Ok((
            Draw {
                xi,
                w,
                v_next: self.turn(v, w),
            },
            z,
        ))
    }

    /// `n` collisions starting from `(x0, v0)`.
    pub fn simulate_flight<R: Rng + ?Sized>(
        &self,
        x0: Vec2,
        v0: Direction,
        n: usize,
        rng: &mut R,
    ) -> TrajectoryRecord<FlightEvent> {
        let mut events = Vec::with_capacity(n);
        let mut x = x0;
        let mut v = v0;
        let mut v_prev: Option<Direction> = None;
        for _ in 0..n {
            let (draw, z_prev) = match v_prev {
                None => (self.sample_first(v, rng), None),
                Some(vp) => {
                    let (d, z) = self
                        .sample_next(vp, v, rng)
                        .expect("consecutive velocities are admissible");
                    (d, Some(z))
                }
            };
            x = x + v.to_vec() * draw.xi;
            events.push(FlightEvent {
                tau: draw.xi,
                v_in: v,
                v_out: draw.v_next,
                b_in: draw.w,
                z_prev,
                x,
            });
            v_prev = Some(v);
            v = draw.v_next;
        }
        TrajectoryRecord {
            x0,
            v0,
            events,
            truncated: false,
        }
    }

    /// Runs the process for total path length `t` from `(x0, v0)` and returns
    /// the terminal position and velocity; the last flight is cut at `t`.
    pub fn transport<R: Rng + ?Sized>(
        &self,
        x0: Vec2,
        v0: Direction,
        t: f64,
        rng: &mut R,
    ) -> (Vec2, Direction) {
        let mut x = x0;
        let mut v = v0;
        let mut left = t;
        let mut v_prev: Option<Direction> = None;
        while left > 0.0 {
            let draw = match v_prev {
                None => self.sample_first(v, rng),
                Some(vp) => {
                    self.sample_next(vp, v, rng)
                        .expect("consecutive velocities are admissible")
                        .0
                }
            };
            if draw.xi >= left {
                x = x + v.to_vec() * left;
                break;
            }
            x = x + v.to_vec() * draw.xi;
            left -= draw.xi;
            v_prev = Some(v);
            v = draw.v_next;
        }
        (x, v)
    }
}

/// `samples` independent flights of `n` collisions from the origin with
/// uniformly distributed initial direction, over `workers` random streams.
pub fn simulate_flight_ensemble<M: ScatteringModel>(
    sampler: &FlightSampler<M>,
    n: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Vec<TrajectoryRecord<FlightEvent>> {
    run_streams(samples, workers, seed, |rng, _| {
        let v0 = Direction::from_angle(rng.random::<f64>() * TAU);
        sampler.simulate_flight(Vec2::ZERO, v0, n, rng)
    })
}

/// Cells of a box in position space times a uniform partition of the circle
/// of directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub lower: Vec2,
    pub upper: Vec2,
    pub nx: usize,
    pub ny: usize,
    pub nv: usize,
}

impl PhaseGrid {
    pub fn new(lower: Vec2, upper: Vec2, nx: usize, ny: usize, nv: usize) -> Result<Self> {
        if !(upper.x > lower.x && upper.y > lower.y) || nx == 0 || ny == 0 || nv == 0 {
            return Err(Error::Config("phase grid needs a non-empty box and cells".into()));
        }
        Ok(PhaseGrid {
            lower,
            upper,
            nx,
            ny,
            nv,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn widths(&self) -> (f64, f64, f64) {
        (
            (self.upper.x - self.lower.x) / self.nx as f64,
            (self.upper.y - self.lower.y) / self.ny as f64,
            TAU / self.nv as f64,
        )
    }

    /// Flat index of the cell containing `(x, v)`, if `x` lies in the box.
    pub fn index(&self, x: Vec2, v: Direction) -> Option<usize> {
        let (hx, hy, hv) = self.widths();
        let i = ((x.x - self.lower.x) / hx).floor();
        let j = ((x.y - self.lower.y) / hy).floor();
        if !(i >= 0.0 && j >= 0.0 && i < self.nx as f64 && j < self.ny as f64) {
            return None;
        }
        let k = ((v.angle() / hv).floor() as usize).min(self.nv - 1);
        Some((i as usize * self.ny + j as usize) * self.nv + k)
    }

    /// Lower corner of cell `idx` and the cell widths.
    pub fn cell(&self, idx: usize) -> (Vec2, f64, (f64, f64, f64)) {
        let (hx, hy, hv) = self.widths();
        let k = idx % self.nv;
        let j = (idx / self.nv) % self.ny;
        let i = idx / (self.nv * self.ny);
        (
            Vec2::new(self.lower.x + i as f64 * hx, self.lower.y + j as f64 * hy),
            k as f64 * hv,
            (hx, hy, hv),
        )
    }

    /// Centre of cell `idx`.
    pub fn center(&self, idx: usize) -> (Vec2, Direction) {
        let (corner, phi, (hx, hy, hv)) = self.cell(idx);
        (
            corner + Vec2::new(0.5 * hx, 0.5 * hy),
            Direction::from_angle(phi + 0.5 * hv),
        )
    }
}

/// Probability masses of the cells of a [`PhaseGrid`], plus the mass that
/// left the box.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDensity {
    pub grid: PhaseGrid,
    pub mass: Vec<f64>,
    pub outside: f64,
}

impl PhaseDensity {
    /// Discretizes a non-negative density by its values at cell centres,
    /// normalized to total mass one.
    pub fn from_fn<F: Fn(Vec2, Direction) -> f64>(grid: PhaseGrid, f: F) -> Result<Self> {
        let mut mass = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let (x, v) = grid.center(idx);
            let m = f(x, v);
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::Config(format!("initial density is {m} at cell {idx}")));
            }
            mass.push(m);
        }
        let total: f64 = mass.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        mass.iter_mut().for_each(|m| *m /= total);
        Ok(PhaseDensity {
            grid,
            mass,
            outside: 0.0,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum::<f64>() + self.outside
    }
}

/// Particle solution of the kinetic equation of the limiting process: draws
/// `samples` particles from `f0` (uniform within cells), transports each for
/// time `t` and histograms the terminal states with counting weights `1/samples`.
pub fn evolve_density<M: ScatteringModel>(
    sampler: &FlightSampler<M>,
    f0: &PhaseDensity,
    t: f64,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<PhaseDensity> {
    crate::error::check_domain(t >= 0.0, "t", t, "t >= 0")?;
    if samples == 0 {
        return Err(Error::EmptySample);
    }
    let grid = f0.grid;
    let mut cumulative = Vec::with_capacity(f0.mass.len());
    let mut acc = 0.0;
    for m in &f0.mass {
        acc += m;
        cumulative.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::ZeroMass);
    }
    let terminal = run_streams(samples, workers, seed, |rng, _| {
        let u = rng.random::<f64>() * acc;
        let idx = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        let (corner, phi0, (hx, hy, hv)) = grid.cell(idx);
        let x = corner + Vec2::new(rng.random::<f64>() * hx, rng.random::<f64>() * hy);
        let v = Direction::from_angle(phi0 + rng.random::<f64>() * hv);
        let (x, v) = sampler.transport(x, v, t, rng);
        grid.index(x, v)
    });
    let mut counts = vec![0usize; grid.len()];
    let mut outside = 0usize;
    for cell in terminal {
        match cell {
            Some(i) => counts[i] += 1,
            None => outside += 1,
        }
    }
    let n = samples as f64;
    Ok(PhaseDensity {
        grid,
        mass: counts.iter().map(|&c| c as f64 / n).collect(),
        outside: outside as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{fpl_between, fpl_generic, fpl_lattice};
    use crate::quadrature::{integrate_value, IntegrationSpec};
    use crate::streams::worker_rng;

    #[test]
    fn envelopes_dominate_kernels() {
        for i in 1..=400 {
            let xi = 0.005 * i as f64 * (1.0 + 0.05 * i as f64);
            for j in 0..=200 {
                let w = -0.999 + 1.998 * j as f64 / 200.0;
                let p = phi(xi, w).unwrap();
                assert!(p <= (FIRST_ENVELOPE / xi).min(1.0) + 1e-14, "phi({xi},{w})");
                for k in 0..=20 {
                    let z = -0.999 + 1.998 * k as f64 / 20.0;
                    let p0 = phi0(xi, w, z).unwrap();
                    assert!(p0 <= SIX_OVER_PI2 * xi.recip().min(1.0) + 1e-14);
                }
            }
        }
        // the first-kernel bound is nearly tight at ξ = π²/24
        let xi = std::f64::consts::PI.powi(2) / 24.0;
        assert!((xi * phi(xi, 0.1).unwrap() - std::f64::consts::PI.powi(2) / 48.0).abs() < 1e-12);
    }

    #[test]
    fn draws_stay_in_support() {
        let mut rng = worker_rng(1, 0);
        for _ in 0..20_000 {
            let (xi, w) = sample_first_impact(&mut rng);
            assert!(w.abs() < 1.0 && xi > 0.0 && xi < 1.0 / (1.0 - w.abs()));
        }
        for &z in &[-0.99, -0.3, 0.0, 0.5, 0.999999] {
            for _ in 0..5_000 {
                let (xi, w) = sample_next_impact(z, &mut rng);
                assert!(w.abs() < 1.0 && xi > 0.0 && xi <= support_xi_max(w, z));
                assert!(phi0(xi, w, z).unwrap() > 0.0);
            }
        }
    }

    fn mean_of<F: Fn(f64) -> f64>(pdf: F, cap: f64) -> f64 {
        let spec = IntegrationSpec::new(0.0, cap).breakpoints([0.5, 1.0, 2.0, 4.0]).abs_tol(1e-11);
        integrate_value(|x| x * pdf(x), &spec).unwrap()
    }

    #[test]
    fn first_flight_truncated_mean() {
        // τ₁ has an infinite mean, so compare E[min(ξ, 4)]
        let mut rng = worker_rng(2, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_first_impact(&mut rng).0.min(4.0)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let tail = {
            let spec = IntegrationSpec::new(0.0, 4.0).breakpoints([0.5, 1.0, 2.0]).abs_tol(1e-12);
            1.0 - integrate_value(|x| fpl_generic(x).unwrap(), &spec).unwrap()
        };
        let expect = mean_of(|x| fpl_generic(x).unwrap(), 4.0) + 4.0 * tail;
        assert!((mean - expect).abs() < 4.0 * (var / n as f64).sqrt(), "{mean} vs {expect}");
    }

    #[test]
    fn stationary_memory_gives_between_law() {
        // with z ~ U(-1, 1) the free path density is ½∫∫Φ₀ dw dz
        let mut rng = worker_rng(3, 0);
        let n = 200_000;
        let mut below = 0usize;
        for _ in 0..n {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            if sample_next_impact(z, &mut rng).0 <= 1.0 {
                below += 1;
            }
        }
        let spec = IntegrationSpec::new(0.0, 1.0).breakpoints([0.5]).abs_tol(1e-12);
        let p = integrate_value(|x| fpl_between(x).unwrap(), &spec).unwrap();
        let frac = below as f64 / n as f64;
        assert!((frac - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{frac} vs {p}");
    }

    #[test]
    fn head_on_memory_gives_lattice_law_in_xi() {
        // Φ₀(ξ, w, 0) integrated over w has the same law as fpl_lattice in ξ:
        // Φ₀ is symmetric under w ↔ z, so ∫ Φ₀(ξ,w,0) dw = ∫ Φ₀(ξ,0,z) dz
        let mut rng = worker_rng(4, 0);
        let n = 100_000;
        let mut below = 0usize;
        for _ in 0..n {
            if sample_next_impact(0.0, &mut rng).0 <= 0.75 {
                below += 1;
            }
        }
        let spec = IntegrationSpec::new(0.0, 0.75).breakpoints([0.5]).abs_tol(1e-12);
        let p = integrate_value(|x| fpl_lattice(x).unwrap(), &spec).unwrap();
        let frac = below as f64 / n as f64;
        assert!((frac - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn acceptance_rate_recovers_unit_mass() {
        // envelope mass over w ∈ (-1, 1) is 2 (6/π²)(1 + log X); accepted
        // fraction times that estimates ∫∫Φ₀ = 1
        let mut rng = worker_rng(12, 0);
        for &z in &[-0.9f64, -0.2, 0.0, 0.6] {
            let log_span = -(1.0 - z.abs()).ln();
            let tries = 400_000;
            let mut hits = 0usize;
            for _ in 0..tries {
                let w = 2.0 * rng.random::<f64>() - 1.0;
                let xi = propose_xi(&mut rng, log_span);
                if accept_next(&mut rng, xi, w, z) {
                    hits += 1;
                }
            }
            let mass = hits as f64 / tries as f64 * 2.0 * SIX_OVER_PI2 * (1.0 + log_span);
            assert!((mass - 1.0).abs() < 0.01, "z = {z}: {mass}");
        }
    }

    #[test]
    fn flights_are_reproducible() {
        let s = FlightSampler::new(Specular);
        let a = s.simulate_flight(Vec2::ZERO, Direction::E1, 50, &mut worker_rng(9, 0));
        let b = s.simulate_flight(Vec2::ZERO, Direction::E1, 50, &mut worker_rng(9, 0));
        assert_eq!(a, b);
        assert_eq!(a.events.len(), 50);
        assert!(a.events[0].z_prev.is_none());
        assert!(a.events[1..].iter().all(|e| e.z_prev.is_some()));
        // positions follow the recorded flights
        let mut x = a.x0;
        let mut v = a.v0;
        for e in &a.events {
            assert_eq!(e.v_in, v);
            x = x + v.to_vec() * e.tau;
            assert!((x - e.x).norm() < 1e-12);
            v = e.v_out;
        }
    }

    #[test]
    fn one_step_is_a_first_draw() {
        let s = FlightSampler::new(Specular);
        let rec = s.simulate_flight(Vec2::ZERO, Direction::E2, 1, &mut worker_rng(5, 0));
        let d = s.sample_first(Direction::E2, &mut worker_rng(5, 0));
        assert_eq!(rec.events[0].tau, d.xi);
        assert_eq!(rec.events[0].v_out, d.v_next);
    }

    #[test]
    fn memory_matches_recorded_impact_for_specular() {
        // specular reflection: exit parameter equals impact parameter, z = -b
        let s = FlightSampler::new(Specular);
        let rec = s.simulate_flight(Vec2::ZERO, Direction::E1, 200, &mut worker_rng(6, 0));
        for pair in rec.events.windows(2) {
            let z = pair[1].z_prev.unwrap();
            assert!((z + pair[0].b_in).abs() < 1e-9, "{z} vs {}", pair[0].b_in);
        }
    }

    fn box_grid() -> PhaseGrid {
        PhaseGrid::new(Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0), 8, 8, 4).unwrap()
    }

    fn bump(x: Vec2, _v: Direction) -> f64 {
        if x.norm() < 1.0 {
            1.0
        } else {
            0.0
        }
    }

    #[test]
    fn zero_time_returns_initial_density() {
        let f0 = PhaseDensity::from_fn(box_grid(), bump).unwrap();
        let ft = evolve_density(&FlightSampler::new(Specular), &f0, 0.0, 100_000, 1, 2).unwrap();
        assert_eq!(ft.outside, 0.0);
        assert!((ft.total_mass() - 1.0).abs() < 1e-12);
        for (a, b) in f0.mass.iter().zip(&ft.mass) {
            assert!((a - b).abs() < 4.0 * (a.max(1e-5) / 100_000.0).sqrt());
        }
    }

    #[test]
    fn mass_is_conserved() {
        let f0 = PhaseDensity::from_fn(box_grid(), bump).unwrap();
        let s = FlightSampler::new(Specular);
        for t in [0.3, 2.0, 5.0] {
            let ft = evolve_density(&s, &f0, t, 20_000, 3, 3).unwrap();
            assert!((ft.total_mass() - 1.0).abs() < 1e-12);
        }
        let far = evolve_density(&s, &f0, 50.0, 5_000, 3, 1).unwrap();
        assert!(far.outside > 0.5);
    }

    #[test]
    fn short_times_are_ballistic() {
        // a single occupied cell moving along e₁ for t = 0.01: collisions have
        // probability about t, so almost all mass shifts by t·v
        let grid = PhaseGrid::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), 10, 1, 8).unwrap();
        let f0 = PhaseDensity::from_fn(grid, |x, v| {
            if x.x < 0.1 && v.angle() < TAU / 8.0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let t = 0.01;
        let ft = evolve_density(&FlightSampler::new(Specular), &f0, t, 100_000, 8, 1).unwrap();
        // the moving strip [0, 0.1) advances by at most t·cos φ ≤ t in x
        let stay = ft.grid.index(Vec2::new(0.05, 0.5), Direction::from_angle(0.3)).unwrap();
        let next = ft.grid.index(Vec2::new(0.15, 0.5), Direction::from_angle(0.3)).unwrap();
        let moved = ft.mass[next];
        // fraction crossing x = 0.1 under free transport: E[t cos φ]/0.1
        let phi_max = TAU / 8.0;
        let expect = t * phi_max.sin() / phi_max / 0.1;
        let free = ft.mass[stay] + moved;
        assert!(free > 1.0 - 2.0 * 2.0 * t, "collided mass too large: {free}");
        assert!((moved - expect).abs() < 0.01, "{moved} vs {expect}");
    }
}
