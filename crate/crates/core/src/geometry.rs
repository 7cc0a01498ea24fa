//! Directions on the unit circle and the scattering-map formalism.
//!
//! A scatterer is the unit disk in boundary coordinates `(v, w)`: `v` is the
//! particle velocity and `w` the point of the boundary it touches. Incoming
//! data satisfies `v . w < 0`, outgoing data `v . w > 0`. A scattering map
//! `Θ` sends incoming to outgoing data. For fixed `v` the outgoing velocities
//! reachable from `v` form the admissible cone `V_v`, the set of `u` whose
//! counter-clockwise angle from `v` lies in `(B_Θ, 2π - B_Θ)`.
//!
//! Directions are stored as angles so that relative angles stay exact up to
//! one rounding, no matter how many collisions a trajectory has gone through.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Plain Cartesian pair used for positions and on-demand velocity views.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Unit vector on S¹, stored by its angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Direction {
    phi: f64,
}

fn wrap_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl Direction {
    pub const E1: Direction = Direction { phi: 0.0 };
    pub const E2: Direction = Direction { phi: FRAC_PI_2 };

    pub fn from_angle(phi: f64) -> Self {
        Direction {
            phi: wrap_angle(phi),
        }
    }

    /// Direction of a non-zero vector.
    pub fn from_vec(v: Vec2) -> Self {
        Direction::from_angle(v.y.atan2(v.x))
    }

    pub fn angle(self) -> f64 {
        self.phi
    }

    pub fn to_vec(self) -> Vec2 {
        let (s, c) = self.phi.sin_cos();
        Vec2::new(c, s)
    }

    /// Counter-clockwise rotation by `alpha`.
    pub fn rotated(self, alpha: f64) -> Self {
        Direction::from_angle(self.phi + alpha)
    }

    pub fn reversed(self) -> Self {
        self.rotated(PI)
    }

    /// `v` rotated by +π/2; the `e₂` axis of the frame in which `v = e₁`.
    pub fn perp(self) -> Self {
        self.rotated(FRAC_PI_2)
    }

    pub fn dot(self, other: Direction) -> f64 {
        (other.phi - self.phi).cos()
    }
}

/// Angle measured counter-clockwise from `v` to `u`, in `[0, 2π)`.
pub fn angle_between(v: Direction, u: Direction) -> f64 {
    wrap_angle(u.phi - v.phi)
}

/// 2×2 matrix acting on row vectors, `x ↦ x K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation2 {
    pub m: [[f64; 2]; 2],
}

impl Rotation2 {
    pub fn apply(&self, x: Vec2) -> Vec2 {
        Vec2::new(
            x.x * self.m[0][0] + x.y * self.m[1][0],
            x.x * self.m[0][1] + x.y * self.m[1][1],
        )
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
}

/// The rotation `K(v)` with `v K(v) = e₁`.
pub fn rotation_to_e1(v: Direction) -> Rotation2 {
    let (s, c) = v.angle().sin_cos();
    Rotation2 {
        m: [[c, -s], [s, c]],
    }
}

/// Specular reflection `(v, w) ↦ (v - 2(v·w)w, w)` of incoming boundary data.
pub fn specular_reflect(v: Direction, w: Direction) -> Result<(Direction, Direction)> {
    let dot = v.dot(w);
    if dot >= 0.0 {
        return Err(Error::NotIncoming { dot });
    }
    // mirror image of v in the tangent line at w, reversed
    Ok((Direction::from_angle(PI + 2.0 * w.angle() - v.angle()), w))
}

fn cone_check(cutoff: f64, theta: f64) -> Result<()> {
    if theta > cutoff && theta < TAU - cutoff {
        Ok(())
    } else {
        Err(Error::NotAdmissible {
            angle: theta,
            cutoff,
        })
    }
}

/// Finite-difference step used for cross sections of models without a closed form.
pub const CROSS_SECTION_STEP: f64 = 1e-6;

/// A spherically symmetric scattering map on the unit disk.
///
/// Implementors supply `Θ` and its inverse `β⁻`; every derived quantity
/// (impact and exit parameters, cross section, inverse of the impact
/// parameter) has a generic default built on those two.
pub trait ScatteringModel: Send + Sync {
    /// The cutoff angle `B_Θ ∈ [0, π)`.
    fn cutoff_angle(&self) -> f64;

    /// The scattering map `Θ(v⁻, w⁻) = (v⁺, w⁺)` on incoming data.
    fn scatter(&self, v: Direction, w: Direction) -> Result<(Direction, Direction)>;

    /// `β⁻_v(u)`: the incoming boundary point that sends `v` to `u`.
    fn beta_minus(&self, v: Direction, u: Direction) -> Result<Direction>;

    /// `β⁺_v(u) = Θ₂(v, β⁻_v(u))`: the corresponding outgoing boundary point.
    fn beta_plus(&self, v: Direction, u: Direction) -> Result<Direction> {
        let w = self.beta_minus(v, u)?;
        Ok(self.scatter(v, w)?.1)
    }

    /// `u ∈ V_v`.
    fn is_admissible(&self, v: Direction, u: Direction) -> bool {
        let b = self.cutoff_angle();
        let theta = angle_between(v, u);
        theta > b && theta < TAU - b
    }

    /// `b(ϑ)` as a function of the deflection angle `ϑ = φ(v, u)`.
    fn impact_at(&self, theta: f64) -> Result<f64> {
        cone_check(self.cutoff_angle(), theta)?;
        let w = self.beta_minus(Direction::E1, Direction::from_angle(theta))?;
        Ok(w.angle().sin())
    }

    /// Impact parameter `b(v, u) = β⁻_{e₁}(u K(v)) · e₂`.
    fn impact_parameter(&self, v: Direction, u: Direction) -> Result<f64> {
        self.impact_at(angle_between(v, u))
    }

    /// Exit parameter `s(u, v) = β⁺_{v K(u)}(e₁) · e₂` for a collision with
    /// incoming velocity `v` and outgoing velocity `u`.
    fn exit_parameter(&self, u: Direction, v: Direction) -> Result<f64> {
        let theta = angle_between(u, v);
        cone_check(self.cutoff_angle(), theta)?;
        let w = self.beta_plus(Direction::from_angle(theta), Direction::E1)?;
        Ok(w.angle().sin())
    }

    /// Cross section `σ(ϑ) = |b′(ϑ)|`, here by central difference.
    fn cross_section(&self, theta: f64) -> Result<f64> {
        let cutoff = self.cutoff_angle();
        cone_check(cutoff, theta)?;
        let h = CROSS_SECTION_STEP;
        let lo = (theta - h).max(cutoff + 0.5 * (theta - cutoff));
        let hi = (theta + h).min(TAU - cutoff - 0.5 * (TAU - cutoff - theta));
        Ok(((self.impact_at(hi)? - self.impact_at(lo)?) / (hi - lo)).abs())
    }

    /// The outgoing velocity `u ∈ V_v` with `b(v, u) = b`.
    ///
    /// `b` is a signed coordinate on the whole cone (`w ↦ Θ₁(v, w)` is a
    /// diffeomorphism and `b = w · e₂` in the frame of `v`), so the preimage
    /// is unique. The default inverts `b(ϑ)` by bisection.
    fn direction_from_impact(&self, v: Direction, b: f64) -> Result<Direction> {
        crate::error::check_domain(b > -1.0 && b < 1.0, "b", b, "-1 < b < 1")?;
        let cutoff = self.cutoff_angle();
        let mut lo = cutoff;
        let mut hi = TAU - cutoff;
        // orientation of b along the cone, from a probe at each end
        let span = hi - lo;
        let increasing =
            self.impact_at(lo + 1e-3 * span)? < self.impact_at(hi - 1e-3 * span)?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let bm = self.impact_at(mid)?;
            if (bm < b) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(v.rotated(0.5 * (lo + hi)))
    }
}

/// Specular reflection on the disk, the original Lorentz gas.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Specular;

impl ScatteringModel for Specular {
    fn cutoff_angle(&self) -> f64 {
        0.0
    }

    fn scatter(&self, v: Direction, w: Direction) -> Result<(Direction, Direction)> {
        specular_reflect(v, w)
    }

    fn beta_minus(&self, v: Direction, u: Direction) -> Result<Direction> {
        let theta = angle_between(v, u);
        cone_check(0.0, theta)?;
        // w = (u - v)/|u - v|
        Ok(v.rotated(FRAC_PI_2 + 0.5 * theta))
    }

    fn beta_plus(&self, v: Direction, u: Direction) -> Result<Direction> {
        self.beta_minus(v, u)
    }

    fn impact_at(&self, theta: f64) -> Result<f64> {
        cone_check(0.0, theta)?;
        Ok((0.5 * theta).cos())
    }

    fn exit_parameter(&self, u: Direction, v: Direction) -> Result<f64> {
        let theta = angle_between(u, v);
        cone_check(0.0, theta)?;
        Ok(-(0.5 * theta).cos())
    }

    fn cross_section(&self, theta: f64) -> Result<f64> {
        cone_check(0.0, theta)?;
        Ok(0.5 * (0.5 * theta).sin().abs())
    }

    fn direction_from_impact(&self, v: Direction, b: f64) -> Result<Direction> {
        crate::error::check_domain(b > -1.0 && b < 1.0, "b", b, "-1 < b < 1")?;
        Ok(v.rotated(2.0 * b.acos()))
    }
}

/// Reflection with the deflection angle scaled towards straight-through
/// motion: the specular deflection `ϑ_s(b)` becomes `π + λ (ϑ_s(b) - π)`.
///
/// Spherically symmetric, `C¹`, maps head-on collisions to reversal, and has
/// cutoff `B_Θ = π (1 - λ)`. The outgoing boundary point is the bisector
/// `(v⁺ - v⁻)/|v⁺ - v⁻|`. `λ = 1` is specular reflection. Only `Θ` and `β⁻`
/// are provided, so the cross section comes from finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledReflection {
    lambda: f64,
}

impl ScaledReflection {
    pub fn new(lambda: f64) -> Result<Self> {
        crate::error::check_domain(
            lambda > 0.0 && lambda <= 1.0,
            "lambda",
            lambda,
            "0 < lambda <= 1",
        )?;
        Ok(ScaledReflection { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl ScatteringModel for ScaledReflection {
    fn cutoff_angle(&self) -> f64 {
        PI * (1.0 - self.lambda)
    }

    fn scatter(&self, v: Direction, w: Direction) -> Result<(Direction, Direction)> {
        let dot = v.dot(w);
        if dot >= 0.0 {
            return Err(Error::NotIncoming { dot });
        }
        let alpha = angle_between(v, w);
        let theta = PI + self.lambda * (2.0 * alpha - TAU);
        Ok((v.rotated(theta), v.rotated(FRAC_PI_2 + 0.5 * theta)))
    }

    fn beta_minus(&self, v: Direction, u: Direction) -> Result<Direction> {
        let theta = angle_between(v, u);
        cone_check(self.cutoff_angle(), theta)?;
        let specular_theta = PI + (theta - PI) / self.lambda;
        Ok(v.rotated(FRAC_PI_2 + 0.5 * specular_theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn angle_between_quarter_turns() {
        assert!((angle_between(Direction::E1, Direction::E2) - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(angle_between(Direction::E2, Direction::E2), 0.0);
        assert!((angle_between(Direction::E2, Direction::E1) - 3.0 * FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn rotation_to_e1_cases() {
        let k = rotation_to_e1(Direction::E1);
        assert_eq!(k.m, [[1.0, 0.0], [0.0, 1.0]]);
        for v in [Direction::E2, Direction::E1.reversed(), Direction::from_angle(1.234)] {
            let k = rotation_to_e1(v);
            let img = k.apply(v.to_vec());
            assert!((img.x - 1.0).abs() < 1e-12 && img.y.abs() < 1e-12);
            assert!((k.determinant() - 1.0).abs() < 1e-12);
        }
        let k = rotation_to_e1(Direction::E1.reversed());
        assert!((k.m[0][0] + 1.0).abs() < 1e-12 && (k.m[1][1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn specular_examples() {
        let (vp, wp) = specular_reflect(Direction::E1, Direction::E1.reversed()).unwrap();
        assert!(angle_between(vp, Direction::E1.reversed()) < 1e-12);
        assert_eq!(wp, Direction::E1.reversed());

        let w = Direction::from_vec(Vec2::new(-SQRT_2 / 2.0, SQRT_2 / 2.0));
        let (vp, _) = specular_reflect(Direction::E1, w).unwrap();
        // direct evaluation of v - 2(v.w)w
        let v = Direction::E1.to_vec();
        let wv = w.to_vec();
        let expect = v - wv * (2.0 * v.dot(wv));
        assert!((vp.to_vec() - expect).norm() < 1e-12);
        assert!((vp.to_vec() - Direction::E2.to_vec()).norm() < 1e-12);

        let (vp, _) = specular_reflect(Direction::E2, Direction::E2.reversed()).unwrap();
        assert!((vp.to_vec() + Direction::E2.to_vec()).norm() < 1e-12);

        assert!(matches!(
            specular_reflect(Direction::E1, Direction::E2),
            Err(Error::NotIncoming { .. })
        ));
    }

    #[test]
    fn specular_impact_exit_cross_section() {
        let m = Specular;
        let v = Direction::from_angle(0.3);
        assert!(m.impact_parameter(v, v.rotated(PI)).unwrap().abs() < 1e-15);
        assert!((m.impact_parameter(v, v.rotated(FRAC_PI_2)).unwrap() - SQRT_2 / 2.0).abs() < 1e-12);
        assert!(m.impact_at(1e-9).unwrap() > 1.0 - 1e-15);
        assert!(m.impact_parameter(v, v).is_err());

        assert!(m.exit_parameter(v, v.rotated(PI)).unwrap().abs() < 1e-15);
        assert!((m.exit_parameter(v, v.rotated(FRAC_PI_2)).unwrap() + SQRT_2 / 2.0).abs() < 1e-12);

        assert!((m.cross_section(PI).unwrap() - 0.5).abs() < 1e-15);
        assert!(m.cross_section(1e-9).unwrap() < 1e-9);
        assert!(m.cross_section(0.0).is_err());
        assert!(m.cross_section(TAU).is_err());
    }

    #[test]
    fn specular_consistency_grid() {
        let m = Specular;
        let generic = ScaledReflection::new(1.0).unwrap();
        for i in 1..1000 {
            let theta = TAU * i as f64 / 1000.0;
            let b = m.impact_at(theta).unwrap();
            assert!((b - (0.5 * theta).cos()).abs() < 1e-12);
            // the trait defaults, evaluated through beta_minus, agree
            assert!((generic.impact_at(theta).unwrap() - b).abs() < 1e-12);
            let v = Direction::from_angle(0.1 * i as f64);
            let u = v.rotated(theta);
            let s = m.exit_parameter(u, v).unwrap();
            assert!((s + (0.5 * (TAU - theta)).cos()).abs() < 1e-12);
            assert!((generic.exit_parameter(u, v).unwrap() - s).abs() < 1e-12);
            // s(ϑ) = -b(ϑ) at equal arguments
            let s_same = m.exit_parameter(v, v.rotated(theta)).unwrap();
            assert!((s_same + b).abs() < 1e-12);
            assert!((m.cross_section(theta).unwrap() - 0.5 * (0.5 * theta).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn total_cross_section_is_diameter() {
        // midpoint rule on a smooth integrand
        let n = 20000;
        let h = TAU / n as f64;
        let total: f64 = (0..n)
            .map(|i| Specular.cross_section((i as f64 + 0.5) * h).unwrap() * h)
            .sum();
        assert!((total - 2.0).abs() < 1e-8);
    }

    #[test]
    fn direction_from_impact_examples() {
        let m = Specular;
        let u = m.direction_from_impact(Direction::E1, 0.0).unwrap();
        assert!((u.to_vec() + Direction::E1.to_vec()).norm() < 1e-12);
        let u = m.direction_from_impact(Direction::E1, SQRT_2 / 2.0).unwrap();
        assert!((u.to_vec() - Direction::E2.to_vec()).norm() < 1e-12);
        assert!(m.direction_from_impact(Direction::E1, 1.0).is_err());

        let v = Direction::from_angle(2.0);
        for i in 0..100 {
            let b = -0.99 + 1.98 * i as f64 / 99.0;
            let u = m.direction_from_impact(v, b).unwrap();
            assert!((m.impact_parameter(v, u).unwrap() - b).abs() < 1e-10);
            let g = ScaledReflection::new(0.6).unwrap();
            let u = g.direction_from_impact(v, b).unwrap();
            assert!((g.impact_parameter(v, u).unwrap() - b).abs() < 1e-10);
        }
    }

    #[test]
    fn generic_cross_section_matches_closed_form() {
        let lambda = 0.7;
        let g = ScaledReflection::new(lambda).unwrap();
        // b(ϑ) = cos((π + (ϑ-π)/λ)/2), so σ = |sin(..)|/(2λ)
        for i in 1..50 {
            let theta = g.cutoff_angle() + (TAU - 2.0 * g.cutoff_angle()) * i as f64 / 50.0;
            let exact = (0.5 * (PI + (theta - PI) / lambda)).sin().abs() / (2.0 * lambda);
            assert!((g.cross_section(theta).unwrap() - exact).abs() < 1e-7);
        }
        assert!(g.cross_section(0.5 * g.cutoff_angle()).is_err());
    }

    #[test]
    fn generic_head_on_reverses() {
        let g = ScaledReflection::new(0.4).unwrap();
        let v = Direction::from_angle(0.9);
        let (vp, wp) = g.scatter(v, v.reversed()).unwrap();
        assert!((vp.to_vec() + v.to_vec()).norm() < 1e-12);
        assert!(vp.dot(wp) > 0.0);
    }

    fn arb_pair() -> impl Strategy<Value = (f64, f64)> {
        (0.0..TAU, 1e-6..(TAU - 1e-6))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn beta_round_trip(pair in arb_pair()) {
            let (phi, theta) = pair;
            let v = Direction::from_angle(phi);
            let u = v.rotated(theta);
            for model in [&Specular as &dyn ScatteringModel, &ScaledReflection::new(1.0).unwrap()] {
                let w = model.beta_minus(v, u).unwrap();
                prop_assert!(v.dot(w) < 0.0);
                let (vp, wp) = model.scatter(v, w).unwrap();
                prop_assert!((vp.to_vec() - u.to_vec()).norm() < 1e-10);
                prop_assert!(vp.dot(wp) > 0.0);
                let bp = model.beta_plus(v, u).unwrap();
                prop_assert!((bp.to_vec() - wp.to_vec()).norm() < 1e-12);
            }
        }

        #[test]
        fn impact_is_rotation_invariant(pair in arb_pair(), k in 0.0..TAU, mirror in any::<bool>()) {
            let (phi, theta) = pair;
            let v = Direction::from_angle(phi);
            let u = v.rotated(theta);
            let act = |d: Direction| {
                let a = if mirror { -d.angle() } else { d.angle() };
                Direction::from_angle(a + k)
            };
            let b = Specular.impact_parameter(v, u).unwrap();
            let bk = Specular.impact_parameter(act(v), act(u)).unwrap();
            prop_assert!((b.abs() - bk.abs()).abs() < 1e-10);
        }

        #[test]
        fn cartesian_view_has_unit_norm(phi in -100.0..100.0f64) {
            let d = Direction::from_angle(phi);
            prop_assert!(d.angle() >= 0.0 && d.angle() < TAU);
            prop_assert!((d.to_vec().norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn angle_between_antisymmetry(a in 0.0..TAU, b in 0.0..TAU) {
            let v = Direction::from_angle(a);
            let u = Direction::from_angle(b);
            let s = angle_between(v, u) + angle_between(u, v);
            prop_assert!(s.abs() < 1e-12 || (s - TAU).abs() < 1e-12);
        }

        #[test]
        fn generic_model_is_spherically_symmetric(phi in 0.0..TAU, alpha in 1.6..4.6f64, k in 0.0..TAU) {
            let g = ScaledReflection::new(0.5).unwrap();
            let v = Direction::from_angle(phi);
            let w = v.rotated(alpha);
            let (vp, wp) = g.scatter(v, w).unwrap();
            // reflection x -> (x, -y) followed by rotation k
            let act = |d: Direction| Direction::from_angle(k - d.angle());
            let (vk, wk) = g.scatter(act(v), act(w)).unwrap();
            prop_assert!((vk.to_vec() - act(vp).to_vec()).norm() < 1e-10);
            prop_assert!((wk.to_vec() - act(wp).to_vec()).norm() < 1e-10);
        }
    }
}
