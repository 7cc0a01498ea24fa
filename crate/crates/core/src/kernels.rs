//! Closed-form collision kernels of the two-dimensional periodic Lorentz gas
//! in the Boltzmann–Grad limit.
//!
//! Notation: `ξ` is the (macroscopic) free path length to the next
//! collision, `w = b(v, v₊)` the impact parameter of that collision and
//! `z = -s(v, v₀)` minus the exit parameter of the previous one.
//!
//! * `Φ₀(ξ, w, z)` is the joint density of `(ξ, w)` given `z`;
//! * `∫ Φ₀ dz` has the elementary closed form [`phi0_inner`];
//! * `Φ(ξ, w) = ∫_ξ^∞ ∫ Φ₀ dz dη` ([`phi`]) is the density of `(ξ, w)` for a
//!   particle started at a generic point;
//! * the collision kernels multiply these by the cross section `σ(v, v₊)`.

use std::f64::consts::PI;

use crate::error::{check_domain, Result};
use crate::geometry::{angle_between, Direction, ScatteringModel};
use crate::quadrature::{integrate_value, IntegrationSpec};

pub use crate::special::dilog;

/// `6/π²`, the supremum of `Φ₀`.
pub const SIX_OVER_PI2: f64 = 6.0 / (PI * PI);
const PI2_6: f64 = PI * PI / 6.0;

/// `|w + z|` at or below this value takes the degenerate branch of `Φ₀`.
pub const DEGENERATE_EPS: f64 = 1e-12;

/// `|w|` above `1 - BOUNDARY_EPS` is evaluated with the `|w| = 1` extension of `Φ`.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// Arguments of `Φ₀`, validated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub xi: f64,
    pub w: f64,
    pub z: f64,
}

impl KernelPoint {
    pub fn new(xi: f64, w: f64, z: f64) -> Result<Self> {
        check_domain(xi > 0.0, "xi", xi, "xi > 0")?;
        check_domain(w.abs() < 1.0, "w", w, "|w| < 1")?;
        check_domain(z.abs() < 1.0, "z", z, "|z| < 1")?;
        Ok(KernelPoint { xi, w, z })
    }

    pub fn asymptotic_vars(&self) -> AsymptoticVars {
        AsymptoticVars {
            u: self.xi * (1.0 - self.w.abs()),
            y: self.xi * (1.0 - self.z.abs()),
        }
    }
}

/// Rescaled distances to the edge of the impact-parameter range, used by the
/// large-`ξ` expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticVars {
    pub u: f64,
    pub y: f64,
}

/// `Υ(x)`: `x` clamped to `[0, 1]`.
pub fn upsilon(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 1.0 {
        x
    } else {
        1.0
    }
}

fn phi0_unchecked(xi: f64, w: f64, z: f64) -> f64 {
    let s = (w + z).abs();
    let inv = xi.recip();
    if s <= DEGENERATE_EPS {
        if inv < 1.0 + w.abs() {
            0.0
        } else {
            SIX_OVER_PI2
        }
    } else {
        let m = w.abs().max(z.abs());
        SIX_OVER_PI2 * upsilon(1.0 + (inv - m - 1.0) / s)
    }
}

/// `Φ₀(ξ, w, z)`, the conditional density of the next free path and impact
/// parameter given the previous exit parameter.
pub fn phi0(xi: f64, w: f64, z: f64) -> Result<f64> {
    let p = KernelPoint::new(xi, w, z)?;
    Ok(phi0_unchecked(p.xi, p.w, p.z))
}

/// Upper end of the `ξ`-support of `Φ₀(·, w, z)`; `+∞` if unbounded.
pub fn support_xi_max(w: f64, z: f64) -> f64 {
    let s = (w + z).abs();
    if s <= DEGENERATE_EPS {
        return 1.0 / (1.0 + w.abs());
    }
    let denom = 1.0 + w.abs().max(z.abs()) - s;
    if denom > 0.0 {
        1.0 / denom
    } else {
        f64::INFINITY
    }
}

// x log(c / x), continuous at x = 0
fn xlog_ratio(x: f64, c: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (c / x).ln()
    }
}

/// `∫_{-1}^{1} Φ₀(ξ, w, z) dz` in closed form.
pub fn phi0_inner(xi: f64, w: f64) -> Result<f64> {
    check_domain(xi > 0.0, "xi", xi, "xi > 0")?;
    check_domain(w.abs() < 1.0, "w", w, "|w| < 1")?;
    Ok(inner_unchecked(xi, w.abs()))
}

fn inner_unchecked(xi: f64, aw: f64) -> f64 {
    let inv = xi.recip();
    if xi <= 0.5 {
        2.0 * SIX_OVER_PI2
    } else if inv > 1.0 + aw {
        let a = inv - 1.0;
        SIX_OVER_PI2
            * (2.0 * a + xlog_ratio(a + aw, 1.0 + aw) + xlog_ratio(a - aw, 1.0 - aw))
    } else if inv > 1.0 - aw {
        // p (1 + log((1+|w|)/(2|w|))) + q log(2|w|/(-q)) with p = ξ⁻¹ - 1 + |w|,
        // q = p - 2|w|, rearranged so that no O(p) terms cancel
        let d = 1.0 - aw;
        let p = inv - d;
        let r = p / (2.0 * aw);
        SIX_OVER_PI2 * (p * (d / (2.0 * aw)).ln_1p() + 2.0 * aw * one_minus_log(r))
    } else {
        0.0
    }
}

// (1 - r) log(1 - r) + r = Σ_{k≥2} r^k / (k (k - 1)) for 0 ≤ r ≤ 1
fn one_minus_log(r: f64) -> f64 {
    if r >= 1.0 {
        return 1.0;
    }
    if r > 0.1 {
        return (1.0 - r) * (-r).ln_1p() + r;
    }
    let mut sum = 0.0;
    let mut pow = r * r;
    let mut k = 2.0;
    while pow > 1e-18 * r * r {
        sum += pow / (k * (k - 1.0));
        pow *= r;
        k += 1.0;
    }
    sum
}

/// `Ψ(a)`, the solution of `Ψ′(a) = (a⁻¹ - 1) log|a⁻¹ - 1|` with `Ψ(1) = 0`.
pub fn psi(a: f64) -> Result<f64> {
    check_domain(a > 0.0 && a.is_finite(), "a", a, "a > 0")?;
    Ok(psi_unchecked(a))
}

fn psi_unchecked(a: f64) -> f64 {
    if a == 1.0 {
        0.0
    } else if a < 1.0 {
        let la = a.ln();
        // log(a⁻¹ - 1) = log(1 - a) - log a
        let l = (-a).ln_1p() - la;
        -dilog(a).unwrap() + (1.0 - a) * l + la - 0.5 * la * la + PI2_6
    } else {
        let inv = a.recip();
        dilog(inv).unwrap() - (a - 1.0) * (-inv).ln_1p() + a.ln() - PI2_6
    }
}

// closed ranges are accepted up to rounding slack
const RANGE_SLACK: f64 = 1e-12;

/// `F(ξ, w)` for `½ ≤ ξ ≤ 1/(1+|w|)`.
pub fn f_aux(xi: f64, w: f64) -> Result<f64> {
    check_domain(w.abs() < 1.0, "w", w, "|w| < 1")?;
    let aw = w.abs();
    check_domain(
        xi >= 0.5 - RANGE_SLACK && xi <= 1.0 / (1.0 + aw) + RANGE_SLACK,
        "xi",
        xi,
        "1/2 <= xi <= 1/(1+|w|)",
    )?;
    Ok(f_unchecked(xi, aw))
}

fn f_unchecked(xi: f64, aw: f64) -> f64 {
    let c = if aw > 0.0 {
        1.0 + aw * ((1.0 - aw) / (1.0 + aw)).ln()
    } else {
        1.0
    };
    psi_unchecked(xi * (1.0 + aw)) + psi_unchecked(xi * (1.0 - aw)) - 2.0 * xi.ln() + 2.0 * c * xi
}

/// `G(ξ, w)` for `1/(1+|w|) ≤ ξ ≤ 1/(1-|w|)`.
pub fn g_aux(xi: f64, w: f64) -> Result<f64> {
    check_domain(w.abs() < 1.0, "w", w, "|w| < 1")?;
    let aw = w.abs();
    check_domain(
        xi >= 1.0 / (1.0 + aw) - RANGE_SLACK && xi <= 1.0 / (1.0 - aw) * (1.0 + RANGE_SLACK),
        "xi",
        xi,
        "1/(1+|w|) <= xi <= 1/(1-|w|)",
    )?;
    Ok(g_unchecked(xi, aw))
}

fn g_unchecked(xi: f64, aw: f64) -> f64 {
    psi_unchecked(xi * (1.0 + aw)) - xi.ln() + g_slope(aw) * xi
}

// 1 - |w| + 2|w| log(2|w|/(1+|w|)), which is O((1-|w|)²) near |w| = 1. With
// e = (1-|w|)/(1+|w|) it equals e² + 2|w| (log(1-e) + e + e²/2), and the
// bracket is summed as a series when e is small to avoid cancellation.
fn g_slope(aw: f64) -> f64 {
    if aw == 0.0 {
        return 1.0;
    }
    let e = (1.0 - aw) / (1.0 + aw);
    let rest = if e < 0.1 {
        // -Σ_{k≥3} e^k/k
        let mut sum = 0.0;
        let mut pow = e * e * e;
        let mut k = 3.0;
        while pow / k > 1e-18 * e * e * e {
            sum -= pow / k;
            pow *= e;
            k += 1.0;
        }
        sum
    } else {
        (-e).ln_1p() + e + 0.5 * e * e
    };
    e * e + 2.0 * aw * rest
}

/// `Φ(ξ, w)`, continuous on `ξ > 0, |w| ≤ 1`.
pub fn phi(xi: f64, w: f64) -> Result<f64> {
    phi_with_branch_shift(xi, w, 0.0)
}

/// [`phi`] with `shift` added to the second branch. Only meant for checking
/// that the continuity self-test notices a wrong branch constant.
#[doc(hidden)]
pub fn phi_with_branch_shift(xi: f64, w: f64, shift: f64) -> Result<f64> {
    check_domain(xi > 0.0, "xi", xi, "xi > 0")?;
    check_domain(w.abs() <= 1.0, "w", w, "|w| <= 1")?;
    Ok(phi_unchecked(xi, w.abs(), shift))
}

fn phi_unchecked(xi: f64, aw: f64, shift: f64) -> f64 {
    let value = if xi <= 0.5 {
        1.0 - 2.0 * SIX_OVER_PI2 * xi
    } else if xi >= 1.0 / (1.0 - aw) {
        0.0
    } else if aw > 1.0 - BOUNDARY_EPS {
        1.0 + SIX_OVER_PI2 * (psi_unchecked(2.0 * xi) - (2.0 * xi).ln() - 1.0)
    } else if xi <= 1.0 / (1.0 + aw) {
        1.0 + SIX_OVER_PI2 * (f_unchecked(xi, aw) - f_unchecked(0.5, aw) - 1.0) + shift
    } else {
        SIX_OVER_PI2 * (g_unchecked(xi, aw) - g_unchecked(1.0 / (1.0 - aw), aw))
    };
    value.clamp(0.0, 1.0)
}

/// Collision kernel `p_{0,β⁺_{v₀}}(v, ξ, v₊) = σ(v, v₊) Φ₀(ξ, b(v, v₊), -s(v, v₀))`.
///
/// Returns 0 off the support, including `v₊ ∉ V_v` and `v ∉ V_{v₀}`.
pub fn transition_kernel<M: ScatteringModel + ?Sized>(
    model: &M,
    v0: Direction,
    v: Direction,
    xi: f64,
    vplus: Direction,
) -> f64 {
    if !(xi > 0.0) || !model.is_admissible(v, vplus) || !model.is_admissible(v0, v) {
        return 0.0;
    }
    let (Ok(sigma), Ok(b), Ok(s)) = (
        model.cross_section(angle_between(v, vplus)),
        model.impact_parameter(v, vplus),
        model.exit_parameter(v, v0),
    ) else {
        return 0.0;
    };
    match phi0(xi, b, -s) {
        Ok(p) => sigma * p,
        Err(_) => 0.0,
    }
}

/// Collision kernel `p(v, ξ, v₊) = σ(v, v₊) Φ(ξ, b(v, v₊))` for the first
/// collision from a generic initial point.
pub fn first_kernel<M: ScatteringModel + ?Sized>(
    model: &M,
    v: Direction,
    xi: f64,
    vplus: Direction,
) -> f64 {
    if !(xi > 0.0) || !model.is_admissible(v, vplus) {
        return 0.0;
    }
    let (Ok(sigma), Ok(b)) = (
        model.cross_section(angle_between(v, vplus)),
        model.impact_parameter(v, vplus),
    ) else {
        return 0.0;
    };
    sigma * phi_unchecked(xi, b.abs(), 0.0)
}

// kinks in |w| of Φ(ξ, ·) and of the inner integral at fixed ξ
fn w_kinks(xi: f64) -> [f64; 2] {
    let inv = xi.recip();
    [inv - 1.0, 1.0 - inv]
}

const FPL_TOL: f64 = 1e-12;

/// Density of the free path length between consecutive collisions,
/// `½ ∫∫ Φ₀ dw dz`.
pub fn fpl_between(xi: f64) -> Result<f64> {
    check_domain(xi > 0.0, "xi", xi, "xi > 0")?;
    if xi <= 0.5 {
        return Ok(2.0 * SIX_OVER_PI2);
    }
    let lo = (1.0 - xi.recip()).max(0.0);
    let spec = IntegrationSpec::new(lo, 1.0)
        .breakpoints(w_kinks(xi))
        .abs_tol(FPL_TOL);
    integrate_value(|w| inner_unchecked(xi, w), &spec)
}

/// Density of the free path length from a generic initial point, `∫ Φ(ξ, w) dw`.
pub fn fpl_generic(xi: f64) -> Result<f64> {
    check_domain(xi > 0.0, "xi", xi, "xi > 0")?;
    if xi <= 0.5 {
        return Ok(2.0 * (1.0 - 2.0 * SIX_OVER_PI2 * xi));
    }
    let lo = (1.0 - xi.recip()).max(0.0);
    let spec = IntegrationSpec::new(lo, 1.0)
        .breakpoints(w_kinks(xi))
        .abs_tol(FPL_TOL);
    Ok(2.0 * integrate_value(|w| phi_unchecked(xi, w, 0.0), &spec)?)
}

/// Density of the free path length from a lattice point with its scatterer
/// removed, `∫ Φ₀(ξ, 0, z) dz`.
///
/// With `a = ξ⁻¹ - 1` the integrand is `(6/π²) Υ(a/|z|)`, which integrates to
/// `(12/π²) a (1 - log a)` for `0 < a < 1`.
pub fn fpl_lattice(xi: f64) -> Result<f64> {
    check_domain(xi > 0.0, "xi", xi, "xi > 0")?;
    let a = xi.recip() - 1.0;
    Ok(if a >= 1.0 {
        2.0 * SIX_OVER_PI2
    } else if a > 0.0 {
        2.0 * SIX_OVER_PI2 * a * (1.0 - a.ln())
    } else {
        0.0
    })
}

fn require_large_xi(xi: f64) -> Result<()> {
    check_domain(xi > 1.0, "xi", xi, "xi > 1")
}

/// Leading large-`ξ` term of `Φ₀`.
pub fn phi0_asymptotic(xi: f64, w: f64, z: f64) -> Result<f64> {
    require_large_xi(xi)?;
    let p = KernelPoint::new(xi, w, z)?;
    let AsymptoticVars { u, y } = p.asymptotic_vars();
    Ok(if w * z > 0.0 && u < 1.0 && y < 1.0 {
        0.5 * SIX_OVER_PI2 * (1.0 - u.max(y)) / xi
    } else {
        0.0
    })
}

/// Leading large-`ξ` term of `∫ Φ₀ dz`.
pub fn inner_asymptotic(xi: f64, w: f64) -> Result<f64> {
    require_large_xi(xi)?;
    check_domain(w.abs() < 1.0, "w", w, "|w| < 1")?;
    let u = xi * (1.0 - w.abs());
    Ok(if u < 1.0 {
        0.25 * SIX_OVER_PI2 * (1.0 - u * u) / (xi * xi)
    } else {
        0.0
    })
}

/// Leading large-`ξ` term of `Φ(ξ, w)`.
pub fn phi_asymptotic(xi: f64, w: f64) -> Result<f64> {
    require_large_xi(xi)?;
    check_domain(w.abs() < 1.0, "w", w, "|w| < 1")?;
    let u = xi * (1.0 - w.abs());
    Ok(if u < 1.0 {
        0.25 * SIX_OVER_PI2 * (1.0 - u) * (1.0 - u) / xi
    } else {
        0.0
    })
}
