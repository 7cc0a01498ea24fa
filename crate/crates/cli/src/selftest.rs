//! Invariant suite behind `lorentz-bg selftest`: branch values and
//! continuity, closed forms against direct quadrature, normalizations and
//! large-`ξ` asymptotics.

use std::f64::consts::PI;

use anyhow::Result;
use lorentz_core::kernels::{
    dilog, fpl_between, fpl_generic, inner_asymptotic, phi, phi0, phi0_inner, phi_asymptotic,
    phi_with_branch_shift, psi, support_xi_max, SIX_OVER_PI2,
};
use lorentz_core::quadrature::{integrate_value, IntegrationSpec};
use lorentz_core::stats::{theory_table, Law};

/// Outcome of one check: the largest deviation found and its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check {
            name,
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

/// `n` evenly spaced points of `[a, b]`.
fn grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Known values of the kernels and the zero set of `Φ`.
pub fn branch_values() -> Result<Vec<Check>> {
    let first = (phi(0.25, 0.7)? - (1.0 - 3.0 / (PI * PI))).abs();
    let phi0_flat = (phi0(0.4, 0.3, -0.3)? - SIX_OVER_PI2).abs();
    let mut outside: f64 = 0.0;
    for (i, w) in grid(-0.95, 0.95, 20).enumerate() {
        let xi = (1.0 + 0.1 * i as f64) / (1.0 - w.abs());
        outside = outside.max(phi(xi, w)?.abs());
    }
    Ok(vec![
        Check::new("phi first branch value", first, 1e-12),
        Check::new("phi0 value off the degenerate line", phi0_flat, 1e-12),
        Check::new("psi(1)", psi(1.0)?.abs(), 0.0),
        Check::new("phi vanishes past 1/(1-|w|)", outside, 0.0),
    ])
}

/// Jump of `Φ` across the branch points `ξ = 1/2` and `ξ = 1/(1+|w|)`, with
/// `shift` added to the middle branch.
pub fn continuity(shift: f64) -> Result<Check> {
    const EPS: f64 = 1e-12;
    let mut worst: f64 = 0.0;
    for w in (0..200).map(|i| -0.995 + 0.01 * i as f64) {
        for x in [0.5, 1.0 / (1.0 + w.abs())] {
            let jump = phi_with_branch_shift(x + EPS, w, shift)? - phi_with_branch_shift(x - EPS, w, shift)?;
            worst = worst.max(jump.abs());
        }
    }
    Ok(Check::new("phi continuous at branch points", worst, 1e-9))
}

pub fn dilog_identity() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for w in (0..200).map(|i| (i as f64 + 0.5) / 200.0) {
        let (p, m) = ((1.0 + w) / 2.0, (1.0 - w) / 2.0);
        let r = dilog(p)? + dilog(m)? + p.ln() * m.ln() - PI * PI / 6.0;
        worst = worst.max(r.abs());
    }
    Ok(Check::new("dilog reflection identity", worst, 1e-10))
}

// z-kinks of Φ₀(η, w, ·): where the maximum switches, where w + z vanishes,
// and where the clamped argument reaches 0 or 1
fn z_kinks(eta: f64, w: f64) -> Vec<f64> {
    let a = w.abs();
    let q = 1.0 / eta - 1.0;
    let c = 1.0 - 1.0 / eta;
    vec![
        w,
        -w,
        q,
        -q,
        -w + (1.0 + a - 1.0 / eta),
        -w - (1.0 + a - 1.0 / eta),
        (-w - c) / 2.0,
        (c - w) / 2.0,
    ]
}

fn inner_by_quadrature(eta: f64, w: f64, tol: f64) -> Result<f64> {
    let spec = IntegrationSpec::new(-1.0, 1.0).breakpoints(z_kinks(eta, w)).abs_tol(tol);
    Ok(integrate_value(|z| phi0(eta, w, z).unwrap_or(0.0), &spec)?)
}

/// `Φ` and `∫Φ₀ dz` against direct quadrature of `Φ₀` on a 20×20 grid.
pub fn quadrature_agreement() -> Result<Vec<Check>> {
    let mut worst_phi: f64 = 0.0;
    let mut worst_inner: f64 = 0.0;
    for xi in grid(0.1, 3.0, 20) {
        for w in grid(-0.95, 0.95, 20) {
            let inner = inner_by_quadrature(xi, w, 1e-12)?;
            worst_inner = worst_inner.max((inner - phi0_inner(xi, w)?).abs());

            // Φ(ξ, w) = ∫_ξ^∞ ∫ Φ₀(η, w, z) dz dη; the inner integral vanishes past 1/(1-|w|)
            let a = w.abs();
            let end = 1.0 / (1.0 - a);
            let direct = if xi >= end {
                0.0
            } else {
                let spec = IntegrationSpec::new(xi, end)
                    .breakpoints([0.5, 1.0 / (1.0 + a), 1.0])
                    .abs_tol(1e-10);
                integrate_value(|eta| inner_by_quadrature(eta, w, 1e-12).unwrap_or(f64::NAN), &spec)?
            };
            worst_phi = worst_phi.max((direct - phi(xi, w)?).abs());
        }
    }
    Ok(vec![
        Check::new("phi vs double quadrature of phi0", worst_phi, 1e-7),
        Check::new("inner closed form vs z-quadrature", worst_inner, 1e-8),
    ])
}

/// Relative error of the leading large-`ξ` terms, scaled by `ξ`; the bound
/// `10` means relative error at most `10/ξ`.
pub fn asymptotics() -> Result<Vec<Check>> {
    let mut worst_phi: f64 = 0.0;
    let mut worst_inner: f64 = 0.0;
    for xi in [20.0, 50.0, 100.0] {
        for u in (1..=18).map(|i| 0.05 * i as f64) {
            for sign in [-1.0, 1.0] {
                let w = sign * (1.0 - u / xi);
                let rel = |exact: f64, approx: f64| (approx - exact).abs() / exact * xi;
                worst_phi = worst_phi.max(rel(phi(xi, w)?, phi_asymptotic(xi, w)?));
                worst_inner = worst_inner.max(rel(phi0_inner(xi, w)?, inner_asymptotic(xi, w)?));
            }
        }
    }
    Ok(vec![
        Check::new("phi asymptotics, xi * relative error", worst_phi, 10.0),
        Check::new("inner asymptotics, xi * relative error", worst_inner, 10.0),
    ])
}

fn phi0_mass(z: f64) -> Result<f64> {
    // kinks in w: sign changes of w, w + z and |w| - |z|
    let spec = IntegrationSpec::new(-1.0, 1.0)
        .breakpoints([0.0, z, -z])
        .abs_tol(1e-11);
    let per_w = |w: f64| -> f64 {
        let end = support_xi_max(w, z).min(1e6);
        let kink = 1.0 / (1.0 + w.abs().max(z.abs()));
        let spec = IntegrationSpec::new(0.0, end).breakpoints([kink]).abs_tol(1e-13);
        integrate_value(|xi| if xi > 0.0 { phi0(xi, w, z).unwrap_or(0.0) } else { 0.0 }, &spec)
            .unwrap_or(f64::NAN)
    };
    Ok(integrate_value(per_w, &spec)?)
}

// ∫_ξ^∞ of the between-collision density; the tail past `END` is
// 1/(2π²ξ²) to leading order
fn between_survival(xi: f64) -> Result<f64> {
    const END: f64 = 1e4;
    let mut cuts = vec![0.5, 1.0];
    let mut x = 2.0;
    while x < END {
        cuts.push(x);
        x *= 2.0;
    }
    let spec = IntegrationSpec::new(xi, END).breakpoints(cuts).abs_tol(1e-11);
    let body = integrate_value(|x| fpl_between(x).unwrap_or(f64::NAN), &spec)?;
    Ok(body + 1.0 / (2.0 * PI * PI * END * END))
}

/// Unit mass of `Φ` and of `Φ₀(·, ·, z)`, and the identity relating the
/// generic and between-collision free path densities.
pub fn normalizations() -> Result<Vec<Check>> {
    let phi_mass = theory_table(Law::Generic).total_mass();
    let mut worst0: f64 = 0.0;
    for z in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        worst0 = worst0.max((phi0_mass(z)? - 1.0).abs());
    }
    let mut worst_fp: f64 = 0.0;
    for xi in [0.1, 0.3, 0.5, 0.7, 0.9, 1.2, 1.6, 2.5, 4.0, 8.0] {
        worst_fp = worst_fp.max((fpl_generic(xi)? - 2.0 * between_survival(xi)?).abs());
    }
    Ok(vec![
        Check::new("mass of phi", (phi_mass - 1.0).abs(), 1e-6),
        Check::new("mass of phi0(., ., z)", worst0, 1e-6),
        Check::new("generic density = 2 x between survival", worst_fp, 1e-6),
    ])
}

/// `Φ` is non-increasing in `ξ` with values in `[0, 1]`.
pub fn monotone_and_bounded() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for w in grid(-1.0, 1.0, 41) {
        let mut prev = f64::INFINITY;
        for xi in grid(0.01, 4.0, 400) {
            let v = phi(xi, w)?;
            worst = worst.max(v - prev).max(-v).max(v - 1.0);
            prev = v;
        }
    }
    Ok(Check::new("phi monotone in xi and within [0, 1]", worst, 1e-12))
}

/// Runs every check, with `shift` added to the middle branch of `Φ` in the
/// continuity check.
pub fn run(shift: f64) -> Result<Vec<Check>> {
    let mut checks = branch_values()?;
    checks.push(continuity(shift)?);
    checks.push(dilog_identity()?);
    checks.extend(quadrature_agreement()?);
    checks.extend(normalizations()?);
    checks.extend(asymptotics()?);
    checks.push(monotone_and_bounded()?);
    Ok(checks)
}

pub fn print_table(checks: &[Check]) {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in checks {
        println!(
            "{:<width$}  {:>12.3e}  <= {:<9.1e}  {}",
            c.name,
            c.value,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" },
        );
    }
}
