use anyhow::{anyhow, Result};
use lorentz_core::geometry::Direction;
use lorentz_core::kernels;

use crate::model::AnyModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    /// Φ₀(ξ, w, z)
    Phi0,
    /// Φ(ξ, w)
    Phi,
    /// Ψ(a)
    Psi,
    /// ∫Φ₀(ξ, w, z) dz
    Inner,
    /// First-collision kernel p(v, ξ, v₊); angles in radians
    P,
    /// Transition kernel p₀(v₀; v, ξ, v₊); angles in radians
    P0,
}

/// Arguments of `eval`; which are required depends on the kind.
#[derive(Debug, Clone, Default)]
pub struct EvalArgs {
    pub xi: Option<f64>,
    pub w: Option<f64>,
    pub z: Option<f64>,
    pub a: Option<f64>,
    pub v0: Option<f64>,
    pub v: Option<f64>,
    pub vplus: Option<f64>,
    pub model: AnyModel,
}

fn need(value: Option<f64>, flag: &str, kind: Kind) -> Result<f64> {
    value.ok_or_else(|| anyhow!("eval {kind:?} requires --{flag}"))
}

pub fn evaluate(kind: Kind, args: &EvalArgs) -> Result<f64> {
    let xi = || need(args.xi, "xi", kind);
    let w = || need(args.w, "w", kind);
    let dir = |v: Option<f64>, flag: &str| need(v, flag, kind).map(Direction::from_angle);
    Ok(match kind {
        Kind::Phi0 => kernels::phi0(xi()?, w()?, need(args.z, "z", kind)?)?,
        Kind::Phi => kernels::phi(xi()?, w()?)?,
        Kind::Psi => kernels::psi(need(args.a, "a", kind)?)?,
        Kind::Inner => kernels::phi0_inner(xi()?, w()?)?,
        Kind::P => kernels::first_kernel(&args.model, dir(args.v, "v")?, xi()?, dir(args.vplus, "vplus")?),
        Kind::P0 => kernels::transition_kernel(
            &args.model,
            dir(args.v0, "v0")?,
            dir(args.v, "v")?,
            xi()?,
            dir(args.vplus, "vplus")?,
        ),
    })
}
