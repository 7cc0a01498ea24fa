use thiserror::Error;

/// Errors raised by the kernel evaluators, geometry helpers and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function.
    #[error("{param} = {value} violates {bound}")]
    Domain {
        param: &'static str,
        value: f64,
        bound: &'static str,
    },
    /// Boundary data `(v, w)` with `v . w >= 0` passed where incoming data was required.
    #[error("boundary data is not incoming: v.w = {dot}")]
    NotIncoming { dot: f64 },
    /// A direction outside the admissible cone of the scattering map.
    #[error("direction at angle {angle} outside admissible cone ({cutoff}, 2pi - {cutoff})")]
    NotAdmissible { angle: f64, cutoff: f64 },
    /// A quadrature sample was NaN or infinite.
    #[error("non-finite integrand value at x = {x}")]
    NonFinite { x: f64 },
    /// A distribution with no mass.
    #[error("density has zero total mass")]
    ZeroMass,
    /// An empty sample handed to a statistic.
    #[error("empty sample")]
    EmptySample,
    /// Inconsistent simulation or table configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_domain(
    ok: bool,
    param: &'static str,
    value: f64,
    bound: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            param,
            value,
            bound,
        })
    }
}
