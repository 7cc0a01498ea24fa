use std::str::FromStr;

use lorentz_core::geometry::{Direction, ScaledReflection, ScatteringModel, Specular};
use lorentz_core::Result;

/// A scattering model chosen at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnyModel {
    Specular(Specular),
    Scaled(ScaledReflection),
}

impl Default for AnyModel {
    fn default() -> Self {
        AnyModel::Specular(Specular)
    }
}

impl FromStr for AnyModel {
    type Err = String;

    /// `specular` or `scaled:<lambda>` with `0 < lambda <= 1`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "specular" {
            return Ok(AnyModel::Specular(Specular));
        }
        if let Some(rest) = s.strip_prefix("scaled:") {
            let lambda: f64 = rest
                .parse()
                .map_err(|_| format!("bad lambda in model '{s}'"))?;
            return ScaledReflection::new(lambda)
                .map(AnyModel::Scaled)
                .map_err(|e| e.to_string());
        }
        Err(format!("unknown model '{s}' (expected 'specular' or 'scaled:<lambda>')"))
    }
}

// every method is forwarded so that closed-form overrides are kept
macro_rules! forward {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            AnyModel::Specular($m) => $e,
            AnyModel::Scaled($m) => $e,
        }
    };
}

impl ScatteringModel for AnyModel {
    fn cutoff_angle(&self) -> f64 {
        forward!(self, m => m.cutoff_angle())
    }
    fn scatter(&self, v: Direction, w: Direction) -> Result<(Direction, Direction)> {
        forward!(self, m => m.scatter(v, w))
    }
    fn beta_minus(&self, v: Direction, u: Direction) -> Result<Direction> {
        forward!(self, m => m.beta_minus(v, u))
    }
    fn beta_plus(&self, v: Direction, u: Direction) -> Result<Direction> {
        forward!(self, m => m.beta_plus(v, u))
    }
    fn is_admissible(&self, v: Direction, u: Direction) -> bool {
        forward!(self, m => m.is_admissible(v, u))
    }
    fn impact_at(&self, theta: f64) -> Result<f64> {
        forward!(self, m => m.impact_at(theta))
    }
    fn impact_parameter(&self, v: Direction, u: Direction) -> Result<f64> {
        forward!(self, m => m.impact_parameter(v, u))
    }
    fn exit_parameter(&self, u: Direction, v: Direction) -> Result<f64> {
        forward!(self, m => m.exit_parameter(u, v))
    }
    fn cross_section(&self, theta: f64) -> Result<f64> {
        forward!(self, m => m.cross_section(theta))
    }
    fn direction_from_impact(&self, v: Direction, b: f64) -> Result<Direction> {
        forward!(self, m => m.direction_from_impact(v, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_models() {
        assert_eq!("specular".parse::<AnyModel>().unwrap(), AnyModel::Specular(Specular));
        assert!(matches!("scaled:0.5".parse::<AnyModel>().unwrap(), AnyModel::Scaled(_)));
        assert!("scaled:0".parse::<AnyModel>().is_err());
        assert!("mirror".parse::<AnyModel>().is_err());
    }

    #[test]
    fn forwards_closed_forms() {
        let m = AnyModel::default();
        assert_eq!(m.cross_section(1.0).unwrap(), Specular.cross_section(1.0).unwrap());
    }
}
