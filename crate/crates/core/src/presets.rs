//! Named example structures in their canonical bases.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{LieAlgebra3, Params, SubRiemannianTriple};
use crate::error::Error;

/// A named structure. Each preset is the canonical algebra for its
/// parameters, with `H = span{e0, e1}` and the identity metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Preset {
    /// The Heisenberg group, `(alpha, beta) = (0, 0)`.
    Heisenberg,
    /// The group of rigid motions of the plane, `(alpha, beta) = (-1, 0)`.
    Se2,
    /// The group SOLV^-, `(alpha, beta) = (1, 0)`.
    SolvMinus,
    /// Rank one with `alpha = 0` and the given `beta > 0`.
    Rank1Beta(f64),
    /// Double eigenvalue `lambda`: `(alpha, beta) = (-lambda^2, 2 lambda)`.
    DeltaZero(f64),
}

impl Preset {
    pub fn params(&self) -> Params {
        match *self {
            Preset::Heisenberg => Params::new(0.0, 0.0),
            Preset::Se2 => Params::new(-1.0, 0.0),
            Preset::SolvMinus => Params::new(1.0, 0.0),
            Preset::Rank1Beta(beta) => Params::new(0.0, beta),
            Preset::DeltaZero(lambda) => Params::new(-lambda * lambda, 2.0 * lambda),
        }
    }

    pub fn triple(&self) -> SubRiemannianTriple {
        let p = self.params();
        SubRiemannianTriple {
            algebra: LieAlgebra3::canonical(p.alpha, p.beta),
            h_basis: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            metric: [[1.0, 0.0], [0.0, 1.0]],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Heisenberg => write!(f, "heisenberg"),
            Preset::Se2 => write!(f, "se2"),
            Preset::SolvMinus => write!(f, "solv-minus"),
            Preset::Rank1Beta(b) => write!(f, "rank1-beta:{b}"),
            Preset::DeltaZero(l) => write!(f, "delta-zero:{l}"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    /// Accepts `heisenberg`, `se2`, `solv-minus`, `rank1-beta:<beta>` and
    /// `delta-zero:<lambda>`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64, Error> {
            let a = a.ok_or_else(|| Error::InvalidArgument(format!("preset `{name}` needs a value, e.g. `{name}:1`")))?;
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad preset value `{a}`")))
        };
        let p = match name {
            "heisenberg" => Preset::Heisenberg,
            "se2" => Preset::Se2,
            "solv-minus" => Preset::SolvMinus,
            "rank1-beta" => {
                let b = num(arg)?;
                if !(b > 0.0 && b.is_finite()) {
                    return Err(Error::InvalidArgument("rank1-beta needs beta > 0".into()));
                }
                Preset::Rank1Beta(b)
            }
            "delta-zero" => {
                let l = num(arg)?;
                if !(l > 0.0 && l.is_finite()) {
                    return Err(Error::InvalidArgument("delta-zero needs lambda > 0".into()));
                }
                Preset::DeltaZero(l)
            }
            _ => return Err(Error::InvalidArgument(format!("unknown preset `{s}`"))),
        };
        if arg.is_some() && matches!(p, Preset::Heisenberg | Preset::Se2 | Preset::SolvMinus) {
            return Err(Error::InvalidArgument(format!("preset `{name}` takes no value")));
        }
        Ok(p)
    }
}
