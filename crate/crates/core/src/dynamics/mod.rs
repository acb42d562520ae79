//! Expanding circle maps, observables and periodic orbits.
//!
//! Maps are `f(x) = d·x + g(x) mod 1` with `g` a trigonometric polynomial;
//! preimages are found per monotone branch of the lift, so every branch
//! solve is globally convergent.

mod map;
mod periodic;
mod potential;
mod trig;

use serde::{Deserialize, Serialize};

pub use map::{circle_offset, wrap, Branch, CircleDynamics, CircleMap, IteratedMap, MapFamily, EXPANSION_CHECK_POINTS};
pub use periodic::{periodic_birkhoff_sums, periodic_points, PeriodicOrbitSet, MAX_PERIODIC_POINTS};
pub use potential::{BirkhoffSum, Coboundary, DerivativeRatio, LogDerivative, Observable, Potential};
pub use trig::TrigPoly;

use crate::error::{Error, Result};

/// JSON form shared by maps and observables:
/// `{"degree": 2, "sin": [..], "cos": [..], "constant": c}`.
///
/// `degree` is required for maps and rejected elsewhere. `log_derivative`
/// adds `coeff · log f'` of the configured map and is only meaningful for
/// potentials.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default)]
    pub sin: Vec<f64>,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub constant: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_derivative: Option<f64>,
}

impl FunctionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    fn check_finite(&self) -> Result<()> {
        let finite = self.constant.is_finite()
            && self.sin.iter().chain(&self.cos).all(|v| v.is_finite())
            && self.log_derivative.is_none_or(f64::is_finite);
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidArgument("non-finite coefficient".into()))
        }
    }

    pub fn trig(&self) -> TrigPoly {
        TrigPoly::new(self.constant, self.cos.clone(), self.sin.clone())
    }

    pub fn to_map(&self) -> Result<CircleMap> {
        self.check_finite()?;
        let degree = self.degree.ok_or_else(|| Error::InvalidArgument("map requires \"degree\"".into()))?;
        if self.log_derivative.is_some() {
            return Err(Error::InvalidArgument("\"log_derivative\" is not valid for a map".into()));
        }
        CircleMap::new(degree, self.trig())
    }

    pub fn to_trig(&self) -> Result<TrigPoly> {
        self.check_finite()?;
        if self.degree.is_some() || self.log_derivative.is_some() {
            return Err(Error::InvalidArgument("observable accepts only \"sin\", \"cos\" and \"constant\"".into()));
        }
        Ok(self.trig())
    }

    /// Potential relative to `map` (needed for the `log_derivative` term).
    pub fn to_potential(&self, map: &CircleMap) -> Result<Potential> {
        self.check_finite()?;
        if self.degree.is_some() {
            return Err(Error::InvalidArgument("\"degree\" is only valid for a map".into()));
        }
        let base = Potential::from(self.trig());
        Ok(match self.log_derivative {
            Some(c) => base.add(&Potential::log_derivative(map, c)),
            None => base,
        })
    }
}
