//! JSON run configuration: a potential or coupling path plus numeric controls.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::perturb::{Gauge, PerturbOptions, Propagator, DEFAULT_CUTOFF, DEFAULT_REGULARIZER, DEFAULT_TAIL_LIMIT};
use crate::potential::{CouplingPath, PotentialSpec};
use crate::precision::Precision;

pub const CUTOFF_RANGE: (usize, usize) = (4, 2000);
pub const MAX_ORDER: usize = 60;
pub const MAX_COUNT: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Accepted row residual of the zero-order state, relative to the couplings.
    #[serde(default = "default_base_residual")]
    pub base_residual: f64,
    /// Largest `|h_M|/max|h|` before a tail warning.
    #[serde(default = "default_tail")]
    pub tail: f64,
}

fn default_base_residual() -> f64 {
    1e-8
}

fn default_tail() -> f64 {
    DEFAULT_TAIL_LIMIT
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            base_residual: default_base_residual(),
            tail: default_tail(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    /// Degree of the zero-order polynomial factor.
    #[serde(default)]
    pub q: usize,
    #[serde(default, rename = "M")]
    pub cutoff: Option<usize>,
    #[serde(default, rename = "K")]
    pub order: Option<usize>,
    #[serde(default, rename = "D_reg")]
    pub d_reg: Option<f64>,
    /// Number of levels for spectra.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub gauge: Gauge,
    #[serde(default)]
    pub propagator: Option<Propagator>,
    #[serde(default)]
    pub precision: Option<Precision>,
    /// Points at which partial sums are reported.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Output directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn bad(msg: String) -> Error {
    Error::Config(msg)
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => bad(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.cutoff {
            if !(CUTOFF_RANGE.0..=CUTOFF_RANGE.1).contains(&m) {
                return Err(bad(format!("M = {m} outside [{}, {}]", CUTOFF_RANGE.0, CUTOFF_RANGE.1)));
            }
        }
        if let Some(k) = self.order {
            if k > MAX_ORDER {
                return Err(bad(format!("K = {k} above {MAX_ORDER}")));
            }
        }
        if let Some(d) = self.d_reg {
            if !(d.is_finite() && d >= 1.0) {
                return Err(bad(format!("D_reg = {d} must be finite and at least 1")));
            }
        }
        if let Some(n) = self.count {
            if !(1..=MAX_COUNT).contains(&n) {
                return Err(bad(format!("count = {n} outside [1, {MAX_COUNT}]")));
            }
        }
        for (name, v) in [("base_residual", self.tolerances.base_residual), ("tail", self.tolerances.tail)] {
            if !(v.is_finite() && v > 0.0 && v < 1.0) {
                return Err(bad(format!("tolerance {name} = {v} must lie in (0, 1)")));
            }
        }
        if let Some(l) = self.lambdas.iter().find(|l| !l.is_finite()) {
            return Err(bad(format!("lambda {l} is not finite")));
        }
        if let Some(spec) = &self.potential {
            if let Some((lo, hi)) = spec.lambda_range {
                if let Some(l) = self.lambdas.iter().find(|&&l| l < lo || l > hi) {
                    return Err(bad(format!("lambda {l} outside [{lo}, {hi}]")));
                }
            }
        }
        Ok(())
    }

    pub fn path(&self) -> Result<CouplingPath> {
        let spec = self.potential.as_ref().ok_or_else(|| bad("missing \"potential\"".into()))?;
        CouplingPath::from_spec(spec).map_err(|e| match e {
            Error::InvalidParameter(m) => bad(m),
            other => other,
        })
    }

    /// Perturbation controls with defaults filled in; the precision given
    /// here wins over `env`.
    pub fn perturb_options(&self, env: Precision) -> PerturbOptions {
        PerturbOptions {
            order: self.order.unwrap_or(4),
            cutoff: self.cutoff.unwrap_or(DEFAULT_CUTOFF),
            d_reg: self.d_reg.unwrap_or(DEFAULT_REGULARIZER),
            gauge: self.gauge,
            propagator: self.propagator,
            precision: self.precision.unwrap_or(env),
            tail_limit: self.tolerances.tail,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const T1: &str = r#"{"potential": {"t": 1, "ell": -1, "beta": {"coeffs": [6, 1]}, "A": [1], "B": [1, 1]}, "q": 0, "K": 3}"#;

    #[test]
    fn parses_minimal_config() {
        let c = RunConfig::from_json(T1).unwrap();
        assert_eq!(c.order, Some(3));
        let p = c.path().unwrap();
        assert_eq!(p.base().beta, 6.0);
        let o = c.perturb_options(Precision::Double);
        assert_eq!(o.cutoff, DEFAULT_CUTOFF);
        assert_eq!(o.precision, Precision::Double);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = RunConfig::from_json(r#"{"cutof": 10}"#).unwrap_err();
        assert_eq!(e.exit_code(), 4);
        let e = RunConfig::from_json(r#"{"tolerances": {"tial": 1e-3}}"#).unwrap_err();
        assert_eq!(e.exit_code(), 4);
    }

    #[test]
    fn ranges_enforced() {
        for text in [r#"{"M": 2}"#, r#"{"K": 500}"#, r#"{"D_reg": 0.5}"#, r#"{"count": 0}"#, r#"{"tolerances": {"tail": 2}}"#] {
            assert!(RunConfig::from_json(text).is_err(), "{text}");
        }
    }
}
