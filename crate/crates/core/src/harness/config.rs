use std::path::{Path, PathBuf};

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::highprec::PrecisionContext;
use crate::weight::{HSpec, WeightSpec};

fn default_digits() -> u32 {
    40
}

/// One TOML file drives every subcommand; `sweep` is only needed by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub beta: f64,
    /// used by single-weight commands; the sweep derives t from (n, s)
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub h: HSpec,
    #[serde(default = "default_digits")]
    pub precision_digits: u32,
    /// lower bound on the working precision
    #[serde(default)]
    pub min_bits: Option<u32>,
    /// ODE tolerance; defaults to 10^(-digits/2)
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub s_values: Vec<f64>,
    pub n_values: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(alpha: f64, beta: f64, h: HSpec) -> Self {
        Self {
            alpha,
            beta,
            t: None,
            h,
            precision_digits: default_digits(),
            min_bits: None,
            tol: None,
            sweep: None,
            outputs: Outputs::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > -1.0) || !(self.alpha + self.beta > -1.0) {
            return Err(Error::Config("need beta > -1 and alpha + beta > -1".into()));
        }
        if self.precision_digits == 0 {
            return Err(Error::Config("precision_digits must be positive".into()));
        }
        if let Some(t) = self.t {
            if !(t >= 1.0) {
                return Err(Error::Config(format!("t = {t} must be at least 1")));
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.s_values.is_empty() || sw.n_values.is_empty() {
                return Err(Error::Config("sweep needs at least one s and one n".into()));
            }
            if let Some(s) = sw.s_values.iter().find(|s| !(**s > 0.0)) {
                return Err(Error::Config(format!(
                    "s = {s} is not positive; t = 1 is only reachable through ln_dn_at_1"
                )));
            }
            if sw.n_values.contains(&0) {
                return Err(Error::Config("n must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Working precision for degrees up to `n_max`: at least 256 bits and 10 bits per degree.
    pub fn ctx_for(&self, n_max: usize) -> PrecisionContext {
        let base = PrecisionContext::from_digits(self.precision_digits);
        let bits = base.bits().max(256).max(10 * n_max as u32).max(self.min_bits.unwrap_or(0));
        base.with_extra_bits(bits - base.bits())
    }

    pub fn weight(&self, t: &Float, ctx: &PrecisionContext) -> Result<WeightSpec> {
        WeightSpec::from_floats(ctx.float(self.alpha), ctx.float(self.beta), Float::with_val(ctx.bits(), t), &self.h, ctx)
    }

    /// The weight at the configured t (1 when absent).
    pub fn weight_at_t(&self, ctx: &PrecisionContext) -> Result<WeightSpec> {
        self.weight(&ctx.float(self.t.unwrap_or(1.0)), ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_layout() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            alpha = 0.5
            beta = 0.25
            t = 1.5
            precision_digits = 50
            [h]
            kind = "exp_x2"
            coeffs = [0.3]
            [sweep]
            s_values = [0.5, 2.0]
            n_values = [16, 32]
            [outputs]
            csv = "report.csv"
            "#,
        )
        .unwrap();
        assert_eq!(c.h, HSpec::exp_x2(0.3));
        assert_eq!(c.sweep.as_ref().unwrap().n_values, vec![16, 32]);
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(c.ctx_for(64).bits() >= 640);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_toml_str("alpha = 0.5\nbeta = 0.25\n[sweep]\ns_values=[0.0]\nn_values=[4]").is_err());
        assert!(ExperimentConfig::from_toml_str("alpha = 0.5\nbeta = -1.5").is_err());
        assert!(ExperimentConfig::from_toml_str("alpha = 0.5\nbeta = 0.2\nbogus = 1").is_err());
    }
}
