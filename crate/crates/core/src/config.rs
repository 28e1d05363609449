use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::EstimationParams;
use crate::error::{Error, Result};
use crate::proximity::{Granularity, Metric, MetricVariant};
use crate::sbfl::DStar;

/// Every tunable of a run. Loaded from a TOML file; missing keys take
/// their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Percentage of the ranking used as breakpoints, in (0, 100].
    pub top_percent: f64,
    pub dstar_exponent: f64,
    pub variant: MetricVariant,
    pub jaccard: Granularity,
    pub estimation: EstimationParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            top_percent: 10.0,
            dstar_exponent: 2.0,
            variant: MetricVariant::Full,
            jaccard: Granularity::Chars,
            estimation: EstimationParams::default(),
            oracle: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Io(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization is infallible")
    }

    pub fn validate(&self) -> Result<()> {
        validate_percent(self.top_percent)?;
        if !(self.dstar_exponent > 0.0 && self.dstar_exponent.is_finite()) {
            return Err(Error::Config(format!(
                "dstar_exponent must be positive, got {}",
                self.dstar_exponent
            )));
        }
        self.estimation.validate()
    }

    pub fn metric(&self) -> Metric {
        Metric {
            variant: self.variant,
            granularity: self.jaccard,
        }
    }

    pub fn formula(&self) -> DStar {
        DStar {
            star: self.dstar_exponent,
        }
    }
}

pub fn validate_percent(x: f64) -> Result<()> {
    if x > 0.0 && x <= 100.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("top percent must lie in (0,100], got {x}")))
    }
}

/// One-line rendering echoed in report headers.
impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.estimation;
        write!(
            f,
            "top_percent={} dstar_exponent={} variant={} jaccard={} r_a={} r_b={} epsilon={} max_k={}",
            self.top_percent,
            self.dstar_exponent,
            self.variant.as_str(),
            self.jaccard.as_str(),
            e.r_a,
            e.r_b,
            e.epsilon,
            e.max_k.map_or_else(|| "p".to_string(), |k| k.to_string()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_toml(
            "top_percent = 15\nvariant = \"no_breakpoint_level\"\n[estimation]\nepsilon = 0.3\n",
        )
        .unwrap();
        assert_eq!(cfg.top_percent, 15.0);
        assert_eq!(cfg.variant, MetricVariant::NoBreakpointLevel);
        assert_eq!(cfg.estimation.epsilon, 0.3);
        assert_eq!(cfg.estimation.r_a, EstimationParams::default().r_a);
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        assert!(RunConfig::from_toml("top_percent = 0").is_err());
        assert!(RunConfig::from_toml("top_percent = 100.5").is_err());
        assert!(RunConfig::from_toml("dstar_exponent = -1").is_err());
        assert!(RunConfig::from_toml("jaccard = \"words\"").is_err());
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn display_echoes_every_knob() {
        let s = RunConfig::default().to_string();
        assert!(s.starts_with("top_percent=10 dstar_exponent=2 variant=full jaccard=chars"));
        assert!(s.ends_with("max_k=p"));
    }
}
