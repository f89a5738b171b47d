//! Run configuration: defaults, TOML file loading and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::club::ClubParams;
use crate::dynamics::DynamicsParams;
use crate::error::{Result, SimError};
use crate::policies::{ActionBounds, PolicyMapConfig};

/// Initial group configuration applied at step 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Top five ranked regions in one group, the rest randomized over four.
    Hc,
    /// Top five ranked regions spread over five groups, rest round-robin.
    HcLc,
    /// Everyone starts out of any group.
    None,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Hc => "hc",
            Scenario::HcLc => "hc_lc",
            Scenario::None => "none",
        })
    }
}

impl std::str::FromStr for Scenario {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hc" => Ok(Scenario::Hc),
            "hc_lc" => Ok(Scenario::HcLc),
            "none" => Ok(Scenario::None),
            other => Err(SimError::Config(format!(
                "unknown scenario {other:?}, expected hc, hc_lc or none"
            ))),
        }
    }
}

/// Everything a run needs. All fields have defaults, so a config file may
/// set any subset of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub steps: u32,
    pub years_per_step: u32,
    pub scenario: Scenario,
    pub seeds: Vec<u64>,
    /// Calibration CSV; the bundled 27-region file when absent.
    pub calibration: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Fraction of each region's net output bid on imports, spread over
    /// partners in proportion to their export budgets.
    pub import_demand_share: f64,
    pub club: ClubParams,
    pub dynamics: DynamicsParams,
    pub bounds: ActionBounds,
    pub policies: PolicyMapConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            steps: 20,
            years_per_step: 5,
            scenario: Scenario::Hc,
            seeds: vec![1],
            calibration: None,
            out_dir: PathBuf::from("runs"),
            import_demand_share: 0.1,
            club: ClubParams::default(),
            dynamics: DynamicsParams::default(),
            bounds: ActionBounds::default(),
            policies: PolicyMapConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(SimError::Config("steps must be at least 1".into()));
        }
        if self.years_per_step < 1 {
            return Err(SimError::Config("years_per_step must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(SimError::Config("at least one seed is required".into()));
        }
        if !(0.0..=1.0).contains(&self.import_demand_share) {
            return Err(SimError::Config(format!(
                "import_demand_share = {} out of [0, 1]",
                self.import_demand_share
            )));
        }
        self.club.validate()?;
        self.dynamics.validate()?;
        self.bounds.validate()?;
        self.policies.validate()?;
        Ok(())
    }

    /// Parses a TOML config file; unset fields keep their defaults.
    pub fn from_file(path: &Path) -> Result<SimConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        let cfg: SimConfig = toml::from_str(&text)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_file_keeps_defaults_elsewhere() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "steps = 10\nscenario = \"hc_lc\"\nseeds = [4, 5]\n\n[club]\nsurcharge = 0.2"
        )
        .unwrap();
        let cfg = SimConfig::from_file(f.path()).unwrap();
        assert_eq!(cfg.steps, 10);
        assert_eq!(cfg.scenario, Scenario::HcLc);
        assert_eq!(cfg.seeds, vec![4, 5]);
        assert_eq!(cfg.club.surcharge, 0.2);
        assert_eq!(cfg.club.member_tariff_initial, 0.05);
        assert_eq!(cfg.years_per_step, 5);
        cfg.validate().unwrap();
    }

    #[test]
    fn empty_seed_list_rejected() {
        let cfg = SimConfig { seeds: vec![], ..SimConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_steps_rejected() {
        let cfg = SimConfig { steps: 0, ..SimConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn malformed_toml_is_a_config_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "steps = \"twenty\"").unwrap();
        let err = SimConfig::from_file(f.path()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn scenario_parses_from_str() {
        assert_eq!("hc".parse::<Scenario>().unwrap(), Scenario::Hc);
        assert_eq!("hc_lc".parse::<Scenario>().unwrap(), Scenario::HcLc);
        assert_eq!("none".parse::<Scenario>().unwrap(), Scenario::None);
        assert!("HC".parse::<Scenario>().is_err());
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = SimConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: SimConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
