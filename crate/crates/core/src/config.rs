//! Run specification and its `key = value` config file.
//!
//! The file has three optional sections, `[growth]`, `[epidemic]` and `[run]`.
//! Missing keys keep their defaults; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgeTable, Mechanism, SimConfig, DEFAULT_ORDER};

/// Everything needed to execute a batch of runs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub config: SimConfig,
    pub replicates: usize,
    /// Values of `m` to sweep; `None` runs only `config.m`.
    pub sweep_m: Option<Vec<usize>>,
    pub out: PathBuf,
    /// Clock values at which the edge list is saved; `None` means end of
    /// Phase 1 and the horizon.
    pub snapshot_at: Option<Vec<u64>>,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            config: SimConfig::default(),
            replicates: 1,
            sweep_m: None,
            out: PathBuf::from("out"),
            snapshot_at: None,
        }
    }
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.replicates == 0 {
            return Err(Error::range("replicates", "must be at least 1"));
        }
        if let Some(sweep) = &self.sweep_m {
            if sweep.is_empty() {
                return Err(Error::range("sweep_m", "must not be empty"));
            }
            let mut sorted = sweep.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != sweep.len() {
                return Err(Error::range("sweep_m", "values must be distinct"));
            }
            for &m in sweep {
                SimConfig { m, ..self.config.clone() }.validate()?;
            }
        }
        Ok(())
    }

    /// Sweep values in ascending order.
    pub fn m_values(&self) -> Vec<usize> {
        let mut values = self.sweep_m.clone().unwrap_or_else(|| vec![self.config.m]);
        values.sort_unstable();
        values
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&ConfigFile::from(self)).expect("config serializes")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GrowthSection {
    population: usize,
    timesteps: u64,
    m0: usize,
    m: usize,
    epsilon: f64,
    mean_delta: f64,
    mean_eta: f64,
    order: Vec<Mechanism>,
    age_table: AgeTable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct EpidemicSection {
    beta: f64,
    mean_alpha: f64,
    f_early: f64,
    f_late: f64,
    f_switch: u64,
    seed_interval: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunSection {
    seed: u64,
    replicates: usize,
    out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep_m: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snapshot_at: Option<Vec<u64>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    growth: GrowthSection,
    epidemic: EpidemicSection,
    run: RunSection,
}

impl Default for GrowthSection {
    fn default() -> Self {
        GrowthSection::from(&SimConfig::default())
    }
}

impl Default for EpidemicSection {
    fn default() -> Self {
        EpidemicSection::from(&SimConfig::default())
    }
}

impl Default for RunSection {
    fn default() -> Self {
        let spec = RunSpec::default();
        RunSection {
            seed: SimConfig::default().rng_seed,
            replicates: spec.replicates,
            out: spec.out,
            sweep_m: None,
            snapshot_at: None,
        }
    }
}

impl From<&SimConfig> for GrowthSection {
    fn from(c: &SimConfig) -> Self {
        GrowthSection {
            population: c.population,
            timesteps: c.timesteps,
            m0: c.m0,
            m: c.m,
            epsilon: c.epsilon,
            mean_delta: c.mean_delta,
            mean_eta: c.mean_eta,
            order: c.order.to_vec(),
            age_table: c.age_table.clone(),
        }
    }
}

impl From<&SimConfig> for EpidemicSection {
    fn from(c: &SimConfig) -> Self {
        EpidemicSection {
            beta: c.beta,
            mean_alpha: c.mean_alpha,
            f_early: c.f_early,
            f_late: c.f_late,
            f_switch: c.f_switch,
            seed_interval: c.seed_interval,
        }
    }
}

impl From<&RunSpec> for ConfigFile {
    fn from(spec: &RunSpec) -> Self {
        ConfigFile {
            growth: GrowthSection::from(&spec.config),
            epidemic: EpidemicSection::from(&spec.config),
            run: RunSection {
                seed: spec.config.rng_seed,
                replicates: spec.replicates,
                out: spec.out.clone(),
                sweep_m: spec.sweep_m.clone(),
                snapshot_at: spec.snapshot_at.clone(),
            },
        }
    }
}

impl TryFrom<ConfigFile> for RunSpec {
    type Error = Error;

    fn try_from(file: ConfigFile) -> Result<Self> {
        let g = file.growth;
        let e = file.epidemic;
        let order: [Mechanism; 3] = match g.order.as_slice() {
            [a, b, c] => [*a, *b, *c],
            [] => DEFAULT_ORDER,
            _ => return Err(Error::range("order", "must list exactly three mechanisms")),
        };
        let spec = RunSpec {
            config: SimConfig {
                population: g.population,
                timesteps: g.timesteps,
                m0: g.m0,
                m: g.m,
                epsilon: g.epsilon,
                mean_delta: g.mean_delta,
                mean_eta: g.mean_eta,
                age_table: g.age_table,
                order,
                beta: e.beta,
                mean_alpha: e.mean_alpha,
                f_early: e.f_early,
                f_late: e.f_late,
                f_switch: e.f_switch,
                seed_interval: e.seed_interval,
                rng_seed: file.run.seed,
            },
            replicates: file.run.replicates,
            sweep_m: file.run.sweep_m,
            out: file.run.out,
            snapshot_at: file.run.snapshot_at,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses config text; `origin` only labels error messages.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<RunSpec> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(1, |s| line_of(text, s.start));
        let message = e.message().trim().to_string();
        if message.contains("unknown field") {
            Error::Config(format!("{}: line {line}: {message}", origin.display()))
        } else {
            Error::Syntax { path: origin.to_path_buf(), line, message }
        }
    })?;
    RunSpec::try_from(file)
}

pub fn parse_config(path: &Path) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunSpec> {
        parse_config_str(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_file_gives_defaults() {
        let spec = parse("").unwrap();
        assert_eq!(spec, RunSpec::default());
        assert_eq!(spec.config.population, 3000);
        assert_eq!(spec.config.timesteps, 9000);
        assert_eq!(spec.config.m0, 5);
        assert_eq!(spec.config.epsilon, 0.5);
        assert_eq!(spec.config.beta, 0.3);
    }

    #[test]
    fn beta_out_of_range_names_the_key() {
        match parse("[epidemic]\nbeta = 1.5\n") {
            Err(Error::Range { key, .. }) => assert_eq!(key, "beta"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partial_override() {
        let spec = parse("[growth]\nm = 3\n").unwrap();
        let expected = SimConfig { m: 3, ..SimConfig::default() };
        assert_eq!(spec.config, expected);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse("[growth]\nm = 3\nwobble = 1\n").unwrap_err();
        assert_eq!(err.category(), "config");
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line() {
        match parse("[growth]\nm = 3\nepsilon = = 2\n") {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_sweep_rejected() {
        let err = parse("[run]\nsweep_m = [1, 2, 2]\n").unwrap_err();
        assert!(matches!(err, Error::Range { ref key, .. } if key == "sweep_m"));
    }

    #[test]
    fn round_trip() {
        let spec = RunSpec {
            config: SimConfig { m: 3, population: 500, f_late: 1.0 / 7.0, rng_seed: 42, ..SimConfig::default() },
            replicates: 10,
            sweep_m: Some(vec![1, 2, 3]),
            out: PathBuf::from("results/a"),
            snapshot_at: Some(vec![100, 500]),
        };
        let back = parse(&spec.to_toml()).unwrap();
        assert_eq!(back, spec);
        assert_eq!(parse(&RunSpec::default().to_toml()).unwrap(), RunSpec::default());
    }
}
