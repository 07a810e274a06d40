//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # estimator comparison
//! bandlimit = 64
//! snr_in_db = -7, -3, 0, 3, 7, 13
//! methods = optimal, threshold, gwks
//! ```
//!
//! Lists are comma separated, `#` starts a comment. Relative file paths are
//! resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use sphwiener::baselines::default_kappa_grid;
use sphwiener::filter::FilterMode;
use sphwiener::stochastics::SpectrumLaw;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Optimal,
    Threshold,
    Gwks,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::Threshold => "threshold",
            Self::Gwks => "gwks",
        }
    }

    fn parse(s: &str) -> CliResult<Self> {
        match s {
            "optimal" => Ok(Self::Optimal),
            "threshold" => Ok(Self::Threshold),
            "gwks" => Ok(Self::Gwks),
            other => Err(CliError::Config(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Synthetic { law: SpectrumLaw, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub bandlimit: usize,
    pub lambda: f64,
    pub j1: usize,
    pub zeta_file: Option<PathBuf>,
    pub source: Source,
    pub snr_in_db: Vec<f64>,
    pub n_realizations: usize,
    pub methods: Vec<Method>,
    pub kappa: Vec<f64>,
    pub threshold_multiplier: f64,
    pub filter_mode: FilterMode,
    pub filter_scaling: bool,
    pub out_dir: PathBuf,
    pub master_seed: u64,
}

/// 21 points from -7 to 13 dB.
pub fn default_snr_grid() -> Vec<f64> {
    (0..21).map(|i| -7.0 + i as f64).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            bandlimit: 64,
            lambda: 2.0,
            j1: 0,
            zeta_file: None,
            source: Source::Synthetic {
                law: SpectrumLaw::Red(2.0),
                seed: 1,
            },
            snr_in_db: default_snr_grid(),
            n_realizations: 10,
            methods: vec![Method::Optimal, Method::Threshold, Method::Gwks],
            kappa: default_kappa_grid(),
            threshold_multiplier: 3.0,
            filter_mode: FilterMode::AxisymClosedForm,
            filter_scaling: false,
            out_dir: PathBuf::from("out"),
            master_seed: 0,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{v}'")))
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    /// Parses config text on top of the defaults.
    pub fn parse(text: &str, base_dir: &Path) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim(), base_dir)?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path, sphwiener::Error::Io(e)))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Sets one key. Used by the parser and by command-line overrides.
    pub fn set(&mut self, key: &str, value: &str, base_dir: &Path) -> CliResult<()> {
        match key {
            "bandlimit" => self.bandlimit = num(key, value)?,
            "lambda" => self.lambda = num(key, value)?,
            "j1" => self.j1 = num(key, value)?,
            "zeta_file" => self.zeta_file = Some(base_dir.join(value)),
            "source_file" => self.source = Source::File(base_dir.join(value)),
            "source_law" => {
                let law = value
                    .parse()
                    .map_err(|e: sphwiener::Error| CliError::Config(e.to_string()))?;
                let seed = match self.source {
                    Source::Synthetic { seed, .. } => seed,
                    Source::File(_) => 1,
                };
                self.source = Source::Synthetic { law, seed };
            }
            "source_seed" => {
                let seed = num(key, value)?;
                let law = match self.source {
                    Source::Synthetic { law, .. } => law,
                    Source::File(_) => SpectrumLaw::Red(2.0),
                };
                self.source = Source::Synthetic { law, seed };
            }
            "snr_in_db" => {
                self.snr_in_db = list(value).map(|v| num(key, v)).collect::<CliResult<_>>()?;
            }
            "n_realizations" => self.n_realizations = num(key, value)?,
            "methods" => self.methods = list(value).map(Method::parse).collect::<CliResult<_>>()?,
            "kappa" => {
                self.kappa = if value == "default" {
                    default_kappa_grid()
                } else {
                    list(value).map(|v| num(key, v)).collect::<CliResult<_>>()?
                };
            }
            "threshold_multiplier" => self.threshold_multiplier = num(key, value)?,
            "filter_mode" => {
                self.filter_mode = value
                    .parse()
                    .map_err(|e: sphwiener::Error| CliError::Config(e.to_string()))?;
            }
            "filter_scaling" => self.filter_scaling = num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "master_seed" => self.master_seed = num(key, value)?,
            other => return Err(CliError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key=value` overrides, then rechecks.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> CliResult<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override '{o}' is not key=value")))?;
            self.set(k.trim(), v.trim(), Path::new("."))?;
        }
        self.check()
    }

    pub fn check(&self) -> CliResult<()> {
        if self.bandlimit < 2 {
            return Err(CliError::Config("bandlimit must be at least 2".into()));
        }
        if self.n_realizations == 0 {
            return Err(CliError::Config("n_realizations must be at least 1".into()));
        }
        if self.snr_in_db.is_empty() || self.snr_in_db.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("snr_in_db must be a non-empty list of finite values".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Config("methods must not be empty".into()));
        }
        if self.methods.contains(&Method::Gwks) && self.kappa.is_empty() {
            return Err(CliError::Config("gwks needs at least one kappa".into()));
        }
        if let Some(k) = self.kappa.iter().find(|k| !(0.0..=1.0).contains(*k)) {
            return Err(CliError::Config(format!("kappa {k} outside [0, 1]")));
        }
        if !(self.threshold_multiplier > 0.0) {
            return Err(CliError::Config("threshold_multiplier must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let text = "\
# sweep
bandlimit = 32   # small
snr_in_db = -7, 0, 13
methods = gwks, optimal
kappa = 0, 0.01
source_file = earth.csv
filter_mode = matrix
master_seed = 9
";
        let cfg = ExperimentConfig::parse(text, Path::new("/data")).unwrap();
        assert_eq!(cfg.bandlimit, 32);
        assert_eq!(cfg.snr_in_db, vec![-7.0, 0.0, 13.0]);
        assert_eq!(cfg.methods, vec![Method::Gwks, Method::Optimal]);
        assert_eq!(cfg.kappa, vec![0.0, 0.01]);
        assert_eq!(cfg.source, Source::File(PathBuf::from("/data/earth.csv")));
        assert_eq!(cfg.filter_mode, FilterMode::Matrix);
        assert_eq!(cfg.master_seed, 9);
    }

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::parse("", Path::new(".")).unwrap();
        assert_eq!(cfg.snr_in_db.len(), 21);
        assert_eq!(cfg.snr_in_db[0], -7.0);
        assert_eq!(cfg.snr_in_db[20], 13.0);
        assert_eq!(cfg.kappa.len(), 18);
        assert_eq!(cfg.n_realizations, 10);
        assert_eq!(cfg.filter_mode, FilterMode::AxisymClosedForm);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "bandlimit = 1",
            "n_realizations = 0",
            "colour = red",
            "methods = wiener",
            "kappa = 2",
            "snr_in_db =",
            "just a line",
            "lambda = two",
            "source_law = pink",
        ] {
            let err = ExperimentConfig::parse(text, Path::new(".")).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_overrides(&["snr_in_db=60".into(), "source_seed = 4".into()]).unwrap();
        assert_eq!(cfg.snr_in_db, vec![60.0]);
        assert_eq!(
            cfg.source,
            Source::Synthetic {
                law: SpectrumLaw::Red(2.0),
                seed: 4
            }
        );
        assert!(cfg.apply_overrides(&["nonsense".into()]).is_err());
    }
}
