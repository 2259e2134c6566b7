//! Run configuration: defaults, a `key = value` file, then overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::chain_model::{ChainParams, ALPHA_PRESETS, DEFAULT_OMEGA};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Setting1,
    Setting2,
    SizeSweep,
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Setting1 => "setting1",
            Mode::Setting2 => "setting2",
            Mode::SizeSweep => "size-sweep",
            Mode::Validate => "validate",
        }
    }

    /// Abscissa window used for power-law fits when none is configured.
    pub fn default_fit_window(self) -> (f64, f64) {
        match self {
            Mode::SizeSweep => (40.0, 100.0),
            _ => (10.0, 40.0),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "setting1" => Ok(Mode::Setting1),
            "setting2" => Ok(Mode::Setting2),
            "size-sweep" => Ok(Mode::SizeSweep),
            "validate" => Ok(Mode::Validate),
            _ => Err(Error::Config(format!("unknown mode `{s}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Coupling given either as a preset name (`a1`..`a4`) or a literal.
#[derive(Debug, Clone, PartialEq)]
pub struct Alpha {
    pub label: String,
    pub value: f64,
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(&(name, value)) = ALPHA_PRESETS.iter().find(|(name, _)| *name == s) {
            return Ok(Alpha {
                label: name.to_string(),
                value,
            });
        }
        let value: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("alpha `{s}` is neither a preset nor a number")))?;
        Ok(Alpha {
            label: s.to_string(),
            value,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub n_sites: usize,
    pub alpha: Alpha,
    pub omega: f64,
    pub d_max: usize,
    pub ell_min: usize,
    /// `None` means `N/2 − 2`.
    pub ell_max: Option<usize>,
    pub n_list: Vec<usize>,
    pub fit_window: (f64, f64),
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("malformed value `{value}` for `{key}`")))
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            n_sites: 100,
            alpha: Alpha {
                label: "a4".into(),
                value: ALPHA_PRESETS[3].1,
            },
            omega: DEFAULT_OMEGA,
            d_max: 40,
            ell_min: 1,
            ell_max: None,
            n_list: (2..=10).map(|k| 10 * k).collect(),
            fit_window: mode.default_fit_window(),
            out: None,
            seed: 0,
            threads: 0,
        }
    }

    /// Defaults, then the optional file, then `overrides` in order.
    pub fn from_sources(
        mode: Mode,
        file: Option<&Path>,
        overrides: &[(&str, String)],
    ) -> Result<Self> {
        let mut config = Self::new(mode);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config file {}: {e}", path.display()))
            })?;
            config.apply_file(&text)?;
        }
        for (key, value) in overrides {
            config.set(key, value)?;
        }
        config.check()?;
        Ok(config)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", number + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('_', "-");
        match key.as_str() {
            "n" => self.n_sites = parse(&key, value)?,
            "alpha" => self.alpha = value.trim().parse()?,
            "omega" => self.omega = parse(&key, value)?,
            "d-max" => self.d_max = parse(&key, value)?,
            "ell-min" => self.ell_min = parse(&key, value)?,
            "ell-max" => self.ell_max = Some(parse(&key, value)?),
            "n-list" => {
                self.n_list = value
                    .split(',')
                    .map(|v| parse(&key, v))
                    .collect::<Result<_>>()?
            }
            "fit-min" => self.fit_window.0 = parse(&key, value)?,
            "fit-max" => self.fit_window.1 = parse(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "seed" => self.seed = parse(&key, value)?,
            "threads" => self.threads = parse(&key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ChainParams> {
        ChainParams::new(self.n_sites, self.alpha.value, self.omega)
    }

    pub fn ell_range(&self) -> (usize, usize) {
        let top = (self.n_sites / 2).saturating_sub(2);
        (self.ell_min, self.ell_max.unwrap_or(top))
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.params().map_err(|e| Error::Config(e.to_string()))?;
        let (lo, hi) = self.fit_window;
        if !(lo > 0.0 && hi > lo) {
            return bad(format!(
                "fit window [{lo}, {hi}] must satisfy 0 < min < max"
            ));
        }
        match self.mode {
            Mode::Setting1 if self.d_max + 1 >= self.n_sites => bad(format!(
                "d-max {} needs more than {} sites",
                self.d_max, self.n_sites
            )),
            Mode::Setting2 => {
                let (a, b) = self.ell_range();
                let top = self.n_sites / 2 - 2;
                if a < 1 || a > b || b > top {
                    bad(format!("ell range {a}..={b} must lie within 1..={top}"))
                } else {
                    Ok(())
                }
            }
            Mode::SizeSweep => {
                if self.n_list.is_empty() {
                    return bad("n-list is empty".into());
                }
                if let Some(n) = self.n_list.iter().find(|&&n| n < 6 || n % 2 == 1) {
                    return bad(format!("size sweep needs even N >= 6, got {n}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn presets_and_literals() {
        let a: Alpha = "a2".parse().unwrap();
        assert_eq!(a.value, 0.95);
        assert_eq!("a4".parse::<Alpha>().unwrap().value, 1.0 - 1e-7);
        assert_eq!("0.5".parse::<Alpha>().unwrap().value, 0.5);
        assert!("a9".parse::<Alpha>().is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# sweep\nn = 60\nalpha = a1\nd_max = 20").unwrap();
        let c = RunConfig::from_sources(Mode::Setting1, Some(file.path()), &[("n", "80".into())])
            .unwrap();
        assert_eq!(c.n_sites, 80);
        assert_eq!(c.alpha.value, 0.9);
        assert_eq!(c.d_max, 20);
        assert_eq!(c.fit_window, (10.0, 40.0));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut c = RunConfig::new(Mode::Setting1);
        assert!(c.apply_file("colour = red").is_err());
        assert!(c.apply_file("n 40").is_err());
        assert!(c.set("n", "forty").is_err());
        assert!(RunConfig::from_sources(Mode::Setting1, None, &[("n", "7".into())]).is_err());
        assert!(RunConfig::from_sources(Mode::Setting1, None, &[("d-max", "99".into())]).is_err());
        assert!(
            RunConfig::from_sources(Mode::Setting2, None, &[("ell-max", "49".into())]).is_err()
        );
        assert!(
            RunConfig::from_sources(Mode::SizeSweep, None, &[("n-list", "20,25".into())]).is_err()
        );
        let err = RunConfig::from_sources(Mode::Setting1, None, &[("alpha", "1.5".into())]);
        assert!(err.unwrap_err().is_config_error());
    }

    #[test]
    fn size_sweep_defaults() {
        let c = RunConfig::new(Mode::SizeSweep);
        assert_eq!(c.n_list, vec![20, 30, 40, 50, 60, 70, 80, 90, 100]);
        assert_eq!(c.fit_window, (40.0, 100.0));
        assert_eq!(RunConfig::new(Mode::Setting2).ell_range(), (1, 48));
    }
}
