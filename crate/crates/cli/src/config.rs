//! Study configuration and the plain `key = value` file format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ridc_core::ridc::MAX_LEVELS;

use crate::error::{CliError, CliResult};

/// Environment variable that overrides the detected core count.
pub const PARALLELISM_ENV: &str = "RIDC_AVAILABLE_PARALLELISM";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    AdvectionDiffusion,
    Burgers,
}

impl FromStr for Problem {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "adv-diff" => Ok(Problem::AdvectionDiffusion),
            "burgers" => Ok(Problem::Burgers),
            _ => Err(CliError::Config(format!(
                "unknown problem `{s}` (expected adv-diff or burgers)"
            ))),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::AdvectionDiffusion => "adv-diff",
            Problem::Burgers => "burgers",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Fbe,
    Imex3,
    Imex4,
    /// RIDC with the given number of levels over forward-backward Euler.
    Ridc(usize),
}

impl Scheme {
    pub fn levels(&self) -> Option<usize> {
        match self {
            Scheme::Ridc(p) => Some(*p),
            _ => None,
        }
    }
}

impl FromStr for Scheme {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "fbe" => return Ok(Scheme::Fbe),
            "imex3" => return Ok(Scheme::Imex3),
            "imex4" => return Ok(Scheme::Imex4),
            "ridc4-fbe" => return Ok(Scheme::Ridc(4)),
            _ => {}
        }
        let p = s
            .strip_prefix("ridc-")
            .or_else(|| s.strip_prefix("ridc").and_then(|r| r.strip_suffix("-fbe")))
            .and_then(|p| p.parse::<usize>().ok());
        match p {
            Some(p) if (2..=MAX_LEVELS).contains(&p) => Ok(Scheme::Ridc(p)),
            _ => Err(CliError::Config(format!(
                "unknown scheme `{s}` (expected fbe, imex3, imex4, ridc4-fbe or ridc-p with p in 2..={MAX_LEVELS})"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Fbe => f.write_str("fbe"),
            Scheme::Imex3 => f.write_str("imex3"),
            Scheme::Imex4 => f.write_str("imex4"),
            Scheme::Ridc(4) => f.write_str("ridc4-fbe"),
            Scheme::Ridc(p) => write!(f, "ridc-{p}"),
        }
    }
}

/// Norm used for the observed-order column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    Inf,
    L2,
}

impl FromStr for Norm {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "inf" | "max" => Ok(Norm::Inf),
            "l2" => Ok(Norm::L2),
            _ => Err(CliError::Config(format!(
                "unknown norm `{s}` (expected inf or l2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problem: Problem,
    pub scheme: Scheme,
    /// Strictly increasing total step counts.
    pub steps: Vec<usize>,
    pub workers: usize,
    pub restarts: usize,
    pub norm: Norm,
    pub out: Option<PathBuf>,
    pub full_scale: bool,
    /// Overrides the grid spacing implied by the scale.
    pub dx: Option<f64>,
    /// Overrides the final time implied by the scale.
    pub t_end: Option<f64>,
    /// Reference steps per finest study step.
    pub refinement: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            problem: Problem::AdvectionDiffusion,
            scheme: Scheme::Ridc(4),
            steps: vec![100, 200, 400, 800, 1600],
            workers: 1,
            restarts: 1,
            norm: Norm::Inf,
            out: None,
            full_scale: false,
            dx: None,
            t_end: None,
            refinement: 8,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.steps.is_empty() {
            return Err(CliError::Config(
                "at least one step count is required".into(),
            ));
        }
        if self.steps[0] == 0 || self.steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(format!(
                "step counts must be positive and strictly increasing, got {:?}",
                self.steps
            )));
        }
        if self.workers == 0 || self.restarts == 0 {
            return Err(CliError::Config(
                "worker and restart counts must be at least 1".into(),
            ));
        }
        if self.refinement < 8 {
            return Err(CliError::Config(format!(
                "refinement must be at least 8, got {}",
                self.refinement
            )));
        }
        for (name, v) in [("dx", self.dx), ("t_end", self.t_end)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Config(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "problem" => self.problem = value.parse()?,
            "scheme" => self.scheme = value.parse()?,
            "steps" => self.steps = parse_list(key, value)?,
            "workers" => self.workers = parse_value(key, value)?,
            "restarts" => self.restarts = parse_value(key, value)?,
            "norm" => self.norm = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "full_scale" | "full-scale" | "paper_scale" | "paper-scale" => {
                self.full_scale = parse_value(key, value)?
            }
            "dx" => self.dx = Some(parse_fraction(key, value)?),
            "t_end" | "t-end" => self.t_end = Some(parse_value(key, value)?),
            "refinement" => self.refinement = parse_value(key, value)?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown configuration key `{key}`"
                )))
            }
        }
        Ok(())
    }

    /// Reads a configuration file: one `key = value` per line, `#` comments.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }
}

/// Cores the studies may use, honouring [`PARALLELISM_ENV`].
pub fn available_parallelism() -> usize {
    std::env::var(PARALLELISM_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value `{value}` for `{key}`")))
}

/// Comma-separated list of integers.
pub fn parse_list(key: &str, value: &str) -> CliResult<Vec<usize>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

/// Accepts a decimal or a `1/n` fraction.
pub fn parse_fraction(key: &str, value: &str) -> CliResult<f64> {
    match value.split_once('/') {
        Some((num, den)) => {
            let num: f64 = parse_value(key, num.trim())?;
            let den: f64 = parse_value(key, den.trim())?;
            Ok(num / den)
        }
        None => parse_value(key, value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in ["fbe", "imex3", "imex4", "ridc4-fbe", "ridc-2", "ridc-12"] {
            assert_eq!(s.parse::<Scheme>().unwrap().to_string(), s);
        }
        assert_eq!("ridc-4".parse::<Scheme>().unwrap(), Scheme::Ridc(4));
        assert_eq!("ridc3-fbe".parse::<Scheme>().unwrap(), Scheme::Ridc(3));
        assert!("ridc-1".parse::<Scheme>().is_err());
        assert!("ridc-13".parse::<Scheme>().is_err());
        assert!("rk4".parse::<Scheme>().is_err());
    }

    #[test]
    fn problem_names() {
        assert_eq!("burgers".parse::<Problem>().unwrap(), Problem::Burgers);
        assert!("heat".parse::<Problem>().is_err());
    }

    #[test]
    fn key_value_file() {
        let cfg = StudyConfig::from_text(
            "# sweep\nproblem = burgers\nscheme=ridc-3\nsteps = 500, 1000\n\ndx = 1/100\nnorm = l2 # trailing\n",
        )
        .unwrap();
        assert_eq!(cfg.problem, Problem::Burgers);
        assert_eq!(cfg.scheme, Scheme::Ridc(3));
        assert_eq!(cfg.steps, vec![500, 1000]);
        assert_eq!(cfg.dx, Some(0.01));
        assert_eq!(cfg.norm, Norm::L2);
        assert!(StudyConfig::from_text("steps 100").is_err());
        assert!(StudyConfig::from_text("colour = red").is_err());
    }

    #[test]
    fn validation() {
        assert!(StudyConfig::default().validate().is_ok());
        let bad = StudyConfig {
            steps: vec![200, 100],
            ..StudyConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = StudyConfig {
            steps: vec![100, 100],
            ..StudyConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = StudyConfig {
            refinement: 4,
            ..StudyConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
