//! Run configuration: defaults, an optional flat `key = value` file and
//! command-line overrides, merged in that order.
//!
//! The file format also accepts the `# config.key = value` header lines that
//! every CSV output starts with, and the `config` object of a JSON output, so
//! any output file can be fed back with `--config` to reproduce it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::defaults;
use crate::dispersion::Coupling;
use crate::error::{Error, Result};
use crate::torus::{Dim, TorusPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    TwoBody,
    ThreeBody,
    EssSpectrum,
    Band,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::TwoBody => "two-body",
            Command::ThreeBody => "three-body",
            Command::EssSpectrum => "ess-spectrum",
            Command::Band => "band",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid(format!("format must be csv or json, got {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Raw settings before validation; every field optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub dim: Option<usize>,
    pub mu: Option<f64>,
    pub gamma: Option<f64>,
    pub k: Option<Vec<f64>>,
    pub k_sweep: Option<usize>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub branch_sweep: Option<usize>,
    pub format: Option<Format>,
}

impl Settings {
    /// `other` wins wherever it is set.
    pub fn overlay(self, other: Settings) -> Settings {
        Settings {
            dim: other.dim.or(self.dim),
            mu: other.mu.or(self.mu),
            gamma: other.gamma.or(self.gamma),
            k: other.k.or(self.k),
            k_sweep: other.k_sweep.or(self.k_sweep),
            n: other.n.or(self.n),
            tol: other.tol.or(self.tol),
            branch_sweep: other.branch_sweep.or(self.branch_sweep),
            format: other.format.or(self.format),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: String| Error::invalid(format!("config key {key}: {e}"));
        match key {
            "dim" => self.dim = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "mu" => self.mu = Some(parse_real(value).map_err(|e| bad(e.to_string()))?),
            "gamma" => self.gamma = Some(parse_real(value).map_err(|e| bad(e.to_string()))?),
            "k" | "K" => self.k = Some(parse_list(value).map_err(|e| bad(e.to_string()))?),
            "k_sweep" | "K_sweep" | "k-sweep" | "K-sweep" => {
                self.k_sweep = Some(value.parse().map_err(|e| bad(format!("{e}")))?)
            }
            "n" => self.n = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "tol" => self.tol = Some(parse_real(value).map_err(|e| bad(e.to_string()))?),
            "branch_sweep" => self.branch_sweep = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "format" => self.format = Some(value.parse()?),
            // informational keys written by outputs
            "command" | "version" => {}
            other => return Err(Error::invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a flat config file, a CSV output header or a JSON output.
    pub fn parse(text: &str) -> Result<Settings> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            return Settings::from_json(trimmed);
        }
        let mut s = Settings::default();
        for line in text.lines() {
            let line = line.trim();
            let body = if let Some(rest) = line.strip_prefix('#') {
                match rest.trim().strip_prefix("config.") {
                    Some(kv) => kv,
                    None => continue,
                }
            } else if line.is_empty() {
                continue;
            } else if !line.contains('=') {
                // first data row of a CSV output: the header is over
                break;
            } else {
                line
            };
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key = value, got {line:?}")))?;
            s.set(key.trim(), value.trim())?;
        }
        Ok(s)
    }

    fn from_json(text: &str) -> Result<Settings> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::invalid(format!("bad JSON config: {e}")))?;
        let obj = v.get("config").unwrap_or(&v);
        let obj = obj
            .as_object()
            .ok_or_else(|| Error::invalid("JSON config must be an object"))?;
        let mut s = Settings::default();
        for (key, value) in obj {
            let text = match value {
                Value::String(t) => t.clone(),
                Value::Null => continue,
                other => other.to_string(),
            };
            s.set(key, &text)?;
        }
        Ok(s)
    }
}

/// `x`, `pi`, `-pi/2`, `3pi/4`, `0.5*pi`.
pub fn parse_real(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    let bad = || Error::invalid(format!("cannot parse {s:?} as a real number"));
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coef = num.strip_suffix("pi").ok_or_else(bad)?.trim().trim_end_matches('*').trim();
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(c * std::f64::consts::PI / den)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(parse_real)
        .collect()
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dim: Dim,
    /// Absent only for the default verification suite.
    pub mu: Option<f64>,
    pub gamma: f64,
    /// Explicit momenta; in two dimensions consecutive pairs form a point.
    pub k: Vec<f64>,
    /// Points per axis of an evenly spaced sweep; replaces `k` when set.
    pub k_sweep: Option<usize>,
    pub n: usize,
    pub tol: f64,
    /// Points per axis used to scan the two-particle branch.
    pub branch_sweep: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(command: Command, s: Settings, out: Option<PathBuf>) -> Result<RunConfig> {
        let dim = Dim::try_from(s.dim.unwrap_or(1))?;
        let gamma = s.gamma.unwrap_or(1.0);
        let mu = s.mu;
        match mu {
            Some(m) => {
                Coupling::new(m, gamma, dim)?;
            }
            None if command != Command::Verify => {
                return Err(Error::invalid("mu is required (mu != 0)"));
            }
            None => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::invalid(format!("gamma must be > 0, got {gamma}")));
                }
            }
        }
        let n = s.n.unwrap_or(match command {
            Command::ThreeBody | Command::EssSpectrum => defaults::three_body_n(dim),
            Command::Verify => defaults::verify_n(dim),
            _ => defaults::quadrature_n(dim),
        });
        let tol = s.tol.unwrap_or(defaults::TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::invalid(format!("tol must be > 0, got {tol}")));
        }
        if let Some(0) = s.k_sweep {
            return Err(Error::invalid("k sweep needs at least one point"));
        }
        let branch_sweep = s.branch_sweep.unwrap_or(defaults::branch_sweep(dim));
        if branch_sweep == 0 {
            return Err(Error::invalid("branch sweep needs at least one point"));
        }
        let k = s.k.unwrap_or_default();
        if k.len() % dim.get() != 0 {
            return Err(Error::invalid(format!(
                "{} momentum coordinates do not form {}-dimensional points",
                k.len(),
                dim
            )));
        }
        let cfg = RunConfig {
            command,
            dim,
            mu,
            gamma,
            k,
            k_sweep: s.k_sweep,
            n,
            tol,
            branch_sweep,
            format: s.format.unwrap_or_default(),
            out,
        };
        cfg.momenta()?;
        Ok(cfg)
    }

    /// Momenta the command runs over: the sweep, the explicit list, or
    /// `None` when neither was given.
    pub fn momenta(&self) -> Result<Option<Vec<TorusPoint>>> {
        if let Some(m) = self.k_sweep {
            return Ok(Some(crate::torus::sweep(self.dim, m)));
        }
        if self.k.is_empty() {
            return Ok(None);
        }
        self.k
            .chunks(self.dim.get())
            .map(TorusPoint::wrap)
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn coupling(&self, mu: f64) -> Result<Coupling> {
        Coupling::new(mu, self.gamma, self.dim)
    }

    /// Ordered `(key, value)` pairs; enough to reproduce the run exactly.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e = vec![
            ("command", self.command.name().to_string()),
            ("version", env!("CARGO_PKG_VERSION").to_string()),
            ("dim", self.dim.get().to_string()),
        ];
        if let Some(mu) = self.mu {
            e.push(("mu", mu.to_string()));
        }
        e.push(("gamma", self.gamma.to_string()));
        if !self.k.is_empty() {
            e.push(("k", self.k.iter().map(f64::to_string).collect::<Vec<_>>().join(",")));
        }
        if let Some(m) = self.k_sweep {
            e.push(("k_sweep", m.to_string()));
        }
        e.push(("n", self.n.to_string()));
        e.push(("tol", self.tol.to_string()));
        e.push(("branch_sweep", self.branch_sweep.to_string()));
        e.push(("format", self.format.to_string()));
        e
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in self.entries() {
            m.insert(k.to_string(), Value::String(v));
        }
        Value::Object(m)
    }

    pub fn entries_map(&self) -> BTreeMap<&'static str, String> {
        self.entries().into_iter().collect()
    }
}
