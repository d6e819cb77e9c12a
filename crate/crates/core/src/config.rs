//! Plain-text `key = value` run configuration.
//!
//! ```text
//! # 32^3 forced run
//! grid_n = 32
//! nu = 0.05
//! t_end = 5
//! force_band_lo = 3
//! force_band_hi = 4
//! force_amp = 0.5
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. `grid_n` is the
//! physical resolution per dimension; the retained cutoff is
//! `(grid_n - 1) / 3`. Defaults: `nu = 0.01`, `dt = 1e-3`, `t_end = 1`,
//! `sample_every = 10`, `seed = 0`, `init_mode = random`, `init_band_lo = 1`,
//! `init_band_hi = cutoff`, `init_exponent = -2`, `init_energy = 0.5`,
//! `force_amp = 0` (unforced), `out_dir = .`.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::field::DEFAULT_INIT_ENERGY;
use crate::integrator::{ForcingSpec, InitSpec, SimConfig};
use crate::lattice::{Grid, WaveVector};
use crate::nonlinear::TriadSpec;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key `{key}`")]
    MissingKey { key: String },
    #[error("line {line}: {message}")]
    InvalidValue { line: usize, message: String },
}

impl ConfigError {
    pub fn kind(&self) -> &'static str {
        match self {
            ConfigError::UnknownKey { .. } => "UnknownKey",
            ConfigError::MissingKey { .. } => "MissingKey",
            ConfigError::InvalidValue { .. } => "InvalidValue",
        }
    }
}

const KEYS: &[&str] = &[
    "grid_n",
    "nu",
    "dt",
    "t_end",
    "sample_every",
    "seed",
    "init_mode",
    "init_band_lo",
    "init_band_hi",
    "init_exponent",
    "init_energy",
    "init_checkpoint",
    "triad",
    "force_band_lo",
    "force_band_hi",
    "force_amp",
    "out_dir",
];

struct Entries<'a> {
    map: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Entries<'a> {
    fn raw(&self, key: &str) -> Option<(usize, &'a str)> {
        self.map.get(key).copied()
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        let Some((line, v)) = self.raw(key) else { return Ok(None) };
        v.parse::<T>().map(Some).map_err(|_| ConfigError::InvalidValue {
            line,
            message: format!("cannot parse `{v}` for `{key}`"),
        })
    }

    fn real(&self, key: &str, check: impl Fn(f64) -> bool, what: &str) -> Result<Option<f64>, ConfigError> {
        let Some(x) = self.parse::<f64>(key)? else { return Ok(None) };
        let line = self.raw(key).map(|r| r.0).unwrap_or(0);
        if !x.is_finite() || !check(x) {
            return Err(ConfigError::InvalidValue { line, message: format!("`{key}` must be {what}, got {x}") });
        }
        Ok(Some(x))
    }

    fn line(&self, key: &str) -> usize {
        self.raw(key).map(|r| r.0).unwrap_or(0)
    }
}

pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut map: HashMap<&str, (usize, &str)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let Some((k, v)) = t.split_once('=') else {
            return Err(ConfigError::InvalidValue { line, message: format!("expected `key = value`, got `{t}`") });
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey { line, key: k.to_string() });
        }
        if let Some((first, _)) = map.insert(k, (line, v)) {
            return Err(ConfigError::InvalidValue { line, message: format!("duplicate key `{k}` (lines {first} and {line})") });
        }
    }
    let e = Entries { map };

    let grid_n: usize =
        e.parse("grid_n")?.ok_or_else(|| ConfigError::MissingKey { key: "grid_n".into() })?;
    let grid = Grid::from_physical(grid_n)
        .map_err(|err| ConfigError::InvalidValue { line: e.line("grid_n"), message: err.to_string() })?;
    let mut cfg = SimConfig::new(grid);

    if let Some(x) = e.real("nu", |x| x >= 0.0, "non-negative")? {
        cfg.nu = x;
    }
    if let Some(x) = e.real("dt", |x| x > 0.0, "positive")? {
        cfg.dt = x;
    }
    if let Some(x) = e.real("t_end", |x| x >= 0.0, "non-negative")? {
        cfg.t_end = x;
    }
    if let Some(x) = e.parse::<u64>("sample_every")? {
        if x == 0 {
            return Err(ConfigError::InvalidValue { line: e.line("sample_every"), message: "`sample_every` must be >= 1".into() });
        }
        cfg.sample_every = x;
    }
    if let Some(x) = e.parse::<u64>("seed")? {
        cfg.seed = x;
    }
    if let Some((_, v)) = e.raw("out_dir") {
        cfg.out_dir = PathBuf::from(v);
    }

    let mode = e.raw("init_mode").map(|r| r.1).unwrap_or("random");
    cfg.init = match mode {
        "random" => {
            let lo = e.real("init_band_lo", |x| x >= 0.0, "non-negative")?.unwrap_or(1.0);
            let hi = e.real("init_band_hi", |x| x >= 0.0, "non-negative")?.unwrap_or(grid.n() as f64);
            if lo > hi {
                return Err(ConfigError::InvalidValue {
                    line: e.line("init_band_hi"),
                    message: format!("init band [{lo}, {hi}] is empty"),
                });
            }
            let exponent = e.real("init_exponent", |_| true, "finite")?.unwrap_or(-2.0);
            let energy = e.real("init_energy", |x| x > 0.0, "positive")?.unwrap_or(DEFAULT_INIT_ENERGY);
            InitSpec::Random { band: [lo, hi], exponent, energy }
        }
        "checkpoint" => {
            let (_, p) = e.raw("init_checkpoint").ok_or_else(|| ConfigError::MissingKey { key: "init_checkpoint".into() })?;
            InitSpec::Checkpoint(PathBuf::from(p))
        }
        "triad" => {
            let (line, v) = e.raw("triad").ok_or_else(|| ConfigError::MissingKey { key: "triad".into() })?;
            InitSpec::Triad(parse_triad(line, v, grid)?)
        }
        other => {
            return Err(ConfigError::InvalidValue {
                line: e.line("init_mode"),
                message: format!("`init_mode` must be random, checkpoint or triad, got `{other}`"),
            })
        }
    };

    let amp = e.real("force_amp", |x| x >= 0.0, "non-negative")?.unwrap_or(0.0);
    let lo = e.real("force_band_lo", |x| x >= 0.0, "non-negative")?;
    let hi = e.real("force_band_hi", |x| x >= 0.0, "non-negative")?;
    if amp > 0.0 {
        let lo = lo.ok_or_else(|| ConfigError::MissingKey { key: "force_band_lo".into() })?;
        let hi = hi.ok_or_else(|| ConfigError::MissingKey { key: "force_band_hi".into() })?;
        if lo > hi || hi > grid.n() as f64 {
            return Err(ConfigError::InvalidValue {
                line: e.line("force_band_hi"),
                message: format!("forcing band [{lo}, {hi}] must be non-empty and within cutoff {}", grid.n()),
            });
        }
        cfg.forcing = Some(ForcingSpec { band: [lo, hi], amplitude: amp });
    }
    Ok(cfg)
}

fn parse_triad(line: usize, v: &str, grid: Grid) -> Result<TriadSpec, ConfigError> {
    let bad = |message: String| ConfigError::InvalidValue { line, message };
    let ints: Vec<i32> = v
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i32>().map_err(|_| bad(format!("`triad`: cannot parse `{s}`"))))
        .collect::<Result<_, _>>()?;
    if ints.len() != 9 {
        return Err(bad(format!("`triad` needs 9 integers, got {}", ints.len())));
    }
    let w = |i: usize| WaveVector::new(ints[i], ints[i + 1], ints[i + 2]);
    let t = TriadSpec::new(w(0), w(3), w(6)).map_err(|err| bad(err.to_string()))?;
    if t.max_abs() > grid.n() {
        return Err(bad(format!("triad exceeds cutoff {}", grid.n())));
    }
    Ok(t)
}
