//! Run configuration: one schema holding every default, a `key = value`
//! file format and a canonical text form that parses back to the same value.
//!
//! ```text
//! # comments and blank lines are ignored
//! command = spectrum
//! symbol = abs(ab:0.25)
//! n_max = 10000
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::field::DEFAULT_GRID_RADII;
use crate::operators::{DEFAULT_CAUCHY_EPS, DEFAULT_LIMIT_GENERATIONS};

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Command {
    Decompose,
    Avg,
    Carleson,
    Apply,
    Converge,
    Spectrum,
    ReproduceProp15,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Decompose,
        Command::Avg,
        Command::Carleson,
        Command::Apply,
        Command::Converge,
        Command::Spectrum,
        Command::ReproduceProp15,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Avg => "avg",
            Command::Carleson => "carleson",
            Command::Apply => "apply",
            Command::Converge => "converge",
            Command::Spectrum => "spectrum",
            Command::ReproduceProp15 => "reproduce-prop15",
        }
    }
}

/// Operator selected by `apply` and `converge`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ApplyOperator {
    Toeplitz,
    Hankel,
    Series,
}

impl ApplyOperator {
    pub fn name(self) -> &'static str {
        match self {
            ApplyOperator::Toeplitz => "toeplitz",
            ApplyOperator::Hankel => "hankel",
            ApplyOperator::Series => "series",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

macro_rules! named_enum {
    ($ty:ty, $all:expr, $what:literal) => {
        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                $all.into_iter()
                    .find(|v| v.name() == s.trim())
                    .ok_or_else(|| format!("unknown {} '{}'", $what, s.trim()))
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

named_enum!(Command, Command::ALL, "command");
named_enum!(
    ApplyOperator,
    [ApplyOperator::Toeplitz, ApplyOperator::Hankel, ApplyOperator::Series],
    "operator"
);
named_enum!(Format, [Format::Csv, Format::Json], "format");

/// Every knob of a run. Field order is the canonical key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Symbol in the mini-language of [`crate::symbol::Symbol::parse`].
    pub symbol: String,
    /// Test function, `poly:c0,c1,…` or `mono:n`.
    pub test_function: String,
    pub operator: ApplyOperator,
    pub transpose: bool,
    /// First and last generation of averaging ladders (`δ = 2^{-m}`).
    pub m_min: u32,
    pub m_max: u32,
    /// Generation cut-off of `apply` with the series operator.
    pub generation: u32,
    /// Last eigenvalue index and the start of the growth-fit window.
    pub n_max: usize,
    pub fit_min: usize,
    pub rho: f64,
    pub theta: f64,
    /// Exponent of `a_b` in `reproduce-prop15`.
    pub b: f64,
    pub grid_radii: Vec<f64>,
    pub grid_angles: usize,
    pub zeta_grid: (usize, usize),
    pub tol: f64,
    pub cauchy_eps: f64,
    pub ladder_steps: u32,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut grid_radii = vec![0.0];
        grid_radii.extend(DEFAULT_GRID_RADII);
        RunConfig {
            command: Command::Spectrum,
            symbol: "ab:0.25".into(),
            test_function: "poly:1,1".into(),
            operator: ApplyOperator::Toeplitz,
            transpose: false,
            m_min: 4,
            m_max: 14,
            generation: 5,
            n_max: 10_000,
            fit_min: 100,
            rho: 0.875,
            theta: 0.0,
            b: 0.25,
            grid_radii,
            grid_angles: 8,
            zeta_grid: (16, 16),
            tol: 1e-10,
            cauchy_eps: DEFAULT_CAUCHY_EPS,
            ladder_steps: DEFAULT_LIMIT_GENERATIONS,
            output: None,
            format: Format::Csv,
        }
    }
}

/// Config keys in canonical order.
pub const KEYS: [&str; 21] = [
    "command",
    "symbol",
    "test_function",
    "operator",
    "transpose",
    "m_min",
    "m_max",
    "generation",
    "n_max",
    "fit_min",
    "rho",
    "theta",
    "b",
    "grid_radii",
    "grid_angles",
    "zeta_grid",
    "tol",
    "cauchy_eps",
    "ladder_steps",
    "output",
    "format",
];

fn list(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Value of `key` in canonical form.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "command" => self.command.to_string(),
            "symbol" => self.symbol.clone(),
            "test_function" => self.test_function.clone(),
            "operator" => self.operator.to_string(),
            "transpose" => self.transpose.to_string(),
            "m_min" => self.m_min.to_string(),
            "m_max" => self.m_max.to_string(),
            "generation" => self.generation.to_string(),
            "n_max" => self.n_max.to_string(),
            "fit_min" => self.fit_min.to_string(),
            "rho" => fmt_f64(self.rho),
            "theta" => fmt_f64(self.theta),
            "b" => fmt_f64(self.b),
            "grid_radii" => list(&self.grid_radii),
            "grid_angles" => self.grid_angles.to_string(),
            "zeta_grid" => format!("{}x{}", self.zeta_grid.0, self.zeta_grid.1),
            "tol" => fmt_f64(self.tol),
            "cauchy_eps" => fmt_f64(self.cauchy_eps),
            "ladder_steps" => self.ladder_steps.to_string(),
            "output" => self
                .output
                .as_ref()
                .map_or_else(|| "-".to_string(), |p| p.display().to_string()),
            "format" => self.format.to_string(),
            _ => return None,
        })
    }

    /// Sets one key from text. The error message names the problem only;
    /// callers attach the position.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("invalid number '{v}'"))
        }
        let v = value.trim();
        match key {
            "command" => self.command = v.parse()?,
            "symbol" => self.symbol = v.to_string(),
            "test_function" => self.test_function = v.to_string(),
            "operator" => self.operator = v.parse()?,
            "transpose" => self.transpose = v.parse().map_err(|_| format!("invalid boolean '{v}'"))?,
            "m_min" => self.m_min = num(v)?,
            "m_max" => self.m_max = num(v)?,
            "generation" => self.generation = num(v)?,
            "n_max" => self.n_max = num(v)?,
            "fit_min" => self.fit_min = num(v)?,
            "rho" => self.rho = num(v)?,
            "theta" => self.theta = num(v)?,
            "b" => self.b = num(v)?,
            "grid_radii" => {
                self.grid_radii = v.split(',').map(|s| num(s.trim())).collect::<std::result::Result<_, _>>()?
            }
            "grid_angles" => self.grid_angles = num(v)?,
            "zeta_grid" => {
                let (a, b) = v
                    .split_once('x')
                    .ok_or_else(|| format!("expected '<n>x<m>', got '{v}'"))?;
                self.zeta_grid = (num(a.trim())?, num(b.trim())?);
            }
            "tol" => self.tol = num(v)?,
            "cauchy_eps" => self.cauchy_eps = num(v)?,
            "ladder_steps" => self.ladder_steps = num(v)?,
            "output" => self.output = (v != "-").then(|| PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let indent = raw.len() - trimmed.len();
            let Some(eq) = raw.find('=') else {
                return Err(Error::parse(line, indent + 1, "expected 'key = value'"));
            };
            let key = raw[..eq].trim();
            let value_start = eq + 1 + (raw[eq + 1..].len() - raw[eq + 1..].trim_start().len());
            let col = |byte: usize| raw[..byte].chars().count() + 1;
            if seen.contains(&key.to_string()) {
                return Err(Error::parse(line, col(indent), format!("duplicate key '{key}'")));
            }
            if !KEYS.contains(&key) {
                return Err(Error::parse(line, col(indent), format!("unknown key '{key}'")));
            }
            self.set(key, &raw[eq + 1..])
                .map_err(|msg| Error::parse(line, col(value_start), msg))?;
            seen.push(key.to_string());
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.merge_text(text)?;
        Ok(c)
    }

    /// All keys in canonical order, one `key = value` per line.
    pub fn canonical(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("known key")))
            .collect()
    }

    /// Checks every numeric field against its documented range.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: &str| Err(Error::domain(format!("{key} = {}: {why}", self.get(key).unwrap_or_default())));
        if !(1..=40).contains(&self.m_max) {
            return bad("m_max", "need 1 ≤ m_max ≤ 40");
        }
        // decompose always starts at generation 1
        if self.command != Command::Decompose && !(1..=self.m_max).contains(&self.m_min) {
            return bad("m_min", "need 1 ≤ m_min ≤ m_max");
        }
        if self.command == Command::Decompose && self.m_max > 20 {
            return bad("m_max", "decompose lists at most 20 generations");
        }
        if self.generation > crate::operators::apply::MAX_SERIES_GENERATION {
            return bad("generation", "series generation is capped at 16");
        }
        if self.n_max > 1_000_000 {
            return bad("n_max", "must be at most 10^6");
        }
        if self.fit_min == 0 {
            return bad("fit_min", "must be at least 1");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho", "must lie in (0, 1)");
        }
        if !(0.0..=std::f64::consts::TAU).contains(&self.theta) {
            return bad("theta", "must lie in [0, 2π]");
        }
        if !(self.b > 0.0 && self.b <= 0.5) {
            return bad("b", "must lie in (0, 1/2]");
        }
        if self.grid_radii.is_empty() || self.grid_radii.iter().any(|r| !(0.0..1.0).contains(r)) {
            return bad("grid_radii", "radii must lie in [0, 1)");
        }
        if !(1..=1024).contains(&self.grid_angles) {
            return bad("grid_angles", "must lie in 1..=1024");
        }
        let (zr, zp) = self.zeta_grid;
        if !(1..=256).contains(&zr) || !(1..=256).contains(&zp) {
            return bad("zeta_grid", "each side must lie in 1..=256");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("tol", "must lie in (0, 1)");
        }
        if !(self.cauchy_eps > 0.0) {
            return bad("cauchy_eps", "must be positive");
        }
        if !(1..=52).contains(&self.ladder_steps) {
            return bad("ladder_steps", "must lie in 1..=52");
        }
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// Shortest round-trip text, in exponent form for small magnitudes.
fn fmt_f64(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        let c = RunConfig::default();
        let text = c.canonical();
        let d = RunConfig::parse(&text).unwrap();
        assert_eq!(c, d);
        assert_eq!(text, d.canonical());
        c.validate().unwrap();
    }

    #[test]
    fn errors_carry_positions() {
        let err = RunConfig::parse("# header\n\n  n_max = ten\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 11, .. }), "{err}");
        let err = RunConfig::parse("colour = red").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 1, .. }), "{err}");
        let err = RunConfig::parse("tol = 1\ntol = 2").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(RunConfig::parse("no equals sign").is_err());
    }

    #[test]
    fn validation_ranges() {
        let c = RunConfig { rho: 1.0, ..RunConfig::default() };
        assert!(c.validate().is_err());
        let c = RunConfig::parse("zeta_grid = 0x4").unwrap();
        assert!(c.validate().is_err());
    }
}
