//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` are comments. Keys are case-sensitive. Lists are
//! comma-separated; a linear grid can be written `start:stop:count`.
//!
//! | key | meaning | unit |
//! |-----|---------|------|
//! | `D` | roughness exponent in (0, 1/2) | none |
//! | `V` | large-time volatility (or give `C_sf`) | 1/sqrt(time) |
//! | `C_sf` | tail constant, replaces `V` | none |
//! | `lambda` | shock intensity | 1/time |
//! | `tau0` | last virtual shock time, negative (or give `sigma0`) | time |
//! | `sigma0` | initial volatility, replaces `tau0` | 1/sqrt(time) |
//! | `samples`, `chunk`, `seed`, `stream` | Monte Carlo settings | count |
//! | `kappa` / `kappas` | log-strikes | none |
//! | `t` / `ts` | maturities | time |
//! | `theta_low`, `theta_high`, `typical_z`, `boundary_rule` | regime thresholds | none |
//! | `ou_jumps` | `;`-separated laws: `constant:J`, `exponential:mean`, `pareto:scale:shape` | variance |
//! | `sigma0_tilde`, `ou_paths` | comparator start and path count | |
//! | `out`, `format` | output path and `csv` or `json` | |
//! | `expect_c_sf`, `expect_sigma0`, `expect_C_sf`, `expect_C_tilde` | reference constants checked by `verify` | |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::asymptotics::{BoundaryRule, Thresholds};
use crate::model::{derive_constants, DerivedConstants, ModelParams};
use crate::rng::{SeedSpec, DEFAULT_CHUNK};
use crate::simulate::{JumpLaw, McConfig, OuSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{file}:{line}: {message}")]
    Syntax { file: String, line: usize, message: String },
    #[error("{file}:{line}: field `{field}`: {message}")]
    Field { file: String, line: usize, field: String, message: String },
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown format `{s}`, expected csv or json")),
        }
    }
}

/// Volatility scale given either directly or through the tail constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ScaleSpec {
    V(f64),
    CSf(f64),
}

/// Starting point given either as `tau0` or `sigma0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StartSpec {
    Tau0(f64),
    Sigma0(f64),
}

/// Reference constants for the `verify` identity check.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ExpectedConstants {
    pub c_sf: Option<f64>,
    pub sigma0: Option<f64>,
    pub cap_c_sf: Option<f64>,
    pub c_tilde: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub d: f64,
    pub scale: ScaleSpec,
    pub lambda: f64,
    pub start: StartSpec,
    pub samples: usize,
    pub chunk: usize,
    pub seed: u64,
    pub stream: u64,
    pub kappas: Vec<f64>,
    pub ts: Vec<f64>,
    pub thresholds: Thresholds,
    pub ou_laws: Vec<JumpLaw>,
    pub sigma0_tilde: Option<f64>,
    pub ou_paths: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub expected: ExpectedConstants,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 0.3,
            scale: ScaleSpec::V(1.0),
            lambda: 5.0,
            start: StartSpec::Tau0(-1.0),
            samples: 100_000,
            chunk: DEFAULT_CHUNK,
            seed: 20_240_601,
            stream: 0,
            kappas: vec![0.0],
            ts: vec![0.1],
            thresholds: Thresholds::default(),
            ou_laws: vec![
                JumpLaw::Constant { size: 1.0 },
                JumpLaw::Exponential { mean: 1.0 },
                JumpLaw::Pareto { scale: 0.5, shape: 2.5 },
            ],
            sigma0_tilde: None,
            ou_paths: 10_000,
            out: None,
            format: OutputFormat::Csv,
            expected: ExpectedConstants::default(),
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> crate::Result<ModelParams> {
        let d = self.d;
        match (self.scale, self.start) {
            (ScaleSpec::V(v), StartSpec::Tau0(tau0)) => ModelParams::new(d, v, self.lambda, tau0),
            (ScaleSpec::V(v), StartSpec::Sigma0(s0)) => ModelParams::from_sigma0(d, v, self.lambda, s0),
            (ScaleSpec::CSf(c), StartSpec::Sigma0(s0)) => ModelParams::from_csf_sigma0(d, c, self.lambda, s0),
            (ScaleSpec::CSf(c), StartSpec::Tau0(tau0)) => {
                let p = ModelParams::from_csf_sigma0(d, c, self.lambda, 1.0)?;
                ModelParams::new(d, p.v, self.lambda, tau0)
            }
        }
    }

    pub fn constants(&self) -> crate::Result<DerivedConstants> {
        derive_constants(&self.params()?)
    }

    pub fn mc(&self) -> McConfig {
        McConfig::new(self.samples, SeedSpec::new(self.seed, self.stream)).with_chunk(self.chunk)
    }

    pub fn ou_specs(&self) -> Vec<OuSpec> {
        self.ou_laws.iter().map(|&jumps| OuSpec { jumps, sigma0_tilde: self.sigma0_tilde }).collect()
    }

    /// Cross-field checks shared by file parsing and flag overrides.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field: &str, message: String| ConfigError::Invalid { field: field.into(), message };
        self.params().map_err(|e| match e {
            crate::Error::Domain { name, .. } => invalid(name, e.to_string()),
            _ => invalid("model", e.to_string()),
        })?;
        self.thresholds.validate().map_err(|e| invalid("thresholds", e.to_string()))?;
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1".into()));
        }
        if self.chunk == 0 {
            return Err(invalid("chunk", "must be at least 1".into()));
        }
        if self.ou_paths == 0 {
            return Err(invalid("ou_paths", "must be at least 1".into()));
        }
        check_grid("kappas", &self.kappas, f64::NEG_INFINITY)?;
        check_grid("ts", &self.ts, 0.0)?;
        Ok(())
    }

    /// Canonical `key = value` text; parsing it gives back an equal config.
    pub fn to_text(&self) -> String {
        let list = |g: &[f64]| g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut lines = vec![format!("D = {}", self.d)];
        lines.push(match self.scale {
            ScaleSpec::V(v) => format!("V = {v}"),
            ScaleSpec::CSf(c) => format!("C_sf = {c}"),
        });
        lines.push(format!("lambda = {}", self.lambda));
        lines.push(match self.start {
            StartSpec::Tau0(t) => format!("tau0 = {t}"),
            StartSpec::Sigma0(s) => format!("sigma0 = {s}"),
        });
        lines.push(format!("samples = {}", self.samples));
        lines.push(format!("chunk = {}", self.chunk));
        lines.push(format!("seed = {}", self.seed));
        lines.push(format!("stream = {}", self.stream));
        lines.push(format!("kappas = {}", list(&self.kappas)));
        lines.push(format!("ts = {}", list(&self.ts)));
        let th = &self.thresholds;
        lines.push(format!("theta_low = {}", th.theta_low));
        lines.push(format!("theta_high = {}", th.theta_high));
        lines.push(format!("typical_z = {}", th.typical_z));
        lines.push(format!("boundary_rule = {}", if th.rule == BoundaryRule::Matched { "matched" } else { "fixed" }));
        let laws: Vec<String> = self.ou_laws.iter().map(JumpLaw::label).collect();
        lines.push(format!("ou_jumps = {}", laws.join("; ")));
        if let Some(s) = self.sigma0_tilde {
            lines.push(format!("sigma0_tilde = {s}"));
        }
        lines.push(format!("ou_paths = {}", self.ou_paths));
        if let Some(o) = &self.out {
            lines.push(format!("out = {}", o.display()));
        }
        lines.push(format!("format = {}", if self.format == OutputFormat::Json { "json" } else { "csv" }));
        let e = &self.expected;
        for (k, v) in [("expect_c_sf", e.c_sf), ("expect_sigma0", e.sigma0), ("expect_C_sf", e.cap_c_sf), ("expect_C_tilde", e.c_tilde)] {
            if let Some(v) = v {
                lines.push(format!("{k} = {v}"));
            }
        }
        lines.join("\n") + "\n"
    }

    /// Parse a configuration file.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parse configuration text; `file` is only used in diagnostics.
    pub fn parse(text: &str, file: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(ConfigError::Syntax { file: file.into(), line, message: format!("expected `key = value`, found `{body}`") });
            };
            let key = k.trim().to_string();
            if entries.contains_key(&key) {
                return Err(ConfigError::Field { file: file.into(), line, field: key, message: "given more than once".into() });
            }
            entries.insert(key, (line, v.trim().to_string()));
        }
        let lines: BTreeMap<String, usize> = entries.iter().map(|(k, (l, _))| (k.clone(), *l)).collect();
        let mut p = Parser { file, entries };
        let mut c = RunConfig::default();
        if let Some(d) = p.take_f64("D")? {
            c.d = d;
        }
        c.scale = match (p.take_f64("V")?, p.take_f64("C_sf")?) {
            (Some(_), Some(_)) => return Err(p.conflict("C_sf", "give either `V` or `C_sf`, not both")),
            (Some(v), None) => ScaleSpec::V(v),
            (None, Some(x)) => ScaleSpec::CSf(x),
            (None, None) => c.scale,
        };
        if let Some(l) = p.take_f64("lambda")? {
            c.lambda = l;
        }
        c.start = match (p.take_f64("tau0")?, p.take_f64("sigma0")?) {
            (Some(_), Some(_)) => return Err(p.conflict("sigma0", "give either `tau0` or `sigma0`, not both")),
            (Some(t), None) => StartSpec::Tau0(t),
            (None, Some(s)) => StartSpec::Sigma0(s),
            (None, None) => c.start,
        };
        if let Some(n) = p.take_u64("samples")? {
            c.samples = n as usize;
        }
        if let Some(n) = p.take_u64("chunk")? {
            c.chunk = n as usize;
        }
        if let Some(n) = p.take_u64("seed")? {
            c.seed = n;
        }
        if let Some(n) = p.take_u64("stream")? {
            c.stream = n;
        }
        if let Some(g) = p.take_grid("kappa", "kappas")? {
            c.kappas = g;
        }
        if let Some(g) = p.take_grid("t", "ts")? {
            c.ts = g;
        }
        if let Some(x) = p.take_f64("theta_low")? {
            c.thresholds.theta_low = x;
        }
        if let Some(x) = p.take_f64("theta_high")? {
            c.thresholds.theta_high = x;
        }
        if let Some(x) = p.take_f64("typical_z")? {
            c.thresholds.typical_z = x;
        }
        if let Some((line, v)) = p.take("boundary_rule") {
            c.thresholds.rule = match v.as_str() {
                "fixed" => BoundaryRule::Fixed,
                "matched" => BoundaryRule::Matched,
                _ => return Err(p.field_err(line, "boundary_rule", "expected `fixed` or `matched`")),
            };
        }
        if let Some((line, v)) = p.take("ou_jumps") {
            c.ou_laws = v
                .split(';')
                .map(|s| parse_law(s.trim()))
                .collect::<Result<_, _>>()
                .map_err(|m| p.field_err(line, "ou_jumps", &m))?;
        }
        c.sigma0_tilde = p.take_f64("sigma0_tilde")?;
        if let Some(n) = p.take_u64("ou_paths")? {
            c.ou_paths = n as usize;
        }
        if let Some((_, v)) = p.take("out") {
            c.out = Some(PathBuf::from(v));
        }
        if let Some((line, v)) = p.take("format") {
            c.format = v.parse().map_err(|m: String| p.field_err(line, "format", &m))?;
        }
        c.expected = ExpectedConstants {
            c_sf: p.take_f64("expect_c_sf")?,
            sigma0: p.take_f64("expect_sigma0")?,
            cap_c_sf: p.take_f64("expect_C_sf")?,
            c_tilde: p.take_f64("expect_C_tilde")?,
        };
        if let Some((key, (line, _))) = p.entries.iter().next() {
            return Err(p.field_err(*line, key, "unknown key"));
        }
        // point cross-field failures at the offending line when there is one
        c.validate().map_err(|e| match e {
            ConfigError::Invalid { field, message } => match lines.get(&field).or_else(|| lines.get(field.trim_end_matches('s'))) {
                Some(&line) => ConfigError::Field { file: file.into(), line, field, message },
                None => ConfigError::Invalid { field, message },
            },
            other => other,
        })?;
        Ok(c)
    }
}

fn check_grid(field: &str, g: &[f64], lower: f64) -> Result<(), ConfigError> {
    let invalid = |message: &str| ConfigError::Invalid { field: field.into(), message: message.into() };
    if g.is_empty() {
        return Err(invalid("grid is empty"));
    }
    if g.iter().any(|x| !x.is_finite() || *x <= lower) {
        return Err(invalid("values must be finite and in range"));
    }
    if g.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("values must be strictly increasing"));
    }
    Ok(())
}

fn parse_law(s: &str) -> Result<JumpLaw, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}` in `{s}`"));
    match parts.as_slice() {
        ["constant", j] => Ok(JumpLaw::Constant { size: num(j)? }),
        ["exponential", m] => Ok(JumpLaw::Exponential { mean: num(m)? }),
        ["pareto", sc, sh] => Ok(JumpLaw::Pareto { scale: num(sc)?, shape: num(sh)? }),
        _ => Err(format!("cannot parse jump law `{s}`")),
    }
}

struct Parser<'a> {
    file: &'a str,
    entries: BTreeMap<String, (usize, String)>,
}

impl Parser<'_> {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn field_err(&self, line: usize, field: &str, message: &str) -> ConfigError {
        ConfigError::Field { file: self.file.into(), line, field: field.into(), message: message.into() }
    }

    fn conflict(&self, field: &str, message: &str) -> ConfigError {
        ConfigError::Invalid { field: field.into(), message: message.into() }
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| self.field_err(line, key, &format!("expected a number, found `{v}`"))),
        }
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => {
                let cleaned = v.replace('_', "");
                cleaned
                    .parse::<u64>()
                    .or_else(|_| {
                        // allow 1e6-style counts when they are exact integers
                        cleaned.parse::<f64>().ok().filter(|x| x.fract() == 0.0 && *x >= 0.0 && *x < 1.8e19).map(|x| x as u64).ok_or(())
                    })
                    .map(Some)
                    .map_err(|_| self.field_err(line, key, &format!("expected a non-negative integer, found `{v}`")))
            }
        }
    }

    fn take_grid(&mut self, single: &str, list: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match (self.take(single), self.take(list)) {
            (Some(_), Some((line, _))) => Err(self.field_err(line, list, &format!("give either `{single}` or `{list}`"))),
            (Some((line, v)), None) => v
                .parse::<f64>()
                .map(|x| Some(vec![x]))
                .map_err(|_| self.field_err(line, single, &format!("expected a number, found `{v}`"))),
            (None, Some((line, v))) => parse_grid(&v).map(Some).map_err(|m| self.field_err(line, list, &m)),
            (None, None) => Ok(None),
        }
    }
}

/// `a,b,c` or `start:stop:count`.
pub fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').map(str::trim).collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected `start:stop:count`, found `{v}`"));
        };
        let a: f64 = a.parse().map_err(|_| format!("bad start `{a}`"))?;
        let b: f64 = b.parse().map_err(|_| format!("bad stop `{b}`"))?;
        let n: usize = n.parse().map_err(|_| format!("bad count `{n}`"))?;
        return match n {
            0 => Err("count must be positive".into()),
            1 => Ok(vec![a]),
            _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
        };
    }
    v.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", x.trim()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let text = "# model\nD = 0.3\nC_sf = 0.5\nsigma0 = 0.1\nlambda = 1\nsamples = 1e4\nkappas = -0.2:0.2:5\nts = 0.01, 0.1\nou_jumps = constant:2; pareto:0.5:3\nformat = json\n";
        let c = RunConfig::parse(text, "x.conf").unwrap();
        assert_eq!(c.samples, 10_000);
        assert_eq!(c.kappas.len(), 5);
        assert!((c.kappas[4] - 0.2).abs() < 1e-15);
        assert_eq!(c.ts, vec![0.01, 0.1]);
        assert_eq!(c.ou_laws.len(), 2);
        assert_eq!(c.format, OutputFormat::Json);
        let k = c.constants().unwrap();
        assert!((k.cap_c_sf - 0.5).abs() < 1e-12);
        assert!((k.sigma0 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn reports_line_and_field() {
        let err = RunConfig::parse("D = 0.3\nlambda = fast\n", "bad.conf").unwrap_err();
        assert_eq!(err.to_string(), "bad.conf:2: field `lambda`: expected a number, found `fast`");
        let err = RunConfig::parse("D = 0.3\nwhat = 1\n", "bad.conf").unwrap_err();
        assert!(matches!(err, ConfigError::Field { line: 2, .. }));
        let err = RunConfig::parse("D 0.3\n", "bad.conf").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
    }

    #[test]
    fn text_round_trip() {
        let text = "D = 0.25\nV = 1.3\nsigma0 = 0.4\nkappas = -0.3:0.3:7\nts = 0.001, 0.01\nsigma0_tilde = 0.2\nboundary_rule = matched\nexpect_C_sf = 0.5\n";
        let c = RunConfig::parse(text, "c").unwrap();
        let again = RunConfig::parse(&c.to_text(), "c").unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn rejects_invalid_models_and_grids() {
        let err = RunConfig::parse("V = 1\nD = 0.6\n", "c").unwrap_err();
        assert!(matches!(err, ConfigError::Field { line: 2, ref field, .. } if field == "D"), "{err}");
        assert!(RunConfig::parse("tau0 = -1\nsigma0 = 0.2\n", "c").is_err());
        assert!(RunConfig::parse("kappas = 0.2, 0.1\n", "c").is_err());
        assert!(RunConfig::parse("ts = 0, 0.1\n", "c").is_err());
        assert!(RunConfig::parse("D = 0.3\nD = 0.2\n", "c").is_err());
    }
}
