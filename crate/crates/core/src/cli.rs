//! Command-line front end.
//!
//! Data goes to `--out` (or standard output); everything else goes to standard
//! error. Each run also writes a JSON manifest next to the data file, or prints
//! it to standard error when the data went to standard output.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::asymptotics::{classify, classify_tail, smile_asymptote, tail_asymptote, tail_asymptote_unified};
use crate::config::{ConfigError, OutputFormat, RunConfig};
use crate::error::Error;
use crate::model::{DerivedConstants, QueryPoint};
use crate::pricing::{implied_vol_of, ou_price_pair, price_call_mc};
use crate::simulate::{estimate_tail, ou_comparator_batch, McConfig};
use crate::verify::{run_suite_timed, VerifyContext};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "shockvol", version, about = "Shock-driven rough volatility: simulation, pricing and asymptotics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Derived model constants.
    Constants,
    /// Monte Carlo call prices and implied volatilities on the query grid.
    Price,
    /// Monte Carlo implied volatility against the regime asymptote.
    Smile,
    /// Conditional Monte Carlo log-tail against the asymptotes.
    Tail,
    /// Run the numerical acceptance suite.
    Verify,
    /// Comparator domination on shared draws.
    OuBound,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Price => "price",
            Command::Smile => "smile",
            Command::Tail => "tail",
            Command::Verify => "verify",
            Command::OuBound => "ou-bound",
        }
    }
}

/// Flags that override the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub samples: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub chunk: Option<usize>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

/// Load the configuration file, if any, and apply flag overrides.
pub fn resolve_config(flags: &Flags) -> Result<RunConfig, ConfigError> {
    let mut c = match &flags.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = flags.seed {
        c.seed = s;
    }
    if let Some(n) = flags.samples {
        c.samples = n;
    }
    if let Some(n) = flags.chunk {
        c.chunk = n;
    }
    if let Some(o) = &flags.out {
        c.out = Some(o.clone());
    }
    if let Some(f) = flags.format {
        c.format = f;
    }
    c.validate()?;
    Ok(c)
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Reals with 17 significant digits; non-finite values as `NaN`, `inf`, `-inf`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_real(*x),
                    Cell::Int(n) => n.to_string(),
                    Cell::Text(s) => csv_field(s),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        use serde_json::Value;
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Num(x) if x.is_finite() => Value::from(*x),
                            Cell::Num(x) => Value::from(format_real(*x)),
                            Cell::Int(n) => Value::from(*n),
                            Cell::Text(s) => Value::from(s.as_str()),
                            Cell::Bool(b) => Value::from(*b),
                            Cell::Empty => Value::Null,
                        })
                        .collect(),
                )
            })
            .collect();
        serde_json::json!({ "columns": self.columns, "rows": rows })
    }

    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => serde_json::to_string_pretty(&self.to_json_value()).unwrap_or_default() + "\n",
        }
    }
}

/// What a command produced, before it is written anywhere.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    /// Named tables; the first one is the primary output.
    pub tables: Vec<(&'static str, Table)>,
    pub summary: serde_json::Value,
    pub exit_code: i32,
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub table: String,
    pub path: Option<String>,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub exit_code: i32,
    pub config: RunConfig,
    /// The same configuration as `key = value` text, ready for `--config`.
    pub config_text: String,
    pub constants: DerivedConstants,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputRecord>,
    pub summary: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write through a temporary file in the target directory and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `dir/stem.name.ext` for secondary tables.
fn sibling_path(primary: &Path, name: &str) -> PathBuf {
    let stem = primary.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let file = match primary.extension() {
        Some(ext) => format!("{stem}.{name}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{name}"),
    };
    primary.with_file_name(file)
}

fn manifest_path(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn row_error(e: &Error) -> Cell {
    Cell::Text(e.to_string())
}

/// Query points in grid order: maturities outer, strikes inner.
fn queries(c: &RunConfig) -> Vec<(f64, f64)> {
    c.ts.iter().flat_map(|&t| c.kappas.iter().map(move |&k| (k, t))).collect()
}

/// Exit code for a grid: numerical failure only when no row produced a value.
fn grid_exit(ok_rows: usize) -> i32 {
    if ok_rows == 0 {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    }
}

pub fn cmd_constants(c: &RunConfig) -> crate::Result<CommandOutput> {
    let k = c.constants()?;
    let p = &k.params;
    let mut t = Table::new(vec!["name", "value", "formula"]);
    let rows: [(&str, f64, &str); 10] = [
        ("D", p.d, "input"),
        ("V", p.v, "input, or from C_sf"),
        ("lambda", p.lambda, "input"),
        ("tau0", p.tau0, "input, or from sigma0 = c_sf sqrt(2D) (-tau0)^(D-1/2)"),
        ("c_sf", k.c_sf, "lambda^(D-1/2) V / sqrt(Gamma(2D+1))"),
        ("sigma0", k.sigma0, "c_sf sqrt(2D) (-tau0)^(D-1/2)"),
        ("C_sf", k.cap_c_sf, "(1-D)^((1/2)/(1-D)) / (1/2-D)^((1/2-D)/(1-D)) c_sf^(-1/(1-D))"),
        ("C_tilde", k.c_tilde, "c_sf^(1/D) (2D)^(1/(2D)) (1-2D)^((1-2D)/(2D))"),
        ("ou_c", k.ou_c, "(1-2D) / (2D c_sf^2)^(1/(1-2D))"),
        ("ou_gamma", k.ou_gamma, "(2-2D)/(1-2D)"),
    ];
    for (name, value, formula) in rows {
        t.rows.push(vec![name.into(), value.into(), formula.into()]);
    }
    Ok(CommandOutput { tables: vec![("constants", t)], summary: serde_json::Value::Null, exit_code: EXIT_OK })
}

pub fn cmd_price(c: &RunConfig) -> crate::Result<CommandOutput> {
    let consts = c.constants()?;
    let params = consts.params;
    let mc = c.mc();
    let rows: Vec<(Vec<Cell>, bool)> = queries(c)
        .par_iter()
        .map(|&(kappa, t)| {
            let mut row: Vec<Cell> = vec![kappa.into(), t.into()];
            let q = match QueryPoint::new(kappa, t) {
                Ok(q) => q,
                Err(e) => {
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, row_error(&e)]);
                    return (row, false);
                }
            };
            let regime = classify(q, &consts, &c.thresholds).map(|r| r.label.short().to_string()).unwrap_or_default();
            match price_call_mc(&params, q, mc) {
                Ok(est) => {
                    row.extend([est.call.value.into(), est.call.std_error.into()]);
                    match implied_vol_of(&est) {
                        Ok(iv) => row.extend([iv.value.into(), iv.std_error.into(), regime.into(), Cell::Empty]),
                        Err(e) => row.extend([Cell::Empty, Cell::Empty, regime.into(), row_error(&e)]),
                    }
                    (row, true)
                }
                Err(e) => {
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, regime.into(), row_error(&e)]);
                    (row, false)
                }
            }
        })
        .collect();
    let ok = rows.iter().filter(|r| r.1).count();
    let mut t = Table::new(vec!["kappa", "t", "call", "call_se", "iv", "iv_se", "regime", "error"]);
    t.rows = rows.into_iter().map(|r| r.0).collect();
    let summary = serde_json::json!({ "rows": t.rows.len(), "priced": ok });
    Ok(CommandOutput { tables: vec![("price", t)], summary, exit_code: grid_exit(ok) })
}

pub fn cmd_smile(c: &RunConfig) -> crate::Result<CommandOutput> {
    let consts = c.constants()?;
    let params = consts.params;
    let mc = c.mc();
    let rows: Vec<(Vec<Cell>, bool)> = queries(c)
        .par_iter()
        .map(|&(kappa, t)| {
            let mut row: Vec<Cell> = vec![kappa.into(), t.into()];
            let mut errors = Vec::new();
            let q = match QueryPoint::new(kappa, t) {
                Ok(q) => q,
                Err(e) => {
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, row_error(&e)]);
                    return (row, false);
                }
            };
            let mc_iv = price_call_mc(&params, q, mc).and_then(|e| implied_vol_of(&e));
            let asym = smile_asymptote(q, &consts, &c.thresholds);
            let (iv, se) = match &mc_iv {
                Ok(e) => (Some(e.value), Some(e.std_error)),
                Err(e) => {
                    errors.push(format!("mc: {e}"));
                    (None, None)
                }
            };
            let (value, regime) = match &asym {
                Ok(a) => (Some(a.value), a.regime.label.short().to_string()),
                Err(e) => {
                    errors.push(format!("asymptote: {e}"));
                    (None, String::new())
                }
            };
            let ratio = iv.zip(value).map(|(m, a)| m / a);
            row.extend([iv.into(), se.into(), value.into(), regime.into(), ratio.into()]);
            row.push(if errors.is_empty() { Cell::Empty } else { errors.join("; ").into() });
            (row, iv.is_some() || value.is_some())
        })
        .collect();
    let ok = rows.iter().filter(|r| r.1).count();
    let mut t = Table::new(vec!["kappa", "t", "iv_mc", "iv_mc_se", "iv_asym", "regime", "ratio", "error"]);
    t.rows = rows.into_iter().map(|r| r.0).collect();
    let summary = serde_json::json!({ "rows": t.rows.len(), "rows_with_values": ok, "boundary_rule": format!("{:?}", c.thresholds.rule) });
    Ok(CommandOutput { tables: vec![("smile", t)], summary, exit_code: grid_exit(ok) })
}

pub fn cmd_tail(c: &RunConfig) -> crate::Result<CommandOutput> {
    let consts = c.constants()?;
    let params = consts.params;
    let mc = c.mc();
    let rows: Vec<(Vec<Cell>, bool)> = queries(c)
        .par_iter()
        .map(|&(kappa, t)| {
            let mut row: Vec<Cell> = vec![kappa.into(), t.into()];
            let q = match QueryPoint::new(kappa, t) {
                Ok(q) => q,
                Err(e) => {
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, row_error(&e)]);
                    return (row, false);
                }
            };
            let mut errors = Vec::new();
            let (lp, lse) = match estimate_tail(&params, q, mc) {
                Ok(p) if p.value > 0.0 => (Some(p.value.ln()), Some(p.std_error / p.value)),
                Ok(_) => {
                    errors.push("mc: estimate underflowed to zero".to_string());
                    (None, None)
                }
                Err(e) => {
                    errors.push(format!("mc: {e}"));
                    (None, None)
                }
            };
            let (asym, unified, regime) = if kappa < 0.0 {
                errors.push("asymptote: tail formulas need kappa >= 0".to_string());
                (None, None, String::new())
            } else {
                let a = tail_asymptote(q, &consts, &c.thresholds);
                let u = tail_asymptote_unified(q, &consts);
                let regime = classify_tail(q, &consts, &c.thresholds).map(|r| r.label.short().to_string()).unwrap_or_default();
                let a = a.map(|a| a.log_p).map_err(|e| errors.push(format!("asymptote: {e}"))).ok();
                let u = u.map_err(|e| errors.push(format!("unified: {e}"))).ok();
                (a, u, regime)
            };
            let ok = lp.is_some() || asym.is_some();
            row.extend([lp.into(), lse.into(), asym.into(), unified.into(), regime.into()]);
            row.push(if errors.is_empty() { Cell::Empty } else { errors.join("; ").into() });
            (row, ok)
        })
        .collect();
    let ok = rows.iter().filter(|r| r.1).count();
    let mut t = Table::new(vec!["kappa", "t", "logp_mc", "logp_se", "logp_asym", "logp_unified", "regime", "error"]);
    t.rows = rows.into_iter().map(|r| r.0).collect();
    let summary = serde_json::json!({ "rows": t.rows.len(), "rows_with_values": ok });
    Ok(CommandOutput { tables: vec![("tail", t)], summary, exit_code: grid_exit(ok) })
}

pub fn cmd_ou_bound(c: &RunConfig) -> crate::Result<CommandOutput> {
    let params = c.params()?;
    let mc = McConfig::new(c.ou_paths, crate::rng::SeedSpec::new(c.seed, c.stream)).with_chunk(c.chunk);
    let mut paths = Table::new(vec!["law", "t", "path_id", "I_tilde", "I", "dominated"]);
    let mut prices = Table::new(vec!["law", "t", "kappa", "c_tilde", "c", "c_tilde_le_c"]);
    let mut laws = Vec::new();
    let mut all_ok = true;
    for spec in c.ou_specs() {
        let label = spec.jumps.label();
        let mut undominated = 0usize;
        let mut price_fail = 0usize;
        let mut total = 0usize;
        for &t in &c.ts {
            let draws = ou_comparator_batch(&params, &spec, t, mc)?;
            for (i, d) in draws.iter().enumerate() {
                undominated += usize::from(!d.dominated());
                paths.rows.push(vec![
                    label.as_str().into(),
                    t.into(),
                    Cell::Int(i as u64),
                    d.i_tilde.into(),
                    d.i.into(),
                    Cell::Bool(d.dominated()),
                ]);
            }
            total += draws.len();
            for &kappa in &c.kappas {
                let (lo, hi) = ou_price_pair(&draws, kappa);
                let holds = lo <= hi;
                price_fail += usize::from(!holds);
                prices.rows.push(vec![label.as_str().into(), t.into(), kappa.into(), lo.into(), hi.into(), Cell::Bool(holds)]);
            }
        }
        all_ok &= undominated == 0 && price_fail == 0;
        laws.push(serde_json::json!({
            "law": label,
            "paths": total,
            "undominated": undominated,
            "price_violations": price_fail,
        }));
    }
    let summary = serde_json::json!({ "all_dominated": all_ok, "laws": laws });
    Ok(CommandOutput {
        tables: vec![("paths", paths), ("prices", prices)],
        summary,
        exit_code: if all_ok { EXIT_OK } else { EXIT_VERIFY },
    })
}

pub fn cmd_verify(c: &RunConfig) -> crate::Result<CommandOutput> {
    let ctx = VerifyContext::from_config(c)?;
    let (report, secs) = run_suite_timed(&ctx);
    let mut t = Table::new(vec!["id", "name", "status", "measured", "tolerance", "detail"]);
    for (r, s) in report.checks.iter().zip(&secs) {
        eprintln!("check {:>2} {:<36} {} ({s:.2} s)", r.id, r.name, if r.passed { "PASS" } else { "FAIL" });
        t.rows.push(vec![
            Cell::Int(u64::from(r.id)),
            r.name.as_str().into(),
            if r.passed { "PASS" } else { "FAIL" }.into(),
            r.measured.into(),
            r.tolerance.into(),
            r.detail.as_str().into(),
        ]);
    }
    let failed: Vec<u32> = report.checks.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    // timing stays out of the report table so reruns are byte-identical
    let summary = serde_json::json!({ "passed": failed.is_empty(), "failed": failed, "runtime_s": secs });
    Ok(CommandOutput {
        tables: vec![("verify", t)],
        summary,
        exit_code: if failed.is_empty() { EXIT_OK } else { EXIT_VERIFY },
    })
}

pub fn dispatch(cmd: Command, c: &RunConfig) -> crate::Result<CommandOutput> {
    match cmd {
        Command::Constants => cmd_constants(c),
        Command::Price => cmd_price(c),
        Command::Smile => cmd_smile(c),
        Command::Tail => cmd_tail(c),
        Command::Verify => cmd_verify(c),
        Command::OuBound => cmd_ou_bound(c),
    }
}

/// Write tables and manifest; returns the manifest.
pub fn emit(cmd: Command, c: &RunConfig, out: &CommandOutput, wall_time_s: f64) -> std::io::Result<RunManifest> {
    let ext_format = c.format;
    let mut records = Vec::new();
    let mut stdout_text = String::new();
    if out.tables.len() > 1 && c.out.is_none() && ext_format == OutputFormat::Json {
        let mut obj = serde_json::Map::new();
        for (name, t) in &out.tables {
            obj.insert((*name).to_string(), t.to_json_value());
        }
        stdout_text = serde_json::to_string_pretty(&serde_json::Value::Object(obj)).unwrap_or_default() + "\n";
        for (name, t) in &out.tables {
            let bytes = t.render(ext_format);
            records.push(OutputRecord { table: (*name).into(), path: None, bytes: bytes.len(), sha256: sha256_hex(bytes.as_bytes()) });
        }
    } else {
        for (i, (name, t)) in out.tables.iter().enumerate() {
            let bytes = t.render(ext_format);
            let path = c.out.as_ref().map(|p| if i == 0 { p.clone() } else { sibling_path(p, name) });
            match &path {
                Some(p) => write_atomic(p, bytes.as_bytes())?,
                None => {
                    if i > 0 {
                        stdout_text.push('\n');
                    }
                    stdout_text.push_str(&bytes);
                }
            }
            records.push(OutputRecord {
                table: (*name).into(),
                path: path.map(|p| p.display().to_string()),
                bytes: bytes.len(),
                sha256: sha256_hex(bytes.as_bytes()),
            });
        }
    }
    if !stdout_text.is_empty() {
        let mut so = std::io::stdout().lock();
        so.write_all(stdout_text.as_bytes())?;
        so.flush()?;
    }
    let manifest = RunManifest {
        tool: "shockvol",
        version: env!("CARGO_PKG_VERSION"),
        command: cmd.name(),
        exit_code: out.exit_code,
        config: c.clone(),
        config_text: c.to_text(),
        constants: c.constants().map_err(std::io::Error::other)?,
        wall_time_s,
        outputs: records,
        summary: out.summary.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)? + "\n";
    match &c.out {
        Some(p) => write_atomic(&manifest_path(p), text.as_bytes())?,
        None => eprint!("{text}"),
    }
    Ok(manifest)
}

/// Full CLI run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let config = match resolve_config(&cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let start = Instant::now();
    let output = match dispatch(cli.command, &config) {
        Ok(o) => o,
        Err(e @ Error::Domain { .. }) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("numerical failure: {e}");
            return EXIT_NUMERIC;
        }
    };
    match emit(cli.command, &config, &output, start.elapsed().as_secs_f64()) {
        Ok(_) => output.exit_code,
        Err(e) => {
            eprintln!("output error: {e}");
            EXIT_NUMERIC
        }
    }
}
