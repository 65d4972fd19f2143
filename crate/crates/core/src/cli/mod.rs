//! Command-line front end.
//!
//! ```text
//! vdw-contact <eval|residuals|transform|contact-check|toda|sweep>
//!     [--config PATH] [--out PATH] [--format csv|json] [--seed N]
//!     [--tol NAME=VALUE]...
//! ```
//!
//! Exit status is 0 when every check passes, 1 on usage or validation
//! errors (a JSON error record goes to stderr), and 2 when a check fails
//! (the output is still written; the worst row goes to stderr).

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

use crate::error::Error;
use crate::thermo::ExtensiveState;
pub use config::{Command, Format, RunConfig};
pub use report::{Provenance, Report, SCHEMA_VERSION};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

/// Validation or usage failure, reported as `{code, message, field}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub field: Option<String>,
}

impl CliError {
    pub fn field(code: &'static str, message: &str, field: &str) -> Self {
        CliError {
            code,
            message: message.to_string(),
            field: Some(field.to_string()),
        }
    }

    /// Maps a library error; `context` prefixes the offending field.
    pub fn from_core(err: Error, context: &str) -> Self {
        let (code, field) = match &err {
            Error::InvalidParameter { field, .. } => {
                let f = match (context, *field) {
                    ("toda", "n_sites" | "mass" | "a_t" | "b_t" | "dt") => format!("toda.params.{field}"),
                    _ => format!("{context}.{field}"),
                };
                ("invalid_parameter", f)
            }
            Error::Domain { what, .. } => ("domain", format!("{context}.{what}")),
            Error::Range { .. } => ("range", context.to_string()),
            Error::Chart(_) => ("chart_domain", context.to_string()),
            Error::NonFinite { .. } => ("non_finite", context.to_string()),
            Error::DegenerateFit(_) => ("degenerate_fit", format!("{context}.temperatures")),
        };
        CliError {
            code,
            message: err.to_string(),
            field: Some(field),
        }
    }

    fn at_point(mut self, index: usize, st: ExtensiveState) -> Self {
        self.field = Some(format!("points[{index}]"));
        self.message = format!("at S = {}, V = {}: {}", st.s, st.v, self.message);
        self
    }

    pub fn record(&self) -> serde_json::Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "status": "error",
            "error": {
                "code": self.code,
                "message": self.message,
                "field": self.field,
            }
        })
    }
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value: f64 = value.parse().map_err(|e| format!("{value}: {e}"))?;
    Ok((name.trim().to_string(), value))
}

fn parse_point(s: &str) -> Result<ExtensiveState, String> {
    let (a, b) = s.split_once(',').ok_or("expected S,V")?;
    let s_val: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let v_val: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    Ok(ExtensiveState::new(s_val, v_val))
}

#[derive(Debug, Parser)]
#[command(name = "vdw-contact", version, about = "Van der Waals contact geometry and Toda-chain checks")]
pub struct Args {
    /// Command to run; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON run configuration. Command-line options override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
    /// Evaluation point, repeatable; replaces the grid.
    #[arg(long = "point", value_name = "S,V", value_parser = parse_point, allow_hyphen_values = true)]
    pub points: Vec<ExtensiveState>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub kb: Option<f64>,
    #[arg(long)]
    pub u0: Option<f64>,
    #[arg(long)]
    pub v0: Option<f64>,
    #[arg(long)]
    pub n_sites: Option<usize>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Temperature for `toda`.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Comma-separated temperatures for `sweep`.
    #[arg(long, value_delimiter = ',')]
    pub temperatures: Option<Vec<f64>>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub ensemble_size: Option<usize>,
    /// Relative error injected into every lifted pressure.
    #[arg(long, allow_hyphen_values = true)]
    pub perturb_pressure: Option<f64>,
    /// Disable the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

impl Args {
    /// File values (if any) overlaid with command-line options.
    pub fn resolve(&self) -> Result<(Command, RunConfig), CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($src:ident => $dst:expr),* $(,)?) => {
                $(if let Some(v) = self.$src.clone() { $dst = v; })*
            };
        }
        set!(
            a => cfg.gas.a,
            b => cfg.gas.b,
            n => cfg.gas.n,
            kb => cfg.gas.kb,
            u0 => cfg.gas.u0,
            v0 => cfg.gas.v0,
            n_sites => cfg.toda.params.n_sites,
            mass => cfg.toda.params.mass,
            dt => cfg.toda.params.dt,
            temperature => cfg.toda.temperature,
            temperatures => cfg.toda.temperatures,
            n_steps => cfg.toda.n_steps,
            ensemble_size => cfg.toda.ensemble_size,
            seed => cfg.seed,
            format => cfg.format,
            perturb_pressure => cfg.perturb.pressure,
        );
        if self.burn_in.is_some() {
            cfg.toda.burn_in = self.burn_in;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if !self.points.is_empty() {
            cfg.points = Some(self.points.clone());
        }
        if self.sequential {
            cfg.sequential = true;
        }
        for (name, value) in &self.tol {
            cfg.tolerances.insert(name.clone(), *value);
        }
        if self.command.is_some() {
            cfg.command = self.command;
        }
        let command = cfg.command.ok_or_else(|| CliError {
            code: "usage",
            message: "no command given on the command line or in the config".into(),
            field: Some("command".into()),
        })?;
        validate(command, &cfg)?;
        Ok((command, cfg))
    }
}

fn validate(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let known = commands::tolerances(command);
    for (name, value) in &cfg.tolerances {
        let field = format!("tol.{name}");
        if !known.iter().any(|(n, _)| n == name) {
            let names: Vec<&str> = known.iter().map(|(n, _)| *n).collect();
            return Err(CliError {
                code: "unknown_tolerance",
                message: format!("`{}` accepts tolerances: [{}]", command.name(), names.join(", ")),
                field: Some(field),
            });
        }
        if !(value.is_finite() && *value >= 0.0) {
            return Err(CliError::field("invalid_parameter", "tolerance must be finite and >= 0", &field));
        }
    }
    if !cfg.perturb.pressure.is_finite() {
        return Err(CliError::field("invalid_parameter", "must be finite", "perturb.pressure"));
    }
    if !matches!(command, Command::Toda | Command::Sweep) {
        cfg.gas.validate().map_err(|e| CliError::from_core(e, "gas"))?;
    }
    Ok(())
}

/// Resolves, runs and renders; returns the report and its rendering.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<(Report, String), CliError> {
    let report = commands::run(command, cfg)?;
    let prov = Provenance {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
    };
    let text = report.render(cfg.format, &prov);
    Ok((report, text))
}

fn emit_error(stderr: &mut dyn Write, err: &CliError) -> i32 {
    let _ = writeln!(stderr, "{}", err.record());
    EXIT_INVALID
}

/// Full CLI with explicit streams; returns the exit status.
pub fn run_with_io<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_PASS;
            }
            let err = CliError {
                code: "usage",
                message: e.kind().to_string(),
                field: e.get(clap::error::ContextKind::InvalidArg).map(|v| v.to_string()),
            };
            let _ = write!(stderr, "{}", e.render());
            return emit_error(stderr, &err);
        }
    };
    let (command, cfg) = match args.resolve() {
        Ok(x) => x,
        Err(e) => return emit_error(stderr, &e),
    };
    let (report, text) = match execute(command, &cfg) {
        Ok(x) => x,
        Err(e) => return emit_error(stderr, &e),
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| CliError {
            code: "io",
            message: format!("cannot write {}: {e}", path.display()),
            field: Some("out".into()),
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError {
            code: "io",
            message: e.to_string(),
            field: Some("out".into()),
        }),
    };
    if let Err(e) = written {
        return emit_error(stderr, &e);
    }
    match report.failure_record() {
        None => EXIT_PASS,
        Some(rec) => {
            let _ = writeln!(stderr, "{rec}");
            EXIT_CHECK_FAILED
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdout.lock(), &mut stderr.lock())
}
