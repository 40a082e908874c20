//! Command-line experiment runner for `zklab`.
//!
//! Every subcommand resolves its parameters (defaults, then `--config` file,
//! then flags), runs, and writes `config.toml`, `results.csv`, `results.json`,
//! `summary.txt` and, for fitted experiments, `plot.svg` into its run directory.

pub mod commands;
pub mod config;
pub mod emit;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use commands::Outcome;
use emit::{Formats, Plot, Record};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "ZKLAB_OUT";
pub const DEFAULT_OUT: &str = "zklab-runs";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Lib(#[from] zklab::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(path: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.to_string(),
            message: message.into(),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(zklab::Error::NoContraction { .. } | zklab::Error::StabilityViolation(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "zklab", version, about = "Zakharov-Kuznetsov numerical experiments")]
struct Cli {
    /// TOML parameter file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run directory (default `$ZKLAB_OUT/<subcommand>-<hash>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, global = true, default_value = "csv,json,svg")]
    formats: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact regularity thresholds.
    Thresholds(commands::thresholds::Args),
    /// Scaling of the wave-packet counterexample.
    ProbeNecessity(commands::necessity::Args),
    /// Decay of the dispersion kernel, or the `L^p` dispersion ratio.
    ProbeDispersion(commands::dispersion::Args),
    ProbeStrichartz(commands::estimate::Args),
    ProbeMaximal(commands::estimate::Args),
    ProbeKato(commands::estimate::Args),
    ProbeRetarded(commands::estimate::Args),
    ProbeConjecture(commands::estimate::Args),
    /// Integrate the nonlinear equation.
    Solve(commands::solve::Args),
    /// Picard iteration of the Duhamel map.
    Picard(commands::picard::Args),
    /// Convergence from truncated data.
    Pointwise(commands::pointwise::Args),
    /// Telescoped product identity.
    ParaproductCheck(commands::paraproduct::Args),
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Global {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    formats: Formats,
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let g = Global {
        config: cli.config,
        out: cli.out,
        formats: Formats::parse(&cli.formats)?,
    };
    let work = move || -> Result<i32, CliError> {
        use commands::*;
        match cli.command {
            Command::Thresholds(a) => drive("thresholds", &g, &a, thresholds::defaults, thresholds::execute),
            Command::ProbeNecessity(a) => drive("probe-necessity", &g, &a, necessity::defaults, necessity::execute),
            Command::ProbeDispersion(a) => drive("probe-dispersion", &g, &a, dispersion::defaults, dispersion::execute),
            Command::ProbeStrichartz(a) => estimate::drive_kind("probe-strichartz", &g, &a),
            Command::ProbeMaximal(a) => estimate::drive_kind("probe-maximal", &g, &a),
            Command::ProbeKato(a) => estimate::drive_kind("probe-kato", &g, &a),
            Command::ProbeRetarded(a) => estimate::drive_kind("probe-retarded", &g, &a),
            Command::ProbeConjecture(a) => estimate::drive_kind("probe-conjecture", &g, &a),
            Command::Solve(a) => drive("solve", &g, &a, solve::defaults, solve::execute),
            Command::Picard(a) => drive("picard", &g, &a, picard::defaults, picard::execute),
            Command::Pointwise(a) => drive("pointwise", &g, &a, pointwise::defaults, pointwise::execute),
            Command::ParaproductCheck(a) => drive("paraproduct-check", &g, &a, paraproduct::defaults, paraproduct::execute),
        }
    };
    match cli.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config("workers", e.to_string()))?
            .install(work),
        None => work(),
    }
}

/// Resolve parameters, run, write outputs and map assertion failures to exit 2.
fn drive<A, P>(
    name: &str,
    g: &Global,
    args: &A,
    defaults: impl Fn(&Value) -> Result<P, CliError>,
    execute: impl Fn(&P) -> Result<Outcome, CliError>,
) -> Result<i32, CliError>
where
    A: Serialize,
    P: Serialize + DeserializeOwned,
{
    let file = g.config.as_deref().map(|p| config::read_file(p, name)).transpose()?;
    let flags = config::flags_value(args);
    let mut peek = file.clone().unwrap_or_else(|| Value::Object(Default::default()));
    config::overlay(&mut peek, &flags);
    let base = defaults(&peek)?;
    let params: P = config::resolve(&base, file.as_ref(), &flags)?;
    let resolved = config::to_toml(name, &params);
    let dir = g.out.clone().unwrap_or_else(|| {
        let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        root.join(format!("{name}-{}", config::hash_hex(&resolved)))
    });
    let outcome = execute(&params)?;
    write_outputs(&dir, g.formats, &resolved, &outcome)?;
    for line in &outcome.stdout {
        println!("{line}");
    }
    println!("results: {}", dir.display());
    if outcome.failures.is_empty() {
        Ok(0)
    } else {
        for f in &outcome.failures {
            eprintln!("assertion failed: {f}");
        }
        Ok(2)
    }
}

fn write_outputs(dir: &Path, formats: Formats, resolved: &str, out: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    emit::write_text(&dir.join("config.toml"), resolved)?;
    if formats.csv {
        emit::write_csv(&dir.join("results.csv"), &out.records)?;
    }
    if formats.json {
        let text = serde_json::to_string_pretty(&out.report).expect("reports serialize");
        emit::write_text(&dir.join("results.json"), &(text + "\n"))?;
    }
    let mut summary = out.summary.join("\n");
    summary.push('\n');
    if !out.failures.is_empty() {
        summary.push_str(&format!("FAILED: {}\n", out.failures.join("; ")));
    }
    emit::write_text(&dir.join("summary.txt"), &summary)?;
    if let (true, Some(plot)) = (formats.svg, &out.plot) {
        emit::write_text(&dir.join("plot.svg"), &emit::render_svg(plot))?;
    }
    Ok(())
}

/// Shorthand used by the command modules.
pub(crate) fn fit_plot(title: String, points: &[(f64, f64)], slope: f64, intercept: f64) -> Plot {
    Plot {
        title,
        x_label: "log₂k".into(),
        y_label: "log₂R".into(),
        points: points.to_vec(),
        line: Some((slope, intercept)),
    }
}

pub(crate) fn rec(experiment: &str, kind: &str, value: f64) -> Record {
    Record::new(experiment, kind, value)
}
