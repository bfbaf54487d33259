//! Command implementations behind the `darkpassage` binary.

pub mod config;
pub mod output;

use std::path::Path;

use darkpassage::analysis::run_sweep;
use darkpassage::darkstate::{astirap_dark_state, dark_state_analytic, sstirap_dark_state};

use config::{DarkStateRequest, ExperimentConfig, ExperimentName};
use output::{fmt_f64, write_atomic, Summary};

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "DARKPASSAGE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<darkpassage::Error> for CliError {
    fn from(e: darkpassage::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn config_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

/// Writes `summary` to `path`, or to standard output when no path is set.
fn emit_summary(summary: &Summary, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, summary.render().as_bytes()),
        None => {
            print!("{}", summary.render());
            Ok(())
        }
    }
}

pub fn dark_state_summary(request: &DarkStateRequest) -> Result<Summary, CliError> {
    let (state, k, l, desc) = match *request {
        DarkStateRequest::ThreeLevel { k, l, alpha } => {
            (dark_state_analytic(k, l, alpha)?, k, l, vec![("chain", "three_level".to_string()), ("alpha", fmt_f64(alpha))])
        }
        DarkStateRequest::Alternating { n, k, l } => {
            (astirap_dark_state(n, k, l)?, k, l, vec![("chain", "alternating".to_string()), ("n", n.to_string())])
        }
        DarkStateRequest::Straddled { n_spins, k, l, m } => (
            sstirap_dark_state(n_spins, k, l, m)?,
            k,
            l,
            vec![("chain", "straddled".to_string()), ("n_spins", n_spins.to_string()), ("M", fmt_f64(m))],
        ),
    };
    let mut description = vec![("K", fmt_f64(k)), ("L", fmt_f64(l))];
    description.extend(desc);
    Ok(output::dark_state_summary(&description, k.hypot(l), &state))
}

pub fn cmd_darkstate(request: &DarkStateRequest) -> Result<(), CliError> {
    emit_summary(&dark_state_summary(request)?, None)
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// `darkpassage run <config>`.
pub fn cmd_run(path: &Path) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(path)?;
    if cfg.is_sweep() {
        return sweep_with(&cfg, path);
    }
    let dir = config_dir(path);
    let summary_path = cfg.resolve(dir, &cfg.output.summary);
    if cfg.experiment == ExperimentName::Darkstate {
        if cfg.output.trace.is_some() || cfg.output.table.is_some() {
            return Err(CliError::Validation("darkstate writes a summary only".into()));
        }
        let summary = dark_state_summary(&cfg.dark_state_request()?)?;
        return emit_summary(&summary, summary_path.as_deref());
    }
    if cfg.output.table.is_some() {
        return Err(CliError::Validation("output.table applies to sweeps only".into()));
    }
    let spec = cfg.experiment_spec()?;
    let report = spec.run()?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(trace) = cfg.resolve(dir, &cfg.output.trace) {
        write_atomic(&trace, &output::trace_csv(&report)?)?;
    }
    emit_summary(&output::run_summary(&spec, &report), summary_path.as_deref())
}

/// `darkpassage sweep <config>`.
pub fn cmd_sweep(path: &Path) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(path)?;
    sweep_with(&cfg, path)
}

fn sweep_with(cfg: &ExperimentConfig, path: &Path) -> Result<(), CliError> {
    if cfg.output.trace.is_some() {
        return Err(CliError::Validation("sweeps write no trace; use output.table".into()));
    }
    let grid = cfg.sweep_grid()?;
    let threads = threads_from_env()?;
    let table = run_sweep(&grid, threads)?;
    let dir = config_dir(path);
    let csv = output::sweep_csv(&table)?;
    match cfg.resolve(dir, &cfg.output.table) {
        Some(p) => write_atomic(&p, &csv)?,
        None => print!("{}", String::from_utf8_lossy(&csv)),
    }
    if let Some(p) = cfg.resolve(dir, &cfg.output.summary) {
        write_atomic(&p, output::sweep_summary(grid.base(), &table).render().as_bytes())?;
    }
    if table.succeeded() > 0 {
        return Ok(());
    }
    let failures: Vec<_> = table.rows.iter().filter_map(|r| r.outcome.as_ref().err()).collect();
    let first = failures.first().map_or(String::new(), |f| f.message.clone());
    let msg = format!("all {} sweep rows failed; first: {first}", table.rows.len());
    if failures.iter().all(|f| f.numerical) {
        Err(CliError::Numerical(msg))
    } else {
        Err(CliError::Validation(msg))
    }
}
