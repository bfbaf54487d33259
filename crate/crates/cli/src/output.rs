//! Summary, trace and table writers.
//!
//! Floats are written with 12 significant digits in scientific notation so
//! identical runs give byte-identical files.

use std::io::Write;
use std::path::Path;

use darkpassage::analysis::SweepTable;
use darkpassage::protocols::{ExperimentSpec, RunReport};
use darkpassage::C64;
use nalgebra::DVector;

use crate::config::SCHEMA_VERSION;
use crate::CliError;

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        // no negative zero
        format!("{:.11e}", x + 0.0)
    }
}

pub fn fmt_c64(z: C64) -> String {
    if z.im == 0.0 {
        fmt_f64(z.re)
    } else {
        format!("{}{}{}i", fmt_f64(z.re), if z.im.is_sign_negative() { "" } else { "+" }, fmt_f64(z.im))
    }
}

/// Flat `key = value` document, first line `schema_version`.
#[derive(Debug, Default)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        let mut s = Summary::default();
        s.text("schema_version", SCHEMA_VERSION);
        s
    }

    pub fn text(&mut self, key: &str, value: impl ToString) {
        // values never span lines
        self.lines.push((key.to_string(), value.to_string().replace(['\n', '\r'], " ")));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.text(key, fmt_f64(value));
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn params_summary(s: &mut Summary, spec: &ExperimentSpec) {
    let p = &spec.params;
    s.num("G", p.g);
    s.num("sigma", p.sigma);
    s.num("delay", p.delay);
    s.num("pad", p.window_pad);
    if let Some(m) = p.straddle {
        s.num("M", m);
    }
    s.num("timing_offset", p.timing_offset);
    s.num("tolerance", p.tolerance);
    s.text("direction", format!("{:?}", p.direction).to_lowercase());
    s.num("qubit_alpha_re", spec.qubit.alpha.re);
    s.num("qubit_alpha_im", spec.qubit.alpha.im);
    s.num("qubit_beta_re", spec.qubit.beta.re);
    s.num("qubit_beta_im", spec.qubit.beta.im);
}

pub fn run_summary(spec: &ExperimentSpec, report: &RunReport) -> Summary {
    let mut s = Summary::new();
    s.text("experiment", report.experiment);
    s.text("n_spins", report.n_spins);
    s.text("output_site", report.output_site + 1);
    params_summary(&mut s, spec);
    s.num("target_alpha_re", report.target.alpha.re);
    s.num("target_alpha_im", report.target.alpha.im);
    s.num("target_beta_re", report.target.beta.re);
    s.num("target_beta_im", report.target.beta.im);
    for (k, v) in report.scalars() {
        s.num(&k, v);
    }
    s.text("warnings", report.warnings.len());
    for (i, w) in report.warnings.iter().enumerate() {
        s.text(&format!("warning_{}", i + 1), w);
    }
    s
}

pub fn sweep_summary(spec: &ExperimentSpec, table: &SweepTable) -> Summary {
    let mut s = Summary::new();
    s.text("experiment", "sweep");
    s.text("swept_experiment", spec.kind.name());
    params_summary(&mut s, spec);
    s.text("axes", table.axis_names.join(","));
    s.text("rows", table.rows.len());
    s.text("succeeded", table.succeeded());
    s.text("failed", table.rows.len() - table.succeeded());
    s
}

pub fn dark_state_summary(description: &[(&str, String)], f: f64, state: &DVector<C64>) -> Summary {
    let mut s = Summary::new();
    s.text("experiment", "darkstate");
    for (k, v) in description {
        s.text(k, v);
    }
    s.num("F", f);
    s.text("dim", state.len());
    let comps: Vec<String> = state.iter().map(|z| fmt_c64(*z)).collect();
    s.text("dark_state", format!("[{}]", comps.join(", ")));
    s
}

fn csv_bytes(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Columns `t, site_1_down, …, site_N_down, norm, F_t, gamma_t`.
pub fn trace_csv(report: &RunReport) -> Result<Vec<u8>, CliError> {
    let n = report.trace.first().map_or(report.n_spins, |r| r.down.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("site_{i}_down")));
    header.extend(["norm", "F_t", "gamma_t"].map(String::from));
    let rows = report.trace.iter().map(|r| {
        let mut row = vec![fmt_f64(r.t)];
        row.extend(r.down.iter().map(|&p| fmt_f64(p)));
        row.extend([fmt_f64(r.norm), fmt_f64(r.f_t), fmt_f64(r.gamma_t)]);
        row
    });
    csv_bytes(header, rows)
}

/// Columns `row`, the sweep axes, `status`, then every report scalar.
pub fn sweep_csv(table: &SweepTable) -> Result<Vec<u8>, CliError> {
    let names = table.scalar_names();
    let mut header = vec!["row".to_string()];
    header.extend(table.axis_names.iter().cloned());
    header.push("status".to_string());
    header.extend(names.iter().cloned());
    let rows = table.rows.iter().enumerate().map(|(i, row)| {
        let mut out = vec![i.to_string()];
        out.extend(row.inputs.iter().map(|(_, v)| fmt_f64(*v)));
        match &row.outcome {
            Ok(scalars) => {
                out.push("ok".to_string());
                out.extend(names.iter().map(|n| {
                    scalars.iter().find(|(k, _)| k == n).map_or_else(String::new, |(_, v)| fmt_f64(*v))
                }));
            }
            Err(f) => {
                out.push(format!("error: {}", f.message));
                out.extend(names.iter().map(|_| String::new()));
            }
        }
        out
    });
    csv_bytes(header, rows)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_twelve_significant_digits() {
        assert_eq!(fmt_f64(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_f64(-2.5), "-2.50000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_c64(C64::new(0.5, -0.25)), "5.00000000000e-1-2.50000000000e-1i");
    }

    #[test]
    fn summary_starts_with_schema_version() {
        let mut s = Summary::new();
        s.num("x", 1.0);
        s.text("msg", "a\nb");
        assert_eq!(s.render(), "schema_version = 1\nx = 1.00000000000e0\nmsg = a b\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
