use std::path::Path;
use std::process::{Command, Output};

fn darkpassage(args: &[&str], dir: &Path, envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_darkpassage"));
    cmd.args(args).current_dir(dir).env_remove("DARKPASSAGE_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    dir.join(name).to_str().unwrap().to_string()
}

fn summary_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in summary"))
        .parse()
        .unwrap()
}

#[test]
fn run_writes_summary_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        "experiment = \"transfer3\"\nG_sigma = 100\n[qubit]\nalpha_re = 0.6\nbeta_re = 0.8\n[output]\nsummary = \"s.txt\"\ntrace = \"t.csv\"\n",
    );
    let out = darkpassage(&["run", &cfg], dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("s.txt")).unwrap();
    assert!(summary.starts_with("schema_version = 1\n"));
    assert!(summary_value(&summary, "fidelity") >= 0.999);
    let trace = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "t,site_1_down,site_2_down,site_3_down,norm,F_t,gamma_t");
    assert!(lines.count() > 100);
    assert!(!trace.contains('\r'));
}

#[test]
fn invalid_sigma_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "experiment = \"transfer3\"\nG = 10\nsigma = 0\n[output]\nsummary = \"s.txt\"\ntrace = \"t.csv\"\n",
    );
    let out = darkpassage(&["run", &cfg], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn unknown_keys_and_missing_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "u.toml", "experiment = \"transfer3\"\nG = 10\nsigmaa = 1\n");
    assert_eq!(darkpassage(&["run", &cfg], dir.path(), &[]).status.code(), Some(2));
    assert_eq!(darkpassage(&["run", "missing.toml"], dir.path(), &[]).status.code(), Some(1));
}

#[test]
fn darkstate_prints_the_analytic_vector() {
    let dir = tempfile::tempdir().unwrap();
    let out = darkpassage(&["darkstate", "--k", "1", "--l", "1"], dir.path(), &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("dark_state = [7.07106781187e-1, 0.00000000000e0, -7.07106781187e-1]"), "{text}");
    let out = darkpassage(&["darkstate", "--k", "1", "--l", "1", "--n", "2"], dir.path(), &[]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("dim = 5"));
    let out = darkpassage(&["darkstate", "--k", "1", "--l", "1", "--straddle", "10"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_table_has_status_and_monotone_infidelity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "experiment = \"transfer3\"\nG = 10\n[qubit]\nalpha_re = 0.6\nbeta_re = 0.8\n[sweep]\naxes = [{ name = \"G_sigma\", values = [10, 30, 100] }]\n[output]\ntable = \"sweep.csv\"\n",
    );
    let out = darkpassage(&["sweep", &cfg], dir.path(), &[("DARKPASSAGE_THREADS", "2")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (status, infid) = (col("status"), col("infidelity"));
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| &r[status] == "ok"));
    let v: Vec<f64> = rows.iter().map(|r| r[infid].parse().unwrap()).collect();
    assert!(v.windows(2).all(|w| w[1] <= w[0]), "{v:?}");
}

#[test]
fn sweep_records_failed_rows_and_rejects_empty_axes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "f.toml",
        "experiment = \"transfer3\"\nG = 10\n[sweep]\naxes = [{ name = \"sigma\", values = [1, -1] }]\n[output]\ntable = \"f.csv\"\n",
    );
    assert!(darkpassage(&["sweep", &cfg], dir.path(), &[]).status.success());
    let table = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert!(table.lines().nth(2).unwrap().contains("error: invalid parameter: sigma"));

    let empty = write(
        dir.path(),
        "e.toml",
        "experiment = \"transfer3\"\nG = 10\n[sweep]\naxes = [{ name = \"G\", values = [] }]\n",
    );
    assert_eq!(darkpassage(&["sweep", &empty], dir.path(), &[]).status.code(), Some(2));
    assert_eq!(darkpassage(&["sweep", &cfg], dir.path(), &[("DARKPASSAGE_THREADS", "zero")]).status.code(), Some(2));
}

#[test]
fn sweep_output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.toml",
        "experiment = \"polarization\"\nG_sigma = 60\np = 0\n[sweep]\naxes = [{ name = \"p\", values = [0, 0.1, 0.3] }, { name = \"beta_sq\", values = [0, 0.25, 0.5] }]\n",
    );
    let one = darkpassage(&["sweep", &cfg], dir.path(), &[("DARKPASSAGE_THREADS", "1")]);
    let four = darkpassage(&["sweep", &cfg], dir.path(), &[("DARKPASSAGE_THREADS", "4")]);
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(String::from_utf8(one.stdout).unwrap().lines().count(), 10);
}
