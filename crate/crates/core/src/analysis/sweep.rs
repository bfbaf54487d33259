use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::protocols::ExperimentSpec;

/// One named parameter and the values it takes.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        SweepAxis { name: name.into(), values }
    }
}

/// Cartesian grid of parameter values applied on top of a base experiment.
#[derive(Clone, Debug)]
pub struct SweepGrid {
    base: ExperimentSpec,
    axes: Vec<SweepAxis>,
}

impl SweepGrid {
    /// Checks that every axis is non-empty, finite, unique and applicable to
    /// the base experiment.
    pub fn new(base: ExperimentSpec, axes: Vec<SweepAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(invalid("a sweep needs at least one axis"));
        }
        for (i, axis) in axes.iter().enumerate() {
            if axis.values.is_empty() {
                return Err(invalid(format!("sweep axis {} has no values", axis.name)));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("sweep axis {} has non-finite values", axis.name)));
            }
            if axes[..i].iter().any(|a| a.name == axis.name) {
                return Err(invalid(format!("sweep axis {} appears twice", axis.name)));
            }
            let mut probe = base.clone();
            probe.set(&axis.name, axis.values[0])?;
        }
        Ok(SweepGrid { base, axes })
    }

    pub fn axes(&self) -> &[SweepAxis] {
        &self.axes
    }

    pub fn base(&self) -> &ExperimentSpec {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in lexicographic order, first axis slowest.
    pub fn points(&self) -> Vec<Vec<(String, f64)>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((axis.name.clone(), v));
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// Why a grid point produced no report.
#[derive(Clone, Debug, PartialEq)]
pub struct RowFailure {
    pub message: String,
    /// Integration failure rather than a rejected parameter set.
    pub numerical: bool,
}

impl From<Error> for RowFailure {
    fn from(e: Error) -> Self {
        RowFailure { numerical: e.is_numerical(), message: e.to_string() }
    }
}

/// One grid point and its outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub inputs: Vec<(String, f64)>,
    /// Report scalars of a successful run.
    pub outcome: std::result::Result<Vec<(String, f64)>, RowFailure>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.inputs
            .iter()
            .chain(self.outcome.as_ref().ok().into_iter().flatten())
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub axis_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Output column names in order of first appearance.
    pub fn scalar_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for row in &self.rows {
            if let Ok(s) = &row.outcome {
                for (k, _) in s {
                    if !names.contains(k) && !self.axis_names.contains(k) {
                        names.push(k.clone());
                    }
                }
            }
        }
        names
    }

    pub fn succeeded(&self) -> usize {
        self.rows.iter().filter(|r| r.is_ok()).count()
    }
}

fn run_point(base: &ExperimentSpec, point: &[(String, f64)]) -> std::result::Result<Vec<(String, f64)>, RowFailure> {
    let mut spec = base.clone();
    for (name, v) in point {
        spec.set(name, *v)?;
    }
    Ok(spec.run()?.scalars())
}

/// Runs every grid point, in parallel on up to `threads` workers (all cores
/// when `None`). Rows come back in grid order; failed points are recorded
/// rather than aborting the sweep.
pub fn run_sweep(grid: &SweepGrid, threads: Option<usize>) -> Result<SweepTable> {
    let points = grid.points();
    let run = || -> Vec<SweepRow> {
        points
            .par_iter()
            .map(|p| SweepRow { inputs: p.clone(), outcome: run_point(&grid.base, p) })
            .collect()
    };
    let rows = match threads {
        Some(0) => return Err(invalid("thread count must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(SweepTable { axis_names: grid.axes.iter().map(|a| a.name.clone()).collect(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{ExperimentKind, TransferParams};
    use crate::state::QubitState;

    fn base() -> ExperimentSpec {
        ExperimentSpec::new(ExperimentKind::Transfer3, TransferParams::new(10.0, 1.0), QubitState::up())
    }

    #[test]
    fn points_are_lexicographic() {
        let g = SweepGrid::new(base(), vec![SweepAxis::new("G", vec![1.0, 2.0]), SweepAxis::new("delay", vec![0.5, 1.0, 1.5])])
            .unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(g.len(), 6);
        assert_eq!(pts[0], vec![("G".to_string(), 1.0), ("delay".to_string(), 0.5)]);
        assert_eq!(pts[1], vec![("G".to_string(), 1.0), ("delay".to_string(), 1.0)]);
        assert_eq!(pts[5], vec![("G".to_string(), 2.0), ("delay".to_string(), 1.5)]);
    }

    #[test]
    fn grid_validation() {
        assert!(SweepGrid::new(base(), vec![]).is_err());
        assert!(SweepGrid::new(base(), vec![SweepAxis::new("G", vec![])]).is_err());
        assert!(SweepGrid::new(base(), vec![SweepAxis::new("p", vec![0.1])]).is_err());
        assert!(SweepGrid::new(base(), vec![SweepAxis::new("G", vec![1.0]), SweepAxis::new("G", vec![2.0])]).is_err());
    }

    #[test]
    fn failures_are_recorded_per_row() {
        let g = SweepGrid::new(base(), vec![SweepAxis::new("sigma", vec![1.0, -1.0, 2.0])]).unwrap();
        let t = run_sweep(&g, Some(2)).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!(t.rows[0].is_ok() && !t.rows[1].is_ok() && t.rows[2].is_ok());
        let failure = t.rows[1].outcome.as_ref().unwrap_err();
        assert!(!failure.numerical && failure.message.contains("sigma"));
        assert_eq!(t.succeeded(), 2);
        assert!(t.scalar_names().contains(&"fidelity".to_string()));
    }
}
