use super::{
    run_astirap, run_collective_transfer, run_imperfect_polarization, run_rotation_segment, run_rotation_zxz,
    run_sstirap, run_transfer_3spin, RotationSpec, RunReport, TransferParams,
};
use crate::chain::Axis;
use crate::error::{invalid, Result};
use crate::state::QubitState;

/// Parameter names accepted by [`ExperimentSpec::set`].
pub const AXIS_NAMES: &[&str] = &[
    "G", "G_sigma", "sigma", "delay", "pad", "M", "tolerance", "p", "alpha", "beta", "gamma", "phi", "n", "n_spins",
    "beta_sq",
];

/// Which protocol to run, with its protocol-specific parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentKind {
    Transfer3,
    Astirap { n: usize },
    Sstirap { n_spins: usize },
    Collective { n_spins: usize },
    Polarization { p: f64 },
    RotateSegment { axis: Axis, phi: f64 },
    RotateZxz { alpha: f64, beta: f64, gamma: f64 },
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Transfer3 => "transfer3",
            ExperimentKind::Astirap { .. } => "astirap",
            ExperimentKind::Sstirap { .. } => "sstirap",
            ExperimentKind::Collective { .. } => "collective",
            ExperimentKind::Polarization { .. } => "polarization",
            ExperimentKind::RotateSegment { .. } => "rotate_segment",
            ExperimentKind::RotateZxz { .. } => "rotate_zxz",
        }
    }
}

/// A complete, runnable experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub params: TransferParams,
    pub qubit: QubitState,
}

fn count(name: &str, value: f64) -> Result<usize> {
    if value.fract() != 0.0 || !(1.0..=64.0).contains(&value) {
        return Err(invalid(format!("{name} must be a positive integer, got {value}")));
    }
    Ok(value as usize)
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, params: TransferParams, qubit: QubitState) -> Self {
        ExperimentSpec { kind, params, qubit }
    }

    /// Sets one named parameter.
    ///
    /// `sigma` rescales the delay and window pad with it so the pulse shape
    /// in units of σ is kept; `G_sigma` sets `G` from the pulse area at the
    /// current σ; `beta_sq` replaces the qubit by `(sqrt(1 − v), sqrt(v))`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(invalid(format!("{name} must be finite")));
        }
        let mismatch = |kind: &ExperimentKind| invalid(format!("parameter {name} does not apply to {}", kind.name()));
        let p = &mut self.params;
        match (name, &mut self.kind) {
            ("G", _) => p.g = value,
            ("G_sigma", _) => p.g = value / p.sigma,
            ("sigma", _) => {
                let ratio = value / p.sigma;
                p.sigma = value;
                p.delay *= ratio;
                p.window_pad *= ratio;
                p.timing_offset *= ratio;
            }
            ("delay", _) => p.delay = value,
            ("pad", _) => p.window_pad = value,
            ("M", _) => p.straddle = Some(value),
            ("tolerance", _) => p.tolerance = value,
            ("beta_sq", _) => self.qubit = QubitState::with_down_probability(value)?,
            ("p", ExperimentKind::Polarization { p }) => *p = value,
            ("phi", ExperimentKind::RotateSegment { phi, .. }) => *phi = value,
            ("alpha", ExperimentKind::RotateZxz { alpha, .. }) => *alpha = value,
            ("beta", ExperimentKind::RotateZxz { beta, .. }) => *beta = value,
            ("gamma", ExperimentKind::RotateZxz { gamma, .. }) => *gamma = value,
            ("n", ExperimentKind::Astirap { n }) => *n = count(name, value)?,
            ("n_spins", ExperimentKind::Sstirap { n_spins } | ExperimentKind::Collective { n_spins }) => {
                *n_spins = count(name, value)?
            }
            (_, kind) if AXIS_NAMES.contains(&name) => return Err(mismatch(kind)),
            _ => return Err(invalid(format!("unknown parameter {name}; expected one of {}", AXIS_NAMES.join(", ")))),
        }
        Ok(())
    }

    pub fn run(&self) -> Result<RunReport> {
        let (psi, params) = (&self.qubit, &self.params);
        match self.kind {
            ExperimentKind::Transfer3 => run_transfer_3spin(psi, params),
            ExperimentKind::Astirap { n } => run_astirap(n, psi, params),
            ExperimentKind::Sstirap { n_spins } => run_sstirap(n_spins, psi, params),
            ExperimentKind::Collective { n_spins } => run_collective_transfer(n_spins, psi, params),
            ExperimentKind::Polarization { p } => run_imperfect_polarization(psi, p, params).map(|r| r.report),
            ExperimentKind::RotateSegment { axis, phi } => run_rotation_segment(axis, phi, psi, params),
            ExperimentKind::RotateZxz { alpha, beta, gamma } => {
                run_rotation_zxz(&RotationSpec::uniform(alpha, beta, gamma, params.clone()), psi)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ExperimentKind) -> ExperimentSpec {
        ExperimentSpec::new(kind, TransferParams::new(100.0, 1.0), QubitState::up())
    }

    #[test]
    fn set_applies_matching_parameters() {
        let mut s = spec(ExperimentKind::Polarization { p: 0.0 });
        s.set("p", 0.2).unwrap();
        s.set("sigma", 2.0).unwrap();
        s.set("G_sigma", 100.0).unwrap();
        s.set("beta_sq", 0.25).unwrap();
        assert_eq!(s.kind, ExperimentKind::Polarization { p: 0.2 });
        assert_eq!((s.params.g, s.params.sigma, s.params.delay, s.params.window_pad), (50.0, 2.0, 2.0, 8.0));
        assert!((s.qubit.beta.re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn set_rejects_foreign_and_unknown_parameters() {
        let mut s = spec(ExperimentKind::Transfer3);
        assert!(s.set("p", 0.1).unwrap_err().to_string().contains("does not apply"));
        assert!(s.set("bogus", 1.0).unwrap_err().to_string().contains("unknown"));
        let mut a = spec(ExperimentKind::Astirap { n: 1 });
        assert!(a.set("n", 2.5).is_err());
        a.set("n", 2.0).unwrap();
        assert_eq!(a.kind, ExperimentKind::Astirap { n: 2 });
    }
}
