//! TOML experiment configuration.
//!
//! Keys carry the physics symbols (`G`, `sigma`, `delay`, `M`, `p`, `alpha`,
//! ...). Unknown keys are rejected by the parser and keys that the selected
//! experiment does not use are rejected when the config is turned into a runnable experiment.

use std::path::{Path, PathBuf};

use darkpassage::analysis::{SweepAxis, SweepGrid};
use darkpassage::chain::Axis;
use darkpassage::protocols::{Direction, ExperimentKind, ExperimentSpec, TransferParams};
use darkpassage::state::QubitState;
use darkpassage::C64;
use serde::Deserialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    Transfer3,
    Astirap,
    Sstirap,
    Collective,
    Polarization,
    RotateSegment,
    RotateZxz,
    Darkstate,
    Sweep,
}

impl ExperimentName {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Transfer3 => "transfer3",
            ExperimentName::Astirap => "astirap",
            ExperimentName::Sstirap => "sstirap",
            ExperimentName::Collective => "collective",
            ExperimentName::Polarization => "polarization",
            ExperimentName::RotateSegment => "rotate_segment",
            ExperimentName::RotateZxz => "rotate_zxz",
            ExperimentName::Darkstate => "darkstate",
            ExperimentName::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DirectionName {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Z,
    X,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    #[serde(default)]
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    #[serde(default)]
    pub beta_re: f64,
    #[serde(default)]
    pub beta_im: f64,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub summary: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub table: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Experiment swept over; defaults to the top-level `experiment`.
    pub experiment: Option<ExperimentName>,
    pub axes: Vec<AxisConfig>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    #[serde(rename = "G_sigma")]
    pub g_sigma: Option<f64>,
    pub sigma: Option<f64>,
    pub delay: Option<f64>,
    pub pad: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub timing_offset: Option<f64>,
    pub tolerance: Option<f64>,
    pub stride: Option<f64>,
    pub direction: Option<DirectionName>,
    pub n: Option<usize>,
    pub n_spins: Option<usize>,
    pub p: Option<f64>,
    pub axis: Option<AxisName>,
    pub phi: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub qubit: Option<QubitConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
}

/// Pulse-free dark-state request.
#[derive(Clone, Debug, PartialEq)]
pub enum DarkStateRequest {
    ThreeLevel { k: f64, l: f64, alpha: f64 },
    Alternating { n: usize, k: f64, l: f64 },
    Straddled { n_spins: usize, k: f64, l: f64, m: f64 },
}

const PULSE_KEYS: &[&str] = &["G", "G_sigma", "sigma", "delay", "pad", "timing_offset", "tolerance", "stride", "qubit"];

fn allowed_keys(name: ExperimentName) -> Vec<&'static str> {
    let mut keys = PULSE_KEYS.to_vec();
    let specific: &[&str] = match name {
        ExperimentName::Transfer3 => &["direction"],
        ExperimentName::Astirap => &["direction", "n"],
        ExperimentName::Sstirap => &["direction", "n_spins", "M"],
        ExperimentName::Collective => &["direction", "n_spins"],
        ExperimentName::Polarization => &["p"],
        ExperimentName::RotateSegment => &["axis", "phi"],
        ExperimentName::RotateZxz => &["alpha", "beta", "gamma"],
        ExperimentName::Darkstate => return vec!["K", "L", "alpha", "n", "n_spins", "M"],
        ExperimentName::Sweep => &[],
    };
    keys.extend_from_slice(specific);
    keys
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn need<T: Copy>(value: Option<T>, key: &str, experiment: ExperimentName) -> Result<T, CliError> {
    value.ok_or_else(|| validation(format!("experiment {} requires key {key}", experiment.as_str())))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn present_keys(&self) -> Vec<&'static str> {
        let opt = [
            ("G", self.g.is_some()),
            ("G_sigma", self.g_sigma.is_some()),
            ("sigma", self.sigma.is_some()),
            ("delay", self.delay.is_some()),
            ("pad", self.pad.is_some()),
            ("M", self.m.is_some()),
            ("timing_offset", self.timing_offset.is_some()),
            ("tolerance", self.tolerance.is_some()),
            ("stride", self.stride.is_some()),
            ("direction", self.direction.is_some()),
            ("n", self.n.is_some()),
            ("n_spins", self.n_spins.is_some()),
            ("p", self.p.is_some()),
            ("axis", self.axis.is_some()),
            ("phi", self.phi.is_some()),
            ("alpha", self.alpha.is_some()),
            ("beta", self.beta.is_some()),
            ("gamma", self.gamma.is_some()),
            ("K", self.k.is_some()),
            ("L", self.l.is_some()),
            ("qubit", self.qubit.is_some()),
        ];
        opt.into_iter().filter(|(_, present)| *present).map(|(k, _)| k).collect()
    }

    /// The protocol actually executed: the swept one for sweeps.
    pub fn target(&self) -> Result<ExperimentName, CliError> {
        match (self.experiment, &self.sweep) {
            (ExperimentName::Sweep, Some(SweepConfig { experiment: Some(e), .. })) if *e != ExperimentName::Sweep => Ok(*e),
            (ExperimentName::Sweep, _) => Err(validation("sweep configs need sweep.experiment naming the protocol")),
            (e, _) => Ok(e),
        }
    }

    pub fn is_sweep(&self) -> bool {
        self.experiment == ExperimentName::Sweep || self.sweep.is_some()
    }

    /// Rejects keys the selected experiment does not use.
    fn check_keys(&self, target: ExperimentName) -> Result<(), CliError> {
        let allowed = allowed_keys(target);
        let stray: Vec<_> = self.present_keys().into_iter().filter(|k| !allowed.contains(k)).collect();
        if !stray.is_empty() {
            return Err(validation(format!("keys not used by experiment {}: {}", target.as_str(), stray.join(", "))));
        }
        if let Some(SweepConfig { experiment: Some(e), .. }) = &self.sweep {
            if self.experiment != ExperimentName::Sweep && *e != self.experiment {
                return Err(validation("sweep.experiment disagrees with experiment"));
            }
        }
        Ok(())
    }

    fn qubit_state(&self) -> Result<QubitState, CliError> {
        match &self.qubit {
            None => Ok(QubitState::up()),
            Some(q) => {
                let (alpha, beta) = (C64::new(q.alpha_re, q.alpha_im), C64::new(q.beta_re, q.beta_im));
                let norm = alpha.norm_sqr() + beta.norm_sqr();
                if !((norm - 1.0).abs() <= 1e-9) {
                    return Err(validation(format!("qubit: |alpha|^2 + |beta|^2 must be 1, got {norm}")));
                }
                QubitState::new(alpha, beta).map_err(|e| validation(format!("qubit: {e}")))
            }
        }
    }

    fn transfer_params(&self, target: ExperimentName) -> Result<TransferParams, CliError> {
        let sigma = self.sigma.unwrap_or(1.0);
        let g = match (self.g, self.g_sigma) {
            (Some(g), None) => g,
            (None, Some(area)) => area / sigma,
            (Some(_), Some(_)) => return Err(validation("give either G or G_sigma, not both")),
            (None, None) => return Err(validation(format!("experiment {} requires G or G_sigma", target.as_str()))),
        };
        let mut params = TransferParams::new(g, sigma);
        if let Some(d) = self.delay {
            params.delay = d;
        }
        if let Some(pad) = self.pad {
            params.window_pad = pad;
        }
        params.straddle = self.m;
        if let Some(off) = self.timing_offset {
            params.timing_offset = off;
        }
        if let Some(tol) = self.tolerance {
            params.tolerance = tol;
        }
        params.stride = self.stride;
        if self.direction == Some(DirectionName::Backward) {
            params.direction = Direction::Backward;
        }
        params.validate().map_err(CliError::from)?;
        Ok(params)
    }

    /// Fully validated protocol experiment.
    pub fn experiment_spec(&self) -> Result<ExperimentSpec, CliError> {
        let target = self.target()?;
        self.check_keys(target)?;
        let kind = match target {
            ExperimentName::Transfer3 => ExperimentKind::Transfer3,
            ExperimentName::Astirap => ExperimentKind::Astirap { n: need(self.n, "n", target)? },
            ExperimentName::Sstirap => {
                need(self.m, "M", target)?;
                ExperimentKind::Sstirap { n_spins: need(self.n_spins, "n_spins", target)? }
            }
            ExperimentName::Collective => ExperimentKind::Collective { n_spins: need(self.n_spins, "n_spins", target)? },
            ExperimentName::Polarization => ExperimentKind::Polarization { p: need(self.p, "p", target)? },
            ExperimentName::RotateSegment => {
                let axis = match need(self.axis, "axis", target)? {
                    AxisName::Z => Axis::Z,
                    AxisName::X => Axis::X,
                };
                ExperimentKind::RotateSegment { axis, phi: need(self.phi, "phi", target)? }
            }
            ExperimentName::RotateZxz => ExperimentKind::RotateZxz {
                alpha: need(self.alpha, "alpha", target)?,
                beta: need(self.beta, "beta", target)?,
                gamma: need(self.gamma, "gamma", target)?,
            },
            ExperimentName::Darkstate | ExperimentName::Sweep => {
                return Err(validation(format!("{} is not a propagating experiment", target.as_str())))
            }
        };
        Ok(ExperimentSpec::new(kind, self.transfer_params(target)?, self.qubit_state()?))
    }

    pub fn sweep_grid(&self) -> Result<SweepGrid, CliError> {
        let sweep = self.sweep.as_ref().ok_or_else(|| validation("sweep configs need a [sweep] table with axes"))?;
        let axes = sweep.axes.iter().map(|a| SweepAxis::new(a.name.clone(), a.values.clone())).collect();
        SweepGrid::new(self.experiment_spec()?, axes).map_err(CliError::from)
    }

    pub fn dark_state_request(&self) -> Result<DarkStateRequest, CliError> {
        let target = ExperimentName::Darkstate;
        self.check_keys(target)?;
        let (k, l) = (need(self.k, "K", target)?, need(self.l, "L", target)?);
        match (self.n, self.n_spins, self.m) {
            (None, None, None) => Ok(DarkStateRequest::ThreeLevel { k, l, alpha: self.alpha.unwrap_or(0.0) }),
            _ if self.alpha.is_some() => Err(validation("alpha applies to the three-level dark state only")),
            (Some(n), None, None) => Ok(DarkStateRequest::Alternating { n, k, l }),
            (None, Some(n_spins), Some(m)) => Ok(DarkStateRequest::Straddled { n_spins, k, l, m }),
            _ => Err(validation("give either n, or both M and n_spins")),
        }
    }

    /// Output path resolved against the config file's directory.
    pub fn resolve(&self, base: &Path, path: &Option<PathBuf>) -> Option<PathBuf> {
        path.as_ref().map(|p| if p.is_absolute() { p.clone() } else { base.join(p) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_transfer_config() {
        let cfg = ExperimentConfig::parse(
            "experiment = \"transfer3\"\nG_sigma = 100\nsigma = 2.0\n[qubit]\nalpha_re = 0.6\nbeta_re = 0.8\n",
        )
        .unwrap();
        let spec = cfg.experiment_spec().unwrap();
        assert_eq!(spec.kind, ExperimentKind::Transfer3);
        assert_eq!(spec.params.g, 50.0);
        assert_eq!(spec.params.delay, 2.0);
        assert_eq!(spec.params.window_pad, 8.0);
        assert_eq!(spec.qubit.beta, C64::from(0.8));
    }

    #[test]
    fn rejects_unknown_and_unused_keys() {
        assert!(matches!(
            ExperimentConfig::parse("experiment = \"transfer3\"\nG = 1\nbogus = 2\n"),
            Err(CliError::Validation(_))
        ));
        let cfg = ExperimentConfig::parse("experiment = \"transfer3\"\nG = 1\np = 0.1\n").unwrap();
        let err = cfg.experiment_spec().unwrap_err().to_string();
        assert!(err.contains("p"), "{err}");
    }

    #[test]
    fn validation_failures() {
        for text in [
            "experiment = \"transfer3\"\nG = 1\nsigma = -1\n",
            "experiment = \"transfer3\"\nsigma = 1\n",
            "experiment = \"transfer3\"\nG = 1\nG_sigma = 1\n",
            "experiment = \"astirap\"\nG = 1\n",
            "experiment = \"transfer3\"\nG = 1\n[qubit]\nalpha_re = 2\n",
        ] {
            let cfg = ExperimentConfig::parse(text).unwrap();
            assert!(matches!(cfg.experiment_spec(), Err(CliError::Validation(_))), "{text}");
        }
    }

    #[test]
    fn sweep_target_and_grid() {
        let cfg = ExperimentConfig::parse(
            "experiment = \"sweep\"\nG = 10\n[sweep]\nexperiment = \"transfer3\"\n[[sweep.axes]]\nname = \"G_sigma\"\nvalues = [10, 30]\n",
        )
        .unwrap();
        assert_eq!(cfg.target().unwrap(), ExperimentName::Transfer3);
        assert_eq!(cfg.sweep_grid().unwrap().len(), 2);
        let empty = ExperimentConfig::parse(
            "experiment = \"transfer3\"\nG = 10\n[sweep]\n[[sweep.axes]]\nname = \"G\"\nvalues = []\n",
        )
        .unwrap();
        assert!(matches!(empty.sweep_grid(), Err(CliError::Validation(_))));
    }

    #[test]
    fn dark_state_requests() {
        let cfg = ExperimentConfig::parse("experiment = \"darkstate\"\nK = 1\nL = 2\nn = 2\n").unwrap();
        assert_eq!(cfg.dark_state_request().unwrap(), DarkStateRequest::Alternating { n: 2, k: 1.0, l: 2.0 });
        let bad = ExperimentConfig::parse("experiment = \"darkstate\"\nK = 1\nL = 2\nM = 3\n").unwrap();
        assert!(bad.dark_state_request().is_err());
    }
}
