//! End-to-end dark-passage experiments.
//!
//! Every experiment places a Stokes pulse `L` (far from the initial
//! excitation) before a pump pulse `K` (next to it), integrates the chain and
//! summarises the result in a [`RunReport`]. The fidelity reported is always
//! `sqrt(⟨target|ρ|target⟩)` for the reduced state `ρ` of the output spin.

mod experiment;
mod polarization;
mod rotation;
mod transfer;

use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::Matrix2;

pub use experiment::{ExperimentKind, ExperimentSpec, AXIS_NAMES};
pub use polarization::{run_imperfect_polarization, PolarizationReport};
pub use rotation::{
    hadamard, run_rotation_segment, run_rotation_zxz, rx, rz, segment_gate_fidelity, zxz_target, RotationSpec,
};
pub use transfer::{
    counterintuitive_chain, counterintuitive_schedule, run_astirap, run_collective_transfer, run_sstirap,
    run_transfer_3spin, BondAssignment,
};

use crate::adiabatic::{adiabaticity_for_pulses, mixing_angle};
use crate::analysis::qubit_fidelity;
use crate::error::{invalid, Result};
use crate::hamiltonian::Generator;
use crate::propagator::{propagate, IntegratorOptions, Schedule, Trajectory};
use crate::pulse::PulseShape;
use crate::state::{QuantumState, QubitState};
use crate::C64;

/// Smallest allowed distance between a pulse center and the window edge, in σ.
pub const MIN_PAD_SIGMAS: f64 = 4.0;
/// Straddle strength below `STRADDLE_WARN_RATIO · G` triggers a warning.
pub const STRADDLE_WARN_RATIO: f64 = 5.0;
/// Samples used for the adiabaticity margin.
const MARGIN_SAMPLES: usize = 4001;
/// Trace samples per σ when no stride is given.
const DEFAULT_SAMPLES_PER_SIGMA: f64 = 20.0;

/// Which end of the chain carries the input qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Direction {
    /// Spin 1 to spin N.
    #[default]
    Forward,
    /// Spin N to spin 1; the pump and Stokes bonds swap places.
    Backward,
}

/// Gaussian pulse pair and integration settings for one passage.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferParams {
    /// Peak coupling of both Gaussians.
    pub g: f64,
    pub sigma: f64,
    /// Pump center minus Stokes center.
    pub delay: f64,
    /// Distance from the outer pulse centers to the window edges.
    pub window_pad: f64,
    /// Plateau of the straddling coupling on interior bonds.
    pub straddle: Option<f64>,
    /// Translation of both pulses relative to the nominal window.
    pub timing_offset: f64,
    pub tolerance: f64,
    /// Trace sampling interval; defaults to σ/20.
    pub stride: Option<f64>,
    pub direction: Direction,
}

impl Default for TransferParams {
    fn default() -> Self {
        TransferParams::new(100.0, 1.0)
    }
}

impl TransferParams {
    /// Defaults: delay σ, pad 4σ, tolerance 1e-10.
    pub fn new(g: f64, sigma: f64) -> Self {
        TransferParams {
            g,
            sigma,
            delay: sigma,
            window_pad: MIN_PAD_SIGMAS * sigma,
            straddle: None,
            timing_offset: 0.0,
            tolerance: IntegratorOptions::default().tolerance,
            stride: None,
            direction: Direction::Forward,
        }
    }

    /// Sets `G` so that `Gσ = area`.
    pub fn with_pulse_area(mut self, area: f64) -> Self {
        self.g = area / self.sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(invalid(format!("G must be positive, got {}", self.g)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.delay.is_finite() && self.delay >= 0.0) {
            return Err(invalid(format!("delay must be >= 0 (Stokes before pump), got {}", self.delay)));
        }
        if !self.timing_offset.is_finite() {
            return Err(invalid("timing offset must be finite"));
        }
        let reach = self.window_pad - self.timing_offset.abs();
        if !(reach >= MIN_PAD_SIGMAS * self.sigma * (1.0 - 1e-12)) {
            return Err(invalid(format!(
                "window must extend at least {MIN_PAD_SIGMAS}σ beyond both pulse centers (pad {}, offset {}, σ {})",
                self.window_pad, self.timing_offset, self.sigma
            )));
        }
        if let Some(m) = self.straddle {
            if !(m.is_finite() && m > 0.0) {
                return Err(invalid(format!("straddle M must be positive, got {m}")));
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0 && self.tolerance <= 1e-3) {
            return Err(invalid(format!("tolerance must lie in (0, 1e-3], got {}", self.tolerance)));
        }
        if let Some(s) = self.stride {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid(format!("stride must be positive, got {s}")));
            }
        }
        Ok(())
    }

    pub fn pulse_area(&self) -> f64 {
        self.g * self.sigma
    }

    fn integrator_options(&self) -> IntegratorOptions {
        IntegratorOptions { tolerance: self.tolerance, ..IntegratorOptions::default() }
    }

    fn effective_stride(&self) -> f64 {
        self.stride.unwrap_or(self.sigma / DEFAULT_SAMPLES_PER_SIGMA)
    }

    /// Counter-intuitive placement of the pulse pair starting at `t_start`.
    pub fn plan_at(&self, t_start: f64) -> Result<PassagePlan> {
        self.validate()?;
        // room for the straddle ramp outside the Gaussian window
        let lead = if self.straddle.is_some() { MIN_PAD_SIGMAS * self.sigma } else { 0.0 };
        let stokes_nominal = t_start + lead + self.window_pad;
        let pump_nominal = stokes_nominal + self.delay;
        let t_end = pump_nominal + self.window_pad + lead;
        let stokes_center = stokes_nominal + self.timing_offset;
        let pump_center = pump_nominal + self.timing_offset;
        let stokes = PulseShape::gaussian(self.g, self.sigma, stokes_center)?;
        let pump = PulseShape::gaussian(self.g, self.sigma, pump_center)?;
        let straddle = match self.straddle {
            Some(m) => Some(PulseShape::ramped_constant(
                m,
                stokes_nominal - self.window_pad,
                pump_nominal + self.window_pad,
                self.sigma,
            )?),
            None => None,
        };
        Ok(PassagePlan {
            t_start,
            t_end,
            stokes_center,
            pump_center,
            pump,
            stokes,
            straddle,
            counterintuitive: self.delay > 0.0,
        })
    }

    pub fn plan(&self) -> Result<PassagePlan> {
        self.plan_at(0.0)
    }
}

/// Pulse placement for one passage.
#[derive(Clone, Debug, PartialEq)]
pub struct PassagePlan {
    pub t_start: f64,
    pub t_end: f64,
    pub stokes_center: f64,
    pub pump_center: f64,
    pub pump: PulseShape,
    pub stokes: PulseShape,
    pub straddle: Option<PulseShape>,
    /// False when the pulses coincide (`delay = 0`).
    pub counterintuitive: bool,
}

/// Role of a bond in a passage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BondRole {
    Pump,
    Stokes,
    Straddle,
    Off,
}

impl PassagePlan {
    pub fn pulse(&self, role: BondRole) -> Result<PulseShape> {
        match role {
            BondRole::Pump => Ok(self.pump),
            BondRole::Stokes => Ok(self.stokes),
            BondRole::Straddle => self.straddle.ok_or_else(|| invalid("straddle bond requested without M")),
            BondRole::Off => Ok(PulseShape::Zero),
        }
    }

    pub(crate) fn warnings(&self) -> Vec<String> {
        if self.counterintuitive {
            Vec::new()
        } else {
            vec!["delay is 0: pump and Stokes pulses coincide, the sequence is not counter-intuitive".into()]
        }
    }
}

/// One sampled row of a run trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    /// Down population of every site.
    pub down: Vec<f64>,
    pub norm: f64,
    /// `sqrt(K² + L²)` of the active pulse pair.
    pub f_t: f64,
    /// Mixing angle `atan2(K, L)`.
    pub gamma_t: f64,
}

/// Result of one experiment.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub experiment: &'static str,
    pub n_spins: usize,
    /// 0-based index of the spin read out.
    pub output_site: usize,
    /// Reduced density matrix of the output spin.
    pub output_state: Matrix2<C64>,
    pub target: QubitState,
    pub fidelity: f64,
    pub max_down_population: Vec<f64>,
    /// `max |K̇L − L̇K|/F³` over the window (largest over segments).
    pub adiabaticity_margin: f64,
    /// `Gσ` of the weakest Gaussian.
    pub pulse_area: Option<f64>,
    pub norm_drift: f64,
    pub wall_time: Duration,
    pub counterintuitive: bool,
    pub warnings: Vec<String>,
    pub trace: Vec<TraceRow>,
    /// Experiment-specific diagnostics.
    pub extras: Vec<(String, f64)>,
}

impl RunReport {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }

    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extras.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// Deterministic named scalars: everything except the wall time.
    pub fn scalars(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("fidelity".to_string(), self.fidelity),
            ("infidelity".to_string(), self.infidelity()),
            ("norm_drift".to_string(), self.norm_drift),
            ("adiabaticity_margin".to_string(), self.adiabaticity_margin),
            ("pulse_area".to_string(), self.pulse_area.unwrap_or(f64::NAN)),
            ("counterintuitive".to_string(), if self.counterintuitive { 1.0 } else { 0.0 }),
            ("output_rho_00".to_string(), self.output_state[(0, 0)].re),
            ("output_rho_11".to_string(), self.output_state[(1, 1)].re),
            ("output_rho_01_re".to_string(), self.output_state[(0, 1)].re),
            ("output_rho_01_im".to_string(), self.output_state[(0, 1)].im),
        ];
        for (i, p) in self.max_down_population.iter().enumerate() {
            out.push((format!("max_down_site_{}", i + 1), *p));
        }
        out.extend(self.extras.iter().cloned());
        out
    }
}

/// The pulses whose ratio defines the mixing angle in traces.
#[derive(Clone, Debug, Default)]
pub(crate) struct Drive {
    pub pump: Vec<PulseShape>,
    pub stokes: Vec<PulseShape>,
}

impl Drive {
    pub fn single(plan: &PassagePlan) -> Self {
        Drive { pump: vec![plan.pump], stokes: vec![plan.stokes] }
    }

    fn couplings(&self, t: f64) -> (f64, f64) {
        (self.pump.iter().map(|p| p.eval(t)).sum(), self.stokes.iter().map(|p| p.eval(t)).sum())
    }

    /// `(margin, pulse area)`: the largest margin over the pulse pairs.
    pub fn adiabaticity(&self, t_start: f64, t_end: f64) -> Result<(f64, Option<f64>)> {
        let mut margin = 0.0f64;
        let mut area: Option<f64> = None;
        for (k, l) in self.pump.iter().zip(&self.stokes) {
            let r = adiabaticity_for_pulses(k, l, t_start, t_end, MARGIN_SAMPLES)?;
            margin = margin.max(r.max_margin);
            area = match (area, r.pulse_area) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        Ok((margin, area))
    }
}

/// Integrates `psi0` with trace sampling. `observe` maps each sampled state
/// to the per-site down populations and the norm of the physical state.
pub(crate) fn run_traced(
    generator: Arc<dyn Generator>,
    t_start: f64,
    t_end: f64,
    params: &TransferParams,
    psi0: &QuantumState,
    drive: &Drive,
    observe: impl Fn(&QuantumState) -> (Vec<f64>, f64),
) -> Result<(Trajectory, Vec<TraceRow>)> {
    let schedule = Schedule::new(generator, t_start, t_end)?
        .with_stride(params.effective_stride())?
        .with_options(params.integrator_options())?;
    let traj = propagate(&schedule, psi0)?;
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let (k, l) = drive.couplings(t);
            let (down, norm) = observe(s);
            TraceRow { t, down, norm, f_t: k.hypot(l), gamma_t: mixing_angle(k, l) }
        })
        .collect();
    Ok((traj, rows))
}

pub(crate) fn full_space_observation(s: &QuantumState) -> (Vec<f64>, f64) {
    (s.down_populations(), s.norm())
}

/// Everything needed to assemble a [`RunReport`] once the dynamics are done.
pub(crate) struct ReportParts {
    pub experiment: &'static str,
    pub n_spins: usize,
    pub output_site: usize,
    pub output_state: Matrix2<C64>,
    pub target: QubitState,
    pub norm_drift: f64,
    pub rows: Vec<TraceRow>,
    pub drive: Drive,
    pub window: (f64, f64),
    pub counterintuitive: bool,
    pub warnings: Vec<String>,
    pub extras: Vec<(String, f64)>,
    pub started: Instant,
}

impl ReportParts {
    pub fn finish(self) -> Result<RunReport> {
        let (adiabaticity_margin, pulse_area) = self.drive.adiabaticity(self.window.0, self.window.1)?;
        Ok(RunReport {
            experiment: self.experiment,
            n_spins: self.n_spins,
            output_site: self.output_site,
            fidelity: qubit_fidelity(&self.target, &self.output_state),
            output_state: self.output_state,
            target: self.target,
            max_down_population: max_populations(&self.rows),
            adiabaticity_margin,
            pulse_area,
            norm_drift: self.norm_drift,
            wall_time: self.started.elapsed(),
            counterintuitive: self.counterintuitive,
            warnings: self.warnings,
            trace: self.rows,
            extras: self.extras,
        })
    }
}

pub(crate) fn max_populations(rows: &[TraceRow]) -> Vec<f64> {
    let n = rows.first().map_or(0, |r| r.down.len());
    (0..n).map(|i| rows.iter().map(|r| r.down[i]).fold(0.0, f64::max)).collect()
}

/// Sign picked up by the transferred down amplitude on an odd chain of
/// `n_spins` spins.
pub fn transfer_sign(n_spins: usize) -> f64 {
    if ((n_spins - 1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn signed_target(psi: &QubitState, sign: f64) -> QubitState {
    QubitState { alpha: psi.alpha, beta: psi.beta * sign }
}

/// `θ = ∫ F dt` by composite Simpson quadrature.
pub fn counter_rotation_phase(pump: &PulseShape, stokes: &PulseShape, t_start: f64, t_end: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (t_end - t_start) / n as f64;
    let f = |t: f64| pump.eval(t).hypot(stokes.eval(t));
    let mut sum = f(t_start) + f(t_end);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(t_start + i as f64 * h);
    }
    sum * h / 3.0
}
