use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use nalgebra::Matrix2;
use rayon::prelude::*;

use super::{full_space_observation, run_traced, Direction, Drive, ReportParts, RunReport, TransferParams};
use crate::analysis::reduced_qubit;
use crate::chain::{Axis, BondSpec, ChainSpec};
use crate::error::{invalid, Result};
use crate::hamiltonian::ChainGenerator;
use crate::state::{QuantumState, QubitState};
use crate::C64;

/// `R_z(χ) = diag(1, e^{iχ})`.
pub fn rz(chi: f64) -> Matrix2<C64> {
    Matrix2::new(C64::from(1.0), C64::from(0.0), C64::from(0.0), C64::from_polar(1.0, chi))
}

/// Basis change `|↑⟩ ↔ |↑ₓ⟩`.
pub fn hadamard() -> Matrix2<C64> {
    let h = C64::from(FRAC_1_SQRT_2);
    Matrix2::new(h, h, h, -h)
}

/// `R_x(χ) = Had · R_z(χ) · Had`.
pub fn rx(chi: f64) -> Matrix2<C64> {
    hadamard() * rz(chi) * hadamard()
}

fn axis_rotation(axis: Axis, chi: f64) -> Matrix2<C64> {
    match axis {
        Axis::Z => rz(chi),
        Axis::X => rx(chi),
    }
}

/// Chronological product `R_z(γ) R_x(β) R_z(α)` of the three segments.
pub fn zxz_target(alpha: f64, beta: f64, gamma: f64) -> Matrix2<C64> {
    rz(gamma) * rx(beta) * rz(alpha)
}

fn ancilla(axis: Axis) -> QubitState {
    match axis {
        Axis::Z => QubitState::up(),
        Axis::X => QubitState::up_x(),
    }
}

fn forward_only(params: &TransferParams) -> Result<()> {
    if params.direction != Direction::Forward {
        return Err(invalid("rotation passages run forward only"));
    }
    if params.straddle.is_some() {
        return Err(invalid("rotation passages take no straddle coupling"));
    }
    Ok(())
}

/// Three-spin passage with bonds `H_{K,0}` and `H_{L,φ}` of the given axis.
/// The output spin should carry `R(φ + π)|ψ⟩`.
pub fn run_rotation_segment(axis: Axis, phi: f64, psi: &QubitState, params: &TransferParams) -> Result<RunReport> {
    let started = Instant::now();
    forward_only(params)?;
    if !phi.is_finite() {
        return Err(invalid("rotation angle must be finite"));
    }
    let plan = params.plan()?;
    let chain = ChainSpec::new(vec![BondSpec::new(plan.pump, 0.0, axis), BondSpec::new(plan.stokes, phi, axis)])?;
    let psi0 = QuantumState::product(&[*psi, ancilla(axis), ancilla(axis)])?;
    let drive = Drive::single(&plan);
    let (traj, rows) = run_traced(
        ChainGenerator::full(&chain)?.into_shared(),
        plan.t_start,
        plan.t_end,
        params,
        &psi0,
        &drive,
        full_space_observation,
    )?;
    ReportParts {
        experiment: "rotate_segment",
        n_spins: 3,
        output_site: 2,
        output_state: reduced_qubit(traj.final_state(), 2)?,
        target: psi.apply(&axis_rotation(axis, phi + PI)),
        norm_drift: traj.norm_drift,
        rows,
        drive,
        window: (plan.t_start, plan.t_end),
        counterintuitive: plan.counterintuitive,
        warnings: plan.warnings(),
        extras: vec![("phi".to_string(), phi)],
        started,
    }
    .finish()
}

/// The six Pauli eigenstates.
fn cardinal_states() -> Vec<QubitState> {
    let s = FRAC_1_SQRT_2;
    [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (s, s, 0.0), (s, -s, 0.0), (s, 0.0, s), (s, 0.0, -s)]
        .into_iter()
        .map(|(a, b_re, b_im)| QubitState { alpha: C64::from(a), beta: C64::new(b_re, b_im) })
        .collect()
}

/// Worst-case state fidelity of a segment over the six Pauli eigenstates.
/// It is insensitive to the global phase of the implemented gate.
pub fn segment_gate_fidelity(axis: Axis, phi: f64, params: &TransferParams) -> Result<f64> {
    let fids = cardinal_states()
        .par_iter()
        .map(|psi| run_rotation_segment(axis, phi, psi, params).map(|r| r.fidelity))
        .collect::<Result<Vec<_>>>()?;
    Ok(fids.into_iter().fold(1.0, f64::min))
}

/// Angles and per-segment pulse parameters of the seven-spin composite.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub segments: [TransferParams; 3],
}

impl RotationSpec {
    pub fn uniform(alpha: f64, beta: f64, gamma: f64, params: TransferParams) -> Self {
        RotationSpec { alpha, beta, gamma, segments: [params.clone(), params.clone(), params] }
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.alpha, self.beta, self.gamma].iter().all(|a| a.is_finite()) {
            return Err(invalid("rotation angles must be finite"));
        }
        for s in &self.segments {
            s.validate()?;
            forward_only(s)?;
        }
        Ok(())
    }
}

/// Seven-spin chain `Z(K₁,0) Z(L₁,α−π) X(K₂,0) X(L₂,β−π) Z(K₃,0) Z(L₃,γ−π)`
/// driven by `L₁ → K₁ → L₂ → K₂ → L₃ → K₃`. The last spin should carry
/// `R_z(γ) R_x(β) R_z(α)|ψ⟩`.
pub fn run_rotation_zxz(spec: &RotationSpec, psi: &QubitState) -> Result<RunReport> {
    let started = Instant::now();
    spec.validate()?;
    let segments = [(Axis::Z, spec.alpha), (Axis::X, spec.beta), (Axis::Z, spec.gamma)];
    let mut t = 0.0;
    let mut bonds = Vec::with_capacity(6);
    let mut drive = Drive::default();
    let mut warnings = Vec::new();
    let mut previous: Option<(f64, f64)> = None;
    for ((axis, angle), params) in segments.iter().zip(&spec.segments) {
        let plan = params.plan_at(t)?;
        if let Some((pump_center, sigma)) = previous {
            let gap = plan.stokes_center - pump_center;
            let need = 4.0 * sigma.max(params.sigma);
            if gap < need {
                return Err(invalid(format!("segments overlap: pulse gap {gap} is below {need}")));
            }
        }
        bonds.push(BondSpec::new(plan.pump, 0.0, *axis));
        bonds.push(BondSpec::new(plan.stokes, angle - PI, *axis));
        drive.pump.push(plan.pump);
        drive.stokes.push(plan.stokes);
        warnings.extend(plan.warnings());
        previous = Some((plan.pump_center, params.sigma));
        t = plan.t_end;
    }
    let chain = ChainSpec::new(bonds)?;
    let z = QubitState::up();
    let x = QubitState::up_x();
    let psi0 = QuantumState::product(&[*psi, z, z, x, x, z, z])?;
    let tolerance = spec.segments.iter().map(|s| s.tolerance).fold(f64::INFINITY, f64::min);
    let run_params = TransferParams { tolerance, ..spec.segments[0].clone() };
    let (traj, rows) =
        run_traced(ChainGenerator::full(&chain)?.into_shared(), 0.0, t, &run_params, &psi0, &drive, full_space_observation)?;
    ReportParts {
        experiment: "rotate_zxz",
        n_spins: 7,
        output_site: 6,
        output_state: reduced_qubit(traj.final_state(), 6)?,
        target: psi.apply(&zxz_target(spec.alpha, spec.beta, spec.gamma)),
        norm_drift: traj.norm_drift,
        rows,
        drive,
        window: (0.0, t),
        counterintuitive: spec.segments.iter().all(|s| s.delay > 0.0),
        warnings,
        extras: vec![
            ("alpha".to_string(), spec.alpha),
            ("beta".to_string(), spec.beta),
            ("gamma".to_string(), spec.gamma),
        ],
        started,
    }
    .finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::gate_overlap;

    #[test]
    fn rotation_conventions() {
        assert!((rz(2.0 * PI) - Matrix2::identity()).norm() < 1e-15);
        let x = Matrix2::new(C64::from(0.0), C64::from(1.0), C64::from(1.0), C64::from(0.0));
        assert!(gate_overlap(&rx(PI), &x) > 1.0 - 1e-15);
        assert!((hadamard() * hadamard() - Matrix2::identity()).norm() < 1e-15);
        // Z·X·Z = −X
        assert!(gate_overlap(&zxz_target(PI, PI, PI), &x) > 1.0 - 1e-15);
        assert!(gate_overlap(&zxz_target(0.0, 0.0, 0.0), &Matrix2::identity()) > 1.0 - 1e-15);
    }

    #[test]
    fn segments_reject_straddle_and_backward() {
        let p = TransferParams::new(30.0, 1.0);
        let psi = QubitState::up();
        assert!(run_rotation_segment(Axis::Z, 0.0, &psi, &TransferParams { straddle: Some(1.0), ..p.clone() }).is_err());
        assert!(run_rotation_segment(Axis::Z, 0.0, &psi, &TransferParams { direction: Direction::Backward, ..p }).is_err());
    }
}
