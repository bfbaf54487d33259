use std::time::Instant;

use nalgebra::DVector;

use super::{
    counter_rotation_phase, full_space_observation, run_traced, signed_target, transfer_sign, BondRole, Direction,
    Drive, ReportParts, RunReport, TraceRow, TransferParams,
};
use crate::analysis::{corrected_mixed_fidelity, partial_trace_mixed_to_last};
use crate::chain::{BondSpec, ChainSpec};
use crate::darkstate::overlap;
use crate::error::{invalid, Result};
use crate::hamiltonian::ChainGenerator;
use crate::propagator::{evolve, MixedState, Schedule};
use crate::state::{basis_index, QuantumState, QubitState, Representation};
use crate::C64;

/// Simpson intervals for `θ = ∫F dt`.
const THETA_INTERVALS: usize = 20_000;

/// Three-spin transfer with a partially polarised middle spin.
#[derive(Clone, Debug)]
pub struct PolarizationReport {
    /// Transfer report of the mixture; its fidelity is the Z-corrected one.
    pub report: RunReport,
    pub p: f64,
    pub numeric_fidelity: f64,
    /// `1 − 2p|α|²|β|²`.
    pub formula_fidelity: f64,
    /// `sqrt(1 − 4p|α|²|β|²)`, the value implied by the adiabatic-limit
    /// branch states.
    pub adiabatic_limit_fidelity: f64,
    /// `θ = ∫ F dt` over the window.
    pub theta: f64,
    /// Final `|↑↓↑⟩` branch in the basis `(|↓↑↑⟩, |↑↓↑⟩, |↑↑↓⟩)` and final
    /// `|↓↓↑⟩` branch in the basis `(|↑↓↓⟩, |↓↑↓⟩, |↓↓↑⟩)`.
    pub branch_states: [DVector<C64>; 2],
    /// `[−i sin θ, cos θ, 0]` and `[cos θ, −i sin θ, 0]`.
    pub branch_targets: [DVector<C64>; 2],
    pub branch_overlaps: [f64; 2],
}

fn branch_bases() -> [[usize; 3]; 2] {
    [
        [basis_index(&[0], 3), basis_index(&[1], 3), basis_index(&[2], 3)],
        [basis_index(&[1, 2], 3), basis_index(&[0, 2], 3), basis_index(&[0, 1], 3)],
    ]
}

fn weighted_rows(up: Vec<TraceRow>, down: &[TraceRow], p: f64) -> Vec<TraceRow> {
    up.into_iter()
        .zip(down)
        .map(|(mut a, b)| {
            for (x, y) in a.down.iter_mut().zip(&b.down) {
                *x = (1.0 - p) * *x + p * y;
            }
            a.norm = ((1.0 - p) * a.norm * a.norm + p * b.norm * b.norm).sqrt();
            a
        })
        .collect()
}

/// Runs `|ψ⟩⟨ψ| ⊗ diag(1 − p, p) ⊗ |↑⟩⟨↑|` through the three-spin passage.
pub fn run_imperfect_polarization(psi: &QubitState, p: f64, params: &TransferParams) -> Result<PolarizationReport> {
    let started = Instant::now();
    if !(0.0..=0.5).contains(&p) {
        return Err(invalid(format!("polarization error p must lie in [0, 1/2], got {p}")));
    }
    if params.direction != Direction::Forward {
        return Err(invalid("the polarization experiment runs forward only"));
    }
    let plan = params.plan()?;
    let chain = ChainSpec::new(vec![BondSpec::z(plan.pulse(BondRole::Pump)?), BondSpec::z(plan.pulse(BondRole::Stokes)?)])?;
    let generator = ChainGenerator::full(&chain)?.into_shared();
    let drive = Drive::single(&plan);

    let up_branch = QuantumState::product(&[*psi, QubitState::up(), QubitState::up()])?;
    let down_branch = QuantumState::product(&[*psi, QubitState::down(), QubitState::up()])?;
    let (traj_up, rows_up) =
        run_traced(generator.clone(), plan.t_start, plan.t_end, params, &up_branch, &drive, full_space_observation)?;
    let (traj_down, rows_down) =
        run_traced(generator.clone(), plan.t_start, plan.t_end, params, &down_branch, &drive, full_space_observation)?;
    let mixture =
        MixedState::new(vec![(1.0 - p, traj_up.final_state().clone()), (p, traj_down.final_state().clone())])?;
    // the integrator does not renormalise; its drift is reported separately
    let rho_c = partial_trace_mixed_to_last(&mixture)?;
    let rho_c = rho_c / rho_c.trace();
    let numeric_fidelity = corrected_mixed_fidelity(psi, &rho_c)?;

    let schedule =
        Schedule::new(generator, plan.t_start, plan.t_end)?.with_options(params.integrator_options())?;
    let theta = counter_rotation_phase(&plan.pump, &plan.stokes, plan.t_start, plan.t_end, THETA_INTERVALS);
    let (s, c) = theta.sin_cos();
    let branch_targets = [
        DVector::from_vec(vec![C64::new(0.0, -s), C64::from(c), C64::from(0.0)]),
        DVector::from_vec(vec![C64::from(c), C64::new(0.0, -s), C64::from(0.0)]),
    ];
    let repr = Representation::FullSpace { n_spins: 3 };
    let mut branch_states: [DVector<C64>; 2] = [DVector::zeros(3), DVector::zeros(3)];
    let mut branch_overlaps = [0.0; 2];
    // |↑↓↑⟩ is the middle element of its basis, |↓↓↑⟩ the last of its own
    for (k, (basis, start)) in branch_bases().iter().zip([1, 2]).enumerate() {
        let (fin, _) = evolve(&schedule, &QuantumState::basis(repr, basis[start])?)?;
        branch_states[k] = DVector::from_iterator(3, basis.iter().map(|&i| fin.amplitudes()[i]));
        branch_overlaps[k] = overlap(&branch_targets[k], &branch_states[k]);
    }

    let ab = psi.alpha.norm_sqr() * psi.beta.norm_sqr();
    let formula_fidelity = 1.0 - 2.0 * p * ab;
    let adiabatic_limit_fidelity = (1.0 - 4.0 * p * ab).max(0.0).sqrt();
    let extras = vec![
        ("p".to_string(), p),
        ("numeric_fidelity".to_string(), numeric_fidelity),
        ("formula_fidelity".to_string(), formula_fidelity),
        ("formula_deviation".to_string(), (numeric_fidelity - formula_fidelity).abs()),
        ("adiabatic_limit_fidelity".to_string(), adiabatic_limit_fidelity),
        ("adiabatic_limit_deviation".to_string(), (numeric_fidelity - adiabatic_limit_fidelity).abs()),
        ("theta".to_string(), theta),
        ("branch_up_down_overlap".to_string(), branch_overlaps[0]),
        ("branch_down_down_overlap".to_string(), branch_overlaps[1]),
    ];
    let report = ReportParts {
        experiment: "polarization",
        n_spins: 3,
        output_site: 2,
        output_state: rho_c,
        target: signed_target(psi, transfer_sign(3)),
        norm_drift: traj_up.norm_drift.max(traj_down.norm_drift),
        rows: weighted_rows(rows_up, &rows_down, p),
        drive,
        window: (plan.t_start, plan.t_end),
        counterintuitive: plan.counterintuitive,
        warnings: plan.warnings(),
        extras,
        started,
    }
    .finish()?;
    Ok(PolarizationReport {
        report,
        p,
        numeric_fidelity,
        formula_fidelity,
        adiabatic_limit_fidelity,
        theta,
        branch_states,
        branch_targets,
        branch_overlaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_p() {
        let psi = QubitState::up_x();
        let params = TransferParams::new(30.0, 1.0);
        assert!(run_imperfect_polarization(&psi, -0.1, &params).is_err());
        assert!(run_imperfect_polarization(&psi, 0.6, &params).is_err());
    }

    #[test]
    fn up_input_only_sees_branch_leakage() {
        let r = run_imperfect_polarization(&QubitState::up(), 0.3, &TransferParams::new(30.0, 1.0)).unwrap();
        // the p branch |↑↓↑⟩ flips the output spin only through leakage onto |↑↑↓⟩
        let leak = r.branch_states[0][2].norm_sqr();
        assert!(leak < 1e-2);
        assert!((r.numeric_fidelity - (1.0 - 0.3 * leak).sqrt()).abs() < 1e-8);
        assert_eq!(r.formula_fidelity, 1.0);
        assert!((r.report.fidelity - r.numeric_fidelity).abs() < 1e-12);
    }
}
