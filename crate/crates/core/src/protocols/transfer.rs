use std::time::Instant;

use nalgebra::DVector;

use super::{
    full_space_observation, run_traced, signed_target, transfer_sign, BondRole, Direction, Drive, PassagePlan,
    ReportParts, RunReport, TransferParams, STRADDLE_WARN_RATIO,
};
use crate::analysis::{non_symmetric_population, reduced_qubit, reduced_qubit_sector};
use crate::chain::{Axis, BondSpec, ChainSpec};
use crate::darkstate::{astirap_dark_state, overlap};
use crate::error::{invalid, Result};
use crate::hamiltonian::ChainGenerator;
use crate::propagator::{evolve, Schedule};
use crate::state::{QuantumState, QubitState, Representation};
use crate::C64;

/// Bond assignment for [`counterintuitive_schedule`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BondAssignment {
    pub role: BondRole,
    pub phase: f64,
    pub axis: Axis,
}

impl BondAssignment {
    pub fn z(role: BondRole) -> Self {
        BondAssignment { role, phase: 0.0, axis: Axis::Z }
    }
}

/// Chain with each bond driven by the pulse of its role in `plan`.
pub fn counterintuitive_chain(plan: &PassagePlan, bonds: &[BondAssignment]) -> Result<ChainSpec> {
    let specs = bonds
        .iter()
        .map(|b| Ok(BondSpec::new(plan.pulse(b.role)?, b.phase, b.axis)))
        .collect::<Result<Vec<_>>>()?;
    ChainSpec::new(specs)
}

/// Full-space schedule of a counter-intuitive passage over `bonds`.
pub fn counterintuitive_schedule(params: &TransferParams, bonds: &[BondAssignment]) -> Result<Schedule> {
    let plan = params.plan()?;
    let chain = counterintuitive_chain(&plan, bonds)?;
    Schedule::new(ChainGenerator::full(&chain)?.into_shared(), plan.t_start, plan.t_end)?
        .with_stride(params.effective_stride())?
        .with_options(params.integrator_options())
}

/// Forward roles reversed for a backward passage, plus input and output sites.
fn orient(mut roles: Vec<BondRole>, direction: Direction) -> (Vec<BondRole>, usize, usize) {
    let n_spins = roles.len() + 1;
    match direction {
        Direction::Forward => (roles, 0, n_spins - 1),
        Direction::Backward => {
            roles.reverse();
            (roles, n_spins - 1, 0)
        }
    }
}

fn z_chain(plan: &PassagePlan, roles: &[BondRole]) -> Result<ChainSpec> {
    let bonds: Vec<BondAssignment> = roles.iter().map(|&r| BondAssignment::z(r)).collect();
    counterintuitive_chain(plan, &bonds)
}

fn product_with_input(n_spins: usize, input_site: usize, psi: &QubitState) -> Result<QuantumState> {
    let mut spins = vec![QubitState::up(); n_spins];
    spins[input_site] = *psi;
    QuantumState::product(&spins)
}

/// Qubit on spin 1 (or spin 3 backward) carried across a three-spin chain in
/// the full space. The target is `(α, −β)`.
pub fn run_transfer_3spin(psi: &QubitState, params: &TransferParams) -> Result<RunReport> {
    let started = Instant::now();
    let plan = params.plan()?;
    let (roles, input, output) = orient(vec![BondRole::Pump, BondRole::Stokes], params.direction);
    let chain = z_chain(&plan, &roles)?;
    let psi0 = product_with_input(3, input, psi)?;
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
        experiment: "transfer3",
        n_spins: 3,
        output_site: output,
        output_state: reduced_qubit(traj.final_state(), output)?,
        target: signed_target(psi, transfer_sign(3)),
        norm_drift: traj.norm_drift,
        rows,
        drive,
        window: (plan.t_start, plan.t_end),
        counterintuitive: plan.counterintuitive,
        warnings: plan.warnings(),
        extras: Vec::new(),
        started,
    }
    .finish()
}

/// Integrates the one-down component of `α|↑…↑⟩ + β|input ↓⟩` in the
/// single-excitation sector; the all-up component is stationary.
struct SectorRun {
    rows: Vec<super::TraceRow>,
    excitation: DVector<C64>,
    norm_drift: f64,
}

fn run_sector(
    chain: &ChainSpec,
    plan: &PassagePlan,
    params: &TransferParams,
    psi: &QubitState,
    input: usize,
    drive: &Drive,
) -> Result<SectorRun> {
    let n = chain.n_spins();
    let e0 = QuantumState::basis(Representation::SingleExcitation { n_spins: n }, input)?;
    let (a2, b2) = (psi.alpha.norm_sqr(), psi.beta.norm_sqr());
    let (traj, rows) = run_traced(
        ChainGenerator::subspace(chain)?.into_shared(),
        plan.t_start,
        plan.t_end,
        params,
        &e0,
        drive,
        |s| {
            let pops = s.down_populations().into_iter().map(|p| b2 * p).collect();
            (pops, (a2 + b2 * s.norm().powi(2)).sqrt())
        },
    )?;
    Ok(SectorRun { rows, excitation: traj.final_state().amplitudes().clone(), norm_drift: traj.norm_drift })
}

fn max_over(rows: &[super::TraceRow], sites: impl Iterator<Item = usize> + Clone) -> f64 {
    rows.iter().flat_map(|r| sites.clone().map(move |s| r.down[s])).fold(0.0, f64::max)
}

/// Alternating chain of `2n + 1` spins: odd-numbered bonds carry the pump,
/// even-numbered bonds the Stokes pulse.
pub fn run_astirap(n: usize, psi: &QubitState, params: &TransferParams) -> Result<RunReport> {
    let started = Instant::now();
    if n == 0 {
        return Err(invalid("A-STIRAP needs n >= 1"));
    }
    let n_spins = 2 * n + 1;
    let plan = params.plan()?;
    let forward: Vec<BondRole> =
        (0..n_spins - 1).map(|i| if i % 2 == 0 { BondRole::Pump } else { BondRole::Stokes }).collect();
    let (roles, input, output) = orient(forward, params.direction);
    let chain = z_chain(&plan, &roles)?;
    let drive = Drive::single(&plan);
    let run = run_sector(&chain, &plan, params, psi, input, &drive)?;

    // state halfway between the pulse centers, where K = L
    let t_mid = 0.5 * (plan.stokes_center + plan.pump_center);
    let e0 = QuantumState::basis(Representation::SingleExcitation { n_spins }, input)?;
    let half = Schedule::new(ChainGenerator::subspace(&chain)?.into_shared(), plan.t_start, t_mid)?
        .with_options(params.integrator_options())?;
    let (mid, _) = evolve(&half, &e0)?;
    let mut profile = astirap_dark_state(n, plan.pump.eval(t_mid), plan.stokes.eval(t_mid))?;
    if params.direction == Direction::Backward {
        profile = DVector::from_iterator(n_spins, profile.iter().rev().copied());
    }
    let mid_overlap = overlap(&profile, mid.amplitudes()) / mid.norm();

    let extras = vec![
        ("mid_passage_overlap".to_string(), mid_overlap),
        ("even_site_max_population".to_string(), max_over(&run.rows, (1..n_spins).step_by(2))),
        ("odd_interior_max_population".to_string(), max_over(&run.rows, (2..n_spins - 1).step_by(2))),
    ];
    ReportParts {
        experiment: "astirap",
        n_spins,
        output_site: output,
        output_state: reduced_qubit_sector(psi.alpha, &(run.excitation.clone() * psi.beta), output),
        target: signed_target(psi, transfer_sign(n_spins)),
        norm_drift: run.norm_drift,
        rows: run.rows,
        drive,
        window: (plan.t_start, plan.t_end),
        counterintuitive: plan.counterintuitive,
        warnings: plan.warnings(),
        extras,
        started,
    }
    .finish()
}

/// Odd chain with pump on the first bond, Stokes on the last and the
/// straddling coupling `M` on every interior bond.
pub fn run_sstirap(n_spins: usize, psi: &QubitState, params: &TransferParams) -> Result<RunReport> {
    let started = Instant::now();
    if n_spins < 5 || n_spins % 2 == 0 {
        return Err(invalid(format!("S-STIRAP needs an odd chain of at least 5 spins, got {n_spins}")));
    }
    let Some(m) = params.straddle else {
        return Err(invalid("S-STIRAP needs a straddle coupling M"));
    };
    let plan = params.plan()?;
    let mut forward = vec![BondRole::Straddle; n_spins - 1];
    forward[0] = BondRole::Pump;
    forward[n_spins - 2] = BondRole::Stokes;
    let (roles, input, output) = orient(forward, params.direction);
    let chain = z_chain(&plan, &roles)?;
    let drive = Drive::single(&plan);
    let run = run_sector(&chain, &plan, params, psi, input, &drive)?;

    let mut warnings = plan.warnings();
    if m < STRADDLE_WARN_RATIO * params.g {
        warnings.push(format!("straddle M = {m} is below {STRADDLE_WARN_RATIO}·G; interior suppression is weak"));
    }
    let extras = vec![
        ("interior_odd_max_population".to_string(), max_over(&run.rows, (2..n_spins - 1).step_by(2))),
        ("even_site_max_population".to_string(), max_over(&run.rows, (1..n_spins).step_by(2))),
        ("straddle".to_string(), m),
    ];
    ReportParts {
        experiment: "sstirap",
        n_spins,
        output_site: output,
        output_state: reduced_qubit_sector(psi.alpha, &(run.excitation.clone() * psi.beta), output),
        target: signed_target(psi, transfer_sign(n_spins)),
        norm_drift: run.norm_drift,
        rows: run.rows,
        drive,
        window: (plan.t_start, plan.t_end),
        counterintuitive: plan.counterintuitive,
        warnings,
        extras,
        started,
    }
    .finish()
}

/// Transfer through a collective spin made of the `N − 2` middle spins.
///
/// The full `2^N` run couples each end spin to every group member with
/// strength `J/√g`; it is compared with the effective three-spin run.
pub fn run_collective_transfer(n_spins: usize, psi: &QubitState, params: &TransferParams) -> Result<RunReport> {
    let started = Instant::now();
    if n_spins < 4 {
        return Err(invalid(format!("a collective transfer needs at least 4 spins, got {n_spins}")));
    }
    let plan = params.plan()?;
    let mut forward = vec![BondRole::Off; n_spins - 1];
    forward[0] = BondRole::Pump;
    forward[n_spins - 2] = BondRole::Stokes;
    let (roles, input, output) = orient(forward, params.direction);
    let bonds = roles.iter().map(|&r| Ok(BondSpec::z(plan.pulse(r)?))).collect::<Result<Vec<_>>>()?;
    let group = 1..n_spins - 1;
    let chain = ChainSpec::with_collective_group(bonds, group.clone())?;
    let drive = Drive::single(&plan);
    let psi0 = product_with_input(n_spins, input, psi)?;
    let (traj, rows) = run_traced(
        ChainGenerator::full(&chain)?.into_shared(),
        plan.t_start,
        plan.t_end,
        params,
        &psi0,
        &drive,
        full_space_observation,
    )?;
    let non_symmetric = traj
        .states
        .iter()
        .map(|s| non_symmetric_population(s, group.clone()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let (eff_roles, eff_in, eff_out) = orient(vec![BondRole::Pump, BondRole::Stokes], params.direction);
    let effective = z_chain(&plan, &eff_roles)?;
    let eff_schedule = Schedule::new(ChainGenerator::full(&effective)?.into_shared(), plan.t_start, plan.t_end)?
        .with_options(params.integrator_options())?;
    let (eff_final, eff_drift) = evolve(&eff_schedule, &product_with_input(3, eff_in, psi)?)?;

    let target = signed_target(psi, transfer_sign(3));
    let rho_full = reduced_qubit(traj.final_state(), output)?;
    let rho_eff = reduced_qubit(&eff_final, eff_out)?;
    let f_full = crate::analysis::qubit_fidelity(&target, &rho_full);
    let f_eff = crate::analysis::qubit_fidelity(&target, &rho_eff);
    let extras = vec![
        ("full_fidelity".to_string(), f_full),
        ("effective_fidelity".to_string(), f_eff),
        ("fidelity_discrepancy".to_string(), (f_full - f_eff).abs()),
        ("max_non_symmetric_population".to_string(), non_symmetric),
        ("effective_norm_drift".to_string(), eff_drift),
    ];
    ReportParts {
        experiment: "collective",
        n_spins,
        output_site: output,
        output_state: rho_full,
        target,
        norm_drift: traj.norm_drift,
        rows,
        drive,
        window: (plan.t_start, plan.t_end),
        counterintuitive: plan.counterintuitive,
        warnings: plan.warnings(),
        extras,
        started,
    }
    .finish()
}
