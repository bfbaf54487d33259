//! Fidelities, reduced qubit states, population traces and parameter sweeps.
//!
//! Fidelities are overlap magnitudes, not their squares: for a pure target
//! `|t⟩` and a qubit density matrix `ρ` the fidelity is `sqrt(⟨t|ρ|t⟩)`.

mod sweep;

use std::ops::Range;

use nalgebra::{DVector, Matrix2, Vector2};

pub use sweep::{run_sweep, RowFailure, SweepAxis, SweepGrid, SweepRow, SweepTable};

use crate::error::{Error, Result};
use crate::hamiltonian::pauli;
use crate::propagator::{MixedState, Trajectory};
use crate::state::{is_down, QuantumState, QubitState, Representation};
use crate::C64;

/// Tolerance used when validating density matrices handed in by callers.
pub const DENSITY_TOLERANCE: f64 = 1e-9;

/// `|⟨a|b⟩|`, clamped to `[0, 1]` against rounding.
pub fn pure_fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

/// `sqrt(⟨t|ρ|t⟩)` for a qubit target.
pub fn qubit_fidelity(target: &QubitState, rho: &Matrix2<C64>) -> f64 {
    let t = Vector2::new(target.alpha, target.beta);
    let v = (t.adjoint() * rho * t)[(0, 0)].re;
    v.max(0.0).sqrt().min(1.0)
}

/// `|tr(U†V)| / 2`: one for gates equal up to a global phase.
pub fn gate_overlap(u: &Matrix2<C64>, v: &Matrix2<C64>) -> f64 {
    ((u.adjoint() * v).trace().norm() / 2.0).min(1.0)
}

/// Checks Hermiticity, unit trace and positivity of a qubit density matrix.
pub fn validate_density_matrix(rho: &Matrix2<C64>, tol: f64) -> Result<()> {
    let herm = (rho - rho.adjoint()).norm();
    if herm > tol {
        return Err(Error::InvalidDensityMatrix(format!("not Hermitian (defect {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::InvalidDensityMatrix(format!("trace is {tr}, not 1")));
    }
    let (a, d, b) = (rho[(0, 0)].re, rho[(1, 1)].re, rho[(0, 1)]);
    let lambda_min = 0.5 * (a + d - ((a - d).powi(2) + 4.0 * b.norm_sqr()).sqrt());
    if lambda_min < -tol {
        return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {lambda_min:e}")));
    }
    Ok(())
}

/// `sqrt(⟨ψ|Z ρ Z|ψ⟩)`: fidelity after undoing the phase flip of a
/// three-spin transfer.
pub fn corrected_mixed_fidelity(psi: &QubitState, rho: &Matrix2<C64>) -> Result<f64> {
    validate_density_matrix(rho, DENSITY_TOLERANCE)?;
    let z = pauli::z();
    Ok(qubit_fidelity(psi, &(z * rho * z)))
}

/// Reduced density matrix of `site` for a full-space pure state.
pub fn reduced_qubit(state: &QuantumState, site: usize) -> Result<Matrix2<C64>> {
    let Representation::FullSpace { n_spins } = state.representation() else {
        return Err(Error::Representation { expected: "full-space" });
    };
    if site >= n_spins {
        return Err(crate::error::invalid(format!("site {site} out of range for {n_spins} spins")));
    }
    let a = state.amplitudes();
    let bit = 1 << (n_spins - 1 - site);
    let mut rho = Matrix2::<C64>::zeros();
    for i in (0..a.len()).filter(|&i| !is_down(i, site, n_spins)) {
        let (up, down) = (a[i], a[i | bit]);
        rho[(0, 0)] += up * up.conj();
        rho[(0, 1)] += up * down.conj();
        rho[(1, 1)] += down * down.conj();
    }
    rho[(1, 0)] = rho[(0, 1)].conj();
    Ok(rho)
}

/// Reduced density matrix of the last spin.
pub fn partial_trace_to_last(state: &QuantumState) -> Result<Matrix2<C64>> {
    reduced_qubit(state, state.n_spins() - 1)
}

/// Weighted reduced density matrix of `site` over the branches of a mixture.
pub fn reduced_qubit_mixed(rho: &MixedState, site: usize) -> Result<Matrix2<C64>> {
    let mut out = Matrix2::zeros();
    for (w, s) in rho.branches() {
        out += reduced_qubit(s, site)? * C64::from(*w);
    }
    Ok(out)
}

pub fn partial_trace_mixed_to_last(rho: &MixedState) -> Result<Matrix2<C64>> {
    reduced_qubit_mixed(rho, rho.representation().n_spins() - 1)
}

/// Reduced state of `site` for `c₀|↑…↑⟩ + Σⱼ cⱼ|j⟩`, where `|j⟩` has only
/// spin `j` down and `excitation` holds the `cⱼ`.
pub fn reduced_qubit_sector(vacuum: C64, excitation: &DVector<C64>, site: usize) -> Matrix2<C64> {
    let c = excitation[site];
    let down = c.norm_sqr();
    let total = vacuum.norm_sqr() + excitation.norm_squared();
    let coherence = vacuum * c.conj();
    Matrix2::new(C64::from(total - down), coherence, coherence.conj(), C64::from(down))
}

/// Probability outside the fully symmetric subspace of the spins in
/// `group`, e.g. the singlet population of a two-spin group.
pub fn non_symmetric_population(state: &QuantumState, group: Range<usize>) -> Result<f64> {
    let Representation::FullSpace { n_spins } = state.representation() else {
        return Err(Error::Representation { expected: "full-space" });
    };
    if group.is_empty() || group.end > n_spins {
        return Err(crate::error::invalid(format!("group {group:?} out of range for {n_spins} spins")));
    }
    let g = group.len();
    let mask = group.clone().fold(0usize, |m, s| m | (1 << (n_spins - 1 - s)));
    // Dicke-state amplitudes: sums over group configurations with k down spins
    let mut dicke = vec![C64::new(0.0, 0.0); (1 << n_spins) * (g + 1)];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let k = (i & mask).count_ones() as usize;
        dicke[(i & !mask) * (g + 1) + k] += a;
    }
    let binomial = |k: usize| (0..k).fold(1.0, |acc, j| acc * (g - j) as f64 / (j + 1) as f64);
    let symmetric: f64 = dicke.iter().enumerate().map(|(idx, s)| s.norm_sqr() / binomial(idx % (g + 1))).sum();
    Ok((state.amplitudes().norm_squared() - symmetric).max(0.0))
}

/// `(t, P↓(site, t))` over the samples of a trajectory.
pub fn down_population_trace(trajectory: &Trajectory, site: usize) -> Result<Vec<(f64, f64)>> {
    let n = trajectory.final_state().n_spins();
    if site >= n {
        return Err(crate::error::invalid(format!("site {site} out of range for {n} spins")));
    }
    Ok(trajectory.times.iter().zip(&trajectory.populations).map(|(&t, p)| (t, p[site].clamp(0.0, 1.0))).collect())
}

/// `p = 1/(1 + eˣ)` for the ratio `x = gμ_B H / kT`.
pub fn thermal_polarization(x: f64) -> f64 {
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}
