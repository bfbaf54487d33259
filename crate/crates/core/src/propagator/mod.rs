//! Time evolution under a [`Generator`].
//!
//! [`propagate`] returns a sampled [`Trajectory`], [`evolve`] only the final
//! state, and [`propagator_matrix`] the full unitary over a schedule. Samples
//! between integrator steps come from the stepper's dense output, so the
//! sample stride never influences the step sequence.

mod dop853;
mod tableau;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

pub use dop853::IntegratorOptions;

use crate::adiabatic::AdiabaticFrameGenerator;
use crate::chain::ChainSpec;
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::Generator;
use crate::state::{QuantumState, Representation};
use crate::C64;

/// Grid points used to check the coupling floor before an adiabatic-frame run.
const FLOOR_CHECK_SAMPLES: usize = 4001;

/// Integration window, sampling and generator for one run.
#[derive(Clone)]
pub struct Schedule {
    t_start: f64,
    t_end: f64,
    sample_stride: Option<f64>,
    generator: Arc<dyn Generator>,
    options: IntegratorOptions,
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Schedule")
            .field("t_start", &self.t_start)
            .field("t_end", &self.t_end)
            .field("sample_stride", &self.sample_stride)
            .field("representation", &self.generator.representation())
            .field("options", &self.options)
            .finish()
    }
}

impl Schedule {
    pub fn new(generator: Arc<dyn Generator>, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(invalid("schedule bounds must be finite"));
        }
        if t_end <= t_start {
            return Err(invalid(format!("schedule must have t_end > t_start, got [{t_start}, {t_end}]")));
        }
        Ok(Schedule { t_start, t_end, sample_stride: None, generator, options: IntegratorOptions::default() })
    }

    pub fn with_stride(mut self, stride: f64) -> Result<Self> {
        if !(stride.is_finite() && stride > 0.0) {
            return Err(invalid(format!("sample stride must be positive, got {stride}")));
        }
        self.sample_stride = Some(stride);
        Ok(self)
    }

    pub fn with_options(mut self, options: IntegratorOptions) -> Result<Self> {
        if !(options.tolerance.is_finite() && options.tolerance > 0.0) {
            return Err(invalid(format!("integrator tolerance must be positive, got {}", options.tolerance)));
        }
        if !(options.max_norm_drift > 0.0) {
            return Err(invalid("norm drift limit must be positive"));
        }
        if let Some(h) = options.max_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(invalid("maximum step must be positive"));
            }
        }
        self.options = options;
        Ok(self)
    }

    pub fn with_tolerance(self, tolerance: f64) -> Result<Self> {
        let options = IntegratorOptions { tolerance, ..self.options };
        self.with_options(options)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn sample_stride(&self) -> Option<f64> {
        self.sample_stride
    }

    pub fn options(&self) -> &IntegratorOptions {
        &self.options
    }

    pub fn generator(&self) -> &dyn Generator {
        self.generator.as_ref()
    }

    pub fn representation(&self) -> Representation {
        self.generator.representation()
    }

    /// Same generator and options on a different window.
    pub fn with_window(&self, t_start: f64, t_end: f64) -> Result<Self> {
        let mut s = Schedule::new(self.generator.clone(), t_start, t_end)?;
        s.sample_stride = self.sample_stride;
        s.options = self.options;
        Ok(s)
    }

    /// `t_start, t_start + stride, …` plus `t_end`, or just the endpoints.
    pub fn sample_times(&self) -> Vec<f64> {
        let mut times = vec![self.t_start];
        if let Some(stride) = self.sample_stride {
            let n = ((self.t_end - self.t_start) / stride).floor() as usize;
            for i in 1..=n {
                let t = self.t_start + i as f64 * stride;
                if self.t_end - t > 1e-9 * stride {
                    times.push(t);
                }
            }
        }
        times.push(self.t_end);
        times
    }
}

/// Sampled output of [`propagate`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    /// Per-sample down population of every site.
    pub populations: Vec<Vec<f64>>,
    /// `max_t |‖ψ(t)‖ − ‖ψ(t_start)‖|` over accepted steps.
    pub norm_drift: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("a trajectory always holds the end point")
    }

    /// Largest down population reached by `site` over the samples.
    pub fn max_population(&self, site: usize) -> f64 {
        self.populations.iter().map(|p| p[site]).fold(0.0, f64::max)
    }
}

fn check_state(schedule: &Schedule, psi: &QuantumState) -> Result<()> {
    let repr = schedule.representation();
    if psi.representation() != repr {
        return Err(Error::DimensionMismatch { expected: repr.dim(), found: psi.dim() });
    }
    Ok(())
}

/// Integrates `psi0` over the schedule, sampling on the stride grid.
pub fn propagate(schedule: &Schedule, psi0: &QuantumState) -> Result<Trajectory> {
    check_state(schedule, psi0)?;
    let repr = psi0.representation();
    let times = schedule.sample_times();
    let mut states = Vec::with_capacity(times.len());
    let y0: Vec<C64> = psi0.amplitudes().iter().copied().collect();
    let out = dop853::integrate(
        schedule.generator(),
        schedule.t_start,
        schedule.t_end,
        &y0,
        &times,
        &schedule.options,
        |_, y| states.push(QuantumState::from_raw(repr, DVector::from_column_slice(y))),
    )?;
    let populations = states.iter().map(|s| s.down_populations()).collect();
    Ok(Trajectory { times, states, populations, norm_drift: out.norm_drift, steps: out.steps })
}

/// Final state and norm drift, without intermediate samples.
pub fn evolve(schedule: &Schedule, psi0: &QuantumState) -> Result<(QuantumState, f64)> {
    check_state(schedule, psi0)?;
    let y0: Vec<C64> = psi0.amplitudes().iter().copied().collect();
    let out = dop853::integrate(schedule.generator(), schedule.t_start, schedule.t_end, &y0, &[], &schedule.options, |_, _| {})?;
    Ok((QuantumState::from_raw(psi0.representation(), DVector::from_vec(out.y)), out.norm_drift))
}

/// `U(t_end, t_start)`, one column per basis state, integrated in parallel.
pub fn propagator_matrix(schedule: &Schedule) -> Result<DMatrix<C64>> {
    let repr = schedule.representation();
    let n = repr.dim();
    let columns: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut y0 = vec![C64::new(0.0, 0.0); n];
            y0[j] = C64::new(1.0, 0.0);
            dop853::integrate(schedule.generator(), schedule.t_start, schedule.t_end, &y0, &[], &schedule.options, |_, _| {})
                .map(|o| o.y)
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |i, j| columns[j][i]))
}

/// Frobenius norm of `U†U − I`.
pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    (u.adjoint() * u - DMatrix::identity(u.nrows(), u.ncols())).norm()
}

/// A statistical mixture of pure states with weights summing to one.
#[derive(Clone, Debug)]
pub struct MixedState {
    branches: Vec<(f64, QuantumState)>,
}

impl MixedState {
    pub fn new(branches: Vec<(f64, QuantumState)>) -> Result<Self> {
        let Some((_, first)) = branches.first() else {
            return Err(invalid("a mixed state needs at least one branch"));
        };
        let repr = first.representation();
        if let Some((_, s)) = branches.iter().find(|(_, s)| s.representation() != repr) {
            return Err(Error::DimensionMismatch { expected: repr.dim(), found: s.dim() });
        }
        if let Some((w, _)) = branches.iter().find(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid(format!("branch weights must be non-negative, got {w}")));
        }
        let total: f64 = branches.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("branch weights must sum to 1, got {total}")));
        }
        Ok(MixedState { branches })
    }

    pub fn pure(state: QuantumState) -> Self {
        MixedState { branches: vec![(1.0, state)] }
    }

    pub fn branches(&self) -> &[(f64, QuantumState)] {
        &self.branches
    }

    pub fn representation(&self) -> Representation {
        self.branches[0].1.representation()
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        let n = self.representation().dim();
        let mut rho = DMatrix::zeros(n, n);
        for (w, s) in &self.branches {
            let a = s.amplitudes();
            rho += a * a.adjoint() * C64::from(*w);
        }
        rho
    }
}

/// Evolves every branch of a mixture; returns the final mixture and the
/// largest norm drift among branches.
pub fn propagate_mixed(schedule: &Schedule, rho0: &MixedState) -> Result<(MixedState, f64)> {
    let evolved: Vec<(f64, QuantumState, f64)> = rho0
        .branches
        .par_iter()
        .map(|(w, s)| evolve(schedule, s).map(|(e, d)| (*w, e, d)))
        .collect::<Result<_>>()?;
    let drift = evolved.iter().map(|x| x.2).fold(0.0, f64::max);
    Ok((MixedState { branches: evolved.into_iter().map(|(w, s, _)| (w, s)).collect() }, drift))
}

/// Integrates adiabatic-basis coefficients `(a₊, a₀, a₋)` of a three-spin
/// chain. The couplings must stay above the floor throughout the window.
pub fn propagate_adiabatic_frame(
    chain: &ChainSpec,
    t_start: f64,
    t_end: f64,
    coeffs0: &DVector<C64>,
    options: IntegratorOptions,
) -> Result<Trajectory> {
    let generator = AdiabaticFrameGenerator::new(chain)?;
    generator.check_floor(t_start, t_end, FLOOR_CHECK_SAMPLES)?;
    let schedule = Schedule::new(Arc::new(generator), t_start, t_end)?.with_options(options)?;
    let psi0 = QuantumState::new(Representation::SingleExcitation { n_spins: 3 }, coeffs0.clone())?;
    propagate(&schedule, &psi0)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    use super::*;
    use crate::hamiltonian::DenseGenerator;

    fn se(n: usize) -> Representation {
        Representation::SingleExcitation { n_spins: n }
    }

    fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
        let eig = h.clone().symmetric_eigen();
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * t)));
        &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let g = DenseGenerator::constant(se(3), DMatrix::zeros(3, 3)).unwrap();
        let s = Schedule::new(Arc::new(g), 0.0, 10.0).unwrap();
        let u = propagator_matrix(&s).unwrap();
        assert!((u - DMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn rabi_oscillation() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0].map(C64::from));
        let g = DenseGenerator::constant(se(2), h).unwrap();
        let s = Schedule::new(Arc::new(g), 0.0, 2.0).unwrap().with_stride(0.05).unwrap();
        let psi = QuantumState::basis(se(2), 0).unwrap();
        let tr = propagate(&s, &psi).unwrap();
        for (t, st) in tr.times.iter().zip(&tr.states) {
            let a = st.amplitudes();
            assert!((a[0] - C64::from(t.cos())).norm() < 1e-9, "t = {t}");
            assert!((a[1] - C64::new(0.0, -t.sin())).norm() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn constant_hamiltonian_matches_exponential() {
        let h = DMatrix::from_fn(4, 4, |i, j| {
            let re = ((i + 2 * j) as f64).sin() + ((j + 2 * i) as f64).sin();
            let im = if i == j { 0.0 } else { (i as f64 - j as f64) * 0.3 };
            C64::new(re, im)
        });
        let g = DenseGenerator::constant(se(4), h.clone()).unwrap();
        let s = Schedule::new(Arc::new(g), 0.0, 3.0).unwrap();
        let u = propagator_matrix(&s).unwrap();
        assert!((u - expm_hermitian(&h, 3.0)).norm() < 1e-8);
    }

    #[test]
    fn dense_output_does_not_change_the_end_point() {
        let h = move |t: f64| {
            DMatrix::from_row_slice(2, 2, &[C64::from(t.sin()), C64::new(1.0, 0.5), C64::new(1.0, -0.5), C64::from(-t.sin())])
        };
        let g = Arc::new(DenseGenerator::new(se(2), h));
        let psi = QuantumState::basis(se(2), 0).unwrap();
        let coarse = Schedule::new(g.clone(), 0.0, 5.0).unwrap();
        let fine = coarse.clone().with_stride(0.01).unwrap();
        let (a, _) = evolve(&coarse, &psi).unwrap();
        let b = propagate(&fine, &psi).unwrap();
        assert_eq!(a.amplitudes(), b.final_state().amplitudes());
        assert_eq!(b.times.len(), 501);
    }

    #[test]
    fn composition_law() {
        let h = move |t: f64| DMatrix::from_fn(3, 3, |i, j| if i.abs_diff(j) == 1 { C64::from((t + i.min(j) as f64).cos()) } else { C64::from(0.0) });
        let g: Arc<dyn Generator> = Arc::new(DenseGenerator::new(se(3), h));
        let full = Schedule::new(g.clone(), 0.0, 4.0).unwrap();
        let u = propagator_matrix(&full).unwrap();
        let u1 = propagator_matrix(&full.with_window(0.0, 1.7).unwrap()).unwrap();
        let u2 = propagator_matrix(&full.with_window(1.7, 4.0).unwrap()).unwrap();
        assert!((u - u2 * u1).norm() < 1e-8);
    }

    #[test]
    fn mixed_state_validation() {
        let a = QuantumState::basis(se(2), 0).unwrap();
        let b = QuantumState::basis(se(2), 1).unwrap();
        assert!(MixedState::new(vec![(0.5, a.clone()), (0.5, b.clone())]).is_ok());
        assert!(MixedState::new(vec![(0.5, a.clone()), (0.6, b.clone())]).is_err());
        assert!(MixedState::new(vec![(-0.1, a.clone()), (1.1, b)]).is_err());
        let c = QuantumState::basis(se(3), 0).unwrap();
        assert!(MixedState::new(vec![(0.5, a), (0.5, c)]).is_err());
        let rho = MixedState::pure(QuantumState::single_excitation(DVector::from_vec(vec![C64::from(1.0), C64::from(1.0)])).unwrap())
            .density_matrix();
        assert_relative_eq!(rho[(0, 1)].re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn schedule_validation() {
        let g: Arc<dyn Generator> = Arc::new(DenseGenerator::constant(se(2), DMatrix::zeros(2, 2)).unwrap());
        assert!(Schedule::new(g.clone(), 1.0, 1.0).is_err());
        assert!(Schedule::new(g.clone(), 0.0, f64::NAN).is_err());
        let s = Schedule::new(g.clone(), 0.0, 1.0).unwrap();
        assert!(s.clone().with_stride(0.0).is_err());
        assert!(s.clone().with_tolerance(-1.0).is_err());
        assert_eq!(s.with_stride(0.3).unwrap().sample_times(), vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        let wrong = QuantumState::basis(se(3), 0).unwrap();
        assert!(evolve(&Schedule::new(g, 0.0, 1.0).unwrap(), &wrong).is_err());
    }
}
