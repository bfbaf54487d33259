use std::f64::consts::PI;

use darkpassage::analysis::{
    corrected_mixed_fidelity, partial_trace_mixed_to_last, partial_trace_to_last, pure_fidelity, thermal_polarization,
    validate_density_matrix,
};
use darkpassage::darkstate::{
    alternating_bonds, astirap_dark_state, chain_null_vector, dark_state_analytic, sstirap_dark_state,
    straddled_bonds, three_level_hamiltonian, tridiagonal,
};
use darkpassage::hamiltonian::pauli;
use darkpassage::propagator::MixedState;
use darkpassage::protocols::{rx, rz, zxz_target};
use darkpassage::state::{QuantumState, QubitState};
use darkpassage::C64;
use nalgebra::{DVector, Matrix2};
use proptest::prelude::*;

fn qubit() -> impl Strategy<Value = QubitState> {
    (0.0..1.0f64, 0.0..2.0 * PI).prop_map(|(b2, phase)| {
        QubitState::new(C64::from((1.0 - b2).sqrt()), C64::from_polar(b2.sqrt(), phase)).unwrap()
    })
}

fn state(n_spins: usize) -> impl Strategy<Value = QuantumState> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n_spins).prop_filter_map("zero vector", move |v| {
        let v = DVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| C64::new(a, b)));
        let n = v.norm();
        (n > 1e-3).then(|| QuantumState::full(n_spins, v / C64::from(n)).unwrap())
    })
}

proptest! {
    #[test]
    fn dark_state_is_annihilated(k in 0.01..50.0f64, l in 0.01..50.0f64, alpha in 0.0..2.0 * PI) {
        let a = dark_state_analytic(k, l, alpha).unwrap();
        prop_assert!((three_level_hamiltonian(k, l, alpha) * &a).norm() <= 1e-12 * k.hypot(l));
        prop_assert!((a.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chain_dark_states_lie_in_the_null_space(k in 0.01..5.0f64, l in 0.01..5.0f64, n in 1usize..5, m in 1.0..50.0f64) {
        let a = astirap_dark_state(n, k, l).unwrap();
        prop_assert!((tridiagonal(&alternating_bonds(n, k, l)) * a).norm() < 1e-12);
        let s = sstirap_dark_state(2 * n + 3, k, l, m).unwrap();
        prop_assert!((tridiagonal(&straddled_bonds(2 * n + 3, k, l, m)) * &s).norm() < 1e-12);
        prop_assert!(chain_null_vector(&[k, l]).is_ok());
    }

    #[test]
    fn partial_trace_is_a_density_matrix(s in state(3)) {
        let rho = partial_trace_to_last(&s).unwrap();
        prop_assert!(validate_density_matrix(&rho, 1e-10).is_ok());
    }

    #[test]
    fn mixed_partial_trace_is_the_weighted_sum(a in state(2), b in state(2), w in 0.0..1.0f64) {
        let mixed = MixedState::new(vec![(w, a.clone()), (1.0 - w, b.clone())]).unwrap();
        let rho = partial_trace_mixed_to_last(&mixed).unwrap();
        let direct = partial_trace_to_last(&a).unwrap() * C64::from(w) + partial_trace_to_last(&b).unwrap() * C64::from(1.0 - w);
        prop_assert!((rho - direct).norm() < 1e-12);
        prop_assert!(validate_density_matrix(&rho, 1e-10).is_ok());
    }

    #[test]
    fn corrected_fidelity_of_a_pure_state(psi in qubit(), phi in qubit()) {
        let z = pauli::z();
        let rho = phi.projector();
        let f = corrected_mixed_fidelity(&psi, &rho).unwrap();
        let target = psi.apply(&z);
        let a = QuantumState::product(&[target]).unwrap();
        let b = QuantumState::product(&[phi]).unwrap();
        prop_assert!((f - pure_fidelity(&a, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn thermal_polarization_is_symmetric_and_decreasing(x in -30.0..30.0f64, dx in 1e-3..5.0f64) {
        prop_assert!((thermal_polarization(x) + thermal_polarization(-x) - 1.0).abs() <= 1e-15);
        prop_assert!(thermal_polarization(x + dx) < thermal_polarization(x));
    }

    #[test]
    fn rotations_are_unitary_and_compose(a in -10.0..10.0f64, b in -10.0..10.0f64, c in -10.0..10.0f64) {
        let u = zxz_target(a, b, c);
        prop_assert!((u.adjoint() * u - Matrix2::identity()).norm() < 1e-13);
        prop_assert!((rz(a) * rz(b) - rz(a + b)).norm() < 1e-12);
        prop_assert!((rx(a) * rx(b) - rx(a + b)).norm() < 1e-12);
    }
}
