use darkpassage::analysis::{run_sweep, SweepAxis, SweepGrid};
use darkpassage::protocols::{ExperimentKind, ExperimentSpec, TransferParams};
use darkpassage::state::QubitState;

fn transfer() -> ExperimentSpec {
    ExperimentSpec::new(ExperimentKind::Transfer3, TransferParams::new(10.0, 1.0), QubitState::real(0.6, 0.8).unwrap())
}

#[test]
fn pulse_area_axis_gives_decreasing_infidelity() {
    let grid = SweepGrid::new(transfer(), vec![SweepAxis::new("G_sigma", vec![10.0, 30.0, 100.0])]).unwrap();
    let table = run_sweep(&grid, None).unwrap();
    assert_eq!(table.rows.len(), 3);
    let infid: Vec<f64> = table.rows.iter().map(|r| r.value("infidelity").unwrap()).collect();
    assert!(infid.windows(2).all(|w| w[1] <= w[0]), "{infid:?}");
}

#[test]
fn polarization_axis_tracks_the_mixture() {
    let base = ExperimentSpec::new(
        ExperimentKind::Polarization { p: 0.0 },
        TransferParams::new(100.0, 1.0),
        QubitState::with_down_probability(0.5).unwrap(),
    );
    let grid = SweepGrid::new(base, vec![SweepAxis::new("p", vec![0.0, 0.2])]).unwrap();
    let table = run_sweep(&grid, Some(2)).unwrap();
    let f: Vec<f64> = table.rows.iter().map(|r| r.value("fidelity").unwrap()).collect();
    assert!((f[0] - 1.0).abs() < 1e-4);
    // sqrt(1 − 4p|α|²|β|²) at p = 0.2, |α|² = |β|² = 1/2
    assert!((f[1] - 0.8f64.sqrt()).abs() < 1e-4, "{f:?}");
    assert!((f[1] - 0.9).abs() < 0.01);
}

#[test]
fn sweeps_are_bit_identical_across_runs_and_thread_counts() {
    let grid = SweepGrid::new(
        transfer(),
        vec![SweepAxis::new("G_sigma", vec![10.0, 20.0]), SweepAxis::new("delay", vec![0.8, 1.0, 1.2])],
    )
    .unwrap();
    let one = run_sweep(&grid, Some(1)).unwrap();
    let many = run_sweep(&grid, Some(4)).unwrap();
    let again = run_sweep(&grid, None).unwrap();
    assert_eq!(one, many);
    assert_eq!(one, again);
    assert_eq!(one.rows[1].value("delay"), Some(1.0));
}
