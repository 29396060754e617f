use driven_hydrogen::propagator::*;
use driven_hydrogen::secular::FieldConfig;

#[test]
fn breakpoint_follows_the_bifurcation_bottleneck() {
    let grid: Vec<f64> = (0..=20).map(|i| 0.0015 + 1e-4 * i as f64).collect();
    let advice = recommend_breakpoint(60, 0.015, &grid, 2.0, ADIABATIC_THRESHOLD).unwrap();
    assert!(advice.fs0_min_gap > 0.0024 && advice.fs0_min_gap < 0.0029, "{advice:?}");
    assert!(advice.breakpoint < advice.fs0_min_gap);
    assert!(advice.breakpoint > 0.0012 && advice.breakpoint < 0.0048, "{advice:?}");
    assert!((advice.fast_rate / advice.slow_rate - 2.0).abs() < 1e-12);
}

#[test]
fn breakpoint_needs_a_recovering_gap() {
    // the grid stops at the bottleneck
    let grid = [0.0026, 0.0028, 0.003];
    assert!(matches!(
        recommend_breakpoint(60, 0.015, &grid, 2.0, ADIABATIC_THRESHOLD),
        Err(PropagatorError::NoBreakpoint(_))
    ));
    assert!(recommend_breakpoint(60, 0.015, &[0.003, 0.002, 0.001], 2.0, 0.01).is_err());
}

#[test]
fn desk_stark_state_points_along_the_field() {
    let p = prepare_initial_state(&FieldConfig::new(16, 0.0, 0.003).unwrap(), 10).unwrap();
    assert!(p.mean_z > 256.0, "{}", p.mean_z);
    let c = FieldConfig::new(16, 0.0, 0.003).unwrap();
    let shift = p.energy + 0.5 / 256.0;
    let first = 1.5 * 16.0 * 15.0 * c.static_field();
    assert!((shift - first).abs() < 0.02 * first);
}

#[test]
fn short_turn_on_is_reproducible_and_adiabatic() {
    let lab = LabHamiltonian::for_window(10, 6).unwrap();
    let p = prepare_initial_state(&FieldConfig::new(10, 0.0, 0.003).unwrap(), 6).unwrap();
    let sched = schedule_sin2_turn_on(0.015, 60.0, 0.003).unwrap();
    let opts = PropagationOptions { overlap_every: Some(20), floquet_k_max: 3, ..Default::default() };
    let a = propagate_with(&lab, &p.state, &sched, &opts).unwrap();
    let b = propagate_with(&lab, &p.state, &sched, &opts).unwrap();
    assert_eq!(a.final_state, b.final_state);
    assert_eq!(a.log.len(), 61);
    let overlaps: Vec<f64> = a.log.iter().filter_map(|e| e.overlap).collect();
    assert_eq!(overlaps.len(), 4);
    assert!((overlaps[0] - 1.0).abs() < 1e-9);
    assert!(a.final_overlap.as_ref().unwrap().overlap > 0.9);
    assert!(a.max_norm_drift < 1e-10);
}

#[test]
fn zero_duration_schedule_is_rejected() {
    assert!(matches!(schedule_sin2_turn_on(0.015, 0.0, 0.003), Err(PropagatorError::Schedule(_))));
    assert!(schedule_piecewise_linear(ScheduledField::Fs0, &[(0.0, 0.003), (0.0, 0.0)], 0.015).is_err());
}
