use driven_hydrogen::quantizer::{
    export_contours, level_dynamics_scan, quantize_manifold, LevelSelection, QuantizeOptions, ScanAxis,
};
use driven_hydrogen::secular::FieldConfig;

#[test]
fn level_count_across_static_field_scan() {
    let t = FieldConfig::new(30, 0.015, 0.0).unwrap();
    let grid: Vec<f64> = (0..=7).map(|k| 0.0005 * k as f64).collect();
    let scan = level_dynamics_scan(&t, ScanAxis::Fs0, &grid, &QuantizeOptions::default()).unwrap();
    let mut last_width = 0.0;
    for (v, levels) in grid.iter().zip(&scan.levels) {
        assert_eq!(levels.len(), 30, "fs0 = {v}");
        // the manifold widens with the static field
        let width = levels[0].energy - levels[29].energy;
        assert!(width > last_width);
        last_width = width;
    }
}

#[test]
fn level_count_across_microwave_scan() {
    let t = FieldConfig::new(30, 0.0, 0.003).unwrap();
    let grid: Vec<f64> = (0..=5).map(|k| 0.003 * k as f64).collect();
    let scan = level_dynamics_scan(&t, ScanAxis::F0, &grid, &QuantizeOptions::default()).unwrap();
    for (v, levels) in grid.iter().zip(&scan.levels) {
        assert_eq!(levels.len(), 30, "f0 = {v}");
    }
}

#[test]
fn top_spacings_above_bifurcation() {
    let c = FieldConfig::new(60, 0.015, 0.0035).unwrap();
    let opts = QuantizeOptions { max_levels: Some(6), ..Default::default() };
    let levels = quantize_manifold(&c, &opts).unwrap();
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[0].energy - w[1].energy).collect();
    // a soft maximum just above the bifurcation: the gaps grow towards the
    // Stark spacing 3 n0 Fs from below
    let stark = 3.0 * 60.0 * c.static_field();
    assert!(gaps.windows(2).all(|w| w[1] > w[0]), "{gaps:?}");
    assert!(gaps.iter().all(|&g| g < stark && g > 0.5 * stark), "{gaps:?}");
}

#[test]
fn weak_field_contours_include_separatrix() {
    for (f0, separatrices) in [(1e-4, true), (5e-6, false)] {
        let c = FieldConfig::new(60, f0, 1e-6).unwrap();
        let set = export_contours(&c, &LevelSelection::Top(10), &QuantizeOptions::default()).unwrap();
        assert_eq!(set.levels.len(), 10);
        assert_eq!(!set.separatrices.is_empty(), separatrices, "f0 = {f0}");
        for trace in set.levels.iter().chain(&set.separatrices) {
            for comp in &trace.components {
                assert!(comp.iter().all(|&(l, p)| l.abs() <= 1.0 && (0.0..2.0 * std::f64::consts::PI).contains(&p)));
            }
        }
    }
}
