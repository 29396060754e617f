use driven_hydrogen::floquet::*;
use driven_hydrogen::secular::FieldConfig;

fn spectrum(n0: u32, f0: f64, fs0: f64, target: f64, count: usize) -> FloquetSpectrum {
    let c = FieldConfig::new(n0, f0, fs0).unwrap();
    let b = build_basis(n0, 8, 3, DEFAULT_MAX_DIMENSION).unwrap();
    let op = assemble_floquet(&c, &b).unwrap();
    let center = -0.5 / (n0 as f64).powi(2);
    diagonalize_window(&op, target, count, center, &EigenOptions::default()).unwrap()
}

#[test]
fn field_free_levels_are_shell_energies_plus_photons() {
    let n0 = 12;
    let s = spectrum(n0, 0.0, 0.0, -0.5 / 144.0, 40);
    let omega = 1.0 / 1728.0;
    for &e in &s.eigenvalues {
        let best = (4..=20)
            .flat_map(|n: i32| (-3..=3).map(move |k| -0.5 / (n * n) as f64 + k as f64 * omega))
            .map(|x| (x - e).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-10, "{e} off by {best}");
    }
}

#[test]
fn static_field_extreme_stark_shift() {
    let n0 = 12;
    for fs0 in [0.001, 0.003] {
        let c = FieldConfig::new(n0, 0.0, fs0).unwrap();
        let shift = 1.5 * 12.0 * 11.0 * c.static_field();
        let e0 = -0.5 / 144.0;
        let s = spectrum(n0, 0.0, fs0, e0 + shift, 6);
        let got = s.eigenvalues.iter().map(|e| e - e0).min_by(|a, b| (a - shift).abs().total_cmp(&(b - shift).abs())).unwrap();
        assert!((got - shift).abs() < 0.02 * shift, "{fs0}: {got} vs {shift}");
    }
}

#[test]
fn wavepacket_is_identified_near_semiclassics() {
    let n0 = 12;
    let c = FieldConfig::new(n0, 0.015, 0.003).unwrap();
    let pred = WavepacketPrediction::semiclassical(&c).unwrap();
    let s = spectrum(n0, 0.015, 0.003, pred.zone_energy(n0), 20);
    let id = identify_wavepacket(&s, &pred).unwrap();
    assert!(!id.ambiguous);
    assert!(id.best.weight > 0.8);
    let delta = semiclassical_delta(s.eigenvalues[id.best.index], pred.energy, n0);
    assert!(delta < 0.25 * pred.spacing / (2.0 / (n0 as f64).powi(4)));
}

#[test]
fn photon_replicas_repeat_the_zone() {
    // the replica one photon up appears ω higher with the photon index shifted
    let n0 = 12;
    let c = FieldConfig::new(n0, 0.015, 0.003).unwrap();
    let pred = WavepacketPrediction::semiclassical(&c).unwrap();
    let omega = c.omega();
    let a = spectrum(n0, 0.015, 0.003, pred.zone_energy(n0), 20);
    let ia = identify_wavepacket(&a, &pred).unwrap().best.index;
    let b = spectrum(n0, 0.015, 0.003, a.eigenvalues[ia] + omega, 20);
    let shifted = b
        .eigenvalues
        .iter()
        .map(|e| (e - a.eigenvalues[ia] - omega).abs())
        .fold(f64::INFINITY, f64::min);
    assert!(shifted < 1e-3 * pred.spacing, "{shifted} vs spacing {}", pred.spacing);
    assert!((a.quasienergies[ia] - a.fold(a.eigenvalues[ia] + omega)).abs() < 1e-15);
}

#[test]
fn wavepacket_density_sits_on_the_kepler_scale() {
    let n0 = 12;
    let c = FieldConfig::new(n0, 0.015, 0.003).unwrap();
    let pred = WavepacketPrediction::semiclassical(&c).unwrap();
    let s = spectrum(n0, 0.015, 0.003, pred.zone_energy(n0), 20);
    let id = identify_wavepacket(&s, &pred).unwrap();
    let g = density_snapshot(&s, id.best.index, 0.0, &GridSpec::for_manifold(n0, 121, 241)).unwrap();
    assert!((g.total_weight() - 1.0).abs() < 0.05, "{}", g.total_weight());
    let r = g.radial_peak();
    assert!(r > 0.3 * 144.0 && r < 2.2 * 144.0, "{r}");
}

#[test]
fn dipole_lines_are_deterministic_and_finite() {
    let n0 = 12;
    let c = FieldConfig::new(n0, 0.015, 0.003).unwrap();
    let pred = WavepacketPrediction::semiclassical(&c).unwrap();
    let s = spectrum(n0, 0.015, 0.003, pred.zone_energy(n0), 12);
    let a = dipole_spectrum(&s, 4, 0).unwrap();
    let b = dipole_spectrum(&s, 4, 0).unwrap();
    assert_eq!(a.len(), 12);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.strength.to_bits(), y.strength.to_bits());
        assert!(x.strength.is_finite() && x.strength >= 0.0);
    }
    assert!(dipole_spectrum(&s, 4, 4).is_err());
}
