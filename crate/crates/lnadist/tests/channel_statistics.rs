use lnadist::channel::{
    array_gain, deviation_gain, draw_deviated_gains_at, draw_multipath_channel, expected_deviation_gain,
    ClusterParams, DeviationModel, MultipathScenario,
};
use lnadist::pulses::{rrc_pulse, PulseSpec};
use lnadist::C64;

#[test]
fn array_gain_matches_direct_sum() {
    for m in [1usize, 2, 7, 64] {
        for phi in [0.0, 1e-9, 0.01, 0.7, 3.0, -2.2, 9.0] {
            let s: C64 = (1..=m).map(|i| C64::from_polar(1.0, i as f64 * phi)).sum();
            let g = array_gain(phi, m);
            assert!((g - s.norm_sqr()).abs() < 1e-9 * (m * m) as f64, "M={m} φ={phi}");
        }
    }
}

#[test]
fn deviation_gain_mean_off_broadside() {
    let a3 = C64::new(-0.0428, 0.003);
    let m = 16;
    let draws = 100_000u64;
    for (eta, phi) in [(0.3, 0.0), (0.3, 0.9), (0.8, 0.25)] {
        let model = DeviationModel { eta, base_a3: a3, seed: 9 };
        let g: Vec<f64> = (0..draws).map(|d| deviation_gain(&draw_deviated_gains_at(&model, m, d).unwrap(), phi)).collect();
        let (mean, se) = lnadist::stats::mean_se(&g);
        let target = expected_deviation_gain(eta, phi, m).unwrap() * a3.norm_sqr();
        assert!((mean - target).abs() < 4.0 * se, "η={eta} φ={phi}: {mean} vs {target} ± {se}");
    }
}

#[test]
fn multipath_energy_per_antenna() {
    // Rayleigh clusters with E[h²] = 1/V: average symbol-rate energy ≈ Σ r_p(τ)²
    // over the delay profile, which is one when the delays are well inside T.
    let spec = PulseSpec::default();
    let pulse = rrc_pulse(&spec).unwrap();
    let params = ClusterParams { delay_spread_s: 0.0, ..ClusterParams::frequency_selective() };
    let m = 8;
    let mut acc = Vec::new();
    for seed in 0..400u64 {
        let s = MultipathScenario::draw(&params, 1, seed).unwrap();
        let ch = draw_multipath_channel(&s, m, spec.oversampling, 0).unwrap();
        let flat = ch.effective_flat(&pulse);
        acc.push(flat[0].iter().map(|h| h.norm_sqr()).sum::<f64>() / m as f64);
    }
    let (mean, se) = lnadist::stats::mean_se(&acc);
    assert!((mean - 1.0).abs() < 4.0 * se + 1e-3, "{mean} ± {se}");
}

#[test]
fn line_of_sight_has_unit_gain() {
    let s = MultipathScenario::draw(&ClusterParams::line_of_sight(), 3, 4).unwrap();
    assert!(s.path_gains.iter().flatten().all(|&g| g == 1.0));
    assert!(s.delays.iter().flatten().all(|&d| d == 0.0));
    let pulse = rrc_pulse(&PulseSpec::default()).unwrap();
    let ch = draw_multipath_channel(&s, 5, 16, 0).unwrap();
    for row in ch.effective_flat(&pulse) {
        for h in row {
            assert!((h.norm() - 1.0).abs() < 1e-9);
        }
    }
}
