use lnadist::pulses::{aggregate_pulse, ambiguity_direct, ambiguity_functions, rrc_pulse, PulseSpec, NUS};

#[test]
fn rrc_is_unit_energy_and_root_nyquist() {
    for beta in [0.0, 0.22, 0.5, 1.0] {
        let p = rrc_pulse(&PulseSpec::rrc(beta)).unwrap();
        assert!((p.energy() - 1.0).abs() < 1e-12);
        for k in -4..=4 {
            // truncation leaves a small residual, largest at β = 0
            let tol = if beta == 0.0 { 2e-2 } else { 2e-3 };
            assert!(p.nyquist_residual(k).abs() < tol, "β={beta} k={k}: {}", p.nyquist_residual(k));
        }
    }
}

#[test]
fn aggregate_pulse_is_periodic_power() {
    // Σ_n p(t-n)² averages to one over a symbol period
    let p = rrc_pulse(&PulseSpec::default()).unwrap();
    let g = aggregate_pulse(&p).zero_lag();
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    assert!((mean - 1.0).abs() < 1e-9);
}

#[test]
fn cycle_route_matches_direct_sum() {
    let spec = PulseSpec { span: 16, ..PulseSpec::default() };
    let amb = ambiguity_functions(&spec, 3).unwrap();
    let p = rrc_pulse(&spec).unwrap();
    let g = aggregate_pulse(&p);
    for nu in NUS {
        for lag in -3..=3 {
            let d = ambiguity_direct(&p, &g, nu, lag);
            let e = amb.gamma(nu, lag);
            assert!((d - e).norm() < 1e-10 * amb.gamma(0, 0).norm(), "ν={nu} ℓ={lag}: {d} vs {e}");
        }
    }
}

#[test]
fn second_offset_vanishes_and_kernels_are_hermitian() {
    for beta in [0.0, 0.22, 0.6] {
        let amb = ambiguity_functions(&PulseSpec::rrc(beta), 6).unwrap();
        let g30 = amb.gamma(0, 0).norm();
        assert!(amb.table(2).max_abs() <= lnadist::cli::gamma32_bound(beta) * g30, "β={beta}");
        for nu in NUS {
            for l in 0..=6 {
                assert!((amb.gamma(nu, -l) - amb.gamma(nu, l).conj()).norm() < 1e-12 * g30);
            }
        }
        // mirror symmetry between the two adjacent offsets
        for l in -6..=6 {
            assert!((amb.gamma(1, l).norm() - amb.gamma(-1, l).norm()).abs() < 1e-12 * g30);
        }
    }
}

#[test]
fn lag_window_bounded_by_span() {
    let spec = PulseSpec { span: 16, ..PulseSpec::default() };
    assert!(ambiguity_functions(&spec, 17).is_err());
}
