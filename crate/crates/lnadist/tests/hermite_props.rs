use lnadist::amplifier::PolynomialModel;
use lnadist::hermite::{
    basis_change, eval_odd_hermite, gaussian_autocorrelation_transform, odd_norm, OddHermiteSeries,
};
use lnadist::C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b)), 1..=n)
}

#[test]
fn explicit_low_degrees() {
    // hand-expanded polynomials, independent of the generic routine
    for x in [c(0.3, -1.1), c(2.0, 0.5), c(-0.7, 0.0)] {
        let p = x.norm_sqr();
        let h3 = x * p - 2.0 * x;
        let h5 = x * p * p - 6.0 * x * p + 6.0 * x;
        let h7 = x * p.powi(3) - 12.0 * x * p * p + 36.0 * x * p - 24.0 * x;
        assert!((eval_odd_hermite(3, x).unwrap() - h3).norm() < 1e-12);
        assert!((eval_odd_hermite(5, x).unwrap() - h5).norm() < 1e-12);
        assert!((eval_odd_hermite(7, x).unwrap() - h7).norm() < 1e-11);
    }
    assert_eq!(odd_norm(1), 1.0);
    assert_eq!(odd_norm(3), 2.0);
    assert_eq!(odd_norm(5), 12.0);
    assert_eq!(odd_norm(7), 144.0);
}

#[test]
fn basis_tables_are_inverse() {
    let t = basis_change(9).unwrap();
    for i in 0..t.size {
        for j in 0..t.size {
            let s: f64 = (0..t.size).map(|k| t.monomial_to_hermite[i][k] * t.hermite_to_monomial[k][j]).sum();
            assert_eq!(s, if i == j { 1.0 } else { 0.0 });
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_round_trip(b in coeffs(5), sigma_sq in 0.05..5.0f64) {
        let model = PolynomialModel::new(b.clone()).unwrap();
        let back = model.hermite_at_power(sigma_sq).unwrap().to_polynomial();
        for (x, y) in back.coeffs().iter().zip(&b) {
            prop_assert!((x - y).norm() < 1e-9 * (1.0 + sigma_sq.powi(4)));
        }
    }

    #[test]
    fn hermite_series_matches_polynomial(b in coeffs(5), sigma_sq in 0.1..3.0f64, re in -2.0..2.0f64, im in -2.0..2.0f64) {
        // Σ a_ϖ σ^ϖ H_ϖ(x/σ) reproduces the polynomial pointwise
        let model = PolynomialModel::new(b).unwrap();
        let h = model.hermite_at_power(sigma_sq).unwrap();
        let x = c(re, im);
        let s = sigma_sq.sqrt();
        let y: C64 = h.coeffs().iter().enumerate()
            .map(|(i, a)| a * s.powi(2 * i as i32 + 1) * eval_odd_hermite(2 * i + 1, x / s).unwrap())
            .sum();
        prop_assert!((y - model.eval(x)).norm() < 1e-9 * (1.0 + model.eval(x).norm()));
    }

    #[test]
    fn autocorrelation_transform_bounds(a in coeffs(5), r in 0.0..1.0f64, arg in -3.0..3.0f64) {
        let s = OddHermiteSeries::new(a).unwrap();
        let at_one = gaussian_autocorrelation_transform(&s, c(1.0, 0.0)).unwrap();
        let v = gaussian_autocorrelation_transform(&s, C64::from_polar(r, arg)).unwrap();
        // power at zero lag is real and dominates every other lag
        prop_assert!(at_one.im.abs() < 1e-12);
        prop_assert!(v.norm() <= at_one.re * (1.0 + 1e-12));
    }
}

#[test]
fn gaussian_moments_by_sampling() {
    // E|Σ a H(X)|² = Σ |a|² ‖H‖² for X ~ CN(0,1)
    let s = OddHermiteSeries::new(vec![c(1.0, 0.2), c(-0.3, 0.1), c(0.05, 0.0)]).unwrap();
    let mut r = lnadist::rng::stream(7, 0, lnadist::rng::streams::TEST);
    let xs = lnadist::rng::cn_vec(&mut r, 400_000);
    let p: Vec<f64> = xs.iter().map(|&x| s.eval(x).norm_sqr()).collect();
    let (m, se) = lnadist::stats::mean_se(&p);
    let target = gaussian_autocorrelation_transform(&s, c(1.0, 0.0)).unwrap().re;
    assert!((m - target).abs() < 4.0 * se, "{m} vs {target} ± {se}");
}
