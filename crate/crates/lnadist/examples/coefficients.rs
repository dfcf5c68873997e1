//! Hermite coefficients of the bundled GaN amplifier at a few input powers,
//! and the round trip back to the polynomial.
use lnadist::amplifier::gan_reference_model;

fn main() -> lnadist::Result<()> {
    let model = gan_reference_model();
    for sigma_sq in [0.25, 1.0, 2.0] {
        let h = model.hermite_at_power(sigma_sq)?;
        println!("σ² = {sigma_sq}");
        for (i, (b, a)) in model.coeffs().iter().zip(h.coeffs()).enumerate() {
            println!("  degree {}: b = {:+.6e}{:+.6e}j   a = {:+.9e}{:+.9e}j", 2 * i + 1, b.re, b.im, a.re, a.im);
        }
        let back = h.to_polynomial();
        let err = back.coeffs().iter().zip(model.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        println!("  round-trip max |Δb| = {err:.1e}");
    }
    Ok(())
}
