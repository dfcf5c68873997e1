//! Effective SINR under i.i.d. fading with MRC: Monte Carlo against the
//! fixed-gain closed form, and the gain loss of unequal amplifiers.
use lnadist::analysis::{fading_sinr_monte_carlo, gain_loss};
use lnadist::C64;

fn main() -> lnadist::Result<()> {
    let cases = [
        vec![C64::new(1.0, 0.0); 8],
        (0..8).map(|m| C64::new(0.7 + 0.08 * m as f64, 0.02 * m as f64)).collect::<Vec<_>>(),
    ];
    for a1 in &cases {
        let mc = fading_sinr_monte_carlo(a1, &[1.0, 0.5, 0.25], 0, 0.1, 0.05, 20_000, 3)?;
        println!(
            "ρ = {:.4}   MC SINR {:.4} ± {:.4}   closed form {:.4}",
            gain_loss(a1)?,
            mc.sinr,
            mc.se,
            mc.closed_form
        );
    }
    Ok(())
}
