//! Linear gain `|a₁(σ²)|²/|b₁|²` against input power relative to the 1-dB
//! compression point.
use lnadist::amplifier::{desensitization_curve, gan_reference_model};
use lnadist::stats::{db10, from_db10};

fn main() -> lnadist::Result<()> {
    let model = gan_reference_model();
    let p1db = model.compression_point(1.0)?;
    println!("1-dB compression point: {p1db:.6}");
    let grid: Vec<f64> = (0..=10).map(|i| -10.0 + i as f64).collect();
    let powers: Vec<f64> = grid.iter().map(|&d| p1db * from_db10(d)).collect();
    for (d, g) in grid.iter().zip(desensitization_curve(&model, &powers)?) {
        println!("{d:+5.1} dB   gain {:+8.3} dB", db10(g));
    }
    Ok(())
}
