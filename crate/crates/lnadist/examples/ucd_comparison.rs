//! Spatially uncorrelated distortion against the Hermite model: the former
//! is flat in angle, the latter follows the array gain.
use lnadist::analysis::gain_profiles;

fn main() -> lnadist::Result<()> {
    let m = 32;
    let phis: Vec<f64> = (0..=8).map(|i| std::f64::consts::PI * i as f64 / 8.0).collect();
    for eta in [0.0, 0.5] {
        println!("η = {eta}");
        for (phi, ucd, hermite) in gain_profiles(m, 1.0, eta, &phis)? {
            println!("  φ = {phi:5.3}   uncorrelated {ucd:8.2}   hermite {hermite:8.2}");
        }
    }
    Ok(())
}
