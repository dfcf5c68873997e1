//! Array gain `g(φ)` of a uniform linear array and its `M`-free envelope.
use lnadist::channel::{array_gain, array_gain_envelope};

fn main() {
    let m = 64;
    // off the 2π/M null grid so the sidelobes show
    for i in 0..=16 {
        let phi = 0.013 + 0.19 * i as f64;
        let env = array_gain_envelope(phi).map(|e| format!("{e:10.3}")).unwrap_or_else(|_| "       inf".into());
        println!("φ = {phi:5.3}   g = {:10.3}   envelope = {env}", array_gain(phi, m));
    }
}
