//! Distortion array gain when the amplifiers deviate from a common model:
//! Monte Carlo against `E[G(0)] = |a₃|²(M²(1-η) + Mη)`.
use lnadist::channel::expected_deviation_gain;
use lnadist::validate::deviation_gain_mean;
use lnadist::C64;

fn main() -> lnadist::Result<()> {
    let a3 = C64::new(-0.0428, 0.003);
    let m = 32;
    for eta in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let (mean, se) = deviation_gain_mean(eta, m, a3, 5000, 11)?;
        let target = expected_deviation_gain(eta, 0.0, m)? * a3.norm_sqr();
        println!("η = {eta:4.2}   MC {mean:9.5} ± {se:.5}   closed form {target:9.5}");
    }
    Ok(())
}
