//! Baseband equivalent of a memoryless passband polynomial, checked by
//! running a band-limited signal through the passband model directly.
use lnadist::amplifier::{baseband_of_passband, passband_to_baseband, PassbandPolynomial};
use lnadist::{dsp, rng, C64};

fn main() -> lnadist::Result<()> {
    let pb = PassbandPolynomial::memoryless(&[1.0, -0.01, 5e-4])?;
    let bb = passband_to_baseband(&pb);
    println!("baseband coefficients: {:?}", bb.coeffs());
    let n = 4096;
    let mut x = rng::cn_vec(&mut rng::stream(1, 0, 0), n);
    dsp::fft_in_place(&mut x);
    for (k, v) in x.iter_mut().enumerate() {
        if dsp::bin_freq(k, n).abs() >= 0.004 {
            *v = C64::new(0.0, 0.0);
        }
    }
    dsp::ifft_in_place(&mut x);
    let s = (n as f64 / x.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
    x.iter_mut().for_each(|v| *v *= s);
    let via = baseband_of_passband(&pb, &x, 301.0 / n as f64)?;
    let err = via.iter().zip(&x).map(|(a, &v)| (a - bb.eval(v)).norm()).fold(0.0, f64::max);
    println!("max |passband route − baseband model| = {err:.2e}");
    Ok(())
}
