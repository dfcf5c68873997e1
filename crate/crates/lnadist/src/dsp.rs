//! FFT plumbing shared by the pulse and waveform code.

use rustfft::FftPlanner;

use crate::C64;

pub fn fft_in_place(buf: &mut [C64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// Unnormalised inverse FFT (divide by `len` yourself).
pub fn ifft_in_place(buf: &mut [C64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
}

/// Linear convolution of a complex signal with a real kernel, full length
/// `a.len() + b.len() - 1`.
pub fn convolve_real(a: &[C64], b: &[f64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut fa = vec![C64::new(0.0, 0.0); n];
    fa[..a.len()].copy_from_slice(a);
    let mut fb = vec![C64::new(0.0, 0.0); n];
    for (d, &s) in fb.iter_mut().zip(b) {
        d.re = s;
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    planner.plan_fft_inverse(n).process(&mut fa);
    let scale = 1.0 / n as f64;
    fa.truncate(out_len);
    for x in fa.iter_mut() {
        *x *= scale;
    }
    fa
}

/// Signed frequency of FFT bin `k` in cycles per sample.
pub fn bin_freq(k: usize, n: usize) -> f64 {
    let k = k as f64;
    let n = n as f64;
    if k < n / 2.0 { k / n } else { k / n - 1.0 }
}
