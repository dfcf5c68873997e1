//! Small Monte Carlo estimators.

use crate::C64;

/// Sample mean and its standard error for independent samples.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, f64::NAN);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Mean and standard error from `batches` contiguous batch means. Use this
/// for correlated sequences (filtered waveforms).
pub fn batch_mean_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let len = xs.len() / batches.max(1);
    if len == 0 {
        return mean_se(xs);
    }
    let means: Vec<f64> = xs
        .chunks_exact(len)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / len as f64)
        .collect();
    mean_se(&means)
}

/// Complex mean with separate real/imaginary standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub mean: C64,
    pub se_re: f64,
    pub se_im: f64,
}

impl ComplexEstimate {
    /// Largest of the two per-component z-scores against `target`.
    pub fn z_score(&self, target: C64) -> f64 {
        let d = self.mean - target;
        let tol = 1e-12 * (self.mean.norm() + target.norm());
        let z = |diff: f64, se: f64| {
            if se > 0.0 {
                diff.abs() / se
            } else if diff.abs() <= tol {
                0.0
            } else {
                f64::INFINITY
            }
        };
        z(d.re, self.se_re).max(z(d.im, self.se_im))
    }
}

pub fn complex_batch_estimate(xs: &[C64], batches: usize) -> ComplexEstimate {
    let re: Vec<f64> = xs.iter().map(|z| z.re).collect();
    let im: Vec<f64> = xs.iter().map(|z| z.im).collect();
    let (mr, sr) = batch_mean_se(&re, batches);
    let (mi, si) = batch_mean_se(&im, batches);
    ComplexEstimate { mean: C64::new(mr, mi), se_re: sr, se_im: si }
}

pub fn db10(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db10(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se() {
        let (m, s) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        let (m, _) = batch_mean_se(&[1.0; 100], 10);
        assert_eq!(m, 1.0);
        assert!((db10(from_db10(-3.0)) + 3.0).abs() < 1e-12);
    }
}
