//! Quasi-memoryless amplifier models.
//!
//! A passband nonlinearity `ŷ = Σ b̂_ϖ x̂^ϖ` reduces in baseband to the
//! polynomial model `y = Σ b_ϖ x|x|^{ϖ-1}` over odd `ϖ`. At input power
//! `σ²` the same model reads `y = Σ a_ϖ σ^ϖ H_ϖ(x/σ)`, and only `a_1` is
//! correlated with the input.

use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{domain, Error, Result};
use crate::hermite::{basis_change_with_cap, binomial, OddHermiteSeries, DEFAULT_DEGREE_CAP};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Memoryless,
    QuasiMemoryless,
}

fn check_coeffs(coeffs: &[C64], cap: usize) -> Result<()> {
    if coeffs.is_empty() {
        return domain("amplifier model without coefficients");
    }
    if 2 * coeffs.len() - 1 > cap {
        return domain(format!("model degree {} above cap {cap}", 2 * coeffs.len() - 1));
    }
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return domain("non-finite amplifier coefficient");
    }
    Ok(())
}

/// Odd-degree passband coefficients `b̂_ϖ`; `coeffs[i]` is degree `2i+1`.
///
/// Even-degree terms produce nothing around the carrier and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PassbandPolynomial {
    coeffs: Vec<C64>,
    flavor: Flavor,
}

impl PassbandPolynomial {
    pub fn new(coeffs: Vec<C64>, flavor: Flavor) -> Result<Self> {
        check_coeffs(&coeffs, DEFAULT_DEGREE_CAP)?;
        if flavor == Flavor::Memoryless && coeffs.iter().any(|c| c.im != 0.0) {
            return domain("memoryless passband coefficients must be real");
        }
        Ok(Self { coeffs, flavor })
    }

    pub fn memoryless(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect(), Flavor::Memoryless)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn max_degree(&self) -> usize {
        2 * self.coeffs.len() - 1
    }
}

/// `b_ϖ = C(ϖ, (ϖ+1)/2) b̂_ϖ`.
pub fn passband_to_baseband(pb: &PassbandPolynomial) -> PolynomialModel {
    let coeffs = pb
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| c * binomial(2 * i + 1, i + 1))
        .collect();
    PolynomialModel { coeffs, cap: DEFAULT_DEGREE_CAP, note: None }
}

/// Apply a memoryless passband polynomial sample by sample.
pub fn passband_eval(pb: &PassbandPolynomial, samples: &[f64]) -> Result<Vec<f64>> {
    if pb.flavor != Flavor::Memoryless {
        return domain("complex passband coefficients have no time-domain passband evaluation");
    }
    let b: Vec<f64> = pb.coeffs.iter().map(|c| c.re).collect();
    Ok(samples
        .iter()
        .map(|&x| {
            let x2 = x * x;
            let mut acc = 0.0;
            for &bi in b.iter().rev() {
                acc = acc * x2 + bi;
            }
            acc * x
        })
        .collect())
}

/// Baseband equivalent of the passband output around the carrier.
///
/// `baseband` is one period of a periodic complex envelope sampled at the
/// passband rate, `carrier` the carrier in cycles per sample (an integer
/// number of cycles over the period keeps everything exactly periodic). The
/// envelope is modulated as `x̂ = x e^{jωn} + x* e^{-jωn}`, amplified,
/// demodulated and brick-wall lowpass filtered at half the carrier.
pub fn baseband_of_passband(pb: &PassbandPolynomial, baseband: &[C64], carrier: f64) -> Result<Vec<C64>> {
    if !(carrier > 0.0 && carrier < 0.5) {
        return domain("carrier must lie in (0, 1/2) cycles per sample");
    }
    let n = baseband.len();
    let w = 2.0 * std::f64::consts::PI * carrier;
    let xhat: Vec<f64> = baseband
        .iter()
        .enumerate()
        .map(|(i, x)| 2.0 * (x * C64::from_polar(1.0, w * i as f64)).re)
        .collect();
    let yhat = passband_eval(pb, &xhat)?;
    let mut y: Vec<C64> = yhat
        .iter()
        .enumerate()
        .map(|(i, &v)| C64::from_polar(v, -w * i as f64))
        .collect();
    dsp::fft_in_place(&mut y);
    for (k, v) in y.iter_mut().enumerate() {
        if dsp::bin_freq(k, n).abs() >= carrier / 2.0 {
            *v = C64::new(0.0, 0.0);
        }
    }
    dsp::ifft_in_place(&mut y);
    let s = 1.0 / n as f64;
    Ok(y.into_iter().map(|v| v * s).collect())
}

/// Baseband polynomial model `Σ b_ϖ x|x|^{ϖ-1}`; `coeffs[i]` is degree `2i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialModel {
    coeffs: Vec<C64>,
    cap: usize,
    /// Free-form note on the power scaling of the coefficients.
    pub note: Option<String>,
}

impl PolynomialModel {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        Self::with_cap(coeffs, DEFAULT_DEGREE_CAP)
    }

    pub fn with_cap(coeffs: Vec<C64>, cap: usize) -> Result<Self> {
        check_coeffs(&coeffs, cap)?;
        Ok(Self { coeffs, cap, note: None })
    }

    /// Purely linear gain `b_1`.
    pub fn linear(b1: C64) -> Self {
        Self { coeffs: vec![b1], cap: DEFAULT_DEGREE_CAP, note: None }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, degree: usize) -> C64 {
        if degree % 2 == 0 {
            return C64::new(0.0, 0.0);
        }
        self.coeffs.get(degree / 2).copied().unwrap_or_default()
    }

    pub fn max_degree(&self) -> usize {
        2 * self.coeffs.len() - 1
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// `Σ b_ϖ x|x|^{ϖ-1}` (Horner in `|x|²`).
    #[inline]
    pub fn eval(&self, x: C64) -> C64 {
        let r2 = x.norm_sqr();
        let mut acc = C64::new(0.0, 0.0);
        for &b in self.coeffs.iter().rev() {
            acc = acc * r2 + b;
        }
        acc * x
    }

    /// Instantaneous complex gain `y/x` at input power `|x|² = p`.
    pub fn gain_at(&self, p: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &b in self.coeffs.iter().rev() {
            acc = acc * p + b;
        }
        acc
    }

    /// Hermite coefficients at input power `sigma_sq`:
    /// `a_j = Σ_{ϖ≥j} b_ϖ σ^{ϖ-j} c_{ϖj}` with `c` the monomial→Hermite table.
    pub fn hermite_at_power(&self, sigma_sq: f64) -> Result<HermiteCoefficients> {
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return domain(format!("input power must be positive, got {sigma_sq}"));
        }
        let n = self.coeffs.len();
        let table = basis_change_with_cap(self.max_degree(), self.cap.max(self.max_degree()))?;
        let coeffs = (0..n)
            .map(|j| {
                (j..n)
                    .map(|i| self.coeffs[i] * table.monomial_to_hermite[i][j] * sigma_sq.powi((i - j) as i32))
                    .sum()
            })
            .collect();
        Ok(HermiteCoefficients { coeffs, sigma_sq })
    }

    /// Input power at which the instantaneous output power has compressed
    /// `drop_db` below linear extrapolation (first crossing from below).
    pub fn compression_point(&self, drop_db: f64) -> Result<f64> {
        let g0 = self.coeffs[0].norm();
        if g0 == 0.0 {
            return domain("zero small-signal gain");
        }
        let f = |p: f64| 20.0 * (self.gain_at(p).norm() / g0).log10() + drop_db;
        let mut lo = 1e-9;
        let mut hi = lo;
        loop {
            hi *= 1.01;
            if f(hi) < 0.0 {
                break;
            }
            lo = hi;
            if hi > 1e9 {
                return domain("no compression point found");
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 { hi = mid } else { lo = mid }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Hermite coefficients `a_ϖ` at input power `sigma_sq`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteCoefficients {
    coeffs: Vec<C64>,
    sigma_sq: f64,
}

impl HermiteCoefficients {
    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, degree: usize) -> C64 {
        if degree % 2 == 0 {
            return C64::new(0.0, 0.0);
        }
        self.coeffs.get(degree / 2).copied().unwrap_or_default()
    }

    pub fn a1(&self) -> C64 {
        self.coeffs[0]
    }

    pub fn a3(&self) -> C64 {
        self.coeff(3)
    }

    /// The series `Σ a_ϖ H_ϖ` (unscaled coefficients).
    pub fn series(&self) -> OddHermiteSeries {
        OddHermiteSeries::with_cap(self.coeffs.clone(), (2 * self.coeffs.len() - 1).max(DEFAULT_DEGREE_CAP))
            .expect("coefficients are finite")
    }

    /// The series of the normalised input `u = x/σ`: `Σ a_ϖ σ^ϖ H_ϖ(u)`.
    pub fn scaled_series(&self) -> OddHermiteSeries {
        let s = self.sigma_sq.sqrt();
        let c = self.coeffs.iter().enumerate().map(|(i, &a)| a * s.powi(2 * i as i32 + 1)).collect();
        OddHermiteSeries::with_cap(c, (2 * self.coeffs.len() - 1).max(DEFAULT_DEGREE_CAP)).expect("finite")
    }

    /// `Σ a_ϖ σ^ϖ H_ϖ(x/σ)`.
    pub fn eval(&self, x: C64) -> C64 {
        let s = self.sigma_sq.sqrt();
        self.scaled_series().eval(x / s)
    }

    /// Back to the polynomial model: `b_i = Σ_{j≥i} a_j σ^{2(j-i)} h_{ji}`.
    pub fn to_polynomial(&self) -> PolynomialModel {
        let n = self.coeffs.len();
        let table = basis_change_with_cap(2 * n - 1, (2 * n - 1).max(DEFAULT_DEGREE_CAP)).expect("odd degree");
        let coeffs = (0..n)
            .map(|i| {
                (i..n)
                    .map(|j| self.coeffs[j] * table.hermite_to_monomial[j][i] * self.sigma_sq.powi((j - i) as i32))
                    .sum()
            })
            .collect();
        PolynomialModel { coeffs, cap: (2 * n - 1).max(DEFAULT_DEGREE_CAP), note: None }
    }
}

/// `|a_1(P)|² / |b_1|²` on a power grid (linear ratio; 0 dB is the small-signal gain).
pub fn desensitization_curve(model: &PolynomialModel, powers: &[f64]) -> Result<Vec<f64>> {
    let g0 = model.coeffs[0].norm_sqr();
    powers
        .iter()
        .map(|&p| Ok(model.hermite_at_power(p)?.a1().norm_sqr() / g0))
        .collect()
}

/// Split an amplifier output into `a_1 x` and the uncorrelated remainder.
pub fn decompose(model: &PolynomialModel, sigma_sq: f64, samples: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let a1 = model.hermite_at_power(sigma_sq)?.a1();
    let linear: Vec<C64> = samples.iter().map(|&x| a1 * x).collect();
    let distortion = samples.iter().zip(&linear).map(|(&x, &l)| model.eval(x) - l).collect();
    Ok((linear, distortion))
}

/// Polynomial coefficients of the bundled GaN amplifier. Unit input power
/// sits 9 dB below saturation.
pub fn gan_reference_model() -> PolynomialModel {
    let coeffs = vec![
        C64::new(0.999_952_00, -0.009_817_88),
        C64::new(-7.782_311_81e-3, 0.014_961_7),
        C64::new(-2.693_002_97e-2, -0.007_368_69),
        C64::new(6.543_702_19e-3, 0.001_655_54),
        C64::new(-4.542_018_16e-4, -0.000_114_12),
    ];
    PolynomialModel {
        coeffs,
        cap: DEFAULT_DEGREE_CAP,
        note: Some("unit input power is 9 dB below saturation".into()),
    }
}

/// Reference Hermite coefficients of the GaN model at unit input power, as
/// tabulated to limited precision (Im(a₁) carries the opposite sign).
pub fn gan_reference_hermite() -> [C64; 5] {
    [
        C64::new(0.925_351_833, -1.931_67e-3),
        C64::new(-0.042_797_646_7, 2.959_63e-3),
        C64::new(-2.909_821_31e-3, -1.196_91e-3),
        C64::new(-2.540_334_14e-3, -6.269_1e-4),
        C64::new(-4.542_018_16e-4, -1.141_2e-4),
    ]
}

/// 1-dB compression input power of [`gan_reference_model`]: the power where
/// the instantaneous AM/AM curve has dropped 1 dB. Frozen from
/// [`PolynomialModel::compression_point`]; a unit test keeps them in sync.
pub const GAN_P1DB: f64 = 2.614_517_086_575_533;

/// JSON record for an amplifier model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmpRecord {
    pub degrees: Vec<usize>,
    pub coeffs_re: Vec<f64>,
    pub coeffs_im: Vec<f64>,
    pub flavor: Flavor,
    /// `baseband` (default) or `passband` coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<CoeffDomain>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffDomain {
    Baseband,
    Passband,
}

impl AmpRecord {
    fn dense(&self) -> Result<Vec<C64>> {
        if self.degrees.len() != self.coeffs_re.len() || self.degrees.len() != self.coeffs_im.len() {
            return Err(Error::Config("degrees, coeffs_re and coeffs_im differ in length".into()));
        }
        let max = *self.degrees.iter().max().ok_or_else(|| Error::Config("no degrees".into()))?;
        let mut c = vec![C64::new(0.0, 0.0); max.div_ceil(2)];
        for ((&d, &re), &im) in self.degrees.iter().zip(&self.coeffs_re).zip(&self.coeffs_im) {
            if d % 2 == 0 {
                return Err(Error::Config(format!("even degree {d} in amplifier record")));
            }
            c[d / 2] += C64::new(re, im);
        }
        Ok(c)
    }

    pub fn to_model(&self) -> Result<PolynomialModel> {
        let c = self.dense()?;
        match self.domain.unwrap_or(CoeffDomain::Baseband) {
            CoeffDomain::Baseband => PolynomialModel::new(c).map_err(|e| Error::Config(e.to_string())),
            CoeffDomain::Passband => {
                let pb = PassbandPolynomial::new(c, self.flavor).map_err(|e| Error::Config(e.to_string()))?;
                Ok(passband_to_baseband(&pb))
            }
        }
    }

    pub fn from_model(model: &PolynomialModel) -> Self {
        let c = model.coeffs();
        Self {
            degrees: (0..c.len()).map(|i| 2 * i + 1).collect(),
            coeffs_re: c.iter().map(|z| z.re).collect(),
            coeffs_im: c.iter().map(|z| z.im).collect(),
            flavor: if c.iter().all(|z| z.im == 0.0) { Flavor::Memoryless } else { Flavor::QuasiMemoryless },
            domain: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn passband_conversion() {
        let pb = PassbandPolynomial::memoryless(&[0.0, 1.0]).unwrap();
        assert_eq!(passband_to_baseband(&pb).coeff(3), c(3.0, 0.0));
        let pb = PassbandPolynomial::memoryless(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(passband_to_baseband(&pb).coeff(5), c(10.0, 0.0));
        let pb = PassbandPolynomial::new(vec![c(2.0, 1.0)], Flavor::QuasiMemoryless).unwrap();
        assert_eq!(passband_to_baseband(&pb).coeff(1), c(2.0, 1.0));
        assert!(PassbandPolynomial::new(vec![c(1.0, 0.1)], Flavor::Memoryless).is_err());
        assert!(passband_eval(&pb, &[1.0]).is_err());
    }

    #[test]
    fn baseband_eval_examples() {
        assert_eq!(PolynomialModel::linear(c(1.0, 0.0)).eval(c(0.3, -0.4)), c(0.3, -0.4));
        let m = PolynomialModel::new(vec![c(1.0, 0.0), c(-0.1, 0.0)]).unwrap();
        assert!((m.eval(c(1.0, 0.0)) - c(0.9, 0.0)).norm() < 1e-15);
        let g = gan_reference_model();
        let sum: C64 = g.coeffs().iter().sum();
        assert!((g.eval(c(1.0, 0.0)) - sum).norm() < 1e-15);
        assert_eq!(g.coeffs().len(), 5);
        assert_eq!(g.coeff(1), c(0.999952, -0.00981788));
        assert_eq!(g.coeff(9), c(-4.54201816e-4, -0.00011412));
    }

    #[test]
    fn hermite_at_power_closed_form() {
        let g = gan_reference_model();
        for p in [0.1, 1.0, 2.7] {
            let a = g.hermite_at_power(p).unwrap();
            let b = |d| g.coeff(d);
            let want = [
                b(1) + b(3) * 2.0 * p + b(5) * 6.0 * p * p + b(7) * 24.0 * p.powi(3) + b(9) * 120.0 * p.powi(4),
                b(3) + b(5) * 6.0 * p + b(7) * 36.0 * p * p + b(9) * 240.0 * p.powi(3),
                b(5) + b(7) * 12.0 * p + b(9) * 120.0 * p * p,
                b(7) + b(9) * 20.0 * p,
                b(9),
            ];
            for (x, y) in a.coeffs().iter().zip(want) {
                assert!((x - y).norm() <= 1e-14 * y.norm().max(1e-3));
            }
        }
        let a = g.hermite_at_power(1.0).unwrap();
        assert_eq!(a.coeff(9), c(-4.54201816e-4, -1.1412e-4));
        let tiny = g.hermite_at_power(1e-12).unwrap();
        for d in [1, 3, 5, 7, 9] {
            assert!((tiny.coeff(d) - g.coeff(d)).norm() < 1e-10);
        }
        assert!(g.hermite_at_power(0.0).is_err());
        assert!(g.hermite_at_power(-1.0).is_err());
    }

    #[test]
    fn third_degree_desensitization() {
        let m = PolynomialModel::new(vec![c(1.0, 0.0), c(-0.1, 0.0)]).unwrap();
        for p in [0.5, 1.0, 3.0] {
            assert!((m.hermite_at_power(p).unwrap().a1() - c(1.0 - 0.2 * p, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn frozen_compression_point() {
        let p = gan_reference_model().compression_point(1.0).unwrap();
        assert!((p - GAN_P1DB).abs() < 1e-9, "{p}");
    }

    #[test]
    fn decompose_examples() {
        let x = [c(0.3, 0.1), c(-1.2, 0.5)];
        let (l, d) = decompose(&PolynomialModel::linear(c(0.9, 0.1)), 1.0, &x).unwrap();
        assert!(d.iter().all(|v| v.norm() < 1e-15));
        assert!((l[1] - c(0.9, 0.1) * x[1]).norm() < 1e-15);
        let m = PolynomialModel::new(vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let (_, d) = decompose(&m, 2.0, &x).unwrap();
        // a1 = 2·σ²·b3 = 2, so d = b3(x|x|² − 2σ²x) = b3 σ³ H3(x/σ)
        let s = 2f64.sqrt();
        for (di, &xi) in d.iter().zip(&x) {
            let want = crate::hermite::eval_odd_hermite(3, xi / s).unwrap() * 0.5 * s.powi(3);
            assert!((di - want).norm() < 1e-13);
        }
    }

    #[test]
    fn record_roundtrip() {
        let g = gan_reference_model();
        let rec = AmpRecord::from_model(&g);
        let s = serde_json::to_string(&rec).unwrap();
        let back: AmpRecord = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_model().unwrap().coeffs(), g.coeffs());
        assert!(serde_json::from_str::<AmpRecord>(r#"{"degrees":[1],"coeffs_re":[1],"coeffs_im":[0],"flavor":"memoryless","x":1}"#).is_err());
        let pb: AmpRecord = serde_json::from_str(
            r#"{"degrees":[1,3],"coeffs_re":[1,1],"coeffs_im":[0,0],"flavor":"memoryless","domain":"passband"}"#,
        )
        .unwrap();
        assert_eq!(pb.to_model().unwrap().coeff(3), c(3.0, 0.0));
    }
}
