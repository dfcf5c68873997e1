//! Complex Itô-Hermite polynomials.
//!
//! `H_{p,q}(x, x*)` is orthogonal under the circularly-symmetric Gaussian
//! measure:
//!
//! ```text
//! E[H_{p,q}(X) H*_{p',q'}(Y)] = p! q! δ[p-p'] δ[q-q'] E[XY*]^p E[X*Y]^q
//! ```
//!
//! Only the odd subset `H_ϖ = H_{(ϖ+1)/2, (ϖ-1)/2}` matters for bandpass
//! nonlinearities; every member is `x` times a real polynomial in `|x|²`.

use crate::error::{domain, Result};
use crate::C64;

/// Default highest odd degree of a series.
pub const DEFAULT_DEGREE_CAP: usize = 9;
/// Largest index accepted by [`eval_ito_hermite`]; keeps the factorials exact-ish.
pub const MAX_ITO_INDEX: usize = 32;
/// Slack on `|r| ≤ 1` for correlation arguments estimated numerically.
pub const CORRELATION_TOL: f64 = 1e-9;

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `((ϖ+1)/2)! ((ϖ-1)/2)!`, the squared norm of `H_ϖ`.
pub fn odd_norm(degree: usize) -> f64 {
    factorial(degree.div_ceil(2)) * factorial(degree / 2)
}

fn check_odd(degree: usize) -> Result<()> {
    if degree % 2 == 0 {
        return domain(format!("degree {degree} is not odd"));
    }
    Ok(())
}

/// `H_{p,q}(x, x*)` by the explicit alternating sum.
pub fn eval_ito_hermite(p: usize, q: usize, x: C64) -> Result<C64> {
    if p > MAX_ITO_INDEX || q > MAX_ITO_INDEX {
        return domain(format!("Hermite index ({p},{q}) above cap {MAX_ITO_INDEX}"));
    }
    let xc = x.conj();
    let scale = factorial(p) * factorial(q);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..=p.min(q) {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign / (factorial(i) * factorial(p - i) * factorial(q - i));
        acc += x.powu((p - i) as u32) * xc.powu((q - i) as u32) * w;
    }
    Ok(acc * scale)
}

/// `H_ϖ(x)` for odd `ϖ`.
pub fn eval_odd_hermite(degree: usize, x: C64) -> Result<C64> {
    check_odd(degree)?;
    eval_ito_hermite(degree.div_ceil(2), degree / 2, x)
}

/// Coefficient of `x|x|^{2j}` in `H_{2q+1}`: `(-1)^k k! C(q+1,k) C(q,k)` with `k = q - j`.
fn hermite_monomial_coeff(q: usize, j: usize) -> f64 {
    let k = q - j;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * factorial(k) * binomial(q + 1, k) * binomial(q, k)
}

/// Coefficients `a_ϖ` of a series `Σ a_ϖ H_ϖ(x)` over odd degrees.
///
/// `coeffs[i]` belongs to degree `2i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OddHermiteSeries {
    coeffs: Vec<C64>,
    cap: usize,
}

impl OddHermiteSeries {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        Self::with_cap(coeffs, DEFAULT_DEGREE_CAP)
    }

    pub fn with_cap(coeffs: Vec<C64>, cap: usize) -> Result<Self> {
        check_odd(cap)?;
        if coeffs.is_empty() {
            return domain("empty Hermite series");
        }
        let max = 2 * coeffs.len() - 1;
        if max > cap {
            return domain(format!("series degree {max} above cap {cap}"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return domain("non-finite Hermite coefficient");
        }
        Ok(Self { coeffs, cap })
    }

    /// Build from `(degree, coefficient)` pairs; missing degrees are zero.
    pub fn from_pairs(pairs: &[(usize, C64)]) -> Result<Self> {
        let mut max = 1;
        for &(d, _) in pairs {
            check_odd(d)?;
            max = max.max(d);
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); max.div_ceil(2)];
        for &(d, c) in pairs {
            coeffs[d / 2] += c;
        }
        Self::new(coeffs)
    }

    pub fn max_degree(&self) -> usize {
        2 * self.coeffs.len() - 1
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// `a_ϖ`, zero for degrees beyond the series.
    pub fn coeff(&self, degree: usize) -> C64 {
        if degree % 2 == 0 {
            return C64::new(0.0, 0.0);
        }
        self.coeffs.get(degree / 2).copied().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// `(degree, a_ϖ)` pairs in ascending degree.
    pub fn iter(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, &c)| (2 * i + 1, c))
    }

    /// `Σ a_ϖ H_ϖ(x)`.
    pub fn eval(&self, x: C64) -> C64 {
        self.iter()
            .map(|(d, a)| a * eval_odd_hermite(d, x).expect("odd degree below cap"))
            .sum()
    }

    /// The series without its degree-1 term (the distortion part).
    pub fn without_linear(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = C64::new(0.0, 0.0);
        Self { coeffs, cap: self.cap }
    }
}

/// Change of basis between `x|x|^{ϖ-1}` and `H_ϖ(x)` over odd degrees.
///
/// Row `i` of `hermite_to_monomial` expands `H_{2i+1}` in monomials; row `i`
/// of `monomial_to_hermite` expands `x|x|^{2i}` in Hermite polynomials. Both
/// are lower-triangular with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChangeTable {
    pub size: usize,
    pub monomial_to_hermite: Vec<Vec<f64>>,
    pub hermite_to_monomial: Vec<Vec<f64>>,
}

pub fn basis_change(max_degree: usize) -> Result<BasisChangeTable> {
    basis_change_with_cap(max_degree, DEFAULT_DEGREE_CAP)
}

pub fn basis_change_with_cap(max_degree: usize, cap: usize) -> Result<BasisChangeTable> {
    check_odd(max_degree)?;
    if max_degree > cap {
        return domain(format!("degree {max_degree} above cap {cap}"));
    }
    let n = max_degree.div_ceil(2);
    let mut h2m = vec![vec![0.0; n]; n];
    for (q, row) in h2m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate().take(q + 1) {
            *v = hermite_monomial_coeff(q, j);
        }
    }
    // Forward substitution; the diagonal is one so this stays in integers.
    let mut m2h = vec![vec![0.0; n]; n];
    for i in 0..n {
        m2h[i][i] = 1.0;
        for j in (0..i).rev() {
            let s: f64 = (j + 1..=i).map(|k| m2h[i][k] * h2m[k][j]).sum();
            m2h[i][j] = -s;
        }
    }
    Ok(BasisChangeTable { size: n, monomial_to_hermite: m2h, hermite_to_monomial: h2m })
}

fn check_correlation(r: C64) -> Result<()> {
    if !(r.norm() <= 1.0 + CORRELATION_TOL) {
        return domain(format!("|r| = {} exceeds 1", r.norm()));
    }
    Ok(())
}

/// Output autocorrelation of `Σ a_ϖ H_ϖ(X)` for a unit-power Gaussian input
/// whose normalised autocorrelation at the lag of interest is `r`.
pub fn gaussian_autocorrelation_transform(series: &OddHermiteSeries, r: C64) -> Result<C64> {
    gaussian_crosscorrelation_transform(series, series, r)
}

/// Cross-correlation `E[y_a(t) y_b*(t-τ)]` for two series driven by jointly
/// Gaussian unit-power inputs with correlation `r`.
pub fn gaussian_crosscorrelation_transform(
    a: &OddHermiteSeries,
    b: &OddHermiteSeries,
    r: C64,
) -> Result<C64> {
    check_correlation(r)?;
    let r2 = r.norm_sqr();
    let top = a.max_degree().max(b.max_degree());
    let mut acc = C64::new(0.0, 0.0);
    for d in (1..=top).step_by(2) {
        let w = a.coeff(d) * b.coeff(d).conj();
        acc += w * odd_norm(d) * r * r2.powi((d as i32 - 1) / 2);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn low_order_values() {
        assert_eq!(eval_ito_hermite(1, 0, c(0.5, 0.0)).unwrap(), c(0.5, 0.0));
        assert!((eval_ito_hermite(2, 1, c(1.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((eval_odd_hermite(3, c(1.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((eval_odd_hermite(5, c(1.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(eval_odd_hermite(9, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn matches_high_precision_sum() {
        // exact decimal results of the defining sum
        let v = eval_ito_hermite(3, 2, c(0.7, 0.3)).unwrap();
        assert!((v - c(1.99948, 0.85692)).norm() < 1e-13);
        let v = eval_ito_hermite(5, 4, c(1.3, -0.8)).unwrap();
        assert!((v - c(-14.619520227, 8.996627832)).norm() < 1e-11);
    }

    #[test]
    fn rejects_bad_degrees() {
        assert!(eval_odd_hermite(4, c(1.0, 0.0)).is_err());
        assert!(eval_ito_hermite(33, 0, c(1.0, 0.0)).is_err());
        assert!(basis_change(11).is_err());
        assert!(basis_change_with_cap(11, 11).is_ok());
    }

    #[test]
    fn basis_rows() {
        let t = basis_change(9).unwrap();
        assert_eq!(t.monomial_to_hermite[0], vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(&t.monomial_to_hermite[1][..2], &[2.0, 1.0]);
        assert_eq!(&t.monomial_to_hermite[2][..3], &[6.0, 6.0, 1.0]);
        assert_eq!(&t.monomial_to_hermite[3][..4], &[24.0, 36.0, 12.0, 1.0]);
        assert_eq!(&t.monomial_to_hermite[4][..5], &[120.0, 240.0, 120.0, 20.0, 1.0]);
        assert_eq!(&t.hermite_to_monomial[4][..5], &[120.0, -240.0, 120.0, -20.0, 1.0]);
        // closed form of the inverse: k! C(q+1,k) C(q,k)
        for q in 0..5 {
            for j in 0..=q {
                let k = q - j;
                let want = factorial(k) * binomial(q + 1, k) * binomial(q, k);
                assert_eq!(t.monomial_to_hermite[q][j], want);
            }
        }
        for i in 0..5 {
            for j in 0..5 {
                let p: f64 = (0..5).map(|k| t.monomial_to_hermite[i][k] * t.hermite_to_monomial[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transform_examples() {
        let a3 = OddHermiteSeries::from_pairs(&[(3, c(1.0, 0.0))]).unwrap();
        assert!((gaussian_autocorrelation_transform(&a3, c(1.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        let a1 = OddHermiteSeries::from_pairs(&[(1, c(1.0, 0.0))]).unwrap();
        assert_eq!(gaussian_autocorrelation_transform(&a1, c(0.3, 0.4)).unwrap(), c(0.3, 0.4));
        let s = OddHermiteSeries::from_pairs(&[(1, c(1.0, 0.0)), (3, c(0.1, 0.0))]).unwrap();
        assert!((gaussian_autocorrelation_transform(&s, c(0.5, 0.0)).unwrap() - c(0.5025, 0.0)).norm() < 1e-15);
        assert_eq!(gaussian_crosscorrelation_transform(&a3, &a1, c(0.2, 0.1)).unwrap(), c(0.0, 0.0));
        let x = OddHermiteSeries::from_pairs(&[(3, c(1.0, 1.0))]).unwrap();
        let y = OddHermiteSeries::from_pairs(&[(3, c(2.0, 0.0))]).unwrap();
        let v = gaussian_crosscorrelation_transform(&x, &y, c(0.6, 0.0)).unwrap();
        assert!((v - c(0.864, 0.864)).norm() < 1e-12, "{v}");
        assert!(gaussian_autocorrelation_transform(&a3, c(1.0 + 1e-6, 0.0)).is_err());
        assert!(gaussian_autocorrelation_transform(&a3, c(1.0 + 1e-10, 0.0)).is_ok());
    }
}
