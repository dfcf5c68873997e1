//! Pulse shaping and the cyclostationary statistics of third-degree distortion.
//!
//! Time is in symbol periods (`T = 1`) on a grid of `Q` samples per symbol.
//! A pulse-amplitude-modulated Gaussian signal with pulse `p` has the
//! periodic correlation `γ(t, τ) = Σ_n p(t-nT) p(t-nT-τ)`. Its third-degree
//! Hermite output correlates as `2 γ|γ|²`, and with a blocker up-shifted by
//! `B = (1+β)/T` the cross terms pick up `e^{j2πνBτ}`. Matched filtering and
//! symbol sampling collapse these to the ambiguity sequences `γ_{3,ν}[ℓ]`.
//! The factor 2 is *not* included here.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{domain, Result};
use crate::C64;

use std::f64::consts::PI;

/// Offsets `ν ∈ {-1, 0, 1, 2}` in table order.
pub const NUS: [i32; 4] = [-1, 0, 1, 2];
/// Default largest cycle index kept.
pub const DEFAULT_ALPHA_MAX: usize = 4;
/// Default symbol-lag window of ambiguity tables.
pub const DEFAULT_MAX_LAG: usize = 10;
/// Points of the sampled DTFT over `θ ∈ [-1/2, 1/2)`.
pub const DTFT_POINTS: usize = 256;

pub fn nu_slot(nu: i32) -> usize {
    (nu + 1) as usize
}

/// Treatment of the pulse tails beyond the truncation span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PulseWindow {
    /// Hard truncation.
    Rectangular,
    /// Raised-cosine taper over the outer `fraction` of the span on each side.
    Tukey { fraction: f64 },
}

impl Default for PulseWindow {
    fn default() -> Self {
        PulseWindow::Tukey { fraction: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub roll_off: f64,
    /// Samples per symbol period, `Q`.
    pub oversampling: usize,
    /// Truncation span in symbols on each side of the peak.
    pub span: usize,
    #[serde(default)]
    pub window: PulseWindow,
    /// Matched-filter sampling offset `t₀` in symbol periods.
    #[serde(default)]
    pub sampling_offset: f64,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self { roll_off: 0.22, oversampling: 16, span: 32, window: PulseWindow::default(), sampling_offset: 0.0 }
    }
}

impl PulseSpec {
    pub fn rrc(roll_off: f64) -> Self {
        Self { roll_off, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.roll_off) {
            return domain(format!("roll-off {} outside [0, 1]", self.roll_off));
        }
        if self.oversampling < 8 {
            return domain(format!("oversampling {} below 8", self.oversampling));
        }
        if self.span < 16 {
            return domain(format!("span {} below 16 symbols", self.span));
        }
        if let PulseWindow::Tukey { fraction } = self.window {
            if !(0.0..=1.0).contains(&fraction) {
                return domain(format!("taper fraction {fraction} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Occupied bandwidth `B = (1+β)/T`; also the blocker offset.
    pub fn bandwidth(&self) -> f64 {
        1.0 + self.roll_off
    }
}

/// Root-raised-cosine value at `t` (symbol periods), unit-energy before
/// truncation.
pub fn rrc_value(beta: f64, t: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (t.abs() - 1.0 / (4.0 * beta)).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    num / (PI * t * (1.0 - (4.0 * beta * t).powi(2)))
}

/// Sampled pulse; `samples[k]` sits at `t = (k - center)/Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub spec: PulseSpec,
    pub samples: Vec<f64>,
    pub center: usize,
}

impl Pulse {
    pub fn q(&self) -> usize {
        self.spec.oversampling
    }

    /// Sample at signed index `k` relative to the peak, zero off support.
    #[inline]
    pub fn at(&self, k: isize) -> f64 {
        let i = k + self.center as isize;
        if i < 0 || i as usize >= self.samples.len() {
            0.0
        } else {
            self.samples[i as usize]
        }
    }

    /// `Σ|p|²/Q`, one after normalisation.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|p| p * p).sum::<f64>() / self.q() as f64
    }

    /// `(p ⋆ p(-·))(kT)/T`, which is `δ[k]` for a root-Nyquist pulse.
    pub fn nyquist_residual(&self, k: isize) -> f64 {
        let q = self.q() as isize;
        let n = self.samples.len() as isize;
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.samples[i as usize] * self.at(i - self.center as isize - k * q);
        }
        acc / q as f64 - if k == 0 { 1.0 } else { 0.0 }
    }

    /// Continuous-frequency spectrum `P(f) = Σ p[k] e^{-j2πf t_k}/Q` on an
    /// `nfft`-point grid; returns `(f, P(f))` with `f` in units of `1/T`.
    pub fn spectrum(&self, nfft: usize) -> Vec<(f64, C64)> {
        let q = self.q();
        let nfft = nfft.max(self.samples.len()).next_power_of_two();
        let mut buf = vec![C64::new(0.0, 0.0); nfft];
        for (k, &p) in self.samples.iter().enumerate() {
            let idx = (k as isize - self.center as isize).rem_euclid(nfft as isize) as usize;
            buf[idx].re += p / q as f64;
        }
        dsp::fft_in_place(&mut buf);
        (0..nfft).map(|k| (dsp::bin_freq(k, nfft) * q as f64, buf[k])).collect()
    }
}

pub fn rrc_pulse(spec: &PulseSpec) -> Result<Pulse> {
    spec.validate()?;
    let q = spec.oversampling;
    let c = spec.span * q;
    let span = spec.span as f64;
    let taper = match spec.window {
        PulseWindow::Rectangular => 0.0,
        PulseWindow::Tukey { fraction } => fraction * span,
    };
    let mut samples: Vec<f64> = (0..=2 * c)
        .map(|k| {
            let t = (k as f64 - c as f64) / q as f64;
            let mut v = rrc_value(spec.roll_off, t);
            if taper > 0.0 && t.abs() > span - taper {
                v *= 0.5 * (1.0 + (PI * (t.abs() - (span - taper)) / taper).cos());
            }
            v
        })
        .collect();
    let e = (samples.iter().map(|p| p * p).sum::<f64>() / q as f64).sqrt();
    for s in samples.iter_mut() {
        *s /= e;
    }
    Ok(Pulse { spec: *spec, samples, center: c })
}

/// `γ(t_i, τ_j)` for phases `t_i = i/Q`, `i < Q`, and lags `τ_j = j/Q`,
/// `|j| ≤ max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatePulse {
    pub q: usize,
    pub max_lag: usize,
    /// `values[i][j + max_lag]`.
    pub values: Vec<Vec<f64>>,
}

impl AggregatePulse {
    pub fn at(&self, phase: usize, lag: isize) -> f64 {
        if lag.unsigned_abs() > self.max_lag {
            return 0.0;
        }
        self.values[phase % self.q][(lag + self.max_lag as isize) as usize]
    }

    /// `γ(t_i, 0)`: the per-phase power of a unit-power PAM signal.
    pub fn zero_lag(&self) -> Vec<f64> {
        (0..self.q).map(|i| self.at(i, 0)).collect()
    }

    pub fn lags(&self) -> impl Iterator<Item = isize> {
        let m = self.max_lag as isize;
        -m..=m
    }
}

pub fn aggregate_pulse(pulse: &Pulse) -> AggregatePulse {
    let q = pulse.q();
    let j_max = pulse.samples.len() - 1; // 2·span·Q: support of the product
    let c = pulse.center as isize;
    let n_len = pulse.samples.len() as isize;
    let mut values = vec![vec![0.0; 2 * j_max + 1]; q];
    for (i, row) in values.iter_mut().enumerate() {
        // all samples s ≡ i (mod Q) of p(t_i - nT)
        let mut s = i as isize - c;
        while s + c < n_len {
            let a = pulse.at(s);
            if a != 0.0 {
                for (jj, v) in row.iter_mut().enumerate() {
                    let j = jj as isize - j_max as isize;
                    let b = pulse.at(s - j);
                    if b != 0.0 {
                        *v += a * b;
                    }
                }
            }
            s += q as isize;
        }
    }
    AggregatePulse { q, max_lag: j_max, values }
}

/// Cycle-indexed Fourier coefficients `R^{(α)}(τ) = (1/T)∫₀ᵀ R(t,τ)e^{-j2παt/T}dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleCorrelation {
    pub alpha_max: usize,
    pub q: usize,
    pub max_lag: usize,
    /// `values[α + alpha_max][j + max_lag]`.
    pub values: Vec<Vec<C64>>,
}

impl CycleCorrelation {
    pub fn at(&self, alpha: i32, lag: isize) -> C64 {
        if alpha.unsigned_abs() as usize > self.alpha_max || lag.unsigned_abs() > self.max_lag {
            return C64::new(0.0, 0.0);
        }
        self.values[(alpha + self.alpha_max as i32) as usize][(lag + self.max_lag as isize) as usize]
    }

    pub fn alphas(&self) -> impl Iterator<Item = i32> {
        let a = self.alpha_max as i32;
        -a..=a
    }

    /// Continuous spectrum of the `α` coefficient, `(f, Γ^{(α)}(f))`.
    pub fn spectrum(&self, alpha: i32, nfft: usize) -> Vec<(f64, C64)> {
        let nfft = nfft.max(2 * self.max_lag + 1).next_power_of_two();
        let mut buf = vec![C64::new(0.0, 0.0); nfft];
        let m = self.max_lag as isize;
        for j in -m..=m {
            buf[j.rem_euclid(nfft as isize) as usize] += self.at(alpha, j) / self.q as f64;
        }
        dsp::fft_in_place(&mut buf);
        (0..nfft).map(|k| (dsp::bin_freq(k, nfft) * self.q as f64, buf[k])).collect()
    }
}

/// DFT over the `Q` phases of a periodic-in-`t` kernel, one lag at a time.
fn cycle_dft(q: usize, max_lag: usize, alpha_max: usize, f: impl Fn(usize, usize) -> C64) -> CycleCorrelation {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(q);
    let width = 2 * max_lag + 1;
    let mut values = vec![vec![C64::new(0.0, 0.0); width]; 2 * alpha_max + 1];
    let mut buf = vec![C64::new(0.0, 0.0); q];
    for jj in 0..width {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = f(i, jj);
        }
        fft.process(&mut buf);
        for (ai, row) in values.iter_mut().enumerate() {
            let alpha = ai as isize - alpha_max as isize;
            row[jj] = buf[alpha.rem_euclid(q as isize) as usize] / q as f64;
        }
    }
    CycleCorrelation { alpha_max, q, max_lag, values }
}

pub fn cycle_coefficients(gamma: &AggregatePulse, alpha_max: usize) -> CycleCorrelation {
    cycle_dft(gamma.q, gamma.max_lag, alpha_max, |i, jj| C64::new(gamma.values[i][jj], 0.0))
}

/// `γ^{(α)}_{3,ν}(τ)` for `ν = -1, 0, 1, 2` (in [`NUS`] order), from
/// `γ_{3,ν}(t, τ) = γ(t,τ)|γ(t,τ)|² e^{j2πνBτ}`.
pub fn third_degree_pulses(gamma: &AggregatePulse, bandwidth: f64, alpha_max: usize) -> [CycleCorrelation; 4] {
    let q = gamma.q as f64;
    let m = gamma.max_lag as isize;
    NUS.map(|nu| {
        cycle_dft(gamma.q, gamma.max_lag, alpha_max, |i, jj| {
            let g = gamma.values[i][jj];
            let tau = (jj as isize - m) as f64 / q;
            C64::from_polar(g * g * g, 2.0 * PI * nu as f64 * bandwidth * tau)
        })
    })
}

/// Sampled ambiguity function of one offset `ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityTable {
    pub nu: i32,
    pub lags: Vec<i64>,
    pub values: Vec<C64>,
    pub theta: Vec<f64>,
    pub dtft: Vec<C64>,
}

impl AmbiguityTable {
    pub fn at(&self, lag: i64) -> C64 {
        let l0 = self.lags[0];
        if lag < l0 || lag > *self.lags.last().unwrap() {
            return C64::new(0.0, 0.0);
        }
        self.values[(lag - l0) as usize]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// All four ambiguity tables plus the ingredients they came from.
#[derive(Debug, Clone)]
pub struct Ambiguity {
    pub spec: PulseSpec,
    pub tables: [AmbiguityTable; 4],
}

impl Ambiguity {
    /// `γ_{3,ν}[ℓ]`, zero outside the tabulated window.
    pub fn gamma(&self, nu: i32, lag: i64) -> C64 {
        if !(-1..=2).contains(&nu) {
            return C64::new(0.0, 0.0);
        }
        self.tables[nu_slot(nu)].at(lag)
    }

    pub fn table(&self, nu: i32) -> &AmbiguityTable {
        &self.tables[nu_slot(nu)]
    }

    pub fn max_lag(&self) -> i64 {
        *self.tables[0].lags.last().unwrap()
    }
}

/// Cycle-route evaluation of one ambiguity value:
/// `Σ_α e^{j2παt₀} ∫ γ^{(α)}_{3,ν}(v) γ^{(-α)}(v - ℓT) dv`.
fn ambiguity_value(g3: &CycleCorrelation, g1: &CycleCorrelation, lag: i64, t0: f64) -> C64 {
    let q = g3.q as isize;
    let m = g3.max_lag as isize;
    let shift = lag as isize * q;
    let mut acc = C64::new(0.0, 0.0);
    for alpha in g3.alphas() {
        if alpha.unsigned_abs() as usize > g1.alpha_max {
            continue;
        }
        let mut s = C64::new(0.0, 0.0);
        let lo = (-m).max(shift - g1.max_lag as isize);
        let hi = m.min(shift + g1.max_lag as isize);
        for v in lo..=hi {
            s += g3.at(alpha, v) * g1.at(-alpha, v - shift);
        }
        acc += s * C64::from_polar(1.0, 2.0 * PI * alpha as f64 * t0);
    }
    acc / q as f64
}

/// Matched-filtered, symbol-sampled third-degree kernels `γ_{3,ν}[ℓ]` for
/// `|ℓ| ≤ max_lag`, with their DTFT on [`DTFT_POINTS`] points (summed over
/// `|ℓ| ≤ 2·span`).
pub fn ambiguity_functions(spec: &PulseSpec, max_lag: usize) -> Result<Ambiguity> {
    if max_lag > spec.span {
        return domain(format!("lag window {max_lag} exceeds span {}", spec.span));
    }
    let pulse = rrc_pulse(spec)?;
    let gamma = aggregate_pulse(&pulse);
    let g1 = cycle_coefficients(&gamma, DEFAULT_ALPHA_MAX);
    let g3 = third_degree_pulses(&gamma, spec.bandwidth(), DEFAULT_ALPHA_MAX);
    let wide = 2 * spec.span as i64;
    let t0 = spec.sampling_offset;
    let theta: Vec<f64> = (0..DTFT_POINTS).map(|k| -0.5 + k as f64 / DTFT_POINTS as f64).collect();
    let tables = std::array::from_fn(|slot| {
        let nu = NUS[slot];
        let all: Vec<C64> = (-wide..=wide).map(|l| ambiguity_value(&g3[slot], &g1, l, t0)).collect();
        let dtft = theta
            .iter()
            .map(|&th| {
                (-wide..=wide)
                    .zip(&all)
                    .map(|(l, &v)| v * C64::from_polar(1.0, -2.0 * PI * th * l as f64))
                    .sum()
            })
            .collect();
        let lo = (wide - max_lag as i64) as usize;
        AmbiguityTable {
            nu,
            lags: (-(max_lag as i64)..=max_lag as i64).collect(),
            values: all[lo..lo + 2 * max_lag + 1].to_vec(),
            theta: theta.clone(),
            dtft,
        }
    });
    Ok(Ambiguity { spec: *spec, tables })
}

/// Direct double-sum evaluation of `γ_{3,ν}[ℓ]` from the matched-filter
/// definition, `(1/Q²) Σ_{s,s'} p(s-ℓQ) p(s') γ_{3,ν}(s, s-s')`. Independent
/// of the cycle route; used as an oracle.
pub fn ambiguity_direct(pulse: &Pulse, gamma: &AggregatePulse, nu: i32, lag: i64) -> C64 {
    let q = pulse.q() as isize;
    let c = pulse.center as isize;
    let bw = pulse.spec.bandwidth();
    let shift = lag as isize * q;
    let mut acc = C64::new(0.0, 0.0);
    for s in (shift - c)..=(shift + c) {
        let a = pulse.at(s - shift);
        if a == 0.0 {
            continue;
        }
        let phase = s.rem_euclid(q) as usize;
        for s2 in -c..=c {
            let tau = s - s2;
            let g = gamma.at(phase, tau);
            if g == 0.0 {
                continue;
            }
            let rot = C64::from_polar(1.0, 2.0 * PI * nu as f64 * bw * tau as f64 / q as f64);
            acc += rot * (a * pulse.at(s2) * g * g * g);
        }
    }
    acc / (q * q) as f64
}

/// Spectra `Γ^{(0)}_{3,ν}(f)` of the four third-degree pulses, optionally
/// weighted per `ν`; rows `(f, [Γ_{-1}, Γ_0, Γ_1, Γ_2])`.
pub fn third_degree_spectra(spec: &PulseSpec, nfft: usize, weights: [f64; 4]) -> Result<Vec<(f64, [f64; 4])>> {
    let pulse = rrc_pulse(spec)?;
    let gamma = aggregate_pulse(&pulse);
    let g3 = third_degree_pulses(&gamma, spec.bandwidth(), 0);
    let spectra: Vec<Vec<(f64, C64)>> = g3.iter().map(|g| g.spectrum(0, nfft)).collect();
    let mut rows: Vec<(f64, [f64; 4])> = (0..spectra[0].len())
        .map(|k| (spectra[0][k].0, std::array::from_fn(|s| spectra[s][k].1.re * weights[s])))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(PulseSpec::default().validate().is_ok());
        assert!(PulseSpec { roll_off: 1.5, ..Default::default() }.validate().is_err());
        assert!(PulseSpec { oversampling: 4, ..Default::default() }.validate().is_err());
        assert!(PulseSpec { span: 8, ..Default::default() }.validate().is_err());
        assert!(rrc_pulse(&PulseSpec { roll_off: -0.1, ..Default::default() }).is_err());
    }

    #[test]
    fn rrc_special_points() {
        // the analytic limits are continuous with their neighbourhoods
        for beta in [0.1, 0.22, 0.5, 1.0] {
            let t = 1.0 / (4.0 * beta);
            let near = rrc_value(beta, t + 1e-6);
            assert!((rrc_value(beta, t) - near).abs() < 1e-5);
            assert!((rrc_value(beta, 0.0) - rrc_value(beta, 1e-6)).abs() < 1e-6);
        }
        let p = rrc_pulse(&PulseSpec::rrc(0.0)).unwrap();
        let peak = p.samples.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(peak, p.samples[p.center]);
        assert!((p.energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn root_nyquist() {
        let spec = PulseSpec { oversampling: 32, ..PulseSpec::rrc(0.22) };
        let p = rrc_pulse(&spec).unwrap();
        for k in -8..=8 {
            assert!(p.nyquist_residual(k).abs() < 1e-4, "k={k}: {}", p.nyquist_residual(k));
        }
    }

    #[test]
    fn aggregate_properties() {
        let p = rrc_pulse(&PulseSpec::rrc(0.22)).unwrap();
        let g = aggregate_pulse(&p);
        let z = g.zero_lag();
        assert!(z.iter().all(|&v| v > 0.0));
        assert!((z.iter().sum::<f64>() / z.len() as f64 - 1.0).abs() < 1e-12);
        assert_eq!(g.at(3, 2 * 32 * 16 + 1), 0.0);
        let c = cycle_coefficients(&g, 4);
        assert!((c.at(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-12);
        for a in 1..=4 {
            for j in -20..=20 {
                assert!((c.at(-a, j) - c.at(a, j).conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn cycle_route_matches_direct() {
        let spec = PulseSpec { span: 16, ..PulseSpec::rrc(0.22) };
        let p = rrc_pulse(&spec).unwrap();
        let g = aggregate_pulse(&p);
        let amb = ambiguity_functions(&spec, 3).unwrap();
        for nu in [-1, 0, 1] {
            for l in [0, 1, -2] {
                let d = ambiguity_direct(&p, &g, nu, l);
                assert!((d - amb.gamma(nu, l)).norm() < 1e-12, "nu={nu} l={l} {d} {}", amb.gamma(nu, l));
            }
        }
    }
}
