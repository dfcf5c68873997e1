//! Oversampled waveform Monte Carlo of the uplink chain.
//!
//! Symbols are CN(0,1), shaped by the RRC pulse on the `T/Q` grid, sent
//! through the channel (blocker shifted up by `B`), amplified per antenna,
//! matched filtered at `t = nT` and combined with MRC. Each realization has
//! `N` decoded symbols plus a guard of `2·span` symbols on either side that
//! never reaches an estimator.
//!
//! Waveform sample `j` sits at `t = (j - c)/Q` with `c = span·Q`, so the
//! cyclostationary phase of sample `j` is `j mod Q`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplifier::{AmpRecord, PolynomialModel, GAN_P1DB};
use crate::analysis;
use crate::channel::{
    draw_deviated_gains_at, draw_multipath_channel, los_channel, ChannelMatrix, ClusterParams, DeviationModel,
    MultipathChannel, MultipathScenario, UlaLosScenario,
};
use crate::dsp;
use crate::error::{Error, Result};
use crate::pulses::{aggregate_pulse, ambiguity_functions, rrc_pulse, Pulse, PulseSpec};
use crate::rng::{self, streams};
use crate::stats::{self, ComplexEstimate};
use crate::C64;

use std::f64::consts::PI;

/// Batches used for all correlated-sequence standard errors.
pub const BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// Flat far-field ULA; powers come from the scenario.
    Los { scenario: UlaLosScenario },
    /// Cluster channel; geometry is fixed by `geometry_seed`, path phases are
    /// fresh for every realization.
    Multipath { params: ClusterParams, antennas: usize, powers: Vec<f64>, geometry_seed: u64 },
}

impl ChannelSpec {
    pub fn antennas(&self) -> usize {
        match self {
            ChannelSpec::Los { scenario } => scenario.antennas,
            ChannelSpec::Multipath { antennas, .. } => *antennas,
        }
    }

    pub fn powers(&self) -> &[f64] {
        match self {
            ChannelSpec::Los { scenario } => &scenario.powers,
            ChannelSpec::Multipath { powers, .. } => powers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AmpSpec {
    Linear { gain: C64 },
    /// One polynomial model shared by all antennas.
    Shared { model: AmpRecord },
    PerAntenna { models: Vec<AmpRecord> },
    /// `a₁u + a₃(u|u|² - 2σ²(t)u)` with the exact per-phase input variance:
    /// a pure third-degree Hermite amplifier, used as the analysis oracle.
    ThirdDegree { a1: C64, a3: C64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub channel: ChannelSpec,
    pub amp: AmpSpec,
    #[serde(default)]
    pub deviation: Option<DeviationModel>,
    #[serde(default)]
    pub pulse: PulseSpec,
    pub symbols: usize,
    pub realizations: usize,
    /// `N₀` with `T = 1`: the noise power after the matched filter.
    #[serde(default)]
    pub noise_psd: f64,
    pub master_seed: u64,
    #[serde(default = "default_users")]
    pub decode_users: Vec<usize>,
    /// Lags at which `R_{e_k e_k}` is estimated.
    #[serde(default)]
    pub error_lags: Vec<i64>,
    /// `(m, m', ℓ)` entries of the distortion correlation to estimate.
    #[serde(default)]
    pub distortion_pairs: Vec<(usize, usize, i64)>,
}

fn default_users() -> Vec<usize> {
    vec![0]
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.pulse.validate()?;
        let m = self.channel.antennas();
        let tx = self.channel.powers().len();
        if m == 0 || tx < 2 {
            return Err(Error::Config("need an antenna and at least one user plus the blocker slot".into()));
        }
        if let ChannelSpec::Los { scenario } = &self.channel {
            scenario.validate()?;
        }
        if self.symbols < 1000 {
            return Err(Error::Config(format!("symbols = {} below 1000", self.symbols)));
        }
        if self.realizations == 0 {
            return Err(Error::Config("need at least one realization".into()));
        }
        if !(self.noise_psd >= 0.0) {
            return Err(Error::Config("noise_psd must be non-negative".into()));
        }
        if self.decode_users.iter().any(|&k| k + 1 >= tx) {
            return Err(Error::Config("decode_users must index served users".into()));
        }
        if self.distortion_pairs.iter().any(|&(a, b, _)| a >= m || b >= m) {
            return Err(Error::Config("distortion pair antenna out of range".into()));
        }
        let span = self.pulse.span as i64;
        if self.error_lags.iter().chain(self.distortion_pairs.iter().map(|p| &p.2)).any(|l| l.abs() > span) {
            return Err(Error::Config("correlation lag beyond the guard interval".into()));
        }
        match &self.amp {
            AmpSpec::PerAntenna { models } if models.len() != m => {
                return Err(Error::Config(format!("{} amplifier models for {m} antennas", models.len())));
            }
            AmpSpec::ThirdDegree { .. } if matches!(self.channel, ChannelSpec::Multipath { .. }) => {
                return Err(Error::Config("the third-degree oracle amplifier needs a flat channel".into()));
            }
            _ => {}
        }
        if self.deviation.is_some() && !matches!(self.amp, AmpSpec::ThirdDegree { .. }) {
            return Err(Error::Config("amplifier deviation is only defined for the third-degree amplifier".into()));
        }
        if let Some(d) = &self.deviation {
            d.validate()?;
        }
        Ok(())
    }

    /// Bytes held at peak by one realization (transmit waveforms dominate).
    pub fn memory_estimate(&self) -> usize {
        let tx = self.channel.powers().len();
        let len = (self.symbols + 4 * self.pulse.span) * self.pulse.oversampling;
        16 * len * (tx + 4 + self.decode_users.len() * 2)
    }
}

/// Sample layout of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub q: usize,
    pub center: usize,
    pub total_symbols: usize,
    pub guard: usize,
    pub len: usize,
}

impl Layout {
    fn new(spec: &PulseSpec, symbols: usize) -> Self {
        let q = spec.oversampling;
        let center = spec.span * q;
        let guard = 2 * spec.span;
        let total_symbols = symbols + 2 * guard;
        Self { q, center, total_symbols, guard, len: (total_symbols - 1) * q + 2 * center + 1 }
    }

    /// Decoded symbol indices.
    pub fn decoded(&self) -> std::ops::Range<usize> {
        self.guard..self.total_symbols - self.guard
    }

    /// Sample index of `t = nT`.
    pub fn sample_of(&self, n: usize) -> usize {
        n * self.q + self.center
    }

    fn interior(&self) -> std::ops::Range<usize> {
        self.sample_of(self.guard)..self.sample_of(self.total_symbols - self.guard)
    }
}

/// Transmit side of one realization; antenna inputs are produced lazily.
pub struct Uplink {
    pub layout: Layout,
    pub symbols: Vec<Vec<C64>>,
    /// `√P_k`-scaled, shifted transmit waveforms.
    pub waveforms: Vec<Vec<C64>>,
    pub channel: ChannelKind,
    /// Symbol-rate channel used by the decoder.
    pub effective: ChannelMatrix,
    noise: f64,
    seed: u64,
    realization: u64,
    band_edge: f64,
}

pub enum ChannelKind {
    Flat(ChannelMatrix),
    Multipath(MultipathChannel),
}

impl Uplink {
    pub fn antennas(&self) -> usize {
        self.effective[0].len()
    }

    /// `u_m` on the sample grid, noise included.
    pub fn antenna_input(&self, m: usize) -> Vec<C64> {
        let len = self.layout.len;
        let mut u = vec![C64::new(0.0, 0.0); len];
        match &self.channel {
            ChannelKind::Flat(h) => {
                for (k, w) in self.waveforms.iter().enumerate() {
                    let g = h[k][m];
                    for (x, s) in u.iter_mut().zip(w) {
                        *x += g * s;
                    }
                }
            }
            ChannelKind::Multipath(ch) => {
                for (k, w) in self.waveforms.iter().enumerate() {
                    for (d, g) in ch.antenna_taps(k, m) {
                        for (x, s) in u[d.min(len)..].iter_mut().zip(w) {
                            *x += g * s;
                        }
                    }
                }
            }
        }
        if self.noise > 0.0 {
            let stream = (streams::NOISE << 32) | m as u64;
            let mut r = rng::stream(self.seed, self.realization, stream);
            for (x, z) in u.iter_mut().zip(band_limited_noise(&mut r, len, self.noise, self.layout.q, self.band_edge)) {
                *x += z;
            }
        }
        u
    }
}

/// Complex Gaussian noise with flat PSD `n0` over `|f| ≤ edge` (units of
/// `1/T`) on a grid of `q` samples per symbol.
pub fn band_limited_noise<R: rand::Rng>(r: &mut R, len: usize, n0: f64, q: usize, edge: f64) -> Vec<C64> {
    let n = len.next_power_of_two();
    let sd = (n0 * q as f64).sqrt();
    let mut buf: Vec<C64> = (0..n).map(|_| rng::cn(r) * sd).collect();
    dsp::fft_in_place(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        if (dsp::bin_freq(k, n) * q as f64).abs() > edge {
            *b = C64::new(0.0, 0.0);
        }
    }
    dsp::ifft_in_place(&mut buf);
    buf.truncate(len);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|x| *x *= s);
    buf
}

fn shaped(symbols: &[C64], pulse: &Pulse, q: usize) -> Vec<C64> {
    let mut up = vec![C64::new(0.0, 0.0); (symbols.len() - 1) * q + 1];
    for (n, &x) in symbols.iter().enumerate() {
        up[n * q] = x;
    }
    dsp::convolve_real(&up, &pulse.samples)
}

/// Build the transmit side of realization `realization`.
pub fn generate_uplink(cfg: &SimConfig, realization: u64) -> Result<Uplink> {
    cfg.validate()?;
    let pulse = rrc_pulse(&cfg.pulse)?;
    uplink_with_pulse(cfg, &pulse, realization)
}

fn uplink_with_pulse(cfg: &SimConfig, pulse: &Pulse, realization: u64) -> Result<Uplink> {
    let layout = Layout::new(&cfg.pulse, cfg.symbols);
    let powers = cfg.channel.powers();
    let blocker = powers.len() - 1;
    let b = cfg.pulse.bandwidth();
    let q = layout.q;
    let mut symbols = Vec::new();
    let mut waveforms = Vec::new();
    for (k, &p) in powers.iter().enumerate() {
        let mut r = rng::stream(cfg.master_seed, realization, (streams::SYMBOLS << 32) | k as u64);
        let x = rng::cn_vec(&mut r, layout.total_symbols);
        let mut w = shaped(&x, pulse, q);
        let amp = p.sqrt();
        for (j, s) in w.iter_mut().enumerate() {
            *s *= amp;
            if k == blocker {
                let t = (j as f64 - layout.center as f64) / q as f64;
                *s *= C64::from_polar(1.0, 2.0 * PI * b * t);
            }
        }
        symbols.push(x);
        waveforms.push(w);
    }
    let (channel, effective) = match &cfg.channel {
        ChannelSpec::Los { scenario } => {
            let h = los_channel(scenario)?;
            (ChannelKind::Flat(h.clone()), h)
        }
        ChannelSpec::Multipath { params, antennas, powers, geometry_seed } => {
            let s = MultipathScenario::draw(params, powers.len(), *geometry_seed)?;
            let ch = draw_multipath_channel(&s, *antennas, q, realization)?;
            let eff = ch.effective_flat(pulse);
            (ChannelKind::Multipath(ch), eff)
        }
    };
    Ok(Uplink {
        layout,
        symbols,
        waveforms,
        channel,
        effective,
        noise: cfg.noise_psd,
        seed: cfg.master_seed,
        realization,
        band_edge: 1.5 * b,
    })
}

/// Per-antenna amplifier as realised for one run.
#[derive(Debug, Clone)]
pub enum Lna {
    Linear(C64),
    Polynomial(PolynomialModel),
    ThirdDegree { a1: C64, a3: C64, variance: Vec<f64> },
}

impl Lna {
    /// Amplify `u` (input power `sigma_sq`, time averaged); returns the
    /// output and the first-degree coefficient used for the decomposition.
    pub fn apply(&self, u: &[C64], sigma_sq: f64) -> Result<(Vec<C64>, C64)> {
        Ok(match self {
            Lna::Linear(g) => (u.iter().map(|x| g * x).collect(), *g),
            Lna::Polynomial(model) => {
                let a1 = if sigma_sq > 0.0 { model.hermite_at_power(sigma_sq)?.a1() } else { model.coeff(1) };
                (u.iter().map(|&x| model.eval(x)).collect(), a1)
            }
            Lna::ThirdDegree { a1, a3, variance } => {
                let q = variance.len();
                let y = u
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| a1 * x + a3 * x * (x.norm_sqr() - 2.0 * variance[j % q]))
                    .collect();
                (y, *a1)
            }
        })
    }
}

/// Build the per-antenna amplifiers for one realization.
pub fn realize_lnas(cfg: &SimConfig, effective: &ChannelMatrix, realization: u64) -> Result<Vec<Lna>> {
    let m = effective[0].len();
    Ok(match &cfg.amp {
        AmpSpec::Linear { gain } => vec![Lna::Linear(*gain); m],
        AmpSpec::Shared { model } => vec![Lna::Polynomial(model.to_model()?); m],
        AmpSpec::PerAntenna { models } => {
            models.iter().map(|r| Ok(Lna::Polynomial(r.to_model()?))).collect::<Result<_>>()?
        }
        AmpSpec::ThirdDegree { a1, a3 } => {
            let pulse = rrc_pulse(&cfg.pulse)?;
            let gamma0 = aggregate_pulse(&pulse).zero_lag();
            let powers = cfg.channel.powers();
            let a3s = match &cfg.deviation {
                None => vec![*a3; m],
                Some(d) => {
                    let model = DeviationModel { base_a3: *a3 * a1.conj(), ..*d };
                    draw_deviated_gains_at(&model, m, realization)?.into_iter().map(|c| c / a1.conj()).collect()
                }
            };
            (0..m)
                .map(|i| {
                    let p: f64 = (0..powers.len()).map(|k| powers[k] * effective[k][i].norm_sqr()).sum();
                    Lna::ThirdDegree { a1: *a1, a3: a3s[i], variance: gamma0.iter().map(|g| g * p).collect() }
                })
                .collect()
        }
    })
}

/// Amplifier outputs per antenna, their input variances and effective `a₁`.
pub type LnaOutputs = (Vec<Vec<C64>>, Vec<f64>, Vec<C64>);

/// Apply the amplifiers to all antenna inputs; returns outputs and the
/// time-averaged input powers `σ²_{u_m}`.
pub fn apply_lnas(lnas: &[Lna], u: &[Vec<C64>], layout: &Layout) -> Result<LnaOutputs> {
    let mut ys = Vec::with_capacity(u.len());
    let mut sig = Vec::with_capacity(u.len());
    let mut a1 = Vec::with_capacity(u.len());
    for (lna, um) in lnas.iter().zip(u) {
        let s = mean_power(um, layout);
        let (y, a) = lna.apply(um, s)?;
        ys.push(y);
        sig.push(s);
        a1.push(a);
    }
    Ok((ys, sig, a1))
}

fn mean_power(u: &[C64], layout: &Layout) -> f64 {
    let r = layout.interior();
    let n = r.len() as f64;
    u[r].iter().map(|x| x.norm_sqr()).sum::<f64>() / n
}

/// `(1/T)(p(-τ) ⋆ y)(nT)` for every decoded symbol `n`.
pub fn matched_filter(y: &[C64], pulse: &Pulse, layout: &Layout) -> Vec<C64> {
    let c = pulse.center;
    let q = pulse.q() as f64;
    layout
        .decoded()
        .map(|n| {
            let j = layout.sample_of(n);
            let seg = &y[j - c..=j + c];
            seg.iter().zip(&pulse.samples).map(|(y, p)| y * *p).sum::<C64>() / q
        })
        .collect()
}

pub fn matched_filter_sample(y: &[Vec<C64>], pulse: &Pulse, layout: &Layout) -> Vec<Vec<C64>> {
    y.iter().map(|ym| matched_filter(ym, pulse, layout)).collect()
}

/// UatF moments and error statistics of one decoded user.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserMoments {
    pub user: usize,
    /// `Ê[x̂ x*]`.
    pub cross: C64,
    /// `Ê[|x̂|²]`.
    pub estimate_power: f64,
    /// `Ê[|x|²]`.
    pub symbol_power: f64,
    pub sinr: f64,
    pub rate: f64,
    /// Batch means of `e[n]e*[n-ℓ]` for each configured lag.
    pub error_batches: Vec<Vec<C64>>,
}

impl UserMoments {
    fn from_samples(user: usize, xhat: &[C64], x: &[C64], e: &[C64], lags: &[i64]) -> Self {
        let n = xhat.len() as f64;
        let cross = xhat.iter().zip(x).map(|(a, b)| a * b.conj()).sum::<C64>() / n;
        let estimate_power = xhat.iter().map(|a| a.norm_sqr()).sum::<f64>() / n;
        let symbol_power = x.iter().map(|a| a.norm_sqr()).sum::<f64>() / n;
        // Sample form of |E x̂x*|² / (E|x̂|² E|x|² - |E x̂x*|²).
        let den = estimate_power * symbol_power - cross.norm_sqr();
        let sinr = if den > 0.0 { cross.norm_sqr() / den } else { f64::INFINITY };
        let error_batches = lags.iter().map(|&l| lagged_batches(e, l)).collect();
        Self { user, cross, estimate_power, symbol_power, sinr, rate: (1.0 + sinr).log2(), error_batches }
    }
}

/// Batch means of `a[n] b*[n-ℓ]` over the overlap.
fn lagged_products(a: &[C64], b: &[C64], lag: i64) -> Vec<C64> {
    let l = lag.unsigned_abs() as usize;
    if lag >= 0 {
        a[l..].iter().zip(b).map(|(x, y)| x * y.conj()).collect()
    } else {
        a.iter().zip(&b[l..]).map(|(x, y)| x * y.conj()).collect()
    }
}

fn lagged_batches(e: &[C64], lag: i64) -> Vec<C64> {
    batch_means(&lagged_products(e, e, lag))
}

fn batch_means(xs: &[C64]) -> Vec<C64> {
    let len = xs.len() / BATCHES;
    xs.chunks_exact(len.max(1)).take(BATCHES).map(|c| c.iter().sum::<C64>() / c.len() as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub m: usize,
    pub m2: usize,
    pub lag: i64,
    pub batches: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizationResult {
    pub realization: u64,
    pub users: Vec<UserMoments>,
    pub antenna_power: Vec<f64>,
    pub pairs: Vec<PairCorrelation>,
}

/// Decode already matched-filtered antenna outputs (explicit pipeline).
#[allow(clippy::too_many_arguments)]
pub fn decode_and_estimate(
    cfg: &SimConfig,
    uplink: &Uplink,
    y: &[Vec<C64>],
    d: &[Vec<C64>],
    a1: &[C64],
    antenna_power: Vec<f64>,
) -> Result<RealizationResult> {
    let range = uplink.layout.decoded();
    let mut users = Vec::new();
    for &k in &cfg.decode_users {
        let w = crate::channel::mrc_weights(&uplink.effective[k], a1)?;
        let combine = |z: &[Vec<C64>]| -> Vec<C64> {
            (0..z[0].len()).map(|n| z.iter().zip(&w).map(|(zm, wm)| wm * zm[n]).sum()).collect()
        };
        let xhat = combine(y);
        let e = combine(d);
        users.push(UserMoments::from_samples(k, &xhat, &uplink.symbols[k][range.clone()], &e, &cfg.error_lags));
    }
    let pairs = cfg
        .distortion_pairs
        .iter()
        .map(|&(m, m2, lag)| PairCorrelation { m, m2, lag, batches: batch_means(&lagged_products(&d[m], &d[m2], lag)) })
        .collect();
    Ok(RealizationResult { realization: uplink.realization, users, antenna_power, pairs })
}

/// One realization, streamed antenna by antenna (memory `O(K·samples)`).
pub fn run_realization(cfg: &SimConfig, pulse: &Pulse, realization: u64) -> Result<RealizationResult> {
    let up = uplink_with_pulse(cfg, pulse, realization)?;
    let lnas = realize_lnas(cfg, &up.effective, realization)?;
    let layout = up.layout;
    let m_count = up.antennas();
    let nu = cfg.decode_users.len();
    let zero = C64::new(0.0, 0.0);
    let mut comb_y = vec![vec![zero; layout.len]; nu];
    let mut comb_d = vec![vec![zero; layout.len]; nu];
    let mut pair_mf: Vec<Option<Vec<C64>>> = vec![None; m_count];
    let mut antenna_power = Vec::with_capacity(m_count);
    for m in 0..m_count {
        let u = up.antenna_input(m);
        let s = mean_power(&u, &layout);
        let (y, a1) = lnas[m].apply(&u, s)?;
        antenna_power.push(s);
        for (i, &k) in cfg.decode_users.iter().enumerate() {
            let w = (a1 * up.effective[k][m]).conj();
            for j in 0..layout.len {
                comb_y[i][j] += w * y[j];
                comb_d[i][j] += w * (y[j] - a1 * u[j]);
            }
        }
        if cfg.distortion_pairs.iter().any(|&(a, b, _)| a == m || b == m) {
            let d: Vec<C64> = y.iter().zip(&u).map(|(y, u)| y - a1 * u).collect();
            pair_mf[m] = Some(matched_filter(&d, pulse, &layout));
        }
    }
    let range = layout.decoded();
    let users = cfg
        .decode_users
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let xhat = matched_filter(&comb_y[i], pulse, &layout);
            let e = matched_filter(&comb_d[i], pulse, &layout);
            UserMoments::from_samples(k, &xhat, &up.symbols[k][range.clone()], &e, &cfg.error_lags)
        })
        .collect();
    let pairs = cfg
        .distortion_pairs
        .iter()
        .map(|&(m, m2, lag)| {
            let a = pair_mf[m].as_ref().expect("filtered above");
            let b = pair_mf[m2].as_ref().expect("filtered above");
            PairCorrelation { m, m2, lag, batches: batch_means(&lagged_products(a, b, lag)) }
        })
        .collect();
    Ok(RealizationResult { realization, users, antenna_power, pairs })
}

/// All realizations, in parallel on the current rayon pool; the result
/// order (and every bit of it) is independent of the thread count.
pub fn run(cfg: &SimConfig) -> Result<Vec<RealizationResult>> {
    cfg.validate()?;
    let pulse = rrc_pulse(&cfg.pulse)?;
    (0..cfg.realizations as u64).into_par_iter().map(|r| run_realization(cfg, &pulse, r)).collect()
}

/// Pool the batch means of several realizations into one estimate.
pub fn pooled_estimate<'a>(batches: impl IntoIterator<Item = &'a Vec<C64>>) -> ComplexEstimate {
    let all: Vec<C64> = batches.into_iter().flatten().copied().collect();
    stats::complex_batch_estimate(&all, all.len())
}

/// `R_{e_k e_k}[ℓ]` pooled over realizations for decoded user slot `i`.
pub fn pooled_error_autocorrelation(results: &[RealizationResult], i: usize, lag_index: usize) -> ComplexEstimate {
    pooled_estimate(results.iter().map(|r| &r.users[i].error_batches[lag_index]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelType {
    Los,
    FrequencySelective,
}

impl ChannelType {
    pub fn name(self) -> &'static str {
        match self {
            ChannelType::Los => "los",
            ChannelType::FrequencySelective => "frequency-selective",
        }
    }
}

/// One served user plus an adjacent-band blocker, amplifiers run
/// `backoff_db` below the one-dB compression point on average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateExperiment {
    pub channel_type: ChannelType,
    pub blocker_db: f64,
    pub symbols: usize,
    pub realizations: usize,
    pub seed: u64,
    #[serde(default)]
    pub noise_psd: f64,
    #[serde(default = "default_backoff")]
    pub backoff_db: f64,
    #[serde(default)]
    pub pulse: PulseSpec,
}

fn default_backoff() -> f64 {
    8.0
}

impl RateExperiment {
    pub fn preset(channel_type: ChannelType, blocker_db: f64, seed: u64) -> Self {
        Self {
            channel_type,
            blocker_db,
            symbols: 2000,
            realizations: 5,
            seed,
            noise_psd: 0.0,
            backoff_db: default_backoff(),
            pulse: PulseSpec::default(),
        }
    }

    /// `(P_user, P_blocker)` with total received power at the operating point.
    pub fn powers(&self) -> (f64, f64) {
        let total = GAN_P1DB * stats::from_db10(-self.backoff_db);
        let ratio = stats::from_db10(-self.blocker_db);
        let pb = total / (1.0 + ratio);
        (pb * ratio, pb)
    }

    pub fn config(&self, antennas: usize) -> SimConfig {
        let (p1, pb) = self.powers();
        let params = match self.channel_type {
            ChannelType::Los => ClusterParams::line_of_sight(),
            ChannelType::FrequencySelective => ClusterParams::frequency_selective(),
        };
        SimConfig {
            channel: ChannelSpec::Multipath { params, antennas, powers: vec![p1, pb], geometry_seed: self.seed },
            amp: AmpSpec::Shared { model: AmpRecord::from_model(&crate::amplifier::gan_reference_model()) },
            deviation: None,
            pulse: self.pulse,
            symbols: self.symbols,
            realizations: self.realizations,
            noise_psd: self.noise_psd,
            master_seed: self.seed,
            decode_users: vec![0],
            error_lags: vec![],
            distortion_pairs: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub antennas: usize,
    pub mean_rate: f64,
    pub stderr: f64,
    pub blocker_db: f64,
    pub channel_type: ChannelType,
    /// Third-degree closed form on the realised flat channel (LOS only).
    pub analytic_rate: Option<f64>,
}

/// Mean rate for each array size; the geometry is shared across sizes.
pub fn rate_vs_antennas(exp: &RateExperiment, antennas: &[usize]) -> Result<Vec<RatePoint>> {
    if antennas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("antenna list must be ascending".into()));
    }
    let amb = ambiguity_functions(&exp.pulse, 0)?;
    antennas
        .iter()
        .map(|&m| {
            let cfg = exp.config(m);
            let results = run(&cfg)?;
            let rates: Vec<f64> = results.iter().map(|r| r.users[0].rate).collect();
            let (mean_rate, stderr) = stats::mean_se(&rates);
            let analytic_rate = match exp.channel_type {
                ChannelType::Los => Some(analytic_rate(&cfg, &amb)?),
                ChannelType::FrequencySelective => None,
            };
            Ok(RatePoint {
                antennas: m,
                mean_rate,
                stderr: if stderr.is_nan() { 0.0 } else { stderr },
                blocker_db: exp.blocker_db,
                channel_type: exp.channel_type,
                analytic_rate,
            })
        })
        .collect()
}

/// Third-degree closed-form rate of user 0 on realization 0's flat channel.
pub fn analytic_rate(cfg: &SimConfig, amb: &crate::pulses::Ambiguity) -> Result<f64> {
    let pulse = rrc_pulse(&cfg.pulse)?;
    let up = uplink_with_pulse(cfg, &pulse, 0)?;
    let h = &up.effective;
    let powers = cfg.channel.powers();
    let model = match &cfg.amp {
        AmpSpec::Shared { model } => model.to_model()?,
        _ => return Err(Error::Config("analytic rate needs a shared polynomial amplifier".into())),
    };
    let m = h[0].len();
    let mut a1 = Vec::with_capacity(m);
    let mut a3 = Vec::with_capacity(m);
    for i in 0..m {
        let s: f64 = (0..powers.len()).map(|k| powers[k] * h[k][i].norm_sqr()).sum();
        let c = model.hermite_at_power(s)?;
        a1.push(c.a1());
        a3.push(c.a3());
    }
    let w = crate::channel::mrc_weights(&h[0], &a1)?;
    let gain: f64 = (0..m).map(|i| a1[i].norm_sqr() * h[0][i].norm_sqr()).sum();
    let noise: f64 = cfg.noise_psd * (0..m).map(|i| (w[i] * a1[i]).norm_sqr()).sum::<f64>();
    let d = analysis::error_autocorrelation_fast(h, &a3, &w, powers, amb, &[0])?.values[0].re;
    Ok(analysis::effective_sinr(0, gain * gain, 0.0, noise, d, powers[0])?.rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(amp: AmpSpec, powers: Vec<f64>) -> SimConfig {
        let n = powers.len();
        SimConfig {
            channel: ChannelSpec::Los {
                scenario: UlaLosScenario {
                    antennas: 2,
                    users: n - 1,
                    sine_angles: (0..n).map(|k| 0.7 * k as f64 - 0.2).collect(),
                    powers,
                    spacing: 0.5,
                },
            },
            amp,
            deviation: None,
            pulse: PulseSpec { span: 16, ..PulseSpec::default() },
            symbols: 2000,
            realizations: 1,
            noise_psd: 0.0,
            master_seed: 3,
            decode_users: vec![0],
            error_lags: vec![0],
            distortion_pairs: vec![],
        }
    }

    #[test]
    fn linear_chain_recovers_symbols() {
        let cfg = small(AmpSpec::Linear { gain: C64::new(1.0, 0.0) }, vec![1.0, 0.0]);
        let up = generate_uplink(&cfg, 0).unwrap();
        let pulse = rrc_pulse(&cfg.pulse).unwrap();
        let u: Vec<_> = (0..2).map(|m| up.antenna_input(m)).collect();
        let y = matched_filter_sample(&u, &pulse, &up.layout);
        let x = &up.symbols[0][up.layout.decoded()];
        let h = &up.effective;
        let err: f64 = y[1].iter().zip(x).map(|(a, b)| (a - h[0][1] * b).norm_sqr()).sum::<f64>();
        let sig: f64 = x.iter().map(|b| b.norm_sqr()).sum();
        assert!((err / sig).sqrt() < 1e-3, "{}", (err / sig).sqrt());
        let r = run(&cfg).unwrap();
        assert!(r[0].users[0].sinr > 1e4);
    }

    #[test]
    fn blocker_is_filtered_out() {
        let cfg = small(AmpSpec::Linear { gain: C64::new(1.0, 0.0) }, vec![0.0, 1.0]);
        let up = generate_uplink(&cfg, 0).unwrap();
        let pulse = rrc_pulse(&cfg.pulse).unwrap();
        let y = matched_filter(&up.antenna_input(0), &pulse, &up.layout);
        let p = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        assert!(p < 1e-6, "{p}");
        let zero = small(AmpSpec::Linear { gain: C64::new(1.0, 0.0) }, vec![0.0, 0.0]);
        let up = generate_uplink(&zero, 0).unwrap();
        assert!(up.antenna_input(1).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn noise_level_after_filter() {
        let mut cfg = small(AmpSpec::Linear { gain: C64::new(1.0, 0.0) }, vec![0.0, 0.0]);
        cfg.noise_psd = 0.3;
        cfg.symbols = 8000;
        let up = generate_uplink(&cfg, 0).unwrap();
        let pulse = rrc_pulse(&cfg.pulse).unwrap();
        let y = matched_filter(&up.antenna_input(0), &pulse, &up.layout);
        let p: Vec<f64> = y.iter().map(|v| v.norm_sqr()).collect();
        let (m, se) = stats::batch_mean_se(&p, BATCHES);
        assert!((m - 0.3).abs() < 4.0 * se, "{m} ± {se}");
    }

    #[test]
    fn deterministic_under_threads() {
        let mut cfg = small(
            AmpSpec::Shared { model: AmpRecord::from_model(&crate::amplifier::gan_reference_model()) },
            vec![0.2, 0.3],
        );
        cfg.realizations = 3;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run(&cfg).unwrap());
        let many = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| run(&cfg).unwrap());
        assert_eq!(one, many);
        for r in &one {
            let u = &r.users[0];
            assert!(u.cross.norm_sqr() <= u.estimate_power * u.symbol_power);
        }
    }
}
