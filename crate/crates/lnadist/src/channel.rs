//! Channels and array geometry.
//!
//! Transmitter indices are 0-based; by convention the blocker (if any) is
//! the last row of a channel matrix. Antenna phases use `m = 1..=M`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::pulses::Pulse;
use crate::rng::{self, streams};
use crate::C64;

use std::f64::consts::PI;

/// Rows are transmitters, columns antennas.
pub type ChannelMatrix = Vec<Vec<C64>>;

/// Far-field uniform linear array with line-of-sight users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UlaLosScenario {
    pub antennas: usize,
    /// Served users `K`; `sine_angles` and `powers` have `K + 1` entries, the
    /// last one being the blocker.
    pub users: usize,
    /// Normalised sine angles `φ_k = -2π sin(θ_k) Δ/λ`.
    pub sine_angles: Vec<f64>,
    /// Received powers (linear), blocker last; zero means absent.
    pub powers: Vec<f64>,
    /// Antenna spacing in wavelengths.
    pub spacing: f64,
}

impl UlaLosScenario {
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return domain("need at least one antenna");
        }
        if self.sine_angles.len() != self.users + 1 || self.powers.len() != self.users + 1 {
            return Err(Error::Dimension(format!(
                "{} users need {} angles and powers (blocker last)",
                self.users,
                self.users + 1
            )));
        }
        if self.powers.iter().any(|&p| !(p >= 0.0)) {
            return domain("powers must be non-negative");
        }
        Ok(())
    }

    /// Sine angle from an incidence angle in degrees.
    pub fn sine_angle(theta_deg: f64, spacing: f64) -> f64 {
        -2.0 * PI * theta_deg.to_radians().sin() * spacing
    }
}

/// `h_km = e^{jmφ_k}`.
pub fn los_channel(s: &UlaLosScenario) -> Result<ChannelMatrix> {
    s.validate()?;
    Ok(s.sine_angles.iter().map(|&phi| ula_row(phi, s.antennas)).collect())
}

pub fn ula_row(phi: f64, antennas: usize) -> Vec<C64> {
    (1..=antennas).map(|m| C64::from_polar(1.0, m as f64 * phi)).collect()
}

/// `h̄_{kk'k''m} = h_{km} h_{k'm} h*_{k''m}`.
pub fn composite_channel(h: &ChannelMatrix, k: usize, k1: usize, k2: usize) -> Result<Vec<C64>> {
    let n = h.len();
    if k >= n || k1 >= n || k2 >= n {
        return Err(Error::Dimension(format!("transmitter index out of range ({n} rows)")));
    }
    Ok(h[k].iter().zip(&h[k1]).zip(&h[k2]).map(|((a, b), c)| a * b * c.conj()).collect())
}

fn wrap_pi(phi: f64) -> f64 {
    let x = phi.rem_euclid(2.0 * PI);
    if x > PI { x - 2.0 * PI } else { x }
}

/// `g(φ) = |Σ_{m=1}^{M} e^{jmφ}|²` via the Dirichlet kernel.
pub fn array_gain(phi: f64, antennas: usize) -> f64 {
    let m = antennas as f64;
    let x = wrap_pi(phi);
    let s = (x / 2.0).sin();
    if s.abs() < 1e-7 {
        // second-order expansion around the main-lobe peak
        return m * m * (1.0 - (m * m - 1.0) * x * x / 12.0);
    }
    let n = (m * x / 2.0).sin();
    (n * n) / (s * s)
}

/// `ψ(φ) = 2/(1 - cos φ)`, an upper envelope of `g` for every `M`.
pub fn array_gain_envelope(phi: f64) -> Result<f64> {
    let d = 1.0 - phi.cos();
    if d.abs() < 1e-15 {
        return domain("envelope diverges at φ ≡ 0");
    }
    Ok(2.0 / d)
}

/// Amplifier spread around a common third-degree behaviour:
/// `a_{3m} a*_{1m} = √(1-η) a₃ + α_m`, `α_m ~ CN(0, η|a₃|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationModel {
    pub eta: f64,
    pub base_a3: C64,
    pub seed: u64,
}

impl DeviationModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return domain(format!("η = {} outside [0, 1]", self.eta));
        }
        Ok(())
    }
}

pub fn draw_deviated_gains(model: &DeviationModel, antennas: usize) -> Result<Vec<C64>> {
    draw_deviated_gains_at(model, antennas, 0)
}

/// Independent draw number `realization` under the same model seed.
pub fn draw_deviated_gains_at(model: &DeviationModel, antennas: usize, realization: u64) -> Result<Vec<C64>> {
    model.validate()?;
    let mut r = rng::stream(model.seed, realization, streams::DEVIATION);
    let mean = model.base_a3 * (1.0 - model.eta).sqrt();
    let sd = (model.eta).sqrt() * model.base_a3.norm();
    Ok((0..antennas).map(|_| mean + rng::cn(&mut r) * sd).collect())
}

/// `|Σ_m c_m e^{jmφ}|²` for per-antenna products `c_m = a_{3m} a*_{1m}`.
pub fn deviation_gain(gains: &[C64], phi: f64) -> f64 {
    gains
        .iter()
        .enumerate()
        .map(|(i, &c)| c * C64::from_polar(1.0, (i + 1) as f64 * phi))
        .sum::<C64>()
        .norm_sqr()
}

/// `E[G(φ)]/|a₃|² = g(φ)(1-η) + Mη`.
pub fn expected_deviation_gain(eta: f64, phi: f64, antennas: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return domain(format!("η = {eta} outside [0, 1]"));
    }
    Ok(array_gain(phi, antennas) * (1.0 - eta) + antennas as f64 * eta)
}

/// `w_{km} = a*_{1m} h*_{km}`.
pub fn mrc_weights(h_row: &[C64], a1: &[C64]) -> Result<Vec<C64>> {
    if h_row.len() != a1.len() {
        return Err(Error::Dimension(format!("{} channel taps vs {} gains", h_row.len(), a1.len())));
    }
    Ok(h_row.iter().zip(a1).map(|(h, a)| (a * h).conj()).collect())
}

/// Parameters of the scattering-cluster geometry, in wavelengths and seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterParams {
    pub clusters: usize,
    pub delay_spread_s: f64,
    pub carrier_hz: f64,
    pub symbol_period_s: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub spacing: f64,
    /// Free-space paths (`|h| = 1`) instead of Rayleigh gains.
    #[serde(default)]
    pub unit_gain: bool,
}

impl ClusterParams {
    /// Ten Rayleigh clusters, 3 µs delay spread, 2 GHz carrier.
    pub fn frequency_selective() -> Self {
        Self {
            clusters: 10,
            delay_spread_s: 3e-6,
            carrier_hz: 2e9,
            symbol_period_s: 10e-6,
            x_range: (100.0, 5000.0),
            y_range: (-5000.0, 5000.0),
            spacing: 0.5,
            unit_gain: false,
        }
    }

    /// One free-space path per transmitter.
    pub fn line_of_sight() -> Self {
        Self { clusters: 1, unit_gain: true, ..Self::frequency_selective() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return domain("need at least one cluster");
        }
        if !(self.delay_spread_s >= 0.0 && self.symbol_period_s > 0.0 && self.carrier_hz > 0.0) {
            return domain("delay spread, symbol period and carrier must be positive");
        }
        Ok(())
    }
}

/// One realised set of cluster positions, gains and delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipathScenario {
    pub params: ClusterParams,
    /// `[transmitter][cluster]` position `(x, y)` in wavelengths.
    pub positions: Vec<Vec<(f64, f64)>>,
    pub path_gains: Vec<Vec<f64>>,
    /// Delays relative to each transmitter's first arrival, seconds.
    pub delays: Vec<Vec<f64>>,
    pub phase_seed: u64,
}

impl MultipathScenario {
    /// Draw an environment for `transmitters` transmitters.
    pub fn draw(params: &ClusterParams, transmitters: usize, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut r = rng::stream(seed, 0, streams::GEOMETRY);
        let v = params.clusters;
        let mut positions = Vec::new();
        let mut path_gains = Vec::new();
        let mut delays = Vec::new();
        for _ in 0..transmitters {
            let pos: Vec<(f64, f64)> = (0..v)
                .map(|_| {
                    (
                        r.random_range(params.x_range.0..=params.x_range.1),
                        r.random_range(params.y_range.0..=params.y_range.1),
                    )
                })
                .collect();
            // E[h²] = 1/V
            let gains: Vec<f64> = (0..v)
                .map(|_| if params.unit_gain { 1.0 } else { rng::cn(&mut r).norm() / (v as f64).sqrt() })
                .collect();
            let mut tau: Vec<f64> = (0..v).map(|_| r.random::<f64>() * params.delay_spread_s).collect();
            let first = tau.iter().cloned().fold(f64::INFINITY, f64::min);
            tau.iter_mut().for_each(|t| *t -= first);
            positions.push(pos);
            path_gains.push(gains);
            delays.push(tau);
        }
        Ok(Self { params: params.clone(), positions, path_gains, delays, phase_seed: seed })
    }

    pub fn transmitters(&self) -> usize {
        self.positions.len()
    }
}

/// `s_m(x, y) = e^{-j2π(√(x²+y²) - √(x²+(y-(m-1)Δ)²))/λ}`, lengths in wavelengths.
pub fn steering(x: f64, y: f64, m: usize, spacing: f64) -> C64 {
    let d0 = x.hypot(y);
    let dm = x.hypot(y - (m as f64 - 1.0) * spacing);
    C64::from_polar(1.0, -2.0 * PI * (d0 - dm))
}

/// One discrete path on the `T/Q` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTap {
    pub delay: usize,
    pub gain: C64,
}

/// Per-antenna impulse responses of all transmitters.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    pub antennas: usize,
    /// `[transmitter][cluster]` common part `h_{kv} e^{-j(2πf_cτ_{kv} + ε_{kv})}`.
    pub taps: Vec<Vec<PathTap>>,
    /// `[transmitter][cluster][antenna]` steering phases.
    pub steer: Vec<Vec<Vec<C64>>>,
}

impl MultipathChannel {
    /// `(delay, gain)` taps from transmitter `k` to antenna `m`.
    pub fn antenna_taps(&self, k: usize, m: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.taps[k].iter().zip(&self.steer[k]).map(move |(t, s)| (t.delay, t.gain * s[m]))
    }

    /// Symbol-rate channel seen after matched filtering at lag 0:
    /// `Σ_v g_{kvm} r_p(τ_{kv})` with `r_p` the pulse autocorrelation.
    pub fn effective_flat(&self, pulse: &Pulse) -> ChannelMatrix {
        let rp = |d: usize| pulse_autocorrelation(pulse, d as isize);
        (0..self.taps.len())
            .map(|k| (0..self.antennas).map(|m| self.antenna_taps(k, m).map(|(d, g)| g * rp(d)).sum()).collect())
            .collect()
    }

    pub fn max_delay(&self) -> usize {
        self.taps.iter().flatten().map(|t| t.delay).max().unwrap_or(0)
    }
}

/// `(1/T)∫p(t)p(t-τ)dt` at a lag of `d` samples.
pub fn pulse_autocorrelation(pulse: &Pulse, d: isize) -> f64 {
    let c = pulse.center as isize;
    (-c..=c).map(|s| pulse.at(s) * pulse.at(s - d)).sum::<f64>() / pulse.q() as f64
}

/// Realise the channel for `antennas` antennas; `realization` selects the
/// fresh random phases `ε_{kv}` of one coherence interval.
pub fn draw_multipath_channel(
    s: &MultipathScenario,
    antennas: usize,
    oversampling: usize,
    realization: u64,
) -> Result<MultipathChannel> {
    if antennas == 0 {
        return domain("need at least one antenna");
    }
    let p = &s.params;
    let mut r = rng::stream(s.phase_seed, realization, streams::PHASES);
    let mut taps = Vec::new();
    let mut steer = Vec::new();
    for k in 0..s.transmitters() {
        let mut tk = Vec::new();
        let mut sk = Vec::new();
        for v in 0..p.clusters {
            let tau = s.delays[k][v];
            let eps = r.random::<f64>() * 2.0 * PI;
            let phase = -(2.0 * PI * p.carrier_hz * tau).rem_euclid(2.0 * PI) - eps;
            let delay = (tau / p.symbol_period_s * oversampling as f64).round() as usize;
            tk.push(PathTap { delay, gain: C64::from_polar(s.path_gains[k][v], phase) });
            let (x, y) = s.positions[k][v];
            sk.push((1..=antennas).map(|m| steering(x, y, m, p.spacing)).collect());
        }
        taps.push(tk);
        steer.push(sk);
    }
    Ok(MultipathChannel { antennas, taps, steer })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn los_examples() {
        let s = UlaLosScenario { antennas: 2, users: 1, sine_angles: vec![0.0, PI], powers: vec![1.0, 0.0], spacing: 0.5 };
        let h = los_channel(&s).unwrap();
        assert_eq!(h[0], vec![C64::new(1.0, 0.0); 2]);
        assert!((h[1][0] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((h[1][1] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let bad = UlaLosScenario { powers: vec![1.0], ..s };
        assert!(los_channel(&bad).is_err());
    }

    #[test]
    fn composite_examples() {
        let h: ChannelMatrix = [0.3, -1.1, 2.0].iter().map(|&p| ula_row(p, 5)).collect();
        let c = composite_channel(&h, 0, 1, 1).unwrap();
        for (a, b) in c.iter().zip(&h[0]) {
            assert!((a - b).norm() < 1e-14);
        }
        let c = composite_channel(&h, 1, 2, 0).unwrap();
        for (m, z) in c.iter().enumerate() {
            assert!((z - C64::from_polar(1.0, (m + 1) as f64 * (-1.1 + 2.0 - 0.3))).norm() < 1e-13);
        }
        assert!(composite_channel(&h, 0, 3, 0).is_err());
    }

    #[test]
    fn array_gain_examples() {
        assert_eq!(array_gain(0.0, 7), 49.0);
        assert!(array_gain(PI, 2).abs() < 1e-24);
        assert!(array_gain(2.0 * PI / 100.0, 100).abs() < 1e-20);
        for m in [1, 5, 64] {
            for phi in [1e-9, 1e-5, 0.01, 0.7, 3.0, -2.2] {
                let direct = ula_row(phi, m).iter().sum::<C64>().norm_sqr();
                assert!((array_gain(phi, m) - direct).abs() < 1e-9 * direct.max(1.0));
            }
        }
        assert_eq!(array_gain_envelope(PI).unwrap(), 1.0);
        assert!((array_gain_envelope(PI / 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(array_gain_envelope(0.0).is_err());
    }

    #[test]
    fn deviation_examples() {
        let a3 = C64::new(0.1, -0.05);
        let g = draw_deviated_gains(&DeviationModel { eta: 0.0, base_a3: a3, seed: 1 }, 6).unwrap();
        assert!(g.iter().all(|&x| x == a3));
        assert!(draw_deviated_gains(&DeviationModel { eta: 1.5, base_a3: a3, seed: 1 }, 6).is_err());
        assert_eq!(expected_deviation_gain(0.0, 0.4, 10).unwrap(), array_gain(0.4, 10));
        assert_eq!(expected_deviation_gain(1.0, 0.0, 10).unwrap(), 10.0);
        assert!((expected_deviation_gain(0.5, 0.0, 100).unwrap() - 5050.0).abs() < 1e-9);
    }

    #[test]
    fn mrc_examples() {
        let h = ula_row(0.3, 4);
        let w = mrc_weights(&h, &[C64::new(1.0, 0.0); 4]).unwrap();
        for (wi, hi) in w.iter().zip(&h) {
            assert_eq!(*wi, hi.conj());
            assert!((wi.norm() - 1.0).abs() < 1e-15);
        }
        let a1 = [C64::new(0.9, 0.1), C64::new(1.1, 0.0), C64::new(0.7, -0.2), C64::new(1.0, 0.3)];
        let w = mrc_weights(&h, &a1).unwrap();
        let g: C64 = w.iter().zip(&h).zip(&a1).map(|((w, h), a)| w * h * a).sum();
        assert!(g.im.abs() < 1e-15 && g.re > 0.0);
        assert!(mrc_weights(&h, &a1[..2]).is_err());
    }

    #[test]
    fn steering_is_pure_phase() {
        for m in 1..20 {
            assert!((steering(300.0, -120.0, m, 0.5).norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(steering(10.0, 3.0, 1, 0.5), C64::new(1.0, 0.0));
    }

    #[test]
    fn multipath_reproducible() {
        let p = ClusterParams::frequency_selective();
        let s = MultipathScenario::draw(&p, 2, 11).unwrap();
        assert_eq!(s, MultipathScenario::draw(&p, 2, 11).unwrap());
        assert!(s.delays.iter().flatten().all(|&t| (0.0..=p.delay_spread_s).contains(&t)));
        let a = draw_multipath_channel(&s, 8, 16, 0).unwrap();
        let b = draw_multipath_channel(&s, 8, 16, 0).unwrap();
        let c = draw_multipath_channel(&s, 8, 16, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.taps[0][0].gain, c.taps[0][0].gain);
        assert_eq!(a.taps[0][0].gain.norm(), c.taps[0][0].gain.norm());
    }
}
