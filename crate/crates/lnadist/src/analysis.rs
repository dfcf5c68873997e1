//! Closed-form distortion and rate analysis.
//!
//! Transmitter indices are 0-based with the blocker at index `K`. All
//! third-degree correlations include the Hermite norm `2! · 1! = 2`, so a
//! single Gaussian input of power `P` yields `2|a₃|²P³` at zero lag.

use serde::{Deserialize, Serialize};

use crate::channel::{array_gain, ChannelMatrix};
use crate::error::{domain, Error, Result};
use crate::hermite::{gaussian_crosscorrelation_transform, OddHermiteSeries};
use crate::pulses::{nu_slot, Ambiguity, NUS};
use crate::rng::{self, streams};
use crate::stats;
use crate::C64;

/// Factor carried by every third-degree correlation.
pub const THIRD_DEGREE_NORM: f64 = 2.0;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `ν = I(k) + I(k') - I(k'')` where `I` flags the blocker (index `K`).
pub fn nu_index(k: usize, k1: usize, k2: usize, users: usize) -> Result<i32> {
    if k > users || k1 > users || k2 > users {
        return Err(Error::Dimension(format!("index above {users}")));
    }
    let i = |x: usize| (x == users) as i32;
    Ok(i(k) + i(k1) - i(k2))
}

pub type Triple = (usize, usize, usize);

/// Index triples grouped by `ν`, plus counts by the number of blocker
/// indices they contain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyIndexSets {
    pub users: usize,
    /// `sets[nu_slot(ν)]`.
    pub sets: [Vec<Triple>; 4],
    /// `by_power[j][nu_slot(ν)]`: triples carrying `P_B^j`.
    pub by_power: [[usize; 4]; 4],
}

impl FrequencyIndexSets {
    pub fn set(&self, nu: i32) -> &[Triple] {
        &self.sets[nu_slot(nu)]
    }

    pub fn totals(&self) -> [usize; 4] {
        std::array::from_fn(|s| self.sets[s].len())
    }

    /// Table row for terms carrying `P_B^power`.
    pub fn with_blocker_power(&self, power: usize) -> [usize; 4] {
        self.by_power[power]
    }
}

pub fn term_census(users: usize) -> Result<FrequencyIndexSets> {
    if users == 0 {
        return domain("need at least one user");
    }
    let mut sets: [Vec<Triple>; 4] = Default::default();
    let mut by_power = [[0usize; 4]; 4];
    let n = users + 1;
    for k in 0..n {
        for k1 in 0..n {
            for k2 in 0..n {
                let nu = nu_index(k, k1, k2, users)?;
                let s = nu_slot(nu);
                sets[s].push((k, k1, k2));
                let j = [k, k1, k2].iter().filter(|&&x| x == users).count();
                by_power[j][s] += 1;
            }
        }
    }
    Ok(FrequencyIndexSets { users, sets, by_power })
}

fn check_dims(h: &ChannelMatrix, a3: &[C64], powers: &[f64]) -> Result<usize> {
    if h.is_empty() {
        return Err(Error::Dimension("empty channel matrix".into()));
    }
    let m = h[0].len();
    if h.iter().any(|r| r.len() != m) || a3.len() != m {
        return Err(Error::Dimension(format!("need {m} antennas throughout")));
    }
    if powers.len() != h.len() {
        return Err(Error::Dimension(format!("{} powers for {} transmitters", powers.len(), h.len())));
    }
    if powers.iter().any(|&p| !(p >= 0.0)) {
        return domain("powers must be non-negative");
    }
    Ok(m)
}

/// Triples with their `ν` and power product, skipping zero-power ones.
fn weighted_triples(powers: &[f64]) -> Vec<(Triple, usize, f64, usize)> {
    let users = powers.len() - 1;
    let mut out = Vec::new();
    for k in 0..powers.len() {
        for k1 in 0..powers.len() {
            for k2 in 0..powers.len() {
                let pw = powers[k] * powers[k1] * powers[k2];
                if pw == 0.0 {
                    continue;
                }
                let nu = nu_index(k, k1, k2, users).expect("in range");
                let j = [k, k1, k2].iter().filter(|&&x| x == users).count();
                out.push(((k, k1, k2), nu_slot(nu), pw, j));
            }
        }
    }
    out
}

/// `E[u_{3m}[n] u*_{3m'}[n-ℓ]]` after matched filtering, third-degree regime.
#[allow(clippy::too_many_arguments)]
pub fn third_degree_spatial_correlation(
    h: &ChannelMatrix,
    a3: &[C64],
    powers: &[f64],
    amb: &Ambiguity,
    m: usize,
    m2: usize,
    lag: i64,
) -> Result<C64> {
    let n = check_dims(h, a3, powers)?;
    if m >= n || m2 >= n {
        return Err(Error::Dimension(format!("antenna index out of range ({n})")));
    }
    let mut acc = zero();
    for ((k, k1, k2), slot, pw, _) in weighted_triples(powers) {
        let hm = h[k][m] * h[k1][m] * h[k2][m].conj();
        let hm2 = h[k][m2] * h[k1][m2] * h[k2][m2].conj();
        acc += amb.gamma(NUS[slot], lag) * pw * hm * hm2.conj();
    }
    Ok(acc * a3[m] * a3[m2].conj() * THIRD_DEGREE_NORM)
}

/// `R_{e_k e_k}[ℓ]` with its breakdown by `ν` and by blocker power.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionAutocorrelation {
    pub lags: Vec<i64>,
    pub values: Vec<C64>,
    pub per_nu: Vec<[C64; 4]>,
    /// Index `j` collects triples carrying `P_B^j`.
    pub per_blocker_power: Vec<[C64; 4]>,
}

impl DistortionAutocorrelation {
    pub fn at(&self, lag: i64) -> Option<C64> {
        self.lags.iter().position(|&l| l == lag).map(|i| self.values[i])
    }

    fn from_triple_weights(amb: &Ambiguity, lags: &[i64], weights: &[(usize, usize, f64)]) -> Self {
        // weights: (ν slot, blocker power, non-negative spatial factor)
        let mut values = Vec::new();
        let mut per_nu = Vec::new();
        let mut per_bp = Vec::new();
        for &l in lags {
            let mut nu = [zero(); 4];
            let mut bp = [zero(); 4];
            for &(slot, j, w) in weights {
                let v = amb.gamma(NUS[slot], l) * w * THIRD_DEGREE_NORM;
                nu[slot] += v;
                bp[j] += v;
            }
            values.push(nu.iter().sum());
            per_nu.push(nu);
            per_bp.push(bp);
        }
        Self { lags: lags.to_vec(), values, per_nu, per_blocker_power: per_bp }
    }
}

/// Literal double sum `Σ_m Σ_{m'} w_m w*_{m'} R_{u_{3m}u_{3m'}}[ℓ]`.
pub fn error_autocorrelation(
    h: &ChannelMatrix,
    a3: &[C64],
    weights: &[C64],
    powers: &[f64],
    amb: &Ambiguity,
    lags: &[i64],
) -> Result<DistortionAutocorrelation> {
    let n = check_dims(h, a3, powers)?;
    if weights.len() != n {
        return Err(Error::Dimension(format!("{} weights for {n} antennas", weights.len())));
    }
    let mut terms = Vec::new();
    for ((k, k1, k2), slot, pw, j) in weighted_triples(powers) {
        let c: Vec<C64> = (0..n).map(|m| a3[m] * h[k][m] * h[k1][m] * h[k2][m].conj()).collect();
        let mut s = zero();
        for m in 0..n {
            for m2 in 0..n {
                s += weights[m] * weights[m2].conj() * c[m] * c[m2].conj();
            }
        }
        terms.push((slot, j, pw * s.re));
    }
    Ok(DistortionAutocorrelation::from_triple_weights(amb, lags, &terms))
}

/// Same quantity, factorised as `Σ_t P_t |Σ_m w_m a_{3m} h̄_{t,m}|²`.
pub fn error_autocorrelation_fast(
    h: &ChannelMatrix,
    a3: &[C64],
    weights: &[C64],
    powers: &[f64],
    amb: &Ambiguity,
    lags: &[i64],
) -> Result<DistortionAutocorrelation> {
    let n = check_dims(h, a3, powers)?;
    if weights.len() != n {
        return Err(Error::Dimension(format!("{} weights for {n} antennas", weights.len())));
    }
    let terms: Vec<_> = weighted_triples(powers)
        .into_iter()
        .map(|((k, k1, k2), slot, pw, j)| {
            let s: C64 = (0..n).map(|m| weights[m] * a3[m] * h[k][m] * h[k1][m] * h[k2][m].conj()).sum();
            (slot, j, pw * s.norm_sqr())
        })
        .collect();
    Ok(DistortionAutocorrelation::from_triple_weights(amb, lags, &terms))
}

/// ULA line-of-sight, identical amplifiers, MRC for user `k`:
/// `2|a₁|²|a₃|² Σ_ν γ_{3,ν}[ℓ] Σ P P' P'' g(φ_{k'}+φ_{k''}-φ_{k'''}-φ_k)`.
#[allow(clippy::too_many_arguments)]
pub fn los_mrc_autocorrelation(
    phis: &[f64],
    powers: &[f64],
    antennas: usize,
    a1: C64,
    a3: C64,
    amb: &Ambiguity,
    k: usize,
    lags: &[i64],
) -> Result<DistortionAutocorrelation> {
    if phis.len() != powers.len() || k >= phis.len() {
        return Err(Error::Dimension("angles, powers and user index disagree".into()));
    }
    let scale = a1.norm_sqr() * a3.norm_sqr();
    let terms: Vec<_> = weighted_triples(powers)
        .into_iter()
        .map(|((t, t1, t2), slot, pw, j)| {
            (slot, j, pw * scale * array_gain(phis[t] + phis[t1] - phis[t2] - phis[k], antennas))
        })
        .collect();
    Ok(DistortionAutocorrelation::from_triple_weights(amb, lags, &terms))
}

/// Antenna/blocker regime of the one-user, one-blocker case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    WeakBlocker,
    StrongBlockerFewAntennas,
    StrongBlockerManyAntennas,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::WeakBlocker => "weak blocker: P1^3 M^2 (coherent self-distortion)",
            Regime::StrongBlockerFewAntennas => "strong blocker, few antennas: P1 P2^2 M^2 + P2^3 g(phi2-phi1)",
            Regime::StrongBlockerManyAntennas => "strong blocker, many antennas: P1 P2^2 M^2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseStudy {
    pub exact: C64,
    /// Contributions of `ν = -1, 0, 1`.
    pub terms: [C64; 3],
    pub regime: Regime,
    /// Dominant-term approximation for the regime.
    pub dominant: C64,
}

/// One user (index 0, power `p1`, angle `phi1`) plus a blocker.
#[allow(clippy::too_many_arguments)]
pub fn case_one_user_one_blocker(
    p1: f64,
    p2: f64,
    phi1: f64,
    phi2: f64,
    antennas: usize,
    a3: C64,
    amb: &Ambiguity,
    lag: i64,
) -> CaseStudy {
    let a = a3.norm_sqr() * THIRD_DEGREE_NORM;
    let m2 = (antennas * antennas) as f64;
    let g = array_gain(phi2 - phi1, antennas);
    let (gm, g0, g1) = (amb.gamma(-1, lag), amb.gamma(0, lag), amb.gamma(1, lag));
    let terms = [
        gm * a * p1 * p1 * p2 * array_gain(phi1 - phi2, antennas),
        g0 * a * (p1.powi(3) + 2.0 * p1 * p2 * p2) * m2,
        g1 * a * (2.0 * p1 * p1 * p2 + p2.powi(3)) * g,
    ];
    let regime = if p2 <= p1 {
        Regime::WeakBlocker
    } else if m2 > p2 / p1 {
        Regime::StrongBlockerManyAntennas
    } else {
        Regime::StrongBlockerFewAntennas
    };
    let dominant = match regime {
        Regime::WeakBlocker => g0 * a * p1.powi(3) * m2,
        Regime::StrongBlockerFewAntennas => a * (g0 * 2.0 * p1 * p2 * p2 * m2 + g1 * p2.powi(3) * g),
        Regime::StrongBlockerManyAntennas => g0 * a * 2.0 * p1 * p2 * p2 * m2,
    };
    CaseStudy { exact: terms.iter().sum(), terms, regime, dominant }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiuserVariant {
    NoDominant,
    /// User `χ` much stronger than the rest.
    OneDominant(usize),
    /// Last transmitter is a blocker.
    Blocker,
    /// Blocker inside the main lobe of the user of interest.
    BlockerInLobe,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseApproximation {
    pub variant: MultiuserVariant,
    pub value: C64,
    pub condition: &'static str,
    pub condition_holds: bool,
}

/// Dominance threshold standing in for "≫".
pub const DOMINANCE_RATIO: f64 = 10.0;

/// Closed-form approximations of `R_{e_k e_k}[ℓ]` for LOS multi-user setups.
/// For the blocker variants the last entry of `powers`/`phis` is the blocker.
#[allow(clippy::too_many_arguments)]
pub fn case_multiuser(
    powers: &[f64],
    phis: &[f64],
    antennas: usize,
    a3: C64,
    amb: &Ambiguity,
    variant: MultiuserVariant,
    k: usize,
    lag: i64,
) -> Result<CaseApproximation> {
    if powers.len() != phis.len() || k >= powers.len() {
        return Err(Error::Dimension("angles, powers and user index disagree".into()));
    }
    let a = a3.norm_sqr() * THIRD_DEGREE_NORM;
    let m2 = (antennas * antennas) as f64;
    let (g0, g1) = (amb.gamma(0, lag), amb.gamma(1, lag));
    let pk = powers[k];
    let others = |skip: usize| powers.iter().enumerate().filter(move |(i, _)| *i != skip).map(|(_, p)| *p);
    Ok(match variant {
        MultiuserVariant::NoDominant => {
            let s: f64 = others(k).map(|p| p * p).sum();
            let max = powers.iter().cloned().fold(0.0, f64::max);
            let min = powers.iter().cloned().fold(f64::INFINITY, f64::min);
            CaseApproximation {
                variant,
                value: g0 * a * (pk.powi(3) + 2.0 * pk * s) * m2,
                condition: "no user dominates: max P / min P < 10",
                condition_holds: max < DOMINANCE_RATIO * min,
            }
        }
        MultiuserVariant::OneDominant(chi) => {
            if chi >= powers.len() {
                return Err(Error::Dimension("dominant user out of range".into()));
            }
            let pc = powers[chi];
            let value = if chi == k {
                g0 * a * pc.powi(3) * m2
            } else {
                g0 * a * (pc.powi(3) * array_gain(phis[chi] - phis[k], antennas) + 2.0 * m2 * pk * pc * pc)
            };
            let rest = others(chi).fold(0.0, f64::max);
            CaseApproximation {
                variant,
                value,
                condition: "P_chi >= 10 max of the others",
                condition_holds: pc >= DOMINANCE_RATIO * rest,
            }
        }
        MultiuserVariant::Blocker | MultiuserVariant::BlockerInLobe => {
            let b = powers.len() - 1;
            if k == b {
                return domain("user of interest is the blocker");
            }
            let pb = powers[b];
            let sum_sq: f64 = others(b).map(|p| p * p).sum();
            let strong = pb * pb >= DOMINANCE_RATIO * sum_sq;
            if variant == MultiuserVariant::Blocker {
                CaseApproximation {
                    variant,
                    value: a * (g0 * 2.0 * pb * pb * pk * m2 + g1 * pb.powi(3) * array_gain(phis[b] - phis[k], antennas)),
                    condition: "P_B^2 >= 10 sum of user P^2",
                    condition_holds: strong,
                }
            } else {
                let d = (phis[b] - phis[k]).rem_euclid(2.0 * std::f64::consts::PI);
                let d = d.min(2.0 * std::f64::consts::PI - d);
                CaseApproximation {
                    variant,
                    value: a * m2 * (g0 * 2.0 * pb * pb * pk + g1 * pb.powi(3)),
                    condition: "strong blocker with |phi_B - phi_k| < 2pi/M",
                    condition_holds: strong && d < 2.0 * std::f64::consts::PI / antennas as f64,
                }
            }
        }
    })
}

/// Which model produced an SINR entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approximation {
    Exact,
    FixedGain,
    CaseStudy,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrEntry {
    pub user: usize,
    pub decoding_gain: f64,
    pub interference: f64,
    pub noise: f64,
    pub distortion: f64,
    pub sinr: f64,
    pub rate: f64,
    pub approximation: Approximation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrReport {
    pub entries: Vec<SinrEntry>,
    /// How the third-degree factor 2 is accounted for.
    pub convention: String,
}

impl SinrReport {
    pub fn new(entries: Vec<SinrEntry>) -> Self {
        Self { entries, convention: "third-degree correlations include the factor 2 = 2!1!".into() }
    }
}

/// `P|g|² / (Σ P'Ĩ + noise + D)`, rate `log2(1 + SINR)`.
///
/// `gain` is `|g_k|²`, `interference` is the already power-weighted sum and
/// `noise` the full noise term (`M N₀/T` in the normalised form).
pub fn effective_sinr(
    user: usize,
    gain: f64,
    interference: f64,
    noise: f64,
    distortion: f64,
    power: f64,
) -> Result<SinrEntry> {
    for (name, v) in [("gain", gain), ("interference", interference), ("noise", noise), ("distortion", distortion), ("power", power)] {
        if !(v >= 0.0) {
            return domain(format!("{name} must be non-negative, got {v}"));
        }
    }
    let den = interference + noise + distortion;
    if den == 0.0 {
        return domain("zero SINR denominator");
    }
    let sinr = power * gain / den;
    Ok(SinrEntry {
        user,
        decoding_gain: gain,
        interference,
        noise,
        distortion,
        sinr,
        rate: (1.0 + sinr).log2(),
        approximation: Approximation::Exact,
    })
}

/// Gain loss `ρ = (Σ|a₁|²)² / (M Σ|a₁|⁴)`.
pub fn gain_loss(a1: &[C64]) -> Result<f64> {
    let s2: f64 = a1.iter().map(|a| a.norm_sqr()).sum();
    let s4: f64 = a1.iter().map(|a| a.norm_sqr().powi(2)).sum();
    if s4 == 0.0 {
        return domain("all-zero first-degree coefficients");
    }
    Ok(s2 * s2 / (a1.len() as f64 * s4))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedGainResult {
    pub rho: f64,
    pub distortion_scaled: f64,
    pub entry: SinrEntry,
}

/// Fixed-gain closed form: `ρPG / (Σ P'Ī + M N₀/T + D')` with
/// `D' = M D / Σ|a₁|⁴`. `interference` is `Σ_{k'} P_{k'} Ī_{kk'}`.
pub fn fixed_gain_sinr(
    a1: &[C64],
    user: usize,
    power: f64,
    array_gain: f64,
    interference: f64,
    noise_per_antenna: f64,
    distortion: f64,
) -> Result<FixedGainResult> {
    let rho = gain_loss(a1)?;
    let m = a1.len() as f64;
    let s4: f64 = a1.iter().map(|a| a.norm_sqr().powi(2)).sum();
    let d = m * distortion / s4;
    let mut entry = effective_sinr(user, array_gain, interference, m * noise_per_antenna, d, rho * power)?;
    entry.approximation = Approximation::FixedGain;
    Ok(FixedGainResult { rho, distortion_scaled: d, entry })
}

/// Monte Carlo evaluation of the general SINR under i.i.d. `CN(0,1)` fading
/// and MRC, with white distortion `d_m ~ CN(0, σ_d²)` at each antenna.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrMonteCarlo {
    pub sinr: f64,
    pub se: f64,
    pub closed_form: f64,
    pub rho: f64,
}

/// Batch-means estimate of the effective SINR of user `k`; the closed form
/// uses `D = σ_d² Σ|a₁|²`, the variance of `Σ w d` under MRC.
pub fn fading_sinr_monte_carlo(
    a1: &[C64],
    powers: &[f64],
    k: usize,
    noise_per_antenna: f64,
    sigma_d2: f64,
    draws: usize,
    seed: u64,
) -> Result<SinrMonteCarlo> {
    let m = a1.len();
    if k >= powers.len() || m == 0 {
        return Err(Error::Dimension("user index or antenna count".into()));
    }
    let batches = 20usize;
    let per = (draws / batches).max(2);
    let a2: Vec<f64> = a1.iter().map(|a| a.norm_sqr()).collect();
    let mut estimates = Vec::with_capacity(batches);
    for b in 0..batches {
        let mut r = rng::stream(seed, b as u64, streams::FADING);
        let mut g = 0.0;
        let mut cross = vec![(zero(), 0.0); powers.len()];
        let mut noise = 0.0;
        let mut dist = 0.0;
        for _ in 0..per {
            let h: Vec<Vec<C64>> = powers.iter().map(|_| rng::cn_vec(&mut r, m)).collect();
            let d = rng::cn_vec(&mut r, m);
            g += (0..m).map(|i| a2[i] * h[k][i].norm_sqr()).sum::<f64>();
            for (j, c) in cross.iter_mut().enumerate() {
                let v: C64 = (0..m).map(|i| a2[i] * h[k][i].conj() * h[j][i]).sum();
                c.0 += v;
                c.1 += v.norm_sqr();
            }
            noise += (0..m).map(|i| a2[i] * a2[i] * h[k][i].norm_sqr()).sum::<f64>();
            let e: C64 = (0..m).map(|i| a1[i].conj() * h[k][i].conj() * d[i]).sum();
            dist += e.norm_sqr();
        }
        let n = per as f64;
        let g = g / n;
        let interference: f64 = cross
            .iter()
            .zip(powers)
            .map(|(c, &p)| p * (c.1 / n - (c.0 / n).norm_sqr()))
            .sum();
        let sinr = powers[k] * g * g / (interference + noise_per_antenna * noise / n + sigma_d2 * dist / n);
        estimates.push(sinr);
    }
    let (sinr, se) = stats::mean_se(&estimates);
    let s2: f64 = a2.iter().sum();
    let mf = m as f64;
    let closed = fixed_gain_sinr(
        a1,
        k,
        powers[k],
        mf * mf,
        powers.iter().map(|p| p * mf).sum(),
        noise_per_antenna,
        sigma_d2 * s2,
    )?;
    Ok(SinrMonteCarlo { sinr, se, closed_form: closed.entry.sinr, rho: closed.rho })
}

/// Spatially-uncorrelated distortion baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UcdResult {
    /// `κ Σ_k |h_km|² P_k` on the diagonal (`m = m'`, `ℓ = 0`); zero elsewhere.
    pub diagonal: Vec<f64>,
    pub error_variance: f64,
}

impl UcdResult {
    pub fn correlation(&self, m: usize, m2: usize, lag: i64) -> f64 {
        if m == m2 && lag == 0 { self.diagonal[m] } else { 0.0 }
    }
}

pub fn ucd_model(h: &ChannelMatrix, powers: &[f64], kappa: f64, weights: &[C64]) -> Result<UcdResult> {
    if !(kappa >= 0.0) {
        return domain("κ must be non-negative");
    }
    if h.len() != powers.len() || h.iter().any(|r| r.len() != weights.len()) {
        return Err(Error::Dimension("channel, powers and weights disagree".into()));
    }
    let diagonal: Vec<f64> = (0..weights.len())
        .map(|m| kappa * h.iter().zip(powers).map(|(r, p)| r[m].norm_sqr() * p).sum::<f64>())
        .collect();
    let error_variance = diagonal.iter().zip(weights).map(|(d, w)| d * w.norm_sqr()).sum();
    Ok(UcdResult { diagonal, error_variance })
}

/// Distortion array-gain profiles over sine angle: the uncorrelated model is
/// flat at `Mκ`, the Hermite model varies as `g(φ)(1-η) + Mη`.
pub fn gain_profiles(antennas: usize, kappa: f64, eta: f64, phis: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    phis.iter()
        .map(|&phi| {
            let hermite = crate::channel::expected_deviation_gain(eta, phi, antennas)?;
            Ok((phi, antennas as f64 * kappa, hermite))
        })
        .collect()
}

/// `R_{d_m d_{m'}} = Σ_{ϖ≥3} a_{ϖm} a*_{ϖm'} ((ϖ+1)/2)!((ϖ-1)/2)! r|r|^{ϖ-1}`
/// for normalised input correlation `r` and series over normalised inputs.
pub fn distortion_cross_correlation_general(a: &OddHermiteSeries, b: &OddHermiteSeries, r: C64) -> Result<C64> {
    gaussian_crosscorrelation_transform(&a.without_linear(), &b.without_linear(), r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ula_row;
    use crate::pulses::{ambiguity_functions, PulseSpec};

    fn amb() -> Ambiguity {
        ambiguity_functions(&PulseSpec { span: 16, ..PulseSpec::default() }, 4).unwrap()
    }

    #[test]
    fn nu_examples() {
        let k = 3;
        assert_eq!(nu_index(k, 0, k, k).unwrap(), 0);
        assert_eq!(nu_index(k, k, 0, k).unwrap(), 2);
        assert_eq!(nu_index(0, 1, k, k).unwrap(), -1);
        assert!(nu_index(4, 0, 0, k).is_err());
    }

    #[test]
    fn census_matches_table() {
        for k in [1usize, 2, 10] {
            let c = term_census(k).unwrap();
            assert_eq!(c.totals(), [k * k, 2 * k + k * k * k, 1 + 2 * k * k, k]);
            assert_eq!(c.with_blocker_power(3), [0, 0, 1, 0]);
            assert_eq!(c.with_blocker_power(2), [0, 2 * k, 0, k]);
            assert_eq!(c.with_blocker_power(1), [k * k, 0, 2 * k * k, 0]);
            assert_eq!(c.with_blocker_power(0), [0, k * k * k, 0, 0]);
        }
        assert_eq!(term_census(10).unwrap().totals(), [100, 1020, 201, 10]);
    }

    #[test]
    fn generic_equals_closed_form() {
        let amb = amb();
        let phis = [0.4, -1.3, 2.2];
        let powers = [1.0, 0.6, 3.0];
        let m = 12;
        let h: ChannelMatrix = phis.iter().map(|&p| ula_row(p, m)).collect();
        let a1 = C64::new(0.9, -0.1);
        let a3 = vec![C64::new(-0.04, 0.003); m];
        let w: Vec<C64> = h[0].iter().map(|x| (a1 * x).conj()).collect();
        let lags = [-2, 0, 1, 3];
        let slow = error_autocorrelation(&h, &a3, &w, &powers, &amb, &lags).unwrap();
        let fast = error_autocorrelation_fast(&h, &a3, &w, &powers, &amb, &lags).unwrap();
        let closed = los_mrc_autocorrelation(&phis, &powers, m, a1, a3[0], &amb, 0, &lags).unwrap();
        for i in 0..lags.len() {
            let r = slow.values[i].norm();
            assert!((slow.values[i] - fast.values[i]).norm() < 1e-9 * r);
            assert!((slow.values[i] - closed.values[i]).norm() < 1e-9 * r);
        }
        assert!(slow.at(0).unwrap().im.abs() < 1e-12 * slow.at(0).unwrap().re);
        // spatial correlation double sum agrees with the factorised engine
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                acc += w[i] * w[j].conj() * third_degree_spatial_correlation(&h, &a3, &powers, &amb, i, j, 1).unwrap();
            }
        }
        assert!((acc - slow.at(1).unwrap()).norm() < 1e-9 * acc.norm());
    }

    #[test]
    fn case_one_matches_engine() {
        let amb = amb();
        let (p1, p2, f1, f2, m) = (1.0, 50.0, 0.3, -0.9, 16);
        let a3 = C64::new(-0.04, 0.003);
        let cs = case_one_user_one_blocker(p1, p2, f1, f2, m, a3, &amb, 0);
        let exact = los_mrc_autocorrelation(&[f1, f2], &[p1, p2], m, C64::new(1.0, 0.0), a3, &amb, 0, &[0]).unwrap();
        assert!((cs.exact - exact.values[0]).norm() < 1e-10 * cs.exact.norm());
        assert_eq!(cs.regime, Regime::StrongBlockerManyAntennas);
        let weak = case_one_user_one_blocker(p1, 0.0, f1, f2, m, a3, &amb, 0);
        assert_eq!(weak.regime, Regime::WeakBlocker);
        assert!((weak.exact - weak.dominant).norm() < 1e-12 * weak.exact.norm());
    }

    #[test]
    fn sinr_examples() {
        let e = effective_sinr(0, 100.0, 0.0, 10.0 * 0.1, 0.0, 1.0).unwrap();
        assert!((e.sinr - 100.0).abs() < 1e-12);
        assert!(effective_sinr(0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
        let big = effective_sinr(0, 1.0, 0.0, 0.0, 1e300, 1.0).unwrap();
        assert!(big.sinr < 1e-299);
        let s2 = 2f64.sqrt();
        let r = gain_loss(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(s2, 0.0)]).unwrap();
        assert!((r - 8.0 / 9.0).abs() < 1e-15);
        let f = fixed_gain_sinr(&[C64::new(1.0, 0.0); 4], 0, 1.0, 16.0, 4.0, 0.1, 0.7).unwrap();
        assert!((f.rho - 1.0).abs() < 1e-15 && (f.distortion_scaled - 0.7).abs() < 1e-15);
        assert!(gain_loss(&[C64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn ucd_examples() {
        let m = 100;
        let h: ChannelMatrix = vec![ula_row(0.2, m), ula_row(-1.0, m)];
        let w: Vec<C64> = h[0].iter().map(|x| x.conj()).collect();
        let u = ucd_model(&h, &[1.5, 0.5], 0.01, &w).unwrap();
        assert!((u.error_variance - 2.0).abs() < 1e-12);
        assert_eq!(u.correlation(0, 1, 0), 0.0);
        assert_eq!(u.correlation(3, 3, 1), 0.0);
    }

    #[test]
    fn general_degree_five() {
        let s = OddHermiteSeries::from_pairs(&[(5, C64::new(1.0, 0.0))]).unwrap();
        let r = C64::new(0.3, 0.4);
        let v = distortion_cross_correlation_general(&s, &s, r).unwrap();
        assert!((v - r * r.norm_sqr().powi(2) * 12.0).norm() < 1e-15);
    }
}
