//! Command-line front end. Every subcommand writes its tables plus a
//! `manifest.json` and `plot.gp` into the output directory.
//!
//! Exit codes: 0 success, 1 a checked invariant failed, 2 bad configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::amplifier::gan_reference_hermite;
use crate::analysis::{self, case_one_user_one_blocker, error_autocorrelation_fast, term_census};
use crate::channel::{array_gain, array_gain_envelope, los_channel, mrc_weights};
use crate::config::{ExperimentConfig, OutputFormat};
use crate::error::{Error, Result};
use crate::pulses::{ambiguity_functions, third_degree_spectra, NUS};
use crate::report::{self, Manifest, PlotHint};
use crate::sim::{rate_vs_antennas, RateExperiment};
use crate::stats::{db10, from_db10};
use crate::validate::{self, SuiteOptions};

pub const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Parser)]
#[command(name = "lnadist", version, about = "LNA nonlinear distortion in massive MIMO uplinks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the Monte Carlo runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reduced sizes for a fast smoke run.
    #[arg(long, global = true)]
    pub quick: bool,
    /// JSON tables and a JSON summary on stdout.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Hermite coefficients of the amplifier and its desensitization curve.
    Coeffs,
    /// Third-degree distortion spectra and ambiguity functions.
    Pulses,
    /// Array gain, deviation gain and distortion profiles.
    Array,
    /// Rate against antenna count from the waveform simulation.
    Rate,
    /// Invariant and oracle suite.
    Validate {
        /// Mutation hook: drop the third-degree factor 2 (the suite must fail).
        #[arg(long)]
        drop_factor_two: bool,
    },
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Pulses => "pulses",
            Command::Array => "array",
            Command::Rate => "rate",
            Command::Validate { .. } => "validate",
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: String,
    /// False when a reported check failed (exit code 1).
    pub passed: bool,
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub summary: Value,
}

pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(Error::Config(_)) | Err(Error::Json(_)) => 2,
        Err(_) => 1,
    }
}

struct Ctx {
    cfg: ExperimentConfig,
    seed: u64,
    out: PathBuf,
    format: OutputFormat,
    quick: bool,
    manifest: Manifest,
}

impl Ctx {
    fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let p = report::write_table(&self.out, name, rows, self.format)?;
        self.manifest.add(&p);
        Ok(())
    }

    fn finish(mut self, command: Command, passed: bool, summary: Value, hints: &[PlotHint]) -> Result<Outcome> {
        if self.format == OutputFormat::Csv && !hints.is_empty() {
            let p = report::write_plot_hints(&self.out, hints)?;
            self.manifest.add(&p);
        }
        self.manifest.write(&self.out)?;
        Ok(Outcome {
            command: command.name().into(),
            passed,
            out_dir: self.out,
            files: self.manifest.files,
            summary,
        })
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(c) = &cfg.command {
        if c != cli.command.name() {
            return Err(Error::Config(format!("config is for `{c}`, not `{}`", cli.command.name())));
        }
    }
    if g.threads == Some(0) {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    let seed = g.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    cfg.seed = Some(seed);
    let format = if g.json { OutputFormat::Json } else { cfg.format.unwrap_or_default() };
    let out = g.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let manifest = Manifest::new(cli.command.name(), seed, g.threads, g.quick, &cfg)?;
    let ctx = Ctx { cfg, seed, out, format, quick: g.quick, manifest };

    let body = move || match cli.command {
        Command::Coeffs => coeffs(ctx),
        Command::Pulses => pulses(ctx),
        Command::Array => array(ctx),
        Command::Rate => rate(ctx),
        Command::Validate { drop_factor_two } => validate_cmd(ctx, drop_factor_two),
    };
    match g.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

fn coeffs(mut ctx: Ctx) -> Result<Outcome> {
    let c = ctx.cfg.coeffs.clone();
    let model = c.model()?;
    let h = model.hermite_at_power(c.sigma_sq)?;
    let reference = (c.amp.is_none() && c.sigma_sq == 1.0).then(gan_reference_hermite);
    let rows: Vec<report::CoeffRow> = (0..model.coeffs().len())
        .map(|i| {
            let (b, a) = (model.coeffs()[i], h.coeffs()[i]);
            let r = reference.and_then(|r| r.get(i).copied());
            report::CoeffRow {
                degree: 2 * i + 1,
                b_re: b.re,
                b_im: b.im,
                a_re: a.re,
                a_im: a.im,
                reference_a_re: r.map(|r| r.re),
                reference_a_im: r.map(|r| r.im),
                rel_error: r.map(|r| (a - r).norm() / r.norm()),
            }
        })
        .collect();
    ctx.table("coeffs", &rows)?;

    let p1db = model.compression_point(1.0)?;
    let grid = c.sweep.grid_db();
    let powers: Vec<f64> = grid.iter().map(|&d| p1db * from_db10(d)).collect();
    let curve = crate::amplifier::desensitization_curve(&model, &powers)?;
    let sweep: Vec<report::DesensitizationRow> = grid
        .iter()
        .zip(&powers)
        .zip(&curve)
        .map(|((&d, &p), &g)| {
            Ok(report::DesensitizationRow {
                input_rel_p1db_db: d,
                input_power: p,
                gain_db: db10(g),
                a3_abs: model.hermite_at_power(p)?.a3().norm(),
            })
        })
        .collect::<Result<_>>()?;
    ctx.table("desensitization", &sweep)?;

    let a1 = h.a1();
    let summary = json!({
        "sigma_sq": c.sigma_sq,
        "p1db": p1db,
        "a1": [a1.re, a1.im],
        "a3": [h.a3().re, h.a3().im],
        // the reference table lists Im(a1) with the opposite sign
        "im_a1_sign_matches_reference": reference.map(|r| r[0].im.signum() == a1.im.signum()),
        "max_rel_error_vs_reference": reference.map(|_| rows.iter().filter_map(|r| r.rel_error).skip(1).fold(0.0, f64::max)),
        "gain_db_at_p1db": sweep.last().map(|r| r.gain_db),
    });
    let hints = [PlotHint {
        file: "desensitization.csv".into(),
        title: "Desensitization".into(),
        x: "input_rel_p1db_db".into(),
        ys: vec!["gain_db".into()],
        xlabel: "input power re P1dB [dB]".into(),
        ylabel: "|a1|^2/|b1|^2 [dB]".into(),
        logy: false,
    }];
    ctx.finish(Command::Coeffs, true, summary, &hints)
}

fn pulses(mut ctx: Ctx) -> Result<Outcome> {
    let pc = ctx.cfg.pulses.clone();
    let spec = pc.spec();
    let amb = ambiguity_functions(&spec, pc.max_lag)?;
    let g30 = amb.gamma(0, 0).norm();

    let mut rows = Vec::new();
    for &nu in &NUS {
        let t = amb.table(nu);
        for (&lag, &v) in t.lags.iter().zip(&t.values) {
            rows.push(report::AmbiguityRow { nu, lag, re: v.re, im: v.im, abs: v.norm() });
        }
    }
    ctx.table("ambiguity", &rows)?;

    let (weights, census) = match pc.users {
        Some(k) => {
            let c = term_census(k)?;
            let t = c.totals();
            (t.map(|x| x as f64), Some(c))
        }
        None => ([1.0; 4], None),
    };
    let spectra: Vec<report::SpectrumRow> = third_degree_spectra(&spec, pc.nfft, weights)?
        .into_iter()
        .map(|(f, g)| report::SpectrumRow { f, nu_m1: g[0], nu_0: g[1], nu_1: g[2], nu_2: g[3] })
        .collect();
    ctx.table("spectra", &spectra)?;
    if let Some(c) = &census {
        let rows: Vec<report::CensusRow> = NUS
            .iter()
            .enumerate()
            .map(|(s, &nu)| report::CensusRow {
                nu,
                total: c.totals()[s],
                blocker_p3: c.with_blocker_power(3)[s],
                blocker_p2: c.with_blocker_power(2)[s],
                blocker_p1: c.with_blocker_power(1)[s],
                blocker_p0: c.with_blocker_power(0)[s],
            })
            .collect();
        ctx.table("census", &rows)?;
    }

    // γ_{3,2} vanishes identically; the per-ν kernels are Hermitian in ℓ
    let g32 = amb.table(2).max_abs();
    let bound = gamma32_bound(spec.roll_off);
    if g32 > bound * g30 {
        return Err(Error::Invariant(format!("max|γ_3,2| = {g32:.3e} exceeds {bound:.0e}·γ_3,0[0]")));
    }
    let mut asym: f64 = 0.0;
    for &nu in &NUS {
        for l in 0..=amb.max_lag() {
            asym = asym.max((amb.gamma(nu, -l) - amb.gamma(nu, l).conj()).norm());
        }
    }
    if asym > 1e-9 * g30 {
        return Err(Error::Invariant(format!("ambiguity not Hermitian in the lag: {asym:.3e}")));
    }
    let g31 = amb.gamma(1, 0).norm();
    let summary = json!({
        "gamma_30_0": g30,
        "gamma_31_0": g31,
        "gamma_3m1_0": amb.gamma(-1, 0).norm(),
        "ratio_30_31_db": db10(g30 / g31),
        "max_abs_gamma_32": g32,
        "hermitian_residual": asym,
        "census_totals": census.as_ref().map(|c| c.totals()),
    });
    let hints = [PlotHint {
        file: "spectra.csv".into(),
        title: "Third-degree distortion spectra".into(),
        x: "f".into(),
        ys: vec!["nu_m1".into(), "nu_0".into(), "nu_1".into(), "nu_2".into()],
        xlabel: "f T".into(),
        ylabel: "PSD".into(),
        logy: false,
    }];
    ctx.finish(Command::Pulses, true, summary, &hints)
}

/// Relative bound on the truncation leakage into `γ_{3,2}`. The sinc pulse
/// (β = 0) has a brick-wall spectrum whose truncated tails leak ~1e-7.
pub fn gamma32_bound(roll_off: f64) -> f64 {
    if roll_off > 0.0 { 1e-8 } else { 1e-6 }
}

fn array(mut ctx: Ctx) -> Result<Outcome> {
    let ac = ctx.cfg.array.clone();
    let m = ac.antennas;
    let n = ac.phi_points;
    let phis: Vec<f64> = (0..n)
        .map(|i| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64)
        .collect();
    let rows: Vec<report::ArrayGainRow> = phis
        .iter()
        .map(|&phi| report::ArrayGainRow { phi, gain: array_gain(phi, m), envelope: array_gain_envelope(phi).ok() })
        .collect();
    ctx.table("array_gain", &rows)?;

    let model = ctx.cfg.coeffs.model()?;
    let h = model.hermite_at_power(ctx.cfg.coeffs.sigma_sq)?;
    let a3 = h.a3();
    let draws = if ctx.quick { ac.deviation_draws.min(500) } else { ac.deviation_draws };
    let norm = a3.norm_sqr() * (m * m) as f64;
    let mut dev = Vec::new();
    let mut worst_z: f64 = 0.0;
    for &eta in &ac.etas {
        let expected = crate::channel::expected_deviation_gain(eta, 0.0, m)? * a3.norm_sqr() / norm;
        let (mean, se) = validate::deviation_gain_mean(eta, m, a3, draws.max(2), ctx.seed)?;
        let (mean, se) = (mean / norm, se / norm);
        let diff = (mean - expected).abs();
        let z = if se > 0.0 { diff / se } else if diff <= 1e-9 * expected { 0.0 } else { f64::INFINITY };
        worst_z = worst_z.max(z);
        dev.push(report::DeviationRow { eta, expected, empirical: mean, stderr: se });
    }
    ctx.table("deviation_gain", &dev)?;

    let mut profiles = Vec::new();
    for &eta in &ac.etas {
        for (phi, ucd, hermite) in analysis::gain_profiles(m, ac.kappa, eta, &phis)? {
            profiles.push(report::ProfileRow { eta, phi, ucd, hermite });
        }
    }
    ctx.table("distortion_profiles", &profiles)?;

    let mut regimes = Vec::new();
    let amb = ambiguity_functions(&crate::pulses::PulseSpec::default(), 0)?;
    for &mm in &[1usize, 4, 16, 64, 256] {
        for &ratio in &[0.1, 1e2, 1e4, 1e6] {
            let cs = case_one_user_one_blocker(1.0, ratio, 0.0, 2.0, mm, a3, &amb, 0);
            regimes.push(report::RegimeRow {
                antennas: mm,
                p_user: 1.0,
                p_blocker: ratio,
                regime: serde_json::to_value(cs.regime)?.as_str().unwrap_or_default().into(),
                exact: cs.exact.re,
                dominant: cs.dominant.re,
                rel_error: ((cs.dominant - cs.exact).norm() / cs.exact.norm()),
            });
        }
    }
    ctx.table("regimes", &regimes)?;

    let mut distortion_summary = Value::Null;
    if let Some(rec) = &ac.scenario {
        let s = rec.to_scenario()?;
        let ch = los_channel(&s)?;
        let max_lag = ac.lags.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
        let amb = ambiguity_functions(&crate::pulses::PulseSpec::default(), max_lag)?;
        let a1v = vec![h.a1(); s.antennas];
        let a3v = vec![a3; s.antennas];
        let mut rows = Vec::new();
        for k in 0..s.users {
            let w = mrc_weights(&ch[k], &a1v)?;
            let r = error_autocorrelation_fast(&ch, &a3v, &w, &s.powers, &amb, &ac.lags)?;
            for (i, &lag) in r.lags.iter().enumerate() {
                let b = r.per_blocker_power[i];
                rows.push(report::DistortionRow {
                    user: k,
                    lag,
                    re: r.values[i].re,
                    im: r.values[i].im,
                    blocker_p3: b[3].re,
                    blocker_p2: b[2].re,
                    blocker_p1: b[1].re,
                    blocker_p0: b[0].re,
                });
            }
        }
        distortion_summary = json!({ "rows": rows.len() });
        ctx.table("distortion", &rows)?;
    }

    let passed = worst_z <= validate::Z_LIMIT;
    let summary = json!({
        "antennas": m,
        "a3": [a3.re, a3.im],
        "deviation_max_z": worst_z,
        "kappa": ac.kappa,
        "distortion": distortion_summary,
    });
    let hints = [
        PlotHint {
            file: "array_gain.csv".into(),
            title: "Array gain".into(),
            x: "phi".into(),
            ys: vec!["gain".into(), "envelope".into()],
            xlabel: "sine angle".into(),
            ylabel: "g".into(),
            logy: true,
        },
        PlotHint {
            file: "deviation_gain.csv".into(),
            title: "Deviation gain".into(),
            x: "eta".into(),
            ys: vec!["expected".into(), "empirical".into()],
            xlabel: "eta".into(),
            ylabel: "E[G(0)]/(|a3|^2 M^2)".into(),
            logy: false,
        },
    ];
    ctx.finish(Command::Array, passed, summary, &hints)
}

fn rate(mut ctx: Ctx) -> Result<Outcome> {
    let rc = if ctx.quick { ctx.cfg.rate.quick() } else { ctx.cfg.rate.clone() };
    let mut rows = Vec::new();
    for &ct in &rc.channel_types {
        for &db in &rc.blocker_db {
            let exp = RateExperiment {
                symbols: rc.symbols,
                realizations: rc.realizations,
                noise_psd: rc.noise_psd,
                backoff_db: rc.backoff_db,
                ..RateExperiment::preset(ct, db, ctx.seed)
            };
            let biggest = *rc.antennas.last().unwrap();
            let cfg = exp.config(biggest);
            let need = cfg.memory_estimate();
            if need > rc.memory_limit_bytes {
                let scale = rc.memory_limit_bytes as f64 / need as f64;
                return Err(Error::Config(format!(
                    "one realization needs ~{} MiB (limit {} MiB); reduce rate.symbols to ≤ {} or raise memory_limit_bytes",
                    need >> 20,
                    rc.memory_limit_bytes >> 20,
                    (rc.symbols as f64 * scale).floor() as usize,
                )));
            }
            for p in rate_vs_antennas(&exp, &rc.antennas)? {
                if !(p.mean_rate.is_finite() && p.mean_rate >= 0.0) {
                    return Err(Error::Invariant(format!("rate {} at M = {}", p.mean_rate, p.antennas)));
                }
                rows.push(report::RateRow::from(&p));
            }
        }
    }
    ctx.table("rate", &rows)?;
    let summary = json!({ "points": rows });
    let hints = [PlotHint {
        file: "rate.csv".into(),
        title: "Rate vs antennas".into(),
        x: "M".into(),
        ys: vec!["mean_rate".into()],
        xlabel: "M".into(),
        ylabel: "bit/s/Hz".into(),
        logy: false,
    }];
    ctx.finish(Command::Rate, true, summary, &hints)
}

fn validate_cmd(mut ctx: Ctx, drop_factor_two: bool) -> Result<Outcome> {
    let opts = SuiteOptions {
        seed: ctx.seed,
        quick: ctx.quick,
        drop_factor_two: drop_factor_two || ctx.cfg.validate.drop_factor_two,
    };
    let checks = validate::run_suite(&opts)?;
    let rows: Vec<report::CheckRow> = checks
        .iter()
        .map(|c| report::CheckRow { name: c.name.clone(), passed: c.passed, detail: c.detail.clone() })
        .collect();
    ctx.table("validate", &rows)?;
    let passed = checks.iter().all(|c| c.passed);
    ctx.finish(Command::Validate { drop_factor_two }, passed, json!({ "checks": rows }), &[])
}

/// Human-readable one-screen rendering of an outcome.
pub fn render(o: &Outcome) -> String {
    let mut s = format!("{} → {}\n", o.command, o.out_dir.display());
    if let Some(checks) = o.summary.get("checks").and_then(Value::as_array) {
        for c in checks {
            s.push_str(&format!(
                "  {:<34} {}  {}\n",
                c["name"].as_str().unwrap_or(""),
                if c["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                c["detail"].as_str().unwrap_or("")
            ));
        }
    } else if let Some(obj) = o.summary.as_object() {
        for (k, v) in obj {
            if k != "points" {
                s.push_str(&format!("  {k}: {v}\n"));
            }
        }
        if let Some(points) = obj.get("points").and_then(Value::as_array) {
            for p in points {
                s.push_str(&format!(
                    "  {:<20} {:>5.0} dB  M = {:>4}  rate = {:.4} ± {:.4}\n",
                    p["channel_type"].as_str().unwrap_or(""),
                    p["blocker_dB"].as_f64().unwrap_or(f64::NAN),
                    p["M"],
                    p["mean_rate"].as_f64().unwrap_or(f64::NAN),
                    p["stderr"].as_f64().unwrap_or(f64::NAN),
                ));
            }
        }
    }
    s.push_str(&format!("  files: {}\n", o.files.join(", ")));
    if !o.passed {
        s.push_str("  one or more checks FAILED\n");
    }
    s
}
