//! Output tables, run manifest and plot layout hints.
//!
//! Tables are plain row structs; the CSV header is the field list, so the
//! column names below are the schema (see `docs/output-schema.md`).

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::OutputFormat;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    pub degree: usize,
    pub b_re: f64,
    pub b_im: f64,
    pub a_re: f64,
    pub a_im: f64,
    pub reference_a_re: Option<f64>,
    pub reference_a_im: Option<f64>,
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesensitizationRow {
    /// Input power relative to the one-dB compression point.
    pub input_rel_p1db_db: f64,
    pub input_power: f64,
    /// `|a₁(σ²)|²/|b₁|²` in dB.
    pub gain_db: f64,
    pub a3_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub f: f64,
    pub nu_m1: f64,
    pub nu_0: f64,
    pub nu_1: f64,
    pub nu_2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityRow {
    pub nu: i32,
    pub lag: i64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub nu: i32,
    pub total: usize,
    pub blocker_p3: usize,
    pub blocker_p2: usize,
    pub blocker_p1: usize,
    pub blocker_p0: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGainRow {
    pub phi: f64,
    pub gain: f64,
    /// `1/sin²(φ/2)`; empty at `φ ≡ 0`.
    pub envelope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub eta: f64,
    pub expected: f64,
    pub empirical: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub eta: f64,
    pub phi: f64,
    pub ucd: f64,
    pub hermite: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionRow {
    pub user: usize,
    pub lag: i64,
    pub re: f64,
    pub im: f64,
    pub blocker_p3: f64,
    pub blocker_p2: f64,
    pub blocker_p1: f64,
    pub blocker_p0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub antennas: usize,
    pub p_user: f64,
    pub p_blocker: f64,
    pub regime: String,
    pub exact: f64,
    pub dominant: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    #[serde(rename = "M")]
    pub m: usize,
    pub mean_rate: f64,
    pub stderr: f64,
    #[serde(rename = "blocker_dB")]
    pub blocker_db: f64,
    pub channel_type: String,
    pub analytic_rate: Option<f64>,
}

impl From<&crate::sim::RatePoint> for RateRow {
    fn from(p: &crate::sim::RatePoint) -> Self {
        Self {
            m: p.antennas,
            mean_rate: p.mean_rate,
            stderr: p.stderr,
            blocker_db: p.blocker_db,
            channel_type: p.channel_type.name().into(),
            analytic_rate: p.analytic_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Write `rows` as `<dir>/<name>.csv` or `.json`.
pub fn write_table<T: Serialize>(dir: &Path, name: &str, rows: &[T], format: OutputFormat) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Csv => {
            let path = dir.join(format!("{name}.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{name}.json"));
            std::fs::write(&path, serde_json::to_string_pretty(rows)?)?;
            Ok(path)
        }
    }
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Provenance of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub quick: bool,
    /// SHA-256 of the canonical JSON of the effective configuration.
    pub config_hash: String,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new<C: Serialize>(command: &str, seed: u64, threads: Option<usize>, quick: bool, config: &C) -> Result<Self> {
        Ok(Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            threads,
            quick,
            config_hash: config_hash(config)?,
            files: vec![],
        })
    }

    pub fn add(&mut self, path: &Path) {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.files.push(name);
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

pub fn config_hash<C: Serialize>(config: &C) -> Result<String> {
    // serde_json::Value keeps object keys sorted, which makes this canonical.
    let canonical = serde_json::to_string(&serde_json::to_value(config)?)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// One plot in the gnuplot hint file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotHint {
    pub file: String,
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
    pub xlabel: String,
    pub ylabel: String,
    pub logy: bool,
}

/// Write `plot.gp`: a gnuplot script reproducing the figures from the CSVs.
pub fn write_plot_hints(dir: &Path, hints: &[PlotHint]) -> Result<PathBuf> {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset grid\n");
    for h in hints {
        s.push_str(&format!(
            "\nset title '{}'\nset xlabel '{}'\nset ylabel '{}'\n{}\n",
            h.title,
            h.xlabel,
            h.ylabel,
            if h.logy { "set logscale y" } else { "unset logscale y" }
        ));
        let curves: Vec<String> = h
            .ys
            .iter()
            .map(|y| format!("'{}' using (column('{}')):(column('{}')) with lines title '{}'", h.file, h.x, y, y))
            .collect();
        s.push_str(&format!("plot {}\npause -1\n", curves.join(", \\\n     ")));
    }
    let path = dir.join("plot.gp");
    std::fs::write(&path, s)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_header_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            RateRow { m: 4, mean_rate: 0.1 + 0.2, stderr: 1e-300, blocker_db: 70.0, channel_type: "los".into(), analytic_rate: None },
            RateRow { m: 8, mean_rate: 1.0 / 3.0, stderr: 0.0, blocker_db: 80.0, channel_type: "los".into(), analytic_rate: Some(2.5) },
        ];
        let p = write_table(dir.path(), "rate", &rows, OutputFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("M,mean_rate,stderr,blocker_dB,channel_type,analytic_rate\n"));
        let back: Vec<RateRow> = read_csv(&p).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn hash_is_stable() {
        let a = config_hash(&serde_json::json!({"b": 1, "a": [1, 2]})).unwrap();
        let b = config_hash(&serde_json::json!({"a": [1, 2], "b": 1})).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }
}
