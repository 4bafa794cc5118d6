use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use super::config::ScenarioConfig;
use super::runner::RunOutput;
use super::HarnessError;
use crate::metrics::{empirical_cdf, TrialRecord};

pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

const TRIALS_HEADER: [&str; 8] = [
    "trial",
    "service",
    "method",
    "snr_db",
    "spectral_eff_bps_hz",
    "tx_beams",
    "total_switchings",
    "fallback",
];

const SUMMARY_HEADER: [&str; 10] = [
    "service",
    "method",
    "snr_db",
    "n_trials",
    "mean_spectral_eff_bps_hz",
    "tx_beams_p50",
    "tx_beams_p95",
    "tx_beams_p100",
    "mean_total_switchings",
    "fallback_count",
];

/// Paths of the files produced by [`write_results`].
#[derive(Debug, Clone)]
pub struct ResultFiles {
    pub trials: PathBuf,
    pub summary: PathBuf,
    pub manifest: PathBuf,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, HarnessError> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

/// Writes `trials.csv`, `summary.csv` and `manifest.toml` into `out_dir`,
/// creating it if needed.
pub fn write_results(output: &RunOutput, config: &ScenarioConfig, out_dir: &Path) -> Result<ResultFiles, HarnessError> {
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let files = ResultFiles {
        trials: out_dir.join(TRIALS_FILE),
        summary: out_dir.join(SUMMARY_FILE),
        manifest: out_dir.join(MANIFEST_FILE),
    };

    let mut w = csv_writer(&files.trials)?;
    w.write_record(TRIALS_HEADER).map_err(|e| io_err(&files.trials, e))?;
    for r in &output.records {
        w.write_record([
            r.trial.to_string(),
            r.service.clone(),
            r.method.clone(),
            r.snr_db.to_string(),
            format!("{:.6}", r.spectral_efficiency),
            r.tx_beams_used.to_string(),
            r.total_switchings.to_string(),
            r.fallback_used.to_string(),
        ])
        .map_err(|e| io_err(&files.trials, e))?;
    }
    w.flush().map_err(|e| io_err(&files.trials, e))?;

    let mut w = csv_writer(&files.summary)?;
    w.write_record(SUMMARY_HEADER).map_err(|e| io_err(&files.summary, e))?;
    for s in &output.summary {
        w.write_record([
            s.service.clone(),
            s.method.clone(),
            s.snr_db.to_string(),
            s.n_trials.to_string(),
            format!("{:.6}", s.mean_spectral_efficiency),
            s.tx_beams_p50.to_string(),
            s.tx_beams_p95.to_string(),
            s.tx_beams_p100.to_string(),
            format!("{:.3}", s.mean_total_switchings),
            s.fallback_count.to_string(),
        ])
        .map_err(|e| io_err(&files.summary, e))?;
    }
    w.flush().map_err(|e| io_err(&files.summary, e))?;

    let manifest = format!(
        "# mmwave-locbf run manifest: resolved scenario, reloadable with --config\n\
         # records = {}\n{}",
        output.records.len(),
        config.to_toml()
    );
    fs::write(&files.manifest, manifest).map_err(|e| io_err(&files.manifest, e))?;
    Ok(files)
}

#[derive(Deserialize)]
struct TrialRow {
    trial: u64,
    service: String,
    method: String,
    snr_db: f64,
    spectral_eff_bps_hz: f64,
    tx_beams: usize,
    total_switchings: usize,
    fallback: bool,
}

/// Reads a per-trial CSV produced by [`write_results`].
pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = rdr.headers().map_err(|e| io_err(path, e))?.clone();
    if header.iter().ne(TRIALS_HEADER) {
        return Err(io_err(
            path,
            format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        ));
    }
    rdr.deserialize::<TrialRow>()
        .map(|row| {
            let r = row.map_err(|e| io_err(path, e))?;
            Ok(TrialRecord {
                trial: r.trial,
                service: r.service,
                method: r.method,
                snr_db: r.snr_db,
                spectral_efficiency: r.spectral_eff_bps_hz,
                tx_beams_used: r.tx_beams,
                total_switchings: r.total_switchings,
                fallback_used: r.fallback,
            })
        })
        .collect()
}

/// Quantity summarized by the `cdf` post-processor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfMetric {
    /// Measurement beams at the AP; one sample per (trial, service).
    TxBeams,
    /// Beam pairs probed; one sample per (trial, service).
    TotalSwitchings,
    /// Spectral efficiency; one CDF per SNR.
    SpectralEff,
}

impl FromStr for CdfMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tx_beams" => Ok(Self::TxBeams),
            "total_switchings" => Ok(Self::TotalSwitchings),
            "spectral_eff_bps_hz" => Ok(Self::SpectralEff),
            other => Err(format!(
                "unknown metric {other:?} (expected tx_beams, total_switchings or spectral_eff_bps_hz)"
            )),
        }
    }
}

/// One step of an empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfRow {
    pub service: String,
    pub method: String,
    /// Set only for per-SNR metrics.
    pub snr_db: Option<f64>,
    pub value: f64,
    pub probability: f64,
}

/// Empirical CDFs of `metric` per (service, method), and per SNR for
/// spectral efficiency. Groups appear in first-seen order.
pub fn metric_cdf(records: &[TrialRecord], metric: CdfMetric) -> Result<Vec<CdfRow>, HarnessError> {
    type Key = (String, String, Option<u64>);
    let mut groups: Vec<(Key, Vec<f64>)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for r in records {
        let (snr, value) = match metric {
            CdfMetric::TxBeams => (None, r.tx_beams_used as f64),
            CdfMetric::TotalSwitchings => (None, r.total_switchings as f64),
            CdfMetric::SpectralEff => (Some(r.snr_db.to_bits()), r.spectral_efficiency),
        };
        // beam counts repeat across the SNR sweep of a trial
        if snr.is_none() && !seen.insert((r.trial, r.service.clone(), r.method.clone())) {
            continue;
        }
        let key = (r.service.clone(), r.method.clone(), snr);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(value),
            None => groups.push((key, vec![value])),
        }
    }
    let mut rows = Vec::new();
    for ((service, method, snr), values) in groups {
        for (value, probability) in empirical_cdf(&values)? {
            rows.push(CdfRow {
                service: service.clone(),
                method: method.clone(),
                snr_db: snr.map(f64::from_bits),
                value,
                probability,
            });
        }
    }
    Ok(rows)
}

/// Writes CDF rows as `service,method,snr_db,value,probability` CSV.
pub fn write_cdf_csv<W: std::io::Write>(rows: &[CdfRow], out: W) -> Result<(), HarnessError> {
    let err = |e: csv::Error| io_err(Path::new("<cdf output>"), e);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["service", "method", "snr_db", "value", "probability"])
        .map_err(err)?;
    for r in rows {
        w.write_record([
            r.service.clone(),
            r.method.clone(),
            r.snr_db.map(|s| s.to_string()).unwrap_or_default(),
            r.value.to_string(),
            format!("{:.6}", r.probability),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| io_err(Path::new("<cdf output>"), e))
}
