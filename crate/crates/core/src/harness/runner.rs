use rayon::prelude::*;

use super::config::{Method, ScenarioConfig};
use super::{HarnessError, EXHAUSTIVE_SERVICE};
use crate::arrays::ArrayConfig;
use crate::channel::{channel_matrix, normalize_channel, sample_channel, Geometry};
use crate::locbf::{exhaustive_search, LocationBfConfig, MeasurementPlan};
use crate::metrics::{aggregate, spectral_efficiency, SummaryRow, TrialRecord};
use crate::rng::{lane_for, stream, CHANNEL_LANE};
use crate::sensing::AngleGrid;

/// A validated configuration with its derived simulation objects.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub geometry: Geometry,
    pub bf: LocationBfConfig,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let geometry = Geometry::new(config.cell_min_radius_m, config.cell_max_radius_m, config.pathloss_exp)?;
        let ap = ArrayConfig::new(config.n_ap, config.element_spacing_wavelengths)?;
        let ue = ArrayConfig::new(config.n_ue, config.element_spacing_wavelengths)?;
        let bf = LocationBfConfig::new(
            AngleGrid::new(config.grid_n)?,
            ap,
            ue,
            config.beamwidth_deg,
            config.n_paths,
        )?;
        Ok(Self { config, geometry, bf })
    }

    fn tx_power(&self, snr_db: f64) -> f64 {
        self.config.noise_power * 10f64.powf(snr_db / 10.0)
    }
}

/// Per-trial records in trial order plus the aggregated summary.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Runs every (service, method, SNR) cell of one trial on a single channel
/// realization. Exhaustive rows come first, then each service in config
/// order, SNRs in sweep order.
pub fn run_trial(scenario: &Scenario, trial: u64) -> Result<Vec<TrialRecord>, HarnessError> {
    let cfg = &scenario.config;
    let bf = &scenario.bf;
    let mut rng = stream(cfg.seed, trial, CHANNEL_LANE);
    let realization = sample_channel(&scenario.geometry, cfg.n_paths, &mut rng)?;
    let h = normalize_channel(&channel_matrix(&realization, &bf.ap_array, &bf.ue_array))?;
    let mut records = Vec::new();

    if cfg.methods.contains(&Method::Exhaustive) {
        let sel = exhaustive_search(&h, &bf.data_tx, &bf.data_rx)?;
        for &snr_db in &cfg.snr_db_sweep {
            let se = spectral_efficiency(
                &h,
                bf.data_tx.beam(sel.b_tx_star),
                bf.data_rx.beam(sel.b_rx_star),
                scenario.tx_power(snr_db),
                cfg.noise_power,
            )?;
            records.push(TrialRecord {
                trial,
                service: EXHAUSTIVE_SERVICE.into(),
                method: Method::Exhaustive.as_str().into(),
                snr_db,
                spectral_efficiency: se,
                tx_beams_used: sel.tx_beams_used,
                total_switchings: sel.total_switchings,
                fallback_used: false,
            });
        }
    }

    if cfg.methods.contains(&Method::LocationCs) {
        let noise_stddev = cfg.noise_power.sqrt();
        for service in &cfg.services {
            let mut rng = stream(cfg.seed, trial, lane_for(&service.name));
            let plan = MeasurementPlan::prepare(&h, &realization, service, service, bf, &mut rng)?;
            for &snr_db in &cfg.snr_db_sweep {
                let p = scenario.tx_power(snr_db);
                let sel = plan.align(bf, p, noise_stddev, &mut rng)?;
                let se = spectral_efficiency(
                    &h,
                    bf.data_tx.beam(sel.b_tx_star),
                    bf.data_rx.beam(sel.b_rx_star),
                    p,
                    cfg.noise_power,
                )?;
                records.push(TrialRecord {
                    trial,
                    service: service.name.clone(),
                    method: Method::LocationCs.as_str().into(),
                    snr_db,
                    spectral_efficiency: se,
                    tx_beams_used: sel.tx_beams_used,
                    total_switchings: sel.total_switchings,
                    fallback_used: sel.fallback_used,
                });
            }
        }
    }
    Ok(records)
}

/// Runs all trials on the rayon pool; records keep trial order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput, HarnessError> {
    let scenario = Scenario::new(config.clone())?;
    let per_trial: Vec<Vec<TrialRecord>> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(&scenario, t))
        .collect::<Result<_, _>>()?;
    let records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    let summary = aggregate(&records);
    Ok(RunOutput { records, summary })
}
