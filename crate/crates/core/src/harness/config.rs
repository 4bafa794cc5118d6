use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::locbf::LocalizationService;

/// Beam-selection strategy evaluated by the runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LocationCs,
    Exhaustive,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::LocationCs => "location_cs",
            Method::Exhaustive => "exhaustive",
        }
    }
}

/// A complete Monte Carlo scenario. Every field has a default, so an empty
/// TOML file is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_ap: usize,
    pub n_ue: usize,
    pub element_spacing_wavelengths: f64,
    pub grid_n: usize,
    pub n_paths: usize,
    pub pathloss_exp: f64,
    pub cell_min_radius_m: f64,
    pub cell_max_radius_m: f64,
    pub beamwidth_deg: f64,
    /// Informational only.
    pub carrier_ghz: f64,
    /// Informational only.
    pub bandwidth_mhz: f64,
    /// Receiver noise power ρ²; the transmit power of an SNR point is
    /// `noise_power · 10^(snr/10)`.
    pub noise_power: f64,
    pub snr_db_sweep: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: u64,
    #[serde(with = "seed_format")]
    pub seed: u64,
    pub services: Vec<LocalizationService>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_ap: 64,
            n_ue: 64,
            element_spacing_wavelengths: 0.5,
            grid_n: 72,
            n_paths: 3,
            pathloss_exp: 3.0,
            cell_min_radius_m: 55.0,
            cell_max_radius_m: 150.0,
            beamwidth_deg: 5.0,
            carrier_ghz: 28.0,
            bandwidth_mhz: 100.0,
            noise_power: 1.0,
            snr_db_sweep: (0..=8).map(|k| -40.0 + 5.0 * k as f64).collect(),
            methods: vec![Method::LocationCs, Method::Exhaustive],
            trials: 200,
            seed: 1,
            services: LocalizationService::defaults(),
        }
    }
}

impl ScenarioConfig {
    /// Checks every field, naming the first offending one.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |field: &str, message: String| {
            Err(HarnessError::InvalidField {
                field: field.to_string(),
                message,
            })
        };
        for (field, v) in [("n_ap", self.n_ap), ("n_ue", self.n_ue), ("n_paths", self.n_paths)] {
            if v == 0 {
                return bad(field, "must be at least 1".into());
            }
        }
        if self.grid_n < 2 {
            return bad("grid_n", format!("must be at least 2, got {}", self.grid_n));
        }
        if !(self.element_spacing_wavelengths > 0.0 && self.element_spacing_wavelengths.is_finite()) {
            return bad("element_spacing_wavelengths", "must be positive".into());
        }
        if !self.pathloss_exp.is_finite() {
            return bad("pathloss_exp", "must be finite".into());
        }
        if !(self.cell_min_radius_m > 0.0) {
            return bad("cell_min_radius_m", "must be positive".into());
        }
        if !(self.cell_max_radius_m > self.cell_min_radius_m && self.cell_max_radius_m.is_finite()) {
            return bad(
                "cell_max_radius_m",
                "must be finite and larger than cell_min_radius_m".into(),
            );
        }
        if !(self.beamwidth_deg > 0.0 && self.beamwidth_deg <= 360.0) {
            return bad(
                "beamwidth_deg",
                format!("must be in (0, 360], got {}", self.beamwidth_deg),
            );
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return bad("noise_power", "must be positive".into());
        }
        if self.snr_db_sweep.is_empty() {
            return bad("snr_db_sweep", "must not be empty".into());
        }
        if self.snr_db_sweep.iter().any(|s| !s.is_finite()) {
            return bad("snr_db_sweep", "values must be finite".into());
        }
        if self.methods.is_empty() {
            return bad("methods", "must not be empty".into());
        }
        if self.methods.iter().collect::<BTreeSet<_>>().len() != self.methods.len() {
            return bad("methods", "contains duplicates".into());
        }
        if self.trials == 0 {
            return bad("trials", "must be at least 1".into());
        }
        if self.methods.contains(&Method::LocationCs) && self.services.is_empty() {
            return bad("services", "location_cs needs at least one service".into());
        }
        let mut names = BTreeSet::new();
        for s in &self.services {
            if s.name.is_empty()
                || !s
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return bad(
                    "services",
                    format!("service name {:?} must be non-empty [A-Za-z0-9_-]", s.name),
                );
            }
            if s.name == super::EXHAUSTIVE_SERVICE {
                return bad("services", format!("service name {:?} is reserved", s.name));
            }
            if !names.insert(s.name.as_str()) {
                return bad("services", format!("duplicate service {:?}", s.name));
            }
            if !(s.sigma_m >= 0.0 && s.sigma_m.is_finite()) {
                return bad("services", format!("sigma_m of {:?} must be finite and >= 0", s.name));
            }
        }
        Ok(())
    }

    /// Keeps only the named services, in the given order. Names missing from
    /// the configuration fall back to the built-in gps/wifi/lte defaults.
    pub fn select_services(&mut self, names: &[String]) -> Result<(), HarnessError> {
        let mut picked = Vec::with_capacity(names.len());
        for name in names {
            let found = self
                .services
                .iter()
                .chain(LocalizationService::defaults().iter())
                .find(|s| &s.name == name)
                .cloned();
            match found {
                Some(s) => picked.push(s),
                None => {
                    return Err(HarnessError::InvalidField {
                        field: "services".into(),
                        message: format!("unknown service {name:?}"),
                    })
                }
            }
        }
        self.services = picked;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config is always serializable")
    }
}

/// Parses a TOML scenario; missing fields take their defaults.
pub fn parse_config(text: &str, origin: &str) -> Result<ScenarioConfig, HarnessError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        HarnessError::Parse {
            origin: origin.to_string(),
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and validates a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text, &path.display().to_string())
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// TOML integers are signed 64-bit, so seeds above `i64::MAX` are written as
/// strings. Both forms are accepted on input.
mod seed_format {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Int(v) => u64::try_from(v).map_err(|_| serde::de::Error::custom("seed must be non-negative")),
            Raw::Text(t) => t
                .trim()
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("invalid seed {t:?}"))),
        }
    }
}
