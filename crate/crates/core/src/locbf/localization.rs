use rand::Rng;

use crate::channel::Point2;
use crate::error::{invalid, Result};

/// A positioning service, reduced to its error scale σ in meters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizationService {
    pub name: String,
    pub sigma_m: f64,
}

impl LocalizationService {
    pub fn new(name: impl Into<String>, sigma_m: f64) -> Result<Self> {
        if !(sigma_m >= 0.0) || !sigma_m.is_finite() {
            return invalid(format!("localization sigma must be a finite value >= 0, got {sigma_m}"));
        }
        Ok(Self {
            name: name.into(),
            sigma_m,
        })
    }

    pub fn gps() -> Self {
        Self {
            name: "gps".into(),
            sigma_m: 5.0,
        }
    }

    pub fn wifi() -> Self {
        Self {
            name: "wifi".into(),
            sigma_m: 10.0,
        }
    }

    pub fn lte() -> Self {
        Self {
            name: "lte".into(),
            sigma_m: 40.0,
        }
    }

    pub fn defaults() -> Vec<Self> {
        vec![Self::gps(), Self::wifi(), Self::lte()]
    }
}

/// Adds an independent error to each coordinate: magnitude uniform on
/// `[0, 2σ]` (mean σ) with a uniformly random sign.
pub fn perturb_position<R: Rng + ?Sized>(true_pos: Point2, sigma_m: f64, rng: &mut R) -> Point2 {
    let mut offset = || {
        let magnitude = 2.0 * sigma_m * rng.random::<f64>();
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    };
    let dx = offset();
    let dy = offset();
    Point2::new(true_pos.x + dx, true_pos.y + dy)
}
