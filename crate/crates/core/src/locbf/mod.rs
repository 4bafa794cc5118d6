//! Location-assisted beam alignment and the exhaustive-search baseline.
//!
//! The pipeline perturbs the true AP/UE positions with the error model of a
//! localization service, bounds the departure and arrival angles by an angular
//! window around the estimated bearing, probes that window with designed
//! measurement beams, recovers the dominant path by OMP and finally points the
//! quantized data codebook at the recovered angles.

mod design;
mod exhaustive;
mod localization;
mod pipeline;
mod window;

pub use design::{aliases, design_measurement_beams, sub_ranges};
pub use exhaustive::exhaustive_search;
pub use localization::{perturb_position, LocalizationService};
pub use pipeline::{align_location_based, LocationBfConfig, MeasurementPlan};
pub use window::{angular_window, uncertainty_radius, AngularWindow, Side};

use crate::omp::SparseSolution;

/// Outcome of a beam-alignment procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSelection {
    /// Chosen TX (AP) beam in the data codebook.
    pub b_tx_star: usize,
    /// Chosen RX (UE) beam in the data codebook.
    pub b_rx_star: usize,
    pub tx_beams_used: usize,
    pub rx_beams_used: usize,
    /// Beam pairs probed: `tx_beams_used × rx_beams_used`.
    pub total_switchings: usize,
    /// OMP output; empty for the exhaustive search.
    pub estimated_paths: SparseSolution,
    pub estimated_aod: Option<f64>,
    pub estimated_aoa: Option<f64>,
    /// OMP found nothing and the window centers were used instead.
    pub fallback_used: bool,
}
