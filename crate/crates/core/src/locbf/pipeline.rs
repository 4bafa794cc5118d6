use num_complex::Complex64;
use rand::Rng;

use super::design::{aliases, design_measurement_beams};
use super::localization::{perturb_position, LocalizationService};
use super::window::{angular_window, AngularWindow, Side};
use super::BeamSelection;
use crate::arrays::{array_response, quantized_codebook, wrap_angle, wrap_to_pi, ArrayConfig, Codebook};
use crate::channel::{ChannelRealization, Point2};
use crate::error::{invalid, Result};
use crate::omp::{self, OmpConfig, SparseSolution};
use crate::sensing::{
    add_filtered_noise, build_sensing_factors, noiseless_sweep, vectorize, AngleGrid, SensingFactors, SensingProblem,
};
use crate::{CMatrix, CVector};

/// Everything the location-based procedure needs besides the channel.
#[derive(Debug, Clone)]
pub struct LocationBfConfig {
    pub grid: AngleGrid,
    pub ap_array: ArrayConfig,
    pub ue_array: ArrayConfig,
    /// Angular width covered by one measurement beam.
    pub beamwidth_deg: f64,
    pub omp: OmpConfig,
    /// Quantized codebook the final AP beam is taken from.
    pub data_tx: Codebook,
    /// Quantized codebook the final UE beam is taken from.
    pub data_rx: Codebook,
}

impl LocationBfConfig {
    /// Data codebooks with `round(360 / beamwidth)` quantized beams per side.
    pub fn new(
        grid: AngleGrid,
        ap_array: ArrayConfig,
        ue_array: ArrayConfig,
        beamwidth_deg: f64,
        n_paths: usize,
    ) -> Result<Self> {
        if !(beamwidth_deg > 0.0 && beamwidth_deg <= 360.0) {
            return invalid(format!("beamwidth must be in (0, 360] degrees, got {beamwidth_deg}"));
        }
        let n_beams = codebook_size(beamwidth_deg);
        Ok(Self {
            grid,
            ap_array,
            ue_array,
            beamwidth_deg,
            omp: OmpConfig::for_paths(n_paths)?,
            data_tx: quantized_codebook(ap_array.n_elements(), n_beams)?,
            data_rx: quantized_codebook(ue_array.n_elements(), n_beams)?,
        })
    }
}

/// Even number of beams closest to `360 / beamwidth`.
pub(crate) fn codebook_size(beamwidth_deg: f64) -> usize {
    let b = (360.0 / beamwidth_deg).round() as usize;
    (b + b % 2).max(2)
}

/// Localization outcome and measurement codebooks for one link.
///
/// Only the measurement noise differs between repeated [`MeasurementPlan::align`]
/// calls, which lets one plan serve a whole SNR sweep.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    pub est_ap: Point2,
    pub est_ue: Point2,
    pub aod_window: AngularWindow,
    pub aoa_window: AngularWindow,
    pub w_tx: Codebook,
    pub w_rx: Codebook,
    /// Sensing factors at unit transmit power.
    factors: SensingFactors,
    /// Noise-free measurements at unit transmit power.
    clean: CMatrix,
}

impl MeasurementPlan {
    /// Perturbs both positions, derives the AoD/AoA windows and designs the
    /// measurement beams. `h` is the (normalized) channel being probed.
    pub fn prepare<R: Rng + ?Sized>(
        h: &CMatrix,
        realization: &ChannelRealization,
        service_ap: &LocalizationService,
        service_ue: &LocalizationService,
        cfg: &LocationBfConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let est_ap = perturb_position(realization.ap_position, service_ap.sigma_m, rng);
        let est_ue = perturb_position(realization.ue_position, service_ue.sigma_m, rng);
        let (s_ap, s_ue) = (service_ap.sigma_m, service_ue.sigma_m);
        let aod_window = angular_window(est_ap, est_ue, s_ap, s_ue, &cfg.grid, Side::Aod);
        let aoa_window = angular_window(est_ap, est_ue, s_ap, s_ue, &cfg.grid, Side::Aoa);
        let w_tx = design_measurement_beams(
            &aod_window,
            aod_window.beam_count(cfg.beamwidth_deg),
            &cfg.grid,
            &cfg.ap_array,
            cfg.beamwidth_deg,
        )?;
        let w_rx = design_measurement_beams(
            &aoa_window,
            aoa_window.beam_count(cfg.beamwidth_deg),
            &cfg.grid,
            &cfg.ue_array,
            cfg.beamwidth_deg,
        )?;
        let factors = build_sensing_factors(&w_tx, &w_rx, &cfg.grid, &cfg.ap_array, &cfg.ue_array, 1.0)?;
        let clean = noiseless_sweep(h, &w_tx, &w_rx, 1.0)?;
        Ok(Self {
            est_ap,
            est_ue,
            aod_window,
            aoa_window,
            w_tx,
            w_rx,
            factors,
            clean,
        })
    }

    pub fn tx_beams_used(&self) -> usize {
        self.w_tx.n_beams()
    }

    pub fn rx_beams_used(&self) -> usize {
        self.w_rx.n_beams()
    }

    /// Noisy sweep at `tx_power`, sparse recovery, then data-beam selection.
    pub fn align<R: Rng + ?Sized>(
        &self,
        cfg: &LocationBfConfig,
        tx_power: f64,
        noise_stddev: f64,
        rng: &mut R,
    ) -> Result<BeamSelection> {
        if !(tx_power >= 0.0) {
            return invalid("transmit power must be non-negative");
        }
        let mut y = &self.clean * Complex64::new(tx_power.sqrt(), 0.0);
        add_filtered_noise(&mut y, &self.w_rx, noise_stddev, rng)?;
        let mut factors = self.factors.clone();
        factors.tx_power = tx_power;
        let problem = SensingProblem::new(factors, vectorize(&y))?;
        let solution = omp::solve(&problem, &cfg.omp)?;

        let (aod, aoa, fallback) = match solution.strongest() {
            Some(s) => {
                let (aod, aoa) = self.refine_strongest(cfg, &problem, &solution, s)?;
                (aod, aoa, false)
            }
            None => (self.aod_window.center(), self.aoa_window.center(), true),
        };

        let b_tx_star = cfg.data_tx.best_beam_towards(aod, &cfg.ap_array)?;
        let b_rx_star = cfg.data_rx.best_beam_towards(aoa, &cfg.ue_array)?;
        Ok(BeamSelection {
            b_tx_star,
            b_rx_star,
            tx_beams_used: self.tx_beams_used(),
            rx_beams_used: self.rx_beams_used(),
            total_switchings: self.tx_beams_used() * self.rx_beams_used(),
            estimated_paths: solution,
            estimated_aod: Some(aod),
            estimated_aoa: Some(aoa),
            fallback_used: fallback,
        })
    }

    /// Continuous AoD/AoA of the strongest recovered atom.
    ///
    /// The grid angles are moved within their grid cell (and within the angular
    /// window) to maximize the normalized fit of the single-path model to the
    /// measurements left after removing the other atoms. A move is only kept
    /// if it improves the fit, so an uninformative sweep leaves the grid angle.
    fn refine_strongest(
        &self,
        cfg: &LocationBfConfig,
        problem: &SensingProblem,
        solution: &SparseSolution,
        strongest: usize,
    ) -> Result<(f64, f64)> {
        let mut y = problem.y_v.clone();
        for (k, (pair, g)) in solution.support.iter().zip(&solution.gains).enumerate() {
            if k != strongest {
                y -= problem.implied_phi_column(pair.u, pair.v)? * *g;
            }
        }
        let y = CMatrix::from_column_slice(self.w_rx.n_beams(), self.w_tx.n_beams(), y.as_slice());
        let pair = solution.support[strongest];
        let fit = SinglePathFit {
            w_tx: &self.w_tx,
            w_rx: &self.w_rx,
            ap: &cfg.ap_array,
            ue: &cfg.ue_array,
        };
        let u = in_window_alias(&self.aod_window, &cfg.grid, &cfg.ap_array, pair.u);
        let v = in_window_alias(&self.aoa_window, &cfg.grid, &cfg.ue_array, pair.v);
        let (tx_lo, tx_hi, mut tx_off) = cell_interval(&self.aod_window, &cfg.grid, u);
        let (rx_lo, rx_hi, mut rx_off) = cell_interval(&self.aoa_window, &cfg.grid, v);
        let aod_at = |off: f64| wrap_angle(self.aod_window.center() + off);
        let aoa_at = |off: f64| wrap_angle(self.aoa_window.center() + off);

        for _ in 0..2 {
            let rx_atom = fit.rx_atom(aoa_at(rx_off));
            let u = y.transpose() * rx_atom.map(|c| c.conj());
            tx_off = line_search(tx_lo, tx_hi, tx_off, |off| {
                let a = fit.tx_atom(aod_at(off));
                normalized_fit(&a, &u)
            });
            let tx_atom = fit.tx_atom(aod_at(tx_off));
            let v = &y * tx_atom.map(|c| c.conj());
            rx_off = line_search(rx_lo, rx_hi, rx_off, |off| {
                let b = fit.rx_atom(aoa_at(off));
                normalized_fit(&b, &v)
            });
        }
        Ok((aod_at(tx_off), aoa_at(rx_off)))
    }
}

struct SinglePathFit<'a> {
    w_tx: &'a Codebook,
    w_rx: &'a Codebook,
    ap: &'a ArrayConfig,
    ue: &'a ArrayConfig,
}

impl SinglePathFit<'_> {
    /// `W_txᵀ conj(p_AP(ψ))`.
    fn tx_atom(&self, aod: f64) -> CVector {
        self.w_tx
            .weights()
            .ad_mul(array_response(aod, self.ap).as_vector())
            .map(|c| c.conj())
    }

    /// `W_rxᴴ p_UE(φ)`.
    fn rx_atom(&self, aoa: f64) -> CVector {
        self.w_rx.weights().ad_mul(array_response(aoa, self.ue).as_vector())
    }
}

/// `|aᴴ x|² / ‖a‖²`, zero for a vanishing atom.
fn normalized_fit(a: &CVector, x: &CVector) -> f64 {
    let n = a.norm_squared();
    if n > 0.0 {
        a.dotc(x).norm_sqr() / n
    } else {
        0.0
    }
}

/// An in-window grid index with the same array response as `index`, if any.
/// OMP cannot tell such indices apart and its tie-break may return either.
fn in_window_alias(window: &AngularWindow, grid: &AngleGrid, cfg: &ArrayConfig, index: usize) -> usize {
    if window.contains(index) {
        return index;
    }
    window
        .indices()
        .find(|&k| aliases(grid, cfg, k, index))
        .unwrap_or(index)
}

/// Offsets (relative to the window center) bounding the grid cell of `index`,
/// plus the starting offset. Cells of in-window points are cut to the window.
fn cell_interval(window: &AngularWindow, grid: &AngleGrid, index: usize) -> (f64, f64, f64) {
    let step = grid.spacing();
    let center_off = wrap_to_pi(grid.angle(index) - window.center());
    let hw = window.half_width();
    let (mut lo, mut hi) = (center_off - step / 2.0, center_off + step / 2.0);
    if !window.is_full() && window.contains(index) {
        lo = lo.max(-hw);
        hi = hi.min(hw);
    }
    if lo > hi {
        let p = center_off.clamp(-hw, hw);
        return (p, p, p);
    }
    (lo, hi, center_off.clamp(lo, hi))
}

/// Maximizes `f` on `[lo, hi]` by successive zoomed sampling; returns `start`
/// unless a point does measurably better.
fn line_search(lo: f64, hi: f64, start: f64, f: impl Fn(f64) -> f64) -> f64 {
    const SAMPLES: usize = 9;
    const ZOOMS: usize = 4;
    let base = f(start);
    if hi - lo <= 0.0 {
        return start;
    }
    let (mut best_x, mut best_f) = (start, base);
    let (mut a, mut b) = (lo, hi);
    for _ in 0..ZOOMS {
        let step = (b - a) / (SAMPLES - 1) as f64;
        for i in 0..SAMPLES {
            let x = a + step * i as f64;
            let fx = f(x);
            if fx > best_f {
                (best_x, best_f) = (x, fx);
            }
        }
        a = (best_x - step).max(lo);
        b = (best_x + step).min(hi);
    }
    if best_f > base * (1.0 + 1e-9) {
        best_x
    } else {
        start
    }
}

/// Full location-based alignment for one link: localization, windowing, beam
/// design, noisy sweep, OMP and data-beam selection.
#[allow(clippy::too_many_arguments)]
pub fn align_location_based<R: Rng + ?Sized>(
    h: &CMatrix,
    realization: &ChannelRealization,
    service_ap: &LocalizationService,
    service_ue: &LocalizationService,
    cfg: &LocationBfConfig,
    tx_power: f64,
    noise_stddev: f64,
    rng: &mut R,
) -> Result<BeamSelection> {
    MeasurementPlan::prepare(h, realization, service_ap, service_ue, cfg, rng)?.align(cfg, tx_power, noise_stddev, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_for_positions, channel_matrix, normalize_channel, sample_channel, Geometry};
    use crate::locbf::exhaustive_search;
    use crate::rng::stream;

    fn config(n_el: usize, n_paths: usize) -> LocationBfConfig {
        let arr = ArrayConfig::half_wavelength(n_el).unwrap();
        LocationBfConfig::new(AngleGrid::new(72).unwrap(), arr, arr, 5.0, n_paths).unwrap()
    }

    fn exact() -> LocationService {
        LocalizationService::new("exact", 0.0).unwrap()
    }

    use super::LocalizationService as LocationService;

    #[test]
    fn codebook_size_from_beamwidth() {
        assert_eq!(codebook_size(5.0), 72);
        assert_eq!(codebook_size(7.0), 52);
        assert_eq!(codebook_size(360.0), 2);
    }

    #[test]
    fn exact_positions_single_path_matches_exhaustive() {
        let cfg = config(64, 1);
        for trial in 0..20 {
            let mut rng = stream(77, trial, 0);
            let ch = sample_channel(&Geometry::default(), 1, &mut rng).unwrap();
            let h = normalize_channel(&channel_matrix(&ch, &cfg.ap_array, &cfg.ue_array)).unwrap();
            let sel = align_location_based(&h, &ch, &exact(), &exact(), &cfg, 1.0, 0.0, &mut rng).unwrap();
            let ex = exhaustive_search(&h, &cfg.data_tx, &cfg.data_rx).unwrap();
            assert_eq!(
                (sel.b_tx_star, sel.b_rx_star),
                (ex.b_tx_star, ex.b_rx_star),
                "trial {trial}"
            );
            assert_eq!(sel.tx_beams_used, 1);
            assert!(!sel.fallback_used);
        }
    }

    #[test]
    fn saturated_windows_use_every_beam() {
        let cfg = config(16, 2);
        let mut rng = stream(3, 0, 0);
        let ch = channel_for_positions(Point2::default(), Point2::new(20.0, 5.0), 3.0, 2, &mut rng).unwrap();
        let h = normalize_channel(&channel_matrix(&ch, &cfg.ap_array, &cfg.ue_array)).unwrap();
        let lte = LocalizationService::new("huge", 100.0).unwrap();
        let sel = align_location_based(&h, &ch, &lte, &lte, &cfg, 1.0, 0.1, &mut rng).unwrap();
        assert_eq!(sel.tx_beams_used, 72);
        assert_eq!(sel.rx_beams_used, 72);
        assert_eq!(sel.total_switchings, 72 * 72);
    }

    #[test]
    fn same_seed_same_selection() {
        let cfg = config(32, 3);
        let run = || {
            let mut rng = stream(5, 1, 0);
            let ch = sample_channel(&Geometry::default(), 3, &mut rng).unwrap();
            let h = normalize_channel(&channel_matrix(&ch, &cfg.ap_array, &cfg.ue_array)).unwrap();
            align_location_based(
                &h,
                &ch,
                &LocalizationService::wifi(),
                &LocalizationService::wifi(),
                &cfg,
                0.1,
                1.0,
                &mut rng,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn pure_noise_can_fall_back_to_window_centers() {
        let cfg = config(16, 1);
        let mut rng = stream(8, 0, 0);
        let ch = channel_for_positions(Point2::default(), Point2::new(80.0, 0.0), 3.0, 1, &mut rng).unwrap();
        let h = normalize_channel(&channel_matrix(&ch, &cfg.ap_array, &cfg.ue_array)).unwrap();
        // zero power and zero noise: nothing to recover
        let sel = align_location_based(&h, &ch, &exact(), &exact(), &cfg, 0.0, 0.0, &mut rng);
        // the all-zero sensing matrix is reported, not silently ignored
        assert!(sel.is_err());
        let plan = MeasurementPlan::prepare(&h, &ch, &exact(), &exact(), &cfg, &mut rng).unwrap();
        let sel = plan.align(&cfg, 1e-30, 0.0, &mut rng).unwrap();
        assert!(!sel.fallback_used);
    }

    #[test]
    fn line_search_keeps_start_on_flat_objective() {
        assert_eq!(line_search(-1.0, 1.0, 0.25, |_| 3.0), 0.25);
        let x = line_search(-1.0, 1.0, 0.0, |x| -(x - 0.4) * (x - 0.4));
        assert!((x - 0.4).abs() < 0.01);
    }
}
