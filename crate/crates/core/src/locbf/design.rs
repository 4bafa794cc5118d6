use std::ops::Range;

use nalgebra::Cholesky;
use num_complex::Complex64;

use super::window::AngularWindow;
use crate::arrays::{ArrayConfig, Codebook, CodebookKind};
use crate::error::{invalid, Error, Result};
use crate::sensing::AngleGrid;
use crate::CMatrix;

/// Diagonal loading of the beam-synthesis normal equations, relative to the
/// mean diagonal of the grid Gram matrix. Near endfire adjacent grid vectors
/// are almost collinear and exact nulls would need superdirective weights;
/// this much loading keeps a single-point beam within ~3% of the matched gain.
const SYNTHESIS_REGULARIZATION: f64 = 1.0;

/// Splits `0..n_points` into `m` contiguous, disjoint, near-equal runs that
/// tile it exactly. `m` is clamped to `1..=n_points`.
pub fn sub_ranges(n_points: usize, m: usize) -> Vec<Range<usize>> {
    let m = m.clamp(1, n_points.max(1));
    (0..m).map(|k| (k * n_points / m)..((k + 1) * n_points / m)).collect()
}

/// Whether grid angles `a` and `b` have identical array responses.
///
/// A ULA only sees `d·sin θ` modulo 1, so e.g. `θ` and `π - θ` coincide.
pub fn aliases(grid: &AngleGrid, cfg: &ArrayConfig, a: usize, b: usize) -> bool {
    let delta = cfg.spacing_wavelengths() * (grid.angle(a).sin() - grid.angle(b).sin());
    (delta - delta.round()).abs() < 1e-9
}

/// Flat-top measurement beams covering `window`, one per sub-range.
///
/// Beam `m` is the regularized least-squares weight vector whose projection
/// `wᴴ p(ψ̄_u)` equals `C = √N_el` on its sub-range and `0` on every other grid
/// angle, then scaled to unit norm. Grid angles that alias a sub-range angle
/// necessarily see the same projection and are given the target `C` as well.
pub fn design_measurement_beams(
    window: &AngularWindow,
    m_beams: usize,
    grid: &AngleGrid,
    cfg: &ArrayConfig,
    beamwidth_deg: f64,
) -> Result<Codebook> {
    if m_beams == 0 {
        return invalid("need at least one measurement beam");
    }
    if window.n_points() == 0 {
        return invalid("empty angular window");
    }
    let n = grid.n_points();
    let el = cfg.n_elements();
    let steering = grid.steering_matrix(cfg);

    // w = A (AᴴA + λI)⁻¹ t with A the el × N grid steering matrix
    let mut gram = steering.ad_mul(&steering);
    let load = SYNTHESIS_REGULARIZATION * el as f64;
    for i in 0..n {
        gram[(i, i)] += Complex64::new(load, 0.0);
    }
    let chol = Cholesky::new(gram)
        .ok_or_else(|| Error::DegenerateInput("beam synthesis system is not positive definite".into()))?;

    let window_idx: Vec<usize> = window.indices().collect();
    let ranges = sub_ranges(window_idx.len(), m_beams);
    let c = Complex64::new((el as f64).sqrt(), 0.0);
    let mut targets = CMatrix::zeros(n, ranges.len());
    for (b, range) in ranges.iter().enumerate() {
        let members = &window_idx[range.clone()];
        for u in 0..n {
            if members.iter().any(|&m| m == u || aliases(grid, cfg, m, u)) {
                targets[(u, b)] = c;
            }
        }
    }
    let weights = &steering * chol.solve(&targets);
    let width = beamwidth_deg.max(window.span_deg() / ranges.len() as f64);
    Codebook::from_weights(weights, width, CodebookKind::Designed)
}
