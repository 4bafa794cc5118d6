use super::BeamSelection;
use crate::arrays::Codebook;
use crate::error::{invalid, Result};
use crate::omp::SparseSolution;
use crate::CMatrix;

/// Tries every `(b_tx, b_rx)` pair and keeps the one maximizing
/// `|w_rxᴴ H w_tx|²`; ties go to the smallest `b_tx`, then `b_rx`.
pub fn exhaustive_search(h: &CMatrix, w_tx: &Codebook, w_rx: &Codebook) -> Result<BeamSelection> {
    if h.ncols() != w_tx.n_elements() || h.nrows() != w_rx.n_elements() {
        return invalid("channel and codebook dimensions disagree");
    }
    let gains = w_rx.weights().ad_mul(&(h * w_tx.weights()));
    let (mut best_tx, mut best_rx, mut best) = (0, 0, f64::NEG_INFINITY);
    for b_tx in 0..w_tx.n_beams() {
        for b_rx in 0..w_rx.n_beams() {
            let g = gains[(b_rx, b_tx)].norm_sqr();
            if g > best {
                (best_tx, best_rx, best) = (b_tx, b_rx, g);
            }
        }
    }
    Ok(BeamSelection {
        b_tx_star: best_tx,
        b_rx_star: best_rx,
        tx_beams_used: w_tx.n_beams(),
        rx_beams_used: w_rx.n_beams(),
        total_switchings: w_tx.n_beams() * w_rx.n_beams(),
        estimated_paths: SparseSolution::default(),
        estimated_aod: None,
        estimated_aoa: None,
        fallback_used: false,
    })
}
