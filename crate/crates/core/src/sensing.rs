//! Beam-swept measurements and the factored sparse-recovery problem.
//!
//! With TX beams `W_tx` and RX beams `W_rx`, the measurement matrix
//! `Y = √P W_rxᴴ H W_tx + noise` vectorizes (column-major) to
//! `y = √P (W_txᵀ ⊗ W_rxᴴ) vec(H)`. Restricting `H` to paths on an `N`-point
//! angle grid gives `y = Φ z` where column `u·N + v` of `Φ` is
//! `√P · (W_txᵀ p_AP*(ψ̄_u)) ⊗ (W_rxᴴ p_UE(φ̄_v))`.
//!
//! The `N_AP·N_UE × N²` dictionary is never formed. [`SensingFactors`] keeps
//! only the two small factors `W_txᵀ P_AP*` (`M_tx × N`) and `W_rxᴴ P_UE`
//! (`M_rx × N`).

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::arrays::{array_response, ArrayConfig, Codebook};
use crate::channel::complex_gaussian;
use crate::error::{invalid, Result};
use crate::{CMatrix, CVector};

/// Uniform grid `{2πk/N : k = 0..N-1}` of quantized angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleGrid {
    n_points: usize,
}

impl AngleGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return invalid(format!("angle grid needs at least 2 points, got {n_points}"));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n_points as f64
    }

    pub fn angle(&self, k: usize) -> f64 {
        TAU * (k % self.n_points) as f64 / self.n_points as f64
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.angle(k)).collect()
    }

    /// Steering vectors of every grid angle as columns (`n_elements × N`).
    pub fn steering_matrix(&self, cfg: &ArrayConfig) -> CMatrix {
        let mut m = CMatrix::zeros(cfg.n_elements(), self.n_points);
        for k in 0..self.n_points {
            m.set_column(k, array_response(self.angle(k), cfg).as_vector());
        }
        m
    }
}

/// Grid coordinates of one dictionary atom: AoD index `u`, AoA index `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPair {
    pub u: usize,
    pub v: usize,
}

fn check_dims(h: &CMatrix, w_tx: &Codebook, w_rx: &Codebook) -> Result<()> {
    if h.ncols() != w_tx.n_elements() || h.nrows() != w_rx.n_elements() {
        return invalid(format!(
            "channel is {}x{}, codebooks expect {}x{}",
            h.nrows(),
            h.ncols(),
            w_rx.n_elements(),
            w_tx.n_elements()
        ));
    }
    Ok(())
}

/// Noise-free sweep `√P · W_rxᴴ H W_tx` (`M_rx × M_tx`).
pub fn noiseless_sweep(h: &CMatrix, w_tx: &Codebook, w_rx: &Codebook, tx_power: f64) -> Result<CMatrix> {
    check_dims(h, w_tx, w_rx)?;
    if !(tx_power >= 0.0) {
        return invalid("transmit power must be non-negative");
    }
    let hw = h * w_tx.weights();
    Ok(w_rx.weights().ad_mul(&hw) * Complex64::new(tx_power.sqrt(), 0.0))
}

/// Adds the filtered receiver noise `w_rᴴ n` to every slot, a fresh
/// `n ~ CN(0, σ² I)` per slot.
///
/// `w_rᴴ n` is exactly `CN(0, σ² ‖w_r‖²)`, so the scalar is drawn directly.
pub fn add_filtered_noise<R: Rng + ?Sized>(
    y: &mut CMatrix,
    w_rx: &Codebook,
    noise_stddev: f64,
    rng: &mut R,
) -> Result<()> {
    if !(noise_stddev >= 0.0) {
        return invalid("noise standard deviation must be non-negative");
    }
    if y.nrows() != w_rx.n_beams() {
        return invalid("measurement rows do not match the RX codebook");
    }
    if noise_stddev == 0.0 {
        return Ok(());
    }
    let variances: Vec<f64> = w_rx
        .weights()
        .column_iter()
        .map(|w| noise_stddev * noise_stddev * w.norm_squared())
        .collect();
    for t in 0..y.ncols() {
        for (r, var) in variances.iter().enumerate() {
            y[(r, t)] += complex_gaussian(rng, *var);
        }
    }
    Ok(())
}

/// One measurement per (TX beam, RX beam) slot: entry `(r, t)` is
/// `√P w_rᴴ H w_t + w_rᴴ n_{r,t}`.
pub fn sweep_measurements<R: Rng + ?Sized>(
    h: &CMatrix,
    w_tx: &Codebook,
    w_rx: &Codebook,
    tx_power: f64,
    noise_stddev: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    let mut y = noiseless_sweep(h, w_tx, w_rx, tx_power)?;
    add_filtered_noise(&mut y, w_rx, noise_stddev, rng)?;
    Ok(y)
}

/// Column-major stacking, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
pub fn vectorize(y: &CMatrix) -> CVector {
    CVector::from_column_slice(y.as_slice())
}

/// Dense Kronecker product. Only used on small matrices (tests, oracles).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Factored sensing matrix `Φ` over an angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingFactors {
    /// `W_txᵀ · conj(P_AP)`, `M_tx × N`.
    pub phi_tx_factor: CMatrix,
    /// `W_rxᴴ · P_UE`, `M_rx × N`.
    pub phi_rx_factor: CMatrix,
    pub tx_power: f64,
    pub grid: AngleGrid,
}

pub fn build_sensing_factors(
    w_tx: &Codebook,
    w_rx: &Codebook,
    grid: &AngleGrid,
    ap_cfg: &ArrayConfig,
    ue_cfg: &ArrayConfig,
    tx_power: f64,
) -> Result<SensingFactors> {
    if w_tx.n_elements() != ap_cfg.n_elements() || w_rx.n_elements() != ue_cfg.n_elements() {
        return invalid("codebook sizes do not match the arrays");
    }
    if !(tx_power >= 0.0) {
        return invalid("transmit power must be non-negative");
    }
    let p_ap = grid.steering_matrix(ap_cfg);
    let p_ue = grid.steering_matrix(ue_cfg);
    // W_txᵀ conj(P_AP) = conj(W_txᴴ P_AP)
    let phi_tx_factor = w_tx.weights().ad_mul(&p_ap).map(|c| c.conj());
    let phi_rx_factor = w_rx.weights().ad_mul(&p_ue);
    Ok(SensingFactors {
        phi_tx_factor,
        phi_rx_factor,
        tx_power,
        grid: *grid,
    })
}

impl SensingFactors {
    pub fn m_tx(&self) -> usize {
        self.phi_tx_factor.nrows()
    }

    pub fn m_rx(&self) -> usize {
        self.phi_rx_factor.nrows()
    }

    pub fn measurement_len(&self) -> usize {
        self.m_tx() * self.m_rx()
    }

    fn check_index(&self, u: usize, v: usize) -> Result<()> {
        let n = self.grid.n_points();
        if u >= n || v >= n {
            return invalid(format!("grid index ({u}, {v}) outside 0..{n}"));
        }
        Ok(())
    }

    /// Column `u·N + v` of `Φ`: `√P · kron(phi_tx[:, u], phi_rx[:, v])`.
    pub fn implied_phi_column(&self, u: usize, v: usize) -> Result<CVector> {
        self.check_index(u, v)?;
        let scale = Complex64::new(self.tx_power.sqrt(), 0.0);
        let a = self.phi_tx_factor.column(u);
        let b = self.phi_rx_factor.column(v);
        let (m_tx, m_rx) = (a.len(), b.len());
        Ok(CVector::from_fn(m_tx * m_rx, |i, _| scale * a[i / m_rx] * b[i % m_rx]))
    }

    /// Squared norm of column `(u, v)`; the Kronecker structure makes it a product.
    pub fn column_norm_sqr(&self, u: usize, v: usize) -> f64 {
        self.tx_power * self.phi_tx_factor.column(u).norm_squared() * self.phi_rx_factor.column(v).norm_squared()
    }
}

/// Measurements paired with the factored sensing matrix that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingProblem {
    pub factors: SensingFactors,
    pub y_v: CVector,
}

impl SensingProblem {
    pub fn new(factors: SensingFactors, y_v: CVector) -> Result<Self> {
        if y_v.len() != factors.measurement_len() {
            return invalid(format!(
                "measurement vector has {} entries, sensing matrix has {} rows",
                y_v.len(),
                factors.measurement_len()
            ));
        }
        Ok(Self { factors, y_v })
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.factors.grid
    }

    pub fn implied_phi_column(&self, u: usize, v: usize) -> Result<CVector> {
        self.factors.implied_phi_column(u, v)
    }
}
