//! Orthogonal matching pursuit over the factored sensing matrix.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::sensing::{GridPair, SensingProblem};
use crate::{CMatrix, CVector};

/// Columns with squared norm below this (relative to the largest) are skipped.
const NEGLIGIBLE_COLUMN: f64 = 1e-24;
/// Diagonal loading of the active-set normal equations, relative to their trace.
const LS_REGULARIZATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmpConfig {
    /// Sparsity target (number of paths).
    pub max_atoms: usize,
    /// Stop once `‖r‖ / ‖y‖` drops to this value.
    pub residual_tol: f64,
}

impl OmpConfig {
    pub fn new(max_atoms: usize, residual_tol: f64) -> Result<Self> {
        if max_atoms == 0 {
            return invalid("OMP needs max_atoms >= 1");
        }
        if !(residual_tol >= 0.0) {
            return invalid("OMP residual tolerance must be non-negative");
        }
        Ok(Self {
            max_atoms,
            residual_tol,
        })
    }

    /// `max_atoms = n_paths`, relative tolerance `1e-6`.
    pub fn for_paths(n_paths: usize) -> Result<Self> {
        Self::new(n_paths, 1e-6)
    }
}

/// Recovered support and gains.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseSolution {
    /// Selected atoms in selection order.
    pub support: Vec<GridPair>,
    /// Least-squares gains aligned with `support`.
    pub gains: Vec<Complex64>,
    pub residual_norm: f64,
    /// `‖r‖` before the first iteration and after each one.
    pub residual_history: Vec<f64>,
}

impl SparseSolution {
    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Position in `support` of the largest-magnitude gain.
    pub fn strongest(&self) -> Option<usize> {
        self.gains
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, g)| match best {
                Some((_, m)) if m >= g.norm() => best,
                _ => Some((i, g.norm())),
            })
            .map(|(i, _)| i)
    }
}

/// Complex correlations `Φ[:, (u,v)]ᴴ r` for every grid pair, indexed `(u, v)`.
///
/// Uses `Φ[:, (u,v)]ᴴ r = √P · (phi_rxᴴ R conj(phi_tx))[v, u]` where `R` is `r`
/// reshaped to `M_rx × M_tx`.
pub fn correlate_complex(problem: &SensingProblem, residual: &CVector) -> Result<CMatrix> {
    let f = &problem.factors;
    if residual.len() != f.measurement_len() {
        return invalid(format!(
            "residual has {} entries, expected {}",
            residual.len(),
            f.measurement_len()
        ));
    }
    let r = CMatrix::from_column_slice(f.m_rx(), f.m_tx(), residual.as_slice());
    // (R conj(A))ᵀ = A^H Rᵀ, so the (u, v)-indexed result is
    // conj(A)ᵀ Rᵀ conj(B) = (phi_txᴴ Rᵀ) conj(phi_rx)
    let left = f.phi_tx_factor.ad_mul(&r.transpose());
    let conj_rx = f.phi_rx_factor.map(|c| c.conj());
    Ok(left * conj_rx * Complex64::new(f.tx_power.sqrt(), 0.0))
}

/// `|Φ[:, (u,v)]ᴴ r|` for every grid pair, as an `N × N` matrix indexed `(u, v)`.
pub fn correlate_all(problem: &SensingProblem, residual: &CVector) -> Result<DMatrix<f64>> {
    Ok(correlate_complex(problem, residual)?.map(|c| c.norm()))
}

/// Least squares of `y` on `columns` via regularized normal equations.
fn least_squares(columns: &[CVector], y: &CVector) -> CVector {
    let k = columns.len();
    let a = CMatrix::from_columns(columns);
    let mut gram = a.ad_mul(&a);
    let trace: f64 = (0..k).map(|i| gram[(i, i)].re).sum();
    let load = LS_REGULARIZATION * trace;
    for i in 0..k {
        gram[(i, i)] += Complex64::new(load, 0.0);
    }
    let rhs = a.ad_mul(y);
    match Cholesky::new(gram.clone()) {
        Some(ch) => ch.solve(&rhs),
        None => gram.lu().solve(&rhs).unwrap_or_else(|| CVector::zeros(k)),
    }
}

/// Greedy sparse recovery of `z` in `y = Φ z`.
///
/// Each iteration picks the unused grid pair with the largest `|Φᴴ r|`
/// (ties go to the smallest `u`, then `v`), refits all selected gains by least
/// squares and updates the residual. Stops at `max_atoms` atoms or when the
/// relative residual reaches `residual_tol`.
pub fn solve(problem: &SensingProblem, cfg: &OmpConfig) -> Result<SparseSolution> {
    let f = &problem.factors;
    let n = f.grid.n_points();
    let y = &problem.y_v;
    if y.len() != f.measurement_len() {
        return invalid("measurement length does not match the sensing matrix");
    }
    if cfg.max_atoms > n * n {
        return invalid(format!(
            "max_atoms {} exceeds the {} dictionary atoms",
            cfg.max_atoms,
            n * n
        ));
    }

    let tx_norms: Vec<f64> = f.phi_tx_factor.column_iter().map(|c| c.norm_squared()).collect();
    let rx_norms: Vec<f64> = f.phi_rx_factor.column_iter().map(|c| c.norm_squared()).collect();
    let max_tx = tx_norms.iter().cloned().fold(0.0, f64::max);
    let max_rx = rx_norms.iter().cloned().fold(0.0, f64::max);
    if !(max_tx * max_rx * f.tx_power > 0.0) {
        return Err(Error::DegenerateInput("sensing matrix is all zero".into()));
    }
    let usable_tx: Vec<bool> = tx_norms.iter().map(|x| *x > NEGLIGIBLE_COLUMN * max_tx).collect();
    let usable_rx: Vec<bool> = rx_norms.iter().map(|x| *x > NEGLIGIBLE_COLUMN * max_rx).collect();

    let y_norm = y.norm();
    let mut solution = SparseSolution {
        residual_norm: y_norm,
        residual_history: vec![y_norm],
        ..Default::default()
    };
    if y_norm == 0.0 {
        return Ok(solution);
    }

    let mut residual = y.clone();
    let mut columns: Vec<CVector> = Vec::new();
    let mut gains = CVector::zeros(0);

    while solution.support.len() < cfg.max_atoms && solution.residual_norm > cfg.residual_tol * y_norm {
        let corr = correlate_complex(problem, &residual)?;
        let mut best: Option<(GridPair, f64)> = None;
        for u in (0..n).filter(|&u| usable_tx[u]) {
            for v in (0..n).filter(|&v| usable_rx[v]) {
                let pair = GridPair { u, v };
                let mag = corr[(u, v)].norm_sqr();
                let better = match best {
                    None => true,
                    Some((_, m)) => mag > m,
                };
                if better && !solution.support.contains(&pair) {
                    best = Some((pair, mag));
                }
            }
        }
        let Some((pair, mag)) = best else { break };
        if mag == 0.0 {
            break;
        }
        columns.push(f.implied_phi_column(pair.u, pair.v)?);
        solution.support.push(pair);
        gains = least_squares(&columns, y);
        residual = y - CMatrix::from_columns(&columns) * &gains;
        solution.residual_norm = residual.norm();
        solution.residual_history.push(solution.residual_norm);
    }
    solution.gains = gains.iter().cloned().collect();
    Ok(solution)
}
