//! Uniform linear array responses, beam projections and the phase-quantized
//! steering codebook.
//!
//! Angles are azimuth in radians, measured in a global frame shared by both
//! arrays. Only the azimuth plane is modelled.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::{CMatrix, CVector};

/// Element count and inter-element spacing (in wavelengths) of a ULA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    n_elements: usize,
    spacing_wavelengths: f64,
}

impl ArrayConfig {
    pub fn new(n_elements: usize, spacing_wavelengths: f64) -> Result<Self> {
        if n_elements == 0 {
            return invalid("array needs at least one element");
        }
        if !(spacing_wavelengths > 0.0 && spacing_wavelengths <= 1.0) {
            return invalid(format!(
                "element spacing must lie in (0, 1] wavelengths, got {spacing_wavelengths}"
            ));
        }
        Ok(Self {
            n_elements,
            spacing_wavelengths,
        })
    }

    /// Half-wavelength spaced array.
    pub fn half_wavelength(n_elements: usize) -> Result<Self> {
        Self::new(n_elements, 0.5)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn spacing_wavelengths(&self) -> f64 {
        self.spacing_wavelengths
    }
}

/// Maps any finite angle onto `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Maps any finite angle onto `(-π, π]`.
pub fn wrap_to_pi(angle: f64) -> f64 {
    let a = wrap_angle(angle);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Array response of a ULA towards one azimuth.
///
/// Every entry has unit modulus and entry 0 is exactly `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(CVector);

impl SteeringVector {
    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `[1, e^{j2πd sinθ}, …, e^{j(N-1)2πd sinθ}]` for spacing `d` in wavelengths.
pub fn array_response(angle: f64, cfg: &ArrayConfig) -> SteeringVector {
    let phase_step = TAU * cfg.spacing_wavelengths * wrap_angle(angle).sin();
    SteeringVector(CVector::from_fn(cfg.n_elements, |k, _| {
        Complex64::from_polar(1.0, k as f64 * phase_step)
    }))
}

/// Projection `wᴴ p(θ)` of a weight vector onto the array response at `angle`.
pub fn beam_gain(weights: &[Complex64], angle: f64, cfg: &ArrayConfig) -> Result<Complex64> {
    if weights.len() != cfg.n_elements {
        return invalid(format!(
            "weight vector has {} entries, array has {} elements",
            weights.len(),
            cfg.n_elements
        ));
    }
    let p = array_response(angle, cfg);
    Ok(weights.iter().zip(p.as_slice()).map(|(w, p)| w.conj() * p).sum())
}

/// How a codebook's weights were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookKind {
    /// 2-bit phase-quantized steering codebook, entries in `{1, j, -1, -j}`.
    Quantized,
    /// Least-squares flat-top beams covering sub-ranges of an angular window.
    Designed,
}

/// Beamforming weights, one unit-norm column per beam.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    weights: CMatrix,
    beamwidth_deg: f64,
    kind: CodebookKind,
}

impl Codebook {
    /// Wraps a weight matrix, scaling every column to unit Euclidean norm.
    ///
    /// Columns that are identically zero are rejected.
    pub fn from_weights(mut weights: CMatrix, beamwidth_deg: f64, kind: CodebookKind) -> Result<Self> {
        if weights.ncols() == 0 || weights.nrows() == 0 {
            return invalid("codebook needs at least one beam and one element");
        }
        for mut col in weights.column_iter_mut() {
            let norm = col.norm();
            if !(norm > 0.0) || !norm.is_finite() {
                return invalid("codebook column has zero or non-finite norm");
            }
            col.unscale_mut(norm);
        }
        Ok(Self {
            weights,
            beamwidth_deg,
            kind,
        })
    }

    pub fn weights(&self) -> &CMatrix {
        &self.weights
    }

    pub fn n_elements(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_beams(&self) -> usize {
        self.weights.ncols()
    }

    pub fn beamwidth_deg(&self) -> f64 {
        self.beamwidth_deg
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    /// Weight vector of beam `b`.
    pub fn beam(&self, b: usize) -> &[Complex64] {
        let n = self.weights.nrows();
        &self.weights.as_slice()[b * n..(b + 1) * n]
    }

    /// Index of the beam with the largest `|wᴴ p(θ)|`; lowest index wins ties.
    pub fn best_beam_towards(&self, angle: f64, cfg: &ArrayConfig) -> Result<usize> {
        if cfg.n_elements != self.n_elements() {
            return invalid("array size does not match codebook");
        }
        let p = array_response(angle, cfg);
        let gains = self.weights.ad_mul(p.as_vector());
        let mut best = 0;
        let mut best_mag = f64::NEG_INFINITY;
        for (b, g) in gains.iter().enumerate() {
            let mag = g.norm_sqr();
            if mag > best_mag {
                best = b;
                best_mag = mag;
            }
        }
        Ok(best)
    }
}

/// Exponent of `j` for entry `(n, b)` of the quantized codebook:
/// `floor(n · mod(b + B/2, B) / (B/4)) mod 4`.
pub(crate) fn quantized_phase_index(n: usize, b: usize, n_beams: usize) -> usize {
    let shifted = (b + n_beams / 2) % n_beams;
    // floor(n·k / (B/4)) == floor(4·n·k / B), kept in integers
    ((4 * n * shifted) / n_beams) % 4
}

const J_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// Unnormalized quantized codebook, entries exactly in `{1, j, -1, -j}`.
pub fn quantized_codebook_raw(n_elements: usize, n_beams: usize) -> Result<CMatrix> {
    if n_elements == 0 {
        return invalid("codebook needs at least one antenna element");
    }
    if n_beams == 0 || !n_beams.is_multiple_of(2) {
        return invalid(format!("number of beams must be even and positive, got {n_beams}"));
    }
    Ok(CMatrix::from_fn(n_elements, n_beams, |n, b| {
        J_POWERS[quantized_phase_index(n, b, n_beams)]
    }))
}

/// Phase-quantized steering codebook with `n_beams` unit-norm columns.
pub fn quantized_codebook(n_elements: usize, n_beams: usize) -> Result<Codebook> {
    let raw = quantized_codebook_raw(n_elements, n_beams)?;
    Codebook::from_weights(raw, 360.0 / n_beams as f64, CodebookKind::Quantized)
}
