//! Sparse geometric channel between an AP at the origin and a randomly placed UE.
//!
//! `H = (1/γ) Σ μ_ℓ p_UE(φ_ℓ) p_AP(ψ_ℓ)ᴴ` with `L` paths. Path 0 is the
//! line-of-sight path and follows the geometry; the others have uniform random
//! departure and arrival angles. Gains are i.i.d. `CN(0, 1)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::arrays::{array_response, wrap_angle, ArrayConfig};
use crate::error::{invalid, Error, Result};
use crate::CMatrix;

/// Point in the plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Bearing of `other` seen from `self`, in `[0, 2π)`.
    pub fn bearing_to(&self, other: &Point2) -> f64 {
        wrap_angle((other.y - self.y).atan2(other.x - self.x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    /// Complex gain μ.
    pub gain: Complex64,
    /// Angle of departure at the AP, radians in `[0, 2π)`.
    pub aod: f64,
    /// Angle of arrival at the UE, radians in `[0, 2π)`.
    pub aoa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub paths: Vec<Path>,
    /// Average path loss γ (linear, > 0).
    pub path_loss: f64,
    pub ap_position: Point2,
    pub ue_position: Point2,
}

impl ChannelRealization {
    /// Line-of-sight path (always index 0).
    pub fn los(&self) -> &Path {
        &self.paths[0]
    }
}

/// Cell layout and propagation exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub cell_min_radius_m: f64,
    pub cell_max_radius_m: f64,
    pub pathloss_exponent: f64,
}

impl Geometry {
    pub fn new(cell_min_radius_m: f64, cell_max_radius_m: f64, pathloss_exponent: f64) -> Result<Self> {
        if !(cell_min_radius_m > 0.0 && cell_min_radius_m < cell_max_radius_m) {
            return invalid(format!(
                "cell radii must satisfy 0 < min < max, got [{cell_min_radius_m}, {cell_max_radius_m}]"
            ));
        }
        if !pathloss_exponent.is_finite() {
            return invalid("path-loss exponent must be finite");
        }
        Ok(Self {
            cell_min_radius_m,
            cell_max_radius_m,
            pathloss_exponent,
        })
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            cell_min_radius_m: 55.0,
            cell_max_radius_m: 150.0,
            pathloss_exponent: 3.0,
        }
    }
}

/// Circularly-symmetric complex Gaussian draw with `E|z|² = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Path loss `distance^n`.
pub fn path_loss(distance_m: f64, exponent: f64) -> f64 {
    distance_m.powf(exponent)
}

/// Builds a realization for fixed positions: LOS path first, then
/// `n_paths - 1` scattered paths drawn from `rng`.
pub fn channel_for_positions<R: Rng + ?Sized>(
    ap: Point2,
    ue: Point2,
    pathloss_exponent: f64,
    n_paths: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if n_paths == 0 {
        return invalid("channel needs at least one path");
    }
    let distance = ap.distance(&ue);
    if !(distance > 0.0) {
        return Err(Error::DegenerateInput("AP and UE coincide".into()));
    }
    let mut paths = Vec::with_capacity(n_paths);
    paths.push(Path {
        gain: complex_gaussian(rng, 1.0),
        aod: ap.bearing_to(&ue),
        aoa: ue.bearing_to(&ap),
    });
    for _ in 1..n_paths {
        let gain = complex_gaussian(rng, 1.0);
        let aod = wrap_angle(rng.random_range(0.0..TAU));
        let aoa = wrap_angle(rng.random_range(0.0..TAU));
        paths.push(Path { gain, aod, aoa });
    }
    Ok(ChannelRealization {
        paths,
        path_loss: path_loss(distance, pathloss_exponent),
        ap_position: ap,
        ue_position: ue,
    })
}

/// AP at the origin, UE uniform over the annulus area, `n_paths` paths.
pub fn sample_channel<R: Rng + ?Sized>(geometry: &Geometry, n_paths: usize, rng: &mut R) -> Result<ChannelRealization> {
    if n_paths == 0 {
        return invalid("channel needs at least one path");
    }
    let r2 = rng.random_range(geometry.cell_min_radius_m.powi(2)..=geometry.cell_max_radius_m.powi(2));
    let radius = r2.sqrt();
    let bearing = rng.random_range(0.0..TAU);
    let ue = Point2::new(radius * bearing.cos(), radius * bearing.sin());
    channel_for_positions(Point2::default(), ue, geometry.pathloss_exponent, n_paths, rng)
}

/// Dense `N_UE × N_AP` channel matrix of a realization.
pub fn channel_matrix(realization: &ChannelRealization, ap_cfg: &ArrayConfig, ue_cfg: &ArrayConfig) -> CMatrix {
    let mut h = CMatrix::zeros(ue_cfg.n_elements(), ap_cfg.n_elements());
    let inv_loss = 1.0 / realization.path_loss;
    for path in &realization.paths {
        let p_ue = array_response(path.aoa, ue_cfg).into_vector() * (path.gain * inv_loss);
        let p_ap = array_response(path.aod, ap_cfg).into_vector();
        // H += (μ/γ) p_UE p_APᴴ
        h.gerc(Complex64::new(1.0, 0.0), &p_ue, &p_ap, Complex64::new(1.0, 0.0));
    }
    h
}

/// Scales `h` so that `‖H‖_F² = N_AP · N_UE`.
pub fn normalize_channel(h: &CMatrix) -> Result<CMatrix> {
    let norm = h.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateInput("channel matrix is all zero".into()));
    }
    let target = ((h.nrows() * h.ncols()) as f64).sqrt();
    Ok(h * Complex64::new(target / norm, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cfg(n: usize) -> ArrayConfig {
        ArrayConfig::half_wavelength(n).unwrap()
    }

    #[test]
    fn single_path_realization_follows_geometry() {
        let mut rng = stream(1, 0, 0);
        let ch = sample_channel(&Geometry::default(), 1, &mut rng).unwrap();
        assert_eq!(ch.paths.len(), 1);
        let ue = ch.ue_position;
        assert!((ch.los().aod - wrap_angle(ue.y.atan2(ue.x))).abs() < 1e-9);
        assert!((ch.los().aoa - wrap_angle(ch.los().aod + PI)).abs() < 1e-9);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = Geometry::default();
        let a = sample_channel(&g, 3, &mut stream(9, 2, 0)).unwrap();
        let b = sample_channel(&g, 3, &mut stream(9, 2, 0)).unwrap();
        assert_eq!(a, b);
        let r = a.ue_position.distance(&a.ap_position);
        assert!(r >= g.cell_min_radius_m && r <= g.cell_max_radius_m);
    }

    #[test]
    fn path_loss_at_ten_meters() {
        let mut rng = stream(0, 0, 0);
        let ch = channel_for_positions(Point2::default(), Point2::new(10.0, 0.0), 3.0, 2, &mut rng).unwrap();
        assert!((ch.path_loss - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn zero_paths_rejected() {
        assert!(sample_channel(&Geometry::default(), 0, &mut stream(0, 0, 0)).is_err());
        assert!(Geometry::new(10.0, 5.0, 3.0).is_err());
    }

    #[test]
    fn zero_angle_path_gives_all_ones() {
        let ch = ChannelRealization {
            paths: vec![Path {
                gain: Complex64::new(8.0, 0.0),
                aod: 0.0,
                aoa: 0.0,
            }],
            path_loss: 8.0,
            ap_position: Point2::default(),
            ue_position: Point2::new(2.0, 0.0),
        };
        let h = channel_matrix(&ch, &cfg(3), &cfg(4));
        assert_eq!(h.shape(), (4, 3));
        for v in h.iter() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    fn brute_force_matrix(ch: &ChannelRealization, n_ap: usize, n_ue: usize) -> CMatrix {
        // direct entry formula for half-wavelength arrays
        CMatrix::from_fn(n_ue, n_ap, |a, b| {
            ch.paths
                .iter()
                .map(|p| {
                    let phase = PI * (a as f64 * p.aoa.sin() - b as f64 * p.aod.sin());
                    p.gain * Complex64::from_polar(1.0, phase)
                })
                .sum::<Complex64>()
                / ch.path_loss
        })
    }

    #[test]
    fn two_paths_match_brute_force_sum() {
        let mut rng = stream(5, 1, 0);
        let ch = channel_for_positions(Point2::new(1.0, 2.0), Point2::new(30.0, -7.0), 3.0, 2, &mut rng).unwrap();
        let h = channel_matrix(&ch, &cfg(6), &cfg(5));
        let oracle = brute_force_matrix(&ch, 6, 5);
        // compare on the 1/γ-free scale so the tolerance is meaningful
        assert!((h - oracle).camax() * ch.path_loss < 1e-12);
    }

    #[test]
    fn rank_is_bounded_by_path_count() {
        let mut rng = stream(3, 0, 0);
        let ch = channel_for_positions(Point2::default(), Point2::new(3.0, 1.0), 0.0, 2, &mut rng).unwrap();
        let h = channel_matrix(&ch, &cfg(8), &cfg(8));
        let sv = h.singular_values();
        let significant = sv.iter().filter(|s| **s > 1e-9 * sv[0]).count();
        assert!(significant <= 2);
    }

    #[test]
    fn normalize_examples() {
        let ones = CMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!((normalize_channel(&ones).unwrap() - &ones).camax() < 1e-15);
        let big = CMatrix::from_element(2, 2, Complex64::new(2.0, 0.0));
        assert!((big.norm_squared() - 16.0).abs() < 1e-12);
        assert!((normalize_channel(&big).unwrap() - &ones).camax() < 1e-15);
        assert!(normalize_channel(&CMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn gains_have_unit_power() {
        let mut rng = stream(11, 0, 0);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| complex_gaussian(&mut rng, 1.0).norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean |μ|² = {mean}");
    }

    proptest! {
        #[test]
        fn small_instances_match_direct_formula(seed in 0u64..10_000, n_ap in 1usize..=4, n_ue in 1usize..=4, l in 1usize..4) {
            let mut rng = stream(seed, 0, 0);
            let ch = channel_for_positions(Point2::default(), Point2::new(1.5, 0.5), 0.0, l, &mut rng).unwrap();
            let h = channel_matrix(&ch, &cfg(n_ap), &cfg(n_ue));
            prop_assert!((h - brute_force_matrix(&ch, n_ap, n_ue)).camax() < 1e-12);
        }

        #[test]
        fn normalization_is_idempotent(seed in 0u64..10_000) {
            let mut rng = stream(seed, 0, 0);
            let ch = channel_for_positions(Point2::default(), Point2::new(20.0, 5.0), 3.0, 3, &mut rng).unwrap();
            let h = normalize_channel(&channel_matrix(&ch, &cfg(8), &cfg(4))).unwrap();
            prop_assert!((h.norm_squared() - 32.0).abs() < 1e-9);
            let h2 = normalize_channel(&h).unwrap();
            prop_assert!((h2 - h).camax() < 1e-12);
        }

        #[test]
        fn los_bearing_rotates_with_ue(x in 5.0f64..50.0, y in -50.0f64..50.0, beta in 0.0f64..TAU) {
            let ap = Point2::default();
            let ue = Point2::new(x, y);
            let rot = Point2::new(x * beta.cos() - y * beta.sin(), x * beta.sin() + y * beta.cos());
            let mut rng = stream(0, 0, 0);
            let a = channel_for_positions(ap, ue, 3.0, 1, &mut rng).unwrap();
            let b = channel_for_positions(ap, rot, 3.0, 1, &mut rng).unwrap();
            let diff = crate::arrays::wrap_to_pi(b.los().aod - a.los().aod - beta);
            prop_assert!(diff.abs() < 1e-9);
        }
    }
}
