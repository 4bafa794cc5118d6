use std::f64::consts::{PI, SQRT_2};

use crate::arrays::{wrap_angle, wrap_to_pi};
use crate::channel::Point2;
use crate::sensing::AngleGrid;

/// Which end of the link a window constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Departure angles at the AP (bearing AP → UE).
    Aod,
    /// Arrival angles at the UE (bearing UE → AP).
    Aoa,
}

/// Contiguous run of grid indices on the circular angle grid.
///
/// `first()` and `last()` are the window edges (`q1, q2` or `g1, g2`); the run
/// may wrap past index `N - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularWindow {
    first: usize,
    n_points: usize,
    grid_n: usize,
    full: bool,
    center: f64,
    half_width: f64,
}

impl AngularWindow {
    /// Whole circle `[0, N-1]`, centered on `center`.
    pub fn full_circle(grid: &AngleGrid, center: f64) -> Self {
        Self {
            first: 0,
            n_points: grid.n_points(),
            grid_n: grid.n_points(),
            full: true,
            center: wrap_angle(center),
            half_width: PI,
        }
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn last(&self) -> usize {
        (self.first + self.n_points - 1) % self.grid_n
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    /// Estimated bearing the window is built around.
    pub fn center(&self) -> f64 {
        self.center
    }

    /// Continuous half-width before snapping to the grid (π for a full circle).
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Grid indices from `first` to `last`, in order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_points).map(move |i| (self.first + i) % self.grid_n)
    }

    pub fn contains(&self, index: usize) -> bool {
        let offset = (index + self.grid_n - self.first % self.grid_n) % self.grid_n;
        offset < self.n_points
    }

    /// Angular extent in degrees: 360 for the full circle, otherwise the
    /// distance between the edge grid points.
    pub fn span_deg(&self) -> f64 {
        if self.full {
            360.0
        } else {
            (self.n_points - 1) as f64 * 360.0 / self.grid_n as f64
        }
    }

    /// `ceil(span / beamwidth)`, at least one, at most one beam per grid point.
    pub fn beam_count(&self, beamwidth_deg: f64) -> usize {
        let raw = (self.span_deg() / beamwidth_deg - 1e-9).ceil();
        (raw.max(1.0) as usize).min(self.n_points)
    }

    /// Nearest angle to `angle` inside the continuous window.
    pub fn clamp(&self, angle: f64) -> f64 {
        if self.full {
            return wrap_angle(angle);
        }
        let offset = wrap_to_pi(angle - self.center).clamp(-self.half_width, self.half_width);
        wrap_angle(self.center + offset)
    }
}

/// Worst-case distance between the true and estimated AP→UE vectors when each
/// coordinate error is bounded by 2σ: `2√2 (σ_ap + σ_ue)`.
pub fn uncertainty_radius(sigma_ap: f64, sigma_ue: f64) -> f64 {
    2.0 * SQRT_2 * (sigma_ap + sigma_ue)
}

/// Window of grid angles that must contain the true LOS bearing.
///
/// The center is the estimated bearing; the half-width is
/// `asin(r / d̂)` with `r` from [`uncertainty_radius`] and `d̂` the estimated
/// distance. If `r ≥ d̂` (or the estimates coincide) the whole circle is used.
/// Edges are the floor/ceil grid indices of `center ± half-width`.
pub fn angular_window(
    est_ap: Point2,
    est_ue: Point2,
    sigma_ap: f64,
    sigma_ue: f64,
    grid: &AngleGrid,
    side: Side,
) -> AngularWindow {
    let center = match side {
        Side::Aod => est_ap.bearing_to(&est_ue),
        Side::Aoa => est_ue.bearing_to(&est_ap),
    };
    let distance = est_ap.distance(&est_ue);
    let radius = uncertainty_radius(sigma_ap, sigma_ue);
    if !(distance > 0.0) || radius >= distance {
        return AngularWindow::full_circle(grid, center);
    }
    let half_width = (radius / distance).asin();
    let step = grid.spacing();
    // tolerance so exact grid hits do not spill into a neighbour
    let lo = ((center - half_width) / step + 1e-9).floor() as i64;
    let hi = ((center + half_width) / step - 1e-9).ceil() as i64;
    let hi = hi.max(lo);
    let n = grid.n_points() as i64;
    let n_points = hi - lo + 1;
    if n_points >= n {
        return AngularWindow::full_circle(grid, center);
    }
    AngularWindow {
        first: lo.rem_euclid(n) as usize,
        n_points: n_points as usize,
        grid_n: grid.n_points(),
        full: false,
        center,
        half_width,
    }
}
