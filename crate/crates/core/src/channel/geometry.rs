//! Uniform linear array geometry and near-field steering vectors.

use nalgebra::DVector;

use crate::{Error, Result, C64};

/// Centered uniform linear array.
///
/// Element `n` sits at `offsets[n] * spacing` along the array axis, with
/// `offsets[n] = (2n - N + 1) / 2`, so the offsets are symmetric about the
/// array center.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    n_antennas: usize,
    spacing: f64,
    offsets: Vec<f64>,
}

impl ArrayGeometry {
    pub fn new(n_antennas: usize, spacing: f64) -> Result<Self> {
        if n_antennas == 0 {
            return Err(Error::config("n_antennas", "must be at least 1"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::config("spacing", format!("must be positive, got {spacing}")));
        }
        let offsets = (0..n_antennas)
            .map(|n| (2.0 * n as f64 - n_antennas as f64 + 1.0) / 2.0)
            .collect();
        Ok(Self {
            n_antennas,
            spacing,
            offsets,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Element offsets in units of the spacing.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Physical aperture `N * d`.
    pub fn aperture(&self) -> f64 {
        self.n_antennas as f64 * self.spacing
    }
}

/// Distance from a point at `(r, theta)` relative to the array center to the
/// element at offset `delta` (in units of `d`).
pub fn element_distance(r: f64, theta: f64, delta: f64, d: f64) -> Result<f64> {
    check_range(r)?;
    let x = delta * d;
    Ok((r * r + x * x - 2.0 * r * x * theta.sin()).sqrt())
}

/// `r^(n) - r`, rearranged so that large `r` does not cancel catastrophically.
fn path_difference(r: f64, sin_theta: f64, x: f64) -> f64 {
    let num = x * x - 2.0 * r * x * sin_theta;
    let rn = (r * r + num).sqrt();
    num / (rn + r)
}

fn check_range(r: f64) -> Result<()> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Domain(format!("distance must be positive, got {r}")));
    }
    Ok(())
}

/// Near-field steering vector `b(theta, r)` with entries
/// `exp(-j k_c (r^(n) - r)) / sqrt(N)`.
pub fn steering_vector(theta: f64, r: f64, geom: &ArrayGeometry, k_c: f64) -> Result<DVector<C64>> {
    check_range(r)?;
    if r.is_infinite() {
        return Ok(far_field_steering_vector(theta, geom, k_c));
    }
    let scale = 1.0 / (geom.n_antennas as f64).sqrt();
    let sin_theta = theta.sin();
    Ok(DVector::from_iterator(
        geom.n_antennas,
        geom.offsets.iter().map(|&delta| {
            let dr = path_difference(r, sin_theta, delta * geom.spacing);
            C64::from_polar(scale, -k_c * dr)
        }),
    ))
}

/// Plane-wave limit of [`steering_vector`] as `r -> inf`:
/// entries `exp(+j k_c delta_n d sin(theta)) / sqrt(N)`.
pub fn far_field_steering_vector(theta: f64, geom: &ArrayGeometry, k_c: f64) -> DVector<C64> {
    let scale = 1.0 / (geom.n_antennas as f64).sqrt();
    let sin_theta = theta.sin();
    DVector::from_iterator(
        geom.n_antennas,
        geom.offsets
            .iter()
            .map(|&delta| C64::from_polar(scale, k_c * delta * geom.spacing * sin_theta)),
    )
}
