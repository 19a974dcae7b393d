//! Visibility-region masks.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::diffraction::{fresnel_nu, knife_edge_gain};
use super::geometry::ArrayGeometry;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaskCase {
    Stationary,
    Binary,
    NonBinary,
}

/// Visibility of one path across the array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VrMask {
    /// Every antenna sees the path.
    Stationary,
    /// Antennas `first..=last` (1-based) see the path, the rest do not.
    Binary { first: usize, last: usize },
    /// A diffracting edge deviating by `theta_edge` radians from the line of
    /// sight at the array center.
    NonBinary { theta_edge: f64 },
}

impl VrMask {
    pub fn case(&self) -> MaskCase {
        match self {
            VrMask::Stationary => MaskCase::Stationary,
            VrMask::Binary { .. } => MaskCase::Binary,
            VrMask::NonBinary { .. } => MaskCase::NonBinary,
        }
    }
}

/// One dominant propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub angle: f64,
    pub distance: f64,
    pub gain: crate::C64,
    pub mask: VrMask,
}

/// Per-antenna edge deviation: the center deviation minus the transverse
/// element offset seen from the edge at distance `r`.
pub fn edge_deviation(theta_edge: f64, path_angle: f64, r: f64, delta: f64, d: f64) -> f64 {
    theta_edge - delta * d * path_angle.cos() / r
}

/// Mask of `path` over the array at wavelength `lambda_m`.
pub fn vr_mask(path: &Path, geom: &ArrayGeometry, lambda_m: f64) -> Result<DVector<f64>> {
    let n = geom.n_antennas();
    match path.mask {
        VrMask::Stationary => Ok(DVector::from_element(n, 1.0)),
        VrMask::Binary { first, last } => {
            if first < 1 || last > n || first > last {
                return Err(Error::config(
                    "mask_params",
                    format!("binary VR [{first}, {last}] is not an interval within [1, {n}]"),
                ));
            }
            Ok(DVector::from_fn(n, |i, _| {
                if (first - 1..last).contains(&i) {
                    1.0
                } else {
                    0.0
                }
            }))
        }
        VrMask::NonBinary { theta_edge } => {
            if !theta_edge.is_finite() {
                return Err(Error::config("mask_params", "theta_edge must be finite"));
            }
            let r = path.distance;
            let mut mask = DVector::zeros(n);
            for (slot, &delta) in mask.iter_mut().zip(geom.offsets()) {
                let dev = edge_deviation(theta_edge, path.angle, r, delta, geom.spacing());
                *slot = knife_edge_gain(fresnel_nu(dev, lambda_m, r, r)?);
            }
            Ok(mask)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn path(mask: VrMask) -> Path {
        Path {
            angle: 0.2,
            distance: 20.0,
            gain: C64::new(0.5, 0.1),
            mask,
        }
    }

    #[test]
    fn stationary_is_all_ones() {
        let g = ArrayGeometry::new(16, 0.005).unwrap();
        let m = vr_mask(&path(VrMask::Stationary), &g, 0.01).unwrap();
        assert!(m.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn binary_interval() {
        let g = ArrayGeometry::new(12, 0.005).unwrap();
        let m = vr_mask(&path(VrMask::Binary { first: 5, last: 9 }), &g, 0.01).unwrap();
        let expect: Vec<f64> = (1..=12).map(|i| if (5..=9).contains(&i) { 1.0 } else { 0.0 }).collect();
        assert_eq!(m.as_slice(), expect.as_slice());
    }

    #[test]
    fn binary_rejects_bad_endpoints() {
        let g = ArrayGeometry::new(12, 0.005).unwrap();
        for (first, last) in [(0, 3), (3, 13), (7, 4)] {
            let err = vr_mask(&path(VrMask::Binary { first, last }), &g, 0.01).unwrap_err();
            assert!(matches!(err, Error::Config { .. }));
        }
    }

    #[test]
    fn deep_illumination_is_all_ones() {
        let g = ArrayGeometry::new(256, 0.005).unwrap();
        let m = vr_mask(&path(VrMask::NonBinary { theta_edge: -1.0 }), &g, 0.01).unwrap();
        assert!(m.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn single_edge_shadows_one_side() {
        let g = ArrayGeometry::new(256, 0.005).unwrap();
        let m = vr_mask(&path(VrMask::NonBinary { theta_edge: 0.004 }), &g, 0.01).unwrap();
        // Deviation decreases along the array, so the gain is non-decreasing.
        for w in m.as_slice().windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(m[0] < m[255]);
        assert!(m.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn non_binary_depends_on_wavelength() {
        let g = ArrayGeometry::new(64, 0.005).unwrap();
        let p = path(VrMask::NonBinary { theta_edge: 0.003 });
        let a = vr_mask(&p, &g, 0.0099).unwrap();
        let b = vr_mask(&p, &g, 0.0101).unwrap();
        assert_ne!(a, b);
    }
}
