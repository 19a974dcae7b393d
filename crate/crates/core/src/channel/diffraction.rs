//! Single knife-edge diffraction (ITU-R P.526 approximation).

use crate::{Error, Result};

/// Lower validity limit of the ITU approximation; below it the edge causes no loss.
pub const NU_CLEAR: f64 = -0.78;

/// Fresnel-Kirchhoff diffraction parameter for an edge deviating by
/// `theta_edge` radians from the line of sight, with the edge `d1` and `d2`
/// metres from the two terminals.
pub fn fresnel_nu(theta_edge: f64, lambda: f64, d1: f64, d2: f64) -> Result<f64> {
    for (name, v) in [("wavelength", lambda), ("d1", d1), ("d2", d2)] {
        if v.is_nan() || v <= 0.0 {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(theta_edge * (2.0 / (lambda * (1.0 / d1 + 1.0 / d2))).sqrt())
}

/// Diffraction loss `J(nu)` in dB; zero in the clear region `nu <= -0.78`.
pub fn knife_edge_loss_db(nu: f64) -> f64 {
    if nu <= NU_CLEAR {
        return 0.0;
    }
    let v = nu - 0.1;
    let loss = 6.9 + 20.0 * ((v * v + 1.0).sqrt() + v).log10();
    loss.max(0.0)
}

/// Linear amplitude gain `10^(-J(nu)/20)`, in `(0, 1]`.
pub fn knife_edge_gain(nu: f64) -> f64 {
    10f64.powf(-knife_edge_loss_db(nu) / 20.0)
}
