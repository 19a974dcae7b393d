use crate::{CMatrix, Error, Result};

/// Reported in place of `-inf` when an estimate is exact.
pub const NMSE_FLOOR_DB: f64 = -300.0;

/// `10 log10(||H - H_est||_F^2 / ||H||_F^2)`, floored at [`NMSE_FLOOR_DB`].
pub fn nmse_db(h_true: &CMatrix, h_est: &CMatrix) -> Result<f64> {
    if h_true.shape() != h_est.shape() {
        return Err(Error::Shape(format!(
            "true channel {:?} vs estimate {:?}",
            h_true.shape(),
            h_est.shape()
        )));
    }
    let energy = h_true.norm_squared();
    if energy == 0.0 {
        return Err(Error::DegenerateChannel("NMSE of a zero channel is undefined".into()));
    }
    let err = (h_true - h_est).norm_squared();
    Ok((10.0 * (err / energy).log10()).max(NMSE_FLOOR_DB))
}
