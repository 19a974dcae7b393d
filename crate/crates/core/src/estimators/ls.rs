use super::{EstimateReport, SupportSet};
use crate::channel::PilotObservation;
use crate::linalg::sum_row_blocks;
use crate::{CMatrix, C64};

/// Least squares for unit pilots: the average of the `T` received blocks.
pub fn ls_estimate(y: &PilotObservation) -> EstimateReport {
    let t = y.n_pilots();
    let channel_estimate = sum_row_blocks(y.stacked(), t) / C64::new(t as f64, 0.0);
    EstimateReport {
        channel_estimate,
        coefficients: CMatrix::zeros(0, y.n_subcarriers()),
        support: SupportSet::empty(y.stacked().nrows()),
        vr_masks: Vec::new(),
        events: Vec::new(),
    }
}
