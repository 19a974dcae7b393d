//! Channel estimators.
//!
//! All estimators consume a [`PilotObservation`](crate::channel::PilotObservation)
//! and return an [`EstimateReport`]. The greedy ones share one pursuit loop
//! ([`pursuit`]) and differ in where candidate atoms come from and whether a
//! VR mask is fitted to each new atom.

mod ls;
mod pursuit;
mod subarray;

pub use ls::ls_estimate;
pub use pursuit::{
    genie_vr_hmm_p_somp, orthogonal_project, p_somp, somp_scores, somp_select, vr_hmm_p_somp, PursuitOptions,
    Selection,
};
pub use subarray::{subarray_p_somp, SubarrayEstimator};

use crate::CMatrix;

/// Selected atoms, in selection order, after VR masking.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    /// Atom indices into the estimator's dictionary. The genie reports path
    /// indices; the subarray estimator offsets each block's indices by
    /// `block * S_sub`.
    pub indices: Vec<usize>,
    /// Pilot-stacked masked atoms, `(N*T) x |support|`.
    pub masked_atoms: CMatrix,
}

impl SupportSet {
    pub fn empty(rows: usize) -> Self {
        Self {
            indices: Vec::new(),
            masked_atoms: CMatrix::zeros(rows, 0),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    /// `N x M` channel estimate.
    pub channel_estimate: CMatrix,
    /// `|support| x M` coefficients of the masked atoms.
    pub coefficients: CMatrix,
    pub support: SupportSet,
    /// Decoded binary VR mask per selected atom (empty for estimators that
    /// do not fit masks).
    pub vr_masks: Vec<Vec<bool>>,
    /// Non-fatal events worth surfacing (fallbacks, dropped columns).
    pub events: Vec<String>,
}

impl EstimateReport {
    /// Recomputes `W_masked[0..N, support] * coefficients`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.channel_estimate.nrows();
        self.support.masked_atoms.rows(0, n) * &self.coefficients
    }
}
