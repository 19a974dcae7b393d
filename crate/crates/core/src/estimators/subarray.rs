//! Subarray-wise P-SOMP: independent P-SOMP runs on contiguous antenna blocks.

use super::pursuit::{p_somp, PursuitOptions};
use super::{EstimateReport, SupportSet};
use crate::channel::{ArrayGeometry, PilotObservation};
use crate::dictionary::{build_dictionary, PolarDictionary};
use crate::{CMatrix, Error, Result};

/// Splits the array into `n_subarrays` equal blocks. Every block has the same
/// centered geometry, so one dictionary (with `N / n_subarrays` angles and
/// the full array's ring rule) serves all of them.
#[derive(Debug, Clone)]
pub struct SubarrayEstimator {
    n_antennas: usize,
    n_subarrays: usize,
    dict: PolarDictionary,
}

impl SubarrayEstimator {
    pub fn new(
        geom: &ArrayGeometry,
        k_c: f64,
        n_subarrays: usize,
        theta_range: (f64, f64),
        beta: f64,
        rings: usize,
    ) -> Result<Self> {
        let n = geom.n_antennas();
        if n_subarrays == 0 || !n.is_multiple_of(n_subarrays) {
            return Err(Error::config(
                "estimators",
                format!("{n} antennas do not split into {n_subarrays} equal subarrays"),
            ));
        }
        let sub = ArrayGeometry::new(n / n_subarrays, geom.spacing())?;
        let dict = build_dictionary(&sub, k_c, theta_range, beta, rings, None)?;
        Ok(Self {
            n_antennas: n,
            n_subarrays,
            dict,
        })
    }

    pub fn n_subarrays(&self) -> usize {
        self.n_subarrays
    }

    pub fn dictionary(&self) -> &PolarDictionary {
        &self.dict
    }

    pub fn estimate(&self, y: &PilotObservation, opts: &PursuitOptions) -> Result<EstimateReport> {
        if y.n_antennas() != self.n_antennas {
            return Err(Error::Shape(format!(
                "observation has {} antennas, estimator was built for {}",
                y.n_antennas(),
                self.n_antennas
            )));
        }
        let len = self.n_antennas / self.n_subarrays;
        let t = y.n_pilots();
        let m = y.n_subcarriers();
        let s_sub = self.dict.len();

        let mut channel_estimate = CMatrix::zeros(self.n_antennas, m);
        let mut blocks = Vec::with_capacity(self.n_subarrays);
        for b in 0..self.n_subarrays {
            let sub_y = y.antenna_rows(b * len, len)?;
            let est = p_somp(&sub_y, &self.dict, opts)?;
            channel_estimate.rows_mut(b * len, len).copy_from(&est.channel_estimate);
            blocks.push(est);
        }

        // Embed each block's support into full-array coordinates.
        let k_total: usize = blocks.iter().map(|e| e.support.len()).sum();
        let mut indices = Vec::with_capacity(k_total);
        let mut masked_atoms = CMatrix::zeros(self.n_antennas * t, k_total);
        let mut coefficients = CMatrix::zeros(k_total, m);
        let mut events = Vec::new();
        let mut col = 0;
        for (b, est) in blocks.into_iter().enumerate() {
            for (j, &idx) in est.support.indices.iter().enumerate() {
                indices.push(b * s_sub + idx);
                for slot in 0..t {
                    for n in 0..len {
                        masked_atoms[(slot * self.n_antennas + b * len + n, col)] =
                            est.support.masked_atoms[(slot * len + n, j)];
                    }
                }
                coefficients.row_mut(col).copy_from(&est.coefficients.row(j));
                col += 1;
            }
            events.extend(est.events.into_iter().map(|e| format!("subarray {b}: {e}")));
        }

        Ok(EstimateReport {
            channel_estimate,
            coefficients,
            support: SupportSet { indices, masked_atoms },
            vr_masks: Vec::new(),
            events,
        })
    }
}

/// One-shot convenience around [`SubarrayEstimator`].
#[allow(clippy::too_many_arguments)]
pub fn subarray_p_somp(
    y: &PilotObservation,
    geom: &ArrayGeometry,
    k_c: f64,
    n_subarrays: usize,
    theta_range: (f64, f64),
    beta: f64,
    rings: usize,
    opts: &PursuitOptions,
) -> Result<EstimateReport> {
    SubarrayEstimator::new(geom, k_c, n_subarrays, theta_range, beta, rings)?.estimate(y, opts)
}
