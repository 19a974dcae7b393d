//! Parameter sweeps over SNR or path count.

use log::{info, warn};
use rayon::prelude::*;

use super::config::{AxisKind, ScenarioConfig};
use super::trial::{TrialContext, TrialRecord};
use crate::rng::trial_seed;
use crate::{Error, Result};

/// Aggregate of one estimator at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorStats {
    pub estimator: String,
    /// `10 log10` of the mean linear NMSE.
    pub nmse_db: f64,
    /// Standard error of `nmse_db` (delta method on the linear mean).
    pub stderr_db: f64,
    /// Mean of the per-trial dB values.
    pub mean_of_db: f64,
    pub n_trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: AxisKind,
    pub axis_values: Vec<f64>,
    pub estimators: Vec<String>,
    /// `points[j][e]` is estimator `e` at axis value `j`.
    pub points: Vec<Vec<EstimatorStats>>,
}

impl SweepResult {
    pub fn get(&self, axis_index: usize, estimator: &str) -> Option<&EstimatorStats> {
        self.points.get(axis_index)?.iter().find(|s| s.estimator == estimator)
    }

    /// `nmse_db` of `estimator` along the axis.
    pub fn curve(&self, estimator: &str) -> Option<Vec<f64>> {
        (0..self.axis_values.len())
            .map(|j| self.get(j, estimator).map(|s| s.nmse_db))
            .collect()
    }
}

fn aggregate(estimator: String, values: &[f64], failures: usize) -> EstimatorStats {
    let n = values.len();
    if n == 0 {
        return EstimatorStats {
            estimator,
            nmse_db: f64::NAN,
            stderr_db: f64::NAN,
            mean_of_db: f64::NAN,
            n_trials: 0,
            failures,
        };
    }
    let linear: Vec<f64> = values.iter().map(|db| 10f64.powf(db / 10.0)).collect();
    let mean = linear.iter().sum::<f64>() / n as f64;
    let stderr_lin = if n > 1 {
        let var = linear.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    EstimatorStats {
        estimator,
        nmse_db: 10.0 * mean.log10(),
        stderr_db: 10.0 / std::f64::consts::LN_10 * stderr_lin / mean,
        mean_of_db: values.iter().sum::<f64>() / n as f64,
        n_trials: n,
        failures,
    }
}

/// Sweeps `axis` over `values`, running `cfg.n_iter` trials per point.
///
/// Trial `i` at point `j` is seeded with `trial_seed(master_seed, j, i)`, so
/// results are identical for any `workers` count.
pub fn sweep(cfg: &ScenarioConfig, axis: AxisKind, values: &[f64], workers: usize) -> Result<SweepResult> {
    let ctx = TrialContext::new(cfg)?;
    sweep_with_context(&ctx, cfg, axis, values, workers)
}

pub fn sweep_with_context(
    ctx: &TrialContext,
    cfg: &ScenarioConfig,
    axis: AxisKind,
    values: &[f64],
    workers: usize,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::config("axis_values", "sweep needs at least one axis value"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let estimators: Vec<String> = ctx.estimators().iter().map(|k| k.to_string()).collect();

    let mut points = Vec::with_capacity(values.len());
    for (j, &value) in values.iter().enumerate() {
        let point_cfg = cfg.with_axis_value(axis, value);
        point_cfg.validate()?;
        let records: Vec<Result<TrialRecord>> = pool.install(|| {
            (0..point_cfg.n_iter)
                .into_par_iter()
                .map(|i| ctx.run(&point_cfg, trial_seed(point_cfg.master_seed, j as u64, i as u64)))
                .collect()
        });
        let records: Vec<TrialRecord> = records.into_iter().collect::<Result<_>>()?;

        let stats: Vec<EstimatorStats> = estimators
            .iter()
            .enumerate()
            .map(|(e, name)| {
                let mut ok = Vec::with_capacity(records.len());
                let mut failures = 0;
                for rec in &records {
                    match &rec.entries[e].1 {
                        Ok(v) => ok.push(*v),
                        Err(msg) => {
                            failures += 1;
                            warn!("{name} failed on trial seed {:#x}: {msg}", rec.seed);
                        }
                    }
                }
                aggregate(name.clone(), &ok, failures)
            })
            .collect();
        for s in &stats {
            info!(
                "{}={value}: {} {:.3} dB (+/- {:.3}, {} trials)",
                axis.name(),
                s.estimator,
                s.nmse_db,
                s.stderr_db,
                s.n_trials
            );
        }
        points.push(stats);
    }

    Ok(SweepResult {
        axis,
        axis_values: values.to_vec(),
        estimators,
        points,
    })
}
