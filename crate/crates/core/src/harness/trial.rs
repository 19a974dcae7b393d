//! One Monte Carlo trial: draw a scenario, observe it once, run every
//! selected estimator on the same observation.

use std::sync::Arc;

use crate::channel::{observe_pilots, sample_scenario, PilotObservation, Scenario};
use crate::dictionary::{DictionaryKey, PolarDictionary};
use crate::estimators::{
    genie_vr_hmm_p_somp, ls_estimate, p_somp, vr_hmm_p_somp, EstimateReport, PursuitOptions, SubarrayEstimator,
};
use crate::hmm::HmmParams;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

use super::config::{EstimatorKind, ScenarioConfig};
use super::metrics::nmse_db;

/// Everything that stays fixed across trials and sweep points: the polar
/// dictionary, per-subarray dictionaries and HMM parameters.
#[derive(Debug, Clone)]
pub struct TrialContext {
    kinds: Vec<EstimatorKind>,
    dict: Arc<PolarDictionary>,
    subarrays: Vec<(usize, SubarrayEstimator)>,
    hmm: HmmParams,
}

impl TrialContext {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let dict = DictionaryKey::from_config(cfg).build()?;
        Self::with_dictionary(cfg, Arc::new(dict))
    }

    /// Like [`TrialContext::new`] but reuses an already built (or cached) dictionary.
    pub fn with_dictionary(cfg: &ScenarioConfig, dict: Arc<PolarDictionary>) -> Result<Self> {
        cfg.validate()?;
        if dict.n_antennas() != cfg.n_antennas {
            return Err(Error::config("n_antennas", "dictionary was built for a different array"));
        }
        let kinds = cfg.estimator_kinds()?;
        let geom = cfg.geometry()?;
        let mut subarrays = Vec::new();
        for kind in &kinds {
            if let EstimatorKind::Subarray(k) = *kind {
                if !subarrays.iter().any(|(existing, _)| *existing == k) {
                    let est = SubarrayEstimator::new(
                        &geom,
                        cfg.carrier_wavenumber(),
                        k,
                        (cfg.angle_min, cfg.angle_max),
                        cfg.dictionary_beta,
                        cfg.dictionary_rings,
                    )?;
                    subarrays.push((k, est));
                }
            }
        }
        Ok(Self {
            kinds,
            dict,
            subarrays,
            hmm: cfg.hmm_params()?,
        })
    }

    pub fn estimators(&self) -> &[EstimatorKind] {
        &self.kinds
    }

    pub fn dictionary(&self) -> &PolarDictionary {
        &self.dict
    }

    /// Runs one estimator on an observation of `scenario`.
    pub fn estimate(
        &self,
        kind: EstimatorKind,
        cfg: &ScenarioConfig,
        scenario: &Scenario,
        y: &PilotObservation,
    ) -> Result<EstimateReport> {
        let opts = PursuitOptions {
            l_hat: cfg.l_hat(),
            residual_threshold: cfg.residual_threshold,
        };
        match kind {
            EstimatorKind::Ls => Ok(ls_estimate(y)),
            EstimatorKind::PSomp => p_somp(y, &self.dict, &opts),
            EstimatorKind::VrHmmPSomp => vr_hmm_p_somp(y, &self.dict, &opts, &self.hmm),
            EstimatorKind::Genie => genie_vr_hmm_p_somp(y, &scenario.paths, &scenario.geometry, &self.hmm),
            EstimatorKind::Subarray(k) => self
                .subarrays
                .iter()
                .find(|(existing, _)| *existing == k)
                .ok_or_else(|| Error::config("estimators", format!("subarray-{k} was not prepared")))?
                .1
                .estimate(y, &opts),
        }
    }

    /// Full trial with reports kept, for inspection.
    pub fn run_detailed(&self, cfg: &ScenarioConfig, seed: u64) -> Result<TrialDetail> {
        let mut rng = rng_from_seed(seed);
        let scenario = sample_scenario(cfg, &mut rng)?;
        let observation = observe_pilots(&scenario.channel, cfg.snr_db, cfg.n_pilots, &mut rng)?;
        let outcomes = self
            .kinds
            .iter()
            .map(|&kind| {
                let report = self.estimate(kind, cfg, &scenario, &observation);
                let nmse = report
                    .as_ref()
                    .map_err(|e| e.to_string())
                    .and_then(|r| nmse_db(scenario.channel.values(), &r.channel_estimate).map_err(|e| e.to_string()));
                EstimatorOutcome {
                    kind,
                    nmse_db: nmse,
                    report: report.ok(),
                }
            })
            .collect();
        Ok(TrialDetail {
            seed,
            scenario,
            observation,
            outcomes,
        })
    }

    /// NMSE of every estimator for the trial drawn from `seed`.
    pub fn run(&self, cfg: &ScenarioConfig, seed: u64) -> Result<TrialRecord> {
        let detail = self.run_detailed(cfg, seed)?;
        Ok(TrialRecord {
            seed,
            entries: detail.outcomes.into_iter().map(|o| (o.kind, o.nmse_db)).collect(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct EstimatorOutcome {
    pub kind: EstimatorKind,
    pub nmse_db: std::result::Result<f64, String>,
    pub report: Option<EstimateReport>,
}

#[derive(Debug, Clone)]
pub struct TrialDetail {
    pub seed: u64,
    pub scenario: Scenario,
    pub observation: PilotObservation,
    pub outcomes: Vec<EstimatorOutcome>,
}

/// Per-estimator NMSE in dB; failures are kept as messages.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub entries: Vec<(EstimatorKind, std::result::Result<f64, String>)>,
}

/// Builds a context for `cfg` and runs a single trial.
pub fn run_trial(cfg: &ScenarioConfig, seed: u64) -> Result<TrialRecord> {
    TrialContext::new(cfg)?.run(cfg, seed)
}
