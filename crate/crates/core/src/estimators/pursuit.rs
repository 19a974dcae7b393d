//! Simultaneous orthogonal matching pursuit over the polar dictionary, with
//! optional per-atom VR masking.
//!
//! One iteration of the VR-aware variant:
//!
//! 1. correlate the residual with every unused atom and pick the one with the
//!    largest energy summed over subcarriers;
//! 2. least-squares fit of the observation on the support (new atom unmasked);
//! 3. compare the residual before and after removing the new atom's fitted
//!    contribution, antenna by antenna, and decode a binary VR mask from it;
//! 4. mask the new atom, refit, and update the residual.
//!
//! Plain P-SOMP stops after step 2.

use nalgebra::DVector;

use super::{EstimateReport, SupportSet};
use crate::channel::{steering_vector, ArrayGeometry, PathSet, PilotObservation};
use crate::dictionary::{PolarDictionary, StackedDictionary};
use crate::hmm::{compute_observation, decode_mask, HmmParams};
use crate::linalg::{least_squares, stack_rows, sum_row_blocks, LsSolution};
use crate::{CMatrix, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PursuitOptions {
    /// Number of atoms to select (`L_hat`).
    pub l_hat: usize,
    /// Stop early once `||R||^2 <= threshold * ||Y||^2`; `0` disables.
    pub residual_threshold: f64,
}

impl PursuitOptions {
    pub fn fixed(l_hat: usize) -> Self {
        Self {
            l_hat,
            residual_threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub score: f64,
    /// Every candidate scored zero; `index` is then the lowest allowed index.
    pub degenerate: bool,
}

/// `sum_m |(W_stacked^H R)[p, m]|^2` for every atom `p`.
///
/// The stacked dictionary repeats `W` in every pilot block, so
/// `W_stacked^H R = W^H (sum_t R_t)`.
pub fn somp_scores(dict: StackedDictionary<'_>, residual: &CMatrix) -> Result<Vec<f64>> {
    let n = dict.dict.n_antennas();
    if residual.nrows() != n * dict.n_pilots {
        return Err(Error::Shape(format!(
            "residual has {} rows, stacked dictionary has {}",
            residual.nrows(),
            n * dict.n_pilots
        )));
    }
    let folded = sum_row_blocks(residual, dict.n_pilots);
    let gamma = dict.dict.atoms().ad_mul(&folded);
    let mut scores = vec![0.0; gamma.nrows()];
    for col in gamma.column_iter() {
        for (s, g) in scores.iter_mut().zip(col.iter()) {
            *s += g.norm_sqr();
        }
    }
    Ok(scores)
}

/// Best atom not in `excluded`; ties go to the lowest index.
pub fn somp_select(dict: StackedDictionary<'_>, residual: &CMatrix, excluded: &[usize]) -> Result<Selection> {
    let scores = somp_scores(dict, residual)?;
    let mut best: Option<(usize, f64)> = None;
    for (p, &score) in scores.iter().enumerate() {
        if excluded.contains(&p) {
            continue;
        }
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((p, score));
        }
    }
    let (index, score) = best.ok_or_else(|| Error::Shape("every atom is already selected".into()))?;
    Ok(Selection {
        index,
        score,
        degenerate: score <= 0.0,
    })
}

/// Least-squares coefficients of `y` on the columns of `stacked_atoms`.
pub fn orthogonal_project(stacked_atoms: &CMatrix, y: &CMatrix) -> Result<LsSolution> {
    least_squares(stacked_atoms, y)
}

struct Pursuit<'a> {
    y: &'a PilotObservation,
    atoms: Vec<DVector<C64>>,
    indices: Vec<usize>,
    masks: Vec<Vec<bool>>,
    coefficients: CMatrix,
    residual: CMatrix,
    events: Vec<String>,
    y_energy: f64,
}

impl<'a> Pursuit<'a> {
    fn new(y: &'a PilotObservation) -> Self {
        Self {
            y,
            atoms: Vec::new(),
            indices: Vec::new(),
            masks: Vec::new(),
            coefficients: CMatrix::zeros(0, y.n_subcarriers()),
            residual: y.stacked().clone(),
            events: Vec::new(),
            y_energy: y.stacked().norm_squared(),
        }
    }

    fn stacked_support(&self) -> CMatrix {
        let n = self.y.n_antennas();
        let mut a = CMatrix::zeros(n, self.atoms.len());
        for (j, atom) in self.atoms.iter().enumerate() {
            a.set_column(j, atom);
        }
        stack_rows(&a, self.y.n_pilots())
    }

    fn solve(&mut self) -> Result<CMatrix> {
        let sol = orthogonal_project(&self.stacked_support(), self.y.stacked())?;
        for &j in &sol.zero_columns {
            self.events
                .push(format!("support atom {} is all zero; coefficient forced to 0", self.indices[j]));
        }
        Ok(sol.coefficients)
    }

    fn converged(&self, opts: &PursuitOptions) -> bool {
        opts.residual_threshold > 0.0 && self.residual.norm_squared() <= opts.residual_threshold * self.y_energy
    }

    /// Adds `atom` to the support, fitting a VR mask to it when `hmm` is given.
    fn add(&mut self, index: usize, atom: DVector<C64>, hmm: Option<&HmmParams>) -> Result<()> {
        self.indices.push(index);
        self.atoms.push(atom);
        let mut x = self.solve()?;

        if let Some(params) = hmm {
            let k = self.atoms.len() - 1;
            let t = self.y.n_pilots();
            let n = self.y.n_antennas();
            let stacked_atom = stack_rows(&CMatrix::from_column_slice(n, 1, self.atoms[k].as_slice()), t);
            let path_estimate = stacked_atom * x.row(k);
            let interim = &self.residual - path_estimate;
            let obs = compute_observation(&self.residual, &interim, n)?;
            let mask = decode_mask(&obs, params);
            if mask.iter().any(|&v| v) {
                for (w, &keep) in self.atoms[k].iter_mut().zip(&mask) {
                    if !keep {
                        *w = C64::new(0.0, 0.0);
                    }
                }
                x = self.solve()?;
            } else {
                self.events
                    .push(format!("empty VR decoded for atom {index}; keeping the unmasked atom"));
            }
            self.masks.push(mask);
        }

        self.residual = self.y.stacked() - self.stacked_support() * &x;
        self.coefficients = x;
        Ok(())
    }

    fn finish(self) -> EstimateReport {
        let masked_atoms = self.stacked_support();
        let n = self.y.n_antennas();
        let channel_estimate = masked_atoms.rows(0, n) * &self.coefficients;
        EstimateReport {
            channel_estimate,
            coefficients: self.coefficients,
            support: SupportSet {
                indices: self.indices,
                masked_atoms,
            },
            vr_masks: self.masks,
            events: self.events,
        }
    }
}

fn dictionary_pursuit(
    y: &PilotObservation,
    dict: &PolarDictionary,
    opts: &PursuitOptions,
    hmm: Option<&HmmParams>,
) -> Result<EstimateReport> {
    if dict.n_antennas() != y.n_antennas() {
        return Err(Error::Shape(format!(
            "dictionary has {} rows, observation has {} antennas",
            dict.n_antennas(),
            y.n_antennas()
        )));
    }
    let stacked = dict.stacked(y.n_pilots());
    let mut state = Pursuit::new(y);
    for _ in 0..opts.l_hat.min(dict.len()) {
        if state.converged(opts) {
            break;
        }
        let sel = somp_select(stacked, &state.residual, &state.indices)?;
        if sel.degenerate {
            break;
        }
        let atom = dict.atoms().column(sel.index).into_owned();
        state.add(sel.index, atom, hmm)?;
    }
    Ok(state.finish())
}

/// Polar-domain SOMP.
pub fn p_somp(y: &PilotObservation, dict: &PolarDictionary, opts: &PursuitOptions) -> Result<EstimateReport> {
    dictionary_pursuit(y, dict, opts, None)
}

/// Polar-domain SOMP with an HMM-decoded VR mask fitted to every selected atom.
pub fn vr_hmm_p_somp(
    y: &PilotObservation,
    dict: &PolarDictionary,
    opts: &PursuitOptions,
    hmm: &HmmParams,
) -> Result<EstimateReport> {
    dictionary_pursuit(y, dict, opts, Some(hmm))
}

/// VR-HMM-P-SOMP with support selection replaced by the true scatterer
/// positions: one exact steering vector per path, strongest gain first.
/// VR masks are still estimated. Support indices are path indices.
pub fn genie_vr_hmm_p_somp(
    y: &PilotObservation,
    paths: &PathSet,
    geom: &ArrayGeometry,
    hmm: &HmmParams,
) -> Result<EstimateReport> {
    if geom.n_antennas() != y.n_antennas() {
        return Err(Error::Shape("geometry does not match the observation".into()));
    }
    let mut order: Vec<usize> = (0..paths.paths().len()).collect();
    order.sort_by(|&a, &b| paths.paths()[b].gain.norm().total_cmp(&paths.paths()[a].gain.norm()));
    let mut state = Pursuit::new(y);
    for l in order {
        let p = &paths.paths()[l];
        let atom = steering_vector(p.angle, p.distance, geom, paths.carrier_wavenumber())?;
        state.add(l, atom, Some(hmm))?;
    }
    Ok(state.finish())
}
