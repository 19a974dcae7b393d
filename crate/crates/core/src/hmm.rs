//! Per-path visibility-region estimation with a two-state hidden Markov model.
//!
//! Each antenna is either inside (`1`) or outside (`0`) the VR of the path
//! being examined. The observation at antenna `n` is how much removing the
//! candidate path shrinks the residual magnitude there, averaged over pilot
//! slots and subcarriers. A sigmoid maps it to emission weights and a Viterbi
//! pass along the array picks the most likely binary mask.

use crate::{CMatrix, Error, Result};

/// Transition, initial and emission-steepness parameters of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmmParams {
    p_stay: f64,
    p_init_in: f64,
    temperature: f64,
}

impl HmmParams {
    pub fn new(p_stay: f64, p_init_in: f64, temperature: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_stay) {
            return Err(Error::config("p_stay", format!("{p_stay} is not a probability")));
        }
        if !(0.0..=1.0).contains(&p_init_in) {
            return Err(Error::config("p_init_in", format!("{p_init_in} is not a probability")));
        }
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::config("temperature", "must be positive"));
        }
        Ok(Self {
            p_stay,
            p_init_in,
            temperature,
        })
    }

    /// `p_stay = 1 - 1/N`, initial `(0.55, 0.45)`, temperature 20.
    pub fn for_array(n_antennas: usize) -> Self {
        Self {
            p_stay: 1.0 - 1.0 / n_antennas as f64,
            p_init_in: 0.55,
            temperature: 20.0,
        }
    }

    pub fn p_stay(&self) -> f64 {
        self.p_stay
    }

    pub fn p_switch(&self) -> f64 {
        1.0 - self.p_stay
    }

    pub fn p_init_in(&self) -> f64 {
        self.p_init_in
    }

    pub fn p_init_out(&self) -> f64 {
        1.0 - self.p_init_in
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

/// Antenna-wise mean residual reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct VrObservation {
    pub values: Vec<f64>,
    pub n_pilots: usize,
    pub n_subcarriers: usize,
}

/// Rearranges a pilot-stacked `(N*T) x M` matrix so row `n` holds every
/// measurement of antenna `n`: output `(n, t*M + m)` is input `(t*N + n, m)`.
pub fn reshape_antenna_major(x: &CMatrix, n_antennas: usize) -> Result<CMatrix> {
    if n_antennas == 0 || !x.nrows().is_multiple_of(n_antennas) {
        return Err(Error::Shape(format!(
            "{} rows do not split into blocks of {n_antennas} antennas",
            x.nrows()
        )));
    }
    let t_count = x.nrows() / n_antennas;
    let m_count = x.ncols();
    Ok(CMatrix::from_fn(n_antennas, t_count * m_count, |n, col| {
        let (t, m) = (col / m_count, col % m_count);
        x[(t * n_antennas + n, m)]
    }))
}

/// Inverse of [`reshape_antenna_major`].
pub fn reshape_pilot_major(x: &CMatrix, n_pilots: usize) -> Result<CMatrix> {
    if n_pilots == 0 || !x.ncols().is_multiple_of(n_pilots) {
        return Err(Error::Shape(format!(
            "{} columns do not split into {n_pilots} pilot slots",
            x.ncols()
        )));
    }
    let n_antennas = x.nrows();
    let m_count = x.ncols() / n_pilots;
    Ok(CMatrix::from_fn(n_antennas * n_pilots, m_count, |row, m| {
        let (t, n) = (row / n_antennas, row % n_antennas);
        x[(n, t * m_count + m)]
    }))
}

/// `o_n = mean_i(|R~[n, i]| - |R~_pi[n, i]|)` over all pilot slots and
/// subcarriers of antenna `n`.
pub fn compute_observation(residual: &CMatrix, interim: &CMatrix, n_antennas: usize) -> Result<VrObservation> {
    if residual.shape() != interim.shape() {
        return Err(Error::Shape(format!(
            "residual {:?} and interim residual {:?} differ",
            residual.shape(),
            interim.shape()
        )));
    }
    let r = reshape_antenna_major(residual, n_antennas)?;
    let r_pi = reshape_antenna_major(interim, n_antennas)?;
    let cols = r.ncols();
    let values = (0..n_antennas)
        .map(|n| {
            let total: f64 = (0..cols).map(|i| r[(n, i)].norm() - r_pi[(n, i)].norm()).sum();
            total / cols as f64
        })
        .collect();
    Ok(VrObservation {
        values,
        n_pilots: residual.nrows() / n_antennas,
        n_subcarriers: residual.ncols(),
    })
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(sigmoid(x))` without overflow: `-softplus(-x)`.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Emission weights `(sigma(T o), sigma(-T o))` for the in/out states.
pub fn emission_probs(obs: &VrObservation, temperature: f64) -> (Vec<f64>, Vec<f64>) {
    obs.values
        .iter()
        .map(|&o| (sigmoid(temperature * o), sigmoid(-temperature * o)))
        .unzip()
}

/// Log-domain counterpart of [`emission_probs`]; stays finite for any `T |o|`.
pub fn log_emissions(obs: &VrObservation, temperature: f64) -> (Vec<f64>, Vec<f64>) {
    obs.values
        .iter()
        .map(|&o| (log_sigmoid(temperature * o), log_sigmoid(-temperature * o)))
        .unzip()
}

/// Most likely in/out sequence given emission probabilities.
pub fn viterbi(p_in: &[f64], p_out: &[f64], params: &HmmParams) -> Vec<bool> {
    let log_in: Vec<f64> = p_in.iter().map(|p| p.ln()).collect();
    let log_out: Vec<f64> = p_out.iter().map(|p| p.ln()).collect();
    viterbi_log(&log_in, &log_out, params)
}

/// Viterbi decoding along antenna index `0..N` with log emissions. Equal
/// scores resolve to the in-VR state.
pub fn viterbi_log(log_in: &[f64], log_out: &[f64], params: &HmmParams) -> Vec<bool> {
    assert_eq!(log_in.len(), log_out.len(), "emission vectors differ in length");
    let n = log_in.len();
    if n == 0 {
        return Vec::new();
    }
    let stay = params.p_stay().ln();
    let switch = params.p_switch().ln();

    // back[i] = (best predecessor of "in" at i, best predecessor of "out" at i)
    let mut back = vec![(true, true); n];
    let mut score_in = params.p_init_in().ln() + log_in[0];
    let mut score_out = params.p_init_out().ln() + log_out[0];

    for i in 1..n {
        let (in_from_in, in_from_out) = (score_in + stay, score_out + switch);
        let (out_from_in, out_from_out) = (score_in + switch, score_out + stay);
        let prev_for_in = in_from_in >= in_from_out;
        let prev_for_out = out_from_in >= out_from_out;
        back[i] = (prev_for_in, prev_for_out);
        score_in = in_from_in.max(in_from_out) + log_in[i];
        score_out = out_from_in.max(out_from_out) + log_out[i];
    }

    let mut path = vec![false; n];
    let mut state = score_in >= score_out;
    for i in (0..n).rev() {
        path[i] = state;
        if i > 0 {
            state = if state { back[i].0 } else { back[i].1 };
        }
    }
    path
}

/// Observation -> emissions -> Viterbi, as one step.
pub fn decode_mask(obs: &VrObservation, params: &HmmParams) -> Vec<bool> {
    let (log_in, log_out) = log_emissions(obs, params.temperature());
    viterbi_log(&log_in, &log_out, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::C64;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn joint_log_likelihood(path: &[bool], log_in: &[f64], log_out: &[f64], p: &HmmParams) -> f64 {
        let mut ll = if path[0] { p.p_init_in().ln() } else { p.p_init_out().ln() };
        for (i, &s) in path.iter().enumerate() {
            ll += if s { log_in[i] } else { log_out[i] };
            if i > 0 {
                ll += if s == path[i - 1] { p.p_stay().ln() } else { p.p_switch().ln() };
            }
        }
        ll
    }

    fn brute_force(log_in: &[f64], log_out: &[f64], p: &HmmParams) -> (Vec<bool>, f64) {
        let n = log_in.len();
        let mut best = (Vec::new(), f64::NEG_INFINITY);
        for bits in 0u32..(1 << n) {
            let path: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            let ll = joint_log_likelihood(&path, log_in, log_out, p);
            if ll > best.1 {
                best = (path, ll);
            }
        }
        best
    }

    fn obs(values: Vec<f64>) -> VrObservation {
        VrObservation {
            values,
            n_pilots: 1,
            n_subcarriers: 1,
        }
    }

    #[test]
    fn reshape_identity_for_single_pilot() {
        let x = CMatrix::from_fn(2, 3, |r, c| C64::new(r as f64, c as f64));
        assert_eq!(reshape_antenna_major(&x, 2).unwrap(), x);
    }

    #[test]
    fn reshape_single_antenna_flattens() {
        let x = CMatrix::from_fn(3, 2, |r, c| C64::new((r * 2 + c) as f64, 0.0));
        let y = reshape_antenna_major(&x, 1).unwrap();
        assert_eq!(y.shape(), (1, 6));
        let flat: Vec<f64> = y.iter().map(|z| z.re).collect();
        assert_eq!(flat, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn reshape_layout_and_errors() {
        let x = CMatrix::from_fn(6, 2, |r, c| C64::new(r as f64, c as f64));
        let y = reshape_antenna_major(&x, 3).unwrap();
        // Row n, column t*M + m  <-  row t*N + n, column m.
        assert_eq!(y[(1, 2 + 1)], x[(3 + 1, 1)]);
        assert!(reshape_antenna_major(&x, 4).is_err());
        assert!(reshape_pilot_major(&y, 3).is_err());
    }

    proptest! {
        #[test]
        fn reshape_round_trip(n in 1usize..6, t in 1usize..5, m in 1usize..5, seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let x = CMatrix::from_fn(n * t, m, |_, _| C64::new(rng.random(), rng.random()));
            let y = reshape_antenna_major(&x, n).unwrap();
            prop_assert_eq!(reshape_pilot_major(&y, t).unwrap(), x);
        }

        #[test]
        fn emissions_sum_to_one(o in -50.0f64..50.0, temp in 0.1f64..100.0) {
            let (p_in, p_out) = emission_probs(&obs(vec![o]), temp);
            prop_assert!((p_in[0] + p_out[0] - 1.0).abs() < 1e-12);
            let (q_in, q_out) = emission_probs(&obs(vec![-o]), temp);
            prop_assert_eq!(p_in[0], q_out[0]);
            prop_assert_eq!(p_out[0], q_in[0]);
        }
    }

    #[test]
    fn observation_examples() {
        let r = CMatrix::from_element(4, 2, C64::new(0.0, 2.0));
        let half = CMatrix::from_element(4, 2, C64::new(1.0, 0.0));
        let o = compute_observation(&r, &r, 2).unwrap();
        assert!(o.values.iter().all(|&v| v == 0.0));
        let o = compute_observation(&r, &half, 2).unwrap();
        assert_eq!(o.values, vec![1.0, 1.0]);
        assert_eq!((o.n_pilots, o.n_subcarriers), (2, 2));
        assert!(compute_observation(&r, &CMatrix::zeros(4, 3), 2).is_err());
    }

    #[test]
    fn observation_matches_loop_oracle() {
        let (n, t, m) = (3, 2, 2);
        let mut rng = rng_from_seed(21);
        let mut draw = || CMatrix::from_fn(n * t, m, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let (r, r_pi) = (draw(), draw());
        let o = compute_observation(&r, &r_pi, n).unwrap();
        for ant in 0..n {
            let mut acc = 0.0;
            for slot in 0..t {
                for sc in 0..m {
                    acc += r[(slot * n + ant, sc)].norm() - r_pi[(slot * n + ant, sc)].norm();
                }
            }
            assert_relative_eq!(o.values[ant], acc / (t * m) as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn emission_examples() {
        let (p_in, p_out) = emission_probs(&obs(vec![0.0, 1.0]), 20.0);
        assert_eq!((p_in[0], p_out[0]), (0.5, 0.5));
        assert_relative_eq!(1.0 - p_in[1], 2.061_153_6e-9, max_relative = 1e-6);
        let (l_in, l_out) = log_emissions(&obs(vec![1e4, -1e4]), 20.0);
        assert!(l_in.iter().chain(&l_out).all(|v| v.is_finite()));
        assert_eq!(l_in[0], 0.0);
        assert_relative_eq!(l_out[0], -2e5, max_relative = 1e-12);
    }

    #[test]
    fn uninformative_emissions_decode_in() {
        let p = HmmParams::for_array(10);
        assert_eq!(viterbi(&[0.5; 10], &[0.5; 10], &p), vec![true; 10]);
        assert_eq!(viterbi(&[0.99; 10], &[0.01; 10], &p), vec![true; 10]);
    }

    #[test]
    fn half_visible_array() {
        let p = HmmParams::for_array(10);
        let p_in: Vec<f64> = (0..10).map(|i| if i < 5 { 0.99 } else { 0.01 }).collect();
        let p_out: Vec<f64> = p_in.iter().map(|x| 1.0 - x).collect();
        let expect: Vec<bool> = (0..10).map(|i| i < 5).collect();
        assert_eq!(viterbi(&p_in, &p_out, &p), expect);
        let (li, lo): (Vec<f64>, Vec<f64>) = p_in.iter().map(|x| (x.ln(), (1.0 - x).ln())).unzip();
        assert_eq!(brute_force(&li, &lo, &p).0, expect);
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = rng_from_seed(1234);
        for trial in 0..300 {
            let n = rng.random_range(1..=10);
            let p = HmmParams::new(rng.random_range(0.01..0.99), rng.random_range(0.01..0.99), 20.0).unwrap();
            let p_in: Vec<f64> = (0..n).map(|_| rng.random_range(0.001..0.999)).collect();
            let p_out: Vec<f64> = (0..n).map(|_| rng.random_range(0.001..0.999)).collect();
            let (li, lo): (Vec<f64>, Vec<f64>) = p_in.iter().zip(&p_out).map(|(a, b)| (a.ln(), b.ln())).unzip();
            assert_eq!(viterbi(&p_in, &p_out, &p), brute_force(&li, &lo, &p).0, "trial {trial}");
        }
    }

    #[test]
    fn rescaling_one_antenna_changes_nothing() {
        let mut rng = rng_from_seed(77);
        let p = HmmParams::for_array(12);
        for _ in 0..100 {
            let p_in: Vec<f64> = (0..12).map(|_| rng.random_range(0.01..0.99)).collect();
            let p_out: Vec<f64> = (0..12).map(|_| rng.random_range(0.01..0.99)).collect();
            let base = viterbi(&p_in, &p_out, &p);
            let k = rng.random_range(0..12);
            let c = rng.random_range(0.05..0.9);
            let (mut a, mut b) = (p_in.clone(), p_out.clone());
            a[k] *= c;
            b[k] *= c;
            assert_eq!(viterbi(&a, &b, &p), base);
        }
    }

    #[test]
    fn strong_positive_observation_is_never_dropped() {
        let mut rng = rng_from_seed(5);
        let p = HmmParams::for_array(12);
        for _ in 0..200 {
            let mut o: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
            let k = rng.random_range(0..12);
            o[k] = -0.5;
            let before = decode_mask(&obs(o.clone()), &p);
            o[k] = 0.5;
            let after = decode_mask(&obs(o), &p);
            assert!(!(before[k] && !after[k]));
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(HmmParams::new(1.2, 0.5, 20.0).is_err());
        assert!(HmmParams::new(0.9, -0.1, 20.0).is_err());
        assert!(HmmParams::new(0.9, 0.5, 0.0).is_err());
        let p = HmmParams::for_array(256);
        assert_eq!(p.p_stay() + p.p_switch(), 1.0);
        assert_relative_eq!(p.p_init_out(), 0.45, epsilon = 1e-15);
    }
}
