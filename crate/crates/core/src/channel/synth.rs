//! Channel synthesis and pilot observations.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::geometry::{steering_vector, ArrayGeometry};
use super::mask::{vr_mask, Path, VrMask};
use crate::{CMatrix, Error, Result, C64};

/// The dominant paths of one realization plus the wavenumbers needed to
/// render them.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    paths: Vec<Path>,
    carrier_wavenumber: f64,
    subcarrier_wavenumbers: Vec<f64>,
}

impl PathSet {
    pub fn new(paths: Vec<Path>, carrier_wavenumber: f64, subcarrier_wavenumbers: Vec<f64>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::config("n_paths", "a path set needs at least one path"));
        }
        if subcarrier_wavenumbers.is_empty() {
            return Err(Error::config("n_subcarriers", "at least one subcarrier is required"));
        }
        if !(carrier_wavenumber > 0.0) {
            return Err(Error::config("carrier_frequency", "carrier wavenumber must be positive"));
        }
        if subcarrier_wavenumbers.iter().any(|&k| !(k > 0.0)) {
            return Err(Error::config("bandwidth", "subcarrier wavenumbers must be positive"));
        }
        if subcarrier_wavenumbers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("bandwidth", "subcarrier wavenumbers must increase"));
        }
        for p in &paths {
            if !(p.distance > 0.0 && p.distance.is_finite()) {
                return Err(Error::Domain(format!("path distance must be positive and finite, got {}", p.distance)));
            }
        }
        Ok(Self {
            paths,
            carrier_wavenumber,
            subcarrier_wavenumbers,
        })
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn carrier_wavenumber(&self) -> f64 {
        self.carrier_wavenumber
    }

    pub fn subcarrier_wavenumbers(&self) -> &[f64] {
        &self.subcarrier_wavenumbers
    }

    pub fn n_subcarriers(&self) -> usize {
        self.subcarrier_wavenumbers.len()
    }

    /// Wavelength of subcarrier `m` (0-based).
    pub fn wavelength(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.subcarrier_wavenumbers[m]
    }

    /// True VR mask of path `l` on subcarrier `m`.
    pub fn mask(&self, l: usize, m: usize, geom: &ArrayGeometry) -> Result<DVector<f64>> {
        vr_mask(&self.paths[l], geom, self.wavelength(m))
    }
}

/// True channel `H`: antennas along rows, subcarriers along columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor(pub CMatrix);

impl ChannelTensor {
    pub fn zeros(n_antennas: usize, n_subcarriers: usize) -> Self {
        Self(CMatrix::zeros(n_antennas, n_subcarriers))
    }

    pub fn n_antennas(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.0.ncols()
    }

    pub fn values(&self) -> &CMatrix {
        &self.0
    }

    pub fn energy(&self) -> f64 {
        self.0.norm_squared()
    }
}

/// Received pilots stacked over repetitions: row `t * N + n` holds antenna
/// `n` in pilot slot `t`; columns are subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservation {
    stacked: CMatrix,
    noise_variance: f64,
    n_antennas: usize,
}

impl PilotObservation {
    pub fn new(stacked: CMatrix, noise_variance: f64, n_antennas: usize) -> Result<Self> {
        if n_antennas == 0 || !stacked.nrows().is_multiple_of(n_antennas) || stacked.nrows() == 0 {
            return Err(Error::Shape(format!(
                "{} stacked rows is not a positive multiple of {n_antennas} antennas",
                stacked.nrows()
            )));
        }
        Ok(Self {
            stacked,
            noise_variance,
            n_antennas,
        })
    }

    pub fn stacked(&self) -> &CMatrix {
        &self.stacked
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn n_pilots(&self) -> usize {
        self.stacked.nrows() / self.n_antennas
    }

    pub fn n_subcarriers(&self) -> usize {
        self.stacked.ncols()
    }

    /// Rows `first..first + len` of every pilot block, restacked. Used by the
    /// subarray estimator to carve out one subarray's observation.
    pub fn antenna_rows(&self, first: usize, len: usize) -> Result<Self> {
        if first + len > self.n_antennas || len == 0 {
            return Err(Error::Shape(format!(
                "antennas {first}..{} outside array of {}",
                first + len,
                self.n_antennas
            )));
        }
        let t_count = self.n_pilots();
        let m = self.n_subcarriers();
        let stacked = CMatrix::from_fn(len * t_count, m, |row, col| {
            let (t, n) = (row / len, row % len);
            self.stacked[(t * self.n_antennas + first + n, col)]
        });
        Ok(Self {
            stacked,
            noise_variance: self.noise_variance,
            n_antennas: len,
        })
    }
}

/// Renders every path onto the array and sums them per subcarrier.
pub fn synthesize_channel(pathset: &PathSet, geom: &ArrayGeometry) -> Result<ChannelTensor> {
    let n = geom.n_antennas();
    let m_count = pathset.n_subcarriers();
    let l_count = pathset.paths().len() as f64;
    let amplitude = (n as f64 / l_count).sqrt();
    let mut h = CMatrix::zeros(n, m_count);

    for (l, path) in pathset.paths().iter().enumerate() {
        let b = steering_vector(path.angle, path.distance, geom, pathset.carrier_wavenumber())?;
        // Only the diffraction mask changes with the subcarrier.
        let shared_mask = match path.mask {
            VrMask::NonBinary { .. } => None,
            _ => Some(pathset.mask(l, 0, geom)?),
        };
        for m in 0..m_count {
            let k_m = pathset.subcarrier_wavenumbers()[m];
            let coeff = path.gain * C64::from_polar(amplitude, -k_m * path.distance);
            let owned;
            let mask = match &shared_mask {
                Some(s) => s,
                None => {
                    owned = pathset.mask(l, m, geom)?;
                    &owned
                }
            };
            let mut col = h.column_mut(m);
            for i in 0..n {
                col[i] += coeff * b[i] * mask[i];
            }
        }
    }
    Ok(ChannelTensor(h))
}

/// Noise variance giving `snr_db` of average per-antenna, per-subcarrier
/// channel power over noise power. Infinite SNR means noiseless.
pub fn noise_variance_for(h: &ChannelTensor, snr_db: f64) -> Result<f64> {
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    if !snr_db.is_finite() {
        return Err(Error::config("snr_db", format!("{snr_db} is not a usable SNR")));
    }
    let energy = h.energy();
    if energy == 0.0 {
        return Err(Error::DegenerateChannel(
            "cannot normalise noise to a zero channel".into(),
        ));
    }
    let cells = (h.n_antennas() * h.n_subcarriers()) as f64;
    Ok(energy / (cells * 10f64.powf(snr_db / 10.0)))
}

/// Draws `n_pilots` noisy copies of `h` with i.i.d. circular complex Gaussian
/// noise and stacks them pilot-major.
pub fn observe_pilots<R: Rng + ?Sized>(
    h: &ChannelTensor,
    snr_db: f64,
    n_pilots: usize,
    rng: &mut R,
) -> Result<PilotObservation> {
    if n_pilots == 0 {
        return Err(Error::config("n_pilots", "must be at least 1"));
    }
    let sigma2 = noise_variance_for(h, snr_db)?;
    let n = h.n_antennas();
    let m_count = h.n_subcarriers();
    let std = (sigma2 / 2.0).sqrt();
    let mut stacked = CMatrix::zeros(n * n_pilots, m_count);
    // Fill column by column so the draw order is fixed by the layout.
    for m in 0..m_count {
        for t in 0..n_pilots {
            for i in 0..n {
                let mut y = h.0[(i, m)];
                if sigma2 > 0.0 {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    y += C64::new(re * std, im * std);
                }
                stacked[(t * n + i, m)] = y;
            }
        }
    }
    PilotObservation::new(stacked, sigma2, n)
}
