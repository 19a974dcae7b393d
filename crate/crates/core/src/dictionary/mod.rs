//! Polar-domain dictionary of near-field steering vectors.
//!
//! Angles are sampled uniformly in `sin(theta)`. At each angle the dictionary
//! holds one plane-wave atom plus `rings - 1` near-field atoms at distances
//! `r_s = N^2 d^2 cos^2(theta) / (2 beta^2 lambda_c s)`, `s = 1..rings-1`.
//! Atoms are stored ring-major (all plane-wave atoms first, then ring 1, ...)
//! so truncating to a target atom count drops the closest rings first.

mod cache;

pub use cache::{load_or_build, read_cache, write_cache, CacheStatus, DictionaryKey};

use crate::channel::{far_field_steering_vector, steering_vector, ArrayGeometry};
use crate::{CMatrix, Error, Result};

/// Sampling point of one atom. `distance` is `f64::INFINITY` for plane-wave atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    pub angle: f64,
    pub distance: f64,
}

impl AtomParams {
    pub fn is_far_field(&self) -> bool {
        self.distance.is_infinite()
    }
}

/// Unit-norm steering vectors as columns, `N x S`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarDictionary {
    atoms: CMatrix,
    params: Vec<AtomParams>,
}

impl PolarDictionary {
    pub fn from_parts(atoms: CMatrix, params: Vec<AtomParams>) -> Result<Self> {
        if atoms.ncols() != params.len() {
            return Err(Error::Shape(format!(
                "{} atoms but {} parameter records",
                atoms.ncols(),
                params.len()
            )));
        }
        if params.iter().any(|p| !(p.distance > 0.0)) {
            return Err(Error::Domain("atom distances must be positive".into()));
        }
        Ok(Self { atoms, params })
    }

    pub fn atoms(&self) -> &CMatrix {
        &self.atoms
    }

    pub fn params(&self) -> &[AtomParams] {
        &self.params
    }

    pub fn n_antennas(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn len(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Lazy view of the dictionary repeated `n_pilots` times vertically.
    pub fn stacked(&self, n_pilots: usize) -> StackedDictionary<'_> {
        StackedDictionary {
            dict: self,
            n_pilots,
        }
    }
}

/// The pilot-stacked dictionary `[W; W; ...; W]` without materializing it.
#[derive(Debug, Clone, Copy)]
pub struct StackedDictionary<'a> {
    pub dict: &'a PolarDictionary,
    pub n_pilots: usize,
}

/// `n` angles uniform in `sin(theta)` over `[theta_min, theta_max]`,
/// endpoints included. A single angle sits at the midpoint in sine.
pub fn angular_grid(n: usize, theta_min: f64, theta_max: f64) -> Result<Vec<f64>> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    if n == 0 {
        return Err(Error::config("n_antennas", "angular grid needs at least one angle"));
    }
    if !(theta_min < theta_max && theta_min >= -half_pi && theta_max <= half_pi) {
        return Err(Error::config(
            "angle_max",
            format!("empty or invalid angular range [{theta_min}, {theta_max}]"),
        ));
    }
    let (lo, hi) = (theta_min.sin(), theta_max.sin());
    if n == 1 {
        return Ok(vec![((lo + hi) / 2.0).asin()]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let s = if i == n - 1 { hi } else { lo + step * i as f64 };
            s.clamp(-1.0, 1.0).asin()
        })
        .collect())
}

/// Distances sampled at angle `theta`: the plane-wave sentinel followed by
/// `rings - 1` near-field rings, closest last.
pub fn distance_rings(theta: f64, geom: &ArrayGeometry, lambda_c: f64, beta: f64, rings: usize) -> Result<Vec<f64>> {
    if rings == 0 {
        return Err(Error::config("dictionary_rings", "must be at least 1"));
    }
    let aperture2 = geom.aperture().powi(2);
    let cos2 = 1.0 - theta.sin().powi(2);
    let mut out = Vec::with_capacity(rings);
    out.push(f64::INFINITY);
    for s in 1..rings {
        let r = aperture2 * cos2 / (2.0 * beta * beta * lambda_c * s as f64);
        if !(r > 0.0) {
            return Err(Error::Domain(format!("ring {s} collapses at angle {theta}")));
        }
        out.push(r);
    }
    Ok(out)
}

/// Polar dictionary on `n_angles = N` angles with `rings` distance rings,
/// optionally truncated to `atom_limit` atoms.
pub fn build_dictionary(
    geom: &ArrayGeometry,
    k_c: f64,
    theta_range: (f64, f64),
    beta: f64,
    rings: usize,
    atom_limit: Option<usize>,
) -> Result<PolarDictionary> {
    if !(beta > 0.0) {
        return Err(Error::config("dictionary_beta", "must be positive"));
    }
    let lambda_c = 2.0 * std::f64::consts::PI / k_c;
    let angles = angular_grid(geom.n_antennas(), theta_range.0, theta_range.1)?;
    let ring_table: Vec<Vec<f64>> = angles
        .iter()
        .map(|&a| distance_rings(a, geom, lambda_c, beta, rings))
        .collect::<Result<_>>()?;

    let full = angles.len() * rings;
    let count = match atom_limit {
        Some(0) => return Err(Error::config("dictionary_atoms", "must be positive")),
        Some(limit) => limit.min(full),
        None => full,
    };

    let mut params = Vec::with_capacity(count);
    'outer: for ring in 0..rings {
        for (a, &angle) in angles.iter().enumerate() {
            if params.len() == count {
                break 'outer;
            }
            params.push(AtomParams {
                angle,
                distance: ring_table[a][ring],
            });
        }
    }

    let mut atoms = CMatrix::zeros(geom.n_antennas(), count);
    for (j, p) in params.iter().enumerate() {
        let v = if p.is_far_field() {
            far_field_steering_vector(p.angle, geom, k_c)
        } else {
            steering_vector(p.angle, p.distance, geom, k_c)?
        };
        atoms.set_column(j, &v);
    }
    PolarDictionary::from_parts(atoms, params)
}

/// Materializes the dictionary repeated `n_pilots` times vertically, `(N*T) x S`.
/// Column norms become `sqrt(T)`.
pub fn stack_for_pilots(dict: &PolarDictionary, n_pilots: usize) -> CMatrix {
    crate::linalg::stack_rows(dict.atoms(), n_pilots)
}
