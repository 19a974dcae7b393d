//! Random scenario draws.

use rand::Rng;

use super::geometry::ArrayGeometry;
use super::mask::{MaskCase, Path, VrMask};
use super::synth::{synthesize_channel, ChannelTensor, PathSet};
use crate::harness::ScenarioConfig;
use crate::{Result, C64, SPEED_OF_LIGHT};

/// One channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: ArrayGeometry,
    pub paths: PathSet,
    pub channel: ChannelTensor,
}

/// Wavenumbers of `m_count` subcarriers spaced `B / M` apart, centered on `f_c`.
pub fn subcarrier_wavenumbers(f_c: f64, bandwidth: f64, m_count: usize) -> Vec<f64> {
    let spacing = bandwidth / m_count as f64;
    let center = (m_count as f64 + 1.0) / 2.0;
    (1..=m_count)
        .map(|m| {
            let f = f_c + (m as f64 - center) * spacing;
            2.0 * std::f64::consts::PI * f / SPEED_OF_LIGHT
        })
        .collect()
}

fn unit_disk<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    loop {
        let re = rng.random_range(-1.0..1.0);
        let im = rng.random_range(-1.0..1.0);
        let z = C64::new(re, im);
        if z.norm_sqr() < 1.0 {
            return z;
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn pick_case<R: Rng + ?Sized>(rng: &mut R, probs: &[(MaskCase, f64); 3]) -> MaskCase {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(case, p) in probs {
        acc += p;
        if u < acc {
            return case;
        }
    }
    // Rounding left u above the cumulative sum; fall back to the last
    // case with non-zero weight.
    probs.iter().rev().find(|(_, p)| *p > 0.0).map(|(c, _)| *c).unwrap_or(MaskCase::Stationary)
}

fn draw_path<R: Rng + ?Sized>(cfg: &ScenarioConfig, probs: &[(MaskCase, f64); 3], rng: &mut R) -> Path {
    let distance = uniform(rng, cfg.distance_min, cfg.distance_max);
    let angle = uniform(rng, cfg.angle_min, cfg.angle_max);
    let gain = unit_disk(rng);
    let n = cfg.n_antennas as f64;
    let mask = match pick_case(rng, probs) {
        MaskCase::Stationary => VrMask::Stationary,
        MaskCase::Binary => {
            let a = uniform(rng, 1.0, n).round() as usize;
            let b = uniform(rng, 1.0, n).round() as usize;
            VrMask::Binary {
                first: a.min(b),
                last: a.max(b),
            }
        }
        MaskCase::NonBinary => VrMask::NonBinary {
            theta_edge: uniform(rng, -cfg.theta_edge_max, cfg.theta_edge_max),
        },
    };
    Path {
        angle,
        distance,
        gain,
        mask,
    }
}

/// Draws `cfg.n_paths` paths and synthesizes their channel.
pub fn sample_scenario<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Scenario> {
    let geometry = cfg.geometry()?;
    let probs = cfg.mask_probabilities();
    let paths: Vec<Path> = (0..cfg.n_paths).map(|_| draw_path(cfg, &probs, rng)).collect();
    let k_m = subcarrier_wavenumbers(cfg.carrier_frequency, cfg.bandwidth, cfg.n_subcarriers);
    let paths = PathSet::new(paths, cfg.carrier_wavenumber(), k_m)?;
    let channel = synthesize_channel(&paths, &geometry)?;
    Ok(Scenario {
        geometry,
        paths,
        channel,
    })
}
