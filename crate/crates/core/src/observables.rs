//! Reductions of states and trajectories to measured quantities.

use std::collections::BTreeMap;

use crate::dynamics::{Capture, Trajectory};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lattice::{ModeIndex, ModeLattice};
use crate::state::AtomicState;

const CONDENSATE: ModeIndex = ModeIndex::new(0, 0);

/// Per-mode atom numbers at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRecord {
    pub tau: f64,
    pub counts: BTreeMap<ModeIndex, f64>,
    pub total: f64,
    /// `total - N(0,0)`.
    pub total_scattered: f64,
}

impl PopulationRecord {
    pub fn from_counts(tau: f64, counts: BTreeMap<ModeIndex, f64>) -> Self {
        let total: f64 = counts.values().sum();
        let total_scattered = counts.iter().filter(|(m, _)| **m != CONDENSATE).map(|(_, v)| v).sum();
        Self {
            tau,
            counts,
            total,
            total_scattered,
        }
    }

    pub fn from_capture(lattice: &ModeLattice, capture: &Capture) -> Self {
        let counts = lattice.modes().iter().copied().zip(capture.populations.iter().copied()).collect();
        Self::from_counts(capture.tau, counts)
    }

    /// `N(n,m)`, zero for modes outside the record.
    pub fn get(&self, mode: ModeIndex) -> f64 {
        self.counts.get(&mode).copied().unwrap_or(0.0)
    }

    /// Sum over modes with `n < 0`.
    pub fn backward_total(&self) -> f64 {
        self.counts.iter().filter(|(m, _)| m.n < 0).map(|(_, v)| v).sum()
    }

    /// Sum over modes with `n > 0`.
    pub fn forward_total(&self) -> f64 {
        self.counts.iter().filter(|(m, _)| m.n > 0).map(|(_, v)| v).sum()
    }
}

pub fn populations(state: &AtomicState) -> PopulationRecord {
    let counts = state.lattice().modes().iter().copied().zip(state.populations()).collect();
    PopulationRecord::from_counts(state.tau, counts)
}

pub fn final_record(traj: &Trajectory) -> PopulationRecord {
    PopulationRecord::from_capture(&traj.lattice, traj.last())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Divide by the scattered total (all modes except the condensate).
    ByScattered,
    /// Divide by a fixed atom number.
    ByFixed(f64),
}

pub fn normalize_spectrum(record: &PopulationRecord, scheme: Normalization) -> Result<BTreeMap<ModeIndex, f64>> {
    let denom = match scheme {
        Normalization::ByScattered => {
            if record.total_scattered <= 0.0 {
                return Err(Error::validation("normalization", "no scattered atoms to normalize by"));
            }
            record.total_scattered
        }
        Normalization::ByFixed(n) => {
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::validation("normalization", format!("fixed atom number must be positive, got {n}")));
            }
            n
        }
    };
    Ok(record.counts.iter().map(|(&m, &v)| (m, v / denom)).collect())
}

/// `|ψ_mode(ξ)|²`, optionally smoothed with a centred boxcar of `window` points.
pub fn depletion_profile(state: &AtomicState, mode: ModeIndex, window: Option<usize>) -> Result<Vec<f64>> {
    let amp = state
        .amplitude(mode)
        .ok_or_else(|| Error::validation("mode", format!("{mode} is not in the lattice")))?;
    let density: Vec<f64> = amp.iter().map(|z| z.norm_sqr()).collect();
    Ok(match window {
        None | Some(0) | Some(1) => density,
        Some(w) => boxcar(&density, w),
    })
}

fn boxcar(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|j| {
            let lo = j.saturating_sub(half);
            let hi = (j + half + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Threshold of the central-dip detector.
pub const CENTRAL_DIP_RATIO: f64 = 0.8;

/// Sample range of the condensate support: where the initial density is non-zero.
pub fn support(initial: &[f64]) -> Option<(usize, usize)> {
    let first = initial.iter().position(|&d| d > 0.0)?;
    let last = initial.iter().rposition(|&d| d > 0.0)?;
    Some((first, last + 1))
}

fn thirds((lo, hi): (usize, usize)) -> [(usize, usize); 3] {
    let k = (hi - lo) / 3;
    [(lo, lo + k), (lo + k, hi - k), (hi - k, hi)]
}

/// Central-dip test: split the support into thirds; a dip means
/// `min(central) < 0.8 * mean(max(left), max(right))`.
pub fn has_central_dip(profile: &[f64], support: (usize, usize)) -> bool {
    let [l, c, r] = thirds(support);
    let max = |(a, b): (usize, usize)| profile[a..b].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = profile[c.0..c.1].iter().copied().fold(f64::INFINITY, f64::min);
    min < CENTRAL_DIP_RATIO * 0.5 * (max(l) + max(r))
}

/// Fraction of atoms lost from each third of the support: `[left, central, right]`.
pub fn regional_depletion(initial: &[f64], current: &[f64], support: (usize, usize)) -> [f64; 3] {
    thirds(support).map(|(a, b)| {
        let before: f64 = initial[a..b].iter().sum();
        let after: f64 = current[a..b].iter().sum();
        if before > 0.0 {
            1.0 - after / before
        } else {
            0.0
        }
    })
}

/// `max_{n,m} |N(n,m) - N(n,-m)| / max(total, 1)`.
pub fn symmetry_residual(record: &PopulationRecord) -> f64 {
    record
        .counts
        .iter()
        .map(|(mode, &v)| (v - record.get(mode.mirrored())).abs())
        .fold(0.0, f64::max)
        / record.total.max(1.0)
}

/// Integral of a profile with the rule used for populations.
pub fn integrate_profile(grid: &Grid, profile: &[f64]) -> f64 {
    grid.integrate_periodic(profile.iter().copied())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Pixels per recoil momentum.
    pub spacing: usize,
    /// Gaussian blob standard deviation in pixels.
    pub blob_sigma: f64,
    pub width: usize,
    pub height: usize,
    pub log_scale: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            spacing: 24,
            blob_sigma: 4.0,
            width: 241,
            height: 241,
            log_scale: false,
        }
    }
}

/// Momentum-space rendering: `n` runs along x (pump axis), `m` upward along the image.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, peak normalized to 1 (all zero for an empty record).
    pub pixels: Vec<f64>,
    /// Raw intensity that maps to 1.
    pub scale: f64,
    pub centers: BTreeMap<ModeIndex, (usize, usize)>,
}

impl PatternImage {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }
}

pub fn render_pattern(record: &PopulationRecord, opts: &RenderOptions) -> Result<PatternImage> {
    let RenderOptions { spacing, blob_sigma, width, height, log_scale } = *opts;
    if spacing == 0 || !(blob_sigma > 0.0) {
        return Err(Error::validation("render", "spacing and blob width must be positive"));
    }
    if width % 2 == 0 || height % 2 == 0 {
        return Err(Error::validation("render", "image dimensions must be odd"));
    }
    let (cx, cy) = ((width / 2) as i64, (height / 2) as i64);
    let s = spacing as i64;
    let mut centers = BTreeMap::new();
    for &mode in record.counts.keys() {
        let x = cx + i64::from(mode.n) * s;
        let y = cy - i64::from(mode.m) * s;
        if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
            return Err(Error::validation(
                "render",
                format!("{width}x{height} image is too small for mode {mode}"),
            ));
        }
        centers.insert(mode, (x as usize, y as usize));
    }
    let reach = (4.0 * blob_sigma).ceil() as i64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * blob_sigma * blob_sigma);
    let mut raw = vec![0.0; width * height];
    for (mode, &(x0, y0)) in &centers {
        let w = record.get(*mode).max(0.0);
        if w == 0.0 {
            continue;
        }
        let (x0, y0) = (x0 as i64, y0 as i64);
        for y in (y0 - reach).max(0)..=(y0 + reach).min(height as i64 - 1) {
            for x in (x0 - reach).max(0)..=(x0 + reach).min(width as i64 - 1) {
                let r2 = ((x - x0) * (x - x0) + (y - y0) * (y - y0)) as f64;
                raw[y as usize * width + x as usize] += w * norm * (-0.5 * r2 / (blob_sigma * blob_sigma)).exp();
            }
        }
    }
    if log_scale {
        for v in &mut raw {
            *v = v.ln_1p();
        }
    }
    let scale = raw.iter().copied().fold(0.0, f64::max);
    let pixels = if scale > 0.0 { raw.iter().map(|v| v / scale).collect() } else { raw };
    Ok(PatternImage {
        width,
        height,
        pixels,
        scale,
        centers,
    })
}
