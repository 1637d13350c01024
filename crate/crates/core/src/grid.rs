use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest allowed `dt * (fastest phase rate)`.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;

/// User-facing resolution settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub num_points: usize,
    /// Dimensionless time step.
    pub dt: f64,
    /// Steps between observable captures.
    pub sample_every: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            num_points: 1024,
            dt: 1e-3,
            sample_every: 100,
        }
    }
}

/// Uniform spatial grid over `[0, xi_extent)` plus time-stepping settings.
///
/// Points sit at `xi_j = j * dxi`; the atomic fields are periodic on the box
/// while the optical integrals run from the first to the last point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub num_points: usize,
    pub xi_extent: f64,
    pub dxi: f64,
    pub dt: f64,
    pub sample_every: usize,
}

impl Grid {
    /// Build a grid; `max_phase_rate` is the fastest explicit oscillation in the
    /// coupling terms (lattice phase rates plus the pump detuning).
    pub fn new(spec: GridSpec, xi_extent: f64, max_phase_rate: f64) -> Result<Self> {
        let GridSpec {
            num_points,
            dt,
            sample_every,
        } = spec;
        if num_points < 64 || !num_points.is_power_of_two() {
            return Err(Error::validation(
                "num_points",
                format!("must be a power of two >= 64, got {num_points}"),
            ));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::validation("dt", format!("must be positive, got {dt}")));
        }
        if dt * max_phase_rate >= MAX_PHASE_PER_STEP {
            return Err(Error::validation(
                "dt",
                format!(
                    "dt * max_phase_rate = {:.3} must stay below {MAX_PHASE_PER_STEP}",
                    dt * max_phase_rate
                ),
            ));
        }
        if sample_every == 0 {
            return Err(Error::validation("sample_every", "must be >= 1"));
        }
        if !(xi_extent.is_finite() && xi_extent > 0.0) {
            return Err(Error::validation("xi_extent", "must be positive"));
        }
        Ok(Self {
            num_points,
            xi_extent,
            dxi: xi_extent / num_points as f64,
            dt,
            sample_every,
        })
    }

    pub fn xi(&self, j: usize) -> f64 {
        j as f64 * self.dxi
    }

    pub fn xi_left(&self) -> f64 {
        0.0
    }

    pub fn xi_right(&self) -> f64 {
        self.xi(self.num_points - 1)
    }

    /// Midpoint of the sampled interval; the reflection `j -> N-1-j` fixes it.
    pub fn xi_center(&self) -> f64 {
        0.5 * (self.xi_left() + self.xi_right())
    }

    /// Angular spatial frequency of FFT bin `k`, in standard FFT ordering.
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.num_points as i64;
        let k = k as i64;
        let signed = if k < n / 2 { k } else { k - n };
        2.0 * std::f64::consts::PI * signed as f64 / self.xi_extent
    }

    /// Integral of a sampled periodic density over one period.
    ///
    /// On a periodic grid the trapezoid rule reduces to `dxi * Σ f_j`.
    pub fn integrate_periodic(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        values.into_iter().sum::<f64>() * self.dxi
    }
}
