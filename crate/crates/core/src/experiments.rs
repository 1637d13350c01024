//! Built-in scenarios and parameter sweeps.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::dynamics::{simulate, SimulationConfig, Trajectory, DIAGONAL_COMPONENTS};
use crate::error::{Error, Result};
use crate::lattice::ModeIndex;
use crate::observables::{final_record, normalize_spectrum, Normalization};

pub const SPECTRUM_MODES: [ModeIndex; 3] = [ModeIndex::new(-1, -1), ModeIndex::new(2, 0), ModeIndex::new(2, 2)];

/// Sweep coupling and grid (kHz) used when nothing else is given.
pub const SWEEP_COUPLING_G: f64 = 1.05e6;
pub const SWEEP_FROM_KHZ: f64 = 0.0;
pub const SWEEP_TO_KHZ: f64 = 60.0;
pub const SWEEP_STEP_KHZ: f64 = 2.5;

pub fn khz_to_rad(khz: f64) -> f64 {
    2.0 * PI * khz * 1e3
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub delta_omega_khz: f64,
    pub coupling_g: f64,
    pub endfire: bool,
}

impl Scenario {
    pub fn config(&self) -> SimulationConfig {
        let mut cfg = SimulationConfig::default();
        cfg.params.delta_omega = khz_to_rad(self.delta_omega_khz);
        cfg.params.coupling_g = self.coupling_g;
        cfg.capture.profiles = false;
        cfg
    }
}

const fn scenario(name: &'static str, description: &'static str, khz: f64, g: f64, endfire: bool) -> Scenario {
    Scenario {
        name,
        description,
        delta_omega_khz: khz,
        coupling_g: g,
        endfire,
    }
}

pub const BUILTIN: [Scenario; 8] = [
    scenario("fig2c-0kHz", "single-frequency limit, fan-shaped pattern", 0.0, 1.25e6, false),
    scenario("fig2c-15kHz", "resonant diagonal pattern with backward modes", 15.0, 1.25e6, false),
    scenario("fig2c-30kHz", "two-frequency pump at 8 w_r", 30.0, 1.25e6, false),
    scenario("fig2c-45kHz", "two-frequency pump at 12 w_r", 45.0, 1.25e6, false),
    scenario("fig2c-60kHz", "two-frequency pump at 16 w_r", 60.0, 1.25e6, false),
    scenario("fig4b", "(2,0) populated with diagonal tendency", 30.0, 1.5e6, false),
    scenario("fig5a", "end-fire components, single frequency", 0.0, 0.85e6, true),
    scenario("fig5b", "end-fire components at 15 kHz", 15.0, 1.25e6, true),
];

pub fn builtin(name: &str) -> Result<&'static Scenario> {
    BUILTIN.iter().find(|s| s.name == name).ok_or_else(|| {
        let names: Vec<&str> = BUILTIN.iter().map(|s| s.name).collect();
        Error::validation("scenario", format!("unknown scenario {name:?}; valid names: {}", names.join(", ")))
    })
}

pub fn run_scenario(s: &Scenario) -> Result<Trajectory> {
    simulate(&s.config())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub delta_omega_khz: f64,
    /// Normalized `N(-1,-1)`, `N(2,0)`, `N(2,2)`.
    pub values: [f64; 3],
    /// Normalized scattered total.
    pub total_scattered: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub normalization: Normalization,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    pub fn column(&self, mode: ModeIndex) -> Option<Vec<f64>> {
        let k = SPECTRUM_MODES.iter().position(|&m| m == mode)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn frequencies_khz(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta_omega_khz).collect()
    }
}

/// `from, from+step, ...` up to `to` inclusive (with a small tolerance).
pub fn frequency_grid_khz(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::validation("step_khz", format!("must be positive, got {step}")));
    }
    if !(from.is_finite() && to.is_finite() && from >= 0.0 && to >= from) {
        return Err(Error::validation("from_khz", format!("need 0 <= from <= to, got {from}..{to}")));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| from + i as f64 * step).collect())
}

pub fn default_sweep_grid() -> Vec<f64> {
    frequency_grid_khz(SWEEP_FROM_KHZ, SWEEP_TO_KHZ, SWEEP_STEP_KHZ).expect("valid constants")
}

fn spectrum_row(base: &SimulationConfig, khz: f64, scheme: Normalization) -> SpectrumRow {
    let mut cfg = base.clone();
    cfg.params.delta_omega = khz_to_rad(khz);
    let outcome = simulate(&cfg).and_then(|t| {
        let rec = final_record(&t);
        let norm = normalize_spectrum(&rec, scheme)?;
        let scattered = match scheme {
            Normalization::ByScattered => 1.0,
            Normalization::ByFixed(n) => rec.total_scattered / n,
        };
        Ok((SPECTRUM_MODES.map(|m| norm.get(&m).copied().unwrap_or(0.0)), scattered))
    });
    match outcome {
        Ok((values, total_scattered)) => SpectrumRow { delta_omega_khz: khz, values, total_scattered, error: None },
        Err(e) => SpectrumRow {
            delta_omega_khz: khz,
            values: [f64::NAN; 3],
            total_scattered: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

/// One independent run per frequency (kHz). Runs execute on `workers` threads
/// (all available when `None`); rows come back in grid order.
pub fn sweep_delta_omega(
    base: &SimulationConfig,
    grid_khz: &[f64],
    scheme: Normalization,
    workers: Option<usize>,
) -> Result<SpectrumTable> {
    if grid_khz.is_empty() {
        return Err(Error::validation("sweep", "frequency grid is empty"));
    }
    if grid_khz.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(Error::validation("sweep", "frequencies must be finite and >= 0"));
    }
    if let Some(w) = grid_khz.windows(2).find(|w| w[1] <= w[0]) {
        let reason = if w[1] == w[0] {
            format!("duplicate frequency {} kHz", w[0])
        } else {
            format!("frequencies must increase, got {} then {}", w[0], w[1])
        };
        return Err(Error::validation("sweep", reason));
    }
    if let Normalization::ByFixed(n) = scheme {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::validation("normalization", "fixed atom number must be positive"));
        }
    }
    let run = || -> Vec<SpectrumRow> { grid_khz.par_iter().map(|&f| spectrum_row(base, f, scheme)).collect() };
    let rows = match workers {
        Some(0) => return Err(Error::validation("workers", "must be >= 1")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::validation("workers", e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(SpectrumTable { normalization: scheme, rows })
}

/// Base configuration of the spectrum sweep.
pub fn sweep_base() -> SimulationConfig {
    let mut cfg = SimulationConfig::default();
    cfg.params.coupling_g = SWEEP_COUPLING_G;
    cfg
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndfireSeries {
    pub t_us: Vec<f64>,
    /// `(mode, |e₊^(mode)|)` series for the diagonal components.
    pub components: Vec<(ModeIndex, Vec<f64>)>,
}

impl EndfireSeries {
    pub fn get(&self, mode: ModeIndex) -> Option<&[f64]> {
        self.components.iter().find(|(m, _)| *m == mode).map(|(_, v)| v.as_slice())
    }
}

pub fn endfire_series(traj: &Trajectory) -> EndfireSeries {
    let components = DIAGONAL_COMPONENTS
        .iter()
        .filter(|m| traj.captures.first().is_some_and(|c| c.diagonal_components.iter().any(|(x, _)| x == *m)))
        .map(|&mode| {
            let series = traj
                .captures
                .iter()
                .map(|c| c.diagonal_components.iter().find(|(x, _)| *x == mode).map_or(0.0, |(_, v)| *v))
                .collect();
            (mode, series)
        })
        .collect();
    EndfireSeries {
        t_us: traj.captures.iter().map(|c| c.t_us).collect(),
        components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    // Frozen parameter manifest: (name, Δω in kHz, g in 1/s).
    const MANIFEST: [(&str, f64, f64); 8] = [
        ("fig2c-0kHz", 0.0, 1.25e6),
        ("fig2c-15kHz", 15.0, 1.25e6),
        ("fig2c-30kHz", 30.0, 1.25e6),
        ("fig2c-45kHz", 45.0, 1.25e6),
        ("fig2c-60kHz", 60.0, 1.25e6),
        ("fig4b", 30.0, 1.5e6),
        ("fig5a", 0.0, 0.85e6),
        ("fig5b", 15.0, 1.25e6),
    ];

    #[test]
    fn builtin_parameters_match_manifest() {
        assert_eq!(BUILTIN.len(), MANIFEST.len());
        for (name, khz, g) in MANIFEST {
            let s = builtin(name).unwrap();
            assert_eq!(s.delta_omega_khz, khz);
            assert_eq!(s.coupling_g, g);
            let cfg = s.config();
            assert_eq!(cfg.params.delta_omega, 2.0 * PI * khz * 1e3);
            assert_eq!(cfg.params.coupling_g, g);
            assert_eq!(cfg.params.pulse_duration, 200e-6);
            assert_eq!(cfg.params.atom_number, 2e5);
            assert_eq!(cfg.params.phi0, 0.0);
            assert_eq!(cfg.seeds.len(), 2);
            assert!(cfg.seeds.iter().all(|s| s.atoms == 1.0 && s.n == 1 && s.m.abs() == 1));
        }
        let mut names: Vec<_> = BUILTIN.iter().map(|s| s.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), BUILTIN.len());
    }

    #[test]
    fn unknown_scenario_lists_names() {
        let err = builtin("fig9").unwrap_err().to_string();
        for s in &BUILTIN {
            assert!(err.contains(s.name), "{err}");
        }
    }

    #[test]
    fn default_grid_has_25_points() {
        let g = default_sweep_grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[24], 60.0);
        assert!(frequency_grid_khz(0.0, 1.0, 0.0).is_err());
    }

    fn short_base() -> SimulationConfig {
        let mut cfg = sweep_base();
        cfg.grid = GridSpec { num_points: 128, dt: 2e-3, sample_every: 500 };
        cfg.params.pulse_duration = 30e-6;
        cfg.params.coupling_g = 4e6;
        cfg
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let base = short_base();
        let fixed = Normalization::ByFixed(2e5);
        assert!(sweep_delta_omega(&base, &[], fixed, None).is_err());
        assert!(sweep_delta_omega(&base, &[0.0, 5.0, 5.0], fixed, None).is_err());
        assert!(sweep_delta_omega(&base, &[5.0, 0.0], fixed, None).is_err());
        assert!(sweep_delta_omega(&base, &[0.0], fixed, Some(0)).is_err());
    }

    #[test]
    fn sweep_rows_are_ordered_and_independent() {
        let base = short_base();
        let fixed = Normalization::ByFixed(2e5);
        let grid = [0.0, 7.5, 15.0];
        let a = sweep_delta_omega(&base, &grid, fixed, Some(1)).unwrap();
        let b = sweep_delta_omega(&base, &grid, fixed, Some(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.frequencies_khz(), grid);
        let single = sweep_delta_omega(&base, &[7.5], fixed, None).unwrap();
        assert_eq!(single.rows[0], a.rows[1]);

        let mut cfg = base.clone();
        cfg.params.delta_omega = khz_to_rad(7.5);
        let rec = final_record(&simulate(&cfg).unwrap());
        for (k, mode) in SPECTRUM_MODES.iter().enumerate() {
            assert_eq!(single.rows[0].values[k], rec.get(*mode) / 2e5);
        }
        assert!((single.rows[0].total_scattered - rec.total_scattered / 2e5).abs() < 1e-15);
    }

    #[test]
    fn failed_row_is_flagged() {
        let mut base = short_base();
        base.grid.dt = 8e-3;
        // 60 kHz pushes dt * (phase rate + detuning) over the bound
        let t = sweep_delta_omega(&base, &[0.0, 60.0], Normalization::ByFixed(2e5), None).unwrap();
        assert!(t.rows[0].error.is_none());
        assert!(t.rows[1].error.is_some());
    }

    #[test]
    fn endfire_series_of_unseeded_run_is_zero() {
        let mut cfg = short_base();
        cfg.seeds.clear();
        let s = endfire_series(&simulate(&cfg).unwrap());
        assert_eq!(s.components.len(), 3);
        for (_, v) in &s.components {
            assert!(v.iter().all(|&x| x == 0.0));
        }
        assert_eq!(s.t_us.len(), s.components[0].1.len());
    }
}
