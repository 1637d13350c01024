//! TOML run configuration.
//!
//! Every key is optional; missing keys take the documented defaults.
//!
//! ```toml
//! delta_omega_khz = 15.0        # pump frequency difference Δω/2π
//! g_per_s = 1.25e6              # single-component coupling g
//! phi0_rad = 0.0
//! pulse_duration_us = 200.0
//! atom_number = 2e5
//! bec_length_um = 100.0
//! recoil_frequency_khz = 3.75   # ω_r/2π
//! pump_wavelength_nm = 780.0
//! # rayleigh_rate_per_s / cross_section_um2: derive g instead of g_per_s
//!
//! n_min = -2
//! n_max = 4
//! m_max = 4
//! enforce_parity = true
//!
//! num_points = 1024
//! dt = 1e-3
//! sample_every = 100
//! capture_profiles = false
//! probe = "exit"                # or "max"
//!
//! [[seeds]]
//! n = 1
//! m = 1
//! atoms = 1.0
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{CaptureSpec, Seed, SimulationConfig};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::lattice::LatticeSpec;
use crate::optics::ProbePosition;
use crate::params::{coupling_from_rayleigh, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub delta_omega_khz: Option<f64>,
    pub g_per_s: Option<f64>,
    pub phi0_rad: Option<f64>,
    pub pulse_duration_us: Option<f64>,
    pub atom_number: Option<f64>,
    pub bec_length_um: Option<f64>,
    pub recoil_frequency_khz: Option<f64>,
    pub pump_wavelength_nm: Option<f64>,
    pub rayleigh_rate_per_s: Option<f64>,
    pub cross_section_um2: Option<f64>,
    pub n_min: Option<i32>,
    pub n_max: Option<i32>,
    pub m_max: Option<i32>,
    pub enforce_parity: Option<bool>,
    pub num_points: Option<usize>,
    pub dt: Option<f64>,
    pub sample_every: Option<usize>,
    pub capture_profiles: Option<bool>,
    pub probe: Option<ProbePosition>,
    pub seeds: Option<Vec<Seed>>,
}

// internal field name -> config key
const KEYS: [(&str, &str); 12] = [
    ("recoil_frequency", "recoil_frequency_khz"),
    ("pump_wavenumber", "pump_wavelength_nm"),
    ("pump_angular_frequency", "pump_wavelength_nm"),
    ("coupling_g", "g_per_s"),
    ("delta_omega", "delta_omega_khz"),
    ("phi0", "phi0_rad"),
    ("pulse_duration", "pulse_duration_us"),
    ("bec_length", "bec_length_um"),
    ("rayleigh_rate", "rayleigh_rate_per_s"),
    ("cross_section", "cross_section_um2"),
    ("xi_extent", "bec_length_um"),
    ("tau_total", "pulse_duration_us"),
];

fn config_key(field: &str) -> String {
    KEYS.iter()
        .find(|(f, _)| *f == field)
        .map_or_else(|| field.to_string(), |(_, k)| k.to_string())
}

fn rename(err: Error) -> Error {
    match err {
        Error::Validation { field, reason } => Error::Validation {
            field: config_key(&field),
            reason,
        },
        other => other,
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    /// Fill defaults and validate.
    pub fn resolve(&self) -> Result<SimulationConfig> {
        let mut cfg = SimulationConfig::default();
        let p = &mut cfg.params;
        if let Some(f) = self.recoil_frequency_khz {
            p.recoil_frequency = 2.0 * PI * f * 1e3;
        }
        if let Some(nm) = self.pump_wavelength_nm {
            if !(nm.is_finite() && nm > 0.0) {
                return Err(Error::validation("pump_wavelength_nm", format!("must be positive, got {nm}")));
            }
            p.pump_wavenumber = 2.0 * PI / (nm / 1e9);
            p.pump_angular_frequency = SPEED_OF_LIGHT * p.pump_wavenumber;
        }
        if let Some(f) = self.delta_omega_khz {
            p.delta_omega = 2.0 * PI * f * 1e3;
        }
        if let Some(v) = self.phi0_rad {
            p.phi0 = v;
        }
        if let Some(us) = self.pulse_duration_us {
            p.pulse_duration = us / 1e6;
        }
        if let Some(n) = self.atom_number {
            p.atom_number = n;
        }
        if let Some(um) = self.bec_length_um {
            p.bec_length = um / 1e6;
        }
        p.rayleigh_rate = self.rayleigh_rate_per_s;
        p.cross_section = self.cross_section_um2.map(|a| a / 1e12);
        match (self.g_per_s, p.rayleigh_rate, p.cross_section) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(Error::validation(
                    "g_per_s",
                    "give either g_per_s or rayleigh_rate_per_s with cross_section_um2, not both",
                ));
            }
            (Some(g), None, None) => p.coupling_g = g,
            (None, Some(r), Some(a)) => {
                p.coupling_g = coupling_from_rayleigh(r, a, p.bec_length, p.pump_angular_frequency).map_err(rename)?;
            }
            (None, Some(_), None) => {
                return Err(Error::validation("cross_section_um2", "required with rayleigh_rate_per_s"));
            }
            (None, None, Some(_)) => {
                return Err(Error::validation("rayleigh_rate_per_s", "required with cross_section_um2"));
            }
            (None, None, None) => {}
        }
        p.validate().map_err(rename)?;

        let d = LatticeSpec::default();
        cfg.lattice = LatticeSpec {
            n_min: self.n_min.unwrap_or(d.n_min),
            n_max: self.n_max.unwrap_or(d.n_max),
            m_max: self.m_max.unwrap_or(d.m_max),
            enforce_parity: self.enforce_parity.unwrap_or(d.enforce_parity),
        };
        let d = GridSpec::default();
        cfg.grid = GridSpec {
            num_points: self.num_points.unwrap_or(d.num_points),
            dt: self.dt.unwrap_or(d.dt),
            sample_every: self.sample_every.unwrap_or(d.sample_every),
        };
        let d = CaptureSpec::default();
        cfg.capture = CaptureSpec {
            profiles: self.capture_profiles.unwrap_or(d.profiles),
            probe: self.probe.unwrap_or(d.probe),
        };
        if let Some(seeds) = &self.seeds {
            cfg.seeds = seeds.clone();
        }
        cfg.resolve().map_err(rename)?;
        Ok(cfg)
    }

    /// Fully populated document describing `cfg`.
    pub fn from_config(cfg: &SimulationConfig) -> Self {
        let p = &cfg.params;
        let (g, r, a) = match (p.rayleigh_rate, p.cross_section) {
            (Some(r), Some(a)) => (None, Some(r), Some(invert(a, |x| x / 1e12, a * 1e12))),
            _ => (Some(p.coupling_g), None, None),
        };
        Self {
            delta_omega_khz: Some(invert(p.delta_omega, |f| 2.0 * PI * f * 1e3, p.delta_omega / (2.0 * PI * 1e3))),
            g_per_s: g,
            phi0_rad: Some(p.phi0),
            pulse_duration_us: Some(invert(p.pulse_duration, |us| us / 1e6, p.pulse_duration * 1e6)),
            atom_number: Some(p.atom_number),
            bec_length_um: Some(invert(p.bec_length, |um| um / 1e6, p.bec_length * 1e6)),
            recoil_frequency_khz: Some(invert(
                p.recoil_frequency,
                |f| 2.0 * PI * f * 1e3,
                p.recoil_frequency / (2.0 * PI * 1e3),
            )),
            pump_wavelength_nm: Some(invert(
                p.pump_wavenumber,
                |nm| 2.0 * PI / (nm / 1e9),
                2.0 * PI / p.pump_wavenumber * 1e9,
            )),
            rayleigh_rate_per_s: r,
            cross_section_um2: a,
            n_min: Some(cfg.lattice.n_min),
            n_max: Some(cfg.lattice.n_max),
            m_max: Some(cfg.lattice.m_max),
            enforce_parity: Some(cfg.lattice.enforce_parity),
            num_points: Some(cfg.grid.num_points),
            dt: Some(cfg.grid.dt),
            sample_every: Some(cfg.grid.sample_every),
            capture_profiles: Some(cfg.capture.profiles),
            probe: Some(cfg.capture.probe),
            seeds: Some(cfg.seeds.clone()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config document always serializes")
    }
}

/// Shortest decimal near `guess` that `forward` maps back to exactly `value`.
fn invert(value: f64, forward: impl Fn(f64) -> f64, guess: f64) -> f64 {
    (0..17)
        .filter_map(|digits| format!("{guess:.digits$e}").parse::<f64>().ok())
        .find(|&x| forward(x) == value)
        .unwrap_or(guess)
}

pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    ConfigFile::parse(text)?.resolve()
}

pub fn load_config(path: &std::path::Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
