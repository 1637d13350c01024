//! Laboratory-frame parameters and the dimensionless scales derived from them.
//!
//! Time is measured in units of `1/(2 ω_r)` and position along the condensate
//! axis in units of `1/k_l`, so `tau = 2 ω_r t` and `xi = k_l z`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default recoil frequency, `ω_r = 2π × 3.75 kHz` (so that `4 ω_r = 2π × 15 kHz`).
pub const DEFAULT_RECOIL_FREQUENCY: f64 = 2.0 * PI * 3750.0;
/// Default pump wavelength of the Rb D2 line (m).
pub const DEFAULT_PUMP_WAVELENGTH: f64 = 780e-9;
/// Default condensate length, twice the 50 µm axial Thomas-Fermi radius (m).
pub const DEFAULT_BEC_LENGTH: f64 = 100e-6;
pub const DEFAULT_ATOM_NUMBER: f64 = 2e5;
pub const DEFAULT_PULSE_DURATION: f64 = 200e-6;
pub const DEFAULT_COUPLING_G: f64 = 1.25e6;

/// Laboratory-frame inputs, SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// `ω_r` (rad/s).
    pub recoil_frequency: f64,
    /// `k_l` (rad/m).
    pub pump_wavenumber: f64,
    /// `ω_l` (rad/s).
    pub pump_angular_frequency: f64,
    /// Single-component coupling `g` (1/s).
    pub coupling_g: f64,
    /// Frequency difference between the two pump components (rad/s).
    pub delta_omega: f64,
    /// Initial relative phase of the pump components (rad).
    pub phi0: f64,
    /// Pump pulse duration (s).
    pub pulse_duration: f64,
    pub atom_number: f64,
    /// Condensate length `L` (m).
    pub bec_length: f64,
    /// Rayleigh scattering rate of either pump component (1/s), informational.
    pub rayleigh_rate: Option<f64>,
    /// Mean transverse cross-section `A` (m²), informational.
    pub cross_section: Option<f64>,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        let k_l = 2.0 * PI / DEFAULT_PUMP_WAVELENGTH;
        Self {
            recoil_frequency: DEFAULT_RECOIL_FREQUENCY,
            pump_wavenumber: k_l,
            pump_angular_frequency: SPEED_OF_LIGHT * k_l,
            coupling_g: DEFAULT_COUPLING_G,
            delta_omega: 0.0,
            phi0: 0.0,
            pulse_duration: DEFAULT_PULSE_DURATION,
            atom_number: DEFAULT_ATOM_NUMBER,
            bec_length: DEFAULT_BEC_LENGTH,
            rayleigh_rate: None,
            cross_section: None,
        }
    }
}

fn require_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive and finite, got {value}")))
    }
}

fn require_non_negative(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be non-negative and finite, got {value}")))
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("recoil_frequency", self.recoil_frequency)?;
        require_positive("pump_wavenumber", self.pump_wavenumber)?;
        require_positive("pump_angular_frequency", self.pump_angular_frequency)?;
        require_non_negative("coupling_g", self.coupling_g)?;
        require_non_negative("delta_omega", self.delta_omega)?;
        if !self.phi0.is_finite() {
            return Err(Error::validation("phi0", "must be finite"));
        }
        require_positive("pulse_duration", self.pulse_duration)?;
        require_positive("atom_number", self.atom_number)?;
        require_positive("bec_length", self.bec_length)?;
        if let Some(r) = self.rayleigh_rate {
            require_positive("rayleigh_rate", r)?;
        }
        if let Some(a) = self.cross_section {
            require_positive("cross_section", a)?;
        }
        Ok(())
    }

    pub fn derive_scales(&self) -> Result<DerivedScales> {
        derive_scales(self)
    }
}

/// Dimensionless constants of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedScales {
    /// `k_l L`, the length of the simulation box.
    pub xi_extent: f64,
    /// `2 ω_r T` for pulse duration `T`.
    pub tau_total: f64,
    /// `χ = c k_l / (2 ω_r)`.
    pub chi: f64,
    /// `√(k_l L) / (2 ω_r)`; multiplies `ḡ(τ)` to give `κ(τ)`.
    pub kappa_scale: f64,
    /// `Δω / (2 ω_r)`.
    pub dimensionless_detuning: f64,
    pub speed_of_light: f64,
}

impl DerivedScales {
    /// Ratio `χ / max|κ|`; the slaved-field approximation needs this to be large.
    pub fn slaving_ratio(&self, coupling_g: f64) -> f64 {
        let kappa_max = 2.0 * coupling_g * self.kappa_scale;
        if kappa_max == 0.0 {
            f64::INFINITY
        } else {
            self.chi / kappa_max
        }
    }

    /// Convert a dimensionless time to microseconds.
    pub fn tau_to_us(&self, tau: f64, recoil_frequency: f64) -> f64 {
        tau / (2.0 * recoil_frequency) * 1e6
    }
}

/// Below this `χ/|κ|` ratio the adiabatic elimination of the light is questionable.
pub const SLAVING_WARNING_RATIO: f64 = 1e3;

pub fn derive_scales(params: &PhysicalParams) -> Result<DerivedScales> {
    params.validate()?;
    let two_wr = 2.0 * params.recoil_frequency;
    let xi_extent = params.pump_wavenumber * params.bec_length;
    Ok(DerivedScales {
        xi_extent,
        tau_total: two_wr * params.pulse_duration,
        chi: SPEED_OF_LIGHT * params.pump_wavenumber / two_wr,
        kappa_scale: xi_extent.sqrt() / two_wr,
        dimensionless_detuning: params.delta_omega / two_wr,
        speed_of_light: SPEED_OF_LIGHT,
    })
}

/// `g = √(3π c³ R / (2 ω_l² A L))`.
pub fn coupling_from_rayleigh(
    rayleigh_rate: f64,
    cross_section: f64,
    bec_length: f64,
    pump_angular_frequency: f64,
) -> Result<f64> {
    require_positive("rayleigh_rate", rayleigh_rate)?;
    require_positive("cross_section", cross_section)?;
    require_positive("bec_length", bec_length)?;
    require_positive("pump_angular_frequency", pump_angular_frequency)?;
    let c3 = SPEED_OF_LIGHT * SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    let radicand = 3.0 * PI * c3 * rayleigh_rate
        / (2.0 * pump_angular_frequency * pump_angular_frequency * cross_section * bec_length);
    Ok(radicand.sqrt())
}

/// Two-photon resonance for a jump of `order_jump` detuning barriers: `4 ω_r` per order.
///
/// `order_jump = 1` is the backward-scattering resonance and the barrier between
/// adjacent diagonal orders; `order_jump = 2` bridges the first- and third-order
/// end-fire modes.
pub fn resonance_frequency(order_jump: i64, recoil_frequency: f64) -> Result<f64> {
    if order_jump < 1 {
        return Err(Error::validation(
            "order_jump",
            format!("must be a positive integer, got {order_jump}"),
        ));
    }
    require_positive("recoil_frequency", recoil_frequency)?;
    Ok(4.0 * order_jump as f64 * recoil_frequency)
}
