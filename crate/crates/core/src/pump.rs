//! Two-frequency pump envelope.
//!
//! The pump carries two equal-intensity components at `ω_l` and `ω_l - Δω`.
//! With the wave-vector difference neglected, the effective coupling is
//! `ḡ(t) = g (1 + e^{i(Δω t + φ₀)})`, and the dimensionless coupling that
//! enters the equations of motion is `κ(τ) = ḡ(τ) √(k_l L) / (2 ω_r)`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::params::{DerivedScales, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    TwoFrequency { detuning: f64, phi0: f64 },
    Constant { g_bar: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpEnvelope {
    pub coupling_g: f64,
    pub kappa_scale: f64,
    kind: Kind,
}

impl PumpEnvelope {
    /// `detuning` is `Δω/(2ω_r)`; `phi0` is wrapped into `[0, 2π)`.
    pub fn two_frequency(coupling_g: f64, detuning: f64, phi0: f64, kappa_scale: f64) -> Self {
        Self {
            coupling_g,
            kappa_scale,
            kind: Kind::TwoFrequency {
                detuning,
                phi0: phi0.rem_euclid(TAU),
            },
        }
    }

    /// A time-independent real envelope `ḡ ≡ g_bar`.
    pub fn constant(g_bar: f64, kappa_scale: f64) -> Self {
        Self {
            coupling_g: 0.5 * g_bar,
            kappa_scale,
            kind: Kind::Constant { g_bar },
        }
    }

    pub fn from_params(params: &PhysicalParams, scales: &DerivedScales) -> Self {
        Self::two_frequency(
            params.coupling_g,
            scales.dimensionless_detuning,
            params.phi0,
            scales.kappa_scale,
        )
    }

    pub fn dimensionless_detuning(&self) -> f64 {
        match self.kind {
            Kind::TwoFrequency { detuning, .. } => detuning,
            Kind::Constant { .. } => 0.0,
        }
    }

    pub fn phi0(&self) -> f64 {
        match self.kind {
            Kind::TwoFrequency { phi0, .. } => phi0,
            Kind::Constant { .. } => 0.0,
        }
    }

    /// `ḡ` at dimensionless time `tau` (units of 1/s).
    pub fn g_bar(&self, tau: f64) -> Complex64 {
        match self.kind {
            Kind::TwoFrequency { detuning, phi0 } => {
                let beat = Complex64::cis(detuning * tau + phi0);
                Complex64::new(self.coupling_g, 0.0) * (Complex64::new(1.0, 0.0) + beat)
            }
            Kind::Constant { g_bar } => Complex64::new(g_bar, 0.0),
        }
    }

    /// Dimensionless coupling `κ(τ)`.
    pub fn kappa(&self, tau: f64) -> Complex64 {
        self.g_bar(tau) * self.kappa_scale
    }
}
