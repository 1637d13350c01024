//! Semiclassical simulator of superradiant sequential scattering from an
//! elongated condensate driven by a two-frequency pump.
//!
//! The atomic side modes `ψ_{n,m}(ξ, τ)` evolve under a one-dimensional model
//! in which the end-fire light is slaved to the instantaneous atomic
//! coherences. See [`dynamics`] for the equations of motion and
//! [`experiments`] for the built-in parameter sets.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod lattice;
pub mod observables;
pub mod optics;
pub mod oracle;
pub mod output;
pub mod params;
pub mod pump;
pub mod state;

pub use dynamics::{simulate, Capture, Seed, SimulationConfig, Trajectory};
pub use error::{Error, Result};
pub use lattice::{ModeIndex, ModeLattice};
pub use params::{DerivedScales, PhysicalParams};
pub use pump::PumpEnvelope;
pub use state::AtomicState;
