//! Slaved end-fire fields.
//!
//! The light is adiabatically eliminated, so the forward (`e₊`, travelling to
//! +ξ) and backward (`e₋`) envelopes are instantaneous functionals of the
//! atomic state:
//!
//! ```text
//! e±(ξ) = ∓ i (κ/χ) ∫_{∓∞}^{ξ} dξ' Σ_{n,m} e^{i(n∓m)τ} ψ_{n,m} ψ*_{n+1,m∓1}
//! ```
//!
//! The infinite limits map to the grid edges and the integrals use a
//! cumulative trapezoid rule.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Channel, ModeIndex, ModeLattice};
use crate::pump::PumpEnvelope;
use crate::state::AtomicState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalFields {
    pub e_plus: Vec<Complex64>,
    pub e_minus: Vec<Complex64>,
    pub tau: f64,
}

impl OpticalFields {
    pub fn zeros(num_points: usize) -> Self {
        Self {
            e_plus: vec![ZERO; num_points],
            e_minus: vec![ZERO; num_points],
            tau: 0.0,
        }
    }
}

/// Per-pair contributions `e₊^{(n,m)}` from the `(n,m) ↔ (n+1,m-1)` transition.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecomposition {
    pub components: BTreeMap<ModeIndex, Vec<Complex64>>,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbePosition {
    /// `e₊` at the right edge, `e₋` at the left edge.
    #[default]
    Exit,
    /// Largest modulus anywhere on the grid.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub value: Complex64,
    pub modulus: f64,
    pub index: usize,
}

/// Source pair `ψ_i ψ*_partner e^{i k τ}` contributing to one envelope.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SourcePair {
    pub mode: usize,
    pub partner: usize,
    pub phase_rate: i32,
}

/// Precomputed pair tables and scratch space for repeated field evaluation.
#[derive(Debug, Clone)]
pub(crate) struct FieldKernel {
    plus: Vec<SourcePair>,
    minus: Vec<SourcePair>,
    max_rate: i32,
    phases: Vec<Complex64>,
    source: Vec<Complex64>,
}

impl FieldKernel {
    pub fn new(lattice: &ModeLattice, num_points: usize) -> Self {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (i, &mode) in lattice.modes().iter().enumerate() {
            if let Some(p) = lattice.index_of(Channel::PlusForward.partner(mode)) {
                plus.push(SourcePair { mode: i, partner: p, phase_rate: mode.n - mode.m });
            }
            if let Some(p) = lattice.index_of(Channel::MinusForward.partner(mode)) {
                minus.push(SourcePair { mode: i, partner: p, phase_rate: mode.n + mode.m });
            }
        }
        let max_rate = plus
            .iter()
            .chain(minus.iter())
            .map(|s| s.phase_rate.abs())
            .max()
            .unwrap_or(0);
        Self {
            plus,
            minus,
            max_rate,
            phases: vec![ZERO; 2 * max_rate as usize + 1],
            source: vec![ZERO; num_points],
        }
    }

    fn refresh_phases(&mut self, tau: f64) {
        for (slot, k) in self.phases.iter_mut().zip(-self.max_rate..=self.max_rate) {
            *slot = Complex64::cis(f64::from(k) * tau);
        }
    }

    fn accumulate(&mut self, data: &[Complex64], num_points: usize, pairs: Which) {
        self.source.fill(ZERO);
        let list = match pairs {
            Which::Plus => &self.plus,
            Which::Minus => &self.minus,
        };
        for pair in list {
            let phase = self.phases[(pair.phase_rate + self.max_rate) as usize];
            let a = &data[pair.mode * num_points..(pair.mode + 1) * num_points];
            let b = &data[pair.partner * num_points..(pair.partner + 1) * num_points];
            for ((s, x), y) in self.source.iter_mut().zip(a).zip(b) {
                *s += phase * x * y.conj();
            }
        }
    }

    /// Fill `e_plus` and `e_minus` from the mode-major amplitude buffer `data`.
    pub fn evaluate(
        &mut self,
        data: &[Complex64],
        num_points: usize,
        tau: f64,
        kappa: Complex64,
        chi: f64,
        dxi: f64,
        e_plus: &mut [Complex64],
        e_minus: &mut [Complex64],
    ) {
        self.refresh_phases(tau);
        let prefactor = Complex64::new(0.0, -1.0) * kappa / chi;

        self.accumulate(data, num_points, Which::Plus);
        cumulative_from_left(&self.source, dxi, e_plus);
        for e in e_plus.iter_mut() {
            *e *= prefactor;
        }

        self.accumulate(data, num_points, Which::Minus);
        cumulative_from_right(&self.source, dxi, e_minus);
        for e in e_minus.iter_mut() {
            *e *= prefactor;
        }
    }

    pub fn plus_pairs(&self) -> &[SourcePair] {
        &self.plus
    }

    pub fn single_pair_plus(
        &mut self,
        data: &[Complex64],
        num_points: usize,
        pair: SourcePair,
        tau: f64,
        prefactor: Complex64,
        dxi: f64,
        out: &mut [Complex64],
    ) {
        let phase = Complex64::cis(f64::from(pair.phase_rate) * tau);
        let a = &data[pair.mode * num_points..(pair.mode + 1) * num_points];
        let b = &data[pair.partner * num_points..(pair.partner + 1) * num_points];
        for ((s, x), y) in self.source.iter_mut().zip(a).zip(b) {
            *s = phase * x * y.conj();
        }
        cumulative_from_left(&self.source, dxi, out);
        for e in out.iter_mut() {
            *e *= prefactor;
        }
    }
}

/// `out[j] = ∫_{ξ_0}^{ξ_j} f` by the trapezoid rule.
pub fn cumulative_from_left(f: &[Complex64], dxi: f64, out: &mut [Complex64]) {
    let half = 0.5 * dxi;
    let mut acc = ZERO;
    out[0] = ZERO;
    for j in 1..f.len() {
        acc += (f[j - 1] + f[j]) * half;
        out[j] = acc;
    }
}

/// `out[j] = ∫_{ξ_j}^{ξ_{N-1}} f` by the trapezoid rule.
pub fn cumulative_from_right(f: &[Complex64], dxi: f64, out: &mut [Complex64]) {
    let half = 0.5 * dxi;
    let last = f.len() - 1;
    let mut acc = ZERO;
    out[last] = ZERO;
    for j in (0..last).rev() {
        acc += (f[j + 1] + f[j]) * half;
        out[j] = acc;
    }
}

pub fn compute_fields(state: &AtomicState, env: &PumpEnvelope, chi: f64) -> Result<OpticalFields> {
    let mut fields = OpticalFields::zeros(state.num_points());
    compute_fields_into(state, env, chi, &mut fields)?;
    Ok(fields)
}

/// As [`compute_fields`], reusing the buffers of `out`.
pub fn compute_fields_into(
    state: &AtomicState,
    env: &PumpEnvelope,
    chi: f64,
    out: &mut OpticalFields,
) -> Result<()> {
    state.check_layout()?;
    let n = state.num_points();
    if out.e_plus.len() != n || out.e_minus.len() != n {
        return Err(Error::validation(
            "fields",
            format!(
                "buffers hold {}/{} points, state grid has {n}",
                out.e_plus.len(),
                out.e_minus.len()
            ),
        ));
    }
    if !(chi.is_finite() && chi > 0.0) {
        return Err(Error::validation("chi", "must be positive"));
    }
    let mut kernel = FieldKernel::new(state.lattice(), n);
    kernel.evaluate(
        state.data(),
        n,
        state.tau,
        env.kappa(state.tau),
        chi,
        state.grid().dxi,
        &mut out.e_plus,
        &mut out.e_minus,
    );
    out.tau = state.tau;
    Ok(())
}

/// Split `e₊` into its per-transition components.
///
/// Only pairs whose partner lies inside the lattice produce a component.
pub fn decompose_e_plus(state: &AtomicState, env: &PumpEnvelope, chi: f64) -> Result<FieldDecomposition> {
    state.check_layout()?;
    if !(chi.is_finite() && chi > 0.0) {
        return Err(Error::validation("chi", "must be positive"));
    }
    let n = state.num_points();
    let mut kernel = FieldKernel::new(state.lattice(), n);
    let prefactor = Complex64::new(0.0, -1.0) * env.kappa(state.tau) / chi;
    let pairs = kernel.plus_pairs().to_vec();
    let mut components = BTreeMap::new();
    for pair in pairs {
        let mut out = vec![ZERO; n];
        kernel.single_pair_plus(state.data(), n, pair, state.tau, prefactor, state.grid().dxi, &mut out);
        components.insert(state.lattice().modes()[pair.mode], out);
    }
    Ok(FieldDecomposition {
        components,
        tau: state.tau,
    })
}

/// Probe one sampled envelope. `exit_index` is the grid edge the light leaves through.
pub fn probe_values(values: &[Complex64], exit_index: usize, position: ProbePosition) -> Probe {
    match position {
        ProbePosition::Exit => {
            let value = values[exit_index];
            Probe {
                value,
                modulus: value.norm(),
                index: exit_index,
            }
        }
        ProbePosition::Max => {
            let (index, value) = values
                .iter()
                .copied()
                .enumerate()
                .fold((0, ZERO), |best, (j, z)| if z.norm() > best.1.norm() { (j, z) } else { best });
            Probe {
                value,
                modulus: value.norm(),
                index,
            }
        }
    }
}

pub fn probe_field(fields: &OpticalFields, which: Which, position: ProbePosition) -> Probe {
    match which {
        Which::Plus => probe_values(&fields.e_plus, fields.e_plus.len() - 1, position),
        Which::Minus => probe_values(&fields.e_minus, 0, position),
    }
}
