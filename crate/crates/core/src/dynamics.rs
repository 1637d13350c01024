//! Time integration of the coupled side-mode equations
//!
//! ```text
//! i ∂ψ_{n,m}/∂τ = -½ ∂²ψ_{n,m}/∂ξ² - i m ∂ψ_{n,m}/∂ξ
//!               + κ* e₊ ψ_{n+1,m-1} e^{-i(n-m)τ}   + κ* e₋ ψ_{n+1,m+1} e^{-i(n+m)τ}
//!               + κ  e₊* ψ_{n-1,m+1} e^{i(n-m-2)τ} + κ  e₋* ψ_{n-1,m-1} e^{i(n+m-2)τ}
//! ```
//!
//! by Strang splitting: the free part is applied exactly in Fourier space,
//! the coupling part by a classical RK4 step with the slaved fields
//! recomputed at every stage.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::lattice::{Channel, LatticeSpec, ModeIndex, ModeLattice};
use crate::optics::{probe_values, FieldKernel, ProbePosition, SourcePair};
use crate::params::{DerivedScales, PhysicalParams, SLAVING_WARNING_RATIO};
use crate::pump::PumpEnvelope;
use crate::state::AtomicState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative drift of the total atom number that aborts a run.
pub const INSTABILITY_DRIFT: f64 = 1e-3;
/// Boundary-mode population (fraction of total) that triggers a truncation warning.
pub const TRUNCATION_WARNING_FRACTION: f64 = 1e-3;

/// Diagonal `e₊` components recorded at each capture.
pub const DIAGONAL_COMPONENTS: [ModeIndex; 3] = [
    ModeIndex::new(0, 0),
    ModeIndex::new(1, 1),
    ModeIndex::new(2, 2),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seed {
    pub n: i32,
    pub m: i32,
    pub atoms: f64,
}

impl Seed {
    pub fn mode(&self) -> ModeIndex {
        ModeIndex::new(self.n, self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureSpec {
    /// Store `|ψ_{n,m}(ξ)|²` for every mode at every capture.
    pub profiles: bool,
    pub probe: ProbePosition,
}

impl Default for CaptureSpec {
    fn default() -> Self {
        Self {
            profiles: false,
            probe: ProbePosition::Exit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub params: PhysicalParams,
    pub lattice: LatticeSpec,
    pub grid: GridSpec,
    pub seeds: Vec<Seed>,
    pub capture: CaptureSpec,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            params: PhysicalParams::default(),
            lattice: LatticeSpec::default(),
            grid: GridSpec::default(),
            seeds: vec![Seed { n: 1, m: 1, atoms: 1.0 }, Seed { n: 1, m: -1, atoms: 1.0 }],
            capture: CaptureSpec::default(),
        }
    }
}

/// Everything a run needs, validated and precomputed from a [`SimulationConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scales: DerivedScales,
    pub lattice: Arc<ModeLattice>,
    pub grid: Grid,
    pub envelope: PumpEnvelope,
}

impl SimulationConfig {
    pub fn resolve(&self) -> Result<Resolved> {
        let scales = self.params.derive_scales()?;
        let lattice = Arc::new(ModeLattice::new(self.lattice)?);
        let max_rate = f64::from(lattice.max_phase_rate()) + scales.dimensionless_detuning;
        let grid = Grid::new(self.grid, scales.xi_extent, max_rate)?;
        for seed in &self.seeds {
            let mode = seed.mode();
            if !(seed.atoms.is_finite() && seed.atoms >= 0.0) {
                return Err(Error::validation("seeds", format!("seed atoms for {mode} must be >= 0")));
            }
            if mode == ModeIndex::new(0, 0) {
                return Err(Error::validation("seeds", "mode (0,0) holds the condensate and cannot be seeded"));
            }
            if !lattice.contains(mode) {
                return Err(Error::validation("seeds", format!("seed mode {mode} is outside the lattice")));
            }
        }
        Ok(Resolved {
            envelope: PumpEnvelope::from_params(&self.params, &scales),
            scales,
            lattice,
            grid,
        })
    }
}

/// Thomas-Fermi amplitude `√(max(0, 1 - (2(ξ-ξ_c)/Ξ)²))` normalized to `atoms`.
fn thomas_fermi(grid: &Grid, atoms: f64) -> Vec<Complex64> {
    let center = grid.xi_center();
    let half = 0.5 * grid.xi_extent;
    let shape: Vec<f64> = (0..grid.num_points)
        .map(|j| {
            let u = (grid.xi(j) - center) / half;
            (1.0 - u * u).max(0.0).sqrt()
        })
        .collect();
    let norm = grid.integrate_periodic(shape.iter().map(|a| a * a));
    let scale = (atoms / norm).sqrt();
    shape.into_iter().map(|a| Complex64::new(a * scale, 0.0)).collect()
}

pub fn initial_state(config: &SimulationConfig) -> Result<AtomicState> {
    let resolved = config.resolve()?;
    Ok(initial_state_resolved(config, &resolved))
}

fn initial_state_resolved(config: &SimulationConfig, resolved: &Resolved) -> AtomicState {
    let mut state = AtomicState::zeros(resolved.lattice.clone(), resolved.grid);
    let condensate = thomas_fermi(&resolved.grid, config.params.atom_number);
    state
        .amplitude_mut(ModeIndex::new(0, 0))
        .expect("lattice always holds (0,0)")
        .copy_from_slice(&condensate);
    for seed in &config.seeds {
        let amp = thomas_fermi(&resolved.grid, seed.atoms);
        let slot = state.amplitude_mut(seed.mode()).expect("seed validated");
        for (z, a) in slot.iter_mut().zip(amp) {
            *z += a;
        }
    }
    state
}

struct ModeCoupling {
    partner: usize,
    channel: Channel,
    phase_rate: i32,
}

/// Split-step integrator for one lattice and grid.
pub struct SplitStepper {
    lattice: Arc<ModeLattice>,
    grid: Grid,
    chi: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    fft_scratch: Vec<Complex64>,
    couplings: Vec<Vec<ModeCoupling>>,
    max_rate: i32,
    kernel: FieldKernel,
    // free-evolution multipliers, one row per distinct m, for `linear_dt`
    linear_dt: f64,
    linear_factors: Vec<Vec<Complex64>>,
    e_plus: Vec<Complex64>,
    e_minus: Vec<Complex64>,
    drive_plus: Vec<Complex64>,
    drive_minus: Vec<Complex64>,
    phases: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
    stage: Vec<Complex64>,
}

impl SplitStepper {
    pub fn new(lattice: Arc<ModeLattice>, grid: Grid, chi: f64) -> Self {
        let n = grid.num_points;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        let couplings: Vec<Vec<ModeCoupling>> = lattice
            .modes()
            .iter()
            .map(|&mode| {
                lattice
                    .coupling_neighbors(mode)
                    .expect("mode from lattice")
                    .into_iter()
                    .map(|nb| ModeCoupling {
                        partner: nb.index,
                        channel: nb.channel,
                        phase_rate: nb.phase_rate,
                    })
                    .collect()
            })
            .collect();
        let max_rate = couplings
            .iter()
            .flatten()
            .map(|c| c.phase_rate.abs())
            .max()
            .unwrap_or(0);
        let total = lattice.len() * n;
        Self {
            kernel: FieldKernel::new(&lattice, n),
            lattice,
            grid,
            chi,
            fft,
            ifft,
            fft_scratch: vec![ZERO; scratch_len],
            couplings,
            max_rate,
            linear_dt: f64::NAN,
            linear_factors: Vec::new(),
            e_plus: vec![ZERO; n],
            e_minus: vec![ZERO; n],
            drive_plus: vec![ZERO; n],
            drive_minus: vec![ZERO; n],
            phases: vec![ZERO; 2 * max_rate as usize + 1],
            k: [vec![ZERO; total], vec![ZERO; total], vec![ZERO; total], vec![ZERO; total]],
            stage: vec![ZERO; total],
        }
    }

    pub fn for_config(config: &SimulationConfig) -> Result<Self> {
        let r = config.resolve()?;
        Ok(Self::new(r.lattice, r.grid, r.scales.chi))
    }

    fn prepare_linear(&mut self, dt: f64) {
        if self.linear_dt.to_bits() == dt.to_bits() {
            return;
        }
        let n = self.grid.num_points;
        let m_max = self.lattice.spec().m_max;
        let inv_n = 1.0 / n as f64;
        self.linear_factors = (-m_max..=m_max)
            .map(|m| {
                (0..n)
                    .map(|k| {
                        let q = self.grid.wavenumber(k);
                        // odd derivative: the Nyquist bin has no well-defined sign
                        let q_drift = if k == n / 2 { 0.0 } else { q };
                        let phase = -(0.5 * q * q + f64::from(m) * q_drift) * dt;
                        Complex64::cis(phase) * inv_n
                    })
                    .collect()
            })
            .collect();
        self.linear_dt = dt;
    }

    /// Free evolution `-½∂² - i m ∂` over `dt`, exact for the discrete Fourier modes.
    pub fn linear_step(&mut self, state: &mut AtomicState, dt: f64) {
        self.prepare_linear(dt);
        let n = self.grid.num_points;
        let m_max = self.lattice.spec().m_max;
        for (i, mode) in self.lattice.modes().iter().enumerate() {
            let slot = &mut state.data_mut()[i * n..(i + 1) * n];
            if slot.iter().all(|z| *z == ZERO) {
                continue;
            }
            self.fft.process_with_scratch(slot, &mut self.fft_scratch);
            for (z, f) in slot.iter_mut().zip(&self.linear_factors[(mode.m + m_max) as usize]) {
                *z *= f;
            }
            self.ifft.process_with_scratch(slot, &mut self.fft_scratch);
        }
    }

    /// Time derivative of the coupling part at time `tau`, written into `out`.
    fn coupling_rhs(&mut self, input: &[Complex64], tau: f64, env: &PumpEnvelope, which: usize) {
        let n = self.grid.num_points;
        let kappa = env.kappa(tau);
        self.kernel.evaluate(
            input,
            n,
            tau,
            kappa,
            self.chi,
            self.grid.dxi,
            &mut self.e_plus,
            &mut self.e_minus,
        );
        let kc = kappa.conj();
        for ((dp, dm), (ep, em)) in self
            .drive_plus
            .iter_mut()
            .zip(self.drive_minus.iter_mut())
            .zip(self.e_plus.iter().zip(&self.e_minus))
        {
            *dp = kc * ep;
            *dm = kc * em;
        }
        for (slot, k) in self.phases.iter_mut().zip(-self.max_rate..=self.max_rate) {
            *slot = Complex64::cis(f64::from(k) * tau);
        }
        let out = &mut self.k[which];
        let minus_i = Complex64::new(0.0, -1.0);
        for (i, list) in self.couplings.iter().enumerate() {
            let dst = &mut out[i * n..(i + 1) * n];
            dst.fill(ZERO);
            for c in list {
                let src = &input[c.partner * n..(c.partner + 1) * n];
                let phase = minus_i * self.phases[(c.phase_rate + self.max_rate) as usize];
                match c.channel {
                    Channel::PlusForward => {
                        for ((d, a), x) in dst.iter_mut().zip(&self.drive_plus).zip(src) {
                            *d += phase * a * x;
                        }
                    }
                    Channel::MinusForward => {
                        for ((d, a), x) in dst.iter_mut().zip(&self.drive_minus).zip(src) {
                            *d += phase * a * x;
                        }
                    }
                    Channel::PlusBackward => {
                        for ((d, a), x) in dst.iter_mut().zip(&self.drive_plus).zip(src) {
                            *d += phase * a.conj() * x;
                        }
                    }
                    Channel::MinusBackward => {
                        for ((d, a), x) in dst.iter_mut().zip(&self.drive_minus).zip(src) {
                            *d += phase * a.conj() * x;
                        }
                    }
                }
            }
        }
    }

    /// One RK4 step of the coupling part from `state.tau` to `state.tau + dt`.
    pub fn coupling_step(&mut self, state: &mut AtomicState, env: &PumpEnvelope, dt: f64) -> Result<()> {
        let tau = state.tau;
        let half = 0.5 * dt;

        self.coupling_rhs(state.data(), tau, env, 0);
        fill_stage(&mut self.stage, state.data(), &self.k[0], half);
        let stage = std::mem::take(&mut self.stage);
        self.coupling_rhs(&stage, tau + half, env, 1);
        self.stage = stage;
        fill_stage(&mut self.stage, state.data(), &self.k[1], half);
        let stage = std::mem::take(&mut self.stage);
        self.coupling_rhs(&stage, tau + half, env, 2);
        self.stage = stage;
        fill_stage(&mut self.stage, state.data(), &self.k[2], dt);
        let stage = std::mem::take(&mut self.stage);
        self.coupling_rhs(&stage, tau + dt, env, 3);
        self.stage = stage;

        let w = dt / 6.0;
        let [k1, k2, k3, k4] = &self.k;
        for ((((y, a), b), c), d) in state.data_mut().iter_mut().zip(k1).zip(k2).zip(k3).zip(k4) {
            *y += (a + (b + c) * 2.0 + d) * w;
        }
        state.tau = tau + dt;
        if !state.is_finite() {
            return Err(Error::Instability {
                tau: state.tau,
                detail: "non-finite amplitude after coupling step".into(),
            });
        }
        Ok(())
    }

    /// Strang step: half free step, full coupling step, half free step.
    pub fn advance(&mut self, state: &mut AtomicState, env: &PumpEnvelope, dt: f64) -> Result<()> {
        self.linear_step(state, 0.5 * dt);
        self.coupling_step(state, env, dt)?;
        self.linear_step(state, 0.5 * dt);
        Ok(())
    }
}

fn fill_stage(stage: &mut [Complex64], base: &[Complex64], slope: &[Complex64], h: f64) {
    for ((s, y), k) in stage.iter_mut().zip(base).zip(slope) {
        *s = y + k * h;
    }
}

/// Observables recorded at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    pub tau: f64,
    pub t_us: f64,
    /// Atom number per mode, lattice order.
    pub populations: Vec<f64>,
    pub total: f64,
    /// Probed moduli of `e₊` and `e₋`.
    pub e_plus: f64,
    pub e_minus: f64,
    /// Probed moduli of the diagonal `e₊` components present in the lattice.
    pub diagonal_components: Vec<(ModeIndex, f64)>,
    /// `|ψ_{n,m}(ξ)|²` per mode when requested.
    pub profiles: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub lattice: Arc<ModeLattice>,
    pub grid: Grid,
    pub scales: DerivedScales,
    pub recoil_frequency: f64,
    pub atom_number: f64,
    pub captures: Vec<Capture>,
    pub initial_state: AtomicState,
    pub final_state: AtomicState,
    pub steps: usize,
    pub dt: f64,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn modes(&self) -> &[ModeIndex] {
        self.lattice.modes()
    }

    pub fn last(&self) -> &Capture {
        self.captures.last().expect("trajectory always has captures")
    }

    /// Largest relative deviation of the total atom number from its initial value.
    pub fn max_number_drift(&self) -> f64 {
        let n0 = self.captures[0].total;
        self.captures
            .iter()
            .map(|c| ((c.total - n0) / n0).abs())
            .fold(0.0, f64::max)
    }

    pub fn population_series(&self, mode: ModeIndex) -> Option<Vec<f64>> {
        let i = self.lattice.index_of(mode)?;
        Some(self.captures.iter().map(|c| c.populations[i]).collect())
    }
}

/// Number of steps and the step actually used to land exactly on `tau_total`.
pub fn step_plan(tau_total: f64, dt: f64) -> (usize, f64) {
    let steps = ((tau_total / dt) - 1e-9).ceil().max(1.0) as usize;
    (steps, tau_total / steps as f64)
}

fn capture(
    state: &AtomicState,
    env: &PumpEnvelope,
    kernel: &mut FieldKernel,
    resolved: &Resolved,
    spec: &CaptureSpec,
    recoil_frequency: f64,
) -> Capture {
    let n = state.num_points();
    let grid = state.grid();
    let mut e_plus = vec![ZERO; n];
    let mut e_minus = vec![ZERO; n];
    let kappa = env.kappa(state.tau);
    kernel.evaluate(state.data(), n, state.tau, kappa, resolved.scales.chi, grid.dxi, &mut e_plus, &mut e_minus);
    let prefactor = Complex64::new(0.0, -1.0) * kappa / resolved.scales.chi;
    let lattice = state.lattice();
    let mut diagonal_components = Vec::new();
    let mut component = vec![ZERO; n];
    for mode in DIAGONAL_COMPONENTS {
        let (Some(i), Some(p)) = (lattice.index_of(mode), lattice.index_of(Channel::PlusForward.partner(mode))) else {
            continue;
        };
        let pair = SourcePair { mode: i, partner: p, phase_rate: mode.n - mode.m };
        kernel.single_pair_plus(state.data(), n, pair, state.tau, prefactor, grid.dxi, &mut component);
        diagonal_components.push((mode, probe_values(&component, n - 1, spec.probe).modulus));
    }
    let populations = state.populations();
    Capture {
        tau: state.tau,
        t_us: resolved.scales.tau_to_us(state.tau, recoil_frequency),
        total: populations.iter().sum(),
        populations,
        e_plus: probe_values(&e_plus, n - 1, spec.probe).modulus,
        e_minus: probe_values(&e_minus, 0, spec.probe).modulus,
        diagonal_components,
        profiles: spec.profiles.then(|| {
            (0..lattice.len())
                .map(|i| state.mode(i).iter().map(|z| z.norm_sqr()).collect())
                .collect()
        }),
    }
}

pub fn simulate(config: &SimulationConfig) -> Result<Trajectory> {
    let resolved = config.resolve()?;
    let env = resolved.envelope;
    simulate_with(config, &env, None)
}

/// Run with an explicit envelope and, optionally, a custom initial state.
pub fn simulate_with(
    config: &SimulationConfig,
    env: &PumpEnvelope,
    initial: Option<AtomicState>,
) -> Result<Trajectory> {
    let resolved = config.resolve()?;
    let mut state = match initial {
        Some(s) => {
            s.check_layout()?;
            if s.lattice() != resolved.lattice.as_ref() || s.grid() != &resolved.grid {
                return Err(Error::validation("initial_state", "lattice or grid does not match the config"));
            }
            s
        }
        None => initial_state_resolved(config, &resolved),
    };
    let initial_state = state.clone();
    let mut warnings = Vec::new();
    let ratio = resolved.scales.slaving_ratio(env.coupling_g);
    if ratio < SLAVING_WARNING_RATIO {
        warnings.push(format!(
            "chi/|kappa| = {ratio:.3e} is below {SLAVING_WARNING_RATIO:e}; slaved-field approximation is marginal"
        ));
    }

    let recoil = config.params.recoil_frequency;
    let (steps, dt) = step_plan(resolved.scales.tau_total, resolved.grid.dt);
    let sample_every = resolved.grid.sample_every;
    let mut stepper = SplitStepper::new(resolved.lattice.clone(), resolved.grid, resolved.scales.chi);
    let mut kernel = FieldKernel::new(&resolved.lattice, resolved.grid.num_points);
    let mut captures = vec![capture(&state, env, &mut kernel, &resolved, &config.capture, recoil)];
    let n0 = captures[0].total;

    // Adjacent half free steps are fused; the state is only observed after a full Strang step.
    stepper.linear_step(&mut state, 0.5 * dt);
    for step in 1..=steps {
        stepper.coupling_step(&mut state, env, dt)?;
        let last = step == steps;
        if step % sample_every == 0 || last {
            stepper.linear_step(&mut state, 0.5 * dt);
            let c = capture(&state, env, &mut kernel, &resolved, &config.capture, recoil);
            let drift = ((c.total - n0) / n0).abs();
            if !drift.is_finite() || drift > INSTABILITY_DRIFT {
                return Err(Error::Instability {
                    tau: state.tau,
                    detail: format!("total atom number drifted by {drift:.3e} (relative)"),
                });
            }
            captures.push(c);
            if !last {
                stepper.linear_step(&mut state, 0.5 * dt);
            }
        } else {
            stepper.linear_step(&mut state, dt);
        }
    }

    let lattice = resolved.lattice.clone();
    let last = captures.last().expect("non-empty");
    let peak: Vec<f64> = (0..lattice.len())
        .map(|i| captures.iter().map(|c| c.populations[i]).fold(0.0, f64::max))
        .collect();
    for (i, &mode) in lattice.modes().iter().enumerate() {
        if lattice.is_boundary(mode) && peak[i] > TRUNCATION_WARNING_FRACTION * last.total {
            warnings.push(format!(
                "boundary mode {mode} reached {:.3e} of the total atom number; the lattice may be too small",
                peak[i] / last.total
            ));
        }
    }

    Ok(Trajectory {
        lattice,
        grid: resolved.grid,
        scales: resolved.scales,
        recoil_frequency: recoil,
        atom_number: config.params.atom_number,
        captures,
        initial_state,
        final_state: state,
        steps,
        dt,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn small_config() -> SimulationConfig {
        SimulationConfig {
            grid: GridSpec { num_points: 128, dt: 2e-3, sample_every: 50 },
            params: PhysicalParams { pulse_duration: 20e-6, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn default_initial_state_holds_configured_atoms() {
        let cfg = SimulationConfig::default();
        let s = initial_state(&cfg).unwrap();
        let lat = s.lattice();
        let pops = s.populations();
        let n00 = pops[lat.index_of(ModeIndex::new(0, 0)).unwrap()];
        assert!((n00 - 2e5).abs() < 2e5 * 1e-12);
        for seed in [ModeIndex::new(1, 1), ModeIndex::new(1, -1)] {
            assert!((pops[lat.index_of(seed).unwrap()] - 1.0).abs() < 1e-12);
        }
        assert!(s.amplitude(ModeIndex::new(2, 0)).unwrap().iter().all(|z| *z == ZERO));
        // real, non-negative amplitudes
        assert!(s.data().iter().all(|z| z.im == 0.0 && z.re >= 0.0));
    }

    #[test]
    fn initial_profile_is_mirror_symmetric_inverted_parabola() {
        let s = initial_state(&SimulationConfig::default()).unwrap();
        let psi = s.amplitude(ModeIndex::new(0, 0)).unwrap();
        let n = psi.len();
        for j in 0..n {
            assert!((psi[j].re - psi[n - 1 - j].re).abs() <= 1e-12 * psi[n / 2].re);
        }
        let rho: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        // second difference of an inverted parabola is constant and negative
        let d2: Vec<f64> = rho.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
        for d in &d2 {
            assert!((d - d2[0]).abs() < 1e-9 * rho[n / 2]);
            assert!(*d < 0.0);
        }
    }

    #[test]
    fn seed_outside_lattice_is_rejected() {
        let cfg = SimulationConfig {
            seeds: vec![Seed { n: 7, m: 1, atoms: 1.0 }],
            ..Default::default()
        };
        assert!(matches!(initial_state(&cfg), Err(Error::Validation { .. })));
        let cfg = SimulationConfig {
            seeds: vec![Seed { n: 1, m: 0, atoms: 1.0 }],
            ..Default::default()
        };
        assert!(initial_state(&cfg).is_err());
    }

    fn plane_wave_state(cfg: &SimulationConfig, mode: ModeIndex, k: usize) -> AtomicState {
        let r = cfg.resolve().unwrap();
        let mut s = AtomicState::zeros(r.lattice.clone(), r.grid);
        let q = r.grid.wavenumber(k);
        let xs: Vec<f64> = (0..r.grid.num_points).map(|j| r.grid.xi(j)).collect();
        for (z, x) in s.amplitude_mut(mode).unwrap().iter_mut().zip(xs) {
            *z = Complex64::cis(q * x);
        }
        s
    }

    #[test]
    fn plane_wave_picks_up_free_phase() {
        let cfg = small_config();
        let r = cfg.resolve().unwrap();
        let mut stepper = SplitStepper::for_config(&cfg).unwrap();
        for (mode, k) in [(ModeIndex::new(0, 0), 3usize), (ModeIndex::new(1, 1), 5), (ModeIndex::new(2, -2), 120)] {
            let mut s = plane_wave_state(&cfg, mode, k);
            let before = s.clone();
            let dt = 0.37;
            stepper.linear_step(&mut s, dt);
            let q = r.grid.wavenumber(k);
            let phase = Complex64::cis(-(0.5 * q * q + mode.m as f64 * q) * dt);
            let i = s.lattice().index_of(mode).unwrap();
            for (a, b) in s.mode(i).iter().zip(before.mode(i)) {
                assert!((a - b * phase).norm() < 1e-12);
                assert!((a.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_amplitude_is_stationary_under_free_step() {
        let cfg = small_config();
        let mut stepper = SplitStepper::for_config(&cfg).unwrap();
        let mut s = plane_wave_state(&cfg, ModeIndex::new(1, -1), 0);
        let before = s.clone();
        stepper.linear_step(&mut s, 1.3);
        assert!(s.relative_l2_distance(&before).unwrap() < 1e-14);
    }

    /// Finite-difference oracle for the drift velocity: the centroid of a
    /// packet in mode m moves at dξ/dτ = m (group velocity of q²/2 + m q at q≈0).
    #[test]
    fn packet_centroid_drifts_with_m() {
        let cfg = small_config();
        let r = cfg.resolve().unwrap();
        let mut stepper = SplitStepper::for_config(&cfg).unwrap();
        let mut s = AtomicState::zeros(r.lattice.clone(), r.grid);
        let center = r.grid.xi_center();
        let width = 40.0;
        let xs: Vec<f64> = (0..r.grid.num_points).map(|j| r.grid.xi(j)).collect();
        for (z, x) in s.amplitude_mut(ModeIndex::new(1, 1)).unwrap().iter_mut().zip(&xs) {
            *z = Complex64::new((-((x - center) / width).powi(2)).exp(), 0.0);
        }
        let centroid = |s: &AtomicState| {
            let psi = s.amplitude(ModeIndex::new(1, 1)).unwrap();
            let w: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            psi.iter().zip(&xs).map(|(z, x)| z.norm_sqr() * x).sum::<f64>() / w
        };
        let c0 = centroid(&s);
        let (steps, dt) = (20, 0.1);
        let mut prev = c0;
        let mut velocities = Vec::new();
        for _ in 0..steps {
            stepper.linear_step(&mut s, dt);
            let c = centroid(&s);
            velocities.push((c - prev) / dt);
            prev = c;
        }
        for v in velocities {
            assert!((v - 1.0).abs() < 1e-6, "v = {v}");
        }
        assert!((prev - c0 - 2.0).abs() < 1e-5);
    }

    #[test]
    fn zero_coupling_leaves_coupling_step_inert() {
        let cfg = small_config();
        let r = cfg.resolve().unwrap();
        let mut s = initial_state(&cfg).unwrap();
        let before = s.clone();
        let mut stepper = SplitStepper::for_config(&cfg).unwrap();
        let env = PumpEnvelope::two_frequency(0.0, 2.0, 0.0, r.scales.kappa_scale);
        stepper.coupling_step(&mut s, &env, 1e-3).unwrap();
        assert_eq!(s.data(), before.data());
    }

    #[test]
    fn unseeded_condensate_does_not_scatter() {
        let cfg = SimulationConfig { seeds: vec![], ..small_config() };
        let t = simulate(&cfg).unwrap();
        let i0 = t.lattice.index_of(ModeIndex::new(0, 0)).unwrap();
        for c in &t.captures {
            for (i, p) in c.populations.iter().enumerate() {
                if i != i0 {
                    assert_eq!(*p, 0.0);
                }
            }
            assert!(c.diagonal_components.iter().all(|(_, v)| *v == 0.0));
        }
    }

    #[test]
    fn free_evolution_conserves_each_mode() {
        let mut cfg = small_config();
        cfg.params.coupling_g = 0.0;
        cfg.seeds = vec![Seed { n: 1, m: 1, atoms: 50.0 }, Seed { n: 2, m: -2, atoms: 3.0 }];
        let t = simulate(&cfg).unwrap();
        let first = &t.captures[0].populations;
        for c in &t.captures {
            for (a, b) in c.populations.iter().zip(first) {
                assert!((a - b).abs() <= 1e-12 * b.max(1.0));
            }
        }
    }

    /// Norm drift of the coupling step alone, frozen free part, should fall
    /// roughly as dt⁴ per unit time (dt⁵ per step).
    #[test]
    fn coupling_step_norm_drift_is_high_order() {
        let mut cfg = small_config();
        cfg.seeds = vec![Seed { n: 1, m: 1, atoms: 2e3 }, Seed { n: 1, m: -1, atoms: 2e3 }];
        let r = cfg.resolve().unwrap();
        let env = PumpEnvelope::two_frequency(3e6, 2.0, 0.0, r.scales.kappa_scale);
        let drift = |dt: f64| {
            let mut s = initial_state(&cfg).unwrap();
            let n0 = s.total_number();
            let mut stepper = SplitStepper::for_config(&cfg).unwrap();
            let steps = (0.4 / dt).round() as usize;
            for _ in 0..steps {
                stepper.coupling_step(&mut s, &env, dt).unwrap();
            }
            ((s.total_number() - n0) / n0).abs()
        };
        let coarse = drift(0.02);
        let fine = drift(0.01);
        assert!(coarse > 0.0);
        let order = (coarse / fine).log2();
        assert!(order > 3.5, "observed order {order} (coarse {coarse:e}, fine {fine:e})");
    }

    #[test]
    fn step_plan_lands_on_end_time() {
        let (steps, dt) = step_plan(3.0 * PI, 1e-3);
        assert_eq!(steps, 9425);
        assert!((steps as f64 * dt - 3.0 * PI).abs() < 1e-12);
        assert!(dt <= 1e-3);
        assert_eq!(step_plan(1.0, 0.25), (4, 0.25));
    }

    #[test]
    fn strang_step_is_second_order() {
        let mut cfg = small_config();
        cfg.params.pulse_duration = 1.0 / (2.0 * cfg.params.recoil_frequency);
        cfg.seeds = vec![Seed { n: 1, m: 1, atoms: 500.0 }, Seed { n: 1, m: -1, atoms: 500.0 }];
        let r = cfg.resolve().unwrap();
        let env = PumpEnvelope::two_frequency(4e6, 2.0, 0.0, r.scales.kappa_scale);
        let run = |dt: f64| {
            let mut s = initial_state(&cfg).unwrap();
            let xs: Vec<f64> = (0..r.grid.num_points).map(|j| r.grid.xi(j)).collect();
            for mode in [ModeIndex::new(1, 1), ModeIndex::new(1, -1)] {
                for (z, x) in s.amplitude_mut(mode).unwrap().iter_mut().zip(&xs) {
                    *z *= Complex64::cis(1.5 * (x / 25.0).sin());
                }
            }
            let mut stepper = SplitStepper::for_config(&cfg).unwrap();
            let steps = (1.0 / dt).round() as usize;
            for _ in 0..steps {
                stepper.advance(&mut s, &env, dt).unwrap();
            }
            s
        };
        let a = run(0.04);
        let b = run(0.02);
        let c = run(0.01);
        let e1 = a.relative_l2_distance(&c).unwrap();
        let e2 = b.relative_l2_distance(&c).unwrap();
        // Self-convergence ratio is 5 for a pure dt² error and 17 for dt⁴; at these
        // step sizes the RK4 coupling error still dominates the splitting error.
        let ratio = e1 / e2;
        assert!(ratio > 4.5, "ratio {ratio}");
    }
}
