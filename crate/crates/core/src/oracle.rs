//! Brute-force reference integrator for small problems.
//!
//! Integrates the full side-mode equations with one explicit RK4 stepper,
//! fourth-order centred differences for both spatial derivatives (periodic),
//! and trapezoid fields evaluated by direct loops. Nothing here is shared
//! with the split-step solver, so agreement between the two is evidence
//! that both are right.

use num_complex::Complex64;

use crate::dynamics::{initial_state, Capture, SimulationConfig, Trajectory, INSTABILITY_DRIFT};
use crate::error::{Error, Result};
use crate::lattice::ModeIndex;
use crate::state::AtomicState;

pub const ORACLE_MAX_POINTS: usize = 128;
pub const ORACLE_MAX_MODES: usize = 15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

struct Problem {
    modes: Vec<ModeIndex>,
    // for each mode, positions of (n+1,m-1), (n+1,m+1), (n-1,m+1), (n-1,m-1)
    partners: Vec<[Option<usize>; 4]>,
    points: usize,
    dxi: f64,
    chi: f64,
}

impl Problem {
    fn find(&self, n: i32, m: i32) -> Option<usize> {
        self.modes.iter().position(|x| x.n == n && x.m == m)
    }

    fn at(&self, data: &[Complex64], mode: usize, j: usize) -> Complex64 {
        data[mode * self.points + j]
    }

    fn fields(&self, data: &[Complex64], tau: f64, kappa: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
        let np = self.points;
        let mut src_plus = vec![ZERO; np];
        let mut src_minus = vec![ZERO; np];
        for (i, mode) in self.modes.iter().enumerate() {
            let (n, m) = (mode.n, mode.m);
            if let Some(p) = self.partners[i][0] {
                let ph = Complex64::cis(f64::from(n - m) * tau);
                for j in 0..np {
                    src_plus[j] += ph * self.at(data, i, j) * self.at(data, p, j).conj();
                }
            }
            if let Some(p) = self.partners[i][1] {
                let ph = Complex64::cis(f64::from(n + m) * tau);
                for j in 0..np {
                    src_minus[j] += ph * self.at(data, i, j) * self.at(data, p, j).conj();
                }
            }
        }
        let pre = -I * kappa / self.chi;
        let mut e_plus = vec![ZERO; np];
        let mut e_minus = vec![ZERO; np];
        let mut acc = ZERO;
        for j in 1..np {
            acc += (src_plus[j - 1] + src_plus[j]) * (0.5 * self.dxi);
            e_plus[j] = pre * acc;
        }
        acc = ZERO;
        for j in (0..np - 1).rev() {
            acc += (src_minus[j + 1] + src_minus[j]) * (0.5 * self.dxi);
            e_minus[j] = pre * acc;
        }
        (e_plus, e_minus)
    }

    fn rhs(&self, data: &[Complex64], tau: f64, kappa: Complex64, out: &mut [Complex64]) {
        let np = self.points;
        let (ep, em) = self.fields(data, tau, kappa);
        let h = self.dxi;
        let wrap = |j: isize| j.rem_euclid(np as isize) as usize;
        for (i, mode) in self.modes.iter().enumerate() {
            let (n, m) = (mode.n, mode.m);
            let [pf, mf, pb, mb] = self.partners[i];
            let rates = [
                -f64::from(n - m),
                -f64::from(n + m),
                f64::from(n - m - 2),
                f64::from(n + m - 2),
            ];
            for j in 0..np {
                let jj = j as isize;
                let f = |d: isize| self.at(data, i, wrap(jj + d));
                let d2 = (-f(2) + f(1) * 16.0 - f(0) * 30.0 + f(-1) * 16.0 - f(-2)) / (12.0 * h * h);
                let d1 = (-f(2) + f(1) * 8.0 - f(-1) * 8.0 + f(-2)) / (12.0 * h);
                let mut h_psi = -0.5 * d2 - I * f64::from(m) * d1;
                if let Some(p) = pf {
                    h_psi += kappa.conj() * ep[j] * self.at(data, p, j) * Complex64::cis(rates[0] * tau);
                }
                if let Some(p) = mf {
                    h_psi += kappa.conj() * em[j] * self.at(data, p, j) * Complex64::cis(rates[1] * tau);
                }
                if let Some(p) = pb {
                    h_psi += kappa * ep[j].conj() * self.at(data, p, j) * Complex64::cis(rates[2] * tau);
                }
                if let Some(p) = mb {
                    h_psi += kappa * em[j].conj() * self.at(data, p, j) * Complex64::cis(rates[3] * tau);
                }
                out[i * np + j] = -I * h_psi;
            }
        }
    }

    fn population(&self, data: &[Complex64], mode: usize) -> f64 {
        data[mode * self.points..(mode + 1) * self.points]
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            * self.dxi
    }
}

/// Integrate `config` from its default initial state with the reference scheme.
pub fn oracle_integrate(config: &SimulationConfig) -> Result<Trajectory> {
    let state = initial_state(config)?;
    oracle_integrate_from(config, state)
}

/// Integrate `config` from a caller-supplied initial state.
pub fn oracle_integrate_from(config: &SimulationConfig, initial: AtomicState) -> Result<Trajectory> {
    let resolved = config.resolve()?;
    let grid = resolved.grid;
    let lattice = resolved.lattice.clone();
    if grid.num_points > ORACLE_MAX_POINTS {
        return Err(Error::validation(
            "num_points",
            format!("oracle is limited to {ORACLE_MAX_POINTS} points, got {}", grid.num_points),
        ));
    }
    if lattice.len() > ORACLE_MAX_MODES {
        return Err(Error::validation(
            "lattice",
            format!("oracle is limited to {ORACLE_MAX_MODES} modes, got {}", lattice.len()),
        ));
    }
    initial.check_layout()?;
    if initial.lattice() != lattice.as_ref() || initial.grid() != &grid {
        return Err(Error::validation("initial_state", "lattice or grid does not match the config"));
    }

    let mut problem = Problem {
        modes: lattice.modes().to_vec(),
        partners: Vec::new(),
        points: grid.num_points,
        dxi: grid.dxi,
        chi: resolved.scales.chi,
    };
    problem.partners = problem
        .modes
        .iter()
        .map(|x| {
            [
                problem.find(x.n + 1, x.m - 1),
                problem.find(x.n + 1, x.m + 1),
                problem.find(x.n - 1, x.m + 1),
                problem.find(x.n - 1, x.m - 1),
            ]
        })
        .collect();

    let env = resolved.envelope;
    let tau_total = resolved.scales.tau_total;
    let steps = ((tau_total / grid.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = tau_total / steps as f64;
    let recoil = config.params.recoil_frequency;

    let mut y = initial.data().to_vec();
    let len = y.len();
    let mut k = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
    let mut tmp = vec![ZERO; len];

    let record = |y: &[Complex64], tau: f64| -> Capture {
        let (ep, em) = problem.fields(y, tau, env.kappa(tau));
        let populations: Vec<f64> = (0..problem.modes.len()).map(|i| problem.population(y, i)).collect();
        Capture {
            tau,
            t_us: resolved.scales.tau_to_us(tau, recoil),
            total: populations.iter().sum(),
            populations,
            e_plus: ep[problem.points - 1].norm(),
            e_minus: em[0].norm(),
            diagonal_components: Vec::new(),
            profiles: None,
        }
    };

    let mut captures = vec![record(&y, 0.0)];
    let n0 = captures[0].total;
    for step in 0..steps {
        let tau = step as f64 * dt;
        problem.rhs(&y, tau, env.kappa(tau), &mut k[0]);
        for q in 0..len {
            tmp[q] = y[q] + k[0][q] * (0.5 * dt);
        }
        let t_mid = tau + 0.5 * dt;
        problem.rhs(&tmp, t_mid, env.kappa(t_mid), &mut k[1]);
        for q in 0..len {
            tmp[q] = y[q] + k[1][q] * (0.5 * dt);
        }
        problem.rhs(&tmp, t_mid, env.kappa(t_mid), &mut k[2]);
        for q in 0..len {
            tmp[q] = y[q] + k[2][q] * dt;
        }
        problem.rhs(&tmp, tau + dt, env.kappa(tau + dt), &mut k[3]);
        for q in 0..len {
            y[q] += (k[0][q] + (k[1][q] + k[2][q]) * 2.0 + k[3][q]) * (dt / 6.0);
        }
        let tau = (step + 1) as f64 * dt;
        let last = step + 1 == steps;
        if (step + 1) % grid.sample_every == 0 || last {
            let c = record(&y, tau);
            let drift = ((c.total - n0) / n0).abs();
            if !drift.is_finite() || drift > INSTABILITY_DRIFT {
                return Err(Error::Instability {
                    tau,
                    detail: format!("oracle: total atom number drifted by {drift:.3e} (relative)"),
                });
            }
            captures.push(c);
        }
    }

    let mut final_state = AtomicState::zeros(lattice.clone(), grid);
    final_state.data_mut().copy_from_slice(&y);
    final_state.tau = tau_total;
    Ok(Trajectory {
        lattice,
        grid,
        scales: resolved.scales,
        recoil_frequency: recoil,
        atom_number: config.params.atom_number,
        captures,
        initial_state: initial,
        final_state,
        steps,
        dt,
        warnings: Vec::new(),
    })
}
