use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lattice::{ModeIndex, ModeLattice};

/// Side-mode amplitudes `ψ_{n,m}(ξ)` on a shared grid at dimensionless time `tau`.
///
/// Amplitudes are normalized so that `∫|ψ_{n,m}|² dξ` is the atom number in
/// the mode. Storage is mode-major: mode `i` occupies
/// `data[i * num_points .. (i + 1) * num_points]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicState {
    lattice: Arc<ModeLattice>,
    grid: Grid,
    pub tau: f64,
    data: Vec<Complex64>,
}

impl AtomicState {
    pub fn zeros(lattice: Arc<ModeLattice>, grid: Grid) -> Self {
        let data = vec![Complex64::new(0.0, 0.0); lattice.len() * grid.num_points];
        Self {
            lattice,
            grid,
            tau: 0.0,
            data,
        }
    }

    pub fn lattice(&self) -> &ModeLattice {
        &self.lattice
    }

    pub fn lattice_arc(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn num_points(&self) -> usize {
        self.grid.num_points
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn mode(&self, index: usize) -> &[Complex64] {
        let n = self.grid.num_points;
        &self.data[index * n..(index + 1) * n]
    }

    pub fn mode_mut(&mut self, index: usize) -> &mut [Complex64] {
        let n = self.grid.num_points;
        &mut self.data[index * n..(index + 1) * n]
    }

    pub fn amplitude(&self, mode: ModeIndex) -> Option<&[Complex64]> {
        self.lattice.index_of(mode).map(|i| self.mode(i))
    }

    pub fn amplitude_mut(&mut self, mode: ModeIndex) -> Option<&mut [Complex64]> {
        self.lattice.index_of(mode).map(|i| self.mode_mut(i))
    }

    /// `∫|ψ_i|² dξ` for mode `index`.
    pub fn mode_population(&self, index: usize) -> f64 {
        self.grid.integrate_periodic(self.mode(index).iter().map(|z| z.norm_sqr()))
    }

    /// Populations in lattice order.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.lattice.len()).map(|i| self.mode_population(i)).collect()
    }

    pub fn total_number(&self) -> f64 {
        self.grid.integrate_periodic(self.data.iter().map(|z| z.norm_sqr()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn check_compatible(&self, other: &AtomicState) -> Result<()> {
        if self.grid.num_points != other.grid.num_points || self.lattice.len() != other.lattice.len() {
            return Err(Error::validation("state", "grid or lattice mismatch"));
        }
        Ok(())
    }

    /// Relative L2 distance `‖a − b‖ / ‖b‖` over all mode amplitudes.
    pub fn relative_l2_distance(&self, reference: &AtomicState) -> Result<f64> {
        reference.check_compatible(self)?;
        let (mut diff, mut norm) = (0.0, 0.0);
        for (a, b) in self.data.iter().zip(reference.data.iter()) {
            diff += (a - b).norm_sqr();
            norm += b.norm_sqr();
        }
        Ok((diff / norm).sqrt())
    }

    /// Validate the internal layout, used when states come from outside the stepper.
    pub fn check_layout(&self) -> Result<()> {
        if self.data.len() != self.lattice.len() * self.grid.num_points {
            return Err(Error::validation(
                "state",
                format!(
                    "holds {} samples, expected {} modes x {} points",
                    self.data.len(),
                    self.lattice.len(),
                    self.grid.num_points
                ),
            ));
        }
        Ok(())
    }
}
