//! Side-mode labels `(n, m)` and the truncated lattice of modes kept in a run.
//!
//! `n` counts recoil orders along the pump axis and `m` along the condensate
//! (end-fire) axis. A forward event moves `(n, m) -> (n+1, m±1)`, a backward
//! event `(n, m) -> (n-1, m±1)`, so `n + m` keeps its parity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub n: i32,
    pub m: i32,
}

impl ModeIndex {
    pub const fn new(n: i32, m: i32) -> Self {
        Self { n, m }
    }

    /// Kinetic energy in units of `ħ ω_r`: `n² + m²`.
    pub fn kinetic_energy(self) -> f64 {
        f64::from(self.n * self.n + self.m * self.m)
    }

    pub fn is_even(self) -> bool {
        (self.n + self.m).rem_euclid(2) == 0
    }

    pub fn mirrored(self) -> Self {
        Self::new(self.n, -self.m)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// Which optical field mediates a coupling, and in which direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Partner `(n+1, m-1)` through `κ* e₊`.
    PlusForward,
    /// Partner `(n+1, m+1)` through `κ* e₋`.
    MinusForward,
    /// Partner `(n-1, m+1)` through `κ e₊*`.
    PlusBackward,
    /// Partner `(n-1, m-1)` through `κ e₋*`.
    MinusBackward,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::PlusForward,
        Channel::MinusForward,
        Channel::PlusBackward,
        Channel::MinusBackward,
    ];

    pub fn partner(self, mode: ModeIndex) -> ModeIndex {
        let ModeIndex { n, m } = mode;
        match self {
            Channel::PlusForward => ModeIndex::new(n + 1, m - 1),
            Channel::MinusForward => ModeIndex::new(n + 1, m + 1),
            Channel::PlusBackward => ModeIndex::new(n - 1, m + 1),
            Channel::MinusBackward => ModeIndex::new(n - 1, m - 1),
        }
    }

    /// Integer `k` of the explicit phase factor `e^{i k τ}` attached to this coupling term.
    pub fn phase_rate(self, mode: ModeIndex) -> i32 {
        let ModeIndex { n, m } = mode;
        match self {
            Channel::PlusForward => -(n - m),
            Channel::MinusForward => -(n + m),
            Channel::PlusBackward => n - m - 2,
            Channel::MinusBackward => n + m - 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub mode: ModeIndex,
    /// Position of `mode` in the lattice ordering.
    pub index: usize,
    pub channel: Channel,
    pub phase_rate: i32,
}

/// Bounds of a truncated mode lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_min: i32,
    pub n_max: i32,
    pub m_max: i32,
    pub enforce_parity: bool,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            n_min: -2,
            n_max: 4,
            m_max: 4,
            enforce_parity: true,
        }
    }
}

/// An ordered, duplicate-free set of side modes (sorted by `n`, then `m`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeLattice {
    spec: LatticeSpec,
    modes: Vec<ModeIndex>,
    // dense (n, m) -> position table over the bounding box
    slots: Vec<Option<usize>>,
}

impl ModeLattice {
    pub fn new(spec: LatticeSpec) -> Result<Self> {
        let LatticeSpec {
            n_min,
            n_max,
            m_max,
            enforce_parity,
        } = spec;
        if n_min > 0 {
            return Err(Error::validation("n_min", format!("must be <= 0, got {n_min}")));
        }
        if n_max < 1 {
            return Err(Error::validation("n_max", format!("must be >= 1, got {n_max}")));
        }
        if m_max < 1 {
            return Err(Error::validation("m_max", format!("must be >= 1, got {m_max}")));
        }
        let width = (2 * m_max + 1) as usize;
        let height = (n_max - n_min + 1) as usize;
        let mut slots = vec![None; width * height];
        let mut modes = Vec::new();
        for n in n_min..=n_max {
            for m in -m_max..=m_max {
                let mode = ModeIndex::new(n, m);
                if enforce_parity && !mode.is_even() {
                    continue;
                }
                slots[(n - n_min) as usize * width + (m + m_max) as usize] = Some(modes.len());
                modes.push(mode);
            }
        }
        Ok(Self { spec, modes, slots })
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn index_of(&self, mode: ModeIndex) -> Option<usize> {
        let LatticeSpec { n_min, n_max, m_max, .. } = self.spec;
        if mode.n < n_min || mode.n > n_max || mode.m.abs() > m_max {
            return None;
        }
        let width = (2 * m_max + 1) as usize;
        self.slots[(mode.n - n_min) as usize * width + (mode.m + m_max) as usize]
    }

    pub fn contains(&self, mode: ModeIndex) -> bool {
        self.index_of(mode).is_some()
    }

    /// True when truncation drops at least one of the mode's couplings.
    pub fn is_boundary(&self, mode: ModeIndex) -> bool {
        Channel::ALL
            .into_iter()
            .any(|c| !self.contains(c.partner(mode)))
    }

    /// Largest `|k|` among the explicit phase factors `e^{i k τ}` of any kept coupling.
    pub fn max_phase_rate(&self) -> i32 {
        self.modes
            .iter()
            .flat_map(|&mode| {
                Channel::ALL
                    .into_iter()
                    .filter(move |c| self.contains(c.partner(mode)))
                    .map(move |c| c.phase_rate(mode).abs())
            })
            .max()
            .unwrap_or(0)
    }

    pub fn coupling_neighbors(&self, mode: ModeIndex) -> Result<Vec<Neighbor>> {
        if !self.contains(mode) {
            return Err(Error::validation("mode", format!("{mode} is not in the lattice")));
        }
        Ok(Channel::ALL
            .into_iter()
            .filter_map(|channel| {
                let partner = channel.partner(mode);
                self.index_of(partner).map(|index| Neighbor {
                    mode: partner,
                    index,
                    channel,
                    phase_rate: channel.phase_rate(mode),
                })
            })
            .collect())
    }
}
