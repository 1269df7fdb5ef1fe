//! Model configuration shared by the physics modules.

use serde::{Deserialize, Serialize};

use crate::atom::PotentialSpec;
use crate::error::{invalid, Result};

/// Spatial dimension of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    /// Parse from an integer, rejecting anything but 2 or 3.
    pub fn from_usize(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(invalid(format!("dimension must be 2 or 3, got {d}"))),
        }
    }

    /// Number of Cartesian components.
    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Angular factor ∫dΩ_κ (𝕀 − κκᵀ) projected on a fixed direction:
    /// π in two dimensions and 8π/3 in three.
    pub fn transverse_angular_factor(self) -> f64 {
        match self {
            Dim::Two => std::f64::consts::PI,
            Dim::Three => 8.0 * std::f64::consts::PI / 3.0,
        }
    }
}

/// Adiabatic switching profile of the charge, q_t = q·s(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Switching {
    /// s(t) = 1 at all times.
    Constant,
    /// s(t) = (1 + tanh((t − t_on)/width))/2.
    Tanh { t_on: f64, width: f64 },
}

impl Switching {
    /// Default tanh ramp centered at t_on with width T_sw.
    pub fn tanh(t_on: f64, width: f64) -> Self {
        Switching::Tanh { t_on, width }
    }

    /// Profile value s(t) ∈ [0, 1].
    pub fn s(&self, t: f64) -> f64 {
        match *self {
            Switching::Constant => 1.0,
            Switching::Tanh { t_on, width } => 0.5 * (1.0 + ((t - t_on) / width).tanh()),
        }
    }

    /// Time derivative ṡ(t).
    pub fn ds(&self, t: f64) -> f64 {
        match *self {
            Switching::Constant => 0.0,
            Switching::Tanh { t_on, width } => {
                let c = ((t - t_on) / width).cosh();
                0.5 / (width * c * c)
            }
        }
    }

    /// Second derivative s̈(t).
    pub fn dds(&self, t: f64) -> f64 {
        match *self {
            Switching::Constant => 0.0,
            Switching::Tanh { t_on, width } => {
                let x = (t - t_on) / width;
                let c = x.cosh();
                -x.tanh() / (width * width * c * c)
            }
        }
    }

    /// Earliest time at which s(t) exceeds `floor`; history before it is
    /// negligible for memory integrals.
    pub fn start_time(&self, floor: f64) -> f64 {
        match *self {
            Switching::Constant => f64::NEG_INFINITY,
            // s ≈ e^{2(t−t_on)/w} for t ≪ t_on.
            Switching::Tanh { t_on, width } => t_on + 0.5 * width * floor.ln(),
        }
    }
}

/// Physical parameters of the atom coupled to the field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dim: Dim,
    /// Physical mass m.
    pub mass: f64,
    /// Physical charge q.
    pub charge: f64,
    pub potential: PotentialSpec,
    /// UV regulator α of the Gaussian charge profile.
    pub alpha: f64,
    /// Memory-kernel reference time ratio η = t_c/t̃.
    pub eta: f64,
    pub switching: Switching,
}

impl ModelConfig {
    /// Check the invariants a configuration must satisfy before any run.
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(invalid("mass must be positive"));
        }
        if !self.charge.is_finite() {
            return Err(invalid("charge must be finite"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha must be positive"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(invalid("eta must be positive"));
        }
        if let Switching::Tanh { width, .. } = self.switching {
            if !(width > 0.0) {
                return Err(invalid("switching width must be positive"));
            }
        }
        self.potential.validate(self.dim)
    }

    /// Switched charge q_t.
    pub fn q_t(&self, t: f64) -> f64 {
        self.charge * self.switching.s(t)
    }

    /// The charge profile alone.
    pub fn charge_profile(&self) -> Charge {
        Charge {
            q: self.charge,
            switching: self.switching,
        }
    }
}

/// Switched charge profile q_t = q·s(t) on its own, for routines that need
/// only the charge history of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub q: f64,
    pub switching: Switching,
}

impl Charge {
    /// Charge that is on at all times.
    pub fn constant(q: f64) -> Self {
        Self {
            q,
            switching: Switching::Constant,
        }
    }

    /// q_t.
    pub fn at(&self, t: f64) -> f64 {
        self.q * self.switching.s(t)
    }

    /// q̇_t.
    pub fn rate(&self, t: f64) -> f64 {
        self.q * self.switching.ds(t)
    }

    /// q̈_t.
    pub fn accel(&self, t: f64) -> f64 {
        self.q * self.switching.dds(t)
    }
}
