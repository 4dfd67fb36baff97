//! Dimensionless two-ring parameters and the analytic uniform stationary
//! states.
//!
//! The coupled ring equations are written with a signed tunnel coupling
//! `kappa = sign * |kappa|` entering as `+kappa * chi_other`. The physical
//! coupling through a barrier is negative ([`CouplingSign::Negative`]), which
//! makes the symmetric superposition the ground state. The positive sign is
//! kept as a hypothetical for comparison: it swaps the roles of the two
//! parities everywhere.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative sign of the two ring (or well) amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

impl Parity {
    /// `+1` for symmetric, `-1` for antisymmetric.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Symmetric => 1.0,
            Parity::Antisymmetric => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Parity::Symmetric => Parity::Antisymmetric,
            Parity::Antisymmetric => Parity::Symmetric,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Symmetric => "symmetric",
            Parity::Antisymmetric => "antisymmetric",
        }
    }
}

/// Sign of the tunnel coupling constant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum CouplingSign {
    #[default]
    Negative,
    Positive,
}

impl CouplingSign {
    pub fn value(self) -> f64 {
        match self {
            CouplingSign::Negative => -1.0,
            CouplingSign::Positive => 1.0,
        }
    }

    /// Parity that plays the role of the physical (negative-coupling) parity
    /// `physical`. Under a positive coupling every formula sees `|kappa|`
    /// replaced by `-|kappa|`, which is the same as exchanging parities.
    pub fn effective_parity(self, physical: Parity) -> Parity {
        match self {
            CouplingSign::Negative => physical,
            CouplingSign::Positive => physical.flipped(),
        }
    }
}

impl TryFrom<i32> for CouplingSign {
    type Error = Error;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            -1 => Ok(CouplingSign::Negative),
            1 => Ok(CouplingSign::Positive),
            other => Err(Error::invalid(
                "kappa_sign",
                format!("must be -1 or +1, got {other}"),
            )),
        }
    }
}

impl From<CouplingSign> for i32 {
    fn from(s: CouplingSign) -> i32 {
        match s {
            CouplingSign::Negative => -1,
            CouplingSign::Positive => 1,
        }
    }
}

/// Two-ring model parameters in dimensionless units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingParams {
    pub kappa_mag: f64,
    pub kappa_sign: CouplingSign,
    pub gamma: f64,
    /// Atoms per ring.
    pub n0: f64,
}

impl RingParams {
    pub fn new(kappa_mag: f64, kappa_sign: CouplingSign, gamma: f64, n0: f64) -> Result<Self> {
        if !(kappa_mag.is_finite() && kappa_mag >= 0.0) {
            return Err(Error::invalid(
                "kappa_mag",
                format!("must be >= 0, got {kappa_mag}"),
            ));
        }
        if !gamma.is_finite() {
            return Err(Error::invalid("gamma", "must be finite"));
        }
        if !(n0.is_finite() && n0 > 0.0) {
            return Err(Error::invalid("n0", format!("must be > 0, got {n0}")));
        }
        Ok(Self {
            kappa_mag,
            kappa_sign,
            gamma,
            n0,
        })
    }

    /// Parameters with a prescribed `epsilon`, using `N0 = 2 pi` so that the
    /// uniform field has unit modulus and `gamma == epsilon` exactly.
    pub fn from_epsilon(eps: f64, kappa_mag: f64, kappa_sign: CouplingSign) -> Result<Self> {
        if !eps.is_finite() {
            return Err(Error::invalid("eps", "must be finite"));
        }
        Self::new(kappa_mag, kappa_sign, eps, TAU)
    }

    /// `gamma * N0 / (2 pi)`.
    pub fn epsilon(&self) -> f64 {
        epsilon(self)
    }

    /// Signed coupling `sign * |kappa|`.
    pub fn kappa(&self) -> f64 {
        self.kappa_sign.value() * self.kappa_mag
    }

    /// Modulus of the uniform field, `sqrt(N0 / 2 pi)`.
    pub fn background_amplitude(&self) -> f64 {
        (self.n0 / TAU).sqrt()
    }
}

/// Spatially uniform stationary state of the two-ring system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UniformState {
    pub parity: Parity,
    pub mu: f64,
    /// Zero-mode amplitude `alpha_0` of the upper ring; `|amplitude|^2 = N0`.
    pub amplitude: Complex64,
}

impl UniformState {
    pub fn upper_amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn lower_amplitude(&self) -> Complex64 {
        self.amplitude * self.parity.sign()
    }
}

pub fn epsilon(params: &RingParams) -> f64 {
    params.gamma * (params.n0 / TAU)
}

/// Returns `(ground, excited)`. The two chemical potentials are always
/// `eps - |kappa|` and `eps + |kappa|`; the coupling sign only decides which
/// parity carries which.
pub fn stationary_states(params: &RingParams) -> (UniformState, UniformState) {
    let eps = params.epsilon();
    let amplitude = Complex64::new(params.n0.sqrt(), 0.0);
    let ground_parity = params.kappa_sign.effective_parity(Parity::Symmetric);
    let ground = UniformState {
        parity: ground_parity,
        mu: eps - params.kappa_mag,
        amplitude,
    };
    let excited = UniformState {
        parity: ground_parity.flipped(),
        mu: eps + params.kappa_mag,
        amplitude,
    };
    (ground, excited)
}

/// Chemical potential of the uniform state with the given parity.
pub fn chemical_potential(params: &RingParams, parity: Parity) -> f64 {
    let (ground, excited) = stationary_states(params);
    if ground.parity == parity {
        ground.mu
    } else {
        excited.mu
    }
}
