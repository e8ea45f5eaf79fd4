//! Numerical laboratory for quantum arrival-time (time-of-flight) distributions.
//!
//! The crate evaluates and cross-checks four competing proposals for the
//! probability density `Π(τ)` that a particle first reaches a detector at time `τ`:
//!
//! * the Aharonov–Bohm/Kijowski distribution for free motion ([`abk`], [`kijowski`]),
//! * its "standard" extension to non-free Hamiltonians ([`standard`]),
//! * the quantum-flux distribution ([`flux`]),
//! * the Bohmian trajectory-ensemble distribution ([`bohmian`]).
//!
//! The worked example is a charged particle in a constant magnetic field
//! `B = 2 B₀ ẑ`, where the standard distribution turns out to depend on the
//! gauge while the flux and Bohmian distributions do not.
//!
//! Units: free examples use `ħ = m = σ = 1`; the magnetic example uses `m`,
//! `√(ħ/qB₀)` and `m/(qB₀)` as units of mass, length and time.

pub mod abk;
pub mod bohmian;
pub mod curve;
pub mod error;
pub mod flux;
pub mod kijowski;
pub mod numerics;
pub mod standard;
pub mod states;

pub use curve::DistributionCurve;
pub use error::{Result, TofError};
pub use num_complex::Complex64;
pub use numerics::quadrature::{EndpointSingularity, QuadratureSpec};
pub use states::{GaugeGeometry, UnitSystem, WavePacketSpec};

/// Cartesian 3-vector `(x, y, z)`.
pub type Vec3 = [f64; 3];

/// Arrival time of a classical or Bohmian path: either a finite time or never.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arrival {
    At(f64),
    Never,
}

impl Arrival {
    pub fn time(self) -> Option<f64> {
        match self {
            Arrival::At(t) => Some(t),
            Arrival::Never => None,
        }
    }

    pub fn is_never(self) -> bool {
        matches!(self, Arrival::Never)
    }
}
