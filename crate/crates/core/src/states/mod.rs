//! Wave-packet families, free and magnetic time evolution, polar
//! decomposition and the quadratic gauge transformation.

pub mod gaussian;
pub mod magnetic;
pub mod tabulated;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, TofError};
use crate::Vec3;

pub use gaussian::{Factor1D, GaussianMixture, HalfLine, Mixture1D, Term3D};
pub use magnetic::{
    magnetic_state_momentum, magnetic_state_position, magnetic_state_with_gradient, sigma_of, FieldMode,
};
pub use tabulated::TabulatedMomentum;

/// Density below which a point counts as a node of the wave function.
pub const NODE_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitMode {
    /// `ħ = m = σ = 1`.
    #[default]
    Free,
    /// Mass `m`, length `√(ħ/qB₀)`, time `m/(qB₀)`.
    Magnetic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub mode: UnitMode,
    pub b0: f64,
    pub q: f64,
    /// Take the `B₀ → 0` limit while keeping the gauge term.
    pub zero_field_limit: bool,
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem::free()
    }
}

impl UnitSystem {
    pub fn free() -> Self {
        UnitSystem { mode: UnitMode::Free, b0: 0.0, q: 1.0, zero_field_limit: false }
    }

    /// Magnetic units with `qB₀ = 1`.
    pub fn magnetic() -> Self {
        UnitSystem { mode: UnitMode::Magnetic, b0: 1.0, q: 1.0, zero_field_limit: false }
    }

    pub fn magnetic_zero_field() -> Self {
        UnitSystem { mode: UnitMode::Magnetic, b0: 0.0, q: 1.0, zero_field_limit: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b0 >= 0.0) || !self.q.is_finite() {
            return Err(TofError::invalid("B0 must be non-negative and q finite"));
        }
        if self.mode == UnitMode::Magnetic && !self.zero_field_limit && !(self.q * self.b0 > 0.0) {
            return Err(TofError::invalid("magnetic units need q*B0 > 0 (or the zero-field limit)"));
        }
        Ok(())
    }

    pub fn field_mode(&self) -> FieldMode {
        if self.zero_field_limit {
            FieldMode::ZeroLimit
        } else {
            FieldMode::Uniform
        }
    }

    pub fn label(&self) -> &'static str {
        match (self.mode, self.zero_field_limit) {
            (UnitMode::Free, _) => "free",
            (UnitMode::Magnetic, false) => "magnetic",
            (UnitMode::Magnetic, true) => "magnetic-zero-field",
        }
    }
}

/// Gauge and detector geometry for the magnetic example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeGeometry {
    pub units: UnitSystem,
    pub eta: f64,
    /// Detector plane `z = L`.
    pub l: f64,
}

impl GaugeGeometry {
    pub fn magnetic(eta: f64, l: f64) -> Self {
        GaugeGeometry { units: UnitSystem::magnetic(), eta, l }
    }

    pub fn validate(&self) -> Result<()> {
        self.units.validate()?;
        if !(self.eta.is_finite() && self.l.is_finite()) {
            return Err(TofError::invalid("eta and L must be finite"));
        }
        Ok(())
    }

    pub fn vector_potential(&self) -> VectorPotential {
        VectorPotential {
            qb0: if self.units.zero_field_limit { 0.0 } else { self.units.q * self.units.b0 },
            eta: self.eta,
        }
    }
}

/// `qA(x) = qB₀(−y, x, 0) − (0, 0, ηz)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VectorPotential {
    pub qb0: f64,
    pub eta: f64,
}

impl VectorPotential {
    pub const ZERO: VectorPotential = VectorPotential { qb0: 0.0, eta: 0.0 };

    pub fn eval(&self, x: Vec3) -> Vec3 {
        [-self.qb0 * x[1], self.qb0 * x[0], -self.eta * x[2]]
    }
}

/// Wave-packet families.
#[derive(Debug, Clone, PartialEq)]
pub enum PacketFamily {
    /// `ψ₀ = (2α/π)^{3/4} exp(−α|x|² + iβz)`.
    FreeGaussian {
        alpha: f64,
        beta: f64,
    },
    /// The Gaussian in the magnetic field, in the gauge labelled by `eta`.
    MagneticGaussian {
        eta: f64,
        field: FieldMode,
    },
    /// `φ̃₀ = √2 π^{−3/4} θ(p_z) e^{−p²/2}`.
    RightMovingGaussian,
    Mixture(GaussianMixture),
    Tabulated(TabulatedMomentum),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavePacketSpec {
    pub family: PacketFamily,
    pub t0: f64,
}

impl WavePacketSpec {
    pub fn free_gaussian(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(TofError::invalid("free Gaussian needs alpha > 0 and finite beta"));
        }
        Ok(Self::wrap(PacketFamily::FreeGaussian { alpha, beta }))
    }

    pub fn magnetic_gaussian(eta: f64) -> Self {
        Self::wrap(PacketFamily::MagneticGaussian { eta, field: FieldMode::Uniform })
    }

    pub fn magnetic_gaussian_in(eta: f64, field: FieldMode) -> Self {
        Self::wrap(PacketFamily::MagneticGaussian { eta, field })
    }

    pub fn right_moving_gaussian() -> Self {
        Self::wrap(PacketFamily::RightMovingGaussian)
    }

    pub fn mixture(m: GaussianMixture) -> Self {
        Self::wrap(PacketFamily::Mixture(m))
    }

    pub fn tabulated(t: TabulatedMomentum) -> Self {
        Self::wrap(PacketFamily::Tabulated(t))
    }

    fn wrap(family: PacketFamily) -> Self {
        WavePacketSpec { family, t0: 0.0 }
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            PacketFamily::FreeGaussian { .. } => "free_gaussian",
            PacketFamily::MagneticGaussian { .. } => "magnetic_gaussian",
            PacketFamily::RightMovingGaussian => "right_moving_gaussian",
            PacketFamily::Mixture(_) => "mixture",
            PacketFamily::Tabulated(_) => "tabulated",
        }
    }

    /// Analytic families that evolve freely, as a Gaussian mixture.
    pub fn as_mixture(&self) -> Option<GaussianMixture> {
        let one = Complex64::new(1.0, 0.0);
        match &self.family {
            PacketFamily::FreeGaussian { alpha, beta } => {
                let w = (2.0 * alpha).sqrt();
                Some(GaussianMixture {
                    terms: vec![Term3D {
                        coeff: one * (2.0 * PI * alpha).powf(-0.75),
                        angle: 0.0,
                        u: Factor1D::gaussian(0.0, w),
                        v: Factor1D::gaussian(0.0, w),
                        z: Factor1D::gaussian(*beta, w),
                    }],
                })
            }
            PacketFamily::RightMovingGaussian => Some(GaussianMixture {
                terms: vec![Term3D {
                    coeff: one * (2f64.sqrt() / PI.powf(0.75)),
                    angle: 0.0,
                    u: Factor1D::gaussian(0.0, 1.0),
                    v: Factor1D::gaussian(0.0, 1.0),
                    z: Factor1D::gaussian(0.0, 1.0).restricted(HalfLine::Positive),
                }],
            }),
            PacketFamily::Mixture(m) => Some(m.clone()),
            _ => None,
        }
    }

    /// `ψ̃₀(p)` (for the magnetic family, the `t = 0` amplitude in its gauge).
    pub fn initial_momentum(&self, p: Vec3) -> Complex64 {
        match &self.family {
            PacketFamily::MagneticGaussian { eta, field } => {
                magnetic::magnetic_state_momentum_mode(p, 0.0, *eta, *field)
            }
            PacketFamily::Tabulated(t) => t.amplitude(p),
            _ => self.as_mixture().expect("analytic family").amplitude(p),
        }
    }

    /// Bounding box of the momentum support.
    pub fn momentum_extent(&self) -> [(f64, f64); 3] {
        match &self.family {
            PacketFamily::Tabulated(t) => t.extent(),
            PacketFamily::MagneticGaussian { .. } => [(-9.0, 9.0); 3],
            _ => self.as_mixture().expect("analytic family").extent(40.0),
        }
    }

    pub fn evolved(&self, t: f64) -> EvolvedState {
        EvolvedState { spec: self.clone(), t }
    }
}

/// `ψ̃_t(p) = ψ̃₀(p) e^{−itp²/2}` for freely evolving families.
pub fn evolve_free_momentum(spec: &WavePacketSpec, p: Vec3, t: f64) -> Result<Complex64> {
    if let PacketFamily::MagneticGaussian { .. } = spec.family {
        return Err(TofError::UnsupportedFamily("magnetic_gaussian does not evolve freely".into()));
    }
    let p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    Ok(spec.initial_momentum(p) * Complex64::from_polar(1.0, -0.5 * t * p2))
}

/// A packet together with the time at which it is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedState {
    pub spec: WavePacketSpec,
    pub t: f64,
}

impl EvolvedState {
    pub fn at(&self, t: f64) -> EvolvedState {
        EvolvedState { spec: self.spec.clone(), t }
    }

    pub fn gauge_eta(&self) -> f64 {
        match self.spec.family {
            PacketFamily::MagneticGaussian { eta, .. } => eta,
            _ => 0.0,
        }
    }

    /// The vector potential this state is written in.
    pub fn vector_potential(&self) -> VectorPotential {
        match self.spec.family {
            PacketFamily::MagneticGaussian { eta, field } => {
                VectorPotential { qb0: if field == FieldMode::Uniform { 1.0 } else { 0.0 }, eta }
            }
            _ => VectorPotential::ZERO,
        }
    }

    pub fn momentum(&self, p: Vec3) -> Result<Complex64> {
        match &self.spec.family {
            PacketFamily::MagneticGaussian { eta, field } => {
                Ok(magnetic::magnetic_state_momentum_mode(p, self.t, *eta, *field))
            }
            _ => evolve_free_momentum(&self.spec, p, self.t),
        }
    }

    /// `ψ_t(x)` and `∇ψ_t(x)`.
    pub fn position_with_gradient(&self, x: Vec3) -> Result<(Complex64, [Complex64; 3])> {
        match &self.spec.family {
            PacketFamily::MagneticGaussian { eta, field } => Ok(magnetic_state_with_gradient(x, self.t, *eta, *field)),
            PacketFamily::Tabulated(_) => {
                Err(TofError::UnsupportedFamily("position space of tabulated packets".into()))
            }
            _ => self.spec.as_mixture().expect("analytic family").position(x, self.t),
        }
    }

    pub fn position(&self, x: Vec3) -> Result<Complex64> {
        self.position_with_gradient(x).map(|v| v.0)
    }
}

/// `ρ = |ψ|²` and `∇S = Im[ψ*∇ψ]/ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDecomposition {
    pub rho: f64,
    pub phase_gradient: Vec3,
}

pub fn polar_decompose(state: &EvolvedState, x: Vec3) -> Result<PolarDecomposition> {
    let (psi, grad) = state.position_with_gradient(x)?;
    let rho = psi.norm_sqr();
    if !(rho > NODE_THRESHOLD) {
        return Err(TofError::NodeEncountered { x, t: state.t, rho });
    }
    let phase_gradient = grad.map(|g| (psi.conj() * g).im / rho);
    Ok(PolarDecomposition { rho, phase_gradient })
}

/// Cylindrical coordinates `(r, φ, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylindrical {
    pub r: f64,
    pub phi: f64,
    pub z: f64,
}

impl Cylindrical {
    pub fn to_cartesian(self) -> Vec3 {
        let (s, c) = self.phi.sin_cos();
        [self.r * c, self.r * s, self.z]
    }

    pub fn from_cartesian(x: Vec3) -> Self {
        Cylindrical { r: x[0].hypot(x[1]), phi: x[1].atan2(x[0]), z: x[2] }
    }
}
