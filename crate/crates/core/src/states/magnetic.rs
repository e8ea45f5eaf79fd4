//! Closed-form Gaussian solution for a charged particle in the field
//! `B = 2B₀ẑ`, in units where `m = ħ = qB₀ = 1`.
//!
//! The unprimed gauge uses `A = B₀ r φ̂`; the primed gauge `A′ = A − ηz ẑ`
//! multiplies the wave function by `e^{−iηz²/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::Vec3;

/// Whether the transverse field is on, or the `B₀ → 0` limit is taken
/// (free transverse spreading, `A = 0`, `A′ = −ηz ẑ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldMode {
    #[default]
    Uniform,
    ZeroLimit,
}

/// `σ(t)` defined by `1/σ = 1/(1 + it) + iη`.
pub fn sigma_of(t: f64, eta: f64) -> Complex64 {
    let one_it = Complex64::new(1.0, t);
    (one_it.inv() + Complex64::new(0.0, eta)).inv()
}

fn transverse(x: f64, y: f64, t: f64, mode: FieldMode) -> (Complex64, [Complex64; 2]) {
    let r2 = x * x + y * y;
    match mode {
        FieldMode::Uniform => {
            let v = Complex64::from_polar((-0.5 * r2).exp() / PI.sqrt(), -t);
            (v, [v * -x, v * -y])
        }
        FieldMode::ZeroLimit => {
            let one_it = Complex64::new(1.0, t);
            let v = (-(r2 * 0.5) / one_it).exp() / (one_it * PI.sqrt());
            let g = -v / one_it;
            (v, [g * x, g * y])
        }
    }
}

fn longitudinal(z: f64, t: f64, eta: f64) -> (Complex64, Complex64) {
    let one_it = Complex64::new(1.0, t);
    let inv_sigma = one_it.inv() + Complex64::new(0.0, eta);
    let v = (-(inv_sigma * (0.5 * z * z))).exp() / (one_it.sqrt() * PI.powf(0.25));
    (v, -v * inv_sigma * z)
}

/// `ψ′_t(x)` in Cartesian coordinates (`η = 0` gives the unprimed gauge).
pub fn magnetic_state_position(x: Vec3, t: f64, eta: f64) -> Complex64 {
    magnetic_state_with_gradient(x, t, eta, FieldMode::Uniform).0
}

/// `ψ′_t(x)` and `∇ψ′_t(x)`.
pub fn magnetic_state_with_gradient(x: Vec3, t: f64, eta: f64, mode: FieldMode) -> (Complex64, [Complex64; 3]) {
    let (tv, tg) = transverse(x[0], x[1], t, mode);
    let (zv, zg) = longitudinal(x[2], t, eta);
    (tv * zv, [tg[0] * zv, tg[1] * zv, tv * zg])
}

/// `ψ̃′_t(p) = e^{−it} π^{−3/4} √(σ/(1+it)) e^{−(p_x² + p_y² + σ p_z²)/2}`.
pub fn magnetic_state_momentum(p: Vec3, t: f64, eta: f64) -> Complex64 {
    magnetic_state_momentum_mode(p, t, eta, FieldMode::Uniform)
}

pub fn magnetic_state_momentum_mode(p: Vec3, t: f64, eta: f64, mode: FieldMode) -> Complex64 {
    let one_it = Complex64::new(1.0, t);
    let sigma = sigma_of(t, eta);
    let perp2 = p[0] * p[0] + p[1] * p[1];
    let trans = match mode {
        FieldMode::Uniform => Complex64::from_polar((-0.5 * perp2).exp(), -t),
        FieldMode::ZeroLimit => Complex64::from_polar((-0.5 * perp2).exp(), -0.5 * t * perp2),
    };
    trans * (sigma / one_it).sqrt() * (-sigma * (0.5 * p[2] * p[2])).exp() / PI.powf(0.75)
}
