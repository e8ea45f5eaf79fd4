//! Parabolic cylinder function `D_ν(z)` for real order and complex argument.
//!
//! Internally everything is computed for the scaled function
//! `Ẽ_ν(z) = e^{z²/4} D_ν(z)`, which stays O(1) in the sectors where the
//! half-line integrals live and avoids overflow of the Gaussian prefactor.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::quadrature::{integrate, EndpointSingularity, QuadratureSpec};
use super::special::{gamma, kummer_m, recip_gamma};
use crate::error::{Result, TofError};

/// Radius below which the Kummer series is used.
pub const SERIES_RADIUS: f64 = 2.0;
/// Radius above which the asymptotic expansion is used.
pub const ASYMPTOTIC_RADIUS: f64 = 30.0;

/// Which representation produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DBranch {
    Hermite,
    Series,
    Integral,
    Recurrence,
    Asymptotic,
}

/// `Ẽ_ν(z) · e^{-shift}` together with `shift` and the branch used.
#[derive(Debug, Clone, Copy)]
pub struct ScaledD {
    pub value: Complex64,
    pub shift: f64,
    pub branch: DBranch,
}

impl ScaledD {
    fn plain(value: Complex64, branch: DBranch) -> Self {
        ScaledD { value, shift: 0.0, branch }
    }

    /// `Ẽ_ν(z)` (may overflow for large shifts).
    pub fn scaled(&self) -> Complex64 {
        self.value * self.shift.exp()
    }
}

/// `D_ν(z)`.
pub fn parabolic_cylinder_d(nu: f64, z: Complex64) -> Result<Complex64> {
    let s = scaled_d(nu, z)?;
    let q = z * z * 0.25;
    Ok(s.value * Complex64::new(s.shift - q.re, -q.im).exp())
}

/// `e^{z²/4} D_ν(z)`.
pub fn parabolic_cylinder_d_scaled(nu: f64, z: Complex64) -> Result<Complex64> {
    let s = scaled_d(nu, z)?;
    let v = s.scaled();
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(TofError::NonConvergence {
            what: format!("scaled D_{nu} overflows at z = {z}"),
            estimate: f64::INFINITY,
            error: f64::INFINITY,
        });
    }
    Ok(v)
}

/// Scaled value with explicit exponent bookkeeping.
pub fn scaled_d(nu: f64, z: Complex64) -> Result<ScaledD> {
    if !nu.is_finite() || !z.re.is_finite() || !z.im.is_finite() {
        return Err(TofError::invalid("parabolic cylinder arguments must be finite"));
    }
    if nu >= 0.0 && nu == nu.floor() && nu <= 200.0 {
        return Ok(ScaledD::plain(hermite_he(nu as usize, z), DBranch::Hermite));
    }
    let r = z.norm();
    if r <= SERIES_RADIUS {
        return series(nu, z).map(|v| ScaledD::plain(v, DBranch::Series));
    }
    if r > ASYMPTOTIC_RADIUS {
        return asymptotic(nu, z);
    }
    if nu <= -1.0 {
        return integral(nu, z);
    }
    recurrence_up(nu, z)
}

/// Probabilists' Hermite polynomial `He_n(z)`.
fn hermite_he(n: usize, z: Complex64) -> Complex64 {
    let mut h0 = Complex64::new(1.0, 0.0);
    if n == 0 {
        return h0;
    }
    let mut h1 = z;
    for k in 1..n {
        let h2 = z * h1 - h0 * k as f64;
        h0 = h1;
        h1 = h2;
    }
    h1
}

fn series(nu: f64, z: Complex64) -> Result<Complex64> {
    let w = z * z * 0.5;
    let m1 = kummer_m(-0.5 * nu, 0.5, w)?;
    let m2 = kummer_m(0.5 * (1.0 - nu), 1.5, w)?;
    let pre = 2f64.powf(0.5 * nu) * PI.sqrt();
    Ok((m1 * recip_gamma(0.5 * (1.0 - nu)) - z * m2 * (2f64.sqrt() * recip_gamma(-0.5 * nu))) * pre)
}

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec::precise().with_singularity(EndpointSingularity::SqrtOrigin)
}

/// `(1/Γ(−ν)) ∫₀^∞ t^{−ν−1} e^{−zt − t²/2} dt` along a steepest-descent-like
/// contour. Requires `ν < 0`.
fn integral(nu: f64, z: Complex64) -> Result<ScaledD> {
    let p = -nu - 1.0;
    let arg = z.arg();
    let norm = recip_gamma(-nu);
    if arg.abs() <= 0.5 * PI {
        // ray t = e^{iθ} s
        let theta = -arg / 3.0;
        let rot = Complex64::from_polar(1.0, theta);
        let a = (2.0 * theta).cos() * 0.5;
        let b = (z * rot).re.max(0.0);
        let budget = 80.0 + 2.0 * p.abs() * (10.0 + z.norm()).ln();
        let smax = ((b * b + 4.0 * a * budget).sqrt() - b) / (2.0 * a);
        let f = |s: f64| {
            if s <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let t = rot * s;
            (t.ln() * p - z * t - t * t * 0.5).exp() * rot
        };
        let k = (z * rot).im.abs();
        let r = integrate(f, 0.0, smax, &quad_spec().with_wavenumber(k))?;
        Ok(ScaledD { value: r.value * norm, shift: 0.0, branch: DBranch::Integral })
    } else {
        // 0 → −z straight, then −z + s for s ≥ 0.
        let z2 = z * z;
        let shift = (0.5 * z2.re).max(0.0);
        let mz = -z;
        let seg1 = |u: f64| {
            if u <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let t = mz * u;
            (t.ln() * p + z2 * (u - 0.5 * u * u) - shift).exp() * mz
        };
        let r1 = integrate(seg1, 0.0, 1.0, &quad_spec().with_wavenumber(z2.im.abs()))?;
        let budget = 80.0 + 2.0 * p.abs() * (10.0 + z.norm()).ln();
        let smax = (2.0 * budget).sqrt() + 2.0;
        let base = z2 * 0.5 - shift;
        let seg2 = |s: f64| {
            let t = mz + s;
            (t.ln() * p + base - s * s * 0.5).exp()
        };
        let spec2 = QuadratureSpec::precise();
        let r2 = integrate(seg2, 0.0, smax, &spec2)?;
        Ok(ScaledD { value: (r1.value + r2.value) * norm, shift, branch: DBranch::Integral })
    }
}

/// Upward recurrence `Ẽ_{ν+1} = z Ẽ_ν − ν Ẽ_{ν−1}` from orders in `[−3, −1)`,
/// where the integral representation has no endpoint singularity.
fn recurrence_up(nu: f64, z: Complex64) -> Result<ScaledD> {
    let steps = nu.floor() as i64 + 2;
    let start = nu - steps as f64; // in [-2, -1)
    let lo = integral(start - 1.0, z)?;
    let hi = integral(start, z)?;
    // bring both to a common shift
    let shift = lo.shift.max(hi.shift);
    let mut e0 = lo.value * (lo.shift - shift).exp();
    let mut e1 = hi.value * (hi.shift - shift).exp();
    let mut order = start;
    for _ in 0..steps {
        let e2 = z * e1 - e0 * order;
        e0 = e1;
        e1 = e2;
        order += 1.0;
    }
    Ok(ScaledD { value: e1, shift, branch: DBranch::Recurrence })
}

/// Asymptotic expansion for large `|z|`, truncated at the smallest term.
/// The truncation error is bounded by the first omitted term.
fn asymptotic(nu: f64, z: Complex64) -> Result<ScaledD> {
    let inv = (z * z * 2.0).inv();
    let sum = |c: f64| -> (Complex64, f64) {
        // Σ (c)_{2s} (−1)^s... with sign handled by caller
        let mut term = Complex64::new(1.0, 0.0);
        let mut total = term;
        let mut prev = f64::INFINITY;
        for s in 0..200 {
            let sf = s as f64;
            let next = term * inv * ((c + 2.0 * sf) * (c + 2.0 * sf + 1.0) / (sf + 1.0));
            let n = next.norm();
            if n >= prev || n < 1e-17 * total.norm() {
                return (total, n.min(prev));
            }
            prev = n;
            term = next;
            total += term;
        }
        (total, prev)
    };
    let log_z = z.ln();
    // first series: Σ (−1)^s (−ν)_{2s} / (s! (2z²)^s)
    let inv_neg = -inv;
    let first = {
        let mut term = Complex64::new(1.0, 0.0);
        let mut total = term;
        let mut prev = f64::INFINITY;
        let mut err = 0.0;
        for s in 0..200 {
            let sf = s as f64;
            let next = term * inv_neg * ((-nu + 2.0 * sf) * (-nu + 2.0 * sf + 1.0) / (sf + 1.0));
            let n = next.norm();
            if n >= prev || n < 1e-17 * total.norm() {
                err = n.min(prev);
                break;
            }
            prev = n;
            term = next;
            total += term;
        }
        (total, err)
    };
    let arg = z.arg();
    let lead = (log_z * nu).exp() * first.0;
    if first.1 > 1e-10 * first.0.norm() {
        return Err(TofError::NonConvergence {
            what: format!("asymptotic D_{nu} at |z| = {}", z.norm()),
            estimate: lead.norm(),
            error: first.1,
        });
    }
    if arg.abs() <= 0.5 * PI || (-nu >= 0.0 && (-nu).fract() == 0.0) {
        return Ok(ScaledD::plain(lead, DBranch::Asymptotic));
    }
    let (second, err2) = sum(nu + 1.0);
    if err2 > 1e-10 * second.norm() {
        return Err(TofError::NonConvergence {
            what: format!("asymptotic D_{nu} (recessive part) at |z| = {}", z.norm()),
            estimate: second.norm(),
            error: err2,
        });
    }
    let sgn = if arg > 0.0 { 1.0 } else { -1.0 };
    let g = gamma(-nu);
    // −√(2π)/Γ(−ν) e^{±iπν} e^{z²/2} z^{−ν−1}
    let expo = z * z * 0.5 + log_z * (-nu - 1.0);
    let shift = expo.re.max(0.0);
    let coef = -(2.0 * PI).sqrt() / g;
    let phase = Complex64::from_polar(1.0, sgn * PI * nu);
    let extra = Complex64::new(expo.re - shift, expo.im).exp() * phase * coef * second;
    let value = lead * (-shift).exp() + extra;
    Ok(ScaledD { value, shift, branch: DBranch::Asymptotic })
}
