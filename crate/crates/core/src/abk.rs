//! Free one-dimensional arrival-time distribution built from half-line
//! `√|p|`-weighted momentum integrals, its position-space form, the mean
//! arrival time and the non-detection probability.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curve::{hybrid_grid, power_law_tail, DistributionCurve};
use crate::error::{Result, TofError};
use crate::numerics::halfline::{HalflineMethod, Sign};
use crate::numerics::quadrature::{integrate, EndpointSingularity, QuadratureSpec};
use crate::states::Mixture1D;
use crate::Arrival;

/// Classical free time of flight from `z` to `L` with momentum `p`.
pub fn classical_tof(z: f64, p: f64, l: f64) -> Arrival {
    let d = l - z;
    if d == 0.0 {
        return Arrival::At(0.0);
    }
    if p != 0.0 && p.signum() == d.signum() {
        Arrival::At(d / p)
    } else {
        Arrival::Never
    }
}

type AmplitudeFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Momentum amplitude of a line packet.
#[derive(Clone)]
pub enum MomentumAmplitude {
    Mixture(Mixture1D),
    /// Arbitrary amplitude, negligible outside `support`.
    Function {
        f: AmplitudeFn,
        support: (f64, f64),
    },
}

impl fmt::Debug for MomentumAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentumAmplitude::Mixture(m) => f.debug_tuple("Mixture").field(m).finish(),
            MomentumAmplitude::Function { support, .. } => {
                f.debug_struct("Function").field("support", support).finish_non_exhaustive()
            }
        }
    }
}

/// Initial momentum amplitude `ψ̃₀(p)` together with the arrival point `L`.
#[derive(Debug, Clone)]
pub struct Line1DPacket {
    amplitude: MomentumAmplitude,
    /// Extra phase `e^{−ipa}` applied on top of `amplitude`.
    shift: f64,
    pub l: f64,
}

const NORM_TOL: f64 = 1e-10;

impl Line1DPacket {
    pub fn from_mixture(m: Mixture1D, l: f64) -> Result<Self> {
        let n = m.norm_sq()?;
        if (n - 1.0).abs() > NORM_TOL {
            return Err(TofError::NotNormalized(n));
        }
        Ok(Line1DPacket { amplitude: MomentumAmplitude::Mixture(m), shift: 0.0, l })
    }

    /// Gaussian with mean momentum `p̄` and momentum spread `σ_p`, centred at the origin.
    pub fn gaussian(p_mean: f64, sigma_p: f64, l: f64) -> Result<Self> {
        Self::from_mixture(Mixture1D::gaussian(p_mean, sigma_p, 0.0)?, l)
    }

    pub fn from_fn<F>(f: F, support: (f64, f64), l: f64) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        if !(support.0 < support.1) {
            return Err(TofError::invalid("empty momentum support"));
        }
        let p = Line1DPacket { amplitude: MomentumAmplitude::Function { f: Arc::new(f), support }, shift: 0.0, l };
        let n = p.norm_sq()?;
        if (n - 1.0).abs() > NORM_TOL {
            return Err(TofError::NotNormalized(n));
        }
        Ok(p)
    }

    pub fn amplitude(&self) -> &MomentumAmplitude {
        &self.amplitude
    }

    pub fn with_l(&self, l: f64) -> Self {
        Line1DPacket { l, ..self.clone() }
    }

    /// Multiplies `ψ̃₀(p)` by `e^{−ipa}`, i.e. translates the packet by `a`.
    pub fn translated(&self, a: f64) -> Self {
        match &self.amplitude {
            MomentumAmplitude::Mixture(m) => {
                Line1DPacket { amplitude: MomentumAmplitude::Mixture(m.translated(a)), ..self.clone() }
            }
            MomentumAmplitude::Function { .. } => Line1DPacket { shift: self.shift + a, ..self.clone() },
        }
    }

    pub fn momentum(&self, p: f64) -> Complex64 {
        let v = match &self.amplitude {
            MomentumAmplitude::Mixture(m) => m.amplitude(p),
            MomentumAmplitude::Function { f, .. } => f(p),
        };
        if self.shift == 0.0 {
            v
        } else {
            v * Complex64::new(0.0, -p * self.shift).exp()
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match &self.amplitude {
            MomentumAmplitude::Mixture(m) => m.extent(40.0),
            MomentumAmplitude::Function { support, .. } => *support,
        }
    }

    fn norm_sq(&self) -> Result<f64> {
        let (lo, hi) = self.support();
        let spec = QuadratureSpec::precise();
        let mut s = 0.0;
        for (a, b) in [(lo, hi.min(0.0)), (lo.max(0.0), hi)] {
            if b > a {
                s += integrate(|p| Complex64::new(self.momentum(p).norm_sqr(), 0.0), a, b, &spec)?.value.re;
            }
        }
        Ok(s)
    }

    /// Mean and spread of `|ψ̃₀(p)|²`.
    pub fn momentum_moments(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.support();
        let spec = QuadratureSpec::default();
        let m = |k: i32| -> Result<f64> {
            let mut s = 0.0;
            for (a, b) in [(lo, hi.min(0.0)), (lo.max(0.0), hi)] {
                if b > a {
                    s += integrate(|p| Complex64::new(p.powi(k) * self.momentum(p).norm_sqr(), 0.0), a, b, &spec)?
                        .value
                        .re;
                }
            }
            Ok(s)
        };
        let mean = m(1)?;
        let var = (m(2)? - mean * mean).max(0.0);
        Ok((mean, var.sqrt()))
    }
}

/// How the half-line momentum integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AbMethod {
    /// Closed forms for Gaussian mixtures, quadrature otherwise.
    #[default]
    Auto,
    /// Adaptive quadrature on the momentum axis.
    Quadrature,
}

/// `∫ θ(αp) √|p| ψ̃₀(p) e^{−iτp²/2 + ipL} dp` for `α = +, −`.
pub fn halfline_amplitudes(packet: &Line1DPacket, tau: f64, method: AbMethod) -> Result<[Complex64; 2]> {
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (slot, alpha) in out.iter_mut().zip(Sign::BOTH) {
        *slot = match (&packet.amplitude, method) {
            (MomentumAmplitude::Mixture(m), AbMethod::Auto) => {
                m.sqrt_halfline(tau, packet.l - packet.shift, alpha, HalflineMethod::Closed)?
            }
            _ => halfline_by_quadrature(packet, tau, alpha)?,
        };
    }
    Ok(out)
}

fn halfline_by_quadrature(packet: &Line1DPacket, tau: f64, alpha: Sign) -> Result<Complex64> {
    let (lo, hi) = packet.support();
    let a = alpha.value();
    let top = if a > 0.0 { hi } else { -lo };
    if top <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let spec = QuadratureSpec::precise()
        .with_tolerances(1e-13, 1e-11)
        .with_singularity(EndpointSingularity::SqrtOrigin)
        .with_wavenumber(packet.l.abs() + tau.abs() * top);
    let r = integrate(
        |q| {
            let p = a * q;
            packet.momentum(p) * q.sqrt() * Complex64::new(0.0, -0.5 * tau * p * p + p * packet.l).exp()
        },
        0.0,
        top,
        &spec,
    )?;
    Ok(r.value)
}

/// Arrival-time density `Π_AB(τ)`.
pub fn pi_ab(packet: &Line1DPacket, tau: f64) -> Result<f64> {
    pi_ab_with(packet, tau, AbMethod::Auto)
}

pub fn pi_ab_with(packet: &Line1DPacket, tau: f64, method: AbMethod) -> Result<f64> {
    let [a, b] = halfline_amplitudes(packet, tau, method)?;
    let v = (a.norm_sqr() + b.norm_sqr()) / (2.0 * PI);
    assert!(v >= 0.0, "negative arrival density {v} at τ = {tau}");
    Ok(v)
}

/// `Π_AB` on `grid`, evaluated in parallel.
pub fn pi_ab_curve(packet: &Line1DPacket, grid: &[f64], method: AbMethod) -> Result<DistributionCurve> {
    let density = grid.par_iter().map(|&t| pi_ab_with(packet, t, method)).collect::<Result<Vec<_>>>()?;
    Ok(DistributionCurve::new("abk", grid.to_vec(), density)?
        .with_meta("L", packet.l)
        .with_meta("method", format!("{method:?}")))
}

/// Symmetric τ grid whose ends sit where `Π_AB < 1e−6 · peak` and the mass
/// left beyond them, about `τ·Π_AB(τ)`, is below `2e−5`.
pub fn ab_tau_grid(packet: &Line1DPacket, n_core: usize, n_tail: usize) -> Result<Vec<f64>> {
    let (mean, spread) = packet.momentum_moments()?;
    let (xlo, xhi) = match &packet.amplitude {
        MomentumAmplitude::Mixture(m) => m.position_extent(0.0, 10.0),
        MomentumAmplitude::Function { .. } => (-10.0, 10.0),
    };
    let dist = (packet.l - packet.shift - xlo).abs().max((packet.l - packet.shift - xhi).abs());
    let core = (2.0 * dist / (mean.abs() + spread).max(1e-3)).max(1.0);
    let probe = hybrid_grid(core, 201, core, 0);
    let peak = probe.par_iter().map(|&t| pi_ab(packet, t)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    let mut t_max = 10.0 * core;
    while t_max < 1e12 {
        let ends = pi_ab(packet, t_max)?.max(pi_ab(packet, -t_max)?);
        if ends < 1e-6 * peak && ends * t_max < 2e-5 {
            break;
        }
        t_max *= 10.0;
    }
    Ok(hybrid_grid(core, n_core, t_max, n_tail))
}

/// Non-detection probability `∫₀^∞ Π_AB(−τ) dτ` from a sampled curve, with a
/// power-law extrapolation beyond the most negative grid point.
pub fn nondetection_ab(curve: &DistributionCurve) -> Result<f64> {
    let (tau, rho) = (&curve.tau, &curve.density);
    let n_neg = tau.iter().take_while(|t| **t <= 0.0).count();
    if n_neg < 3 {
        return Err(TofError::InsufficientTailCoverage(f64::INFINITY));
    }
    let mut body = crate::curve::trapezoid(&tau[..n_neg], &rho[..n_neg]);
    if tau[n_neg - 1] < 0.0 && n_neg < tau.len() {
        // close the gap up to τ = 0 by linear interpolation
        let (t0, t1) = (tau[n_neg - 1], tau[n_neg]);
        let r0 = rho[n_neg - 1];
        let rz = r0 + (rho[n_neg] - r0) * (0.0 - t0) / (t1 - t0);
        body += 0.5 * (0.0 - t0) * (r0 + rz);
    }
    let tail = power_law_tail(&tau[..n_neg], &rho[..n_neg]);
    if !(tail <= 1e-4) {
        return Err(TofError::InsufficientTailCoverage(tail));
    }
    Ok((body + tail).clamp(0.0, 1.0))
}

/// Whether `|ψ̃₀(p)| / |p|^{3/2}` falls steadily to zero over `p = 10^{−k}`, `k = 2..8`.
pub fn moment_condition_check(packet: &Line1DPacket) -> bool {
    let r: Vec<f64> = (2..=8)
        .map(|k| {
            let p = 10f64.powi(-k);
            (packet.momentum(p).norm() + packet.momentum(-p).norm()) / p.powf(1.5)
        })
        .collect();
    r.windows(2).all(|w| w[1] < w[0]) && r[r.len() - 1] < 0.1 * r[0]
}

/// Settings for the position-space form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeavensOptions {
    /// Initial half-width of the window around `L`.
    pub window: f64,
    /// Largest wavenumber present in `ψ_τ`; sets the initial panel count.
    pub wavenumber: f64,
    /// Half-width of the region around `L` handled by a quadratic expansion.
    pub inner: f64,
    pub abs_tol: f64,
}

impl Default for LeavensOptions {
    fn default() -> Self {
        LeavensOptions { window: 40.0, wavenumber: 1.0, inner: 1e-3, abs_tol: 1e-11 }
    }
}

/// `Π_AB(τ)` from the position-space wave function `ψ_τ` alone.
pub fn pi_ab_leavens<F>(psi_tau: F, l: f64, opts: &LeavensOptions) -> Result<f64>
where
    F: Fn(f64) -> Complex64,
{
    let psi_l = psi_tau(l);
    let eps = 1e-9;
    let jump = (psi_tau(l + eps) - psi_tau(l - eps)).norm();

    let d = opts.inner;
    let (up, dn) = (psi_tau(l + d), psi_tau(l - d));
    let d1 = (up - dn) / (2.0 * d);
    let d2 = (up - psi_l * 2.0 + dn) / (d * d);

    let mut scale = psi_l.norm().max(up.norm()).max(dn.norm());
    let mut sides = [Complex64::new(0.0, 0.0); 2];
    for (slot, dir) in sides.iter_mut().zip([1.0, -1.0]) {
        let (zmax, far) = flat_edge(&psi_tau, l, dir, opts.window)?;
        let err = RefCell::new(None);
        let k = opts.wavenumber.max(1.0) + zmax.sqrt();
        let (u0, u1) = (d.sqrt(), zmax.sqrt());
        let spec = QuadratureSpec::default()
            .with_tolerances(opts.abs_tol, 1e-10)
            .with_max_subdivisions(20000)
            .with_wavenumber(k * (zmax - d) / (u1 - u0));
        let body = integrate(
            |u| {
                let x = u * u;
                let v = psi_tau(l + dir * x);
                if !v.is_finite() {
                    err.borrow_mut().get_or_insert(TofError::invalid("non-finite wave function"));
                }
                (v - psi_l) * (2.0 / x)
            },
            u0,
            u1,
            &spec,
        )?;
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        scale = scale.max(far.norm());
        let near = d1 * (2.0 * dir * d.sqrt()) + d2 * (d.powf(1.5) / 3.0);
        let tail = (far - psi_l) * (2.0 / zmax.sqrt());
        *slot = body.value + near + tail;
    }
    if jump > 1e-6 * scale.max(1e-300) {
        return Err(TofError::SingularityNotRegularized(jump));
    }
    let [r, lf] = sides;
    let mut total = 0.0;
    for alpha in [1.0, -1.0] {
        let i = r * Complex64::new(1.0, alpha) + lf * Complex64::new(1.0, -alpha);
        total += i.norm_sqr();
    }
    Ok(total / (32.0 * PI))
}

/// Doubles the window until `ψ_τ` is flat beyond it; returns the window and
/// the value it settles to.
fn flat_edge<F: Fn(f64) -> Complex64>(psi: &F, l: f64, dir: f64, start: f64) -> Result<(f64, Complex64)> {
    let mut z = start.max(1.0);
    let mut peak = 0.0f64;
    for _ in 0..40 {
        let vals: Vec<Complex64> = [1.0, 1.25, 1.5, 1.75, 2.0].iter().map(|s| psi(l + dir * z * s)).collect();
        peak = vals.iter().fold(peak, |m, v| m.max(v.norm()));
        let spread = vals.iter().map(|v| (v - vals[0]).norm()).fold(0.0, f64::max);
        if spread <= 1e-13 * peak.max(psi(l).norm()).max(1e-300) || peak == 0.0 {
            return Ok((z, vals[0]));
        }
        z *= 2.0;
    }
    Err(TofError::NonConvergence { what: "Leavens window".into(), estimate: z, error: f64::NAN })
}

/// Position-space form for a Gaussian mixture evolved to time `τ`.
pub fn pi_ab_leavens_mixture(m: &Mixture1D, l: f64, tau: f64) -> Result<f64> {
    let (lo, hi) = m.position_extent(tau, 40.0);
    let (plo, phi) = m.extent(40.0);
    let opts = LeavensOptions {
        window: (l - lo).abs().max((hi - l).abs()),
        wavenumber: plo.abs().max(phi.abs()),
        ..Default::default()
    };
    let err = RefCell::new(None);
    let v = pi_ab_leavens(
        |z| match m.position(z, tau) {
            Ok((v, _)) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        l,
        &opts,
    )?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `⟨ψ|τ̂|ψ⟩` from the initial position-space wave function on `support`.
///
/// Folding the sign kernel onto `z > z′` gives
/// `−½ ∫∫_{z>z′} (2L − z − z′) Im[ψ₀*(z) ψ₀(z′)]`.
pub fn abk_mean_arrival<F>(psi0: F, support: (f64, f64), l: f64) -> Result<f64>
where
    F: Fn(f64) -> Complex64,
{
    let (a, b) = support;
    if !(a < b) {
        return Err(TofError::invalid("empty support"));
    }
    let spec = QuadratureSpec::default().with_tolerances(1e-12, 1e-11).with_max_subdivisions(4000);
    let err = RefCell::new(None);
    let outer = integrate(
        |z| {
            let pz = psi0(z).conj();
            let inner = integrate(|zp| Complex64::new((2.0 * l - z - zp) * (pz * psi0(zp)).im, 0.0), a, z, &spec);
            match inner {
                Ok(r) => r.value,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        a,
        b,
        &spec,
    )?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(-0.5 * outer.value.re)
}
