//! Probability current, the quantum-flux arrival distribution, the
//! no-backflow check and the far-field current.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curve::DistributionCurve;
use crate::error::{Result, TofError};
use crate::numerics::quadrature::{integrate_with_breaks, QuadratureSpec};
use crate::numerics::rules::gauss_laguerre;
use crate::states::EvolvedState;
use crate::states::{Factor1D, FieldMode, GaussianMixture, PacketFamily, Term3D, VectorPotential, WavePacketSpec};
use crate::Vec3;

/// Angular nodes of the plane integral (trapezoid, spectrally accurate for
/// smooth periodic integrands).
pub const ANGULAR_NODES: usize = 48;
const LAGUERRE_NODES: usize = 24;

/// An oriented detector surface.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfacePatch {
    /// The plane `z = L` with normal `+ẑ`.
    PlaneZ { l: f64 },
    /// Flat elements given by centroid, unit normal and area.
    Mesh(Vec<SurfaceElement>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceElement {
    pub centroid: Vec3,
    pub normal: Vec3,
    pub area: f64,
}

impl SurfacePatch {
    pub fn plane(l: f64) -> Self {
        SurfacePatch::PlaneZ { l }
    }

    pub fn mesh(elements: Vec<SurfaceElement>) -> Result<Self> {
        for e in &elements {
            let n = dot(e.normal, e.normal).sqrt();
            if (n - 1.0).abs() > 1e-12 || !(e.area >= 0.0) {
                return Err(TofError::invalid("mesh normals must be unit vectors and areas non-negative"));
            }
        }
        Ok(SurfacePatch::Mesh(elements))
    }
}

/// `J` at one point and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentSample {
    pub x: Vec3,
    pub t: f64,
    pub j: Vec3,
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `J = Im[ψ*∇ψ] − qA|ψ|²` for `ψ = ψ_t` written in the gauge `a`.
pub fn current_density(state: &EvolvedState, a: &VectorPotential, x: Vec3) -> Result<Vec3> {
    let (psi, grad) = state.position_with_gradient(x)?;
    let rho = psi.norm_sqr();
    let qa = a.eval(x);
    Ok([0, 1, 2].map(|k| (psi.conj() * grad[k]).im - qa[k] * rho))
}

/// [`current_density`] in the gauge the state is written in.
pub fn current(state: &EvolvedState, x: Vec3) -> Result<Vec3> {
    current_density(state, &state.vector_potential(), x)
}

/// `Π_QF(τ)` for the magnetic Gaussian and the plane `z = L`.
pub fn pi_qf_closed(l: f64, tau: f64) -> f64 {
    let s = 1.0 + tau * tau;
    tau * l * (-l * l / s).exp() / (PI.sqrt() * s.powf(1.5))
}

/// `∫ J · dS` over the surface at time `τ`. May be negative.
pub fn pi_qf(spec: &WavePacketSpec, surface: &SurfacePatch, tau: f64) -> Result<f64> {
    let state = spec.evolved(tau);
    match surface {
        SurfacePatch::Mesh(elements) => {
            elements.iter().map(|e| Ok(dot(current(&state, e.centroid)?, e.normal) * e.area)).sum()
        }
        SurfacePatch::PlaneZ { l } => plane_flux(&state, *l),
    }
}

/// Transverse scale `s` such that `|ψ_t|²` decays like `e^{−r²/s²}` on the
/// plane, when the family makes that exact.
fn laguerre_scale(state: &EvolvedState) -> Option<f64> {
    match state.spec.family {
        PacketFamily::MagneticGaussian { field: FieldMode::Uniform, .. } => Some(1.0),
        PacketFamily::MagneticGaussian { field: FieldMode::ZeroLimit, .. } => Some((1.0 + state.t * state.t).sqrt()),
        _ => None,
    }
}

fn plane_flux(state: &EvolvedState, l: f64) -> Result<f64> {
    let dphi = 2.0 * PI / ANGULAR_NODES as f64;
    let ring = |r: f64| -> Result<f64> {
        let mut s = 0.0;
        for k in 0..ANGULAR_NODES {
            let (sn, cs) = (k as f64 * dphi).sin_cos();
            s += current(state, [r * cs, r * sn, l])?[2];
        }
        Ok(s * dphi)
    };
    if let Some(scale) = laguerre_scale(state) {
        // r = s√u, r dr = s²/2 du
        let rule = gauss_laguerre(LAGUERRE_NODES);
        let mut acc = 0.0;
        for (u, w) in rule.iter() {
            acc += w * u.exp() * ring(scale * u.sqrt())?;
        }
        return Ok(0.5 * scale * scale * acc);
    }
    let r_max = transverse_reach(state)?;
    let breaks: Vec<f64> = (0..=16).map(|i| r_max * i as f64 / 16.0).collect();
    let spec = QuadratureSpec::default().with_tolerances(1e-14, 1e-10);
    let err = std::sync::OnceLock::new();
    let v = integrate_with_breaks(
        |r| match ring(r) {
            Ok(v) => Complex64::new(r * v, 0.0),
            Err(e) => {
                let _ = err.set(e);
                Complex64::new(0.0, 0.0)
            }
        },
        &breaks,
        &spec,
    )?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v.value.re),
    }
}

/// Radius beyond which the packet is negligible on any plane at time `t`.
fn transverse_reach(state: &EvolvedState) -> Result<f64> {
    let m = state.spec.as_mixture().ok_or_else(|| TofError::UnsupportedFamily(state.spec.name().into()))?;
    let mut r: f64 = 0.0;
    for term in &m.terms {
        for f in [&term.u, &term.v] {
            let (lo, hi) = f.position_extent(state.t, 40.0);
            r = r.max(lo.abs()).max(hi.abs());
        }
    }
    Ok(r)
}

pub fn pi_qf_curve(spec: &WavePacketSpec, surface: &SurfacePatch, tau: &[f64]) -> Result<DistributionCurve> {
    let density = tau.par_iter().map(|&t| pi_qf(spec, surface, t)).collect::<Result<Vec<_>>>()?;
    DistributionCurve::new("qf", tau.to_vec(), density)
}

/// Outcome of scanning `J · n` over the surface on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CpcReport {
    pub holds: bool,
    /// Most negative `J · n` seen, if any sample was taken.
    pub worst: Option<(CurrentSample, f64)>,
    pub samples: usize,
    /// Spacing of the time grid (largest gap).
    pub t_resolution: f64,
    pub tolerance: f64,
}

/// Surface points used by the positivity scan.
fn scan_points(surface: &SurfacePatch, state: &EvolvedState) -> Result<Vec<(Vec3, Vec3)>> {
    match surface {
        SurfacePatch::Mesh(el) => Ok(el.iter().map(|e| (e.centroid, e.normal)).collect()),
        SurfacePatch::PlaneZ { l } => {
            let reach = match laguerre_scale(state) {
                Some(s) => 4.0 * s,
                None => transverse_reach(state)?,
            };
            let mut pts = vec![([0.0, 0.0, *l], [0.0, 0.0, 1.0])];
            for i in 1..=12 {
                let r = reach * i as f64 / 12.0;
                for k in 0..16 {
                    let (s, c) = (2.0 * PI * k as f64 / 16.0).sin_cos();
                    pts.push(([r * c, r * s, *l], [0.0, 0.0, 1.0]));
                }
            }
            Ok(pts)
        }
    }
}

/// Checks `J · n ≥ −tol` at every sampled point and time.
pub fn cpc_check(spec: &WavePacketSpec, surface: &SurfacePatch, t_grid: &[f64], tol: f64) -> Result<CpcReport> {
    let rows = t_grid
        .par_iter()
        .map(|&t| {
            let state = spec.evolved(t);
            let mut worst: Option<(CurrentSample, f64)> = None;
            let pts = scan_points(surface, &state)?;
            for (x, n) in &pts {
                let j = current(&state, *x)?;
                let f = dot(j, *n);
                if worst.as_ref().is_none_or(|w| f < w.1) {
                    worst = Some((CurrentSample { x: *x, t, j }, f));
                }
            }
            Ok((worst, pts.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    let samples = rows.iter().map(|r| r.1).sum();
    let worst = rows.into_iter().filter_map(|r| r.0).fold(None, |acc: Option<(CurrentSample, f64)>, w| match acc {
        Some(a) if a.1 <= w.1 => Some(a),
        _ => Some(w),
    });
    let t_resolution = t_grid.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    Ok(CpcReport { holds: worst.as_ref().is_none_or(|w| w.1 >= -tol), worst, samples, t_resolution, tolerance: tol })
}

/// Far-field current and whether the point is inside the far-field regime.
#[derive(Debug, Clone, PartialEq)]
pub struct FarField {
    pub j: Vec3,
    pub warning: Option<String>,
}

/// `J ≈ (x/t⁴) |ψ̃₀(x/t)|²` for a freely evolving packet.
pub fn far_field_flux(spec: &WavePacketSpec, x: Vec3, t: f64) -> Result<FarField> {
    if let PacketFamily::MagneticGaussian { .. } = spec.family {
        return Err(TofError::UnsupportedFamily("far field needs free evolution".into()));
    }
    let p = x.map(|c| c / t);
    let w = spec.initial_momentum(p).norm_sqr() / t.powi(4);
    let j = x.map(|c| c * w);
    let crossing = spec
        .as_mixture()
        .map(|m| m.terms.iter().flat_map(|t| [&t.u, &t.v, &t.z]).map(|f| f.width.powi(-2)).fold(0.0, f64::max))
        .unwrap_or(1.0);
    let ext = spec.momentum_extent();
    let inside = (0..3).all(|k| p[k] >= ext[k].0 && p[k] <= ext[k].1);
    let warning = if t < 100.0 * crossing {
        Some(format!("t = {t} is below 100 crossing times ({crossing})"))
    } else if !inside {
        Some(format!("x/t = {p:?} lies outside the momentum support"))
    } else {
        None
    };
    if let Some(w) = &warning {
        log::warn!("{}", TofError::RegimeViolation(w.clone()));
    }
    Ok(FarField { j, warning })
}

/// Two right-moving 1-D Gaussians (mean momenta 1 and 10, weights 1 and
/// 0.55) with Gaussian transverse factors. Their interference drives `J_z`
/// negative near the origin around `t = 0`.
pub fn backflow_packet() -> Result<WavePacketSpec> {
    let one = Complex64::new(1.0, 0.0);
    let term = |c: Complex64, p: f64| Term3D {
        coeff: c,
        angle: 0.0,
        u: Factor1D::gaussian(0.0, 1.0),
        v: Factor1D::gaussian(0.0, 1.0),
        z: Factor1D::gaussian(p, 0.1 * 2f64.sqrt()),
    };
    let m = GaussianMixture::normalized(vec![term(one, 1.0), term(one * 0.55, 10.0)])?;
    Ok(WavePacketSpec::mixture(m))
}

/// The backflow packet scanned on the plane `z = 0` for `t ∈ [−2, 2]`.
pub fn backflow_demo() -> Result<CpcReport> {
    let spec = backflow_packet()?;
    let pts: Vec<SurfaceElement> = (0..41)
        .map(|i| SurfaceElement { centroid: [0.0, 0.0, -2.0 + 0.1 * i as f64], normal: [0.0, 0.0, 1.0], area: 1.0 })
        .collect();
    let grid: Vec<f64> = (0..81).map(|i| -2.0 + 0.05 * i as f64).collect();
    cpc_check(&spec, &SurfacePatch::mesh(pts)?, &grid, 1e-12)
}
