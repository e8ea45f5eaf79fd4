//! The "standard" arrival-time distribution: Kijowski's form applied to the
//! exactly evolved magnetic Gaussian in the gauge `A′ = A − ηz ẑ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curve::{geometric_grid, DistributionCurve};
use crate::error::{Result, TofError};
use crate::numerics::halfline::{power_gaussian_halfline, HalflineMethod, Sign};
use crate::numerics::quadrature::{integrate, integrate_with_breaks, QuadratureSpec};
use crate::states::{sigma_of, GaugeGeometry};

/// How the `p_z` half-line integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdMethod {
    /// Parabolic cylinder function `D_{−3/2}`.
    ClosedForm,
    /// Quadrature along a steepest-descent ray in the complex `p_z` plane.
    #[default]
    DirectQuadrature,
}

impl StdMethod {
    fn halfline(self) -> HalflineMethod {
        match self {
            StdMethod::ClosedForm => HalflineMethod::Closed,
            StdMethod::DirectQuadrature => HalflineMethod::Contour,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StdConfig {
    pub geometry: GaugeGeometry,
    pub tau_grid: Vec<f64>,
    pub method: StdMethod,
    /// Allows `τ < 0` on the grid.
    pub diagnostic: bool,
    /// Flips the sign of the gauge term in `1/σ(τ)` in the closed-form path
    /// only. Used to check that the method cross-check catches a corrupted `σ`.
    #[doc(hidden)]
    pub corrupt_sigma: bool,
}

impl StdConfig {
    pub fn new(geometry: GaugeGeometry, tau_grid: Vec<f64>) -> Self {
        StdConfig { geometry, tau_grid, method: StdMethod::default(), diagnostic: false, corrupt_sigma: false }
    }

    pub fn with_method(mut self, method: StdMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        let mut c = self.clone();
        c.geometry.eta = eta;
        c
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if self.tau_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(TofError::invalid("tau grid must be strictly increasing"));
        }
        if !self.diagnostic && self.tau_grid.first().is_some_and(|t| *t < 0.0) {
            return Err(TofError::invalid("negative τ needs diagnostic mode"));
        }
        Ok(())
    }
}

/// `Π_STD(τ)` for the magnetic Gaussian in the gauge labelled by `η`.
pub fn pi_std_magnetic(cfg: &StdConfig, tau: f64) -> Result<f64> {
    if tau < 0.0 && !cfg.diagnostic {
        return Err(TofError::invalid("negative τ needs diagnostic mode"));
    }
    let (eta, l) = (cfg.geometry.eta, cfg.geometry.l);
    let sigma =
        if cfg.corrupt_sigma && cfg.method == StdMethod::ClosedForm { sigma_of(tau, -eta) } else { sigma_of(tau, eta) };
    let mut s = 0.0;
    for alpha in Sign::BOTH {
        let k = Complex64::new(alpha.value() * l, 0.0);
        s += power_gaussian_halfline(0.5, sigma, k, 0.0, cfg.method.halfline())?.norm_sqr();
    }
    let v = sigma.norm() / (2.0 * PI.powf(1.5) * (1.0 + tau * tau).sqrt()) * s;
    assert!(v >= 0.0);
    Ok(v)
}

pub fn pi_std_curve(cfg: &StdConfig) -> Result<DistributionCurve> {
    cfg.validate()?;
    let density = cfg.tau_grid.par_iter().map(|&t| pi_std_magnetic(cfg, t)).collect::<Result<Vec<_>>>()?;
    Ok(DistributionCurve::new(format!("std_eta_{}", cfg.geometry.eta), cfg.tau_grid.clone(), density)?
        .with_meta("units", cfg.geometry.units.label())
        .with_meta("eta", cfg.geometry.eta)
        .with_meta("L", cfg.geometry.l)
        .with_meta("B0", cfg.geometry.units.b0)
        .with_meta("method", format!("{:?}", cfg.method)))
}

/// `sup_τ |Π_a − Π_b|` over the shared grid; the configs may differ only in `η`.
pub fn gauge_dependence_metric(a: &StdConfig, b: &StdConfig) -> Result<f64> {
    if a.tau_grid != b.tau_grid {
        return Err(TofError::GridMismatch);
    }
    if a.geometry.l != b.geometry.l || a.geometry.units != b.geometry.units {
        return Err(TofError::invalid("configs must differ only in η"));
    }
    pi_std_curve(a)?.sup_difference(&pi_std_curve(b)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizabilityReport {
    pub eta: f64,
    pub l: f64,
    /// `(T, ∫₀^T Π_STD dτ)`.
    pub partial_integrals: Vec<(f64, f64)>,
    /// Least-squares slope of `ln Π` against `ln τ` over the last decade.
    pub tail_exponent: f64,
    /// Geometric mean of `τ Π(τ)` over the last decade.
    pub tail_coefficient: f64,
    /// `∫₀^{2000} − ∫₀^{1000}`.
    pub doubling_increment: f64,
    pub divergent: bool,
}

impl NormalizabilityReport {
    /// The coefficient quoted for the `c/τ` tail: `√|η| · 0.19 · e^{−L²/2}`.
    pub fn quoted_coefficient(&self) -> f64 {
        self.eta.abs().sqrt() * 0.19 * (-self.l * self.l / 2.0).exp()
    }
}

/// Integrates `Π_STD` out to growing horizons and fits its tail.
pub fn normalizability_report(cfg: &StdConfig) -> Result<NormalizabilityReport> {
    let horizons = [10.0, 100.0, 1e3, 2e3, 1e4];
    let t_end = horizons[horizons.len() - 1];
    let mut breaks = vec![0.0];
    breaks.extend(geometric_grid(1e-2, t_end, 121));
    let spec = QuadratureSpec::default().with_tolerances(1e-12, 1e-10).with_max_subdivisions(4000);
    let mut partial_integrals = Vec::new();
    let mut acc = 0.0;
    let mut from = 0.0;
    for &h in &horizons {
        let mut b: Vec<f64> = breaks.iter().copied().filter(|t| *t > from && *t < h).collect();
        b.insert(0, from);
        b.push(h);
        acc += integrate_with_breaks(|t| Complex64::new(eval_or_nan(cfg, t), 0.0), &b, &spec)?.value.re;
        if !acc.is_finite() {
            return Err(TofError::NonConvergence { what: "Π_STD integral".into(), estimate: acc, error: f64::NAN });
        }
        partial_integrals.push((h, acc));
        from = h;
    }
    let last = geometric_grid(t_end / 10.0, t_end, 41);
    let vals = last.par_iter().map(|&t| pi_std_magnetic(cfg, t)).collect::<Result<Vec<_>>>()?;
    let tail_exponent = log_slope(&last, &vals);
    let tail_coefficient = (last.iter().zip(&vals).map(|(t, v)| (t * v).ln()).sum::<f64>() / last.len() as f64).exp();
    let at = |t: f64| partial_integrals.iter().find(|p| p.0 == t).map(|p| p.1).unwrap_or(f64::NAN);
    Ok(NormalizabilityReport {
        eta: cfg.geometry.eta,
        l: cfg.geometry.l,
        doubling_increment: at(2e3) - at(1e3),
        divergent: tail_exponent > -1.1,
        partial_integrals,
        tail_exponent,
        tail_coefficient,
    })
}

fn eval_or_nan(cfg: &StdConfig, t: f64) -> f64 {
    pi_std_magnetic(cfg, t).unwrap_or(f64::NAN)
}

fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (u, v) = (a.ln(), b.ln());
        sx += u;
        sy += v;
        sxx += u * u;
        sxy += u * v;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaWellReport {
    pub l: f64,
    /// `(τ, Π_STD(τ))`.
    pub values: Vec<(f64, f64)>,
    /// Largest `|Π(τ) − Π(0)|`.
    pub spread: f64,
}

impl DeltaWellReport {
    pub fn constant(&self) -> f64 {
        self.values[0].1
    }

    pub fn is_constant(&self, tol: f64) -> bool {
        self.spread <= tol && self.constant() > 0.0
    }
}

/// `ψ̃₀(p) = √(2/π)/(1 + p²)`, the transform of the bound state `e^{−|z|}`
/// of the well `−δ(z)`.
pub fn delta_well_momentum(p: f64) -> f64 {
    (2.0 / PI).sqrt() / (1.0 + p * p)
}

/// `∫₀^∞ √p ψ̃₀(p) e^{iαpL} dp` along the ray `arg p = α π/4`, which keeps
/// clear of the poles at `±i`.
fn delta_well_halfline(l: f64, alpha: f64) -> Result<Complex64> {
    let spec = QuadratureSpec::precise().with_tolerances(1e-15, 1e-13);
    if l == 0.0 {
        // √(2/π) ∫₀^∞ √p/(1 + p²) dp = √π
        return Ok(Complex64::new(PI.sqrt(), 0.0));
    }
    let dir = Complex64::from_polar(1.0, alpha * l.signum() * PI / 4.0);
    let f = |s: f64| {
        let p = dir * s;
        p.sqrt() * (2.0 / PI).sqrt() / (p * p + 1.0) * (Complex64::new(0.0, alpha * l) * p).exp() * dir
    };
    let top = 60.0 / l.abs();
    let body = integrate(f, 0.0, top, &spec.with_singularity(crate::EndpointSingularity::SqrtOrigin))?;
    Ok(body.value)
}

/// `Π_STD` for the bound state at `τ ∈ {0, 1, 5, 20}`. The state only picks
/// up the phase `e^{iτ/2}`.
pub fn delta_well_constancy(l: f64) -> Result<DeltaWellReport> {
    let halves = [delta_well_halfline(l, 1.0)?, delta_well_halfline(l, -1.0)?];
    let values: Vec<(f64, f64)> = [0.0, 1.0, 5.0, 20.0]
        .iter()
        .map(|&tau| {
            let phase = Complex64::from_polar(1.0, tau / 2.0);
            let s: f64 = halves.iter().map(|h| (phase * h).norm_sqr()).sum();
            (tau, s / (2.0 * PI))
        })
        .collect();
    let spread = values.iter().map(|v| (v.1 - values[0].1).abs()).fold(0.0, f64::max);
    Ok(DeltaWellReport { l, values, spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abk::{pi_ab, Line1DPacket};
    use crate::curve::linear_grid;
    use crate::kijowski::{pi_kij, PlaneDetector};
    use crate::numerics::quadrature::EndpointSingularity;
    use crate::states::magnetic::magnetic_state_momentum_mode;
    use crate::states::{FieldMode, UnitSystem, WavePacketSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(eta: f64, l: f64, method: StdMethod) -> StdConfig {
        StdConfig::new(GaugeGeometry::magnetic(eta, l), vec![]).with_method(method)
    }

    /// Real-axis quadrature of the pre-closed-form expression.
    fn naive(eta: f64, l: f64, tau: f64) -> f64 {
        let sigma = sigma_of(tau, eta);
        let top = (80.0 / sigma.re).sqrt();
        let spec = QuadratureSpec::precise()
            .with_tolerances(1e-15, 1e-12)
            .with_singularity(EndpointSingularity::SqrtOrigin)
            .with_wavenumber(l + sigma.im.abs() * top);
        let mut s = 0.0;
        for a in [1.0, -1.0] {
            let v = integrate(
                |p| p.sqrt() * (-sigma * (0.5 * p * p) + Complex64::new(0.0, a * p * l)).exp(),
                0.0,
                top,
                &spec,
            )
            .unwrap()
            .value;
            s += v.norm_sqr();
        }
        sigma.norm() / (2.0 * PI.powf(1.5) * (1.0 + tau * tau).sqrt()) * s
    }

    #[test]
    fn closed_form_against_direct_quadrature() {
        for (eta, l, tau) in [(1.0, 1.0, 1.0), (0.5, 3.0, 2.0), (-0.7, 5.0, 0.3), (0.0, 2.0, 4.0)] {
            let want = naive(eta, l, tau);
            for m in [StdMethod::ClosedForm, StdMethod::DirectQuadrature] {
                let got = pi_std_magnetic(&cfg(eta, l, m), tau).unwrap();
                assert!((got - want).abs() < 1e-9 * want.max(1e-6), "{m:?} η={eta} τ={tau}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn methods_agree_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let eta = rng.random_range(-2.0..2.0);
            let l = rng.random_range(0.0..20.0);
            let tau = rng.random_range(0.0..100.0);
            let a = pi_std_magnetic(&cfg(eta, l, StdMethod::ClosedForm), tau).unwrap();
            let b = pi_std_magnetic(&cfg(eta, l, StdMethod::DirectQuadrature), tau).unwrap();
            assert!((a - b).abs() <= 1e-6 * a.abs().max(b.abs()) + 1e-300, "η={eta} L={l} τ={tau}: {a} vs {b}");
        }
    }

    #[test]
    fn corrupted_sigma_breaks_the_cross_check() {
        let mut bad = cfg(0.5, 3.0, StdMethod::ClosedForm);
        bad.corrupt_sigma = true;
        let good = pi_std_magnetic(&cfg(0.5, 3.0, StdMethod::DirectQuadrature), 2.0).unwrap();
        let wrong = pi_std_magnetic(&bad, 2.0).unwrap();
        assert!((wrong - good).abs() > 1e-3 * good);
    }

    #[test]
    fn eta_zero_is_the_free_kijowski_value() {
        let spec = WavePacketSpec::free_gaussian(0.5, 0.0).unwrap();
        let line = Line1DPacket::gaussian(0.0, 0.5f64.sqrt(), 3.0).unwrap();
        for tau in [0.0, 0.5, 2.0, 10.0] {
            let s = pi_std_magnetic(&cfg(0.0, 3.0, StdMethod::ClosedForm), tau).unwrap();
            let k = pi_kij(&spec, PlaneDetector::new(3.0), tau).unwrap();
            let a = pi_ab(&line, tau).unwrap();
            assert!((s - k).abs() < 1e-6 && (s - a).abs() < 1e-6, "τ={tau}: {s} {k} {a}");
        }
    }

    #[test]
    fn field_mode_leaves_the_longitudinal_factor_alone() {
        // |ψ̃| at fixed p_z is the same in both modes, so Π_STD is too
        for (t, eta) in [(0.5, 0.3), (4.0, -1.0)] {
            let a = magnetic_state_momentum_mode([0.2, -0.4, 1.1], t, eta, FieldMode::Uniform).norm();
            let b = magnetic_state_momentum_mode([0.2, -0.4, 1.1], t, eta, FieldMode::ZeroLimit).norm();
            assert!((a - b).abs() < 1e-15);
        }
        let mut g = GaugeGeometry::magnetic(0.5, 2.0);
        g.units = UnitSystem::magnetic_zero_field();
        let grid = linear_grid(0.0, 20.0, 101);
        let c = StdConfig::new(g, grid.clone());
        let spec = WavePacketSpec::free_gaussian(0.5, 0.0).unwrap();
        let free: Vec<f64> = grid.iter().map(|&t| pi_kij(&spec, PlaneDetector::new(2.0), t).unwrap()).collect();
        let std = pi_std_curve(&c).unwrap();
        let d = std.density.iter().zip(&free).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d > 1e-3);
    }

    #[test]
    fn continuity_in_eta() {
        for tau in [0.5, 3.0, 30.0] {
            let c = pi_std_magnetic(&cfg(0.0, 2.0, StdMethod::ClosedForm), tau).unwrap();
            for e in [1e-6, -1e-6] {
                let v = pi_std_magnetic(&cfg(e, 2.0, StdMethod::ClosedForm), tau).unwrap();
                assert!((v - c).abs() < 1e-3 * c.max(1e-3), "τ={tau}");
            }
        }
    }

    #[test]
    fn gauge_dependence() {
        let grid = linear_grid(0.0, 300.0, 301);
        let a = StdConfig::new(GaugeGeometry::magnetic(0.0, 100.0), grid.clone());
        let b = a.with_eta(0.5);
        assert_eq!(gauge_dependence_metric(&a, &a).unwrap(), 0.0);
        let d = gauge_dependence_metric(&a, &b).unwrap();
        let peak = pi_std_curve(&a).unwrap().peak_value();
        assert!(d > 0.01 * peak, "{d} vs {peak}");
        let other = StdConfig::new(GaugeGeometry::magnetic(0.5, 100.0), linear_grid(0.0, 300.0, 30));
        assert!(matches!(gauge_dependence_metric(&a, &other), Err(TofError::GridMismatch)));
    }

    #[test]
    fn tail_coefficient_at_small_eta() {
        // τ Π_STD → √|η| · 2^{−1/2} Γ(3/4)² / π^{3/2} for ηL² → 0
        let limit = libm::tgamma(0.75).powi(2) / (2f64.sqrt() * PI.powf(1.5));
        let eta = 1e-2;
        let v = 1e6 * pi_std_magnetic(&cfg(eta, 1.0, StdMethod::DirectQuadrature), 1e6).unwrap();
        assert!((v / (eta.sqrt() * limit) - 1.0).abs() < 0.03, "{v}");
    }

    #[test]
    fn normalizability() {
        let free = normalizability_report(&cfg(0.0, 1.0, StdMethod::DirectQuadrature)).unwrap();
        assert!(!free.divergent, "{free:?}");
        assert!(free.partial_integrals.last().unwrap().1 <= 1.0);
        let r = normalizability_report(&cfg(0.5, 1.0, StdMethod::DirectQuadrature)).unwrap();
        assert!(r.divergent);
        assert!((r.tail_exponent + 1.0).abs() < 0.05, "{r:?}");
        let log_growth = r.tail_coefficient * 2f64.ln();
        assert!((r.doubling_increment / log_growth - 1.0).abs() < 0.15, "{r:?}");
    }

    #[test]
    fn delta_well_is_constant() {
        let r = delta_well_constancy(1.0).unwrap();
        assert!(r.is_constant(1e-8));
        // oracle: real-axis quadrature of the same half-line integrals
        let spec = QuadratureSpec::precise()
            .with_tolerances(1e-13, 1e-10)
            .with_singularity(EndpointSingularity::SqrtOrigin)
            .with_wavenumber(1.0);
        let mut s = 0.0;
        for a in [1.0, -1.0] {
            let head = integrate(
                |p| Complex64::new(0.0, a * p).exp() * p.sqrt() * delta_well_momentum(p),
                0.0,
                2000.0,
                &spec.with_max_subdivisions(40000),
            )
            .unwrap()
            .value;
            // ∫_P^∞ √p e^{iap}/(1+p²) ≈ √(2/π) · e^{iaP}/(ia) · P^{−3/2}
            let p = 2000.0f64;
            let tail = (2.0 / PI).sqrt() * Complex64::new(0.0, a * p).exp() / Complex64::new(0.0, -a) * p.powf(-1.5);
            s += (head + tail).norm_sqr();
        }
        let want = s / (2.0 * PI);
        assert!((r.constant() - want).abs() < 1e-7, "{} vs {want}", r.constant());
        assert!(delta_well_constancy(0.0).unwrap().is_constant(1e-8));
    }
}
