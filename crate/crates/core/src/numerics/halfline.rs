//! Half-line Gaussian integrals `∫₀^∞ p^μ e^{−σp²/2 + ikp} dp`.
//!
//! Two independent routes are provided. The closed route uses
//! `σ^{−(μ+1)/2} Γ(μ+1) Ẽ_{−μ−1}(−ik/√σ)` with the scaled parabolic cylinder
//! function. The contour route integrates numerically along a path through
//! the saddle point `p* = ik/σ`, which removes the fast oscillation of the
//! real-axis integrand when `|k|` is large.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::parabolic::scaled_d;
use super::quadrature::{integrate, integrate_with_breaks, EndpointSingularity, QuadratureSpec};
use super::special::gamma;
use crate::error::{Result, TofError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HalflineMethod {
    #[default]
    Closed,
    Contour,
}

/// Sign `α = ±` of the wavenumber in `e^{iαpL}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

/// `∫₀^∞ √p e^{−σp²/2 + i·sign·pL} dp` by the closed form, falling back to the
/// contour route if the special function does not converge.
pub fn halfline_sqrtp_gaussian_integral(sigma: Complex64, l: f64, sign: Sign) -> Result<Complex64> {
    let k = Complex64::new(sign.value() * l, 0.0);
    match power_gaussian_halfline(0.5, sigma, k, 0.0, HalflineMethod::Closed) {
        Err(TofError::NonConvergence { .. }) => power_gaussian_halfline(0.5, sigma, k, 0.0, HalflineMethod::Contour),
        other => other,
    }
}

fn check_sigma(sigma: Complex64) -> Result<()> {
    if !(sigma.re.is_finite() && sigma.im.is_finite()) {
        return Err(TofError::invalid("sigma must be finite"));
    }
    if sigma.norm() == 0.0 {
        return Err(TofError::DivergentIntegral("sigma = 0".into()));
    }
    if sigma.re < 0.0 {
        return Err(TofError::DivergentIntegral(format!("Re sigma = {} < 0", sigma.re)));
    }
    Ok(())
}

/// `e^{log_scale} ∫₀^∞ p^μ e^{−σp²/2 + ikp} dp` for `μ > −1`, `Re σ ≥ 0`.
pub fn power_gaussian_halfline(
    mu: f64,
    sigma: Complex64,
    k: Complex64,
    log_scale: f64,
    method: HalflineMethod,
) -> Result<Complex64> {
    check_sigma(sigma)?;
    if !(mu > -1.0) || !mu.is_finite() {
        return Err(TofError::invalid(format!("power mu = {mu} must exceed -1")));
    }
    if !(k.re.is_finite() && k.im.is_finite()) {
        return Err(TofError::invalid("wavenumber must be finite"));
    }
    let v = match method {
        HalflineMethod::Closed => closed(mu, sigma, k, log_scale)?,
        HalflineMethod::Contour => contour(mu, sigma, k, log_scale)?,
    };
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(TofError::NonConvergence {
            what: "half-line integral overflow".into(),
            estimate: f64::INFINITY,
            error: f64::INFINITY,
        });
    }
    Ok(v)
}

fn closed(mu: f64, sigma: Complex64, k: Complex64, log_scale: f64) -> Result<Complex64> {
    let rs = sigma.sqrt();
    let z = -Complex64::i() * k / rs;
    let d = scaled_d(-mu - 1.0, z)?;
    let pre = (sigma.ln() * (-(mu + 1.0) * 0.5)).exp() * gamma(mu + 1.0);
    Ok(d.value * pre * (d.shift + log_scale).exp())
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::precise()
}

fn contour(mu: f64, sigma: Complex64, k: Complex64, log_scale: f64) -> Result<Complex64> {
    let pstar = Complex64::i() * k / sigma;
    let arg_s = sigma.arg();
    let gstar = -k * k / (sigma * 2.0);
    if pstar.re > 0.0 {
        let shift = gstar.re.max(0.0);
        // segment 1: p = p* v², v ∈ [0, 1]
        let lp = pstar.ln();
        let seg1 = |v: f64| {
            if v <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let w = v * v;
            let e = gstar * (2.0 * w - w * w) + (lp + w.ln()) * mu + lp - shift + log_scale;
            e.exp() * (2.0 * v)
        };
        let panels = ((2.0 * gstar.im.abs() / PI).ceil() as usize + 1).min(20_000);
        let breaks: Vec<f64> = (0..=panels).map(|i| (i as f64 / panels as f64).sqrt()).collect();
        let r1 = integrate_with_breaks(seg1, &breaks, &spec().with_max_subdivisions(4 * panels + 2000))?;
        // segment 2: p = p* + e^{−i argσ/2} s
        let dir = Complex64::from_polar(1.0, -0.5 * arg_s);
        let a = sigma.norm();
        let smax = ((2.0 * (80.0 + mu.abs() * (10.0 + pstar.norm()).ln().max(1.0))) / a).sqrt() + 1.0 / a.sqrt();
        let base = gstar - shift + log_scale;
        let seg2 = |s: f64| {
            let p = pstar + dir * s;
            (p.ln() * mu + base - a * s * s * 0.5).exp() * dir
        };
        let r2 = integrate(seg2, 0.0, smax, &spec())?;
        Ok((r1.value + r2.value) * shift.exp())
    } else {
        let phi = if k.norm() == 0.0 {
            -0.5 * arg_s
        } else {
            let delta = wrap(k.arg() - arg_s);
            let margin = 1e-3;
            let lo = 0.5 * (arg_s - 0.5 * PI) + margin;
            let hi = 0.5 * (arg_s + 0.5 * PI) - margin;
            let c = (0.5 * PI - delta).clamp(lo, hi); // c = argσ + φ
            c - arg_s
        };
        let dir = Complex64::from_polar(1.0, phi);
        let a = (sigma * dir * dir).re;
        let b = (k * dir).im;
        if a <= 0.0 {
            return Err(TofError::DivergentIntegral("no convergent ray for half-line integral".into()));
        }
        let budget = 80.0 + mu.abs() * 10.0;
        let smax = ((b * b + 2.0 * a * budget).sqrt() - b.min(0.0) * 2.0) / a + 1.0;
        let ikd = Complex64::i() * k * dir;
        let sd = sigma * dir * dir * 0.5;
        let lndir = dir.ln();
        let f = |s: f64| {
            if s <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let e = (lndir + s.ln()) * mu + lndir - sd * s * s + ikd * s + log_scale;
            e.exp()
        };
        let sp = spec().with_singularity(EndpointSingularity::SqrtOrigin).with_wavenumber(ikd.im);
        Ok(integrate(f, 0.0, smax, &sp)?.value)
    }
}

fn wrap(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Real-axis quadrature, truncated where the Gaussian envelope drops below 1e-16.
    fn direct(mu: f64, sigma: Complex64, l: f64) -> Complex64 {
        let pmax = (2.0 * 40.0 / sigma.re).sqrt() + 2.0;
        let spec = QuadratureSpec::precise()
            .with_singularity(EndpointSingularity::SqrtOrigin)
            .with_wavenumber(l.abs() + sigma.im.abs() * pmax)
            .with_max_subdivisions(50_000);
        integrate(|p: f64| (-sigma * p * p * 0.5 + c(0.0, l * p)).exp() * p.powf(mu), 0.0, pmax, &spec).unwrap().value
    }

    #[test]
    fn real_gaussian_moment() {
        let v = halfline_sqrtp_gaussian_integral(c(1.0, 0.0), 0.0, Sign::Plus).unwrap();
        let want = 2f64.powf(-0.25) * gamma(0.75);
        assert!((v.re - want).abs() < 1e-14 && v.im.abs() < 1e-14);
        let w = power_gaussian_halfline(0.5, c(1.0, 0.0), c(0.0, 0.0), 0.0, HalflineMethod::Contour).unwrap();
        assert!((w - v).norm() < 1e-13);
    }

    #[test]
    fn conjugation_symmetry_for_real_sigma() {
        for l in [0.3, 2.0, 17.0] {
            let a = halfline_sqrtp_gaussian_integral(c(1.0, 0.0), l, Sign::Plus).unwrap();
            let b = halfline_sqrtp_gaussian_integral(c(1.0, 0.0), l, Sign::Minus).unwrap();
            assert!((a - b.conj()).norm() < 1e-14 * a.norm());
        }
    }

    #[test]
    fn complex_sigma_against_direct_quadrature() {
        let s = c(1.0, 1.0);
        let want = direct(0.5, s, 2.0);
        for m in [HalflineMethod::Closed, HalflineMethod::Contour] {
            let got = power_gaussian_halfline(0.5, s, c(2.0, 0.0), 0.0, m).unwrap();
            assert!((got - want).norm() < 1e-10 * want.norm(), "{m:?}: {got} vs {want}");
        }
    }

    #[test]
    fn closed_and_contour_agree_far_out() {
        // regime of long flight distances: large k, small to large |σ|
        for (s, k) in [
            (c(1.0, 3.0), 100.0),
            (c(1.0, 0.1), 100.0),
            (c(0.01, 2.0), -100.0),
            (c(0.0, 50.0), 100.0),
            (c(0.0, -7.0), 30.0),
            (c(0.3, -0.2), -40.0),
        ] {
            let a = power_gaussian_halfline(0.5, s, c(k, 0.0), 0.0, HalflineMethod::Closed).unwrap();
            let b = power_gaussian_halfline(0.5, s, c(k, 0.0), 0.0, HalflineMethod::Contour).unwrap();
            assert!((a - b).norm() < 1e-9 * b.norm(), "sigma={s} k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn complex_wavenumber_and_higher_powers() {
        let s = c(0.8, 0.4);
        for mu in [0.5, 1.5, 2.5, 3.5] {
            for k in [c(1.0, 0.5), c(-2.0, 1.0), c(3.0, -0.3)] {
                let a = power_gaussian_halfline(mu, s, k, 0.0, HalflineMethod::Closed).unwrap();
                let b = power_gaussian_halfline(mu, s, k, 0.0, HalflineMethod::Contour).unwrap();
                assert!((a - b).norm() < 1e-10 * b.norm(), "mu={mu} k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_divergent_sigma() {
        assert!(matches!(
            halfline_sqrtp_gaussian_integral(c(-0.1, 1.0), 1.0, Sign::Plus),
            Err(TofError::DivergentIntegral(_))
        ));
        assert!(matches!(
            halfline_sqrtp_gaussian_integral(c(0.0, 0.0), 1.0, Sign::Plus),
            Err(TofError::DivergentIntegral(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn closed_form_matches_direct_quadrature(
            re in 0.05f64..5.0, im in -5.0f64..5.0, l in -20.0f64..20.0
        ) {
            let s = c(re, im);
            let want = direct(0.5, s, l);
            let got = halfline_sqrtp_gaussian_integral(s, l.abs(), if l >= 0.0 { Sign::Plus } else { Sign::Minus }).unwrap();
            prop_assert!((got - want).norm() <= 1e-8 * want.norm(), "{} vs {}", got, want);
        }
    }
}
