//! Error function, Gamma and the confluent hypergeometric series.

use num_complex::Complex64;

use crate::error::{Result, TofError};

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `1/Γ(x)`, returning 0 at the poles `x = 0, −1, −2, …`.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Kummer's function `M(a, b, z) = ₁F₁(a; b; z)` by its power series.
/// Intended for moderate `|z|` (the series is summed term by term until
/// terms fall below `1e-17` of the running maximum).
pub fn kummer_m(a: f64, b: f64, z: Complex64) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut biggest = 1.0f64;
    for n in 0..2000 {
        let nf = n as f64;
        term *= z * ((a + nf) / ((b + nf) * (nf + 1.0)));
        sum += term;
        let t = term.norm();
        biggest = biggest.max(t);
        if t <= 1e-17 * sum.norm().max(1e-300) && n > 2 {
            if biggest > 1e12 * sum.norm().max(1e-300) {
                return Err(TofError::NonConvergence {
                    what: "Kummer series cancellation".into(),
                    estimate: sum.norm(),
                    error: biggest * f64::EPSILON,
                });
            }
            return Ok(sum);
        }
        if a + nf == 0.0 {
            return Ok(sum);
        }
    }
    Err(TofError::NonConvergence { what: "Kummer series".into(), estimate: sum.norm(), error: term.norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Maclaurin series erf(x) = 2/√π Σ (−1)^n x^{2n+1} / (n!(2n+1)), summed in
    // pairs to keep roundoff small for |x| ≤ 3.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x * x / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() <= 1e-18 * sum.abs() || n > 300.0 {
                break;
            }
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    }

    // Continued fraction for erfc, valid for larger x.
    fn erfc_cf(x: f64) -> f64 {
        let mut f = 0.0;
        for k in (1..200).rev() {
            f = (k as f64 / 2.0) / (x + f);
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / (x + f)
    }

    #[test]
    fn erf_matches_oracles() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(6.0) - 1.0).abs() < 1e-14);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        for i in 0..=20 {
            let x = i as f64 * 0.1;
            assert!((erf(x) - erf_series(x)).abs() < 1e-14, "x = {x}");
        }
        for i in 0..=20 {
            let x = 2.0 + i as f64 * 0.5;
            assert!((erfc(x) - erfc_cf(x)).abs() < 1e-14 * erfc_cf(x), "x = {x}");
        }
    }

    #[test]
    fn kummer_reduces_to_exponential() {
        // M(a, a, z) = e^z
        let z = Complex64::new(1.3, -0.7);
        let m = kummer_m(0.75, 0.75, z).unwrap();
        assert!((m - z.exp()).norm() < 1e-14);
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert_eq!(recip_gamma(-2.0), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn erf_is_odd(x in -5.0f64..5.0) {
            prop_assert!((erf(-x) + erf(x)).abs() <= 1e-15);
            prop_assert!(erf(x).abs() <= 1.0);
        }

        #[test]
        fn erf_is_monotone(x in -5.0f64..5.0, dx in 1e-3f64..1.0) {
            prop_assert!(erf(x + dx) >= erf(x));
        }
    }
}
