//! Sampled distributions over arrival time and the τ grids they live on.

use std::io::Write;
use std::path::Path;

use crate::error::{Result, TofError};

/// A distribution sampled on a sorted τ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionCurve {
    pub tau: Vec<f64>,
    pub density: Vec<f64>,
    /// Trapezoidal integral of `density` over `tau`. Recorded, never forced to 1.
    pub norm: f64,
    pub p_infinity: Option<f64>,
    pub label: String,
    pub meta: Vec<(String, String)>,
}

impl DistributionCurve {
    pub fn new(label: impl Into<String>, tau: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if tau.len() != density.len() {
            return Err(TofError::invalid("tau and density lengths differ"));
        }
        if tau.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(TofError::invalid("tau grid must be strictly increasing"));
        }
        let norm = trapezoid(&tau, &density);
        Ok(DistributionCurve { tau, density, norm, p_infinity: None, label: label.into(), meta: Vec::new() })
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn with_p_infinity(mut self, p: f64) -> Self {
        self.p_infinity = Some(p);
        self
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// `(τ, density)` at the largest density.
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.tau.iter().zip(&self.density).fold(None, |best: Option<(f64, f64)>, (&t, &d)| match best {
            Some((_, bd)) if bd >= d => best,
            _ => Some((t, d)),
        })
    }

    pub fn peak_value(&self) -> f64 {
        self.peak().map_or(0.0, |p| p.1)
    }

    /// Largest pointwise `|a − b|`; the grids must match exactly.
    pub fn sup_difference(&self, other: &DistributionCurve) -> Result<f64> {
        if self.tau != other.tau {
            return Err(TofError::GridMismatch);
        }
        Ok(self.density.iter().zip(&other.density).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// Trapezoidal integral over the part of the grid inside `[a, b]`.
    pub fn integral_between(&self, a: f64, b: f64) -> f64 {
        let (t, d): (Vec<f64>, Vec<f64>) =
            self.tau.iter().zip(&self.density).filter(|(t, _)| **t >= a && **t <= b).map(|(t, d)| (*t, *d)).unzip();
        trapezoid(&t, &d)
    }

    /// Writes `tau,density` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tau", "density"])?;
        for (t, d) in self.tau.iter().zip(&self.density) {
            out.write_record([format!("{t:.16e}"), format!("{d:.16e}")])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Mass beyond the outermost sample `tau[0]`, assuming `Π ∝ |τ|^{−γ}` with
/// `γ` fitted over the outermost decade. `tau` runs inward from `tau[0]`.
///
/// A shallow fit is accepted only when the end value is negligible; the free
/// asymptotic exponent 3/2 is then assumed.
pub fn power_law_tail(tau: &[f64], rho: &[f64]) -> f64 {
    let (t0, r0) = (tau[0].abs(), rho[0]);
    if r0 <= 0.0 {
        return 0.0;
    }
    let j = tau.iter().position(|t| t.abs() <= t0 / 10.0).unwrap_or(tau.len() - 1).max(1);
    let (t1, r1) = (tau[j].abs(), rho[j]);
    let gamma = if r1 > 0.0 && t1 > 0.0 && t1 < t0 { (r1 / r0).ln() / (t0 / t1).ln() } else { f64::NAN };
    if gamma > 1.0 {
        r0 * t0 / (gamma - 1.0)
    } else if r0 * t0 < 1e-10 {
        2.0 * r0 * t0
    } else {
        f64::INFINITY
    }
}

pub fn linear_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` points from `a` to `b` (both > 0) with constant ratio.
pub fn geometric_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = linear_grid(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect();
    if n > 1 {
        g[0] = a;
        g[n - 1] = b;
    }
    g
}

/// Linear core on `[−core, core]` joined to geometric wings reaching `±t_max`.
pub fn hybrid_grid(core: f64, n_core: usize, t_max: f64, n_tail: usize) -> Vec<f64> {
    let mut g = linear_grid(-core, core, n_core.max(2));
    if t_max > core && n_tail > 1 {
        let wing: Vec<f64> = geometric_grid(core, t_max, n_tail + 1).into_iter().skip(1).collect();
        g.extend(wing.iter().copied());
        g.extend(wing.iter().map(|t| -t));
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Linear core on `[0, core]` plus a geometric wing to `t_max`.
pub fn positive_grid(core: f64, n_core: usize, t_max: f64, n_tail: usize) -> Vec<f64> {
    let mut g = linear_grid(0.0, core, n_core.max(2));
    if t_max > core && n_tail > 1 {
        g.extend(geometric_grid(core, t_max, n_tail + 1).into_iter().skip(1));
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let x = linear_grid(-1.0, 3.0, 7);
        let y: Vec<f64> = x.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((trapezoid(&x, &y) - 12.0).abs() < 1e-13);
    }

    #[test]
    fn grids_are_sorted_and_span() {
        let g = hybrid_grid(5.0, 101, 1e4, 60);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g[0], -1e4);
        assert_eq!(g[g.len() - 1], 1e4);
        let p = positive_grid(2.0, 10, 100.0, 10);
        assert!(p[0] == 0.0 && p.windows(2).all(|w| w[1] > w[0]));
        let geo = geometric_grid(1.0, 1e3, 4);
        assert!((geo[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn curve_bookkeeping() {
        let tau = linear_grid(0.0, 2.0, 5);
        let c = DistributionCurve::new("x", tau.clone(), vec![0.0, 1.0, 3.0, 1.0, 0.0]).unwrap();
        assert_eq!(c.peak(), Some((1.0, 3.0)));
        assert!((c.norm - 2.5).abs() < 1e-15);
        let d = DistributionCurve::new("y", tau, vec![0.0; 5]).unwrap();
        assert_eq!(c.sup_difference(&d).unwrap(), 3.0);
        let e = DistributionCurve::new("z", vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(c.sup_difference(&e), Err(TofError::GridMismatch)));
        assert!(DistributionCurve::new("bad", vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!((c.integral_between(0.0, 1.0) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn power_tail_of_exact_power_law() {
        let t: Vec<f64> = geometric_grid(1e4, 1.0, 41);
        let r: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-1.5)).collect();
        // ∫_{1e4}^∞ 3 t^{−3/2} dt = 6/100
        assert!((power_law_tail(&t, &r) - 0.06).abs() < 1e-12);
        let flat = vec![1.0; 41];
        assert!(power_law_tail(&t, &flat).is_infinite());
    }

    #[test]
    fn csv_roundtrips_exactly() {
        let c = DistributionCurve::new("x", vec![0.1, 0.2], vec![1.0 / 3.0, 2e-300]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        let rows: Vec<(f64, f64)> = rd.deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(rows, vec![(0.1, 1.0 / 3.0), (0.2, 2e-300)]);
    }
}
