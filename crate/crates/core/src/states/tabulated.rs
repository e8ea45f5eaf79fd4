//! Momentum amplitudes sampled on a regular grid.

use std::io::Read;

use num_complex::Complex64;

use crate::error::{Result, TofError};
use crate::Vec3;

/// Sampled `ψ̃(p)` on a rectilinear grid, trilinearly interpolated and zero
/// outside the grid box.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedMomentum {
    axes: [Vec<f64>; 3],
    values: Vec<Complex64>,
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl TabulatedMomentum {
    /// Build from `(p, ψ̃(p))` samples covering a full rectilinear grid.
    /// The trapezoidal norm must equal 1 to `1e−10`.
    pub fn from_samples(samples: &[(Vec3, Complex64)]) -> Result<Self> {
        let t = Self::assemble(samples)?;
        let n = t.norm_sq();
        if (n - 1.0).abs() > 1e-10 {
            return Err(TofError::NotNormalized(n));
        }
        Ok(t)
    }

    /// As [`from_samples`](Self::from_samples) but rescales to unit norm.
    pub fn from_samples_normalized(samples: &[(Vec3, Complex64)]) -> Result<Self> {
        let mut t = Self::assemble(samples)?;
        let n = t.norm_sq();
        if !(n > 0.0) {
            return Err(TofError::NotNormalized(n));
        }
        let s = 1.0 / n.sqrt();
        t.values.iter_mut().for_each(|v| *v *= s);
        Ok(t)
    }

    fn assemble(samples: &[(Vec3, Complex64)]) -> Result<Self> {
        let axes = [0, 1, 2].map(|k| sorted_unique(samples.iter().map(|s| s.0[k]).collect()));
        if axes.iter().any(|a| a.len() < 2) {
            return Err(TofError::invalid("tabulated grid needs at least two points per axis"));
        }
        let total = axes[0].len() * axes[1].len() * axes[2].len();
        if total != samples.len() {
            return Err(TofError::invalid(format!(
                "samples do not form a full grid: {} samples for {} grid points",
                samples.len(),
                total
            )));
        }
        let mut values = vec![Complex64::new(f64::NAN, 0.0); total];
        for (p, v) in samples {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(TofError::invalid("non-finite sample"));
            }
            let idx = [0, 1, 2].map(|k| axes[k].binary_search_by(|a| a.total_cmp(&p[k])).unwrap());
            let flat = (idx[0] * axes[1].len() + idx[1]) * axes[2].len() + idx[2];
            values[flat] = *v;
        }
        if values.iter().any(|v| v.re.is_nan()) {
            return Err(TofError::invalid("duplicate grid point in samples"));
        }
        Ok(TabulatedMomentum { axes, values })
    }

    /// Read CSV rows `px, py, pz, re, im` (header optional).
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let nums: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let Ok(nums) = nums else {
                if samples.is_empty() {
                    continue; // header row
                }
                return Err(TofError::invalid(format!("unparsable row {:?}", rec)));
            };
            if nums.len() != 5 {
                return Err(TofError::invalid("expected 5 columns: px, py, pz, re, im"));
            }
            samples.push(([nums[0], nums[1], nums[2]], Complex64::new(nums[3], nums[4])));
        }
        Self::from_samples(&samples)
    }

    pub fn axes(&self) -> &[Vec<f64>; 3] {
        &self.axes
    }

    fn at(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.values[(i * self.axes[1].len() + j) * self.axes[2].len() + k]
    }

    /// Trapezoidal `∫|ψ̃|² d³p` over the grid.
    pub fn norm_sq(&self) -> f64 {
        let w = self.axes.clone().map(|a| trapezoid_weights(&a));
        let mut s = 0.0;
        for (i, wi) in w[0].iter().enumerate() {
            for (j, wj) in w[1].iter().enumerate() {
                for (k, wk) in w[2].iter().enumerate() {
                    s += wi * wj * wk * self.at(i, j, k).norm_sqr();
                }
            }
        }
        s
    }

    pub fn amplitude(&self, p: Vec3) -> Complex64 {
        let mut idx = [0usize; 3];
        let mut frac = [0.0; 3];
        for k in 0..3 {
            let a = &self.axes[k];
            if p[k] < a[0] || p[k] > a[a.len() - 1] {
                return Complex64::new(0.0, 0.0);
            }
            let i = a.partition_point(|&v| v <= p[k]).saturating_sub(1).min(a.len() - 2);
            idx[k] = i;
            frac[k] = (p[k] - a[i]) / (a[i + 1] - a[i]);
        }
        let mut s = Complex64::new(0.0, 0.0);
        for di in 0..2 {
            for dj in 0..2 {
                for dk in 0..2 {
                    let w = (if di == 1 { frac[0] } else { 1.0 - frac[0] })
                        * (if dj == 1 { frac[1] } else { 1.0 - frac[1] })
                        * (if dk == 1 { frac[2] } else { 1.0 - frac[2] });
                    if w != 0.0 {
                        s += self.at(idx[0] + di, idx[1] + dj, idx[2] + dk) * w;
                    }
                }
            }
        }
        s
    }

    pub fn extent(&self) -> [(f64, f64); 3] {
        self.axes.clone().map(|a| (a[0], a[a.len() - 1]))
    }
}

fn trapezoid_weights(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { a[i] - a[i - 1] } else { 0.0 };
            let right = if i + 1 < n { a[i + 1] - a[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}
