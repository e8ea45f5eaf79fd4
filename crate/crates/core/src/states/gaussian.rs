//! Gaussian-times-polynomial packets, built from one-dimensional factors.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, TofError};
use crate::numerics::halfline::{power_gaussian_halfline, HalflineMethod, Sign};
use crate::numerics::quadrature::{integrate, QuadratureSpec};
use crate::numerics::rules::gauss_hermite;
use crate::Vec3;

/// Restriction of a momentum factor to a half-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HalfLine {
    #[default]
    Full,
    Positive,
    Negative,
}

impl HalfLine {
    pub fn contains(self, p: f64) -> bool {
        match self {
            HalfLine::Full => true,
            HalfLine::Positive => p > 0.0,
            HalfLine::Negative => p < 0.0,
        }
    }

    pub fn flipped(self) -> HalfLine {
        match self {
            HalfLine::Full => HalfLine::Full,
            HalfLine::Positive => HalfLine::Negative,
            HalfLine::Negative => HalfLine::Positive,
        }
    }
}

/// One-dimensional momentum factor
/// `θ(p) · P(p − c) · exp(−(p − c)²/(2w²)) · exp(−i a p)`.
///
/// `poly[n]` multiplies `(p − c)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor1D {
    pub center: f64,
    pub width: f64,
    pub shift: f64,
    pub poly: Vec<Complex64>,
    pub half: HalfLine,
}

impl Factor1D {
    pub fn gaussian(center: f64, width: f64) -> Self {
        Factor1D { center, width, shift: 0.0, poly: vec![Complex64::new(1.0, 0.0)], half: HalfLine::Full }
    }

    pub fn with_shift(mut self, a: f64) -> Self {
        self.shift = a;
        self
    }

    pub fn with_poly(mut self, poly: Vec<Complex64>) -> Self {
        self.poly = poly;
        self
    }

    pub fn restricted(mut self, half: HalfLine) -> Self {
        self.half = half;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(TofError::invalid("Gaussian width must be positive"));
        }
        if !(self.center.is_finite() && self.shift.is_finite()) {
            return Err(TofError::invalid("Gaussian center and shift must be finite"));
        }
        if self.poly.is_empty() {
            return Err(TofError::invalid("polynomial needs at least one coefficient"));
        }
        Ok(())
    }

    fn poly_at(&self, q: f64) -> Complex64 {
        self.poly.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * q + c)
    }

    /// Momentum amplitude at `p`.
    pub fn amplitude(&self, p: f64) -> Complex64 {
        if !self.half.contains(p) {
            return Complex64::new(0.0, 0.0);
        }
        let q = p - self.center;
        self.poly_at(q) * Complex64::new(-q * q / (2.0 * self.width * self.width), -self.shift * p).exp()
    }

    /// Complex conjugate of the reflected factor, `f*(−p)`.
    pub fn conj_reflected(&self) -> Factor1D {
        let poly = self.poly.iter().enumerate().map(|(n, c)| if n % 2 == 1 { -c.conj() } else { c.conj() }).collect();
        Factor1D { center: -self.center, width: self.width, shift: self.shift, poly, half: self.half.flipped() }
    }

    /// Coefficients of the polynomial in powers of `p` itself.
    pub fn poly_in_p(&self) -> Vec<Complex64> {
        let n = self.poly.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, ck) in self.poly.iter().enumerate() {
            // (p − c)^k = Σ_j C(k,j) p^j (−c)^{k−j}
            let mut binom = 1.0;
            for j in 0..=k {
                if j > 0 {
                    binom *= (k - j + 1) as f64 / j as f64;
                }
                out[j] += ck * binom * (-self.center).powi((k - j) as i32);
            }
        }
        out
    }

    /// Gaussian exponent of `amplitude(p)·e^{−itp²/2}` written as
    /// `−σp²/2 + i k p + log_pre` (polynomial excluded).
    pub fn exponent(&self, t: f64) -> (Complex64, Complex64, f64) {
        let w2 = self.width * self.width;
        let sigma = Complex64::new(1.0 / w2, t);
        let k = Complex64::new(-self.shift, -self.center / w2);
        (sigma, k, -self.center * self.center / (2.0 * w2))
    }

    /// Position-space wave function at time `t` under free evolution,
    /// with the `(2π)^{−1/2}` Fourier convention, and its `x`-derivative.
    pub fn position(&self, x: f64, t: f64) -> Result<(Complex64, Complex64)> {
        if self.half != HalfLine::Full {
            return Err(TofError::UnsupportedFamily("position space of half-line restricted factors".into()));
        }
        let c = self.center;
        let i = Complex64::i();
        let a = Complex64::new(1.0 / (2.0 * self.width * self.width), 0.5 * t);
        let b = i * (x - self.shift - t * c);
        let cc = i * (c * (x - self.shift)) - i * (0.5 * t * c * c);
        let n = self.poly.len();
        // I_m = ∫ q^m e^{−Aq² + Bq} dq
        let mut moments = Vec::with_capacity(n + 1);
        let i0 = (Complex64::new(PI, 0.0) / a).sqrt() * (b * b / (a * 4.0)).exp();
        moments.push(i0);
        let r = b / (a * 2.0);
        for m in 0..n {
            let next =
                r * moments[m] + if m > 0 { moments[m - 1] * (m as f64) / (a * 2.0) } else { Complex64::new(0.0, 0.0) };
            moments.push(next);
        }
        let pre = cc.exp() / (2.0 * PI).sqrt();
        let mut psi = Complex64::new(0.0, 0.0);
        let mut dpsi = Complex64::new(0.0, 0.0);
        for (m, pm) in self.poly.iter().enumerate() {
            psi += pm * moments[m];
            dpsi += pm * (moments[m] * c + moments[m + 1]) * i;
        }
        Ok((psi * pre, dpsi * pre))
    }

    /// Position interval outside which `|ψ(x, t)|` is below about `e^{−cut}`.
    pub fn position_extent(&self, t: f64, cut: f64) -> (f64, f64) {
        let deg = (self.poly.len() - 1) as f64;
        let w2 = self.width * self.width;
        let s = (0.5 / w2 + 0.5 * t * t * w2).sqrt();
        let r = s * (2.0 * cut.sqrt() + 2.0 * deg.sqrt() + 1.0);
        let x0 = self.shift + self.center * t;
        (x0 - r, x0 + r)
    }

    /// Interval outside which the factor is negligible (below `e^{-cut}` of its
    /// Gaussian envelope).
    pub fn extent(&self, cut: f64) -> (f64, f64) {
        let deg = (self.poly.len() - 1) as f64;
        let r = self.width * ((2.0 * cut).sqrt() + deg.sqrt() + 1.0);
        let (mut lo, mut hi) = (self.center - r, self.center + r);
        match self.half {
            HalfLine::Positive => lo = lo.max(0.0),
            HalfLine::Negative => hi = hi.min(0.0),
            HalfLine::Full => {}
        }
        (lo, hi.max(lo))
    }

    /// `∫ θ(αp) √|p| f(p) e^{−itp²/2 + ipL} dp` in closed form.
    pub fn sqrt_halfline(&self, t: f64, l: f64, alpha: Sign, method: HalflineMethod) -> Result<Complex64> {
        let excluded =
            matches!((self.half, alpha), (HalfLine::Positive, Sign::Minus) | (HalfLine::Negative, Sign::Plus));
        if excluded {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (sigma, k, log_pre) = self.exponent(t);
        let a = alpha.value();
        let kk = (k + l) * a;
        let mut sum = Complex64::new(0.0, 0.0);
        for (n, b) in self.poly_in_p().iter().enumerate() {
            if *b == Complex64::new(0.0, 0.0) {
                continue;
            }
            let h = power_gaussian_halfline(n as f64 + 0.5, sigma, kk, log_pre, method)?;
            sum += b * a.powi(n as i32) * h;
        }
        Ok(sum)
    }
}

/// One-dimensional packet `ψ̃(p) = Σ_j c_j f_j(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture1D {
    pub terms: Vec<(Complex64, Factor1D)>,
}

impl Mixture1D {
    pub fn normalized(terms: Vec<(Complex64, Factor1D)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(TofError::invalid("mixture needs at least one term"));
        }
        for (_, f) in &terms {
            f.validate()?;
        }
        let mut m = Mixture1D { terms };
        let n = m.norm_sq()?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(TofError::NotNormalized(n));
        }
        let s = 1.0 / n.sqrt();
        m.terms.iter_mut().for_each(|(c, _)| *c *= s);
        Ok(m)
    }

    /// Normalized Gaussian `∝ exp(−(p − p̄)²/(4σ_p²) − ipa)`, i.e. `|ψ̃|²` has
    /// standard deviation `σ_p`.
    pub fn gaussian(p_mean: f64, sigma_p: f64, a: f64) -> Result<Self> {
        let f = Factor1D::gaussian(p_mean, sigma_p * 2f64.sqrt()).with_shift(a);
        Self::normalized(vec![(Complex64::new(1.0, 0.0), f)])
    }

    pub fn amplitude(&self, p: f64) -> Complex64 {
        self.terms.iter().map(|(c, f)| c * f.amplitude(p)).sum()
    }

    pub fn position(&self, z: f64, t: f64) -> Result<(Complex64, Complex64)> {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for (c, f) in &self.terms {
            let (a, b) = f.position(z, t)?;
            v += c * a;
            d += c * b;
        }
        Ok((v, d))
    }

    pub fn norm_sq(&self) -> Result<f64> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut k = 0.0f64;
        for (_, f) in &self.terms {
            let (a, b) = f.extent(40.0);
            lo = lo.min(a);
            hi = hi.max(b);
            k = k.max(f.shift.abs());
        }
        let spec = QuadratureSpec::precise().with_wavenumber(2.0 * k);
        let mut s = 0.0;
        // split at 0 so half-line factors are integrated piecewise-smoothly
        for (a, b) in [(lo, hi.min(0.0)), (lo.max(0.0), hi)] {
            if b > a {
                s += integrate(|p| Complex64::new(self.amplitude(p).norm_sqr(), 0.0), a, b, &spec)?.value.re;
            }
        }
        Ok(s)
    }

    pub fn conjugated(&self) -> Mixture1D {
        Mixture1D { terms: self.terms.iter().map(|(c, f)| (c.conj(), f.conj_reflected())).collect() }
    }

    pub fn translated(&self, a: f64) -> Mixture1D {
        let mut m = self.clone();
        m.terms.iter_mut().for_each(|(_, f)| f.shift += a);
        m
    }

    pub fn sqrt_halfline(&self, t: f64, l: f64, alpha: Sign, method: HalflineMethod) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for (c, f) in &self.terms {
            s += c * f.sqrt_halfline(t, l, alpha, method)?;
        }
        Ok(s)
    }

    pub fn extent(&self, cut: f64) -> (f64, f64) {
        self.terms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, f)| {
            let (a, b) = f.extent(cut);
            (lo.min(a), hi.max(b))
        })
    }

    pub fn position_extent(&self, t: f64, cut: f64) -> (f64, f64) {
        self.terms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, f)| {
            let (a, b) = f.position_extent(t, cut);
            (lo.min(a), hi.max(b))
        })
    }
}

/// One product term `coeff · f_u(e·p⊥) · f_v(e⊥·p⊥) · f_z(p_z)`, where
/// `e = (cos θ, sin θ)` and `e⊥ = (−sin θ, cos θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term3D {
    pub coeff: Complex64,
    pub angle: f64,
    pub u: Factor1D,
    pub v: Factor1D,
    pub z: Factor1D,
}

impl Term3D {
    pub fn rotate_in(&self, px: f64, py: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (c * px + s * py, -s * px + c * py)
    }

    pub fn transverse(&self, px: f64, py: f64) -> Complex64 {
        let (pu, pv) = self.rotate_in(px, py);
        self.u.amplitude(pu) * self.v.amplitude(pv)
    }

    pub fn amplitude(&self, p: Vec3) -> Complex64 {
        self.coeff * self.transverse(p[0], p[1]) * self.z.amplitude(p[2])
    }

    pub fn position(&self, x: Vec3, t: f64) -> Result<(Complex64, [Complex64; 3])> {
        let (xu, xv) = self.rotate_in(x[0], x[1]);
        let (fu, du) = self.u.position(xu, t)?;
        let (fv, dv) = self.v.position(xv, t)?;
        let (fz, dz) = self.z.position(x[2], t)?;
        let (s, c) = self.angle.sin_cos();
        let gu = du * fv * fz;
        let gv = fu * dv * fz;
        let psi = self.coeff * fu * fv * fz;
        let grad = [self.coeff * (gu * c - gv * s), self.coeff * (gu * s + gv * c), self.coeff * fu * fv * dz];
        Ok((psi, grad))
    }

    pub fn validate(&self) -> Result<()> {
        self.u.validate()?;
        self.v.validate()?;
        self.z.validate()?;
        if self.u.half != HalfLine::Full || self.v.half != HalfLine::Full {
            return Err(TofError::invalid("transverse factors cannot be half-line restricted"));
        }
        Ok(())
    }
}

/// Finite superposition of [`Term3D`] packets.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub terms: Vec<Term3D>,
}

/// Number of Gauss–Hermite nodes per transverse direction.
pub const TRANSVERSE_NODES: usize = 48;

impl GaussianMixture {
    /// Build a mixture and check `∫|ψ̃|² d³p = 1` to `1e−10`.
    pub fn new(terms: Vec<Term3D>) -> Result<Self> {
        let m = Self::unchecked(terms)?;
        let n = m.norm_sq()?;
        if (n - 1.0).abs() > 1e-10 {
            return Err(TofError::NotNormalized(n));
        }
        Ok(m)
    }

    /// Build a mixture and rescale it to unit norm.
    pub fn normalized(terms: Vec<Term3D>) -> Result<Self> {
        let mut m = Self::unchecked(terms)?;
        let n = m.norm_sq()?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(TofError::NotNormalized(n));
        }
        let s = 1.0 / n.sqrt();
        for t in &mut m.terms {
            t.coeff *= s;
        }
        Ok(m)
    }

    fn unchecked(terms: Vec<Term3D>) -> Result<Self> {
        if terms.is_empty() {
            return Err(TofError::invalid("mixture needs at least one term"));
        }
        for t in &terms {
            t.validate()?;
        }
        Ok(GaussianMixture { terms })
    }

    pub fn amplitude(&self, p: Vec3) -> Complex64 {
        self.terms.iter().map(|t| t.amplitude(p)).sum()
    }

    pub fn position(&self, x: Vec3, t: f64) -> Result<(Complex64, [Complex64; 3])> {
        let mut psi = Complex64::new(0.0, 0.0);
        let mut grad = [Complex64::new(0.0, 0.0); 3];
        for term in &self.terms {
            let (v, g) = term.position(x, t)?;
            psi += v;
            for k in 0..3 {
                grad[k] += g[k];
            }
        }
        Ok((psi, grad))
    }

    /// Transverse overlaps `O_jl = ∫ d²p⊥ T_j T_l*` (without coefficients).
    pub fn transverse_overlaps(&self) -> Vec<Vec<Complex64>> {
        let n = self.terms.len();
        let mut o = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for j in 0..n {
            for l in j..n {
                let v = transverse_overlap(&self.terms[j], &self.terms[l]);
                o[j][l] = v;
                o[l][j] = v.conj();
            }
        }
        o
    }

    /// Longitudinal overlap `∫ f_z^j f_z^l* dp_z`.
    pub fn longitudinal_overlap(&self, j: usize, l: usize) -> Result<Complex64> {
        let a = &self.terms[j].z;
        let b = &self.terms[l].z;
        let (lo1, hi1) = a.extent(40.0);
        let (lo2, hi2) = b.extent(40.0);
        let lo = lo1.max(lo2);
        let hi = hi1.min(hi2);
        if hi <= lo {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let spec = QuadratureSpec::precise().with_wavenumber((a.shift - b.shift).abs());
        Ok(integrate(|p| a.amplitude(p) * b.amplitude(p).conj(), lo, hi, &spec)?.value)
    }

    pub fn norm_sq(&self) -> Result<f64> {
        let o = self.transverse_overlaps();
        let n = self.terms.len();
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for l in 0..n {
                let z = self.longitudinal_overlap(j, l)?;
                s += self.terms[j].coeff * self.terms[l].coeff.conj() * o[j][l] * z;
            }
        }
        Ok(s.re)
    }

    /// Mixture describing `ψ*(x)`, i.e. momentum amplitude `ψ̃*(−p)`.
    pub fn conjugated(&self) -> GaussianMixture {
        let terms = self
            .terms
            .iter()
            .map(|t| Term3D {
                coeff: t.coeff.conj(),
                angle: t.angle,
                u: t.u.conj_reflected(),
                v: t.v.conj_reflected(),
                z: t.z.conj_reflected(),
            })
            .collect();
        GaussianMixture { terms }
    }

    /// `ψ̃(p) → e^{−i a·p⊥} ψ̃(p)`, a translation of the packet by `a` in the plane.
    pub fn translated(&self, ax: f64, ay: f64) -> GaussianMixture {
        let mut out = self.clone();
        for t in &mut out.terms {
            let (au, av) = t.rotate_in(ax, ay);
            t.u.shift += au;
            t.v.shift += av;
        }
        out
    }

    /// Rotation of the packet by `phi` about the `z` axis.
    pub fn rotated(&self, phi: f64) -> GaussianMixture {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.angle += phi;
        }
        out
    }

    /// Whether no term has support at `p_z < 0`.
    pub fn is_right_moving(&self) -> bool {
        self.terms.iter().all(|t| t.z.half == HalfLine::Positive)
    }

    /// Bounding box `[(lo, hi); 3]` of the momentum support.
    pub fn extent(&self, cut: f64) -> [(f64, f64); 3] {
        let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 3];
        for t in &self.terms {
            let (ulo, uhi) = t.u.extent(cut);
            let (vlo, vhi) = t.v.extent(cut);
            let r = ulo.abs().max(uhi.abs()).max(vlo.abs()).max(vhi.abs());
            for k in 0..2 {
                b[k].0 = b[k].0.min(-r);
                b[k].1 = b[k].1.max(r);
            }
            let (zlo, zhi) = t.z.extent(cut);
            b[2].0 = b[2].0.min(zlo);
            b[2].1 = b[2].1.max(zhi);
        }
        b
    }
}

/// `∫ d²p⊥ T_a(p⊥) T_b(p⊥)*` by a product Gauss–Hermite rule centred on the
/// product of the two Gaussian envelopes.
pub fn transverse_overlap(a: &Term3D, b: &Term3D) -> Complex64 {
    // lab-frame envelope centres
    let centre = |t: &Term3D| {
        let (s, c) = t.angle.sin_cos();
        [c * t.u.center - s * t.v.center, s * t.u.center + c * t.v.center]
    };
    let prec = |t: &Term3D| 0.5 * (1.0 / (t.u.width * t.u.width) + 1.0 / (t.v.width * t.v.width));
    let (ca, cb) = (centre(a), centre(b));
    let (la, lb) = (prec(a), prec(b));
    let lam = la + lb;
    let c = [(la * ca[0] + lb * cb[0]) / lam, (la * ca[1] + lb * cb[1]) / lam];
    // e^{−lam|p−c|²/2} ≈ e^{−x²} with p = c + x·√(2/lam)
    let h = (2.0 / lam).sqrt();
    let rule = gauss_hermite(TRANSVERSE_NODES);
    let mut s = Complex64::new(0.0, 0.0);
    for (xi, wi) in rule.iter() {
        for (yj, wj) in rule.iter() {
            let px = c[0] + h * xi;
            let py = c[1] + h * yj;
            let f = a.transverse(px, py) * b.transverse(px, py).conj();
            s += f * (wi * wj * (xi * xi + yj * yj).exp());
        }
    }
    s * h * h
}
