//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Result, TofError};

/// How the integrand behaves at the lower endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndpointSingularity {
    #[default]
    None,
    /// Integrand behaves like `√(x − a)` times a smooth function near `a`;
    /// removed by the substitution `x = a + u²`.
    SqrtOrigin,
}

/// Tolerances and hints for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub endpoint_singularity: EndpointSingularity,
    /// Wavenumber `k` of an `exp(ikx)` factor; the interval is pre-split into
    /// panels of roughly one period so the adaptive rule never samples a
    /// panel spanning many oscillations.
    pub oscillation_wavenumber: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
            endpoint_singularity: EndpointSingularity::None,
            oscillation_wavenumber: 0.0,
        }
    }
}

impl QuadratureSpec {
    /// Tight tolerances used internally by kernels whose results feed further
    /// cancellation-prone arithmetic.
    pub fn precise() -> Self {
        QuadratureSpec { abs_tol: 1e-300, rel_tol: 1e-12, max_subdivisions: 20_000, ..Default::default() }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_singularity(mut self, s: EndpointSingularity) -> Self {
        self.endpoint_singularity = s;
        self
    }

    pub fn with_wavenumber(mut self, k: f64) -> Self {
        self.oscillation_wavenumber = k;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(TofError::invalid("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(TofError::invalid("max_subdivisions must be at least 1"));
        }
        if !self.oscillation_wavenumber.is_finite() {
            return Err(TofError::invalid("oscillation wavenumber must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub abs_error: f64,
    pub evaluations: usize,
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_715_518_456_063,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One application of the 21-point Kronrod rule on `[a, b]`.
/// Returns `(kronrod, error estimate)`.
pub fn gauss_kronrod21<F>(f: &F, a: f64, b: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut res_abs = fc.norm() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let abs_half = half.abs();
    let kronrod = kronrod * half;
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut err = ((kronrod - gauss * half).norm()).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (kronrod, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over the finite
/// interval `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(TofError::invalid("integration limits must be finite"));
    }
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), abs_error: 0.0, evaluations: 0 });
    }
    match spec.endpoint_singularity {
        EndpointSingularity::None => integrate_smooth(&f, a, b, spec, spec.oscillation_wavenumber),
        EndpointSingularity::SqrtOrigin => {
            // x = a + u², dx = 2u du; the oscillation wavenumber in u grows linearly,
            // so split by the phase k·u² instead.
            let umax = (b - a).abs().sqrt();
            let sgn = (b - a).signum();
            let g = |u: f64| f(a + sgn * u * u) * (2.0 * u * sgn);
            let k = spec.oscillation_wavenumber.abs();
            let panels = initial_panels(k * umax * umax, spec.max_subdivisions);
            // equal phase increments in u²
            let breaks: Vec<f64> = (0..=panels).map(|i| umax * (i as f64 / panels as f64).sqrt()).collect();
            adaptive(&g, &breaks, spec)
        }
    }
}

fn initial_panels(phase: f64, max_sub: usize) -> usize {
    let n = (phase.abs() / std::f64::consts::PI).ceil() as usize;
    n.clamp(1, (max_sub / 2).max(1))
}

fn integrate_smooth<F>(f: &F, a: f64, b: f64, spec: &QuadratureSpec, k: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let panels = initial_panels(k * (b - a), spec.max_subdivisions);
    let breaks: Vec<f64> = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
    adaptive(f, &breaks, spec)
}

/// Adaptive integration over consecutive panels given by `breaks`.
pub fn integrate_with_breaks<F>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    spec.validate()?;
    if breaks.len() < 2 {
        return Err(TofError::invalid("need at least two break points"));
    }
    adaptive(&f, breaks, spec)
}

fn adaptive<F>(f: &F, breaks: &[f64], spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    let mut evals = 0usize;
    // Panels too narrow to split further; kept out of the heap.
    let mut frozen_err = 0.0;
    let mut frozen_value = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        let (v, e) = gauss_kronrod21(f, w[0], w[1]);
        evals += 21;
        total += v;
        total_err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, err: e });
    }
    let span = (breaks[breaks.len() - 1] - breaks[0]).abs();
    let mut n_panels = heap.len();
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.norm());
        if total_err <= tol {
            break;
        }
        if n_panels >= spec.max_subdivisions.max(breaks.len()) {
            if !total.re.is_finite() || !total.im.is_finite() || total_err > 1e3 * tol {
                return Err(TofError::NonConvergence {
                    what: "adaptive Gauss-Kronrod".into(),
                    estimate: total.norm(),
                    error: total_err,
                });
            }
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a).abs() <= 1e-14 * span.max(1e-300) || mid == worst.a || mid == worst.b {
            frozen_err += worst.err;
            frozen_value += worst.value;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gauss_kronrod21(f, worst.a, mid);
        let (v2, e2) = gauss_kronrod21(f, mid, worst.b);
        evals += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
        n_panels += 1;
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    let mut value = frozen_value;
    let mut err = frozen_err;
    for p in heap.iter() {
        value += p.value;
        err += p.err;
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(TofError::NonConvergence {
            what: "non-finite integrand".into(),
            estimate: f64::NAN,
            error: f64::INFINITY,
        });
    }
    Ok(QuadResult { value, abs_error: err, evaluations: evals })
}

/// Integrate a real-valued function.
pub fn integrate_real<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, spec).map(|r| r.value.re)
}

/// Integrate over `[a, ∞)` with the map `x = a + s/(1 − s)`, `s ∈ [0, 1)`.
pub fn integrate_to_infinity<F>(f: F, a: f64, spec: &QuadratureSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    let g = |s: f64| {
        if s >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let one_m = 1.0 - s;
        let x = a + s / one_m;
        let v = f(x) / (one_m * one_m);
        if v.re.is_finite() && v.im.is_finite() {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let mut inner = *spec;
    inner.endpoint_singularity = EndpointSingularity::None;
    inner.oscillation_wavenumber = 0.0;
    integrate(g, 0.0, 1.0, &inner)
}
