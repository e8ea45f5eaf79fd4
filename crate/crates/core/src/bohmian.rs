//! Bohmian trajectories, quantum-equilibrium ensembles and the resulting
//! arrival-time statistics.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::curve::DistributionCurve;
use crate::error::{Result, TofError};
use crate::flux::pi_qf_closed;
use crate::numerics::special::erf;
use crate::states::{
    polar_decompose, Cylindrical, EvolvedState, FieldMode, PacketFamily, VectorPotential, WavePacketSpec,
};
use crate::{Arrival, Vec3};

/// Horizon after which a trajectory that has not crossed counts as never arriving.
pub const DEFAULT_T_MAX: f64 = 1e3;

/// `v = ∇S − qA` for `ψ = ψ_t` written in the gauge `a`.
pub fn guiding_velocity(state: &EvolvedState, a: &VectorPotential, x: Vec3) -> Result<Vec3> {
    let pd = polar_decompose(state, x)?;
    let qa = a.eval(x);
    Ok([0, 1, 2].map(|k| pd.phase_gradient[k] - qa[k]))
}

/// [`guiding_velocity`] in the gauge the state is written in.
pub fn velocity(state: &EvolvedState, x: Vec3) -> Result<Vec3> {
    guiding_velocity(state, &state.vector_potential(), x)
}

/// Exact flow of the magnetic Gaussian: `R` fixed, `Φ` turning at unit rate
/// (clockwise for `qB₀ > 0`), `Z_t = Z₀√(1+t²)`. In the zero-field limit the
/// transverse motion is free spreading instead.
pub fn helix_at(x0: Cylindrical, t: f64, field: FieldMode) -> Cylindrical {
    let s = (1.0 + t * t).sqrt();
    match field {
        FieldMode::Uniform => Cylindrical { r: x0.r, phi: x0.phi - t, z: x0.z * s },
        FieldMode::ZeroLimit => Cylindrical { r: x0.r * s, phi: x0.phi, z: x0.z * s },
    }
}

/// Analytic arrival at the plane `z = L` for the magnetic Gaussian:
/// `τ = √((L/Z₀)² − 1)` when `Z₀` lies between the origin and the plane.
pub fn arrival_time_of(z0: f64, l: f64) -> Arrival {
    if z0 == l {
        return Arrival::At(0.0);
    }
    let q = l / z0;
    if z0 != 0.0 && q > 1.0 {
        Arrival::At((q * q - 1.0).sqrt())
    } else {
        Arrival::Never
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopriOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for DopriOptions {
    fn default() -> Self {
        DopriOptions { rel_tol: 1e-11, abs_tol: 1e-12, h_init: 1e-3, h_max: 1.0, max_steps: 1_000_000 }
    }
}

/// Path of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryPath {
    Helix(FieldMode),
    /// Accepted steps with velocities, for cubic Hermite dense output.
    Sampled {
        t: Vec<f64>,
        x: Vec<Vec3>,
        v: Vec<Vec3>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BohmianTrajectory {
    pub x0: Cylindrical,
    pub path: TrajectoryPath,
    pub l: f64,
    pub arrival: Arrival,
    /// Number of crossings of `z = L` seen.
    pub crossings: usize,
    /// Still heading for the plane when the horizon was reached.
    pub censored: bool,
    /// Set when the integration stopped at a node.
    pub truncated_at: Option<f64>,
}

impl BohmianTrajectory {
    /// Analytic trajectory of the magnetic Gaussian.
    pub fn helix(x0: Cylindrical, l: f64, field: FieldMode) -> Self {
        let arrival = arrival_time_of(x0.z, l);
        BohmianTrajectory {
            x0,
            path: TrajectoryPath::Helix(field),
            l,
            arrival,
            crossings: usize::from(!arrival.is_never()),
            censored: false,
            truncated_at: None,
        }
    }

    /// Position at time `t`. Sampled paths are clamped to their time span.
    pub fn at(&self, t: f64) -> Vec3 {
        match &self.path {
            TrajectoryPath::Helix(f) => helix_at(self.x0, t, *f).to_cartesian(),
            TrajectoryPath::Sampled { t: ts, x, v } => {
                let t = t.clamp(ts[0], ts[ts.len() - 1]);
                let i = ts.partition_point(|s| *s <= t).clamp(1, ts.len() - 1) - 1;
                if ts.len() == 1 {
                    return x[0];
                }
                hermite(ts[i], ts[i + 1], x[i], x[i + 1], v[i], v[i + 1], t)
            }
        }
    }
}

fn hermite(t0: f64, t1: f64, x0: Vec3, x1: Vec3, v0: Vec3, v1: Vec3, t: f64) -> Vec3 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (h00, h10, h01, h11) = (
        2.0 * s.powi(3) - 3.0 * s * s + 1.0,
        s.powi(3) - 2.0 * s * s + s,
        -2.0 * s.powi(3) + 3.0 * s * s,
        s.powi(3) - s * s,
    );
    [0, 1, 2].map(|k| h00 * x0[k] + h10 * h * v0[k] + h01 * x1[k] + h11 * h * v1[k])
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Integrates `ẋ = v(x, t)` from `x0` at `t = 0` to `t_max` with adaptive
/// Dormand–Prince steps, recording every crossing of `z = l`.
pub fn integrate_trajectory(
    spec: &WavePacketSpec,
    x0: Vec3,
    l: f64,
    t_max: f64,
    opts: &DopriOptions,
) -> Result<BohmianTrajectory> {
    let f = |t: f64, x: Vec3| velocity(&spec.evolved(t), x);
    let mut t = 0.0;
    let mut x = x0;
    let mut k1 = f(t, x)?;
    let mut ts = vec![t];
    let mut xs = vec![x];
    let mut vs = vec![k1];
    let mut h = opts.h_init.min(t_max);
    let mut crossings = 0;
    let mut arrival = if x0[2] == l { Arrival::At(0.0) } else { Arrival::Never };
    let mut truncated_at = None;
    let mut steps = 0;
    while t < t_max {
        steps += 1;
        if steps > opts.max_steps {
            return Err(TofError::NonConvergence { what: "trajectory step budget".into(), estimate: t, error: h });
        }
        h = h.min(t_max - t);
        let mut k = [[0.0; 3]; 7];
        k[0] = k1;
        let mut node = None;
        for s in 1..7 {
            let y = [0, 1, 2].map(|d| x[d] + h * (0..s).map(|j| A[s][j] * k[j][d]).sum::<f64>());
            match f(t + C[s] * h, y) {
                Ok(v) => k[s] = v,
                Err(e @ TofError::NodeEncountered { .. }) => {
                    node = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if node.is_some() {
            if h < 1e-12 {
                truncated_at = Some(t);
                break;
            }
            h *= 0.25;
            continue;
        }
        let y5 = [0, 1, 2].map(|d| x[d] + h * (0..7).map(|j| B5[j] * k[j][d]).sum::<f64>());
        let y4 = [0, 1, 2].map(|d| x[d] + h * (0..7).map(|j| B4[j] * k[j][d]).sum::<f64>());
        let err = ((0..3)
            .map(|d| {
                let sc = opts.abs_tol + opts.rel_tol * x[d].abs().max(y5[d].abs());
                ((y5[d] - y4[d]) / sc).powi(2)
            })
            .sum::<f64>()
            / 3.0)
            .sqrt();
        if err <= 1.0 {
            let t_new = t + h;
            // FSAL: the last stage is the velocity at the new point
            let v_new = k[6];
            if (x[2] - l) * (y5[2] - l) < 0.0 || (y5[2] == l && x[2] != l) {
                crossings += 1;
                if arrival.is_never() {
                    arrival = Arrival::At(bisect_crossing(t, t_new, x, y5, k1, v_new, l));
                }
            }
            t = t_new;
            x = y5;
            k1 = v_new;
            ts.push(t);
            xs.push(x);
            vs.push(k1);
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * fac).min(opts.h_max);
    }
    let censored = arrival.is_never() && truncated_at.is_none() && (l - x[2]) * k1[2] > 0.0;
    Ok(BohmianTrajectory {
        x0: Cylindrical::from_cartesian(x0),
        path: TrajectoryPath::Sampled { t: ts, x: xs, v: vs },
        l,
        arrival,
        crossings,
        censored,
        truncated_at,
    })
}

fn bisect_crossing(t0: f64, t1: f64, x0: Vec3, x1: Vec3, v0: Vec3, v1: Vec3, l: f64) -> f64 {
    let g = |t: f64| hermite(t0, t1, x0, x1, v0, v1, t)[2] - l;
    let (mut a, mut b) = (t0, t1);
    let ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (g(m) > 0.0) == (ga > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Draws `X₀` from `|ψ₀|²` of the magnetic Gaussian: `R² ~ Exp(1)`,
/// `Φ` uniform, `Z ~ N(0, 1/2)`.
pub fn sample_initial<R: Rng>(rng: &mut R) -> Cylindrical {
    let e: f64 = Exp1.sample(rng);
    let phi = rng.random_range(0.0..2.0 * PI);
    let g: f64 = StandardNormal.sample(rng);
    Cylindrical { r: e.sqrt(), phi, z: g * std::f64::consts::FRAC_1_SQRT_2 }
}

/// `n` equilibrium initial positions, one RNG stream per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub x0: Vec<Cylindrical>,
    pub seed: u64,
    pub n: usize,
}

impl TrajectoryEnsemble {
    pub fn sample(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(TofError::invalid("ensemble needs n ≥ 1"));
        }
        let x0 = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                sample_initial(&mut rng)
            })
            .collect();
        Ok(TrajectoryEnsemble { x0, seed, n })
    }

    pub fn trajectories(&self, l: f64, field: FieldMode) -> Vec<BohmianTrajectory> {
        self.x0.par_iter().map(|x| BohmianTrajectory::helix(*x, l, field)).collect()
    }

    /// Analytic arrival times at `z = L`.
    pub fn arrivals(&self, l: f64) -> Vec<Arrival> {
        self.x0.par_iter().map(|x| arrival_time_of(x.z, l)).collect()
    }

    /// Positions at time `t` under the exact flow.
    pub fn pushed(&self, t: f64, field: FieldMode) -> Vec<Cylindrical> {
        self.x0.par_iter().map(|x| helix_at(*x, t, field)).collect()
    }

    /// Writes `id,t,r,phi,z` rows for the first `count` trajectories.
    pub fn write_dump<W: Write>(&self, w: W, count: usize, times: &[f64], field: FieldMode) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["id", "t", "r", "phi", "z"])?;
        for (i, x) in self.x0.iter().take(count).enumerate() {
            for &t in times {
                let c = helix_at(*x, t, field);
                out.write_record([
                    i.to_string(),
                    format!("{t:.16e}"),
                    format!("{:.16e}", c.r),
                    format!("{:.16e}", c.phi),
                    format!("{:.16e}", c.z),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub density: f64,
    pub mc_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BmHistogram {
    pub bins: Vec<HistogramBin>,
    pub n: usize,
    pub p_infinity: f64,
    pub p_infinity_stderr: f64,
    /// Fraction arriving outside the binned range.
    pub outside: f64,
}

impl BmHistogram {
    /// Density at bin centres.
    pub fn curve(&self) -> Result<DistributionCurve> {
        let tau = self.bins.iter().map(|b| 0.5 * (b.tau_lo + b.tau_hi)).collect();
        let d = self.bins.iter().map(|b| b.density).collect();
        Ok(DistributionCurve::new("bm", tau, d)?.with_p_infinity(self.p_infinity))
    }

    /// `Σ density · width + outside + p_infinity`.
    pub fn total(&self) -> f64 {
        self.bins.iter().map(|b| b.density * (b.tau_hi - b.tau_lo)).sum::<f64>() + self.outside + self.p_infinity
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tau_lo", "tau_hi", "density", "mc_stderr"])?;
        for b in &self.bins {
            out.write_record([b.tau_lo, b.tau_hi, b.density, b.mc_stderr].map(|v| format!("{v:.16e}")))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Histogram of analytic arrival times over the bin edges `edges`.
pub fn pi_bm_histogram(ens: &TrajectoryEnsemble, l: f64, edges: &[f64]) -> Result<BmHistogram> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(TofError::invalid("bin edges must be strictly increasing"));
    }
    let arrivals = ens.arrivals(l);
    let nb = edges.len() - 1;
    let mut counts = vec![0usize; nb];
    let (mut never, mut outside) = (0usize, 0usize);
    for a in &arrivals {
        match a {
            Arrival::Never => never += 1,
            Arrival::At(t) => {
                let i = edges.partition_point(|e| e <= t);
                if i == 0 || (i > nb && *t > edges[nb]) {
                    outside += 1;
                } else {
                    counts[(i - 1).min(nb - 1)] += 1;
                }
            }
        }
    }
    let n = ens.n as f64;
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let w = edges[i + 1] - edges[i];
            let p = c as f64 / n;
            HistogramBin {
                tau_lo: edges[i],
                tau_hi: edges[i + 1],
                density: p / w,
                mc_stderr: (p * (1.0 - p) / n).sqrt() / w,
            }
        })
        .collect();
    let p_inf = never as f64 / n;
    Ok(BmHistogram {
        bins,
        n: ens.n,
        p_infinity: p_inf,
        p_infinity_stderr: (p_inf * (1.0 - p_inf) / n).sqrt(),
        outside: outside as f64 / n,
    })
}

/// `θ(τ) Π_QF(τ)` for the magnetic Gaussian.
pub fn pi_bm_exact(l: f64, tau: f64) -> f64 {
    if tau < 0.0 {
        0.0
    } else {
        pi_qf_closed(l, tau)
    }
}

/// `1 − ½ erf(L)`.
pub fn p_infinity_exact(l: f64) -> f64 {
    1.0 - 0.5 * erf(l)
}

/// `∫₀^τ Π_BM`: the equilibrium mass with `L/√(1+τ²) ≤ Z₀ ≤ L`.
pub fn pi_bm_cdf(l: f64, tau: f64) -> f64 {
    if tau < 0.0 {
        return 0.0;
    }
    0.5 * (erf(l) - erf(l / (1.0 + tau * tau).sqrt()))
}

/// Kolmogorov–Smirnov distance between the sampled arrival times (with
/// "never" placed at `τ = ∞`) and the exact distribution on `[0, ∞]`.
pub fn ks_distance(arrivals: &[Arrival], l: f64) -> f64 {
    let mut t: Vec<f64> = arrivals.iter().filter_map(|a| a.time()).collect();
    t.sort_by(f64::total_cmp);
    let n = arrivals.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in t.iter().enumerate() {
        let f = pi_bm_cdf(l, x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    // the atom at ∞ closes the gap at the top
    d.max((t.len() as f64 / n - 0.5 * erf(l)).abs())
}

/// One-sample KS distance of `xs` against the CDF `cdf`.
pub fn ks_statistic(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// 99% one-sample KS band.
pub fn ks_band_99(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Whether a family has the analytic helix flow.
pub fn has_analytic_flow(spec: &WavePacketSpec) -> Option<FieldMode> {
    match spec.family {
        PacketFamily::MagneticGaussian { field, .. } => Some(field),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::linear_grid;
    use crate::numerics::quadrature::{integrate_real, QuadratureSpec};
    use crate::states::GaugeGeometry;

    #[test]
    fn magnetic_velocity_field() {
        let st = WavePacketSpec::magnetic_gaussian(0.8).evolved(2.0);
        let x = [0.3, -0.5, 1.2];
        let v = velocity(&st, x).unwrap();
        assert!((v[2] - 2.0 * 1.2 / 5.0).abs() < 1e-14);
        assert!((v[0] - x[1]).abs() < 1e-14 && (v[1] + x[0]).abs() < 1e-14);
        // unit angular speed
        let c = Cylindrical::from_cartesian(x);
        let phidot = (x[0] * v[1] - x[1] * v[0]) / (c.r * c.r);
        assert!((phidot.abs() - 1.0).abs() < 1e-14);
        let free = WavePacketSpec::free_gaussian(0.5, 0.0).unwrap().evolved(0.0);
        assert_eq!(velocity(&free, x).unwrap(), [0.0; 3]);
    }

    #[test]
    fn gauge_invariance_of_velocity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let t = rng.random_range(0.0..20.0);
            let eta = rng.random_range(-3.0..3.0);
            let a = velocity(&WavePacketSpec::magnetic_gaussian(0.0).evolved(t), x).unwrap();
            let g = GaugeGeometry::magnetic(eta, 1.0).vector_potential();
            let b = guiding_velocity(&WavePacketSpec::magnetic_gaussian(eta).evolved(t), &g, x).unwrap();
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn node_is_reported() {
        let st = WavePacketSpec::magnetic_gaussian(0.0).evolved(0.0);
        assert!(matches!(velocity(&st, [60.0, 0.0, 0.0]), Err(TofError::NodeEncountered { .. })));
    }

    #[test]
    fn helix_examples() {
        let x0 = Cylindrical { r: 1.0, phi: 0.0, z: 0.5 };
        let c = helix_at(x0, 3f64.sqrt(), FieldMode::Uniform);
        assert!((c.z - 1.0).abs() < 1e-15 && c.r == 1.0);
        assert_eq!(arrival_time_of(2.0, 2.0), Arrival::At(0.0));
        let Arrival::At(t) = arrival_time_of(2.0 / 2f64.sqrt(), 2.0) else { panic!() };
        assert!((t - 1.0).abs() < 1e-14);
        for z in [-0.3, 0.0, 2.5] {
            assert!(arrival_time_of(z, 2.0).is_never());
        }
        let ts: Vec<f64> = (1..100).map(|i| arrival_time_of(0.02 * i as f64, 2.0).time().unwrap()).collect();
        assert!(ts.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn numeric_matches_helix() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let spec = WavePacketSpec::magnetic_gaussian(0.3);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let x0 = sample_initial(&mut rng);
            let tr = integrate_trajectory(&spec, x0.to_cartesian(), 1.0, 50.0, &DopriOptions::default()).unwrap();
            let h = BohmianTrajectory::helix(x0, 1.0, FieldMode::Uniform);
            for t in [1.0, 10.0, 33.3, 50.0] {
                let (a, b) = (tr.at(t), h.at(t));
                worst = worst.max((0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max));
            }
            match h.arrival.time() {
                Some(t) if t < 49.0 => assert!(!tr.arrival.is_never()),
                Some(t) if t < 51.0 => {}
                _ => assert!(tr.arrival.is_never()),
            }
            if let (Some(a), Some(b)) = (tr.arrival.time(), h.arrival.time()) {
                if b < 50.0 {
                    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
                }
            }
            assert!(tr.crossings <= 1);
            let rmax = [5.0, 20.0, 50.0].iter().map(|t| (Cylindrical::from_cartesian(tr.at(*t)).r - x0.r).abs());
            assert!(rmax.fold(0.0, f64::max) < 1e-8);
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn gauge_identical_paths() {
        let x0 = [0.4, -0.2, 0.3];
        let o = DopriOptions::default();
        let a = integrate_trajectory(&WavePacketSpec::magnetic_gaussian(0.0), x0, 1.0, 10.0, &o).unwrap();
        let b = integrate_trajectory(&WavePacketSpec::magnetic_gaussian(1.7), x0, 1.0, 10.0, &o).unwrap();
        for t in linear_grid(0.0, 10.0, 41) {
            let (p, q) = (a.at(t), b.at(t));
            assert!((0..3).all(|k| (p[k] - q[k]).abs() < 1e-10), "t={t}");
        }
    }

    #[test]
    fn generic_family_trajectory() {
        // free Gaussian moving right: every trajectory crosses once
        let spec = WavePacketSpec::free_gaussian(0.5, 2.0).unwrap();
        let tr = integrate_trajectory(&spec, [0.1, 0.2, -0.3], 5.0, 100.0, &DopriOptions::default()).unwrap();
        assert_eq!(tr.crossings, 1);
        let t = tr.arrival.time().unwrap();
        assert!((tr.at(t)[2] - 5.0).abs() < 1e-8);
        let back = integrate_trajectory(&spec, [0.1, 0.2, -0.3], -5.0, 20.0, &DopriOptions::default()).unwrap();
        assert!(back.arrival.is_never() && !back.censored);
    }

    #[test]
    fn seeded_determinism() {
        let a = TrajectoryEnsemble::sample(1000, 9).unwrap();
        let b = TrajectoryEnsemble::sample(1000, 9).unwrap();
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        rng.set_stream(17);
        assert_eq!(sample_initial(&mut rng), a.x0[17]);
        assert_ne!(a, TrajectoryEnsemble::sample(1000, 10).unwrap());
    }

    #[test]
    fn equivariance() {
        let n = 100_000;
        let ens = TrajectoryEnsemble::sample(n, 5).unwrap();
        let pushed = ens.pushed(5.0, FieldMode::Uniform);
        let s = 26f64.sqrt();
        let mut z: Vec<f64> = pushed.iter().map(|c| c.z).collect();
        let dz = ks_statistic(&mut z, |x| 0.5 * (1.0 + erf(x / s)));
        let mut r: Vec<f64> = pushed.iter().map(|c| c.r).collect();
        let dr = ks_statistic(&mut r, |x| 1.0 - (-x * x).exp());
        assert!(dz < ks_band_99(n) && dr < ks_band_99(n), "{dz} {dr}");
        // numerically integrated flow, smaller sample
        let m = 1000;
        let spec = WavePacketSpec::magnetic_gaussian(0.0);
        let o = DopriOptions { rel_tol: 1e-8, abs_tol: 1e-10, ..Default::default() };
        let mut zn: Vec<f64> = ens.x0[..m]
            .par_iter()
            .map(|x| integrate_trajectory(&spec, x.to_cartesian(), 1e9, 5.0, &o).unwrap().at(5.0)[2])
            .collect();
        assert!(ks_statistic(&mut zn, |x| 0.5 * (1.0 + erf(x / s))) < ks_band_99(m));
    }

    #[test]
    fn single_crossing() {
        let ens = TrajectoryEnsemble::sample(2000, 1).unwrap();
        for x in &ens.x0 {
            // Ż has the sign of Z, so z − L changes sign at most once
            let zs: Vec<f64> =
                linear_grid(0.0, 100.0, 201).iter().map(|t| helix_at(*x, *t, FieldMode::Uniform).z - 1.0).collect();
            let changes = zs.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
            assert!(changes <= 1);
        }
    }

    #[test]
    fn exact_density_normalization() {
        for l in [1.0, 3.0, 10.0] {
            let spec = QuadratureSpec::precise().with_tolerances(1e-14, 1e-12);
            // ξ = 1/τ on the tail keeps the interval finite
            let head = integrate_real(|t| pi_bm_exact(l, t), 0.0, 10.0 * l, &spec).unwrap();
            let tail = integrate_real(|u| pi_bm_exact(l, 1.0 / u) / (u * u), 1e-300, 1.0 / (10.0 * l), &spec).unwrap();
            let total = head + tail;
            assert!((total - 0.5 * erf(l)).abs() < 1e-8, "L={l}: {total}");
            assert!((total + p_infinity_exact(l) - 1.0).abs() < 1e-8);
            assert!((pi_bm_cdf(l, 1e12) - 0.5 * erf(l)).abs() < 1e-10);
        }
        assert_eq!(pi_bm_exact(1.0, -0.5), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let (t, l) = (rng.random_range(0.0..50.0), rng.random_range(0.1..20.0));
            assert_eq!(pi_bm_exact(l, t), pi_qf_closed(l, t));
        }
    }

    #[test]
    fn histogram_and_ks() {
        let n = 100_000;
        let ens = TrajectoryEnsemble::sample(n, 12).unwrap();
        for l in [1.0, 100.0] {
            let edges = linear_grid(0.0, 500.0 * l, 2001);
            let h = pi_bm_histogram(&ens, l, &edges).unwrap();
            let p = p_infinity_exact(l);
            assert!((h.p_infinity - p).abs() < 3.0 * h.p_infinity_stderr.max(1e-12), "L={l}: {} vs {p}", h.p_infinity);
            assert!((h.total() - 1.0).abs() < 1e-12);
            assert!(h.outside < 3.0 / (n as f64).sqrt());
            let d = ks_distance(&ens.arrivals(l), l);
            assert!(d < ks_band_99(n), "L={l}: {d}");
        }
        let mut buf = Vec::new();
        pi_bm_histogram(&ens, 1.0, &[0.0, 1.0, 2.0]).unwrap().write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("tau_lo,tau_hi,density,mc_stderr"));
    }
}
