//! Registry of property checks run by `toflab check`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use toflab::abk::{ab_tau_grid, pi_ab, pi_ab_curve, AbMethod, Line1DPacket};
use toflab::bohmian::{
    guiding_velocity, helix_at, integrate_trajectory, ks_band_99, ks_distance, ks_statistic, p_infinity_exact,
    pi_bm_histogram, sample_initial, velocity, BohmianTrajectory, DopriOptions, TrajectoryEnsemble,
};
use toflab::curve::{linear_grid, power_law_tail};
use toflab::flux::{cpc_check, current, current_density, pi_qf, pi_qf_closed, SurfacePatch};
use toflab::kijowski::{axiom_corpus, check_axioms, pi_kij, PlaneDetector, AXIOM_CORPUS_SEED};
use toflab::numerics::erf;
use toflab::numerics::halfline::{power_gaussian_halfline, HalflineMethod};
use toflab::standard::{
    delta_well_constancy, gauge_dependence_metric, pi_std_curve, pi_std_magnetic, StdConfig, StdMethod,
};
use toflab::states::{magnetic_state_position, FieldMode};
use toflab::{Complex64, GaugeGeometry, Result, Vec3, WavePacketSpec};

/// Settings shared by every check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckContext {
    pub seed: u64,
    /// Hidden fault injection for the closed-form `Π_STD` path.
    pub corrupt_sigma: bool,
}

impl Default for CheckContext {
    fn default() -> Self {
        CheckContext { seed: 1, corrupt_sigma: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    /// Worst deviation (or the measured statistic).
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Outcome {
    /// Passes when `value ≤ tolerance`.
    fn within(value: f64, tolerance: f64) -> Self {
        Outcome { passed: value <= tolerance, value, tolerance, detail: String::new() }
    }

    fn above(value: f64, threshold: f64) -> Self {
        Outcome { passed: value > threshold, value, tolerance: threshold, detail: String::new() }
    }

    fn note(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

pub struct Property {
    pub module: &'static str,
    pub name: &'static str,
    pub run: fn(&CheckContext) -> Result<Outcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub module: &'static str,
    pub name: &'static str,
    pub outcome: std::result::Result<Outcome, String>,
    pub seconds: f64,
}

impl Row {
    pub fn passed(&self) -> bool {
        self.outcome.as_ref().is_ok_and(|o| o.passed)
    }

    pub fn to_json(&self) -> Value {
        match &self.outcome {
            Ok(o) => json!({
                "module": self.module,
                "property": self.name,
                "passed": o.passed,
                "value": o.value,
                "tolerance": o.tolerance,
                "detail": o.detail,
                "seconds": self.seconds,
            }),
            Err(e) => json!({
                "module": self.module,
                "property": self.name,
                "passed": false,
                "error": e,
                "seconds": self.seconds,
            }),
        }
    }
}

fn rng(ctx: &CheckContext, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(ctx.seed);
    r.set_stream(stream);
    r
}

fn point(r: &mut ChaCha8Rng, s: f64) -> Vec3 {
    [r.random_range(-s..s), r.random_range(-s..s), r.random_range(-s..s)]
}

fn max_abs(a: Vec3, b: Vec3) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max)
}

fn halfline_methods(ctx: &CheckContext) -> Result<Outcome> {
    let mut r = rng(ctx, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let sigma = Complex64::new(r.random_range(0.05..3.0), r.random_range(-3.0..3.0));
        let k = Complex64::new(r.random_range(-15.0..15.0), 0.0);
        let mu = r.random_range(-0.5..3.5);
        let a = power_gaussian_halfline(mu, sigma, k, 0.0, HalflineMethod::Closed)?;
        let b = power_gaussian_halfline(mu, sigma, k, 0.0, HalflineMethod::Contour)?;
        worst = worst.max((a - b).norm() / b.norm().max(1e-300));
    }
    Ok(Outcome::within(worst, 1e-8))
}

fn gauge_phase(ctx: &CheckContext) -> Result<Outcome> {
    let mut r = rng(ctx, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = point(&mut r, 3.0);
        let (t, eta) = (r.random_range(0.0..10.0), r.random_range(-2.0..2.0));
        let a = magnetic_state_position(x, t, eta);
        let b = magnetic_state_position(x, t, 0.0) * Complex64::from_polar(1.0, -0.5 * eta * x[2] * x[2]);
        worst = worst.max((a - b).norm());
    }
    Ok(Outcome::within(worst, 1e-12))
}

fn corpus_normalization(ctx: &CheckContext) -> Result<Outcome> {
    let corpus = axiom_corpus(40, ctx.seed)?;
    let worst = corpus.iter().map(|p| p.mixture.norm_sq().map(|n| (n - 1.0).abs())).collect::<Result<Vec<_>>>()?;
    Ok(Outcome::within(worst.into_iter().fold(0.0, f64::max), 1e-10))
}

fn ab_time_symmetry(ctx: &CheckContext) -> Result<Outcome> {
    let mut r = rng(ctx, 3);
    let p = Line1DPacket::gaussian(0.0, 0.7, 2.0)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let t = r.random_range(0.0..20.0);
        worst = worst.max((pi_ab(&p, t)? - pi_ab(&p, -t)?).abs());
    }
    Ok(Outcome::within(worst, 1e-10))
}

fn ab_galilean(ctx: &CheckContext) -> Result<Outcome> {
    let mut r = rng(ctx, 4);
    let p = Line1DPacket::gaussian(1.2, 0.4, 3.0)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (a, t) = (r.random_range(-3.0..3.0), r.random_range(-5.0..15.0));
        let shifted = p.translated(a).with_l(3.0 + a);
        worst = worst.max((pi_ab(&shifted, t)? - pi_ab(&p, t)?).abs());
    }
    Ok(Outcome::within(worst, 1e-10))
}

fn ab_normalization(_: &CheckContext) -> Result<Outcome> {
    let p = Line1DPacket::gaussian(1.0, 0.5, 5.0)?;
    let grid = ab_tau_grid(&p, 400, 200)?;
    let c = pi_ab_curve(&p, &grid, AbMethod::Auto)?;
    let n = c.len();
    let right = power_law_tail(
        &c.tau.iter().rev().copied().collect::<Vec<_>>(),
        &c.density.iter().rev().copied().collect::<Vec<_>>(),
    );
    let left = power_law_tail(&c.tau, &c.density);
    let total = c.norm + right + left;
    Ok(Outcome::within((total - 1.0).abs(), 1e-3).note(format!("{n} points")))
}

fn kijowski_axioms(_: &CheckContext) -> Result<Outcome> {
    let corpus = axiom_corpus(100, AXIOM_CORPUS_SEED)?;
    let out = check_axioms(&corpus)?;
    let failed: Vec<&str> = out.iter().filter(|o| !o.passed()).map(|o| o.name).collect();
    let worst = out.iter().map(|o| o.failures as f64).sum();
    Ok(Outcome::within(worst, 0.0).note(if failed.is_empty() { "all axioms".into() } else { failed.join(",") }))
}

fn kijowski_reduction(_: &CheckContext) -> Result<Outcome> {
    let spec = WavePacketSpec::free_gaussian(0.5, 1.0)?;
    let line = Line1DPacket::gaussian(1.0, 0.5f64.sqrt(), 4.0)?;
    let mut worst: f64 = 0.0;
    for t in linear_grid(-5.0, 20.0, 26) {
        worst = worst.max((pi_kij(&spec, PlaneDetector::new(4.0), t)? - pi_ab(&line, t)?).abs());
    }
    Ok(Outcome::within(worst, 1e-6))
}

fn std_cross_check(ctx: &CheckContext) -> Result<Outcome> {
    let mut r = rng(ctx, 5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let g = GaugeGeometry::magnetic(r.random_range(-2.0..2.0), r.random_range(0.0..20.0));
        let tau = r.random_range(0.0..100.0);
        let mut closed = StdConfig::new(g, vec![]).with_method(StdMethod::ClosedForm);
        closed.corrupt_sigma = ctx.corrupt_sigma;
        let quad = StdConfig::new(g, vec![]).with_method(StdMethod::DirectQuadrature);
        let (a, b) = (pi_std_magnetic(&closed, tau)?, pi_std_magnetic(&quad, tau)?);
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1e-300));
    }
    Ok(Outcome::within(worst, 1e-6))
}

fn std_eta_continuity(_: &CheckContext) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for tau in [0.5, 3.0, 30.0] {
        let at = |eta| pi_std_magnetic(&StdConfig::new(GaugeGeometry::magnetic(eta, 2.0), vec![]), tau);
        let c = at(0.0)?;
        worst = worst.max((at(1e-7)? - c).abs() / c).max((at(-1e-7)? - c).abs() / c);
    }
    Ok(Outcome::within(worst, 1e-4))
}

fn std_gauge_dependence(_: &CheckContext) -> Result<Outcome> {
    let a = StdConfig::new(GaugeGeometry::magnetic(0.0, 1.0), linear_grid(0.0, 20.0, 201));
    let b = a.with_eta(0.5);
    let d = gauge_dependence_metric(&a, &b)? / pi_std_curve(&a)?.peak_value();
    Ok(Outcome::above(d, 0.01))
}

fn delta_well(_: &CheckContext) -> Result<Outcome> {
    let r = delta_well_constancy(1.0)?;
    let mut o = Outcome::within(r.spread, 1e-8);
    o.passed &= r.constant() > 0.0;
    Ok(o)
}

fn current_gauge(ctx: &CheckContext) -> Result<Outcome> {
    let mut r = rng(ctx, 6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = point(&mut r, 3.0);
        let (t, eta) = (r.random_range(0.0..20.0), r.random_range(-3.0..3.0));
        let a = current(&WavePacketSpec::magnetic_gaussian(0.0).evolved(t), x)?;
        let g = GaugeGeometry::magnetic(eta, 1.0).vector_potential();
        let b = current_density(&WavePacketSpec::magnetic_gaussian(eta).evolved(t), &g, x)?;
        worst = worst.max(max_abs(a, b));
    }
    Ok(Outcome::within(worst, 1e-10))
}

fn continuity(ctx: &CheckContext) -> Result<Outcome> {
    let mut r = rng(ctx, 7);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for spec in [WavePacketSpec::magnetic_gaussian(0.7), WavePacketSpec::free_gaussian(0.5, 1.5)?] {
        for _ in 0..10 {
            let x = point(&mut r, 1.5);
            let t = r.random_range(0.1..3.0);
            let rho = |x: Vec3, t: f64| spec.evolved(t).position(x).map(|p| p.norm_sqr());
            let mut div = 0.0;
            for k in 0..3 {
                let (mut xp, mut xm) = (x, x);
                xp[k] += h;
                xm[k] -= h;
                div += (current(&spec.evolved(t), xp)?[k] - current(&spec.evolved(t), xm)?[k]) / (2.0 * h);
            }
            let drho = (rho(x, t + h)? - rho(x, t - h)?) / (2.0 * h);
            worst = worst.max((drho + div).abs() / (drho.abs() + div.abs() + rho(x, t)?).max(1e-3));
        }
    }
    Ok(Outcome::within(worst, 1e-4))
}

fn qf_closed_form(_: &CheckContext) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for l in [1.0, 10.0, 100.0] {
        for tau in linear_grid(0.0, 300.0, 50) {
            let v = pi_qf(&WavePacketSpec::magnetic_gaussian(0.5), &SurfacePatch::plane(l), tau)?;
            let c = pi_qf_closed(l, tau);
            if c > 1e-290 {
                worst = worst.max((v - c).abs() / c);
            }
        }
    }
    Ok(Outcome::within(worst, 1e-6))
}

fn cpc_magnetic(_: &CheckContext) -> Result<Outcome> {
    let r = cpc_check(
        &WavePacketSpec::magnetic_gaussian(0.5),
        &SurfacePatch::plane(1.0),
        &linear_grid(0.0, 50.0, 101),
        1e-15,
    )?;
    let worst = r.worst.map_or(0.0, |w| -w.1);
    Ok(Outcome { passed: r.holds, value: worst, tolerance: r.tolerance, detail: format!("dt = {}", r.t_resolution) })
}

fn velocity_gauge(ctx: &CheckContext) -> Result<Outcome> {
    let mut r = rng(ctx, 8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = point(&mut r, 3.0);
        let (t, eta) = (r.random_range(0.0..20.0), r.random_range(-3.0..3.0));
        let a = velocity(&WavePacketSpec::magnetic_gaussian(0.0).evolved(t), x)?;
        let g = GaugeGeometry::magnetic(eta, 1.0).vector_potential();
        let b = guiding_velocity(&WavePacketSpec::magnetic_gaussian(eta).evolved(t), &g, x)?;
        worst = worst.max(max_abs(a, b));
    }
    Ok(Outcome::within(worst, 1e-10))
}

fn numeric_helix(ctx: &CheckContext) -> Result<Outcome> {
    let mut r = rng(ctx, 9);
    let spec = WavePacketSpec::magnetic_gaussian(0.3);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let x0 = sample_initial(&mut r);
        let tr = integrate_trajectory(&spec, x0.to_cartesian(), 1.0, 50.0, &DopriOptions::default())?;
        let h = BohmianTrajectory::helix(x0, 1.0, FieldMode::Uniform);
        for t in [5.0, 25.0, 50.0] {
            worst = worst.max(max_abs(tr.at(t), h.at(t)));
        }
    }
    Ok(Outcome::within(worst, 1e-6))
}

fn equivariance(ctx: &CheckContext) -> Result<Outcome> {
    let n = 100_000;
    let ens = TrajectoryEnsemble::sample(n, ctx.seed)?;
    let s = 26f64.sqrt();
    let mut z: Vec<f64> = ens.pushed(5.0, FieldMode::Uniform).iter().map(|c| c.z).collect();
    let d = ks_statistic(&mut z, |x| 0.5 * (1.0 + erf(x / s)));
    Ok(Outcome::within(d, ks_band_99(n)))
}

fn single_crossing(ctx: &CheckContext) -> Result<Outcome> {
    let ens = TrajectoryEnsemble::sample(2000, ctx.seed)?;
    let grid = linear_grid(0.0, 100.0, 201);
    let worst = ens
        .x0
        .iter()
        .map(|x| {
            let zs: Vec<f64> = grid.iter().map(|t| helix_at(*x, *t, FieldMode::Uniform).z - 1.0).collect();
            zs.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
        })
        .max()
        .unwrap_or(0);
    Ok(Outcome::within(worst as f64, 1.0))
}

fn seeded_determinism(ctx: &CheckContext) -> Result<Outcome> {
    let a = TrajectoryEnsemble::sample(5000, ctx.seed)?;
    let b = TrajectoryEnsemble::sample(5000, ctx.seed)?;
    let same = a.x0.iter().zip(&b.x0).all(|(p, q)| {
        p.r.to_bits() == q.r.to_bits() && p.phi.to_bits() == q.phi.to_bits() && p.z.to_bits() == q.z.to_bits()
    });
    Ok(Outcome { passed: same, value: f64::from(u8::from(!same)), tolerance: 0.0, detail: String::new() })
}

fn bohmian_identity(ctx: &CheckContext) -> Result<Outcome> {
    let n = 100_000;
    let l = 100.0;
    let ens = TrajectoryEnsemble::sample(n, ctx.seed)?;
    let d = ks_distance(&ens.arrivals(l), l);
    let h = pi_bm_histogram(&ens, l, &linear_grid(0.0, 1e4, 101))?;
    let z = (h.p_infinity - p_infinity_exact(l)).abs() / h.p_infinity_stderr;
    let mut o = Outcome::within(d, ks_band_99(n)).note(format!("p_infinity z-score {z:.3}"));
    o.passed &= z < 3.0;
    Ok(o)
}

fn csv_determinism(_: &CheckContext) -> Result<Outcome> {
    let cfg = StdConfig::new(GaugeGeometry::magnetic(0.5, 10.0), linear_grid(0.0, 50.0, 51));
    let write = || -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        pi_std_curve(&cfg)?.write_csv(&mut buf)?;
        Ok(buf)
    };
    let same = write()? == write()?;
    Ok(Outcome { passed: same, value: f64::from(u8::from(!same)), tolerance: 0.0, detail: String::new() })
}

/// Every registered property, in report order.
pub fn registry() -> Vec<Property> {
    macro_rules! p {
        ($m:literal, $n:literal, $f:ident) => {
            Property { module: $m, name: $n, run: $f }
        };
    }
    vec![
        p!("numerics", "halfline_closed_vs_contour", halfline_methods),
        p!("states", "quadratic_gauge_phase", gauge_phase),
        p!("states", "mixture_normalization", corpus_normalization),
        p!("abk", "time_symmetry_real_packet", ab_time_symmetry),
        p!("abk", "galilean_shift", ab_galilean),
        p!("abk", "normalization", ab_normalization),
        p!("kijowski", "axioms_i_to_iv", kijowski_axioms),
        p!("kijowski", "reduces_to_ab", kijowski_reduction),
        p!("standard", "closed_vs_quadrature", std_cross_check),
        p!("standard", "eta_continuity", std_eta_continuity),
        p!("standard", "gauge_dependence", std_gauge_dependence),
        p!("standard", "delta_well_constancy", delta_well),
        p!("flux", "current_gauge_invariance", current_gauge),
        p!("flux", "continuity_equation", continuity),
        p!("flux", "qf_closed_form", qf_closed_form),
        p!("flux", "cpc_magnetic_plane", cpc_magnetic),
        p!("bohmian", "velocity_gauge_invariance", velocity_gauge),
        p!("bohmian", "numeric_vs_helix", numeric_helix),
        p!("bohmian", "equivariance", equivariance),
        p!("bohmian", "single_crossing", single_crossing),
        p!("bohmian", "seeded_determinism", seeded_determinism),
        p!("bohmian", "qf_identity", bohmian_identity),
        p!("cli", "csv_determinism", csv_determinism),
    ]
}

pub fn run_property(p: &Property, ctx: &CheckContext) -> Row {
    let start = Instant::now();
    let outcome = (p.run)(ctx).map_err(|e| e.to_string());
    Row { module: p.module, name: p.name, outcome, seconds: start.elapsed().as_secs_f64() }
}

/// Runs the properties whose `module/name` contains `filter` (all if `None`).
pub fn run_checks(ctx: &CheckContext, filter: Option<&str>) -> Vec<Row> {
    registry()
        .iter()
        .filter(|p| filter.is_none_or(|f| format!("{}/{}", p.module, p.name).contains(f)))
        .map(|p| run_property(p, ctx))
        .collect()
}
