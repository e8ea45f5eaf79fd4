//! Scenario runners.

use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::{json, Value};
use toflab::abk::{ab_tau_grid, moment_condition_check, nondetection_ab, pi_ab_curve, AbMethod, Line1DPacket};
use toflab::bohmian::{ks_band_99, ks_distance, p_infinity_exact, pi_bm_exact, pi_bm_histogram, TrajectoryEnsemble};
use toflab::curve::{linear_grid, positive_grid, power_law_tail, trapezoid};
use toflab::flux::{backflow_demo, pi_qf_curve, SurfacePatch};
use toflab::kijowski::{axiom_corpus, axiom_v_counterexample_report, check_axioms, AXIOM_CORPUS_SEED};
use toflab::standard::{delta_well_constancy, pi_std_magnetic, StdConfig};
use toflab::{DistributionCurve, TofError, WavePacketSpec};

use crate::config::{method_name, RunConfig, Scenario};
use crate::output::{svg_overlay, write_curve, YScale};
use crate::CliError;

/// Largest allowed gauge deviation of the flux curve, relative to its peak.
pub const QF_GAUGE_TOL: f64 = 1e-10;

fn tag(eta: f64) -> String {
    format!("{eta}")
}

fn annotate(c: DistributionCurve, cfg: &RunConfig, eta: Option<f64>) -> DistributionCurve {
    let g = &cfg.geometry;
    c.with_meta("units", g.units.label())
        .with_meta("eta", eta.map_or("any".to_string(), tag))
        .with_meta("L", g.l)
        .with_meta("B0", g.units.b0)
        .with_meta("method", method_name(cfg.method))
        .with_meta("seed", cfg.seed)
}

fn std_config(cfg: &RunConfig, eta: f64, grid: Vec<f64>) -> StdConfig {
    let mut geometry = cfg.geometry;
    geometry.eta = eta;
    let mut s = StdConfig::new(geometry, grid).with_method(cfg.method);
    s.corrupt_sigma = cfg.corrupt_sigma;
    s
}

/// `Π_STD` on the grid; points that fail to converge become gaps (NaN).
pub fn std_curve_with_gaps(sc: &StdConfig) -> Result<(DistributionCurve, usize), CliError> {
    sc.validate()?;
    let vals = sc
        .tau_grid
        .par_iter()
        .map(|&t| match pi_std_magnetic(sc, t) {
            Ok(v) => Ok(v),
            Err(TofError::NonConvergence { .. }) => Ok(f64::NAN),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let gaps = vals.iter().filter(|v| v.is_nan()).count();
    let c = DistributionCurve::new(format!("std eta={}", sc.geometry.eta), sc.tau_grid.clone(), vals)?;
    Ok((c, gaps))
}

fn qf_spec(cfg: &RunConfig, eta: f64) -> WavePacketSpec {
    WavePacketSpec::magnetic_gaussian_in(eta, cfg.geometry.units.field_mode())
}

/// `∫₀^∞` and `∫_{−∞}^0` of the `η = 0` curve, each with its power-law tail.
pub fn eta0_halves(cfg: &RunConfig) -> Result<(f64, f64), CliError> {
    let l = cfg.geometry.l.abs().max(1.0);
    let grid = positive_grid(4.0 * l, 2000, 1e4 * l, 300);
    let mut sc = std_config(cfg, 0.0, grid.clone());
    sc.diagnostic = true;
    let half = |sign: f64| -> Result<f64, CliError> {
        let d = grid.par_iter().map(|&t| pi_std_magnetic(&sc, sign * t)).collect::<Result<Vec<_>, _>>()?;
        let rt: Vec<f64> = grid.iter().rev().copied().collect();
        let rd: Vec<f64> = d.iter().rev().copied().collect();
        Ok(trapezoid(&grid, &d) + power_law_tail(&rt, &rd))
    };
    Ok((half(1.0)?, half(-1.0)?))
}

#[derive(Debug, Clone)]
pub struct Fig1Output {
    pub std_curves: Vec<DistributionCurve>,
    pub qf: DistributionCurve,
    /// Largest `|Π_QF(η) − Π_QF(0)|` over the η list, relative to the peak.
    pub qf_gauge_deviation: f64,
    /// `∫₀^∞ Π_STD + P∞` for `η = 0`, when `0` is in the list.
    pub eta0_normalization: Option<f64>,
    pub files: Vec<PathBuf>,
}

pub fn run_fig1(cfg: &RunConfig) -> Result<Fig1Output, CliError> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let grid = cfg.tau_grid();
    let mut files = Vec::new();

    let plane = SurfacePatch::plane(cfg.geometry.l);
    let qf_ref = pi_qf_curve(&qf_spec(cfg, 0.0), &plane, &grid)?;
    let peak = qf_ref.peak_value().max(f64::MIN_POSITIVE);
    let mut qf_gauge_deviation: f64 = 0.0;
    for &eta in &cfg.eta_list {
        let c = pi_qf_curve(&qf_spec(cfg, eta), &plane, &grid)?;
        qf_gauge_deviation = qf_gauge_deviation.max(c.sup_difference(&qf_ref)? / peak);
    }
    if qf_gauge_deviation > QF_GAUGE_TOL {
        return Err(CliError::Check(format!("flux curve changed with the gauge by {qf_gauge_deviation:e}")));
    }
    let mut qf = annotate(qf_ref, cfg, None);
    qf.label = "qf (all eta)".into();
    files.push(write_curve(dir, "qf", &qf)?);

    let eta0_normalization = if cfg.eta_list.contains(&0.0) {
        let (pos, neg) = eta0_halves(cfg)?;
        Some(pos + neg)
    } else {
        None
    };

    let mut std_curves = Vec::new();
    for &eta in &cfg.eta_list {
        let (c, gaps) = std_curve_with_gaps(&std_config(cfg, eta, grid.clone()))?;
        let mut c = annotate(c, cfg, Some(eta)).with_meta("gaps", gaps);
        if eta == 0.0 {
            if let Some(n) = eta0_normalization {
                c = c.with_meta("normalization_with_p_infinity", format!("{n:.12}"));
            }
        }
        files.push(write_curve(dir, &format!("std_eta_{}", tag(eta)), &c)?);
        std_curves.push(c);
    }

    let mut all: Vec<&DistributionCurve> = std_curves.iter().collect();
    all.push(&qf);
    let svg = svg_overlay(&format!("arrival-time densities, L = {}", cfg.geometry.l), &all, YScale::Log);
    let svg_path = dir.join("fig1.svg");
    fs::write(&svg_path, svg)?;
    files.push(svg_path);
    Ok(Fig1Output { std_curves, qf, qf_gauge_deviation, eta0_normalization, files })
}

/// `Π_STD` per η, `Π_QF`, exact and sampled `Π_BM` at the configured `L`.
pub fn run_dist(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    let grid = cfg.tau_grid();
    let mut files = Vec::new();
    for &eta in &cfg.eta_list {
        let (c, gaps) = std_curve_with_gaps(&std_config(cfg, eta, grid.clone()))?;
        let c = annotate(c, cfg, Some(eta)).with_meta("gaps", gaps);
        files.push(write_curve(dir, &format!("std_eta_{}", tag(eta)), &c)?);
    }
    let qf = annotate(pi_qf_curve(&qf_spec(cfg, 0.0), &SurfacePatch::plane(cfg.geometry.l), &grid)?, cfg, None);
    files.push(write_curve(dir, "qf", &qf)?);
    let l = cfg.geometry.l;
    let exact = DistributionCurve::new("bm exact", grid.clone(), grid.iter().map(|&t| pi_bm_exact(l, t)).collect())?
        .with_p_infinity(p_infinity_exact(l));
    files.push(write_curve(dir, "bm_exact", &annotate(exact, cfg, None))?);
    let ens = TrajectoryEnsemble::sample(cfg.mc_n, cfg.seed)?;
    let hist = pi_bm_histogram(&ens, l, &grid)?;
    let path = dir.join("bm_hist.csv");
    hist.write_csv(fs::File::create(&path)?)?;
    files.push(path);
    let sampled = annotate(hist.curve()?, cfg, None).with_meta("mc_n", cfg.mc_n);
    files.push(crate::output::write_meta(dir, "bm_hist", &sampled)?);
    Ok(files)
}

/// Dumps a decimated set of trajectories and their arrival summary.
pub fn run_traj(cfg: &RunConfig, count: usize) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let ens = TrajectoryEnsemble::sample(cfg.mc_n, cfg.seed)?;
    let times = linear_grid(0.0, cfg.tau_max, 201);
    let path = dir.join("traj.csv");
    ens.write_dump(std::io::BufWriter::new(fs::File::create(&path)?), count, &times, cfg.geometry.units.field_mode())?;
    Ok(vec![path])
}

/// Runs the configured scenario and returns a JSON summary.
pub fn run_report(cfg: &RunConfig) -> Result<Value, CliError> {
    cfg.validate()?;
    let l = cfg.geometry.l;
    let v = match cfg.scenario {
        Scenario::Fig1 => {
            let out = run_fig1(cfg)?;
            let qf_peak = out.qf.peak_value();
            let curves: Vec<Value> = out
                .std_curves
                .iter()
                .map(|c| {
                    json!({
                        "label": c.label,
                        "peak": c.peak(),
                        "sup_diff_vs_qf_rel_peak": c.sup_difference(&out.qf).ok().map(|d| d / qf_peak),
                    })
                })
                .collect();
            json!({
                "qf_peak": out.qf.peak(),
                "qf_gauge_deviation": out.qf_gauge_deviation,
                "eta0_normalization": out.eta0_normalization,
                "std": curves,
                "files": out.files,
            })
        }
        Scenario::Abk1d => {
            let packet = Line1DPacket::gaussian(1.0, 0.5, l)?;
            let grid = ab_tau_grid(&packet, 400, 200)?;
            let c = annotate(pi_ab_curve(&packet, &grid, AbMethod::Auto)?, cfg, None);
            let p_inf = nondetection_ab(&c)?;
            let c = c.with_p_infinity(p_inf);
            let file = write_curve(&cfg.output_dir, "abk_1d", &c)?;
            json!({
                "norm_on_grid": c.norm,
                "p_infinity": p_inf,
                "peak": c.peak(),
                "moment_condition": moment_condition_check(&packet),
                "file": file,
            })
        }
        Scenario::KijowskiAxioms => {
            let corpus = axiom_corpus(1000, AXIOM_CORPUS_SEED)?;
            let out = check_axioms(&corpus)?;
            let rows: Vec<Value> = out
                .iter()
                .map(|o| json!({"axiom": o.name, "checked": o.checked, "failures": o.failures, "worst": o.worst, "tolerance": o.tolerance}))
                .collect();
            json!({ "seed": AXIOM_CORPUS_SEED, "axioms": rows })
        }
        Scenario::Counterexample => {
            let r = axiom_v_counterexample_report()?;
            json!({
                "f0_initial": r.f0_initial,
                "growth_exponent": r.exponent,
                "max_ratio_error": r.max_ratio_error,
                "time_integral_truncated": r.integral.truncated,
                "time_integral_tail": r.integral.tail,
                "time_integral_total": r.integral.total(),
            })
        }
        Scenario::DeltaWell => {
            let r = delta_well_constancy(l)?;
            json!({ "L": l, "values": r.values, "spread": r.spread, "constant": r.is_constant(1e-8) })
        }
        Scenario::BackflowDemo => {
            let r = backflow_demo()?;
            json!({
                "cpc_holds": r.holds,
                "worst_flux": r.worst.map(|w| w.1),
                "worst_at": r.worst.map(|w| (w.0.x, w.0.t)),
                "samples": r.samples,
                "t_resolution": r.t_resolution,
            })
        }
        Scenario::BohmianMc => {
            let ens = TrajectoryEnsemble::sample(cfg.mc_n, cfg.seed)?;
            let hist = pi_bm_histogram(&ens, l, &cfg.tau_grid())?;
            let ks = ks_distance(&ens.arrivals(l), l);
            json!({
                "n": cfg.mc_n,
                "seed": cfg.seed,
                "p_infinity": hist.p_infinity,
                "p_infinity_stderr": hist.p_infinity_stderr,
                "p_infinity_exact": p_infinity_exact(l),
                "ks": ks,
                "ks_band_99": ks_band_99(cfg.mc_n),
            })
        }
    };
    Ok(v)
}
