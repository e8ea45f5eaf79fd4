//! CSV files with metadata sidecars, and static SVG overlays.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use toflab::DistributionCurve;

use crate::CliError;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes `<stem>.csv` and `<stem>.meta.csv`; returns the data path.
pub fn write_curve(dir: &Path, stem: &str, curve: &DistributionCurve) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.csv"));
    curve.save_csv(&path)?;
    write_meta(dir, stem, curve)?;
    Ok(path)
}

pub fn write_meta(dir: &Path, stem: &str, curve: &DistributionCurve) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{stem}.meta.csv"));
    let mut out = String::from("key,value\n");
    let mut row = |k: &str, v: &str| {
        let _ = writeln!(out, "{},{}", csv_field(k), csv_field(v));
    };
    row("label", &curve.label);
    row("code_version", CODE_VERSION);
    row("norm", &format!("{:.16e}", curve.norm));
    if let Some(p) = curve.p_infinity {
        row("p_infinity", &format!("{p:.16e}"));
    }
    for (k, v) in &curve.meta {
        row(k, v);
    }
    fs::write(&path, out)?;
    Ok(path)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reads a metadata sidecar back into pairs.
pub fn read_meta(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)?;
    let mut rd = csv_lines(&text);
    rd.remove(0);
    Ok(rd)
}

fn csv_lines(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| {
            let (k, v) = l.split_once(',')?;
            Some((k.to_string(), v.trim_matches('"').replace("\"\"", "\"")))
        })
        .collect()
}

const PALETTE: [&str; 8] = ["#1b6ca8", "#d1495b", "#edae49", "#00798c", "#6a4c93", "#30638e", "#8d6a9f", "#3d3d3d"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YScale {
    Linear,
    /// `log₁₀`, showing six decades; smaller values sit on the bottom axis.
    Log,
}

/// A line plot of several curves sharing axes.
pub fn svg_overlay(title: &str, curves: &[&DistributionCurve], scale: YScale) -> String {
    let ty = |v: f64| match scale {
        YScale::Linear => v,
        YScale::Log if v > 0.0 => v.log10(),
        YScale::Log if v.is_nan() => v,
        YScale::Log => f64::NEG_INFINITY,
    };
    let (w, h) = (720.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 170.0, 40.0, 50.0);
    let finite = |v: &f64| v.is_finite();
    let x_max = curves.iter().flat_map(|c| c.tau.iter().copied()).filter(finite).fold(0.0, f64::max);
    let x_min = curves.iter().flat_map(|c| c.tau.iter().copied()).filter(finite).fold(f64::INFINITY, f64::min);
    let ys = || curves.iter().flat_map(|c| c.density.iter().map(|v| ty(*v))).filter(finite);
    let (y_min, y_max) = match scale {
        YScale::Linear => (ys().fold(0.0, f64::min), ys().fold(0.0, f64::max)),
        YScale::Log => {
            let hi = ys().fold(f64::NEG_INFINITY, f64::max);
            (ys().fold(f64::INFINITY, f64::min).max(hi - 6.0), hi)
        }
    };
    let (y_min, y_max) = if y_max > y_min { (y_min, y_max + 0.05 * (y_max - y_min)) } else { (y_min, y_min + 1.0) };
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let sx = |x: f64| ml + (x - x_min) / x_span * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (w - mr + ml) / 2.0,
        xml(title)
    );
    let (x0, y0, x1, y1) = (sx(x_min), sy(y_min), sx(x_max), sy(y_max));
    let _ = writeln!(s, r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black"/>"#);
    for i in 0..=5 {
        let xv = x_min + x_span * i as f64 / 5.0;
        let yv = y_min + (y_max - y_min) * i as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(xv), y0 + 18.0, tick(xv));
        let label = match scale {
            YScale::Linear => tick(yv),
            YScale::Log => format!("1e{:.1}", yv),
        };
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, sy(yv) + 4.0, label);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">τ</text>"#, (x0 + x1) / 2.0, h - 10.0);
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        let mut pen_up = true;
        for (t, v) in c.tau.iter().zip(&c.density) {
            let v = &ty(*v);
            let v = &if v.is_nan() { *v } else { v.max(y_min) };
            if !v.is_finite() {
                pen_up = true;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, sx(*t), sy(*v));
            pen_up = false;
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        let ly = mt + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            w - mr + 15.0,
            w - mr + 40.0,
            w - mr + 46.0,
            ly + 4.0,
            xml(&c.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-2 && v.abs() < 1e4 {
        format!("{}", (v * 1000.0).round() / 1000.0)
    } else {
        format!("{v:.1e}")
    }
}

fn xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let c = DistributionCurve::new("std", vec![0.0, 1.0], vec![0.5, 0.25])
            .unwrap()
            .with_meta("eta", 0.5)
            .with_meta("note", "a,b");
        write_curve(dir.path(), "x", &c).unwrap();
        let m = read_meta(&dir.path().join("x.meta.csv")).unwrap();
        assert!(m.contains(&("eta".into(), "0.5".into())));
        assert!(m.contains(&("note".into(), "a,b".into())));
        assert!(m.iter().any(|(k, _)| k == "code_version"));
    }

    #[test]
    fn svg_has_one_path_per_curve() {
        let a = DistributionCurve::new("a", vec![0.0, 1.0, 2.0], vec![0.0, 1.0, f64::NAN]).unwrap();
        let b = DistributionCurve::new("b<1>", vec![0.0, 1.0, 2.0], vec![0.5, 0.2, 0.1]).unwrap();
        let s = svg_overlay("t", &[&a, &b], YScale::Linear);
        assert_eq!(s.matches("<path d=\"M").count(), 3);
        assert!(s.contains("b&lt;1&gt;"));
        assert!(s.ends_with("</svg>\n"));
        let l = svg_overlay("t", &[&a, &b], YScale::Log);
        assert_eq!(l.matches("<path d=\"M").count(), 3);
    }
}
