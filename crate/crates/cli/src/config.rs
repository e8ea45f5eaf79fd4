//! Run configuration: a flat `key = value` file plus flag overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use toflab::standard::StdMethod;
use toflab::GaugeGeometry;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Fig1,
    Abk1d,
    KijowskiAxioms,
    Counterexample,
    DeltaWell,
    BackflowDemo,
    BohmianMc,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Fig1,
        Scenario::Abk1d,
        Scenario::KijowskiAxioms,
        Scenario::Counterexample,
        Scenario::DeltaWell,
        Scenario::BackflowDemo,
        Scenario::BohmianMc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1 => "fig1",
            Scenario::Abk1d => "abk_1d",
            Scenario::KijowskiAxioms => "kijowski_axioms",
            Scenario::Counterexample => "counterexample",
            Scenario::DeltaWell => "delta_well",
            Scenario::BackflowDemo => "backflow_demo",
            Scenario::BohmianMc => "bohmian_mc",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown scenario `{s}`")))
    }
}

pub fn parse_method(s: &str) -> Result<StdMethod, CliError> {
    match s {
        "closed" => Ok(StdMethod::ClosedForm),
        "quad" => Ok(StdMethod::DirectQuadrature),
        _ => Err(CliError::Config(format!("method must be `closed` or `quad`, got `{s}`"))),
    }
}

pub fn method_name(m: StdMethod) -> &'static str {
    match m {
        StdMethod::ClosedForm => "closed",
        StdMethod::DirectQuadrature => "quad",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub geometry: GaugeGeometry,
    pub eta_list: Vec<f64>,
    pub tau_max: f64,
    /// Number of τ points on `[0, tau_max]`.
    pub grid: usize,
    pub mc_n: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub method: StdMethod,
    pub corrupt_sigma: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::Fig1,
            geometry: GaugeGeometry::magnetic(0.0, 100.0),
            eta_list: vec![0.0, 0.1, 0.5, 1.0],
            tau_max: 300.0,
            grid: 601,
            mc_n: 100_000,
            seed: 1,
            output_dir: PathBuf::from("out"),
            method: StdMethod::DirectQuadrature,
            corrupt_sigma: false,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| CliError::Config(format!("bad value for `{key}`: `{v}`")))
}

fn eta_list(v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num("eta", s)).collect()
}

impl RunConfig {
    /// Applies one setting. Keys match the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key.trim() {
            "scenario" => self.scenario = v.parse()?,
            "eta" => self.eta_list = eta_list(v)?,
            "L" | "l" => self.geometry.l = num(key, v)?,
            "b0" => {
                self.geometry.units.b0 = num(key, v)?;
                self.geometry.units.zero_field_limit = self.geometry.units.b0 == 0.0;
            }
            "tau_max" | "tau-max" => self.tau_max = num(key, v)?,
            "grid" => self.grid = num(key, v)?,
            "mc_n" | "mc-n" => self.mc_n = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "out" | "output_dir" => self.output_dir = PathBuf::from(v),
            "method" => self.method = parse_method(v)?,
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            c.set(k, v)?;
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.geometry.validate()?;
        if self.scenario == Scenario::Fig1 && self.eta_list.is_empty() {
            return Err(CliError::Config("fig1 needs at least one eta".into()));
        }
        if self.mc_n < 1000 {
            return Err(CliError::Config("mc_n must be at least 1000".into()));
        }
        if !(self.tau_max > 0.0) || self.grid < 2 {
            return Err(CliError::Config("need tau_max > 0 and grid >= 2".into()));
        }
        Ok(())
    }

    pub fn tau_grid(&self) -> Vec<f64> {
        toflab::curve::linear_grid(0.0, self.tau_max, self.grid)
    }

    /// The settings as `key = value` text that [`RunConfig::parse`] reads back.
    pub fn to_text(&self) -> String {
        let etas: Vec<String> = self.eta_list.iter().map(|e| e.to_string()).collect();
        format!(
            "scenario = {}\neta = {}\nL = {}\nb0 = {}\ntau_max = {}\ngrid = {}\nmc_n = {}\nseed = {}\nout = {}\nmethod = {}\n",
            self.scenario,
            etas.join(","),
            self.geometry.l,
            self.geometry.units.b0,
            self.tau_max,
            self.grid,
            self.mc_n,
            self.seed,
            self.output_dir.display(),
            method_name(self.method),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_roundtrip() {
        let c =
            RunConfig::parse("# fig\nscenario = bohmian_mc\neta = 0, 0.5\nL=1\nseed = 7 # trailing\nmethod = closed\n")
                .unwrap();
        assert_eq!(c.scenario, Scenario::BohmianMc);
        assert_eq!(c.eta_list, vec![0.0, 0.5]);
        assert_eq!(c.geometry.l, 1.0);
        assert_eq!(c.seed, 7);
        assert_eq!(c.method, StdMethod::ClosedForm);
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("nonsense").is_err());
        assert!(RunConfig::parse("color = red").is_err());
        assert!(RunConfig::parse("grid = many").is_err());
        assert!(RunConfig::parse("mc_n = 10").unwrap().validate().is_err());
        assert!(RunConfig::parse("eta = ").unwrap().validate().is_err());
        assert!(RunConfig::parse("scenario = delta_well\neta =").unwrap().validate().is_ok());
    }

    #[test]
    fn zero_field() {
        let c = RunConfig::parse("b0 = 0").unwrap();
        assert!(c.geometry.units.zero_field_limit);
        c.validate().unwrap();
    }
}
