use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toflab_cli::checks::{run_checks, CheckContext};
use toflab_cli::config::parse_method;
use toflab_cli::run::{run_dist, run_fig1, run_report, run_traj};
use toflab_cli::{init_threads, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "toflab", version, about = "Quantum arrival-time distributions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Π_STD per η, Π_QF and Π_BM at one detector distance
    Dist(Common),
    /// Π_STD for several gauges and the gauge-invariant Π_QF at L = 100
    Fig1(Common),
    /// Dump sampled Bohmian trajectories
    Traj {
        #[command(flatten)]
        common: Common,
        /// Trajectories to dump
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Run the property suite and print JSON lines
    Check {
        #[command(flatten)]
        common: Common,
        /// Only properties whose `module/name` contains this
        #[arg(long)]
        only: Option<String>,
    },
    /// Run a scenario and print a JSON summary
    Report(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// `key = value` config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    /// Comma-separated gauge parameters
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    #[arg(long = "L", allow_hyphen_values = true)]
    l: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long = "tau-max")]
    tau_max: Option<f64>,
    /// Number of τ points
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long = "mc-n")]
    mc_n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["closed", "quad"])]
    method: Option<String>,
    #[arg(long, hide = true)]
    corrupt_sigma: bool,
}

impl Common {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::parse(&std::fs::read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        let mut set = |k: &str, v: Option<String>| v.map_or(Ok(()), |v| c.set(k, &v));
        set("scenario", self.scenario.clone())?;
        set("eta", self.eta.clone())?;
        set("L", self.l.map(|v| v.to_string()))?;
        set("b0", self.b0.map(|v| v.to_string()))?;
        set("tau_max", self.tau_max.map(|v| v.to_string()))?;
        set("grid", self.grid.map(|v| v.to_string()))?;
        set("mc_n", self.mc_n.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("out", self.out.as_ref().map(|p| p.display().to_string()))?;
        if let Some(m) = &self.method {
            c.method = parse_method(m)?;
        }
        c.corrupt_sigma = self.corrupt_sigma;
        c.validate()?;
        Ok(c)
    }
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("{}", f.display());
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.cmd {
        Cmd::Dist(c) => print_files(&run_dist(&c.config()?)?),
        Cmd::Fig1(c) => {
            let mut cfg = c.config()?;
            cfg.scenario = toflab_cli::Scenario::Fig1;
            let out = run_fig1(&cfg)?;
            print_files(&out.files);
        }
        Cmd::Traj { common, count } => print_files(&run_traj(&common.config()?, count)?),
        Cmd::Check { common, only } => {
            let cfg = common.config()?;
            let ctx = CheckContext { seed: cfg.seed, corrupt_sigma: cfg.corrupt_sigma };
            let rows = run_checks(&ctx, only.as_deref());
            let mut out = std::io::stdout().lock();
            for r in &rows {
                writeln!(out, "{}", r.to_json())?;
            }
            if rows.iter().any(|r| !r.passed()) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Cmd::Report(c) => {
            let cfg = c.config()?;
            let v = run_report(&cfg)?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            let path = cfg.output_dir.join(format!("report_{}.json", cfg.scenario));
            std::fs::write(&path, serde_json::to_string_pretty(&v)?)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
