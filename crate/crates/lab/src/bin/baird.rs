use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use baird_core::{Algorithm, ExactModel};
use baird_lab::config::read_json;
use baird_lab::output::{write_curve_path, write_logs, write_logs_path};
use baird_lab::{aggregate, read_config, run_experiment, run_sweep, ExperimentConfig, LabError, SweepSpec};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "baird", version, about = "Off-policy TD experiments on the Baird counterexample")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write per-run metrics as CSV.
    Run(Box<RunArgs>),
    /// Run an (alpha, beta) grid described by a JSON sweep spec.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the closed-form A, b, C, ranks and stationary distribution as JSON.
    Model {
        #[arg(long, default_value_t = baird_core::DEFAULT_GAMMA)]
        gamma: f64,
    },
    /// Run the invariant checks; exit status 1 if any fails.
    Selfcheck {
        #[arg(long, default_value_t = baird_core::DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Base configuration file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    reg: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    runs: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    log_every: Option<u64>,
    /// Metrics CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional path for the aggregated mean/stderr curve.
    #[arg(long)]
    curve_out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig, LabError> {
        let mut c = match &self.config {
            Some(path) => read_config(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(name) = &self.algo {
            c.algo = name.parse::<Algorithm>().map_err(|e| LabError::Config(e.into()))?;
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(alpha, beta, eta, reg, gamma, steps, runs, seed, batch, warmup, log_every);
        Ok(c)
    }
}

fn run(args: &RunArgs) -> Result<(), LabError> {
    let config = args.resolve()?;
    let logs = run_experiment(&config)?;
    match &args.out {
        Some(path) => write_logs_path(&logs, path)?,
        None => write_logs(&logs, io::stdout().lock())?,
    }
    let curve = aggregate(&logs)?;
    if let Some(path) = &args.curve_out {
        write_curve_path(&curve, path)?;
    }
    let last = curve.final_point();
    eprintln!(
        "{} runs of {} ({} steps): {:.0}% diverged, final mean RMSVE {}",
        config.runs,
        config.algo,
        config.steps,
        100.0 * curve.divergence_fraction,
        last.map_or("n/a".into(), |p| format!("{:.4}", p.mean[0])),
    );
    Ok(())
}

fn fmt_num(x: f64) -> String {
    format!("{x}").replace('.', "p").replace('-', "m")
}

fn sweep(config: &Path, out_dir: &Path) -> Result<(), LabError> {
    let spec: SweepSpec = read_json(config)?;
    let cells = run_sweep(&spec)?;
    fs::create_dir_all(out_dir).map_err(|e| LabError::io(out_dir, e))?;
    let summary_path = out_dir.join("summary.csv");
    let mut summary = csv::Writer::from_path(&summary_path)?;
    summary.write_record([
        "alpha",
        "beta",
        "runs",
        "divergence_fraction",
        "final_step",
        "final_rmsve_mean",
        "final_rmsve_stderr",
        "final_mspbe_mean",
        "error",
    ])?;
    for cell in &cells {
        let tag = format!("a{}_b{}", fmt_num(cell.alpha), fmt_num(cell.beta));
        let mut row = vec![format!("{:?}", cell.alpha), format!("{:?}", cell.beta)];
        match &cell.outcome {
            Ok(out) => {
                write_logs_path(&out.logs, out_dir.join(format!("logs_{tag}.csv")))?;
                write_curve_path(&out.curve, out_dir.join(format!("curve_{tag}.csv")))?;
                row.push(out.curve.runs_total.to_string());
                row.push(format!("{:?}", out.curve.divergence_fraction));
                match out.curve.final_point() {
                    Some(p) => {
                        row.push(p.step.to_string());
                        row.push(format!("{:?}", p.mean[0]));
                        row.push(format!("{:?}", p.stderr[0]));
                        row.push(format!("{:?}", p.mean[1]));
                    }
                    None => row.extend(["", "", "", ""].map(String::from)),
                }
                row.push(String::new());
            }
            Err(e) => {
                row.extend(["", "", "", "", "", ""].map(String::from));
                row.push(e.to_string());
            }
        }
        summary.write_record(&row)?;
    }
    summary.flush().map_err(|e| LabError::io(&summary_path, e))?;
    eprintln!("{} cells written to {}", cells.len(), out_dir.display());
    Ok(())
}

fn model(gamma: f64) -> Result<(), LabError> {
    let m = ExactModel::new(gamma).map_err(|e| LabError::Config(e.into()))?;
    let report = json!({
        "gamma": m.gamma,
        "a": m.a,
        "b": m.b,
        "c": m.c,
        "mu": m.mu,
        "rank_a": m.rank_a(),
        "rank_c": m.rank_c(),
        "c_eigenvalues": m.c_eigenvalues(),
    });
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out).map_err(|e| LabError::io("<stdout>", e))
}

fn selfcheck(gamma: f64, seed: u64) -> Result<bool, LabError> {
    baird_core::BairdEnv::new(gamma).map_err(|e| LabError::Config(e.into()))?;
    let checks = baird_lab::selfcheck::run_all(gamma, seed);
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args).map(|_| true),
        Command::Sweep { config, out_dir } => sweep(config, out_dir).map(|_| true),
        Command::Model { gamma } => model(*gamma).map(|_| true),
        Command::Selfcheck { gamma, seed } => selfcheck(*gamma, *seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
