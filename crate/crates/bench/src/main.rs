use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use catalyst_bench::config::ExperimentConfig;
use catalyst_bench::csv::{emit_csv, write_csv};
use catalyst_bench::experiment::{run_on, sweep_kappa, sweep_path};
use catalyst_bench::fstar::fstar_for;
use catalyst_bench::problem::load_dataset;
use catalyst_bench::{build_problem, BenchError, Result};
use catalyst_core::catalyst::Trace;
use catalyst_core::data::emit_svmlight;
use clap::{Args, Parser, Subcommand};

/// Catalyst acceleration benchmarks.
#[derive(Parser)]
#[command(name = "catalyst-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its trace CSV (stdout without --out).
    Run(Common),
    /// Run kappa = 10^i kappa_0 for i in -2..=2, one CSV per value.
    SweepKappa(Common),
    /// Certify and print the optimal value of the configured problem.
    EstimateFstar(Common),
    /// Write the configured dataset in SVMlight format. --seed sets data_seed.
    GenData(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["c1", "c2", "c3", "c1star"])]
    criterion: Option<String>,
    #[arg(long, value_parser = ["ista", "svrg", "saga", "miso"])]
    method: Option<String>,
    #[arg(long, value_parser = ["plain", "catalyst"])]
    mode: Option<String>,
    /// Any other config key, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn load(&self, seed_key: &str) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        for pair in &self.set {
            config.apply_override(pair)?;
        }
        if let Some(seed) = self.seed {
            config.set(seed_key, &seed.to_string())?;
        }
        if let Some(out) = &self.out {
            config.set("out", &out.to_string_lossy())?;
        }
        for (key, value) in [("criterion", &self.criterion), ("method", &self.method), ("mode", &self.mode)] {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        Ok(config)
    }
}

fn write_trace(trace: &Trace, f_star: f64, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => emit_csv(trace, f_star, path),
        None => write_csv(trace, f_star, std::io::stdout().lock())
            .map_err(|e| BenchError::Io { path: "<stdout>".into(), source: e }),
    }
}

fn run(config: &ExperimentConfig) -> Result<()> {
    let problem = build_problem(config)?;
    let f_star = fstar_for(config, &problem)?;
    match run_on(config, &problem, f_star) {
        Ok(out) => {
            write_trace(&out.trace, f_star, config.out.as_deref())?;
            let last = out.trace.last().map_or(0, |s| s.effective_grads);
            log::info!(
                "reached relative gap {:e} after {} effective gradients ({} outer iterations)",
                out.final_rel_gap(),
                last,
                out.trace.outer.len()
            );
            Ok(())
        }
        Err(e) => {
            if let Some(trace) = e.partial_trace() {
                write_trace(trace, f_star, config.out.as_deref())?;
            }
            Err(e)
        }
    }
}

fn sweep(config: &ExperimentConfig) -> Result<()> {
    let points = sweep_kappa(config)?;
    let mut first_error = None;
    for p in points {
        let file = config.out.as_ref().map(|o| sweep_path(o, p.exponent).display().to_string());
        match p.result {
            Ok(out) => println!(
                "k{:<3} kappa {:.6e}  passes {:.1}  rel_gap {:.3e}  {}",
                p.exponent,
                p.kappa,
                out.trace.last().map_or(0.0, |s| s.effective_grads as f64 / out.trace.n as f64),
                out.final_rel_gap(),
                file.unwrap_or_default()
            ),
            Err(e) => {
                println!("k{:<3} kappa {:.6e}  failed: {e}", p.exponent, p.kappa);
                first_error.get_or_insert(e);
            }
        }
    }
    first_error.map_or(Ok(()), Err)
}

fn gen_data(config: &ExperimentConfig) -> Result<()> {
    let data = load_dataset(config)?;
    let io = |path: &str, e| BenchError::Io { path: path.into(), source: e };
    match &config.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| io(&path.display().to_string(), e))?;
            emit_svmlight(&data, std::io::BufWriter::new(file)).map_err(|e| io(&path.display().to_string(), e))
        }
        None => emit_svmlight(&data, std::io::stdout().lock()).map_err(|e| io("<stdout>", e)),
    }
}

fn estimate(config: &ExperimentConfig) -> Result<()> {
    let problem = build_problem(config)?;
    let f_star = fstar_for(config, &problem)?;
    let line = format!("{f_star:.16e}\n");
    match &config.out {
        Some(path) => {
            std::fs::write(path, line).map_err(|e| BenchError::Io { path: path.display().to_string(), source: e })
        }
        None => std::io::stdout()
            .write_all(line.as_bytes())
            .map_err(|e| BenchError::Io { path: "<stdout>".into(), source: e }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => c.load("seed").and_then(|cfg| run(&cfg)),
        Command::SweepKappa(c) => c.load("seed").and_then(|cfg| sweep(&cfg)),
        Command::EstimateFstar(c) => c.load("seed").and_then(|cfg| estimate(&cfg)),
        Command::GenData(c) => c.load("data_seed").and_then(|cfg| gen_data(&cfg)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
