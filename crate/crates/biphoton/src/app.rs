//! Command-line surface.

use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use biphoton_core::analytic::Quantity;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::error::{AppError, AppResult};
use crate::output::{self, OutputDir};
use crate::plots;
use crate::report::state_report;
use crate::sweep::{self, Mode};
use crate::tomo::{self, GenerationPath, NoiseArg, Target, TomographyRequest};

#[derive(Debug, Parser)]
#[command(
    name = "biphoton",
    version,
    about = "Biphoton states of a nonlinear directional coupler"
)]
pub struct Cli {
    /// JSON run configuration; device defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps [default: available cores].
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Seed for simulated detector noise.
    #[arg(long, global = true, default_value_t = 0, value_name = "S")]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlation maps over the (Δφ, Δβ/c) grid.
    Sweep {
        #[arg(long, value_enum, default_value_t = Mode::Analytic)]
        mode: Mode,
    },
    /// Report one output state and any special-state signature.
    State {
        /// Pump phase difference; accepts `pi` multiples such as `-0.53pi`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
        delta_phi: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        delta_beta_over_c: Option<f64>,
    },
    /// Simulated tomography of a target state.
    Tomography {
        #[arg(long, value_enum)]
        target: Target,
        /// Count scale N: expected counts are N·⟨P|ρ|P⟩.
        #[arg(long, default_value_t = 5000.0)]
        counts: f64,
        #[arg(long, value_enum, default_value_t = NoiseArg::Poisson)]
        noise: NoiseArg,
        #[arg(long, value_enum, default_value_t = GenerationPath::Analytic)]
        path: GenerationPath,
        /// Poisson resamples for a fidelity error bar (0 disables).
        #[arg(long, default_value_t = 0)]
        bootstrap: usize,
    },
    /// gnuplot scripts for the data in DIR (default: the output directory).
    EmitPlots { dir: Option<PathBuf> },
    /// Parse and validate the configuration, then print it with defaults.
    ValidateConfig,
}

/// A number, optionally followed by `pi` (or `π`, `*pi`); bare `pi` works.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let stripped = t
        .strip_suffix("pi")
        .or_else(|| t.strip_suffix('π'))
        .map(|r| r.trim_end().trim_end_matches('*').trim_end());
    let v = match stripped {
        Some("") | Some("+") => Ok(std::f64::consts::PI),
        Some("-") => Ok(-std::f64::consts::PI),
        Some(r) => r.parse::<f64>().map(|x| x * std::f64::consts::PI),
        None => t.parse::<f64>(),
    }
    .map_err(|_| format!("invalid angle `{s}`: expected a number, optionally followed by `pi`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("invalid angle `{s}`: must be finite"))
    }
}

fn threads(cli: &Cli) -> usize {
    cli.threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn load_config(cli: &Cli) -> AppResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.directory = out.clone();
    }
    Ok(cfg)
}

fn config_echo(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn run_info(start: Instant, threads: usize) -> Value {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    json!({
        "finished_unix_s": now,
        "elapsed_s": start.elapsed().as_secs_f64(),
        "threads": threads,
    })
}

fn cmd_sweep(cli: &Cli, mode: Mode) -> AppResult<()> {
    let start = Instant::now();
    let cfg = load_config(cli)?;
    let model = cfg.resolve()?;
    let n = threads(cli);
    let pool = sweep::pool(n)?;
    let map = match mode {
        Mode::Analytic => sweep::analytic_map(&model.coupler, &model.grid, &pool)?,
        Mode::Numeric => sweep::numeric_map(&model, &pool)?.map,
    };
    let mut dir = OutputDir::create(&cfg.output.directory)?;
    match cfg.output.format {
        OutputFormat::Csv => {
            for q in Quantity::ALL {
                dir.write(&format!("{}.csv", q.name()), &output::sweep_csv(&map, q))?;
            }
        }
        OutputFormat::Json => {
            dir.write("sweep.json", &output::to_json_text(&output::sweep_json(&map)))?;
        }
    }
    let degenerate = map.points().iter().filter(|p| p.is_none()).count();
    let manifest = dir.finish(
        "sweep",
        &config_echo(&cfg),
        json!({ "mode": mode.name(), "grid_points": map.points().len(), "no_generation_points": degenerate }),
        run_info(start, n),
    )?;
    println!(
        "{} sweep: {} points ({} without pair generation) -> {}",
        mode.name(),
        map.points().len(),
        degenerate,
        manifest.display()
    );
    Ok(())
}

fn cmd_state(cli: &Cli, delta_phi: Option<f64>, delta_beta_over_c: Option<f64>) -> AppResult<()> {
    let start = Instant::now();
    let cfg = load_config(cli)?;
    let model = cfg.resolve()?;
    let p = delta_phi.unwrap_or(model.coupler.pump_phase);
    let b = delta_beta_over_c.unwrap_or(cfg.coupler.mismatch_over_c);
    if !b.is_finite() {
        return Err(AppError::config("--delta-beta-over-c must be finite"));
    }
    let report = state_report(&model.coupler, p, b)?;
    println!("{report}");
    let mut dir = OutputDir::create(&cfg.output.directory)?;
    dir.write("state.json", &output::to_json_text(&report))?;
    dir.finish(
        "state",
        &config_echo(&cfg),
        json!({ "delta_phi_rad": p, "delta_beta_over_c": b }),
        run_info(start, 1),
    )?;
    Ok(())
}

fn cmd_tomography(cli: &Cli, req: TomographyRequest) -> AppResult<()> {
    let start = Instant::now();
    let cfg = load_config(cli)?;
    let model = cfg.resolve()?;
    let run = tomo::run(&model, &req)?;
    let mut dir = OutputDir::create(&cfg.output.directory)?;
    let (re, im) = output::rho_csv(&run.mle.rho);
    dir.write("rho_real.csv", &re)?;
    dir.write("rho_imag.csv", &im)?;
    let (re, im) = output::rho_csv(&run.linear.rho);
    dir.write("rho_linear_real.csv", &re)?;
    dir.write("rho_linear_imag.csv", &im)?;
    let (re, im) = output::rho_csv(&run.generated);
    dir.write("rho_generated_real.csv", &re)?;
    dir.write("rho_generated_imag.csv", &im)?;
    dir.write("counts.csv", &output::counts_csv(run.record.counts()))?;
    dir.write("metrics.json", &output::to_json_text(&run.metrics))?;
    dir.finish(
        "tomography",
        &config_echo(&cfg),
        serde_json::to_value(json!({
            "target": req.target,
            "counts": req.counts,
            "noise": req.noise,
            "path": req.path,
            "seed": req.seed,
            "bootstrap": req.bootstrap,
        }))
        .expect("serializable"),
        run_info(start, 1),
    )?;
    let m = &run.metrics;
    println!(
        "{:?} target: MLE fidelity {:.6}, concurrence {:.6}, purity {:.6}{}",
        req.target,
        m.mle.metrics.fidelity_vs_target,
        m.mle.metrics.concurrence,
        m.mle.metrics.purity,
        if m.mle.converged { "" } else { " (MLE did not converge)" }
    );
    if let Some(b) = &m.bootstrap {
        println!(
            "bootstrap ({} resamples): fidelity {:.6} +- {:.6}",
            b.resamples, b.fidelity_mean, b.fidelity_std_dev
        );
    }
    Ok(())
}

fn cmd_emit_plots(cli: &Cli, dir: Option<PathBuf>) -> AppResult<()> {
    let dir = match dir {
        Some(d) => d,
        None => load_config(cli)?.output.directory,
    };
    for path in plots::emit(&dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_validate(cli: &Cli) -> AppResult<()> {
    let cfg = load_config(cli)?;
    let model = cfg.resolve()?;
    println!("{}", cfg.to_json());
    eprintln!(
        "config ok: Lc = {}, {} grid points, {} spectral points",
        model.coupler.coupling_length(),
        model.grid.len(),
        model.spectrum.len()
    );
    Ok(())
}

pub fn execute(cli: &Cli) -> AppResult<()> {
    match &cli.command {
        Command::Sweep { mode } => cmd_sweep(cli, *mode),
        Command::State {
            delta_phi,
            delta_beta_over_c,
        } => cmd_state(cli, *delta_phi, *delta_beta_over_c),
        Command::Tomography {
            target,
            counts,
            noise,
            path,
            bootstrap,
        } => cmd_tomography(
            cli,
            TomographyRequest {
                target: *target,
                counts: *counts,
                noise: *noise,
                path: *path,
                seed: cli.seed,
                bootstrap: *bootstrap,
            },
        ),
        Command::EmitPlots { dir } => cmd_emit_plots(cli, dir.clone()),
        Command::ValidateConfig => cmd_validate(cli),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
