//! `perpetual` command-line front end.

pub mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use perpetual_core::fock_optics::{distill, distill_fidelity, distill_probability, DEFAULT_N_MAX};
use perpetual_core::loss_detection::{classify, enumerate_table};
use perpetual_core::montecarlo::{
    bootup_from_fraction, default_bias_grid, fit_bootup_scaling, run_trials, saturation_fraction,
    sweep_bias,
};
use perpetual_core::network::NetworkState;
use perpetual_core::report::{self, BootupRow, Format, Record};
use perpetual_core::SimParams;

use config::{
    load_config, parse_phasing, Config, PartialConfig, DEFAULT_SATURATION_TRIALS, DEFAULT_TRIALS,
};

/// Environment variable overriding the number of worker threads.
pub const WORKERS_ENV: &str = "PERPETUAL_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

fn runtime(e: perpetual_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "perpetual",
    version,
    about = "Photon-recycling network simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Photon-count time series of independent trials
    Run {
        #[command(flatten)]
        sim: SimArgs,
        /// Also write the event log of trial 0 to this file
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Final-time mean photon count over a grid of bias values
    SweepBias {
        #[command(flatten)]
        sim: SimArgs,
        /// Comma-separated bias values (default 2,12,...,192)
        #[arg(long, value_delimiter = ',')]
        biases: Option<Vec<f64>>,
    },
    /// Fraction of saturated trials against time
    Saturation {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Boot-up time for several network sizes and its linear fit
    Bootup {
        #[command(flatten)]
        sim: SimArgs,
        /// Comma-separated network sizes
        #[arg(long, value_delimiter = ',', default_value = "8,24,40,56,72,88")]
        ns: Vec<usize>,
        /// Write the fit record to this file
        #[arg(long)]
        fit_out: Option<PathBuf>,
    },
    /// Distillation probability and fidelity for weak coherent pulses
    Distill {
        #[arg(long = "alpha-sq", value_delimiter = ',', required = true)]
        alpha_sq: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
    },
    /// Enumerate the loss-detection outcome table
    Table,
}

#[derive(Debug, Clone, Default, Args)]
struct SimArgs {
    /// Configuration file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of optical lines (even)
    #[arg(long = "n")]
    n_lines: Option<usize>,
    #[arg(long)]
    bias: Option<f64>,
    #[arg(long)]
    t_max: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Measurement-error probability of each detection module
    #[arg(long)]
    p_m: Option<f64>,
    /// Override the source success probability
    #[arg(long)]
    p_s: Option<f64>,
    /// Override the per-component loss probability
    #[arg(long)]
    p_loss: Option<f64>,
    /// staggered or in-phase
    #[arg(long, value_parser = parse_phasing)]
    phasing: Option<perpetual_core::SourcePhasing>,
    #[arg(long)]
    record_cadence: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<Format>,
}

impl SimArgs {
    fn into_partial(self) -> Result<PartialConfig, CliError> {
        let file = match &self.config {
            Some(path) => load_config(path)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            n_lines: self.n_lines,
            bias: self.bias,
            t_max: self.t_max,
            trials: self.trials,
            seed: self.seed,
            p_m: self.p_m,
            p_s: self.p_s,
            p_loss: self.p_loss,
            source_phasing: self.phasing,
            record_cadence: self.record_cadence,
            out: self.out,
            format: self.format,
        };
        Ok(file.merge(flags))
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match configure_workers().and_then(|_| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("perpetual: {e}");
            e.exit_code()
        }
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "{WORKERS_ENV} must be a positive integer, got `{value}`"
            ))
        })?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run { sim, events } => cmd_run(sim.into_partial()?, events),
        Command::SweepBias { sim, biases } => cmd_sweep_bias(sim.into_partial()?, biases),
        Command::Saturation { sim } => cmd_saturation(sim.into_partial()?),
        Command::Bootup { sim, ns, fit_out } => cmd_bootup(sim.into_partial()?, ns, fit_out),
        Command::Distill { alpha_sq, n_max } => cmd_distill(&alpha_sq, n_max),
        Command::Table => cmd_table(),
    }
}

fn metadata(
    command: &str,
    params: &SimParams,
    trials: u64,
    cadence: Option<u64>,
) -> serde_json::Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "params": params,
        "p_s": params.p_s(),
        "p_loss": params.p_loss(),
        "overrides": params.has_overrides(),
        "trials": trials,
        "record_cadence": cadence,
    })
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                CliError::Runtime(format!("{}: {e}", p.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<R: Record>(
    path: Option<&Path>,
    format: Format,
    meta: &serde_json::Value,
    rows: &[R],
) -> Result<(), CliError> {
    let mut out = open_out(path)?;
    report::write_records(&mut out, format, meta, rows)?;
    out.flush()?;
    Ok(())
}

fn cmd_run(partial: PartialConfig, events: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = partial.resolve(DEFAULT_TRIALS)?;
    let trials = run_trials(&cfg.params, cfg.trials, cfg.record_cadence).map_err(runtime)?;
    let meta = metadata("run", &cfg.params, cfg.trials, Some(cfg.record_cadence));
    emit(
        cfg.out.as_deref(),
        cfg.format,
        &meta,
        &report::timeseries_rows(&trials),
    )?;
    if let Some(path) = events {
        let mut p = cfg.params.clone();
        p.seed = perpetual_core::montecarlo::trial_seed(cfg.params.seed, 0);
        let mut net = NetworkState::new(p).map_err(runtime)?;
        net.record_events();
        net.run_to_end();
        let meta = metadata("run-events", &cfg.params, 1, None);
        emit(
            Some(&path),
            cfg.format,
            &meta,
            &report::event_rows(&net.take_events()),
        )?;
    }
    let saturated = trials.iter().filter(|t| t.saturated_at.is_some()).count();
    eprintln!(
        "{} trials, {saturated} reached more than {} photons",
        trials.len(),
        cfg.params.capacity()
    );
    Ok(())
}

fn cmd_sweep_bias(partial: PartialConfig, biases: Option<Vec<f64>>) -> Result<(), CliError> {
    let biases = biases.unwrap_or_else(default_bias_grid);
    if biases.is_empty() || biases.iter().any(|&b| b.is_nan() || b <= 0.0) {
        return Err(CliError::Config("bias values must be positive".into()));
    }
    let base = partial.params_for(partial.require_n()?, biases[0])?;
    let cfg = partial.finish(base, DEFAULT_TRIALS)?;
    let sweep = sweep_bias(&cfg.params, &biases, cfg.trials).map_err(|e| match e {
        perpetual_core::Error::InvalidParam { .. } => CliError::Config(e.to_string()),
        e => runtime(e),
    })?;
    let mut meta = metadata("sweep-bias", &cfg.params, cfg.trials, None);
    meta["biases"] = json!(biases);
    emit(
        cfg.out.as_deref(),
        cfg.format,
        &meta,
        &report::bias_sweep_rows(&sweep),
    )?;
    let level = cfg.params.capacity() as f64;
    match sweep.crossing(level) {
        Some(b) => eprintln!("mean total first reaches {level} at B = {b:.1}"),
        None => eprintln!("mean total stays below {level} on this grid"),
    }
    Ok(())
}

fn cmd_saturation(partial: PartialConfig) -> Result<(), CliError> {
    let cfg = partial.resolve(DEFAULT_SATURATION_TRIALS)?;
    let frac = saturation_fraction(&cfg.params, cfg.trials, cfg.record_cadence).map_err(runtime)?;
    let meta = metadata(
        "saturation",
        &cfg.params,
        cfg.trials,
        Some(cfg.record_cadence),
    );
    emit(
        cfg.out.as_deref(),
        cfg.format,
        &meta,
        &report::saturation_rows(&frac),
    )?;
    match bootup_from_fraction(&frac) {
        Ok(t) => eprintln!("half of the trials saturated by t = {t}"),
        Err(e) => eprintln!("{e}"),
    }
    Ok(())
}

fn cmd_bootup(
    partial: PartialConfig,
    ns: Vec<usize>,
    fit_out: Option<PathBuf>,
) -> Result<(), CliError> {
    let bias = partial.require_bias()?;
    if ns.is_empty() {
        return Err(CliError::Config(
            "--ns needs at least one network size".into(),
        ));
    }
    let configs = ns
        .iter()
        .map(|&n| {
            partial
                .params_for(n, bias)
                .and_then(|p| partial.finish(p, DEFAULT_SATURATION_TRIALS))
        })
        .collect::<Result<Vec<Config>, _>>()?;
    let mut rows = Vec::with_capacity(ns.len());
    for cfg in &configs {
        let frac =
            saturation_fraction(&cfg.params, cfg.trials, cfg.record_cadence).map_err(runtime)?;
        let t = bootup_from_fraction(&frac).map_err(runtime)?;
        eprintln!("N = {}: boot-up at t = {t}", cfg.params.n_lines);
        rows.push(BootupRow {
            n: cfg.params.n_lines,
            b: bias,
            bootup_steps: t,
            trials: cfg.trials,
        });
    }
    let first = &configs[0];
    let mut meta = metadata(
        "bootup",
        &first.params,
        first.trials,
        Some(first.record_cadence),
    );
    meta["ns"] = json!(ns);
    meta["params"]["n_lines"] = serde_json::Value::Null;
    if partial.t_max.is_none() {
        meta["params"]["t_max"] = json!("300N");
    }
    emit(first.out.as_deref(), first.format, &meta, &rows)?;

    let points: Vec<(usize, u64)> = rows.iter().map(|r| (r.n, r.bootup_steps)).collect();
    match fit_bootup_scaling(&points) {
        Ok(fit) => {
            eprintln!(
                "fit: t_boot = {:.2} N + {:.1} (r^2 = {:.4})",
                fit.slope, fit.intercept, fit.r_squared
            );
            if let Some(path) = fit_out {
                emit(Some(&path), first.format, &meta, &[report::fit_row(&fit)])?;
            }
        }
        Err(e) if fit_out.is_some() => return Err(runtime(e)),
        Err(e) => eprintln!("no fit: {e}"),
    }
    Ok(())
}

fn cmd_distill(alpha_sq: &[f64], n_max: usize) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "alpha_sq,p_minus,p_minus_fock,infidelity,infidelity_fock"
    )?;
    for &a in alpha_sq {
        let (_, p_minus) = distill_probability(a).map_err(|e| CliError::Config(e.to_string()))?;
        let f = distill_fidelity(a).map_err(|e| CliError::Config(e.to_string()))?;
        let fock = distill(a, n_max).map_err(runtime)?;
        let f_fock = fock.fidelity_minus.unwrap_or(f64::NAN);
        writeln!(
            out,
            "{a:e},{p_minus:e},{:e},{:e},{:e}",
            fock.p_minus,
            1.0 - f,
            1.0 - f_fock
        )?;
    }
    Ok(())
}

fn cmd_table() -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    let rows = enumerate_table();
    let mut prev = None;
    for row in rows {
        if prev.is_some_and(|p| p != row.outcomes) {
            writeln!(out)?;
        }
        prev = Some(row.outcomes);
        writeln!(out, "{row}  {:?}", classify(row.outcomes))?;
    }
    Ok(())
}
