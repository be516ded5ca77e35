//! `bvpmmo`: simulations, sweeps and slow-fast reports for the forced
//! Bonhoeffer–van der Pol oscillator.
//!
//! Settings resolve as built-in defaults, then `--config`, then flags.
//! Exit codes: 0 success, 1 runtime or numerical failure, 2 validation failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bvpmmo::analysis::PhaseDirection;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bvpmmo_cli::config::{self, Format, ModelKind, Range, RunConfig, TimeSpan};
use bvpmmo_cli::error::{self, CliError};
use bvpmmo_cli::{commands, output};

#[derive(Debug, Parser)]
#[command(
    name = "bvpmmo",
    version,
    about = "Forced Bonhoeffer–van der Pol oscillator toolkit"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML or JSON config; `metadata.json` from a previous run also works.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    rtol: Option<f64>,
    #[arg(long, global = true)]
    atol: Option<f64>,
    #[arg(long, global = true)]
    transient_periods: Option<f64>,
    #[arg(long, global = true)]
    record_periods: Option<f64>,
    /// Span separating large from small oscillations.
    #[arg(long, global = true)]
    large_threshold: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    k1: Option<f64>,
    #[arg(
        long,
        global = true,
        allow_negative_numbers = true,
        conflicts_with = "mu"
    )]
    b0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    b1: Option<f64>,
    /// Sets B0 through the unfolding parameter; applied after the other
    /// parameters.
    #[arg(long, global = true, allow_negative_numbers = true)]
    mu: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one run; writes trajectory, events and metadata.json.
    Simulate(SimulateArgs),
    /// Classify the regime over a list of parameter values.
    Sweep(SweepArgs),
    /// Folded equilibria of the desingularized slow flow.
    Folds,
    /// Critical canard values, optionally with the numeric splitting.
    Canard {
        #[arg(long)]
        numeric: bool,
    },
    /// Analytic (and optionally numeric) return map of one loop.
    Returnmap {
        /// Starting P values, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "0"
        )]
        p0: Vec<f64>,
        #[arg(long, value_enum, default_value = "increasing")]
        direction: Direction,
        #[arg(long)]
        numeric: bool,
    },
    /// Hopf point of the unforced system.
    Hopf {
        #[arg(allow_negative_numbers = true)]
        k1: f64,
        #[arg(allow_negative_numbers = true)]
        eps: f64,
    },
    /// Bautin point along the Hopf curve.
    Bautin {
        #[arg(default_value = "0.1")]
        eps: f64,
    },
    /// Signature of an external `t,x` CSV.
    Classify {
        input: PathBuf,
        /// Minimum large-run length for bursting.
        #[arg(long, default_value = "5")]
        burst_threshold: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long, allow_negative_numbers = true, requires = "t_end")]
    t_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "t_start")]
    t_end: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    record_from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y0: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Swept parameter: epsilon, omega, k1, b0, b1 or mu.
    #[arg(long)]
    parameter: Option<String>,
    /// Comma-separated values; rows keep this order.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "range"
    )]
    values: Option<Vec<f64>>,
    /// `start:stop:count`, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_range(s: &str) -> Result<Range, CliError> {
    let bad = || CliError::validation(format!("range `{s}` is not start:stop:count"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(Range {
        start: parts[0].trim().parse().map_err(|_| bad())?,
        stop: parts[1].trim().parse().map_err(|_| bad())?,
        count: parts[2].trim().parse().map_err(|_| bad())?,
    })
}

fn apply_globals(cfg: &mut RunConfig, g: &Global) -> Result<(), CliError> {
    if let Some(f) = g.format {
        cfg.output.format = f;
    }
    if let Some(d) = &g.out {
        cfg.output.dir = Some(d.clone());
    }
    let integ = &mut cfg.run.integrator;
    if let Some(v) = g.rtol {
        integ.rtol = v;
    }
    if let Some(v) = g.atol {
        integ.atol = v;
    }
    if let Some(v) = g.transient_periods {
        cfg.run.transient_periods = v;
    }
    if let Some(v) = g.record_periods {
        cfg.run.record_periods = v;
    }
    if let Some(v) = g.large_threshold {
        cfg.run.signature.large_threshold = v;
    }
    let mut p = cfg.params;
    for (name, v) in [
        ("epsilon", g.epsilon),
        ("omega", g.omega),
        ("k1", g.k1),
        ("b1", g.b1),
        ("b0", g.b0),
        ("mu", g.mu),
    ] {
        if let Some(v) = v {
            p = p.with_named(name, v)?;
        }
    }
    cfg.params = p;
    cfg.run.validate()?;
    Ok(())
}

fn emit(g: &Global, stem: &str, report: &impl Serialize) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    output::write_json(stdout.lock(), report)?;
    if let Some(dir) = &g.out {
        output::create_dir(dir)?;
        output::write_json(
            output::create_file(&dir.join(format!("{stem}.json")))?,
            report,
        )?;
    }
    Ok(())
}

fn simulate(mut cfg: RunConfig, a: &SimulateArgs) -> Result<(), CliError> {
    if let Some(m) = a.model {
        cfg.model = m;
    }
    if let Some(x) = a.x0 {
        cfg.run.initial[0] = x;
    }
    if let Some(y) = a.y0 {
        cfg.run.initial[1] = y;
    }
    if let (Some(start), Some(end)) = (a.t_start, a.t_end) {
        cfg.time = Some(TimeSpan {
            start,
            end,
            record_from: None,
        });
    }
    if let Some(r) = a.record_from {
        let (start, end, _) = cfg.span();
        cfg.time = Some(TimeSpan {
            start,
            end,
            record_from: Some(r),
        });
    }
    let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let sim = commands::cmd_simulate(&cfg, &dir)?;
    let summary = serde_json::json!({
        "dir": dir,
        "mu": cfg.params.mu(),
        "points": sim.rows.len(),
        "events": sim.events.len(),
        "truncated": sim.error.is_some(),
    });
    output::write_json(std::io::stdout().lock(), &summary)?;
    match sim.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn sweep(g: &Global, a: &SweepArgs) -> Result<(), CliError> {
    let (mut cfg, mut spec) = config::load_sweep(g.config.as_deref())?;
    apply_globals(&mut cfg, g)?;
    if let Some(p) = &a.parameter {
        spec.parameter = p.clone();
    }
    if let Some(v) = &a.values {
        spec.values = Some(v.clone());
        spec.range = None;
    }
    if let Some(r) = &a.range {
        spec.range = Some(parse_range(r)?);
        spec.values = None;
    }
    if let Some(j) = a.jobs {
        spec.jobs = j;
    }
    let format = cfg.output.format;
    match &cfg.output.dir {
        Some(dir) => {
            output::create_dir(dir)?;
            let path = output::output_path(dir, "summary", format);
            let mut buf = Vec::new();
            commands::cmd_sweep(&cfg, &spec, &mut buf, format)?;
            output::create_file(&path)?.write_all(&buf)?;
            Ok(())
        }
        None => commands::cmd_sweep(&cfg, &spec, &mut std::io::stdout().lock(), format),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Sweep(a) => sweep(g, a),
        Command::Hopf { k1, eps } => emit(g, "hopf", &commands::cmd_hopf(*k1, *eps)?),
        Command::Bautin { eps } => emit(g, "bautin", &commands::cmd_bautin(*eps)?),
        other => {
            let mut cfg = config::load_run(g.config.as_deref())?;
            apply_globals(&mut cfg, g)?;
            let p = cfg.params;
            match other {
                Command::Simulate(a) => simulate(cfg, a),
                Command::Folds => emit(g, "folds", &commands::cmd_folds(&p)),
                Command::Canard { numeric } => {
                    emit(g, "canard", &commands::cmd_canard(&p, *numeric)?)
                }
                Command::Returnmap {
                    p0,
                    direction,
                    numeric,
                } => {
                    let dir = match direction {
                        Direction::Increasing => PhaseDirection::Increasing,
                        Direction::Decreasing => PhaseDirection::Decreasing,
                    };
                    emit(
                        g,
                        "returnmap",
                        &commands::cmd_returnmap(&p, p0, dir, *numeric)?,
                    )
                }
                Command::Classify {
                    input,
                    burst_threshold,
                } => emit(
                    g,
                    "classify",
                    &commands::cmd_classify(
                        Path::new(input),
                        &cfg.run.signature,
                        *burst_threshold,
                    )?,
                ),
                Command::Sweep(_) | Command::Hopf { .. } | Command::Bautin { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help and version go to stdout with status 0
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::validation(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(error::EXIT_VALIDATION as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code as u8)
        }
    }
}
