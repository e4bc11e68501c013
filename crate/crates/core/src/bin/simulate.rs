//! `simulate`: run a scenario sweep and write the KPI table as CSV.
//!
//! Exit status: 0 when every point succeeded, 2 when some points failed (the
//! table still holds the rest), 1 for unusable arguments or configuration.
//! `SIM_LOG` sets the log filter (default `warn`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::error;

use mmwave_sls::config::{
    load_scenario_with_base, Polarization, Preset, ScenarioConfig, SchedulerKind,
};
use mmwave_sls::sim::{emit_csv, emit_metadata, run_sweep_traced, SweepAxes};

#[derive(Debug, Parser)]
#[command(
    name = "simulate",
    version,
    about = "mmWave downlink system-level simulator"
)]
struct Cli {
    /// Scenario file of `key = value` lines.
    #[arg(long)]
    config: PathBuf,

    /// Results CSV; a `.meta.json` sidecar is written next to it.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,

    /// Velocities in km/h, e.g. `0,20,...,120`.
    #[arg(long, value_parser = parse_velocities)]
    sweep_velocities: Option<Velocities>,

    /// Receiver polarizations, e.g. `lpol,xpol`.
    #[arg(long, value_delimiter = ',')]
    polarizations: Option<Vec<Polarization>>,

    /// Schedulers, e.g. `rr,pf`.
    #[arg(long, value_delimiter = ',')]
    schedulers: Option<Vec<SchedulerKind>>,

    /// Seeds as an inclusive range `1..5` or a list `1,4,9`.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<Seeds>,

    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    parallel: Option<usize>,

    /// Directory for allocation, channel and layout traces.
    #[arg(long)]
    trace_dir: Option<PathBuf>,

    /// Defaults the config file is applied on top of.
    #[arg(long, value_enum, default_value = "paper")]
    preset: PresetArg,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum PresetArg {
    Small,
    Paper,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Small => Preset::Small,
            PresetArg::Paper => Preset::Paper,
        }
    }
}

#[derive(Debug, Clone)]
struct Velocities(Vec<f64>);

#[derive(Debug, Clone)]
struct Seeds(Vec<u64>);

/// Comma list where `...` continues the arithmetic progression of the two
/// preceding values up to the value after it.
fn parse_velocities(s: &str) -> Result<Velocities, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let mut out: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < parts.len() {
        if parts[i] == "..." {
            let (n, end) = (
                out.len(),
                parts.get(i + 1).ok_or("`...` needs an end value")?,
            );
            if n < 2 {
                return Err("`...` needs two values before it".into());
            }
            let end: f64 = end.parse().map_err(|_| format!("bad velocity `{end}`"))?;
            let step = out[n - 1] - out[n - 2];
            if step.is_nan() || step <= 0.0 {
                return Err("`...` needs an increasing progression".into());
            }
            let start = out[n - 1];
            let mut k = 1;
            loop {
                let v = start + step * k as f64;
                if v > end + step * 1e-9 {
                    break;
                }
                out.push(v);
                k += 1;
            }
            if (out[out.len() - 1] - end).abs() > step * 1e-9 {
                return Err(format!("{end} is not on the progression"));
            }
            i += 2;
        } else {
            let v: f64 = parts[i]
                .parse()
                .map_err(|_| format!("bad velocity `{}`", parts[i]))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("velocity must be >= 0, got {v}"));
            }
            out.push(v);
            i += 1;
        }
    }
    Ok(Velocities(out))
}

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad seed `{a}`"))?;
        let b: u64 = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| format!("bad seed `{b}`"))?;
        if b < a {
            return Err(format!("empty seed range {a}..{b}"));
        }
        return Ok(Seeds((a..=b).collect()));
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad seed `{t}`")))
        .collect::<Result<_, _>>()
        .map(Seeds)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SIM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return if usage_error {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let base = match load_scenario_with_base(&cli.config, ScenarioConfig::preset(cli.preset.into()))
    {
        Ok(cfg) => cfg,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let defaults = SweepAxes::default();
    let axes = SweepAxes {
        velocities: cli.sweep_velocities.map_or(defaults.velocities, |v| v.0),
        polarizations: cli.polarizations.unwrap_or(defaults.polarizations),
        schedulers: cli.schedulers.unwrap_or(defaults.schedulers),
        seeds: cli.seeds.map_or(defaults.seeds, |v| v.0),
    };
    let parallel = cli
        .parallel
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));

    let table = match run_sweep_traced(&base, &axes, parallel, cli.trace_dir.as_deref()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit_csv(&table, &cli.out).and_then(|_| emit_metadata(&table, &cli.out)) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if table.is_complete() {
        ExitCode::SUCCESS
    } else {
        for f in &table.failures {
            eprintln!(
                "failed: {} {} {} km/h seed {}: {}",
                f.scheduler, f.rx_polarization, f.velocity_kmph, f.seed, f.error
            );
        }
        ExitCode::from(2)
    }
}
