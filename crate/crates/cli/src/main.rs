use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rftrack_core::sim::{
    monte_carlo, noise_levels, run_closed_loop, write_outputs, write_sweep, PlannerVariant, ScenarioConfig,
};

/// Closed-loop simulation of a UAV tracking radio-tagged objects.
#[derive(Parser)]
#[command(name = "rftrack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop simulation and write its logs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Shortens the scenario to this many seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Monte Carlo sweep over planner variants and noise levels.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Noise standard deviations as `start:stop:step` (V).
        #[arg(long, default_value = "0.010:0.050:0.005")]
        noise_grid: String,
        #[arg(long, value_delimiter = ',', default_value = "renyi,cauchy,straight")]
        variants: Vec<PlannerVariant>,
        /// Output CSV; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Shortens the scenario to this many seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Check a config file for schema and resolvability problems.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the built-in four-object scenario as JSON.
    Example,
}

fn load(path: &PathBuf, duration: Option<f64>) -> Result<ScenarioConfig> {
    let cfg = ScenarioConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(match duration {
        Some(d) => cfg.truncated(d),
        None => cfg,
    })
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number `{p}` in noise grid")))
        .collect::<Result<Vec<_>>>()?;
    match nums[..] {
        [x] => Ok(vec![x]),
        [a, b, step] => Ok(noise_levels(a, b, step)?),
        _ => bail!("noise grid must be `value` or `start:stop:step`, got `{s}`"),
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            seed,
            out,
            duration,
        } => {
            let cfg = load(&config, duration)?;
            let seed = seed.unwrap_or(cfg.seed);
            let start = Instant::now();
            let log = run_closed_loop(&cfg, seed).context("simulation failed")?;
            write_outputs(&out, &log).with_context(|| format!("writing {}", out.display()))?;
            let s = log.summary();
            println!(
                "{} seed {}: {} steps, mean OSPA {:.2} m, cardinality within one {:.0}% ({:.1} s)",
                cfg.name,
                seed,
                s.steps,
                s.mean_ospa,
                100.0 * s.cardinality_within_one,
                start.elapsed().as_secs_f64()
            );
        }
        Command::Sweep {
            config,
            runs,
            noise_grid,
            variants,
            out,
            duration,
        } => {
            let cfg = load(&config, duration)?;
            let grid = parse_grid(&noise_grid)?;
            let result = monte_carlo(&cfg, &variants, runs, &grid, false).context("sweep failed")?;
            match out {
                Some(path) => {
                    let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    write_sweep(BufWriter::new(f), &result.rows)?;
                }
                None => write_sweep(std::io::stdout().lock(), &result.rows)?,
            }
        }
        Command::Validate { config } => {
            let cfg = load(&config, None)?;
            let report = cfg.resolvability();
            for c in &report.checks {
                println!("{:<4} {:<24} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
            }
            cfg.validate().context("config is invalid")?;
            let rx = cfg.receiver_params();
            println!(
                "valid: {} objects, {} steps, {} frames x {} bins per interval",
                cfg.objects.len(),
                cfg.steps(),
                rx.frames,
                rx.fft_len
            );
        }
        Command::Example => {
            println!("{}", serde_json::to_string_pretty(&ScenarioConfig::four_objects())?);
        }
    }
    Ok(())
}
