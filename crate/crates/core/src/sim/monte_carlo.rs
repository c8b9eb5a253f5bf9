//! Monte Carlo sweeps over planner variants and receiver noise levels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metrics::aggregate_runs;

use super::config::{PlannerVariant, ScenarioConfig};
use super::run::{run_closed_loop, RunLog, RunSummary};

/// Noise standard deviations `start, start + step, ..., stop` (inclusive up
/// to rounding).
pub fn noise_levels(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop >= start && step > 0.0) {
        return Err(invalid("noise_grid", format!("need 0 < start <= stop and step > 0, got {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Aggregate over the runs of one (variant, noise) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variant: PlannerVariant,
    pub noise_std: f64,
    pub noise_cov: f64,
    pub runs: usize,
    /// OSPA averaged over steps and runs.
    pub mean_ospa: f64,
    /// Standard error of the per-run mean OSPA.
    pub ospa_std_error: f64,
    pub mean_cardinality_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub rows: Vec<SweepRow>,
    /// Per-run summaries, ordered by variant, noise level, then seed.
    pub runs: Vec<RunSummary>,
    /// Full logs in the same order, when requested.
    pub logs: Vec<RunLog>,
}

impl MonteCarloResult {
    /// Per-run mean OSPA of one cell, ordered by seed.
    pub fn run_means(&self, variant: PlannerVariant, noise_cov: f64) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| r.variant == variant && r.noise_cov == noise_cov)
            .map(|r| r.mean_ospa)
            .collect()
    }
}

pub const SWEEP_HEADER: [&str; 7] = [
    "variant",
    "noise_std",
    "noise_cov",
    "runs",
    "mean_ospa",
    "ospa_std_error",
    "mean_cardinality_error",
];

pub fn write_sweep<W: std::io::Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.serialize((
            r.variant.name(),
            r.noise_std,
            r.noise_cov,
            r.runs,
            r.mean_ospa,
            r.ospa_std_error,
            r.mean_cardinality_error,
        ))?;
    }
    w.flush()?;
    Ok(())
}

/// Run `n_runs` seeds (`cfg.seed + i`) for every variant and noise standard
/// deviation. Runs execute in parallel; results are ordered and do not
/// depend on scheduling.
pub fn monte_carlo(
    cfg: &ScenarioConfig,
    variants: &[PlannerVariant],
    n_runs: usize,
    noise_stds: &[f64],
    keep_logs: bool,
) -> Result<MonteCarloResult> {
    if n_runs == 0 {
        return Err(invalid("n_runs", "must be at least 1"));
    }
    let mut jobs = Vec::new();
    for &variant in variants {
        for &std in noise_stds {
            let mut c = cfg.clone();
            c.planner.variant = variant;
            c.receiver.noise_cov = std * std;
            c.validate()?;
            for i in 0..n_runs {
                jobs.push((c.clone(), cfg.seed.wrapping_add(i as u64)));
            }
        }
    }
    let logs: Vec<RunLog> = jobs
        .par_iter()
        .map(|(c, seed)| run_closed_loop(c, *seed))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (cell, chunk) in logs.chunks(n_runs).enumerate() {
        let variant = variants[cell / noise_stds.len()];
        let std = noise_stds[cell % noise_stds.len()];
        let series: Vec<Vec<f64>> = chunk.iter().map(|l| l.ospa_series()).collect();
        let means: Vec<f64> = chunk.iter().map(|l| l.summary().mean_ospa).collect();
        let n = means.len() as f64;
        let m = means.iter().sum::<f64>() / n;
        let se = if means.len() > 1 {
            (means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        let mean_ospa = if series.iter().all(|s| s.is_empty()) {
            0.0
        } else {
            aggregate_runs(&series)?.overall_mean
        };
        rows.push(SweepRow {
            variant,
            noise_std: std,
            noise_cov: std * std,
            runs: chunk.len(),
            mean_ospa,
            ospa_std_error: se,
            mean_cardinality_error: chunk.iter().map(|l| l.summary().mean_cardinality_error).sum::<f64>() / n,
        });
    }
    let runs = logs.iter().map(RunLog::summary).collect();
    Ok(MonteCarloResult {
        rows,
        runs,
        logs: if keep_logs { logs } else { Vec::new() },
    })
}
