//! Configuration, orchestration and file output for the `rparvi` command.

pub mod config;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use rparvi::{
    mh_run_with, metrics, run_with, Density, Executor, MetricsReport, MmdBandwidth, RunResult, SamplerError,
    TargetDensity,
};
use thiserror::Error;

pub use config::{parse_config, OutputConfig, RunConfig};
use output::BaselineSummary;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

impl CliError {
    /// 2 for numeric aborts raised by the target density, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sampler(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

/// Knobs that come from command-line flags rather than the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads for particle updates; 0 picks automatically.
    pub workers: usize,
    pub quiet: bool,
}

/// What a successful run produced.
#[derive(Debug)]
pub struct RunReport {
    pub result: RunResult,
    pub baseline: Option<Vec<Vec<f64>>>,
    pub files: Vec<PathBuf>,
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        context: format!("reading {}", path.display()),
        source,
    })?;
    parse_config(&text)
}

fn marginals(target: &TargetDensity) -> impl Fn(usize, f64) -> Option<f64> + '_ {
    move |axis, x| target.marginal_cdf(axis, x)
}

fn report_for(
    samples: &[Vec<f64>],
    cfg: &RunConfig,
    reference: Option<&[Vec<f64>]>,
) -> Result<MetricsReport, SamplerError> {
    let cdf = marginals(&cfg.target);
    let bandwidth = cfg.output.mmd_bandwidth.map_or(MmdBandwidth::Median, MmdBandwidth::Fixed);
    let centers = cfg.output.mode_centers.clone().or_else(|| cfg.target.mode_centers());
    metrics::summarize(
        samples,
        cfg.output.ks.then_some(&cdf as &dyn Fn(usize, f64) -> Option<f64>),
        reference.map(|r| (r, bandwidth)),
        centers.as_deref().map(|c| (c, cfg.output.mode_radius)),
    )
}

/// Run the configured target. See [`run_command_with`].
pub fn run_command(cfg: &RunConfig, opts: &RunOptions) -> Result<RunReport, CliError> {
    run_command_with(cfg, &cfg.target, opts)
}

/// Run the sampler (and the baseline, if configured) on `target` and write all outputs.
///
/// `target` overrides the configured density; the configured one still supplies
/// marginals and mode centers for the metrics.
pub fn run_command_with<D: Density + ?Sized>(
    cfg: &RunConfig,
    target: &D,
    opts: &RunOptions,
) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let exec = Executor::parallel(opts.workers)?;
    let hp = &cfg.hyperparameters;
    let total = hp.num_iterations();
    let mut next_decile = 1;
    let mut result = run_with(hp, target, &exec, |t, mean| {
        while !opts.quiet && total > 0 && t * 10 >= next_decile * total && next_decile <= 10 {
            eprintln!("iteration {t}/{total} ({}%) mean_reward={mean:.6}", next_decile * 10);
            next_decile += 1;
        }
    })?;

    let baseline = match &cfg.baseline {
        Some(mh) => {
            if !opts.quiet {
                eprintln!("running baseline: {} chains x {} steps", mh.num_chains, mh.steps);
            }
            let samples = mh_run_with(mh, target, &exec)?;
            let kept = if samples.thinned.is_empty() { samples.finals } else { samples.thinned };
            Some((kept, samples.acceptance_rate))
        }
        None => None,
    };

    let particles = result.final_system.to_rows();
    let baseline_summary = match &baseline {
        Some((kept, rate)) => Some(BaselineSummary {
            num_samples: kept.len(),
            acceptance_rate: *rate,
            metrics: (cfg.output.metrics && kept.len() >= 2)
                .then(|| report_for(kept, cfg, None))
                .transpose()?,
        }),
        None => None,
    };
    if cfg.output.metrics && particles.len() >= 2 {
        let reference = baseline.as_ref().map(|(kept, _)| kept.as_slice());
        result.metrics_summary = Some(report_for(&particles, cfg, reference)?);
    }

    let files = output::write_outputs(
        &result,
        cfg,
        baseline.as_ref().zip(baseline_summary.as_ref()).map(|((k, _), s)| (k.as_slice(), s)),
        started.elapsed().as_secs_f64(),
    )
    .map_err(|source| CliError::Io {
        context: format!("writing outputs to {}", cfg.output.directory.display()),
        source,
    })?;
    if !opts.quiet {
        eprintln!("wrote {} files to {}", files.len(), cfg.output.directory.display());
    }
    Ok(RunReport {
        result,
        baseline: baseline.map(|(k, _)| k),
        files,
    })
}
