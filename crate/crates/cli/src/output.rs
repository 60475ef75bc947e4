//! CSV and JSON output files.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rparvi::{MetricsReport, RunResult};
use serde::Serialize;

use crate::config::RunConfig;

pub const PARTICLES_FILE: &str = "particles.csv";
pub const HISTORY_FILE: &str = "reward_history.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const BASELINE_FILE: &str = "baseline_samples.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// 17 significant digits; parses back to the same `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn dim_header(prefix: &str, dim: usize) -> String {
    let mut header = prefix.to_string();
    for i in 0..dim {
        header.push_str(&format!(",dim_{i}"));
    }
    header
}

fn write_row<W: Write>(out: &mut W, leading: &[String], values: &[f64]) -> io::Result<()> {
    let mut line = leading.join(",");
    for v in values {
        line.push(',');
        line.push_str(&format_real(*v));
    }
    writeln!(out, "{line}")
}

/// Write one row per point: `<id_column>,dim_0,…`.
pub fn write_points<'a, I>(path: &Path, id_column: &str, dim: usize, rows: I) -> io::Result<()>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", dim_header(id_column, dim))?;
    for (id, row) in rows.into_iter().enumerate() {
        write_row(&mut out, &[id.to_string()], row)?;
    }
    out.flush()
}

/// Read a points file back into rows, dropping the id column.
pub fn read_points(path: &Path) -> io::Result<Vec<Vec<f64>>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(File::open(path)?).lines().enumerate().skip(1) {
        let line = line?;
        let row = line
            .split(',')
            .skip(1)
            .map(|f| f.parse::<f64>().map_err(|e| bad(format!("line {}: {e}", n + 1))))
            .collect::<io::Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_history(path: &Path, mean_rewards: &[f64]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "iteration,mean_reward")?;
    for (i, r) in mean_rewards.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, format_real(*r))?;
    }
    out.flush()
}

pub fn write_trajectory(path: &Path, dim: usize, snapshots: &[Vec<f64>]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", dim_header("iteration,particle_id", dim))?;
    for (t, snapshot) in snapshots.iter().enumerate() {
        for (p, row) in snapshot.chunks_exact(dim).enumerate() {
            write_row(&mut out, &[(t + 1).to_string(), p.to_string()], row)?;
        }
    }
    out.flush()
}

#[derive(Debug, Serialize)]
pub struct BaselineSummary {
    pub num_samples: usize,
    pub acceptance_rate: f64,
    pub metrics: Option<MetricsReport>,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: toml::Table,
    wall_time_seconds: f64,
    iterations_completed: usize,
    final_mean_reward: Option<f64>,
    metrics: Option<&'a MetricsReport>,
    baseline: Option<&'a BaselineSummary>,
}

/// Write every output file for a completed run; returns the paths written.
pub fn write_outputs(
    result: &RunResult,
    cfg: &RunConfig,
    baseline: Option<(&[Vec<f64>], &BaselineSummary)>,
    wall_time_seconds: f64,
) -> io::Result<Vec<PathBuf>> {
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir)?;
    let dim = result.final_system.dim();
    let mut written = Vec::new();

    let path = dir.join(PARTICLES_FILE);
    write_points(&path, "particle_id", dim, result.final_system.rows())?;
    written.push(path);

    let path = dir.join(HISTORY_FILE);
    write_history(&path, result.history.mean_rewards())?;
    written.push(path);

    if cfg.output.trajectory {
        if let Some(snapshots) = &result.trajectory {
            let path = dir.join(TRAJECTORY_FILE);
            write_trajectory(&path, dim, snapshots)?;
            written.push(path);
        }
    }

    if let Some((samples, _)) = baseline {
        let path = dir.join(BASELINE_FILE);
        write_points(&path, "chain_id", dim, samples.iter().map(Vec::as_slice))?;
        written.push(path);
    }

    let summary = Summary {
        config: cfg.to_toml().parse().expect("serialized config parses"),
        wall_time_seconds,
        iterations_completed: result.history.len(),
        final_mean_reward: result.history.mean_rewards().last().copied(),
        metrics: result.metrics_summary.as_ref(),
        baseline: baseline.map(|(_, s)| s),
    };
    let path = dir.join(SUMMARY_FILE);
    let mut out = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut out, &summary)?;
    writeln!(out)?;
    out.flush()?;
    written.push(path);
    Ok(written)
}
