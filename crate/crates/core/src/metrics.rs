//! Sample-quality metrics: moments, 1-d KS, unbiased MMD², mode occupancy, 1-d KDE.

use serde::Serialize;

use crate::error::{Result, SamplerError};

/// Summary statistics for a particle cloud.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_per_dim: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mmd_squared: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_occupancy: Option<Vec<f64>>,
}

fn metric_error(msg: impl Into<String>) -> SamplerError {
    SamplerError::Metric(msg.into())
}

fn common_dim(samples: &[Vec<f64>]) -> Result<usize> {
    let d = samples.first().map_or(0, Vec::len);
    if let Some(bad) = samples.iter().find(|s| s.len() != d) {
        return Err(SamplerError::DimensionMismatch { expected: d, actual: bad.len() });
    }
    Ok(d)
}

/// Arithmetic mean and unbiased (divisor `n − 1`) covariance.
pub fn sample_moments(samples: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = samples.len();
    if n < 2 {
        return Err(metric_error("sample_moments needs at least 2 samples"));
    }
    let d = common_dim(samples)?;
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, x) in mean.iter_mut().zip(s) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = vec![vec![0.0; d]; d];
    for s in samples {
        let centered: Vec<f64> = s.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[i][j] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    Ok((mean, cov))
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_statistic_1d<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(metric_error("ks_statistic_1d needs at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let stat = sorted.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = cdf(x);
        let upper = (i + 1) as f64 / n - f;
        let lower = f - i as f64 / n;
        acc.max(upper).max(lower)
    });
    Ok(stat)
}

/// Kernel bandwidth selection for [`mmd_squared`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MmdBandwidth {
    Fixed(f64),
    /// Median pairwise Euclidean distance over the pooled sample.
    Median,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Median of all pairwise distances within `points`.
pub fn median_pairwise_distance(points: &[&[f64]]) -> f64 {
    let mut dists = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            dists.push(squared_distance(a, b).sqrt());
        }
    }
    if dists.is_empty() {
        return 0.0;
    }
    dists.sort_by(f64::total_cmp);
    let mid = dists.len() / 2;
    if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    }
}

/// RBF kernel `exp(−‖a − b‖² / (2h²))`.
pub fn rbf_kernel(a: &[f64], b: &[f64], bandwidth: f64) -> f64 {
    (-squared_distance(a, b) / (2.0 * bandwidth * bandwidth)).exp()
}

fn canonical_order(x: &[Vec<f64>], y: &[Vec<f64>]) -> std::cmp::Ordering {
    x.len().cmp(&y.len()).then_with(|| {
        x.iter()
            .flatten()
            .zip(y.iter().flatten())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// Unbiased MMD² U-statistic between samples `x` and `y` with an RBF kernel.
///
/// Within-set sums exclude the diagonal; the cross term averages all `n·m` pairs.
/// The result can be slightly negative.
pub fn mmd_squared(x: &[Vec<f64>], y: &[Vec<f64>], bandwidth: MmdBandwidth) -> Result<f64> {
    let (n, m) = (x.len(), y.len());
    if n < 2 || m < 2 {
        return Err(metric_error("mmd_squared needs at least 2 samples per set"));
    }
    let dx = common_dim(x)?;
    let dy = common_dim(y)?;
    if dx != dy {
        return Err(SamplerError::DimensionMismatch { expected: dx, actual: dy });
    }
    let h = match bandwidth {
        MmdBandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        MmdBandwidth::Fixed(h) => return Err(metric_error(format!("invalid bandwidth {h}"))),
        MmdBandwidth::Median => {
            let pooled: Vec<&[f64]> = x.iter().chain(y).map(Vec::as_slice).collect();
            let h = median_pairwise_distance(&pooled);
            if h <= 0.0 {
                return Err(metric_error("zero bandwidth"));
            }
            h
        }
    };

    let within = |s: &[Vec<f64>]| {
        let mut sum = 0.0;
        for (i, a) in s.iter().enumerate() {
            for b in &s[i + 1..] {
                sum += rbf_kernel(a, b, h);
            }
        }
        2.0 * sum / (s.len() * (s.len() - 1)) as f64
    };
    // Sum the cross term in a canonical set order so mmd(x, y) == mmd(y, x) bitwise.
    let (first, second) = if canonical_order(x, y).is_le() { (x, y) } else { (y, x) };
    let mut cross = 0.0;
    for a in first {
        for b in second {
            cross += rbf_kernel(a, b, h);
        }
    }
    Ok(within(x) + within(y) - 2.0 * cross / (n * m) as f64)
}

/// Fraction of samples whose nearest center lies within `radius`.
///
/// Ties for nearest center go to the first listed.
pub fn mode_occupancy(samples: &[Vec<f64>], centers: &[Vec<f64>], radius: f64) -> Vec<f64> {
    let mut counts = vec![0usize; centers.len()];
    let r2 = radius * radius;
    for s in samples {
        let nearest = centers
            .iter()
            .enumerate()
            .map(|(k, c)| (k, squared_distance(s, c)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((k, dist2)) = nearest {
            if dist2 <= r2 {
                counts[k] += 1;
            }
        }
    }
    let n = samples.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

/// Bandwidth selection for [`kde_1d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KdeBandwidth {
    Fixed(f64),
    /// `1.06 σ̂ n^(−1/5)`.
    Silverman,
}

/// Silverman's rule of thumb with the unbiased sample standard deviation.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(metric_error("zero sample variance"));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return Err(metric_error("zero sample variance"));
    }
    Ok(1.06 * var.sqrt() * (n as f64).powf(-0.2))
}

/// Gaussian kernel density estimate of `samples` evaluated on `grid`.
pub fn kde_1d(samples: &[f64], grid: &[f64], bandwidth: KdeBandwidth) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(metric_error("kde_1d needs at least one sample"));
    }
    let h = match bandwidth {
        KdeBandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        KdeBandwidth::Fixed(h) => return Err(metric_error(format!("invalid bandwidth {h}"))),
        KdeBandwidth::Silverman => silverman_bandwidth(samples)?,
    };
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    Ok(grid
        .iter()
        .map(|&g| {
            norm * samples
                .iter()
                .map(|&s| {
                    let z = (g - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect())
}

/// Moments plus whichever optional comparisons the caller supplies.
pub fn summarize(
    samples: &[Vec<f64>],
    marginal_cdf: Option<&dyn Fn(usize, f64) -> Option<f64>>,
    reference: Option<(&[Vec<f64>], MmdBandwidth)>,
    modes: Option<(&[Vec<f64>], f64)>,
) -> Result<MetricsReport> {
    let (mean, covariance) = sample_moments(samples)?;
    let ks_per_dim = match marginal_cdf {
        Some(cdf) => (0..mean.len())
            .map(|axis| {
                if cdf(axis, 0.0).is_none() {
                    return Ok(None);
                }
                let column: Vec<f64> = samples.iter().map(|s| s[axis]).collect();
                ks_statistic_1d(&column, |x| cdf(axis, x).unwrap_or(f64::NAN)).map(Some)
            })
            .collect::<Result<Option<Vec<f64>>>>()?,
        None => None,
    };
    let mmd = reference
        .map(|(y, bw)| mmd_squared(samples, y, bw))
        .transpose()?;
    let mode_occupancy = modes.map(|(centers, radius)| mode_occupancy(samples, centers, radius));
    Ok(MetricsReport {
        mean,
        covariance,
        ks_per_dim,
        mmd_squared: mmd,
        mode_occupancy,
    })
}
