//! Small statistics helpers for the Monte-Carlo checks.

use crate::error::{Error, Result};

/// Standard error of a Bernoulli frequency estimate.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Whether an observed frequency lies within `k` standard errors of `p`.
/// A floor of half a count keeps degenerate `p ∈ {0, 1}` checks meaningful.
pub fn within_sigma(observed: f64, p: f64, n: usize, k: f64) -> bool {
    let s = binomial_sigma(p, n).max(0.5 / n as f64);
    (observed - p).abs() <= k * s
}

/// Normalize a histogram.
pub fn frequencies(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Every bin of `counts` within `k` sigma of the uniform frequency.
pub fn uniform_within_sigma(counts: &[u64], k: f64) -> bool {
    let n: u64 = counts.iter().sum();
    let p = 1.0 / counts.len() as f64;
    counts.iter().all(|&c| within_sigma(c as f64 / n as f64, p, n as usize, k))
}

/// Least-squares fit `log y = slope · log x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientSamples(format!("{} points, need at least 3", xs.len())));
    }
    if xs.iter().chain(ys).any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::Parameter("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LogLogFit { slope, intercept: my - slope * mx, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let xs = [2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let f = log_log_fit(&xs, &ys).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(log_log_fit(&xs[..2], &ys[..2]).is_err());
    }

    #[test]
    fn tvd_basics() {
        assert_eq!(total_variation(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), 0.5);
        assert!(total_variation(&[1.0], &[0.5, 0.5]).is_err());
    }
}
