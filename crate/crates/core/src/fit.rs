//! Least-squares trend fits on log-log data.

use serde::{Deserialize, Serialize};

/// A fitted power law `count ≈ A · scale^slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    /// `(ln scale, ln count)` pairs.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    /// Accepted slope window, when the fit is used as a check.
    pub window: Option<(f64, f64)>,
}

impl TrendFit {
    /// Fits `ln y = intercept + slope · ln x`. Points with nonpositive `x` or
    /// `y` are dropped; at least two must remain.
    pub fn from_samples(samples: &[(f64, f64)]) -> Option<Self> {
        let points: Vec<(f64, f64)> = samples
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|&(x, y)| (x.ln(), y.ln()))
            .collect();
        let (slope, intercept) = least_squares(&points)?;
        let residual = (points
            .iter()
            .map(|&(x, y)| (y - intercept - slope * x).powi(2))
            .sum::<f64>()
            / points.len() as f64)
            .sqrt();
        Some(Self {
            points,
            slope,
            intercept,
            residual,
            window: None,
        })
    }

    pub fn with_window(mut self, lo: f64, hi: f64) -> Self {
        self.window = Some((lo, hi));
        self
    }

    pub fn in_window(&self) -> bool {
        self.window
            .is_none_or(|(lo, hi)| (lo..=hi).contains(&self.slope))
    }
}

/// Ordinary least squares `y = b + a x`; returns `(a, b)`.
pub fn least_squares(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    Some((a, my - a * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let s: Vec<(f64, f64)> = (1..10)
            .map(|k| (k as f64, 3.0 * (k as f64).powf(-1.5)))
            .collect();
        let fit = TrendFit::from_samples(&s).unwrap().with_window(-1.6, -1.4);
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(fit.in_window());
    }
}
