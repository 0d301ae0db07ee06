//! Measured decay of `J_{c,X}(n)`.
//!
//! Along a ray `c = k·c_0` with `c_0` normal to the cone `F = 0` at a point of
//! `Supp w`, and for `1 ≪ X‖c‖/n ≪ 1/r`, `|J|` falls like
//! `(X‖c‖/n)^{1−m/2}`; past `X‖c‖/n ≈ 1/r` (that is, `‖c‖ ≳ X^{1/2}`) it
//! falls faster than any power. For `n` past a cutoff proportional to
//! `X^{3/2}`, `J` vanishes identically.

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::fit::TrendFit;
use crate::form::DiagonalCubicForm;

use super::jint::{form_radius, j_integral, JPath};
use super::weight::SmoothWeight;
use super::{h_sup_profile, HKernel, HSupRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    /// Ray direction `c_0`.
    pub direction: Vec<i64>,
    /// `(X, n)` for the power-law regime, and the multipliers `k`.
    pub x: f64,
    pub n: u64,
    pub multipliers: Vec<i64>,
    /// `(X, n)` for the Schwartz sample (`r = n/X^{3/2}` of order one), comparing `c = c_0` with
    /// `‖c‖ = schwartz_factor · X^{1/2}`.
    pub schwartz_x: f64,
    pub schwartz_n: u64,
    pub schwartz_factor: f64,
    /// `X` values for the cutoff scan.
    pub cutoff_xs: Vec<f64>,
    /// Half-width of the accepted slope window around `1 − m/2`.
    pub slope_tolerance: f64,
}

impl DecayConfig {
    /// The default grid: `r = n/X^{3/2} = 0.01` with `X‖c‖/n` from 4 to 30.
    pub fn standard(direction: Vec<i64>) -> Self {
        Self {
            direction,
            x: 10_000.0,
            n: 10_000,
            multipliers: vec![4, 6, 9, 14, 20, 30],
            schwartz_x: 100.0,
            schwartz_n: 500,
            schwartz_factor: 8.0,
            cutoff_xs: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            slope_tolerance: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    /// `X‖c‖_∞/n`.
    pub frequency: f64,
    pub abs_j: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffRow {
    pub x: f64,
    /// Smallest `n` with `J ≡ 0` for every `c`.
    pub n_cutoff: u64,
    /// `J` at the cutoff (exactly zero) and one step before it.
    pub j_at_cutoff: f64,
    pub j_before: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub target_slope: f64,
    pub rows: Vec<DecayRow>,
    pub fit: TrendFit,
    /// `|J(‖c‖ = factor·X^{1/2})| / |J(c_0)|`.
    pub schwartz_ratio: f64,
    pub cutoff: Vec<CutoffRow>,
    /// Fitted exponent of the cutoff in `X` (expected 3/2).
    pub cutoff_exponent: f64,
    pub h_sup: Vec<HSupRow>,
}

impl DecayReport {
    pub fn pass(&self) -> bool {
        self.fit.in_window()
            && self.schwartz_ratio < 1e-3
            && self.cutoff.iter().all(|c| c.j_at_cutoff == 0.0)
            && self.cutoff.iter().any(|c| c.j_before > 0.0)
            && (self.cutoff_exponent - 1.5).abs() < 0.1
    }
}

pub fn verify_decay(
    f: &DiagonalCubicForm,
    w: &SmoothWeight,
    cfg: &DecayConfig,
) -> Result<DecayReport> {
    if !w.is_clean_for_diagonal() {
        return precondition("decay is measured for clean weights only");
    }
    if cfg.multipliers.len() < 4 {
        return precondition("the slope fit needs at least four points");
    }
    let m = f.m();
    let target = 1.0 - m as f64 / 2.0;
    let dir_norm = cfg
        .direction
        .iter()
        .map(|c| c.unsigned_abs())
        .max()
        .unwrap_or(0) as f64;
    if dir_norm == 0.0 {
        return precondition("the ray direction must be nonzero");
    }
    let mut rows = Vec::new();
    for &k in &cfg.multipliers {
        let c: Vec<i64> = cfg.direction.iter().map(|&d| d * k).collect();
        let j = j_integral(f, w, &c, cfg.x, cfg.n, JPath::Factorized)?;
        rows.push(DecayRow {
            frequency: cfg.x * dir_norm * k as f64 / cfg.n as f64,
            abs_j: j.abs(),
            error: j.error,
        });
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.frequency, r.abs_j)).collect();
    let fit = TrendFit::from_samples(&samples)
        .ok_or_else(|| crate::error::Error::Precondition("degenerate decay samples".into()))?
        .with_window(target - cfg.slope_tolerance, target + cfg.slope_tolerance);

    let near = j_integral(
        f,
        w,
        &cfg.direction,
        cfg.schwartz_x,
        cfg.schwartz_n,
        JPath::Factorized,
    )?;
    let k_far = (cfg.schwartz_factor * cfg.schwartz_x.sqrt() / dir_norm).round() as i64;
    let far_c: Vec<i64> = cfg.direction.iter().map(|&d| d * k_far).collect();
    let far = j_integral(
        f,
        w,
        &far_c,
        cfg.schwartz_x,
        cfg.schwartz_n,
        JPath::Factorized,
    )?;

    let rf = form_radius(f, w)?;
    let mut cutoff = Vec::new();
    for &x in &cfg.cutoff_xs {
        let y = x.powf(1.5);
        let mut n = 1u64;
        while !HKernel::new(n as f64 / y)?.vanishes_on(rf) {
            n += 1;
        }
        let j = j_integral(f, w, &cfg.direction, x, n, JPath::Factorized)?;
        let before = j_integral(f, w, &cfg.direction, x, n - 1, JPath::Factorized)?;
        cutoff.push(CutoffRow {
            x,
            n_cutoff: n,
            j_at_cutoff: j.abs(),
            j_before: before.abs(),
        });
    }
    let cut_samples: Vec<(f64, f64)> = cutoff.iter().map(|c| (c.x, c.n_cutoff as f64)).collect();
    let cutoff_exponent = TrendFit::from_samples(&cut_samples).map_or(f64::NAN, |t| t.slope);

    Ok(DecayReport {
        target_slope: target,
        rows,
        fit,
        schwartz_ratio: far.abs() / near.abs(),
        cutoff,
        cutoff_exponent,
        h_sup: h_sup_profile(1e-3, 1.0, 7, 2.0 * rf)?,
    })
}
