//! The `M`-approximate variance
//! `Var(X, M) = Σ_a [N_{F_a,ν}(X) − s_{F_a}(K) σ_{∞,F_a,ν}(X)]²`, `K = K(M)`.
//!
//! Weights are rounded to multiples of `2^{-24}` before counting, so both
//! evaluations of `Σ_1` are exact integers in units of `2^{-48}` and can be
//! compared for equality.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delta::SmoothWeight;
use crate::error::{check_budget, precondition, Result};

use super::archimedean::{sigma_infty, CuspidalDensity};
use super::density::{s_fk_table, series_by_product};
use super::{exact_cbrt, k_of};

const WEIGHT_SCALE: f64 = (1u64 << 24) as f64;
const LATTICE_BUDGET: u128 = 50_000_000;
/// Grid size for the tabulated level-set integral of cuspidal weights.
const DENSITY_NODES: usize = 161;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub x: f64,
    pub m: u64,
    pub k: u128,
    /// `Σ_a N_a²` and `N_{F,w}(X)` in units of `2^{-48}`.
    pub sigma1_by_levels: i128,
    pub sigma1_by_pairs: i128,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    /// `Σ_1 − 2Σ_2 + Σ_3`.
    pub var: f64,
    /// `Σ_a (N_a − s_a σ_a)²`, summed directly.
    pub var_direct: f64,
    pub n_fw: f64,
    /// `𝒮(K)`.
    pub series: f64,
    /// `σ_{∞,F,w} = ∫ σ_∞(ã)² dã`, as a Riemann sum over `ã = a/X³`.
    pub sigma_fw: f64,
    /// `𝒮(K) σ_{∞,F,w} X³`.
    pub main_term: f64,
    /// `Var − (N_{F,w}(X) − main_term)`.
    pub gap: f64,
    /// Summed quadrature error estimates of the `σ_∞` values.
    pub quadrature_error: f64,
    pub levels: usize,
}

impl VarianceReport {
    pub fn double_count_holds(&self) -> bool {
        self.sigma1_by_levels == self.sigma1_by_pairs
    }
}

/// Quantized `ν(y/X)` on the integer box containing `X · Supp ν`.
struct LatticeWeights {
    lo: [i64; 3],
    len: [usize; 3],
    q: Vec<i64>,
}

impl LatticeWeights {
    fn new(nu: &SmoothWeight, x: f64) -> Result<Self> {
        let bbox = nu.bounding_box().unwrap_or_default();
        if bbox.len() != 3 {
            return precondition("ν must be a weight on R^3");
        }
        let lo = [0, 1, 2].map(|i| (bbox[i].0 * x).floor() as i64);
        let hi = [0, 1, 2].map(|i| (bbox[i].1 * x).ceil() as i64);
        let len = [0, 1, 2].map(|i| (hi[i] - lo[i] + 1) as usize);
        check_budget(
            "lattice weights",
            len.iter().map(|&l| l as u128).product(),
            LATTICE_BUDGET,
        )?;
        let plane = len[1] * len[2];
        let q: Vec<i64> = (0..len[0] * plane)
            .into_par_iter()
            .map(|idx| {
                let y1 = lo[0] + (idx / plane) as i64;
                let y2 = lo[1] + (idx % plane / len[2]) as i64;
                let y3 = lo[2] + (idx % len[2]) as i64;
                let v = nu.eval(&[y1 as f64 / x, y2 as f64 / x, y3 as f64 / x]);
                (v * WEIGHT_SCALE).round() as i64
            })
            .collect();
        Ok(Self { lo, len, q })
    }

    fn get(&self, y: [i64; 3]) -> i64 {
        let mut idx = 0usize;
        for i in 0..3 {
            let k = y[i] - self.lo[i];
            if k < 0 || k as usize >= self.len[i] {
                return 0;
            }
            idx = idx * self.len[i] + k as usize;
        }
        self.q[idx]
    }

    fn points(&self) -> impl Iterator<Item = ([i64; 3], i64)> + '_ {
        let plane = self.len[1] * self.len[2];
        self.q
            .iter()
            .enumerate()
            .filter(|(_, &q)| q != 0)
            .map(move |(idx, &q)| {
                (
                    [
                        self.lo[0] + (idx / plane) as i64,
                        self.lo[1] + (idx % plane / self.len[2]) as i64,
                        self.lo[2] + (idx % self.len[2]) as i64,
                    ],
                    q,
                )
            })
    }

    fn range(&self, i: usize) -> std::ops::RangeInclusive<i64> {
        self.lo[i]..=self.lo[i] + self.len[i] as i64 - 1
    }
}

fn f0(y: [i64; 3]) -> i128 {
    y.iter().map(|&t| (t as i128).pow(3)).sum()
}

/// `N_{F_a,ν}(X)` for every `a`, in units of `2^{-24}`.
fn level_weights(lw: &LatticeWeights) -> BTreeMap<i64, i64> {
    let mut levels = BTreeMap::new();
    for (y, q) in lw.points() {
        *levels.entry(f0(y) as i64).or_insert(0) += q;
    }
    levels
}

/// `N_{F,w}(X)` for `F(y, z) = F_0(y) + F_0(z)` and `w(ỹ, z̃) = ν(ỹ) ν(−z̃)`:
/// each `(y, z_1, z_2)` fixes `z_3` by an exact cube root.
fn pair_count(lw: &LatticeWeights) -> i128 {
    let points: Vec<([i64; 3], i64)> = lw.points().collect();
    points
        .par_iter()
        .map(|&(y, qy)| {
            let fy = f0(y);
            let mut acc = 0i128;
            for u1 in lw.range(0) {
                for u2 in lw.range(1) {
                    let (z1, z2) = (-u1 as i128, -u2 as i128);
                    let Some(z3) = exact_cbrt(-fy - z1.pow(3) - z2.pow(3)) else {
                        continue;
                    };
                    let qz = lw.get([u1, u2, -z3 as i64]);
                    acc += qy as i128 * qz as i128;
                }
            }
            acc
        })
        .sum()
}

/// `Σ_a N_{F_a,ν}(X)²` and `N_{F,w}(X)`, in units of `2^{-48}`.
pub fn sigma1_double_count(nu: &SmoothWeight, x: f64) -> Result<(i128, i128)> {
    let lw = LatticeWeights::new(nu, x)?;
    let by_levels = level_weights(&lw)
        .values()
        .map(|&n| (n as i128).pow(2))
        .sum();
    Ok((by_levels, pair_count(&lw)))
}

/// Range of `F_0` over the support of `ν`, as far as its shape reveals it.
fn level_range(nu: &SmoothWeight) -> Result<(f64, f64)> {
    match nu {
        SmoothWeight::Cuspidal(c) => {
            c.w0.support()
                .ok_or_else(|| crate::error::Error::Precondition("w_0 has empty support".into()))
        }
        SmoothWeight::Product(ws) if ws.len() == 3 => {
            let mut lo = 0.0;
            let mut hi = 0.0;
            for w in ws {
                let Some((a, b)) = w.support() else {
                    return Ok((0.0, 0.0));
                };
                lo += a.powi(3);
                hi += b.powi(3);
            }
            Ok((lo, hi))
        }
        _ => precondition("ν must be a weight on R^3"),
    }
}

pub fn variance_report(x: f64, m: u64, nu: &SmoothWeight) -> Result<VarianceReport> {
    if x < 1.0 {
        return precondition("X must be at least 1");
    }
    let k = k_of(m);
    let lw = LatticeWeights::new(nu, x)?;
    let levels = level_weights(&lw);
    let by_levels: i128 = levels.values().map(|&n| (n as i128).pow(2)).sum();
    let by_pairs = pair_count(&lw);

    let (tlo, thi) = level_range(nu)?;
    let x3 = x.powi(3);
    let a_lo = (tlo * x3).floor() as i64;
    let a_hi = (thi * x3).ceil() as i64;
    let k64 = k.to_u64().filter(|&k| k <= 100_000_000);
    let Some(k64) = k64 else {
        return precondition("K(M) too large for the s_F(K) table");
    };
    let s_table = s_fk_table(k64)?;
    let tabulated = match nu {
        SmoothWeight::Cuspidal(c) if !nu.is_zero() => Some(CuspidalDensity::new(c, DENSITY_NODES)?),
        _ => None,
    };
    let sigmas: Vec<(f64, f64)> = (a_lo..=a_hi)
        .into_par_iter()
        .map(|a| {
            match &tabulated {
                Some(t) => t.sigma(a as f64, x),
                None => sigma_infty(a as f64, nu, x),
            }
            .map(|r| (r.value, r.error))
        })
        .collect::<Result<_>>()?;

    let mut sigma2 = 0.0;
    let mut sigma3 = 0.0;
    let mut var_direct = 0.0;
    let mut sigma_sq = 0.0;
    let mut quadrature_error = 0.0;
    for (i, a) in (a_lo..=a_hi).enumerate() {
        let n = levels.get(&a).copied().unwrap_or(0) as f64 / WEIGHT_SCALE;
        let (sig, err) = sigmas[i];
        let pred = s_table[a.rem_euclid(k64 as i64) as usize] * sig;
        sigma2 += n * pred;
        sigma3 += pred * pred;
        var_direct += (n - pred).powi(2);
        sigma_sq += sig * sig;
        quadrature_error += err;
    }
    // Levels outside the quadrature range have σ = 0.
    for &n in levels
        .range(..a_lo)
        .chain(levels.range(a_hi + 1..))
        .map(|(_, n)| n)
    {
        var_direct += (n as f64 / WEIGHT_SCALE).powi(2);
    }
    let sigma1 = by_levels as f64 / WEIGHT_SCALE.powi(2);
    let n_fw = by_pairs as f64 / WEIGHT_SCALE.powi(2);
    let series = series_by_product(m)?.to_f64().expect("finite series value");
    let sigma_fw = sigma_sq / x3;
    let main_term = series * sigma_fw * x3;
    let var = sigma1 - 2.0 * sigma2 + sigma3;
    Ok(VarianceReport {
        x,
        m,
        k,
        sigma1_by_levels: by_levels,
        sigma1_by_pairs: by_pairs,
        sigma1,
        sigma2,
        sigma3,
        var,
        var_direct,
        n_fw,
        series,
        sigma_fw,
        main_term,
        gap: var - (n_fw - main_term),
        quadrature_error,
        levels: levels.len(),
    })
}
