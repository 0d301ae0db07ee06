//! Square-full divisors of `F^∨(c)` and the second moment of sums to moduli
//! supported on the primes of `F^∨(c)`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{primes_up_to, reduce};
use crate::dual::dual_form_i128;
use crate::error::{check_budget, precondition, Error, Result};
use crate::expsum::exp_sum;
use crate::fit::TrendFit;
use crate::form::DiagonalCubicForm;
use crate::rng::SeededRng;

/// Largest box enumerated exhaustively.
pub const BOX_BUDGET: u128 = 50_000_000;

/// Default `Q` grid for [`squarefull_stats`]: `Q = 4^k`, `k = 1..=12`.
///
/// Values of `F^∨` carry a large power of 2 and 3 for many `c`, which holds the
/// frequency near 1/2 for `Q <= 64`; the decay shows once `Q` passes `10^3`.
pub fn default_squarefull_grid() -> Vec<u64> {
    (1..=12).map(|k| 4u64.pow(k)).collect()
}

/// Default `N` grid for [`b3_second_moment`].
pub const DEFAULT_B3_GRID: [u64; 4] = [2, 4, 8, 16];

/// Square-full integers in `[lo, hi]`, each written once as `a² b³` with `b`
/// square-free. `1` is square-full.
pub fn squarefull_in_window(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut b = 1u64;
    while b * b * b <= hi {
        if crate::arith::mobius(b) != 0 {
            let b3 = b * b * b;
            let mut a = 1u64;
            while a * a * b3 <= hi {
                if a * a * b3 >= lo {
                    out.push(a * a * b3);
                }
                a += 1;
            }
        }
        b += 1;
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Exhaustive,
    Sampled { seed: u64, samples: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquarefullRow {
    pub q: u64,
    /// Tuples with a square-full divisor of `F^∨(c)` in `[Q, 2Q]`.
    pub hits: u64,
    pub total: u64,
    pub frequency: f64,
    /// Half-width of the 95% binomial interval; zero when exhaustive.
    pub ci_halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquarefullReport {
    pub z: i64,
    pub mode: SampleMode,
    pub rows: Vec<SquarefullRow>,
    /// Frequency against `Q`; the accepted window is strictly negative.
    pub fit: Option<TrendFit>,
}

impl SquarefullReport {
    pub fn pass(&self) -> bool {
        self.fit.as_ref().is_some_and(|f| f.in_window())
    }
}

fn box_tuple(mut idx: u64, m: usize, z: i64) -> Vec<i64> {
    let side = (2 * z + 1) as u64;
    (0..m)
        .map(|_| {
            let v = (idx % side) as i64 - z;
            idx /= side;
            v
        })
        .collect()
}

fn dual_value(form: &DiagonalCubicForm, c: &[i64]) -> Result<i128> {
    dual_form_i128(form, c).ok_or_else(|| Error::Precondition("F^∨ overflowed i128".into()))
}

/// Frequency of `c ∈ [−Z, Z]^m` for which `F^∨(c)` has a square-full divisor
/// in `[Q, 2Q]`, for each `Q` in `qs`.
pub fn squarefull_stats(
    form: &DiagonalCubicForm,
    z: i64,
    qs: &[u64],
    mode: SampleMode,
) -> Result<SquarefullReport> {
    if z < 0 {
        return precondition("Z must be nonnegative");
    }
    let m = form.m();
    let side = (2 * z + 1) as u128;
    let tuples: Vec<Vec<i64>> = match mode {
        SampleMode::Exhaustive => {
            check_budget("square-full box", side.pow(m as u32), BOX_BUDGET)?;
            (0..side.pow(m as u32) as u64)
                .map(|i| box_tuple(i, m, z))
                .collect()
        }
        SampleMode::Sampled { seed, samples } => {
            check_budget("square-full samples", samples as u128, BOX_BUDGET)?;
            let mut rng = SeededRng::new(seed);
            (0..samples)
                .map(|_| (0..m).map(|_| rng.int_in(-z, z)).collect())
                .collect()
        }
    };
    let values: Vec<u128> = tuples
        .par_iter()
        .map(|c| dual_value(form, c).map(|v| v.unsigned_abs()))
        .collect::<Result<_>>()?;
    let total = values.len() as u64;
    let largest = values.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    for &q in qs {
        let hi = (2 * q as u128).min(largest);
        let window = if hi >= q as u128 {
            squarefull_in_window(q, hi as u64)
        } else {
            Vec::new()
        };
        let hits = values
            .par_iter()
            .filter(|&&d| d != 0 && window.iter().any(|&s| d % s as u128 == 0))
            .count() as u64;
        let frequency = hits as f64 / total.max(1) as f64;
        let ci_halfwidth = match mode {
            SampleMode::Exhaustive => 0.0,
            SampleMode::Sampled { .. } => {
                1.96 * (frequency * (1.0 - frequency) / total.max(1) as f64).sqrt()
            }
        };
        rows.push(SquarefullRow {
            q,
            hits,
            total,
            frequency,
            ci_halfwidth,
        });
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.q as f64, r.frequency)).collect();
    let fit = TrendFit::from_samples(&samples)
        .map(|t| t.with_window(f64::NEG_INFINITY, -f64::MIN_POSITIVE));
    Ok(SquarefullReport { z, mode, rows, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct B3Row {
    pub n: u64,
    /// `Z^{-m} Σ'_c (Σ_{n_c} N^{-1/2} |S̃_c(n_c)|)²`.
    pub value: f64,
    /// Tuples with at least one admissible `n_c`.
    pub contributing: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct B3Report {
    pub z: i64,
    pub rows: Vec<B3Row>,
    pub fit: Option<TrendFit>,
}

impl B3Report {
    pub fn pass(&self) -> bool {
        self.fit.as_ref().is_some_and(|f| f.in_window())
    }
}

/// Integers in `[lo, hi]` built from `primes`.
fn smooth_in_window(primes: &[u64], lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut stack = vec![(1u64, 0usize)];
    while let Some((n, start)) = stack.pop() {
        if n >= lo {
            out.push(n);
        }
        for (i, &p) in primes.iter().enumerate().skip(start) {
            if n * p <= hi {
                stack.push((n * p, i));
            }
        }
    }
    out.sort_unstable();
    out
}

/// `Σ'_{‖c‖ <= Z} (Σ_{n_c ∈ [N, 2N], n_c | F^∨(c)^∞} N^{-1/2} |S̃_c(n_c)|)²`,
/// normalized by `Z^m`, for each `N` in `ns`. The sum runs over `c` with
/// `F^∨(c) ≠ 0`.
pub fn b3_second_moment(form: &DiagonalCubicForm, z: i64, ns: &[u64]) -> Result<B3Report> {
    if z < 1 {
        return precondition("Z must be positive");
    }
    let m = form.m();
    let side = (2 * z + 1) as u128;
    check_budget("B3 box", side.pow(m as u32), BOX_BUDGET)?;
    let tuples: Vec<Vec<i64>> = (0..side.pow(m as u32) as u64)
        .map(|i| box_tuple(i, m, z))
        .collect();
    let values: Vec<i128> = tuples
        .iter()
        .map(|c| dual_value(form, c))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &n_lo in ns {
        let n_hi = 2 * n_lo;
        let small_primes = primes_up_to(n_hi);
        let mut cache: HashMap<(u64, Vec<u64>), f64> = HashMap::new();
        let mut total = 0.0;
        let mut contributing = 0;
        for (c, &d) in tuples.iter().zip(&values) {
            if d == 0 {
                continue;
            }
            let primes: Vec<u64> = small_primes
                .iter()
                .copied()
                .filter(|&p| d % p as i128 == 0)
                .collect();
            if primes.is_empty() {
                continue;
            }
            let moduli = smooth_in_window(&primes, n_lo, n_hi);
            if moduli.is_empty() {
                continue;
            }
            contributing += 1;
            let mut inner = 0.0;
            for n in moduli {
                let key = (n, c.iter().map(|&ci| reduce(ci, n)).collect::<Vec<_>>());
                let s = match cache.get(&key) {
                    Some(&s) => s,
                    None => {
                        let s = exp_sum(form, c, n)?.normalized.abs();
                        cache.insert(key, s);
                        s
                    }
                };
                inner += s / (n_lo as f64).sqrt();
            }
            total += inner * inner;
        }
        rows.push(B3Row {
            n: n_lo,
            value: total / (z as f64).powi(m as i32),
            contributing,
        });
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.value)).collect();
    let fit = TrendFit::from_samples(&samples)
        .map(|t| t.with_window(f64::NEG_INFINITY, -f64::MIN_POSITIVE));
    Ok(B3Report { z, rows, fit })
}
