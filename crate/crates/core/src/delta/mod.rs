//! The smooth delta-symbol kernel and the oscillatory integrals built on it.
//!
//! `h(x, y) = Σ_{j>=1} (xj)^{-1} [ω(xj) − ω(|y|/(xj))]` with `ω` a normalized
//! bump on `[1/2, 1]`. Because `ω` is supported there, both sums are finite:
//! the first runs over `j ∈ [1/(2x), 1/x]`, the second over
//! `j ∈ [|y|/x, 2|y|/x]`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::arith::euler_phi;
use crate::error::{precondition, Result};
use crate::quad::integrate;

pub mod decay;
pub mod identity;
pub mod jint;
pub mod weight;

pub use decay::{verify_decay, DecayConfig, DecayReport};
pub use identity::{delta_identity_eval, IdentityConfig, IdentityRecord};
pub use jint::{j_integral, p_r_eval, JPath, JValue, PrTable};
pub use weight::{CuspidalNu, SmoothWeight, Weight1D};

/// `ω_0(x) = exp(−1/(1 − x²))` on `|x| < 1`, zero elsewhere.
pub fn omega0(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// `c_0 = ∫ ω_0 ≈ 0.4440`, computed once.
pub fn c0() -> f64 {
    static C0: OnceLock<f64> = OnceLock::new();
    *C0.get_or_init(|| {
        integrate(omega0, -1.0, 1.0, 8, 1e-15, 1e-13)
            .expect("ω_0 is smooth")
            .value
    })
}

/// `ω(x) = 4 c_0^{-1} ω_0(4x − 3)`, supported on `[1/2, 1]` with unit mass.
pub fn omega(x: f64) -> f64 {
    4.0 / c0() * omega0(4.0 * x - 3.0)
}

/// `h(x, 0) = Σ_{j ∈ [1/(2x), 1/x]} ω(xj)/(xj)`.
pub fn h_zero(x: f64) -> f64 {
    let lo = (0.5 / x).ceil().max(1.0) as u64;
    let hi = (1.0 / x).floor() as u64;
    (lo..=hi)
        .map(|j| omega(x * j as f64) / (x * j as f64))
        .sum()
}

/// `h*(x, y) = Σ_{j ∈ [|y|/x, 2|y|/x]} ω(|y|/(xj))/(xj)`.
pub fn h_star(x: f64, y: f64) -> f64 {
    let y = y.abs();
    if y == 0.0 {
        return 0.0;
    }
    let lo = (y / x).ceil().max(1.0) as u64;
    let hi = (2.0 * y / x).floor() as u64;
    (lo..=hi)
        .map(|j| {
            let xj = x * j as f64;
            omega(y / xj) / xj
        })
        .sum()
}

pub fn h_eval(x: f64, y: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return precondition(format!("h(x, y) needs x > 0, got {x}"));
    }
    Ok(h_zero(x) - h_star(x, y))
}

/// `h(r, ·)` with the `y`-independent part cached, for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct HKernel {
    pub r: f64,
    zero: f64,
}

impl HKernel {
    pub fn new(r: f64) -> Result<Self> {
        if r <= 0.0 || !r.is_finite() {
            return precondition(format!("h(x, y) needs x > 0, got {r}"));
        }
        Ok(Self { r, zero: h_zero(r) })
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.zero - h_star(self.r, y)
    }

    /// `h(r, y) = 0` for every `|y| <= bound`. For `r >= 1` the first sum is
    /// empty and the second needs `|y| > r/2`.
    pub fn vanishes_on(&self, bound: f64) -> bool {
        self.r >= 1.0 && bound < self.r / 2.0
    }
}

/// The constant `c_Y` making `δ(k) = c_Y Y^{-2} Σ_q Σ*_{a mod q} e_q(ak) h(q/Y, k/Y²)`
/// exact at `k = 0`: `c_Y = Y² / Σ_q φ(q) h(q/Y, 0)`.
pub fn c_y(y: f64) -> f64 {
    let mut total = 0.0;
    let mut q = 1u64;
    while (q as f64) < y {
        total += euler_phi(q) as f64 * h_zero(q as f64 / y);
        q += 1;
    }
    y * y / total
}

/// Sample of `max_y r·|h(r, y)|` over a grid of `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HSupRow {
    pub r: f64,
    pub scaled_sup: f64,
}

/// `r · sup_y |h(r, y)|` on a log grid of `r ∈ [r_min, r_max]`, scanning `y`
/// at resolution `r/200` over `|y| <= y_max`.
pub fn h_sup_profile(r_min: f64, r_max: f64, points: usize, y_max: f64) -> Result<Vec<HSupRow>> {
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let t = if points == 1 {
            0.0
        } else {
            k as f64 / (points - 1) as f64
        };
        let r = r_min * (r_max / r_min).powf(t);
        let kern = HKernel::new(r)?;
        let dy = r / 200.0;
        let steps = (y_max / dy).ceil() as usize;
        let sup = (0..=steps)
            .map(|i| kern.eval(i as f64 * dy).abs())
            .fold(0.0, f64::max);
        rows.push(HSupRow {
            r,
            scaled_sup: r * sup,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizing_constant() {
        assert!((c0() - 0.443_993_816_168_079_4).abs() < 1e-12);
        let mass = integrate(omega, 0.5, 1.0, 8, 1e-14, 0.0).unwrap().value;
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_eval(2.0, 0.0).unwrap(), 0.0);
        let expect = omega(0.75) / 0.75;
        assert!((h_eval(0.75, 0.0).unwrap() - expect).abs() < 1e-15);
        assert!((omega(0.75) - 4.0 / c0() * omega0(0.0)).abs() < 1e-15);
        assert!(h_eval(0.0, 1.0).is_err());
    }

    #[test]
    fn finite_window_matches_long_sum() {
        let naive = |x: f64, y: f64| -> f64 {
            (1..5000)
                .map(|j| {
                    let xj = x * j as f64;
                    (omega(xj) - omega(y.abs() / xj)) / xj
                })
                .sum()
        };
        for &(x, y) in &[(0.013, 0.02), (0.3, -0.4), (0.9, 2.5), (1.7, 3.0)] {
            assert!((h_eval(x, y).unwrap() - naive(x, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn c_y_tends_to_one() {
        // c_Y = 1 + O(Y^{-A}).
        let errs: Vec<f64> = [4.0, 16.0, 64.0]
            .iter()
            .map(|&y| (c_y(y) - 1.0).abs())
            .collect();
        assert!(errs[2] < 1e-3, "{errs:?}");
    }

    #[test]
    fn scaled_h_is_bounded() {
        let rows = h_sup_profile(1e-3, 1.0, 7, 3.0).unwrap();
        let sup = rows.iter().map(|r| r.scaled_sup).fold(0.0, f64::max);
        assert!(sup < 10.0, "{rows:?}");
    }
}
