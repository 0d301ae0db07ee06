//! Vanishing and boundedness checks, polar-fiber valuations and the
//! pointwise gcd bound.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factor, ipow, valuation};
use crate::dual::{dual_form_value, full_sign_polynomial, rational_valuation, sign_product};
use crate::error::{precondition, Error, Result};
use crate::expsum::{exp_sum_with, normalize, ExpSumOptions};
use crate::form::DiagonalCubicForm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub l: u32,
    pub value: i128,
    pub normalized: f64,
    /// Whether the vanishing criterion applies at this level.
    pub must_vanish: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub p: u64,
    /// `v_p(F^∨(c))`, `None` when `F^∨(c) = 0`.
    pub dual_valuation: Option<i64>,
    /// `2 + v_p(F^∨(c))`: the sums vanish from this level on.
    pub threshold: Option<u32>,
    pub levels: Vec<LevelCheck>,
    /// `|S̃_c(p)|, |S̃_c(p^2)| <= 2^{m-1}`, checked when `v_p(F^∨(c)) <= 1`.
    pub bounded: Option<bool>,
    /// The budget ran out before the threshold was reached.
    pub inconclusive: bool,
}

impl VanishingReport {
    pub fn pass(&self) -> bool {
        self.levels.iter().all(|l| l.pass) && self.bounded.unwrap_or(true)
    }
}

/// Evaluates `S_c(p^l)` for `l = 1..=l_max` and checks the vanishing
/// threshold `l >= 2 + v_p(F^∨(c))` and the `2^{m-1}` bound on the first two
/// levels. Requires `lcm(F)` to be cube-free.
pub fn vanishing_boundedness_report(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    l_max: u32,
    opts: ExpSumOptions,
) -> Result<VanishingReport> {
    if !f.is_cube_free() {
        return precondition("lcm(F) must be cube-free");
    }
    let dual = dual_form_value(f, c, None).value;
    let dual_valuation = rational_valuation(p, &dual);
    let threshold = dual_valuation.map(|v| (2 + v.max(0)) as u32);
    let bound = 2f64.powi(f.m() as i32 - 1);
    let mut levels = Vec::new();
    let mut inconclusive = false;
    for l in 1..=l_max {
        let record = match exp_sum_with(f, c, ipow(p, l), opts) {
            Ok(r) => r,
            Err(Error::Budget { .. }) => {
                inconclusive = threshold.is_none_or(|t| l <= t);
                break;
            }
            Err(e) => return Err(e),
        };
        let must_vanish = threshold.is_some_and(|t| l >= t);
        levels.push(LevelCheck {
            l,
            value: record.value,
            normalized: record.normalized,
            must_vanish,
            pass: !must_vanish || record.value == 0,
        });
    }
    let bounded = match dual_valuation {
        Some(v) if v <= 1 => Some(
            levels
                .iter()
                .filter(|lc| lc.l <= 2)
                .all(|lc| lc.normalized.abs() <= bound + 1e-9),
        ),
        _ => None,
    };
    Ok(VanishingReport {
        p,
        dual_valuation,
        threshold,
        levels,
        bounded,
        inconclusive,
    })
}

/// Valuations `v_p(F(z))` over the points `z` with `∇F(z) = λ c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarValuations {
    /// One entry per sign pattern in `{1} × {±1}^{k-1}` over the `k` indices with
    /// `c_i ≠ 0`; `None` marks an exactly cancelling pattern (`+∞`).
    pub exact: Vec<Option<Ratio<i64>>>,
    /// `2^{-(k-1)} v_p(∏_ε Σ ε_i s_i) − v_p(27)/2`, the pattern average;
    /// `None` when some pattern cancels.
    pub averaged: Option<Ratio<i64>>,
}

impl PolarValuations {
    /// Smallest finite exact valuation.
    pub fn min_exact(&self) -> Option<Ratio<i64>> {
        self.exact.iter().flatten().min().copied()
    }
}

/// Root valuations of `Σ g_j y^j` from its Newton polygon, low to high;
/// `None` for zero roots.
fn newton_polygon_roots(p: u64, coeffs: &[BigRational]) -> Vec<Option<Ratio<i64>>> {
    let points: Vec<(i64, i64)> = coeffs
        .iter()
        .enumerate()
        .filter_map(|(j, g)| rational_valuation(p, g).map(|v| (j as i64, v)))
        .collect();
    let mut roots = Vec::new();
    let Some(&(j0, _)) = points.first() else {
        return roots;
    };
    roots.extend(std::iter::repeat_n(None, j0 as usize));
    // Lower convex hull by a monotone chain.
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let slope = Ratio::new(b.1 - a.1, b.0 - a.0);
        roots.extend(std::iter::repeat_n(Some(-slope), (b.0 - a.0) as usize));
    }
    roots
}

pub fn polar_fiber_valuations(f: &DiagonalCubicForm, c: &[i64], p: u64) -> Result<PolarValuations> {
    if c.len() != f.m() {
        return precondition("c must have one entry per variable");
    }
    let r: Vec<BigRational> = f
        .coeffs()
        .iter()
        .zip(c)
        .filter(|(_, &ci)| ci != 0)
        .map(|(&fi, &ci)| {
            let ci = BigInt::from(ci);
            BigRational::new(&ci * &ci * &ci, BigInt::from(fi))
        })
        .collect();
    if r.is_empty() {
        return precondition("c must be nonzero");
    }
    let shift = if p == 3 {
        Ratio::new(3, 2)
    } else {
        Ratio::from_integer(0)
    };
    let k = r.len() as u32;
    let g = full_sign_polynomial(&r).expect("exact arithmetic");
    // Roots come in pairs ±σ_ε; keep one of each.
    let roots = newton_polygon_roots(p, &g);
    let mut exact: Vec<Option<Ratio<i64>>> = roots
        .chunks(2)
        .map(|pair| pair[0].map(|v| v - shift))
        .collect();
    exact.sort_by(|a, b| match (a, b) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, _) => std::cmp::Ordering::Greater,
        (_, None) => std::cmp::Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    });
    let averaged = if k == 1 {
        rational_valuation(p, &r[0]).map(|v| Ratio::new(v, 2) - shift)
    } else {
        let prod = sign_product(&r).expect("exact arithmetic");
        (!prod.is_zero())
            .then(|| Ratio::new(rational_valuation(p, &prod.abs()).unwrap(), 1 << (k - 1)) - shift)
    };
    Ok(PolarValuations { exact, averaged })
}

/// `C^{ω(n)} ∏_j gcd(cub(n)^{1/6}, gcd(cub(n), sq(c_j))^{1/4})`, with the gcd of
/// rational powers taken prime by prime as the minimum exponent. The sum
/// satisfies `n^{-1/2} |S̃_c(n)| <= ` this, for a suitable constant `C`.
pub fn pointwise_bound(c: &[i64], n: u64, constant: f64) -> Result<f64> {
    if n == 0 {
        return precondition("modulus must be positive");
    }
    let fac = factor(n as i64)?;
    let mut log_bound = fac.omega() as f64 * constant.ln();
    for &(p, e) in &fac.factors {
        if e < 3 {
            continue;
        }
        for &cj in c {
            // v_p(sq(c_j)); sq(0) behaves as divisible by everything.
            let vs = match valuation(p, cj as i128) {
                None => e,
                Some(v) if v >= 2 => v.min(e),
                Some(_) => 0,
            };
            let exponent = (e as f64 / 6.0).min(vs as f64 / 4.0);
            log_bound += exponent * (p as f64).ln();
        }
    }
    Ok(log_bound.exp())
}

/// `(n^{-1/2} |S̃_c(n)|, bound)`.
pub fn pointwise_check(
    f: &DiagonalCubicForm,
    c: &[i64],
    n: u64,
    constant: f64,
    opts: ExpSumOptions,
) -> Result<(f64, f64)> {
    let s = exp_sum_with(f, c, n, opts)?;
    let lhs = normalize(s.value, n, f.m()).abs() / (n as f64).sqrt();
    Ok((lhs, pointwise_bound(c, n, constant)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_example() {
        let f = DiagonalCubicForm::fermat(4);
        let pv = polar_fiber_valuations(&f, &[2, 1, 1, 1], 7).unwrap();
        assert_eq!(pv.averaged, Some(Ratio::new(3, 8)));
        let total: Ratio<i64> = pv.exact.iter().map(|v| v.unwrap()).sum();
        assert_eq!(total, Ratio::from_integer(3));
        assert_eq!(pv.exact.len(), 8);
        assert!(pv.min_exact().unwrap() <= pv.averaged.unwrap());
    }

    #[test]
    fn polar_cancellation() {
        let f = DiagonalCubicForm::fermat(2);
        let pv = polar_fiber_valuations(&f, &[1, 1], 5).unwrap();
        assert!(pv.exact.contains(&None));
        assert_eq!(pv.averaged, None);
    }

    #[test]
    fn pointwise_examples() {
        assert!((pointwise_bound(&[1, 2, 3, 4], 30, 2.0).unwrap() - 8.0).abs() < 1e-9);
        assert!((pointwise_bound(&[1, 1, 1, 1], 125, 16.0).unwrap() - 16.0).abs() < 1e-9);
        let b = pointwise_bound(&[4, 1, 1, 1], 8, 1.0).unwrap();
        assert!((b - 2f64.sqrt()).abs() < 1e-12);
    }
}
