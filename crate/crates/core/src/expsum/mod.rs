//! Complete exponential sums
//! `S_c(n) = Σ*_{a mod n} Σ_{x mod n} e_n(a F(x) + c·x)` and their structure.
//!
//! Three evaluators are available and agree exactly wherever they overlap:
//!
//! * [`Method::Brute`] sums directly modulo `n` (see [`kernel`] for the
//!   coordinate factorization that keeps this affordable);
//! * [`Method::Multiplicative`] factors `n` and multiplies prime-power values;
//! * [`Method::Structural`] evaluates prime powers through the partially
//!   singular point counts of [`bset`].

pub mod bset;
pub(crate) mod kernel;
pub mod report;

use serde::{Deserialize, Serialize};

use crate::arith::{factor, ipow, reduce, valuation_of_tuple};
use crate::error::{check_budget, precondition, Result};
use crate::form::DiagonalCubicForm;

pub use bset::{count_b_set, count_b_set_brute, exp_sum_structural};
pub use kernel::SNAP_TOLERANCE;
pub use report::{
    pointwise_bound, polar_fiber_valuations, vanishing_boundedness_report, PolarValuations,
    VanishingReport,
};

/// Default cap on coordinate-sum steps (`m · n · φ(n)`) per call.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;
/// Above this many steps a prime power is routed to the structural evaluator
/// when its hypotheses hold.
pub const STRUCTURAL_THRESHOLD: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Multiplicative,
    Structural,
}

#[derive(Debug, Clone, Copy)]
pub struct ExpSumOptions {
    pub method: Method,
    pub budget: u128,
    /// Skip the float path and evaluate with modular arithmetic only.
    pub force_exact: bool,
}

impl Default for ExpSumOptions {
    fn default() -> Self {
        Self {
            method: Method::Multiplicative,
            budget: DEFAULT_BUDGET,
            force_exact: false,
        }
    }
}

/// One evaluated `S_c(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSumRecord {
    pub modulus: u64,
    pub value: i128,
    /// `value / n^{(1+m)/2}`.
    pub normalized: f64,
    pub method: Method,
    /// Largest distance of a float accumulator from its snapped integer.
    pub residual: f64,
    /// Whether any factor was settled by modular arithmetic.
    pub exact_path: bool,
}

/// `n^{-(1+m)/2} · value`.
pub fn normalize(value: i128, n: u64, m: usize) -> f64 {
    value as f64 / (n as f64).powf((1.0 + m as f64) / 2.0)
}

fn coords(f: &DiagonalCubicForm, c: &[i64], n: u64) -> Vec<kernel::Coord> {
    f.coeffs()
        .iter()
        .zip(c)
        .map(|(&fi, &ci)| kernel::Coord {
            f: reduce(fi, n),
            c: reduce(ci, n),
        })
        .collect()
}

fn check_len(f: &DiagonalCubicForm, c: &[i64]) -> Result<()> {
    if c.len() != f.m() {
        return precondition(format!(
            "c has length {}, form has {} variables",
            c.len(),
            f.m()
        ));
    }
    Ok(())
}

/// `S_c(n)` with the default options.
pub fn exp_sum(f: &DiagonalCubicForm, c: &[i64], n: u64) -> Result<ExpSumRecord> {
    exp_sum_with(f, c, n, ExpSumOptions::default())
}

pub fn exp_sum_with(
    f: &DiagonalCubicForm,
    c: &[i64],
    n: u64,
    opts: ExpSumOptions,
) -> Result<ExpSumRecord> {
    check_len(f, c)?;
    if n == 0 {
        return precondition("modulus must be positive");
    }
    let (value, residual, exact_path) = match opts.method {
        Method::Brute => brute_value(f, c, n, opts)?,
        Method::Multiplicative | Method::Structural => {
            let mut value = 1i128;
            let mut residual = 0.0f64;
            let mut exact = false;
            for (p, e) in factor(n as i64)?.factors {
                let (v, r, x) = prime_power_value(f, c, p, e, opts)?;
                value = value.checked_mul(v).expect("S_c(n) fits in i128");
                residual = residual.max(r);
                exact |= x;
            }
            (value, residual, exact)
        }
    };
    Ok(ExpSumRecord {
        modulus: n,
        value,
        normalized: normalize(value, n, f.m()),
        method: opts.method,
        residual,
        exact_path,
    })
}

fn brute_value(
    f: &DiagonalCubicForm,
    c: &[i64],
    n: u64,
    opts: ExpSumOptions,
) -> Result<(i128, f64, bool)> {
    check_budget("exponential sum", kernel::cost(n, f.m()), opts.budget)?;
    let out = kernel::evaluate(n, &coords(f, c, n), kernel::Domain::Full, opts.force_exact)?;
    Ok((out.value, out.residual, out.exact_path))
}

fn structural_applicable(c: &[i64], p: u64, l: u32) -> Option<u32> {
    let v = valuation_of_tuple(p, c)?;
    let d = v + 1;
    (2 * d <= l).then_some(d)
}

fn prime_power_value(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    l: u32,
    opts: ExpSumOptions,
) -> Result<(i128, f64, bool)> {
    let n = ipow(p, l);
    let wants_structural =
        opts.method == Method::Structural || kernel::cost(n, f.m()) > STRUCTURAL_THRESHOLD;
    if wants_structural {
        if let Some(d) = structural_applicable(c, p, l) {
            let restricted = exp_sum_structural(f, c, p, l, d)?;
            let correction = reduction_difference(f, c, p, l, opts)?;
            return Ok((restricted + correction, 0.0, true));
        }
    }
    brute_value(f, c, n, opts)
}

/// `S'_c(p^l)`: the same sum with `x` restricted to `p ∤ x`.
pub fn exp_sum_prime_restricted(f: &DiagonalCubicForm, c: &[i64], p: u64, l: u32) -> Result<i128> {
    exp_sum_prime_restricted_with(f, c, p, l, ExpSumOptions::default())
}

pub fn exp_sum_prime_restricted_with(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    l: u32,
    opts: ExpSumOptions,
) -> Result<i128> {
    check_len(f, c)?;
    if !crate::arith::is_prime(p) {
        return Err(crate::Error::NotPrime(p));
    }
    let n = ipow(p, l);
    check_budget(
        "restricted exponential sum",
        2 * kernel::cost(n, f.m()),
        opts.budget,
    )?;
    let out = kernel::evaluate(
        n,
        &coords(f, c, n),
        kernel::Domain::Primitive { p },
        opts.force_exact,
    )?;
    Ok(out.value)
}

/// `S_c(p^l) − S'_c(p^l)`, the contribution of `x ≡ 0 mod p`:
///
/// * `l = 1`: `φ(p)`;
/// * `l = 2`: `1_{p | c} φ(p^2) p^m`;
/// * `l ≥ 3`: `1_{p^2 | c} [φ(p^l)/φ(p^{l-3})] p^{2m} S_{c/p^2}(p^{l-3})`.
pub fn reduction_difference(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    l: u32,
    opts: ExpSumOptions,
) -> Result<i128> {
    check_len(f, c)?;
    let m = f.m() as u32;
    let pi = p as i128;
    let phi = |k: u32| -> i128 {
        if k == 0 {
            1
        } else {
            (pi - 1) * pi.pow(k - 1)
        }
    };
    let divisible = |k: u32| c.iter().all(|&ci| (ci as i128) % pi.pow(k) == 0);
    Ok(match l {
        0 => 0,
        1 => phi(1),
        2 => {
            if divisible(1) {
                phi(2) * pi.pow(m)
            } else {
                0
            }
        }
        _ => {
            if !divisible(2) {
                0
            } else {
                let reduced: Vec<i64> = c.iter().map(|&ci| ci / (p * p) as i64).collect();
                let inner = if l == 3 {
                    1
                } else {
                    exp_sum_with(f, &reduced, ipow(p, l - 3), opts)?.value
                };
                phi(l) / phi(l - 3) * pi.pow(2 * m) * inner
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal oracle: enumerate `x mod n` with a histogram of phases `t`,
    /// then evaluate `Σ_t A(t) cos(2π t / n)`.
    pub(crate) fn oracle(f: &DiagonalCubicForm, c: &[i64], n: u64, primitive: Option<u64>) -> i128 {
        let m = f.m();
        let mut hist = vec![0i64; n as usize];
        let mut x = vec![0u64; m];
        loop {
            let skip = primitive.is_some_and(|p| x.iter().all(|&xi| xi % p == 0));
            if !skip {
                let fx: i128 = f
                    .coeffs()
                    .iter()
                    .zip(&x)
                    .map(|(&fi, &xi)| fi as i128 * (xi as i128).pow(3))
                    .sum();
                let cx: i128 = c
                    .iter()
                    .zip(&x)
                    .map(|(&ci, &xi)| ci as i128 * xi as i128)
                    .sum();
                for a in 1..=n {
                    if crate::arith::gcd_u64(a, n) != 1 {
                        continue;
                    }
                    let t = (a as i128 * fx + cx).rem_euclid(n as i128);
                    hist[t as usize] += 1;
                }
            }
            let mut i = 0;
            loop {
                if i == m {
                    let s: f64 = hist
                        .iter()
                        .enumerate()
                        .map(|(t, &h)| {
                            h as f64 * (std::f64::consts::TAU * t as f64 / n as f64).cos()
                        })
                        .sum();
                    return s.round() as i128;
                }
                x[i] += 1;
                if x[i] < n {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn single_cube_mod_three() {
        let f = DiagonalCubicForm::fermat(1);
        assert_eq!(exp_sum(&f, &[1], 3).unwrap().value, 3);
    }

    #[test]
    fn trivial_modulus() {
        let f = DiagonalCubicForm::new(vec![2, -3, 5]).unwrap();
        assert_eq!(exp_sum(&f, &[7, 1, 0], 1).unwrap().value, 1);
    }

    #[test]
    fn multiplicative_at_six() {
        let f = DiagonalCubicForm::fermat(4);
        let c = [1, 2, 3, 4];
        let brute = ExpSumOptions {
            method: Method::Brute,
            ..Default::default()
        };
        let s6 = exp_sum_with(&f, &c, 6, brute).unwrap().value;
        let s2 = exp_sum_with(&f, &c, 2, brute).unwrap().value;
        let s3 = exp_sum_with(&f, &c, 3, brute).unwrap().value;
        assert_eq!(s6, s2 * s3);
        assert_eq!(s6, oracle(&f, &c, 6, None));
    }

    #[test]
    fn kernel_matches_oracle() {
        let forms = [
            DiagonalCubicForm::fermat(3),
            DiagonalCubicForm::new(vec![1, 2, -3]).unwrap(),
        ];
        for f in &forms {
            for n in [2u64, 4, 5, 7, 8, 9, 12] {
                for c in [[0, 0, 0], [1, 0, 2], [3, 3, 1], [1, -1, 5]] {
                    let want = oracle(f, &c, n, None);
                    let brute = ExpSumOptions {
                        method: Method::Brute,
                        ..Default::default()
                    };
                    assert_eq!(
                        exp_sum_with(f, &c, n, brute).unwrap().value,
                        want,
                        "{f} {c:?} {n}"
                    );
                    let exact = ExpSumOptions {
                        force_exact: true,
                        ..brute
                    };
                    assert_eq!(exp_sum_with(f, &c, n, exact).unwrap().value, want);
                }
            }
        }
    }

    #[test]
    fn restricted_matches_oracle() {
        let f = DiagonalCubicForm::fermat(3);
        for (p, l) in [(2u64, 2u32), (2, 3), (3, 2), (5, 1), (5, 2)] {
            for c in [[0, 0, 0], [1, 0, 2], [5, 10, 15], [4, 8, 12]] {
                let n = ipow(p, l);
                let want = oracle(&f, &c, n, Some(p));
                assert_eq!(exp_sum_prime_restricted(&f, &c, p, l).unwrap(), want);
            }
        }
    }

    #[test]
    fn zero_tuple_difference_at_four() {
        let f = DiagonalCubicForm::fermat(4);
        let c = [0; 4];
        let full = exp_sum(&f, &c, 4).unwrap().value;
        let restricted = exp_sum_prime_restricted(&f, &c, 2, 2).unwrap();
        assert_eq!(full - restricted, 32);
    }
}
