//! `#S_l(f) = #{x mod p^l : p^l | f(x)}` by enumeration and by lifting, and
//! root counts of multivariate polynomials modulo `q`.

use serde::{Deserialize, Serialize};

use crate::arith::is_prime;
use crate::dual::dual_form_i128;
use crate::error::{check_budget, precondition, Error, Result};
use crate::fit::TrendFit;
use crate::form::DiagonalCubicForm;

/// Work limit for enumerations, in evaluations.
pub const ROOT_BUDGET: u128 = 200_000_000;

/// Integer polynomial, coefficients from the constant term up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntPoly(pub Vec<i64>);

impl IntPoly {
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|&c| c != 0)
    }

    /// `f(x) mod n` in `[0, n)`.
    pub fn eval_mod(&self, x: u64, n: u64) -> u64 {
        let n = n as i128;
        let x = x as i128 % n;
        let mut acc = 0i128;
        for &c in self.0.iter().rev() {
            acc = (acc * x + c as i128).rem_euclid(n);
        }
        acc as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootMethod {
    Brute,
    Hensel,
}

pub fn univariate_root_count(f: &IntPoly, p: u64, l: u32, method: RootMethod) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if f.degree().is_none_or(|d| d == 0) {
        return precondition("f must have degree at least 1");
    }
    let q = (p as u128).checked_pow(l).filter(|&q| q <= 1 << 62);
    let Some(q) = q else {
        return precondition("p^l too large");
    };
    let q = q as u64;
    match method {
        RootMethod::Brute => {
            check_budget("brute root count", q as u128, ROOT_BUDGET)?;
            Ok((0..q).filter(|&x| f.eval_mod(x, q) == 0).count() as u64)
        }
        RootMethod::Hensel => {
            let coeffs: Vec<i128> =
                f.0.iter()
                    .map(|&c| (c as i128).rem_euclid(q as i128))
                    .collect();
            Ok(lift_count(&coeffs, p as i128, l))
        }
    }
}

fn vp(x: i128, p: i128, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut x = x;
    let mut v = 0;
    while v < cap && x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn eval_i128(g: &[i128], x: i128, n: i128) -> i128 {
    g.iter()
        .rev()
        .fold(0, |acc, &c| (acc * x + c).rem_euclid(n))
}

/// Coefficients of `g(z) = f(x_0 + p z)` modulo `n`.
fn shift(f: &[i128], x0: i128, p: i128, n: i128) -> Vec<i128> {
    // Horner in the polynomial ring: g = (((a_d)(x_0 + p z) + a_{d−1})(x_0 + p z) + …).
    let mut g: Vec<i128> = vec![0; f.len()];
    for &a in f.iter().rev() {
        let mut next = vec![0i128; f.len()];
        for (k, &gk) in g.iter().enumerate() {
            if gk == 0 {
                continue;
            }
            next[k] = (next[k] + gk * x0).rem_euclid(n);
            if k + 1 < next.len() {
                next[k + 1] = (next[k + 1] + gk * p).rem_euclid(n);
            }
        }
        next[0] = (next[0] + a).rem_euclid(n);
        g = next;
    }
    g
}

/// `#{x mod p^l : p^l | f(x)}`, `f` given modulo `p^l`.
///
/// A simple root mod `p` lifts uniquely. At any other root `x_0`, write
/// `f(x_0 + p z) = p^c h(z)` with `h` not divisible by `p`; the `z mod p^{l−1}`
/// that work are those with `p^{l−c} | h(z)`, each class mod `p^{l−c}` giving
/// `p^{c−1}` of them.
fn lift_count(f: &[i128], p: i128, l: u32) -> u64 {
    if l == 0 {
        return 1;
    }
    let n = p.pow(l);
    if f.iter().all(|&c| c.rem_euclid(n) == 0) {
        return n as u64;
    }
    let df: Vec<i128> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as i128)
        .collect();
    let mut total = 0u64;
    for x0 in 0..p {
        if eval_i128(f, x0, p) != 0 {
            continue;
        }
        if eval_i128(&df, x0, p) != 0 {
            total += 1;
            continue;
        }
        let g = shift(f, x0, p, n);
        let c = g.iter().map(|&a| vp(a, p, l)).min().unwrap_or(l);
        if c >= l {
            total += (n / p) as u64;
            continue;
        }
        let pc = p.pow(c);
        let h: Vec<i128> = g.iter().map(|&a| a / pc).collect();
        total += p.pow(c - 1) as u64 * lift_count(&h, p, l - c);
    }
    total
}

/// One `(p, l)` entry of the zero-density corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroDensityRow {
    pub p: u64,
    pub l: u32,
    pub brute: Option<u64>,
    pub hensel: u64,
    /// `#S_l / p^{l(1 − 12^{-(d−1)})}`.
    pub ratio: f64,
    /// `#S_{l+1} <= p · #S_l`, checked against the next level when present.
    pub fan_out_ok: bool,
}

/// Brute/lifting agreement, the fan-out bound, and the ratio to
/// `p^{l(1 − 12^{-(d−1)})}` for `l = 1..=l_max`.
pub fn zero_density_check(
    f: &IntPoly,
    p: u64,
    l_max: u32,
    brute_limit: u64,
) -> Result<Vec<ZeroDensityRow>> {
    let d = f.degree().unwrap_or(0) as i32;
    let eps = 12f64.powi(-(d - 1));
    let mut rows: Vec<ZeroDensityRow> = Vec::new();
    for l in 1..=l_max {
        let hensel = univariate_root_count(f, p, l, RootMethod::Hensel)?;
        let q = (p as u128).pow(l);
        let brute = if q <= brute_limit as u128 {
            Some(univariate_root_count(f, p, l, RootMethod::Brute)?)
        } else {
            None
        };
        if let Some(prev) = rows.last_mut() {
            prev.fan_out_ok = hensel <= p * prev.hensel;
        }
        rows.push(ZeroDensityRow {
            p,
            l,
            brute,
            hensel,
            ratio: hensel as f64 / (p as f64).powf(l as f64 * (1.0 - eps)),
            fan_out_ok: true,
        });
    }
    Ok(rows)
}

/// Multivariate integer polynomial: `(coefficient, exponents)` terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiPoly {
    pub vars: usize,
    pub terms: Vec<(i64, Vec<u32>)>,
}

impl MultiPoly {
    pub fn eval_mod(&self, x: &[u64], q: u64) -> u64 {
        let q128 = q as i128;
        let mut acc = 0i128;
        for (c, e) in &self.terms {
            let mut t = (*c as i128).rem_euclid(q128);
            for (&xi, &ei) in x.iter().zip(e) {
                t = t * ipow_mod(xi, ei, q) as i128 % q128;
            }
            acc = (acc + t) % q128;
        }
        acc as u64
    }
}

fn ipow_mod(x: u64, e: u32, q: u64) -> u64 {
    crate::arith::pow_mod(x % q, e as u64, q)
}

fn count_zeros(vars: usize, q: u64, zero: impl Fn(&[u64]) -> bool) -> Result<u64> {
    check_budget(
        "multivariate root count",
        (q as u128).pow(vars as u32),
        ROOT_BUDGET,
    )?;
    let total = (q as u128).pow(vars as u32) as u64;
    let mut x = vec![0u64; vars];
    let mut count = 0;
    for mut idx in 0..total {
        for xi in x.iter_mut() {
            *xi = idx % q;
            idx /= q;
        }
        if zero(&x) {
            count += 1;
        }
    }
    Ok(count)
}

/// `#{c mod q : P(c) ≡ 0}`.
pub fn multivariate_root_count(poly: &MultiPoly, q: u64) -> Result<u64> {
    if poly.terms.iter().all(|(c, _)| *c == 0) {
        return precondition("P must be nonzero");
    }
    if q == 0 {
        return precondition("q must be positive");
    }
    count_zeros(poly.vars, q, |x| poly.eval_mod(x, q) == 0)
}

/// `#{c mod q : F^∨(c) ≡ 0}`.
pub fn dual_root_count(form: &DiagonalCubicForm, q: u64) -> Result<u64> {
    let fail = std::cell::Cell::new(false);
    let count = count_zeros(form.m(), q, |x| {
        let c: Vec<i64> = x.iter().map(|&v| v as i64).collect();
        match dual_form_i128(form, &c) {
            Some(v) => v.rem_euclid(q as i128) == 0,
            None => {
                fail.set(true);
                false
            }
        }
    })?;
    if fail.get() {
        return precondition("F^∨ overflowed i128");
    }
    Ok(count)
}

/// Fit of `#{c mod p : P(c) ≡ 0}` against prime `p`.
pub fn root_count_trend(
    counts: impl Fn(u64) -> Result<u64>,
    primes: &[u64],
    vars: usize,
) -> Result<TrendFit> {
    let mut samples = Vec::new();
    for &p in primes {
        samples.push((p as f64, counts(p)? as f64));
    }
    TrendFit::from_samples(&samples)
        .map(|t| t.with_window(f64::NEG_INFINITY, vars as f64 - 1e-9))
        .ok_or_else(|| Error::Precondition("degenerate root-count samples".into()))
}
