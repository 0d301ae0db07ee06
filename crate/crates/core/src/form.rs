//! Diagonal cubic forms and dual tuples.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::{lcm, valuation};
use crate::dual;
use crate::error::{Error, Result};

/// `F(x) = Σ F_i x_i^3` with nonzero integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagonalCubicForm {
    coeffs: Vec<i64>,
}

impl DiagonalCubicForm {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition(
                "a form needs at least one variable".into(),
            ));
        }
        if coeffs.contains(&0) {
            return Err(Error::Precondition(
                "diagonal coefficients must be nonzero".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// `x_1^3 + … + x_m^3`.
    pub fn fermat(m: usize) -> Self {
        Self::new(vec![1; m]).expect("m >= 1")
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn m(&self) -> usize {
        self.coeffs.len()
    }

    /// `m* = m - 3`, the dimension of a smooth hyperplane section.
    pub fn m_star(&self) -> i32 {
        self.m() as i32 - 3
    }

    pub fn lcm(&self) -> i128 {
        self.coeffs.iter().fold(1, |acc, &f| lcm(acc, f as i128))
    }

    /// Whether `v_p(lcm F) <= 2` for every prime `p`.
    pub fn is_cube_free(&self) -> bool {
        let l = self.lcm() as i64;
        crate::arith::factor(l)
            .map(|f| f.factors.iter().all(|&(_, e)| e <= 2))
            .unwrap_or(false)
    }

    pub fn eval(&self, x: &[i64]) -> i128 {
        self.coeffs
            .iter()
            .zip(x)
            .map(|(&f, &xi)| f as i128 * (xi as i128).pow(3))
            .sum()
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(x)
            .map(|(&f, &xi)| f as f64 * xi * xi * xi)
            .sum()
    }

    /// `∇F(x) = (3 F_i x_i^2)_i`.
    pub fn gradient(&self, x: &[i64]) -> Vec<i64> {
        self.coeffs
            .iter()
            .zip(x)
            .map(|(&f, &xi)| 3 * f * xi * xi)
            .collect()
    }
}

impl fmt::Display for DiagonalCubicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Accepts `fermatM` (for example `fermat4`) or a comma-separated list of
/// coefficients such as `1,1,-2`.
impl FromStr for DiagonalCubicForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(m) = s.strip_prefix("fermat") {
            let m: usize = m
                .parse()
                .map_err(|_| Error::Precondition(format!("bad form name {s:?}")))?;
            if m == 0 {
                return Err(Error::Precondition("fermat0 has no variables".into()));
            }
            return Ok(Self::fermat(m));
        }
        let coeffs = parse_int_list(s)?;
        Self::new(coeffs)
    }
}

pub fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Precondition(format!("bad integer {t:?} in {s:?}")))
        })
        .collect()
}

/// An integer tuple `c` paired with a form, caching `F^∨(c)` and its
/// valuations.
#[derive(Debug, Clone)]
pub struct DualTuple {
    c: Vec<i64>,
    dual: OnceLock<BigRational>,
    valuations: OnceLock<BTreeMap<u64, Option<i64>>>,
}

impl DualTuple {
    pub fn new(form: &DiagonalCubicForm, c: Vec<i64>) -> Result<Self> {
        if c.len() != form.m() {
            return Err(Error::Precondition(format!(
                "tuple has length {}, form has {} variables",
                c.len(),
                form.m()
            )));
        }
        Ok(Self {
            c,
            dual: OnceLock::new(),
            valuations: OnceLock::new(),
        })
    }

    pub fn c(&self) -> &[i64] {
        &self.c
    }

    /// `v_p(gcd c)`; `None` for the zero tuple.
    pub fn v_p(&self, p: u64) -> Option<u32> {
        crate::arith::valuation_of_tuple(p, &self.c)
    }

    pub fn dual_value(&self, form: &DiagonalCubicForm) -> &BigRational {
        self.dual
            .get_or_init(|| dual::dual_form_value(form, &self.c, None).value)
    }

    /// `v_p(F^∨(c))` for the listed primes (`None` when `F^∨(c) = 0`).
    pub fn dual_valuations(
        &self,
        form: &DiagonalCubicForm,
        primes: &[u64],
    ) -> &BTreeMap<u64, Option<i64>> {
        self.valuations.get_or_init(|| {
            let v = self.dual_value(form);
            primes
                .iter()
                .map(|&p| (p, dual::rational_valuation(p, v)))
                .collect()
        })
    }
}

/// `v_p` of a nonzero `i128` or `None` for zero; re-exported for convenience.
pub fn v_p(p: u64, n: i128) -> Option<u32> {
    valuation(p, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("fermat4".parse::<DiagonalCubicForm>().unwrap().m(), 4);
        let f: DiagonalCubicForm = "1, 1, -2".parse().unwrap();
        assert_eq!(f.coeffs(), &[1, 1, -2]);
        assert_eq!(f.m_star(), 0);
        assert!("1,0".parse::<DiagonalCubicForm>().is_err());
    }

    #[test]
    fn cube_free_flag() {
        assert!(DiagonalCubicForm::new(vec![4, 9, 1])
            .unwrap()
            .is_cube_free());
        assert!(!DiagonalCubicForm::new(vec![8, 1]).unwrap().is_cube_free());
    }
}
