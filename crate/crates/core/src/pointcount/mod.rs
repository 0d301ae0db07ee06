//! Point counts of `V = {F = 0} ⊂ P^{m-1}` and of its hyperplane sections
//! `V_c = V ∩ {c·x = 0}` over finite fields.
//!
//! Projective points are enumerated once each by normalizing the first
//! nonzero coordinate to 1. The full hypersurface is counted through the
//! distribution of the values `F_i x^3`, which avoids enumerating `F_q^m`.

pub mod conic;
pub mod singular;

use serde::{Deserialize, Serialize};

use crate::arith::field::Elem;
use crate::arith::{ipow, FiniteField};
use crate::error::{check_budget, precondition, Result};
use crate::fit::TrendFit;
use crate::form::DiagonalCubicForm;

pub use conic::{
    conic_bundle_count, conic_bundle_count_brute, conic_splitting_type, ConicBundleInput,
    InstanceMode, SplittingType,
};
pub use singular::{singular_locus, SingularKind, SingularLocus, SingularPoint};

/// Cap on enumerated projective points per section count.
pub const SECTION_BUDGET: u128 = 400_000_000;

/// `#P^d(F_q)`, zero for negative `d`.
pub fn projective_count(q: u64, d: i32) -> i128 {
    if d < 0 {
        return 0;
    }
    (0..=d).map(|k| (q as i128).pow(k as u32)).sum()
}

/// `#V_c(F_q)` (or `#V(F_q)`) against `#P^{dim}(F_q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionCount {
    pub q: u64,
    pub raw: u64,
    /// `m* = m - 3` for sections, `m - 2` for the hypersurface.
    pub dimension: i32,
    pub projective_baseline: i128,
    #[serde(rename = "E")]
    pub e: i128,
    /// `E / q^{dimension/2}`.
    #[serde(rename = "E_tilde")]
    pub e_tilde: f64,
}

impl SectionCount {
    fn new(q: u64, raw: u64, dimension: i32) -> Self {
        let projective_baseline = projective_count(q, dimension);
        let e = raw as i128 - projective_baseline;
        Self {
            q,
            raw,
            dimension,
            projective_baseline,
            e,
            e_tilde: e as f64 / (q as f64).powf(dimension as f64 / 2.0),
        }
    }
}

/// Per-coordinate tables `x ↦ F_i x^3` over a field.
pub(crate) struct CubeTables {
    pub coeff_cubes: Vec<Vec<Elem>>,
}

impl CubeTables {
    pub fn new(f: &DiagonalCubicForm, field: &FiniteField) -> Self {
        let coeff_cubes = f
            .coeffs()
            .iter()
            .map(|&fi| {
                let a = field.from_int(fi);
                field
                    .elements()
                    .map(|x| field.mul(a, field.pow(x, 3)))
                    .collect()
            })
            .collect();
        Self { coeff_cubes }
    }
}

/// Number of `x ∈ F_q^m` with `F(x) = 0`.
pub fn affine_cone_count(f: &DiagonalCubicForm, field: &FiniteField) -> u128 {
    let q = field.size();
    let tables = CubeTables::new(f, field);
    let mut dp = vec![0u128; q];
    dp[0] = 1;
    for table in &tables.coeff_cubes {
        let mut hist = vec![0u128; q];
        for &v in table {
            hist[v as usize] += 1;
        }
        let values: Vec<(Elem, u128)> = hist
            .iter()
            .enumerate()
            .filter(|(_, &h)| h > 0)
            .map(|(v, &h)| (v as Elem, h))
            .collect();
        let mut next = vec![0u128; q];
        for (t, &count) in dp.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for &(v, h) in &values {
                next[field.add(t as Elem, v) as usize] += count * h;
            }
        }
        dp = next;
    }
    dp[0]
}

/// `#V(F_q)` for the projective hypersurface `F = 0`.
pub fn hypersurface_count(f: &DiagonalCubicForm, field: &FiniteField) -> u64 {
    ((affine_cone_count(f, field) - 1) / (field.size() as u128 - 1)) as u64
}

/// Visits every projective point of `V_c` over `field` (coordinates as field
/// codes). `c` must be nonzero modulo the characteristic.
pub(crate) fn for_each_section_point(
    f: &DiagonalCubicForm,
    c: &[i64],
    field: &FiniteField,
    tables: &CubeTables,
    mut visit: impl FnMut(&[Elem]),
) {
    let m = f.m();
    let q = field.size() as Elem;
    let cf: Vec<Elem> = c.iter().map(|&ci| field.from_int(ci)).collect();
    let k = cf.iter().position(|&x| x != 0).expect("c nonzero mod p");
    let neg_inv = field.neg(field.inv(cf[k]).unwrap());
    let others: Vec<usize> = (0..m).filter(|&i| i != k).collect();
    let mut x = vec![0 as Elem; m];
    for lead in 0..others.len() {
        for &i in &others {
            x[i] = 0;
        }
        x[others[lead]] = 1;
        let free = &others[lead + 1..];
        loop {
            let mut lin = 0;
            for &i in &others {
                lin = field.add(lin, field.mul(cf[i], x[i]));
            }
            x[k] = field.mul(neg_inv, lin);
            let mut val = 0;
            for i in 0..m {
                val = field.add(val, tables.coeff_cubes[i][x[i] as usize]);
            }
            if val == 0 {
                visit(&x);
            }
            // Advance the odometer over the free coordinates.
            let mut j = 0;
            loop {
                if j == free.len() {
                    break;
                }
                x[free[j]] += 1;
                if x[free[j]] < q {
                    break;
                }
                x[free[j]] = 0;
                j += 1;
            }
            if j == free.len() {
                break;
            }
        }
    }
}

fn section_points(m: usize, q: u64) -> u128 {
    projective_count(q, m as i32 - 2) as u128
}

/// `#V_c(F_q)`; the zero hyperplane (`c ≡ 0 mod p`) gives `#V(F_q)`.
pub fn section_raw_count(f: &DiagonalCubicForm, c: &[i64], field: &FiniteField) -> Result<u64> {
    if c.len() != f.m() {
        return precondition("c must have one entry per variable");
    }
    if c.iter().all(|&ci| field.from_int(ci) == 0) {
        return Ok(hypersurface_count(f, field));
    }
    check_budget(
        "section enumeration",
        section_points(f.m(), field.size() as u64),
        SECTION_BUDGET,
    )?;
    let tables = CubeTables::new(f, field);
    let mut count = 0u64;
    for_each_section_point(f, c, field, &tables, |_| count += 1);
    Ok(count)
}

/// `#V_c(F_q)` (with `c`) or `#V(F_q)` (without), with its deviation from
/// the matching projective space.
pub fn count_points(
    f: &DiagonalCubicForm,
    c: Option<&[i64]>,
    field: &FiniteField,
) -> Result<SectionCount> {
    let q = field.size() as u64;
    match c {
        Some(c) => Ok(SectionCount::new(
            q,
            section_raw_count(f, c, field)?,
            f.m_star(),
        )),
        None => Ok(SectionCount::new(
            q,
            hypersurface_count(f, field),
            f.m() as i32 - 2,
        )),
    }
}

/// [`count_points`] over `F_{p^r}`.
pub fn count_points_q(
    f: &DiagonalCubicForm,
    c: Option<&[i64]>,
    p: u64,
    r: u32,
) -> Result<SectionCount> {
    count_points(f, c, &FiniteField::new(p, r)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorGoodRow {
    pub r: u32,
    pub q: u64,
    #[serde(rename = "E")]
    pub e: i128,
    #[serde(rename = "E_tilde")]
    pub e_tilde: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorGoodReport {
    pub p: u64,
    pub rows: Vec<ErrorGoodRow>,
    /// Singular points found over `F_p` and `F_{p^2}`.
    pub singular_points: (usize, usize),
    /// Least-squares exponent of `|E_c(p^r)|` against `p^r`.
    pub growth_exponent: Option<f64>,
}

impl ErrorGoodReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Checks `|E_c(p^r)| <= 18 · 6^{m-1} · p^{r m*/2}` for `r = 1..=r_max` and
/// records the trajectory of `Ẽ_c(p^r)`. The section must have isolated
/// singularities, which is tested over `F_p` and `F_{p^2}`.
pub fn error_good_check(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    r_max: u32,
) -> Result<ErrorGoodReport> {
    let sing1 = singular_locus(f, c, p, 1)?.points.len();
    let sing2 = singular_locus(f, c, p, 2)?
        .points
        .iter()
        .filter(|pt| pt.degree == 2)
        .count();
    if sing2 as u64 > ipow(2, f.m() as u32) {
        return precondition("section singularities do not look isolated");
    }
    let m = f.m() as i32;
    let mut rows = Vec::new();
    for r in 1..=r_max {
        let sc = count_points_q(f, Some(c), p, r)?;
        let bound = 18.0 * 6f64.powi(m - 1) * (sc.q as f64).powf(f.m_star() as f64 / 2.0);
        rows.push(ErrorGoodRow {
            r,
            q: sc.q,
            e: sc.e,
            e_tilde: sc.e_tilde,
            bound,
            pass: (sc.e.abs() as f64) <= bound,
        });
    }
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.q as f64, r.e.abs() as f64))
        .collect();
    let growth_exponent = TrendFit::from_samples(&samples).map(|t| t.slope);
    Ok(ErrorGoodReport {
        p,
        rows,
        singular_points: (sing1, sing2),
        growth_exponent,
    })
}

/// Point counts of a smooth cubic threefold and the resulting number of
/// lines from the Galkin–Shinder relation
/// `N_1(F(X)) = [N_1(X)^2 − 2(1+q^3) N_1(X) + N_2(X)] / (2 q^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanoLineCount {
    pub q: u64,
    pub n1: i128,
    pub n2: i128,
    pub numerator: i128,
    /// The quotient when it is exact.
    pub lines: Option<i128>,
}

impl FanoLineCount {
    pub fn is_nonnegative_integer(&self) -> bool {
        self.lines.is_some_and(|l| l >= 0)
    }
}

pub fn galkin_shinder_lines(f: &DiagonalCubicForm, p: u64) -> Result<FanoLineCount> {
    if f.m() != 5 {
        return precondition("the line count applies to cubic threefolds (m = 5)");
    }
    if f.coeffs()
        .iter()
        .any(|&fi| (fi as i128 * 3) % p as i128 == 0)
    {
        return precondition("p must not divide 3 F_i");
    }
    let n1 = count_points_q(f, None, p, 1)?.raw as i128;
    let n2 = count_points_q(f, None, p, 2)?.raw as i128;
    let q = p as i128;
    let numerator = n1 * n1 - 2 * (1 + q.pow(3)) * n1 + n2;
    let den = 2 * q * q;
    Ok(FanoLineCount {
        q: p,
        n1,
        n2,
        numerator,
        lines: (numerator % den == 0).then_some(numerator / den),
    })
}
