//! The dual form `F^∨(c) = 3 (∏ F_i)^{2^{m-2}} ∏_ε (Σ ε_i c_i^{3/2} / F_i^{1/2})`,
//! the product running over sign patterns `ε ∈ {1} × {±1}^{m-1}`.
//!
//! Writing `s_i` for a square root of `R_i = c_i^3 / F_i`, the product over
//! signs is computed without surds: set `G(z) = z^2 - R_m`, and for each
//! earlier index `j` split `G(z + s_j) = A(z) + s_j B(z)` and replace `G` by
//! `A^2 - R_j B^2`. Every intermediate polynomial is even, so evaluating the
//! final one at `z = s_1` only involves `R_1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::DiagonalCubicForm;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignProductResult {
    #[serde(with = "rational_string")]
    pub value: BigRational,
    /// Number of linear factors in the sign product, `2^{k-1}` for `k` active indices.
    pub factor_count: u64,
    pub vanished: bool,
}

impl SignProductResult {
    /// The value as an integer, when it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.value.is_integer().then(|| self.value.to_integer())
    }
}

/// Polynomial in `z` (low degree first) with coefficients in `T`, shifted by a
/// square root `s` with `s^2 = r`: returns `(A, B)` with `G(z + s) = A(z) + s B(z)`.
fn shift_by_root<T>(g: &[T], r: &T) -> Option<(Vec<T>, Vec<T>)>
where
    T: Clone + Zero + CheckedAdd + CheckedMul,
{
    let n = g.len();
    let mut a: Vec<T> = vec![T::zero(); n];
    let mut b: Vec<T> = vec![T::zero(); n];
    // Horner: H <- H * (z + s) + g_k, with H = a + s b coefficientwise.
    for coef in g.iter().rev() {
        let mut na = vec![T::zero(); n];
        let mut nb = vec![T::zero(); n];
        for k in 0..n {
            if k + 1 < n {
                na[k + 1] = na[k + 1].checked_add(&a[k])?;
                nb[k + 1] = nb[k + 1].checked_add(&b[k])?;
            }
            // (a + s b) s = b r + s a
            na[k] = na[k].checked_add(&b[k].checked_mul(r)?)?;
            nb[k] = nb[k].checked_add(&a[k])?;
        }
        na[0] = na[0].checked_add(coef)?;
        a = na;
        b = nb;
    }
    Some((a, b))
}

fn poly_mul<T>(x: &[T], y: &[T]) -> Option<Vec<T>>
where
    T: Clone + Zero + CheckedAdd + CheckedMul,
{
    let mut out = vec![T::zero(); x.len() + y.len() - 1];
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            out[i + j] = out[i + j].checked_add(&xi.checked_mul(yj)?)?;
        }
    }
    Some(out)
}

fn trim<T: Zero>(mut g: Vec<T>) -> Vec<T> {
    while g.len() > 1 && g.last().is_some_and(|c| c.is_zero()) {
        g.pop();
    }
    g
}

/// `∏_{ε ∈ {±1}^k} (z + Σ ε_i s_i)` as a polynomial in `z`, with `s_i^2 = r_i`.
pub fn full_sign_polynomial<T>(r: &[T]) -> Option<Vec<T>>
where
    T: Clone + Zero + One + CheckedAdd + CheckedSub + CheckedMul,
{
    let mut g: Vec<T> = vec![T::zero(), T::one()];
    for ri in r.iter().rev() {
        let (a, b) = shift_by_root(&g, ri)?;
        let a2 = poly_mul(&a, &a)?;
        let b2 = poly_mul(&b, &b)?;
        let g_new: Option<Vec<T>> = a2
            .iter()
            .zip(b2.iter())
            .map(|(x, y)| x.checked_sub(&y.checked_mul(ri)?))
            .collect();
        g = trim(g_new?);
    }
    Some(g)
}

/// `∏_{ε ∈ {1}×{±1}^{k-1}} (Σ ε_i s_i)` with `s_i^2 = r_i`, for `k >= 2`.
pub fn sign_product<T>(r: &[T]) -> Option<T>
where
    T: Clone + Zero + One + CheckedAdd + CheckedSub + CheckedMul,
{
    assert!(r.len() >= 2, "sign product needs at least two entries");
    let (first, rest) = r.split_first().unwrap();
    // ∏ over signs of the remaining indices of (z + Σ ε_i s_i).
    let g = full_sign_polynomial(rest)?;
    // g is even in z; evaluate at z = s_1 through z^2 = r_1.
    let mut acc = T::zero();
    for (k, coef) in g.iter().enumerate().rev() {
        if k % 2 == 1 {
            debug_assert!(coef.is_zero());
            continue;
        }
        acc = acc.checked_mul(first)?.checked_add(coef)?;
    }
    Some(acc)
}

fn active_indices(form: &DiagonalCubicForm, c: &[i64], face: Option<&[usize]>) -> Vec<usize> {
    match face {
        Some(u) => u.to_vec(),
        None => (0..form.m()).collect::<Vec<_>>(),
    }
    .into_iter()
    .filter(|&i| i < c.len())
    .collect()
}

/// Exact `F^∨(c)`, or the face restriction `F_U^∨` when `face` is given.
///
/// On a face, coordinates outside `U` must vanish. For `|U| = 1` the value is
/// `c_i` (scaled by 3, matching the `|U| >= 2` normalization at `k = 2`).
pub fn dual_form_value(
    form: &DiagonalCubicForm,
    c: &[i64],
    face: Option<&[usize]>,
) -> SignProductResult {
    assert_eq!(c.len(), form.m(), "tuple length must match the form");
    if let Some(u) = face {
        for (j, &cj) in c.iter().enumerate() {
            assert!(u.contains(&j) || cj == 0, "c_j must vanish off the face");
        }
    }
    let idx = active_indices(form, c, face);
    let k = idx.len();
    if k == 0 {
        return SignProductResult {
            value: BigRational::zero(),
            factor_count: 0,
            vanished: true,
        };
    }
    if k == 1 {
        let v = BigRational::from_integer(BigInt::from(3 * c[idx[0]]));
        return SignProductResult {
            vanished: v.is_zero(),
            value: v,
            factor_count: 1,
        };
    }
    let r: Vec<BigRational> = idx
        .iter()
        .map(|&i| {
            let ci = BigInt::from(c[i]);
            BigRational::new(&ci * &ci * &ci, BigInt::from(form.coeffs()[i]))
        })
        .collect();
    let prod = sign_product(&r).expect("exact arithmetic cannot overflow");
    let d: BigInt = idx
        .iter()
        .map(|&i| BigInt::from(form.coeffs()[i]))
        .product();
    let scale = num_traits::pow(d, 1usize << (k - 2)) * BigInt::from(3);
    let value = prod * BigRational::from_integer(scale);
    SignProductResult {
        vanished: value.is_zero(),
        value,
        factor_count: 1u64 << (k - 1),
    }
}

/// Fast `F^∨(c)` in `i128`, or `None` on overflow or a non-integral value.
pub fn dual_form_i128(form: &DiagonalCubicForm, c: &[i64]) -> Option<i128> {
    let m = form.m();
    if m < 2 {
        return Some(3 * *c.first()? as i128);
    }
    let l = form.lcm();
    let r: Option<Vec<i128>> = form
        .coeffs()
        .iter()
        .zip(c)
        .map(|(&f, &ci)| {
            let ci = ci as i128;
            ci.checked_mul(ci)?
                .checked_mul(ci)?
                .checked_mul(l.checked_mul(l)? / f as i128)
        })
        .collect();
    let prod = sign_product(&r?)?;
    let d: i128 = form.coeffs().iter().map(|&f| f as i128).product();
    let num = d
        .checked_pow(1 << (m - 2))?
        .checked_mul(3)?
        .checked_mul(prod)?;
    let den = l.checked_pow(1 << (m - 1))?;
    (num % den == 0).then(|| num / den)
}

/// `v_p` of a nonzero rational (may be negative), `None` for zero.
pub fn rational_valuation(p: u64, x: &BigRational) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let v = |n: &BigInt| {
        let mut n = n.abs();
        let mut e = 0i64;
        loop {
            let (q, rem) = n.div_rem(&p);
            if !rem.is_zero() {
                break e;
            }
            n = q;
            e += 1;
        }
    };
    Some(v(x.numer()) - v(x.denom()))
}

/// Whether `F(x)` divides `F^∨(∇F(x))`.
pub fn dual_divisibility_check(form: &DiagonalCubicForm, x: &[i64]) -> Result<bool> {
    let fx = form.eval(x);
    if fx == 0 {
        return Err(Error::Precondition("F(x) must be nonzero".into()));
    }
    let grad = form.gradient(x);
    let value = dual_form_value(form, &grad, None).value;
    if !value.is_integer() {
        return Ok(false);
    }
    Ok((value.to_integer() % BigInt::from(fx)).is_zero())
}

/// Convenience: `F^∨(c)` as `f64` (for reporting).
pub fn dual_form_f64(form: &DiagonalCubicForm, c: &[i64]) -> f64 {
    dual_form_value(form, c, None)
        .value
        .to_f64()
        .unwrap_or(f64::NAN)
}

mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
