//! Partially singular point counts
//! `B_{a,b}(l; d) = {x mod p^l : p ∤ x, c ∼_{p^d} ∇F(x), p^a | F(x), p^b | c·x}`
//! where `c ∼_{p^d} y` means `λ y + c ≡ 0 mod p^d` for some unit `λ`, and the
//! restricted sum they compute.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{gcd_u64, ipow, is_prime, mul_mod, reduce, valuation_of_tuple};
use crate::error::{check_budget, precondition, Error, Result};
use crate::form::DiagonalCubicForm;

/// Cap on enumerated half-tuples per unit `λ`.
const HALF_BUDGET: u128 = 50_000_000;

fn validate(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    l: u32,
    d: u32,
    a_exp: u32,
    b_exp: u32,
) -> Result<u32> {
    if c.len() != f.m() {
        return precondition("c must have one entry per variable");
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let Some(v) = valuation_of_tuple(p, c) else {
        return precondition("c = 0 admits no d >= 1 + v_p(c)");
    };
    if d < v + 1 {
        return precondition(format!("need d >= 1 + v_p(c) = {}", v + 1));
    }
    let need = [
        d,
        a_exp.saturating_sub(d),
        a_exp.saturating_sub(v),
        b_exp.saturating_sub(v),
    ]
    .into_iter()
    .max()
    .unwrap();
    if l < need {
        return precondition(format!("need l >= {need} for B to be well defined mod p^l"));
    }
    Ok(v)
}

/// `|B_{a,b}(l; d)|` by a meet-in-the-middle count over the two halves of the
/// coordinates, for each unit `λ mod p^d`.
///
/// With `d >= 1 + v_p(c)` each admissible `x` is matched by exactly `p^{v_p(c)}`
/// units, which the total is divided by.
pub fn count_b_set(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    l: u32,
    d: u32,
    a_exp: u32,
    b_exp: u32,
) -> Result<u128> {
    let v = validate(f, c, p, l, d, a_exp, b_exp)?;
    let m = f.m();
    let pl = ipow(p, l);
    let pd = ipow(p, d);
    let pa = ipow(p, a_exp.max(1));
    let pb = ipow(p, b_exp.max(1));
    let units: Vec<u64> = (1..pd.max(2)).filter(|&u| gcd_u64(u, pd) == 1).collect();
    let h = m / 2;
    let mut total: u128 = 0;
    for &lam in &units {
        let lists: Vec<Vec<u64>> = (0..m)
            .map(|i| {
                let g = reduce(3 * f.coeffs()[i], pd);
                let ci = reduce(c[i], pd);
                (0..pl)
                    .filter(|&x| {
                        (mul_mod(mul_mod(lam, g, pd), mul_mod(x, x, pd), pd) + ci) % pd == 0
                    })
                    .collect()
            })
            .collect();
        if lists.iter().any(|l| l.is_empty()) {
            continue;
        }
        let half_size =
            |r: std::ops::Range<usize>| lists[r].iter().map(|l| l.len() as u128).product::<u128>();
        check_budget(
            "B-set half enumeration",
            half_size(0..h).max(half_size(h..m)),
            HALF_BUDGET,
        )?;
        let key = |idx: &[usize], base: usize| -> (u64, u64, bool) {
            let mut fx = 0u64;
            let mut cx = 0u64;
            let mut prim = false;
            for (k, &j) in idx.iter().enumerate() {
                let i = base + k;
                let x = lists[i][j];
                let x3 = mul_mod(mul_mod(x, x, pa), x % pa, pa);
                fx = (fx + mul_mod(reduce(f.coeffs()[i], pa), x3, pa)) % pa;
                cx = (cx + mul_mod(reduce(c[i], pb), x % pb, pb)) % pb;
                prim |= x % p != 0;
            }
            (fx, cx, prim)
        };
        let mut right: HashMap<(u64, u64), [u128; 2]> = HashMap::new();
        for_each_index(&lists[h..m], |idx| {
            let (fx, cx, prim) = key(idx, h);
            right.entry(((pa - fx) % pa, (pb - cx) % pb)).or_default()[prim as usize] += 1;
        });
        for_each_index(&lists[0..h], |idx| {
            let (fx, cx, prim) = key(idx, 0);
            if let Some(counts) = right.get(&(fx, cx)) {
                total += counts[1] + if prim { counts[0] } else { 0 };
            }
        });
    }
    let per_x = ipow(p, v) as u128;
    debug_assert_eq!(total % per_x, 0);
    Ok(total / per_x)
}

/// Calls `visit` with every index vector into the product of `lists`
/// (once with an empty vector when `lists` is empty).
fn for_each_index(lists: &[Vec<u64>], mut visit: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; lists.len()];
    loop {
        visit(&idx);
        let mut i = 0;
        loop {
            if i == lists.len() {
                return;
            }
            idx[i] += 1;
            if idx[i] < lists[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// `|B_{a,b}(l; d)|` by direct enumeration of `x mod p^l` and of units mod `p^d`.
pub fn count_b_set_brute(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    l: u32,
    d: u32,
    a_exp: u32,
    b_exp: u32,
) -> Result<u128> {
    validate(f, c, p, l, d, a_exp, b_exp)?;
    let m = f.m();
    let pl = ipow(p, l);
    check_budget(
        "B-set enumeration",
        (pl as u128).pow(m as u32),
        1_000_000_000,
    )?;
    let pd = ipow(p, d) as i128;
    let pa = ipow(p, a_exp) as i128;
    let pb = ipow(p, b_exp) as i128;
    let units: Vec<i128> = (1..pd.max(2))
        .filter(|&u| crate::arith::gcd(u, pd) == 1)
        .collect();
    let mut x = vec![0i64; m];
    let mut count = 0u128;
    loop {
        if x.iter().any(|&xi| xi as u64 % p != 0) {
            let grad = f.gradient(&x);
            let related = units.iter().any(|&lam| {
                grad.iter()
                    .zip(c)
                    .all(|(&g, &ci)| (lam * g as i128 + ci as i128).rem_euclid(pd) == 0)
            });
            let cx: i128 = c
                .iter()
                .zip(&x)
                .map(|(&ci, &xi)| ci as i128 * xi as i128)
                .sum();
            if related && f.eval(&x).rem_euclid(pa) == 0 && cx.rem_euclid(pb) == 0 {
                count += 1;
            }
        }
        let mut i = 0;
        loop {
            if i == m {
                return Ok(count);
            }
            x[i] += 1;
            if (x[i] as u64) < pl {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

/// `S'_c(p^l)` from the counts `B(l'; d) = B_{l'+v, l'+v}(l'; d)` with `v = v_p(c)`:
///
/// `φ(p^l) S'_c(p^l) = p^{m v} (p^{2l} |B(l-v; d)| - p^{2l+m-2} |B(l-1-v; d)|)`,
/// valid for `1 + v <= d <= l/2`.
pub fn exp_sum_structural(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    l: u32,
    d: u32,
) -> Result<i128> {
    if c.len() != f.m() {
        return precondition("c must have one entry per variable");
    }
    let Some(v) = valuation_of_tuple(p, c) else {
        return precondition("c = 0 has no structural formula");
    };
    if d < 1 + v || 2 * d > l {
        return precondition(format!(
            "need 1 + v_p(c) <= d <= l/2 (v = {v}, d = {d}, l = {l})"
        ));
    }
    let m = f.m() as u32;
    let b = |lp: u32| count_b_set(f, c, p, lp, d, lp + v, lp + v);
    let upper = BigInt::from(b(l - v)?);
    let lower = BigInt::from(b(l - 1 - v)?);
    let pb = BigInt::from(p);
    let numer = pb.pow(m * v) * (pb.pow(2 * l) * upper - pb.pow(2 * l + m - 2) * lower);
    let phi = BigInt::from(ipow(p, l) - ipow(p, l - 1));
    let (q, r) = numer.div_rem(&phi);
    if !r.is_zero() {
        return precondition("structural numerator not divisible by φ(p^l)");
    }
    q.to_i128()
        .ok_or_else(|| Error::Precondition("structural value exceeds i128".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::exp_sum_prime_restricted;

    #[test]
    fn fast_count_matches_brute() {
        let f = DiagonalCubicForm::fermat(4);
        for c in [[1, 1, 1, 0], [1, -1, 2, 3], [5, 5, 10, 15], [1, 1, 1, 1]] {
            for (p, l, d) in [
                (5u64, 1u32, 1u32),
                (5, 2, 1),
                (5, 2, 2),
                (3, 2, 1),
                (7, 1, 1),
            ] {
                let Some(v) = valuation_of_tuple(p, &c) else {
                    continue;
                };
                if d < v + 1 || l < d {
                    continue;
                }
                for (a, b) in [(l, l), (l + v, l + v), (1, 0)] {
                    if validate(&f, &c, p, l, d, a, b).is_err() {
                        continue;
                    }
                    let fast = count_b_set(&f, &c, p, l, d, a, b).unwrap();
                    let slow = count_b_set_brute(&f, &c, p, l, d, a, b).unwrap();
                    assert_eq!(fast, slow, "{c:?} p={p} l={l} d={d} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn zero_tuple_rejected() {
        let f = DiagonalCubicForm::fermat(4);
        assert!(matches!(
            count_b_set(&f, &[0; 4], 5, 2, 1, 2, 2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn structural_matches_restricted_sum() {
        let f = DiagonalCubicForm::fermat(4);
        let c = [1, -1, 2, 3];
        assert_eq!(
            exp_sum_structural(&f, &c, 5, 2, 1).unwrap(),
            exp_sum_prime_restricted(&f, &c, 5, 2).unwrap()
        );
    }
}
