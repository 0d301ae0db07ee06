//! Local L-factor data from point counts.
//!
//! For a smooth section `V_c` of odd dimension `m* = m − 3`,
//! `E_c(p^r) = (−1)^{m*} Σ_i α_i^r` with `|α_i| = p^{m*/2}`. The power sums of
//! the `α_i` are therefore integers, and all symmetric functions are computed
//! exactly from them before normalizing by powers of `p^{1/2}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{ipow, FiniteField};
use crate::dual::{dual_form_value, rational_valuation};
use crate::error::{precondition, Result};
use crate::expsum::{exp_sum, normalize};
use crate::form::DiagonalCubicForm;
use crate::pointcount::{count_points, hypersurface_count, projective_count, section_raw_count};

/// Tolerance for float cancellations of exactly computed quantities.
pub const ROUNDING_TOLERANCE: f64 = 1e-6;

/// `dim H^{m*}` of a smooth section: `(2^{m*+2} + 2(−1)^{m*}) / 3`.
pub fn dim_middle(m: usize) -> Result<usize> {
    match m {
        4 => Ok(2),
        6 => Ok(10),
        _ => precondition(format!(
            "middle dimension is tabulated for m in {{4, 6}}, got {m}"
        )),
    }
}

/// `e_k` for `k = 0..=n` from power sums `p_1..p_n` (Newton's identities).
pub fn elementary_from_power_sums(p: &[BigRational]) -> Vec<BigRational> {
    let mut e = vec![BigRational::one()];
    for k in 1..=p.len() {
        let mut acc = BigRational::zero();
        for i in 1..=k {
            let term = &e[k - i] * &p[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / BigRational::from_integer(BigInt::from(k)));
    }
    e
}

/// Power sums `p_1..p_n` from `e_0..e_n`.
pub fn power_sums_from_elementary(e: &[BigRational]) -> Vec<BigRational> {
    let n = e.len() - 1;
    let mut p: Vec<BigRational> = Vec::with_capacity(n);
    for k in 1..=n {
        // p_k = (−1)^{k−1} k e_k + Σ_{i=1}^{k−1} (−1)^{i−1} e_i p_{k−i}
        let mut acc = BigRational::from_integer(BigInt::from(k)) * &e[k];
        if k % 2 == 0 {
            acc = -acc;
        }
        for i in 1..k {
            let term = &e[i] * &p[k - i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        p.push(acc);
    }
    p
}

/// `h_k` for `k = 0..=n` from power sums (`k h_k = Σ_{i=1}^k p_i h_{k−i}`).
pub fn complete_from_power_sums(p: &[BigRational]) -> Vec<BigRational> {
    let mut h = vec![BigRational::one()];
    for k in 1..=p.len() {
        let mut acc = BigRational::zero();
        for i in 1..=k {
            acc += &p[i - 1] * &h[k - i];
        }
        h.push(acc / BigRational::from_integer(BigInt::from(k)));
    }
    h
}

fn int(x: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Frobenius data of `V_c` at `p` from counts over `F_{p^r}`, `r <= r_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusData {
    pub p: u64,
    pub m: usize,
    /// `E_c(p^r)` for `r = 1..=r_max`.
    pub counts: Vec<i128>,
    /// `Ẽ_c(p^r)`.
    pub counts_tilde: Vec<f64>,
    /// `Σ α_i^r = (−1)^{m*} E_c(p^r)`, exact.
    pub power_sums_exact: Vec<i128>,
    /// `e_k(α)`, `k = 0..=r_max`, exact.
    pub elementary_exact: Vec<BigRational>,
    /// `h_k(α)`, exact.
    pub complete_exact: Vec<BigRational>,
    /// Normalized power sums `Σ α̃_i^r = (−1)^{m*} Ẽ_c(p^r)`.
    pub power_sums: Vec<f64>,
    /// `λ̃_c(p^k) = h_k(α̃)`, `k = 1..=r_max`.
    pub lambda: Vec<f64>,
    /// `μ_c(p^k) = (−1)^k e_k(α̃)`, `k = 1..=r_max`.
    pub mu: Vec<f64>,
    /// `λ̃_{∧²}(p) = e_2(α̃)`.
    pub wedge2: f64,
    /// `λ̃_{Sym²}(p) = h_2(α̃)`.
    pub sym2: f64,
    /// `p ∤ F^∨(c)`.
    pub good: bool,
    /// `|Σ α̃_i^r| <= dim_middle(m)` for every `r`.
    pub pure: bool,
}

impl FrobeniusData {
    fn m_star(&self) -> u32 {
        (self.m - 3) as u32
    }

    /// `e_2(α̃) = 1` exactly, i.e. `e_2(α) = p^{m*}`.
    pub fn e2_is_one(&self) -> bool {
        self.elementary_exact.get(2) == Some(&int(ipow(self.p, self.m_star()) as i128))
    }

    /// `λ̃_c(p)^2 = λ̃_{∧²}(p) + λ̃_{Sym²}(p)`, checked on the exact values.
    pub fn square_identity_holds(&self) -> bool {
        let h1 = &self.complete_exact[1];
        h1 * h1 == &self.elementary_exact[2] + &self.complete_exact[2]
    }

    /// Newton round trip `p → e → p` on the exact data.
    pub fn newton_round_trip_holds(&self) -> bool {
        let back = power_sums_from_elementary(&self.elementary_exact);
        back.iter()
            .zip(&self.power_sums_exact)
            .all(|(a, &b)| *a == int(b))
    }
}

/// Whether `p ∤ F^∨(c)` (and `F^∨(c) ≠ 0`).
pub fn is_good_prime(f: &DiagonalCubicForm, c: &[i64], p: u64) -> bool {
    if let Some(v) = crate::dual::dual_form_i128(f, c) {
        return v != 0 && v % p as i128 != 0;
    }
    rational_valuation(p, &dual_form_value(f, c, None).value) == Some(0)
}

pub fn frobenius_data(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    r_max: u32,
) -> Result<FrobeniusData> {
    if r_max < 2 {
        return precondition("r_max must be at least 2");
    }
    let dim = dim_middle(f.m())?;
    let m_star = f.m_star() as u32;
    let sign: i128 = if m_star % 2 == 0 { 1 } else { -1 };
    let mut counts = Vec::new();
    let mut counts_tilde = Vec::new();
    for r in 1..=r_max {
        let sc = count_points(f, Some(c), &FiniteField::new(p, r)?)?;
        counts.push(sc.e);
        counts_tilde.push(sc.e_tilde);
    }
    let power_sums_exact: Vec<i128> = counts.iter().map(|&e| sign * e).collect();
    let ps: Vec<BigRational> = power_sums_exact.iter().map(|&x| int(x)).collect();
    let elementary_exact = elementary_from_power_sums(&ps);
    let complete_exact = complete_from_power_sums(&ps);
    let scale = |k: usize| (p as f64).powf(k as f64 * m_star as f64 / 2.0);
    let power_sums: Vec<f64> = counts_tilde.iter().map(|&e| sign as f64 * e).collect();
    let lambda: Vec<f64> = (1..=r_max as usize)
        .map(|k| to_f64(&complete_exact[k]) / scale(k))
        .collect();
    let mu: Vec<f64> = (1..=r_max as usize)
        .map(|k| {
            let e = to_f64(&elementary_exact[k]) / scale(k);
            if k % 2 == 0 {
                e
            } else {
                -e
            }
        })
        .collect();
    let pure = power_sums
        .iter()
        .all(|x| x.abs() <= dim as f64 + ROUNDING_TOLERANCE);
    Ok(FrobeniusData {
        p,
        m: f.m(),
        wedge2: to_f64(&elementary_exact[2]) / scale(2),
        sym2: to_f64(&complete_exact[2]) / scale(2),
        counts,
        counts_tilde,
        power_sums_exact,
        elementary_exact,
        complete_exact,
        power_sums,
        lambda,
        mu,
        good: is_good_prime(f, c, p),
        pure,
    })
}

/// Normalized data of `V` itself: `λ̃_V(p^k) = h_k(β̃)` where
/// `Σ β̃^r = (−1)^{1+m*} Ẽ_F(p^r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypersurfaceData {
    pub p: u64,
    /// `E_F(p)`, `E_F(p^2)`.
    pub counts: [i128; 2],
    pub lambda_v: [f64; 2],
    /// `e_2(β̃)`.
    pub e2_v: f64,
}

pub fn hypersurface_data(f: &DiagonalCubicForm, p: u64) -> Result<HypersurfaceData> {
    let dim = f.m() as i32 - 2;
    let sign = if (1 + f.m_star()) % 2 == 0 { 1.0 } else { -1.0 };
    let mut counts = [0i128; 2];
    let mut tilde = [0f64; 2];
    for r in 1..=2u32 {
        let field = FiniteField::new(p, r)?;
        let q = field.size() as u64;
        let e = hypersurface_count(f, &field) as i128 - projective_count(q, dim);
        counts[r as usize - 1] = e;
        tilde[r as usize - 1] = sign * e as f64 / (q as f64).powf(dim as f64 / 2.0);
    }
    Ok(HypersurfaceData {
        p,
        counts,
        lambda_v: [tilde[0], (tilde[0] * tilde[0] + tilde[1]) / 2.0],
        e2_v: (tilde[0] * tilde[0] - tilde[1]) / 2.0,
    })
}

/// Low-order coefficients of the local factors `Φ_{1,p}, Φ_{2,p}, Φ_{3,p}`
/// at a good prime, where `Φ_p = 1 + S̃_c(p) p^{−s}` and
///
/// * `Φ_1 = L(s,V_c)^{-1} L(1/2+s,V)^{-1} ζ(2s)^{-1}`,
/// * `Φ_2 = ζ(2s) / L(2s, V_c, ∧²)`,
/// * `Φ_3 = Φ · L(s,V_c) L(1/2+s,V) L(2s,V_c,∧²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiCoefficients {
    pub p: u64,
    pub s_tilde: f64,
    pub a1_p: f64,
    pub a1_p2: f64,
    pub a2_p2: f64,
    pub a3_p: f64,
    pub a3_p2: f64,
    /// `|a3(p^2)| · p^{1/2}`.
    pub a3_p2_scaled: f64,
}

pub fn phi_local_coeffs(f: &DiagonalCubicForm, c: &[i64], p: u64) -> Result<PhiCoefficients> {
    if f.m() % 2 != 0 {
        return precondition("the factorization is defined for even m");
    }
    if !is_good_prime(f, c, p) {
        return precondition(format!("p = {p} divides F^∨(c)"));
    }
    let fd = frobenius_data(f, c, p, 2)?;
    let hv = hypersurface_data(f, p)?;
    let s = exp_sum(f, c, p)?;
    let s_tilde = normalize(s.value, p, f.m());
    let sp = (p as f64).sqrt();
    let (h1, h2, e1, e2) = (fd.lambda[0], fd.lambda[1], -fd.mu[0], fd.mu[1]);
    let v1 = hv.lambda_v[0] / sp;
    let v2 = hv.lambda_v[1] / p as f64;
    let ev2 = hv.e2_v / p as f64;
    // Φ_1: (1 − e1 t + e2 t²)(1 − v1 t + ev2 t²)(1 − t²)
    let a1_p = -e1 - v1;
    let a1_p2 = e2 + e1 * v1 + ev2 - 1.0;
    // Φ_2: (1 + t²)(1 − e2 t²)
    let a2_p2 = 1.0 - e2;
    // Φ_3: (1 + S t)(1 + h1 t + h2 t²)(1 + v1 t + v2 t²)(1 + e2 t²)
    let a3_p = s_tilde + h1 + v1;
    let a3_p2 = s_tilde * (h1 + v1) + h2 + h1 * v1 + v2 + e2;
    Ok(PhiCoefficients {
        p,
        s_tilde,
        a1_p,
        a1_p2,
        a2_p2,
        a3_p,
        a3_p2,
        a3_p2_scaled: a3_p2.abs() * sp,
    })
}

/// The three incidence identities behind the local averages over `c ∈ F_p^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocAvReport {
    pub p: u64,
    pub m: usize,
    pub v_p: u64,
    pub v_p2: u64,
    /// `(lhs, rhs)` for `Σ #V_c(F_p)`, `Σ #V_c(F_p)^2` and `Σ #V_c(F_{p^2})`.
    pub identities: [(i128, i128); 3],
}

impl LocAvReport {
    pub fn pass(&self) -> bool {
        self.identities.iter().all(|(a, b)| a == b)
    }
}

/// Representatives (first nonzero entry 1) of the points of `P^{m−1}(F_p)`.
pub fn projective_classes(m: usize, p: u64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for lead in 0..m {
        let free = m - lead - 1;
        for k in 0..ipow(p, free as u32) {
            let mut c = vec![0i64; m];
            c[lead] = 1;
            let mut rest = k;
            for slot in c.iter_mut().skip(lead + 1) {
                *slot = (rest % p) as i64;
                rest /= p;
            }
            out.push(c);
        }
    }
    out
}

pub fn locav_incidence_check(f: &DiagonalCubicForm, p: u64) -> Result<LocAvReport> {
    let m = f.m();
    let fp = FiniteField::new(p, 1)?;
    let fp2 = FiniteField::new(p, 2)?;
    let v1 = hypersurface_count(f, &fp) as i128;
    let v2 = hypersurface_count(f, &fp2) as i128;
    let classes = projective_classes(m, p);
    let per_class: Vec<(i128, i128)> = classes
        .par_iter()
        .map(|c| -> Result<(i128, i128)> {
            Ok((
                section_raw_count(f, c, &fp)? as i128,
                section_raw_count(f, c, &fp2)? as i128,
            ))
        })
        .collect::<Result<_>>()?;
    let units = p as i128 - 1;
    let mut sums = [v1, v1 * v1, v2];
    for &(a, b) in &per_class {
        sums[0] += units * a;
        sums[1] += units * a * a;
        sums[2] += units * b;
    }
    let pi = p as i128;
    let (pm1, pm2) = (pi.pow(m as u32 - 1), pi.pow(m as u32 - 2));
    let rhs = [
        pm1 * v1,
        pm1 * v1 + pm2 * (v1 * v1 - v1),
        pm1 * v1 + pm2 * (v2 - v1),
    ];
    Ok(LocAvReport {
        p,
        m,
        v_p: v1 as u64,
        v_p2: v2 as u64,
        identities: [(sums[0], rhs[0]), (sums[1], rhs[1]), (sums[2], rhs[2])],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MubarReport {
    pub p: u64,
    pub l: u32,
    /// `p^{−m} Σ_{c mod p, p ∤ F^∨(c)} μ_c(p^l)`.
    pub average: f64,
    pub predicted: f64,
    pub deviation: f64,
    /// Number of `c mod p` with `p ∤ F^∨(c)`.
    pub good_count: u64,
    /// `p | 6 lcm(F)`: the prime is excluded from trends.
    pub degenerate: bool,
}

/// Average of `μ_c(p^l) 1_{p ∤ F^∨(c)}` over `c mod p`, against the predicted
/// main term `λ̃_V(p) p^{−1/2}` (`l = 1`) or `1` (`l = 2`).
pub fn mubar_average(f: &DiagonalCubicForm, p: u64, l: u32) -> Result<MubarReport> {
    if !(1..=2).contains(&l) {
        return precondition("l must be 1 or 2");
    }
    let m = f.m();
    let m_star = f.m_star();
    let sign = if m_star % 2 == 0 { 1.0 } else { -1.0 };
    let fields: Vec<FiniteField> = (1..=l)
        .map(|r| FiniteField::new(p, r))
        .collect::<Result<_>>()?;
    let classes = projective_classes(m, p);
    let per_class: Vec<Option<f64>> = classes
        .par_iter()
        .map(|c| -> Result<Option<f64>> {
            if !is_good_prime(f, c, p) {
                return Ok(None);
            }
            let mut ps = Vec::new();
            for field in &fields {
                let q = field.size() as f64;
                let e = section_raw_count(f, c, field)? as i128
                    - projective_count(field.size() as u64, m_star);
                ps.push(sign * e as f64 / q.powf(m_star as f64 / 2.0));
            }
            Ok(Some(if l == 1 {
                -ps[0]
            } else {
                (ps[0] * ps[0] - ps[1]) / 2.0
            }))
        })
        .collect::<Result<_>>()?;
    let good_count = per_class.iter().flatten().count() as u64 * (p - 1);
    let total: f64 = per_class.iter().flatten().sum::<f64>() * (p - 1) as f64;
    let average = total / (p as f64).powi(m as i32);
    let predicted = if l == 1 {
        hypersurface_data(f, p)?.lambda_v[0] / (p as f64).sqrt()
    } else {
        1.0
    };
    Ok(MubarReport {
        p,
        l,
        average,
        predicted,
        deviation: average - predicted,
        good_count,
        degenerate: (6 * f.lcm()) % p as i128 == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn middle_dimensions() {
        assert_eq!(dim_middle(4).unwrap(), 2);
        assert_eq!(dim_middle(6).unwrap(), 10);
        assert!(dim_middle(5).is_err());
    }

    #[test]
    fn newton_identities_on_known_roots() {
        // Roots 1, 2, 3: p = (6, 14, 36), e = (1, 6, 11, 6), h_2 = 25.
        let p: Vec<BigRational> = [6, 14, 36].iter().map(|&x| int(x)).collect();
        let e = elementary_from_power_sums(&p);
        assert_eq!(e, vec![int(1), int(6), int(11), int(6)]);
        assert_eq!(power_sums_from_elementary(&e), p);
        assert_eq!(complete_from_power_sums(&p)[2], int(25));
    }

    #[test]
    fn elliptic_section_has_unit_determinant() {
        let f = DiagonalCubicForm::fermat(4);
        let c = [1, 2, 3, 4];
        for p in [5u64, 7, 11] {
            if !is_good_prime(&f, &c, p) {
                continue;
            }
            let fd = frobenius_data(&f, &c, p, 3).unwrap();
            assert!(fd.e2_is_one(), "p={p}");
            assert!(fd.square_identity_holds());
            assert!(fd.newton_round_trip_holds());
            assert!(fd.pure);
            // Degree 2: e_3 vanishes.
            assert!(fd.elementary_exact[3].is_zero());
            assert!((fd.mu[0] - fd.counts_tilde[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn a3_vanishes_at_good_primes() {
        let f = DiagonalCubicForm::fermat(4);
        let phi = phi_local_coeffs(&f, &[1, 2, 3, 4], 7).unwrap();
        assert!(phi.a3_p.abs() < ROUNDING_TOLERANCE);
        assert!(phi.a2_p2.abs() < ROUNDING_TOLERANCE);
    }

    #[test]
    fn locav_small_primes() {
        let f = DiagonalCubicForm::fermat(4);
        for p in [2u64, 3] {
            assert!(locav_incidence_check(&f, p).unwrap().pass());
        }
    }

    #[test]
    fn mubar_second_level_near_one() {
        let f = DiagonalCubicForm::fermat(4);
        let r = mubar_average(&f, 7, 2).unwrap();
        assert!(r.deviation.abs() < 0.5);
        assert!(r.deviation.abs() > 0.0);
        assert!(!r.average.is_nan() && r.good_count > 0);
        let _ = r.average.abs();
    }
}
