//! Local solution densities of `y_1³ + y_2³ + y_3³ = a` and the truncated
//! singular series of the six-variable form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, factor, ipow, is_prime, k_of_m, k_of_m_factors, valuation};
use crate::error::{check_budget, precondition, Error, Result};
use crate::expsum::exp_sum;
use crate::fit::TrendFit;
use crate::form::DiagonalCubicForm;

/// Work limit for one modulus `q` of the level counts, in `q²` steps.
pub const LEVEL_BUDGET: u128 = 20_000_000_000;

/// `#{y mod q : y³ ≡ r}` for each residue `r`.
pub fn cube_residue_counts(q: u64) -> Vec<u64> {
    let mut h = vec![0u64; q as usize];
    for y in 0..q as u128 {
        h[(y * y % q as u128 * y % q as u128) as usize] += 1;
    }
    h
}

fn convolve(a: &[u64], b: &[u64]) -> Vec<u64> {
    let q = a.len();
    let nb: Vec<(usize, u64)> = b.iter().copied().enumerate().filter(|e| e.1 != 0).collect();
    let mut out = vec![0u64; q];
    for (r, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for &(s, y) in &nb {
            let t = r + s;
            out[if t >= q { t - q } else { t }] += x * y;
        }
    }
    out
}

/// `#{y mod q : y_1³ + y_2³ + y_3³ ≡ a}` for every `a mod q`.
pub fn level_counts(q: u64) -> Result<Vec<u64>> {
    check_budget("cube level counts", (q as u128).pow(2), LEVEL_BUDGET)?;
    let h = cube_residue_counts(q);
    Ok(convolve(&convolve(&h, &h), &h))
}

/// Counts `N_l` and densities `N_l / p^{2l}` of `F_a(y) ≡ 0 mod p^l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub p: u64,
    pub a: i64,
    pub counts: Vec<u64>,
    pub densities: Vec<f64>,
    /// Smallest level from which every later density is identical.
    pub stable_from: Option<u32>,
    /// Consecutive agreement past the lifting threshold `2 v_p(3a) + 1`.
    pub stabilized: bool,
    /// The last density.
    pub sigma_p: f64,
}

pub fn sigma_p(a: i64, p: u64, l_max: u32) -> Result<DensityProfile> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if l_max < 2 {
        return precondition("stabilization needs at least two levels");
    }
    let mut counts = Vec::new();
    let mut densities = Vec::new();
    for l in 1..=l_max {
        let q = ipow(p, l);
        let n = level_counts(q)?[a.rem_euclid(q as i64) as usize];
        counts.push(n);
        densities.push(n as f64 / (q as f64).powi(2));
    }
    // Exact agreement of consecutive densities: N_{l+1} = p² N_l.
    let p2 = p * p;
    let mut stable_from = l_max;
    while stable_from > 1
        && counts[stable_from as usize - 1] == p2 * counts[stable_from as usize - 2]
    {
        stable_from -= 1;
    }
    let stable_from = (stable_from < l_max).then_some(stable_from);
    let threshold = valuation(p, 3 * a as i128).map(|v| 2 * v + 1);
    let stabilized = matches!((stable_from, threshold), (Some(_), Some(t)) if l_max - 1 > t);
    Ok(DensityProfile {
        p,
        a,
        counts,
        sigma_p: *densities.last().expect("l_max >= 2"),
        densities,
        stable_from,
        stabilized,
    })
}

/// `K(M) = ∏_{p <= M} p^{⌊log_p M⌋}`.
pub fn k_of(m: u64) -> u128 {
    k_of_m(m)
}

/// `s_{F_a}(K) = K^{-2} #{y mod K : F_a(y) ≡ 0}` for every `a mod K`, by CRT
/// over the prime powers of `K`.
pub fn s_fk_table(k: u64) -> Result<Vec<f64>> {
    if k == 0 {
        return precondition("K must be positive");
    }
    check_budget("s_F(K) table", k as u128, 100_000_000)?;
    let mut table = vec![1.0f64; k as usize];
    for q in factor(k as i64)?.prime_powers() {
        let counts = level_counts(q)?;
        let q2 = (q as f64).powi(2);
        for (a, s) in table.iter_mut().enumerate() {
            *s *= counts[a % q as usize] as f64 / q2;
        }
    }
    Ok(table)
}

pub fn s_fk(a: i64, k: u64) -> Result<f64> {
    if k == 0 {
        return precondition("K must be positive");
    }
    let mut s = 1.0;
    for q in factor(k as i64)?.prime_powers() {
        let n = level_counts(q)?[a.rem_euclid(q as i64) as usize];
        s *= n as f64 / (q as f64).powi(2);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub m: u64,
    pub k: u128,
    pub value: f64,
    /// Exact `𝒮(K(M))` as `numerator/denominator`.
    pub exact: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSeriesReport {
    pub rows: Vec<SeriesRow>,
    /// `M` of the reference value standing in for the full series.
    pub m_ref: u64,
    pub reference: f64,
    /// `|𝒮(K(M)) − 𝒮(K(M_ref))|` against `M`, for `2 <= M <= m_max`.
    pub fit: TrendFit,
}

/// `S_0(n)` for `F = y_1³ + … + y_6³`.
fn s0(n: u64) -> Result<BigRational> {
    let f = DiagonalCubicForm::fermat(6);
    let v = exp_sum(&f, &[0; 6], n)?.value;
    Ok(BigRational::new(BigInt::from(v), BigInt::from(n).pow(6)))
}

/// `1 + Σ_{l<=e} S_0(p^l) p^{-6l}`.
fn local_factor(p: u64, e: u32) -> Result<BigRational> {
    let mut s = BigRational::one();
    for l in 1..=e {
        s += s0(ipow(p, l))?;
    }
    Ok(s)
}

/// `𝒮(K(M))` as a product of local factors, `S_0` being multiplicative.
pub fn series_by_product(m: u64) -> Result<BigRational> {
    let mut s = BigRational::one();
    for (p, e) in k_of_m_factors(m) {
        s *= local_factor(p, e)?;
    }
    Ok(s)
}

/// `𝒮(K(M)) = Σ_{n | K(M)} n^{-6} S_0(n)`, one divisor at a time.
pub fn series_by_divisors(m: u64) -> Result<BigRational> {
    let k = k_of_m(m);
    check_budget("divisor sum of K(M)", k, 1_000_000)?;
    let mut s = BigRational::zero();
    for n in divisors(k as u64) {
        s += s0(n)?;
    }
    Ok(s)
}

/// `𝒮(K(M))` for `M = 1..=m_max`, and the decay of its distance to
/// `𝒮(K(m_ref))`.
pub fn singular_series(m_max: u64, m_ref: u64) -> Result<SingularSeriesReport> {
    if m_ref <= m_max || m_max < 5 {
        return precondition("need 5 <= m_max < m_ref");
    }
    let reference = series_by_product(m_ref)?
        .to_f64()
        .expect("finite series value");
    let mut rows = Vec::new();
    for m in 1..=m_max {
        let exact = series_by_product(m)?;
        rows.push(SeriesRow {
            m,
            k: k_of_m(m),
            value: exact.to_f64().expect("finite series value"),
            exact: exact.to_string(),
        });
    }
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.m >= 2)
        .map(|r| (r.m as f64, (r.value - reference).abs()))
        .collect();
    let fit = TrendFit::from_samples(&samples)
        .ok_or_else(|| Error::Precondition("degenerate series samples".into()))?
        .with_window(-1.1, -0.4);
    Ok(SingularSeriesReport {
        rows,
        m_ref,
        reference,
        fit,
    })
}

/// `Σ_{a mod p} s_{F_a}(p)^{-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseDensityReport {
    pub p: u64,
    pub value: f64,
    pub exact: String,
    /// `|value − p| · p^{1/2}`.
    pub scaled_deviation: f64,
}

pub fn inverse_density_sum(p: u64) -> Result<InverseDensityReport> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let counts = level_counts(p)?;
    let p2 = BigInt::from(p * p);
    let mut s = BigRational::zero();
    for (a, &n) in counts.iter().enumerate() {
        if n == 0 {
            return precondition(format!("no solutions mod {p} for a = {a}"));
        }
        s += BigRational::new(p2.clone(), BigInt::from(n));
    }
    let value = s.to_f64().expect("finite");
    Ok(InverseDensityReport {
        p,
        value,
        exact: s.to_string(),
        scaled_deviation: (value - p as f64).abs() * (p as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_counts_match_enumeration() {
        for q in [2u64, 4, 7, 9] {
            let counts = level_counts(q).unwrap();
            let mut direct = vec![0u64; q as usize];
            for a in 0..q {
                for b in 0..q {
                    for c in 0..q {
                        direct[((a.pow(3) + b.pow(3) + c.pow(3)) % q) as usize] += 1;
                    }
                }
            }
            assert_eq!(counts, direct);
        }
    }

    #[test]
    fn density_examples() {
        for a in 0..2 {
            assert_eq!(s_fk(a, 2).unwrap(), 1.0);
        }
        let prof = sigma_p(7, 5, 4).unwrap();
        assert!(prof.densities.iter().all(|&d| d == 1.0));
        assert_eq!(prof.stable_from, Some(1));
        assert!(prof.stabilized);
        let bad = sigma_p(4, 3, 3).unwrap();
        assert_eq!(bad.counts[1], 0);
        assert_eq!(bad.sigma_p, 0.0);
        assert!(!sigma_p(0, 7, 3).unwrap().stabilized);
    }

    #[test]
    fn k_of_ten() {
        assert_eq!(k_of(10), 2520);
        assert_eq!(k_of(1), 1);
    }

    #[test]
    fn s_fk_table_is_crt_product() {
        let t = s_fk_table(12).unwrap();
        for a in -20i64..20 {
            assert_eq!(t[a.rem_euclid(12) as usize], s_fk(a, 12).unwrap());
        }
    }

    #[test]
    fn series_small_cases() {
        assert_eq!(series_by_product(1).unwrap(), BigRational::one());
        let s2 = series_by_product(2).unwrap();
        assert_eq!(s2, BigRational::one() + s0(2).unwrap());
        for m in [4, 6, 10] {
            assert_eq!(
                series_by_product(m).unwrap(),
                series_by_divisors(m).unwrap()
            );
        }
    }

    #[test]
    fn series_is_mean_square_of_residue_densities() {
        for m in [3u64, 4, 5] {
            let k = k_of(m) as u64;
            let table = s_fk_table(k).unwrap();
            let mean = table.iter().map(|s| s * s).sum::<f64>() / k as f64;
            let series = series_by_product(m).unwrap().to_f64().unwrap();
            assert!(
                (mean - series).abs() < 1e-12 * series,
                "M={m}: {mean} vs {series}"
            );
        }
    }

    #[test]
    fn inverse_density() {
        let r5 = inverse_density_sum(5).unwrap();
        assert_eq!(r5.exact, "5");
        for p in [7, 13] {
            let r = inverse_density_sum(p).unwrap();
            assert!(r.scaled_deviation < 20.0, "{r:?}");
        }
    }
}
