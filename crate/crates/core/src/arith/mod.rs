//! Integer arithmetic: valuations, factorization, multiplicative functions and
//! modular helpers. Finite fields live in [`field`].

pub mod field;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub use field::FiniteField;

/// Default trial-division bound for [`factor`].
pub const DEFAULT_TRIAL_BOUND: u64 = 10_000_000;

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i128
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    gcd(a as i128, b as i128) as u64
}

pub fn lcm(a: i128, b: i128) -> i128 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b) * b).abs()
}

/// `v_p(n)`, or `None` for `n = 0`.
pub fn valuation(p: u64, n: i128) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let p = p as u128;
    let mut n = n.unsigned_abs();
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Some(v)
}

/// `v_p(gcd(c))`, or `None` when every entry is zero.
pub fn valuation_of_tuple(p: u64, c: &[i64]) -> Option<u32> {
    c.iter().filter_map(|&ci| valuation(p, ci as i128)).min()
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m))
}

/// `x mod m` in `[0, m)` for signed `x`.
pub fn reduce(x: i64, m: u64) -> u64 {
    (x as i128).rem_euclid(m as i128) as u64
}

pub fn ipow(base: u64, e: u32) -> u64 {
    base.checked_pow(e).expect("integer power overflow")
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
}

/// An integer together with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredInteger {
    pub value: i64,
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    /// ω(n), the number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn radical(&self) -> u64 {
        self.factors.iter().map(|&(p, _)| p).product()
    }

    pub fn valuation(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// Recomposes `|value|` from the factor list.
    pub fn recompose(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| ipow(p, e)).product()
    }

    pub fn prime_powers(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, e)| ipow(p, e))
    }
}

pub fn factor(n: i64) -> Result<FactoredInteger> {
    factor_with_bound(n, DEFAULT_TRIAL_BOUND)
}

/// Trial division up to `bound`. A leftover cofactor is accepted as prime when
/// it is below `bound²`; otherwise the call fails with a budget error.
pub fn factor_with_bound(n: i64, bound: u64) -> Result<FactoredInteger> {
    if n == 0 {
        return Err(Error::Precondition("cannot factor 0".into()));
    }
    let mut m = n.unsigned_abs();
    let mut factors = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= m {
        if d > bound {
            return Err(Error::Budget {
                what: "trial division",
                needed: m as u128,
                limit: (bound as u128) * (bound as u128),
            });
        }
        if m % d == 0 {
            let mut e = 0;
            while m % d == 0 {
                m /= d;
                e += 1;
            }
            factors.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(FactoredInteger { value: n, factors })
}

/// Square-full and cube-full parts of `n`.
pub fn sq_cub_parts(n: u64) -> (u64, u64) {
    let f = factor(n as i64).expect("positive input within trial bound");
    let mut sq = 1;
    let mut cub = 1;
    for &(p, e) in &f.factors {
        if e >= 2 {
            sq *= ipow(p, e);
        }
        if e >= 3 {
            cub *= ipow(p, e);
        }
    }
    (sq, cub)
}

pub fn is_squarefull(n: u64) -> bool {
    n >= 1 && sq_cub_parts(n).0 == n
}

pub fn mobius(n: u64) -> i64 {
    let f = factor(n as i64).expect("positive input");
    if f.factors.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    let f = factor(n as i64).expect("positive input");
    f.factors
        .iter()
        .map(|&(p, e)| (p - 1) * ipow(p, e - 1))
        .product()
}

pub fn divisors(n: u64) -> Vec<u64> {
    let f = factor(n as i64).expect("positive input");
    let mut ds = vec![1u64];
    for &(p, e) in &f.factors {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

/// Ramanujan's sum `c_n(t) = Σ_{d | (n,t)} d μ(n/d)`.
pub fn ramanujan_sum(n: u64, t: i64) -> i64 {
    let g = gcd_u64(n, t.unsigned_abs());
    let g = if t == 0 { n } else { g };
    divisors(g)
        .into_iter()
        .map(|d| d as i64 * mobius(n / d))
        .sum()
}

/// `K(M) = ∏_{p ≤ M} p^{⌊log_p M⌋}`, i.e. `lcm(1, …, M)`.
pub fn k_of_m(m: u64) -> u128 {
    let mut k: u128 = 1;
    for p in primes_up_to(m) {
        let mut pk = p as u128;
        while pk * (p as u128) <= m as u128 {
            pk *= p as u128;
        }
        k *= pk;
    }
    k
}

/// Prime powers `p^e` exactly dividing `K(M)`.
pub fn k_of_m_factors(m: u64) -> Vec<(u64, u32)> {
    primes_up_to(m)
        .into_iter()
        .map(|p| {
            let mut e = 1;
            while ipow(p, e + 1) <= m {
                e += 1;
            }
            (p, e)
        })
        .collect()
}
