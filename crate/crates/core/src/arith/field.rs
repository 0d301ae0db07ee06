//! Finite fields `F_{p^r}` with table-driven arithmetic.
//!
//! An element is stored as its integer code `Σ a_i p^i`, where `a_i` are the
//! coefficients of its representative polynomial modulo the defining
//! polynomial. Iterating codes `0..q` therefore gives a fixed, documented
//! element order. Multiplication goes through discrete-log tables and
//! addition through a Zech table, so both are O(1).

use super::{is_prime, pow_mod, primes_up_to};
use crate::error::{check_budget, Error, Result};

/// Largest field size for which tables are built.
pub const MAX_FIELD_SIZE: usize = 1 << 22;

const NO_LOG: u32 = u32::MAX;

pub type Elem = u32;

#[derive(Debug, Clone)]
pub struct FiniteField {
    p: u64,
    r: u32,
    q: usize,
    modulus: Vec<u64>,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
}

impl FiniteField {
    /// Builds `F_{p^r}` with the lexicographically least monic irreducible
    /// modulus (smallest integer code of its lower coefficients).
    pub fn new(p: u64, r: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if r == 0 {
            return Err(Error::Precondition("extension degree must be >= 1".into()));
        }
        let q = (p as u128).checked_pow(r).unwrap_or(u128::MAX);
        check_budget("finite field size", q, MAX_FIELD_SIZE as u128)?;
        let q = q as usize;
        let modulus = least_irreducible(p, r);
        let mut field = FiniteField {
            p,
            r,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            zech: Vec::new(),
        };
        field.build_tables();
        Ok(field)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.r
    }

    pub fn size(&self) -> usize {
        self.q
    }

    /// Coefficients `c_0..c_{r-1}` of the monic modulus `x^r + Σ c_i x^i`.
    pub fn modulus_poly(&self) -> &[u64] {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q as u32
    }

    pub fn zero(&self) -> Elem {
        0
    }

    pub fn one(&self) -> Elem {
        1
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, x: i64) -> Elem {
        (x as i128).rem_euclid(self.p as i128) as Elem
    }

    /// Base-`p` digits of an element (its polynomial coefficients).
    pub fn digits(&self, a: Elem) -> Vec<u64> {
        let mut a = a as u64;
        (0..self.r)
            .map(|_| {
                let d = a % self.p;
                a /= self.p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u64]) -> Elem {
        digits
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * self.p + d % self.p) as Elem
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 {
            return b;
        }
        if b == 0 {
            return a;
        }
        let n = (self.q - 1) as u32;
        let (la, lb) = (self.log[a as usize], self.log[b as usize]);
        let k = if lb >= la { lb - la } else { lb + n - la };
        let z = self.zech[k as usize];
        if z == NO_LOG {
            0
        } else {
            let e = la + z;
            self.exp[(if e >= n { e - n } else { e }) as usize]
        }
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if a == 0 || self.p == 2 {
            return a;
        }
        let n = (self.q - 1) as u32;
        let e = self.log[a as usize] + n / 2;
        self.exp[(if e >= n { e - n } else { e }) as usize]
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = (self.q - 1) as u32;
        let e = self.log[a as usize] + self.log[b as usize];
        self.exp[(if e >= n { e - n } else { e }) as usize]
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a == 0 {
            return None;
        }
        let n = (self.q - 1) as u32;
        let l = self.log[a as usize];
        Some(self.exp[(if l == 0 { 0 } else { n - l }) as usize])
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = (self.q - 1) as u64;
        let l = (self.log[a as usize] as u64 * (e % n)) % n;
        self.exp[l as usize]
    }

    /// Whether `a` is a nonzero square.
    pub fn is_square(&self, a: Elem) -> bool {
        a != 0 && (self.p == 2 || self.log[a as usize] % 2 == 0)
    }

    /// Discrete logarithm to the fixed primitive element.
    pub fn log(&self, a: Elem) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    pub fn primitive_element(&self) -> Elem {
        self.exp[if self.q > 2 { 1 } else { 0 }]
    }

    fn build_tables(&mut self) {
        let n = self.q - 1;
        let g = self.find_primitive();
        self.exp = vec![0; n.max(1)];
        self.log = vec![NO_LOG; self.q];
        let mut cur = 1u32;
        for k in 0..n {
            self.exp[k] = cur;
            self.log[cur as usize] = k as u32;
            cur = self.slow_mul(cur, g);
        }
        self.zech = (0..n)
            .map(|k| {
                let mut d = self.digits(self.exp[k]);
                d[0] = (d[0] + 1) % self.p;
                let s = self.from_digits(&d);
                if s == 0 {
                    NO_LOG
                } else {
                    self.log[s as usize]
                }
            })
            .collect();
    }

    fn slow_mul(&self, a: Elem, b: Elem) -> Elem {
        let prod = poly_mul(&self.digits(a), &self.digits(b), self.p);
        let rem = poly_rem_monic(&prod, &self.monic(), self.p);
        self.from_digits(&rem)
    }

    fn slow_pow(&self, a: Elem, mut e: u64) -> Elem {
        let (mut base, mut acc) = (a, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slow_mul(acc, base);
            }
            base = self.slow_mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn monic(&self) -> Vec<u64> {
        let mut f = self.modulus.clone();
        f.push(1);
        f
    }

    fn find_primitive(&self) -> Elem {
        let n = (self.q - 1) as u64;
        if n <= 1 {
            return 1;
        }
        let primes: Vec<u64> = primes_up_to((n as f64).sqrt() as u64 + 1)
            .into_iter()
            .filter(|&l| n % l == 0)
            .collect();
        let mut ell = primes.clone();
        let mut rest = n;
        for &l in &primes {
            while rest % l == 0 {
                rest /= l;
            }
        }
        if rest > 1 {
            ell.push(rest);
        }
        (1..self.q as u32)
            .find(|&g| ell.iter().all(|&l| self.slow_pow(g, n / l) != 1))
            .expect("multiplicative group is cyclic")
    }
}

fn trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.len() > 1 && *f.last().unwrap() == 0 {
        f.pop();
    }
    f
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(out)
}

/// Remainder modulo a monic polynomial.
fn poly_rem_monic(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let d = f.len() - 1;
    let mut r = a.to_vec();
    while r.len() > d {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let off = r.len() - d;
            for i in 0..d {
                r[off + i] = (r[off + i] + (p - lead) * f[i]) % p;
            }
        }
    }
    r.resize(d.max(1), 0);
    r
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let b = trim(b.to_vec());
    let lead_inv = pow_mod(*b.last().unwrap(), p - 2, p);
    let monic: Vec<u64> = b.iter().map(|&x| x * lead_inv % p).collect();
    let mut r = trim(a.to_vec());
    if r.len() < monic.len() {
        return r;
    }
    r = poly_rem_monic(&r, &monic, p);
    trim(r)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !(b.len() == 1 && b[0] == 0) {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// `x^(p^k) mod f`.
fn frobenius_power_of_x(f: &[u64], p: u64, k: u32) -> Vec<u64> {
    let mut cur = poly_rem_monic(&[0, 1], f, p);
    for _ in 0..k {
        let mut acc = vec![1u64];
        let mut base = cur.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_rem_monic(&poly_mul(&acc, &base, p), f, p);
            }
            base = poly_rem_monic(&poly_mul(&base, &base, p), f, p);
            e >>= 1;
        }
        cur = acc;
    }
    cur
}

fn sub_x(g: &[u64], p: u64) -> Vec<u64> {
    let mut h = g.to_vec();
    if h.len() < 2 {
        h.resize(2, 0);
    }
    h[1] = (h[1] + p - 1) % p;
    trim(h)
}

/// Rabin's irreducibility test for a monic polynomial of degree `r`.
fn is_irreducible(f: &[u64], p: u64, r: u32) -> bool {
    if r == 1 {
        return true;
    }
    if !sub_x(&frobenius_power_of_x(f, p, r), p)
        .iter()
        .all(|&c| c == 0)
    {
        return false;
    }
    primes_up_to(r as u64)
        .into_iter()
        .filter(|&l| r as u64 % l == 0)
        .all(|l| {
            let h = sub_x(&frobenius_power_of_x(f, p, r / l as u32), p);
            let g = poly_gcd(f, &h, p);
            g.len() == 1
        })
}

fn least_irreducible(p: u64, r: u32) -> Vec<u64> {
    let count = p.pow(r);
    for code in 0..count {
        let mut lower = Vec::with_capacity(r as usize);
        let mut c = code;
        for _ in 0..r {
            lower.push(c % p);
            c /= p;
        }
        let mut f = lower.clone();
        f.push(1);
        if is_irreducible(&f, p, r) {
            return lower;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fields() {
        let f2 = FiniteField::new(2, 1).unwrap();
        assert_eq!(f2.elements().count(), 2);
        let f9 = FiniteField::new(3, 2).unwrap();
        assert_eq!(f9.modulus_poly(), &[1, 0]);
        for a in f9.elements().skip(1) {
            assert_eq!(f9.pow(a, 8), 1);
        }
    }

    #[test]
    fn cubes_in_f49() {
        let f = FiniteField::new(7, 2).unwrap();
        let mut cubes: Vec<Elem> = f.elements().skip(1).map(|a| f.pow(a, 3)).collect();
        cubes.sort_unstable();
        cubes.dedup();
        assert_eq!(cubes.len(), 16);
    }

    #[test]
    fn rejects_composite_and_oversized() {
        assert!(matches!(FiniteField::new(9, 1), Err(Error::NotPrime(9))));
        assert!(matches!(FiniteField::new(2, 40), Err(Error::Budget { .. })));
    }

    #[test]
    fn least_modulus_for_f8() {
        // x^3 + x + 1 is the least monic irreducible cubic over F_2.
        assert_eq!(FiniteField::new(2, 3).unwrap().modulus_poly(), &[1, 1, 0]);
    }

    #[test]
    fn table_arithmetic_matches_polynomial_arithmetic() {
        let f = FiniteField::new(5, 3).unwrap();
        for a in (0..125).step_by(7) {
            for b in 0..125 {
                assert_eq!(f.mul(a, b), f.slow_mul(a, b));
                let sum: Vec<u64> = f
                    .digits(a)
                    .iter()
                    .zip(f.digits(b))
                    .map(|(x, y)| (x + y) % 5)
                    .collect();
                assert_eq!(f.add(a, b), f.from_digits(&sum));
            }
        }
    }
}
