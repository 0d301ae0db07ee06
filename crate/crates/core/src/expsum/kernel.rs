//! Evaluation of `Σ*_{a mod n} ∏_i G_i(a)` where
//! `G_i(a) = Σ_{x mod n, x ∈ X} e_n(a F_i x^3 + c_i x)`.
//!
//! A diagonal form makes the inner sum over `x ∈ (Z/n)^m` factor into one
//! complete sum per coordinate, so the cost is `m · n · φ(n)` instead of
//! `φ(n) · n^m`. The float path snaps to the nearest integer; when its error
//! estimate is too large the same sum is redone modulo several primes
//! `P ≡ 1 mod n` and recombined by CRT.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{gcd_u64, is_prime, mul_mod, pow_mod};
use crate::error::Result;

/// Largest accepted snap residual before falling back to exact arithmetic.
pub const SNAP_TOLERANCE: f64 = 1e-4;

/// One coordinate: coefficient `F_i` and linear term `c_i`, both reduced mod `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Coord {
    pub f: u64,
    pub c: u64,
}

/// Which `x` enter the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Domain {
    /// All `x mod n`.
    Full,
    /// `x mod n` with `p ∤ x` (as a tuple), computed as all `x` minus `x ≡ 0 mod p`.
    Primitive { p: u64 },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelOutput {
    pub value: i128,
    pub residual: f64,
    pub exact_path: bool,
}

/// Arithmetic in which the unit sum is accumulated.
trait Ring: Sync {
    type E: Copy + Send + Sync;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn add(&self, a: Self::E, b: Self::E) -> Self::E;
    fn sub(&self, a: Self::E, b: Self::E) -> Self::E;
    fn mul(&self, a: Self::E, b: Self::E) -> Self::E;
    /// `e_n(t)` for `0 <= t < n`.
    fn root(&self, t: usize) -> Self::E;
    fn magnitude(&self, _a: Self::E) -> f64 {
        0.0
    }
}

struct FloatRing {
    table: Vec<(f64, f64)>,
}

impl FloatRing {
    fn new(n: u64) -> Self {
        let table = (0..n)
            .map(|t| {
                let theta = std::f64::consts::TAU * t as f64 / n as f64;
                (theta.cos(), theta.sin())
            })
            .collect();
        Self { table }
    }
}

impl Ring for FloatRing {
    type E = (f64, f64);
    fn zero(&self) -> Self::E {
        (0.0, 0.0)
    }
    fn one(&self) -> Self::E {
        (1.0, 0.0)
    }
    fn add(&self, a: Self::E, b: Self::E) -> Self::E {
        (a.0 + b.0, a.1 + b.1)
    }
    fn sub(&self, a: Self::E, b: Self::E) -> Self::E {
        (a.0 - b.0, a.1 - b.1)
    }
    fn mul(&self, a: Self::E, b: Self::E) -> Self::E {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }
    fn root(&self, t: usize) -> Self::E {
        self.table[t]
    }
    fn magnitude(&self, a: Self::E) -> f64 {
        a.0.hypot(a.1)
    }
}

struct ModRing {
    modulus: u64,
    table: Vec<u64>,
}

impl ModRing {
    fn new(modulus: u64, w: u64, n: u64) -> Self {
        let mut table = Vec::with_capacity(n as usize);
        let mut acc = 1u64;
        for _ in 0..n {
            table.push(acc);
            acc = mul_mod(acc, w, modulus);
        }
        Self { modulus, table }
    }
}

impl Ring for ModRing {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.modulus)
    }
    fn root(&self, t: usize) -> u64 {
        self.table[t]
    }
}

/// Per-coordinate data shared by every `a`: `x^3` and `x` over the domain.
struct Prepared {
    n: u64,
    cubes: Vec<u64>,
    /// Cubes of `x = p y` for the primitive correction, if any.
    cubes_zero: Option<(Vec<u64>, Vec<u64>)>,
}

impl Prepared {
    fn new(n: u64, domain: Domain) -> Self {
        let cube = |x: u64| mul_mod(mul_mod(x, x, n), x, n);
        let cubes = (0..n).map(cube).collect();
        let cubes_zero = match domain {
            Domain::Full => None,
            Domain::Primitive { p } => {
                let xs: Vec<u64> = (0..n).step_by(p as usize).collect();
                Some((xs.iter().map(|&x| cube(x)).collect(), xs))
            }
        };
        Self {
            n,
            cubes,
            cubes_zero,
        }
    }
}

/// `Σ_x e_n(A x^3 + c x)` over the listed `x` (given with their cubes).
fn coordinate_sum<R: Ring>(
    ring: &R,
    n: u64,
    a_f: u64,
    c: u64,
    cubes: &[u64],
    xs: Option<&[u64]>,
) -> R::E {
    let mut acc = ring.zero();
    match xs {
        None => {
            // x runs over 0..n; the linear phase advances by c each step.
            let mut lin = 0u64;
            for &x3 in cubes {
                let t = (mul_mod(a_f, x3, n) + lin) % n;
                acc = ring.add(acc, ring.root(t as usize));
                lin += c;
                if lin >= n {
                    lin -= n;
                }
            }
        }
        Some(xs) => {
            for (&x3, &x) in cubes.iter().zip(xs) {
                let t = (mul_mod(a_f, x3, n) + mul_mod(c, x, n)) % n;
                acc = ring.add(acc, ring.root(t as usize));
            }
        }
    }
    acc
}

/// Contribution of a single unit `a`, plus its magnitude for error control.
fn unit_term<R: Ring>(ring: &R, prep: &Prepared, coords: &[Coord], a: u64) -> (R::E, f64) {
    let n = prep.n;
    let mut cache: Vec<(Coord, R::E, R::E)> = Vec::with_capacity(coords.len());
    let mut full = ring.one();
    let mut zero_part = ring.one();
    let mut mag = 1.0;
    for &co in coords {
        let (g, g0) = if let Some(&(_, g, g0)) = cache.iter().find(|(k, _, _)| *k == co) {
            (g, g0)
        } else {
            let a_f = mul_mod(a, co.f, n);
            let g = coordinate_sum(ring, n, a_f, co.c, &prep.cubes, None);
            let g0 = match &prep.cubes_zero {
                Some((c3, xs)) => coordinate_sum(ring, n, a_f, co.c, c3, Some(xs)),
                None => ring.zero(),
            };
            cache.push((co, g, g0));
            (g, g0)
        };
        full = ring.mul(full, g);
        mag *= ring.magnitude(g).max(1.0);
        if prep.cubes_zero.is_some() {
            zero_part = ring.mul(zero_part, g0);
        }
    }
    if prep.cubes_zero.is_some() {
        (ring.sub(full, zero_part), 2.0 * mag)
    } else {
        (full, mag)
    }
}

fn units(n: u64) -> Vec<u64> {
    (1..=n)
        .map(|a| a % n)
        .filter(|&a| gcd_u64(a, n) == 1)
        .collect()
}

fn sum_over_units<R: Ring>(
    ring: &R,
    prep: &Prepared,
    coords: &[Coord],
    units: &[u64],
) -> (R::E, f64) {
    // Fixed-size chunks merged in order keep the float result independent of
    // the worker count.
    units
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = ring.zero();
            let mut mag = 0.0;
            for &a in chunk {
                let (t, m) = unit_term(ring, prep, coords, a);
                acc = ring.add(acc, t);
                mag += m;
            }
            (acc, mag)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((ring.zero(), 0.0), |(a, m), (b, mb)| {
            (ring.add(a, b), m + mb)
        })
}

/// Primes `P ≡ 1 mod n` below `2^62`, largest first, with a primitive `n`-th root of unity.
fn ntt_primes(n: u64, count: usize) -> Vec<(u64, u64)> {
    let n_primes: Vec<u64> = crate::arith::factor(n as i64)
        .expect("modulus within trial bound")
        .factors
        .iter()
        .map(|&(q, _)| q)
        .collect();
    let mut out = Vec::with_capacity(count);
    let mut k = ((1u64 << 62) - 1) / n;
    while out.len() < count && k > 0 {
        let cand = k * n + 1;
        k -= 1;
        if !is_prime(cand) {
            continue;
        }
        let e = (cand - 1) / n;
        let w = (2..)
            .map(|h| pow_mod(h, e, cand))
            .find(|&w| n_primes.iter().all(|&q| pow_mod(w, n / q, cand) != 1));
        out.push((cand, w.expect("a generator exists")));
    }
    out
}

fn exact_sum(n: u64, prep: &Prepared, coords: &[Coord], units: &[u64]) -> i128 {
    // |S| <= 2 φ(n) n^m; keep a factor 4 of headroom for the sign.
    let bound_bits =
        (units.len().max(1) as f64).log2() + coords.len() as f64 * (n as f64).log2() + 4.0;
    let count = (bound_bits / 61.0).ceil() as usize;
    let mut modulus = BigInt::one();
    let mut value = BigInt::zero();
    for (p, w) in ntt_primes(n, count.max(1)) {
        let ring = ModRing::new(p, w, n);
        let (r, _) = sum_over_units(&ring, prep, coords, units);
        // CRT: value ≡ old mod modulus, value ≡ r mod p.
        let pb = BigInt::from(p);
        let diff = (BigInt::from(r) - &value).mod_floor(&pb);
        let inv = modulus.clone().mod_floor(&pb).modpow(&(&pb - 2u32), &pb);
        let t = (diff * inv).mod_floor(&pb);
        value += &modulus * t;
        modulus *= pb;
    }
    let half: BigInt = &modulus >> 1;
    if value > half {
        value -= &modulus;
    }
    value.to_i128().expect("exponential sum fits in i128")
}

/// Work estimate in coordinate-sum steps.
pub(crate) fn cost(n: u64, m: usize) -> u128 {
    m as u128 * n as u128 * n as u128
}

pub(crate) fn evaluate(
    n: u64,
    coords: &[Coord],
    domain: Domain,
    force_exact: bool,
) -> Result<KernelOutput> {
    if n == 1 {
        return Ok(KernelOutput {
            value: 1 - matches!(domain, Domain::Primitive { .. }) as i128,
            residual: 0.0,
            exact_path: true,
        });
    }
    let prep = Prepared::new(n, domain);
    let units = units(n);
    if !force_exact {
        let ring = FloatRing::new(n);
        let ((re, im), mag) = sum_over_units(&ring, &prep, coords, &units);
        let snapped = re.round();
        let residual = (re - snapped).abs().max(im.abs());
        let error_estimate = 1e-15 * mag * (n as f64).sqrt() * (coords.len() as f64 + 1.0);
        if residual < SNAP_TOLERANCE && error_estimate < 0.05 && snapped.abs() < 1e30 {
            return Ok(KernelOutput {
                value: snapped as i128,
                residual,
                exact_path: false,
            });
        }
        return Ok(KernelOutput {
            value: exact_sum(n, &prep, coords, &units),
            residual,
            exact_path: true,
        });
    }
    Ok(KernelOutput {
        value: exact_sum(n, &prep, coords, &units),
        residual: 0.0,
        exact_path: true,
    })
}
