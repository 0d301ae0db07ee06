//! Cubic threefolds containing the line `L = {x_1 = x_2 = x_3 = 0}`, written as
//!
//! `C = f + 2 q_1 x_4 + 2 q_2 x_5 + l_1 x_4^2 + 2 l_2 x_4 x_5 + l_3 x_5^2`
//!
//! with `f, q_i, l_j` ternary forms in `x' = (x_1, x_2, x_3)`, and their point
//! counts through the conic bundle obtained by projecting from `L`. The plane
//! spanned by `L` and `[x']` meets `X` in `L` plus the conic with matrix
//!
//! ```text
//! M(x') = | f   q_1 q_2 |
//!         | q_1 l_1 l_2 |
//!         | q_2 l_2 l_3 |
//! ```
//!
//! Summing conic point counts over `P^2` gives
//! `#X − #P^3 = −q^2 N_0 + q Σ_{x' ∈ Γ} (−1 + #lines)`, where `Γ = {det M = 0}`
//! and `N_0` counts the points of `L` where `l_1 x_4^2 + 2 l_2 x_4 x_5 + l_3 x_5^2`
//! vanishes identically in `x'` (the singular points of `X` on `L`).
//!
//! Coefficients live in the prime field `F_p`; counts may be taken over any
//! `F_{p^r}`.

use serde::{Deserialize, Serialize};

use crate::arith::field::Elem;
use crate::arith::{is_prime, FiniteField};
use crate::error::{precondition, Error, Result};
use crate::rng::SeededRng;

/// A homogeneous ternary form with coefficients in `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TernaryForm {
    pub terms: Vec<([u8; 3], u64)>,
}

impl TernaryForm {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn monomial(exps: [u8; 3], coeff: u64) -> Self {
        Self {
            terms: vec![(exps, coeff)],
        }
    }

    pub fn from_terms(terms: &[([u8; 3], i64)], p: u64) -> Self {
        Self {
            terms: terms
                .iter()
                .map(|&(e, c)| (e, c.rem_euclid(p as i64) as u64))
                .filter(|&(_, c)| c != 0)
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0)
    }

    pub fn eval(&self, field: &FiniteField, x: &[Elem; 3]) -> Elem {
        self.terms.iter().fold(0, |acc, &(e, c)| {
            let mut t = field.from_int(c as i64);
            for k in 0..3 {
                t = field.mul(t, field.pow(x[k], e[k] as u64));
            }
            field.add(acc, t)
        })
    }

    fn random(degree: u8, p: u64, rng: &mut SeededRng) -> Self {
        let mut terms = Vec::new();
        for a in 0..=degree {
            for b in 0..=degree - a {
                let coeff = rng.below(p);
                if coeff != 0 {
                    terms.push(([a, b, degree - a - b], coeff));
                }
            }
        }
        Self { terms }
    }
}

/// Values of the six coefficient forms at one point `x'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConicValues {
    pub f: Elem,
    pub q1: Elem,
    pub q2: Elem,
    pub l1: Elem,
    pub l2: Elem,
    pub l3: Elem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingType {
    TwoKLines,
    DoubleLine,
    ConjugateLines,
}

impl SplittingType {
    /// Number of distinct lines defined over the base field.
    pub fn k_lines(self) -> i128 {
        match self {
            SplittingType::TwoKLines => 2,
            SplittingType::DoubleLine => 1,
            SplittingType::ConjugateLines => 0,
        }
    }
}

/// Splitting type of a degenerate conic from the principal minors
/// `δ = (l_1 l_3 − l_2^2, f l_3 − q_2^2, f l_1 − q_1^2)`: a double line when
/// `δ = 0`, two rational lines when every `−δ_i` is a square or zero, and a
/// conjugate pair otherwise. In characteristic 2 every such conic is a double line.
pub fn conic_splitting_type(field: &FiniteField, v: ConicValues) -> Result<SplittingType> {
    if field.characteristic() == 2 {
        return Ok(SplittingType::DoubleLine);
    }
    if det(field, v) != 0 {
        return precondition("det M(x') is nonzero: the conic is smooth");
    }
    let m = |a, b| field.mul(a, b);
    let delta = [
        field.sub(m(v.l1, v.l3), m(v.l2, v.l2)),
        field.sub(m(v.f, v.l3), m(v.q2, v.q2)),
        field.sub(m(v.f, v.l1), m(v.q1, v.q1)),
    ];
    if delta.iter().all(|&d| d == 0) {
        return Ok(SplittingType::DoubleLine);
    }
    if delta
        .iter()
        .all(|&d| d == 0 || field.is_square(field.neg(d)))
    {
        Ok(SplittingType::TwoKLines)
    } else {
        Ok(SplittingType::ConjugateLines)
    }
}

/// `det M = f δ_1 − q_1 (q_1 l_3 − q_2 l_2) + q_2 (q_1 l_2 − q_2 l_1)`.
fn det(field: &FiniteField, v: ConicValues) -> Elem {
    let m = |a, b| field.mul(a, b);
    let d1 = field.sub(m(v.l1, v.l3), m(v.l2, v.l2));
    let t1 = m(v.f, d1);
    let t2 = m(v.q1, field.sub(m(v.q1, v.l3), m(v.q2, v.l2)));
    let t3 = m(v.q2, field.sub(m(v.q1, v.l2), m(v.q2, v.l1)));
    field.add(field.sub(t1, t2), t3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceMode {
    Generic,
    /// `l_1 = 0`: at least one singular point on `L`.
    L1Zero,
    /// `l_1 = l_3 = 0`, `l_2 ≠ 0`: singular points at `x_4 x_5 = 0` on `L`.
    L1L3Zero,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicBundleInput {
    pub p: u64,
    pub f: TernaryForm,
    pub q1: TernaryForm,
    pub q2: TernaryForm,
    pub l1: TernaryForm,
    pub l2: TernaryForm,
    pub l3: TernaryForm,
}

/// All projective points of `P^{n-1}` over `field`, first nonzero coordinate 1.
fn projective_points<const N: usize>(field: &FiniteField) -> Vec<[Elem; N]> {
    let q = field.size() as Elem;
    let mut out = Vec::new();
    for lead in 0..N {
        let mut x = [0 as Elem; N];
        x[lead] = 1;
        loop {
            out.push(x);
            let mut j = lead + 1;
            loop {
                if j == N {
                    break;
                }
                x[j] += 1;
                if x[j] < q {
                    break;
                }
                x[j] = 0;
                j += 1;
            }
            if j == N {
                break;
            }
        }
    }
    out
}

impl ConicBundleInput {
    /// The diagonal threefold `Σ_{i<=5} x_i^3` after the substitution
    /// `x_1 → x_1 − x_4`, `x_2 → x_2 − x_5`, which contains `L`. Smooth for `p ∤ 6`.
    pub fn fermat_instance(p: u64) -> Result<Self> {
        if !is_prime(p) || p <= 3 {
            return precondition("the Fermat instance needs a prime p >= 5");
        }
        let half = (p as i64 + 1) / 2;
        let t = |terms: &[([u8; 3], i64)]| TernaryForm::from_terms(terms, p);
        Ok(Self {
            p,
            f: t(&[([3, 0, 0], 1), ([0, 3, 0], 1), ([0, 0, 3], 1)]),
            q1: t(&[([2, 0, 0], -3 * half)]),
            q2: t(&[([0, 2, 0], -3 * half)]),
            l1: t(&[([1, 0, 0], 3)]),
            l2: TernaryForm::zero(),
            l3: t(&[([0, 1, 0], 3)]),
        })
    }

    /// Seeded random instance of the given shape, redrawn until no plane
    /// through `L` lies on `X` over `F_p` and `F_{p^2}`.
    pub fn random(p: u64, mode: InstanceMode, rng: &mut SeededRng) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        for _ in 0..10_000 {
            let mut x = Self {
                p,
                f: TernaryForm::random(3, p, rng),
                q1: TernaryForm::random(2, p, rng),
                q2: TernaryForm::random(2, p, rng),
                l1: TernaryForm::random(1, p, rng),
                l2: TernaryForm::random(1, p, rng),
                l3: TernaryForm::random(1, p, rng),
            };
            match mode {
                InstanceMode::Generic => {}
                InstanceMode::L1Zero => x.l1 = TernaryForm::zero(),
                InstanceMode::L1L3Zero => {
                    x.l1 = TernaryForm::zero();
                    x.l3 = TernaryForm::zero();
                    if x.l2.is_zero() {
                        continue;
                    }
                }
            }
            if x.is_plane_free()? {
                return Ok(x);
            }
        }
        precondition("no plane-free instance found")
    }

    fn values(&self, field: &FiniteField, x: &[Elem; 3]) -> ConicValues {
        ConicValues {
            f: self.f.eval(field, x),
            q1: self.q1.eval(field, x),
            q2: self.q2.eval(field, x),
            l1: self.l1.eval(field, x),
            l2: self.l2.eval(field, x),
            l3: self.l3.eval(field, x),
        }
    }

    /// Whether no plane through `L` lies on `X`, tested over `F_p` and `F_{p^2}`
    /// (a heuristic stand-in for the algebraic closure).
    pub fn is_plane_free(&self) -> Result<bool> {
        for r in [1, 2] {
            let field = FiniteField::new(self.p, r)?;
            let two_zero = self.p == 2;
            for x in projective_points::<3>(&field) {
                let v = self.values(&field, &x);
                let vanishes = v.f == 0
                    && v.l1 == 0
                    && v.l3 == 0
                    && (two_zero || (v.q1 == 0 && v.q2 == 0 && v.l2 == 0));
                if vanishes {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn eval(&self, field: &FiniteField, x: &[Elem; 5]) -> Elem {
        let xp = [x[0], x[1], x[2]];
        let v = self.values(field, &xp);
        let two = field.from_int(2);
        let m = |a, b| field.mul(a, b);
        let terms = [
            v.f,
            m(two, m(v.q1, x[3])),
            m(two, m(v.q2, x[4])),
            m(v.l1, m(x[3], x[3])),
            m(two, m(v.l2, m(x[3], x[4]))),
            m(v.l3, m(x[4], x[4])),
        ];
        terms.into_iter().fold(0, |a, b| field.add(a, b))
    }

    /// Singular points of `X` on `L`: `[x_4 : x_5]` where the quadratic part
    /// vanishes for every `x'`.
    pub fn singular_points_on_line(&self, field: &FiniteField) -> usize {
        let two = field.from_int(2);
        let basis = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        projective_points::<2>(field)
            .into_iter()
            .filter(|y| {
                basis.iter().all(|e| {
                    let v = self.values(field, e);
                    let m = |a, b| field.mul(a, b);
                    let s = field.add(
                        field.add(m(v.l1, m(y[0], y[0])), m(two, m(v.l2, m(y[0], y[1])))),
                        m(v.l3, m(y[1], y[1])),
                    );
                    s == 0
                })
            })
            .count()
    }
}

/// `#X(F_{p^r}) − #P^3(F_{p^r})` from the conic bundle formula.
pub fn conic_bundle_count(x: &ConicBundleInput, r: u32) -> Result<i128> {
    let field = FiniteField::new(x.p, r)?;
    let q = field.size() as i128;
    let n0 = x.singular_points_on_line(&field) as i128;
    let mut gamma_sum = 0i128;
    if x.p != 2 {
        for xp in projective_points::<3>(&field) {
            let v = x.values(&field, &xp);
            if det(&field, v) == 0 {
                gamma_sum += conic_splitting_type(&field, v)?.k_lines() - 1;
            }
        }
    }
    Ok(-q * q * n0 + q * gamma_sum)
}

/// `#X(F_{p^r}) − #P^3(F_{p^r})` by enumerating `P^4`.
pub fn conic_bundle_count_brute(x: &ConicBundleInput, r: u32) -> Result<i128> {
    let field = FiniteField::new(x.p, r)?;
    let q = field.size() as i128;
    let count = projective_points::<5>(&field)
        .iter()
        .filter(|pt| x.eval(&field, pt) == 0)
        .count() as i128;
    Ok(count - (q * q * q + q * q + q + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fermat_instance_matches_brute_force() {
        for p in [5u64, 7] {
            let x = ConicBundleInput::fermat_instance(p).unwrap();
            assert!(x.is_plane_free().unwrap());
            assert_eq!(
                x.singular_points_on_line(&FiniteField::new(p, 1).unwrap()),
                0
            );
            assert_eq!(
                conic_bundle_count(&x, 1).unwrap(),
                conic_bundle_count_brute(&x, 1).unwrap()
            );
        }
    }

    #[test]
    fn splitting_examples() {
        let f7 = FiniteField::new(7, 1).unwrap();
        let zero = ConicValues {
            f: 0,
            q1: 0,
            q2: 0,
            l1: 0,
            l2: 0,
            l3: 0,
        };
        assert_eq!(
            conic_splitting_type(&f7, ConicValues { f: 1, ..zero }).unwrap(),
            SplittingType::DoubleLine
        );
        // x_4 x_5 over F_5: l_2 = 1 gives δ_1 = −1, a square mod 5.
        let f5 = FiniteField::new(5, 1).unwrap();
        assert_eq!(
            conic_splitting_type(&f5, ConicValues { l2: 1, ..zero }).unwrap(),
            SplittingType::TwoKLines
        );
        // x_4^2 + x_5^2 over F_7: δ_1 = 1 and −1 is not a square mod 7.
        assert_eq!(
            conic_splitting_type(
                &f7,
                ConicValues {
                    l1: 1,
                    l3: 1,
                    ..zero
                }
            )
            .unwrap(),
            SplittingType::ConjugateLines
        );
        assert!(conic_splitting_type(
            &f7,
            ConicValues {
                f: 1,
                l1: 1,
                l3: 1,
                ..zero
            }
        )
        .is_err());
    }

    #[test]
    fn random_instances_match_brute_force() {
        let mut rng = SeededRng::new(11);
        for p in [2u64, 3, 5] {
            for mode in [
                InstanceMode::Generic,
                InstanceMode::L1Zero,
                InstanceMode::L1L3Zero,
            ] {
                if p == 2 && mode == InstanceMode::L1L3Zero {
                    continue;
                }
                let x = ConicBundleInput::random(p, mode, &mut rng).unwrap();
                assert_eq!(
                    conic_bundle_count(&x, 1).unwrap(),
                    conic_bundle_count_brute(&x, 1).unwrap()
                );
            }
        }
    }
}
