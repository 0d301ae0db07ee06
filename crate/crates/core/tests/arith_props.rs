use dcubic::arith::{factor, gcd_u64, ipow, is_prime, primes_up_to, ramanujan_sum, FiniteField};
use proptest::prelude::*;

proptest! {
    #[test]
    fn factorization_recomposes(n in 1i64..=10_000_000_000) {
        let f = factor(n).unwrap();
        prop_assert_eq!(f.recompose(), n.unsigned_abs());
        prop_assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(f.factors.iter().all(|&(p, e)| e >= 1 && is_prime(p)));
    }

    #[test]
    fn negative_values_factor_like_their_absolute_value(n in 2i64..1_000_000) {
        prop_assert_eq!(factor(-n).unwrap().factors, factor(n).unwrap().factors);
    }
}

#[test]
fn ramanujan_sums_are_multiplicative_up_to_100() {
    for n1 in 1u64..=100 {
        for n2 in 1..=100 / n1 {
            if gcd_u64(n1, n2) != 1 {
                continue;
            }
            for t in -12i64..=12 {
                assert_eq!(
                    ramanujan_sum(n1 * n2, t),
                    ramanujan_sum(n1, t) * ramanujan_sum(n2, t),
                    "n1={n1} n2={n2} t={t}"
                );
            }
        }
    }
}

/// Every field with `q <= 2^12`: Frobenius is a ring endomorphism. It is the
/// identity on prime fields, which is checked pointwise there.
#[test]
fn frobenius_is_an_endomorphism() {
    for p in primes_up_to(4096) {
        let mut r = 1;
        while ipow(p, r) <= 4096 {
            let k = FiniteField::new(p, r).unwrap();
            let frob = |x| k.pow(x, p);
            let elems: Vec<_> = k.elements().collect();
            if r == 1 {
                assert!(elems.iter().all(|&x| frob(x) == x), "p={p}");
            } else {
                for &x in &elems {
                    let fx = frob(x);
                    for &y in &elems {
                        assert_eq!(frob(k.add(x, y)), k.add(fx, frob(y)));
                        assert_eq!(frob(k.mul(x, y)), k.mul(fx, frob(y)));
                    }
                }
            }
            r += 1;
        }
    }
}
