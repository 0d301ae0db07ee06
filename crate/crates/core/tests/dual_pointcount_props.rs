use dcubic::dual::dual_form_value;
use dcubic::form::DiagonalCubicForm;
use dcubic::lfactor::{dim_middle, is_good_prime, projective_classes};
use dcubic::pointcount::{count_points_q, galkin_shinder_lines, singular_locus};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(prop_oneof![1i64..=5, -5i64..=-1], 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_form_is_homogeneous(fc in coeffs(), c in prop::collection::vec(-6i64..=6, 4), lambda in prop::sample::select(vec![-2i64, -1, 2, 3])) {
        prop_assume!(c.iter().all(|&x| x != 0));
        let f = DiagonalCubicForm::new(fc).unwrap();
        let base = dual_form_value(&f, &c, None).value;
        let scaled: Vec<i64> = c.iter().map(|x| x * lambda).collect();
        let expected = base * BigRational::from_integer(BigInt::from(lambda).pow(3 * (1 << (f.m() - 2))));
        prop_assert_eq!(dual_form_value(&f, &scaled, None).value, expected);
    }

    #[test]
    fn dual_form_is_permutation_symmetric(fc in coeffs(), c in prop::collection::vec(-6i64..=6, 4), perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
        let f = DiagonalCubicForm::new(fc.clone()).unwrap();
        let g = DiagonalCubicForm::new(perm.iter().map(|&i| fc[i]).collect()).unwrap();
        let d: Vec<i64> = perm.iter().map(|&i| c[i]).collect();
        prop_assert_eq!(dual_form_value(&f, &c, None).value, dual_form_value(&g, &d, None).value);
    }
}

/// A vanishing dual form means a singular section, visible modulo every prime.
#[test]
fn vanishing_dual_form_means_singular_mod_p() {
    let f = DiagonalCubicForm::fermat(4);
    let mut zeros = 0;
    for c in [
        [1i64, 1, 1, 1],
        [1, -1, 0, 0],
        [1, 1, 0, 0],
        [4, 1, 1, 1],
        [2, 2, 2, 2],
    ] {
        if !dual_form_value(&f, &c, None)
            .value
            .eq(&BigRational::from_integer(0.into()))
        {
            continue;
        }
        zeros += 1;
        for p in [5u64, 7, 11, 13] {
            assert!(
                !singular_locus(&f, &c, p, 1).unwrap().points.is_empty(),
                "c={c:?} p={p}"
            );
        }
    }
    assert!(zeros >= 3);
}

/// `|Ẽ_c(p)| <= dim_middle(m)` at good primes.
#[test]
fn weil_bound_on_sections() {
    for m in [4usize, 6] {
        let f = DiagonalCubicForm::fermat(m);
        let bound = dim_middle(m).unwrap() as f64;
        let primes: &[u64] = if m == 4 { &[5, 7, 11, 13] } else { &[5, 7] };
        for &p in primes {
            for c in projective_classes(m, p).into_iter().step_by(7) {
                if !is_good_prime(&f, &c, p) {
                    continue;
                }
                let e = count_points_q(&f, Some(&c), p, 1).unwrap().e_tilde;
                assert!(e.abs() <= bound + 1e-9, "m={m} p={p} c={c:?}: {e}");
            }
        }
    }
}

#[test]
fn fano_line_counts_are_nonnegative_integers() {
    let f = DiagonalCubicForm::fermat(5);
    for p in [5u64, 7] {
        assert!(
            galkin_shinder_lines(&f, p)
                .unwrap()
                .is_nonnegative_integer(),
            "p={p}"
        );
    }
}
