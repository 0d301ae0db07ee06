use dcubic::expsum::exp_sum;
use dcubic::form::DiagonalCubicForm;
use dcubic::lfactor::{
    complete_from_power_sums, elementary_from_power_sums, frobenius_data, is_good_prime,
    phi_local_coeffs, power_sums_from_elementary, projective_classes,
};
use dcubic::pointcount::count_points_q;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

proptest! {
    #[test]
    fn newton_identities_round_trip(p in prop::collection::vec(-50i64..50, 1..6)) {
        let p: Vec<BigRational> = p.into_iter().map(|x| BigRational::from_integer(BigInt::from(x))).collect();
        let e = elementary_from_power_sums(&p);
        prop_assert_eq!(power_sums_from_elementary(&e), p.clone());
        // e_2 + h_2 = h_1².
        let h = complete_from_power_sums(&p);
        if p.len() >= 2 {
            prop_assert_eq!(&e[2] + &h[2], &h[1] * &h[1]);
        }
    }
}

/// `λ̃(p)² = λ̃_{∧²}(p) + λ̃_{Sym²}(p)` and the `a_3(p) = 0` identity
/// `S̃_c(p) + λ̃_c(p) + p^{-1/2} λ̃_V(p) = 0` at good primes.
#[test]
fn good_prime_identities() {
    let f = DiagonalCubicForm::fermat(4);
    let e_f = |p: u64| count_points_q(&f, None, p, 1).unwrap().e_tilde;
    for p in [5u64, 7, 11] {
        // Ẽ_F(p) = (−1)^{1+m*} λ̃_V(p) with m* = 1.
        let lambda_v = e_f(p);
        for c in projective_classes(4, p).into_iter().step_by(5) {
            if !is_good_prime(&f, &c, p) {
                continue;
            }
            let fd = frobenius_data(&f, &c, p, 2).unwrap();
            assert!(fd.square_identity_holds());
            let lambda = fd.lambda[0];
            assert!((lambda * lambda - fd.wedge2 - fd.sym2).abs() < 1e-9);
            let s = exp_sum(&f, &c, p).unwrap().normalized;
            let combined = s + lambda + lambda_v / (p as f64).sqrt();
            assert!(combined.abs() < 1e-9, "p={p} c={c:?}: {combined}");
            assert!(phi_local_coeffs(&f, &c, p).unwrap().a3_p.abs() < 1e-6);
        }
    }
}
