use dcubic::cubes::{cone_count, cone_volume, r3_table, sigma_p, six_cube_zeros};
use dcubic::form::DiagonalCubicForm;
use dcubic::sieve::{
    squarefull_stats, univariate_root_count, zero_density_check, IntPoly, RootMethod, SampleMode,
};
use proptest::prelude::*;

#[test]
fn r3_sums_count_the_cone() {
    for b in [1u64, 10, 100, 1000, 50_000] {
        let table = r3_table(b).unwrap();
        // The origin is a lattice point of the cone.
        let total: u64 = table.iter().map(|&x| x as u64).sum();
        assert_eq!(total, cone_count(b), "B={b}");
    }
}

#[test]
fn cone_volume_is_gamma_four_thirds_cubed() {
    let closed = statrs::function::gamma::gamma(4.0 / 3.0).powi(3);
    assert!((cone_volume().unwrap() - closed).abs() < 1e-9);
}

/// `Σ_{a <= B} r3(a)² <= #{x ∈ Z^6 : Σ x_i³ = 0, |x| <= B^{1/3}}`.
#[test]
fn diophantine_sandwich() {
    for b in [100u64, 1000, 10_000] {
        let table = r3_table(b).unwrap();
        let second: u64 = table.iter().skip(1).map(|&x| (x as u64).pow(2)).sum();
        let t = (b as f64).cbrt().floor() as u64;
        assert!(second <= six_cube_zeros(t).unwrap(), "B={b}");
    }
}

#[test]
fn densities_are_flat_away_from_three_a() {
    for p in [5u64, 7, 11] {
        for a in [1i64, 2, 4, 10] {
            if (3 * a) % p as i64 == 0 {
                continue;
            }
            let prof = sigma_p(a, p, 4).unwrap();
            assert!(
                prof.densities.windows(2).all(|w| w[0] == w[1]),
                "a={a} p={p}"
            );
            assert_eq!(prof.stable_from, Some(1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifting_matches_enumeration(
        coeffs in prop::collection::vec(-9i64..=9, 2..6),
        p in prop::sample::select(vec![2u64, 3, 5, 7]),
    ) {
        let f = IntPoly(coeffs);
        prop_assume!(f.degree().is_some_and(|d| d >= 1));
        let l_max = (12.0 / (p as f64).log2()).floor() as u32;
        let rows = zero_density_check(&f, p, l_max, 1_000_000).unwrap();
        for r in &rows {
            prop_assert_eq!(r.brute, Some(r.hensel));
            prop_assert!(r.fan_out_ok);
        }
    }

    #[test]
    fn root_counts_fan_out_by_at_most_p(
        coeffs in prop::collection::vec(-20i64..=20, 3..6),
        p in prop::sample::select(vec![2u64, 3, 5]),
    ) {
        let f = IntPoly(coeffs);
        prop_assume!(f.degree().is_some_and(|d| d >= 1));
        let mut prev = univariate_root_count(&f, p, 1, RootMethod::Hensel).unwrap();
        for l in 2..=8 {
            let next = univariate_root_count(&f, p, l, RootMethod::Hensel).unwrap();
            prop_assert!(next <= p * prev);
            prev = next;
        }
    }
}

/// Sampled frequencies sit within their 95% interval of the exhaustive ones,
/// for most rows (about one in twenty may miss).
#[test]
fn sampling_is_unbiased() {
    let f = DiagonalCubicForm::fermat(4);
    let qs = [4u64, 16, 64, 256, 1024];
    let exact = squarefull_stats(&f, 8, &qs, SampleMode::Exhaustive).unwrap();
    let mut misses = 0;
    for seed in 0..4 {
        let sampled = squarefull_stats(
            &f,
            8,
            &qs,
            SampleMode::Sampled {
                seed,
                samples: 20_000,
            },
        )
        .unwrap();
        for (e, s) in exact.rows.iter().zip(&sampled.rows) {
            if (e.frequency - s.frequency).abs() > s.ci_halfwidth {
                misses += 1;
            }
        }
    }
    assert!(misses <= 3, "{misses} of 20 rows outside the interval");
}
