//! Verification suites. Each suite yields one record with its counts and a
//! pass flag.

use anyhow::Result;
use rayon::prelude::*;
use serde_json::{json, Value};

use dcubic::arith::primes_up_to;
use dcubic::cubes::{cone_check, sigma1_double_count, singular_series};
use dcubic::delta::{verify_decay, CuspidalNu, DecayConfig, SmoothWeight};
use dcubic::expsum::{
    exp_sum, exp_sum_prime_restricted, exp_sum_structural, exp_sum_with, reduction_difference,
    ExpSumOptions, Method,
};
use dcubic::form::{v_p, DiagonalCubicForm};
use dcubic::lfactor::{is_good_prime, locav_incidence_check};
use dcubic::pointcount::{
    conic_bundle_count, conic_bundle_count_brute, count_points_q, ConicBundleInput, InstanceMode,
};
use dcubic::rng::SeededRng;
use dcubic::sieve::{
    b3_second_moment, default_squarefull_grid, squarefull_stats, SampleMode, DEFAULT_B3_GRID,
};

use crate::run::Recorder;
use crate::{Params, Suite};

const ALL: [Suite; 7] = [
    Suite::ExactIdentities,
    Suite::StructuralExpsum,
    Suite::Locav,
    Suite::ConicBundle,
    Suite::DeltaDecay,
    Suite::Variance,
    Suite::SieveTrends,
];

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::ExactIdentities => "exact-identities",
        Suite::StructuralExpsum => "structural-expsum",
        Suite::Locav => "locav",
        Suite::ConicBundle => "conic-bundle",
        Suite::DeltaDecay => "delta-decay",
        Suite::Variance => "variance",
        Suite::SieveTrends => "sieve-trends",
    }
}

/// All tuples in `[lo, hi]^m`.
fn box_tuples(m: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let side = (hi - lo + 1) as u64;
    (0..side.pow(m as u32))
        .map(|mut i| {
            (0..m)
                .map(|_| {
                    let d = (i % side) as i64;
                    i /= side;
                    lo + d
                })
                .collect()
        })
        .collect()
}

/// `S_c(p) = p² E_c(p) − p E_F(p)` for every nonzero `c mod p`, and
/// `S_c(p²) = S_c(p³) = 0` on a box of `c` with `p ∤ F^∨(c)`.
fn exact_identities(m: usize, pmax: u64) -> dcubic::Result<(Value, bool)> {
    let f = DiagonalCubicForm::fermat(m);
    let mut first_order = 0usize;
    let mut first_order_failures = 0usize;
    let mut vanishing = 0usize;
    let mut vanishing_failures = 0usize;
    for p in primes_up_to(pmax) {
        let e_f = count_points_q(&f, None, p, 1)?.e;
        let pi = p as i128;
        let cs: Vec<Vec<i64>> = box_tuples(m, 0, p as i64 - 1)
            .into_iter()
            .filter(|c| c.iter().any(|&x| x != 0))
            .collect();
        let bad = cs
            .par_iter()
            .map(|c| -> dcubic::Result<bool> {
                let s = exp_sum(&f, c, p)?.value;
                Ok(s != pi * pi * count_points_q(&f, Some(c), p, 1)?.e - pi * e_f)
            })
            .collect::<dcubic::Result<Vec<bool>>>()?;
        first_order += cs.len();
        first_order_failures += bad.iter().filter(|&&b| b).count();
        if p > 7 {
            continue;
        }
        let good: Vec<Vec<i64>> = box_tuples(m, -2, 2)
            .into_iter()
            .filter(|c| is_good_prime(&f, c, p))
            .collect();
        let bad = good
            .par_iter()
            .map(|c| -> dcubic::Result<usize> {
                let mut n = 0;
                for l in [2, 3] {
                    n += usize::from(exp_sum(&f, c, p.pow(l))?.value != 0);
                }
                Ok(n)
            })
            .collect::<dcubic::Result<Vec<usize>>>()?;
        vanishing += 2 * good.len();
        vanishing_failures += bad.iter().sum::<usize>();
    }
    let pass = first_order_failures == 0 && vanishing_failures == 0;
    Ok((
        json!({
            "first_order_checked": first_order,
            "first_order_failures": first_order_failures,
            "vanishing_checked": vanishing,
            "vanishing_failures": vanishing_failures,
        }),
        pass,
    ))
}

/// Structural `S'` against direct evaluation, and `S − S'` against the
/// reduction formula, on seeded `(c, p, l, d)`.
fn structural_expsum(m: usize, seed: u64, samples: usize) -> dcubic::Result<(Value, bool)> {
    let f = DiagonalCubicForm::fermat(m);
    let mut rng = SeededRng::new(seed);
    let brute = ExpSumOptions {
        method: Method::Brute,
        ..ExpSumOptions::default()
    };
    let levels: &[(u64, u32)] = if m <= 4 {
        &[(2, 6), (3, 5), (5, 4), (7, 3)]
    } else {
        &[(2, 4), (3, 3), (5, 2)]
    };
    let mut checked = 0usize;
    let mut failures = Vec::new();
    while checked < samples {
        let (p, l_max) = levels[rng.below(levels.len() as u64) as usize];
        let l = 2 + rng.below(l_max as u64 - 1) as u32;
        let scale = p.pow(rng.below(2) as u32) as i64;
        let c: Vec<i64> = (0..m).map(|_| scale * rng.int_in(-30, 30)).collect();
        let Some(v) = c
            .iter()
            .filter(|&&x| x != 0)
            .filter_map(|&x| v_p(p, x as i128))
            .min()
        else {
            continue;
        };
        if 2 * (1 + v) > l {
            continue;
        }
        let d = 1 + v + rng.below((l / 2 - v) as u64) as u32;
        let restricted = exp_sum_prime_restricted(&f, &c, p, l)?;
        let structural = exp_sum_structural(&f, &c, p, l, d)?;
        let full = exp_sum_with(&f, &c, p.pow(l), brute)?.value;
        let reduction = reduction_difference(&f, &c, p, l, brute)?;
        if structural != restricted || full - restricted != reduction {
            failures.push(json!({ "c": c, "p": p, "l": l, "d": d }));
        }
        checked += 1;
    }
    let pass = failures.is_empty();
    Ok((json!({ "checked": checked, "failures": failures }), pass))
}

fn locav(m: usize, pmax: u64) -> dcubic::Result<(Value, bool)> {
    let f = DiagonalCubicForm::fermat(m);
    let mut reports = Vec::new();
    for p in primes_up_to(pmax) {
        reports.push(locav_incidence_check(&f, p)?);
    }
    let pass = reports.iter().all(|r| r.pass());
    Ok((json!({ "reports": reports }), pass))
}

fn conic_bundle(seed: u64, per_branch: usize) -> dcubic::Result<(Value, bool)> {
    let mut rng = SeededRng::new(seed);
    let mut instances = 0usize;
    let mut failures = 0usize;
    for p in [2u64, 3, 5, 7] {
        for mode in [
            InstanceMode::Generic,
            InstanceMode::L1Zero,
            InstanceMode::L1L3Zero,
        ] {
            for _ in 0..per_branch {
                let x = ConicBundleInput::random(p, mode, &mut rng)?;
                failures +=
                    usize::from(conic_bundle_count(&x, 1)? != conic_bundle_count_brute(&x, 1)?);
                instances += 1;
            }
        }
    }
    Ok((
        json!({ "instances": instances, "failures": failures }),
        failures == 0,
    ))
}

fn delta_decay() -> dcubic::Result<(Value, bool)> {
    let f = DiagonalCubicForm::fermat(4);
    let w = SmoothWeight::bumps(&[1.0, -1.0, 1.0, -1.0], 0.6);
    let r = verify_decay(&f, &w, &DecayConfig::standard(vec![1, 1, 1, 1]))?;
    let pass = r.pass();
    Ok((serde_json::to_value(r).expect("report serializes"), pass))
}

fn variance(x: f64, m_level: u64) -> dcubic::Result<(Value, bool)> {
    let nu = SmoothWeight::Cuspidal(CuspidalNu::default());
    let (by_levels, by_pairs) = sigma1_double_count(&nu, x)?;
    let series = singular_series(m_level, 1000)?;
    let cone = cone_check(1_000_000)?;
    let pass = by_levels == by_pairs && series.fit.in_window() && cone.pass(0.02);
    Ok((
        json!({
            "sigma1_by_levels": by_levels,
            "sigma1_by_pairs": by_pairs,
            "series_slope": series.fit.slope,
            "cone": cone,
        }),
        pass,
    ))
}

fn sieve_trends(
    z_sq: i64,
    z_b3: i64,
    sampled: Option<(u64, u64)>,
) -> dcubic::Result<(Value, bool)> {
    let f = DiagonalCubicForm::fermat(4);
    let mode = match sampled {
        Some((seed, samples)) => SampleMode::Sampled { seed, samples },
        None => SampleMode::Exhaustive,
    };
    let sq = squarefull_stats(&f, z_sq, &default_squarefull_grid(), mode)?;
    let b3 = b3_second_moment(&f, z_b3, &DEFAULT_B3_GRID)?;
    let pass = sq.pass() && b3.pass();
    Ok((json!({ "squarefull": sq, "b3": b3 }), pass))
}

pub fn run(selected: &[Suite], params: &Params, rec: &mut Recorder) -> Result<()> {
    let mut suites: Vec<Suite> = if selected.is_empty() {
        ALL.to_vec()
    } else {
        selected.to_vec()
    };
    suites.sort();
    suites.dedup();
    let m = params.m.unwrap_or(4);
    let seed = params.seed.unwrap_or(0);
    for s in suites {
        let name = suite_name(s);
        let local = [("suite", Value::from(name))];
        rec.record(name, &local, || {
            let (v, pass) = match s {
                Suite::ExactIdentities => exact_identities(m, params.pmax.unwrap_or(11))?,
                Suite::StructuralExpsum => {
                    structural_expsum(m, seed, params.samples.unwrap_or(200) as usize)?
                }
                Suite::Locav => locav(m, params.pmax.unwrap_or(7))?,
                Suite::ConicBundle => conic_bundle(seed, 5)?,
                Suite::DeltaDecay => delta_decay()?,
                Suite::Variance => variance(
                    params.x.first().copied().unwrap_or(4.0),
                    params.m_level.unwrap_or(30),
                )?,
                Suite::SieveTrends => sieve_trends(
                    params.z.unwrap_or(20),
                    10,
                    params.samples.map(|n| (seed, n)),
                )?,
            };
            Ok((v, Some(pass)))
        })?;
    }
    Ok(())
}
