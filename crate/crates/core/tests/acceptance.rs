//! Acceptance run: one line per criterion, nonzero exit when any fails.

use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use dcubic::cubes::{cone_check, sigma1_double_count, singular_series};
use dcubic::delta::{
    delta_identity_eval, verify_decay, CuspidalNu, DecayConfig, IdentityConfig, SmoothWeight,
};
use dcubic::dual::dual_form_i128;
use dcubic::expsum::{
    exp_sum, exp_sum_prime_restricted, exp_sum_structural, exp_sum_with, reduction_difference,
    vanishing_boundedness_report, ExpSumOptions, Method,
};
use dcubic::form::{v_p, DiagonalCubicForm};
use dcubic::lfactor::{
    frobenius_data, is_good_prime, locav_incidence_check, phi_local_coeffs, projective_classes,
};
use dcubic::pointcount::{
    conic_bundle_count, conic_bundle_count_brute, count_points_q, ConicBundleInput, InstanceMode,
};
use dcubic::rng::SeededRng;
use dcubic::sieve::{
    b3_second_moment, default_squarefull_grid, squarefull_stats, zero_density_check, IntPoly,
    SampleMode, DEFAULT_B3_GRID,
};
use dcubic::Result;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn tuples(m: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
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

fn first_order_identity() -> Result<Outcome> {
    let f = DiagonalCubicForm::fermat(4);
    let mut checked = 0usize;
    let mut failures = 0usize;
    for p in [5u64, 7, 11] {
        let e_f = count_points_q(&f, None, p, 1)?.e;
        let pi = p as i128;
        let cs: Vec<Vec<i64>> = tuples(4, 0, p as i64 - 1)
            .into_iter()
            .filter(|c| c.iter().any(|&x| x != 0))
            .collect();
        let bad = cs
            .par_iter()
            .map(|c| -> Result<bool> {
                let s = exp_sum(&f, c, p)?.value;
                let e_c = count_points_q(&f, Some(c), p, 1)?.e;
                Ok(s != pi * pi * e_c - pi * e_f)
            })
            .collect::<Result<Vec<bool>>>()?;
        checked += cs.len();
        failures += bad.iter().filter(|&&b| b).count();
    }
    outcome(
        failures == 0,
        format!("{checked} (c, p), {failures} mismatches"),
    )
}

fn good_prime_vanishing() -> Result<Outcome> {
    let f = DiagonalCubicForm::fermat(4);
    let mut checked = 0usize;
    let mut failures = 0usize;
    for p in [2u64, 3, 5, 7] {
        let cs: Vec<Vec<i64>> = tuples(4, -3, 3)
            .into_iter()
            .filter(|c| is_good_prime(&f, c, p))
            .collect();
        let bad = cs
            .par_iter()
            .map(|c| -> Result<usize> {
                let mut bad = 0;
                for l in [2, 3] {
                    if exp_sum(&f, c, p.pow(l))?.value != 0 {
                        bad += 1;
                    }
                }
                Ok(bad)
            })
            .collect::<Result<Vec<usize>>>()?;
        checked += 2 * cs.len();
        failures += bad.iter().sum::<usize>();
    }
    outcome(
        checked > 0 && failures == 0,
        format!("{checked} sums with p ∤ F^∨(c), {failures} nonzero"),
    )
}

fn structural_equivalence() -> Result<Outcome> {
    let f = DiagonalCubicForm::fermat(4);
    let mut rng = SeededRng::new(SEED);
    let brute = ExpSumOptions {
        method: Method::Brute,
        ..ExpSumOptions::default()
    };
    let mut configs = 0usize;
    let mut failures = Vec::new();
    while configs < 240 {
        let (p, l_max) = [(2u64, 6u32), (3, 5), (5, 4), (7, 3)][rng.below(4) as usize];
        let l = 2 + rng.below(l_max as u64 - 1) as u32;
        let v = rng.below(2) as u32;
        let scale = p.pow(v) as i64;
        let c: Vec<i64> = (0..4).map(|_| scale * rng.int_in(-30, 30)).collect();
        let Some(vc) = c
            .iter()
            .filter(|&&x| x != 0)
            .map(|&x| v_p(p, x as i128).unwrap())
            .min()
        else {
            continue;
        };
        if 2 * (1 + vc) > l {
            continue;
        }
        let d = 1 + vc + rng.below((l / 2 - vc) as u64) as u32;
        let structural = exp_sum_structural(&f, &c, p, l, d)?;
        let restricted = exp_sum_prime_restricted(&f, &c, p, l)?;
        let full = exp_sum_with(&f, &c, p.pow(l), brute)?.value;
        let reduction = reduction_difference(&f, &c, p, l, brute)?;
        if structural != restricted || full - restricted != reduction {
            failures.push(format!("c={c:?} p={p} l={l} d={d}"));
        }
        configs += 1;
    }
    outcome(
        failures.is_empty(),
        format!(
            "{configs} (c, p, l, d), {} mismatches {:?}",
            failures.len(),
            failures.first()
        ),
    )
}

fn lemma_threshold() -> Result<Outcome> {
    let f = DiagonalCubicForm::fermat(4);
    let mut corpus = Vec::new();
    let mut per_valuation = [0usize; 3];
    for (p, l_max) in [(5u64, 5u32), (7, 4)] {
        for v in 0..=2u32 {
            let picked: Vec<Vec<i64>> = tuples(4, -9, 9)
                .into_iter()
                .filter(|c| dual_form_i128(&f, c).is_some_and(|d| d != 0 && v_p(p, d) == Some(v)))
                .take(6)
                .collect();
            per_valuation[v as usize] += picked.len();
            corpus.extend(picked.into_iter().map(|c| (c, p, l_max)));
        }
    }
    let reports = corpus
        .par_iter()
        .map(|(c, p, l_max)| {
            vanishing_boundedness_report(&f, c, *p, *l_max, ExpSumOptions::default())
        })
        .collect::<Result<Vec<_>>>()?;
    let vanishing: usize = reports
        .iter()
        .map(|r| r.levels.iter().filter(|l| l.must_vanish).count())
        .sum();
    let failures = reports
        .iter()
        .filter(|r| !r.pass() || r.inconclusive)
        .count();
    outcome(
        failures == 0 && per_valuation.iter().all(|&k| k >= 3),
        format!(
            "{} (c, p), {per_valuation:?} with v_p(F^∨) = 0, 1, 2, \
             {vanishing} levels past the threshold, {failures} failures",
            reports.len()
        ),
    )
}

fn locav_identities() -> Result<Outcome> {
    let mut failures = Vec::new();
    let cases = [
        (4usize, 2u64),
        (4, 3),
        (4, 5),
        (4, 7),
        (4, 13),
        (6, 2),
        (6, 3),
    ];
    for (m, p) in cases {
        let r = locav_incidence_check(&DiagonalCubicForm::fermat(m), p)?;
        if !r.pass() {
            failures.push((m, p));
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} (m, p), failures {failures:?}", cases.len()),
    )
}

fn local_factor_purity() -> Result<Outcome> {
    let f = DiagonalCubicForm::fermat(4);
    let mut checked = 0usize;
    let mut failures = Vec::new();
    let mut worst_a3 = 0f64;
    for p in [2u64, 3, 5, 7, 11, 13] {
        let cs: Vec<Vec<i64>> = projective_classes(4, p)
            .into_iter()
            .filter(|c| is_good_prime(&f, c, p))
            .collect();
        let rows = cs
            .par_iter()
            .map(|c| -> Result<(bool, f64)> {
                let fd = frobenius_data(&f, c, p, 2)?;
                let phi = phi_local_coeffs(&f, c, p)?;
                let ok = fd.e2_is_one() && fd.counts_tilde.iter().all(|e| e.abs() <= 2.0 + 1e-12);
                Ok((ok, phi.a3_p.abs()))
            })
            .collect::<Result<Vec<_>>>()?;
        for (c, (ok, a3)) in cs.iter().zip(&rows) {
            worst_a3 = worst_a3.max(*a3);
            if !ok || *a3 > 1e-6 {
                failures.push((c.clone(), p));
            }
        }
        checked += cs.len();
    }
    outcome(
        checked > 0 && failures.is_empty(),
        format!(
            "{checked} good (c, p), max |a3| = {worst_a3:.1e}, failures {:?}",
            failures.first()
        ),
    )
}

fn conic_bundles() -> Result<Outcome> {
    let mut rng = SeededRng::new(SEED);
    let mut instances = 0usize;
    let mut failures = 0usize;
    for p in [2u64, 3, 5, 7] {
        for mode in [
            InstanceMode::Generic,
            InstanceMode::L1Zero,
            InstanceMode::L1L3Zero,
        ] {
            for _ in 0..5 {
                let x = ConicBundleInput::random(p, mode, &mut rng)?;
                if conic_bundle_count(&x, 1)? != conic_bundle_count_brute(&x, 1)? {
                    failures += 1;
                }
                instances += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{instances} instances (seed {SEED}), {failures} mismatches"),
    )
}

fn delta_identity() -> Result<Outcome> {
    let f = DiagonalCubicForm::new(vec![1, 1, -2])?;
    let w = SmoothWeight::bumps(&[1.0, 1.0, 1.0], 0.4);
    let mut pass = true;
    let mut detail = Vec::new();
    for x in [2.0, 3.0, 4.0] {
        let rec = delta_identity_eval(&f, &w, x, &IdentityConfig::default())?;
        pass &= rec.pass();
        detail.push(format!("X={x}: lhs {:.6} gap {:.1e}", rec.lhs, rec.gap));
    }
    outcome(pass, detail.join("; "))
}

fn j_decay() -> Result<Outcome> {
    let f = DiagonalCubicForm::fermat(4);
    let w = SmoothWeight::bumps(&[1.0, -1.0, 1.0, -1.0], 0.6);
    let report = verify_decay(&f, &w, &DecayConfig::standard(vec![1, 1, 1, 1]))?;
    outcome(
        report.pass(),
        format!(
            "slope {:.3}, Schwartz ratio {:.1e}, cutoff exponent {:.3}",
            report.fit.slope, report.schwartz_ratio, report.cutoff_exponent
        ),
    )
}

fn zero_density() -> Result<Outcome> {
    let corpus: Vec<(&str, IntPoly)> = vec![
        ("x^2", IntPoly(vec![0, 0, 1])),
        ("x^3", IntPoly(vec![0, 0, 0, 1])),
        ("x^2+1", IntPoly(vec![1, 0, 1])),
        ("x(x-1)^2", IntPoly(vec![0, 1, -2, 1])),
        ("(x^2-2)^2", IntPoly(vec![4, 0, -4, 0, 1])),
        ("x^3-x", IntPoly(vec![0, -1, 0, 1])),
    ];
    let mut levels = 0usize;
    let mut failures = Vec::new();
    let mut constants = Vec::new();
    for (name, f) in &corpus {
        let d = f.degree().unwrap_or(0) as f64;
        let mut c_f = 0f64;
        for p in [2u64, 3, 5, 7] {
            let l_max = (6.0 / (p as f64).log10()).floor() as u32;
            for row in zero_density_check(f, p, l_max, 1_000_000)? {
                levels += 1;
                c_f = c_f.max(row.ratio);
                if row.brute != Some(row.hensel) || !row.fan_out_ok {
                    failures.push(format!("{name} p={} l={}", row.p, row.l));
                }
            }
        }
        if c_f > d {
            failures.push(format!("{name}: C_f = {c_f:.3} > deg"));
        }
        constants.push(format!("{name} {c_f:.3}"));
    }
    outcome(
        failures.is_empty(),
        format!(
            "{levels} (f, p^l <= 10^6), failures {failures:?}; C_f: {}",
            constants.join(", ")
        ),
    )
}

fn variance_framework() -> Result<Outcome> {
    let nu = SmoothWeight::Cuspidal(CuspidalNu::default());
    let (by_levels, by_pairs) = sigma1_double_count(&nu, 4.0)?;
    let series = singular_series(30, 1000)?;
    let cone = cone_check(1_000_000)?;
    let pass = by_levels == by_pairs && series.fit.in_window() && cone.pass(0.02);
    outcome(
        pass,
        format!(
            "Σ1 {by_levels} vs {by_pairs}; S(K) slope {:.3}; cone ratio {:.6} vs {:.6} ({:.2}%)",
            series.fit.slope,
            cone.ratio,
            cone.volume,
            100.0 * cone.deviation
        ),
    )
}

fn sieve_trends() -> Result<Outcome> {
    let f = DiagonalCubicForm::fermat(4);
    let sq = squarefull_stats(&f, 20, &default_squarefull_grid(), SampleMode::Exhaustive)?;
    let b3 = b3_second_moment(&f, 10, &DEFAULT_B3_GRID)?;
    let slope = |fit: &Option<dcubic::fit::TrendFit>| fit.as_ref().map_or(f64::NAN, |t| t.slope);
    outcome(
        sq.pass() && b3.pass(),
        format!(
            "square-full slope {:.3} (exhaustive, Z=20), B3 slope {:.3} (Z=10)",
            slope(&sq.fit),
            slope(&b3.fit)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 12] = [
        ("first-order identity", first_order_identity),
        ("good-prime vanishing", good_prime_vanishing),
        ("structural equivalence", structural_equivalence),
        ("vanishing threshold", lemma_threshold),
        ("incidence identities", locav_identities),
        ("local-factor purity", local_factor_purity),
        ("conic-bundle counter", conic_bundles),
        ("delta identity", delta_identity),
        ("J decay", j_decay),
        ("zero density", zero_density),
        ("variance framework", variance_framework),
        ("sieve trends", sieve_trends),
    ];
    let filter: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let k = i + 1;
        if !filter.is_empty() && !filter.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {k:>2} {name:<24} {} [{:.1}s] {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
