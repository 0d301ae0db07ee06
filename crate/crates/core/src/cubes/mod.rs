//! Sums of three cubes: representation counts, classical identities, local
//! and archimedean densities, the truncated singular series of
//! `y_1³ + … + y_6³`, and the `M`-approximate variance.

mod archimedean;
mod density;
mod identities;
mod variance;

pub use archimedean::{n_weighted, sigma_infty, sigma_infty_thickened, CuspidalDensity};
pub use density::{
    cube_residue_counts, inverse_density_sum, k_of, level_counts, s_fk, s_fk_table,
    series_by_divisors, series_by_product, sigma_p, singular_series, DensityProfile,
    InverseDensityReport, SeriesRow, SingularSeriesReport,
};
pub use identities::{identity_verify, mahler_symbolic, mahler_triple, IdentityReport};
pub use variance::{sigma1_double_count, variance_report, VarianceReport};

use serde::{Deserialize, Serialize};

use crate::error::{check_budget, precondition, Result};
use crate::quad::integrate;

/// Enumeration budget for `r_3` and the moment tables, in triples visited.
pub const R3_BUDGET: u128 = 2_000_000_000;

/// `⌊n^{1/3}⌋`.
pub fn icbrt(n: u128) -> u128 {
    let mut r = (n as f64).cbrt() as u128;
    while r * r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// The integer `y` with `y³ = n`, if there is one.
pub fn exact_cbrt(n: i128) -> Option<i128> {
    let r = icbrt(n.unsigned_abs()) as i128;
    (r * r * r == n.abs()).then_some(if n < 0 { -r } else { r })
}

/// `a` is not `±4 mod 9`.
pub fn admissible(a: i64) -> bool {
    !matches!(a.rem_euclid(9), 4 | 5)
}

/// `r_3(a)`: nonnegative triples with `y_1³ + y_2³ + y_3³ = a`, ordered or as
/// multisets.
pub fn r3(a: u64, ordered: bool) -> Result<u64> {
    let t = icbrt(a as u128) as u64;
    check_budget("r3 enumeration", (t as u128 + 1).pow(2), R3_BUDGET)?;
    let a = a as u128;
    let mut count = 0;
    for y1 in 0..=t as u128 {
        let c1 = y1 * y1 * y1;
        for y2 in 0..=t as u128 {
            let c2 = c1 + y2 * y2 * y2;
            if c2 > a {
                break;
            }
            let y3 = icbrt(a - c2);
            if y3 * y3 * y3 != a - c2 {
                continue;
            }
            if ordered || (y1 <= y2 && y2 <= y3) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `r_3(a)` (ordered) for every `0 <= a <= b`.
pub fn r3_table(b: u64) -> Result<Vec<u32>> {
    let t = icbrt(b as u128) as u64;
    check_budget("r3 table", (t as u128 + 1).pow(2) + b as u128, R3_BUDGET)?;
    let mut table = vec![0u32; b as usize + 1];
    for y1 in 0..=t {
        for y2 in 0..=t {
            let c2 = y1.pow(3) + y2.pow(3);
            if c2 > b {
                break;
            }
            for y3 in 0..=t {
                let s = c2 + y3.pow(3);
                if s > b {
                    break;
                }
                table[s as usize] += 1;
            }
        }
    }
    Ok(table)
}

/// `#{y ∈ Z³_{≥0} : y_1³ + y_2³ + y_3³ <= b}` counted column by column.
pub fn cone_count(b: u64) -> u64 {
    let t = icbrt(b as u128) as u64;
    let mut count = 0;
    for y1 in 0..=t {
        for y2 in 0..=t {
            let c2 = y1.pow(3) + y2.pow(3);
            if c2 > b {
                break;
            }
            count += icbrt((b - c2) as u128) as u64 + 1;
        }
    }
    count
}

/// `N_F(T)` for `F = x_1³ + … + x_6³`: zeros in `[−T, T]^6`, by matching the
/// value lists of two triples.
pub fn six_cube_zeros(t: u64) -> Result<u64> {
    let side = 2 * t as u128 + 1;
    check_budget("six-cube zero count", side.pow(3), R3_BUDGET / 10)?;
    let t = t as i64;
    let mut values = Vec::with_capacity(side.pow(3) as usize);
    for a in -t..=t {
        for b in -t..=t {
            for c in -t..=t {
                values.push(a.pow(3) + b.pow(3) + c.pow(3));
            }
        }
    }
    values.sort_unstable();
    let mut count = 0u64;
    let mut i = 0;
    while i < values.len() {
        let v = values[i];
        let j = values[i..].partition_point(|&x| x == v) + i;
        if v >= 0 {
            let lo = values.partition_point(|&x| x < -v);
            let hi = values.partition_point(|&x| x <= -v);
            let pairs = ((j - i) * (hi - lo)) as u64;
            count += if v == 0 { pairs } else { 2 * pairs };
        }
        i = j;
    }
    Ok(count)
}

/// One row of the moment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub b: u64,
    /// `Σ_{a<=B} r_3(a)`.
    pub sum_r3: u64,
    /// `Σ_{a<=B} r_3(a)²`.
    pub sum_r3_sq: u64,
    /// `N_F(B^{1/3})` for the six-variable Fermat form.
    pub n_f: u64,
    /// `Σ r_3` recounted by the column count `#{F_0(y) <= B}`.
    pub cone_count: u64,
}

impl MomentRow {
    /// The double count agrees and `Σ r_3² <= N_F(B^{1/3})`.
    pub fn pass(&self) -> bool {
        self.sum_r3 == self.cone_count && self.sum_r3_sq <= self.n_f
    }
}

pub fn moment_table(bs: &[u64]) -> Result<Vec<MomentRow>> {
    let b_max = bs.iter().copied().max().unwrap_or(0);
    let table = r3_table(b_max)?;
    let mut rows = Vec::new();
    for &b in bs {
        let (mut s1, mut s2) = (0u64, 0u64);
        for &r in &table[..=b as usize] {
            s1 += r as u64;
            s2 += (r as u64).pow(2);
        }
        rows.push(MomentRow {
            b,
            sum_r3: s1,
            sum_r3_sq: s2,
            n_f: six_cube_zeros(icbrt(b as u128) as u64)?,
            cone_count: cone_count(b),
        });
    }
    Ok(rows)
}

/// `vol{y ∈ R³_{>=0} : y_1³ + y_2³ + y_3³ <= 1}` by nested quadrature.
pub fn cone_volume() -> Result<f64> {
    let inner = |y1: f64| {
        let top = (1.0 - y1.powi(3)).max(0.0).cbrt();
        integrate(
            |y2| (1.0 - y1.powi(3) - y2.powi(3)).max(0.0).cbrt(),
            0.0,
            top,
            4,
            1e-13,
            1e-11,
        )
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
    };
    let v = integrate(inner, 0.0, 1.0, 4, 1e-11, 1e-10)?.value;
    if !v.is_finite() {
        return precondition("cone volume quadrature failed");
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub b: u64,
    pub count: u64,
    pub ratio: f64,
    pub volume: f64,
    /// `|ratio/volume − 1|`.
    pub deviation: f64,
}

impl ConeReport {
    pub fn pass(&self, tolerance: f64) -> bool {
        self.deviation <= tolerance
    }
}

/// `B^{-1} Σ_{a<=B} r_3(a)` against the cone volume.
pub fn cone_check(b: u64) -> Result<ConeReport> {
    let count = cone_count(b);
    let volume = cone_volume()?;
    let ratio = count as f64 / b as f64;
    Ok(ConeReport {
        b,
        count,
        ratio,
        volume,
        deviation: (ratio / volume - 1.0).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_r3() {
        assert_eq!(r3(0, true).unwrap(), 1);
        assert_eq!(r3(1, true).unwrap(), 3);
        assert_eq!(r3(2, true).unwrap(), 3);
        assert_eq!(r3(3, true).unwrap(), 1);
        assert_eq!(r3(4, true).unwrap(), 0);
        // 1729 = 1 + 12³ = 9³ + 10³.
        assert_eq!(r3(1729, true).unwrap(), 12);
        assert_eq!(r3(1729, false).unwrap(), 2);
        assert!(r3(4096, true).unwrap() >= 3);
    }

    #[test]
    fn r3_table_matches_pointwise() {
        let t = r3_table(2000).unwrap();
        for a in [0u64, 1, 2, 3, 9, 16, 35, 1729, 2000] {
            assert_eq!(t[a as usize] as u64, r3(a, true).unwrap());
        }
    }

    #[test]
    fn admissibility() {
        assert!(admissible(33));
        assert!(admissible(42));
        assert!(!admissible(4));
        assert!(!admissible(-4));
        assert!(!admissible(13));
    }

    #[test]
    fn cube_roots() {
        assert_eq!(exact_cbrt(-27), Some(-3));
        assert_eq!(exact_cbrt(28), None);
        assert_eq!(icbrt(u64::MAX as u128), 2_642_245);
    }

    #[test]
    fn sandwich_and_double_count() {
        for row in moment_table(&[10, 100, 1000, 10_000]).unwrap() {
            assert!(row.pass(), "{row:?}");
        }
    }

    #[test]
    fn six_cube_zeros_small() {
        // T = 1: x_i ∈ {−1, 0, 1} with as many +1 as −1.
        let direct: u64 = (0..3u32.pow(6))
            .filter(|&k| {
                let mut k = k;
                let mut s = 0i64;
                for _ in 0..6 {
                    s += (k % 3) as i64 - 1;
                    k /= 3;
                }
                s == 0
            })
            .count() as u64;
        assert_eq!(six_cube_zeros(1).unwrap(), direct);
    }
}
