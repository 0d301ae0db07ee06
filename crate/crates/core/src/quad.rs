//! Adaptive Gauss–Kronrod quadrature and uniform trapezoid sums.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// One 15-point Kronrod panel: `(estimate, |Kronrod − Gauss|)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive G7–K15 on `[a, b]`, starting from `initial_panels`
/// equal panels (use about one panel per oscillation period for oscillatory
/// integrands). Stops when the summed error estimate is below
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadResult> {
    const MAX_PANELS: usize = 200_000;
    let n0 = initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(n0 * 4);
    let (mut value, mut error) = (0.0, 0.0);
    for i in 0..n0 {
        let pa = a + (b - a) * i as f64 / n0 as f64;
        let pb = a + (b - a) * (i + 1) as f64 / n0 as f64;
        let (v, e) = gk15(&f, pa, pb);
        value += v;
        error += e;
        heap.push(Panel {
            a: pa,
            b: pb,
            value: v,
            error: e,
        });
    }
    let mut evaluations = 15 * n0;
    while error > abs_tol.max(rel_tol * value.abs()) {
        if heap.len() >= MAX_PANELS {
            return Err(Error::Quadrature {
                estimate: value,
                error,
            });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum in panel order so the result does not depend on heap history.
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(QuadResult {
        value: panels.iter().map(|p| p.value).sum(),
        error: panels.iter().map(|p| p.error).sum(),
        evaluations,
    })
}

/// Complex-valued version of [`integrate`], splitting real and imaginary parts.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(Complex64, f64)> {
    let re = integrate(|x| f(x).re, a, b, initial_panels, abs_tol, rel_tol)?;
    let im = integrate(|x| f(x).im, a, b, initial_panels, abs_tol, rel_tol)?;
    Ok((Complex64::new(re.value, im.value), re.error + im.error))
}

/// Uniform grid of `n` points on `[a, b]` with trapezoid weights.
///
/// For a smooth function vanishing to all orders at both endpoints the
/// trapezoid sum converges faster than any power of the spacing.
pub fn trapezoid_grid(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    let mut ws = vec![h; n];
    ws[0] = h / 2.0;
    ws[n - 1] = h / 2.0;
    (xs, ws)
}

/// Pairwise summation, so results do not depend on how work was chunked.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1, 1e-14, 0.0).unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integral() {
        // ∫_0^1 cos(200 π x^2) dx against the Fresnel-free closed form via a
        // fine trapezoid sum.
        let r = integrate(|x| (200.0 * PI * x * x).cos(), 0.0, 1.0, 40, 1e-12, 0.0).unwrap();
        let (xs, ws) = trapezoid_grid(0.0, 1.0, 400_001);
        let t: f64 = xs
            .iter()
            .zip(&ws)
            .map(|(x, w)| w * (200.0 * PI * x * x).cos())
            .sum();
        assert!((r.value - t).abs() < 1e-8, "{} vs {}", r.value, t);
    }

    #[test]
    fn gaussian() {
        let r = integrate(|x| (-x * x).exp(), -8.0, 8.0, 4, 1e-13, 0.0).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-12);
    }
}
