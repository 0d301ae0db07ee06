//! `J_{c,X}(n) = ∫ w(x) h(n/X^{3/2}, F(x)) e(−X c·x/n) dx`, by direct tensor
//! quadrature or through the factorization
//! `J = ∫ du p_r(u) ∏_i g_i(u, v_i)` with
//! `p_r(u) = ∫ B_0(ξ) h(r, ξ) e(−uξ) dξ` and `g_i(u, v) = ∫ w_i(x) e(u F_i x³ − v x) dx`.
//!
//! The factorized form needs `B_0 = 1` on `F(Supp w)`. We take `B_0` even, so
//! `p_r` is real and even. Both `p_r` and `u ↦ ∏ g_i` are Fourier transforms
//! of functions supported in `[−R_B, R_B]` and `[−R_F, R_F]`, so a trapezoid
//! sum in `u` with step `1/P`, `P >= R_B + R_F`, has no aliasing error; only
//! the cutoff in `|u|` is approximate.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, precondition, Result};
use crate::form::DiagonalCubicForm;
use crate::quad::{integrate, pairwise_sum, trapezoid_grid, QuadResult};

use super::weight::{SmoothWeight, Weight1D};
use super::HKernel;

/// `|p_r(u)|` is below about `1.5·10^{-4} · |p_r|_∞` once `|u| > 40/r`.
pub const U_CUTOFF: f64 = 40.0;
/// Margin (in units of `1/radius`) past the stationary range of `g_i`.
pub const STATIONARY_MARGIN: f64 = 40.0;
/// Point budget for the direct tensor quadrature.
pub const DIRECT_BUDGET: u128 = 400_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JPath {
    Direct,
    Factorized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JValue {
    pub re: f64,
    pub im: f64,
    /// Error estimate (quadrature refinement difference or tail bound).
    pub error: f64,
    /// `n` is past the cutoff where `h(r, ·)` vanishes on `F(Supp w)`.
    pub beyond_cutoff: bool,
}

impl JValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn abs(&self) -> f64 {
        self.value().norm()
    }

    fn zero() -> Self {
        Self {
            re: 0.0,
            im: 0.0,
            error: 0.0,
            beyond_cutoff: true,
        }
    }
}

/// `e(t) = exp(2πit)`.
pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * t)
}

/// `[min, max]` of `F` over the bounding box of a separable weight.
pub fn form_range(f: &DiagonalCubicForm, w: &SmoothWeight) -> Result<(f64, f64)> {
    let boxes = w
        .bounding_box()
        .ok_or_else(|| crate::error::Error::Precondition("weight has empty support".into()))?;
    if boxes.len() != f.m() {
        return precondition("weight dimension must match the form");
    }
    let (mut lo, mut hi) = (0.0, 0.0);
    for (&fi, &(a, b)) in f.coeffs().iter().zip(&boxes) {
        let (s, t) = (fi as f64 * a * a * a, fi as f64 * b * b * b);
        lo += s.min(t);
        hi += s.max(t);
    }
    Ok((lo, hi))
}

/// `R_F = max |F|` over the support box.
pub fn form_radius(f: &DiagonalCubicForm, w: &SmoothWeight) -> Result<f64> {
    let (lo, hi) = form_range(f, w)?;
    Ok(lo.abs().max(hi.abs()))
}

/// Even plateau `B_0`, equal to 1 on `[−R_F − 1, R_F + 1]` with unit taper.
pub fn b0_for(f: &DiagonalCubicForm, w: &SmoothWeight) -> Result<Weight1D> {
    let r = form_radius(f, w)? + 1.0;
    Ok(Weight1D::plateau(-r, r, 1.0))
}

fn b0_radius(b0: &Weight1D) -> Result<f64> {
    match b0.support() {
        Some((lo, hi)) if (lo + hi).abs() < 1e-12 => Ok(hi),
        _ => precondition("B_0 must be even with compact support"),
    }
}

/// `p_r(u) = ∫ B_0(ξ) h(r, ξ) cos(2πuξ) dξ` by adaptive quadrature.
pub fn p_r_eval(r: f64, u: f64, b0: &Weight1D) -> Result<QuadResult> {
    let kern = HKernel::new(r)?;
    let rb = b0_radius(b0)?;
    if kern.vanishes_on(rb) {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    // About four panels per oscillation and per feature of width r/8.
    let panels = (2.0 * rb * (4.0 * u.abs() + 32.0 / r.min(1.0))).ceil() as usize;
    let f = |xi: f64| b0.eval(xi) * kern.eval(xi) * (2.0 * PI * u * xi).cos();
    let half = integrate(f, 0.0, rb, panels.div_ceil(2).max(1), 1e-11, 1e-9)?;
    Ok(QuadResult {
        value: 2.0 * half.value,
        error: 2.0 * half.error,
        evaluations: half.evaluations,
    })
}

/// `p_r(k/P)` for `k = 0..=K`, by one FFT of `B_0 h(r, ·)` sampled on a
/// periodic window of length `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrTable {
    pub r: f64,
    pub period: f64,
    pub values: Vec<f64>,
}

impl PrTable {
    pub fn new(r: f64, b0: &Weight1D, period: f64, u_max: f64) -> Result<Self> {
        let kern = HKernel::new(r)?;
        let rb = b0_radius(b0)?;
        if period < 2.0 * rb {
            return precondition("the FFT window must contain the support of B_0");
        }
        let k_max = (u_max * period).ceil() as usize;
        if kern.vanishes_on(rb) {
            return Ok(Self {
                r,
                period,
                values: vec![0.0; k_max + 1],
            });
        }
        // Resolve u up to u_max plus the decay range of p_r, and the B_0 taper.
        let inv_step = (u_max + 10.0 * U_CUTOFF / r).max(100.0);
        let n = fft_size((period * inv_step).ceil() as usize).max(2 * k_max + 2);
        let step = period / n as f64;
        let samples: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|j| {
                let xi = if j < n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                } * step;
                if xi.abs() > rb {
                    0.0
                } else {
                    b0.eval(xi) * kern.eval(xi)
                }
            })
            .collect();
        let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        Ok(Self {
            r,
            period,
            values: buf[..=k_max].iter().map(|z| z.re * step).collect(),
        })
    }

    pub fn du(&self) -> f64 {
        1.0 / self.period
    }

    pub fn u_max(&self) -> f64 {
        (self.values.len() - 1) as f64 / self.period
    }

    /// `p_r(|k|/P)`.
    pub fn at(&self, k: i64) -> f64 {
        self.values[k.unsigned_abs() as usize]
    }
}

/// Smallest `2^a 3^b 5^c >= n`.
pub fn fft_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut t = m;
        for p in [2, 3, 5] {
            while t % p == 0 {
                t /= p;
            }
        }
        if t == 1 {
            return m;
        }
        m += 1;
    }
}

/// `g(u, v) = ∫ w(x) e(uFx³ − vx) dx` by a trapezoid sum fine enough for the
/// largest local frequency.
pub fn g_factor(w: &Weight1D, fi: i64, u: f64, v: f64) -> Complex64 {
    let Some((lo, hi)) = w.support() else {
        return Complex64::new(0.0, 0.0);
    };
    let xmax = lo.abs().max(hi.abs());
    let freq = 3.0 * (fi as f64).abs() * xmax * xmax * u.abs() + v.abs();
    let n = (2.5 * (hi - lo) * freq).ceil() as usize + 200;
    let (xs, ws) = trapezoid_grid(lo, hi, n);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, wt) in xs.iter().zip(&ws) {
        let a = w.eval(*x);
        if a != 0.0 {
            acc += e(u * fi as f64 * x * x * x - v * x) * (a * wt);
        }
    }
    acc
}

/// Bound on `|u|` past which some factor `g_i(u, v_i)` is negligible: `g_i`
/// has a stationary point only when `v_i = 3uF_i x²` for some `x` in its support.
pub fn stationary_u_bound(f: &DiagonalCubicForm, ws: &[Weight1D], v: &[f64]) -> f64 {
    let mut bound = f64::INFINITY;
    for ((&fi, w), &vi) in f.coeffs().iter().zip(ws).zip(v) {
        if let Some((lo, hi)) = w.support() {
            let xmin = if lo > 0.0 {
                lo
            } else if hi < 0.0 {
                -hi
            } else {
                continue;
            };
            let radius = (hi - lo) / 2.0;
            let b =
                (vi.abs() + STATIONARY_MARGIN / radius) / (3.0 * (fi as f64).abs() * xmin * xmin);
            bound = bound.min(b);
        }
    }
    bound
}

fn check_args(f: &DiagonalCubicForm, w: &SmoothWeight, c: &[i64], x: f64, n: u64) -> Result<()> {
    if c.len() != f.m() || w.dim() != f.m() {
        return precondition("c, w and F must have the same dimension");
    }
    if x <= 0.0 || n == 0 {
        return precondition("X and n must be positive");
    }
    Ok(())
}

/// `J_{c,X}(n)` along the requested path.
pub fn j_integral(
    f: &DiagonalCubicForm,
    w: &SmoothWeight,
    c: &[i64],
    x: f64,
    n: u64,
    path: JPath,
) -> Result<JValue> {
    check_args(f, w, c, x, n)?;
    let r = n as f64 / x.powf(1.5);
    let v: Vec<f64> = c.iter().map(|&ci| x * ci as f64 / n as f64).collect();
    match path {
        JPath::Direct => j_direct(f, w, r, &v),
        JPath::Factorized => j_factorized(f, w, r, &v),
    }
}

/// The factorized evaluation at `(r, v)`.
pub fn j_factorized(f: &DiagonalCubicForm, w: &SmoothWeight, r: f64, v: &[f64]) -> Result<JValue> {
    let ws = w.factors()?;
    if w.is_zero() {
        return Ok(JValue {
            beyond_cutoff: false,
            ..JValue::zero()
        });
    }
    let rf = form_radius(f, w)?;
    let kern = HKernel::new(r)?;
    if kern.vanishes_on(rf) {
        return Ok(JValue::zero());
    }
    let b0 = b0_for(f, w)?;
    let rb = b0_radius(&b0)?;
    let period = (2.0 * rb).ceil() + 1.0;
    let u_max = (U_CUTOFF / r).min(stationary_u_bound(f, ws, v));
    let table = PrTable::new(r, &b0, period, u_max)?;
    let k_max = table.values.len() as i64 - 1;
    let du = table.du();
    let terms: Vec<(f64, f64)> = (-k_max..=k_max)
        .into_par_iter()
        .map(|k| {
            let u = k as f64 * du;
            let mut prod = Complex64::new(table.at(k) * du, 0.0);
            for ((&fi, wi), &vi) in f.coeffs().iter().zip(ws).zip(v) {
                prod *= g_factor(wi, fi, u, vi);
            }
            (prod.re, prod.im)
        })
        .collect();
    let re: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let im: Vec<f64> = terms.iter().map(|t| t.1).collect();
    // Tail proxy: the contribution of the outer fifth of the u-range.
    let outer = (k_max as f64 * 0.8) as i64;
    let tail: f64 = terms
        .iter()
        .zip(-k_max..=k_max)
        .filter(|(_, k)| k.abs() > outer)
        .map(|(t, _)| t.0.hypot(t.1))
        .sum();
    Ok(JValue {
        re: pairwise_sum(&re),
        im: pairwise_sum(&im),
        error: tail,
        beyond_cutoff: false,
    })
}

/// Per-axis point counts for the direct tensor trapezoid at `(r, v)`.
fn direct_grid(
    f: &DiagonalCubicForm,
    boxes: &[(f64, f64)],
    r: f64,
    v: &[f64],
    scale: f64,
) -> Vec<usize> {
    boxes
        .iter()
        .zip(f.coeffs())
        .zip(v)
        .map(|((&(lo, hi), &fi), &vi)| {
            let xmax = lo.abs().max(hi.abs());
            let grad = 3.0 * (fi as f64).abs() * xmax * xmax;
            let freq = vi.abs() + grad * U_CUTOFF / r.min(1.0) / 4.0;
            ((scale * (hi - lo) * freq).ceil() as usize + 60).max(8)
        })
        .collect()
}

fn tensor_sum(
    f: &DiagonalCubicForm,
    w: &SmoothWeight,
    kern: &HKernel,
    boxes: &[(f64, f64)],
    v: &[f64],
    counts: &[usize],
) -> Complex64 {
    let m = boxes.len();
    let grids: Vec<(Vec<f64>, Vec<f64>)> = boxes
        .iter()
        .zip(counts)
        .map(|(&(lo, hi), &n)| trapezoid_grid(lo, hi, n))
        .collect();
    let coeffs: Vec<f64> = f.coeffs().iter().map(|&c| c as f64).collect();
    let rest: usize = counts[1..].iter().product();
    let partial: Vec<Complex64> = (0..counts[0])
        .into_par_iter()
        .map(|i0| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut x = vec![0.0; m];
            x[0] = grids[0].0[i0];
            for flat in 0..rest {
                let mut t = flat;
                let mut wt = grids[0].1[i0];
                for k in 1..m {
                    let idx = t % counts[k];
                    t /= counts[k];
                    x[k] = grids[k].0[idx];
                    wt *= grids[k].1[idx];
                }
                let wx = w.eval(&x);
                if wx == 0.0 {
                    continue;
                }
                let fx: f64 = coeffs.iter().zip(&x).map(|(c, xi)| c * xi * xi * xi).sum();
                let hv = kern.eval(fx);
                if hv == 0.0 {
                    continue;
                }
                let phase: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
                acc += e(-phase) * (wx * hv * wt);
            }
            acc
        })
        .collect();
    let re: Vec<f64> = partial.iter().map(|z| z.re).collect();
    let im: Vec<f64> = partial.iter().map(|z| z.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// Direct tensor quadrature at `(r, v)`, `m <= 4`. The error estimate is the
/// change from a grid with two thirds of the points per axis.
pub fn j_direct(f: &DiagonalCubicForm, w: &SmoothWeight, r: f64, v: &[f64]) -> Result<JValue> {
    if f.m() > 4 {
        return precondition("the direct path is limited to m <= 4");
    }
    if w.is_zero() {
        return Ok(JValue {
            beyond_cutoff: false,
            ..JValue::zero()
        });
    }
    let kern = HKernel::new(r)?;
    let rf = form_radius(f, w)?;
    if kern.vanishes_on(rf) {
        return Ok(JValue::zero());
    }
    let boxes = w
        .bounding_box()
        .ok_or_else(|| crate::error::Error::Precondition("empty support".into()))?;
    let fine = direct_grid(f, &boxes, r, v, 1.5);
    check_budget(
        "direct J quadrature",
        fine.iter().map(|&n| n as u128).product(),
        DIRECT_BUDGET,
    )?;
    let coarse = direct_grid(f, &boxes, r, v, 1.0);
    let a = tensor_sum(f, w, &kern, &boxes, v, &fine);
    let b = tensor_sum(f, w, &kern, &boxes, v, &coarse);
    Ok(JValue {
        re: a.re,
        im: a.im,
        error: (a - b).norm(),
        beyond_cutoff: false,
    })
}

/// Shared handle used by callers evaluating many `(c, n)`.
pub type SharedWeight = Arc<SmoothWeight>;

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (DiagonalCubicForm, SmoothWeight) {
        (
            DiagonalCubicForm::new(vec![1, 1, -2]).unwrap(),
            SmoothWeight::bumps(&[1.0, 1.0, 1.0], 0.4),
        )
    }

    #[test]
    fn table_matches_adaptive_quadrature() {
        let (f, w) = toy();
        let b0 = b0_for(&f, &w).unwrap();
        for &r in &[0.2, 0.7, 1.6] {
            let t = PrTable::new(r, &b0, 15.0, 40.0).unwrap();
            for k in [0i64, 7, 150, 600] {
                let q = p_r_eval(r, k as f64 / 15.0, &b0).unwrap();
                assert!(
                    (t.at(k) - q.value).abs() < 1e-8,
                    "r={r} k={k}: {} vs {}",
                    t.at(k),
                    q.value
                );
            }
        }
    }

    #[test]
    fn p_r_decays_in_ru() {
        let (f, w) = toy();
        let b0 = b0_for(&f, &w).unwrap();
        let r = 0.1;
        let p0 = p_r_eval(r, 0.0, &b0).unwrap().value;
        assert!(p0.is_finite());
        let p = p_r_eval(r, 50.0, &b0).unwrap().value;
        // (r u)^{-2} decay with a modest constant.
        assert!(p.abs() * (r * 50.0f64).powi(2) < 50.0);
    }

    #[test]
    fn vanishes_past_cutoff() {
        let (f, w) = toy();
        let rf = form_radius(&f, &w).unwrap();
        let x = 2.0f64;
        let n = (2.0 * rf * x.powf(1.5)).ceil() as u64 + 1;
        for path in [JPath::Direct, JPath::Factorized] {
            let j = j_integral(&f, &w, &[0, 0, 0], x, n, path).unwrap();
            assert!(j.beyond_cutoff && j.abs() == 0.0);
        }
    }

    #[test]
    fn direct_and_factorized_agree_at_zero_frequency() {
        let (f, w) = toy();
        let a = j_integral(&f, &w, &[0, 0, 0], 2.0, 3, JPath::Direct).unwrap();
        let b = j_integral(&f, &w, &[0, 0, 0], 2.0, 3, JPath::Factorized).unwrap();
        let rel = (a.value() - b.value()).norm() / b.abs();
        assert!(rel < 1e-6, "{a:?} {b:?} rel {rel}");
    }
}
