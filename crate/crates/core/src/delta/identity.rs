//! Desk-scale check of the delta-method identity
//! `N_{F,w}(X) = c_Y Σ_{n>=1} n^{-m} X^{m-3} Σ_{c ∈ Z^m} S_c(n) J_{c,X}(n)`.
//!
//! The right side is evaluated on the Fourier side only. With
//! `S_c(n) = Σ*_a ∏_i G_i(a, c_i)`, `G_i(a, c) = Σ_{x mod n} e_n(aF_i x³ + cx)`,
//! and the factorized `J`, the `c`-sum splits over coordinates:
//! `Σ_c S_c(n) J_c = Σ*_a ∫ du p_r(u) ∏_i T_i(a, u)` with
//! `T_i(a, u) = Σ_{|c| <= C_i} G_i(a, c) g_i(u, Xc/n)`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::arith::gcd_u64;
use crate::error::{check_budget, precondition, Result};
use crate::form::DiagonalCubicForm;
use crate::quad::pairwise_sum;

use super::jint::{b0_for, e, fft_size, form_radius, PrTable, STATIONARY_MARGIN, U_CUTOFF};
use super::weight::{SmoothWeight, Weight1D};
use super::{c_y, HKernel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityConfig {
    /// `p_r(u)` is kept for `|u| <= u_cutoff / r`.
    pub u_cutoff: f64,
    /// Work budget in sample-FFT points.
    pub budget: u128,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self {
            u_cutoff: U_CUTOFF,
            budget: 20_000_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub x: f64,
    pub y: f64,
    pub c_y: f64,
    /// `N_{F,w}(X)` by lattice enumeration.
    pub lhs: f64,
    /// Truncated Fourier-side sum.
    pub rhs: f64,
    pub gap: f64,
    /// Change in the right side when the `u`-cutoff is lowered by 30%.
    pub truncation_budget: f64,
    pub n_max: u64,
    /// Largest `|c_i|` used.
    pub c_max: u64,
}

impl IdentityRecord {
    /// `|lhs − rhs| <= max(10^{-2}, budget) · (1 + |lhs|)`.
    pub fn pass(&self) -> bool {
        self.gap <= self.truncation_budget.max(1e-2) * (1.0 + self.lhs.abs())
    }
}

/// `Σ_{x ∈ Z^m} w(x/X) 1_{F(x) = 0}`.
pub fn lattice_count(f: &DiagonalCubicForm, w: &SmoothWeight, x: f64) -> Result<f64> {
    let boxes = w
        .bounding_box()
        .ok_or_else(|| crate::error::Error::Precondition("empty support".into()))?;
    let ranges: Vec<(i64, i64)> = boxes
        .iter()
        .map(|&(lo, hi)| ((lo * x).floor() as i64, (hi * x).ceil() as i64))
        .collect();
    let total: u128 = ranges.iter().map(|&(a, b)| (b - a + 1) as u128).product();
    check_budget("lattice enumeration", total, 1 << 32)?;
    let m = ranges.len();
    let mut point = vec![0i64; m];
    let mut acc = Vec::new();
    for flat in 0..total {
        let mut t = flat;
        for (k, &(a, b)) in ranges.iter().enumerate() {
            let len = (b - a + 1) as u128;
            point[k] = a + (t % len) as i64;
            t /= len;
        }
        if f.eval(&point) == 0 {
            let scaled: Vec<f64> = point.iter().map(|&p| p as f64 / x).collect();
            let v = w.eval(&scaled);
            if v != 0.0 {
                acc.push(v);
            }
        }
    }
    Ok(pairwise_sum(&acc))
}

/// Per-coordinate state for the sweep over `u_k = k/P`.
struct Factor {
    fi: i64,
    c_max: i64,
    m_fft: usize,
    fft: Arc<dyn Fft<f64>>,
    /// `(fold index, w(x_j) Δx, e(F x_j³/P))`.
    samples: Vec<(usize, f64, Complex64)>,
    current: Vec<Complex64>,
    /// `e(−c X x_0/n)` for `c = −C..=C`.
    shift: Vec<Complex64>,
}

impl Factor {
    fn new(fi: i64, w: &Weight1D, x: f64, n: u64, u_max: f64, period: f64) -> Result<Self> {
        let (lo, hi) = w
            .support()
            .ok_or_else(|| crate::error::Error::Precondition("empty factor".into()))?;
        let xmax = lo.abs().max(hi.abs());
        let radius = (hi - lo) / 2.0;
        let sweep = 3.0 * (fi as f64).abs() * xmax * xmax * u_max;
        let v_max = sweep + STATIONARY_MARGIN / radius;
        let c_max = (n as f64 * v_max / x).ceil() as i64;
        let resolve = (n as f64 / x * 2.5 * (sweep + v_max)).ceil() as usize;
        let m_fft = fft_size((2 * c_max as usize + 1).max(resolve));
        let dx = n as f64 / (x * m_fft as f64);
        let count = ((hi - lo) / dx).floor() as usize + 1;
        let samples: Vec<(usize, f64, Complex64)> = (0..count)
            .filter_map(|j| {
                let t = lo + j as f64 * dx;
                let a = w.eval(t);
                (a != 0.0).then(|| (j % m_fft, a * dx, e(fi as f64 * t * t * t / period)))
            })
            .collect();
        let phi0 = x * lo / n as f64;
        let shift = (-c_max..=c_max).map(|c| e(-(c as f64) * phi0)).collect();
        Ok(Self {
            fi,
            c_max,
            m_fft,
            fft: FftPlanner::new().plan_fft_forward(m_fft),
            current: vec![Complex64::new(1.0, 0.0); samples.len()],
            samples,
            shift,
        })
    }

    /// `T(a, u_k)` for every unit `a`, then advance to `u_{k+1}`.
    fn step(&mut self, n: u64, units: &[u64], buf: &mut Vec<Complex64>) -> Vec<Complex64> {
        buf.clear();
        buf.resize(self.m_fft, Complex64::new(0.0, 0.0));
        for ((idx, wt, _), cur) in self.samples.iter().zip(&self.current) {
            buf[*idx] += cur * *wt;
        }
        self.fft.process(buf);
        let nn = n as usize;
        let mut folded = vec![Complex64::new(0.0, 0.0); nn];
        let m = self.m_fft as i64;
        for (s, c) in (-self.c_max..=self.c_max).enumerate() {
            folded[c.rem_euclid(nn as i64) as usize] +=
                self.shift[s] * buf[c.rem_euclid(m) as usize];
        }
        let h: Vec<Complex64> = (0..nn)
            .map(|xr| {
                folded
                    .iter()
                    .enumerate()
                    .map(|(rho, z)| z * e(((rho * xr) % nn) as f64 / n as f64))
                    .sum()
            })
            .collect();
        let cubes: Vec<u64> = (0..n).map(|t| (t * t % n) * t % n).collect();
        let fi = self.fi.rem_euclid(n as i64) as u64;
        let out = units
            .iter()
            .map(|&a| {
                let af = a * fi % n;
                (0..nn)
                    .map(|xr| h[xr] * e((af * cubes[xr] % n) as f64 / n as f64))
                    .sum()
            })
            .collect();
        for ((_, _, z), cur) in self.samples.iter().zip(self.current.iter_mut()) {
            *cur *= z;
        }
        out
    }
}

/// `(Σ_c S_c(n) J_c(n)` over all `u`, the same with the `u`-range cut to 70%).
fn modulus_term(
    f: &DiagonalCubicForm,
    ws: &[Weight1D],
    b0: &Weight1D,
    period: f64,
    x: f64,
    n: u64,
    cfg: &IdentityConfig,
) -> Result<(f64, f64, i64)> {
    let r = n as f64 / x.powf(1.5);
    let u_max = cfg.u_cutoff / r;
    let table = PrTable::new(r, b0, period, u_max)?;
    let units: Vec<u64> = if n == 1 {
        vec![0]
    } else {
        (1..n).filter(|&a| gcd_u64(a, n) == 1).collect()
    };
    // Distinct (F_i, w_i) pairs share one factor.
    let mut keys: Vec<(i64, &Weight1D)> = Vec::new();
    let mut which = Vec::with_capacity(ws.len());
    for (&fi, w) in f.coeffs().iter().zip(ws) {
        let pos = keys.iter().position(|(g, v)| *g == fi && *v == w);
        which.push(pos.unwrap_or_else(|| {
            keys.push((fi, w));
            keys.len() - 1
        }));
    }
    let mut factors: Vec<Factor> = keys
        .iter()
        .map(|&(fi, w)| Factor::new(fi, w, x, n, u_max, period))
        .collect::<Result<_>>()?;
    let k_max = table.values.len() - 1;
    let work: u128 = factors.iter().map(|fc| fc.m_fft as u128).sum::<u128>() * (k_max as u128 + 1);
    check_budget("delta identity sweep", work, cfg.budget)?;
    let cut = (0.7 * k_max as f64) as usize;
    let c_max = factors.iter().map(|fc| fc.c_max).max().unwrap_or(0);
    let mut buf = Vec::new();
    let mut terms = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let t: Vec<Vec<Complex64>> = factors
            .iter_mut()
            .map(|fc| fc.step(n, &units, &mut buf))
            .collect();
        let psi: Complex64 = (0..units.len())
            .map(|ai| which.iter().map(|&q| t[q][ai]).product::<Complex64>())
            .sum();
        let wt = if k == 0 { 0.5 } else { 1.0 };
        terms.push(2.0 * wt * table.values[k] * psi.re / period);
    }
    Ok((pairwise_sum(&terms), pairwise_sum(&terms[..=cut]), c_max))
}

pub fn delta_identity_eval(
    f: &DiagonalCubicForm,
    w: &SmoothWeight,
    x: f64,
    cfg: &IdentityConfig,
) -> Result<IdentityRecord> {
    let m = f.m();
    if !(3..=4).contains(&m) {
        return precondition("the identity check is set up for m in {3, 4}");
    }
    if !(x > 0.0 && x <= 6.0) {
        return precondition("X must lie in (0, 6]");
    }
    let y = x.powf(1.5);
    let cy = c_y(y);
    if w.is_zero() {
        return Ok(IdentityRecord {
            x,
            y,
            c_y: cy,
            lhs: 0.0,
            rhs: 0.0,
            gap: 0.0,
            truncation_budget: 0.0,
            n_max: 0,
            c_max: 0,
        });
    }
    let ws = w.factors()?;
    if ws.len() != m {
        return precondition("weight dimension must match the form");
    }
    let lhs = lattice_count(f, w, x)?;
    let rf = form_radius(f, w)?;
    let b0 = b0_for(f, w)?;
    let period = (2.0 * (rf + 2.0)).ceil() + 1.0;
    // h(n/Y, ·) vanishes on [−R_F, R_F] once n/Y >= max(1, 2 R_F).
    let mut n_max = 0u64;
    while !HKernel::new((n_max + 1) as f64 / y)?.vanishes_on(rf) {
        n_max += 1;
    }
    let scale = x.powi(m as i32 - 3);
    let per_n: Vec<(f64, f64, i64)> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let (full, cut, c) = modulus_term(f, ws, &b0, period, x, n, cfg)?;
            let norm = scale / (n as f64).powi(m as i32);
            Ok((full * norm, cut * norm, c))
        })
        .collect::<Result<_>>()?;
    let full: Vec<f64> = per_n.iter().map(|t| t.0).collect();
    let cut: Vec<f64> = per_n.iter().map(|t| t.1).collect();
    let rhs = cy * pairwise_sum(&full);
    let rhs_cut = cy * pairwise_sum(&cut);
    Ok(IdentityRecord {
        x,
        y,
        c_y: cy,
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        truncation_budget: (rhs - rhs_cut).abs(),
        n_max,
        c_max: per_n.iter().map(|t| t.2).max().unwrap_or(0) as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weight_gives_zero() {
        let f = DiagonalCubicForm::new(vec![1, 1, -2]).unwrap();
        let w = SmoothWeight::Product(vec![Weight1D::Zero; 3]);
        let rec = delta_identity_eval(&f, &w, 2.0, &IdentityConfig::default()).unwrap();
        assert_eq!((rec.lhs, rec.rhs), (0.0, 0.0));
    }

    #[test]
    fn identity_at_x_two() {
        let f = DiagonalCubicForm::new(vec![1, 1, -2]).unwrap();
        let w = SmoothWeight::bumps(&[1.0, 1.0, 1.0], 0.4);
        let rec = delta_identity_eval(&f, &w, 2.0, &IdentityConfig::default()).unwrap();
        assert!((rec.lhs - (-3.0f64).exp()).abs() < 1e-15);
        assert!(rec.gap < 1e-3, "{rec:?}");
    }
}
