//! The archimedean density of `F_0(ỹ) = ã` against a weight `ν` on `R³`, and
//! the matching weighted lattice count.

use rayon::prelude::*;

use crate::delta::{CuspidalNu, SmoothWeight};
use crate::error::{precondition, Result};
use crate::quad::{integrate, QuadResult};

use super::exact_cbrt;

/// Distance of the support of `ν` from the plane `ỹ_1 = 0`, and the box.
fn geometry(nu: &SmoothWeight) -> Result<(f64, Vec<(f64, f64)>)> {
    if nu.dim() != 3 {
        return precondition("ν must be a weight on R^3");
    }
    let gap = match nu {
        SmoothWeight::Product(ws) => ws[0]
            .support()
            .filter(|&(lo, hi)| lo > 0.0 || hi < 0.0)
            .map(|(lo, hi)| lo.abs().min(hi.abs())),
        SmoothWeight::Cuspidal(c) => c.d.support().filter(|&(lo, _)| lo > 0.0).map(|(lo, _)| lo),
        SmoothWeight::CuspidalPair(_) => None,
    };
    let Some(gap) = gap else {
        return precondition("the support of ν meets ỹ_1 = 0");
    };
    let bbox = nu.bounding_box().unwrap_or_default();
    Ok((gap, bbox))
}

/// `σ_∞(a, ν, X) = ∫∫ dỹ_2 dỹ_3 ν(ỹ)/(3ỹ_1²)` on `F_0(ỹ) = a/X³`, with `ỹ_1`
/// the real cube root. Depends on `a, X` only through `a/X³`.
pub fn sigma_infty(a: f64, nu: &SmoothWeight, x: f64) -> Result<QuadResult> {
    if x <= 0.0 {
        return precondition("X must be positive");
    }
    let (gap, bbox) = geometry(nu)?;
    if nu.is_zero() {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let at = a / x.powi(3);
    let (y2lo, y2hi) = bbox[1];
    let (y3lo, y3hi) = bbox[2];
    let integrand = |y2: f64, y3: f64| {
        let y1 = (at - y2.powi(3) - y3.powi(3)).cbrt();
        if y1.abs() < gap {
            0.0
        } else {
            nu.eval(&[y1, y2, y3]) / (3.0 * y1 * y1)
        }
    };
    let inner = |y2: f64| {
        integrate(|y3| integrand(y2, y3), y3lo, y3hi, 8, 1e-11, 1e-8)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    let out = integrate(inner, y2lo, y2hi, 8, 1e-9, 1e-7)?;
    if !out.value.is_finite() {
        return precondition("inner quadrature failed");
    }
    Ok(out)
}

/// `(2ε)^{-1} ∫_{|F_0(ỹ) − ã| <= ε} ν(ỹ) dỹ`, integrating `ỹ_1` over the
/// slab directly instead of through the Jacobian.
pub fn sigma_infty_thickened(a: f64, nu: &SmoothWeight, x: f64, eps: f64) -> Result<QuadResult> {
    if x <= 0.0 || eps <= 0.0 {
        return precondition("X and ε must be positive");
    }
    let (_, bbox) = geometry(nu)?;
    let at = a / x.powi(3);
    let (y2lo, y2hi) = bbox[1];
    let (y3lo, y3hi) = bbox[2];
    let slab = |y2: f64, y3: f64| {
        let t = at - y2.powi(3) - y3.powi(3);
        let (lo, hi) = ((t - eps).cbrt(), (t + eps).cbrt());
        integrate(|y1| nu.eval(&[y1, y2, y3]), lo, hi, 2, 1e-13, 1e-8)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    let inner = |y2: f64| {
        integrate(|y3| slab(y2, y3), y3lo, y3hi, 24, 1e-12, 1e-7)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    let out = integrate(inner, y2lo, y2hi, 24, 1e-10, 1e-6)?;
    if !out.value.is_finite() {
        return precondition("inner quadrature failed");
    }
    Ok(QuadResult {
        value: out.value / (2.0 * eps),
        error: out.error / (2.0 * eps),
        evaluations: out.evaluations,
    })
}

/// `σ_∞` for a cuspidal weight, with the `A`-integral taken outside.
///
/// Scaling `ỹ = A t` turns the level set `F_0(ỹ) = ã` into `F_0(t) = ã/A³`, so
/// `σ_∞(ã) = w_0(ã) ∫_0^{ln A_0} τ(ã e^{−3s}) ds` with
/// `τ(b) = ∫∫ dt_2 dt_3 ∏ D(|t_i|)/(3t_1²)` on `F_0(t) = b`. `τ` is tabulated
/// once on a uniform grid and interpolated with four-point Lagrange weights.
#[derive(Debug, Clone)]
pub struct CuspidalDensity {
    nu: CuspidalNu,
    lo: f64,
    step: f64,
    tau: Vec<f64>,
}

impl CuspidalDensity {
    pub fn new(nu: &CuspidalNu, nodes: usize) -> Result<Self> {
        let Some((dlo, dhi)) = nu.d.support() else {
            return precondition("D has empty support");
        };
        if dlo <= 0.0 {
            return precondition("the support of D must avoid 0");
        }
        let (wlo, whi) = nu.w0.support().unwrap_or((0.0, 0.0));
        let bmax = wlo.abs().max(whi.abs());
        let nodes = nodes.max(8);
        let step = 2.0 * bmax / (nodes - 1) as f64;
        let lo = -bmax - step;
        let tau = (0..nodes + 2)
            .into_par_iter()
            .map(|i| tau(nu, lo + i as f64 * step, dlo, dhi))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            nu: nu.clone(),
            lo,
            step,
            tau,
        })
    }

    fn tau_at(&self, b: f64) -> f64 {
        let x = (b - self.lo) / self.step;
        let i = (x.floor() as isize).clamp(1, self.tau.len() as isize - 3) as usize;
        let t = x - i as f64;
        let (f0, f1, f2, f3) = (
            self.tau[i - 1],
            self.tau[i],
            self.tau[i + 1],
            self.tau[i + 2],
        );
        -t * (t - 1.0) * (t - 2.0) / 6.0 * f0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * f1
            - (t + 1.0) * t * (t - 2.0) / 2.0 * f2
            + (t + 1.0) * t * (t - 1.0) / 6.0 * f3
    }

    /// `σ_∞(a, ν, X)`.
    pub fn sigma(&self, a: f64, x: f64) -> Result<QuadResult> {
        let at = a / x.powi(3);
        let outer = self.nu.w0.eval(at);
        if outer == 0.0 || self.nu.a0 <= 1.0 {
            return Ok(QuadResult {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }
        let r = integrate(
            |s| self.tau_at(at * (-3.0 * s).exp()),
            0.0,
            self.nu.a0.ln(),
            4,
            1e-13,
            1e-10,
        )?;
        Ok(QuadResult {
            value: outer * r.value,
            error: outer * r.error,
            evaluations: r.evaluations,
        })
    }
}

/// `τ(b)`: the level-set integral of `∏ D(|t_i|)/(3t_1²)` on `F_0(t) = b`.
fn tau(nu: &CuspidalNu, b: f64, dlo: f64, dhi: f64) -> Result<f64> {
    let integrand = |t2: f64, t3: f64| {
        let d23 = nu.d.eval(t2.abs()) * nu.d.eval(t3.abs());
        if d23 == 0.0 {
            return 0.0;
        }
        let t1 = (b - t2.powi(3) - t3.powi(3)).cbrt();
        if t1.abs() < dlo {
            0.0
        } else {
            d23 * nu.d.eval(t1.abs()) / (3.0 * t1 * t1)
        }
    };
    // Integrate each sign of t_2, t_3 separately over |t| in [dlo, dhi].
    let mut total = 0.0;
    for s2 in [-1.0, 1.0] {
        for s3 in [-1.0, 1.0] {
            let inner = |u2: f64| {
                integrate(|u3| integrand(s2 * u2, s3 * u3), dlo, dhi, 4, 1e-13, 1e-10)
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN)
            };
            total += integrate(inner, dlo, dhi, 4, 1e-12, 1e-9)?.value;
        }
    }
    if !total.is_finite() {
        return precondition("inner quadrature failed");
    }
    Ok(total)
}

/// `N_{F_a,ν}(X) = Σ_{y ∈ Z³, F_0(y) = a} ν(y/X)`.
pub fn n_weighted(a: i64, nu: &SmoothWeight, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return precondition("X must be positive");
    }
    let (_, bbox) = geometry(nu)?;
    let lo = |i: usize| (bbox[i].0 * x).floor() as i64;
    let hi = |i: usize| (bbox[i].1 * x).ceil() as i64;
    let mut total = 0.0;
    for y2 in lo(1)..=hi(1) {
        for y3 in lo(2)..=hi(2) {
            let t = a as i128 - (y2 as i128).pow(3) - (y3 as i128).pow(3);
            if let Some(y1) = exact_cbrt(t) {
                total += nu.eval(&[y1 as f64 / x, y2 as f64 / x, y3 as f64 / x]);
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nu() -> SmoothWeight {
        SmoothWeight::Cuspidal(CuspidalNu::default())
    }

    #[test]
    fn unreachable_level_is_zero() {
        // w_0 vanishes off [−2, 2].
        let s = sigma_infty(3.0, &nu(), 1.0).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn scale_invariance() {
        let a = sigma_infty(1.0, &nu(), 1.0).unwrap().value;
        let b = sigma_infty(8.0, &nu(), 2.0).unwrap().value;
        assert!(a > 0.0);
        assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn tabulated_density_matches_direct_quadrature() {
        let c = CuspidalNu::default();
        let dens = CuspidalDensity::new(&c, 161).unwrap();
        for a in [0.0, 0.5, 1.0, -1.3, 1.9] {
            let direct = sigma_infty(a, &SmoothWeight::Cuspidal(c.clone()), 1.0)
                .unwrap()
                .value;
            let tab = dens.sigma(a, 1.0).unwrap().value;
            assert!(
                (direct - tab).abs() < 1e-6 * direct.abs().max(1e-3),
                "{a}: {direct} vs {tab}"
            );
        }
    }

    #[test]
    fn axis_touching_weight_is_rejected() {
        let w = SmoothWeight::bumps(&[0.0, 1.0, 1.0], 0.5);
        assert!(sigma_infty(1.0, &w, 1.0).is_err());
    }

    #[test]
    fn bump_weight_density_matches_thickening() {
        let w = SmoothWeight::bumps(&[1.0, 1.0, -1.0], 0.3);
        let s = sigma_infty(1.0, &w, 1.0).unwrap().value;
        let t = sigma_infty_thickened(1.0, &w, 1.0, 1e-3).unwrap().value;
        assert!(s > 0.0);
        assert!((s - t).abs() < 1e-3 * s.max(1.0), "{s} vs {t}");
    }
}
