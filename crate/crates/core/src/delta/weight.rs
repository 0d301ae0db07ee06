//! Compactly supported smooth weights.

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::quad::integrate;

use super::omega0;

/// `S(t)`: smooth step, 0 for `t <= 0`, 1 for `t >= 1`, all derivatives
/// vanishing at both ends.
pub fn smooth_step(t: f64) -> f64 {
    let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        f(t) / (f(t) + f(1.0 - t))
    }
}

/// One-variable smooth weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Weight1D {
    /// `ω_0((x − center)/radius)`.
    Bump {
        center: f64,
        radius: f64,
    },
    /// 1 on `[lo, hi]`, rising over `[lo − lo_taper, lo]` and falling over
    /// `[hi, hi + hi_taper]`.
    Plateau {
        lo: f64,
        hi: f64,
        lo_taper: f64,
        hi_taper: f64,
    },
    /// Piecewise-linear interpolation of `(x, y)` samples, zero outside.
    Table {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
    Zero,
}

impl Weight1D {
    pub fn bump(center: f64, radius: f64) -> Self {
        Weight1D::Bump { center, radius }
    }

    /// Symmetric plateau, 1 on `[lo, hi]` with taper width `taper`.
    pub fn plateau(lo: f64, hi: f64, taper: f64) -> Self {
        Weight1D::Plateau {
            lo,
            hi,
            lo_taper: taper,
            hi_taper: taper,
        }
    }

    /// A dyadic weight `D` on `R_{>0}`: 1 on `[1, 2]`, supported on `[1/2, 4]`.
    pub fn dyadic() -> Self {
        Weight1D::Plateau {
            lo: 1.0,
            hi: 2.0,
            lo_taper: 0.5,
            hi_taper: 2.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Weight1D::Bump { center, radius } => omega0((x - center) / radius),
            Weight1D::Plateau {
                lo,
                hi,
                lo_taper,
                hi_taper,
            } => {
                if x < *lo {
                    smooth_step((x - (lo - lo_taper)) / lo_taper)
                } else if x > *hi {
                    smooth_step((hi + hi_taper - x) / hi_taper)
                } else {
                    1.0
                }
            }
            Weight1D::Table { xs, ys } => {
                if xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
                    return 0.0;
                }
                let i = xs.partition_point(|&t| t <= x).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
                ys[i - 1] + t * (ys[i] - ys[i - 1])
            }
            Weight1D::Zero => 0.0,
        }
    }

    /// Closed interval containing the support (`None` for the zero weight).
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Weight1D::Bump { center, radius } => Some((center - radius, center + radius)),
            Weight1D::Plateau {
                lo,
                hi,
                lo_taper,
                hi_taper,
            } => Some((lo - lo_taper, hi + hi_taper)),
            Weight1D::Table { xs, .. } => Some((*xs.first()?, *xs.last()?)),
            Weight1D::Zero => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Weight1D::Zero)
    }
}

/// Cuspidal weight on `R^3`:
/// `ν(y) = w_0(F_0(y)) ∫_1^{A_0} d^×A ∏_i D(|y_i|/A)`, `F_0 = y_1³ + y_2³ + y_3³`.
///
/// Its support avoids the coordinate hyperplanes: `|y_i| >= 1/2` on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspidalNu {
    pub w0: Weight1D,
    pub d: Weight1D,
    pub a0: f64,
}

impl Default for CuspidalNu {
    fn default() -> Self {
        Self::new(2.0)
    }
}

impl CuspidalNu {
    /// `w_0` a plateau equal to 1 on `[−1, 1]`, `D` the dyadic weight.
    pub fn new(a0: f64) -> Self {
        Self {
            w0: Weight1D::plateau(-1.0, 1.0, 1.0),
            d: Weight1D::dyadic(),
            a0,
        }
    }

    /// `∫_1^{A_0} d^×A ∏ D(|y_i|/A)`, integrated in `s = ln A`.
    pub fn a_integral(&self, y: &[f64; 3]) -> f64 {
        if y.iter().any(|&t| t == 0.0) || self.a0 <= 1.0 {
            return 0.0;
        }
        let Some((dlo, dhi)) = self.d.support() else {
            return 0.0;
        };
        // A must satisfy dlo <= |y_i|/A <= dhi for every i.
        let mut lo = 0.0f64;
        let mut hi = self.a0.ln();
        for &t in y {
            lo = lo.max((t.abs() / dhi).ln());
            hi = hi.min((t.abs() / dlo).ln());
        }
        if lo >= hi {
            return 0.0;
        }
        let f = |s: f64| {
            let a = s.exp();
            y.iter().map(|&t| self.d.eval(t.abs() / a)).product::<f64>()
        };
        integrate(f, lo, hi, 4, 1e-12, 1e-10)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    }

    pub fn eval(&self, y: &[f64; 3]) -> f64 {
        let f0 = y.iter().map(|t| t * t * t).sum::<f64>();
        let outer = self.w0.eval(f0);
        if outer == 0.0 {
            return 0.0;
        }
        outer * self.a_integral(y)
    }

    /// Bound on `|y_i|` over the support.
    pub fn radius(&self) -> f64 {
        self.d.support().map_or(0.0, |(_, hi)| hi * self.a0)
    }
}

/// A weight on `R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SmoothWeight {
    /// `w(x) = ∏ w_i(x_i)`.
    Product(Vec<Weight1D>),
    /// `ν` on `R^3`.
    Cuspidal(CuspidalNu),
    /// `w(y, z) = ν(y) ν(−z)` on `R^6`.
    CuspidalPair(CuspidalNu),
}

impl SmoothWeight {
    /// Product of identical bumps centered at `center` with common radius.
    pub fn bumps(center: &[f64], radius: f64) -> Self {
        SmoothWeight::Product(center.iter().map(|&c| Weight1D::bump(c, radius)).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            SmoothWeight::Product(ws) => ws.len(),
            SmoothWeight::Cuspidal(_) => 3,
            SmoothWeight::CuspidalPair(_) => 6,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SmoothWeight::Product(ws) => {
                let mut acc = 1.0;
                for (w, &t) in ws.iter().zip(x) {
                    acc *= w.eval(t);
                    if acc == 0.0 {
                        break;
                    }
                }
                acc
            }
            SmoothWeight::Cuspidal(nu) => nu.eval(&[x[0], x[1], x[2]]),
            SmoothWeight::CuspidalPair(nu) => {
                let a = nu.eval(&[x[0], x[1], x[2]]);
                if a == 0.0 {
                    return 0.0;
                }
                a * nu.eval(&[-x[3], -x[4], -x[5]])
            }
        }
    }

    /// Separable factors, when the weight is a product.
    pub fn factors(&self) -> Result<&[Weight1D]> {
        match self {
            SmoothWeight::Product(ws) => Ok(ws),
            _ => precondition("this operation needs a separable weight"),
        }
    }

    /// Per-coordinate bounding box of the support.
    pub fn bounding_box(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            SmoothWeight::Product(ws) => ws.iter().map(|w| w.support()).collect(),
            SmoothWeight::Cuspidal(nu) => {
                let r = nu.radius();
                Some(vec![(-r, r); 3])
            }
            SmoothWeight::CuspidalPair(nu) => {
                let r = nu.radius();
                Some(vec![(-r, r); 6])
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SmoothWeight::Product(ws) => ws.iter().any(|w| w.is_zero()),
            SmoothWeight::Cuspidal(c) | SmoothWeight::CuspidalPair(c) => {
                c.a0 <= 1.0 || c.w0.is_zero() || c.d.is_zero()
            }
        }
    }

    /// Whether a product weight's support stays off every coordinate
    /// hyperplane, i.e. off the Hessian locus `∏ x_i = 0` of a diagonal form.
    pub fn is_clean_for_diagonal(&self) -> bool {
        match self.bounding_box() {
            Some(b) => b.iter().all(|&(lo, hi)| lo > 0.0 || hi < 0.0),
            None => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_shape() {
        let w = Weight1D::plateau(-1.0, 1.0, 0.5);
        assert_eq!(w.eval(0.3), 1.0);
        assert_eq!(w.eval(1.6), 0.0);
        assert!((w.eval(1.25) - 0.5).abs() < 1e-12);
        assert!((w.eval(-1.25) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dyadic_is_one_on_unit_octave() {
        let d = Weight1D::dyadic();
        assert_eq!(d.eval(1.5), 1.0);
        assert_eq!(d.eval(0.4), 0.0);
        assert_eq!(d.eval(4.5), 0.0);
    }

    #[test]
    fn table_interpolates() {
        let t = Weight1D::Table {
            xs: vec![0.0, 1.0, 2.0],
            ys: vec![0.0, 2.0, 0.0],
        };
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(2.5), 0.0);
    }

    #[test]
    fn cuspidal_support_avoids_axes() {
        let nu = CuspidalNu::default();
        assert_eq!(nu.eval(&[0.2, 1.0, -1.0]), 0.0);
        // |y_i|/A stays in [1, 2] for every A in [1, 2].
        let v = nu.a_integral(&[2.0, 2.0, -2.0]);
        assert!((v - 2f64.ln()).abs() < 1e-9, "{v}");
        // F_0(y) = 8 lies outside the support of w_0.
        assert_eq!(nu.eval(&[2.0, 2.0, -2.0]), 0.0);
    }
}
