//! Singular points of the sections `V_c`: points of `V_c` where `∇F(x)` is
//! proportional to `c`.

use serde::{Deserialize, Serialize};

use crate::arith::field::Elem;
use crate::arith::FiniteField;
use crate::error::{precondition, Result};
use crate::form::DiagonalCubicForm;
use crate::pointcount::{for_each_section_point, CubeTables};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    /// Every `c_i` is a unit mod `p`: the local ring is `Σ t_i^2`.
    OrdinaryDouble,
    /// Some `c_i ≡ 0 mod p`: those directions contribute cubic terms `t_i^3`.
    Cuspidal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    /// Degree `r` of the field `F_{p^r}` the point was found over.
    pub degree: u32,
    /// Coordinates as codes in `F_{p^r}`.
    pub coords: Vec<Elem>,
    pub kind: SingularKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularLocus {
    pub points: Vec<SingularPoint>,
    /// Indices `i` with `p ∤ c_i`.
    pub unit_indices: Vec<usize>,
    /// Indices with `p | c_i`, the cubic directions of a cuspidal point.
    pub cubic_directions: Vec<usize>,
}

/// Singular points of `V_c` over `F_{p^r}` for `r = 1..=r_max`. Each field is
/// enumerated in full, so a point over `F_p` is listed again for every `r`.
pub fn singular_locus(
    f: &DiagonalCubicForm,
    c: &[i64],
    p: u64,
    r_max: u32,
) -> Result<SingularLocus> {
    if c.len() != f.m() {
        return precondition("c must have one entry per variable");
    }
    if (6 * f.lcm()) % p as i128 == 0 {
        return precondition(format!("p = {p} divides 6·lcm(F)"));
    }
    if c.iter().all(|&ci| ci % p as i64 == 0) {
        return precondition(format!("p = {p} divides c"));
    }
    let unit_indices: Vec<usize> = (0..c.len()).filter(|&i| c[i] % p as i64 != 0).collect();
    let cubic_directions: Vec<usize> = (0..c.len()).filter(|&i| c[i] % p as i64 == 0).collect();
    let kind = if cubic_directions.is_empty() {
        SingularKind::OrdinaryDouble
    } else {
        SingularKind::Cuspidal
    };
    let mut points = Vec::new();
    for r in 1..=r_max {
        let field = FiniteField::new(p, r)?;
        let tables = CubeTables::new(f, &field);
        let cf: Vec<Elem> = c.iter().map(|&ci| field.from_int(ci)).collect();
        let three_f: Vec<Elem> = f
            .coeffs()
            .iter()
            .map(|&fi| field.from_int(3 * fi))
            .collect();
        for_each_section_point(f, c, &field, &tables, |x| {
            let grad: Vec<Elem> = x
                .iter()
                .zip(&three_f)
                .map(|(&xi, &a)| field.mul(a, field.mul(xi, xi)))
                .collect();
            let parallel = (0..x.len()).all(|i| {
                (i + 1..x.len()).all(|j| field.mul(grad[i], cf[j]) == field.mul(grad[j], cf[i]))
            });
            if parallel {
                points.push(SingularPoint {
                    degree: r,
                    coords: x.to_vec(),
                    kind,
                });
            }
        });
    }
    Ok(SingularLocus {
        points,
        unit_indices,
        cubic_directions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sections_have_no_singular_points() {
        let f = DiagonalCubicForm::fermat(4);
        let mut checked = 0;
        for c in [[1, 2, 3, 4], [1, 1, 2, 3], [1, 0, 2, 5], [2, 1, 1, 1]] {
            let dual = crate::dual::dual_form_i128(&f, &c).unwrap();
            if dual % 7 != 0 {
                assert!(
                    singular_locus(&f, &c, 7, 2).unwrap().points.is_empty(),
                    "{c:?}"
                );
                checked += 1;
            }
        }
        assert!(checked >= 2);
    }

    #[test]
    fn fermat_diagonal_section_has_nodes() {
        let f = DiagonalCubicForm::fermat(4);
        let locus = singular_locus(&f, &[1, 1, 1, 1], 7, 1).unwrap();
        assert!(!locus.points.is_empty());
        assert!(locus
            .points
            .iter()
            .all(|p| p.kind == SingularKind::OrdinaryDouble));
    }

    #[test]
    fn divisible_entries_give_cuspidal_tags() {
        let f = DiagonalCubicForm::fermat(4);
        let locus = singular_locus(&f, &[1, 1, 7, 7], 7, 2).unwrap();
        assert!(!locus.points.is_empty());
        assert!(locus
            .points
            .iter()
            .all(|p| p.kind == SingularKind::Cuspidal));
        assert_eq!(locus.cubic_directions, vec![2, 3]);
    }
}
