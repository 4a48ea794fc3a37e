//! Completeness of planar homogeneous quadratic fields.
//!
//! A planar field is complete exactly when it is affine-quadratic, or when
//! after a linear change of coordinates it reads
//! `(y(ax + by), y(cx + dy))` with `(a + d)² − 4(ad − bc) < 0`.

use nalgebra::Matrix4;

use super::affine::{is_affine_quadratic, AffineCertificate};
use super::directions::{idempotents_of, invariant_direction_set, DirectionOptions};
use super::QuadraticField;
use crate::error::{Error, Result};
use crate::linalg::{binary_form_roots, Mat3};

pub const RESULTANT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum PlanarCase {
    /// Affine-quadratic field.
    Linearizable(AffineCertificate),
    /// Common linear factor `ℓ = factor[0] x + factor[1] y` with the
    /// coefficients `(a, b, c, d)` read in coordinates where `ℓ = y`.
    CommonFactor {
        factor: [f64; 2],
        abcd: [f64; 4],
        discriminant: f64,
        /// Coordinates `(x', y') = T (x, y)`, upper-left 2x2 block.
        transform: Mat3,
    },
}

impl PlanarCase {
    /// `"i"` for linearizable fields and `"ii"` for the common-factor case.
    pub fn label(&self) -> &'static str {
        match self {
            PlanarCase::Linearizable(_) => "i",
            PlanarCase::CommonFactor { .. } => "ii",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlanarVerdict {
    Complete(PlanarCase),
    Incomplete { witness: Option<[f64; 2]> },
}

impl PlanarVerdict {
    pub fn is_complete(&self) -> bool {
        matches!(self, PlanarVerdict::Complete(_))
    }
}

/// Coefficients `(p0, p1, p2)` of `p0 x² + p1 xy + p2 y²` for component `i`.
fn binary(f: &QuadraticField, i: usize) -> [f64; 3] {
    [
        f.coefficient(i, 0, 0),
        2.0 * f.coefficient(i, 0, 1),
        f.coefficient(i, 1, 1),
    ]
}

fn normalized(p: [f64; 3]) -> [f64; 3] {
    let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 0.0 {
        p
    } else {
        p.map(|v| v / n)
    }
}

fn eval_binary(p: &[f64; 3], x: f64, y: f64) -> f64 {
    p[0] * x * x + p[1] * x * y + p[2] * y * y
}

/// Sylvester resultant of two binary quadratics.
pub fn resultant(p: [f64; 3], q: [f64; 3]) -> f64 {
    Matrix4::new(
        p[0], p[1], p[2], 0.0, //
        0.0, p[0], p[1], p[2], //
        q[0], q[1], q[2], 0.0, //
        0.0, q[0], q[1], q[2],
    )
    .determinant()
}

fn common_roots(p: [f64; 3], q: [f64; 3]) -> Vec<[f64; 2]> {
    let p_zero = p.iter().all(|v| *v == 0.0);
    let (src, other) = if p_zero { (q, p) } else { (p, q) };
    binary_form_roots(&src)
        .into_iter()
        .filter(|[x, y]| eval_binary(&other, *x, *y).abs() <= 1e-8)
        .collect()
}

pub fn planar_completeness(f: &QuadraticField) -> Result<PlanarVerdict> {
    if f.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: f.dim(),
        });
    }
    if let Some(cert) = is_affine_quadratic(f) {
        return Ok(PlanarVerdict::Complete(PlanarCase::Linearizable(cert)));
    }
    let p = normalized(binary(f, 0));
    let q = normalized(binary(f, 1));
    let degenerate = p.iter().all(|v| *v == 0.0) || q.iter().all(|v| *v == 0.0);
    let res = resultant(p, q);
    let mut cases = Vec::new();
    if degenerate || res.abs() <= RESULTANT_TOL {
        for [r1, r2] in common_roots(p, q) {
            // ℓ vanishes on (r1, r2); the complementary coordinate is r1 x + r2 y
            let t = Mat3::new(r1, r2, 0.0, r2, -r1, 0.0, 0.0, 0.0, 1.0);
            let g = f.pushforward(&t)?;
            let gb = [binary(&g, 0), binary(&g, 1)];
            let lead = gb[0][0].abs().max(gb[1][0].abs());
            if lead > 1e-8 * f.max_coefficient().max(1.0) {
                return Err(Error::DegenerateInput(format!(
                    "common factor extraction left an x'^2 term of size {lead:e}"
                )));
            }
            let (a, b) = (gb[0][1], gb[0][2]);
            let (c, d) = (gb[1][1], gb[1][2]);
            let disc = (a + d).powi(2) - 4.0 * (a * d - b * c);
            cases.push(PlanarCase::CommonFactor {
                factor: [r2, -r1],
                abcd: [a, b, c, d],
                discriminant: disc,
                transform: t,
            });
        }
    }
    let scale = f.max_coefficient().max(1.0);
    if let Some(best) = cases
        .into_iter()
        .filter(|c| match c {
            PlanarCase::CommonFactor { discriminant, .. } => *discriminant < -1e-9 * scale * scale,
            PlanarCase::Linearizable(_) => true,
        })
        .min_by(|x, y| {
            let dx = if let PlanarCase::CommonFactor { discriminant, .. } = x { *discriminant } else { 0.0 };
            let dy = if let PlanarCase::CommonFactor { discriminant, .. } = y { *discriminant } else { 0.0 };
            dx.total_cmp(&dy)
        })
    {
        return Ok(PlanarVerdict::Complete(best));
    }
    let set = invariant_direction_set(f, &DirectionOptions::default())?;
    let witness = idempotents_of(f, &set).first().map(|x| [x[0], x[1]]);
    Ok(PlanarVerdict::Incomplete { witness })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_type_subsystem_is_complete() {
        let f = QuadraticField::from_terms(2, &[(0, 1, 1, 1.0), (1, 0, 1, -1.0)]).unwrap();
        match planar_completeness(&f).unwrap() {
            PlanarVerdict::Complete(PlanarCase::CommonFactor {
                abcd, discriminant, ..
            }) => {
                let expected = [0.0, 1.0, -1.0, 0.0];
                for (x, y) in abcd.iter().zip(expected) {
                    assert!((x - y).abs() < 1e-12);
                }
                assert!((discriminant + 4.0).abs() < 1e-12);
            }
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn riccati_is_incomplete() {
        let f = QuadraticField::from_terms(2, &[(0, 0, 0, 1.0)]).unwrap();
        assert!(!planar_completeness(&f).unwrap().is_complete());
    }

    #[test]
    fn swap_squares_has_witness() {
        let f = QuadraticField::from_terms(2, &[(0, 1, 1, 1.0), (1, 0, 0, 1.0)]).unwrap();
        match planar_completeness(&f).unwrap() {
            PlanarVerdict::Incomplete { witness: Some(w) } => {
                assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn resultant_detects_common_root() {
        // x y and x (x + y) share x
        assert!(resultant([0.0, 1.0, 0.0], [1.0, 1.0, 0.0]).abs() < 1e-15);
        assert!(resultant([1.0, 0.0, 1.0], [0.0, 1.0, 0.0]).abs() > 0.5);
    }
}
