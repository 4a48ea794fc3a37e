//! Homogeneous quadratic vector fields in two or three variables.

mod affine;
mod directions;
mod integrals;
mod planar;

pub use affine::{is_affine_quadratic, AffineCertificate};
pub use directions::{
    find_idempotents, invariant_direction_set, invariant_directions, polish_idempotent,
    DirectionKind, DirectionOptions, DirectionSet, InvariantDirection, DIRECTION_TOL, IDEMPOTENT_TOL,
};
pub use integrals::{
    cubic_residual, definite_combination, definite_combination_seeded, quadratic_first_integrals,
    DefiniteWitness, FirstIntegralBasis,
};
pub use planar::{planar_completeness, PlanarCase, PlanarVerdict};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::render_terms;
use crate::linalg::{Mat3, Vec3};

/// `F_i(X) = Xᵀ A_i X`. Two-dimensional fields use the upper-left 2x2 blocks
/// of the first two matrices; everything else is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticField {
    dim: usize,
    a: [[[f64; 3]; 3]; 3],
}

impl QuadraticField {
    pub fn zero(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
        Self {
            dim,
            a: [[[0.0; 3]; 3]; 3],
        }
    }

    /// Builds a field from (possibly non-symmetric) coefficient matrices,
    /// symmetrizing each one.
    pub fn new(mats: [Mat3; 3]) -> Self {
        let mut f = Self::zero(3);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    f.a[i][j][k] = 0.5 * (mats[i][(j, k)] + mats[i][(k, j)]);
                }
            }
        }
        f
    }

    pub fn new_planar(mats: [[[f64; 2]; 2]; 2]) -> Self {
        let mut f = Self::zero(2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    f.a[i][j][k] = 0.5 * (mats[i][j][k] + mats[i][k][j]);
                }
            }
        }
        f
    }

    /// Builds a field from monomials: `(i, j, k, c)` adds `c x_j x_k` to
    /// component `i` (zero-based).
    pub fn from_terms(dim: usize, terms: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut f = Self::zero(dim);
        for &(i, j, k, c) in terms {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: i.max(j).max(k) + 1,
                });
            }
            if j == k {
                f.a[i][j][j] += c;
            } else {
                f.a[i][j][k] += 0.5 * c;
                f.a[i][k][j] += 0.5 * c;
            }
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> f64 {
        self.a[i][j][k]
    }

    pub fn tensor(&self) -> &[[[f64; 3]; 3]; 3] {
        &self.a
    }

    pub fn matrix(&self, i: usize) -> Mat3 {
        Mat3::from_fn(|j, k| self.a[i][j][k])
    }

    pub fn max_coefficient(&self) -> f64 {
        self.a
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.max_coefficient() == 0.0
    }

    /// For planar fields the third component of `x` is ignored and the third
    /// component of the result is zero.
    pub fn evaluate(&self, x: &Vec3) -> Vec3 {
        let n = self.dim;
        let mut out = Vec3::zeros();
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                let mut r = 0.0;
                for k in 0..n {
                    r += self.a[i][j][k] * x[k];
                }
                s += x[j] * r;
            }
            out[i] = s;
        }
        out
    }

    pub fn evaluate_slice(&self, x: &[f64]) -> Vec<f64> {
        let mut v = Vec3::zeros();
        for (i, xi) in x.iter().take(self.dim).enumerate() {
            v[i] = *xi;
        }
        let f = self.evaluate(&v);
        f.iter().take(self.dim).cloned().collect()
    }

    /// `J[(i, m)] = dF_i / dx_m = 2 (A_i x)_m`.
    pub fn jacobian(&self, x: &Vec3) -> Mat3 {
        let n = self.dim;
        let mut j = Mat3::zeros();
        for i in 0..n {
            for m in 0..n {
                j[(i, m)] = 2.0 * (0..n).map(|k| self.a[i][m][k] * x[k]).sum::<f64>();
            }
        }
        j
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut f = self.clone();
        for v in f.a.iter_mut().flatten().flatten() {
            *v *= lambda;
        }
        f
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// The field `G(y) = T F(T⁻¹ y)` in the coordinates `y = T x`.
    pub fn pushforward(&self, t: &Mat3) -> Result<Self> {
        let t_inv = t
            .try_inverse()
            .ok_or_else(|| Error::BadParams("singular coordinate change".into()))?;
        let n = self.dim;
        let mut out = Self::zero(n);
        // A'_i = Σ_r T[i][r] T⁻ᵀ A_r T⁻¹
        let mats: Vec<Mat3> = (0..n).map(|r| self.matrix(r)).collect();
        for i in 0..n {
            let mut m = Mat3::zeros();
            for r in 0..n {
                m += mats[r] * t[(i, r)];
            }
            let m = t_inv.transpose() * m * t_inv;
            for j in 0..n {
                for k in 0..n {
                    out.a[i][j][k] = 0.5 * (m[(j, k)] + m[(k, j)]);
                }
            }
        }
        Ok(out)
    }

    /// Max coefficient difference; fields of different dimension differ by
    /// infinity.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.a
            .iter()
            .flatten()
            .flatten()
            .zip(other.a.iter().flatten().flatten())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    /// Component polynomials, e.g. `["x1*x2", "x3^2", "-x2*x3"]`.
    pub fn components(&self, var: &str) -> Vec<String> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut terms = Vec::new();
                for j in 0..n {
                    for k in j..n {
                        let c = if j == k {
                            self.a[i][j][j]
                        } else {
                            self.a[i][j][k] + self.a[i][k][j]
                        };
                        if c != 0.0 {
                            let mono = if j == k {
                                format!("{var}{}^2", j + 1)
                            } else {
                                format!("{var}{}*{var}{}", j + 1, k + 1)
                            };
                            terms.push((c, mono));
                        }
                    }
                }
                render_terms(&terms)
            })
            .collect()
    }

    /// Restriction to the first two coordinates with the third set to zero.
    pub fn planar_part(&self, idx: [usize; 2]) -> Self {
        let mut f = Self::zero(2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    f.a[i][j][k] = self.a[idx[i]][idx[j]][idx[k]];
                }
            }
        }
        f
    }
}

impl fmt::Display for QuadraticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.components("x").join(", "))
    }
}

pub fn evaluate(f: &QuadraticField, x: &Vec3) -> Vec3 {
    f.evaluate(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example4_lax() -> QuadraticField {
        QuadraticField::from_terms(
            3,
            &[(0, 1, 2, 0.5), (1, 0, 2, 1.5), (2, 0, 1, 2.0)],
        )
        .unwrap()
    }

    #[test]
    fn example4_idempotent_evaluates_to_itself() {
        let s = 3.0_f64.sqrt();
        let x = Vec3::new(1.0 / s, 1.0, 2.0 / s);
        let f = example4_lax();
        assert!((f.evaluate(&x) - x).amax() < 1e-15);
        assert_eq!(f.evaluate(&Vec3::zeros()), Vec3::zeros());
    }

    #[test]
    fn example5_field_at_ones() {
        let f = QuadraticField::from_terms(3, &[(0, 1, 2, 1.0), (1, 0, 1, 1.0), (2, 0, 2, 3.0)])
            .unwrap();
        assert_eq!(f.evaluate(&Vec3::new(1.0, 1.0, 1.0)), Vec3::new(1.0, 1.0, 3.0));
    }

    #[test]
    fn homogeneity() {
        let f = example4_lax();
        let x = Vec3::new(0.3, -0.7, 1.1);
        let l = -2.5;
        assert!((f.evaluate(&(x * l)) - f.evaluate(&x) * (l * l)).amax() < 1e-12);
    }

    #[test]
    fn pushforward_conjugates() {
        let f = example4_lax();
        let t = Mat3::new(1.0, 2.0, 0.0, 0.0, 1.0, -1.0, 0.7, 0.0, 1.0);
        let g = f.pushforward(&t).unwrap();
        let x = Vec3::new(0.2, 0.9, -0.4);
        assert!((g.evaluate(&(t * x)) - t * f.evaluate(&x)).amax() < 1e-13);
    }

    #[test]
    fn jacobian_matches_finite_difference() {
        let f = example4_lax();
        let x = Vec3::new(0.4, -1.0, 0.3);
        let j = f.jacobian(&x);
        let h = 1e-6;
        for m in 0..3 {
            let mut e = Vec3::zeros();
            e[m] = h;
            let fd = (f.evaluate(&(x + e)) - f.evaluate(&(x - e))) / (2.0 * h);
            assert!((fd - j.column(m)).amax() < 1e-8);
        }
    }

    #[test]
    fn rendering() {
        let f = QuadraticField::from_terms(3, &[(0, 0, 1, 1.0), (1, 2, 2, 1.0), (2, 1, 2, -1.0)])
            .unwrap();
        assert_eq!(f.components("xi"), vec!["xi1*xi2", "xi3^2", "-xi2*xi3"]);
    }
}
