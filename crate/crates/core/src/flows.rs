//! Geodesic flows of left-invariant metrics as quadratic vector fields.
//!
//! With `x` a velocity in the algebra, `S` the metric and `ξ = S x`:
//! - algebra Euler field: `ẋ = −x·x` for the Levi-Civita product,
//! - dual Euler field: `ξ̇ = ad_xᵀ ξ`, i.e. `(ad*_x ξ)(y) = −ξ([x, y])` and
//!   `ξ̇ = −ad*_x ξ`,
//! - Lax field (nondegenerate Killing form): `ẏ = [y, u⁻¹ y]` with `y = u x`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{u_from_metric, MetricOperatorU, QuadraticForm3, Space};
use crate::lie3::{LieAlgebra3, Tensor3};
use crate::linalg::{condition_number, Mat3, Vec3};
use crate::quadfield::QuadraticField;

pub const MAX_CONDITION: f64 = 1e12;

/// The metric on the algebra, converting a dual energy if necessary.
pub fn algebra_metric(metric: &QuadraticForm3) -> Result<QuadraticForm3> {
    match metric.space() {
        Space::Algebra => {
            metric.require_nondegenerate()?;
            Ok(metric.clone())
        }
        Space::Dual => metric.dual_form(),
    }
}

fn checked_inverse(metric: &QuadraticForm3) -> Result<Mat3> {
    let cond = condition_number(metric.matrix());
    if cond > MAX_CONDITION {
        return Err(Error::IllConditionedMetric(cond));
    }
    metric.inverse()
}

/// `e_i · e_j = Σ_k p[k][i][j] e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeviCivitaProduct {
    pub p: Tensor3,
}

impl LeviCivitaProduct {
    pub fn product(&self, x: &Vec3, y: &Vec3) -> Vec3 {
        Vec3::from_fn(|k, _| {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += self.p[k][i][j] * x[i] * y[j];
                }
            }
            s
        })
    }

    fn basis(&self, i: usize, j: usize) -> Vec3 {
        Vec3::new(self.p[0][i][j], self.p[1][i][j], self.p[2][i][j])
    }

    pub fn koszul_residual(&self, alg: &LieAlgebra3, metric: &QuadraticForm3) -> f64 {
        let e = [Vec3::x(), Vec3::y(), Vec3::z()];
        let g = |a: &Vec3, b: &Vec3| metric.polar(a, b);
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let lhs = g(&self.basis(i, j), &e[k]);
                    let rhs = 0.5
                        * (g(&alg.bracket(&e[i], &e[j]), &e[k]) - g(&alg.bracket(&e[j], &e[k]), &e[i])
                            + g(&alg.bracket(&e[k], &e[i]), &e[j]));
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        worst
    }

    /// `max ‖e_i·e_j − e_j·e_i − [e_i, e_j]‖`.
    pub fn torsion_residual(&self, alg: &LieAlgebra3) -> f64 {
        let e = [Vec3::x(), Vec3::y(), Vec3::z()];
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                let t = self.basis(i, j) - self.basis(j, i) - alg.bracket(&e[i], &e[j]);
                worst = worst.max(t.amax());
            }
        }
        worst
    }
}

pub fn levi_civita(alg: &LieAlgebra3, metric: &QuadraticForm3) -> Result<LeviCivitaProduct> {
    let metric = algebra_metric(metric)?;
    let s_inv = checked_inverse(&metric)?;
    let e = [Vec3::x(), Vec3::y(), Vec3::z()];
    let g = |a: &Vec3, b: &Vec3| metric.polar(a, b);
    let mut p = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let rhs = Vec3::from_fn(|k, _| {
                0.5 * (g(&alg.bracket(&e[i], &e[j]), &e[k]) - g(&alg.bracket(&e[j], &e[k]), &e[i])
                    + g(&alg.bracket(&e[k], &e[i]), &e[j]))
            });
            let v = s_inv * rhs;
            for k in 0..3 {
                p[k][i][j] = v[k];
            }
        }
    }
    Ok(LeviCivitaProduct { p })
}

pub fn euler_field_algebra(alg: &LieAlgebra3, metric: &QuadraticForm3) -> Result<QuadraticField> {
    let prod = levi_civita(alg, metric)?;
    let mats = [0, 1, 2].map(|k| Mat3::from_fn(|i, j| -prod.p[k][i][j]));
    Ok(QuadraticField::new(mats))
}

pub fn euler_field_dual(alg: &LieAlgebra3, metric: &QuadraticForm3) -> Result<QuadraticField> {
    let metric = algebra_metric(metric)?;
    let s_inv = checked_inverse(&metric)?;
    let c = alg.structure_constants();
    // ξ̇_j = Σ c[k][i][j] (S⁻¹ξ)_i ξ_k
    let mats = [0, 1, 2].map(|j| {
        Mat3::from_fn(|k, m| (0..3).map(|i| c[k][i][j] * s_inv[(i, m)]).sum())
    });
    Ok(QuadraticField::new(mats))
}

pub fn lax_field(alg: &LieAlgebra3, metric: &QuadraticForm3) -> Result<QuadraticField> {
    let u = u_from_metric(alg, &algebra_metric(metric)?)?;
    lax_field_from_u(alg, &u)
}

pub fn lax_field_from_u(alg: &LieAlgebra3, u: &MetricOperatorU) -> Result<QuadraticField> {
    let u_inv = u.u_inverse()?;
    let c = alg.structure_constants();
    // ẏ_k = Σ c[k][i][j] y_i (u⁻¹y)_j
    let mats = [0, 1, 2].map(|k| {
        Mat3::from_fn(|i, m| (0..3).map(|j| c[k][i][j] * u_inv[(j, m)]).sum())
    });
    Ok(QuadraticField::new(mats))
}

/// The energy `⟨x, x⟩` on the algebra, or `ξᵀ S⁻¹ ξ` on the dual.
pub fn energy_form(metric: &QuadraticForm3, space: Space) -> Result<QuadraticForm3> {
    let metric = algebra_metric(metric)?;
    match space {
        Space::Algebra => Ok(metric),
        Space::Dual => metric.dual_form(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    EulerAlgebra,
    EulerDual,
    Lax,
}

impl FieldKind {
    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::EulerAlgebra => "euler-algebra",
            FieldKind::EulerDual => "euler-dual",
            FieldKind::Lax => "lax",
        }
    }

    pub fn variable(&self) -> &'static str {
        match self {
            FieldKind::EulerDual => "xi",
            _ => "x",
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler-algebra" => Ok(FieldKind::EulerAlgebra),
            "euler-dual" => Ok(FieldKind::EulerDual),
            "lax" => Ok(FieldKind::Lax),
            other => Err(Error::Parse(format!("unknown field kind '{other}'"))),
        }
    }
}

/// A geodesic field together with its energy in the field's coordinates and
/// the linear map from algebra velocities to those coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicField {
    pub kind: FieldKind,
    pub field: QuadraticField,
    pub energy: QuadraticForm3,
    pub from_velocity: Mat3,
}

pub fn geodesic_field(
    alg: &LieAlgebra3,
    metric: &QuadraticForm3,
    kind: FieldKind,
) -> Result<GeodesicField> {
    let metric = algebra_metric(metric)?;
    let s = *metric.matrix();
    match kind {
        FieldKind::EulerAlgebra => Ok(GeodesicField {
            kind,
            field: euler_field_algebra(alg, &metric)?,
            energy: metric.clone(),
            from_velocity: Mat3::identity(),
        }),
        FieldKind::EulerDual => Ok(GeodesicField {
            kind,
            field: euler_field_dual(alg, &metric)?,
            energy: metric.dual_form()?,
            from_velocity: s,
        }),
        FieldKind::Lax => {
            let u = u_from_metric(alg, &metric)?;
            let energy = QuadraticForm3::algebra(u.k * u.u_inverse()?);
            Ok(GeodesicField {
                kind,
                field: lax_field_from_u(alg, &u)?,
                energy,
                from_velocity: u.u,
            })
        }
    }
}
