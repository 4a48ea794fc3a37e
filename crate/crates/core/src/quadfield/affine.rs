//! Detection of affine-quadratic (linearizable) fields.
//!
//! With `V*` the linear forms annihilating `F` and `K` the common kernel of
//! `V*`, the field is affine-quadratic exactly when `F` vanishes on `K`: then
//! the `V*` coordinates are constant and the remaining ones evolve by a
//! linear system with coefficients depending on those constants.

use nalgebra::DMatrix;

use super::QuadraticField;
use crate::linalg::{null_space, Mat3, Vec3};

const NULL_TOL: f64 = 1e-10;
const BLOCK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct AffineCertificate {
    /// Basis of `V*`, the linear forms `ℓ` with `ℓ ∘ F ≡ 0`.
    pub v_forms: Vec<Vec3>,
    /// Basis of the common kernel of `V*`.
    pub u_directions: Vec<Vec3>,
    /// New coordinates `y = T x`: rows are the `U` coordinates first, then
    /// the `V*` forms. Planar certificates use the upper-left 2x2 block.
    pub change_of_basis: Mat3,
    /// Largest coefficient of the quadratic-in-`U` block.
    pub residual: f64,
}

pub fn is_affine_quadratic(f: &QuadraticField) -> Option<AffineCertificate> {
    let n = f.dim();
    let c = f.max_coefficient().max(1.0);
    // columns: vec(A_i)
    let mut m = DMatrix::<f64>::zeros(n * n, n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                m[(j * n + k, i)] = f.coefficient(i, j, k);
            }
        }
    }
    let to3 = |v: &nalgebra::DVector<f64>| Vec3::from_fn(|i, _| if i < n { v[i] } else { 0.0 });
    let v_forms: Vec<Vec3> = if f.is_zero() {
        (0..n).map(|i| to3(&nalgebra::DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 }))).collect()
    } else {
        null_space(&m, NULL_TOL).iter().map(to3).collect()
    };
    let u_directions: Vec<Vec3> = if v_forms.is_empty() {
        (0..n)
            .map(|i| Vec3::from_fn(|j, _| if i == j { 1.0 } else { 0.0 }))
            .collect()
    } else {
        let w = DMatrix::from_fn(v_forms.len(), n, |r, col| v_forms[r][col]);
        null_space(&w, NULL_TOL).iter().map(to3).collect()
    };
    let mut residual = 0.0_f64;
    for i in 0..n {
        let a = f.matrix(i);
        for ka in &u_directions {
            for kb in &u_directions {
                residual = residual.max(ka.dot(&(a * kb)).abs());
            }
        }
    }
    if residual > BLOCK_TOL * c {
        return None;
    }
    let mut t = Mat3::identity();
    for (r, v) in u_directions.iter().chain(v_forms.iter()).enumerate() {
        for col in 0..3 {
            t[(r, col)] = v[col];
        }
    }
    Some(AffineCertificate {
        v_forms,
        u_directions,
        change_of_basis: t,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commuting_block_field_is_affine() {
        let f = QuadraticField::from_terms(3, &[(0, 2, 2, 1.0), (1, 0, 2, -1.0)]).unwrap();
        let cert = is_affine_quadratic(&f).unwrap();
        assert_eq!(cert.v_forms.len(), 1);
        assert!((cert.v_forms[0].abs() - Vec3::z()).norm() < 1e-12);
        assert!(cert.change_of_basis.determinant().abs() > 0.5);
    }

    #[test]
    fn zero_field_is_affine() {
        assert!(is_affine_quadratic(&QuadraticField::zero(3)).is_some());
        assert!(is_affine_quadratic(&QuadraticField::zero(2)).is_some());
    }

    #[test]
    fn riccati_is_not_affine() {
        let f = QuadraticField::from_terms(2, &[(0, 0, 0, 1.0)]).unwrap();
        assert!(is_affine_quadratic(&f).is_none());
    }

    #[test]
    fn heisenberg_dual_euler_is_affine() {
        // xi1' = -xi2 xi3, xi2' = xi1 xi3, xi3' = 0 for the identity metric
        let f = QuadraticField::from_terms(3, &[(0, 1, 2, -1.0), (1, 0, 2, 1.0)]).unwrap();
        assert!(is_affine_quadratic(&f).is_some());
    }
}
