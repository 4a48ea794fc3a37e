//! Small dense linear-algebra helpers shared by the analysis modules.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Orthonormal basis of the null space of `m`, using singular values below
/// `rel_tol * sigma_max` (or exactly zero when `m` vanishes).
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * sigma_max;
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            out.push(v_t.row(k).transpose());
        }
    }
    // the thin decomposition of a tall matrix returns exactly `cols` rows
    out
}

/// Unit vector spanning the (numerical) kernel of a 3x3 matrix.
pub fn smallest_singular_vector(m: &Mat3) -> (Vec3, f64) {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, s)| (k, *s))
        .expect("three singular values");
    (v_t.row(k).transpose().normalize(), s)
}

/// Singular values sorted in decreasing order.
pub fn singular_values_desc(m: &Mat3) -> [f64; 3] {
    let sv = m.singular_values();
    let mut v = [sv[0], sv[1], sv[2]];
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn condition_number(m: &Mat3) -> f64 {
    let s = singular_values_desc(m);
    if s[2] == 0.0 {
        f64::INFINITY
    } else {
        s[0] / s[2]
    }
}

/// Real projective roots of a binary form `sum_k c[k] x^(n-k) y^k`, returned
/// as unit vectors `(x, y)` with one representative per antipodal pair.
///
/// Candidates come from companion-matrix eigenvalues in the chart `y = 1`
/// (plus the point `y = 0` when the leading coefficient vanishes) and are
/// polished by Newton's method on the angle.
pub fn binary_form_roots(c: &[f64]) -> Vec<[f64; 2]> {
    let n = c.len().saturating_sub(1);
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if n == 0 || scale == 0.0 {
        return Vec::new();
    }
    let c: Vec<f64> = c.iter().map(|v| v / scale).collect();
    let mut angles = Vec::new();

    let mut lead = 0;
    while lead < n && c[lead].abs() <= 1e-13 {
        lead += 1;
    }
    if lead > 0 {
        angles.push(0.0);
    }
    let poly = &c[lead..];
    let deg = poly.len() - 1;
    if deg >= 1 {
        let mut comp = DMatrix::<f64>::zeros(deg, deg);
        for j in 0..deg {
            comp[(0, j)] = -poly[j + 1] / poly[0];
        }
        for i in 1..deg {
            comp[(i, i - 1)] = 1.0;
        }
        for z in comp.complex_eigenvalues().iter() {
            if z.im.abs() <= 1e-6 * (1.0 + z.re.abs()) {
                // x = t y with y = 1
                angles.push(f64::atan2(1.0, z.re));
            }
        }
    }

    let h = |th: f64| -> (f64, f64) {
        let (s, co) = th.sin_cos();
        let mut val = 0.0;
        let mut der = 0.0;
        for (k, ck) in c.iter().enumerate() {
            let p = (n - k) as i32;
            let q = k as i32;
            val += ck * co.powi(p) * s.powi(q);
            let mut d = 0.0;
            if p > 0 {
                d -= p as f64 * co.powi(p - 1) * s.powi(q + 1);
            }
            if q > 0 {
                d += q as f64 * co.powi(p + 1) * s.powi(q - 1);
            }
            der += ck * d;
        }
        (val, der)
    };

    let mut roots: Vec<f64> = Vec::new();
    for mut th in angles {
        for _ in 0..100 {
            let (v, d) = h(th);
            if v == 0.0 || d == 0.0 {
                break;
            }
            let step = v / d;
            th -= step.clamp(-0.1, 0.1);
            if step.abs() < 1e-16 {
                break;
            }
        }
        if h(th).0.abs() > 1e-11 {
            continue;
        }
        let th = th.rem_euclid(std::f64::consts::PI);
        let dup = roots.iter().any(|r| {
            let d = (r - th).abs();
            d.min(std::f64::consts::PI - d) < 1e-7
        });
        if !dup {
            roots.push(th);
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.into_iter().map(|th| [th.cos(), th.sin()]).collect()
}

/// Symmetrize a square matrix exactly.
pub fn symmetrize(m: &Mat3) -> Mat3 {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

/// Orthonormal pair completing `n` (unit) to a right-handed frame.
pub fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let a = if n.x.abs() < 0.6 {
        Vec3::x()
    } else if n.y.abs() < 0.6 {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let t1 = (a - n * n.dot(&a)).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_with_three_real_roots() {
        // x (x - y) (x + 2y) = x^3 + x^2 y - 2 x y^2
        let r = binary_form_roots(&[1.0, 1.0, -2.0, 0.0]);
        assert_eq!(r.len(), 3);
        for [x, y] in r {
            let v = x * x * x + x * x * y - 2.0 * x * y * y;
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_root_at_infinity() {
        // y^3 - x^2 y = y (y - x)(y + x) has the root y = 0
        let r = binary_form_roots(&[0.0, -1.0, 0.0, 1.0]);
        assert_eq!(r.len(), 3);
        assert!(r.iter().any(|[_, y]| y.abs() < 1e-12));
    }

    #[test]
    fn double_root_is_found() {
        // (x - y)^2 (x + y) = x^3 - x^2 y - x y^2 + y^3
        let r = binary_form_roots(&[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((&m * v).norm() < 1e-14);
        }
    }
}
