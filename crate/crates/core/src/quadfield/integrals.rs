//! Quadratic first integrals and positive-definite combinations of them.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::QuadraticField;
use crate::linalg::{binary_form_roots, null_space, Mat3};

pub const NULL_TOL: f64 = 1e-10;
pub const INTEGRAL_TOL: f64 = 1e-10;
/// `λ_min > DEFINITE_TOL · ‖Q‖` counts as positive definite.
pub const DEFINITE_TOL: f64 = 1e-9;

/// Basis of the quadratic forms `Q(X) = Xᵀ S X` conserved by a field. Planar
/// forms occupy the upper-left 2x2 block.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstIntegralBasis {
    pub dim: usize,
    pub basis: Vec<Mat3>,
}

/// Index pairs `(p, q)` with `p <= q` of the symmetric unknowns.
fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for p in 0..n {
        for q in p..n {
            v.push((p, q));
        }
    }
    v
}

/// Cubic monomials `x_a x_b x_c` with `a <= b <= c`.
fn cubic_monomials(n: usize) -> Vec<[usize; 3]> {
    let mut v = Vec::new();
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                v.push([a, b, c]);
            }
        }
    }
    v
}

fn monomial_index(n: usize, mut m: [usize; 3]) -> usize {
    m.sort_unstable();
    cubic_monomials(n).iter().position(|x| *x == m).unwrap()
}

/// Coefficients of the cubic form `Xᵀ S F(X)` in the monomial basis.
fn cubic_coefficients(f: &QuadraticField, s: &Mat3) -> Vec<f64> {
    let n = f.dim();
    let mut out = vec![0.0; cubic_monomials(n).len()];
    for p in 0..n {
        for q in 0..n {
            if s[(p, q)] == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    let c = s[(p, q)] * f.coefficient(q, j, k);
                    if c != 0.0 {
                        out[monomial_index(n, [p, j, k])] += c;
                    }
                }
            }
        }
    }
    out
}

/// Largest coefficient of `2 Xᵀ S F(X)`, i.e. of `dQ/dt`.
pub fn cubic_residual(f: &QuadraticField, s: &Mat3) -> f64 {
    cubic_coefficients(f, s)
        .iter()
        .fold(0.0_f64, |m, v| m.max(2.0 * v.abs()))
}

fn unit_sym(n: usize, p: usize, q: usize) -> Mat3 {
    let _ = n;
    let mut m = Mat3::zeros();
    if p == q {
        m[(p, p)] = 1.0;
    } else {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        m[(p, q)] = w;
        m[(q, p)] = w;
    }
    m
}

pub fn quadratic_first_integrals(f: &QuadraticField) -> FirstIntegralBasis {
    let n = f.dim();
    let pairs = sym_pairs(n);
    let rows = cubic_monomials(n).len();
    let mut m = DMatrix::<f64>::zeros(rows, pairs.len());
    for (col, &(p, q)) in pairs.iter().enumerate() {
        let coeffs = cubic_coefficients(f, &unit_sym(n, p, q));
        for (r, v) in coeffs.into_iter().enumerate() {
            m[(r, col)] = v;
        }
    }
    let basis = null_space(&m, NULL_TOL)
        .into_iter()
        .map(|v| {
            let mut s = Mat3::zeros();
            for (col, &(p, q)) in pairs.iter().enumerate() {
                s += unit_sym(n, p, q) * v[col];
            }
            tidy(s)
        })
        .collect();
    FirstIntegralBasis { dim: n, basis }
}

/// Sign-normalizes a basis element so the largest entry is positive and
/// flushes round-off to zero.
fn tidy(s: Mat3) -> Mat3 {
    let big = s.iter().cloned().fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let mut s = if big < 0.0 { -s } else { s };
    for v in s.iter_mut() {
        if v.abs() < 1e-15 {
            *v = 0.0;
        }
    }
    s
}

impl FirstIntegralBasis {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    fn flat(&self, s: &Mat3) -> DVector<f64> {
        let pairs = sym_pairs(self.dim);
        DVector::from_iterator(
            pairs.len(),
            pairs.iter().map(|&(p, q)| {
                if p == q {
                    s[(p, p)]
                } else {
                    std::f64::consts::SQRT_2 * 0.5 * (s[(p, q)] + s[(q, p)])
                }
            }),
        )
    }

    /// Relative distance from `s` to the span.
    pub fn membership_residual(&self, s: &Mat3) -> f64 {
        let target = self.flat(s);
        let norm = target.norm();
        if norm == 0.0 {
            return 0.0;
        }
        if self.basis.is_empty() {
            return 1.0;
        }
        let cols: Vec<DVector<f64>> = self.basis.iter().map(|b| self.flat(b)).collect();
        let a = DMatrix::from_columns(&cols);
        let svd = a.clone().svd(true, true);
        let coef = svd.solve(&target, 1e-14).unwrap_or_else(|_| DVector::zeros(cols.len()));
        (a * coef - &target).norm() / norm
    }

    pub fn contains(&self, s: &Mat3) -> bool {
        self.membership_residual(s) <= INTEGRAL_TOL
    }

    /// Largest first-integral residual over the basis.
    pub fn max_residual(&self, f: &QuadraticField) -> f64 {
        self.basis
            .iter()
            .map(|s| cubic_residual(f, s))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefiniteWitness {
    pub coefficients: Vec<f64>,
    /// `Σ cᵢ Sᵢ`, scaled so its smallest eigenvalue is 1.
    pub form: Mat3,
    pub min_eigenvalue: f64,
    /// True when the span was analysed exactly (dimension at most two).
    pub exact: bool,
}

fn block(s: &Mat3, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| s[(i, j)])
}

fn min_eig(s: &Mat3, n: usize) -> (f64, DVector<f64>, f64) {
    let e = SymmetricEigen::new(block(s, n));
    let (k, lmin) = e
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (k, *v))
        .unwrap();
    let scale = e.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (lmin, e.eigenvectors.column(k).into_owned(), scale)
}

fn combine(basis: &[Mat3], c: &[f64]) -> Mat3 {
    basis
        .iter()
        .zip(c)
        .fold(Mat3::zeros(), |acc, (b, w)| acc + b * *w)
}

fn witness(basis: &[Mat3], n: usize, c: Vec<f64>, exact: bool) -> Option<DefiniteWitness> {
    let s = combine(basis, &c);
    let (lmin, _, scale) = min_eig(&s, n);
    if scale == 0.0 || lmin <= DEFINITE_TOL * scale {
        return None;
    }
    let coefficients: Vec<f64> = c.iter().map(|v| v / lmin).collect();
    Some(DefiniteWitness {
        form: s / lmin,
        coefficients,
        min_eigenvalue: 1.0,
        exact,
    })
}

/// A positive-definite element of the span, if one is found. Spans of
/// dimension at most two are decided exactly; larger spans are searched by
/// sampling and ascent, so `None` is only evidence there.
pub fn definite_combination(basis: &FirstIntegralBasis) -> Option<DefiniteWitness> {
    definite_combination_seeded(basis, 0x5eed)
}

pub fn definite_combination_seeded(basis: &FirstIntegralBasis, seed: u64) -> Option<DefiniteWitness> {
    let n = basis.dim;
    let b = &basis.basis;
    match b.len() {
        0 => None,
        1 => witness(b, n, vec![1.0], true).or_else(|| witness(b, n, vec![-1.0], true)),
        2 => pencil(b, n),
        _ => sampled(b, n, seed),
    }
}

fn lmin_at(b: &[Mat3], n: usize, th: f64) -> f64 {
    let s = combine(b, &[th.cos(), th.sin()]);
    min_eig(&s, n).0
}

fn pencil(b: &[Mat3], n: usize) -> Option<DefiniteWitness> {
    // det(cos θ Q1 + sin θ Q2) is a binary form of degree n in (cos θ, sin θ);
    // recover its coefficients by interpolation
    let samples: Vec<f64> = (0..=n).map(|k| k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).collect();
    let mut vm = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut rhs = DVector::<f64>::zeros(n + 1);
    for (r, th) in samples.iter().enumerate() {
        let (s, c) = th.sin_cos();
        for k in 0..=n {
            vm[(r, k)] = c.powi((n - k) as i32) * s.powi(k as i32);
        }
        rhs[r] = block(&combine(b, &[c, s]), n).determinant();
    }
    let coeffs = vm.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(n + 1));
    let mut cuts: Vec<f64> = binary_form_roots(coeffs.as_slice())
        .into_iter()
        .flat_map(|[x, y]| {
            let th = y.atan2(x).rem_euclid(std::f64::consts::PI);
            [th, th + std::f64::consts::PI]
        })
        .collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    let arcs: Vec<(f64, f64)> = if cuts.is_empty() {
        vec![(0.0, 2.0 * std::f64::consts::PI)]
    } else {
        (0..cuts.len())
            .map(|i| {
                let lo = cuts[i];
                let hi = if i + 1 < cuts.len() {
                    cuts[i + 1]
                } else {
                    cuts[0] + 2.0 * std::f64::consts::PI
                };
                (lo, hi)
            })
            .collect()
    };
    let mut best: Option<(f64, f64)> = None;
    for (lo, hi) in arcs {
        if hi - lo <= 1e-12 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        if lmin_at(b, n, mid) <= 0.0 {
            continue;
        }
        let th = golden_max(|t| lmin_at(b, n, t), lo, hi);
        let v = lmin_at(b, n, th);
        if best.map_or(true, |(_, bv)| v > bv) {
            best = Some((th, v));
        }
    }
    let (th, _) = best?;
    witness(b, n, vec![th.cos(), th.sin()], true)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn sampled(b: &[Mat3], n: usize, seed: u64) -> Option<DefiniteWitness> {
    let m = b.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eval = |c: &[f64]| -> (f64, DVector<f64>) {
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let s = combine(b, c) / norm;
        let (l, v, _) = min_eig(&s, n);
        (l, v)
    };
    let mut best_c: Vec<f64> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..4000 {
        let c: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || norm > 1.0 {
            continue;
        }
        let (l, _) = eval(&c);
        if l > best {
            best = l;
            best_c = c;
        }
    }
    if best_c.is_empty() {
        return None;
    }
    let mut c = best_c;
    let mut step = 0.1;
    for _ in 0..2000 {
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in c.iter_mut() {
            *v /= norm;
        }
        let (l, v) = eval(&c);
        let vv = crate::linalg::Vec3::from_fn(|i, _| if i < n { v[i] } else { 0.0 });
        let grad: Vec<f64> = b.iter().map(|q| vv.dot(&(q * vv))).collect();
        let radial: f64 = grad.iter().zip(&c).map(|(g, x)| g * x).sum();
        let tang: Vec<f64> = grad.iter().zip(&c).map(|(g, x)| g - radial * x).collect();
        let cand: Vec<f64> = c.iter().zip(&tang).map(|(x, t)| x + step * t).collect();
        let (lc, _) = eval(&cand);
        if lc > l {
            c = cand;
            step *= 1.2;
        } else {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    witness(b, n, c, false)
}
