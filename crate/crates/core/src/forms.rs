//! Quadratic forms on the algebra and its dual, the Killing form, and the
//! operator `u` relating a metric to the bi-invariant form.

use std::fmt;

use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie3::LieAlgebra3;
use crate::linalg::{condition_number, singular_values_desc, smallest_singular_vector, Mat3, Vec3};

pub const SIG_TOL: f64 = 1e-9;
pub const EIG_TOL: f64 = 1e-8;
/// `k = KILLING_SCALE * tr(ad ad)`.
pub const KILLING_SCALE: f64 = 0.5;
/// Singular values of `u - alpha` below this fraction of the spectral scale
/// count as zero.
pub const RANK_DEFICIENT: f64 = 1e-3;
/// ... and above this fraction as nonzero.
pub const RANK_FULL: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    Algebra,
    Dual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm3 {
    s: Mat3,
    space: Space,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub fn is_nondegenerate(&self) -> bool {
        self.zero == 0
    }

    pub fn is_definite(&self) -> bool {
        self.positive == 3 || self.negative == 3
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.positive, self.negative, self.zero)
    }
}

impl QuadraticForm3 {
    /// The matrix is symmetrized exactly.
    pub fn new(s: Mat3, space: Space) -> Self {
        Self {
            s: (s + s.transpose()) * 0.5,
            space,
        }
    }

    pub fn algebra(s: Mat3) -> Self {
        Self::new(s, Space::Algebra)
    }

    pub fn dual(s: Mat3) -> Self {
        Self::new(s, Space::Dual)
    }

    pub fn identity(space: Space) -> Self {
        Self::new(Mat3::identity(), space)
    }

    pub fn diagonal(d: [f64; 3], space: Space) -> Self {
        Self::new(Mat3::from_diagonal(&Vec3::from(d)), space)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.s
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        x.dot(&(self.s * x))
    }

    pub fn polar(&self, x: &Vec3, y: &Vec3) -> f64 {
        x.dot(&(self.s * y))
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        let e = SymmetricEigen::new(self.s).eigenvalues;
        let mut v = [e[0], e[1], e[2]];
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    pub fn signature(&self) -> Signature {
        signature(self)
    }

    pub fn is_positive_definite(&self) -> bool {
        let s = self.signature();
        s.positive == 3
    }

    /// The form in the basis given by the columns of `p`: `pᵀ S p`.
    pub fn pullback(&self, p: &Mat3) -> Self {
        Self::new(p.transpose() * self.s * p, self.space)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.s * c, self.space)
    }

    pub fn require_nondegenerate(&self) -> Result<()> {
        let sig = self.signature();
        if sig.zero > 0 {
            return Err(Error::DegenerateMetric {
                positive: sig.positive,
                negative: sig.negative,
                zero: sig.zero,
            });
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<Mat3> {
        self.require_nondegenerate()?;
        let inv = self.s.try_inverse().ok_or(Error::DegenerateMetric {
            positive: 0,
            negative: 0,
            zero: 3,
        })?;
        Ok((inv + inv.transpose()) * 0.5)
    }

    /// The form on the other space carried by the musical isomorphism,
    /// `q(φ⁻¹ξ) = ξᵀ S⁻¹ ξ`.
    pub fn dual_form(&self) -> Result<Self> {
        let other = match self.space {
            Space::Algebra => Space::Dual,
            Space::Dual => Space::Algebra,
        };
        Ok(Self::new(self.inverse()?, other))
    }

    /// Polynomial rendering such as `-x1^2 + x2^2 + 2*x2*x3`.
    pub fn polynomial(&self) -> String {
        let var = match self.space {
            Space::Algebra => "x",
            Space::Dual => "xi",
        };
        let mut terms: Vec<(f64, String)> = Vec::new();
        for i in 0..3 {
            for j in i..3 {
                let c = if i == j { self.s[(i, i)] } else { 2.0 * self.s[(i, j)] };
                if c != 0.0 {
                    let mono = if i == j {
                        format!("{var}{}^2", i + 1)
                    } else {
                        format!("{var}{}*{var}{}", i + 1, j + 1)
                    };
                    terms.push((c, mono));
                }
            }
        }
        render_terms(&terms)
    }
}

pub(crate) fn render_terms(terms: &[(f64, String)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (n, (c, mono)) in terms.iter().enumerate() {
        let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
        if n == 0 {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        if mag == 1.0 {
            out.push_str(mono);
        } else {
            out.push_str(&format!("{mag}*{mono}"));
        }
    }
    out
}

impl fmt::Display for QuadraticForm3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.polynomial())
    }
}

pub fn signature(q: &QuadraticForm3) -> Signature {
    signature_tol(q, SIG_TOL)
}

/// Eigenvalues with magnitude below `tol * max(1, max|eigenvalue|)` count as
/// zero.
pub fn signature_tol(q: &QuadraticForm3, tol: f64) -> Signature {
    let ev = q.eigenvalues();
    let scale = ev.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let cut = tol * scale;
    Signature {
        positive: ev.iter().filter(|v| **v > cut).count(),
        negative: ev.iter().filter(|v| **v < -cut).count(),
        zero: ev.iter().filter(|v| v.abs() <= cut).count(),
    }
}

/// `ξ = S x`.
pub fn musical_iso(q: &QuadraticForm3, x: &Vec3) -> Result<Vec3> {
    q.require_nondegenerate()?;
    Ok(q.s * x)
}

/// `x = S⁻¹ ξ`.
pub fn musical_iso_inverse(q: &QuadraticForm3, xi: &Vec3) -> Result<Vec3> {
    Ok(q.inverse()? * xi)
}

/// `K(x, y) = tr(ad_x ad_y)`.
pub fn killing_form(alg: &LieAlgebra3) -> QuadraticForm3 {
    let ads: Vec<Mat3> = (0..3)
        .map(|i| alg.ad(&Vec3::from_fn(|k, _| if k == i { 1.0 } else { 0.0 })))
        .collect();
    let mut k = Mat3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            k[(i, j)] = (ads[i] * ads[j]).trace();
        }
    }
    QuadraticForm3::algebra(k)
}

/// The bi-invariant form `k` used by the Lax formulation, `tr(ad ad) / 2`.
/// On sl(2,R) it satisfies `k(E1,E1) = k(E2,E2) = -k(E3,E3) = 1` in any frame
/// with `[E1,E2] = ±E3, [E1,E3] = ±E2, [E2,E3] = ±E1`.
pub fn normalized_killing_form(alg: &LieAlgebra3) -> QuadraticForm3 {
    killing_form(alg).scaled(KILLING_SCALE)
}

/// Gram matrix of `q` on `span{a, b}`.
pub fn restrict_form(q: &QuadraticForm3, a: &Vec3, b: &Vec3) -> Result<Matrix2<f64>> {
    let cross = a.cross(b).norm();
    if cross <= 1e-12 * a.norm() * b.norm() || cross == 0.0 {
        return Err(Error::DependentSpan);
    }
    Ok(Matrix2::new(
        q.polar(a, a),
        q.polar(a, b),
        q.polar(b, a),
        q.polar(b, b),
    ))
}

pub fn is_degenerate_2(m: &Matrix2<f64>) -> bool {
    let scale = m.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
    m.determinant().abs() < SIG_TOL * scale * scale
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectrumShape {
    /// Minimal polynomial of degree at most 2 with a single eigenvalue.
    DegreeLE2,
    ThreeDistinct,
    /// Double eigenvalue with a two-dimensional eigenspace.
    OneDoubleOneSimpleDiagonalizable,
    /// Double eigenvalue with a 2x2 Jordan block.
    OneDoubleOneSimpleCyclic,
    /// One real eigenvalue and a complex pair.
    SingleEigendirection,
    /// Single eigenvalue with a 3x3 Jordan block.
    TripleDegenerate,
}

impl SpectrumShape {
    pub fn name(&self) -> &'static str {
        match self {
            SpectrumShape::DegreeLE2 => "DegreeLE2",
            SpectrumShape::ThreeDistinct => "ThreeDistinct",
            SpectrumShape::OneDoubleOneSimpleDiagonalizable => "OneDoubleOneSimple_Diagonalizable",
            SpectrumShape::OneDoubleOneSimpleCyclic => "OneDoubleOneSimple_Cyclic",
            SpectrumShape::SingleEigendirection => "SingleEigendirection",
            SpectrumShape::TripleDegenerate => "TripleDegenerate",
        }
    }

    /// Degree of the minimal polynomial.
    pub fn minimal_degree(&self) -> usize {
        match self {
            SpectrumShape::DegreeLE2 | SpectrumShape::OneDoubleOneSimpleDiagonalizable => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for SpectrumShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub value: f64,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    /// Real eigenvalues, ascending.
    pub real: Vec<Eigenvalue>,
    /// `re ± i·im` when the spectrum has a complex pair.
    pub complex_pair: Option<[f64; 2]>,
    /// One unit eigenvector per entry of `real` (a basis of the eigenspace
    /// is not needed by any criterion).
    pub eigenvectors: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricOperatorU {
    pub u: Mat3,
    /// Normalized bi-invariant form.
    pub k: Mat3,
    pub killing_scale: f64,
    pub metric: Mat3,
    pub eigen: EigenData,
    shape: std::result::Result<SpectrumShape, String>,
    pub eig_tol: f64,
}

/// k-orthonormal eigenframe for three distinct real eigenvalues, ordered so
/// that `E3` is timelike, oriented so that `k([E1,E2],E3) = +1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalFrame {
    pub frame: Mat3,
    pub alphas: [f64; 3],
    pub kappa: f64,
}

/// Frame for a double eigenvalue with a 2x2 Jordan block. `e2` is the
/// isotropic eigenvector of the double eigenvalue, `e3` the cyclic vector
/// with `k(e2,e3) = 1, k(e3,e3) = 0`, and `e1` the unit eigenvector of the
/// simple eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicData {
    pub alpha_simple: f64,
    pub alpha_double: f64,
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
    /// `⟨E3, E3⟩` for the metric.
    pub gamma: f64,
    pub kappa: f64,
}

pub fn u_from_metric(alg: &LieAlgebra3, metric: &QuadraticForm3) -> Result<MetricOperatorU> {
    u_from_metric_tol(alg, metric, EIG_TOL)
}

pub fn u_from_metric_tol(
    alg: &LieAlgebra3,
    metric: &QuadraticForm3,
    eig_tol: f64,
) -> Result<MetricOperatorU> {
    let metric = match metric.space() {
        Space::Algebra => metric.clone(),
        Space::Dual => metric.dual_form()?,
    };
    metric.require_nondegenerate()?;
    let kf = normalized_killing_form(alg);
    if kf.signature().zero > 0 {
        return Err(Error::DegenerateKilling);
    }
    let k = *kf.matrix();
    let k_inv = k.try_inverse().ok_or(Error::DegenerateKilling)?;
    let s = *metric.matrix();
    let u = k_inv * s;
    let (eigen, shape) = classify_spectrum(&u, eig_tol);
    Ok(MetricOperatorU {
        u,
        k,
        killing_scale: KILLING_SCALE,
        metric: s,
        eigen,
        shape,
        eig_tol,
    })
}

impl MetricOperatorU {
    pub fn shape(&self) -> Result<SpectrumShape> {
        self.shape.clone().map_err(Error::AmbiguousSpectrum)
    }

    /// `max |k(Ux, y) - k(x, Uy)|` over basis pairs.
    pub fn k_symmetry_residual(&self) -> f64 {
        let ku = self.k * self.u;
        (ku - ku.transpose()).amax()
    }

    /// `max |k(Ux, y) - ⟨x, y⟩|` over basis pairs.
    pub fn reconstruction_residual(&self) -> f64 {
        (self.u.transpose() * self.k - self.metric).amax()
    }

    pub fn u_inverse(&self) -> Result<Mat3> {
        self.u.try_inverse().ok_or(Error::DegenerateMetric {
            positive: 0,
            negative: 0,
            zero: 1,
        })
    }

    fn kform(&self, x: &Vec3, y: &Vec3) -> f64 {
        x.dot(&(self.k * y))
    }

    pub fn diagonal_frame(&self, alg: &LieAlgebra3) -> Result<DiagonalFrame> {
        if self.shape()? != SpectrumShape::ThreeDistinct {
            return Err(Error::AmbiguousSpectrum(
                "diagonal frame needs three distinct eigenvalues".into(),
            ));
        }
        let mut cols: Vec<(f64, Vec3, f64)> = Vec::new();
        for (ev, v) in self.eigen.real.iter().zip(&self.eigen.eigenvectors) {
            let v = Vec3::from(*v);
            let kv = self.kform(&v, &v);
            if kv.abs() <= 1e-12 {
                return Err(Error::InternalInconsistency(
                    "isotropic eigenvector for a simple eigenvalue".into(),
                ));
            }
            cols.push((ev.value, v / kv.abs().sqrt(), kv.signum()));
        }
        let timelike: Vec<usize> = (0..3).filter(|i| cols[*i].2 < 0.0).collect();
        if timelike.len() != 1 {
            return Err(Error::NotSl2);
        }
        let t = timelike[0];
        let order: Vec<usize> = (0..3).filter(|i| *i != t).chain(std::iter::once(t)).collect();
        let mut frame = Mat3::zeros();
        let mut alphas = [0.0; 3];
        for (slot, &i) in order.iter().enumerate() {
            frame.set_column(slot, &cols[i].1);
            alphas[slot] = cols[i].0;
        }
        let e1 = frame.column(0).into_owned();
        let e2 = frame.column(1).into_owned();
        let e3 = frame.column(2).into_owned();
        let mut kappa = self.kform(&alg.bracket(&e1, &e2), &e3);
        if kappa < 0.0 {
            frame.set_column(2, &(-e3));
            kappa = -kappa;
        }
        Ok(DiagonalFrame {
            frame,
            alphas,
            kappa,
        })
    }

    pub fn cyclic_data(&self, alg: &LieAlgebra3) -> Result<CyclicData> {
        if self.shape()? != SpectrumShape::OneDoubleOneSimpleCyclic {
            return Err(Error::AmbiguousSpectrum(
                "cyclic data needs a double eigenvalue with one eigendirection".into(),
            ));
        }
        let (simple, double) = {
            let s = self.eigen.real.iter().position(|e| e.algebraic == 1).unwrap();
            let d = self.eigen.real.iter().position(|e| e.algebraic == 2).unwrap();
            (s, d)
        };
        let a1 = self.eigen.real[simple].value;
        let a2 = self.eigen.real[double].value;
        let id = Mat3::identity();
        let (e2, _) = smallest_singular_vector(&(self.u - id * a2));
        // range of (u - a1) is the generalized eigenspace of a2
        let r = self.u - id * a1;
        let svd = r.svd(true, false);
        let uu = svd.u.expect("requested u");
        let mut idx: Vec<usize> = (0..3).collect();
        idx.sort_by(|a, b| svd.singular_values[*b].total_cmp(&svd.singular_values[*a]));
        let r1 = uu.column(idx[0]).into_owned();
        let r2 = uu.column(idx[1]).into_owned();
        let v = if self.kform(&e2, &r1).abs() >= self.kform(&e2, &r2).abs() {
            r1
        } else {
            r2
        };
        let kev = self.kform(&e2, &v);
        if kev.abs() <= 1e-12 {
            return Err(Error::InternalInconsistency(
                "cyclic vector is k-orthogonal to the eigendirection".into(),
            ));
        }
        let v = v / kev;
        let e3 = v - e2 * (self.kform(&v, &v) / 2.0);
        let (mut e1, _) = smallest_singular_vector(&(self.u - id * a1));
        let k11 = self.kform(&e1, &e1);
        if k11 <= 0.0 {
            return Err(Error::NotSl2);
        }
        e1 /= k11.sqrt();
        let mut kappa = self.kform(&alg.bracket(&e1, &e2), &e3);
        if kappa < 0.0 {
            e1 = -e1;
            kappa = -kappa;
        }
        let gamma = e3.dot(&(self.metric * e3));
        Ok(CyclicData {
            alpha_simple: a1,
            alpha_double: a2,
            e1,
            e2,
            e3,
            gamma,
            kappa,
        })
    }
}

fn rank_defect(m: &Mat3, scale: f64) -> std::result::Result<usize, String> {
    let sv = singular_values_desc(m);
    let mut defect = 0;
    for s in sv {
        let r = s / scale;
        if r <= RANK_DEFICIENT {
            defect += 1;
        } else if r < RANK_FULL {
            return Err(format!(
                "singular value ratio {r:e} between rank thresholds"
            ));
        }
    }
    Ok(defect)
}

/// Eigenvalue clustering by squared relative gap, then eigenspace dimensions
/// from singular values of `u - alpha`.
pub fn classify_spectrum(
    u: &Mat3,
    eig_tol: f64,
) -> (EigenData, std::result::Result<SpectrumShape, String>) {
    let z = u.complex_eigenvalues();
    let mut zs: Vec<(f64, f64)> = z.iter().map(|c| (c.re, c.im)).collect();
    let scale = zs
        .iter()
        .map(|(re, im)| re.hypot(*im))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    zs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let gap = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)) / (scale * scale);
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let gaps: Vec<f64> = pairs.iter().map(|(i, j)| gap(zs[*i], zs[*j])).collect();
    let ambiguous = gaps
        .iter()
        .find(|g| **g > eig_tol && **g <= 100.0 * eig_tol)
        .map(|g| format!("squared relative eigenvalue gap {g:e} near eig_tol {eig_tol:e}"));

    let id = Mat3::identity();
    let mut data = EigenData {
        real: Vec::new(),
        complex_pair: None,
        eigenvectors: Vec::new(),
    };
    let close: Vec<bool> = gaps.iter().map(|g| *g <= eig_tol).collect();
    let n_close = close.iter().filter(|c| **c).count();

    let push = |data: &mut EigenData, value: f64, alg_mult: usize| -> std::result::Result<usize, String> {
        let m = u - id * value;
        let defect = rank_defect(&m, scale)?;
        let (v, _) = smallest_singular_vector(&m);
        data.real.push(Eigenvalue {
            value,
            algebraic: alg_mult,
            geometric: defect.max(1),
        });
        data.eigenvectors.push([v[0], v[1], v[2]]);
        Ok(defect.max(1))
    };

    let shape = (|| {
        if let Some(msg) = &ambiguous {
            return Err(msg.clone());
        }
        if n_close >= 2 {
            let value = (zs[0].0 + zs[1].0 + zs[2].0) / 3.0;
            let value = polish_root(u, value);
            let geo = push(&mut data, value, 3)?;
            return Ok(if geo >= 2 {
                SpectrumShape::DegreeLE2
            } else {
                SpectrumShape::TripleDegenerate
            });
        }
        if n_close == 1 {
            let k = close.iter().position(|c| *c).unwrap();
            let (i, j) = pairs[k];
            let s = 3 - i - j;
            let double = polish_root(u, 0.5 * (zs[i].0 + zs[j].0));
            let simple = polish_root(u, zs[s].0);
            let mut entries = [(simple, 1), (double, 2)];
            entries.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut geo_double = 1;
            for (v, m) in entries {
                let g = push(&mut data, v, m)?;
                if m == 2 {
                    geo_double = g;
                }
            }
            return Ok(if geo_double >= 2 {
                SpectrumShape::OneDoubleOneSimpleDiagonalizable
            } else {
                SpectrumShape::OneDoubleOneSimpleCyclic
            });
        }
        let complex: Vec<&(f64, f64)> = zs.iter().filter(|z| z.1 != 0.0).collect();
        if !complex.is_empty() {
            let real = zs.iter().find(|z| z.1 == 0.0).map(|z| z.0).unwrap_or(zs[0].0);
            push(&mut data, polish_root(u, real), 1)?;
            let im = complex.iter().map(|z| z.1.abs()).fold(0.0, f64::max);
            data.complex_pair = Some([complex[0].0, im]);
            return Ok(SpectrumShape::SingleEigendirection);
        }
        for z in &zs {
            push(&mut data, polish_root(u, z.0), 1)?;
        }
        Ok(SpectrumShape::ThreeDistinct)
    })();
    (data, shape)
}

/// Newton on the characteristic polynomial, keeping the input when the
/// derivative is too small to trust.
fn polish_root(u: &Mat3, x0: f64) -> f64 {
    let t = u.trace();
    let m = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)] + u[(0, 0)] * u[(2, 2)]
        - u[(0, 2)] * u[(2, 0)]
        + u[(1, 1)] * u[(2, 2)]
        - u[(1, 2)] * u[(2, 1)];
    let d = u.determinant();
    let p = |x: f64| ((x - t) * x + m) * x - d;
    let dp = |x: f64| (3.0 * x - 2.0 * t) * x + m;
    let mut x = x0;
    for _ in 0..20 {
        let g = dp(x);
        let scale = t.abs().max(m.abs().sqrt()).max(1e-300);
        if g.abs() <= 1e-6 * scale * scale {
            break;
        }
        let step = p(x) / g;
        if !step.is_finite() || step.abs() > 1e-3 * scale {
            break;
        }
        x -= step;
        if step.abs() <= 1e-16 * scale {
            break;
        }
    }
    x
}

/// Condition number guard for linear solves against a metric.
pub fn metric_condition(q: &QuadraticForm3) -> f64 {
    condition_number(q.matrix())
}
