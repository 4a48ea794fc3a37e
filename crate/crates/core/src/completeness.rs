//! Completeness verdicts for left-invariant metrics on three-dimensional
//! Lie groups.
//!
//! Unimodular algebras are decided by closed-form criteria; for `sl(2,R)` the
//! generic idempotent search on the Lax field always runs as a guard. For
//! non-unimodular algebras only idempotent existence is conclusive.

use std::fmt;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{algebra_metric, euler_field_dual, lax_field_from_u, FieldKind};
use crate::forms::{
    is_degenerate_2, u_from_metric, MetricOperatorU, QuadraticForm3, SpectrumShape,
};
use crate::lie3::{classify, AlgebraType, LieAlgebra3};
use crate::linalg::{Mat3, Vec3};
use crate::quadfield::{
    cubic_residual, find_idempotents, is_affine_quadratic, polish_idempotent, QuadraticField,
};

/// Margin for the strict inequalities of the closed-form criteria.
pub const CRIT_TOL: f64 = 1e-9;
pub const WITNESS_TOL: f64 = 1e-8;
pub const INTEGRAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Complete,
    Incomplete,
    Undecided,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Complete => "Complete",
            Status::Incomplete => "Incomplete",
            Status::Undecided => "Undecided",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructuralReason {
    Abelian,
    Heisenberg,
    Compact,
    E2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlCase {
    /// Minimal polynomial of degree at most two.
    #[serde(rename = "i")]
    I,
    /// Three distinct real eigenvalues.
    #[serde(rename = "ii")]
    II,
    /// Double eigenvalue with a Jordan block.
    #[serde(rename = "iii")]
    III,
    /// One eigendirection only.
    #[serde(rename = "single-eigendirection")]
    SingleEigendirection,
}

impl SlCase {
    pub fn label(&self) -> &'static str {
        match self {
            SlCase::I => "i",
            SlCase::II => "ii",
            SlCase::III => "iii",
            SlCase::SingleEigendirection => "single-eigendirection",
        }
    }
}

/// Data read off `u` for the `sl(2,R)` criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlData {
    pub shape: SpectrumShape,
    /// Eigenvalues; in case (ii) the timelike one is last, in case (iii) the
    /// simple one is first.
    pub alphas: Vec<f64>,
    pub gamma: Option<f64>,
    /// `(1/α₃ − 1/α₂)(1/α₃ − 1/α₁)` in case (ii), `γ(1/α₂ − 1/α₁)` in
    /// case (iii).
    pub criterion: Option<f64>,
}

pub type Rows = [[f64; 3]; 3];

fn rows(m: &Mat3) -> Rows {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

fn from_rows(r: &Rows) -> Mat3 {
    Mat3::from_fn(|i, j| r[i][j])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Certificate {
    StructuralComplete {
        reason: StructuralReason,
    },
    /// Positive-definite conserved form in the coordinates of the analysed
    /// field.
    DefiniteFirstIntegral {
        form: Rows,
        residual: f64,
    },
    Linearizable {
        change_of_basis: Rows,
        residual: f64,
    },
    IdempotentWitness {
        vector: [f64; 3],
        residual: f64,
        /// Blow-up time of the solution through the witness.
        predicted_blowup: f64,
    },
    SlCriterion {
        case: SlCase,
        data: SlData,
        support: Option<Box<Certificate>>,
    },
    E11SignCriterion {
        lambda: f64,
        mu: f64,
        nu: f64,
        /// Metric degenerate on the derived algebra.
        degenerate: bool,
        support: Option<Box<Certificate>>,
    },
    NecessaryOnly {
        idempotents_found: usize,
        note: String,
    },
    Boundary {
        quantity: String,
        value: f64,
    },
}

impl Certificate {
    fn support(&self) -> Option<&Certificate> {
        match self {
            Certificate::SlCriterion { support, .. } | Certificate::E11SignCriterion { support, .. } => {
                support.as_deref()
            }
            _ => None,
        }
    }

    /// The innermost certificate (the checkable object).
    pub fn leaf(&self) -> &Certificate {
        match self.support() {
            Some(s) => s.leaf(),
            None => self,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Certificate::StructuralComplete { .. } => "StructuralComplete",
            Certificate::DefiniteFirstIntegral { .. } => "DefiniteFirstIntegral",
            Certificate::Linearizable { .. } => "Linearizable",
            Certificate::IdempotentWitness { .. } => "IdempotentWitness",
            Certificate::SlCriterion { .. } => "SlCriterion",
            Certificate::E11SignCriterion { .. } => "E11SignCriterion",
            Certificate::NecessaryOnly { .. } => "NecessaryOnly",
            Certificate::Boundary { .. } => "Boundary",
        }
    }
}

/// Result of the idempotent guard run next to a closed-form criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub idempotents_found: usize,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletenessVerdict {
    pub status: Status,
    pub certificate: Certificate,
    pub algebra: String,
    /// The field whose coordinates the certificate uses.
    pub field_kind: FieldKind,
    pub field: QuadraticField,
    pub cross_check: Option<CrossCheck>,
}

impl CompletenessVerdict {
    fn new(status: Status, certificate: Certificate, algebra: &AlgebraType, kind: FieldKind, field: QuadraticField) -> Self {
        Self {
            status,
            certificate,
            algebra: algebra.name().to_string(),
            field_kind: kind,
            field,
            cross_check: None,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.status == Status::Complete
    }

    pub fn is_incomplete(&self) -> bool {
        self.status == Status::Incomplete
    }

    pub fn witness(&self) -> Option<Vec3> {
        match self.certificate.leaf() {
            Certificate::IdempotentWitness { vector, .. } => Some(Vec3::from(*vector)),
            _ => None,
        }
    }

    pub fn definite_form(&self) -> Option<Mat3> {
        match self.certificate.leaf() {
            Certificate::DefiniteFirstIntegral { form, .. } => Some(from_rows(form)),
            _ => None,
        }
    }

    pub fn sl_case(&self) -> Option<SlCase> {
        match &self.certificate {
            Certificate::SlCriterion { case, .. } => Some(*case),
            _ => None,
        }
    }

    /// Re-checks the certificate against the stored field.
    pub fn validate(&self) -> Result<()> {
        match self.certificate.leaf() {
            Certificate::IdempotentWitness { vector, .. } => {
                let x = Vec3::from(*vector);
                let r = (self.field.evaluate(&x) - x).norm();
                if r > WITNESS_TOL * x.norm_squared().max(1.0) {
                    return Err(Error::InternalInconsistency(format!(
                        "idempotent witness residual {r:e}"
                    )));
                }
            }
            Certificate::DefiniteFirstIntegral { form, .. } => {
                let q = QuadraticForm3::algebra(from_rows(form));
                if !q.is_positive_definite() {
                    return Err(Error::InternalInconsistency(
                        "definite first integral is not positive definite".into(),
                    ));
                }
                let r = cubic_residual(&self.field, q.matrix());
                if r > INTEGRAL_TOL {
                    return Err(Error::InternalInconsistency(format!(
                        "definite first integral residual {r:e}"
                    )));
                }
            }
            Certificate::Linearizable { .. } => {
                if is_affine_quadratic(&self.field).is_none() {
                    return Err(Error::InternalInconsistency(
                        "linearizable certificate on a non-affine field".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// `Some(sign)` when `|v| > CRIT_TOL · scale`.
fn strict_sign(v: f64, scale: f64) -> Option<f64> {
    if v.abs() > CRIT_TOL * scale.max(f64::MIN_POSITIVE) {
        Some(v.signum())
    } else {
        None
    }
}

fn witness_certificate(f: &QuadraticField, x: Vec3) -> Option<Certificate> {
    let (p, r) = polish_idempotent(f, &x);
    (r <= WITNESS_TOL * p.norm_squared().max(1.0)).then(|| Certificate::IdempotentWitness {
        vector: p.into(),
        residual: r,
        predicted_blowup: 1.0,
    })
}

/// The first candidate that polishes to an idempotent, then the generic
/// search.
fn first_witness(f: &QuadraticField, candidates: &[Vec3]) -> Result<Option<Certificate>> {
    for c in candidates {
        if let Some(w) = witness_certificate(f, *c) {
            return Ok(Some(w));
        }
    }
    Ok(find_idempotents(f)?.into_iter().find_map(|x| witness_certificate(f, x)))
}

/// An `Incomplete` verdict when the field has an idempotent `X*`; the
/// solution through `X*` is `X*/(1 − t)`, which blows up at `t = 1`.
pub fn idempotent_incompleteness(f: &QuadraticField) -> Option<Certificate> {
    find_idempotents(f)
        .ok()?
        .into_iter()
        .find_map(|x| witness_certificate(f, x))
}

fn normalize_form(q: Mat3) -> Mat3 {
    let m = q.amax();
    if m > 0.0 {
        q / m
    } else {
        q
    }
}

fn definite_certificate(f: &QuadraticField, q: Mat3) -> Result<Certificate> {
    let q = normalize_form((q + q.transpose()) * 0.5);
    let residual = cubic_residual(f, &q);
    let form = QuadraticForm3::algebra(q);
    if !form.is_positive_definite() || residual > INTEGRAL_TOL {
        return Err(Error::InternalInconsistency(format!(
            "constructed first integral fails validation (residual {residual:e})"
        )));
    }
    Ok(Certificate::DefiniteFirstIntegral {
        form: rows(&q),
        residual,
    })
}

/// Orthonormal basis of the derived algebra and a unit normal to it.
fn derived_algebra(alg: &LieAlgebra3) -> Result<(Vec3, Vec3, Vec3)> {
    let e = [Vec3::x(), Vec3::y(), Vec3::z()];
    let m = Mat3::from_columns(&[
        alg.bracket(&e[1], &e[2]),
        alg.bracket(&e[2], &e[0]),
        alg.bracket(&e[0], &e[1]),
    ]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested u");
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|a, b| svd.singular_values[*b].total_cmp(&svd.singular_values[*a]));
    let s = svd.singular_values;
    if s[idx[1]] <= 1e-9 * s[idx[0]] || s[idx[2]] > 1e-9 * s[idx[0]] {
        return Err(Error::NotE11);
    }
    Ok((
        u.column(idx[0]).into_owned(),
        u.column(idx[1]).into_owned(),
        u.column(idx[2]).into_owned(),
    ))
}

/// Adapted basis `[E1,E2] = E2, [E1,E3] = −E3, [E2,E3] = 0` as columns, with
/// `E1` metric-orthogonal to the derived algebra when possible.
fn e11_basis(alg: &LieAlgebra3, s: &Mat3) -> Result<(Mat3, bool)> {
    let (d1, d2, n) = derived_algebra(alg)?;
    let b0 = Matrix2::new(d1.dot(&(s * d1)), d1.dot(&(s * d2)), d2.dot(&(s * d1)), d2.dot(&(s * d2)));
    let degenerate = is_degenerate_2(&b0);
    let s_inv = s.try_inverse().ok_or(Error::DegenerateMetric {
        positive: 0,
        negative: 0,
        zero: 1,
    })?;
    let mut e1 = if degenerate { n } else { s_inv * n };
    let ad = alg.ad(&e1);
    let a2 = Matrix2::new(
        d1.dot(&(ad * d1)),
        d1.dot(&(ad * d2)),
        d2.dot(&(ad * d1)),
        d2.dot(&(ad * d2)),
    );
    let scale = a2.amax();
    let det = a2.determinant();
    if scale == 0.0 || a2.trace().abs() > 1e-9 * scale || det >= -1e-9 * scale * scale {
        return Err(Error::NotE11);
    }
    let r = (-det).sqrt();
    e1 /= r;
    let a2 = a2 / r;
    let eig_vec = |lambda: f64| {
        let m = a2 - Matrix2::identity() * lambda;
        // null vector of a rank-one 2x2 matrix
        let (p, q) = if m.row(0).norm() >= m.row(1).norm() {
            (m[(0, 0)], m[(0, 1)])
        } else {
            (m[(1, 0)], m[(1, 1)])
        };
        let v = nalgebra::Vector2::new(-q, p).normalize();
        d1 * v[0] + d2 * v[1]
    };
    let e2 = eig_vec(1.0);
    let e3 = eig_vec(-1.0);
    Ok((Mat3::from_columns(&[e1, e2, e3]), degenerate))
}

/// The sign criterion for metrics on `E(1,1)`. The certificate lives in
/// the dual Euler field of the given basis.
pub fn e11_criterion(alg: &LieAlgebra3, metric: &QuadraticForm3) -> Result<CompletenessVerdict> {
    let ty = classify(alg);
    if ty != AlgebraType::E11 {
        return Err(Error::NotE11);
    }
    let metric = algebra_metric(metric)?;
    let field = euler_field_dual(alg, &metric)?;
    let s = *metric.matrix();
    let (p, degenerate) = e11_basis(alg, &s)?;
    let adapted = alg.change_basis(&p)?;
    let s_adapted = p.transpose() * s * p;
    let energy = s_adapted
        .try_inverse()
        .ok_or_else(|| Error::InternalInconsistency("adapted metric is singular".into()))?;
    let (lambda, mu, nu) = (energy[(0, 0)], energy[(1, 1)], energy[(2, 2)]);
    let f_adapted = euler_field_dual(&adapted, &QuadraticForm3::algebra(s_adapted))?;
    // ξ = P⁻ᵀ ξ' maps adapted dual coordinates back
    let back = p
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::InternalInconsistency("singular adapted basis".into()))?;
    let plane_candidates = |planes: &[[usize; 2]]| -> Result<Vec<Vec3>> {
        let mut out = Vec::new();
        for idx in planes {
            for x in find_idempotents(&f_adapted.planar_part(*idx))? {
                let mut v = Vec3::zeros();
                v[idx[0]] = x[0];
                v[idx[1]] = x[1];
                out.push(back * v);
            }
        }
        Ok(out)
    };
    let wrap = |status, support: Option<Certificate>| {
        CompletenessVerdict::new(
            status,
            Certificate::E11SignCriterion {
                lambda,
                mu,
                nu,
                degenerate,
                support: support.map(Box::new),
            },
            &ty,
            FieldKind::EulerDual,
            field.clone(),
        )
    };
    if degenerate {
        let w = first_witness(&field, &plane_candidates(&[[0, 1], [0, 2]])?)?;
        return Ok(wrap(Status::Incomplete, w));
    }
    let scale = lambda.abs().max(mu.abs()).max(nu.abs());
    let (sl, sm, sn) = (
        strict_sign(lambda, scale),
        strict_sign(mu, scale),
        strict_sign(nu, scale),
    );
    let (Some(sl), Some(sm), Some(sn)) = (sl, sm, sn) else {
        let mut v = wrap(Status::Undecided, None);
        v.certificate = Certificate::Boundary {
            quantity: "lambda*mu, lambda*nu".into(),
            value: (lambda * mu).min(lambda * nu),
        };
        return Ok(v);
    };
    if sl * sm > 0.0 && sl * sn > 0.0 {
        let q_adapted = Mat3::from_diagonal(&Vec3::new(lambda, mu, nu)) * sl;
        let q = p * q_adapted * p.transpose();
        let cert = definite_certificate(&field, q)?;
        Ok(wrap(Status::Complete, Some(cert)))
    } else {
        let mut planes = Vec::new();
        if sl * sn < 0.0 {
            planes.push([0, 2]);
        }
        if sl * sm < 0.0 {
            planes.push([0, 1]);
        }
        let w = first_witness(&field, &plane_candidates(&planes)?)?;
        if w.is_none() {
            return Err(Error::InternalInconsistency(
                "sign criterion predicts an idempotent but none was found".into(),
            ));
        }
        Ok(wrap(Status::Incomplete, w))
    }
}

fn diagonal_candidates(frame: &Mat3, a: f64, b: f64) -> Vec<Vec3> {
    let mut out = Vec::new();
    if a * b <= 0.0 {
        return out;
    }
    for (a, b) in [(a, b), (b, a)] {
        let p = (b / (a + b)).sqrt();
        let q = (a / (a + b)).sqrt();
        let t = q / (a * p);
        let y = frame * Vec3::new(p * t, q * t, t);
        for s1 in [1.0, -1.0] {
            for s2 in [1.0, -1.0] {
                let y2 = frame * Vec3::new(p * t * s1, q * t * s2, t);
                out.push(y2);
                out.push(-y2);
            }
        }
        out.push(y);
    }
    out
}

fn cyclic_candidates(e1: &Vec3, e2: &Vec3, e3: &Vec3, alpha_simple: f64, alpha_double: f64, gamma: f64) -> Vec<Vec3> {
    let a = 1.0 / alpha_double;
    let b = 1.0 / alpha_simple;
    let x1 = 1.0 / (b - a);
    let x3sq = 1.0 / ((b - a) * gamma * a * a);
    let mut out = Vec::new();
    if !(x3sq > 0.0) || !x3sq.is_finite() {
        return out;
    }
    let x3 = x3sq.sqrt();
    let x2 = -gamma * a * a * x1 * x3 / 2.0;
    for s3 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            let y = e1 * x1 + e2 * (x2 * s2) + e3 * (x3 * s3);
            out.push(y);
            out.push(-y);
        }
    }
    out
}

/// The closed-form criterion for `sl(2,R)`, in the coordinates of the Lax
/// field `ẏ = [y, u⁻¹y]`.
pub fn sl2_criterion(alg: &LieAlgebra3, u: &MetricOperatorU) -> Result<CompletenessVerdict> {
    let ty = classify(alg);
    if ty != AlgebraType::SL2R {
        return Err(Error::NotSl2);
    }
    let shape = u.shape()?;
    let field = lax_field_from_u(alg, u)?;
    let alphas_all: Vec<f64> = u.eigen.real.iter().map(|e| e.value).collect();
    let verdict = |status, case, data, support: Option<Certificate>| {
        CompletenessVerdict::new(
            status,
            Certificate::SlCriterion {
                case,
                data,
                support: support.map(Box::new),
            },
            &ty,
            FieldKind::Lax,
            field.clone(),
        )
    };
    match shape {
        SpectrumShape::DegreeLE2 | SpectrumShape::OneDoubleOneSimpleDiagonalizable => {
            let cert = is_affine_quadratic(&field).ok_or_else(|| {
                Error::InternalInconsistency("degree-two minimal polynomial but field is not affine".into())
            })?;
            let data = SlData {
                shape,
                alphas: alphas_all,
                gamma: None,
                criterion: None,
            };
            Ok(verdict(
                Status::Complete,
                SlCase::I,
                data,
                Some(Certificate::Linearizable {
                    change_of_basis: rows(&cert.change_of_basis),
                    residual: cert.residual,
                }),
            ))
        }
        SpectrumShape::ThreeDistinct => {
            let df = u.diagonal_frame(alg)?;
            let l = df.alphas.map(|a| 1.0 / a);
            let a = l[2] - l[1];
            let b = l[0] - l[2];
            let crit = (l[2] - l[1]) * (l[2] - l[0]);
            let data = SlData {
                shape,
                alphas: df.alphas.to_vec(),
                gamma: None,
                criterion: Some(crit),
            };
            let scale = l.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let (Some(sa), Some(sb)) = (strict_sign(a, scale), strict_sign(b, scale)) else {
                return Ok(boundary(verdict(Status::Undecided, SlCase::II, data, None), "(1/a3-1/a2)(1/a3-1/a1)", crit));
            };
            if sa * sb < 0.0 {
                // k(y, u⁻¹y) − λ₃ k(y, y) = b y1² − a y2² in the frame
                let k = u.k;
                let h = k * u.u_inverse()?;
                let h = (h + h.transpose()) * 0.5;
                let semi = (h - k * l[2]) * sb;
                let s = 2.0 / a.abs().min(b.abs());
                let cert = definite_certificate(&field, semi * s - k)?;
                Ok(verdict(Status::Complete, SlCase::II, data, Some(cert)))
            } else {
                let w = first_witness(&field, &diagonal_candidates(&df.frame, a, b))?;
                Ok(verdict(Status::Incomplete, SlCase::II, data, w))
            }
        }
        SpectrumShape::OneDoubleOneSimpleCyclic => {
            let cd = u.cyclic_data(alg)?;
            let diff = 1.0 / cd.alpha_double - 1.0 / cd.alpha_simple;
            let crit = cd.gamma * diff;
            let data = SlData {
                shape,
                alphas: vec![cd.alpha_simple, cd.alpha_double],
                gamma: Some(cd.gamma),
                criterion: Some(crit),
            };
            let lscale = (1.0 / cd.alpha_double).abs().max((1.0 / cd.alpha_simple).abs());
            let gscale = u.metric.amax() * cd.e3.norm_squared();
            let (Some(sg), Some(sd)) = (strict_sign(cd.gamma, gscale), strict_sign(diff, lscale)) else {
                return Ok(boundary(verdict(Status::Undecided, SlCase::III, data, None), "gamma(1/a2-1/a1)", crit));
            };
            if sg * sd > 0.0 {
                Ok(verdict(Status::Complete, SlCase::III, data, None))
            } else {
                let cands = cyclic_candidates(&cd.e1, &cd.e2, &cd.e3, cd.alpha_simple, cd.alpha_double, cd.gamma);
                let w = first_witness(&field, &cands)?;
                Ok(verdict(Status::Incomplete, SlCase::III, data, w))
            }
        }
        SpectrumShape::SingleEigendirection | SpectrumShape::TripleDegenerate => {
            let data = SlData {
                shape,
                alphas: alphas_all,
                gamma: None,
                criterion: None,
            };
            let w = first_witness(&field, &[])?;
            Ok(verdict(Status::Incomplete, SlCase::SingleEigendirection, data, w))
        }
    }
}

fn boundary(mut v: CompletenessVerdict, quantity: &str, value: f64) -> CompletenessVerdict {
    v.certificate = Certificate::Boundary {
        quantity: quantity.to_string(),
        value,
    };
    v
}

fn structural(alg: &LieAlgebra3, metric: &QuadraticForm3, ty: &AlgebraType, reason: StructuralReason) -> Result<CompletenessVerdict> {
    let field = euler_field_dual(alg, metric)?;
    Ok(CompletenessVerdict::new(
        Status::Complete,
        Certificate::StructuralComplete { reason },
        ty,
        FieldKind::EulerDual,
        field,
    ))
}

/// Dispatches on the algebra type.
pub fn decide(alg: &LieAlgebra3, metric: &QuadraticForm3) -> Result<CompletenessVerdict> {
    let metric = algebra_metric(metric)?;
    let ty = classify(alg);
    match ty {
        AlgebraType::Abelian => structural(alg, &metric, &ty, StructuralReason::Abelian),
        AlgebraType::Heisenberg => structural(alg, &metric, &ty, StructuralReason::Heisenberg),
        AlgebraType::SU2 => structural(alg, &metric, &ty, StructuralReason::Compact),
        AlgebraType::E2 => structural(alg, &metric, &ty, StructuralReason::E2),
        AlgebraType::E11 => e11_criterion(alg, &metric),
        AlgebraType::SL2R => {
            let u = u_from_metric(alg, &metric)?;
            let mut v = sl2_criterion(alg, &u)?;
            let found = find_idempotents(&v.field)?.len();
            let agrees = match v.status {
                Status::Complete => found == 0,
                Status::Incomplete => found > 0,
                Status::Undecided => true,
            };
            v.cross_check = Some(CrossCheck {
                idempotents_found: found,
                agrees,
            });
            if !agrees {
                return Err(Error::InternalInconsistency(format!(
                    "criterion says {} but the idempotent search found {found}",
                    v.status
                )));
            }
            if v.status == Status::Incomplete && v.witness().is_none() {
                return Err(Error::InternalInconsistency(
                    "incomplete verdict without an idempotent witness".into(),
                ));
            }
            Ok(v)
        }
        AlgebraType::NonUnimodular { .. } => {
            let field = euler_field_dual(alg, &metric)?;
            match idempotent_incompleteness(&field) {
                Some(w) => Ok(CompletenessVerdict::new(Status::Incomplete, w, &ty, FieldKind::EulerDual, field)),
                None => Ok(CompletenessVerdict::new(
                    Status::Undecided,
                    Certificate::NecessaryOnly {
                        idempotents_found: 0,
                        note: "no idempotents found; for non-unimodular groups this does not imply completeness".into(),
                    },
                    &ty,
                    FieldKind::EulerDual,
                    field,
                )),
            }
        }
    }
}
