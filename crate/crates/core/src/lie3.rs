//! Three-dimensional real Lie algebras given by structure constants.
//!
//! The tensor is stored densely: `c[k][i][j]` is the `k`-th component of
//! `[e_i, e_j]`. Every constructed algebra is exactly antisymmetric and
//! satisfies the Jacobi identity to within [`JACOBI_TOL`].

use std::fmt;

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};

pub const JACOBI_TOL: f64 = 1e-10;
pub const UNIMODULAR_TOL: f64 = 1e-10;
/// Tolerance for inconsistencies in sparse bracket input.
pub const INGEST_TOL: f64 = 1e-12;
/// Relative cutoff below which a Milnor eigenvalue counts as zero.
pub const MILNOR_SIGN_TOL: f64 = 1e-9;

pub type Tensor3 = [[[f64; 3]; 3]; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra3 {
    c: Tensor3,
    labels: Option<[String; 3]>,
}

/// One entry of a sparse bracket table, `[e_i, e_j] = sum_k result[k] e_k`,
/// with zero-based indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub result: [f64; 3],
}

impl LieAlgebra3 {
    /// Builds an algebra from a dense tensor. The tensor is antisymmetrized;
    /// deviations above [`INGEST_TOL`] are rejected.
    pub fn new(c: Tensor3) -> Result<Self> {
        Self::with_tolerance(c, JACOBI_TOL)
    }

    pub fn with_tolerance(c: Tensor3, jacobi_tol: f64) -> Result<Self> {
        let mut dev = 0.0_f64;
        let mut out = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    if !c[k][i][j].is_finite() {
                        return Err(Error::BadParams("non-finite structure constant".into()));
                    }
                    dev = dev.max((c[k][i][j] + c[k][j][i]).abs());
                    out[k][i][j] = 0.5 * (c[k][i][j] - c[k][j][i]);
                }
            }
        }
        if dev > INGEST_TOL {
            return Err(Error::NotAntisymmetric(dev));
        }
        let alg = Self { c: out, labels: None };
        let residual = alg.jacobi_residual();
        let tol = jacobi_tol * alg.max_constant().powi(2).max(1.0);
        if residual > tol {
            return Err(Error::JacobiViolation { residual, tol });
        }
        Ok(alg)
    }

    /// Builds an algebra from a sparse bracket list. Unlisted pairs are zero.
    /// A pair may be listed in both orders as long as the entries agree.
    pub fn from_brackets(entries: &[BracketEntry]) -> Result<Self> {
        let mut c = [[[0.0; 3]; 3]; 3];
        let mut seen = [[false; 3]; 3];
        for e in entries {
            let (i, j) = (e.i, e.j);
            if i > 2 || j > 2 {
                return Err(Error::InconsistentBracket {
                    i: i + 1,
                    j: j + 1,
                    detail: "index out of range".into(),
                });
            }
            if i == j {
                if e.result.iter().any(|r| r.abs() > INGEST_TOL) {
                    return Err(Error::InconsistentBracket {
                        i: i + 1,
                        j: j + 1,
                        detail: "self-bracket must vanish".into(),
                    });
                }
                continue;
            }
            if seen[i][j] {
                let dev = (0..3)
                    .map(|k| (c[k][i][j] - e.result[k]).abs())
                    .fold(0.0, f64::max);
                if dev > INGEST_TOL {
                    return Err(Error::InconsistentBracket {
                        i: i + 1,
                        j: j + 1,
                        detail: format!("conflicting entries (deviation {dev:e})"),
                    });
                }
            }
            for k in 0..3 {
                c[k][i][j] = e.result[k];
                c[k][j][i] = -e.result[k];
            }
            seen[i][j] = true;
            seen[j][i] = true;
        }
        Self::new(c)
    }

    pub fn with_labels(mut self, labels: [String; 3]) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn labels(&self) -> Option<&[String; 3]> {
        self.labels.as_ref()
    }

    pub fn abelian() -> Self {
        Self {
            c: [[[0.0; 3]; 3]; 3],
            labels: None,
        }
    }

    pub fn structure_constants(&self) -> &Tensor3 {
        &self.c
    }

    pub fn constant(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[k][i][j]
    }

    fn max_constant(&self) -> f64 {
        self.c
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Nonzero brackets `[e_i, e_j]` with `i < j`.
    pub fn bracket_entries(&self) -> Vec<BracketEntry> {
        let mut out = Vec::new();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let r = [self.c[0][i][j], self.c[1][i][j], self.c[2][i][j]];
                if r.iter().any(|v| *v != 0.0) {
                    out.push(BracketEntry { i, j, result: r });
                }
            }
        }
        out
    }

    pub fn bracket(&self, x: &Vec3, y: &Vec3) -> Vec3 {
        let mut out = Vec3::zeros();
        for k in 0..3 {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += self.c[k][i][j] * x[i] * y[j];
                }
            }
            out[k] = s;
        }
        out
    }

    /// Matrix of `ad_x`, so that `ad(x) * y = [x, y]`.
    pub fn ad(&self, x: &Vec3) -> Mat3 {
        let mut m = Mat3::zeros();
        for k in 0..3 {
            for j in 0..3 {
                m[(k, j)] = (0..3).map(|i| self.c[k][i][j] * x[i]).sum();
            }
        }
        m
    }

    /// `(tr ad_{e_1}, tr ad_{e_2}, tr ad_{e_3})`.
    pub fn trace_vector(&self) -> [f64; 3] {
        let mut t = [0.0; 3];
        for (i, ti) in t.iter_mut().enumerate() {
            *ti = (0..3).map(|k| self.c[k][i][k]).sum();
        }
        t
    }

    pub fn jacobi_residual(&self) -> f64 {
        let e = [Vec3::x(), Vec3::y(), Vec3::z()];
        let mut worst = 0.0_f64;
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    let j = self.bracket(&self.bracket(&e[a], &e[b]), &e[d])
                        + self.bracket(&self.bracket(&e[b], &e[d]), &e[a])
                        + self.bracket(&self.bracket(&e[d], &e[a]), &e[b]);
                    worst = worst.max(j.amax());
                }
            }
        }
        worst
    }

    /// The same algebra in the basis `f_a = sum_i p[(i, a)] e_i`.
    pub fn change_basis(&self, p: &Mat3) -> Result<Self> {
        let p_inv = p
            .try_inverse()
            .ok_or_else(|| Error::BadParams("singular change of basis".into()))?;
        let cols: Vec<Vec3> = (0..3).map(|a| p.column(a).into_owned()).collect();
        let mut c = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for b in (a + 1)..3 {
                let v = p_inv * self.bracket(&cols[a], &cols[b]);
                for k in 0..3 {
                    c[k][a][b] = v[k];
                    c[k][b][a] = -v[k];
                }
            }
        }
        Self::new(c)
    }

    /// Milnor's operator `L` with `[X, Y] = L(X x Y)` for the Euclidean
    /// product and orientation of the current basis.
    pub fn milnor_operator(&self) -> Mat3 {
        let e = [Vec3::x(), Vec3::y(), Vec3::z()];
        let mut l = Mat3::zeros();
        // e2 x e3 = e1, e3 x e1 = e2, e1 x e2 = e3
        l.set_column(0, &self.bracket(&e[1], &e[2]));
        l.set_column(1, &self.bracket(&e[2], &e[0]));
        l.set_column(2, &self.bracket(&e[0], &e[1]));
        l
    }
}

impl fmt::Display for LieAlgebra3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries = self.bracket_entries();
        if entries.is_empty() {
            return write!(f, "abelian");
        }
        let name = |i: usize| -> String {
            match &self.labels {
                Some(l) => l[i].clone(),
                None => format!("e{}", i + 1),
            }
        };
        let mut first = true;
        for e in entries {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "[{},{}] = ", name(e.i), name(e.j))?;
            let mut terms = Vec::new();
            for k in 0..3 {
                if e.result[k] != 0.0 {
                    terms.push(format!("{}*{}", e.result[k], name(k)));
                }
            }
            write!(f, "{}", terms.join(" + "))?;
        }
        Ok(())
    }
}

pub fn bracket(alg: &LieAlgebra3, x: &Vec3, y: &Vec3) -> Vec3 {
    alg.bracket(x, y)
}

pub fn is_unimodular(alg: &LieAlgebra3) -> bool {
    is_unimodular_tol(alg, UNIMODULAR_TOL)
}

pub fn is_unimodular_tol(alg: &LieAlgebra3, tol: f64) -> bool {
    alg.trace_vector().iter().all(|t| t.abs() <= tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(v: f64, tol: f64) -> Self {
        if v > tol {
            Sign::Positive
        } else if v < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn flip(self) -> Self {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Zero => '0',
            Sign::Negative => '-',
        }
    }
}

/// Canonical sign triple: global flip so that `#(+) >= #(-)`, then sorted
/// descending.
pub fn canonical_signature(signs: [Sign; 3]) -> [Sign; 3] {
    let pos = signs.iter().filter(|s| **s == Sign::Positive).count();
    let neg = signs.iter().filter(|s| **s == Sign::Negative).count();
    let mut s = if neg > pos { signs.map(Sign::flip) } else { signs };
    s.sort_by(|a, b| b.cmp(a));
    s
}

pub fn signature_string(s: &[Sign; 3]) -> String {
    format!("({},{},{})", s[0].symbol(), s[1].symbol(), s[2].symbol())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilnorData {
    pub alphas: [f64; 3],
    /// Columns are the orthonormal, positively oriented Milnor frame.
    pub frame: Mat3,
    pub sign_signature: [Sign; 3],
    /// Max deviation of the frame brackets from the normal form.
    pub residual: f64,
}

pub fn milnor_normal_form(alg: &LieAlgebra3) -> Result<MilnorData> {
    if !is_unimodular(alg) {
        return Err(Error::NotUnimodular(alg.trace_vector()));
    }
    let l = alg.milnor_operator();
    let l = (l + l.transpose()) * 0.5;
    let eig = SymmetricEigen::new(l);
    let mut frame = eig.eigenvectors;
    if frame.determinant() < 0.0 {
        let c0 = -frame.column(0).into_owned();
        frame.set_column(0, &c0);
    }
    let alphas = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
    let e: Vec<Vec3> = (0..3).map(|a| frame.column(a).into_owned()).collect();
    let residual = [
        (alg.bracket(&e[1], &e[2]) - e[0] * alphas[0]).amax(),
        (alg.bracket(&e[2], &e[0]) - e[1] * alphas[1]).amax(),
        (alg.bracket(&e[0], &e[1]) - e[2] * alphas[2]).amax(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let scale = alphas.iter().fold(0.0_f64, |m, a| m.max(a.abs())).max(1.0);
    let signs = alphas.map(|a| Sign::of(a, MILNOR_SIGN_TOL * scale));
    Ok(MilnorData {
        alphas,
        frame,
        sign_signature: canonical_signature(signs),
        residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlgebraType {
    Abelian,
    Heisenberg,
    SU2,
    E2,
    E11,
    SL2R,
    NonUnimodular { trace: [f64; 3] },
}

impl AlgebraType {
    pub fn name(&self) -> &'static str {
        match self {
            AlgebraType::Abelian => "Abelian",
            AlgebraType::Heisenberg => "Heisenberg",
            AlgebraType::SU2 => "SU2",
            AlgebraType::E2 => "E2",
            AlgebraType::E11 => "E11",
            AlgebraType::SL2R => "SL2R",
            AlgebraType::NonUnimodular { .. } => "NonUnimodular",
        }
    }

    pub fn is_unimodular(&self) -> bool {
        !matches!(self, AlgebraType::NonUnimodular { .. })
    }

    /// Same tag, ignoring the trace payload.
    pub fn same_kind(&self, other: &AlgebraType) -> bool {
        self.name() == other.name()
    }
}

impl fmt::Display for AlgebraType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn type_for_signature(s: [Sign; 3]) -> AlgebraType {
    use Sign::*;
    match canonical_signature(s) {
        [Zero, Zero, Zero] => AlgebraType::Abelian,
        [Positive, Zero, Zero] => AlgebraType::Heisenberg,
        [Positive, Positive, Positive] => AlgebraType::SU2,
        [Positive, Positive, Zero] => AlgebraType::E2,
        [Positive, Zero, Negative] => AlgebraType::E11,
        [Positive, Positive, Negative] => AlgebraType::SL2R,
        other => unreachable!("non-canonical signature {other:?}"),
    }
}

pub fn classify(alg: &LieAlgebra3) -> AlgebraType {
    match milnor_normal_form(alg) {
        Ok(m) => type_for_signature(m.sign_signature),
        Err(_) => AlgebraType::NonUnimodular {
            trace: alg.trace_vector(),
        },
    }
}

/// The standard bracket tables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StandardAlgebra {
    Abelian,
    /// `[E1,E2] = E3`
    Heisenberg,
    /// `[E2,E3] = E1, [E3,E1] = E2, [E1,E2] = E3`
    Su2,
    /// `[E2,E3] = 0, [E3,E1] = E2, [E1,E2] = E3`
    E2,
    /// `[E1,E2] = E2, [E1,E3] = -E3, [E2,E3] = 0`
    E11,
    /// k-orthonormal frame, kappa = 1:
    /// `[E1,E2] = -E3, [E1,E3] = -E2, [E2,E3] = E1`
    Sl2Orthonormal,
    /// k-hyperbolic frame, kappa = 1:
    /// `[E1,E2] = E2, [E1,E3] = -E3, [E2,E3] = E1`
    Sl2Hyperbolic,
    /// `[e1,e2] = alpha e2 + beta e3, [e1,e3] = gamma e2 + delta e3` with
    /// `alpha + delta = 2`.
    NonUnimodular {
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
    },
}

impl StandardAlgebra {
    pub fn algebra_type(&self) -> AlgebraType {
        match self {
            StandardAlgebra::Abelian => AlgebraType::Abelian,
            StandardAlgebra::Heisenberg => AlgebraType::Heisenberg,
            StandardAlgebra::Su2 => AlgebraType::SU2,
            StandardAlgebra::E2 => AlgebraType::E2,
            StandardAlgebra::E11 => AlgebraType::E11,
            StandardAlgebra::Sl2Orthonormal | StandardAlgebra::Sl2Hyperbolic => AlgebraType::SL2R,
            StandardAlgebra::NonUnimodular { alpha, delta, .. } => AlgebraType::NonUnimodular {
                trace: [alpha + delta, 0.0, 0.0],
            },
        }
    }
}

pub fn standard_algebra(kind: StandardAlgebra) -> Result<LieAlgebra3> {
    let e = |i: usize, j: usize, r: [f64; 3]| BracketEntry { i, j, result: r };
    let entries = match kind {
        StandardAlgebra::Abelian => vec![],
        StandardAlgebra::Heisenberg => vec![e(0, 1, [0.0, 0.0, 1.0])],
        StandardAlgebra::Su2 => vec![
            e(1, 2, [1.0, 0.0, 0.0]),
            e(2, 0, [0.0, 1.0, 0.0]),
            e(0, 1, [0.0, 0.0, 1.0]),
        ],
        StandardAlgebra::E2 => vec![e(2, 0, [0.0, 1.0, 0.0]), e(0, 1, [0.0, 0.0, 1.0])],
        StandardAlgebra::E11 => vec![e(0, 1, [0.0, 1.0, 0.0]), e(0, 2, [0.0, 0.0, -1.0])],
        StandardAlgebra::Sl2Orthonormal => vec![
            e(0, 1, [0.0, 0.0, -1.0]),
            e(0, 2, [0.0, -1.0, 0.0]),
            e(1, 2, [1.0, 0.0, 0.0]),
        ],
        StandardAlgebra::Sl2Hyperbolic => vec![
            e(0, 1, [0.0, 1.0, 0.0]),
            e(0, 2, [0.0, 0.0, -1.0]),
            e(1, 2, [1.0, 0.0, 0.0]),
        ],
        StandardAlgebra::NonUnimodular {
            alpha,
            beta,
            gamma,
            delta,
        } => {
            if ((alpha + delta) - 2.0).abs() > 1e-12 {
                return Err(Error::BadParams(format!(
                    "non-unimodular family needs alpha + delta = 2, got {}",
                    alpha + delta
                )));
            }
            vec![e(0, 1, [0.0, alpha, beta]), e(0, 2, [0.0, gamma, delta])]
        }
    };
    LieAlgebra3::from_brackets(&entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std(k: StandardAlgebra) -> LieAlgebra3 {
        standard_algebra(k).unwrap()
    }

    #[test]
    fn e2_bracket_e3_e1_is_e2() {
        let alg = std(StandardAlgebra::E2);
        let r = alg.bracket(&Vec3::z(), &Vec3::x());
        assert_eq!(r, Vec3::y());
    }

    #[test]
    fn e11_bracket_e1_e2_is_e2() {
        let alg = std(StandardAlgebra::E11);
        assert_eq!(alg.bracket(&Vec3::x(), &Vec3::y()), Vec3::y());
    }

    #[test]
    fn self_bracket_vanishes() {
        let alg = std(StandardAlgebra::Sl2Orthonormal);
        let x = Vec3::new(0.3, -1.2, 2.5);
        assert_eq!(alg.bracket(&x, &x), Vec3::zeros());
    }

    #[test]
    fn unimodularity() {
        assert!(is_unimodular(&std(StandardAlgebra::E2)));
        assert!(is_unimodular(&LieAlgebra3::abelian()));
        let ex5 = std(StandardAlgebra::NonUnimodular {
            alpha: 0.5,
            beta: 0.0,
            gamma: 0.0,
            delta: 1.5,
        });
        assert!(!is_unimodular(&ex5));
        assert_eq!(ex5.trace_vector(), [2.0, 0.0, 0.0]);
    }

    #[test]
    fn milnor_e2() {
        let m = milnor_normal_form(&std(StandardAlgebra::E2)).unwrap();
        let mut a = m.alphas;
        a.sort_by(|x, y| x.total_cmp(y));
        assert!(a[0].abs() < 1e-14 && (a[1] - 1.0).abs() < 1e-14 && (a[2] - 1.0).abs() < 1e-14);
        assert_eq!(
            m.sign_signature,
            [Sign::Positive, Sign::Positive, Sign::Zero]
        );
        assert!(m.residual <= 1e-9);
    }

    #[test]
    fn milnor_abelian_and_sl2() {
        let m = milnor_normal_form(&LieAlgebra3::abelian()).unwrap();
        assert_eq!(m.alphas, [0.0, 0.0, 0.0]);
        let m = milnor_normal_form(&std(StandardAlgebra::Sl2Orthonormal)).unwrap();
        assert_eq!(
            m.sign_signature,
            [Sign::Positive, Sign::Positive, Sign::Negative]
        );
    }

    #[test]
    fn milnor_rejects_non_unimodular() {
        let alg = std(StandardAlgebra::NonUnimodular {
            alpha: 0.5,
            beta: 0.0,
            gamma: 0.0,
            delta: 1.5,
        });
        assert!(matches!(
            milnor_normal_form(&alg),
            Err(Error::NotUnimodular(_))
        ));
    }

    #[test]
    fn classification_table() {
        use Sign::*;
        assert_eq!(type_for_signature([Zero, Zero, Zero]), AlgebraType::Abelian);
        assert_eq!(
            type_for_signature([Zero, Positive, Zero]),
            AlgebraType::Heisenberg
        );
        assert_eq!(
            type_for_signature([Negative, Zero, Positive]),
            AlgebraType::E11
        );
        assert_eq!(
            type_for_signature([Negative, Negative, Positive]),
            AlgebraType::SL2R
        );
        assert_eq!(
            type_for_signature([Negative, Negative, Negative]),
            AlgebraType::SU2
        );
    }

    #[test]
    fn bad_params_for_family() {
        let r = standard_algebra(StandardAlgebra::NonUnimodular {
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
            delta: 0.5,
        });
        assert!(matches!(r, Err(Error::BadParams(_))));
    }

    #[test]
    fn sparse_ingestion_rejects_conflicts() {
        let a = BracketEntry {
            i: 0,
            j: 1,
            result: [0.0, 0.0, 1.0],
        };
        let b = BracketEntry {
            i: 1,
            j: 0,
            result: [0.0, 0.0, 1.0],
        };
        assert!(LieAlgebra3::from_brackets(&[a, a]).is_ok());
        assert!(matches!(
            LieAlgebra3::from_brackets(&[a, b]),
            Err(Error::InconsistentBracket { .. })
        ));
    }

    #[test]
    fn jacobi_violation_is_rejected() {
        // [e1,e2] = e1, [e2,e3] = e2, [e3,e1] = e3 is not a Lie algebra
        let entries = [
            BracketEntry {
                i: 0,
                j: 1,
                result: [1.0, 0.0, 0.0],
            },
            BracketEntry {
                i: 1,
                j: 2,
                result: [0.0, 1.0, 0.0],
            },
            BracketEntry {
                i: 2,
                j: 0,
                result: [0.0, 0.0, 1.0],
            },
        ];
        assert!(matches!(
            LieAlgebra3::from_brackets(&entries),
            Err(Error::JacobiViolation { .. })
        ));
    }

    #[test]
    fn self_bracket_entry_must_vanish() {
        let e = BracketEntry {
            i: 1,
            j: 1,
            result: [0.0, 1.0, 0.0],
        };
        assert!(LieAlgebra3::from_brackets(&[e]).is_err());
    }
}
