//! Analysis reports and their deterministic JSON rendering.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::spec::ProblemSpec;
use crate::completeness::{
    decide, Certificate, CompletenessVerdict, CrossCheck, Status, CRIT_TOL, INTEGRAL_TOL, WITNESS_TOL,
};
use crate::error::Result;
use crate::flows::{algebra_metric, geodesic_field, FieldKind};
use crate::lie3::{classify, milnor_normal_form, signature_string, MILNOR_SIGN_TOL};
use crate::linalg::{Mat3, Vec3};
use crate::odeint::{integrate_monitored, IntegratorOptions, TrajectoryStatus};
use crate::quadfield::{
    definite_combination_seeded, invariant_direction_set, quadratic_first_integrals, DirectionOptions,
    InvariantDirection, DIRECTION_TOL, IDEMPOTENT_TOL,
};

pub const DEFAULT_T_MAX: f64 = 100.0;
pub const DEFAULT_STARTS: usize = 5;

type Rows = [[f64; 3]; 3];

fn rows(m: &Mat3) -> Rows {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub algebra_type: String,
    pub unimodular: bool,
    pub trace_vector: [f64; 3],
    pub milnor_alphas: Option<[f64; 3]>,
    pub signature: Option<String>,
    pub sign_tolerance: f64,
    pub jacobi_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldReport {
    pub kind: FieldKind,
    pub components: Vec<String>,
    /// `coefficients[i]` is the symmetric matrix of component `i`.
    pub coefficients: [Rows; 3],
    pub energy: Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionsReport {
    pub tolerance: f64,
    pub idempotent_tolerance: f64,
    pub non_isolated: bool,
    pub directions: Vec<InvariantDirection>,
    pub idempotents: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefiniteReport {
    pub coefficients: Vec<f64>,
    pub form: Rows,
    pub min_eigenvalue: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralsReport {
    pub tolerance: f64,
    pub basis: Vec<Rows>,
    pub max_residual: f64,
    pub definite_witness: Option<DefiniteReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub status: Status,
    pub certificate: Certificate,
    pub cross_check: Option<CrossCheck>,
    pub criterion_tolerance: f64,
    pub witness_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub x0: [f64; 3],
    pub backward: bool,
    pub outcome: TrajectoryStatus,
    pub steps: usize,
    pub max_norm: f64,
    pub energy_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationReport {
    pub rtol: f64,
    pub atol: f64,
    pub t_max: f64,
    pub seed: u64,
    pub runs: Vec<RunSummary>,
    pub any_blowup: bool,
    /// A blow-up was observed although the verdict is not Incomplete.
    pub refuted_by_integration: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub name: String,
    pub warnings: Vec<String>,
    pub classification: ClassificationReport,
    pub field: FieldReport,
    pub invariant_directions: DirectionsReport,
    pub first_integrals: IntegralsReport,
    pub verdict: VerdictReport,
    pub integration: Option<IntegrationReport>,
}

impl AnalysisReport {
    pub fn status(&self) -> Status {
        self.verdict.status
    }

    pub fn refuted(&self) -> bool {
        self.integration
            .as_ref()
            .is_some_and(|i| i.refuted_by_integration)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisSettings {
    pub seed: u64,
    pub integrate: bool,
    pub integrator: IntegratorOptions,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            integrate: true,
            integrator: IntegratorOptions::default(),
        }
    }
}

/// Uniform random unit vector in the first `dim` coordinates.
pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec3 {
    loop {
        let mut v = Vec3::zeros();
        for i in 0..dim {
            v[i] = rng.gen_range(-1.0..1.0);
        }
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn analyze(spec: &ProblemSpec, settings: &AnalysisSettings) -> Result<AnalysisReport> {
    let alg = spec.algebra()?;
    let (metric, warning) = spec.metric_with_warning()?;
    let metric = algebra_metric(&metric)?;
    let ty = classify(&alg);
    let milnor = milnor_normal_form(&alg).ok();
    let classification = ClassificationReport {
        algebra_type: ty.name().to_string(),
        unimodular: ty.is_unimodular(),
        trace_vector: alg.trace_vector(),
        milnor_alphas: milnor.as_ref().map(|m| m.alphas),
        signature: milnor.as_ref().map(|m| signature_string(&m.sign_signature)),
        sign_tolerance: MILNOR_SIGN_TOL,
        jacobi_residual: alg.jacobi_residual(),
    };

    let verdict: CompletenessVerdict = decide(&alg, &metric)?;
    let geo = geodesic_field(&alg, &metric, verdict.field_kind)?;
    let field = &verdict.field;
    let field_report = FieldReport {
        kind: verdict.field_kind,
        components: field.components(verdict.field_kind.variable()),
        coefficients: [0, 1, 2].map(|i| rows(&field.matrix(i))),
        energy: rows(geo.energy.matrix()),
    };

    let set = invariant_direction_set(field, &DirectionOptions::default())?;
    let idempotents: Vec<[f64; 3]> = set.idempotents().iter().map(|x| (*x).into()).collect();
    let directions = DirectionsReport {
        tolerance: DIRECTION_TOL,
        idempotent_tolerance: IDEMPOTENT_TOL,
        non_isolated: set.non_isolated,
        directions: set.directions.clone(),
        idempotents,
    };

    let basis = quadratic_first_integrals(field);
    let definite = definite_combination_seeded(&basis, settings.seed).map(|w| DefiniteReport {
        coefficients: w.coefficients,
        form: rows(&w.form),
        min_eigenvalue: w.min_eigenvalue,
        exact: w.exact,
    });
    let integrals = IntegralsReport {
        tolerance: INTEGRAL_TOL,
        max_residual: basis.max_residual(field),
        basis: basis.basis.iter().map(rows).collect(),
        definite_witness: definite,
    };

    let integration = if settings.integrate {
        let opts = spec.integrator_options(&settings.integrator);
        let t_max = spec.options.t_max.unwrap_or(DEFAULT_T_MAX);
        let n = spec.options.starts.unwrap_or(DEFAULT_STARTS);
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let mut starts: Vec<(String, Vec3)> = (0..n)
            .map(|k| (format!("start-{}", k + 1), random_unit(&mut rng, 3)))
            .collect();
        if let Some(p) = spec.options.probe {
            starts.push(("probe".into(), Vec3::from(p)));
        }
        if let Some(w) = verdict.witness() {
            starts.push(("witness".into(), w));
        }
        let energy = *geo.energy.matrix();
        let mut runs = Vec::new();
        for (label, x0) in &starts {
            for backward in [false, true] {
                if label == "witness" && backward {
                    continue;
                }
                let tr = integrate_monitored(field, x0, t_max, &opts, &[energy], backward)?;
                runs.push(RunSummary {
                    label: label.clone(),
                    x0: (*x0).into(),
                    backward,
                    outcome: tr.status.clone(),
                    steps: tr.times.len() - 1,
                    max_norm: tr.max_norm(),
                    energy_drift: tr.drift[0],
                });
            }
        }
        let any_blowup = runs
            .iter()
            .any(|r| matches!(r.outcome, TrajectoryStatus::BlowUp { .. }));
        Some(IntegrationReport {
            rtol: opts.rtol,
            atol: opts.atol,
            t_max,
            seed: settings.seed,
            runs,
            any_blowup,
            refuted_by_integration: any_blowup && verdict.status != Status::Incomplete,
        })
    } else {
        None
    };

    Ok(AnalysisReport {
        name: spec.name.clone(),
        warnings: warning.into_iter().collect(),
        classification,
        field: field_report,
        invariant_directions: directions,
        first_integrals: integrals,
        verdict: VerdictReport {
            status: verdict.status,
            certificate: verdict.certificate.clone(),
            cross_check: verdict.cross_check.clone(),
            criterion_tolerance: CRIT_TOL,
            witness_tolerance: WITNESS_TOL,
        },
        integration,
    })
}

/// Pretty JSON with every float printed with 17 significant digits.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("reports serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("json is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::presets::preset;

    #[test]
    fn floats_have_fixed_digits() {
        let s = to_json(&vec![1.0_f64, -0.1]);
        assert!(s.contains("1.0000000000000000e0"));
        assert!(s.contains("-1.0000000000000001e-1"));
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![1.0, -0.1]);
    }

    #[test]
    fn example4_report() {
        let r = analyze(&preset("example4").unwrap(), &AnalysisSettings::default()).unwrap();
        assert_eq!(r.status(), Status::Incomplete);
        let int = r.integration.unwrap();
        let w = int.runs.iter().find(|r| r.label == "witness").unwrap();
        match w.outcome {
            TrajectoryStatus::BlowUp { t_star, .. } => assert!((t_star - 1.0).abs() < 1e-3),
            ref other => panic!("{other:?}"),
        }
    }

    #[test]
    fn example5_is_refuted() {
        let r = analyze(&preset("example5").unwrap(), &AnalysisSettings::default()).unwrap();
        assert_eq!(r.status(), Status::Undecided);
        assert!(r.refuted());
    }
}
