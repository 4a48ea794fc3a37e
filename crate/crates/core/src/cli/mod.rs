//! The `geocomplete` command-line front end.

pub mod presets;
pub mod report;
pub mod spec;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::completeness::Status;
use crate::error::{Error, Result};
use crate::flows::{geodesic_field, FieldKind, GeodesicField};
use crate::lie3::{classify, milnor_normal_form, signature_string, AlgebraType};
use crate::linalg::Vec3;
use crate::odeint::{integrate_monitored, IntegratorOptions, TrajectoryStatus};
use crate::quadfield::{
    definite_combination_seeded, invariant_direction_set, quadratic_first_integrals, DirectionKind,
    DirectionOptions,
};

pub use report::{analyze, to_json, AnalysisReport, AnalysisSettings};
pub use spec::ProblemSpec;

pub const EXIT_COMPLETE: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_DEGENERATE_METRIC: i32 = 4;
pub const EXIT_INTEGRATOR: i32 = 5;
pub const EXIT_INCOMPLETE: i32 = 10;
pub const EXIT_UNDECIDED: i32 = 20;

pub fn exit_code_for_status(s: Status) -> i32 {
    match s {
        Status::Complete => EXIT_COMPLETE,
        Status::Incomplete => EXIT_INCOMPLETE,
        Status::Undecided => EXIT_UNDECIDED,
    }
}

pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) => EXIT_PARSE,
        Error::DegenerateMetric { .. } | Error::IllConditionedMetric(_) => EXIT_DEGENERATE_METRIC,
        Error::BadOptions(_) | Error::InsufficientTail(_) | Error::NoBlowUp => EXIT_INTEGRATOR,
        _ => EXIT_INVARIANT,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "geocomplete",
    version,
    about = "Geodesic completeness of left-invariant metrics on 3-dimensional Lie groups"
)]
pub struct Cli {
    /// Relative tolerance of the integrator.
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    /// Absolute tolerance of the integrator.
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    /// Seed for random starts and randomized searches.
    #[arg(long, global = true, env = "GEOCOMPLETE_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldChoice {
    Auto,
    EulerDual,
    EulerAlgebra,
    Lax,
}

#[derive(Args, Debug)]
pub struct FieldArg {
    /// Which geodesic field to use; `auto` picks the Lax field on sl(2,R)
    /// and the dual Euler field elsewhere.
    #[arg(long, value_enum, default_value_t = FieldChoice::Auto)]
    pub field: FieldChoice,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify the algebra of a spec file or preset.
    Classify { spec: String },
    /// Full analysis: field, directions, first integrals, verdict, integration.
    Analyze {
        spec: String,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Skip the corroborating integrations.
        #[arg(long)]
        no_integrate: bool,
    },
    /// Integrate the geodesic field and write a CSV trajectory.
    Integrate {
        spec: String,
        /// Initial condition `a,b,c` in field coordinates, or `random`.
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Integrate towards negative times.
        #[arg(long)]
        backward: bool,
        #[command(flatten)]
        field: FieldArg,
    },
    /// Basis of quadratic first integrals and a definite combination.
    FirstIntegrals {
        spec: String,
        #[command(flatten)]
        field: FieldArg,
    },
    /// Invariant directions and strict idempotents.
    Idempotents {
        spec: String,
        #[command(flatten)]
        field: FieldArg,
    },
    /// Analyze every `*.json` spec in a directory.
    Batch {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        no_integrate: bool,
    },
    /// Print or save a preset spec; lists the presets without a name.
    Preset {
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Output of a command: text for stdout and the exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Cli {
    fn integrator(&self) -> IntegratorOptions {
        let d = IntegratorOptions::default();
        IntegratorOptions {
            rtol: self.rtol.unwrap_or(d.rtol),
            atol: self.atol.unwrap_or(d.atol),
            ..d
        }
    }

    fn settings(&self, integrate: bool) -> AnalysisSettings {
        AnalysisSettings {
            seed: self.seed,
            integrate,
            integrator: self.integrator(),
        }
    }
}

fn select_field(spec: &ProblemSpec, choice: FieldChoice) -> Result<GeodesicField> {
    let alg = spec.algebra()?;
    let metric = spec.metric()?;
    let kind = match choice {
        FieldChoice::EulerDual => FieldKind::EulerDual,
        FieldChoice::EulerAlgebra => FieldKind::EulerAlgebra,
        FieldChoice::Lax => FieldKind::Lax,
        FieldChoice::Auto => spec.options.field.unwrap_or(match classify(&alg) {
            AlgebraType::SL2R => FieldKind::Lax,
            _ => FieldKind::EulerDual,
        }),
    };
    geodesic_field(&alg, &metric, kind)
}

fn parse_x0(s: &str, seed: u64) -> Result<Vec3> {
    if s.trim() == "random" {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok(report::random_unit(&mut rng, 3));
    }
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("--x0 needs three comma-separated reals, got '{s}'")));
    }
    let mut v = Vec3::zeros();
    for (i, p) in parts.iter().enumerate() {
        v[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("--x0 component '{p}': {e}")))?;
    }
    Ok(v)
}

fn cmd_classify(spec: &ProblemSpec) -> Result<Outcome> {
    let alg = spec.algebra()?;
    let ty = classify(&alg);
    let mut out = String::new();
    match &ty {
        AlgebraType::NonUnimodular { trace } => {
            writeln!(out, "NonUnimodular, trace vector ({}, {}, {})", trace[0], trace[1], trace[2]).unwrap();
        }
        AlgebraType::Abelian => writeln!(out, "Abelian").unwrap(),
        _ => {
            let m = milnor_normal_form(&alg)?;
            writeln!(out, "{}, signature {}", ty.name(), signature_string(&m.sign_signature)).unwrap();
            writeln!(
                out,
                "milnor constants: {:.12}, {:.12}, {:.12} (frame residual {:e})",
                m.alphas[0], m.alphas[1], m.alphas[2], m.residual
            )
            .unwrap();
        }
    }
    writeln!(out, "brackets: {alg}").unwrap();
    Ok(Outcome {
        stdout: out,
        ..Default::default()
    })
}

fn cmd_analyze(cli: &Cli, spec: &ProblemSpec, json: Option<&Path>, integrate: bool) -> Result<Outcome> {
    let report = analyze(spec, &cli.settings(integrate))?;
    let mut out = String::new();
    writeln!(out, "{}: {}", report.name, report.classification.algebra_type).unwrap();
    writeln!(
        out,
        "field ({}): ({})",
        report.field.kind,
        report.field.components.join(", ")
    )
    .unwrap();
    writeln!(out, "idempotents: {}", report.invariant_directions.idempotents.len()).unwrap();
    writeln!(out, "first integrals: {}", report.first_integrals.basis.len()).unwrap();
    writeln!(
        out,
        "verdict: {} ({})",
        report.verdict.status,
        report.verdict.certificate.name()
    )
    .unwrap();
    if let Some(int) = &report.integration {
        let blow = int.runs.iter().filter(|r| matches!(r.outcome, TrajectoryStatus::BlowUp { .. })).count();
        writeln!(out, "integration: {} runs to t={}, {} blow-ups", int.runs.len(), int.t_max, blow).unwrap();
        if int.refuted_by_integration {
            writeln!(out, "refuted_by_integration: a numerical blow-up was observed").unwrap();
        }
    }
    if let Some(path) = json {
        fs::write(path, to_json(&report))?;
    }
    Ok(Outcome {
        stdout: out,
        stderr: report.warnings.iter().map(|w| format!("warning: {w}\n")).collect(),
        code: exit_code_for_status(report.status()),
    })
}

fn fmt_csv(v: f64) -> String {
    format!("{v:.17e}")
}

fn cmd_integrate(
    cli: &Cli,
    spec: &ProblemSpec,
    x0: &str,
    t_max: f64,
    out_path: Option<&Path>,
    backward: bool,
    field: FieldChoice,
) -> Result<Outcome> {
    let geo = select_field(spec, field)?;
    let x0 = parse_x0(x0, cli.seed)?;
    let opts = spec.integrator_options(&cli.integrator());
    let energy = *geo.energy.matrix();
    let tr = integrate_monitored(&geo.field, &x0, t_max, &opts, &[energy], backward)?;
    if let Some(path) = out_path {
        let mut csv = String::from("t,x1,x2,x3,energy\n");
        for (i, x) in tr.states.iter().enumerate() {
            let e = x.dot(&(energy * x));
            writeln!(
                csv,
                "{},{},{},{},{}",
                fmt_csv(tr.physical_time(i)),
                fmt_csv(x[0]),
                fmt_csv(x[1]),
                fmt_csv(x[2]),
                fmt_csv(e)
            )
            .unwrap();
        }
        fs::write(path, csv)?;
    }
    let mut out = String::new();
    writeln!(out, "field: {} ({})", geo.kind, geo.field.components(geo.kind.variable()).join(", ")).unwrap();
    writeln!(out, "x0: ({}, {}, {})", x0[0], x0[1], x0[2]).unwrap();
    match &tr.status {
        TrajectoryStatus::ReachedHorizon { t } => writeln!(out, "status: ReachedHorizon t={t}").unwrap(),
        TrajectoryStatus::BlowUp { t_star, norm } => {
            writeln!(out, "status: BlowUp t*={t_star:.6} norm={norm:e}").unwrap()
        }
        TrajectoryStatus::StepUnderflow { t } => writeln!(out, "status: StepUnderflow t={t}").unwrap(),
    }
    writeln!(out, "steps: {}", tr.times.len() - 1).unwrap();
    writeln!(out, "energy drift: {:e}", tr.drift[0]).unwrap();
    Ok(Outcome {
        stdout: out,
        ..Default::default()
    })
}

fn cmd_first_integrals(cli: &Cli, spec: &ProblemSpec, field: FieldChoice) -> Result<Outcome> {
    let geo = select_field(spec, field)?;
    let var = geo.kind.variable();
    let basis = quadratic_first_integrals(&geo.field);
    let mut out = String::new();
    writeln!(out, "field: {} ({})", geo.kind, geo.field.components(var).join(", ")).unwrap();
    writeln!(out, "dimension: {} (residual {:e})", basis.len(), basis.max_residual(&geo.field)).unwrap();
    for (k, s) in basis.basis.iter().enumerate() {
        let q = crate::forms::QuadraticForm3::algebra(*s);
        writeln!(out, "  Q{}: {}", k + 1, q.polynomial().replace('x', var)).unwrap();
    }
    match definite_combination_seeded(&basis, cli.seed) {
        Some(w) => {
            let q = crate::forms::QuadraticForm3::algebra(w.form);
            writeln!(out, "definite combination: {}", q.polynomial().replace('x', var)).unwrap();
            writeln!(out, "  coefficients: {:?}", w.coefficients).unwrap();
        }
        None => writeln!(out, "definite combination: none found").unwrap(),
    }
    Ok(Outcome {
        stdout: out,
        ..Default::default()
    })
}

fn cmd_idempotents(spec: &ProblemSpec, field: FieldChoice) -> Result<Outcome> {
    let geo = select_field(spec, field)?;
    let set = invariant_direction_set(&geo.field, &DirectionOptions::default())?;
    let mut out = String::new();
    writeln!(
        out,
        "field: {} ({})",
        geo.kind,
        geo.field.components(geo.kind.variable()).join(", ")
    )
    .unwrap();
    writeln!(out, "invariant directions: {}", set.directions.len()).unwrap();
    if set.non_isolated {
        writeln!(out, "  (directions are not isolated; list is a sample)").unwrap();
    }
    for d in &set.directions {
        let kind = match d.kind {
            DirectionKind::Zero => "zero",
            DirectionKind::IdempotentRay => "idempotent ray",
        };
        writeln!(
            out,
            "  d = ({:.12}, {:.12}, {:.12}), rho = {:.12}, {kind}",
            d.d[0], d.d[1], d.d[2], d.rho
        )
        .unwrap();
    }
    let ids = set.idempotents();
    writeln!(out, "idempotents: {}", ids.len()).unwrap();
    for x in ids {
        writeln!(out, "  X* = ({:.12}, {:.12}, {:.12})", x[0], x[1], x[2]).unwrap();
    }
    Ok(Outcome {
        stdout: out,
        ..Default::default()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub file: String,
    pub name: Option<String>,
    pub status: Option<Status>,
    pub certificate: Option<String>,
    pub refuted_by_integration: bool,
    pub error: Option<String>,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub entries: Vec<BatchEntry>,
    pub failures: usize,
}

pub fn run_batch(dir: &Path, parallel: usize, settings: &AnalysisSettings) -> Result<BatchSummary> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| Error::BadParams(e.to_string()))?;
    let entries: Vec<BatchEntry> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let file = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                match ProblemSpec::load(path).and_then(|s| analyze(&s, settings)) {
                    Ok(r) => BatchEntry {
                        file,
                        name: Some(r.name.clone()),
                        status: Some(r.status()),
                        certificate: Some(r.verdict.certificate.name().to_string()),
                        refuted_by_integration: r.refuted(),
                        error: None,
                        exit_code: exit_code_for_status(r.status()),
                    },
                    Err(e) => BatchEntry {
                        file,
                        name: None,
                        status: None,
                        certificate: None,
                        refuted_by_integration: false,
                        exit_code: exit_code_for_error(&e),
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    let failures = entries.iter().filter(|e| e.error.is_some()).count();
    Ok(BatchSummary { entries, failures })
}

fn cmd_batch(cli: &Cli, dir: &Path, parallel: usize, summary: Option<&Path>, integrate: bool) -> Result<Outcome> {
    let s = run_batch(dir, parallel, &cli.settings(integrate))?;
    let mut out = String::new();
    for e in &s.entries {
        match (&e.status, &e.error) {
            (Some(st), _) => {
                let tag = if e.refuted_by_integration { " (refuted_by_integration)" } else { "" };
                writeln!(out, "{}: {}{}", e.file, st, tag).unwrap();
            }
            (None, Some(err)) => writeln!(out, "{}: error: {}", e.file, err).unwrap(),
            _ => {}
        }
    }
    if let Some(path) = summary {
        fs::write(path, to_json(&s))?;
    }
    Ok(Outcome {
        stdout: out,
        code: if s.failures > 0 { EXIT_FAILURE } else { 0 },
        ..Default::default()
    })
}

fn cmd_preset(name: Option<&str>, out_path: Option<&Path>) -> Result<Outcome> {
    let Some(name) = name else {
        return Ok(Outcome {
            stdout: presets::PRESET_NAMES.iter().map(|n| format!("{n}\n")).collect(),
            ..Default::default()
        });
    };
    let spec = presets::preset(name).ok_or_else(|| Error::Parse(format!("unknown preset '{name}'")))?;
    let text = spec.to_json() + "\n";
    match out_path {
        Some(p) => {
            fs::write(p, &text)?;
            Ok(Outcome::default())
        }
        None => Ok(Outcome {
            stdout: text,
            ..Default::default()
        }),
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Classify { spec } => cmd_classify(&ProblemSpec::resolve(spec)?),
        Command::Analyze {
            spec,
            json,
            no_integrate,
        } => cmd_analyze(cli, &ProblemSpec::resolve(spec)?, json.as_deref(), !no_integrate),
        Command::Integrate {
            spec,
            x0,
            t_max,
            out,
            backward,
            field,
        } => cmd_integrate(
            cli,
            &ProblemSpec::resolve(spec)?,
            x0,
            *t_max,
            out.as_deref(),
            *backward,
            field.field,
        ),
        Command::FirstIntegrals { spec, field } => {
            cmd_first_integrals(cli, &ProblemSpec::resolve(spec)?, field.field)
        }
        Command::Idempotents { spec, field } => cmd_idempotents(&ProblemSpec::resolve(spec)?, field.field),
        Command::Batch {
            dir,
            parallel,
            summary,
            no_integrate,
        } => cmd_batch(cli, dir, *parallel, summary.as_deref(), !no_integrate),
        Command::Preset { name, out } => cmd_preset(name.as_deref(), out.as_deref()),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_with<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    stdout: text,
                    ..Default::default()
                }
            } else {
                Outcome {
                    stderr: text,
                    code,
                    ..Default::default()
                }
            };
        }
    };
    match execute(&cli) {
        Ok(o) => o,
        Err(e) => Outcome {
            stderr: format!("error: {e}\n"),
            code: exit_code_for_error(&e),
            ..Default::default()
        },
    }
}

pub fn run() -> i32 {
    let o = run_with(std::env::args_os());
    print!("{}", o.stdout);
    eprint!("{}", o.stderr);
    o.code
}
