//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::Instant;

use geocomplete::cli::presets::preset;
use geocomplete::cli::{run_with, ProblemSpec};
use geocomplete::completeness::{
    decide, e11_criterion, sl2_criterion, Certificate, SlCase, Status,
};
use geocomplete::flows::{geodesic_field, FieldKind};
use geocomplete::forms::{u_from_metric, QuadraticForm3};
use geocomplete::lie3::{standard_algebra, LieAlgebra3, StandardAlgebra};
use geocomplete::linalg::{Mat3, Vec3};
use geocomplete::odeint::{
    integrate, integrate_monitored, verify_against_closed_form, IntegratorOptions, TrajectoryStatus,
};
use geocomplete::quadfield::{
    definite_combination, find_idempotents, invariant_direction_set, planar_completeness,
    quadratic_first_integrals, DirectionKind, DirectionOptions, PlanarCase, PlanarVerdict,
    QuadraticField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn terms(t: &[(usize, usize, usize, f64)]) -> QuadraticField {
    QuadraticField::from_terms(3, t).unwrap()
}

fn preset_field(name: &str) -> Result<(LieAlgebra3, QuadraticForm3, QuadraticField, FieldKind), String> {
    let spec = preset(name).ok_or("missing preset")?;
    let alg = spec.algebra().map_err(|e| e.to_string())?;
    let metric = spec.metric().map_err(|e| e.to_string())?;
    let v = decide(&alg, &metric).map_err(|e| e.to_string())?;
    Ok((alg, metric, v.field, v.field_kind))
}

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_metric(rng: &mut ChaCha8Rng) -> Option<QuadraticForm3> {
    let mut m = Mat3::zeros();
    for i in 0..3 {
        for j in i..3 {
            let v = rng.gen_range(-2.0..2.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let q = QuadraticForm3::algebra(m);
    let s = q.signature();
    let cond = geocomplete::linalg::condition_number(&m);
    (s.zero == 0 && cond < 1e6).then_some(q)
}

fn criterion1() -> Check {
    let start = Instant::now();
    let expected = [
        ("example1", FieldKind::EulerDual, terms(&[(0, 0, 1, 1.0), (1, 2, 2, 1.0), (2, 1, 2, -1.0)])),
        (
            "example2",
            FieldKind::Lax,
            terms(&[(0, 2, 2, 4.0), (1, 0, 1, 1.0), (1, 0, 2, -4.0), (2, 0, 2, -1.0)]),
        ),
        ("example3", FieldKind::Lax, terms(&[(0, 1, 2, -2.0), (1, 0, 2, 1.0), (2, 0, 1, -1.0)])),
        ("example4", FieldKind::Lax, terms(&[(0, 1, 2, 0.5), (1, 0, 2, 1.5), (2, 0, 1, 2.0)])),
        ("example5", FieldKind::EulerDual, terms(&[(0, 1, 2, 1.0), (1, 0, 1, 1.0), (2, 0, 2, 3.0)])),
    ];
    let mut worst = 0.0_f64;
    for (name, kind, target) in &expected {
        let spec = preset(name).unwrap();
        let alg = spec.algebra().map_err(|e| e.to_string())?;
        let metric = spec.metric().map_err(|e| e.to_string())?;
        let g = geodesic_field(&alg, &metric, *kind).map_err(|e| e.to_string())?;
        let d = g.field.distance(target);
        ensure(d <= 1e-12, format!("{name}: deviation {d:e}, got {}", g.field))?;
        worst = worst.max(d);
    }
    let el = start.elapsed().as_secs_f64();
    ensure(el < 1.0, format!("runtime {el:.3}s"))?;
    Ok(format!("max deviation {worst:e}, {el:.3}s"))
}

fn criterion2() -> Check {
    let (_, _, field, _) = preset_field("example4")?;
    let s3 = 3.0_f64.sqrt();
    let target = Vec3::new(1.0 / s3, 1.0, 2.0 / s3);
    let ids = find_idempotents(&field).map_err(|e| e.to_string())?;
    let best = ids
        .iter()
        .map(|x| {
            let c = (x.abs().normalize().dot(&target.normalize())).clamp(-1.0, 1.0);
            (c.acos(), *x)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or("no idempotents found")?;
    ensure(best.0 <= 1e-9, format!("angular distance {:e}", best.0))?;
    let spec = preset("example4").unwrap();
    let v = decide(&spec.algebra().unwrap(), &spec.metric().unwrap()).map_err(|e| e.to_string())?;
    ensure(v.status == Status::Incomplete, format!("decide returned {}", v.status))?;
    let tr = integrate(&field, &best.1, 10.0, &IntegratorOptions::default()).map_err(|e| e.to_string())?;
    let t_star = match tr.status {
        TrajectoryStatus::BlowUp { t_star, .. } => t_star,
        ref s => return Err(format!("integration ended with {s:?}")),
    };
    ensure((t_star - 1.0).abs() <= 1e-3, format!("t* = {t_star}"))?;
    Ok(format!("{} idempotents, angular distance {:.1e}, t* = {t_star:.6}", ids.len(), best.0))
}

fn criterion3() -> Check {
    let (alg, metric, field, _) = preset_field("example5")?;
    let set = invariant_direction_set(&field, &DirectionOptions::default()).map_err(|e| e.to_string())?;
    ensure(
        set.directions.iter().all(|d| d.kind != DirectionKind::IdempotentRay),
        "an idempotent ray was returned",
    )?;
    let x0 = Vec3::new(FRAC_1_SQRT_2, 1.0, 1.0);
    let tr = integrate(&field, &x0, 10.0, &IntegratorOptions::default()).map_err(|e| e.to_string())?;
    let t_star = match tr.status {
        TrajectoryStatus::BlowUp { t_star, .. } => t_star,
        ref s => return Err(format!("integration ended with {s:?}")),
    };
    ensure((t_star - 0.70711).abs() <= 1e-3, format!("t* = {t_star}"))?;
    let head = integrate(&field, &x0, 0.6, &IntegratorOptions::default()).map_err(|e| e.to_string())?;
    let exact = |t: f64| {
        let s = 1.0 - 2.0_f64.sqrt() * t;
        Vec3::new(FRAC_1_SQRT_2 / s, s.powf(-0.5), s.powf(-1.5))
    };
    let rel = verify_against_closed_form(&head, exact);
    ensure(rel <= 1e-6, format!("closed-form relative error {rel:e}"))?;
    let v = decide(&alg, &metric).map_err(|e| e.to_string())?;
    ensure(
        v.status == Status::Undecided && matches!(v.certificate, Certificate::NecessaryOnly { .. }),
        format!("decide returned {} / {}", v.status, v.certificate.name()),
    )?;
    Ok(format!("{} directions, no idempotent ray, t* = {t_star:.6}, closed-form error {rel:.1e}", set.directions.len()))
}

fn criterion4() -> Check {
    let (alg, metric, field, _) = preset_field("example3")?;
    let basis = quadratic_first_integrals(&field);
    ensure(basis.len() == 2, format!("span dimension {}", basis.len()))?;
    let q1 = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
    let q2 = Mat3::from_diagonal(&Vec3::new(0.0, 1.0, 1.0));
    let r1 = basis.membership_residual(&q1);
    let r2 = basis.membership_residual(&q2);
    ensure(r1 <= 1e-10 && r2 <= 1e-10, format!("membership residuals {r1:e}, {r2:e}"))?;
    let w = definite_combination(&basis).ok_or("no definite combination")?;
    ensure(QuadraticForm3::algebra(w.form).is_positive_definite(), "witness not positive definite")?;
    let v = decide(&alg, &metric).map_err(|e| e.to_string())?;
    ensure(v.status == Status::Complete, format!("decide returned {}", v.status))?;
    let crit = match &v.certificate {
        Certificate::SlCriterion { case: SlCase::II, data, .. } => data.criterion.unwrap_or(f64::NAN),
        other => return Err(format!("certificate {other:?}")),
    };
    ensure((crit - 2.0).abs() <= 1e-12, format!("criterion value {crit}"))?;
    let energy = *geodesic_field(&alg, &metric, FieldKind::Lax).unwrap().energy.matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    let mut max_norm = 0.0_f64;
    for _ in 0..20 {
        let x0 = unit(&mut rng);
        let tr = integrate_monitored(&field, &x0, 1000.0, &IntegratorOptions::default(), &[energy, q1, q2], false)
            .map_err(|e| e.to_string())?;
        ensure(
            matches!(tr.status, TrajectoryStatus::ReachedHorizon { .. }),
            format!("run from {x0:?} ended with {:?}", tr.status),
        )?;
        worst = worst.max(tr.drift.iter().cloned().fold(0.0, f64::max));
        max_norm = max_norm.max(tr.max_norm());
    }
    ensure(worst <= 1e-8, format!("energy drift {worst:e}"))?;
    ensure(max_norm <= 10.0, format!("orbit norm reached {max_norm}"))?;
    Ok(format!("criterion value {crit}, max drift {worst:.2e}, max norm {max_norm:.3}"))
}

fn criterion5() -> Check {
    let spec = preset("example2").unwrap();
    let v = decide(&spec.algebra().unwrap(), &spec.metric().unwrap()).map_err(|e| e.to_string())?;
    ensure(
        v.status == Status::Complete && v.sl_case() == Some(SlCase::III),
        format!("example2: {} {:?}", v.status, v.sl_case()),
    )?;
    let ids = find_idempotents(&v.field).map_err(|e| e.to_string())?;
    ensure(ids.is_empty(), format!("example2: {} idempotents", ids.len()))?;
    let spec = preset("example1").unwrap();
    let v = decide(&spec.algebra().unwrap(), &spec.metric().unwrap()).map_err(|e| e.to_string())?;
    ensure(v.status == Status::Complete, format!("example1: {}", v.status))?;
    let planar = v.field.planar_part([1, 2]);
    let disc = match planar_completeness(&planar).map_err(|e| e.to_string())? {
        PlanarVerdict::Complete(PlanarCase::CommonFactor { discriminant, .. }) => discriminant,
        other => return Err(format!("planar verdict {other:?}")),
    };
    ensure((disc + 4.0).abs() <= 1e-12, format!("discriminant {disc}"))?;
    Ok(format!("example2 case iii with no idempotents; example1 planar case ii, discriminant {disc}"))
}

fn criterion6() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = IntegratorOptions::default();
    let mut summary = Vec::new();
    for kind in [StandardAlgebra::E11, StandardAlgebra::Sl2Orthonormal] {
        let alg = standard_algebra(kind).unwrap();
        let (mut accepted, mut rejected, mut complete, mut incomplete) = (0, 0, 0, 0);
        while accepted < 200 {
            let Some(metric) = random_metric(&mut rng) else {
                rejected += 1;
                continue;
            };
            let verdict = match kind {
                StandardAlgebra::E11 => e11_criterion(&alg, &metric),
                _ => u_from_metric(&alg, &metric).and_then(|u| sl2_criterion(&alg, &u)),
            };
            let v = match verdict {
                Ok(v) if v.status != Status::Undecided => v,
                _ => {
                    rejected += 1;
                    continue;
                }
            };
            accepted += 1;
            let ids = find_idempotents(&v.field).map_err(|e| e.to_string())?;
            let search_complete = ids.is_empty();
            ensure(
                search_complete == (v.status == Status::Complete),
                format!("{kind:?}: criterion {} but search found {} idempotents for {}", v.status, ids.len(), metric.matrix()),
            )?;
            if v.status == Status::Incomplete {
                incomplete += 1;
                let w = v.witness().ok_or("incomplete verdict without witness")?;
                let tr = integrate(&v.field, &w, 10.0, &opts).map_err(|e| e.to_string())?;
                match tr.status {
                    TrajectoryStatus::BlowUp { t_star, .. } if (t_star - 1.0).abs() <= 0.1 => {}
                    ref s => return Err(format!("{kind:?}: witness run ended with {s:?}")),
                }
            } else {
                complete += 1;
                for _ in 0..10 {
                    let x0 = unit(&mut rng);
                    let tr = integrate(&v.field, &x0, 100.0, &opts).map_err(|e| e.to_string())?;
                    ensure(
                        !tr.is_blowup(),
                        format!("{kind:?}: complete metric {} blew up from {x0:?}", metric.matrix()),
                    )?;
                }
            }
        }
        summary.push(format!("{kind:?}: {complete} complete / {incomplete} incomplete ({rejected} rejected)"));
    }
    let el = start.elapsed().as_secs_f64();
    ensure(el < 60.0, format!("runtime {el:.1}s"))?;
    Ok(format!("100% agreement; {}; {el:.1}s", summary.join("; ")))
}

fn criterion7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut idempotents = 0;
    let mut with_integrals = 0;
    for dim in [3usize, 2] {
        for _ in 0..500 {
            let mut t = Vec::new();
            for i in 0..dim {
                for j in 0..dim {
                    for k in j..dim {
                        t.push((i, j, k, rng.gen_range(-1.0..1.0)));
                    }
                }
            }
            let f = QuadraticField::from_terms(dim, &t).unwrap();
            let set = invariant_direction_set(&f, &DirectionOptions::default()).map_err(|e| e.to_string())?;
            ensure(!set.directions.is_empty(), format!("empty direction set for {f}"))?;
            let basis = quadratic_first_integrals(&f);
            if !basis.is_empty() {
                with_integrals += 1;
            }
            for x in set.idempotents() {
                idempotents += 1;
                let r = (f.evaluate(&x) - x).norm();
                ensure(r <= 1e-8 * x.norm_squared().max(1.0), format!("idempotent residual {r:e}"))?;
                for q in &basis.basis {
                    let v = x.dot(&(q * x)).abs();
                    ensure(
                        v <= 1e-8 * (1.0 + x.norm_squared()),
                        format!("|Q(X*)| = {v:e} for {f}"),
                    )?;
                }
            }
        }
    }
    Ok(format!("1000 fields with nonempty direction sets, {idempotents} idempotents checked, {with_integrals} fields with first integrals"))
}

fn criterion8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = IntegratorOptions::default();
    let mut runs = 0;
    for kind in [
        StandardAlgebra::Abelian,
        StandardAlgebra::Heisenberg,
        StandardAlgebra::Su2,
        StandardAlgebra::E2,
    ] {
        let alg = standard_algebra(kind).unwrap();
        let mut accepted = 0;
        while accepted < 50 {
            let Some(metric) = random_metric(&mut rng) else { continue };
            accepted += 1;
            let v = decide(&alg, &metric).map_err(|e| e.to_string())?;
            ensure(v.status == Status::Complete, format!("{kind:?}: {} for {}", v.status, metric.matrix()))?;
            for _ in 0..5 {
                let x0 = unit(&mut rng);
                let tr = integrate(&v.field, &x0, 100.0, &opts).map_err(|e| e.to_string())?;
                runs += 1;
                ensure(
                    !tr.is_blowup(),
                    format!("{kind:?}: blow-up from {x0:?} for {}", metric.matrix()),
                )?;
            }
        }
    }
    Ok(format!("200 metrics complete, {runs} runs without blow-up"))
}

fn criterion9() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run_with(["geocomplete", "--seed", "42", "analyze", "example3", "--json", p.to_str().unwrap()]);
        ensure(o.code == 0, format!("analyze exited {} ({})", o.code, o.stderr))?;
    }
    let ba = std::fs::read(&a).map_err(|e| e.to_string())?;
    let bb = std::fs::read(&b).map_err(|e| e.to_string())?;
    ensure(!ba.is_empty() && ba == bb, "reports differ")?;
    let parsed: serde_json::Value = serde_json::from_slice(&ba).map_err(|e| e.to_string())?;
    ensure(parsed["verdict"]["status"] == "Complete", "report status")?;
    let _ = ProblemSpec::resolve("example3").map_err(|e| e.to_string())?;
    Ok(format!("{} identical bytes", ba.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("field regression for the five examples", criterion1),
        ("example4 idempotent, verdict and blow-up", criterion2),
        ("example5 blow-up without idempotents", criterion3),
        ("example3 first integrals, verdict and bounded orbits", criterion4),
        ("example2 and example1 verdicts", criterion5),
        ("closed-form criteria against idempotent search", criterion6),
        ("invariant directions and idempotent/first-integral orthogonality", criterion7),
        ("structurally complete algebras", criterion8),
        ("deterministic analysis report", criterion9),
    ];
    let mut failed = 0;
    for (k, (title, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let el = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {title} ({detail}) [{el:.2}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {title}: {why} [{el:.2}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
