//! Integrates from an idempotent witness and estimates the blow-up time.

use geocomplete::cli::presets::preset;
use geocomplete::completeness::decide;
use geocomplete::odeint::{estimate_blowup_time, integrate, IntegratorOptions};

fn main() -> geocomplete::Result<()> {
    let spec = preset("example4").expect("preset");
    let verdict = decide(&spec.algebra()?, &spec.metric()?)?;
    let w = verdict.witness().expect("example4 is incomplete");
    let traj = integrate(&verdict.field, &w, 10.0, &IntegratorOptions::default())?;
    println!("witness {:+.6?}", w.as_slice());
    println!("status {:?} after {} steps", traj.status, traj.times.len());
    let est = estimate_blowup_time(&traj)?;
    println!("fitted t* = {:.8} (residual {:.1e}, exact 1)", est.t_star, est.residual);
    Ok(())
}
