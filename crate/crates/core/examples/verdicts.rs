//! Completeness verdicts with their certificates for every preset.

use geocomplete::cli::presets::{preset, PRESET_NAMES};
use geocomplete::completeness::decide;

fn main() -> geocomplete::Result<()> {
    for name in PRESET_NAMES {
        let spec = preset(name).expect("preset");
        let verdict = decide(&spec.algebra()?, &spec.metric()?)?;
        println!("{name:<16} {:<10} {} via {}", verdict.status.to_string(), verdict.algebra, verdict.certificate.name());
        if let Some(w) = verdict.witness() {
            println!("{:<16} witness {:+.6?}", "", w.as_slice());
        }
    }
    Ok(())
}
