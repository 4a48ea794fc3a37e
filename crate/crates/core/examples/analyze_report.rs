//! Runs the full analysis behind `geocomplete analyze` and prints the JSON report.
//! Takes a preset name or a spec file path.

use geocomplete::cli::spec::ProblemSpec;
use geocomplete::cli::{analyze, to_json, AnalysisSettings};

fn main() -> geocomplete::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "example5".into());
    let report = analyze(&ProblemSpec::resolve(&name)?, &AnalysisSettings::default())?;
    println!("{}", to_json(&report));
    Ok(())
}
