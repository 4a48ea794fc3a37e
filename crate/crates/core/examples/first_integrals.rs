//! Quadratic first integrals and a positive definite combination of them.

use geocomplete::cli::presets::preset;
use geocomplete::flows::{geodesic_field, FieldKind};
use geocomplete::quadfield::{definite_combination, quadratic_first_integrals};

fn main() -> geocomplete::Result<()> {
    let spec = preset("example3").expect("preset");
    let g = geodesic_field(&spec.algebra()?, &spec.metric()?, FieldKind::Lax)?;
    let basis = quadratic_first_integrals(&g.field);
    println!("{} quadratic first integrals, max residual {:.1e}", basis.len(), basis.max_residual(&g.field));
    match definite_combination(&basis) {
        Some(w) => println!("definite combination {:?}:{}", w.coefficients, w.form),
        None => println!("no definite combination"),
    }
    Ok(())
}
