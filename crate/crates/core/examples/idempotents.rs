//! Invariant directions and idempotents of a Lax field.

use geocomplete::cli::presets::preset;
use geocomplete::flows::{geodesic_field, FieldKind};
use geocomplete::quadfield::invariant_directions;

fn main() -> geocomplete::Result<()> {
    let spec = preset("example4").expect("preset");
    let g = geodesic_field(&spec.algebra()?, &spec.metric()?, FieldKind::Lax)?;
    for d in invariant_directions(&g.field)? {
        match d.strict_idempotent() {
            Some(x) => println!("idempotent  {:+.6} {:+.6} {:+.6}", x[0], x[1], x[2]),
            None => println!("{:?} direction {:+.6?}", d.kind, d.vector().as_slice()),
        }
    }
    Ok(())
}
