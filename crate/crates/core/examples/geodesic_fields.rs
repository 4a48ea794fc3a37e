//! Builds the three quadratic geodesic fields for a metric on sl2 and checks
//! that each conserves its energy.

use geocomplete::flows::{geodesic_field, FieldKind};
use geocomplete::forms::QuadraticForm3;
use geocomplete::lie3::{standard_algebra, StandardAlgebra};
use geocomplete::linalg::Vec3;

fn main() -> geocomplete::Result<()> {
    let alg = standard_algebra(StandardAlgebra::Sl2Orthonormal)?;
    let metric = QuadraticForm3::algebra(geocomplete::linalg::Mat3::from_diagonal(&Vec3::new(0.5, 1.0 / 3.0, -1.0)));
    let x = Vec3::new(0.3, -1.2, 0.7);
    for kind in [FieldKind::EulerAlgebra, FieldKind::EulerDual, FieldKind::Lax] {
        let g = geodesic_field(&alg, &metric, kind)?;
        let fx = g.field.evaluate(&x);
        let d_energy = 2.0 * x.dot(&(g.energy.matrix() * fx));
        println!("{} field:\n{}", kind.name(), g.field);
        println!("  energy {}  dE/dt at x = {:.1e}\n", g.energy, d_energy);
    }
    Ok(())
}
