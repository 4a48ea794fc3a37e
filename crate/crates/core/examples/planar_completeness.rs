//! Completeness of planar quadratic fields.

use geocomplete::quadfield::{planar_completeness, PlanarVerdict, QuadraticField};

fn main() -> geocomplete::Result<()> {
    let fields = [
        ("x' = xy, y' = -x²", QuadraticField::from_terms(2, &[(0, 0, 1, 0.5), (0, 1, 0, 0.5), (1, 0, 0, -1.0)])?),
        ("x' = x², y' = 0", QuadraticField::from_terms(2, &[(0, 0, 0, 1.0)])?),
        ("x' = y², y' = 0", QuadraticField::from_terms(2, &[(0, 1, 1, 1.0)])?),
        ("x' = x² + y², y' = xy", QuadraticField::from_terms(2, &[(0, 0, 0, 1.0), (0, 1, 1, 1.0), (1, 0, 1, 0.5), (1, 1, 0, 0.5)])?),
    ];
    for (label, f) in fields {
        match planar_completeness(&f)? {
            PlanarVerdict::Complete(case) => println!("{label}: complete (case {})", case.label()),
            PlanarVerdict::Incomplete { witness } => println!("{label}: incomplete, witness {witness:?}"),
        }
    }
    Ok(())
}
