//! Classifies a few bracket tables, including one in a scrambled basis.

use geocomplete::lie3::{classify, milnor_normal_form, standard_algebra, BracketEntry, LieAlgebra3, StandardAlgebra};
use geocomplete::linalg::Mat3;

fn main() -> geocomplete::Result<()> {
    let kinds = [
        StandardAlgebra::Heisenberg,
        StandardAlgebra::Su2,
        StandardAlgebra::E2,
        StandardAlgebra::Sl2Hyperbolic,
        StandardAlgebra::NonUnimodular { alpha: 0.5, beta: 0.0, gamma: 0.0, delta: 1.5 },
    ];
    for kind in kinds {
        let alg = standard_algebra(kind)?;
        println!("{:?}: {}", kind, classify(&alg));
    }

    let p = Mat3::new(1.0, 2.0, 0.0, 0.0, 1.0, -1.0, 3.0, 0.0, 1.0);
    let scrambled = standard_algebra(StandardAlgebra::Sl2Orthonormal)?.change_basis(&p)?;
    let milnor = milnor_normal_form(&scrambled)?;
    println!("scrambled sl2: {} (Milnor diagonal {:.4?})", classify(&scrambled), milnor.alphas);

    let table = LieAlgebra3::from_brackets(&[
        BracketEntry { i: 0, j: 1, result: [0.0, 1.0, 0.0] },
        BracketEntry { i: 0, j: 2, result: [0.0, 0.0, -1.0] },
    ])?;
    println!("hand-written table:\n{table}\n-> {}", classify(&table));
    Ok(())
}
