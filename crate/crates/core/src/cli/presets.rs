//! Built-in problem specifications.

use super::spec::{AlgebraSpec, BracketSpec, MetricFrame, MetricSpec, ProblemSpec, SpecOptions};

pub const PRESET_NAMES: [&str; 12] = [
    "example1",
    "example2",
    "example3",
    "example4",
    "example5",
    "e2-standard",
    "e11-standard",
    "heisenberg",
    "abelian",
    "su2",
    "sl2-orthonormal",
    "sl2-hyperbolic",
];

const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn named(name: &str, algebra: &str, matrix: [[f64; 3]; 3]) -> ProblemSpec {
    ProblemSpec {
        name: name.to_string(),
        algebra: AlgebraSpec::Named(algebra.to_string()),
        metric: MetricSpec {
            matrix,
            frame: MetricFrame::Algebra,
        },
        options: SpecOptions::default(),
    }
}

pub fn preset(name: &str) -> Option<ProblemSpec> {
    Some(match name {
        "example1" => named(
            name,
            "e2",
            [[-1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
        ),
        "example2" => named(
            name,
            "sl2-hyperbolic",
            [[1.0, 0.0, 0.0], [0.0, 0.0, 0.5], [0.0, 0.5, 1.0]],
        ),
        "example3" => named(
            name,
            "sl2-orthonormal",
            [[0.5, 0.0, 0.0], [0.0, 1.0 / 3.0, 0.0], [0.0, 0.0, -1.0]],
        ),
        "example4" => named(
            name,
            "sl2-orthonormal",
            [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]],
        ),
        "example5" => ProblemSpec {
            name: name.to_string(),
            algebra: AlgebraSpec::Table {
                brackets: vec![
                    BracketSpec {
                        i: 1,
                        j: 2,
                        result: [0.0, 0.5, 0.0],
                    },
                    BracketSpec {
                        i: 1,
                        j: 3,
                        result: [0.0, 0.0, 1.5],
                    },
                ],
            },
            metric: MetricSpec {
                matrix: [[2.0, 0.0, 0.0], [0.0, 0.0, -0.5], [0.0, -0.5, 0.0]],
                frame: MetricFrame::DualEnergy,
            },
            options: SpecOptions {
                probe: Some([std::f64::consts::FRAC_1_SQRT_2, 1.0, 1.0]),
                ..Default::default()
            },
        },
        "e2-standard" => named(name, "e2", IDENTITY),
        "e11-standard" => named(name, "e11", IDENTITY),
        "heisenberg" | "abelian" | "su2" | "sl2-orthonormal" | "sl2-hyperbolic" => {
            named(name, name, IDENTITY)
        }
        _ => return None,
    })
}
