//! JSON problem specifications.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::presets;
use crate::error::{Error, Result};
use crate::flows::FieldKind;
use crate::forms::{QuadraticForm3, Space};
use crate::lie3::{standard_algebra, BracketEntry, LieAlgebra3, StandardAlgebra};
use crate::linalg::Mat3;
use crate::odeint::IntegratorOptions;

/// Asymmetry tolerated silently when loading a metric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// `[e_i, e_j] = Σ_k result[k] e_k`, one-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketSpec {
    pub i: usize,
    pub j: usize,
    pub result: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSpec {
    Named(String),
    Preset { preset: String },
    Table { brackets: Vec<BracketSpec> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MetricFrame {
    #[default]
    Algebra,
    DualEnergy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub matrix: [[f64; 3]; 3],
    #[serde(default)]
    pub frame: MetricFrame,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SpecOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_min: Option<f64>,
    /// Horizon for the corroborating integrations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Number of random unit starts for the corroborating integrations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    /// Extra initial condition, in the coordinates of the analysed field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub algebra: AlgebraSpec,
    pub metric: MetricSpec,
    #[serde(default)]
    pub options: SpecOptions,
}

pub fn standard_by_name(name: &str) -> Option<StandardAlgebra> {
    Some(match name {
        "abelian" => StandardAlgebra::Abelian,
        "heisenberg" => StandardAlgebra::Heisenberg,
        "su2" => StandardAlgebra::Su2,
        "e2" | "e2-standard" => StandardAlgebra::E2,
        "e11" | "e11-standard" => StandardAlgebra::E11,
        "sl2-orthonormal" => StandardAlgebra::Sl2Orthonormal,
        "sl2-hyperbolic" => StandardAlgebra::Sl2Hyperbolic,
        _ => return None,
    })
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// A file path, or a preset name when no such file exists.
    pub fn resolve(arg: &str) -> Result<Self> {
        let path = Path::new(arg);
        if path.exists() {
            return Self::load(path);
        }
        presets::preset(arg).ok_or_else(|| {
            Error::Parse(format!("'{arg}' is neither a readable file nor a preset"))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs serialize")
    }

    pub fn algebra(&self) -> Result<LieAlgebra3> {
        match &self.algebra {
            AlgebraSpec::Named(name) | AlgebraSpec::Preset { preset: name } => {
                let kind = standard_by_name(name)
                    .ok_or_else(|| Error::Parse(format!("unknown algebra preset '{name}'")))?;
                standard_algebra(kind)
            }
            AlgebraSpec::Table { brackets } => {
                let mut entries = Vec::with_capacity(brackets.len());
                for b in brackets {
                    if !(1..=3).contains(&b.i) || !(1..=3).contains(&b.j) {
                        return Err(Error::Parse(format!(
                            "bracket indices must be 1..3, got [{}, {}]",
                            b.i, b.j
                        )));
                    }
                    entries.push(BracketEntry {
                        i: b.i - 1,
                        j: b.j - 1,
                        result: b.result,
                    });
                }
                LieAlgebra3::from_brackets(&entries)
            }
        }
    }

    /// The metric, symmetrized; `warning` is set when the input deviated
    /// from symmetry by more than [`SYMMETRY_TOL`].
    pub fn metric_with_warning(&self) -> Result<(QuadraticForm3, Option<String>)> {
        let m = Mat3::from_fn(|i, j| self.metric.matrix[i][j]);
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("metric has non-finite entries".into()));
        }
        let asym = (m - m.transpose()).amax();
        let warning = (asym > SYMMETRY_TOL)
            .then(|| format!("metric asymmetric by {asym:e}; symmetrized"));
        let space = match self.metric.frame {
            MetricFrame::Algebra => Space::Algebra,
            MetricFrame::DualEnergy => Space::Dual,
        };
        Ok((QuadraticForm3::new(m, space), warning))
    }

    pub fn metric(&self) -> Result<QuadraticForm3> {
        self.metric_with_warning().map(|(q, _)| q)
    }

    /// Integrator settings: spec options over `base`.
    pub fn integrator_options(&self, base: &IntegratorOptions) -> IntegratorOptions {
        let o = &self.options;
        IntegratorOptions {
            rtol: o.rtol.unwrap_or(base.rtol),
            atol: o.atol.unwrap_or(base.atol),
            norm_cap: o.norm_cap.unwrap_or(base.norm_cap),
            h_min: o.h_min.unwrap_or(base.h_min),
            max_steps: base.max_steps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bracket_table() {
        let text = r#"{
            "name": "heis",
            "algebra": {"brackets": [{"i": 1, "j": 2, "result": [0, 0, 1]}]},
            "metric": {"matrix": [[1,0,0],[0,1,0],[0,0,1]], "frame": "algebra"}
        }"#;
        let spec = ProblemSpec::from_json(text).unwrap();
        let alg = spec.algebra().unwrap();
        assert_eq!(alg.constant(2, 0, 1), 1.0);
        assert_eq!(alg.constant(2, 1, 0), -1.0);
    }

    #[test]
    fn parses_named_algebra_and_dual_frame() {
        let text = r#"{"name": "x", "algebra": "su2",
            "metric": {"matrix": [[1,0,0],[0,2,0],[0,0,3]], "frame": "dual-energy"}}"#;
        let spec = ProblemSpec::from_json(text).unwrap();
        assert!(spec.algebra().is_ok());
        assert_eq!(spec.metric().unwrap().space(), Space::Dual);
    }

    #[test]
    fn asymmetric_metric_warns() {
        let text = r#"{"name": "x", "algebra": "su2",
            "metric": {"matrix": [[1,0.1,0],[0,2,0],[0,0,3]]}}"#;
        let spec = ProblemSpec::from_json(text).unwrap();
        let (q, w) = spec.metric_with_warning().unwrap();
        assert!(w.is_some());
        assert_eq!(q.matrix()[(0, 1)], 0.05);
    }

    #[test]
    fn rejects_bad_indices_and_json() {
        let text = r#"{"name": "x", "algebra": {"brackets": [{"i": 0, "j": 2, "result": [0,0,1]}]},
            "metric": {"matrix": [[1,0,0],[0,1,0],[0,0,1]]}}"#;
        assert!(matches!(ProblemSpec::from_json(text).unwrap().algebra(), Err(Error::Parse(_))));
        assert!(matches!(ProblemSpec::from_json("{"), Err(Error::Parse(_))));
    }
}
