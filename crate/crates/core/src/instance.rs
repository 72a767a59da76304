//! JSON instance files: objective, constraint, `eps`, `seed`, and an optional
//! known optimum. See `docs/formats.md` for the schema.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::matrix::SparseMatrix;
use crate::objective::{
    Coverage, DirectedCut, Linear, Objective, Sampled, SetFunction, WeightedArc, DEFAULT_SAMPLES,
};
use crate::polymatroid::PolymatroidInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageItem {
    pub weight: f64,
    pub covered_by: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSpec {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// A closed-form objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseObjectiveSpec {
    Coverage { n: usize, items: Vec<CoverageItem> },
    DirectedCut { n: usize, arcs: Vec<ArcSpec> },
    Linear { weights: Vec<f64> },
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObjectiveSpec {
    Closed(BaseObjectiveSpec),
    Sampled(SampledSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledSpec {
    /// Always `"sampled"`.
    pub kind: SampledTag,
    pub base: BaseObjectiveSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Defaults to the instance-level `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Defaults to the base objective's monotonicity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampledTag {
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminarSet {
    pub members: Vec<usize>,
    pub cap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolymatroidSpec {
    Uniform {
        n: usize,
        k: f64,
    },
    Partition {
        n: usize,
        parts: Vec<Vec<usize>>,
        caps: Vec<f64>,
    },
    Laminar {
        n: usize,
        sets: Vec<LaminarSet>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackingSpec {
    pub m: usize,
    pub n: usize,
    /// `(row, col, value)` triplets, sorted by `(row, col)`.
    pub entries: Vec<(usize, usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConstraintSpec {
    Packing(PackingSpec),
    Polymatroid(PolymatroidSpec),
}

fn default_eps() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub objective: ObjectiveSpec,
    pub constraint: ConstraintSpec,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_opt: Option<f64>,
}

/// Parse or validation failure, anchored to a field path and, for syntax
/// errors, to a line and column.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, "line {l}, column {c}: ")?;
        }
        if !self.path.is_empty() && self.path != "." {
            write!(f, "at `{}`: ", self.path)?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ParseError {}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError {
        path: path.into(),
        line: None,
        column: None,
        message: message.into(),
    }
}

/// The constraint model an instance describes.
#[derive(Clone, Debug)]
pub enum ConstraintModel {
    Packing(SparseMatrix),
    Polymatroid(PolymatroidInstance),
}

impl BaseObjectiveSpec {
    fn dim(&self) -> usize {
        match self {
            BaseObjectiveSpec::Coverage { n, .. } | BaseObjectiveSpec::DirectedCut { n, .. } => *n,
            BaseObjectiveSpec::Linear { weights } => weights.len(),
        }
    }

    fn build(&self, path: &str) -> Result<Objective, ParseError> {
        let wrap = |field: &str, e: Error| -> ParseError {
            let at = match e {
                Error::NegativeEntry { index, .. } | Error::NonFinite { index } => {
                    format!("{path}.{field}[{index}]")
                }
                _ => format!("{path}.{field}"),
            };
            invalid(at, e.to_string())
        };
        Ok(match self {
            BaseObjectiveSpec::Coverage { n, items } => Coverage::new(
                *n,
                items
                    .iter()
                    .map(|it| (it.weight, it.covered_by.clone()))
                    .collect(),
            )
            .map_err(|e| wrap("items", e))?
            .into(),
            BaseObjectiveSpec::DirectedCut { n, arcs } => DirectedCut::new(
                *n,
                arcs.iter()
                    .map(|a| WeightedArc {
                        from: a.from,
                        to: a.to,
                        weight: a.weight,
                    })
                    .collect(),
            )
            .map_err(|e| wrap("arcs", e))?
            .into(),
            BaseObjectiveSpec::Linear { weights } => Linear::new(weights.clone())
                .map_err(|e| wrap("weights", e))?
                .into(),
        })
    }
}

impl ObjectiveSpec {
    pub fn dim(&self) -> usize {
        match self {
            ObjectiveSpec::Closed(b) => b.dim(),
            ObjectiveSpec::Sampled(s) => s.base.dim(),
        }
    }

    /// `seed` is used by sampled objectives that do not carry their own.
    pub fn build(&self, seed: u64) -> Result<Objective, ParseError> {
        match self {
            ObjectiveSpec::Closed(b) => b.build("objective"),
            ObjectiveSpec::Sampled(s) => {
                let base = s.base.build("objective.base")?;
                let monotone = s.monotone.unwrap_or(base.is_monotone());
                let f: Arc<dyn SetFunction> = match base {
                    Objective::Coverage(c) => Arc::new(c),
                    Objective::DirectedCut(c) => Arc::new(c),
                    Objective::Linear(c) => Arc::new(c),
                    Objective::Sampled(_) => {
                        return Err(invalid("objective.base", "sampled objectives cannot nest"))
                    }
                };
                Ok(Sampled::new(f, s.samples, s.seed.unwrap_or(seed), monotone)
                    .map_err(|e| invalid("objective.samples", e.to_string()))?
                    .into())
            }
        }
    }
}

impl ConstraintSpec {
    pub fn dim(&self) -> usize {
        match self {
            ConstraintSpec::Packing(p) => p.n,
            ConstraintSpec::Polymatroid(
                PolymatroidSpec::Uniform { n, .. }
                | PolymatroidSpec::Partition { n, .. }
                | PolymatroidSpec::Laminar { n, .. },
            ) => *n,
        }
    }

    pub fn build(&self) -> Result<ConstraintModel, ParseError> {
        match self {
            ConstraintSpec::Packing(p) => {
                for (k, w) in p.entries.windows(2).enumerate() {
                    let (a, b) = ((w[0].0, w[0].1), (w[1].0, w[1].1));
                    if a == b {
                        return Err(invalid(
                            format!("constraint.packing.entries[{}]", k + 1),
                            format!("duplicate triplet at ({}, {})", a.0, a.1),
                        ));
                    }
                    if a > b {
                        return Err(invalid(
                            format!("constraint.packing.entries[{}]", k + 1),
                            "triplets must be sorted by (row, col)",
                        ));
                    }
                }
                SparseMatrix::from_triplets(p.m, p.n, p.entries.clone())
                    .map(ConstraintModel::Packing)
                    .map_err(|e| {
                        let at = match e {
                            Error::NegativeEntry { index, .. } | Error::NonFinite { index } => {
                                format!("constraint.packing.entries[{index}]")
                            }
                            _ => "constraint.packing.entries".to_string(),
                        };
                        invalid(at, e.to_string())
                    })
            }
            ConstraintSpec::Polymatroid(spec) => {
                let built = match spec {
                    PolymatroidSpec::Uniform { n, k } => PolymatroidInstance::uniform(*n, *k),
                    PolymatroidSpec::Partition { n, parts, caps } => {
                        PolymatroidInstance::partition(*n, parts.clone(), caps.clone())
                    }
                    PolymatroidSpec::Laminar { n, sets } => PolymatroidInstance::laminar(
                        *n,
                        sets.iter().map(|s| (s.members.clone(), s.cap)).collect(),
                    ),
                };
                built.map(ConstraintModel::Polymatroid).map_err(|e| {
                    let at = match (&e, spec) {
                        (Error::NotLaminar { second, .. }, _) => {
                            format!("constraint.polymatroid.sets[{second}]")
                        }
                        (_, PolymatroidSpec::Uniform { .. }) => "constraint.polymatroid.k".into(),
                        (_, PolymatroidSpec::Partition { .. }) => {
                            "constraint.polymatroid.parts".into()
                        }
                        (_, PolymatroidSpec::Laminar { .. }) => {
                            "constraint.polymatroid.sets".into()
                        }
                    };
                    invalid(at, e.to_string())
                })
            }
        }
    }
}

impl InstanceFile {
    /// Checks every invariant the solvers rely on.
    pub fn validate(&self) -> Result<(), ParseError> {
        if !(self.eps > 0.0 && self.eps <= 0.05) {
            return Err(invalid(
                "eps",
                format!("{} is outside the supported range (0, 0.05]", self.eps),
            ));
        }
        if let Some(v) = self.known_opt {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(
                    "known_opt",
                    format!("{v} must be finite and non-negative"),
                ));
            }
        }
        let (a, b) = (self.objective.dim(), self.constraint.dim());
        if a != b {
            return Err(invalid(
                "constraint",
                format!("objective has {a} elements but the constraint has {b}"),
            ));
        }
        self.objective()?;
        self.constraint.build()?;
        Ok(())
    }

    pub fn objective(&self) -> Result<Objective, ParseError> {
        self.objective.build(self.seed)
    }

    pub fn constraint(&self) -> Result<ConstraintModel, ParseError> {
        self.constraint.build()
    }

    pub fn n(&self) -> usize {
        self.objective.dim()
    }
}

pub fn parse_instance(text: &[u8]) -> Result<InstanceFile, ParseError> {
    let text =
        std::str::from_utf8(text).map_err(|e| invalid("", format!("input is not UTF-8: {e}")))?;
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ParseError {
            path,
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: inner.to_string(),
        }
    })?;
    file.validate()?;
    Ok(file)
}

pub fn emit_instance(file: &InstanceFile) -> String {
    let mut s =
        serde_json::to_string_pretty(file).expect("instance files contain only finite data");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINEAR: &str = r#"{
  "objective": {"kind": "linear", "weights": [1.0, 1.0]},
  "constraint": {"packing": {"m": 1, "n": 2, "entries": [[0, 0, 1.0], [0, 1, 1.0]]}},
  "eps": 0.05,
  "seed": 1,
  "known_opt": 0.95
}"#;

    #[test]
    fn parses_minimal_packing() {
        let f = parse_instance(LINEAR.as_bytes()).unwrap();
        assert_eq!(f.n(), 2);
        match f.constraint().unwrap() {
            ConstraintModel::Packing(a) => assert_eq!((a.rows(), a.cols()), (1, 2)),
            _ => panic!("expected packing"),
        }
        assert_eq!(parse_instance(emit_instance(&f).as_bytes()).unwrap(), f);
    }

    #[test]
    fn negative_weight_reports_path() {
        let bad = LINEAR.replace("[1.0, 1.0]}", "[1.0, -2.0]}");
        let e = parse_instance(bad.as_bytes()).unwrap_err();
        assert_eq!(e.path, "objective.weights[1]");
    }

    #[test]
    fn duplicate_and_unsorted_triplets_rejected() {
        let dup = LINEAR.replace("[0, 1, 1.0]]", "[0, 0, 2.0]]");
        assert!(parse_instance(dup.as_bytes())
            .unwrap_err()
            .message
            .contains("duplicate"));
        let unsorted = LINEAR.replace("[[0, 0, 1.0], [0, 1, 1.0]]", "[[0, 1, 1.0], [0, 0, 1.0]]");
        assert!(parse_instance(unsorted.as_bytes())
            .unwrap_err()
            .message
            .contains("sorted"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse_instance(b"{\n  \"objective\": [}").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn unknown_fields_carry_path() {
        let bad = LINEAR.replace("\"m\": 1", "\"m\": 1, \"rows\": 3");
        let e = parse_instance(bad.as_bytes()).unwrap_err();
        assert!(e.path.starts_with("constraint.packing"), "{e}");
    }

    #[test]
    fn non_laminar_family_rejected() {
        let text = r#"{"objective": {"kind": "linear", "weights": [1, 1, 1]},
            "constraint": {"polymatroid": {"kind": "laminar", "n": 3,
                "sets": [{"members": [0, 1], "cap": 1}, {"members": [1, 2], "cap": 1}]}}}"#;
        let e = parse_instance(text.as_bytes()).unwrap_err();
        assert_eq!(e.path, "constraint.polymatroid.sets[1]");
    }

    #[test]
    fn sampled_wraps_closed_form() {
        let text = r#"{"objective": {"kind": "sampled", "samples": 500, "seed": 3,
                "base": {"kind": "coverage", "n": 2, "items": [{"weight": 1, "covered_by": [0, 1]}]}},
            "constraint": {"polymatroid": {"kind": "uniform", "n": 2, "k": 1}}}"#;
        let f = parse_instance(text.as_bytes()).unwrap();
        let obj = f.objective().unwrap();
        assert_eq!(obj.kind_name(), "sampled");
        assert!(obj.is_monotone());
        assert_eq!(parse_instance(emit_instance(&f).as_bytes()).unwrap(), f);
    }

    #[test]
    fn eps_range_enforced() {
        let bad = LINEAR.replace("\"eps\": 0.05", "\"eps\": 0.5");
        assert_eq!(parse_instance(bad.as_bytes()).unwrap_err().path, "eps");
    }
}
