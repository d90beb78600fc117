//! The JSON problem description: a shift, a generator, and optional measure,
//! invariant lines, potentials and tolerance overrides.
//!
//! Symbols are 1-based. Window entries are keyed by dash-separated words such
//! as `"1-2"`. The only implicit default is `theta = 0.5`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::cocycle::{Cocycle, LocalTable, TriangularCocycle};
use crate::equilibrium::LineField;
use crate::error::Error;
use crate::linalg2::{Direction, Mat2};
use crate::markov::MarkovMeasure;
use crate::pressure::Potential;
use crate::shift_space::{ShiftSpace, Word};
use crate::Tolerances;

pub const SPEC_VERSION: u32 = 1;

fn default_theta() -> f64 {
    0.5
}

fn default_version() -> u32 {
    SPEC_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftBlock {
    pub alphabet: usize,
    pub adjacency: Vec<Vec<u8>>,
    #[serde(default = "default_theta")]
    pub theta: f64,
}

/// Per-symbol values (window `[0, 0]`) or values keyed by window words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values<T> {
    PerSymbol(Vec<T>),
    Windows(BTreeMap<String, T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleBlock {
    /// `[lo, hi]`: `A(x)` reads `x_lo … x_hi`. Defaults to `[0, 0]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
    /// Row-major matrices `[[a, b], [c, d]]`.
    pub generators: Values<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangularBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
    pub a: Values<f64>,
    pub b: Values<f64>,
    pub c: Values<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
    pub values: Values<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum MeasureBlock {
    Bernoulli(Vec<f64>),
    Markov {
        transition: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stationary: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum LineBlock {
    Constant([f64; 2]),
    PerSymbol(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityBlock {
    pub word_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default = "default_version")]
    pub spec_version: u32,
    pub shift: ShiftBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocycle: Option<CocycleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangular: Option<TriangularBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariant_line: Option<LineBlock>,
    /// A second invariant line field, for the two-bundle consistency check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_invariant_line: Option<LineBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub potentials: BTreeMap<String, PotentialBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacityBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProblemErrorKind {
    Parse,
    Schema,
    NotPrimitive,
    Admissibility,
    SingularMatrix,
    InvalidMeasure,
    Capacity,
}

/// One problem found in a spec, located by a JSON pointer.
#[derive(Debug, Clone, PartialEq, Serialize, ThisError)]
pub struct ProblemError {
    pub kind: ProblemErrorKind,
    pub path: String,
    pub message: String,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.kind, self.path, self.message)
    }
}

impl ProblemError {
    fn new(kind: ProblemErrorKind, path: impl Into<String>, message: impl Into<String>) -> Self {
        ProblemError {
            kind,
            path: path.into(),
            message: message.into(),
        }
    }

    fn from_core(path: impl Into<String>, err: Error) -> Self {
        let kind = match &err {
            Error::NotPrimitive { .. } => ProblemErrorKind::NotPrimitive,
            Error::Singular { .. } => ProblemErrorKind::SingularMatrix,
            Error::Inadmissible(_) | Error::StrandedSymbol { .. } => ProblemErrorKind::Admissibility,
            Error::InvalidMeasure(_) => ProblemErrorKind::InvalidMeasure,
            Error::CapacityExceeded { .. } => ProblemErrorKind::Capacity,
            _ => ProblemErrorKind::Schema,
        };
        ProblemError::new(kind, path, err.to_string())
    }
}

/// The generator a spec describes.
#[derive(Debug, Clone)]
pub enum Generator {
    Cocycle(Cocycle),
    Triangular(TriangularCocycle),
}

impl Generator {
    /// The generator as a general matrix cocycle.
    pub fn cocycle(&self) -> Cocycle {
        match self {
            Generator::Cocycle(a) => a.clone(),
            Generator::Triangular(b) => b.to_cocycle(),
        }
    }

    pub fn triangular(&self) -> Option<&TriangularCocycle> {
        match self {
            Generator::Triangular(b) => Some(b),
            Generator::Cocycle(_) => None,
        }
    }
}

/// A validated spec with every block resolved.
#[derive(Debug, Clone)]
pub struct Problem {
    /// The normalized spec.
    pub spec: ProblemSpec,
    pub shift: ShiftSpace,
    pub generator: Option<Generator>,
    pub measure: Option<MarkovMeasure>,
    pub invariant_line: Option<LineField>,
    pub second_invariant_line: Option<LineField>,
    pub potentials: BTreeMap<String, Potential>,
    pub tolerances: Tolerances,
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for segment in path.iter() {
        out.push('/');
        match segment {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

impl ProblemSpec {
    /// Parses JSON, reporting the location of any schema violation.
    pub fn from_json(text: &str) -> std::result::Result<Self, ProblemError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = pointer(e.path());
            let inner = e.into_inner();
            let kind = if inner.is_syntax() || inner.is_eof() {
                ProblemErrorKind::Parse
            } else {
                ProblemErrorKind::Schema
            };
            ProblemError::new(kind, path, inner.to_string())
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs serialize")
    }

    /// Makes every default explicit so that serialization round-trips.
    pub fn normalized(&self) -> ProblemSpec {
        let mut spec = self.clone();
        if let Some(block) = spec.cocycle.as_mut() {
            block.window.get_or_insert([0, 0]);
        }
        if let Some(block) = spec.triangular.as_mut() {
            block.window.get_or_insert([0, 0]);
        }
        for block in spec.potentials.values_mut() {
            block.window.get_or_insert([0, 0]);
        }
        spec
    }

    /// Checks every block and resolves it, collecting all errors found.
    pub fn validate(&self) -> std::result::Result<Problem, Vec<ProblemError>> {
        let spec = self.normalized();
        let mut errors = Vec::new();
        if spec.spec_version != SPEC_VERSION {
            errors.push(ProblemError::new(
                ProblemErrorKind::Schema,
                "/spec_version",
                format!("unsupported version {}, expected {SPEC_VERSION}", spec.spec_version),
            ));
        }
        let tolerances = spec.tolerances.unwrap_or_default();
        let shift = match build_shift(&spec) {
            Ok(s) => s,
            Err(e) => {
                errors.push(e);
                return Err(errors);
            }
        };

        let generator = match (&spec.cocycle, &spec.triangular) {
            (Some(_), Some(_)) => {
                errors.push(ProblemError::new(
                    ProblemErrorKind::Schema,
                    "/triangular",
                    "give either a cocycle or a triangular block, not both",
                ));
                None
            }
            (Some(block), None) => build_cocycle(&shift, block, &tolerances, &mut errors).map(Generator::Cocycle),
            (None, Some(block)) => build_triangular(&shift, block, &mut errors).map(Generator::Triangular),
            (None, None) => None,
        };

        let measure = spec.measure.as_ref().and_then(|m| {
            let built = match m {
                MeasureBlock::Bernoulli(p) => MarkovMeasure::bernoulli(&shift, p),
                MeasureBlock::Markov { transition, stationary } => {
                    MarkovMeasure::from_transition(&shift, transition, stationary.clone())
                }
            };
            built.map_err(|e| errors.push(ProblemError::from_core("/measure", e))).ok()
        });

        let invariant_line = spec
            .invariant_line
            .as_ref()
            .and_then(|l| build_lines(&shift, l, "/invariant_line", &mut errors));
        let second_invariant_line = spec
            .second_invariant_line
            .as_ref()
            .and_then(|l| build_lines(&shift, l, "/second_invariant_line", &mut errors));

        let mut potentials = BTreeMap::new();
        for (name, block) in &spec.potentials {
            let path = format!("/potentials/{name}");
            let window = block.window.unwrap_or([0, 0]);
            if let Some(table) = build_table(&shift, window, &block.values, &format!("{path}/values"), &mut errors) {
                let bad = table.entries().find(|(_, v)| !v.is_finite()).map(|(w, _)| w.key());
                if let Some(key) = bad {
                    errors.push(ProblemError::new(
                        ProblemErrorKind::Schema,
                        format!("{path}/values"),
                        format!("value on window {key} is not finite"),
                    ));
                } else {
                    potentials.insert(name.clone(), table);
                }
            }
        }

        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(Problem {
            spec,
            shift,
            generator,
            measure,
            invariant_line,
            second_invariant_line,
            potentials,
            tolerances,
        })
    }
}

/// Parses and validates in one step.
pub fn load(text: &str) -> std::result::Result<Problem, Vec<ProblemError>> {
    ProblemSpec::from_json(text).map_err(|e| vec![e])?.validate()
}

fn build_shift(spec: &ProblemSpec) -> std::result::Result<ShiftSpace, ProblemError> {
    let block = &spec.shift;
    if block.adjacency.len() != block.alphabet {
        return Err(ProblemError::new(
            ProblemErrorKind::Schema,
            "/shift/adjacency",
            format!("{} rows for alphabet of size {}", block.adjacency.len(), block.alphabet),
        ));
    }
    if !(block.theta > 0.0 && block.theta < 1.0) {
        return Err(ProblemError::new(
            ProblemErrorKind::Schema,
            "/shift/theta",
            format!("theta {} not in (0,1)", block.theta),
        ));
    }
    let shift = ShiftSpace::new(block.adjacency.clone(), block.theta)
        .map_err(|e| ProblemError::from_core("/shift/adjacency", e))?;
    Ok(match &spec.capacity {
        Some(c) => shift.with_word_cap(c.word_cap),
        None => shift,
    })
}

fn check_window(window: [i64; 2], path: &str, errors: &mut Vec<ProblemError>) -> bool {
    if window[0] > window[1] {
        errors.push(ProblemError::new(
            ProblemErrorKind::Schema,
            path,
            format!("window [{}, {}] is empty", window[0], window[1]),
        ));
        return false;
    }
    true
}

fn build_table<T: Clone>(
    shift: &ShiftSpace,
    window: [i64; 2],
    values: &Values<T>,
    path: &str,
    errors: &mut Vec<ProblemError>,
) -> Option<LocalTable<T>> {
    match values {
        Values::PerSymbol(v) => {
            if window != [0, 0] {
                errors.push(ProblemError::new(
                    ProblemErrorKind::Schema,
                    path,
                    "per-symbol values need window [0, 0]; key longer windows by word",
                ));
                return None;
            }
            if v.len() != shift.alphabet_size() {
                errors.push(ProblemError::new(
                    ProblemErrorKind::Schema,
                    path,
                    format!("{} values for alphabet of size {}", v.len(), shift.alphabet_size()),
                ));
                return None;
            }
            LocalTable::from_fn(shift, 0, 0, |w| v[w[0] as usize].clone())
                .map_err(|e| errors.push(ProblemError::from_core(path, e)))
                .ok()
        }
        Values::Windows(map) => {
            if !check_window(window, path, errors) {
                return None;
            }
            let mut entries = HashMap::new();
            let mut ok = true;
            for (key, value) in map {
                let entry_path = format!("{path}/{key}");
                match Word::parse_key(key, shift.alphabet_size()) {
                    Ok(w) if !shift.is_admissible(&w) => {
                        errors.push(ProblemError::new(
                            ProblemErrorKind::Admissibility,
                            entry_path,
                            format!("window {key} is not admissible"),
                        ));
                        ok = false;
                    }
                    Ok(w) => {
                        entries.insert(w, value.clone());
                    }
                    Err(e) => {
                        errors.push(ProblemError::from_core(entry_path, e));
                        ok = false;
                    }
                }
            }
            if !ok {
                return None;
            }
            LocalTable::from_entries(shift, window[0], window[1], &entries)
                .map_err(|e| errors.push(ProblemError::from_core(path, e)))
                .ok()
        }
    }
}

fn build_cocycle(
    shift: &ShiftSpace,
    block: &CocycleBlock,
    tol: &Tolerances,
    errors: &mut Vec<ProblemError>,
) -> Option<Cocycle> {
    let path = "/cocycle/generators";
    let table = build_table(shift, block.window.unwrap_or([0, 0]), &block.generators, path, errors)?;
    let table = table.map(|_, rows| Mat2::from_rows(*rows));
    let mut ok = true;
    for (w, m) in table.entries() {
        let det = m.det();
        if !m.is_finite() || det.abs() <= tol.det_tol {
            let at = match &block.generators {
                Values::PerSymbol(_) => format!("{path}/{}", w[0] as usize),
                Values::Windows(_) => format!("{path}/{}", w.key()),
            };
            errors.push(ProblemError::new(
                ProblemErrorKind::SingularMatrix,
                at,
                format!("matrix is singular or not finite (det = {det:e})"),
            ));
            ok = false;
        }
    }
    if !ok {
        return None;
    }
    Cocycle::with_det_tol(table, tol.det_tol)
        .map_err(|e| errors.push(ProblemError::from_core(path, e)))
        .ok()
}

fn build_triangular(shift: &ShiftSpace, block: &TriangularBlock, errors: &mut Vec<ProblemError>) -> Option<TriangularCocycle> {
    let window = block.window.unwrap_or([0, 0]);
    let a = build_table(shift, window, &block.a, "/triangular/a", errors);
    let b = build_table(shift, window, &block.b, "/triangular/b", errors);
    let c = build_table(shift, window, &block.c, "/triangular/c", errors);
    let (a, b, c) = (a?, b?, c?);
    for (name, t) in [("a", &a), ("c", &c)] {
        if let Some((w, _)) = t.entries().find(|(_, v)| **v == 0.0 || !v.is_finite()) {
            errors.push(ProblemError::new(
                ProblemErrorKind::SingularMatrix,
                format!("/triangular/{name}"),
                format!("{name} vanishes or is not finite on window {}", w.key()),
            ));
            return None;
        }
    }
    TriangularCocycle::new(a, b, c)
        .map_err(|e| errors.push(ProblemError::from_core("/triangular", e)))
        .ok()
}

fn build_lines(shift: &ShiftSpace, block: &LineBlock, path: &str, errors: &mut Vec<ProblemError>) -> Option<LineField> {
    let direction = |v: &[f64; 2], at: String, errors: &mut Vec<ProblemError>| {
        let d = Direction::new(v[0], v[1]);
        if d.is_none() {
            errors.push(ProblemError::new(ProblemErrorKind::Schema, at, "direction must be a nonzero finite vector"));
        }
        d
    };
    match block {
        LineBlock::Constant(v) => direction(v, format!("{path}/constant"), errors).map(LineField::Constant),
        LineBlock::PerSymbol(vs) => {
            if vs.len() != shift.alphabet_size() {
                errors.push(ProblemError::new(
                    ProblemErrorKind::Schema,
                    format!("{path}/per_symbol"),
                    format!("{} lines for alphabet of size {}", vs.len(), shift.alphabet_size()),
                ));
                return None;
            }
            let lines: Vec<Option<Direction>> = vs
                .iter()
                .enumerate()
                .map(|(i, v)| direction(v, format!("{path}/per_symbol/{i}"), errors))
                .collect();
            lines.into_iter().collect::<Option<Vec<_>>>().map(LineField::PerSymbol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTITY: &str = r#"{
        "shift": {"alphabet": 2, "adjacency": [[1,1],[1,1]]},
        "cocycle": {"generators": [[[1,0],[0,1]], [[1,0],[0,1]]]}
    }"#;

    #[test]
    fn minimal_identity_spec() {
        let p = load(IDENTITY).unwrap();
        assert_eq!(p.shift.theta(), 0.5);
        let a = p.generator.unwrap().cocycle();
        assert_eq!(a.entries().count(), 2);
        assert!(p.measure.is_none());
    }

    #[test]
    fn non_primitive_path() {
        let text = r#"{"shift": {"alphabet": 2, "adjacency": [[0,1],[1,0]]}}"#;
        let errs = load(text).unwrap_err();
        assert_eq!(errs[0].kind, ProblemErrorKind::NotPrimitive);
        assert_eq!(errs[0].path, "/shift/adjacency");
    }

    #[test]
    fn singular_generator() {
        let text = r#"{
            "shift": {"alphabet": 2, "adjacency": [[1,1],[1,1]]},
            "cocycle": {"generators": [[[1,2],[2,4]], [[1,0],[0,1]]]}
        }"#;
        let errs = load(text).unwrap_err();
        assert_eq!(errs, vec![ProblemError {
            kind: ProblemErrorKind::SingularMatrix,
            path: "/cocycle/generators/0".into(),
            message: "matrix is singular or not finite (det = 0e0)".into(),
        }]);
    }

    #[test]
    fn schema_errors_carry_paths() {
        let text = r#"{"shift": {"alphabet": 2, "adjacency": [[1,1],[1,"x"]]}}"#;
        let e = ProblemSpec::from_json(text).unwrap_err();
        assert_eq!((e.kind, e.path.as_str()), (ProblemErrorKind::Schema, "/shift/adjacency/1/1"));
        let e = ProblemSpec::from_json(r#"{"shift": {"alphabet": 2, "adjacency": [[1,1],[1,1]]}, "bogus": 1}"#).unwrap_err();
        assert_eq!(e.kind, ProblemErrorKind::Schema);
        assert_eq!(ProblemSpec::from_json("{").unwrap_err().kind, ProblemErrorKind::Parse);
    }

    #[test]
    fn windowed_entries_and_admissibility() {
        let text = r#"{
            "shift": {"alphabet": 2, "adjacency": [[1,1],[1,0]]},
            "cocycle": {"window": [0, 1], "generators": {
                "1-1": [[2,0],[0,1]], "1-2": [[1,1],[0,1]], "2-1": [[0,1],[1,0]], "2-2": [[1,0],[0,1]]
            }}
        }"#;
        let errs = load(text).unwrap_err();
        assert_eq!(errs[0].kind, ProblemErrorKind::Admissibility);
        assert_eq!(errs[0].path, "/cocycle/generators/2-2");
        let fixed = text.replace(r#", "2-2": [[1,0],[0,1]]"#, "");
        let p = load(&fixed).unwrap();
        assert_eq!(p.generator.unwrap().cocycle().window(), (0, 1));
    }

    #[test]
    fn measure_rows_must_be_stochastic() {
        let text = r#"{
            "shift": {"alphabet": 2, "adjacency": [[1,1],[1,0]]},
            "measure": {"markov": {"transition": [[0.5, 0.5], [0.5, 0.5]]}}
        }"#;
        let errs = load(text).unwrap_err();
        assert_eq!((errs[0].kind, errs[0].path.as_str()), (ProblemErrorKind::InvalidMeasure, "/measure"));
    }

    #[test]
    fn round_trip_is_idempotent_after_normalization() {
        let text = r#"{
            "shift": {"alphabet": 2, "adjacency": [[1,1],[1,1]]},
            "triangular": {"a": [2, 1], "b": [0, 0], "c": [1, 2]},
            "invariant_line": {"constant": [1, 0]},
            "potentials": {"phi": {"values": [0.5, -0.25]}},
            "tolerances": {"coh_tol": 1e-10}
        }"#;
        let once = load(text).unwrap().spec;
        let twice = ProblemSpec::from_json(&once.to_json()).unwrap().normalized();
        assert_eq!(once, twice);
        assert_eq!(once.to_json(), twice.to_json());
        assert_eq!(once.tolerances.unwrap().coh_tol, 1e-10);
        assert_eq!(once.tolerances.unwrap().det_tol, 1e-12);
    }

    #[test]
    fn triangular_zero_diagonal() {
        let text = r#"{
            "shift": {"alphabet": 2, "adjacency": [[1,1],[1,1]]},
            "triangular": {"a": [2, 0], "b": [0, 0], "c": [1, 2]}
        }"#;
        let errs = load(text).unwrap_err();
        assert_eq!((errs[0].kind, errs[0].path.as_str()), (ProblemErrorKind::SingularMatrix, "/triangular/a"));
    }
}
