//! Scenario files: JSON documents with sections `space`, `sets`, `h`,
//! `measures` and `params`. Every rational is a string, `"num/den"` or an
//! integer, so values cross the file boundary exactly.
//!
//! ```json
//! {
//!   "space": { "fibers": [
//!     { "weight": "1", "breakpoints": ["0", "1"], "densities": ["1"] }
//!   ] },
//!   "sets": { "C": { "fibers": [ { "intervals": [["0", "1"]] } ] } },
//!   "h": ["1/2"],
//!   "params": { "depth": 3 }
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::event::{EventSet, FiberSlice, Interval};
use crate::measure::{Atom, FiberFunction, FiberMeasure, FiberedSpace};
use crate::multi::FamilySpec;
use crate::scalar::{format_rational, parse_rational, Rational};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("{path}: invalid rational {value:?}, expected \"num/den\" or an integer")]
    BadRational { path: String, value: String },

    #[error("{path}: {source}")]
    Invalid { path: String, source: Error },

    #[error("{0}")]
    Reference(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub location: String,
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberDoc {
    pub weight: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomDoc>,
    pub breakpoints: Vec<String>,
    pub densities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub fibers: Vec<FiberDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceDoc {
    #[serde(default)]
    pub intervals: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDoc {
    pub fibers: Vec<SliceDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub measures: Vec<SpaceDoc>,
    pub weights: Vec<String>,
}

/// Command parameters. Command-line flags override these.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Name of the event set a command operates on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    /// Designated fibers for `shrink`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibers: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub space: SpaceDoc,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sets: BTreeMap<String, SetDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<FamilyDoc>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: Params,
}

fn is_default(p: &Params) -> bool {
    *p == Params::default()
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub space: FiberedSpace<Rational>,
    pub sets: BTreeMap<String, EventSet<Rational>>,
    pub h: Option<FiberFunction<Rational>>,
    pub measures: Option<FamilySpec<Rational>>,
    pub params: Params,
}

impl Scenario {
    pub fn new(space: FiberedSpace<Rational>) -> Self {
        Scenario { space, sets: BTreeMap::new(), h: None, measures: None, params: Params::default() }
    }

    pub fn set(&self, name: &str) -> Result<&EventSet<Rational>, ScenarioError> {
        self.sets
            .get(name)
            .ok_or_else(|| ScenarioError::Reference(format!("scenario defines no set named {name:?}")))
    }

    pub fn to_doc(&self) -> ScenarioDoc {
        ScenarioDoc {
            space: space_doc(&self.space),
            sets: self.sets.iter().map(|(k, v)| (k.clone(), set_doc(v))).collect(),
            h: self.h.as_ref().map(|h| h.values().iter().map(format_rational).collect()),
            measures: self.measures.as_ref().map(|m| FamilyDoc {
                measures: m.spaces.iter().map(space_doc).collect(),
                weights: m.weights.iter().map(format_rational).collect(),
            }),
            params: self.params.clone(),
        }
    }

    /// Pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("scenario documents always serialize")
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_doc(&doc)
}

pub fn from_doc(doc: &ScenarioDoc) -> Result<Scenario, ScenarioError> {
    let space = build_space(&doc.space, "space")?;
    let mut sets = BTreeMap::new();
    for (name, set) in &doc.sets {
        sets.insert(name.clone(), build_set(&space, set, &format!("sets.{name}"))?);
    }
    let h = match &doc.h {
        Some(values) => {
            let parsed = values
                .iter()
                .enumerate()
                .map(|(i, v)| rational(v, &format!("h[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            if parsed.len() != space.len() {
                return Err(invalid(
                    "h",
                    Error::FiberCountMismatch { expected: space.len(), found: parsed.len() },
                ));
            }
            Some(FiberFunction::new(parsed))
        }
        None => None,
    };
    let measures = match &doc.measures {
        Some(family) => {
            let spaces = family
                .measures
                .iter()
                .enumerate()
                .map(|(k, s)| build_space(s, &format!("measures.measures[{k}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let weights = family
                .weights
                .iter()
                .enumerate()
                .map(|(k, w)| rational(w, &format!("measures.weights[{k}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let spec = FamilySpec { spaces, weights };
            spec.family().map_err(|e| invalid("measures", e))?;
            Some(spec)
        }
        None => None,
    };
    Ok(Scenario { space, sets, h, measures, params: doc.params.clone() })
}

fn invalid(path: &str, source: Error) -> ScenarioError {
    ScenarioError::Invalid { path: path.to_string(), source }
}

fn rational(text: &str, path: &str) -> Result<Rational, ScenarioError> {
    parse_rational(text)
        .map_err(|_| ScenarioError::BadRational { path: path.to_string(), value: text.to_string() })
}

fn rationals(values: &[String], path: &str) -> Result<Vec<Rational>, ScenarioError> {
    values.iter().enumerate().map(|(j, v)| rational(v, &format!("{path}[{j}]"))).collect()
}

fn build_space(doc: &SpaceDoc, path: &str) -> Result<FiberedSpace<Rational>, ScenarioError> {
    let mut fibers = Vec::with_capacity(doc.fibers.len());
    for (i, fiber) in doc.fibers.iter().enumerate() {
        let fpath = format!("{path}.fibers[{i}]");
        let weight = rational(&fiber.weight, &format!("{fpath}.weight"))?;
        let atoms = fiber
            .atoms
            .iter()
            .enumerate()
            .map(|(j, a)| {
                Ok(Atom {
                    location: rational(&a.location, &format!("{fpath}.atoms[{j}].location"))?,
                    weight: rational(&a.weight, &format!("{fpath}.atoms[{j}].weight"))?,
                })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let breakpoints = rationals(&fiber.breakpoints, &format!("{fpath}.breakpoints"))?;
        let densities = rationals(&fiber.densities, &format!("{fpath}.densities"))?;
        let measure = FiberMeasure::new(atoms, breakpoints, densities).map_err(|e| invalid(&fpath, e))?;
        fibers.push((weight, measure));
    }
    FiberedSpace::new(fibers).map_err(|e| invalid(path, e))
}

fn build_set(
    space: &FiberedSpace<Rational>,
    doc: &SetDoc,
    path: &str,
) -> Result<EventSet<Rational>, ScenarioError> {
    let mut slices = Vec::with_capacity(doc.fibers.len());
    for (i, slice) in doc.fibers.iter().enumerate() {
        let spath = format!("{path}.fibers[{i}]");
        let intervals = slice
            .intervals
            .iter()
            .enumerate()
            .map(|(j, [lo, hi])| {
                Ok(Interval::new(
                    rational(lo, &format!("{spath}.intervals[{j}][0]"))?,
                    rational(hi, &format!("{spath}.intervals[{j}][1]"))?,
                ))
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let atoms = rationals(&slice.atoms, &format!("{spath}.atoms"))?;
        slices.push(FiberSlice::new(intervals, atoms).map_err(|e| invalid(&spath, e))?);
    }
    EventSet::new(space, slices).map_err(|e| invalid(path, e))
}

pub fn space_doc(space: &FiberedSpace<Rational>) -> SpaceDoc {
    SpaceDoc {
        fibers: space
            .fibers()
            .iter()
            .map(|f| FiberDoc {
                weight: format_rational(&f.weight),
                atoms: f
                    .measure
                    .atoms()
                    .iter()
                    .map(|a| AtomDoc {
                        location: format_rational(&a.location),
                        weight: format_rational(&a.weight),
                    })
                    .collect(),
                breakpoints: f.measure.breakpoints().iter().map(format_rational).collect(),
                densities: f.measure.densities().iter().map(format_rational).collect(),
            })
            .collect(),
    }
}

pub fn set_doc(set: &EventSet<Rational>) -> SetDoc {
    SetDoc {
        fibers: set
            .slices()
            .iter()
            .map(|s| SliceDoc {
                intervals: s
                    .intervals()
                    .iter()
                    .map(|iv| [format_rational(&iv.lo), format_rational(&iv.hi)])
                    .collect(),
                atoms: s.atoms().iter().map(format_rational).collect(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{ "space": { "fibers": [
        { "weight": "1", "breakpoints": ["0", "1"], "densities": ["1"] } ] } }"#;

    #[test]
    fn minimal_scenario_parses() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.space, FiberedSpace::single(FiberMeasure::lebesgue()));
        assert!(s.sets.is_empty() && s.h.is_none() && s.measures.is_none());
    }

    #[test]
    fn weights_not_summing_to_one_name_the_invariant() {
        let text = r#"{ "space": { "fibers": [
            { "weight": "1/2", "breakpoints": ["0", "1"], "densities": ["1"] },
            { "weight": "3/8", "breakpoints": ["0", "1"], "densities": ["1"] } ] } }"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.to_string(), "space: invalid space: fiber weights sum to 7/8, expected 1");
    }

    #[test]
    fn atom_outside_unit_interval_is_rejected() {
        let text = r#"{ "space": { "fibers": [
            { "weight": "1", "atoms": [{ "location": "3/2", "weight": "1/2" }],
              "breakpoints": ["0", "1"], "densities": ["1/2"] } ] } }"#;
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(err.contains("atom location 3/2 outside [0, 1]"), "{err}");
        assert!(err.starts_with("space.fibers[0]"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_scenario("{\n  \"space\": [ }").unwrap_err();
        match err {
            ScenarioError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn bad_rational_names_its_path() {
        let text = r#"{ "space": { "fibers": [
            { "weight": "0.5", "breakpoints": ["0", "1"], "densities": ["1"] } ] } }"#;
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(err.starts_with("space.fibers[0].weight"), "{err}");
    }

    #[test]
    fn sets_and_h_round_trip() {
        let text = r#"{
          "space": { "fibers": [ { "weight": "1", "breakpoints": ["0", "1/2", "1"], "densities": ["2", "0"] } ] },
          "sets": { "C": { "fibers": [ { "intervals": [["0", "1/2"]] } ] } },
          "h": ["3/4"],
          "params": { "depth": 2, "set": "C" }
        }"#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.params.depth, Some(2));
        assert_eq!(parse_scenario(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{ "space": { "fibers": [] }, "extra": 1 }"#;
        assert!(matches!(parse_scenario(text), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn h_length_must_match() {
        let text = r#"{ "space": { "fibers": [
            { "weight": "1", "breakpoints": ["0", "1"], "densities": ["1"] } ] }, "h": ["1/2", "1/2"] }"#;
        assert!(matches!(parse_scenario(text), Err(ScenarioError::Invalid { .. })));
    }
}
