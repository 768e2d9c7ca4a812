//! Command dispatch and machine-readable reports.
//!
//! Reports are JSON objects with sorted keys and exact rationals as strings,
//! so identical inputs give byte-identical output.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::atomless::{
    is_conditionally_atomless, maximal_split_region, shrink_sequence, split, AtomlessVerdict, FiberSet,
};
use crate::error::Error;
use crate::kernel::{hat_family, kernel_atom_scan, pushforward_uniformity_check, system_breakpoints};
use crate::multi::{
    conditionally_atomless_wrt_densities, density_partition, density_vectors, mixture, null_cells, Cell,
    DensityVerdict,
};
use crate::piecewise::PiecewiseLinear;
use crate::scalar::{format_rational, Rational, Scalar};
use crate::scenario::{set_doc, Scenario};
use crate::selftest::run_selftest;
use crate::uniform::{
    build_dyadic_family, build_uniform, intermediate_level_scan, level_profile, set_at_level,
    staircase_within_bound,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Split,
    Shrink,
    Family,
    Uniform,
    Scan,
    Kernel,
    Densities,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Check,
        Command::Split,
        Command::Shrink,
        Command::Family,
        Command::Uniform,
        Command::Scan,
        Command::Kernel,
        Command::Densities,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Split => "split",
            Command::Shrink => "shrink",
            Command::Family => "family",
            Command::Uniform => "uniform",
            Command::Scan => "scan",
            Command::Kernel => "kernel",
            Command::Densities => "densities",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| RunError::UnknownCommand(s.to_string()))
    }
}

/// Command-line overrides of scenario parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Options {
    pub seed: Option<u64>,
    pub depth: Option<u32>,
    pub count: Option<usize>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("command {command} needs {field}")]
    MissingField { command: Command, field: String },
    #[error("{0}")]
    Input(#[from] Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub passed: bool,
    pub body: Value,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_value(&self) -> Value {
        let mut out = self.body.clone();
        out["command"] = json!(self.command.name());
        out["passed"] = json!(self.passed);
        out
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_value()).expect("reports serialize");
        text.push('\n');
        text
    }
}

const DEFAULT_DEPTH: u32 = 4;
const DEFAULT_SHRINK_STEPS: usize = 10;
const DEFAULT_SELFTEST_SEED: u64 = 42;
const DEFAULT_SELFTEST_COUNT: usize = 50;

/// Runs `command`. `selftest` ignores the scenario and may be given `None`;
/// every other command needs one.
pub fn run(command: Command, scenario: Option<&Scenario>, options: &Options) -> Result<Report, RunError> {
    if command == Command::Selftest {
        let seed = options.seed.or(scenario.and_then(|s| s.params.seed)).unwrap_or(DEFAULT_SELFTEST_SEED);
        let count = options.count.or(scenario.and_then(|s| s.params.count)).unwrap_or(DEFAULT_SELFTEST_COUNT);
        return Ok(selftest(seed, count));
    }
    let scenario =
        scenario.ok_or_else(|| RunError::MissingField { command, field: "a scenario file".to_string() })?;
    let outcome = match command {
        Command::Check => Ok(check(scenario)),
        Command::Split => split_cmd(scenario),
        Command::Shrink => shrink_cmd(scenario, options),
        Command::Family => family_cmd(scenario, options),
        Command::Uniform => uniform_cmd(scenario, options),
        Command::Scan => scan_cmd(scenario, options),
        Command::Kernel => kernel_cmd(scenario),
        Command::Densities => densities_cmd(scenario),
        Command::Selftest => unreachable!("handled above"),
    };
    match outcome {
        Ok((passed, body)) => Ok(Report { command, passed, body }),
        Err(RunError::Input(Error::AtomObstruction { fiber, location })) => Ok(Report {
            command,
            passed: false,
            body: json!({ "obstruction": { "fiber": fiber, "atom": location } }),
        }),
        Err(e) => Err(e),
    }
}

type Outcome = Result<(bool, Value), RunError>;

fn q(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn qs(xs: &[Rational]) -> Value {
    Value::Array(xs.iter().map(q).collect())
}

fn set_value(set: &crate::event::EventSet<Rational>) -> Value {
    serde_json::to_value(set_doc(set)).expect("set documents serialize")
}

fn fibers_value(fibers: &FiberSet) -> Value {
    json!(fibers.iter().collect::<Vec<_>>())
}

fn map_value(u: &PiecewiseLinear<Rational>) -> Value {
    json!({ "breakpoints": qs(u.breakpoints()), "values": qs(u.values()) })
}

fn named_set<'a>(
    scenario: &'a Scenario,
    command: Command,
    default: &str,
) -> Result<(String, &'a crate::event::EventSet<Rational>), RunError> {
    let name = scenario.params.set.clone().unwrap_or_else(|| default.to_string());
    let set = scenario
        .sets
        .get(&name)
        .ok_or_else(|| RunError::MissingField { command, field: format!("set {name:?} in \"sets\"") })?;
    Ok((name, set))
}

fn depth(scenario: &Scenario, options: &Options) -> u32 {
    options.depth.or(scenario.params.depth).unwrap_or(DEFAULT_DEPTH)
}

fn verdict_value(verdict: &AtomlessVerdict<Rational>) -> Value {
    match verdict {
        AtomlessVerdict::Atomless => json!({ "atomless": true }),
        AtomlessVerdict::Witness(w) => json!({
            "atomless": false,
            "witness": { "fiber": w.fiber, "location": q(&w.location), "weight": q(&w.weight) }
        }),
    }
}

fn check(scenario: &Scenario) -> (bool, Value) {
    let verdict = is_conditionally_atomless(&scenario.space);
    (verdict.is_atomless(), json!({ "fibers": scenario.space.len(), "verdict": verdict_value(&verdict) }))
}

fn split_cmd(scenario: &Scenario) -> Outcome {
    let command = Command::Split;
    let (name, c) = named_set(scenario, command, "C")?;
    let h =
        scenario.h.as_ref().ok_or_else(|| RunError::MissingField { command, field: "\"h\"".to_string() })?;
    let space = &scenario.space;
    let b = split(space, c, h)?;
    let ce_c = space.cond_expectation(c)?;
    let ce_b = space.cond_expectation(&b)?;
    let target = h.hadamard(&ce_c);
    let exact = ce_b == target;
    let contained = b.is_subset_of(c)?;
    Ok((
        exact && contained,
        json!({
            "set": name,
            "h": qs(h.values()),
            "B": set_value(&b),
            "cond_expectation_C": qs(ce_c.values()),
            "cond_expectation_B": qs(ce_b.values()),
            "checks": { "exact": exact, "contained": contained },
        }),
    ))
}

fn shrink_cmd(scenario: &Scenario, options: &Options) -> Outcome {
    let command = Command::Shrink;
    let (name, c) = named_set(scenario, command, "C")?;
    let space = &scenario.space;
    let ce_c = space.cond_expectation(c)?;
    let fibers: FiberSet = match &scenario.params.fibers {
        Some(list) => list.iter().copied().collect(),
        None => ce_c.support().into_iter().collect(),
    };
    let n = scenario.params.n.or(options.count).unwrap_or(DEFAULT_SHRINK_STEPS);
    let chain = shrink_sequence(space, c, &fibers, n)?;
    let mut strictly_nested = true;
    let mut bounded = true;
    let mut steps = Vec::with_capacity(chain.len());
    for (k, set) in chain.iter().enumerate() {
        let ce = space.cond_expectation(set)?;
        if k > 0 {
            strictly_nested &= set.is_subset_of(&chain[k - 1])? && *set != chain[k - 1];
            let bound = Rational::dyadic(1, k as u32);
            bounded &= fibers.iter().all(|i| ce[i].strictly_positive() && ce[i] <= bound);
        }
        steps.push(json!({ "k": k, "cond_expectation": qs(ce.values()) }));
    }
    Ok((
        strictly_nested && bounded,
        json!({
            "set": name,
            "fibers": fibers_value(&fibers),
            "n": n,
            "steps": steps,
            "final": set_value(&chain[n]),
            "checks": { "strictly_nested": strictly_nested, "bounded": bounded },
        }),
    ))
}

fn family_cmd(scenario: &Scenario, options: &Options) -> Outcome {
    let space = &scenario.space;
    let d = depth(scenario, options);
    let family = build_dyadic_family(space, d)?;
    let mut levels_exact = true;
    let mut nested = true;
    let mut matches_left_fill = true;
    let mut levels = Vec::with_capacity(family.len());
    for (k, (t, set)) in family.iter().enumerate() {
        levels_exact &= space.cond_expectation(set)?.values().iter().all(|v| *v == t);
        if k > 0 {
            nested &= family.set(k - 1).is_subset_of(set)?;
        }
        matches_left_fill &= set_at_level(space, &t)? == *set;
        levels.push(json!({ "t": q(&t), "set": set_value(set) }));
    }
    let staircase = staircase_within_bound(&build_uniform(space)?, &family)?;
    Ok((
        levels_exact && nested && matches_left_fill && staircase,
        json!({
            "depth": d,
            "levels": levels,
            "checks": {
                "levels_exact": levels_exact,
                "nested": nested,
                "matches_left_fill": matches_left_fill,
                "staircase_within_bound": staircase,
            },
        }),
    ))
}

fn uniform_cmd(scenario: &Scenario, options: &Options) -> Outcome {
    let space = &scenario.space;
    let d = depth(scenario, options);
    let u = build_uniform(space)?;
    let mut sublevels_exact = true;
    for k in 0..=(1u64 << d) {
        let t = Rational::dyadic(k, d);
        sublevels_exact &= space.cond_expectation(&u.sublevel_set(&t)?)?.values().iter().all(|v| *v == t);
    }
    let maps: Vec<Value> = u.maps().iter().map(map_value).collect();
    Ok((
        sublevels_exact,
        json!({
            "depth": d,
            "maps": maps,
            "checks": { "sublevels_exact": sublevels_exact },
        }),
    ))
}

fn scan_cmd(scenario: &Scenario, options: &Options) -> Outcome {
    let command = Command::Scan;
    let (name, a) = named_set(scenario, command, "A")?;
    let space = &scenario.space;
    let d = depth(scenario, options);
    let ce = space.cond_expectation(a)?;
    let region = maximal_split_region(space, a)?;
    let scan = intermediate_level_scan(space, a)?;
    let found = match &scan {
        Some(s) => {
            let inner = space.cond_expectation(&a.intersect(&set_at_level(space, &s.level)?)?)?;
            s.fibers.iter().all(|i| inner[i].strictly_positive() && inner[i] < ce[i])
        }
        None => ce.support().is_empty(),
    };
    let mut lipschitz = true;
    let mut profiles = Vec::with_capacity(space.len());
    for i in 0..space.len() {
        let g = level_profile(space, a, i)?;
        let grid: Vec<Rational> = (0..=(1u64 << d)).map(|k| Rational::dyadic(k, d)).collect();
        let values: Vec<Rational> = grid.iter().map(|t| g.eval(t)).collect();
        for s in 0..grid.len() {
            for t in s..grid.len() {
                let rise = values[t].clone() - values[s].clone();
                lipschitz &= !rise.strictly_negative() && rise <= grid[t].clone() - grid[s].clone();
            }
        }
        profiles.push(map_value(&g));
    }
    Ok((
        found && lipschitz,
        json!({
            "set": name,
            "depth": d,
            "cond_expectation": qs(ce.values()),
            "split_region": fibers_value(&region),
            "level": scan.as_ref().map(|s| q(&s.level)),
            "fibers": scan.as_ref().map(|s| fibers_value(&s.fibers)),
            "profiles": profiles,
            "checks": { "strict_sandwich": found, "lipschitz": lipschitz },
        }),
    ))
}

fn kernel_cmd(scenario: &Scenario) -> Outcome {
    let space = &scenario.space;
    let report = kernel_atom_scan(space);
    let atoms: Vec<Value> = report
        .atoms
        .iter()
        .map(|list| {
            json!(list
                .iter()
                .map(|a| json!({ "location": q(&a.location), "weight": q(&a.weight) }))
                .collect::<Vec<_>>())
        })
        .collect();
    let agrees = report.is_atomless() == is_conditionally_atomless(space).is_atomless();
    if !report.is_atomless() {
        return Ok((
            false,
            json!({ "atoms": atoms, "checks": { "atomless": false, "verdicts_agree": agrees } }),
        ));
    }
    let u = build_uniform(space)?;
    let points = system_breakpoints(&u);
    let tests = hat_family(&points);
    let residuals = pushforward_uniformity_check(space, &u, &tests)?;
    let zero = residuals.iter().flatten().all(Zero::is_zero);
    Ok((
        zero && agrees,
        json!({
            "atoms": atoms,
            "test_points": qs(&points),
            "tests": tests.len(),
            "checks": { "atomless": true, "verdicts_agree": agrees, "residuals_zero": zero },
        }),
    ))
}

fn cell_value(cell: &Cell<Rational>) -> Value {
    match cell {
        Cell::Diffuse { fiber, interval } => {
            json!({ "fiber": fiber, "interval": [q(&interval.lo), q(&interval.hi)] })
        }
        Cell::Atom { fiber, location } => json!({ "fiber": fiber, "atom": q(location) }),
    }
}

fn densities_cmd(scenario: &Scenario) -> Outcome {
    let command = Command::Densities;
    let spec = scenario
        .measures
        .as_ref()
        .ok_or_else(|| RunError::MissingField { command, field: "\"measures\"".to_string() })?;
    let family = spec.family()?;
    let base = mixture(&family);
    let vectors = density_vectors(&family);
    let partition = density_partition(&vectors);
    let nulls = null_cells(&base);
    let normalized = (0..family.cell_count()).all(|c| {
        nulls.contains(&c)
            || family
                .weights()
                .iter()
                .zip(&vectors[c])
                .fold(Rational::zero(), |acc, (w, f)| acc + w.clone() * f.clone())
                == Rational::from_int(1)
    });
    let verdict = conditionally_atomless_wrt_densities(&family);
    let verdict_value = match &verdict {
        DensityVerdict::Atomless(_) => json!({ "atomless": true }),
        DensityVerdict::Witness { cell, fiber, location, mass } => json!({
            "atomless": false,
            "witness": { "cell": cell, "fiber": fiber, "location": q(location), "mass": q(mass) }
        }),
    };
    let cells: Vec<Value> = family
        .cells()
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let mut v = cell_value(cell);
            v["base"] = q(&base[c]);
            v["density"] = qs(&vectors[c]);
            v["block"] = json!(partition.block_of(c));
            v
        })
        .collect();
    Ok((
        normalized && verdict.is_atomless(),
        json!({
            "weights": qs(family.weights()),
            "cells": cells,
            "blocks": partition.block_count(),
            "verdict": verdict_value,
            "checks": { "normalized": normalized, "atomless": verdict.is_atomless() },
        }),
    ))
}

fn selftest(seed: u64, count: usize) -> Report {
    let tallies = run_selftest(seed, count);
    let passed = tallies.iter().all(|t| t.ok());
    let suites: Vec<Value> = tallies
        .iter()
        .map(|t| json!({ "name": t.name, "passed": t.passed, "failed": t.failed, "failing_seeds": t.failing_seeds }))
        .collect();
    Report {
        command: Command::Selftest,
        passed,
        body: json!({ "seed": seed, "count": count, "suites": suites }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    const LEBESGUE_SPLIT: &str = r#"{
      "space": { "fibers": [ { "weight": "1", "breakpoints": ["0", "1"], "densities": ["1"] } ] },
      "sets": { "C": { "fibers": [ { "intervals": [["0", "1"]] } ] } },
      "h": ["1/2"]
    }"#;

    #[test]
    fn split_of_whole_lebesgue_fiber_is_left_half() {
        let s = parse_scenario(LEBESGUE_SPLIT).unwrap();
        let report = run(Command::Split, Some(&s), &Options::default()).unwrap();
        assert!(report.passed);
        assert_eq!(report.body["B"]["fibers"][0]["intervals"], json!([["0", "1/2"]]));
    }

    #[test]
    fn check_on_atomless_space_passes() {
        let s = parse_scenario(LEBESGUE_SPLIT).unwrap();
        let report = run(Command::Check, Some(&s), &Options::default()).unwrap();
        assert_eq!(report.exit_code(), 0);
        assert_eq!(report.body["verdict"]["atomless"], json!(true));
    }

    #[test]
    fn missing_h_is_an_input_error() {
        let mut s = parse_scenario(LEBESGUE_SPLIT).unwrap();
        s.h = None;
        assert!(matches!(
            run(Command::Split, Some(&s), &Options::default()),
            Err(RunError::MissingField { .. })
        ));
    }

    #[test]
    fn commands_parse_by_name() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("bogus".parse::<Command>().is_err());
    }

    #[test]
    fn selftest_report_is_reproducible() {
        let opts = Options { seed: Some(42), count: Some(3), depth: None };
        let a = run(Command::Selftest, None, &opts).unwrap().to_json();
        let b = run(Command::Selftest, None, &opts).unwrap().to_json();
        assert_eq!(a, b);
    }
}
