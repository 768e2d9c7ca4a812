//! Seeded random instances for property suites and the `selftest` command.
//!
//! Every generated object satisfies its type invariants exactly: raw integer
//! weights are drawn first and then divided by their exact total.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::event::{EventSet, FiberSlice, Interval};
use crate::measure::{Atom, FiberFunction, FiberMeasure, FiberedSpace};
use crate::multi::FamilySpec;
use crate::scalar::{Rational, Scalar};
use crate::scenario::{Params, Scenario};

/// Bounds for generated instances.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    /// At most 8.
    pub max_fibers: usize,
    /// Breakpoints per fiber including 0 and 1; between 2 and 16.
    pub max_breakpoints: usize,
    /// Probability that a fiber carries atoms.
    pub atom_probability: f64,
    /// Measures in a generated family; between 1 and 4.
    pub max_measures: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { max_fibers: 8, max_breakpoints: 16, atom_probability: 0.5, max_measures: 4 }
    }
}

impl GenParams {
    pub fn atomless() -> Self {
        GenParams { atom_probability: 0.0, ..Self::default() }
    }

    pub fn with_atom_probability(mut self, p: f64) -> Self {
        self.atom_probability = p;
        self
    }

    fn clamped(&self) -> GenParams {
        GenParams {
            max_fibers: self.max_fibers.clamp(1, 8),
            max_breakpoints: self.max_breakpoints.clamp(2, 16),
            atom_probability: self.atom_probability.clamp(0.0, 1.0),
            max_measures: self.max_measures.clamp(1, 4),
        }
    }
}

const DENOMINATORS: [i64; 8] = [16, 20, 24, 30, 36, 48, 60, 64];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Divides positive integer weights by their sum.
fn normalize(raw: &[i64]) -> Vec<Rational> {
    let total: i64 = raw.iter().sum();
    raw.iter().map(|&w| q(w, total)).collect()
}

/// `count` distinct sorted numerators from `1..den`.
fn grid_points<R: Rng>(rng: &mut R, den: i64, count: usize) -> Vec<i64> {
    let mut all: Vec<i64> = (1..den).collect();
    all.shuffle(rng);
    let mut picked: Vec<i64> = all.into_iter().take(count).collect();
    picked.sort_unstable();
    picked
}

pub fn random_measure<R: Rng>(rng: &mut R, params: &GenParams) -> FiberMeasure<Rational> {
    let p = params.clamped();
    let den = *DENOMINATORS.choose(rng).expect("non-empty");
    let interior = rng.gen_range(0..=p.max_breakpoints - 2);
    let mut cuts = vec![0];
    cuts.extend(grid_points(rng, den, interior));
    cuts.push(den);

    let mut raw_densities: Vec<i64> =
        (0..cuts.len() - 1).map(|_| if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..=6) }).collect();
    if raw_densities.iter().all(|&d| d == 0) {
        let j = rng.gen_range(0..raw_densities.len());
        raw_densities[j] = rng.gen_range(1..=6);
    }
    let mut atom_raw: Vec<(i64, i64)> = Vec::new();
    if p.atom_probability > 0.0 && rng.gen_bool(p.atom_probability) {
        let count = rng.gen_range(1..=3);
        let locations = grid_points(rng, den, count);
        atom_raw = locations.into_iter().map(|loc| (loc, rng.gen_range(1..=5))).collect();
    }

    // Density d_raw * s on each piece and atom weight w * s / 4, with s
    // chosen so that the total is exactly 1.
    let diffuse: i64 = cuts.windows(2).zip(&raw_densities).map(|(w, d)| (w[1] - w[0]) * d).sum();
    let atom_total: i64 = atom_raw.iter().map(|(_, w)| w).sum();
    let scale = q(4 * den, 4 * diffuse + atom_total * den);
    let breakpoints = cuts.iter().map(|&c| q(c, den)).collect();
    let densities = raw_densities.iter().map(|&d| q(d, 1) * scale.clone()).collect();
    let atoms = atom_raw
        .iter()
        .map(|&(loc, w)| Atom { location: q(loc, den), weight: q(w, 4) * scale.clone() })
        .collect();
    FiberMeasure::new(atoms, breakpoints, densities).expect("generated measures are normalized")
}

pub fn random_space<R: Rng>(rng: &mut R, params: &GenParams) -> FiberedSpace<Rational> {
    let p = params.clamped();
    let n = rng.gen_range(1..=p.max_fibers);
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
    let fibers = normalize(&raw).into_iter().map(|w| (w, random_measure(rng, &p))).collect();
    FiberedSpace::new(fibers).expect("generated spaces are normalized")
}

/// A random union of grid intervals on each fiber, picking each atom with
/// probability 1/2. Some slices come out empty.
pub fn random_event_set<R: Rng>(rng: &mut R, space: &FiberedSpace<Rational>) -> EventSet<Rational> {
    let slices = space
        .fibers()
        .iter()
        .map(|f| {
            if rng.gen_bool(0.15) {
                return FiberSlice::empty();
            }
            let den = *DENOMINATORS.choose(rng).expect("non-empty");
            let count = rng.gen_range(1..=3) * 2;
            let mut ends = grid_points(rng, den + 2, count);
            for e in ends.iter_mut() {
                *e -= 1;
            }
            let intervals = ends.chunks(2).map(|c| Interval::new(q(c[0], den), q(c[1], den))).collect();
            let atoms =
                f.measure.atoms().iter().filter(|_| rng.gen_bool(0.5)).map(|a| a.location.clone()).collect();
            FiberSlice::new(intervals, atoms).expect("grid intervals are well formed")
        })
        .collect();
    EventSet::new(space, slices).expect("picks come from the fiber atoms")
}

/// A random event set with positive measure. Falls back to the whole space
/// after a few empty draws.
pub fn random_positive_event_set<R: Rng>(rng: &mut R, space: &FiberedSpace<Rational>) -> EventSet<Rational> {
    for _ in 0..16 {
        let set = random_event_set(rng, space);
        if space.measure(&set).expect("same fiber count").strictly_positive() {
            return set;
        }
    }
    EventSet::full(space)
}

/// Coefficients in `[0, 1]`, with 0 and 1 drawn now and then.
pub fn random_coefficients<R: Rng>(rng: &mut R, fibers: usize) -> FiberFunction<Rational> {
    FiberFunction::new(
        (0..fibers)
            .map(|_| match rng.gen_range(0..10) {
                0 => Rational::zero(),
                1 => Rational::one(),
                _ => {
                    let den = rng.gen_range(2..=97);
                    q(rng.gen_range(1..den), den)
                }
            })
            .collect(),
    )
}

/// Strictly positive weights summing to 1.
pub fn random_weights<R: Rng>(rng: &mut R, count: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=9)).collect();
    normalize(&raw)
}

/// A family of measures sharing one fiber structure: fiber weights are drawn
/// per measure, fiber measures independently, so densities differ across
/// measures and some cells are null for some measures.
pub fn random_family<R: Rng>(rng: &mut R, params: &GenParams) -> FamilySpec<Rational> {
    let p = params.clamped();
    let fibers = rng.gen_range(1..=p.max_fibers);
    let measures = rng.gen_range(1..=p.max_measures);
    let spaces = (0..measures)
        .map(|_| {
            let raw: Vec<i64> = (0..fibers).map(|_| rng.gen_range(1..=9)).collect();
            let fs = normalize(&raw).into_iter().map(|w| (w, random_measure(rng, &p))).collect();
            FiberedSpace::new(fs).expect("generated spaces are normalized")
        })
        .collect();
    FamilySpec { spaces, weights: random_weights(rng, measures) }
}

/// A complete scenario: a space, sets `A` and `C`, coefficients `h`, a
/// measure family and parameters, all determined by `seed`.
pub fn generate_instance(seed: u64, params: &GenParams) -> Scenario {
    let mut rng = rng(seed);
    let space = random_space(&mut rng, params);
    let mut sets = BTreeMap::new();
    sets.insert("A".to_string(), random_positive_event_set(&mut rng, &space));
    sets.insert("C".to_string(), random_event_set(&mut rng, &space));
    let h = random_coefficients(&mut rng, space.len());
    let measures = random_family(&mut rng, params);
    let scenario_params = Params {
        depth: Some(rng.gen_range(1..=6)),
        n: Some(rng.gen_range(1..=10)),
        seed: Some(seed),
        ..Params::default()
    };
    Scenario { space, sets, h: Some(h), measures: Some(measures), params: scenario_params }
}
