//! Conditional atomlessness and exact conditional splitting.
//!
//! The fine algebra is atomless conditionally to the fibers when every event
//! `A` contains some `B` with `0 < E[1_B | fibers] < E[1_A | fibers]` wherever
//! `E[1_A | fibers] > 0`. In the fibered model this holds exactly when no
//! fiber measure has a point mass, and the constructive side (splitting an
//! event to a prescribed conditional fraction) is a deterministic left-fill
//! sweep, so no choice argument or supremum search is needed.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::event::{EventSet, FiberSlice};
use crate::measure::{FiberFunction, FiberMeasure, FiberedSpace};
use crate::scalar::{self, Scalar};

/// A point mass of positive weight on some fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomWitness<T> {
    pub fiber: usize,
    pub location: T,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AtomlessVerdict<T> {
    Atomless,
    Witness(AtomWitness<T>),
}

impl<T> AtomlessVerdict<T> {
    pub fn is_atomless(&self) -> bool {
        matches!(self, AtomlessVerdict::Atomless)
    }
}

/// A coarse-measurable set, i.e. a set of fiber indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FiberSet(BTreeSet<usize>);

impl FiberSet {
    pub fn new() -> Self {
        FiberSet(BTreeSet::new())
    }

    pub fn all(fibers: usize) -> Self {
        (0..fibers).collect()
    }

    pub fn insert(&mut self, fiber: usize) -> bool {
        self.0.insert(fiber)
    }

    pub fn contains(&self, fiber: usize) -> bool {
        self.0.contains(&fiber)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &FiberSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl FromIterator<usize> for FiberSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        FiberSet(iter.into_iter().collect())
    }
}

impl fmt::Display for FiberSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

pub fn is_conditionally_atomless<T: Scalar>(space: &FiberedSpace<T>) -> AtomlessVerdict<T> {
    for (fiber, f) in space.fibers().iter().enumerate() {
        if let Some(atom) = f.measure.atoms().iter().find(|a| a.weight.strictly_positive()) {
            return AtomlessVerdict::Witness(AtomWitness {
                fiber,
                location: atom.location.clone(),
                weight: atom.weight.clone(),
            });
        }
    }
    AtomlessVerdict::Atomless
}

/// First atom of the space as an obstruction error, if any.
pub(crate) fn require_atomless<T: Scalar>(space: &FiberedSpace<T>) -> Result<()> {
    match is_conditionally_atomless(space) {
        AtomlessVerdict::Atomless => Ok(()),
        AtomlessVerdict::Witness(w) => {
            Err(Error::AtomObstruction { fiber: w.fiber, location: w.location.to_string() })
        }
    }
}

/// A slice splits strictly iff it has positive mass that is not carried by a
/// single atom.
fn slice_splits<T: Scalar>(mu: &FiberMeasure<T>, slice: &FiberSlice<T>) -> bool {
    let diffuse = mu.diffuse_mass(slice.intervals());
    let heavy_picks =
        slice.atoms().iter().filter(|loc| mu.atom_weight(loc).is_some_and(|w| w.strictly_positive())).count();
    diffuse.strictly_positive() || heavy_picks >= 2
}

/// Some `B ⊆ A` together with the exact set of fibers where
/// `0 < E[1_B] < E[1_A]`, or `None` when no fiber slice of `A` splits.
///
/// On a splitting fiber `B` takes the left half of the diffuse mass of the
/// slice when there is any, otherwise the first picked atom.
pub fn strict_split_witness<T: Scalar>(
    space: &FiberedSpace<T>,
    set: &EventSet<T>,
) -> Result<Option<(EventSet<T>, FiberSet)>> {
    space.check_fibers(set.fiber_count())?;
    let mut slices = Vec::with_capacity(space.len());
    for (i, slice) in set.slices().iter().enumerate() {
        let mu = space.fiber_measure(i);
        if !slice_splits(mu, slice) {
            slices.push(FiberSlice::empty());
            continue;
        }
        let diffuse = mu.diffuse_mass(slice.intervals());
        if diffuse.strictly_positive() {
            let half = diffuse * T::half();
            slices.push(FiberSlice::from_canonical(mu.left_fill(slice.intervals(), &half), vec![]));
        } else {
            let first = slice
                .atoms()
                .iter()
                .find(|loc| mu.atom_weight(loc).is_some())
                .cloned()
                .expect("splitting slice without diffuse mass has picked atoms");
            slices.push(FiberSlice::from_canonical(vec![], vec![first]));
        }
    }
    let b = EventSet::from_slices(slices);
    let ce_a = space.cond_expectation(set)?;
    let ce_b = space.cond_expectation(&b)?;
    let strict: FiberSet =
        (0..space.len()).filter(|&i| ce_b[i].strictly_positive() && ce_b[i] < ce_a[i]).collect();
    if strict.is_empty() {
        Ok(None)
    } else {
        Ok(Some((b, strict)))
    }
}

/// The largest coarse set on which `A` admits a strict split: the union of all
/// fibers whose slice of `A` splits.
pub fn maximal_split_region<T: Scalar>(space: &FiberedSpace<T>, set: &EventSet<T>) -> Result<FiberSet> {
    space.check_fibers(set.fiber_count())?;
    Ok(set
        .slices()
        .iter()
        .enumerate()
        .filter(|(i, slice)| slice_splits(space.fiber_measure(*i), slice))
        .map(|(i, _)| i)
        .collect())
}

/// Whether `A` satisfies the splitting condition on all of
/// `{E[1_A | fibers] > 0}`.
pub fn splits_everywhere<T: Scalar>(space: &FiberedSpace<T>, set: &EventSet<T>) -> Result<bool> {
    let region = maximal_split_region(space, set)?;
    let positive: FiberSet = space.cond_expectation(set)?.support().into_iter().collect();
    Ok(region == positive)
}

/// `B ⊆ C` with `E[1_B | fibers] = h * E[1_C | fibers]` exactly.
///
/// Coefficients 0 and 1 give the empty slice and the whole slice. Interior
/// coefficients left-fill the diffuse part of the slice up to the target mass,
/// which requires the slice to pick no atoms.
pub fn split<T: Scalar>(
    space: &FiberedSpace<T>,
    c: &EventSet<T>,
    h: &FiberFunction<T>,
) -> Result<EventSet<T>> {
    space.check_fibers(c.fiber_count())?;
    space.check_fibers(h.len())?;
    if let Some((fiber, value)) = h.values().iter().enumerate().find(|(_, v)| !scalar::in_unit_interval(*v)) {
        return Err(Error::InvalidCoefficient { fiber, value: value.to_string() });
    }
    let mut slices = Vec::with_capacity(space.len());
    for (i, slice) in c.slices().iter().enumerate() {
        let coeff = &h[i];
        if coeff.is_zero() {
            slices.push(FiberSlice::empty());
            continue;
        }
        if coeff.is_one() {
            slices.push(slice.clone());
            continue;
        }
        let mu = space.fiber_measure(i);
        if let Some(loc) = slice.atoms().iter().find(|loc| mu.atom_weight(loc).is_some()) {
            return Err(Error::AtomObstruction { fiber: i, location: loc.to_string() });
        }
        let target = coeff.clone() * mu.diffuse_mass(slice.intervals());
        slices.push(FiberSlice::from_canonical(mu.left_fill(slice.intervals(), &target), vec![]));
    }
    Ok(EventSet::from_slices(slices))
}

/// Decreasing chain `B_0 = C ⊇ B_1 ⊇ ... ⊇ B_n` whose conditional masses on the
/// designated fibers are exactly halved at every step, so that
/// `0 < E[1_{B_k}] <= 2^-k` there. Fibers outside `fibers` keep `C`.
pub fn shrink_sequence<T: Scalar>(
    space: &FiberedSpace<T>,
    c: &EventSet<T>,
    fibers: &FiberSet,
    n: usize,
) -> Result<Vec<EventSet<T>>> {
    space.check_fibers(c.fiber_count())?;
    let ce = space.cond_expectation(c)?;
    for i in fibers.iter() {
        if i >= space.len() {
            return Err(Error::Precondition(format!("fiber {i} does not exist")));
        }
        if !ce[i].strictly_positive() {
            return Err(Error::Precondition(format!("fiber {i} has zero slice mass")));
        }
    }
    let h = FiberFunction::new(
        (0..space.len()).map(|i| if fibers.contains(i) { T::half() } else { T::one() }).collect(),
    );
    let mut chain = Vec::with_capacity(n + 1);
    chain.push(c.clone());
    for _ in 0..n {
        let next = split(space, chain.last().expect("chain is non-empty"), &h)?;
        chain.push(next);
    }
    Ok(chain)
}
