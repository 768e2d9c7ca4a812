//! Events of the fine algebra: per fiber, a finite union of half-open
//! intervals of `[0, 1)` carrying diffuse mass, plus a set of picked atom
//! sites.
//!
//! Atom sites are separate sample points: an interval `[a, b)` never picks up
//! an atom located in `[a, b)`, only an explicit pick does. Intervals are kept
//! in canonical form (sorted, disjoint, non-empty, adjacent pieces merged), so
//! structural equality is set equality.

use std::fmt;

use crate::error::{Error, Result};
use crate::measure::FiberedSpace;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Interval { lo, hi }
    }

    pub fn unit() -> Self {
        Interval::new(T::zero(), T::one())
    }

    pub fn contains(&self, x: &T) -> bool {
        self.lo <= *x && *x < self.hi
    }

    pub fn length(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }
}

impl<T: fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

/// The part of an event living on one fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSlice<T> {
    intervals: Vec<Interval<T>>,
    atoms: Vec<T>,
}

impl<T: Scalar> FiberSlice<T> {
    /// Builds a canonical slice. Overlapping or touching intervals are merged;
    /// empty or reversed intervals and endpoints outside `[0, 1]` are rejected.
    pub fn new(intervals: Vec<Interval<T>>, atoms: Vec<T>) -> Result<Self> {
        for iv in &intervals {
            if !(scalar::in_unit_interval(&iv.lo) && scalar::in_unit_interval(&iv.hi)) {
                return Err(Error::InvalidEventSet(format!("interval {iv} is not inside [0, 1]")));
            }
            if iv.lo >= iv.hi {
                return Err(Error::InvalidEventSet(format!("interval {iv} is empty")));
            }
        }
        let mut sorted = intervals;
        sorted.sort_by(|a, b| scalar::cmp(&a.lo, &b.lo));
        let mut merged: Vec<Interval<T>> = Vec::with_capacity(sorted.len());
        for iv in sorted {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        let mut atoms = atoms;
        scalar::sort_dedup(&mut atoms);
        Ok(FiberSlice { intervals: merged, atoms })
    }

    pub fn empty() -> Self {
        FiberSlice { intervals: Vec::new(), atoms: Vec::new() }
    }

    /// Trusted constructor for sweep output, which is canonical already.
    pub(crate) fn from_canonical(intervals: Vec<Interval<T>>, atoms: Vec<T>) -> Self {
        debug_assert!(intervals.windows(2).all(|w| w[0].hi < w[1].lo));
        FiberSlice { intervals, atoms }
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.atoms.is_empty()
    }

    pub fn contains_point(&self, x: &T) -> bool {
        covers(&self.intervals, x)
    }

    pub fn picks_atom(&self, location: &T) -> bool {
        self.atoms.binary_search_by(|a| scalar::cmp(a, location)).is_ok()
    }
}

/// Binary search for the interval containing `x`.
fn covers<T: Scalar>(intervals: &[Interval<T>], x: &T) -> bool {
    let idx = intervals.partition_point(|iv| iv.lo <= *x);
    idx > 0 && *x < intervals[idx - 1].hi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Difference,
}

impl SetOp {
    fn keep(self, in_a: bool, in_b: bool) -> bool {
        match self {
            SetOp::Union => in_a || in_b,
            SetOp::Intersect => in_a && in_b,
            SetOp::Difference => in_a && !in_b,
        }
    }
}

/// Endpoint sweep: every elementary segment between consecutive endpoints is
/// either entirely inside or entirely outside each operand, and membership of
/// a half-open segment is decided by its left endpoint.
fn sweep<T: Scalar>(op: SetOp, a: &[Interval<T>], b: &[Interval<T>]) -> Vec<Interval<T>> {
    let mut points: Vec<T> = a.iter().chain(b).flat_map(|iv| [iv.lo.clone(), iv.hi.clone()]).collect();
    scalar::sort_dedup(&mut points);
    let mut out: Vec<Interval<T>> = Vec::new();
    for w in points.windows(2) {
        if !op.keep(covers(a, &w[0]), covers(b, &w[0])) {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.hi == w[0] => last.hi = w[1].clone(),
            _ => out.push(Interval::new(w[0].clone(), w[1].clone())),
        }
    }
    out
}

fn merge_atoms<T: Scalar>(op: SetOp, a: &[T], b: &[T]) -> Vec<T> {
    let in_b = |x: &T| b.binary_search_by(|y| scalar::cmp(y, x)).is_ok();
    let in_a = |x: &T| a.binary_search_by(|y| scalar::cmp(y, x)).is_ok();
    let mut out: Vec<T> = match op {
        SetOp::Union => a.iter().chain(b).cloned().collect(),
        SetOp::Intersect => a.iter().filter(|x| in_b(x)).cloned().collect(),
        SetOp::Difference => a.iter().filter(|x| !in_b(x)).cloned().collect(),
    };
    if op == SetOp::Union {
        scalar::sort_dedup(&mut out);
    }
    debug_assert!(op != SetOp::Intersect || out.iter().all(in_a));
    out
}

/// A measurable set of the fine algebra, one [`FiberSlice`] per fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSet<T> {
    slices: Vec<FiberSlice<T>>,
}

impl<T: Scalar> EventSet<T> {
    /// Validates the slices against `space`: one slice per fiber, every
    /// picked atom is an atom of that fiber's measure.
    pub fn new(space: &FiberedSpace<T>, slices: Vec<FiberSlice<T>>) -> Result<Self> {
        if slices.len() != space.len() {
            return Err(Error::FiberCountMismatch { expected: space.len(), found: slices.len() });
        }
        for (i, slice) in slices.iter().enumerate() {
            let measure = space.fiber_measure(i);
            if let Some(bad) = slice.atoms.iter().find(|loc| measure.atom_weight(loc).is_none()) {
                return Err(Error::InvalidEventSet(format!(
                    "fiber {i}: picked location {bad} is not an atom of the fiber measure"
                )));
            }
        }
        Ok(EventSet { slices })
    }

    pub fn empty(fibers: usize) -> Self {
        EventSet { slices: vec![FiberSlice::empty(); fibers] }
    }

    /// The whole sample space: `[0, 1)` and every atom site on every fiber.
    pub fn full(space: &FiberedSpace<T>) -> Self {
        let slices = space
            .fibers()
            .iter()
            .map(|f| {
                let atoms = f.measure.atoms().iter().map(|a| a.location.clone()).collect();
                FiberSlice::from_canonical(vec![Interval::unit()], atoms)
            })
            .collect();
        EventSet { slices }
    }

    pub(crate) fn from_slices(slices: Vec<FiberSlice<T>>) -> Self {
        EventSet { slices }
    }

    pub fn fiber_count(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[FiberSlice<T>] {
        &self.slices
    }

    pub fn slice(&self, fiber: usize) -> &FiberSlice<T> {
        &self.slices[fiber]
    }

    pub fn is_empty(&self) -> bool {
        self.slices.iter().all(FiberSlice::is_empty)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        combine(SetOp::Union, self, other)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        combine(SetOp::Intersect, self, other)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        combine(SetOp::Difference, self, other)
    }

    pub fn is_subset_of(&self, other: &Self) -> Result<bool> {
        is_subset(self, other)
    }
}

pub fn combine<T: Scalar>(op: SetOp, a: &EventSet<T>, b: &EventSet<T>) -> Result<EventSet<T>> {
    check_same_shape(a, b)?;
    let slices = a
        .slices
        .iter()
        .zip(&b.slices)
        .map(|(sa, sb)| {
            FiberSlice::from_canonical(
                sweep(op, &sa.intervals, &sb.intervals),
                merge_atoms(op, &sa.atoms, &sb.atoms),
            )
        })
        .collect();
    Ok(EventSet { slices })
}

pub fn is_subset<T: Scalar>(a: &EventSet<T>, b: &EventSet<T>) -> Result<bool> {
    Ok(combine(SetOp::Difference, a, b)?.is_empty())
}

fn check_same_shape<T>(a: &EventSet<T>, b: &EventSet<T>) -> Result<()> {
    if a.slices.len() != b.slices.len() {
        return Err(Error::FiberCountMismatch { expected: a.slices.len(), found: b.slices.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{FiberMeasure, FiberedSpace};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn iv(a: (i64, i64), b: (i64, i64)) -> Interval<Rational> {
        Interval::new(q(a.0, a.1), q(b.0, b.1))
    }

    fn single(intervals: Vec<Interval<Rational>>) -> EventSet<Rational> {
        EventSet::from_slices(vec![FiberSlice::new(intervals, vec![]).unwrap()])
    }

    #[test]
    fn union_with_empty_is_identity() {
        let a = single(vec![iv((1, 5), (2, 5)), iv((3, 4), (1, 1))]);
        assert_eq!(EventSet::empty(1).union(&a).unwrap(), a);
    }

    #[test]
    fn intersect_overlap() {
        let a = single(vec![iv((0, 1), (1, 2))]);
        let b = single(vec![iv((1, 4), (3, 4))]);
        assert_eq!(a.intersect(&b).unwrap(), single(vec![iv((1, 4), (1, 2))]));
    }

    #[test]
    fn difference_punches_hole() {
        let a = single(vec![iv((0, 1), (1, 1))]);
        let b = single(vec![iv((1, 3), (2, 3))]);
        assert_eq!(a.difference(&b).unwrap(), single(vec![iv((0, 1), (1, 3)), iv((2, 3), (1, 1))]));
    }

    #[test]
    fn adjacent_pieces_merge() {
        let a = single(vec![iv((0, 1), (1, 3))]);
        let b = single(vec![iv((1, 3), (1, 2))]);
        assert_eq!(a.union(&b).unwrap(), single(vec![iv((0, 1), (1, 2))]));
        let built = FiberSlice::new(vec![iv((1, 3), (1, 2)), iv((0, 1), (1, 3))], vec![]).unwrap();
        assert_eq!(built.intervals(), &[iv((0, 1), (1, 2))]);
    }

    #[test]
    fn subset_cases() {
        let half = single(vec![iv((0, 1), (1, 2))]);
        let unit = single(vec![iv((0, 1), (1, 1))]);
        let right = single(vec![iv((1, 4), (1, 1))]);
        assert!(EventSet::empty(1).is_subset_of(&half).unwrap());
        assert!(half.is_subset_of(&unit).unwrap());
        assert!(!half.is_subset_of(&right).unwrap());
    }

    #[test]
    fn atom_picks_follow_set_algebra() {
        let a = EventSet::from_slices(vec![FiberSlice::new(vec![], vec![q(1, 4), q(1, 2)]).unwrap()]);
        let b = EventSet::from_slices(vec![FiberSlice::new(vec![], vec![q(1, 2)]).unwrap()]);
        assert_eq!(a.difference(&b).unwrap().slice(0).atoms(), &[q(1, 4)]);
        assert_eq!(a.intersect(&b).unwrap().slice(0).atoms(), &[q(1, 2)]);
        assert!(b.is_subset_of(&a).unwrap());
        assert!(!a.is_subset_of(&b).unwrap());
    }

    #[test]
    fn interval_does_not_cover_atom_pick() {
        let intervals = single(vec![iv((0, 1), (1, 1))]);
        let atom = EventSet::from_slices(vec![FiberSlice::new(vec![], vec![q(1, 2)]).unwrap()]);
        assert!(!atom.is_subset_of(&intervals).unwrap());
    }

    #[test]
    fn fiber_count_mismatch_is_an_error() {
        let err = EventSet::<Rational>::empty(1).union(&EventSet::empty(2)).unwrap_err();
        assert_eq!(err, Error::FiberCountMismatch { expected: 1, found: 2 });
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(FiberSlice::new(vec![iv((1, 2), (1, 2))], vec![]).is_err());
        assert!(FiberSlice::new(vec![iv((1, 2), (3, 2))], vec![]).is_err());
        assert!(FiberSlice::new(vec![iv((2, 3), (1, 3))], vec![]).is_err());
    }

    #[test]
    fn picks_must_be_atoms_of_the_fiber() {
        let space = FiberedSpace::new(vec![(q(1, 1), FiberMeasure::lebesgue())]).unwrap();
        let slice = FiberSlice::new(vec![], vec![q(1, 2)]).unwrap();
        assert!(matches!(EventSet::new(&space, vec![slice]), Err(Error::InvalidEventSet(_))));
    }
}
