//! The fibered probability space.
//!
//! A [`FiberedSpace`] is a finite list of fibers `(p_i, mu_i)`. The fiber
//! index generates the coarse algebra, so a coarse-measurable function is one
//! value per fiber ([`FiberFunction`]). Each `mu_i` is a probability on the
//! fiber's sample space (atom sites plus a piecewise-constant density on
//! `[0, 1)`), and the map `i -> mu_i` is the conditional probability kernel:
//! the conditional expectation of an indicator is its per-fiber mass.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::event::{EventSet, FiberSlice, Interval};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Atom<T> {
    pub location: T,
    pub weight: T,
}

/// A probability measure on one fiber: point masses plus a density that is
/// constant on each `[x_{j-1}, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberMeasure<T> {
    atoms: Vec<Atom<T>>,
    breakpoints: Vec<T>,
    densities: Vec<T>,
}

impl<T: Scalar> FiberMeasure<T> {
    pub fn new(atoms: Vec<Atom<T>>, breakpoints: Vec<T>, densities: Vec<T>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidMeasure(msg));
        if breakpoints.len() < 2 {
            return bad("at least two breakpoints are required".into());
        }
        if !breakpoints[0].is_zero() || !breakpoints[breakpoints.len() - 1].is_one() {
            return bad(format!(
                "breakpoints must run from 0 to 1, found {} to {}",
                breakpoints[0],
                breakpoints[breakpoints.len() - 1]
            ));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return bad(format!("breakpoints not strictly increasing at {} then {}", w[0], w[1]));
        }
        if densities.len() != breakpoints.len() - 1 {
            return bad(format!("{} densities for {} pieces", densities.len(), breakpoints.len() - 1));
        }
        if let Some(d) = densities.iter().find(|d| d.strictly_negative()) {
            return bad(format!("negative density {d}"));
        }
        for atom in &atoms {
            if !scalar::in_unit_interval(&atom.location) {
                return bad(format!("atom location {} outside [0, 1]", atom.location));
            }
            if !atom.weight.strictly_positive() {
                return bad(format!("atom at {} has non-positive weight {}", atom.location, atom.weight));
            }
        }
        if let Some(w) = atoms.windows(2).find(|w| w[0].location >= w[1].location) {
            return bad(format!(
                "atom locations not strictly increasing at {} then {}",
                w[0].location, w[1].location
            ));
        }
        let measure = FiberMeasure { atoms, breakpoints, densities };
        let total = measure.total_mass();
        if !total.same(&T::one()) {
            return bad(format!("total mass is {total}, expected 1"));
        }
        Ok(measure)
    }

    /// Lebesgue measure on `[0, 1)`.
    pub fn lebesgue() -> Self {
        FiberMeasure { atoms: Vec::new(), breakpoints: vec![T::zero(), T::one()], densities: vec![T::one()] }
    }

    /// Uniform probability on `[lo, hi)`.
    pub fn uniform_on(lo: T, hi: T) -> Result<Self> {
        let density = T::one() / (hi.clone() - lo.clone());
        let mut breakpoints = vec![T::zero()];
        let mut densities = Vec::new();
        if lo.strictly_positive() {
            breakpoints.push(lo);
            densities.push(T::zero());
        }
        densities.push(density);
        if hi < T::one() {
            breakpoints.push(hi);
            densities.push(T::zero());
        }
        breakpoints.push(T::one());
        FiberMeasure::new(Vec::new(), breakpoints, densities)
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[T] {
        &self.densities
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    /// Constant-density pieces as `(lo, hi, density)`.
    pub fn pieces(&self) -> impl Iterator<Item = (&T, &T, &T)> + '_ {
        self.breakpoints.windows(2).zip(&self.densities).map(|(w, d)| (&w[0], &w[1], d))
    }

    pub fn density_at(&self, x: &T) -> T {
        let idx = self.breakpoints.partition_point(|b| b <= x);
        if idx == 0 || idx > self.densities.len() {
            T::zero()
        } else {
            self.densities[idx - 1].clone()
        }
    }

    pub fn atom_weight(&self, location: &T) -> Option<&T> {
        self.atoms
            .binary_search_by(|a| scalar::cmp(&a.location, location))
            .ok()
            .map(|i| &self.atoms[i].weight)
    }

    pub fn total_mass(&self) -> T {
        let atoms = self.atoms.iter().fold(T::zero(), |acc, a| acc + a.weight.clone());
        self.pieces().fold(atoms, |acc, (lo, hi, d)| acc + d.clone() * (hi.clone() - lo.clone()))
    }

    pub fn atom_mass(&self) -> T {
        self.atoms.iter().fold(T::zero(), |acc, a| acc + a.weight.clone())
    }

    /// Diffuse mass of one interval.
    pub fn interval_mass(&self, iv: &Interval<T>) -> T {
        let mut total = T::zero();
        for (lo, hi, d) in self.pieces() {
            if *hi <= iv.lo {
                continue;
            }
            if *lo >= iv.hi {
                break;
            }
            if d.is_zero() {
                continue;
            }
            let a = scalar::max(lo, &iv.lo);
            let b = scalar::min(hi, &iv.hi);
            total = total + d.clone() * (b - a);
        }
        total
    }

    pub fn diffuse_mass(&self, intervals: &[Interval<T>]) -> T {
        intervals.iter().fold(T::zero(), |acc, iv| acc + self.interval_mass(iv))
    }

    /// Mass of a slice: picked atom weights plus diffuse mass of its intervals.
    /// Picks that are not atoms of this measure carry no mass.
    pub fn mass(&self, slice: &FiberSlice<T>) -> T {
        let picked = slice
            .atoms()
            .iter()
            .filter_map(|loc| self.atom_weight(loc))
            .fold(T::zero(), |acc, w| acc + w.clone());
        picked + self.diffuse_mass(slice.intervals())
    }

    /// Diffuse distribution function `x -> mu([0, x))`.
    pub fn cdf(&self, x: &T) -> T {
        if *x <= T::zero() {
            return T::zero();
        }
        self.interval_mass(&Interval::new(T::zero(), x.clone()))
    }

    /// Shortest left prefix of `intervals` whose diffuse mass equals `target`.
    ///
    /// Intervals are swept left to right; the cut lands at the first point
    /// where the accumulated mass reaches `target`, solving `d * (x - lo) =
    /// remaining` inside the constant-density piece where that happens. If
    /// `target` exceeds the available mass, all intervals are returned.
    pub fn left_fill(&self, intervals: &[Interval<T>], target: &T) -> Vec<Interval<T>> {
        let mut remaining = target.clone();
        let mut out = Vec::new();
        if !remaining.strictly_positive() {
            return out;
        }
        for iv in intervals {
            for (lo, hi, d) in self.pieces() {
                if *hi <= iv.lo || d.is_zero() {
                    continue;
                }
                if *lo >= iv.hi {
                    break;
                }
                let a = scalar::max(lo, &iv.lo);
                let b = scalar::min(hi, &iv.hi);
                let mass = d.clone() * (b - a.clone());
                if mass >= remaining {
                    let cut = a + remaining / d.clone();
                    out.push(Interval::new(iv.lo.clone(), cut));
                    return out;
                }
                remaining = remaining - mass;
            }
            out.push(iv.clone());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fiber<T> {
    pub weight: T,
    pub measure: FiberMeasure<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberedSpace<T> {
    fibers: Vec<Fiber<T>>,
}

impl<T: Scalar> FiberedSpace<T> {
    pub fn new(fibers: Vec<(T, FiberMeasure<T>)>) -> Result<Self> {
        if fibers.is_empty() {
            return Err(Error::InvalidSpace("at least one fiber is required".into()));
        }
        if let Some((i, (w, _))) = fibers.iter().enumerate().find(|(_, (w, _))| !w.strictly_positive()) {
            return Err(Error::InvalidSpace(format!("fiber {i} has non-positive weight {w}")));
        }
        let total = fibers.iter().fold(T::zero(), |acc, (w, _)| acc + w.clone());
        if !total.same(&T::one()) {
            return Err(Error::InvalidSpace(format!("fiber weights sum to {total}, expected 1")));
        }
        Ok(FiberedSpace {
            fibers: fibers.into_iter().map(|(weight, measure)| Fiber { weight, measure }).collect(),
        })
    }

    /// One fiber carrying `measure`.
    pub fn single(measure: FiberMeasure<T>) -> Self {
        FiberedSpace { fibers: vec![Fiber { weight: T::one(), measure }] }
    }

    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    pub fn fibers(&self) -> &[Fiber<T>] {
        &self.fibers
    }

    pub fn fiber_weight(&self, i: usize) -> &T {
        &self.fibers[i].weight
    }

    pub fn fiber_measure(&self, i: usize) -> &FiberMeasure<T> {
        &self.fibers[i].measure
    }

    /// `P[A] = sum_i p_i mu_i(A_i)`.
    pub fn measure(&self, set: &EventSet<T>) -> Result<T> {
        let ce = self.cond_expectation(set)?;
        Ok(self.expectation(&ce))
    }

    /// `E[1_A | fibers]`: the value on fiber `i` is `mu_i(A_i)`.
    pub fn cond_expectation(&self, set: &EventSet<T>) -> Result<FiberFunction<T>> {
        self.check_fibers(set.fiber_count())?;
        Ok(FiberFunction::new(
            self.fibers.iter().zip(set.slices()).map(|(f, slice)| f.measure.mass(slice)).collect(),
        ))
    }

    /// Integral of a coarse-measurable function: `sum_i p_i f_i`.
    pub fn expectation(&self, f: &FiberFunction<T>) -> T {
        self.fibers
            .iter()
            .zip(f.values())
            .fold(T::zero(), |acc, (fiber, v)| acc + fiber.weight.clone() * v.clone())
    }

    pub(crate) fn check_fibers(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::FiberCountMismatch { expected: self.len(), found });
        }
        Ok(())
    }
}

/// A coarse-measurable simple function: one value per fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberFunction<T>(Vec<T>);

impl<T: Scalar> FiberFunction<T> {
    pub fn new(values: Vec<T>) -> Self {
        FiberFunction(values)
    }

    pub fn constant(fibers: usize, value: T) -> Self {
        FiberFunction(vec![value; fibers])
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &Self) -> Self {
        FiberFunction(self.0.iter().zip(&other.0).map(|(a, b)| a.clone() * b.clone()).collect())
    }

    /// Indices where the value is strictly positive.
    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, v)| v.strictly_positive()).map(|(i, _)| i).collect()
    }

    pub fn into_values(self) -> Vec<T> {
        self.0
    }
}

impl<T> Index<usize> for FiberFunction<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}
