//! The conditional kernel `i -> mu_i` viewed directly: per-fiber atom
//! enumeration, and verification that `U` is uniform under every `mu_i`
//! against a finite family of piecewise-linear test functions.
//!
//! For piecewise-linear `u_i` and piecewise-constant densities, hat functions
//! at every breakpoint of the composed system determine the pushforward
//! exactly, so a finite family replaces a dense sequence of test functions.

use crate::error::{Error, Result};
use crate::measure::{Atom, FiberMeasure, FiberedSpace};
use crate::piecewise::{merged_breakpoints, PiecewiseLinear};
use crate::scalar::{self, Scalar};
use crate::uniform::UniformRV;

/// Atoms of each `mu_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport<T> {
    pub atoms: Vec<Vec<Atom<T>>>,
}

impl<T> KernelReport<T> {
    pub fn is_atomless(&self) -> bool {
        self.atoms.iter().all(Vec::is_empty)
    }
}

pub fn kernel_atom_scan<T: Scalar>(space: &FiberedSpace<T>) -> KernelReport<T> {
    KernelReport {
        atoms: space
            .fibers()
            .iter()
            .map(|f| f.measure.atoms().iter().filter(|a| a.weight.strictly_positive()).cloned().collect())
            .collect(),
    }
}

/// A piecewise-linear function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction<T>(PiecewiseLinear<T>);

impl<T: Scalar> TestFunction<T> {
    pub fn new(function: PiecewiseLinear<T>) -> Result<Self> {
        let (lo, hi) = function.domain();
        if !lo.is_zero() || !hi.is_one() {
            return Err(Error::Precondition(format!(
                "test function domain must be [0, 1], found [{lo}, {hi}]"
            )));
        }
        Ok(TestFunction(function))
    }

    pub fn function(&self) -> &PiecewiseLinear<T> {
        &self.0
    }
}

/// One hat per point of `points ∪ {0, 1}`.
pub fn hat_family<T: Scalar>(points: &[T]) -> Vec<TestFunction<T>> {
    let mut grid: Vec<T> = points.iter().filter(|p| scalar::in_unit_interval(*p)).cloned().collect();
    grid.push(T::zero());
    grid.push(T::one());
    scalar::sort_dedup(&mut grid);
    (0..grid.len()).map(|j| TestFunction(PiecewiseLinear::hat(&grid, j))).collect()
}

/// Every value taken by some `u_i` at one of its breakpoints.
pub fn system_breakpoints<T: Scalar>(uniform: &UniformRV<T>) -> Vec<T> {
    let mut values = merged_breakpoints(uniform.maps().iter().map(|u| u.values()));
    values.push(T::zero());
    values.push(T::one());
    scalar::sort_dedup(&mut values);
    values
}

/// `∫ g(u(y)) mu(dy)`, exactly.
///
/// The domain is refined at the density breakpoints, the breakpoints of `u`
/// and the preimages under `u` of the breakpoints of `g`; on each refined
/// piece the density is constant and `g ∘ u` is linear, so the trapezoid rule
/// is exact.
pub fn pushforward_integral<T: Scalar>(
    mu: &FiberMeasure<T>,
    u: &PiecewiseLinear<T>,
    g: &PiecewiseLinear<T>,
) -> T {
    let mut points = merged_breakpoints([mu.breakpoints(), u.breakpoints()]);
    for c in g.breakpoints() {
        points.extend(u.preimages(c));
    }
    scalar::sort_dedup(&mut points);
    let two = T::from_int(2);
    let mut total =
        mu.atoms().iter().fold(T::zero(), |acc, a| acc + a.weight.clone() * g.eval(&u.eval(&a.location)));
    for w in points.windows(2) {
        let d = mu.density_at(&w[0]);
        if d.is_zero() {
            continue;
        }
        let ends = g.eval(&u.eval(&w[0])) + g.eval(&u.eval(&w[1]));
        total = total + d * (w[1].clone() - w[0].clone()) * ends / two.clone();
    }
    total
}

/// Residuals `∫ g(u_i) dmu_i − ∫_0^1 g(t) dt`, indexed `[fiber][test]`.
pub fn pushforward_uniformity_check<T: Scalar>(
    space: &FiberedSpace<T>,
    uniform: &UniformRV<T>,
    tests: &[TestFunction<T>],
) -> Result<Vec<Vec<T>>> {
    space.check_fibers(uniform.fiber_count())?;
    let lebesgue: Vec<T> = tests.iter().map(|g| g.0.integral()).collect();
    Ok(space
        .fibers()
        .iter()
        .zip(uniform.maps())
        .map(|(f, u)| {
            tests
                .iter()
                .zip(&lebesgue)
                .map(|(g, reference)| pushforward_integral(&f.measure, u, &g.0) - reference.clone())
                .collect()
        })
        .collect())
}
