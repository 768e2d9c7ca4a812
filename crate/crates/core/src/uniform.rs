//! Increasing families `(B_t)` with `E[1_{B_t} | fibers] = t` and the uniform
//! variable `U` they define, independent of the fibers.
//!
//! [`build_dyadic_family`] follows the halving construction level by level;
//! [`set_at_level`] and [`build_uniform`] produce the same sets directly from
//! the conditional distribution functions. Both routes cut at the first point
//! where the target mass is reached, so they agree exactly.

use crate::atomless::{require_atomless, split, FiberSet};
use crate::error::{Error, Result};
use crate::event::{EventSet, FiberSlice, Interval};
use crate::measure::{FiberFunction, FiberedSpace};
use crate::piecewise::PiecewiseLinear;
use crate::scalar::{self, Scalar};

/// Sets `B_{k / 2^depth}` for `k = 0..=2^depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicFamily<T> {
    depth: u32,
    sets: Vec<EventSet<T>>,
}

impl<T: Scalar> DyadicFamily<T> {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of stored levels, `2^depth + 1`.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn level(&self, k: usize) -> T {
        T::dyadic(k as u64, self.depth)
    }

    pub fn set(&self, k: usize) -> &EventSet<T> {
        &self.sets[k]
    }

    pub fn sets(&self) -> &[EventSet<T>] {
        &self.sets
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, &EventSet<T>)> + '_ {
        self.sets.iter().enumerate().map(|(k, s)| (self.level(k), s))
    }
}

/// Halving construction: `B_0 = ∅`, `B_1 = Ω`, and at each level the gap
/// `B_{(k+1)/2^n} \ B_{k/2^n}` is split with coefficient 1/2 and the lower
/// half is added to `B_{k/2^n}` to form `B_{(2k+1)/2^{n+1}}`.
pub fn build_dyadic_family<T: Scalar>(space: &FiberedSpace<T>, depth: u32) -> Result<DyadicFamily<T>> {
    require_atomless(space)?;
    let half = FiberFunction::constant(space.len(), T::half());
    let mut sets = vec![EventSet::empty(space.len()), EventSet::full(space)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(2 * sets.len() - 1);
        for k in 0..sets.len() - 1 {
            let gap = sets[k + 1].difference(&sets[k])?;
            let lower = split(space, &gap, &half)?;
            next.push(sets[k].clone());
            next.push(sets[k].union(&lower)?);
        }
        next.push(sets[sets.len() - 1].clone());
        sets = next;
    }
    Ok(DyadicFamily { depth, sets })
}

/// `B_t` for any `t` in `[0, 1]`: per fiber the left prefix of `[0, 1)` of
/// conditional mass exactly `t`.
pub fn set_at_level<T: Scalar>(space: &FiberedSpace<T>, t: &T) -> Result<EventSet<T>> {
    if !scalar::in_unit_interval(t) {
        return Err(Error::InvalidLevel(t.to_string()));
    }
    require_atomless(space)?;
    if t.is_one() {
        return Ok(EventSet::full(space));
    }
    let unit = [Interval::unit()];
    let slices = space
        .fibers()
        .iter()
        .map(|f| FiberSlice::from_canonical(f.measure.left_fill(&unit, t), vec![]))
        .collect();
    Ok(EventSet::from_slices(slices))
}

/// The uniform variable as one nondecreasing piecewise-linear map per fiber,
/// `u_i(y) = mu_i([0, y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformRV<T> {
    maps: Vec<PiecewiseLinear<T>>,
}

impl<T: Scalar> UniformRV<T> {
    pub fn maps(&self) -> &[PiecewiseLinear<T>] {
        &self.maps
    }

    pub fn map(&self, fiber: usize) -> &PiecewiseLinear<T> {
        &self.maps[fiber]
    }

    pub fn fiber_count(&self) -> usize {
        self.maps.len()
    }

    pub fn eval(&self, fiber: usize, y: &T) -> T {
        self.maps[fiber].eval(y)
    }

    /// `{U < t}`: per fiber `[0, y*)` with `y* = inf { y : u_i(y) >= t }`.
    pub fn sublevel_set(&self, t: &T) -> Result<EventSet<T>> {
        if !scalar::in_unit_interval(t) {
            return Err(Error::InvalidLevel(t.to_string()));
        }
        let slices = self
            .maps
            .iter()
            .map(|u| {
                let cut = u.first_reach(t);
                let intervals =
                    if cut.strictly_positive() { vec![Interval::new(T::zero(), cut)] } else { vec![] };
                FiberSlice::from_canonical(intervals, vec![])
            })
            .collect();
        Ok(EventSet::from_slices(slices))
    }
}

pub fn build_uniform<T: Scalar>(space: &FiberedSpace<T>) -> Result<UniformRV<T>> {
    require_atomless(space)?;
    let maps = space
        .fibers()
        .iter()
        .map(|f| {
            let xs = f.measure.breakpoints().to_vec();
            let mut ys = Vec::with_capacity(xs.len());
            let mut acc = T::zero();
            ys.push(acc.clone());
            for (lo, hi, d) in f.measure.pieces() {
                acc = acc + d.clone() * (hi.clone() - lo.clone());
                ys.push(acc.clone());
            }
            PiecewiseLinear::new(xs, ys)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UniformRV { maps })
}

/// One fiber of a staircase: constant pieces `(interval, value)`.
pub type Staircase<T> = Vec<(Interval<T>, T)>;

/// The staircase approximant `U_n = sum_k k 2^-n 1_{B_k \ B_{k-1}}` of a
/// family, per fiber as `(interval, value)` pieces.
pub fn staircase<T: Scalar>(family: &DyadicFamily<T>) -> Result<Vec<Staircase<T>>> {
    let fibers = family.set(0).fiber_count();
    let mut out = vec![Vec::new(); fibers];
    for k in 1..family.len() {
        let step = family.set(k).difference(family.set(k - 1))?;
        let value = family.level(k);
        for (i, slice) in step.slices().iter().enumerate() {
            out[i].extend(slice.intervals().iter().map(|iv| (iv.clone(), value.clone())));
        }
    }
    Ok(out)
}

/// Whether `U <= U_n <= U + 2^-n` on every staircase piece. Since `u_i` is
/// continuous and nondecreasing it suffices to check the piece endpoints.
pub fn staircase_within_bound<T: Scalar>(uniform: &UniformRV<T>, family: &DyadicFamily<T>) -> Result<bool> {
    let step = T::dyadic(1, family.depth());
    for (i, pieces) in staircase(family)?.iter().enumerate() {
        let u = uniform.map(i);
        for (iv, value) in pieces {
            let lower = value.clone() - step.clone();
            if u.eval(&iv.lo) < lower || u.eval(&iv.hi) > *value {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `g_i(t) = mu_i(A_i ∩ B_t)` as an exact piecewise-linear function of `t`.
///
/// Pushed through `u_i`, `mu_i` becomes Lebesgue measure, so `g_i` has slope
/// 0 or 1 between the images of the interval endpoints of `A_i`.
pub fn level_profile<T: Scalar>(
    space: &FiberedSpace<T>,
    set: &EventSet<T>,
    fiber: usize,
) -> Result<PiecewiseLinear<T>> {
    let uniform = build_uniform(space)?;
    profile_with(&uniform, space, set, fiber)
}

fn profile_with<T: Scalar>(
    uniform: &UniformRV<T>,
    space: &FiberedSpace<T>,
    set: &EventSet<T>,
    fiber: usize,
) -> Result<PiecewiseLinear<T>> {
    space.check_fibers(set.fiber_count())?;
    let u = uniform.map(fiber);
    let mu = space.fiber_measure(fiber);
    let slice = set.slice(fiber);
    let mut ts = vec![T::zero(), T::one()];
    for iv in slice.intervals() {
        ts.push(u.eval(&iv.lo));
        ts.push(u.eval(&iv.hi));
    }
    scalar::sort_dedup(&mut ts);
    let gs = ts
        .iter()
        .map(|t| {
            let cut = u.first_reach(t);
            slice.intervals().iter().filter(|iv| iv.lo < cut).fold(T::zero(), |acc, iv| {
                acc + mu.interval_mass(&Interval::new(iv.lo.clone(), scalar::min(&iv.hi, &cut)))
            })
        })
        .collect();
    PiecewiseLinear::new(ts, gs)
}

/// A level `t` and the fibers on which `0 < E[1_{A ∩ B_t}] < E[1_A]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelScan<T> {
    pub level: T,
    pub fibers: FiberSet,
}

/// Finds `t` in `(0, 1)` at which `A ∩ B_t` strictly splits `A` on some fiber.
///
/// Candidate levels are the midpoints of consecutive breakpoints of all
/// profiles `g_i`; the first midpoint with a non-empty strict sandwich is
/// returned. `None` iff `E[1_A | fibers]` vanishes everywhere.
pub fn intermediate_level_scan<T: Scalar>(
    space: &FiberedSpace<T>,
    set: &EventSet<T>,
) -> Result<Option<LevelScan<T>>> {
    let uniform = build_uniform(space)?;
    let ce = space.cond_expectation(set)?;
    if ce.support().is_empty() {
        return Ok(None);
    }
    let mut levels = Vec::new();
    for i in 0..space.len() {
        levels.extend(profile_with(&uniform, space, set, i)?.breakpoints().iter().cloned());
    }
    scalar::sort_dedup(&mut levels);
    for w in levels.windows(2) {
        let mid = (w[0].clone() + w[1].clone()) * T::half();
        let inner = space.cond_expectation(&set.intersect(&set_at_level(space, &mid)?)?)?;
        let fibers: FiberSet =
            (0..space.len()).filter(|&i| inner[i].strictly_positive() && inner[i] < ce[i]).collect();
        if !fibers.is_empty() {
            return Ok(Some(LevelScan { level: mid, fibers }));
        }
    }
    Ok(None)
}
