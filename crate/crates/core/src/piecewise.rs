//! Continuous piecewise-linear functions with exact breakpoints.

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// A continuous piecewise-linear function given by its vertices
/// `(xs[j], ys[j])`, with `xs` strictly increasing. Outside `[xs[0], xs[n-1]]`
/// it is extended by the end values.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear<T> {
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Scalar> PiecewiseLinear<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::Precondition(format!(
                "piecewise-linear function needs matching vertex lists of length >= 2, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if let Some(w) = xs.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Precondition(format!(
                "breakpoints not strictly increasing at {} then {}",
                w[0], w[1]
            )));
        }
        Ok(PiecewiseLinear { xs, ys })
    }

    pub fn identity() -> Self {
        PiecewiseLinear { xs: vec![T::zero(), T::one()], ys: vec![T::zero(), T::one()] }
    }

    pub fn constant(value: T) -> Self {
        PiecewiseLinear { xs: vec![T::zero(), T::one()], ys: vec![value.clone(), value] }
    }

    /// Hat function on `[0, 1]` peaking with value 1 at `points[j]` and
    /// vanishing at the neighbouring points. `points` must be strictly
    /// increasing, start at 0 and end at 1.
    pub fn hat(points: &[T], j: usize) -> Self {
        let mut xs = Vec::with_capacity(5);
        let mut ys = Vec::with_capacity(5);
        if j > 0 {
            if !points[j - 1].is_zero() {
                xs.push(T::zero());
                ys.push(T::zero());
            }
            xs.push(points[j - 1].clone());
            ys.push(T::zero());
        }
        xs.push(points[j].clone());
        ys.push(T::one());
        if j + 1 < points.len() {
            xs.push(points[j + 1].clone());
            ys.push(T::zero());
            if !points[j + 1].is_one() {
                xs.push(T::one());
                ys.push(T::zero());
            }
        }
        if xs.len() == 1 {
            xs = vec![T::zero(), T::one()];
            ys = vec![T::one(), T::one()];
        }
        PiecewiseLinear { xs, ys }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.xs
    }

    pub fn values(&self) -> &[T] {
        &self.ys
    }

    pub fn domain(&self) -> (&T, &T) {
        (&self.xs[0], &self.xs[self.xs.len() - 1])
    }

    pub fn eval(&self, x: &T) -> T {
        let n = self.xs.len();
        if *x <= self.xs[0] {
            return self.ys[0].clone();
        }
        if *x >= self.xs[n - 1] {
            return self.ys[n - 1].clone();
        }
        let j = self.xs.partition_point(|b| b <= x) - 1;
        self.interpolate(j, x)
    }

    fn interpolate(&self, j: usize, x: &T) -> T {
        let (x0, x1) = (&self.xs[j], &self.xs[j + 1]);
        let (y0, y1) = (&self.ys[j], &self.ys[j + 1]);
        y0.clone() + (y1.clone() - y0.clone()) * (x.clone() - x0.clone()) / (x1.clone() - x0.clone())
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[0] <= w[1])
    }

    /// `inf { x : f(x) >= level }` for a nondecreasing function, clamped to
    /// the domain.
    pub fn first_reach(&self, level: &T) -> T {
        debug_assert!(self.is_nondecreasing());
        if *level <= self.ys[0] {
            return self.xs[0].clone();
        }
        let n = self.ys.len();
        if *level > self.ys[n - 1] {
            return self.xs[n - 1].clone();
        }
        let j = self.ys.partition_point(|y| y < level);
        // ys[j-1] < level <= ys[j]
        let (x0, x1) = (&self.xs[j - 1], &self.xs[j]);
        let (y0, y1) = (&self.ys[j - 1], &self.ys[j]);
        x0.clone() + (level.clone() - y0.clone()) * (x1.clone() - x0.clone()) / (y1.clone() - y0.clone())
    }

    /// All points `x` in the domain where the function crosses `level` on a
    /// non-constant segment, strictly inside that segment.
    pub fn preimages(&self, level: &T) -> Vec<T> {
        let mut out = Vec::new();
        for j in 0..self.xs.len() - 1 {
            let (y0, y1) = (&self.ys[j], &self.ys[j + 1]);
            let inside = (y0 < level && level < y1) || (y1 < level && level < y0);
            if inside {
                let (x0, x1) = (&self.xs[j], &self.xs[j + 1]);
                out.push(
                    x0.clone()
                        + (level.clone() - y0.clone()) * (x1.clone() - x0.clone())
                            / (y1.clone() - y0.clone()),
                );
            }
        }
        out
    }

    /// Integral over the domain (trapezoid rule, exact for linear pieces).
    pub fn integral(&self) -> T {
        let two = T::from_int(2);
        self.xs.windows(2).zip(self.ys.windows(2)).fold(T::zero(), |acc, (x, y)| {
            acc + (x[1].clone() - x[0].clone()) * (y[0].clone() + y[1].clone()) / two.clone()
        })
    }

    /// `f(t) - f(s) <= t - s` on consecutive vertices, hence for all `s <= t`.
    pub fn is_one_lipschitz_increasing(&self) -> bool {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .all(|(x, y)| y[1].clone() - y[0].clone() <= x[1].clone() - x[0].clone())
    }
}

/// Sorted, deduplicated union of breakpoint lists.
pub fn merged_breakpoints<'a, T: Scalar + 'a>(lists: impl IntoIterator<Item = &'a [T]>) -> Vec<T> {
    let mut all: Vec<T> = lists.into_iter().flat_map(|l| l.iter().cloned()).collect();
    scalar::sort_dedup(&mut all);
    all
}
