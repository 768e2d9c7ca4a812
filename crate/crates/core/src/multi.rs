//! Finite families of probability measures on a shared cell grid: convex
//! mixtures, Radon–Nikodym density vectors against the mixture, the partition
//! those densities generate, and comparison of partitions modulo null cells.
//!
//! A cell is either a diffuse interval on which every measure has constant
//! density, or an atom site. Partitions of the cells stand in for finite
//! sigma algebras; the null cells of the mixture stand in for its null sets.

use std::collections::BTreeSet;

use crate::atomless::{is_conditionally_atomless, AtomlessVerdict};
use crate::error::{Error, Result};
use crate::event::Interval;
use crate::measure::{Atom, FiberMeasure, FiberedSpace};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell<T> {
    Diffuse { fiber: usize, interval: Interval<T> },
    Atom { fiber: usize, location: T },
}

impl<T: Scalar> Cell<T> {
    pub fn fiber(&self) -> usize {
        match self {
            Cell::Diffuse { fiber, .. } | Cell::Atom { fiber, .. } => *fiber,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Cell::Atom { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFamily<T> {
    cells: Vec<Cell<T>>,
    /// `masses[k][c]`: mass of measure `k` on cell `c`.
    masses: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> MeasureFamily<T> {
    pub fn new(cells: Vec<Cell<T>>, masses: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidFamily(msg));
        if masses.is_empty() {
            return bad("at least one measure is required".into());
        }
        if weights.len() != masses.len() {
            return bad(format!("{} mixture weights for {} measures", weights.len(), masses.len()));
        }
        for (k, row) in masses.iter().enumerate() {
            if row.len() != cells.len() {
                return Err(Error::GridMismatch { expected: cells.len(), found: row.len() });
            }
            if let Some(m) = row.iter().find(|m| m.strictly_negative()) {
                return bad(format!("measure {k} has negative cell mass {m}"));
            }
            let total = row.iter().fold(T::zero(), |acc, m| acc + m.clone());
            if !total.same(&T::one()) {
                return bad(format!("measure {k} has total mass {total}, expected 1"));
            }
        }
        if let Some(w) = weights.iter().find(|w| !w.strictly_positive()) {
            return bad(format!("mixture weight {w} is not strictly positive"));
        }
        let total = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
        if !total.same(&T::one()) {
            return bad(format!("mixture weights sum to {total}, expected 1"));
        }
        Ok(MeasureFamily { cells, masses, weights })
    }

    /// Builds the common grid of several fibered spaces with the same number
    /// of fibers: per fiber, diffuse cells between all density breakpoints of
    /// all measures, then one cell per atom site of any measure.
    pub fn from_spaces(spaces: &[FiberedSpace<T>], weights: Vec<T>) -> Result<Self> {
        let fibers = match spaces.first() {
            Some(s) => s.len(),
            None => return Err(Error::InvalidFamily("at least one measure is required".into())),
        };
        if let Some(s) = spaces.iter().find(|s| s.len() != fibers) {
            return Err(Error::FiberCountMismatch { expected: fibers, found: s.len() });
        }
        let mut cells = Vec::new();
        for i in 0..fibers {
            let breaks =
                crate::piecewise::merged_breakpoints(spaces.iter().map(|s| s.fiber_measure(i).breakpoints()));
            cells.extend(
                breaks
                    .windows(2)
                    .map(|w| Cell::Diffuse { fiber: i, interval: Interval::new(w[0].clone(), w[1].clone()) }),
            );
            let mut sites: Vec<T> = spaces
                .iter()
                .flat_map(|s| s.fiber_measure(i).atoms().iter().map(|a| a.location.clone()))
                .collect();
            scalar::sort_dedup(&mut sites);
            cells.extend(sites.into_iter().map(|location| Cell::Atom { fiber: i, location }));
        }
        let masses = spaces.iter().map(|s| cells.iter().map(|c| cell_mass(s, c)).collect()).collect();
        MeasureFamily::new(cells, masses, weights)
    }

    /// Same measures, different mixture weights.
    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        MeasureFamily::new(self.cells.clone(), self.masses.clone(), weights)
    }

    pub fn cells(&self) -> &[Cell<T>] {
        &self.cells
    }

    pub fn masses(&self) -> &[Vec<T>] {
        &self.masses
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn measure_count(&self) -> usize {
        self.masses.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

/// The measures of a family as fibered spaces over a common fiber count,
/// with their mixture weights. This is the form in which families are
/// written to scenario files.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec<T> {
    pub spaces: Vec<FiberedSpace<T>>,
    pub weights: Vec<T>,
}

impl<T: Scalar> FamilySpec<T> {
    pub fn family(&self) -> Result<MeasureFamily<T>> {
        MeasureFamily::from_spaces(&self.spaces, self.weights.clone())
    }
}

fn cell_mass<T: Scalar>(space: &FiberedSpace<T>, cell: &Cell<T>) -> T {
    let i = cell.fiber();
    let mu = space.fiber_measure(i);
    let local = match cell {
        Cell::Diffuse { interval, .. } => mu.interval_mass(interval),
        Cell::Atom { location, .. } => mu.atom_weight(location).cloned().unwrap_or_else(T::zero),
    };
    space.fiber_weight(i).clone() * local
}

/// `Q_0 = sum_k lambda_k Q_k`, per cell.
pub fn mixture<T: Scalar>(family: &MeasureFamily<T>) -> Vec<T> {
    (0..family.cell_count())
        .map(|c| {
            family
                .weights
                .iter()
                .zip(&family.masses)
                .fold(T::zero(), |acc, (w, row)| acc + w.clone() * row[c].clone())
        })
        .collect()
}

/// `f_k = dQ_k / dQ_0` per cell, with `f_k = 0` on null cells. Indexed
/// `[cell][k]`.
pub fn density_vectors<T: Scalar>(family: &MeasureFamily<T>) -> Vec<Vec<T>> {
    mixture(family)
        .iter()
        .enumerate()
        .map(|(c, base)| {
            family
                .masses
                .iter()
                .map(|row| if base.is_zero() { T::zero() } else { row[c].clone() / base.clone() })
                .collect()
        })
        .collect()
}

pub fn null_cells<T: Scalar>(base: &[T]) -> BTreeSet<usize> {
    base.iter().enumerate().filter(|(_, m)| m.is_zero()).map(|(c, _)| c).collect()
}

/// Assignment of every cell to a block; block ids are numbered in order of
/// first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellPartition {
    blocks: Vec<usize>,
}

impl CellPartition {
    pub fn from_labels<L: PartialEq>(labels: &[L]) -> Self {
        let mut seen: Vec<&L> = Vec::new();
        let blocks = labels
            .iter()
            .map(|l| match seen.iter().position(|s| *s == l) {
                Some(b) => b,
                None => {
                    seen.push(l);
                    seen.len() - 1
                }
            })
            .collect();
        CellPartition { blocks }
    }

    pub fn trivial(cells: usize) -> Self {
        CellPartition { blocks: vec![0; cells] }
    }

    pub fn discrete(cells: usize) -> Self {
        CellPartition { blocks: (0..cells).collect() }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, cell: usize) -> usize {
        self.blocks[cell]
    }

    pub fn labels(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.iter().max().map_or(0, |m| m + 1)
    }

    /// Cells of each block, in cell order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.block_count()];
        for (c, &b) in self.blocks.iter().enumerate() {
            out[b].push(c);
        }
        out
    }

    /// Moves every cell of `cells` into its own singleton block.
    pub fn isolate(&self, cells: &BTreeSet<usize>) -> Self {
        let labels: Vec<(usize, usize)> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(c, &b)| if cells.contains(&c) { (usize::MAX, c) } else { (b, 0) })
            .collect();
        CellPartition::from_labels(&labels)
    }
}

/// Groups cells by exact equality of their density vectors.
pub fn density_partition<T: Scalar>(vectors: &[Vec<T>]) -> CellPartition {
    CellPartition::from_labels(vectors)
}

/// Whether `P ⊆ σ(Q, N)`: every block of `Q` meets at most one block of `P`
/// once the cells in `nulls` are ignored.
pub fn inclusion_mod_null(p: &CellPartition, q: &CellPartition, nulls: &BTreeSet<usize>) -> Result<bool> {
    if p.len() != q.len() {
        return Err(Error::GridMismatch { expected: p.len(), found: q.len() });
    }
    let mut owner: Vec<Option<usize>> = vec![None; q.block_count()];
    for c in (0..p.len()).filter(|c| !nulls.contains(c)) {
        let slot = &mut owner[q.block_of(c)];
        match slot {
            Some(b) if *b != p.block_of(c) => return Ok(false),
            Some(_) => {}
            None => *slot = Some(p.block_of(c)),
        }
    }
    Ok(true)
}

/// `E_{Q_0}[xi | P]` per cell: the base-weighted block average, and 0 on
/// blocks of zero base mass.
pub fn cond_exp_on_partition<T: Scalar>(base: &[T], partition: &CellPartition, xi: &[T]) -> Result<Vec<T>> {
    if base.len() != partition.len() || xi.len() != partition.len() {
        return Err(Error::GridMismatch { expected: partition.len(), found: base.len().min(xi.len()) });
    }
    let mut averages = Vec::with_capacity(partition.block_count());
    for cells in partition.blocks() {
        let mass = cells.iter().fold(T::zero(), |acc, &c| acc + base[c].clone());
        if mass.is_zero() {
            averages.push(T::zero());
        } else {
            let weighted = cells.iter().fold(T::zero(), |acc, &c| acc + base[c].clone() * xi[c].clone());
            averages.push(weighted / mass);
        }
    }
    Ok((0..partition.len()).map(|c| averages[partition.block_of(c)].clone()).collect())
}

/// A uniform variable built per block of the density partition: cells of a
/// block are ordered by (fiber, position) and `U` runs linearly over each
/// diffuse cell through the block's cumulative base mass.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockUniform<T> {
    pub partition: CellPartition,
    /// `(U at cell start, U at cell end)` for cells of positive base mass.
    pub ranges: Vec<Option<(T, T)>>,
}

impl<T: Scalar> BlockUniform<T> {
    /// `Q_0(block ∩ {U < t}) / Q_0(block)`.
    pub fn block_fraction_below(&self, base: &[T], block: usize, t: &T) -> T {
        let mut below = T::zero();
        let mut total = T::zero();
        for (c, range) in self.ranges.iter().enumerate() {
            if self.partition.block_of(c) != block {
                continue;
            }
            let Some((lo, hi)) = range else { continue };
            total = total + base[c].clone();
            if *hi <= *t {
                below = below + base[c].clone();
            } else if *lo < *t {
                below = below + base[c].clone() * (t.clone() - lo.clone()) / (hi.clone() - lo.clone());
            }
        }
        if total.is_zero() {
            T::zero()
        } else {
            below / total
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityVerdict<T> {
    Atomless(BlockUniform<T>),
    /// An atom cell carrying positive mixture mass.
    Witness {
        cell: usize,
        fiber: usize,
        location: T,
        mass: T,
    },
}

impl<T> DensityVerdict<T> {
    pub fn is_atomless(&self) -> bool {
        matches!(self, DensityVerdict::Atomless(_))
    }
}

/// Conditional atomlessness of the fine algebra with respect to the algebra
/// generated by the density vectors, under the mixture.
pub fn conditionally_atomless_wrt_densities<T: Scalar>(family: &MeasureFamily<T>) -> DensityVerdict<T> {
    let base = mixture(family);
    for (c, cell) in family.cells.iter().enumerate() {
        if let Cell::Atom { fiber, location } = cell {
            if base[c].strictly_positive() {
                return DensityVerdict::Witness {
                    cell: c,
                    fiber: *fiber,
                    location: location.clone(),
                    mass: base[c].clone(),
                };
            }
        }
    }
    let partition = density_partition(&density_vectors(family));
    let mut ranges = vec![None; family.cell_count()];
    for cells in partition.blocks() {
        let block_mass = cells.iter().fold(T::zero(), |acc, &c| acc + base[c].clone());
        if block_mass.is_zero() {
            continue;
        }
        let mut ordered: Vec<usize> = cells.into_iter().filter(|&c| base[c].strictly_positive()).collect();
        ordered.sort_by(|&a, &b| match (&family.cells[a], &family.cells[b]) {
            (Cell::Diffuse { fiber: fa, interval: ia }, Cell::Diffuse { fiber: fb, interval: ib }) => {
                fa.cmp(fb).then_with(|| scalar::cmp(&ia.lo, &ib.lo))
            }
            _ => a.cmp(&b),
        });
        let mut acc = T::zero();
        for c in ordered {
            let start = acc.clone() / block_mass.clone();
            acc = acc + base[c].clone();
            ranges[c] = Some((start, acc.clone() / block_mass.clone()));
        }
    }
    DensityVerdict::Atomless(BlockUniform { partition, ranges })
}

/// The fibered space whose fibers are the positive-mass blocks of the density
/// partition, each carrying the normalized mixture restricted to the block.
/// Diffuse cells are laid end to end with density 1; atom cells become atoms
/// spread over the remaining zero-density tail.
pub fn regrouped_space<T: Scalar>(family: &MeasureFamily<T>) -> Result<FiberedSpace<T>> {
    let base = mixture(family);
    let partition = density_partition(&density_vectors(family));
    let mut fibers = Vec::new();
    for cells in partition.blocks() {
        let block_mass = cells.iter().fold(T::zero(), |acc, &c| acc + base[c].clone());
        if block_mass.is_zero() {
            continue;
        }
        let mut breakpoints = vec![T::zero()];
        let mut densities = Vec::new();
        let mut atom_masses = Vec::new();
        let mut pos = T::zero();
        for &c in &cells {
            let share = base[c].clone() / block_mass.clone();
            if share.is_zero() {
                continue;
            }
            if family.cells[c].is_atom() {
                atom_masses.push(share);
            } else {
                pos = pos + share;
                breakpoints.push(pos.clone());
                densities.push(T::one());
            }
        }
        let gap = T::one() - pos.clone();
        if gap.strictly_positive() {
            breakpoints.push(T::one());
            densities.push(T::zero());
        }
        let slots = T::from_int(atom_masses.len() as i64 + 1);
        let atoms = atom_masses
            .into_iter()
            .enumerate()
            .map(|(j, weight)| Atom {
                location: pos.clone() + gap.clone() * T::from_int(j as i64 + 1) / slots.clone(),
                weight,
            })
            .collect();
        fibers.push((block_mass, FiberMeasure::new(atoms, breakpoints, densities)?));
    }
    FiberedSpace::new(fibers)
}

/// The plain fibered-space verdict on the regrouped space, for comparison.
pub fn regrouped_verdict<T: Scalar>(family: &MeasureFamily<T>) -> Result<AtomlessVerdict<T>> {
    Ok(is_conditionally_atomless(&regrouped_space(family)?))
}
