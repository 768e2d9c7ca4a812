//! Exact conditional atomlessness over finite fibered probability spaces.
//!
//! A [`FiberedSpace`] models a probability space with a coarse algebra (the
//! fiber index) and a fine algebra (per-fiber interval unions and atom
//! sites); the per-fiber measures form the conditional kernel. On top of it
//! the crate provides:
//!
//! * the conditional atomlessness test and strict split witnesses,
//! * exact conditional splitting `E[1_B | fibers] = h E[1_C | fibers]` and
//!   halving chains,
//! * the dyadic family `(B_t)` and a uniform variable independent of the
//!   fibers, with an intermediate-level scan for the converse direction,
//! * kernel-level atom scans and pushforward uniformity checks,
//! * Radon–Nikodym density partitions for finite families of measures.
//!
//! All algorithms are generic over [`Scalar`]; the `Rational*` aliases fix
//! the scalar to arbitrary-precision rationals, for which every result is
//! exact.

pub mod atomless;
pub mod error;
pub mod event;
pub mod generate;
pub mod kernel;
pub mod measure;
pub mod multi;
pub mod piecewise;
pub mod run;
pub mod scalar;
pub mod scenario;
pub mod selftest;
pub mod uniform;

pub use atomless::{
    is_conditionally_atomless, maximal_split_region, shrink_sequence, split, splits_everywhere,
    strict_split_witness, AtomWitness, AtomlessVerdict, FiberSet,
};
pub use error::{Error, Result};
pub use event::{combine, is_subset, EventSet, FiberSlice, Interval, SetOp};
pub use generate::{generate_instance, GenParams};
pub use kernel::{hat_family, kernel_atom_scan, pushforward_uniformity_check, KernelReport, TestFunction};
pub use measure::{Atom, Fiber, FiberFunction, FiberMeasure, FiberedSpace};
pub use multi::{
    cond_exp_on_partition, conditionally_atomless_wrt_densities, density_partition, density_vectors,
    inclusion_mod_null, mixture, CellPartition, DensityVerdict, MeasureFamily,
};
pub use piecewise::PiecewiseLinear;
pub use run::{run, Command, Options, Report, RunError};
pub use scalar::{Rational, Scalar};
pub use scenario::{parse_scenario, Params, Scenario, ScenarioError};
pub use uniform::{
    build_dyadic_family, build_uniform, intermediate_level_scan, set_at_level, DyadicFamily, LevelScan,
    UniformRV,
};

pub type RationalSpace = FiberedSpace<Rational>;
pub type RationalMeasure = FiberMeasure<Rational>;
pub type RationalEventSet = EventSet<Rational>;
pub type RationalFiberFunction = FiberFunction<Rational>;
pub type RationalFamily = DyadicFamily<Rational>;
pub type RationalUniform = UniformRV<Rational>;
pub type RationalMeasureFamily = MeasureFamily<Rational>;

pub type F64Space = FiberedSpace<f64>;
pub type F64EventSet = EventSet<f64>;
