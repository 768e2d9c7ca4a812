//! Seeded property suites behind the `selftest` command.
//!
//! Each suite draws `count` instances from per-instance seeds derived from
//! the run seed, so tallies are reproducible and independent of suite order.

use num_traits::Zero;
use rand::Rng;

use crate::atomless::{is_conditionally_atomless, shrink_sequence, split, strict_split_witness, FiberSet};
use crate::error::Result;
use crate::generate::{
    generate_instance, random_coefficients, random_event_set, random_family, random_positive_event_set,
    random_space, random_weights, rng, GenParams,
};
use crate::kernel::{hat_family, kernel_atom_scan, pushforward_uniformity_check, system_breakpoints};
use crate::multi::{
    cond_exp_on_partition, density_partition, density_vectors, inclusion_mod_null, mixture, null_cells,
};
use crate::scalar::{Rational, Scalar};
use crate::scenario::parse_scenario;
use crate::uniform::{build_dyadic_family, build_uniform, intermediate_level_scan, set_at_level};

/// Pass and fail counts of one suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteTally {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    /// Seeds of the first few failing instances.
    pub failing_seeds: Vec<u64>,
}

impl SuiteTally {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

type Property = fn(u64) -> Result<bool>;

/// Suites in reporting order.
pub const SUITES: [(&str, Property); 9] = [
    ("split_exactness", split_exactness),
    ("dyadic_levels", dyadic_levels),
    ("uniform_pushforward", uniform_pushforward),
    ("kernel_agreement", kernel_agreement),
    ("shrink_chain", shrink_chain),
    ("level_scan", level_scan),
    ("density_invariance", density_invariance),
    ("dyadic_matches_left_fill", dyadic_matches_left_fill),
    ("scenario_round_trip", scenario_round_trip),
];

const SELFTEST_DEPTH: u32 = 5;

pub fn run_selftest(seed: u64, count: usize) -> Vec<SuiteTally> {
    let mut seeds = rng(seed);
    let instance_seeds: Vec<u64> = (0..count).map(|_| seeds.gen()).collect();
    SUITES
        .iter()
        .map(|(name, property)| {
            let mut tally = SuiteTally { name, passed: 0, failed: 0, failing_seeds: Vec::new() };
            for &s in &instance_seeds {
                if matches!(property(s), Ok(true)) {
                    tally.passed += 1;
                } else {
                    tally.failed += 1;
                    if tally.failing_seeds.len() < 5 {
                        tally.failing_seeds.push(s);
                    }
                }
            }
            tally
        })
        .collect()
}

/// `E[1_B] = h E[1_C]` for `B = split(C, h)`, with `B ⊆ C`.
pub fn split_exactness(seed: u64) -> Result<bool> {
    let mut r = rng(seed);
    let space = random_space(&mut r, &GenParams::atomless());
    let c = random_event_set(&mut r, &space);
    let h = random_coefficients(&mut r, space.len());
    let b = split(&space, &c, &h)?;
    Ok(space.cond_expectation(&b)? == h.hadamard(&space.cond_expectation(&c)?) && b.is_subset_of(&c)?)
}

/// `E[1_{B_t}] = t` on every fiber and the family increases.
pub fn dyadic_levels(seed: u64) -> Result<bool> {
    let mut r = rng(seed);
    let space = random_space(&mut r, &GenParams::atomless());
    let family = build_dyadic_family(&space, SELFTEST_DEPTH)?;
    for (k, (t, set)) in family.iter().enumerate() {
        if space.cond_expectation(set)?.values().iter().any(|v| *v != t) {
            return Ok(false);
        }
        if k > 0 && !family.set(k - 1).is_subset_of(set)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `mu_i({U < t}) = t` on a dyadic grid and zero hat residuals.
pub fn uniform_pushforward(seed: u64) -> Result<bool> {
    let mut r = rng(seed);
    let space = random_space(&mut r, &GenParams::atomless());
    let u = build_uniform(&space)?;
    let steps = 1u64 << SELFTEST_DEPTH;
    for k in 0..=steps {
        let t = Rational::dyadic(k, SELFTEST_DEPTH);
        if space.cond_expectation(&u.sublevel_set(&t)?)?.values().iter().any(|v| *v != t) {
            return Ok(false);
        }
    }
    let tests = hat_family(&system_breakpoints(&u));
    let residuals = pushforward_uniformity_check(&space, &u, &tests)?;
    Ok(residuals.iter().flatten().all(Zero::is_zero))
}

/// Kernel atom scan and the fibered verdict agree; on atomless instances a
/// positive set always has a strict split on its whole support.
pub fn kernel_agreement(seed: u64) -> Result<bool> {
    let mut r = rng(seed);
    let space = random_space(&mut r, &GenParams::default());
    let verdict = is_conditionally_atomless(&space).is_atomless();
    if kernel_atom_scan(&space).is_atomless() != verdict {
        return Ok(false);
    }
    if !verdict {
        return Ok(true);
    }
    let a = random_positive_event_set(&mut r, &space);
    let support: FiberSet = space.cond_expectation(&a)?.support().into_iter().collect();
    Ok(
        matches!(strict_split_witness(&space, &a)?, Some((b, fibers)) if fibers == support && b.is_subset_of(&a)?),
    )
}

/// Halving chain: strict nesting and `0 < E[1_{B_k}] <= 2^-k` on the
/// designated fibers.
pub fn shrink_chain(seed: u64) -> Result<bool> {
    let mut r = rng(seed);
    let space = random_space(&mut r, &GenParams::atomless());
    let c = random_positive_event_set(&mut r, &space);
    let ce = space.cond_expectation(&c)?;
    let fibers: FiberSet = ce.support().into_iter().collect();
    let n = 12;
    let chain = shrink_sequence(&space, &c, &fibers, n)?;
    for k in 1..=n {
        if !chain[k].is_subset_of(&chain[k - 1])? || chain[k] == chain[k - 1] {
            return Ok(false);
        }
        let bound = Rational::dyadic(1, k as u32);
        let ce_k = space.cond_expectation(&chain[k])?;
        if fibers.iter().any(|i| !(ce_k[i].strictly_positive() && ce_k[i] <= bound)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The scan finds a level with a verified strict sandwich.
pub fn level_scan(seed: u64) -> Result<bool> {
    let mut r = rng(seed);
    let space = random_space(&mut r, &GenParams::atomless());
    let a = random_positive_event_set(&mut r, &space);
    let Some(scan) = intermediate_level_scan(&space, &a)? else { return Ok(false) };
    let ce = space.cond_expectation(&a)?;
    let inner = space.cond_expectation(&a.intersect(&set_at_level(&space, &scan.level)?)?)?;
    Ok(!scan.fibers.is_empty()
        && scan.fibers.iter().all(|i| inner[i].strictly_positive() && inner[i] < ce[i]))
}

/// Density partitions from two positive weight vectors coincide modulo null
/// cells, and conditional expectations agree off null cells.
pub fn density_invariance(seed: u64) -> Result<bool> {
    let mut r = rng(seed);
    let spec = random_family(&mut r, &GenParams::default());
    let f = spec.family()?;
    let g = f.with_weights(random_weights(&mut r, f.measure_count()))?;
    let pf = density_partition(&density_vectors(&f));
    let pg = density_partition(&density_vectors(&g));
    let nulls = null_cells(&mixture(&f));
    if !inclusion_mod_null(&pf, &pg, &nulls)? || !inclusion_mod_null(&pg, &pf, &nulls)? {
        return Ok(false);
    }
    let base = mixture(&f);
    let xi: Vec<Rational> =
        (0..f.cell_count()).map(|_| Rational::from_ratio(r.gen_range(-9..=9), 7)).collect();
    let refined = pf.isolate(&nulls);
    let lhs = cond_exp_on_partition(&base, &pf, &xi)?;
    let rhs = cond_exp_on_partition(&base, &refined, &xi)?;
    Ok((0..f.cell_count()).all(|c| nulls.contains(&c) || lhs[c] == rhs[c]))
}

/// The halving family and the direct left-fill route give identical sets.
pub fn dyadic_matches_left_fill(seed: u64) -> Result<bool> {
    let mut r = rng(seed);
    let space = random_space(&mut r, &GenParams::atomless());
    let family = build_dyadic_family(&space, SELFTEST_DEPTH)?;
    for (t, set) in family.iter() {
        let direct = set_at_level(&space, &t)?;
        if direct != *set
            || !space.measure(&direct.difference(set)?.union(&set.difference(&direct)?)?)?.is_zero()
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `parse(serialize(s)) = s` for a generated scenario.
pub fn scenario_round_trip(seed: u64) -> Result<bool> {
    let scenario = generate_instance(seed, &GenParams::default());
    Ok(parse_scenario(&scenario.to_json()).is_ok_and(|back| back == scenario))
}
