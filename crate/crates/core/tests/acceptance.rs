//! Acceptance run: one PASS/FAIL line per criterion, exact equality
//! throughout, wall-clock limits on the two timed criteria.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use condatom::atomless::{is_conditionally_atomless, shrink_sequence, split, strict_split_witness, FiberSet};
use condatom::event::{EventSet, FiberSlice};
use condatom::generate::{
    generate_instance, random_coefficients, random_event_set, random_family, random_positive_event_set,
    random_space, random_weights, rng, GenParams,
};
use condatom::kernel::{hat_family, kernel_atom_scan, pushforward_uniformity_check, system_breakpoints};
use condatom::multi::{
    cond_exp_on_partition, density_partition, density_vectors, inclusion_mod_null, mixture, null_cells,
    CellPartition,
};
use condatom::run::{run, Command, Options};
use condatom::scenario::parse_scenario;
use condatom::uniform::{
    build_dyadic_family, build_uniform, intermediate_level_scan, set_at_level, DyadicFamily,
};
use condatom::{FiberMeasure, FiberedSpace, Rational, Scalar};
use num_traits::Zero;
use rand::Rng;

const SPLIT_LIMIT: Duration = Duration::from_secs(5);
const DYADIC_LIMIT: Duration = Duration::from_secs(10);

const SPLIT_INSTANCES: u64 = 200;
const DYADIC_INSTANCES: u64 = 20;
const DYADIC_DEPTH: u32 = 10;
const UNIFORM_GRID: i64 = 1024;
const KERNEL_INSTANCES: u64 = 200;
const SETS_PER_INSTANCE: usize = 20;
const CHAIN_INSTANCES: usize = 20;
const CHAIN_LENGTH: usize = 20;
const SCAN_PAIRS: usize = 100;
const LIPSCHITZ_DEPTH: u32 = 8;
const FAMILY_INSTANCES: u64 = 100;
const ROUND_TRIPS: u64 = 50;
const SELFTEST_SEED: u64 = 42;
const SELFTEST_COUNT: usize = 50;

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Slice mass computed straight from the definition: overlap length of each
/// interval with each density piece, plus picked atom weights.
fn oracle_mass(mu: &FiberMeasure<Rational>, slice: &FiberSlice<Rational>) -> Rational {
    let mut total = Rational::zero();
    for atom in mu.atoms() {
        if slice.atoms().contains(&atom.location) {
            total += atom.weight.clone();
        }
    }
    let bps = mu.breakpoints();
    for iv in slice.intervals() {
        for (j, d) in mu.densities().iter().enumerate() {
            let lo = if iv.lo > bps[j] { iv.lo.clone() } else { bps[j].clone() };
            let hi = if iv.hi < bps[j + 1] { iv.hi.clone() } else { bps[j + 1].clone() };
            if hi > lo {
                total += d.clone() * (hi - lo);
            }
        }
    }
    total
}

fn oracle_cond(space: &FiberedSpace<Rational>, set: &EventSet<Rational>) -> Vec<Rational> {
    (0..space.len()).map(|i| oracle_mass(space.fiber_measure(i), set.slice(i))).collect()
}

fn oracle_measure(space: &FiberedSpace<Rational>, set: &EventSet<Rational>) -> Rational {
    oracle_cond(space, set)
        .into_iter()
        .zip(space.fibers())
        .fold(Rational::zero(), |acc, (v, f)| acc + v * f.weight.clone())
}

fn symmetric_difference(a: &EventSet<Rational>, b: &EventSet<Rational>) -> EventSet<Rational> {
    a.difference(b).unwrap().union(&b.difference(a).unwrap()).unwrap()
}

fn atomless_instance(seed: u64) -> (FiberedSpace<Rational>, rand_chacha::ChaCha8Rng) {
    let mut r = rng(seed);
    let space = random_space(&mut r, &GenParams::atomless());
    (space, r)
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn split_exactness() -> Outcome {
    let start = Instant::now();
    let mut ok = 0;
    for seed in 0..SPLIT_INSTANCES {
        let (space, mut r) = atomless_instance(1_000 + seed);
        let c = random_event_set(&mut r, &space);
        let h = random_coefficients(&mut r, space.len());
        let b = split(&space, &c, &h).unwrap();
        let expected: Vec<Rational> =
            oracle_cond(&space, &c).into_iter().zip(h.values()).map(|(v, h)| v * h.clone()).collect();
        if oracle_cond(&space, &b) == expected
            && space.cond_expectation(&b).unwrap().into_values() == expected
        {
            ok += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok == SPLIT_INSTANCES && elapsed < SPLIT_LIMIT,
        format!(
            "{ok}/{SPLIT_INSTANCES} exact, {:.2}s (limit {}s)",
            elapsed.as_secs_f64(),
            SPLIT_LIMIT.as_secs()
        ),
    )
}

fn dyadic_instances() -> Vec<FiberedSpace<Rational>> {
    (0..DYADIC_INSTANCES).map(|s| atomless_instance(2_000 + s).0).collect()
}

fn dyadic_family(spaces: &[FiberedSpace<Rational>]) -> (Outcome, Vec<DyadicFamily<Rational>>) {
    let start = Instant::now();
    let mut ok = 0;
    let mut families = Vec::with_capacity(spaces.len());
    for space in spaces {
        let family = build_dyadic_family(space, DYADIC_DEPTH).unwrap();
        let mut good = family.len() == (1 << DYADIC_DEPTH) + 1;
        for k in 0..family.len() {
            let t = q(k as i64, 1 << DYADIC_DEPTH);
            good &= oracle_cond(space, family.set(k)).iter().all(|v| *v == t);
            if k > 0 {
                good &= family.set(k - 1).is_subset_of(family.set(k)).unwrap();
            }
        }
        ok += usize::from(good);
        families.push(family);
    }
    let elapsed = start.elapsed();
    let n = spaces.len();
    (
        outcome(
            ok == n && elapsed < DYADIC_LIMIT,
            format!(
                "{ok}/{n} instances with all {} levels exact and nested, {:.2}s (limit {}s)",
                (1 << DYADIC_DEPTH) + 1,
                elapsed.as_secs_f64(),
                DYADIC_LIMIT.as_secs()
            ),
        ),
        families,
    )
}

fn uniform_pushforward(spaces: &[FiberedSpace<Rational>]) -> Outcome {
    let mut ok = 0;
    let mut tests_run = 0;
    for space in spaces {
        let u = build_uniform(space).unwrap();
        let mut good = true;
        for k in 0..UNIFORM_GRID {
            let t = q(k, UNIFORM_GRID - 1);
            let below = u.sublevel_set(&t).unwrap();
            good &= oracle_cond(space, &below).iter().all(|v| *v == t);
        }
        let tests = hat_family(&system_breakpoints(&u));
        tests_run += tests.len() * space.len();
        let residuals = pushforward_uniformity_check(space, &u, &tests).unwrap();
        good &= residuals.iter().flatten().all(Zero::is_zero);
        ok += usize::from(good);
    }
    outcome(
        ok == spaces.len(),
        format!(
            "{ok}/{} instances, {UNIFORM_GRID} levels per fiber, {tests_run} hat residuals all zero",
            spaces.len()
        ),
    )
}

fn kernel_equivalence() -> Outcome {
    let mut agree = 0;
    let mut atomless = 0;
    let mut witnessed = 0;
    let mut splits_ok = 0;
    for seed in 0..KERNEL_INSTANCES {
        let mut r = rng(3_000 + seed);
        let space = random_space(&mut r, &GenParams::default());
        let verdict = is_conditionally_atomless(&space).is_atomless();
        let has_atoms = space.fibers().iter().any(|f| !f.measure.atoms().is_empty());
        if kernel_atom_scan(&space).is_atomless() == verdict && verdict != has_atoms {
            agree += 1;
        }
        if !verdict {
            witnessed += 1;
            continue;
        }
        atomless += 1;
        let mut good = true;
        for _ in 0..SETS_PER_INSTANCE {
            let a = random_positive_event_set(&mut r, &space);
            let ce_a = oracle_cond(&space, &a);
            let support: FiberSet = (0..space.len()).filter(|&i| ce_a[i] > Rational::zero()).collect();
            good &= match strict_split_witness(&space, &a).unwrap() {
                Some((b, d)) => {
                    let ce_b = oracle_cond(&space, &b);
                    d == support
                        && b.is_subset_of(&a).unwrap()
                        && d.iter().all(|i| ce_b[i] > Rational::zero() && ce_b[i] < ce_a[i])
                }
                None => false,
            };
        }
        splits_ok += usize::from(good);
    }
    outcome(
        agree == KERNEL_INSTANCES as usize && splits_ok == atomless && atomless > 0 && witnessed > 0,
        format!(
            "verdicts agree {agree}/{KERNEL_INSTANCES} ({atomless} atomless, {witnessed} with atoms); \
             strict splits on support {splits_ok}/{atomless}"
        ),
    )
}

fn halving_chain() -> Outcome {
    let mut ok = 0;
    for seed in 0..CHAIN_INSTANCES as u64 {
        let (space, mut r) = atomless_instance(4_000 + seed);
        let c = random_positive_event_set(&mut r, &space);
        let ce_c = oracle_cond(&space, &c);
        let fibers: FiberSet = (0..space.len()).filter(|&i| ce_c[i] > Rational::zero()).collect();
        let chain = shrink_sequence(&space, &c, &fibers, CHAIN_LENGTH).unwrap();
        let mut good = chain.len() == CHAIN_LENGTH + 1 && chain[0] == c;
        for k in 1..chain.len() {
            good &= chain[k].is_subset_of(&chain[k - 1]).unwrap();
            let ce = oracle_cond(&space, &chain[k]);
            let ce_prev = oracle_cond(&space, &chain[k - 1]);
            let bound = q(1, 1 << k);
            for i in fibers.iter() {
                good &= ce[i] > Rational::zero() && ce[i] <= bound && ce[i] < ce_prev[i];
            }
        }
        ok += usize::from(good);
    }
    outcome(ok == CHAIN_INSTANCES, format!("{ok}/{CHAIN_INSTANCES} chains of length {CHAIN_LENGTH}"))
}

fn level_scan() -> Outcome {
    let mut sandwich = 0;
    let mut lipschitz = 0;
    let grid: Vec<Rational> = (0..=(1i64 << LIPSCHITZ_DEPTH)).map(|k| q(k, 1 << LIPSCHITZ_DEPTH)).collect();
    for seed in 0..SCAN_PAIRS as u64 {
        let (space, mut r) = atomless_instance(5_000 + seed);
        let a = random_positive_event_set(&mut r, &space);
        let ce_a = oracle_cond(&space, &a);
        if let Some(scan) = intermediate_level_scan(&space, &a).unwrap() {
            let inner =
                oracle_cond(&space, &a.intersect(&set_at_level(&space, &scan.level).unwrap()).unwrap());
            if !scan.fibers.is_empty()
                && scan.fibers.iter().all(|i| inner[i] > Rational::zero() && inner[i] < ce_a[i])
            {
                sandwich += 1;
            }
        }
        let profiles: Vec<Vec<Rational>> = grid
            .iter()
            .map(|t| oracle_cond(&space, &a.intersect(&set_at_level(&space, t).unwrap()).unwrap()))
            .collect();
        let mut good = true;
        for s in 0..grid.len() {
            for t in s..grid.len() {
                let gap = grid[t].clone() - grid[s].clone();
                good &= (0..space.len()).all(|i| profiles[t][i].clone() - profiles[s][i].clone() <= gap);
            }
        }
        lipschitz += usize::from(good);
    }
    outcome(
        sandwich == SCAN_PAIRS && lipschitz == SCAN_PAIRS,
        format!(
            "strict sandwich {sandwich}/{SCAN_PAIRS}; increments bounded by level gap at all depth-{LIPSCHITZ_DEPTH} pairs {lipschitz}/{SCAN_PAIRS}"
        ),
    )
}

/// Cells `c`, `d` off the null set lie in one block of `p` exactly when they
/// lie in one block of `q`.
fn same_blocks_off_nulls(p: &CellPartition, q: &CellPartition, nulls: &BTreeSet<usize>) -> bool {
    let live: Vec<usize> = (0..p.len()).filter(|c| !nulls.contains(c)).collect();
    live.iter()
        .all(|&c| live.iter().all(|&d| (p.block_of(c) == p.block_of(d)) == (q.block_of(c) == q.block_of(d))))
}

/// Mass-weighted block averages, 0 on massless blocks.
fn oracle_block_average(base: &[Rational], p: &CellPartition, xi: &[Rational]) -> Vec<Rational> {
    (0..p.len())
        .map(|c| {
            let members: Vec<usize> = (0..p.len()).filter(|&d| p.block_of(d) == p.block_of(c)).collect();
            let mass = members.iter().fold(Rational::zero(), |acc, &d| acc + base[d].clone());
            if mass.is_zero() {
                return Rational::zero();
            }
            members.iter().fold(Rational::zero(), |acc, &d| acc + base[d].clone() * xi[d].clone()) / mass
        })
        .collect()
}

fn mixture_invariance() -> Outcome {
    let mut mutual = 0;
    let mut agree = 0;
    let mut with_nulls = 0;
    for seed in 0..FAMILY_INSTANCES {
        let mut r = rng(6_000 + seed);
        let spec = random_family(&mut r, &GenParams::default());
        let f = spec.with_weights_from(&mut r);
        let g = spec.with_weights_from(&mut r);
        let base = mixture(&f);
        let nulls = null_cells(&base);
        with_nulls += usize::from(!nulls.is_empty());
        let pf = density_partition(&density_vectors(&f));
        let pg = density_partition(&density_vectors(&g));
        if inclusion_mod_null(&pf, &pg, &nulls).unwrap()
            && inclusion_mod_null(&pg, &pf, &nulls).unwrap()
            && same_blocks_off_nulls(&pf, &pg, &nulls)
        {
            mutual += 1;
        }

        // A refinement of the density partition that differs only on null
        // cells: every null cell becomes its own block.
        let refined = pf.isolate(&nulls);
        let xi: Vec<Rational> =
            (0..f.cell_count()).map(|_| q(r.gen_range(-50..=50), r.gen_range(1..=12))).collect();
        let coarse = cond_exp_on_partition(&base, &pf, &xi).unwrap();
        let fine = cond_exp_on_partition(&base, &refined, &xi).unwrap();
        let oracle = oracle_block_average(&base, &pf, &xi);
        if inclusion_mod_null(&pf, &refined, &nulls).unwrap()
            && inclusion_mod_null(&refined, &pf, &nulls).unwrap()
            && (0..f.cell_count())
                .all(|c| nulls.contains(&c) || (coarse[c] == fine[c] && coarse[c] == oracle[c]))
        {
            agree += 1;
        }
    }
    outcome(
        mutual == FAMILY_INSTANCES && agree == FAMILY_INSTANCES,
        format!(
            "mutual inclusion mod null {mutual}/{FAMILY_INSTANCES}; conditional expectations agree off nulls \
             {agree}/{FAMILY_INSTANCES} ({with_nulls} families with null cells)"
        ),
    )
}

trait WeightsFrom {
    fn with_weights_from<R: Rng>(&self, r: &mut R) -> condatom::MeasureFamily<Rational>;
}

impl WeightsFrom for condatom::multi::FamilySpec<Rational> {
    fn with_weights_from<R: Rng>(&self, r: &mut R) -> condatom::MeasureFamily<Rational> {
        condatom::MeasureFamily::from_spaces(&self.spaces, random_weights(r, self.spaces.len())).unwrap()
    }
}

fn oracle_agreement(spaces: &[FiberedSpace<Rational>], families: &[DyadicFamily<Rational>]) -> Outcome {
    let mut ok = 0;
    for (space, family) in spaces.iter().zip(families) {
        let mut good = true;
        for k in 0..family.len() {
            let t = q(k as i64, 1 << DYADIC_DEPTH);
            let direct = set_at_level(space, &t).unwrap();
            good &= oracle_cond(space, &direct) == oracle_cond(space, family.set(k));
            good &= oracle_measure(space, &symmetric_difference(&direct, family.set(k))).is_zero();
        }
        ok += usize::from(good);
    }
    outcome(
        ok == spaces.len(),
        format!(
            "{ok}/{} instances agree at all depth-{DYADIC_DEPTH} levels, symmetric difference null",
            spaces.len()
        ),
    )
}

fn cli_determinism() -> Outcome {
    let options = Options { seed: Some(SELFTEST_SEED), count: Some(SELFTEST_COUNT), depth: None };
    let first = run(Command::Selftest, None, &options).unwrap();
    let second = run(Command::Selftest, None, &options).unwrap();
    let identical = first.to_json().as_bytes() == second.to_json().as_bytes();
    let mut round_trips = 0;
    for seed in 0..ROUND_TRIPS {
        let scenario = generate_instance(7_000 + seed, &GenParams::default());
        let text = scenario.to_json();
        let back = parse_scenario(&text).unwrap();
        if back == scenario && back.to_json() == text {
            round_trips += 1;
        }
    }
    outcome(
        identical && first.passed && round_trips == ROUND_TRIPS,
        format!(
            "selftest (seed {SELFTEST_SEED}, count {SELFTEST_COUNT}) byte-identical: {identical}, all suites passed: {}; \
             round trips {round_trips}/{ROUND_TRIPS}",
            first.passed
        ),
    )
}

fn main() -> ExitCode {
    let spaces = dyadic_instances();
    let (dyadic, families) = dyadic_family(&spaces);
    let results = [
        ("split exactness", split_exactness()),
        ("dyadic family", dyadic),
        ("uniform pushforward", uniform_pushforward(&spaces)),
        ("kernel equivalence", kernel_equivalence()),
        ("halving chain", halving_chain()),
        ("intermediate level scan", level_scan()),
        ("mixture invariance", mixture_invariance()),
        ("dyadic vs left-fill", oracle_agreement(&spaces, &families)),
        ("cli determinism", cli_determinism()),
    ];
    let mut all = true;
    for (n, (name, o)) in results.iter().enumerate() {
        println!("criterion {} ({name}): {} - {}", n + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        all &= o.passed;
    }
    if all {
        println!("acceptance: all {} criteria passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
