//! Modular subset sum via a persistent reachability bit-string.
//!
//! The set of residues attainable as subset sums is encoded as a bit string
//! of length m held in a canonical tree. Folding in a value s means merging
//! the string with itself rotated by s; because equality and first-difference
//! queries are logarithmic, each merge costs time proportional to the bits it
//! actually flips, and a value that flips nothing ends its copies early. The
//! total number of bit fixes over a whole run is at most 2m, which is what
//! makes the solver linearithmic.
//!
//! Every flipped position records the value responsible, giving an acyclic
//! predecessor chain from any reachable residue back to 0; witnesses fall out
//! of that chain in at most m-1 steps.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ddt::{equal, lcp, Collection, StringHandle};
use crate::error::DdtError;
use crate::fingerprint::HashSeed;

const ZERO: u8 = b'0';
const ONE: u8 = b'1';

// ===========================================================================
// Problem statement and results
// ===========================================================================

/// Compact multiset of residues mod `m`: distinct values with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    m: u64,
    items: Vec<(u64, u64)>,
}

impl Instance {
    /// `items` must hold distinct in-range values with positive counts.
    pub fn new(m: u64, items: Vec<(u64, u64)>) -> Self {
        assert!(m >= 1);
        let mut seen = std::collections::HashSet::new();
        for &(value, mult) in &items {
            assert!(value < m, "value {value} not reduced mod {m}");
            assert!(mult >= 1, "zero multiplicity for value {value}");
            assert!(seen.insert(value), "duplicate value {value}");
        }
        Instance { m, items }
    }

    /// Reduces values mod `m` and merges duplicates, keeping first-appearance
    /// order.
    pub fn from_pairs(m: u64, pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        assert!(m >= 1);
        let mut order = Vec::new();
        let mut counts: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
        for (value, mult) in pairs {
            let v = value % m;
            if mult == 0 {
                continue;
            }
            if !counts.contains_key(&v) {
                order.push(v);
            }
            *counts.entry(v).or_insert(0) += mult;
        }
        let items = order.into_iter().map(|v| (v, counts[&v])).collect();
        Instance { m, items }
    }

    pub fn from_values(m: u64, values: &[u64]) -> Self {
        Self::from_pairs(m, values.iter().map(|&v| (v, 1)))
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn items(&self) -> &[(u64, u64)] {
        &self.items
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.items.iter().map(|&(_, mult)| mult).sum()
    }
}

/// Predecessor entry for one residue: how it first became reachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pred {
    Unset,
    /// Residue 0, reachable via the empty subset.
    Origin,
    /// First reached by adding this value.
    Value(u64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Merge steps performed (each does one rotation).
    pub rotations: u64,
    /// Individual bit corrections; at most 2m per run.
    pub bit_fixes: u64,
    /// Copies skipped because a merge step changed nothing.
    pub skipped_copies: u64,
    /// Epochs abandoned to collisions or height-cap violations.
    pub restarts: u64,
    /// Highest tree level built in the final epoch.
    pub max_height: u32,
    /// Tree nodes built in the final epoch.
    pub nodes_built: u64,
    /// Symbols ingested in the final epoch; the height bound's denominator.
    pub leaves_built: u64,
}

#[derive(Debug, Clone)]
pub struct ReachabilityResult {
    m: u64,
    reachable: Vec<bool>,
    pred: Vec<Pred>,
    pub stats: SolveStats,
}

impl ReachabilityResult {
    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn reachable(&self) -> &[bool] {
        &self.reachable
    }

    pub fn is_reachable(&self, t: u64) -> bool {
        self.reachable[(t % self.m) as usize]
    }

    pub fn pred(&self) -> &[Pred] {
        &self.pred
    }
}

/// Value-count multiset certifying one reachable target.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Witness {
    /// Sorted by value; counts positive.
    pub parts: Vec<(u64, u64)>,
}

impl Witness {
    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total_count(&self) -> u64 {
        self.parts.iter().map(|&(_, c)| c).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    /// Every epoch died to collisions or height-cap violations. With 64-bit
    /// fingerprints this is effectively unreachable; narrow-width test
    /// configurations raise the attempt budget instead.
    #[error("no collision-free epoch in {attempts} attempts")]
    AttemptsExhausted { attempts: u32 },
    /// The predecessor table violated its acyclicity contract; indicates a
    /// solver bug, never an input problem.
    #[error("predecessor chain inconsistent: {detail}")]
    Inconsistent { detail: String },
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub seed: u64,
    /// Fingerprint width; below 64 only for collision-machinery tests.
    pub fingerprint_bits: u32,
    pub max_attempts: u32,
}

impl SolverOptions {
    pub fn new(seed: u64) -> Self {
        SolverOptions {
            seed,
            fingerprint_bits: 64,
            max_attempts: 1000,
        }
    }
}

// ===========================================================================
// Solver
// ===========================================================================

pub fn solve_all(inst: &Instance, seed: u64) -> Result<ReachabilityResult, SolveError> {
    solve_all_with(inst, &SolverOptions::new(seed))
}

/// Computes the full reachable set with predecessors. Epoch failures restart
/// the whole computation under a derived fresh seed; the caller-visible seed
/// fully determines the outcome, stats included.
pub fn solve_all_with(
    inst: &Instance,
    opts: &SolverOptions,
) -> Result<ReachabilityResult, SolveError> {
    if inst.m == 1 {
        return Ok(ReachabilityResult {
            m: 1,
            reachable: vec![true],
            pred: vec![Pred::Origin],
            stats: SolveStats::default(),
        });
    }
    let mut restarts = 0u64;
    for attempt in 0..opts.max_attempts {
        let epoch_seed = HashSeed::new(derive_seed(opts.seed, attempt));
        match solve_epoch(inst, epoch_seed, opts.fingerprint_bits) {
            Ok(mut res) => {
                res.stats.restarts = restarts;
                return Ok(res);
            }
            Err(err) if err.is_epoch_fatal() => {
                restarts += 1;
            }
            Err(err) => unreachable!("non-epoch error from internal solve: {err}"),
        }
    }
    Err(SolveError::AttemptsExhausted {
        attempts: opts.max_attempts,
    })
}

/// Splitmix-style derivation: attempt index perturbs the base seed so every
/// restart sees an unrelated hash function.
fn derive_seed(seed: u64, attempt: u32) -> u64 {
    let mut x = seed ^ (u64::from(attempt)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn solve_epoch(
    inst: &Instance,
    seed: HashSeed,
    fingerprint_bits: u32,
) -> Result<ReachabilityResult, DdtError> {
    let m = inst.m;
    let m_us = m as usize;
    let mut c = Collection::with_fingerprint_bits(seed, fingerprint_bits);

    let mut bits = vec![ZERO; m_us];
    bits[0] = ONE;
    let mut d = c.from_symbols(&bits)?;

    // Plain mirror of D's bits; spares tree reads when recording preds.
    let mut reachable = vec![false; m_us];
    reachable[0] = true;
    let mut pred = vec![Pred::Unset; m_us];
    pred[0] = Pred::Origin;

    let mut stats = SolveStats::default();

    for &(value, multiplicity) in &inst.items {
        let s = value % m;
        if s == 0 {
            continue; // cannot change reachability, never needed in witnesses
        }
        let mut merged_copies = 0u64;
        while merged_copies < multiplicity {
            let (next, newly, fixes) = merge_step(&mut c, &d, s, &mut reachable, &mut pred)?;
            stats.rotations += 1;
            stats.bit_fixes += fixes;
            d = next;
            if fixes == 0 {
                // The set is closed under +s; further copies are no-ops.
                stats.skipped_copies += multiplicity - merged_copies;
                break;
            }
            assert_eq!(fixes, 2 * newly, "fix count must be twice the growth");
            merged_copies += 1;
        }
    }

    stats.max_height = c.stats().max_height;
    stats.nodes_built = c.stats().nodes_built;
    stats.leaves_built = c.stats().leaves_built;
    Ok(ReachabilityResult {
        m,
        reachable,
        pred,
        stats,
    })
}

/// One merge of D with D rotated by `s`: repairs the two handles toward their
/// union, fixing the first differing bit each round. Positions that turn
/// reachable for the first time (a zero on the snapshot side) record `s` as
/// their predecessor. Returns the merged handle, the count of newly reachable
/// positions, and the count of bit fixes.
fn merge_step(
    c: &mut Collection,
    d: &StringHandle,
    s: u64,
    reachable: &mut [bool],
    pred: &mut [Pred],
) -> Result<(StringHandle, u64, u64), DdtError> {
    let mut shifted = c.rotate(d, s)?;
    let mut base = d.clone(); // snapshot; free under persistence
    let mut newly = 0u64;
    let mut fixes = 0u64;
    while !equal(&shifted, &base)? {
        let k = lcp(&shifted, &base)?; // 0-based first difference
        debug_assert!(k < d.len());
        let k_us = k as usize;
        if base.get(k)? == ZERO {
            base = c.set(&base, k, ONE)?;
            debug_assert!(!reachable[k_us], "mirror out of sync");
            reachable[k_us] = true;
            debug_assert!(matches!(pred[k_us], Pred::Unset), "predecessor overwrite");
            pred[k_us] = Pred::Value(s);
            newly += 1;
        } else {
            debug_assert_eq!(shifted.get(k)?, ZERO);
            shifted = c.set(&shifted, k, ONE)?;
        }
        fixes += 1;
    }
    Ok((base, newly, fixes))
}

// ===========================================================================
// Witness extraction and checking
// ===========================================================================

/// Follows the predecessor chain from `t` back to 0, aggregating the values
/// used. `None` when `t` is unreachable.
pub fn reconstruct(res: &ReachabilityResult, t: u64) -> Result<Option<Witness>, SolveError> {
    let m = res.m;
    let t = t % m;
    if !res.reachable[t as usize] {
        return Ok(None);
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut j = t;
    let mut steps = 0u64;
    loop {
        match res.pred[j as usize] {
            Pred::Origin => break,
            Pred::Unset => {
                return Err(SolveError::Inconsistent {
                    detail: format!("reachable position {j} has no predecessor"),
                });
            }
            Pred::Value(s) => {
                *counts.entry(s).or_insert(0) += 1;
                j = (j + m - s) % m;
                steps += 1;
                if steps >= m {
                    return Err(SolveError::Inconsistent {
                        detail: format!("chain from {t} did not reach 0 in {} steps", m - 1),
                    });
                }
            }
        }
    }
    Ok(Some(Witness {
        parts: counts.into_iter().collect(),
    }))
}

/// solve + reconstruct for one target.
pub fn decide(inst: &Instance, t: u64, seed: u64) -> Result<(bool, Option<Witness>), SolveError> {
    let res = solve_all(inst, seed)?;
    let witness = reconstruct(&res, t)?;
    Ok((witness.is_some(), witness))
}

/// Independent check: multiplicity bounds respected and weighted sum hits the
/// target mod m.
pub fn verify_witness(inst: &Instance, t: u64, w: &Witness) -> bool {
    let m = inst.m;
    let mut sum = 0u64;
    for &(value, count) in &w.parts {
        if count == 0 {
            return false;
        }
        let available = inst
            .items
            .iter()
            .find(|&&(v, _)| v == value)
            .map(|&(_, mult)| mult);
        match available {
            Some(mult) if count <= mult => {}
            _ => return false,
        }
        sum = (sum + (value % m) * (count % m)) % m;
    }
    sum == t % m
}
