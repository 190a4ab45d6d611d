//! Acceptance gates: nine end-to-end checks with pinned tolerances, run
//! sequentially so timing-sensitive gates never share the process with other
//! load. One PASS/FAIL line per gate; nonzero exit if any gate fails.
//!
//! Gates 4 and 5 audit observations gathered while gates 1-3 run (heights,
//! leaf counts, bit-fix counters), so the gates execute in order. Setting
//! DDT_ACCEPTANCE_ONLY=<list> runs a subset during development; dependent
//! gates then regenerate the data they need.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use ddt_core::oracle::{dp_subset_sum, NaiveString};
use ddt_core::{
    egz, equal, lcp, reconstruct, solve_all, solve_all_with, verify_egz, verify_witness,
    Collection, DdtError, EgzInput, HashSeed, Instance, SolverOptions, StringHandle,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// ===========================================================================
// Harness
// ===========================================================================

/// Observations shared between gates: (max level, leaves ingested) per epoch,
/// and (bit_fixes, modulus) per solver instance.
#[derive(Default)]
struct Ctx {
    heights: Vec<(u32, u64)>,
    bit_fixes: Vec<(u64, u64)>,
}

fn main() {
    let only: Option<HashSet<u32>> = std::env::var("DDT_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut ctx = Ctx::default();
    let mut failed = 0u32;
    for i in 1..=9u32 {
        if let Some(pick) = &only {
            if !pick.contains(&i) {
                continue;
            }
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| run_criterion(i, &mut ctx)));
        let (verdict, detail) = match outcome {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(payload) => ("FAIL", panic_text(payload.as_ref())),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {i}: {verdict} - {detail} [{:.1}s]",
            started.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn run_criterion(i: u32, ctx: &mut Ctx) -> Result<String, String> {
    match i {
        1 => differential_traces(ctx),
        2 => canonical_construction_paths(ctx),
        3 => subset_sum_differential(ctx),
        4 => bit_fix_bound(ctx),
        5 => height_bound(ctx),
        6 => egz_total_correctness(),
        7 => solver_scaling(),
        8 => egz_scaling(),
        9 => collision_machinery(),
        _ => unreachable!(),
    }
}

fn panic_text(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".to_string()
    }
}

fn mix(seed: u64, salt: u64) -> u64 {
    let mut x = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn is_epoch_fatal(e: &DdtError) -> bool {
    matches!(
        e,
        DdtError::CollisionDetected { .. } | DdtError::RebuildRequired { .. }
    )
}

// ===========================================================================
// Criterion 1: differential operation traces against the naive oracle
// ===========================================================================

const TRACE_SEEDS: [u64; 3] = [0xA11CE, 0xB0B5_1ED5, 0xC0FF_EE00];
const TRACE_OPS: usize = 10_000;
const TRACE_LEN_CAP: u64 = 4096;
const TRACE_POOL_CAP: usize = 64;

fn differential_traces(ctx: &mut Ctx) -> Result<String, String> {
    let mut checks = 0u64;
    let mut epoch_restarts = 0u32;
    for &base in &TRACE_SEEDS {
        // Collision / height-cap events poison an epoch, not the test:
        // restart the trace under a derived seed. Systematic firing would
        // exhaust the attempt budget and fail.
        let mut attempt = 0u64;
        loop {
            match run_trace(mix(base, attempt), ctx) {
                Ok(n) => {
                    checks += n;
                    break;
                }
                Err(TraceFail::Epoch(_)) if attempt < 5 => {
                    epoch_restarts += 1;
                    attempt += 1;
                }
                Err(TraceFail::Epoch(e)) => {
                    return Err(format!("persistent epoch failures: {e}"));
                }
                Err(TraceFail::Mismatch(msg)) => return Err(msg),
            }
        }
    }
    Ok(format!(
        "3 traces x {TRACE_OPS} ops, {checks} oracle comparisons, 0 mismatches, \
         {epoch_restarts} epoch restarts"
    ))
}

enum TraceFail {
    Epoch(DdtError),
    Mismatch(String),
}

fn epoch_or_bug(e: DdtError, op: &str) -> TraceFail {
    if is_epoch_fatal(&e) {
        TraceFail::Epoch(e)
    } else {
        TraceFail::Mismatch(format!("{op}: unexpected error {e}"))
    }
}

fn run_trace(seed: u64, ctx: &mut Ctx) -> Result<u64, TraceFail> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut coll = Collection::new(HashSeed::new(seed));
    let mut pool: Vec<(StringHandle, NaiveString)> = Vec::new();
    let mut checks = 0u64;

    let alphabet = b"abcA";
    let fresh = |coll: &mut Collection,
                 rng: &mut StdRng|
     -> Result<(StringHandle, NaiveString), DdtError> {
        let len = rng.gen_range(1..=1024);
        let syms: Vec<u8> = (0..len)
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect();
        Ok((coll.from_symbols(&syms)?, NaiveString::from_symbols(&syms)))
    };

    let first = fresh(&mut coll, &mut rng).map_err(|e| epoch_or_bug(e, "seed string"))?;
    pool.push(first);

    for op in 0..TRACE_OPS {
        if pool.len() > TRACE_POOL_CAP {
            pool.drain(..pool.len() - TRACE_POOL_CAP);
        }
        let pick = rng.gen_range(0..pool.len());
        let (h, n) = pool[pick].clone();
        match rng.gen_range(0..9u32) {
            0 => {
                let single = alphabet[rng.gen_range(0..alphabet.len())];
                let h2 = coll
                    .new_string(single)
                    .map_err(|e| epoch_or_bug(e, "new"))?;
                pool.push((h2, NaiveString::new(single)));
            }
            1 => {
                let pair = fresh(&mut coll, &mut rng).map_err(|e| epoch_or_bug(e, "from"))?;
                pool.push(pair);
            }
            2 => {
                let i = rng.gen_range(0..n.len());
                let got = h.get(i).map_err(|e| epoch_or_bug(e, "get"))?;
                if got != n.get(i).unwrap() {
                    return Err(TraceFail::Mismatch(format!("get({i}) diverged at op {op}")));
                }
                checks += 1;
            }
            3 => {
                let i = rng.gen_range(0..n.len());
                let s = alphabet[rng.gen_range(0..alphabet.len())];
                let h2 = coll.set(&h, i, s).map_err(|e| epoch_or_bug(e, "set"))?;
                pool.push((h2, n.set(i, s).unwrap()));
            }
            4 if n.len() >= 2 => {
                let i = rng.gen_range(1..n.len());
                let (l, r) = coll.split(&h, i).map_err(|e| epoch_or_bug(e, "split"))?;
                let (nl, nr) = n.split(i).unwrap();
                pool.push((l, nl));
                pool.push((r, nr));
            }
            5 => {
                let (h2, n2) = pool[rng.gen_range(0..pool.len())].clone();
                if n.len() + n2.len() <= TRACE_LEN_CAP {
                    let c = coll
                        .concatenate(&h, &h2)
                        .map_err(|e| epoch_or_bug(e, "concatenate"))?;
                    pool.push((c, n.concatenate(&n2)));
                }
            }
            6 if n.len() >= 2 => {
                let k = rng.gen_range(0..n.len());
                let r = coll.rotate(&h, k).map_err(|e| epoch_or_bug(e, "rotate"))?;
                pool.push((r, n.rotate(k).unwrap()));
            }
            7 => {
                let (h2, n2) = pool[rng.gen_range(0..pool.len())].clone();
                let got = lcp(&h, &h2).map_err(|e| epoch_or_bug(e, "lcp"))?;
                if got != n.lcp(&n2) {
                    return Err(TraceFail::Mismatch(format!("lcp diverged at op {op}")));
                }
                checks += 1;
            }
            8 => {
                let (h2, n2) = pool[rng.gen_range(0..pool.len())].clone();
                let got = equal(&h, &h2).map_err(|e| epoch_or_bug(e, "equal"))?;
                if got != n.equal(&n2) {
                    return Err(TraceFail::Mismatch(format!("equal diverged at op {op}")));
                }
                checks += 1;
            }
            _ => {}
        }
        if op % 16 == 0 {
            let (h, n) = &pool[pool.len() - 1];
            if h.to_symbols() != n.0 {
                return Err(TraceFail::Mismatch(format!("content drift at op {op}")));
            }
            checks += 1;
        }
    }
    for (h, n) in &pool {
        if h.to_symbols() != n.0 {
            return Err(TraceFail::Mismatch("content drift in final sweep".into()));
        }
        checks += 1;
    }
    ctx.heights
        .push((coll.stats().max_height, coll.stats().leaves_built));
    Ok(checks)
}

// ===========================================================================
// Criterion 2: canonical shape regardless of construction path
// ===========================================================================

const CANON_STRINGS: usize = 1000;
const CANON_PATHS: usize = 10;

fn canonical_construction_paths(ctx: &mut Ctx) -> Result<String, String> {
    let mut attempt = 0u64;
    loop {
        match canon_run(mix(0xCA40, attempt), ctx) {
            Ok(detail) => return Ok(detail),
            Err(CanonFail::Epoch(_)) if attempt < 5 => attempt += 1,
            Err(CanonFail::Epoch(e)) => return Err(format!("persistent epoch failures: {e}")),
            Err(CanonFail::Mismatch(msg)) => return Err(msg),
        }
    }
}

enum CanonFail {
    Epoch(DdtError),
    Mismatch(String),
}

fn canon_run(seed: u64, ctx: &mut Ctx) -> Result<String, CanonFail> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut coll = Collection::new(HashSeed::new(seed));
    let lift = |e: DdtError, what: &str| {
        if is_epoch_fatal(&e) {
            CanonFail::Epoch(e)
        } else {
            CanonFail::Mismatch(format!("{what}: unexpected error {e}"))
        }
    };

    for case in 0..CANON_STRINGS {
        let len = rng.gen_range(1..=64usize);
        let alpha = rng.gen_range(2..=4u8);
        let content: Vec<u8> = (0..len).map(|_| b'a' + rng.gen_range(0..alpha)).collect();

        let reference = coll
            .from_symbols(&content)
            .map_err(|e| lift(e, "reference build"))?;
        let want = (reference.fingerprint(), reference.shape_digest());

        for path in 0..CANON_PATHS {
            let built = if path % 2 == 0 {
                assemble(&mut coll, &content, &mut rng)
            } else {
                split_and_rejoin(&mut coll, &content, &mut rng)
            }
            .map_err(|e| lift(e, "path build"))?;
            let got = (built.fingerprint(), built.shape_digest());
            if got != want {
                return Err(CanonFail::Mismatch(format!(
                    "case {case} path {path}: shape or fingerprint depends on \
                     construction order (len {len})"
                )));
            }
        }
    }
    ctx.heights
        .push((coll.stats().max_height, coll.stats().leaves_built));
    Ok(format!(
        "{CANON_STRINGS} strings x {CANON_PATHS} paths, fingerprints and shape \
         digests all path-independent"
    ))
}

/// Random binary partition assembled by concatenation, with occasional
/// direct subtree builds so mixed orders occur.
fn assemble(
    coll: &mut Collection,
    content: &[u8],
    rng: &mut StdRng,
) -> Result<StringHandle, DdtError> {
    if content.len() == 1 {
        return coll.new_string(content[0]);
    }
    if content.len() > 1 && rng.gen_bool(0.25) {
        return coll.from_symbols(content);
    }
    let k = rng.gen_range(1..content.len());
    let left = assemble(coll, &content[..k], rng)?;
    let right = assemble(coll, &content[k..], rng)?;
    coll.concatenate(&left, &right)
}

/// Build whole, split at a random interior point, and join again; repeated
/// twice for nontrivial lengths.
fn split_and_rejoin(
    coll: &mut Collection,
    content: &[u8],
    rng: &mut StdRng,
) -> Result<StringHandle, DdtError> {
    let mut h = coll.from_symbols(content)?;
    if content.len() >= 2 {
        for _ in 0..2 {
            let k = rng.gen_range(1..content.len() as u64);
            let (l, r) = coll.split(&h, k)?;
            h = coll.concatenate(&l, &r)?;
        }
    }
    Ok(h)
}

// ===========================================================================
// Criterion 3: solver differential against the DP oracle
// ===========================================================================

const SOLVER_CASES: usize = 1000;

fn subset_sum_differential(ctx: &mut Ctx) -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x5b5e7);
    let mut witnesses = 0u64;
    for case in 0..SOLVER_CASES {
        let m = rng.gen_range(1..=512u64);
        // Every fifth case gets heavy multiplicities to exercise the
        // skipped-copy path; total multiplicity stays <= 1024.
        let (k, max_count) = if case % 5 == 0 { (6, 170) } else { (12, 8) };
        let k = rng.gen_range(1..=k);
        let pairs: Vec<(u64, u64)> = (0..k)
            .map(|_| (rng.gen_range(0..2 * m), rng.gen_range(1..=max_count)))
            .collect();
        let inst = Instance::from_pairs(m, pairs);
        assert!(inst.total_multiplicity() <= 1024);

        let res = solve_all(&inst, mix(0xD1FF, case as u64))
            .map_err(|e| format!("case {case}: solve_all failed: {e}"))?;
        let (want, _) = dp_subset_sum(m, inst.items());
        if res.reachable() != &want[..] {
            return Err(format!("case {case}: reachable set differs from DP oracle"));
        }
        for t in 0..m {
            if !res.is_reachable(t) {
                continue;
            }
            let w = reconstruct(&res, t)
                .map_err(|e| format!("case {case}: reconstruct({t}): {e}"))?
                .ok_or_else(|| format!("case {case}: target {t} lost its witness"))?;
            if !verify_witness(&inst, t, &w) {
                return Err(format!("case {case}: witness for target {t} invalid"));
            }
            witnesses += 1;
        }
        ctx.bit_fixes.push((res.stats.bit_fixes, m));
        ctx.heights
            .push((res.stats.max_height, res.stats.leaves_built));
    }
    Ok(format!(
        "{SOLVER_CASES} instances (m <= 512), reachable sets identical to DP, \
         {witnesses} witnesses verified"
    ))
}

// ===========================================================================
// Criterion 4: bit-fix work bound
// ===========================================================================

fn bit_fix_bound(ctx: &mut Ctx) -> Result<String, String> {
    if ctx.bit_fixes.is_empty() {
        subset_sum_differential(ctx)?;
    }
    let mut worst = 0.0f64;
    for &(fixes, m) in &ctx.bit_fixes {
        let ratio = fixes as f64 / (2 * m) as f64;
        if fixes > 2 * m {
            return Err(format!(
                "bit_fixes {fixes} exceeds 2m = {} (m = {m})",
                2 * m
            ));
        }
        worst = worst.max(ratio);
    }
    Ok(format!(
        "bit_fixes <= 2m on all {} instances; max bit_fixes/2m = {worst:.3}",
        ctx.bit_fixes.len()
    ))
}

// ===========================================================================
// Criterion 5: height bound and height-cap non-firing at scale
// ===========================================================================

const CAP_RUNS: usize = 100;
const CAP_LEN: usize = 100_000;

fn height_bound(ctx: &mut Ctx) -> Result<String, String> {
    if ctx.heights.is_empty() {
        differential_traces(ctx)?;
    }
    // Part A: the max level observed anywhere in criteria 1-3 stays within
    // 5*log2(total leaves ingested by those workloads). The log-height
    // guarantee is asymptotic, so tiny epochs (a solver run at m = 4 ingests
    // four symbols) are audited against the capped per-epoch bound the
    // library enforces -- 5*ceil(log2(max(L, 256))) -- not against 5*log2(L),
    // which a two-node spine exceeds with constant probability.
    let mut max_level = 0u32;
    let mut total_leaves = 0u64;
    for &(h, leaves) in &ctx.heights {
        max_level = max_level.max(h);
        total_leaves += leaves;
        let capped = leaves.max(256) as f64;
        let per_epoch = 5.0 * capped.log2().ceil();
        if f64::from(h) > per_epoch {
            return Err(format!(
                "height {h} exceeds the per-epoch cap 5*ceil(log2({leaves} leaves, floor 256)) \
                 = {per_epoch:.0}"
            ));
        }
    }
    let bound = 5.0 * (total_leaves.max(2) as f64).log2();
    if f64::from(max_level) > bound {
        return Err(format!(
            "max level {max_level} exceeds 5*log2({total_leaves} total leaves) = {bound:.1}"
        ));
    }

    // Part B: the cap never fires at n = 10^5 across 100 seeded runs. A
    // single firing is a tolerated content/seed accident if a fresh seed
    // clears it; two firings would be systematic.
    let mut firings = 0u32;
    let mut max_height = 0u32;
    for k in 0..CAP_RUNS {
        let mut attempt = 0u64;
        loop {
            match cap_run(mix(0x5CA1E, ((k as u64) << 8) | attempt), k) {
                Ok(h) => {
                    max_height = max_height.max(h);
                    break;
                }
                Err(e) if is_epoch_fatal(&e) => {
                    firings += 1;
                    if firings > 1 {
                        return Err(format!(
                            "height cap fired {firings} times (run {k}): systematic"
                        ));
                    }
                    attempt += 1;
                }
                Err(e) => return Err(format!("run {k}: unexpected error {e}")),
            }
        }
    }
    Ok(format!(
        "{} epochs: max level {max_level} <= 5*log2({total_leaves} leaves) = {bound:.1}, \
         all within per-epoch caps; cap firings at n = {CAP_LEN}: {firings}/{CAP_RUNS} runs \
         (max level {max_height})",
        ctx.heights.len(),
    ))
}

/// One n = 10^5 epoch: bulk build plus a few seam-heavy edits; returns the
/// epoch's max level after checking the bound.
fn cap_run(seed: u64, k: usize) -> Result<u32, DdtError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut coll = Collection::new(HashSeed::new(seed));
    // Binary content stresses long equal runs; wider alphabets stress the
    // increasing-run grouping. Alternate between them.
    let alpha = if k.is_multiple_of(2) { 2 } else { 4 };
    let content: Vec<u8> = (0..CAP_LEN)
        .map(|_| b'0' + rng.gen_range(0..alpha))
        .collect();
    let mut h = coll.from_symbols(&content)?;
    for _ in 0..10 {
        match rng.gen_range(0..3u32) {
            0 => {
                let k = rng.gen_range(1..h.len());
                let (l, r) = coll.split(&h, k)?;
                h = coll.concatenate(&r, &l)?;
            }
            1 => {
                let k = rng.gen_range(0..h.len());
                h = coll.rotate(&h, k)?;
            }
            _ => {
                let i = rng.gen_range(0..h.len());
                h = coll.set(&h, i, b'0' + rng.gen_range(0..alpha))?;
            }
        }
    }
    let stats = coll.stats();
    let bound = 5.0 * (stats.leaves_built.max(2) as f64).log2();
    assert!(
        f64::from(stats.max_height) <= bound,
        "height {} exceeds 5*log2({}) = {bound:.1}",
        stats.max_height,
        stats.leaves_built
    );
    Ok(stats.max_height)
}

// ===========================================================================
// Criterion 6: EGZ total correctness up to n = 30
// ===========================================================================

const EGZ_MAX_N: u64 = 30;
const EGZ_RANDOM_PER_N: usize = 200;

fn egz_total_correctness() -> Result<String, String> {
    let mut cases = 0u64;
    let mut check = |n: u64, elems: Vec<u64>, what: &str| -> Result<(), String> {
        let input = EgzInput::new(n, elems).expect("2n-1 elements by construction");
        let cert =
            egz(&input, mix(0xE62, cases)).map_err(|e| format!("n={n} {what}: egz failed: {e}"))?;
        if cert.indices.len() as u64 != n {
            return Err(format!(
                "n={n} {what}: certificate has {} indices",
                cert.indices.len()
            ));
        }
        if !verify_egz(&input, &cert) {
            return Err(format!("n={n} {what}: certificate failed verification"));
        }
        cases += 1;
        Ok(())
    };

    let mut rng = StdRng::seed_from_u64(0xE62);
    for n in 1..=EGZ_MAX_N {
        let len = (2 * n - 1) as usize;
        for _ in 0..EGZ_RANDOM_PER_N {
            let elems: Vec<u64> = (0..len).map(|_| rng.gen_range(0..3 * n)).collect();
            check(n, elems, "random")?;
        }
        // Adversarial families: no variation, maximal variation, and a
        // lone disruptor.
        check(n, vec![rng.gen_range(0..n); len], "all-equal")?;
        let mut wrap: Vec<u64> = (0..n).chain(0..n - 1).collect();
        wrap.truncate(len);
        check(n, wrap, "distinct-residues-repeated")?;
        let mut outlier = vec![0u64; len];
        outlier[rng.gen_range(0..len)] = rng.gen_range(1..n.max(2));
        check(n, outlier, "single-outlier")?;
        check(n, vec![n - 1; len], "max-residue")?;
    }
    Ok(format!(
        "{cases} instances over n <= {EGZ_MAX_N}, every certificate verified \
         with cardinality exactly n"
    ))
}

// ===========================================================================
// Criterion 7: solver doubling ratio at desk scale
// ===========================================================================

const SCALING_REPS: usize = 5;

fn dense_instance(m: u64, seed: u64) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed ^ m);
    let want = (m / 8) as usize;
    let mut seen = HashSet::new();
    let mut values = Vec::with_capacity(want);
    while values.len() < want {
        let v = rng.gen_range(0..m);
        if seen.insert(v) {
            values.push(v);
        }
    }
    Instance::from_values(m, &values)
}

fn median_secs(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples[samples.len() / 2]
}

fn solver_scaling() -> Result<String, String> {
    let seed = 0x5CA11;
    // Warm the allocator and caches off the record.
    let _ = solve_all(&dense_instance(1 << 14, seed), seed)
        .map_err(|e| format!("warmup failed: {e}"))?;

    let mut medians = Vec::new();
    for shift in [16u32, 17] {
        let m = 1u64 << shift;
        let inst = dense_instance(m, seed);
        let mut times = Vec::with_capacity(SCALING_REPS);
        for _ in 0..SCALING_REPS {
            let start = Instant::now();
            let res = solve_all(&inst, seed).map_err(|e| format!("m=2^{shift}: {e}"))?;
            times.push(start.elapsed().as_secs_f64());
            drop(res);
        }
        medians.push(median_secs(&mut times));
    }
    let ratio = medians[1] / medians[0];
    let detail = format!(
        "median 2^16: {:.2}s, 2^17: {:.2}s, doubling ratio {ratio:.2} \
         (accept [1.8, 2.6]; linearithmic ~2.06, quadratic ~4)",
        medians[0], medians[1]
    );
    if (1.8..=2.6).contains(&ratio) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ===========================================================================
// Criterion 8: EGZ doubling ratios
// ===========================================================================

fn egz_scaling() -> Result<String, String> {
    let sizes = [6144u64, 12_288, 24_576, 49_152];
    let mut medians = Vec::new();
    for &n in &sizes {
        let mut rng = StdRng::seed_from_u64(mix(0xE62, n));
        let elems: Vec<u64> = (0..2 * n - 1).map(|_| rng.gen_range(0..n)).collect();
        let input = EgzInput::new(n, elems).expect("2n-1 elements");
        let _ = egz(&input, 1).map_err(|e| format!("warmup n={n}: {e}"))?;
        let mut times = Vec::with_capacity(SCALING_REPS);
        for rep in 0..SCALING_REPS {
            let start = Instant::now();
            let cert = egz(&input, rep as u64).map_err(|e| format!("n={n}: {e}"))?;
            times.push(start.elapsed().as_secs_f64());
            drop(cert);
        }
        medians.push(median_secs(&mut times) * 1e3);
    }
    let ratios: Vec<f64> = (1..sizes.len())
        .map(|i| medians[i] / medians[i - 1])
        .collect();
    let detail = format!(
        "median ms {:?}, doubling ratios {:?} (accept [1.8, 2.6])",
        medians
            .iter()
            .map(|t| (t * 10.0).round() / 10.0)
            .collect::<Vec<_>>(),
        ratios
            .iter()
            .map(|r| (r * 100.0).round() / 100.0)
            .collect::<Vec<_>>()
    );
    if ratios.iter().all(|r| (1.8..=2.6).contains(r)) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ===========================================================================
// Criterion 9: forced collisions with a truncated fingerprint
// ===========================================================================

fn collision_machinery() -> Result<String, String> {
    let inst = Instance::from_pairs(4, [(2u64, 3u64), (3, 1)]);
    let (want, _) = dp_subset_sum(4, inst.items());
    let mut total_restarts = 0u64;
    for base in 0..20u64 {
        let opts = SolverOptions {
            seed: mix(0xC0111, base),
            fingerprint_bits: 8,
            max_attempts: 100_000,
        };
        let res = solve_all_with(&inst, &opts)
            .map_err(|e| format!("seed {base}: solver gave up: {e}"))?;
        if res.reachable() != &want[..] {
            return Err(format!("seed {base}: 8-bit result differs from oracle"));
        }
        for t in 0..4 {
            if res.is_reachable(t) {
                let w = reconstruct(&res, t)
                    .map_err(|e| format!("seed {base}: reconstruct: {e}"))?
                    .ok_or_else(|| format!("seed {base}: witness missing"))?;
                if !verify_witness(&inst, t, &w) {
                    return Err(format!("seed {base}: witness for {t} invalid"));
                }
            }
        }
        total_restarts += res.stats.restarts;
    }
    // Trees this small cannot reach the height cap, so every restart here is
    // a detected collision.
    if total_restarts == 0 {
        return Err(
            "8-bit fingerprints produced zero collision restarts across 20 seeds".to_string(),
        );
    }
    Ok(format!(
        "{total_restarts} collision restarts across 20 seeds, all results \
         oracle-correct with verified witnesses"
    ))
}
