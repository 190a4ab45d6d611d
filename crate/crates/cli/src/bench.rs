//! Scaling sweep: dense random instances at m = 2^min..2^max, repeated
//! solves, median wall time per size. Counters are seed-determined and
//! identical across repetitions, so they are reported once.

use std::time::Instant;

use ddt_core::{solve_all, Instance};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::report::{stats_line, StatsBlock};

#[derive(Debug, Serialize)]
pub struct SizeRow {
    pub m: u64,
    pub median_ms: f64,
    pub stats: StatsBlock,
}

/// m/8 distinct uniform values, multiplicity 1 each: enough mass to make the
/// reachable set dense while keeping the merge loop busy.
pub fn dense_instance(m: u64, seed: u64) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed ^ m);
    let want = (m / 8).max(1) as usize;
    let mut seen = std::collections::HashSet::new();
    let mut values = Vec::with_capacity(want);
    while values.len() < want {
        let v = rng.gen_range(0..m);
        if seen.insert(v) {
            values.push(v);
        }
    }
    Instance::from_values(m, &values)
}

fn median(times: &mut [f64]) -> f64 {
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times[times.len() / 2]
}

/// Runs the sweep, printing text rows as they finish (a full default sweep
/// takes minutes); returns all rows for the JSON report.
pub fn run_sweep(seed: u64, min_shift: u32, max_shift: u32, reps: u32, text: bool) -> Vec<SizeRow> {
    let mut rows = Vec::new();
    for shift in min_shift..=max_shift {
        let m = 1u64 << shift;
        let inst = dense_instance(m, seed);
        let mut times = Vec::with_capacity(reps as usize);
        let mut stats = StatsBlock::default();
        for _ in 0..reps {
            let start = Instant::now();
            let res = solve_all(&inst, seed).expect("64-bit solve cannot exhaust attempts");
            times.push(start.elapsed().as_secs_f64() * 1e3);
            stats = res.stats.into();
        }
        let row = SizeRow {
            m,
            median_ms: (median(&mut times) * 1e3).round() / 1e3,
            stats,
        };
        if text {
            println!(
                "m={} median_ms={} {}",
                row.m,
                row.median_ms,
                stats_line(&row.stats)
            );
        }
        rows.push(row);
    }
    rows
}
