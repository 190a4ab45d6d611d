//! Report emission. JSON keys serialize in declared order and the schema is
//! stable: command, seed, result, witness|indices|dot, stats, elapsed_ms.
//! Text mode deliberately omits timing so identical (input, seed, command)
//! runs are byte-identical.

use ddt_core::{SolveStats, Witness};
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StatsBlock {
    pub rotations: u64,
    pub bit_fixes: u64,
    pub skipped_copies: u64,
    pub restarts: u64,
    pub max_height: u32,
    pub nodes_built: u64,
}

impl From<SolveStats> for StatsBlock {
    fn from(s: SolveStats) -> Self {
        StatsBlock {
            rotations: s.rotations,
            bit_fixes: s.bit_fixes,
            skipped_copies: s.skipped_copies,
            restarts: s.restarts,
            max_height: s.max_height,
            nodes_built: s.nodes_built,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessPart {
    pub value: u64,
    pub count: u64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub seed: u64,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessPart>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dot: Option<String>,
    pub stats: StatsBlock,
    pub elapsed_ms: f64,
}

impl Report {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Report {
            command,
            seed,
            result: Value::Null,
            witness: None,
            indices: None,
            dot: None,
            stats: StatsBlock::default(),
            elapsed_ms: 0.0,
        }
    }
}

pub fn witness_parts(w: &Witness) -> Vec<WitnessPart> {
    w.parts
        .iter()
        .map(|&(value, count)| WitnessPart { value, count })
        .collect()
}

pub fn witness_text(w: &Witness) -> String {
    w.parts
        .iter()
        .map(|&(value, count)| format!("{value}:{count}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn stats_line(s: &StatsBlock) -> String {
    format!(
        "stats rotations={} bit_fixes={} skipped_copies={} restarts={} max_height={} nodes_built={}",
        s.rotations, s.bit_fixes, s.skipped_copies, s.restarts, s.max_height, s.nodes_built
    )
}

/// One report to stdout: a single JSON line, or `key=value` text lines with
/// the caller-supplied body between the seed echo and the stats line.
pub fn emit(json: bool, report: &Report, text_body: &[String]) {
    if json {
        println!(
            "{}",
            serde_json::to_string(report).expect("report serialization cannot fail")
        );
    } else {
        println!("command={}", report.command);
        println!("seed={}", report.seed);
        for line in text_body {
            println!("{line}");
        }
        println!("{}", stats_line(&report.stats));
    }
}

pub fn elapsed_ms(start: std::time::Instant) -> f64 {
    let ms = start.elapsed().as_secs_f64() * 1e3;
    (ms * 1e3).round() / 1e3
}
