//! `ddt`: command-line front end for the tree-backed solvers.
//!
//! Exit codes: 0 success, 1 negative result (unreachable target, invalid
//! certificate, failed selftest), 2 input error.

mod bench;
mod parse;
mod report;
mod selftest;

use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use ddt_core::{
    contiguous_zero_sum, dot, egz_with_stats, reconstruct, solve_all, verify_egz, verify_witness,
    Collection, EgzCertificate, EgzInput, HashSeed, Instance, Witness,
};
use serde_json::{json, Value};

use parse::{parse_indices, parse_instance, parse_witness_parts, ParsedInstance};
use report::{emit, stats_line, witness_parts, witness_text, Report, StatsBlock};

#[derive(Parser)]
#[command(
    name = "ddt",
    version,
    about = "Persistent fingerprinted strings, modular subset-sum, and zero-sum solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Base seed for fingerprinting and solver restarts; the DDT_SEED
    /// environment variable overrides this. Defaults to system entropy.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Emit the report as a single JSON line.
    #[arg(long, global = true)]
    json: bool,

    /// Read the instance from this path instead of stdin.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether the target is a subset sum mod m and print a witness.
    #[command(name = "subset-sum")]
    SubsetSum,
    /// Pick n of 2n-1 elements summing to 0 mod n.
    Egz,
    /// Find the first contiguous run of n elements summing to 0 mod n.
    #[command(name = "zero-run")]
    ZeroRun,
    /// Re-check a previously emitted witness or certificate.
    Verify {
        /// Certificate file: witness tokens, EGZ indices, or a run's
        /// start and end, matching the instance header.
        #[arg(long)]
        cert: PathBuf,
    },
    /// Time solve_all on dense random instances and report medians.
    Bench {
        #[arg(long, default_value_t = 12)]
        min_shift: u32,
        #[arg(long, default_value_t = 17)]
        max_shift: u32,
        #[arg(long, default_value_t = 5)]
        reps: u32,
    },
    /// Emit the tree for a raw symbol string as Graphviz DOT.
    #[command(name = "dump-tree")]
    DumpTree {
        /// Also write the DOT source to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Run the embedded differential suites.
    Selftest,
}

/// Failures that abort the run, as opposed to negative results.
enum CliError {
    /// Unreadable or unparseable input: exit 2.
    Input(String),
    /// Solver gave up (possible only in narrowed test configurations): exit 1.
    Runtime(String),
}

impl CliError {
    fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    fn report(&self) -> (&str, u8) {
        match self {
            CliError::Input(msg) => (msg, 2),
            CliError::Runtime(msg) => (msg, 1),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            let (msg, code) = err.report();
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let seed = resolve_seed(cli.seed)?;
    match cli.command {
        Cmd::SubsetSum => cmd_subset_sum(&cli, seed),
        Cmd::Egz => cmd_egz(&cli, seed),
        Cmd::ZeroRun => cmd_zero_run(&cli, seed),
        Cmd::Verify { ref cert } => cmd_verify(&cli, seed, cert),
        Cmd::Bench {
            min_shift,
            max_shift,
            reps,
        } => cmd_bench(&cli, seed, min_shift, max_shift, reps),
        Cmd::DumpTree { ref dot } => cmd_dump_tree(&cli, seed, dot.as_deref()),
        Cmd::Selftest => cmd_selftest(&cli, seed),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Ok(raw) = std::env::var("DDT_SEED") {
        return raw.trim().parse().map_err(|_| {
            CliError::input(format!(
                "DDT_SEED must be an unsigned 64-bit integer, got {raw:?}"
            ))
        });
    }
    Ok(flag.unwrap_or_else(rand::random))
}

fn read_input(path: Option<&std::path::Path>) -> Result<String, CliError> {
    match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", p.display()))),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::input(format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn read_input_bytes(path: Option<&std::path::Path>) -> Result<Vec<u8>, CliError> {
    match path {
        Some(p) => std::fs::read(p)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", p.display()))),
        None => {
            let mut buf = Vec::new();
            std::io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| CliError::input(format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn parsed_instance(cli: &Cli) -> Result<ParsedInstance, CliError> {
    let text = read_input(cli.input.as_deref())?;
    parse_instance(&text).map_err(|e| CliError::input(e.to_string()))
}

// ---------------------------------------------------------------------------
// subset-sum
// ---------------------------------------------------------------------------

fn cmd_subset_sum(cli: &Cli, seed: u64) -> Result<ExitCode, CliError> {
    let ParsedInstance::SubsetSum { m, t, pairs } = parsed_instance(cli)? else {
        return Err(CliError::input(
            "subset-sum needs an 'm=<int> t=<int>' header",
        ));
    };
    let inst = Instance::from_pairs(m, pairs);
    let t = t % m;

    let start = Instant::now();
    let res = solve_all(&inst, seed).map_err(|e| CliError::Runtime(e.to_string()))?;
    let witness = reconstruct(&res, t).map_err(|e| CliError::Runtime(e.to_string()))?;
    let elapsed = report::elapsed_ms(start);

    let reachable = witness.is_some();
    if let Some(w) = &witness {
        assert!(
            verify_witness(&inst, t, w),
            "internal error: witness failed verification before printing"
        );
    }

    let mut rep = Report::new("subset-sum", seed);
    rep.result = Value::Bool(reachable);
    rep.witness = witness.as_ref().map(witness_parts);
    rep.stats = res.stats.into();
    rep.elapsed_ms = elapsed;

    let mut body = vec![format!("reachable={reachable}")];
    if let Some(w) = &witness {
        body.push(format!("witness={}", witness_text(w)));
    }
    emit(cli.json, &rep, &body);
    Ok(ExitCode::from(if reachable { 0 } else { 1 }))
}

// ---------------------------------------------------------------------------
// egz
// ---------------------------------------------------------------------------

fn cmd_egz(cli: &Cli, seed: u64) -> Result<ExitCode, CliError> {
    let ParsedInstance::Elements { n, values } = parsed_instance(cli)? else {
        return Err(CliError::input("egz needs an 'n=<int>' header"));
    };
    let input = EgzInput::new(n, values).map_err(|e| CliError::input(e.to_string()))?;

    let start = Instant::now();
    let (cert, stats) =
        egz_with_stats(&input, seed).map_err(|e| CliError::Runtime(e.to_string()))?;
    let elapsed = report::elapsed_ms(start);

    assert!(
        verify_egz(&input, &cert),
        "internal error: certificate failed verification before printing"
    );

    let mut rep = Report::new("egz", seed);
    rep.result = Value::Bool(true);
    rep.indices = Some(cert.indices.iter().map(|&i| i as u64).collect());
    rep.stats = stats.into();
    rep.elapsed_ms = elapsed;

    let list = cert
        .indices
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    emit(cli.json, &rep, &[format!("indices={list}")]);
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// zero-run
// ---------------------------------------------------------------------------

fn cmd_zero_run(cli: &Cli, seed: u64) -> Result<ExitCode, CliError> {
    let ParsedInstance::Elements { n, values } = parsed_instance(cli)? else {
        return Err(CliError::input("zero-run needs an 'n=<int>' header"));
    };

    let start = Instant::now();
    let (s, e) = contiguous_zero_sum(n, &values).map_err(|e| CliError::input(e.to_string()))?;
    let elapsed = report::elapsed_ms(start);

    let mut rep = Report::new("zero-run", seed);
    rep.result = json!({ "start": s, "end": e });
    rep.elapsed_ms = elapsed;

    emit(cli.json, &rep, &[format!("range={s}..={e}")]);
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(cli: &Cli, seed: u64, cert_path: &std::path::Path) -> Result<ExitCode, CliError> {
    let cert_text = std::fs::read_to_string(cert_path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", cert_path.display())))?;

    let valid = match parsed_instance(cli)? {
        ParsedInstance::SubsetSum { m, t, pairs } => {
            let inst = Instance::from_pairs(m, pairs);
            let parts =
                parse_witness_parts(&cert_text).map_err(|e| CliError::input(e.to_string()))?;
            verify_witness(&inst, t, &Witness { parts })
        }
        ParsedInstance::Elements { n, values } => {
            let indices = parse_indices(&cert_text).map_err(|e| CliError::input(e.to_string()))?;
            // 2n-1 elements: an EGZ certificate. Exactly n: a zero run given
            // as "start end". n = 1 is both; the EGZ reading wins.
            if values.len() as u64 == 2 * n - 1 {
                let input = EgzInput::new(n, values).map_err(|e| CliError::input(e.to_string()))?;
                let cert = EgzCertificate {
                    indices: indices.iter().map(|&i| i as usize).collect(),
                };
                verify_egz(&input, &cert)
            } else if values.len() as u64 == n {
                verify_zero_run(n, &values, &indices)
            } else {
                return Err(CliError::input(format!(
                    "n={n} instance must have {n} (zero-run) or {} (egz) elements, got {}",
                    2 * n - 1,
                    values.len()
                )));
            }
        }
    };

    let mut rep = Report::new("verify", seed);
    rep.result = Value::Bool(valid);
    emit(cli.json, &rep, &[format!("valid={valid}")]);
    Ok(ExitCode::from(if valid { 0 } else { 1 }))
}

fn verify_zero_run(n: u64, values: &[u64], cert: &[u64]) -> bool {
    let &[s, e] = cert else {
        return false;
    };
    if s > e || e >= n {
        return false;
    }
    let sum = values[s as usize..=e as usize]
        .iter()
        .fold(0u64, |acc, &v| (acc + v % n) % n);
    sum == 0
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn cmd_bench(
    cli: &Cli,
    seed: u64,
    min_shift: u32,
    max_shift: u32,
    reps: u32,
) -> Result<ExitCode, CliError> {
    if min_shift > max_shift || max_shift >= 40 || reps == 0 {
        return Err(CliError::input(
            "bench needs min_shift <= max_shift < 40 and reps >= 1",
        ));
    }
    if !cli.json {
        println!("command=bench");
        println!("seed={seed}");
    }
    let start = Instant::now();
    let rows = bench::run_sweep(seed, min_shift, max_shift, reps, !cli.json);
    if cli.json {
        let mut rep = Report::new("bench", seed);
        rep.result = serde_json::to_value(&rows).expect("rows serialize");
        rep.elapsed_ms = report::elapsed_ms(start);
        emit(true, &rep, &[]);
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// dump-tree
// ---------------------------------------------------------------------------

fn cmd_dump_tree(
    cli: &Cli,
    seed: u64,
    dot_path: Option<&std::path::Path>,
) -> Result<ExitCode, CliError> {
    let mut bytes = read_input_bytes(cli.input.as_deref())?;
    if bytes.last() == Some(&b'\n') {
        bytes.pop();
    }
    if bytes.is_empty() {
        return Err(CliError::input("dump-tree needs at least one symbol"));
    }

    let start = Instant::now();
    let mut coll = Collection::new(HashSeed::new(seed));
    let handle = coll
        .from_symbols(&bytes)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let source = dot::to_dot(&handle);
    let elapsed = report::elapsed_ms(start);

    if let Some(p) = dot_path {
        std::fs::write(p, &source)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display())))?;
    }

    let stats = StatsBlock {
        max_height: coll.stats().max_height,
        nodes_built: coll.stats().nodes_built,
        ..StatsBlock::default()
    };
    if cli.json {
        let mut rep = Report::new("dump-tree", seed);
        rep.result = Value::Bool(true);
        rep.dot = Some(source);
        rep.stats = stats;
        rep.elapsed_ms = elapsed;
        emit(true, &rep, &[]);
    } else if let Some(p) = dot_path {
        println!("command=dump-tree");
        println!("seed={seed}");
        println!("dot={}", p.display());
        println!("{}", stats_line(&stats));
    } else {
        // Raw DOT on stdout stays pipeable into graphviz; the seed echo
        // rides along as a comment.
        print!(
            "// command=dump-tree\n// seed={seed}\n// {}\n{source}",
            stats_line(&stats)
        );
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

fn cmd_selftest(cli: &Cli, seed: u64) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let suites = selftest::run_all(seed);
    let elapsed = report::elapsed_ms(start);
    let ok = suites.iter().all(|s| s.error.is_none());

    if cli.json {
        let mut rep = Report::new("selftest", seed);
        rep.result = Value::Array(
            suites
                .iter()
                .map(|s| {
                    json!({
                        "suite": s.name,
                        "cases": s.cases,
                        "ok": s.error.is_none(),
                        "error": s.error,
                    })
                })
                .collect(),
        );
        rep.elapsed_ms = elapsed;
        emit(true, &rep, &[]);
    } else {
        println!("command=selftest");
        println!("seed={seed}");
        for s in &suites {
            match &s.error {
                None => println!("suite={} cases={} status=ok", s.name, s.cases),
                Some(msg) => println!("suite={} status=FAIL {msg}", s.name),
            }
        }
        println!("selftest={}", if ok { "ok" } else { "FAIL" });
    }
    Ok(ExitCode::from(if ok { 0 } else { 1 }))
}
