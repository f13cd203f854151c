//! Command-line front end: build encodings, replay operation scripts,
//! verify against the naive oracle, and benchmark contraction scaling.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 input error, 3 illegal
//! operation.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use planarsucc_core::encoding::DynamicEncoding;
use planarsucc_core::graph::{self, ScriptOp};
use planarsucc_core::microtable::MicroTable;
use planarsucc_core::partition::PartitionConfig;
use planarsucc_core::verify::{self, VerifyParams};
use planarsucc_core::Error;

#[derive(Parser)]
#[command(name = "planarsucc", about = "Succinct dynamic encoding of planar graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Outer piece size parameter.
    #[arg(long, default_value_t = 64)]
    r: u32,
    /// Micro piece size parameter (2..=6).
    #[arg(long = "r-prime", default_value_t = 4)]
    r_prime: u32,
    /// Seed for generated inputs and operation sequences.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Enable the hash mirrors for adjacency queries and edge deletion.
    #[arg(long)]
    hashing: bool,
    /// Run the full invariant scan after every operation.
    #[arg(long = "check-every-op")]
    check_every_op: bool,
    /// Load or build-and-save the lookup table cache at this path.
    #[arg(long = "table-cache")]
    table_cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the encoding for a graph file and print structure statistics.
    Build {
        graph: PathBuf,
        /// Print the two-level decomposition.
        #[arg(long = "dump-partition")]
        dump_partition: bool,
        /// Print the encoding state dump (PSE1).
        #[arg(long = "dump-encoding")]
        dump_encoding: bool,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Replay an operation script against the encoding.
    Run {
        graph: PathBuf,
        /// Script file: one op per line (C u v | DV u | DE u v | N u | D u | A u v).
        #[arg(long)]
        script: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Generate a graph, replay random operations on the encoding and the
    /// oracle in lockstep, and compare.
    Verify {
        /// Number of vertices of the generated planar graph.
        #[arg(long, default_value_t = 300)]
        n: u32,
        /// Number of operations to replay.
        #[arg(long, default_value_t = 900)]
        ops: usize,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Contract generated graphs of increasing size to a single vertex and
    /// report instrumented work, wall time and space.
    Bench {
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000,8000")]
        sizes: Vec<u32>,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

fn load_table(opts: &CommonOpts) -> Result<Arc<MicroTable>, Error> {
    if let Some(path) = &opts.table_cache {
        if path.exists() {
            let t = MicroTable::read_cache(path)?;
            if t.r_prime() >= opts.r_prime {
                return Ok(Arc::new(t));
            }
        }
        let t = MicroTable::build(opts.r_prime)?;
        t.write_cache(path)?;
        return Ok(Arc::new(t));
    }
    Ok(Arc::new(MicroTable::build(opts.r_prime)?))
}

fn cfg_of(opts: &CommonOpts) -> PartitionConfig {
    PartitionConfig {
        r: opts.r,
        r_prime: opts.r_prime,
        size_cap_multiplier: 2,
    }
}

fn input_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn cmd_build(graph: &PathBuf, dump_partition: bool, dump_encoding: bool, opts: &CommonOpts) -> ExitCode {
    let text = match std::fs::read_to_string(graph) {
        Ok(t) => t,
        Err(e) => return input_error(e),
    };
    let g = match graph::parse_graph(&text) {
        Ok(g) => g,
        Err(e) => return input_error(e),
    };
    let table = match load_table(opts) {
        Ok(t) => t,
        Err(e) => return input_error(e),
    };
    let t0 = Instant::now();
    let built = DynamicEncoding::build(&g, &cfg_of(opts), table, opts.hashing);
    let (enc, _) = match built {
        Ok(x) => x,
        Err(e) => return input_error(e),
    };
    let dt = t0.elapsed();
    let rep = enc.space_report();
    println!("n {}", g.vertex_count());
    println!("m {}", g.edge_count());
    println!("pieces {}", rep.piece_count);
    println!("micro-graphs {}", rep.micro_count);
    println!("global-boundary {}", rep.boundary_count);
    println!("inner-boundary-total {}", rep.inner_boundary_total);
    println!("micro-index-bits {}", rep.micro_index_bits);
    println!("side-structure-bits {}", rep.side_bits);
    println!(
        "bits-per-vertex {:.2}",
        (rep.micro_index_bits + rep.side_bits) as f64 / rep.n as f64
    );
    println!("build-time-ms {}", dt.as_millis());
    if dump_partition {
        let mut gc = g.clone();
        if !gc.is_connected() {
            gc.connect_components();
        }
        match planarsucc_core::partition::build_two_level(&gc, &cfg_of(opts)) {
            Ok(tl) => print!("{}", planarsucc_core::partition::dump_two_level(&tl)),
            Err(e) => return input_error(e),
        }
    }
    if dump_encoding {
        print!("{}", enc.debug_serialize());
    }
    let chk = enc.check_invariants(None);
    if !chk.ok() {
        eprintln!("invariant violations: {}", chk.violations.join("; "));
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}

fn cmd_run(graph: &PathBuf, script: &PathBuf, opts: &CommonOpts) -> ExitCode {
    let gtext = match std::fs::read_to_string(graph) {
        Ok(t) => t,
        Err(e) => return input_error(e),
    };
    let g = match graph::parse_graph(&gtext) {
        Ok(g) => g,
        Err(e) => return input_error(e),
    };
    let stext = match std::fs::read_to_string(script) {
        Ok(t) => t,
        Err(e) => return input_error(e),
    };
    let ops = match graph::parse_script(&stext) {
        Ok(o) => o,
        Err(e) => return input_error(e),
    };
    let table = match load_table(opts) {
        Ok(t) => t,
        Err(e) => return input_error(e),
    };
    let (mut enc, relab) = match DynamicEncoding::build(&g, &cfg_of(opts), table, opts.hashing) {
        Ok(x) => x,
        Err(e) => return input_error(e),
    };
    // scripts speak input labels; the encoding speaks global labels
    let to_g = |x: u32| -> Result<u32, Error> {
        relab
            .to_global
            .get(x as usize)
            .copied()
            .filter(|&gl| gl != u32::MAX)
            .ok_or(Error::UnknownVertex(x))
    };
    for (lineno, op) in ops.iter().enumerate() {
        let line = lineno + 1;
        let res: Result<String, Error> = (|| match *op {
            ScriptOp::Contract(a, b) => {
                let s = enc.contract(to_g(a)?, to_g(b)?)?;
                Ok(format!("{}", relab.to_original[s as usize] + 1))
            }
            ScriptOp::DeleteVertex(v) => {
                enc.delete_vertex(to_g(v)?)?;
                Ok(String::new())
            }
            ScriptOp::DeleteEdge(a, b) => {
                enc.delete_edge(to_g(a)?, to_g(b)?)?;
                Ok(String::new())
            }
            ScriptOp::Neighbors(v) => {
                let mut nb: Vec<u32> = enc
                    .neighbors(to_g(v)?)?
                    .into_iter()
                    .map(|x| relab.to_original[x as usize] + 1)
                    .collect();
                nb.sort_unstable();
                Ok(nb
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" "))
            }
            ScriptOp::Degree(v) => Ok(enc.degree(to_g(v)?)?.to_string()),
            ScriptOp::Adjacent(a, b) => {
                Ok(if enc.adjacent(to_g(a)?, to_g(b)?)? { "1" } else { "0" }.to_string())
            }
        })();
        match res {
            Ok(out) => {
                if !out.is_empty() {
                    println!("{out}");
                }
            }
            Err(e) => {
                eprintln!("error at script line {line}: {e}");
                return ExitCode::from(3);
            }
        }
        if opts.check_every_op {
            let chk = enc.check_invariants(None);
            if !chk.ok() {
                eprintln!(
                    "invariant violations after line {line}: {}",
                    chk.violations.join("; ")
                );
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::SUCCESS
}

fn cmd_verify(n: u32, ops: usize, opts: &CommonOpts) -> ExitCode {
    let table = match load_table(opts) {
        Ok(t) => t,
        Err(e) => return input_error(e),
    };
    let params = VerifyParams {
        n,
        ops,
        seed: opts.seed,
        cfg: cfg_of(opts),
        hashing: opts.hashing,
        check_every_op: opts.check_every_op,
        probe_factor: 16,
    };
    match verify::run_verify_with_table(&params, table) {
        Ok(stats) => {
            println!("verify pass: {}", verify::format_stats(&stats));
            if stats.probe_budget_violations > 0 {
                eprintln!(
                    "probe budget exceeded on {} calls",
                    stats.probe_budget_violations
                );
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(transcript) => {
            eprintln!("verify FAIL: {transcript}");
            ExitCode::from(1)
        }
    }
}

fn cmd_bench(sizes: &[u32], opts: &CommonOpts) -> ExitCode {
    let table = match load_table(opts) {
        Ok(t) => t,
        Err(e) => return input_error(e),
    };
    println!(
        "{:>8} {:>8} {:>12} {:>8} {:>12} {:>12} {:>10}",
        "n", "r", "work", "ratio", "wall-ms", "side-bits/n", "micro/n"
    );
    let mut prev: Option<u64> = None;
    for &n in sizes {
        let g = planarsucc_core::generate_planar(n, opts.seed);
        let cfg = cfg_of(opts);
        let t0 = Instant::now();
        let (mut enc, _) = match DynamicEncoding::build(&g, &cfg, table.clone(), opts.hashing) {
            Ok(x) => x,
            Err(e) => return input_error(e),
        };
        let rep = enc.space_report();
        let (work, left) = match verify::contract_to_point(&mut enc) {
            Ok(x) => x,
            Err(e) => return input_error(e),
        };
        debug_assert_eq!(left, 1);
        let dt = t0.elapsed();
        let ratio = prev
            .map(|p| format!("{:.3}", work as f64 / p as f64))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>8} {:>8} {:>12} {:>8} {:>12} {:>12.1} {:>10.2}",
            n,
            cfg.r,
            work,
            ratio,
            dt.as_millis(),
            rep.side_bits as f64 / n as f64,
            rep.micro_index_bits as f64 / n as f64,
        );
        prev = Some(work);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Build {
            graph,
            dump_partition,
            dump_encoding,
            opts,
        } => cmd_build(graph, *dump_partition, *dump_encoding, opts),
        Command::Run { graph, script, opts } => cmd_run(graph, script, opts),
        Command::Verify { n, ops, opts } => cmd_verify(*n, *ops, opts),
        Command::Bench { sizes, opts } => cmd_bench(sizes, opts),
    }
}
