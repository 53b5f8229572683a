//! `regen`: repair, retrieval and reproduction runs for regenerating codes on
//! graphs. Exit status 0 means every run verified.

mod checkpoints;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use regen_core::codes::{DetCode, GpmCode, MoulinCode, PmMbrCode, PmMsrCode};
use regen_core::engine::{parse_rational, partial_repair, retrieval_lower_bound, BandwidthReport};
use regen_core::retrieval::{retrieve_mbr_optimal, retrieve_relay};
use regen_core::{
    build_repair_tree, plan_retrieval, resilient_ip_transmit, select_helpers, select_retrieval_set, simulate_repair,
    EdgeChannel, Field, Graph, RegeneratingCode, Strategy,
};

pub const RUNNING_EXAMPLE: &str = include_str!("../fixtures/running_example.json");

#[derive(Parser)]
#[command(name = "regen", version, about = "Regenerating codes on connectivity-constrained graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repair one failed node over its helper tree and print the bandwidth report.
    Repair(RepairArgs),
    /// Retrieve the file through a partially attached data collector.
    Retrieve(RetrieveArgs),
    /// Re-run every reference checkpoint and compare with the expected values.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    PmMsr,
    PmMbr,
    Gpm,
    Moulin,
    Det,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Af,
    Ip,
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    k: usize,
    /// Required for pm-mbr and moulin; checked against the derived value otherwise.
    #[arg(long)]
    d: Option<usize>,
    /// Tensor order for gpm.
    #[arg(long)]
    t: Option<usize>,
    /// Parity depth for moulin.
    #[arg(long)]
    s: Option<usize>,
    /// Mode for det.
    #[arg(long)]
    m: Option<usize>,
    /// Graph JSON (`{"nodes": n, "edges": [[u, v], ...]}`); defaults to the bundled 7-node tree.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = regen_core::DEFAULT_MODULUS)]
    modulus: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RepairArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long, default_value_t = 0)]
    failed: usize,
    #[arg(long, value_enum, default_value = "ip")]
    strategy: StrategyArg,
    /// Per-edge error fraction, e.g. `0.1`; switches to RS-protected IP repair.
    #[arg(long)]
    rho: Option<String>,
    /// Corrupt ⌈ρN⌉ instead of ⌊ρN⌋ symbols per block.
    #[arg(long, requires = "rho")]
    worst_case: bool,
    /// Fraction of the node to restore, e.g. `1/3`; switches to partial repair.
    #[arg(long)]
    gamma: Option<String>,
}

#[derive(Args)]
struct RetrieveArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Nodes the data collector reaches directly.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    attach: Vec<usize>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

fn load_graph(path: Option<&PathBuf>) -> Result<Graph> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => RUNNING_EXAMPLE.to_string(),
    };
    Ok(Graph::from_json(&text)?)
}

fn require(v: Option<usize>, flag: &str, family: &str) -> Result<usize> {
    v.with_context(|| format!("--{flag} is required for {family}"))
}

fn build_code(args: &CodeArgs, n: usize) -> Result<Box<dyn RegeneratingCode>> {
    let field = Field::new(args.modulus)?;
    let code: Box<dyn RegeneratingCode> = match args.family {
        FamilyArg::PmMsr => Box::new(PmMsrCode::new(field, n, args.k)?),
        FamilyArg::PmMbr => Box::new(PmMbrCode::new(field, n, args.k, require(args.d, "d", "pm-mbr")?)?),
        FamilyArg::Gpm => Box::new(GpmCode::new(field, n, args.k, require(args.t, "t", "gpm")?, args.seed)?),
        FamilyArg::Moulin => Box::new(MoulinCode::new(
            field,
            n,
            args.k,
            require(args.d, "d", "moulin")?,
            require(args.s, "s", "moulin")?,
            args.seed,
        )?),
        FamilyArg::Det => Box::new(DetCode::new(field, n, args.k, require(args.m, "m", "det")?)?),
    };
    if let Some(d) = args.d {
        if d != code.params().d {
            bail!("--d {d} does not match d = {} implied by the other parameters", code.params().d);
        }
    }
    Ok(code)
}

#[derive(Serialize)]
struct RepairOutput {
    family: String,
    failed: usize,
    helpers: Vec<usize>,
    #[serde(flatten)]
    report: BandwidthReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    noiseless_total: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    allowed_total: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    errors_injected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    restored_coordinates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    full_repair_total: Option<usize>,
}

fn cmd_repair(args: &RepairArgs) -> Result<bool> {
    let g = load_graph(args.code.graph.as_ref())?;
    let code = build_code(&args.code, g.node_count())?;
    let p = code.params();
    let helpers = select_helpers(&g, args.failed, p.d)?;
    let tree = build_repair_tree(&g, args.failed, &helpers)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.code.seed);
    let cw = code.encode(&code.random_file(&mut rng))?;
    let mut out = RepairOutput {
        family: p.family.to_string(),
        failed: args.failed,
        helpers: tree.helpers().to_vec(),
        report: BandwidthReport::new("", Vec::new(), None, false),
        noiseless_total: None,
        allowed_total: None,
        errors_injected: None,
        restored_coordinates: None,
        full_repair_total: None,
    };
    match (&args.rho, &args.gamma) {
        (Some(_), Some(_)) => bail!("--rho and --gamma cannot be combined"),
        (Some(rho), None) => {
            let rho = parse_rational(rho)?;
            let mut channel = EdgeChannel::new(code.field(), rho, args.code.seed)?;
            if args.worst_case {
                channel = channel.worst_case();
            }
            let res = resilient_ip_transmit(code.as_ref(), &tree, &cw, &mut channel)?;
            out.noiseless_total = Some(res.noiseless_total);
            out.allowed_total = Some(res.allowed_total(rho).to_string());
            out.errors_injected = Some(res.errors_injected);
            out.report = res.report;
        }
        (None, Some(gamma)) => {
            let gamma = parse_rational(gamma)?;
            let res = partial_repair(code.as_ref(), &tree, &cw, gamma)?;
            out.restored_coordinates = Some(res.repaired.len());
            out.full_repair_total = Some(simulate_repair(code.as_ref(), &tree, &cw, Strategy::Ip)?.report.total_symbols);
            out.report = res.report;
        }
        (None, None) => {
            let strategy = match args.strategy {
                StrategyArg::Af => Strategy::Af,
                StrategyArg::Ip => Strategy::Ip,
            };
            out.report = simulate_repair(code.as_ref(), &tree, &cw, strategy)?.report;
        }
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(out.report.verified)
}

#[derive(Serialize)]
struct BoundEntry {
    a: usize,
    bound: usize,
}

#[derive(Serialize)]
struct RetrieveOutput {
    family: String,
    plan: serde_json::Value,
    relay: BandwidthReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimal: Option<BandwidthReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    saving: Option<usize>,
    bounds: Vec<BoundEntry>,
}

fn cmd_retrieve(args: &RetrieveArgs) -> Result<bool> {
    let g = load_graph(args.code.graph.as_ref())?;
    let code = build_code(&args.code, g.node_count())?;
    let p = code.params();
    let nodes = select_retrieval_set(&g, &args.attach, p.k)?;
    let plan = plan_retrieval(&g, &nodes, &args.attach, p.d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.code.seed);
    let file = code.random_file(&mut rng);
    let cw = code.encode(&file)?;
    let (relay_file, relay) = retrieve_relay(code.as_ref(), &plan, &cw)?;
    let mut verified = relay.verified && relay_file == file;
    let mut optimal = None;
    if let FamilyArg::PmMbr = args.code.family {
        let mbr = PmMbrCode::new(code.field(), p.n, p.k, p.d)?;
        let (opt_file, report) = retrieve_mbr_optimal(&mbr, &plan, &cw)?;
        verified &= report.verified && opt_file == file;
        optimal = Some(report);
    }
    let bounds = (1..=p.k)
        .map(|a| Ok(BoundEntry { a, bound: retrieval_lower_bound(a, p.k, p.d, p.l, p.beta)? }))
        .collect::<Result<Vec<_>>>()?;
    let out = RetrieveOutput {
        family: p.family.to_string(),
        plan: serde_json::from_str(&plan.to_json())?,
        saving: optimal.as_ref().map(|o| relay.total_symbols.saturating_sub(o.total_symbols)),
        relay,
        optimal,
        bounds,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(verified)
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<bool> {
    let g = load_graph(args.graph.as_ref())?;
    let results = checkpoints::run_all(&g);
    let passed = results.iter().filter(|c| c.pass).count();
    if args.json {
        let doc = serde_json::json!({ "checkpoints": results, "passed": passed, "total": results.len() });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        for c in &results {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            println!("[{tag}] {:<32} expected: {:<40} measured: {}", c.name, c.expected, c.measured);
        }
        println!("{passed}/{} checkpoints passed", results.len());
    }
    if passed != results.len() {
        for c in results.iter().filter(|c| !c.pass) {
            eprintln!("mismatch in {}: expected {}, measured {}", c.name, c.expected, c.measured);
        }
    }
    Ok(passed == results.len())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Repair(a) => cmd_repair(a),
        Command::Retrieve(a) => cmd_retrieve(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

