use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use num_traits::Zero;
use serde_json::{json, Value};

use slopelab::graph::BlockKind;
use slopelab::rational::{self, RationalJson};
use slopelab::theta::{self, McConfig, PeriodFamily, SiegelMatrix};
use slopelab::tropical::{self, GramLattice};
use slopelab::{corpus, invariants, jump, laplace, Error, ErrorClass, PolarizedWeightedGraph, Rational};

const THREADS_VAR: &str = "SLOPELAB_THREADS";

/// Exact invariants of polarized weighted graphs, tropical moments of
/// lattices and theta-function numerics.
///
/// Results are printed as JSON with sorted keys. Rationals appear as
/// {"exact": "p/q", "decimal": "<17 significant digits>"}.
///
/// Exit codes: 0 success, 1 invalid input, 2 numerical failure,
/// 3 identity violation.
///
/// The environment variable SLOPELAB_THREADS caps the number of worker
/// threads.
#[derive(Parser, Debug)]
#[command(name = "slopelab", version, verbatim_doc_comment)]
struct Cli {
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Operations on a polarized weighted graph.
    ///
    /// Graph JSON: {"vertices":[{"id":"u","genus":0}], "edges":[{"id":"e","u":"u","v":"u","length":"1/2"}]}
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Operations on a positive definite rational Gram matrix.
    #[command(subcommand)]
    Lattice(LatticeCommand),
    /// Theta-function and I-invariant numerics.
    #[command(subcommand)]
    Theta(ThetaCommand),
    /// Generate a random graph corpus and run every identity on it.
    Corpus {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of graphs; at least 1.
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

#[derive(Subcommand, Debug)]
enum GraphCommand {
    /// Validate the graph and report its combinatorial data.
    Check(GraphInput),
    /// Every invariant, with the cross-identities verified.
    Invariants(GraphInput),
    /// Height jump with the contraction cross-check. Needs a stable graph.
    Jump(GraphInput),
    /// Decide whether the slope vanishes from the shape of the minimal model.
    Classify(GraphInput),
}

#[derive(Args, Debug)]
struct GraphInput {
    /// Graph JSON file.
    graph: PathBuf,
    /// JSON object mapping edge ids to new lengths, e.g. {"e1":"3/2"}.
    #[arg(long, value_name = "FILE")]
    lengths: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum LatticeCommand {
    /// Exact second moment of the Voronoi cell.
    Moment {
        /// Matrix file, or inline JSON: {"dim":b,"entries":[["p/q",..],..]} or [["p/q",..],..].
        matrix: String,
    },
}

#[derive(Args, Debug)]
struct McArgs {
    /// Number of quasi-Monte Carlo samples.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Seed of the random shifts.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Truncation tolerance of the theta series.
    #[arg(long, default_value_t = theta::DEFAULT_TOL)]
    tol: f64,
}

impl McArgs {
    fn config(&self) -> Result<McConfig, Error> {
        McConfig::new(self.samples, self.seed)?.with_tol(self.tol)
    }
}

#[derive(Subcommand, Debug)]
enum ThetaCommand {
    /// I-invariant of a period matrix {"re":[[..]],"im":[[..]]}.
    I {
        omega: PathBuf,
        #[command(flatten)]
        mc: McArgs,
    },
    /// L2 normalization of the theta function; the target is 2^(-g/2).
    L2 {
        omega: PathBuf,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Degeneration scan of a period family.
    Scan {
        /// Period family JSON: {"g","r","A0","B":[{"k","re","im"}],"radius"}.
        #[arg(long, value_name = "FILE")]
        family: PathBuf,
        /// Comma-separated values of t, e.g. 1e-2,1e-3,1e-4.
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<f64>>,
        /// Also write a gnuplot-ready table here.
        #[arg(long, value_name = "FILE")]
        tsv: Option<PathBuf>,
        #[command(flatten)]
        mc: McArgs,
    },
}

/// `graph-jump x.json` is accepted as `graph jump x.json`.
fn split_hyphenated(args: Vec<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len() + 1);
    let mut iter = args.into_iter();
    out.extend(iter.next());
    if let Some(first) = iter.next() {
        match first.split_once('-') {
            Some((group @ ("graph" | "lattice" | "theta"), sub)) if !sub.is_empty() => {
                out.push(group.to_string());
                out.push(sub.to_string());
            }
            _ => out.push(first),
        }
    }
    out.extend(iter);
    out
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, Error> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_graph(input: &GraphInput) -> Result<PolarizedWeightedGraph, Error> {
    let g = PolarizedWeightedGraph::from_json(&read(&input.graph)?)?;
    let Some(path) = &input.lengths else { return Ok(g) };
    let lengths = match read_json(path)? {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| Ok((k.clone(), rational::from_json(v)?)))
            .collect::<Result<BTreeMap<String, Rational>, Error>>()?,
        _ => return Err(Error::Input("lengths must be a JSON object keyed by edge id".into())),
    };
    g.with_lengths(&lengths)
}

fn exact(q: &Rational) -> Value {
    serde_json::to_value(RationalJson::from(q)).expect("plain data")
}

fn graph_check(g: &PolarizedWeightedGraph) -> Result<Value, Error> {
    let blocks = g.blocks();
    let ids = |idx: &[usize], names: &dyn Fn(usize) -> String| idx.iter().map(|&i| names(i)).collect::<Vec<_>>();
    let vname = |i: usize| g.vertices()[i].id.clone();
    let ename = |i: usize| g.edges()[i].id.clone();
    let block_json: Vec<Value> = blocks
        .blocks
        .iter()
        .map(|b| json!({ "kind": b.kind, "vertices": ids(&b.vertices, &vname), "edges": ids(&b.edges, &ename) }))
        .collect();
    let profile = g.edge_profile();
    let delta_h: BTreeMap<String, Value> = profile.delta_h.iter().map(|(h, d)| (h.to_string(), exact(d))).collect();
    let foster: BTreeMap<String, Value> = g
        .edges()
        .iter()
        .zip(laplace::foster_all(g))
        .map(|(e, f)| (e.id.clone(), exact(&f)))
        .collect();
    Ok(json!({
        "genus": g.genus(),
        "first_betti": g.first_betti(),
        "canonical_divisor": g.canonical_divisor(),
        "stable": g.is_stable(),
        "bridgeless": g.is_bridgeless(),
        "two_connected": g.is_two_connected(),
        "blocks": block_json,
        "two_connected_blocks": blocks.blocks.iter().filter(|b| b.kind == BlockKind::TwoConnected).count(),
        "cut_vertices": ids(&blocks.cut_vertices, &vname),
        "edge_profile": { "delta": exact(&profile.delta), "delta0": exact(&profile.delta0), "deltaH": delta_h },
        "foster": foster,
        "tau": exact(&laplace::tau(g)?),
        "minimal_model": g.minimal_model()?.to_spec(),
    }))
}

fn graph(cmd: &GraphCommand) -> Result<Value, Error> {
    match cmd {
        GraphCommand::Check(input) => graph_check(&load_graph(input)?),
        GraphCommand::Invariants(input) => Ok(invariants::report(&load_graph(input)?)?.to_json()),
        GraphCommand::Jump(input) => Ok(jump::jump_crosscheck(&load_graph(input)?)?.to_json()),
        GraphCommand::Classify(input) => {
            let g = load_graph(input)?;
            let class = jump::classify_vanishing(&g)?;
            let slope = invariants::slope(&g)?;
            if class.vanishes() != slope.is_zero() {
                return Err(Error::IdentityViolation(format!("class {} but slope {slope}", class.as_str())));
            }
            Ok(json!({ "class": class, "slope": exact(&slope) }))
        }
    }
}

fn lattice(cmd: &LatticeCommand) -> Result<Value, Error> {
    let LatticeCommand::Moment { matrix } = cmd;
    let path = Path::new(matrix);
    let v = if path.is_file() {
        read_json(path)?
    } else {
        serde_json::from_str(matrix).map_err(|e| Error::Input(format!("matrix is neither a file nor JSON: {e}")))?
    };
    let lat = GramLattice::from_json(&v)?;
    let cell = tropical::voronoi_cell(&lat)?;
    Ok(json!({
        "I": exact(&tropical::moment(&lat)?),
        "dim": lat.dim(),
        "relevant_vectors": tropical::relevant_vectors(&lat)?,
        "vertices": cell.vertices().len(),
        "volume": exact(&cell.polytope.volume()),
    }))
}

fn theta_cmd(cmd: &ThetaCommand) -> Result<Value, Error> {
    match cmd {
        ThetaCommand::I { omega, mc } => {
            let omega = SiegelMatrix::from_json(&read_json(omega)?)?;
            let est = theta::i_invariant(&omega, &mc.config()?)?;
            Ok(json!({ "g": omega.dim(), "I": est, "samples": mc.samples, "seed": mc.seed }))
        }
        ThetaCommand::L2 { omega, mc } => {
            let omega = SiegelMatrix::from_json(&read_json(omega)?)?;
            let est = theta::l2_norm_check(&omega, &mc.config()?)?;
            let target = 2f64.powf(-(omega.dim() as f64) / 2.0);
            Ok(json!({
                "g": omega.dim(),
                "l2": est,
                "target": target,
                "within_3_sigma": est.agrees_with(target, 3.0, 0.0),
                "samples": mc.samples,
                "seed": mc.seed,
            }))
        }
        ThetaCommand::Scan { family, schedule, tsv, mc } => {
            let family = PeriodFamily::from_json(&read_json(family)?)?;
            let schedule: Vec<Complex64> = match schedule {
                Some(ts) => ts.iter().map(|&t| Complex64::new(t, 0.0)).collect(),
                None => theta::default_schedule(),
            };
            let config = mc.config()?;
            let scan = theta::degeneration_scan(&family, &schedule, &config)?;
            if let Some(path) = tsv {
                fs::write(path, scan.to_tsv()).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            }
            let constant = theta::limit_constant(&family, &config)?;
            let mut out = scan.to_json();
            out["limit_constant"] = serde_json::to_value(constant).expect("plain data");
            out["samples"] = json!(mc.samples);
            out["seed"] = json!(mc.seed);
            Ok(out)
        }
    }
}

fn execute(cli: &Cli) -> Result<Value, Error> {
    match &cli.command {
        Command::Graph(cmd) => graph(cmd),
        Command::Lattice(cmd) => lattice(cmd),
        Command::Theta(cmd) => theta_cmd(cmd),
        Command::Corpus { seed, count } => {
            let summary = corpus::run(*seed, *count)?;
            let v = serde_json::to_value(&summary).expect("plain data");
            if !summary.all_passed {
                emit(cli.out.as_deref(), &v)?;
                return Err(Error::IdentityViolation(format!("{} corpus graphs failed", summary.failures.len())));
            }
            Ok(v)
        }
    }
}

fn emit(out: Option<&Path>, v: &Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(v).expect("plain data") + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Input(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Input(e.to_string()))
}

fn fail(err: &Error) -> ExitCode {
    let (code, class) = match err.class() {
        ErrorClass::Input => (1, "input"),
        ErrorClass::Numerical => (2, "numerical"),
        ErrorClass::Identity => (3, "identity"),
    };
    eprintln!("{}", json!({ "error": { "class": class, "message": err.to_string() } }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(split_hyphenated(std::env::args().collect())) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads()
        .and_then(|_| execute(&cli))
        .and_then(|v| emit(cli.out.as_deref(), &v));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
