//! Command-line front end.
//!
//! Exit codes: 0 success (or simulation pass), 1 usage or I/O problem,
//! 2 invalid constraints, 3 simulation failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::allocation::Weights;
use crate::interleaver::{self, InterleaverSpec};
use crate::model::{parse_constraints, serialize_constraints, ConstraintError, ConstraintSet};
use crate::netlist::{parse_netlist, to_pseudo_hdl, write_netlist, Netlist};
use crate::pipeline::{summary_line, synthesize, write_report, SynthError};
use crate::sim::simulate;
use crate::workload::random_constraints;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SIM_FAIL: i32 = 3;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (constraint schema 1, netlist schema 1)");

#[derive(Debug, Parser)]
#[command(name = "star", version = VERSION, about = "Space-time adapter synthesis: I/O constraints to FIFO/LIFO/register buffers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full flow and write netlist, report and graph.
    Build(BuildArgs),
    /// Build, then replay the netlist against the constraints.
    Check(CheckArgs),
    /// Replay an existing netlist against its constraints.
    Simulate(SimulateArgs),
    /// Write the compatibility graph only.
    Graph(GraphArgs),
    /// Generate an interleaver constraint set.
    GenInterleaver(GenInterleaverArgs),
    /// Generate a seeded random single-read constraint set.
    GenRandom(GenRandomArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long, value_name = "FILE")]
    constraints: PathBuf,
    /// Netlist JSON output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Compatibility graph in DOT format.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
    /// Pseudo-HDL listing (inspection only).
    #[arg(long, value_name = "FILE")]
    hdl: Option<PathBuf>,
    /// Heuristic weights, e.g. `depth=1,demux=0.5,util=1`.
    #[arg(long, value_name = "SPEC")]
    weights: Option<String>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    build: BuildArgs,
    /// Per-cycle trace as JSON lines.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_name = "FILE")]
    netlist: PathBuf,
    #[arg(long, value_name = "FILE")]
    constraints: PathBuf,
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[arg(long, value_name = "FILE")]
    constraints: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Emit the JSON dump instead of DOT.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct GenInterleaverArgs {
    #[arg(long)]
    n: usize,
    /// `block:ROWSxCOLS`, `identity` or `file:PATH`.
    #[arg(long)]
    scheme: String,
    #[arg(long = "in-period", default_value_t = 1)]
    in_period: u64,
    /// Cycles from first write to first read; `min` or `frame` pick the
    /// smallest feasible latency or the whole-frame latency.
    #[arg(long)]
    latency: String,
    #[arg(long = "out-period", default_value_t = 1)]
    out_period: u64,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenRandomArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Failure carrying its exit code and message.
struct Fail(i32, String);

impl Fail {
    fn usage(msg: impl Into<String>) -> Self {
        Fail(EXIT_USAGE, msg.into())
    }
}

type CmdResult = Result<i32, Fail>;

/// Runs the CLI on `argv` (program name first), writing to the process's
/// standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Build(a) => cmd_build(&a, None, out),
        Command::Check(a) => cmd_build(&a.build, Some(a.trace.as_deref()), out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Graph(a) => cmd_graph(&a, out),
        Command::GenInterleaver(a) => cmd_gen_interleaver(&a, out),
        Command::GenRandom(a) => cmd_gen_random(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn check_input(p: &Path) -> Result<(), Fail> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Fail::usage(format!("input file `{}` does not exist", p.display())))
    }
}

fn check_output(p: Option<&Path>) -> Result<(), Fail> {
    let Some(p) = p else { return Ok(()) };
    let parent = match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    if parent.is_dir() {
        Ok(())
    } else {
        Err(Fail::usage(format!("output directory `{}` does not exist", parent.display())))
    }
}

/// Writes via a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit_to(path: Option<&Path>, contents: &str, out: &mut dyn Write) -> Result<(), Fail> {
    match path {
        Some(p) => write_atomic(p, contents).map_err(|e| Fail::usage(format!("cannot write `{}`: {e}", p.display()))),
        None => out.write_all(contents.as_bytes()).map_err(|e| Fail::usage(e.to_string())),
    }
}

fn load_constraints(p: &Path) -> Result<ConstraintSet, Fail> {
    let text = fs::read_to_string(p).map_err(|e| Fail::usage(format!("cannot read `{}`: {e}", p.display())))?;
    parse_constraints(&text).map_err(|e| {
        let msg = match e {
            ConstraintError::Invalid(v) => {
                let lines: Vec<String> = v.iter().map(|x| format!("  {x}")).collect();
                format!("{}: {} violation(s)\n{}", p.display(), v.len(), lines.join("\n"))
            }
            other => format!("{}: {other}", p.display()),
        };
        Fail(EXIT_INVALID, msg)
    })
}

fn cmd_build(a: &BuildArgs, check: Option<Option<&Path>>, out: &mut dyn Write) -> CmdResult {
    check_input(&a.constraints)?;
    for p in [&a.out, &a.report, &a.dot, &a.hdl] {
        check_output(p.as_deref())?;
    }
    if let Some(trace) = check {
        check_output(trace)?;
    }
    let weights: Weights = match &a.weights {
        Some(s) => s.parse().map_err(|e| Fail::usage(format!("--weights: {e}")))?,
        None => Weights::default(),
    };

    let cs = load_constraints(&a.constraints)?;
    let syn = synthesize(&cs, &weights).map_err(|e| match e {
        SynthError::Graph(g) => Fail(EXIT_INVALID, g.to_string()),
        SynthError::Netlist(n) => Fail(EXIT_SIM_FAIL, n.to_string()),
    })?;

    if let Some(p) = &a.out {
        emit_to(Some(p), &write_netlist(&syn.netlist), out)?;
    }
    if let Some(p) = &a.report {
        emit_to(Some(p), &write_report(&cs, &syn), out)?;
    }
    if let Some(p) = &a.dot {
        emit_to(Some(p), &syn.graph.to_dot(), out)?;
    }
    if let Some(p) = &a.hdl {
        emit_to(Some(p), &to_pseudo_hdl(&syn.netlist, &cs), out)?;
    }
    let _ = writeln!(out, "{}", summary_line(&syn.netlist.summary()));

    match check {
        None => Ok(EXIT_OK),
        Some(trace) => replay(&syn.netlist, &cs, trace, out),
    }
}

fn replay(n: &Netlist, cs: &ConstraintSet, trace: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let t = simulate(n, cs).map_err(|e| Fail(EXIT_SIM_FAIL, format!("malformed netlist: {e}")))?;
    if let Some(p) = trace {
        emit_to(Some(p), &t.to_jsonl(), out)?;
    }
    if t.passed() {
        let _ = writeln!(
            out,
            "simulation: pass ({} cycles, peak occupancy {}, {} cells)",
            t.cycles.len(),
            t.peak_total_occupancy,
            t.cells
        );
        Ok(EXIT_OK)
    } else {
        Err(Fail(EXIT_SIM_FAIL, format!("simulation {} ({} divergence(s))", t.verdict(), t.divergences.len())))
    }
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    check_input(&a.netlist)?;
    check_input(&a.constraints)?;
    check_output(a.trace.as_deref())?;
    let cs = load_constraints(&a.constraints)?;
    let text = fs::read_to_string(&a.netlist)
        .map_err(|e| Fail::usage(format!("cannot read `{}`: {e}", a.netlist.display())))?;
    let n = parse_netlist(&text).map_err(|e| Fail::usage(format!("{}: {e}", a.netlist.display())))?;
    replay(&n, &cs, a.trace.as_deref(), out)
}

fn cmd_graph(a: &GraphArgs, out: &mut dyn Write) -> CmdResult {
    check_input(&a.constraints)?;
    check_output(a.out.as_deref())?;
    let cs = load_constraints(&a.constraints)?;
    let g = crate::graph::build_graph(&cs).map_err(|e| Fail(EXIT_INVALID, e.to_string()))?;
    let text = if a.json { g.to_json() } else { g.to_dot() };
    emit_to(a.out.as_deref(), &text, out)?;
    Ok(EXIT_OK)
}

fn parse_scheme(scheme: &str, n: usize) -> Result<Vec<usize>, Fail> {
    let perm = if scheme == "identity" {
        interleaver::identity_permutation(n)
    } else if let Some(dims) = scheme.strip_prefix("block:") {
        let (r, c) = dims
            .split_once(['x', 'X'])
            .ok_or_else(|| Fail::usage(format!("bad block scheme `{scheme}`, expected block:ROWSxCOLS")))?;
        let rows: usize = r.trim().parse().map_err(|_| Fail::usage(format!("bad row count `{r}`")))?;
        let cols: usize = c.trim().parse().map_err(|_| Fail::usage(format!("bad column count `{c}`")))?;
        if rows == 0 || cols == 0 {
            return Err(Fail::usage("block dimensions must be at least 1"));
        }
        interleaver::block_permutation(rows, cols)
    } else if let Some(path) = scheme.strip_prefix("file:") {
        let text = fs::read_to_string(path).map_err(|e| Fail::usage(format!("cannot read `{path}`: {e}")))?;
        interleaver::parse_permutation(&text).map_err(|e| Fail::usage(e.to_string()))?
    } else {
        return Err(Fail::usage(format!("unknown scheme `{scheme}` (block:RxC, identity, file:PATH)")));
    };
    if perm.len() != n {
        return Err(Fail::usage(format!("scheme `{scheme}` has {} entries, --n is {n}", perm.len())));
    }
    Ok(perm)
}

fn cmd_gen_interleaver(a: &GenInterleaverArgs, out: &mut dyn Write) -> CmdResult {
    check_output(a.out.as_deref())?;
    let perm = parse_scheme(&a.scheme, a.n)?;
    let mut spec = InterleaverSpec::new(perm, a.in_period, 0, a.out_period);
    spec.latency = match a.latency.as_str() {
        "min" => spec.min_latency().map_err(|e| Fail::usage(e.to_string()))?,
        "frame" => InterleaverSpec::full_frame_latency(a.n, a.in_period),
        s => s.parse().map_err(|_| Fail::usage(format!("bad latency `{s}`")))?,
    };
    let cs = interleaver::generate(&spec).map_err(|e| Fail(EXIT_INVALID, e.to_string()))?;
    emit_to(a.out.as_deref(), &serialize_constraints(&cs), out)?;
    Ok(EXIT_OK)
}

fn cmd_gen_random(a: &GenRandomArgs, out: &mut dyn Write) -> CmdResult {
    check_output(a.out.as_deref())?;
    let cs = random_constraints(a.n, a.seed);
    emit_to(a.out.as_deref(), &serialize_constraints(&cs), out)?;
    Ok(EXIT_OK)
}
