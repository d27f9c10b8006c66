//! The `jellyhan` command line.
//!
//! Exit codes: 0 success (solved, verified, written), 1 the answer is no
//! (unsolvable level, losing script, gadget table mismatch), 2 usage or
//! input error, 3 undetermined because a search limit was hit.

pub mod session;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use jellyhan::gadgets::{inflow_table, Mode, PortConfig};
use jellyhan::io::{
    canonical_json, hanano_document, jelly_document, parse_graph, parse_instance, parse_level,
    parse_moves, serialize_level, serialize_moves, Instance, Level, LevelDocument, Moves,
};
use jellyhan::ncl::{EdgeId, FlipProblem};
use jellyhan::partition::{
    gen_hanano_h11, gen_hanano_w6, gen_jelly_2col_h4, gen_jelly_h10, gen_jelly_w5,
};
use jellyhan::reduce_ncl::{ncl_to_jelly, CompileOptions};
use jellyhan::solver::{replay, solve, GameState, SearchLimits, SearchOutcome, Strategy};
use jellyhan::visibility::{catalogue, Signature};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNDETERMINED: i32 = 3;

#[derive(Parser)]
#[command(name = "jellyhan", version, about = "Jelly-No and Hanano level workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a move script and print the final board.
    Sim {
        level: PathBuf,
        #[arg(long)]
        moves: PathBuf,
    },
    /// Search for a shortest winning script.
    Solve {
        level: PathBuf,
        #[arg(long, default_value_t = 5_000_000)]
        max_nodes: usize,
        #[arg(long, value_enum, default_value_t = Algo::Bfs)]
        algo: Algo,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        time_budget: Option<u64>,
        /// Write the plan as a moves document.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compile a problem into a level.
    Reduce {
        #[command(subcommand)]
        kind: Reduce,
    },
    /// Gadget verification tables.
    Gadget {
        #[command(subcommand)]
        action: GadgetCmd,
    },
    /// Serve the session API over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        level: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Reduce {
    /// Constraint logic graph to Jelly level.
    Ncl {
        graph: PathBuf,
        #[arg(long)]
        target: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Multi)]
        mode: ModeArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// 3-Partition instance to a level.
    #[command(name = "3p")]
    ThreePartition {
        #[arg(long, value_enum)]
        variant: Variant3p,
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// ABC-Partition instance to a Hanano level.
    Abc {
        #[arg(long, value_enum, default_value_t = VariantAbc::H11)]
        variant: VariantAbc,
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum GadgetCmd {
    Verify {
        #[arg(long, conflicts_with = "all")]
        signature: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum, default_value_t = ModeArg::Multi)]
        mode: ModeArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Bfs,
    Iddfs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Multi,
    Oneblack,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Multi => Mode::MultiColour,
            ModeArg::Oneblack => Mode::OneColourBlack,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant3p {
    H10,
    #[value(name = "h4-2col")]
    H4TwoColour,
    W5,
    #[value(name = "hanano-w6")]
    HananoW6,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantAbc {
    H11,
}

/// A failure that ends the command with the given exit code.
struct Fail(i32, String);

fn usage(msg: impl std::fmt::Display) -> Fail {
    Fail(EXIT_USAGE, msg.to_string())
}

type Out<'a> = &'a mut dyn Write;

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(args: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(cmd: Command, out: Out) -> Result<i32, Fail> {
    match cmd {
        Command::Sim { level, moves } => sim(&level, &moves, out),
        Command::Solve { level, max_nodes, algo, time_budget, output } => {
            let mut limits = SearchLimits::with_max_states(max_nodes);
            limits.time_budget = time_budget.map(Duration::from_secs);
            let strategy = match algo {
                Algo::Bfs => Strategy::Bfs,
                Algo::Iddfs => Strategy::IterativeDeepening,
            };
            solve_cmd(&level, &limits, strategy, output.as_deref(), out)
        }
        Command::Reduce { kind } => reduce(kind, out),
        Command::Gadget { action: GadgetCmd::Verify { signature, all, mode } } => {
            gadget_verify(signature, all, mode.into(), out)
        }
        Command::Serve { port, level } => serve(port, level.as_deref(), out),
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Fail> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_level(path: &Path) -> Result<LevelDocument, Fail> {
    parse_level(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn sim(level: &Path, moves: &Path, out: Out) -> Result<i32, Fail> {
    let doc = load_level(level)?;
    let script = parse_moves(&read(moves)?).map_err(|e| usage(format!("{}: {e}", moves.display())))?;
    let (render, won) = match (&doc.level, script) {
        (Level::Jelly(l), Moves::Jelly(ms)) => {
            let s = replay(&l.start().map_err(usage)?, &ms).map_err(|e| Fail(EXIT_NO, e.to_string()))?;
            (s.render(), s.is_won())
        }
        (Level::Hanano(l), Moves::Hanano(ms)) => {
            let s = replay(&l.start().map_err(usage)?, &ms).map_err(|e| Fail(EXIT_NO, e.to_string()))?;
            (s.render(), s.is_won())
        }
        _ => return Err(usage("moves document is for the other game")),
    };
    let _ = write!(out, "{render}");
    let _ = writeln!(out, "won: {won}");
    Ok(if won { EXIT_OK } else { EXIT_NO })
}

fn report<S: GameState>(
    outcome: SearchOutcome<S::Move>,
    wrap: impl Fn(Vec<S::Move>) -> Moves,
    output: Option<&Path>,
    out: Out,
) -> Result<i32, Fail> {
    let explored = outcome.explored();
    match outcome {
        SearchOutcome::Solved { plan, .. } => {
            let _ = writeln!(out, "solved: {} moves, {explored} states", plan.len());
            let text = serialize_moves(&wrap(plan));
            match output {
                Some(p) => write_file(p, &text)?,
                None => {
                    let _ = write!(out, "{text}");
                }
            }
            Ok(EXIT_OK)
        }
        SearchOutcome::Unsolvable { .. } => {
            let _ = writeln!(out, "unsolvable: {explored} states");
            Ok(EXIT_NO)
        }
        SearchOutcome::LimitReached { .. } => {
            let _ = writeln!(out, "undetermined: limit reached after {explored} states");
            Ok(EXIT_UNDETERMINED)
        }
    }
}

fn solve_cmd(
    level: &Path,
    limits: &SearchLimits,
    strategy: Strategy,
    output: Option<&Path>,
    out: Out,
) -> Result<i32, Fail> {
    match load_level(level)?.level {
        Level::Jelly(l) => {
            let s = l.start().map_err(usage)?;
            report::<jellyhan::jelly::JellyState>(solve(&s, limits, strategy), Moves::Jelly, output, out)
        }
        Level::Hanano(l) => {
            let s = l.start().map_err(usage)?;
            report::<jellyhan::hanano::HananoState>(solve(&s, limits, strategy), Moves::Hanano, output, out)
        }
    }
}

/// Path of the mapping file written next to a reduced level.
pub fn mapping_path(level: &Path) -> PathBuf {
    let mut name = level.as_os_str().to_owned();
    name.push(".map.json");
    PathBuf::from(name)
}

fn reduce(kind: Reduce, out: Out) -> Result<i32, Fail> {
    match kind {
        Reduce::Ncl { graph, target, mode, output } => {
            let doc = parse_graph(&read(&graph)?).map_err(|e| usage(format!("{}: {e}", graph.display())))?;
            let initial = doc
                .initial
                .ok_or_else(|| usage("graph document has no initial orientation (\"heads\")"))?;
            let problem = FlipProblem { graph: doc.graph, initial, target: EdgeId(target) };
            let mode: Mode = mode.into();
            let art = ncl_to_jelly(&problem, CompileOptions::new(mode)).map_err(usage)?;
            let level = LevelDocument::new(Level::Jelly(art.level.clone()))
                .with_meta("generator", "ncl")
                .with_meta("mode", mode.name())
                .with_meta("target_edge", target)
                .with_meta("goal_head", art.goal_head.0);
            write_file(&output, &serialize_level(&level))?;
            let mapping = json!({
                "format_version": jellyhan::io::FORMAT_VERSION,
                "mode": mode.name(),
                "target_edge": target,
                "goal_head": art.goal_head.0,
                "target_anchor": art.target_anchor,
                "vertices": art.vertices,
                "edges": art.edges,
                "colours": art.colours,
            });
            let map_path = mapping_path(&output);
            write_file(&map_path, &canonical_json(&mapping))?;
            let (w, h) = (art.level.board.width(), art.level.board.height());
            let _ = writeln!(out, "wrote {} ({w}x{h}) and {}", output.display(), map_path.display());
            Ok(EXIT_OK)
        }
        Reduce::ThreePartition { variant, instance, output } => {
            let inst = match parse_instance(&read(&instance)?).map_err(usage)? {
                Instance::ThreePartition(p) => p,
                Instance::Abc(_) => return Err(usage("expected a 3partition instance")),
            };
            let scaled = inst.b % 2 == 1;
            let even = inst.normalized();
            let text = match variant {
                Variant3p::H10 => jelly_document(&gen_jelly_h10(&even).map_err(usage)?),
                Variant3p::H4TwoColour => jelly_document(&gen_jelly_2col_h4(&inst).map_err(usage)?),
                Variant3p::W5 => jelly_document(&gen_jelly_w5(&even).map_err(usage)?),
                Variant3p::HananoW6 => hanano_document(&gen_hanano_w6(&inst).map_err(usage)?),
            };
            write_file(&output, &text)?;
            if scaled && matches!(variant, Variant3p::H10 | Variant3p::W5) {
                let _ = writeln!(out, "odd B: values doubled to B = {}", even.b);
            }
            let _ = writeln!(out, "wrote {}", output.display());
            Ok(EXIT_OK)
        }
        Reduce::Abc { variant: VariantAbc::H11, instance, output } => {
            let inst = match parse_instance(&read(&instance)?).map_err(usage)? {
                Instance::Abc(a) => a,
                Instance::ThreePartition(_) => return Err(usage("expected an abc instance")),
            };
            write_file(&output, &hanano_document(&gen_hanano_h11(&inst).map_err(usage)?))?;
            let _ = writeln!(out, "wrote {}", output.display());
            Ok(EXIT_OK)
        }
    }
}

fn config_text(cfg: [PortConfig; 3]) -> String {
    cfg.iter()
        .map(|c| match c {
            PortConfig::Inside => 'I',
            PortConfig::Absent => '-',
        })
        .collect()
}

fn gadget_verify(signature: Option<String>, all: bool, mode: Mode, out: Out) -> Result<i32, Fail> {
    let sigs: Vec<Signature> = match (signature, all) {
        (Some(s), _) => vec![s.parse().map_err(usage)?],
        (None, true) => catalogue(),
        (None, false) => return Err(usage("give --signature SIG or --all")),
    };
    let _ = writeln!(out, "signature\tports\tinflow\tsolvable\tok");
    let mut bad = 0;
    for sig in sigs {
        let table = inflow_table(sig, mode).map_err(|e| Fail(EXIT_UNDETERMINED, e.to_string()))?;
        for case in table {
            if !case.ok() {
                bad += 1;
            }
            let _ = writeln!(
                out,
                "{sig}\t{}\t{}\t{}\t{}",
                config_text(case.config),
                case.inflow,
                case.solvable,
                if case.ok() { "ok" } else { "MISMATCH" }
            );
        }
    }
    Ok(if bad == 0 { EXIT_OK } else { EXIT_NO })
}

fn serve(port: u16, level: Option<&Path>, out: Out) -> Result<i32, Fail> {
    let default = level.map(load_level).transpose()?;
    let server = tiny_http::Server::http(("127.0.0.1", port)).map_err(|e| usage(e.to_string()))?;
    if let Some(addr) = server.server_addr().to_ip() {
        let _ = writeln!(out, "listening on http://{addr}");
        let _ = out.flush();
    }
    let mut store = session::SessionStore::new(default);
    session::serve_on(&server, &mut store);
    Ok(EXIT_OK)
}
