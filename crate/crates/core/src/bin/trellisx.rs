//! Command-line front end: code and graph construction, distance
//! computation, bound evaluation, profile search, and the end-to-end
//! expander-lift report, with JSON or text output.
//!
//! Exit codes: 0 on success with all verdicts passing, 1 on usage or input
//! errors, 2 on any failed verdict (a violated theorem-backed check, a
//! non-deterministic presentation handed to a distance query, or a tampered
//! fixture caught by verification).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use trellisx::construction::{
    self, build, construction_report, ConstructionError, ConstructionSpec, ReportConfig,
};
use trellisx::conv::{search_best_profile, ConvError, ProfileSearch};
use trellisx::field::Field;
use trellisx::graph::BipartiteGraph;
use trellisx::io;
use trellisx::trellis::{disjoint_alphabet_code, FreeDistance, TrellisCode, TrellisError};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "trellisx",
    about = "Convolutional and trellis codes: distances, Singleton-type bounds, expander lifts",
    version
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for every randomized operation.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Enumeration guard for distance searches.
    #[arg(long, global = true, default_value_t = 1 << 26)]
    guard: u64,
    /// Worker threads for parallel enumerations (fallback: ECC_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    /// Profile tables only; available for bounds and report commands.
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Finite field construction and inspection.
    Field {
        #[command(subcommand)]
        cmd: FieldCmd,
    },
    /// Linear block codes.
    Block {
        #[command(subcommand)]
        cmd: BlockCmd,
    },
    /// Convolutional codes.
    Conv {
        #[command(subcommand)]
        cmd: ConvCmd,
    },
    /// Trellis codes presented by labeled digraphs.
    Trellis {
        #[command(subcommand)]
        cmd: TrellisCmd,
    },
    /// Bipartite expander graphs.
    Graph {
        #[command(subcommand)]
        cmd: GraphCmd,
    },
    /// The expander lift and its verification.
    Construct {
        #[command(subcommand)]
        cmd: ConstructCmd,
    },
    /// Run the built-in invariant battery (plus optional fixtures).
    VerifyAll {
        /// Directory of extra fixtures: *.json generator specs and *.txt
        /// trellis files.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FieldCmd {
    /// Build GF(p^e) and print its canonical spec.
    Make {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: u32,
        /// Ascending coefficients, e.g. "1,1,1" for x^2+x+1.
        #[arg(long, value_delimiter = ',')]
        modulus: Option<Vec<u64>>,
    },
}

#[derive(Subcommand)]
enum BlockCmd {
    /// Length, dimension, rate, and exact minimum distance.
    Mindist {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Subcommand)]
enum ConvCmd {
    /// Structural statistics of a generator matrix.
    Stats {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Exact j-th column distance.
    Coldist {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        j: usize,
    },
    /// Exact free distance.
    Freedist {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Column profile, free distance, bound values, and MDS/MDP/sMDS flags.
    Bounds {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Search for the best column distance profile.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: u32,
        #[arg(long, default_value_t = 4096)]
        budget: u64,
        #[arg(long)]
        equal_row_degrees: bool,
        /// Write the best generator spec to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TrellisCmd {
    /// Structural flags of a presentation.
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
    /// Exact j-th column distance.
    Coldist {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        j: usize,
    },
    /// Free distance (exact, or a bracket on truncated presentations).
    Freedist {
        #[arg(long)]
        file: PathBuf,
    },
    /// Singleton-type bound evaluation at index j.
    Bounds {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        j: usize,
    },
    /// Build the disjoint-alphabet code with column distance (j+1)n.
    Example1 {
        #[arg(long)]
        q: u64,
        #[arg(long = "M")]
        m: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        j: usize,
        /// Write the trellis file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Generate a graph and print (or write) its text form.
    Gen {
        #[arg(long = "type", value_enum)]
        kind: GraphKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure the expansion parameter.
    Gamma {
        #[arg(long, alias = "graph")]
        file: PathBuf,
    },
    /// Monte Carlo sweep of the mixing inequality.
    Mix {
        #[arg(long, alias = "graph")]
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Complete,
    Random,
}

#[derive(Args)]
struct InstanceArgs {
    /// Construction spec JSON (paths to conv/inner/graph files).
    #[arg(long, conflicts_with = "builtin")]
    spec: Option<PathBuf>,
    /// A built-in instance.
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Micro,
    Desk,
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Build the lift and print its dimensions.
    Build {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Verify the per-vertex constraints and witness decompositions on
    /// sampled codewords.
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 1)]
        horizon: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Negative control: corrupt the first lifted block before
        /// verification. The run must then fail with exit code 2.
        #[arg(long)]
        inject_g0: bool,
    },
    /// Full end-to-end report: spectra, profiles, bound checks, witnesses,
    /// rate and degree.
    Report {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 1)]
        horizon: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

/// Command outcome: rendered output plus a verdict flag. `failed` means the
/// run completed but a theorem-backed check did not pass.
struct Outcome {
    json: serde_json::Value,
    text: String,
    csv: Option<String>,
    failed: bool,
}

impl Outcome {
    fn ok(json: serde_json::Value, text: String) -> Self {
        Outcome {
            json,
            text,
            csv: None,
            failed: false,
        }
    }
}

enum CmdError {
    /// Usage or input problem: exit 1.
    Input(String),
    /// A verdict failure: exit 2.
    Verdict(String),
}

impl From<io::IoError> for CmdError {
    fn from(e: io::IoError) -> Self {
        CmdError::Input(e.to_string())
    }
}

impl From<trellisx::field::FieldError> for CmdError {
    fn from(e: trellisx::field::FieldError) -> Self {
        CmdError::Input(e.to_string())
    }
}

impl From<trellisx::block::BlockCodeError> for CmdError {
    fn from(e: trellisx::block::BlockCodeError) -> Self {
        CmdError::Input(e.to_string())
    }
}

impl From<trellisx::graph::GraphError> for CmdError {
    fn from(e: trellisx::graph::GraphError) -> Self {
        CmdError::Input(e.to_string())
    }
}

impl From<ConvError> for CmdError {
    fn from(e: ConvError) -> Self {
        CmdError::Input(e.to_string())
    }
}

impl From<TrellisError> for CmdError {
    fn from(e: TrellisError) -> Self {
        match e {
            TrellisError::NotDeterministic => CmdError::Verdict(e.to_string()),
            other => CmdError::Input(other.to_string()),
        }
    }
}

impl From<ConstructionError> for CmdError {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::ConstraintViolated { .. }
            | ConstructionError::RankDeficientLift { .. }
            | ConstructionError::CrossCheckFailed => CmdError::Verdict(e.to_string()),
            other => CmdError::Input(other.to_string()),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if cli.guard == 0 {
        eprintln!("error: --guard must be positive");
        std::process::exit(1);
    }
    let threads = cli.threads.or_else(|| {
        std::env::var("ECC_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        // results are thread-count invariant; this only sizes the pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    let format = cli.format;
    match run(cli) {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome, format) {
                eprintln!("error: {e}");
                std::process::exit(1);
            }
            std::process::exit(if outcome.failed { 2 } else { 0 });
        }
        Err(CmdError::Input(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(CmdError::Verdict(msg)) => {
            eprintln!("verdict failure: {msg}");
            std::process::exit(2);
        }
    }
}

fn emit(outcome: &Outcome, format: Format) -> Result<(), String> {
    match format {
        Format::Text => println!("{}", outcome.text.trim_end()),
        Format::Json => {
            let envelope = json!({
                "schema": SCHEMA_VERSION,
                "report": outcome.json,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&envelope).expect("serializable report")
            );
        }
        Format::Csv => match &outcome.csv {
            Some(csv) => print!("{csv}"),
            None => return Err("csv output is not available for this command".into()),
        },
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome, CmdError> {
    match cli.cmd {
        Cmd::Field { cmd } => field_cmd(cmd),
        Cmd::Block { cmd } => block_cmd(cmd, cli.guard),
        Cmd::Conv { cmd } => conv_cmd(cmd, cli.guard, cli.seed),
        Cmd::Trellis { cmd } => trellis_cmd(cmd, cli.guard),
        Cmd::Graph { cmd } => graph_cmd(cmd, cli.seed),
        Cmd::Construct { cmd } => construct_cmd(cmd, cli.guard, cli.seed),
        Cmd::VerifyAll { fixtures } => verify_all(fixtures.as_deref(), cli.guard, cli.seed),
    }
}

fn field_cmd(cmd: FieldCmd) -> Result<Outcome, CmdError> {
    match cmd {
        FieldCmd::Make { p, e, modulus } => {
            let field = Field::new(p, e, modulus)?;
            let spec = io::FieldSpecJson::of(&field);
            let text = format!(
                "GF({}) = GF({}^{}), modulus {:?}",
                field.q(),
                field.p(),
                field.e(),
                field.modulus()
            );
            Ok(Outcome::ok(
                serde_json::to_value(&spec).expect("serializable"),
                text,
            ))
        }
    }
}

fn block_cmd(cmd: BlockCmd, guard: u64) -> Result<Outcome, CmdError> {
    match cmd {
        BlockCmd::Mindist { spec } => {
            let code = io::load_block_code(&spec)?;
            let d = code.min_distance(guard)?;
            let json = json!({
                "n": code.n(),
                "k": code.k(),
                "min_distance": d,
                "rate": format!("{}/{}", code.k(), code.n()),
                "relative_distance": format!("{}/{}", d, code.n()),
            });
            let text = format!(
                "[{}, {}] code: d = {}, rate {}/{}, relative distance {}/{}",
                code.n(),
                code.k(),
                d,
                code.k(),
                code.n(),
                d,
                code.n()
            );
            Ok(Outcome::ok(json, text))
        }
    }
}

fn conv_cmd(cmd: ConvCmd, guard: u64, seed: u64) -> Result<Outcome, CmdError> {
    match cmd {
        ConvCmd::Stats { spec } => {
            let code = io::load_generator(&spec)?;
            let gen = code.generator();
            let json = json!({
                "n": code.n(),
                "k": code.k(),
                "memory": code.memory(),
                "row_degrees": gen.row_degrees(),
                "constraint_length": gen.constraint_length(),
                "reduced": code.is_reduced(),
                "equal_row_degrees": code.has_equal_row_degrees(),
                "degree": code.degree(),
                "degree_upper": code.degree_upper(),
            });
            let text = format!(
                "({}, {}) code, memory {}, constraint length {}, reduced: {}, degree{} {}",
                code.n(),
                code.k(),
                code.memory(),
                gen.constraint_length(),
                code.is_reduced(),
                if code.is_reduced() { "" } else { " <=" },
                code.degree_upper()
            );
            Ok(Outcome::ok(json, text))
        }
        ConvCmd::Coldist { spec, j } => {
            let code = io::load_generator(&spec)?;
            let d = code.column_distance(j, guard)?;
            Ok(Outcome::ok(
                json!({"j": j, "column_distance": d}),
                format!("d_{j}^c = {d}"),
            ))
        }
        ConvCmd::Freedist { spec } => {
            let code = io::load_generator(&spec)?;
            let out = code.free_distance(guard)?;
            let mut text = format!("{}", out.distance);
            if out.catastrophic {
                text.push_str("  (warning: catastrophic presentation)");
            }
            Ok(Outcome::ok(
                json!({"free_distance": out.distance, "catastrophic": out.catastrophic}),
                text,
            ))
        }
        ConvCmd::Bounds { spec } => {
            let code = io::load_generator(&spec)?;
            let profile = code.distance_profile(guard)?;
            let text = format!(
                "columns {:?}, free {}, L = {}, J = {}, free bound {}, MDS: {}, MDP: {}, sMDS: {}",
                profile.column,
                profile.free,
                profile.max_profile_len,
                profile.smds_index,
                profile.free_bound,
                profile.is_mds,
                profile.is_mdp,
                profile.is_smds
            );
            let mut csv = String::from("j,column_distance,column_bound\n");
            for (j, d) in profile.column.iter().enumerate() {
                csv.push_str(&format!(
                    "{j},{d},{}\n",
                    trellisx::conv::column_singleton_bound(code.n(), code.k(), j)
                ));
            }
            Ok(Outcome {
                json: serde_json::to_value(&profile).expect("serializable"),
                text,
                csv: Some(csv),
                failed: false,
            })
        }
        ConvCmd::Search {
            n,
            k,
            m,
            p,
            e,
            budget,
            equal_row_degrees,
            out,
        } => {
            let field = Field::new(p, e, None)?;
            let cfg = ProfileSearch {
                n,
                k,
                memory: m,
                field,
                budget,
                seed,
                require_equal_row_degrees: equal_row_degrees,
                guard,
            };
            let result = search_best_profile(&cfg)?;
            let gen_spec = io::GeneratorJson::of(&result.code);
            if let Some(path) = out {
                std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&gen_spec).expect("serializable"),
                )
                .map_err(|e| CmdError::Input(format!("{}: {e}", path.display())))?;
            }
            let json = json!({
                "profile": result.profile,
                "horizon": result.horizon,
                "exhaustive": result.exhaustive,
                "candidates_tried": result.candidates_tried,
                "generator": gen_spec,
            });
            let text = format!(
                "best profile {:?} over {} candidates ({})",
                result.profile,
                result.candidates_tried,
                if result.exhaustive {
                    "exhaustive"
                } else {
                    "seeded random"
                }
            );
            Ok(Outcome::ok(json, text))
        }
    }
}

fn trellis_cmd(cmd: TrellisCmd, guard: u64) -> Result<Outcome, CmdError> {
    match cmd {
        TrellisCmd::Validate { file } => {
            let graph = io::load_trellis(&file)?;
            let code = TrellisCode::validate(graph, 0)?;
            let f = code.flags();
            let json = json!({
                "states": code.graph().num_states(),
                "edges": code.graph().edges().len(),
                "m_regular": f.m_regular,
                "deterministic": f.deterministic,
                "irreducible": f.irreducible,
                "lossless": f.lossless,
            });
            let text = format!(
                "{} states, {} edges: M-regular {}, deterministic {}, irreducible {}, lossless {}",
                code.graph().num_states(),
                code.graph().edges().len(),
                f.m_regular,
                f.deterministic,
                f.irreducible,
                f.lossless
            );
            Ok(Outcome::ok(json, text))
        }
        TrellisCmd::Coldist { file, j } => {
            let graph = io::load_trellis(&file)?;
            let code = TrellisCode::validate(graph, 0)?;
            let d = code.column_distance(j, guard)?;
            Ok(Outcome::ok(
                json!({"j": j, "column_distance": d}),
                format!("d_{j}^c = {d}"),
            ))
        }
        TrellisCmd::Freedist { file } => {
            let graph = io::load_trellis(&file)?;
            let code = TrellisCode::validate(graph, 0)?;
            let d = code.free_distance(guard)?;
            let text = match d {
                FreeDistance::Exact(v) => format!("{v}"),
                FreeDistance::TruncationBracket(v) => {
                    format!(">= {v} (truncated presentation; bracket at full depth)")
                }
                FreeDistance::Unbounded => "unbounded".to_string(),
            };
            Ok(Outcome::ok(
                serde_json::to_value(d).expect("serializable"),
                text,
            ))
        }
        TrellisCmd::Bounds { file, j } => {
            let graph = io::load_trellis(&file)?;
            let code = TrellisCode::validate(graph, 0)?;
            let report = code.bounds(j, guard)?;
            let failed = !(report.column_ok && report.conditional_ok && report.chain_ok)
                || report.free_le_bound == Some(false);
            let text = render_bound_report(&report);
            let mut csv = String::from("j,column_distance\n");
            for (j, d) in report.achieved_column.iter().enumerate() {
                csv.push_str(&format!("{j},{d}\n"));
            }
            Ok(Outcome {
                json: serde_json::to_value(&report).expect("serializable"),
                text,
                csv: Some(csv),
                failed,
            })
        }
        TrellisCmd::Example1 { q, m, n, j, out } => {
            let built = disjoint_alphabet_code(q, m, n, j, 1 << 22)?;
            let report = built.trellis.bounds(j, guard)?;
            if let Some(path) = out {
                std::fs::write(&path, io::trellis_to_text(built.trellis.graph()))
                    .map_err(|e| CmdError::Input(format!("{}: {e}", path.display())))?;
            }
            let json = json!({
                "q": q,
                "M": m,
                "n": n,
                "j": j,
                "code_size": built.code_size,
                "column_distance": built.column_distance,
                "column_bound": report.column_bound,
                "column_bound_conditional": report.column_bound_conditional,
            });
            let text = format!(
                "d_{j}^c = {} with |C_{j}| = {}; bounds: unconditional {} (effective {}), conditional analogue {} (effective {})",
                built.column_distance,
                built.code_size,
                report.column_bound.value,
                report.column_bound.effective,
                report.column_bound_conditional.value,
                report.column_bound_conditional.effective,
            );
            Ok(Outcome::ok(json, text))
        }
    }
}

fn render_bound_report(r: &trellisx::trellis::BoundReport) -> String {
    let free = match r.achieved_free {
        FreeDistance::Exact(v) => format!("{v}"),
        FreeDistance::TruncationBracket(v) => format!(">= {v} (bracket)"),
        FreeDistance::Unbounded => "unbounded".into(),
    };
    format!(
        "q={} M={} n={} |V|={}  log_q M = {}\n\
         columns d_0..d_{}: {:?}   free: {}\n\
         free bound {} (effective {}): {}\n\
         column bound {} (effective {}): {}\n\
         conditional column bound {} (effective {}): applied {}, ok {}\n\
         chain property: {}",
        r.q,
        r.m_size,
        r.n,
        r.num_states,
        r.log_q_m,
        r.j,
        r.achieved_column,
        free,
        r.free_bound.value,
        r.free_bound.effective,
        r.free_le_bound
            .map_or("n/a (bracket)".into(), |b| format!("{b}")),
        r.column_bound.value,
        r.column_bound.effective,
        r.column_ok,
        r.column_bound_conditional.value,
        r.column_bound_conditional.effective,
        r.conditional_applied,
        r.conditional_ok,
        r.chain_ok,
    )
}

fn graph_cmd(cmd: GraphCmd, seed: u64) -> Result<Outcome, CmdError> {
    match cmd {
        GraphCmd::Gen {
            kind,
            n,
            delta,
            out,
        } => {
            let graph = match kind {
                GraphKind::Complete => BipartiteGraph::complete(n),
                GraphKind::Random => {
                    let d = delta
                        .ok_or_else(|| CmdError::Input("--delta required for random".into()))?;
                    BipartiteGraph::random_regular(n, d, seed)?
                }
            };
            let text = graph.to_text();
            if let Some(path) = out {
                std::fs::write(&path, &text)
                    .map_err(|e| CmdError::Input(format!("{}: {e}", path.display())))?;
            }
            let json = json!({
                "n": graph.n(),
                "delta": graph.delta(),
                "edges": graph.num_edges(),
                "text": text,
            });
            Ok(Outcome::ok(json, text))
        }
        GraphCmd::Gamma { file } => {
            let graph = io::load_graph(&file)?;
            let profile = graph.gamma()?;
            let text = format!(
                "gamma = {:.12} (method {:?}, residual {:.3e})",
                profile.gamma, profile.method, profile.residual
            );
            Ok(Outcome::ok(
                serde_json::to_value(profile).expect("serializable"),
                text,
            ))
        }
        GraphCmd::Mix { file, trials } => {
            let graph = io::load_graph(&file)?;
            let gamma = graph.gamma()?.gamma;
            let sweep = graph.mixing_sweep(trials, seed, gamma);
            let failed = sweep.violations > 0;
            let text = format!(
                "{} trials with gamma {:.6}: {} violations, max lhs/rhs {:.6}",
                sweep.trials, gamma, sweep.violations, sweep.max_ratio
            );
            Ok(Outcome {
                json: serde_json::to_value(sweep).expect("serializable"),
                text,
                csv: None,
                failed,
            })
        }
    }
}

fn load_instance(
    args: &InstanceArgs,
) -> Result<trellisx::construction::ExpanderTrellisCode, CmdError> {
    match (&args.spec, args.builtin) {
        (Some(path), None) => {
            let (conv, inner, graph) = io::load_construction(path)?;
            Ok(build(ConstructionSpec::new(conv, inner, graph)?)?)
        }
        (None, Some(Builtin::Micro)) => Ok(construction::micro_instance()?),
        (None, Some(Builtin::Desk)) => Ok(construction::desk_instance()?),
        _ => Err(CmdError::Input(
            "exactly one of --spec or --builtin is required".into(),
        )),
    }
}

fn construct_cmd(cmd: ConstructCmd, guard: u64, seed: u64) -> Result<Outcome, CmdError> {
    match cmd {
        ConstructCmd::Build { instance } => {
            let etc = load_instance(&instance)?;
            let json = json!({
                "n": etc.spec.graph.n(),
                "delta": etc.spec.delta(),
                "k_tilde": etc.k_tilde(),
                "dim_lower_bound": etc.intersection.dim_lower_bound,
                "memory": etc.spec.conv.memory(),
                "packed_alphabet": etc.packed_alphabet(),
                "packed_length": etc.packed_length(),
            });
            let text = format!(
                "lift built: k_tilde = {} (bound {}), packed code: length {} over GF({})",
                etc.k_tilde(),
                etc.intersection.dim_lower_bound,
                etc.packed_length(),
                etc.packed_alphabet()
            );
            Ok(Outcome::ok(json, text))
        }
        ConstructCmd::Verify {
            instance,
            horizon,
            samples,
            inject_g0,
        } => {
            let mut etc = load_instance(&instance)?;
            if inject_g0 {
                etc.inject_first_block_tamper();
            }
            etc.check_lift_rank()?;
            let msgs = construction::sample_messages(
                etc.k_tilde(),
                etc.spec.field().q(),
                horizon + 1,
                samples,
                seed,
                false,
            );
            let summary = etc.verify_constraints(&msgs, horizon)?;
            let gamma = etc.spec.graph.gamma()?.gamma;
            let theta = etc.spec.theta(guard)?;
            let profile = etc.spec.conv.column_profile(horizon, guard)?;
            let witness_msgs = construction::sample_messages(
                etc.k_tilde(),
                etc.spec.field().q(),
                horizon + 1,
                samples,
                seed.wrapping_add(1),
                true,
            );
            let mut witness_pass = true;
            for m in &witness_msgs {
                witness_pass &= etc.witness_check(m, horizon, gamma, theta, &profile)?.pass;
            }
            let failed = !witness_pass;
            let json = json!({
                "constraints": serde_json::to_value(&summary).expect("serializable"),
                "witness_samples": witness_msgs.len(),
                "witness_all_pass": witness_pass,
            });
            let text = format!(
                "constraints: {} samples x horizon {} ok; witness decompositions: {} samples, all pass: {}",
                summary.samples,
                summary.horizon,
                witness_msgs.len(),
                witness_pass
            );
            Ok(Outcome {
                json,
                text,
                csv: None,
                failed,
            })
        }
        ConstructCmd::Report {
            instance,
            horizon,
            samples,
        } => {
            let etc = load_instance(&instance)?;
            let cfg = ReportConfig {
                horizon,
                samples,
                seed,
                conv_guard: guard,
                packed_guard: guard,
                inner_guard: guard,
            };
            let report = construction_report(&etc, &cfg)?;
            let failed = !report.pass;
            let text = render_construction_report(&report);
            let mut csv =
                String::from("j,conv_column,packed_column,packed_exact,relative,bound,pass\n");
            for c in &report.column_checks {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    c.j,
                    report.conv_profile[c.j],
                    c.achieved,
                    c.exact,
                    c.achieved_relative.f64,
                    c.bound,
                    c.pass
                ));
            }
            Ok(Outcome {
                json: serde_json::to_value(&report).expect("serializable"),
                text,
                csv: Some(csv),
                failed,
            })
        }
    }
}

fn render_construction_report(r: &trellisx::construction::ConstructionReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "expander lift over GF({}): n = {}, delta = {}, conv ({}, {}) memory {}\n",
        r.q, r.n, r.delta, r.delta, r.conv_k, r.conv_memory
    ));
    out.push_str(&format!(
        "gamma = {:.9} (residual {:.2e}), inner rate {}, theta = {}\n",
        r.gamma, r.spectral_residual, r.inner_rate.value, r.theta.value
    ));
    out.push_str(&format!(
        "k_tilde = {} (bound {}), packed code: length {} over GF({})\n",
        r.k_tilde, r.rate_degree.dim_lower_bound, r.packed_length, r.packed_alphabet
    ));
    out.push_str(&format!(
        "conv profile {:?}; packed profile {:?}\n",
        r.conv_profile, r.packed_profile
    ));
    for c in &r.column_checks {
        out.push_str(&format!(
            "  j={}: achieved {}{} rel {} >= bound {:.6}: {}\n",
            c.j,
            c.achieved,
            if c.exact { "" } else { " (subfield upper)" },
            c.achieved_relative.value,
            c.bound,
            if c.pass { "pass" } else { "FAIL" }
        ));
    }
    out.push_str(&format!(
        "constraints: {} samples ok; witnesses: {} samples all pass: {}\n",
        r.constraints.samples, r.witness_samples, r.witness_all_pass
    ));
    out.push_str(&format!(
        "rate {} >= {}: {}; dim ok: {}; rate upper ok: {}\n",
        r.rate_degree.rate.value,
        r.rate_degree.rate_lower_bound.value,
        r.rate_degree.rate_ok,
        r.rate_degree.dim_ok,
        r.rate_degree.rate_upper_ok
    ));
    match (&r.rate_degree.degree, &r.rate_degree.degree_notice) {
        (Some(d), _) => out.push_str(&format!(
            "degree upper {} per n <= bound {}: {}\n",
            d.packed_degree_upper_per_n.value, d.bound_per_n.value, d.ok
        )),
        (None, Some(notice)) => out.push_str(&format!("{notice}\n")),
        (None, None) => {}
    }
    out.push_str(&format!(
        "free distance floor {}; target relative distance 1 - k/delta = {}\n",
        r.free_distance_floor, r.target_relative_distance.value
    ));
    out.push_str(&format!(
        "overall: {}",
        if r.pass { "PASS" } else { "FAIL" }
    ));
    out
}

fn verify_all(fixtures: Option<&Path>, guard: u64, seed: u64) -> Result<Outcome, CmdError> {
    let mut lines = Vec::new();
    let mut results = Vec::new();
    let mut all_ok = true;
    let record = |results: &mut Vec<serde_json::Value>, name: &str, ok: bool, detail: String| {
        results.push(json!({"check": name, "ok": ok, "detail": detail}));
    };

    // field axioms, exhaustively, on every built-in small field
    {
        let mut ok = true;
        for (p, e) in [(2, 1), (3, 1), (5, 1), (2, 2), (2, 3), (3, 2), (2, 4)] {
            let f = Field::new(p, e, None)?;
            ok &= field_axioms_hold(&f);
        }
        all_ok &= ok;
        record(
            &mut results,
            "field-axioms",
            ok,
            "exhaustive over q <= 16".into(),
        );
        lines.push(format!(
            "[{}] field axioms",
            if ok { "PASS" } else { "FAIL" }
        ));
    }

    // baseline convolutional profile and chain property
    {
        let code = baseline_code()?;
        let profile = code.column_profile(5, guard)?;
        let free = code.free_distance(guard)?;
        let ok = profile == vec![2, 3, 3, 4, 4, 5] && free.distance == 5;
        all_ok &= ok;
        record(
            &mut results,
            "conv-baseline",
            ok,
            format!("profile {profile:?}, free {}", free.distance),
        );
        lines.push(format!(
            "[{}] convolutional baseline distances",
            if ok { "PASS" } else { "FAIL" }
        ));
    }

    // exhaustive MDP search at desk scale
    {
        let field = Field::new(2, 2, None)?;
        let cfg = ProfileSearch {
            n: 2,
            k: 1,
            memory: 1,
            field,
            budget: 1 << 16,
            seed,
            require_equal_row_degrees: true,
            guard,
        };
        let found = search_best_profile(&cfg)?;
        let profile = found.code.distance_profile(guard)?;
        let ok = found.profile == vec![2, 3, 4] && profile.is_mdp && profile.is_mds;
        all_ok &= ok;
        record(
            &mut results,
            "mdp-search",
            ok,
            format!("profile {:?}", found.profile),
        );
        lines.push(format!(
            "[{}] exhaustive (2,1,1) GF(4) search finds an MDS/MDP code",
            if ok { "PASS" } else { "FAIL" }
        ));
    }

    // disjoint-alphabet code and its bound values
    {
        let built = disjoint_alphabet_code(8, 4, 2, 1, 1 << 22)?;
        let report = built.trellis.bounds(1, guard)?;
        let ok = built.code_size == 16
            && built.column_distance == 4
            && report.column_bound.effective == 4
            && report.column_ok
            && report.chain_ok;
        all_ok &= ok;
        record(
            &mut results,
            "disjoint-alphabet",
            ok,
            format!(
                "d_1 = {}, |C_1| = {}, effective bound {}",
                built.column_distance, built.code_size, report.column_bound.effective
            ),
        );
        lines.push(format!(
            "[{}] disjoint-alphabet code attains the effective column bound",
            if ok { "PASS" } else { "FAIL" }
        ));
    }

    // spectra and mixing sweeps
    {
        let mut ok = true;
        for n in [2usize, 4, 8, 16] {
            ok &= BipartiteGraph::complete(n)
                .gamma()
                .map(|p| p.gamma.abs() < 1e-12)
                .unwrap_or(false);
        }
        let g = BipartiteGraph::random_regular(6, 3, seed)?;
        let gamma = g.gamma()?.gamma;
        let sweep = g.mixing_sweep(1000, seed, gamma);
        ok &= sweep.violations == 0;
        all_ok &= ok;
        record(
            &mut results,
            "spectra-mixing",
            ok,
            format!(
                "random (6,3) gamma {gamma:.6}, sweep violations {}",
                sweep.violations
            ),
        );
        lines.push(format!(
            "[{}] spectra and mixing sweeps",
            if ok { "PASS" } else { "FAIL" }
        ));
    }

    // micro lift end to end
    {
        let etc = construction::micro_instance()?;
        let cfg = ReportConfig {
            horizon: 0,
            samples: 16,
            seed,
            conv_guard: guard,
            packed_guard: guard,
            inner_guard: guard,
        };
        let report = construction_report(&etc, &cfg)?;
        let ok = report.pass && report.k_tilde == 1 && report.packed_profile == vec![2];
        all_ok &= ok;
        record(
            &mut results,
            "micro-lift",
            ok,
            format!("k_tilde {}", report.k_tilde),
        );
        lines.push(format!(
            "[{}] micro expander lift end to end",
            if ok { "PASS" } else { "FAIL" }
        ));
    }

    // user fixtures
    if let Some(dir) = fixtures {
        let entries = std::fs::read_dir(dir)
            .map_err(|e| CmdError::Input(format!("{}: {e}", dir.display())))?;
        let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        for path in paths {
            let name = path.display().to_string();
            match path.extension().and_then(|s| s.to_str()) {
                Some("json") => {
                    let code = io::load_generator(&path)?;
                    let ok = code.distance_profile(guard).is_ok();
                    all_ok &= ok;
                    record(&mut results, "fixture", ok, name.clone());
                    lines.push(format!(
                        "[{}] fixture {name}",
                        if ok { "PASS" } else { "FAIL" }
                    ));
                }
                Some("txt") => {
                    let graph = io::load_trellis(&path)?;
                    let code = TrellisCode::validate(graph, 0)?;
                    let ok = if code.flags().deterministic {
                        code.bounds(2, guard)
                            .map(|r| r.column_ok && r.conditional_ok && r.chain_ok)
                            .unwrap_or(false)
                    } else {
                        true // flags reported; no distance verdicts to check
                    };
                    all_ok &= ok;
                    record(&mut results, "fixture", ok, name.clone());
                    lines.push(format!(
                        "[{}] fixture {name}",
                        if ok { "PASS" } else { "FAIL" }
                    ));
                }
                _ => {}
            }
        }
    }

    let json = json!({"checks": results, "all_ok": all_ok});
    let mut text = lines.join("\n");
    text.push_str(&format!(
        "\nverify-all: {}",
        if all_ok { "PASS" } else { "FAIL" }
    ));
    Ok(Outcome {
        json,
        text,
        csv: None,
        failed: !all_ok,
    })
}

fn baseline_code() -> Result<trellisx::ConvolutionalCode, CmdError> {
    let spec: io::GeneratorJson = serde_json::from_str(
        r#"{"field": {"p": 2, "e": 1}, "n": 2, "k": 1, "G": [[[1,0,1],[1,1,1]]]}"#,
    )
    .expect("valid baseline spec");
    Ok(spec.build()?)
}

fn field_axioms_hold(f: &Field) -> bool {
    let q = f.q();
    for a in 0..q {
        if f.add(a, 0) != a || f.mul(a, 1) != a || f.add(a, f.neg(a)) != 0 {
            return false;
        }
        if a != 0 {
            match f.inv(a) {
                Ok(inv) if f.mul(a, inv) == 1 => {}
                _ => return false,
            }
        }
        for b in 0..q {
            for c in 0..q {
                if f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c)) {
                    return false;
                }
                if f.mul(f.mul(a, b), c) != f.mul(a, f.mul(b, c)) {
                    return false;
                }
            }
        }
    }
    true
}
