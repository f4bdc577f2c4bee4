//! `kc`: compile, restrict, convert, count and inspect knowledge-compilation
//! artifacts from the command line.
//!
//! Exit status: 0 on success, 1 when a validation check finds a violation,
//! 2 on usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kc_core::experiment::{run_experiment, write_csv, ExperimentSpec, Repr, Strategy, DEFAULT_BUDGET};
use kc_core::families::{family_bounds, gen, Family};
use kc_core::protocols::{
    cover_from_protocol, extract_unambiguous, fooling_set, unambiguous_cc_exact, CommMatrix, Rectangle,
    RectangleCover, Yannakakis,
};
use kc_core::sdd::{compile, SddOver, VtreeKind};
use kc_core::simulate::convert;
use kc_core::{
    Assignment, Decomposability, Determinism, NnfCircuit, OrFbdd, PrunedSdd, PrunedVtree, Sdd, Structure,
    Validity, Var, Vtree, VtreeShape,
};

#[derive(Parser)]
#[command(name = "kc", version, about = "Knowledge-compilation toolkit: SDDs, OR-FBDDs and protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an NNF circuit into an SDD.
    Compile(CompileArgs),
    /// Restrict an SDD by a partial assignment, giving a pruned SDD.
    Restrict(RestrictArgs),
    /// Convert between representations.
    Convert(ConvertArgs),
    /// Count models of an SDD, NNF or OR-FBDD file.
    Count(CountArgs),
    /// Extract a protocol from an SDD or a matrix and run the deterministic simulation.
    Protocol(ProtocolArgs),
    /// Generate a family instance as NNF with a `.vars` naming sidecar.
    Family(FamilyArgs),
    /// Measure representation sizes over a parameter range, as CSV.
    Experiment(ExperimentArgs),
    /// Check an SDD, NNF or OR-FBDD file for structural violations.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Balanced,
    RightLinear,
    LeftLinear,
    Random,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    input: PathBuf,
    /// Vtree file; without it one is built from --shape.
    #[arg(long)]
    vtree: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "balanced")]
    shape: Shape,
    /// Seed for --shape random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output SDD; its vtree is written next to it as `<stem>.vtree`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RestrictArgs {
    #[arg(long)]
    input: PathBuf,
    /// Defaults to `<stem>.vtree` next to the input.
    #[arg(long)]
    vtree: Option<PathBuf>,
    /// Assignment such as `2=0,1=1`.
    #[arg(long)]
    assign: String,
    /// Output pruned SDD; the pruned vtree goes to `<stem>.vtree`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conversion {
    Dnnf2orfbdd,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(value_enum)]
    kind: Conversion,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CountArgs {
    /// `.sdd`, `.nnf` or `.orfbdd` file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    vtree: Option<PathBuf>,
    /// Variables counted over for OR-FBDDs; defaults to the largest used.
    #[arg(long)]
    var_count: Option<u32>,
}

#[derive(Args)]
struct ProtocolArgs {
    /// SDD to extract from, at the balanced vertex of its vtree.
    #[arg(long, conflicts_with = "matrix")]
    sdd: Option<PathBuf>,
    #[arg(long)]
    vtree: Option<PathBuf>,
    /// Communication matrix as a 0/1 grid or plain PBM; covered row by row.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Row and column to run the deterministic protocol on.
    #[arg(long, requires = "col")]
    row: Option<usize>,
    #[arg(long, requires = "row")]
    col: Option<usize>,
}

#[derive(Args)]
struct FamilyArgs {
    /// h0, qv, h1, hk, perm, rowcol, disjointness or shifted_eq.
    name: String,
    /// Size parameter (m for the grid families, n otherwise).
    #[arg(long, alias = "n")]
    m: u32,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyName {
    Balanced,
    RightLinear,
    RandomRestarts,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReprName {
    Sdd,
    Obdd,
    Orfbdd,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    from: u32,
    #[arg(long)]
    to: u32,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long, value_enum, default_value = "sdd")]
    repr: ReprName,
    #[arg(long, value_enum, default_value = "random-restarts")]
    strategy: StrategyName,
    #[arg(long, default_value_t = 200)]
    restarts: u32,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 40)]
    max_vars: u32,
    /// Per-restart compilation budget in SDD elements; 0 disables it.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Fill the wall_ms column (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ValidateTarget {
    #[arg(long)]
    sdd: Option<PathBuf>,
    #[arg(long)]
    nnf: Option<PathBuf>,
    #[arg(long)]
    orfbdd: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    target: ValidateTarget,
    #[arg(long)]
    vtree: Option<PathBuf>,
}

/// What a successful command reports back to `main`.
enum Verdict {
    Ok,
    Violation,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<Verdict> {
    match cmd {
        Command::Compile(a) => cmd_compile(a),
        Command::Restrict(a) => cmd_restrict(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Count(a) => cmd_count(a),
        Command::Protocol(a) => cmd_protocol(a),
        Command::Family(a) => cmd_family(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn sibling_vtree(path: &Path) -> PathBuf {
    path.with_extension("vtree")
}

fn load_nnf(path: &Path) -> Result<NnfCircuit> {
    NnfCircuit::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn header(text: &str) -> Option<&str> {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('c'))
        .and_then(|l| l.split_whitespace().next())
}

enum AnySdd {
    Full(Sdd),
    Pruned(PrunedSdd),
}

fn parse_sdd<V: VtreeKind>(text: &str, vtree: V, path: &Path) -> Result<SddOver<V>> {
    SddOver::parse(text, Arc::new(vtree)).with_context(|| format!("parsing {}", path.display()))
}

/// Loads a full or pruned SDD; the vtree comes from `vtree` or the sibling
/// `<stem>.vtree`.
fn load_sdd(path: &Path, vtree: Option<&Path>) -> Result<AnySdd> {
    let text = read(path)?;
    let vpath = vtree.map_or_else(|| sibling_vtree(path), Path::to_path_buf);
    let vtext = read(&vpath).context("an SDD needs its vtree: pass --vtree or place <stem>.vtree beside it")?;
    let vparse = |e: kc_core::Error| anyhow::Error::new(e).context(format!("parsing {}", vpath.display()));
    Ok(match header(&text) {
        Some("psdd-pruned") => AnySdd::Pruned(parse_sdd(&text, PrunedVtree::parse(&vtext).map_err(vparse)?, path)?),
        _ => AnySdd::Full(parse_sdd(&text, Vtree::parse(&vtext).map_err(vparse)?, path)?),
    })
}

fn load_full_sdd(path: &Path, vtree: Option<&Path>) -> Result<Sdd> {
    match load_sdd(path, vtree)? {
        AnySdd::Full(s) => Ok(s),
        AnySdd::Pruned(_) => bail!("{} is a pruned SDD; this command needs a full one", path.display()),
    }
}

fn cmd_compile(a: CompileArgs) -> Result<Verdict> {
    let c = load_nnf(&a.input)?;
    let vtree = match &a.vtree {
        Some(p) => Vtree::parse(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => {
            let vars: Vec<Var> = (1..=c.var_count()).collect();
            let shape = match a.shape {
                Shape::Balanced => VtreeShape::Balanced,
                Shape::RightLinear => VtreeShape::RightLinear,
                Shape::LeftLinear => VtreeShape::LeftLinear,
                Shape::Random => VtreeShape::Random(a.seed),
            };
            Vtree::build(&vars, shape)?
        }
    };
    let s = compile(&c, &vtree)?;
    write(&a.out, &s.to_text())?;
    write(&sibling_vtree(&a.out), &vtree.to_text())?;
    println!("size {} nodes {}", s.size(), s.size_circle_only());
    Ok(Verdict::Ok)
}

fn cmd_restrict(a: RestrictArgs) -> Result<Verdict> {
    let s = load_full_sdd(&a.input, a.vtree.as_deref())?;
    let rho = Assignment::parse(&a.assign)?;
    let r = s.restrict(&rho)?;
    write(&a.out, &r.to_text())?;
    write(&sibling_vtree(&a.out), &r.vtree().to_text())?;
    println!("size {} nodes {}", r.size(), r.size_circle_only());
    Ok(Verdict::Ok)
}

fn cmd_convert(a: ConvertArgs) -> Result<Verdict> {
    match a.kind {
        Conversion::Dnnf2orfbdd => {
            let c = load_nnf(&a.input)?;
            let conv = convert(&c)?;
            write(&a.out, &conv.fbdd.to_text())?;
            let b = conv.bound();
            println!("N {} M {} L {}", conv.n, conv.m, conv.l);
            println!("bound NM^L={} N2^log2={} actual={}", b.nml, b.quasi, conv.fbdd.len());
        }
    }
    Ok(Verdict::Ok)
}

fn count_sdd<V: VtreeKind>(s: &SddOver<V>) {
    println!("models {}", s.count_models());
}

fn cmd_count(a: CountArgs) -> Result<Verdict> {
    match a.input.extension().and_then(|e| e.to_str()) {
        Some("sdd") => match load_sdd(&a.input, a.vtree.as_deref())? {
            AnySdd::Full(s) => count_sdd(&s),
            AnySdd::Pruned(s) => count_sdd(&s),
        },
        Some("nnf") => println!("models {}", load_nnf(&a.input)?.count_models_brute()?),
        Some("orfbdd") => {
            let f = OrFbdd::parse(&read(&a.input)?).with_context(|| format!("parsing {}", a.input.display()))?;
            let n = a.var_count.unwrap_or_else(|| f.vars().last().copied().unwrap_or(0));
            if f.has_or_nodes() {
                let order: Vec<Var> = (1..=n).collect();
                println!("models {}", f.truth_table(&order)?.count_ones());
            } else {
                println!("models {}", f.count_models_fbdd(n)?);
            }
        }
        _ => bail!("unknown input kind for {}; expected .sdd, .nnf or .orfbdd", a.input.display()),
    }
    Ok(Verdict::Ok)
}

fn cmd_protocol(a: ProtocolArgs) -> Result<Verdict> {
    let (matrix, cover) = match (&a.sdd, &a.matrix) {
        (Some(path), _) => {
            let s = load_full_sdd(path, a.vtree.as_deref())?;
            let b = s.vtree().find_balanced_vertex()?;
            let part = s.vtree().shell_partition(b)?;
            let p = extract_unambiguous(&s, &part)?;
            let check = p.verify()?;
            println!("vertex {b} shell {:?} inner {:?}", part.shell, part.inner);
            println!(
                "unambiguous alphabet {} cost {} bound {} correct {} max-accepting {}",
                p.alphabet().len(),
                check.cost_bits,
                check.cost_bound,
                check.correct,
                check.max_accepting
            );
            (p.matrix()?, cover_from_protocol(&p)?)
        }
        (None, Some(path)) => {
            let m = CommMatrix::parse_grid(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            let exact = unambiguous_cc_exact(&m)?;
            println!(
                "rectangles {} unambiguous-cc {} fooling-set {}",
                exact.rectangles,
                exact.cc,
                fooling_set(&m).len()
            );
            let rows = (0..m.num_rows())
                .filter(|&r| m.row(r).count_ones(..) > 0)
                .map(|r| Rectangle::new([r], m.row(r).ones()))
                .collect();
            (m, RectangleCover::new(rows))
        }
        (None, None) => bail!("pass --sdd or --matrix"),
    };
    let y = Yannakakis::new(&cover, &matrix)?;
    println!("cover {} g {} bit-bound {}", cover.len(), y.g(), y.bit_bound());
    match (a.row, a.col) {
        (Some(r), Some(c)) => {
            if r >= matrix.num_rows() || c >= matrix.num_cols() {
                bail!("entry ({r},{c}) is outside the {}x{} matrix", matrix.num_rows(), matrix.num_cols());
            }
            let run = y.run(r, c);
            for line in run.transcript() {
                println!("{line}");
            }
            println!("output {} bits {}", u8::from(run.output), run.bits);
        }
        _ => {
            let rep = y.verify();
            println!(
                "correct {} halving {} max-bits {} max-rounds {}",
                rep.correct, rep.halving, rep.max_bits, rep.max_rounds
            );
        }
    }
    Ok(Verdict::Ok)
}

fn cmd_family(a: FamilyArgs) -> Result<Verdict> {
    let fam = Family::from_name(&a.name, a.m, a.k, a.level)?;
    let inst = gen(fam)?;
    write(&a.out, &inst.circuit.to_text())?;
    write(&a.out.with_extension("vars"), &inst.vars_text())?;
    println!("{fam} vars {}", inst.circuit.var_count());
    println!("{}", family_bounds(fam));
    Ok(Verdict::Ok)
}

fn cmd_experiment(a: ExperimentArgs) -> Result<Verdict> {
    if a.from > a.to {
        bail!("empty parameter range {}..{}", a.from, a.to);
    }
    let family = Family::from_name(&a.family, a.from, a.k, a.level)?;
    let repr = match a.repr {
        ReprName::Sdd => Repr::Sdd,
        ReprName::Obdd => Repr::Obdd,
        ReprName::Orfbdd => Repr::OrFbdd,
    };
    let strategy = match a.strategy {
        StrategyName::Balanced => Strategy::Balanced,
        StrategyName::RightLinear => Strategy::RightLinear,
        StrategyName::RandomRestarts => Strategy::RandomRestarts {
            count: a.restarts,
            seed: a.seed,
        },
    };
    let mut spec = ExperimentSpec::new(family, (a.from..=a.to).collect(), repr, strategy);
    spec.max_vars = a.max_vars;
    spec.timing = a.timing;
    spec.budget = (a.budget > 0).then_some(a.budget);
    let rows = run_experiment(&spec)?;
    match &a.out {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, file)?;
        }
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(Verdict::Ok)
}

fn report_validity(v: Validity) -> Verdict {
    match v {
        Validity::Ok => {
            println!("ok");
            Verdict::Ok
        }
        Validity::Violation { node, kind } => {
            println!("violation node {node} kind {kind}");
            Verdict::Violation
        }
        Validity::Unknown { node } => {
            println!("unknown node {node} (prime support above the oracle cap)");
            Verdict::Ok
        }
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<Verdict> {
    let t = a.target;
    if let Some(path) = t.sdd {
        return Ok(match load_sdd(&path, a.vtree.as_deref())? {
            AnySdd::Full(s) => report_validity(s.validate()),
            AnySdd::Pruned(s) => report_validity(s.validate()),
        });
    }
    if let Some(path) = t.nnf {
        let c = load_nnf(&path)?;
        let det = match c.check_deterministic() {
            Determinism::Ok => "deterministic".to_string(),
            Determinism::Violation { or_node } => format!("not deterministic at OR node {or_node}"),
            Determinism::Unknown { or_node } => format!("determinism unknown at OR node {or_node}"),
        };
        return Ok(match c.check_decomposable() {
            Decomposability::Ok => {
                println!("ok decomposable, {det}");
                Verdict::Ok
            }
            Decomposability::Violation { and_node, shared_var } => {
                println!("violation node {and_node} kind decomposability var {shared_var}");
                Verdict::Violation
            }
        });
    }
    if let Some(path) = t.orfbdd {
        let f = OrFbdd::parse(&read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(match f.check_structure(None) {
            Structure::Ok => {
                println!("ok");
                Verdict::Ok
            }
            Structure::Violation(w) => {
                println!("violation path {:?} reason {}", w.path, w.reason);
                Verdict::Violation
            }
        });
    }
    unreachable!("clap requires one target")
}
