//! The three subcommands, callable without going through argv.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pentile::goodsets::{emit_tables, enumerate_all, goodsets_tsv, parse_golden, parse_tables, Enumeration, GoldenEntry, GOLDEN_TABLE};
use pentile::search::{search_cases, CaseVerdict, Limits, Outcome, SearchError};
use pentile::tiling::Snapshot;
use pentile::vectypes::{apply_perm, polytope, Permutation5};
use thiserror::Error;

use crate::render::{self, RenderError};

/// Environment variable naming a directory holding `table1.txt`.
pub const DATA_ENV: &str = "PENTILE_DATA";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("case {0} is outside 1..=371")]
    InvalidCase(usize),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("golden table: {0}")]
    Golden(String),
    #[error("enumeration failed: {0}")]
    Enumeration(String),
    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidCase(_) | CliError::NonPositive(_) => 2,
            _ => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Parser)]
#[command(name = "pentile", about = "Pentagon vertex-type enumeration and tiling search", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate the maximal good sets and their dihedral classes.
    Enumerate(EnumerateArgs),
    /// Run the backtracking search on one case or all of them.
    Search(SearchArgs),
    /// Draw a tiling graph snapshot as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    /// Compare with the golden table and fail on any difference.
    #[arg(long)]
    pub check: bool,
    #[arg(long, default_value = "goodsets.tsv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, required_unless_present = "all", conflicts_with = "all")]
    pub case: Option<usize>,
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = 50)]
    pub max_tiles: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_nodes: u64,
    /// Wall-clock budget per case.
    #[arg(long)]
    pub time_limit_secs: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run the full closure certificate every K nodes.
    #[arg(long, default_value_t = 8)]
    pub cert_period: u64,
    /// Search straight to `max_tiles` instead of raising the tile cap step by step.
    #[arg(long)]
    pub no_deepening: bool,
    /// JSON-lines output, one case per line. Standard output when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Directory for the snapshots of nodes that hit a limit.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// SVG units per unit of length (the perimeter is 1).
    #[arg(long, default_value_t = 600.0)]
    pub scale: f64,
}

impl SearchArgs {
    pub fn for_case(case: usize) -> SearchArgs {
        SearchArgs {
            case: Some(case),
            all: false,
            max_tiles: 50,
            max_nodes: 1_000_000,
            time_limit_secs: None,
            threads: None,
            cert_period: 8,
            no_deepening: false,
            report: None,
            snapshots: None,
        }
    }

    pub fn limits(&self) -> Result<Limits, CliError> {
        if self.max_tiles == 0 {
            return Err(CliError::NonPositive("--max-tiles"));
        }
        if self.max_nodes == 0 {
            return Err(CliError::NonPositive("--max-nodes"));
        }
        if self.cert_period == 0 {
            return Err(CliError::NonPositive("--cert-period"));
        }
        if self.time_limit_secs == Some(0) {
            return Err(CliError::NonPositive("--time-limit-secs"));
        }
        Ok(Limits {
            max_tiles: self.max_tiles,
            max_nodes: self.max_nodes,
            time_limit_ms: self.time_limit_secs.map(|s| s * 1000),
            deepening: !self.no_deepening,
            cert_period: self.cert_period,
            ..Limits::default()
        })
    }
}

/// The golden table from `$PENTILE_DATA/table1.txt`, or the shipped copy.
pub fn load_golden() -> Result<Vec<GoldenEntry>, CliError> {
    let text = match std::env::var_os(DATA_ENV) {
        Some(dir) => {
            let path = Path::new(&dir).join("table1.txt");
            fs::read_to_string(&path).map_err(io_err(&path))?
        }
        None => GOLDEN_TABLE.to_string(),
    };
    parse_golden(&text).map_err(|e| CliError::Golden(e.to_string()))
}

pub fn summary(e: &Enumeration) -> String {
    let dims: Vec<String> = e.dim_counts().iter().rev().map(|(d, n)| format!("dim {d}: {n}")).collect();
    format!(
        "{} maximal good sets, {} after permutation, {} classes\n{}\n{} recursion calls in {:.1?}\n",
        e.ordered.len(),
        e.permuted_count,
        e.records.len(),
        dims.join(", "),
        e.stats.recurse_calls,
        e.stats.elapsed
    )
}

/// Differences between an enumeration and the golden table, as readable
/// lines. Empty when they agree.
pub fn golden_mismatches(e: &Enumeration, golden: &[GoldenEntry]) -> Vec<String> {
    let mut out = Vec::new();
    if e.records.len() != golden.len() {
        out.push(format!("{} classes, golden table has {}", e.records.len(), golden.len()));
    }
    let by_index: BTreeMap<usize, &GoldenEntry> = golden.iter().map(|g| (g.index, g)).collect();
    let emitted = match parse_tables(&emit_tables(&e.records)) {
        Ok(rows) => rows,
        Err(err) => return vec![format!("emitted tables do not parse: {err}")],
    };
    for (index, struck, dim, basis) in &emitted {
        let (Some(g), Some(r)) = (by_index.get(index), e.record(*index)) else {
            out.push(format!("class {index} is not in the golden table"));
            continue;
        };
        if (*struck, *dim, basis) != (g.struck, g.dim, &g.basis_set()) {
            out.push(format!("class {index}: text differs from the golden row"));
        }
        // Same polytope as the printed basis, up to a dihedral relabelling.
        let pb = polytope(&g.basis_set(), false);
        let same = Permutation5::dihedral().iter().any(|p| {
            let image = polytope(&apply_perm(p, &r.canonical), false);
            pb.implies(&image.base) && image.implies(&pb.base)
        });
        if !same {
            out.push(format!("class {index}: polytope differs from the golden basis"));
        }
    }
    for g in golden {
        if e.record(g.index).is_none() {
            out.push(format!("golden class {} was not produced", g.index));
        }
    }
    out
}

/// Returns the exit status: 1 on a golden mismatch under `--check`.
pub fn cmd_enumerate(args: &EnumerateArgs, stdout: &mut dyn std::io::Write) -> Result<i32, CliError> {
    let golden = load_golden()?;
    let e = enumerate_all(&golden).map_err(|err| CliError::Enumeration(err.to_string()))?;
    fs::write(&args.out, goodsets_tsv(&e.records)).map_err(io_err(&args.out))?;
    let _ = write!(stdout, "{}", summary(&e));
    if !args.check {
        return Ok(0);
    }
    let bad = golden_mismatches(&e, &golden);
    if bad.is_empty() {
        let _ = writeln!(stdout, "check: matches the golden table");
        Ok(0)
    } else {
        for line in &bad {
            let _ = writeln!(stdout, "mismatch: {line}");
        }
        Ok(1)
    }
}

pub fn verdict_line(v: &CaseVerdict) -> String {
    let families = |f: &std::collections::BTreeSet<u8>| f.iter().map(u8::to_string).collect::<Vec<_>>().join(",");
    let what = match &v.outcome {
        Outcome::NoTiling => "NoTiling".to_string(),
        Outcome::PrunedIntoFamilies { families: f } => format!("PrunedIntoFamilies {{{}}}", families(f)),
        Outcome::Inconclusive { limit, families: f } => format!("Inconclusive ({limit}) {{{}}}", families(f)),
    };
    format!("case {}: {what}, {} nodes, {} tiles, {} ms", v.case_index, v.stats.nodes, v.stats.max_tiles_seen, v.stats.elapsed_ms)
}

/// Runs the search and writes the JSON-lines report. Reports go to `stdout`
/// when no path is given, otherwise one summary line per case does.
pub fn cmd_search(args: &SearchArgs, stdout: &mut dyn std::io::Write) -> Result<Vec<CaseVerdict>, CliError> {
    let limits = args.limits()?;
    let golden = load_golden()?;
    let cases: Vec<usize> = match args.case {
        Some(c) if golden.iter().any(|g| g.index == c) => vec![c],
        Some(c) => return Err(CliError::InvalidCase(c)),
        None => golden.iter().map(|g| g.index).collect(),
    };
    let threads = args.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(CliError::NonPositive("--threads"));
    }
    let verdicts: Vec<CaseVerdict> = search_cases(&cases, &limits, threads).into_iter().collect::<Result<_, _>>()?;
    let mut lines = String::new();
    for v in &verdicts {
        lines.push_str(&serde_json::to_string(v).expect("verdicts serialise"));
        lines.push('\n');
    }
    match &args.report {
        Some(path) => {
            fs::write(path, &lines).map_err(io_err(path))?;
            for v in &verdicts {
                let _ = writeln!(stdout, "{}", verdict_line(v));
            }
        }
        None => {
            let _ = write!(stdout, "{lines}");
        }
    }
    if let Some(dir) = &args.snapshots {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for v in &verdicts {
            if let Some(s) = &v.limit_snapshot {
                let path = dir.join(format!("case{}.graph", v.case_index));
                fs::write(&path, s).map_err(io_err(&path))?;
            }
        }
    }
    Ok(verdicts)
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Snapshot::decode(&text).map_err(|e| CliError::Snapshot { path: path.to_path_buf(), message: e.to_string() })
}

pub fn cmd_render(args: &RenderArgs) -> Result<render::RenderModel, CliError> {
    if !(args.scale > 0.0) {
        return Err(CliError::NonPositive("--scale"));
    }
    let snap = read_snapshot(&args.snapshot)?;
    let model = render::model(&snap)?;
    fs::write(&args.out, render::svg(&model, args.scale)).map_err(io_err(&args.out))?;
    Ok(model)
}

pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Enumerate(a) => cmd_enumerate(a, stdout),
        Command::Search(a) => cmd_search(a, stdout).map(|_| 0),
        Command::Render(a) => {
            let m = cmd_render(a)?;
            let _ = writeln!(stdout, "{} tiles, largest mismatch {:.2e}", m.tiles.len(), m.max_mismatch);
            Ok(0)
        }
    }
}
