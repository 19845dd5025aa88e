//! Command-line frontend. [`run`] parses arguments, dispatches to the
//! `sumrank` library and writes the result; `main` only forwards the process
//! arguments and exit status.
//!
//! Exit status: 0 success, 1 usage or input error, 2 decoding failure,
//! 3 budget exceeded, 4 a `verify` check failed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sumrank::channel::simulate;
use sumrank::codes::{
    check_distance3, hamming_from_spread, min_sumrank_distance, perfect_code_check, simplex_distance_bound,
    simplex_from_hamming, CodeDescriptor,
};
use sumrank::galois::{FieldCtx, Matrix};
use sumrank::lrc::{
    build_lrc, compare_reference_table, lrc_parameter_table, single_parity_generator, ErasurePattern,
    LrcDescriptor, REFERENCE_TABLE_Q2, TABLE_CSV_HEADER,
};
use sumrank::spreads::{desarguesian_spread, search_partial_spread, spread_size_bounds, SpreadFamily, SpreadTarget};
use sumrank::syndrome::decode;
use sumrank::verify::verify_parameters;
use sumrank::Error;

pub use sumrank::DEFAULT_BUDGET;
pub const BUDGET_ENV: &str = "SUMRANK_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "sumrank", version, about = "Sum-rank Hamming and simplex codes")]
struct Cli {
    /// Seed for the ChaCha8 generator behind every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build or search a partial spread and report the size bounds.
    Spread(SpreadArgs),
    /// Build a sum-rank Hamming code and check its distance.
    Hamming(CodeArgs),
    /// Build a sum-rank simplex code and compare its distance to the bound.
    Simplex(CodeArgs),
    /// Correct a single sum-rank error.
    Decode {
        #[arg(long)]
        code: PathBuf,
        /// Received word as a one-row matrix.
        #[arg(long)]
        received: PathBuf,
    },
    /// Monte-Carlo run of the coherent channel pipeline.
    Simulate {
        #[arg(long)]
        code: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        rho: usize,
    },
    /// Locally repairable codes with single-parity local codes.
    Lrc {
        #[command(subcommand)]
        action: LrcCommand,
    },
    /// Run the distance, perfect-code and length-bound checks.
    Verify {
        #[arg(long)]
        q: u32,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Recompute the reference LRC parameter table and flag disagreements.
    PaperTables {
        #[arg(long, default_value_t = 2)]
        q: u32,
    },
}

#[derive(Debug, Args)]
struct SpreadArgs {
    #[arg(long)]
    q: u32,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    r: usize,
    /// Search instead of the Desarguesian construction.
    #[arg(long)]
    search: bool,
    /// Stop the search once this many members are found.
    #[arg(long)]
    target: Option<usize>,
    /// Member dimensions for an improper spread search, e.g. `3,2,2`.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Args)]
struct CodeArgs {
    #[arg(long)]
    q: Option<u32>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    /// Use the members of this spread file as parity-check blocks.
    #[arg(long)]
    spread: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum LrcCommand {
    /// Global code from an outer code file.
    Build {
        #[arg(long)]
        code: PathBuf,
    },
    /// Repair one local group.
    Repair {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        word: PathBuf,
        #[arg(long)]
        erased: PathBuf,
        /// Group to repair; every repairable group when omitted.
        #[arg(long)]
        group: Option<usize>,
    },
    /// Global erasure decoding after local repair.
    Decode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        word: PathBuf,
        #[arg(long)]
        erased: PathBuf,
    },
    /// Parameter table for `N | r` pairs given as `N:r`.
    Table {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
        pairs: Option<Vec<(usize, usize)>>,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected N:r, got {s}"))?;
    let a = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    Ok((a, b))
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Lib(Error),
    ChecksFailed(Output),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn status(&self) -> i32 {
        match self {
            Failure::Lib(Error::DecodingFailure { .. }) => 2,
            Failure::Lib(Error::BudgetExceeded { .. }) => 3,
            Failure::ChecksFailed(_) => 4,
            _ => 1,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Usage(m) => json!({"error": "usage", "message": m}),
            Failure::Io(m) => json!({"error": "io", "message": m}),
            Failure::Lib(e) => {
                let mut v = json!({"error": e.kind(), "message": e.to_string()});
                if let Error::DecodingFailure { syndrome } = e {
                    v["syndrome"] = json!(syndrome);
                }
                v
            }
            Failure::ChecksFailed(_) => json!({"error": "check_failed", "message": "one or more checks failed"}),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Command result: a JSON document, optionally with a tabular view.
#[derive(Debug)]
struct Output {
    doc: Value,
    table: Option<(Vec<String>, Vec<Vec<String>>)>,
    default_format: Format,
}

impl Output {
    fn doc(doc: Value) -> Self {
        Output {
            doc,
            table: None,
            default_format: Format::Json,
        }
    }

    fn render(&self, format: Option<Format>) -> CliResult<String> {
        match format.unwrap_or(self.default_format) {
            Format::Json => Ok(serde_json::to_string_pretty(&self.doc).expect("values serialize") + "\n"),
            Format::Csv => {
                let (header, rows) = self.table.clone().or_else(|| scalar_row(&self.doc)).ok_or_else(|| {
                    Failure::Usage("this result has no tabular form; use --format json or text".into())
                })?;
                let mut s = header.join(",") + "\n";
                for r in rows {
                    s += &(r.join(",") + "\n");
                }
                Ok(s)
            }
            Format::Text => Ok(match &self.table {
                Some((header, rows)) => {
                    let mut s = header.join("\t") + "\n";
                    for r in rows {
                        s += &(r.join("\t") + "\n");
                    }
                    s
                }
                None => text_lines(&self.doc),
            }),
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Top-level scalar fields as a one-row table.
fn scalar_row(doc: &Value) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let obj = doc.as_object()?;
    let fields: Vec<(&String, &Value)> = obj
        .iter()
        .filter(|(_, v)| !v.is_object() && !v.is_array())
        .collect();
    if fields.is_empty() {
        return None;
    }
    let header = fields.iter().map(|(k, _)| k.to_string()).collect();
    let row = fields.iter().map(|(_, v)| scalar_text(v)).collect();
    Some((header, vec![row]))
}

fn text_lines(doc: &Value) -> String {
    match doc.as_object() {
        Some(obj) => obj
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) if s.contains('\n') => format!("{k}:\n{s}"),
                _ => format!("{k}: {}\n", scalar_text(v)),
            })
            .collect(),
        None => scalar_text(doc) + "\n",
    }
}

fn budget(flag: Option<u64>) -> CliResult<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{BUDGET_ENV} must be a non-negative integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> CliResult<Value> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Lib(Error::Parse(format!("{}: {e}", path.display()))))
}

fn read_code(path: &Path) -> CliResult<CodeDescriptor> {
    Ok(CodeDescriptor::from_json(&read_json(path)?)?)
}

/// A one-row matrix file over the code's field.
fn read_word(path: &Path, ctx: &std::sync::Arc<FieldCtx>) -> CliResult<Vec<u32>> {
    let m = Matrix::from_text_in(&read(path)?, ctx)?;
    if m.rows() != 1 {
        return Err(Failure::Lib(Error::Dimension(format!("expected one row, got {}", m.rows()))));
    }
    Ok(m.row(0).to_vec())
}

fn read_indices(path: &Path) -> CliResult<Vec<usize>> {
    read(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse()
                .map_err(|_| Failure::Lib(Error::Parse(format!("bad erased index {l:?}"))))
        })
        .collect()
}

fn word_text(ctx: &std::sync::Arc<FieldCtx>, w: &[u32]) -> String {
    Matrix::row_vector(ctx, w).expect("entries come from the field").to_text()
}

fn require<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| Failure::Usage(format!("missing {flag}")))
}

fn spread_for(args: &CodeArgs) -> CliResult<SpreadFamily> {
    if let Some(path) = &args.spread {
        return Ok(SpreadFamily::from_json(&read_json(path)?)?);
    }
    let q = require(args.q, "--q")?;
    let n = require(args.n, "--N")?;
    let r = require(args.r, "--r")?;
    if n == 0 || n > r {
        return Err(Failure::Lib(Error::Precondition(format!("need 1 <= N <= r, got N={n}, r={r}"))));
    }
    Ok(sumrank::verify::spread_for(q, n, r, budget(args.budget)?)?)
}

fn cmd_spread(a: &SpreadArgs) -> CliResult<Output> {
    let budget = budget(a.budget)?;
    let (family, certified, nodes, method) = if let Some(dims) = &a.dims {
        let s = search_partial_spread(a.q, &SpreadTarget::Profile { dims: dims.clone() }, a.r, budget)?;
        (s.family, s.certified, s.nodes, "search")
    } else {
        let n = require(a.n, "--N or --dims")?;
        if !a.search && n >= 1 && a.r % n == 0 {
            (desarguesian_spread(a.q, n, a.r)?, true, 0, "desarguesian")
        } else {
            let target = SpreadTarget::Uniform { n, target: a.target };
            let s = search_partial_spread(a.q, &target, a.r, budget)?;
            (s.family, s.certified, s.nodes, "search")
        }
    };
    let mut doc = json!({
        "spread": family.to_json(),
        "size": family.len(),
        "method": method,
        "certified": certified,
        "nodes": nodes,
    });
    let dims = family.dims();
    if let Some(&n) = dims.first() {
        if dims.iter().all(|&d| d == n) {
            let (lo, hi) = spread_size_bounds(a.q, n, a.r)?;
            doc["lower_bound"] = json!(lo.to_string());
            doc["upper_bound"] = json!(hi.to_string());
        }
    }
    Ok(Output::doc(doc))
}

fn cmd_hamming(a: &CodeArgs) -> CliResult<Output> {
    let c = hamming_from_spread(&spread_for(a)?)?;
    let mut doc = c.to_json();
    doc["distance3"] = json!(check_distance3(c.parity_check(), c.partition())?);
    match min_sumrank_distance(&c, budget(a.budget)?) {
        Ok(d) => doc["min_distance"] = json!(d),
        Err(Error::BudgetExceeded { .. }) => doc["min_distance"] = Value::Null,
        Err(e) => return Err(e.into()),
    }
    if c.partition().common_sublength().is_some_and(|nn| c.r() % nn == 0) {
        doc["perfect"] = json!(perfect_code_check(&c)?);
    }
    Ok(Output::doc(doc))
}

fn cmd_simplex(a: &CodeArgs) -> CliResult<Output> {
    let h = hamming_from_spread(&spread_for(a)?)?;
    let s = simplex_from_hamming(&h)?;
    let mut doc = s.to_json();
    doc["min_distance"] = json!(min_sumrank_distance(&s, budget(a.budget)?)?);
    if let Some(nn) = h.partition().common_sublength() {
        let bound = simplex_distance_bound(h.q(), nn, h.r())?;
        doc["distance_bound"] = json!(bound.to_string());
    }
    Ok(Output::doc(doc))
}

fn cmd_decode(code: &Path, received: &Path) -> CliResult<Output> {
    let c = read_code(code)?;
    let y = read_word(received, c.ctx())?;
    let d = decode(&c, &y)?;
    Ok(Output::doc(serde_json::to_value(&d).expect("plain data serializes")))
}

fn cmd_simulate(code: &Path, trials: u64, t: usize, rho: usize, seed: u64) -> CliResult<Output> {
    let c = read_code(code)?;
    let rep = simulate(&c, trials, t, rho, seed)?;
    Ok(Output::doc(serde_json::to_value(&rep).expect("plain data serializes")))
}

fn load_lrc(code: &Path) -> CliResult<LrcDescriptor> {
    let outer = read_code(code)?;
    let base = outer.ctx().base_ctx();
    let locals = outer
        .partition()
        .sublengths()
        .iter()
        .map(|&n| single_parity_generator(&base, n))
        .collect();
    Ok(build_lrc(&outer, locals)?)
}

fn load_erased_word(lrc: &LrcDescriptor, word: &Path, erased: &Path) -> CliResult<Vec<Option<u32>>> {
    let w = read_word(word, lrc.global().ctx())?;
    if w.len() != lrc.length() {
        return Err(Failure::Lib(Error::Dimension(format!(
            "word of length {} for a code of length {}",
            w.len(),
            lrc.length()
        ))));
    }
    let pattern = ErasurePattern::new(w.len(), read_indices(erased)?)?;
    Ok(pattern.apply(&w))
}

fn cmd_lrc(action: &LrcCommand) -> CliResult<Output> {
    match action {
        LrcCommand::Build { code } => {
            let l = load_lrc(code)?;
            let local_distances: Vec<usize> = (0..l.groups()).map(|i| l.local_distance(i)).collect();
            Ok(Output::doc(json!({
                "global": l.global().to_json(),
                "length": l.length(),
                "dimension": l.dimension(),
                "local_groups": l.groups(),
                "localities": l.localities(),
                "local_distances": local_distances,
                "outer_distance": l.outer_distance(),
                "outer_distance_exact": l.outer_distance_exact(),
            })))
        }
        LrcCommand::Repair {
            code,
            word,
            erased,
            group,
        } => {
            let l = load_lrc(code)?;
            let mut w = load_erased_word(&l, word, erased)?;
            let groups: Vec<usize> = match group {
                Some(g) if *g >= l.groups() => {
                    return Err(Failure::Usage(format!("group {g} out of range 0..{}", l.groups())))
                }
                Some(g) => vec![*g],
                None => (0..l.groups())
                    .filter(|&i| {
                        let missing = l.group(i).filter(|&j| w[j].is_none()).count();
                        missing > 0 && missing < l.local_distance(i)
                    })
                    .collect(),
            };
            let mut repaired = Vec::new();
            for g in groups {
                for (j, v) in l.repair_group(&w, g)? {
                    repaired.push(json!([j, v]));
                    w[j] = Some(v);
                }
            }
            let remaining: Vec<usize> = (0..w.len()).filter(|&j| w[j].is_none()).collect();
            let filled: Vec<u32> = w.iter().map(|v| v.unwrap_or(0)).collect();
            Ok(Output::doc(json!({
                "repaired": repaired,
                "remaining_erasures": remaining,
                "word": word_text(l.global().ctx(), &filled),
            })))
        }
        LrcCommand::Decode { code, word, erased } => {
            let l = load_lrc(code)?;
            let w = load_erased_word(&l, word, erased)?;
            let c = l.repair_then_decode(&w)?;
            Ok(Output::doc(json!({
                "codeword": word_text(l.global().ctx(), &c),
                "message": l.global().message_of(&c)?,
            })))
        }
        LrcCommand::Table { q, pairs } => {
            let pairs = pairs.clone().unwrap_or_else(|| {
                REFERENCE_TABLE_Q2
                    .iter()
                    .map(|p| (p.locality as usize, p.global_parities as usize))
                    .collect()
            });
            let rows = lrc_parameter_table(*q, &pairs)?;
            let header = TABLE_CSV_HEADER.split(',').map(String::from).collect();
            let cells = rows
                .iter()
                .map(|p| {
                    [p.locality, p.local_groups, p.global_parities, p.dimension, p.length]
                        .iter()
                        .map(u64::to_string)
                        .collect()
                })
                .collect();
            Ok(Output {
                doc: json!({ "q": q, "rows": rows }),
                table: Some((header, cells)),
                default_format: Format::Csv,
            })
        }
    }
}

fn cmd_verify(q: u32, n: usize, r: usize, b: Option<u64>) -> CliResult<Output> {
    let rep = verify_parameters(q, n, r, budget(b)?)?;
    let header = ["check", "passed", "detail"].map(String::from).to_vec();
    let rows = rep
        .checks
        .iter()
        .map(|c| {
            let status = match c.passed {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "skip",
            };
            vec![c.name.clone(), status.to_string(), format!("\"{}\"", c.detail.replace('"', "'"))]
        })
        .collect();
    let mut doc = serde_json::to_value(&rep).expect("plain data serializes");
    doc["passed"] = json!(rep.passed());
    let out = Output {
        doc,
        table: Some((header, rows)),
        default_format: Format::Json,
    };
    if rep.passed() {
        Ok(out)
    } else {
        Err(Failure::ChecksFailed(out))
    }
}

fn cmd_paper_tables(q: u32) -> CliResult<Output> {
    if q != 2 {
        return Err(Failure::Usage("reference parameters are only listed for q = 2".into()));
    }
    let cmp = compare_reference_table()?;
    let mut header: Vec<String> = TABLE_CSV_HEADER.split(',').map(String::from).collect();
    header.extend(["listed_local_groups", "listed_length", "status"].map(String::from));
    let rows = cmp
        .iter()
        .map(|c| {
            let p = c.computed;
            let mut row: Vec<String> = [p.locality, p.local_groups, p.global_parities, p.dimension, p.length]
                .iter()
                .map(u64::to_string)
                .collect();
            row.push(c.reference.local_groups.to_string());
            row.push(c.reference.length.to_string());
            row.push(if c.matches() { "match" } else { "flagged" }.to_string());
            row
        })
        .collect();
    let matching = cmp.iter().filter(|c| c.matches()).count();
    Ok(Output {
        doc: json!({ "q": q, "rows": cmp, "matching_rows": matching }),
        table: Some((header, rows)),
        default_format: Format::Csv,
    })
}

fn dispatch(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Spread(a) => cmd_spread(a),
        Command::Hamming(a) => cmd_hamming(a),
        Command::Simplex(a) => cmd_simplex(a),
        Command::Decode { code, received } => cmd_decode(code, received),
        Command::Simulate { code, trials, t, rho } => cmd_simulate(code, *trials, *t, *rho, cli.seed),
        Command::Lrc { action } => cmd_lrc(action),
        Command::Verify { q, n, r, budget } => cmd_verify(*q, *n, *r, *budget),
        Command::PaperTables { q } => cmd_paper_tables(*q),
    }
}

fn emit(cli: &Cli, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(err, "{}", json!({"error": "usage", "message": first}));
            return 1;
        }
    };
    let result = dispatch(&cli).and_then(|o| {
        let text = o.render(cli.format)?;
        emit(&cli, &text, out)
    });
    match result {
        Ok(()) => 0,
        Err(f) => {
            if let Failure::ChecksFailed(o) = &f {
                if let Ok(text) = o.render(cli.format) {
                    let _ = emit(&cli, &text, out);
                }
            }
            let _ = writeln!(err, "{}", f.to_json());
            f.status()
        }
    }
}
