//! The `homenum` command line.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cqe::{cqe_enumerate, CqeInstance};
use crate::delay::DelayMeter;
use crate::endoseq::{enumerate_wpd, EndoSequence};
use crate::error::{Error, Result};
use crate::extension::{first_extension, first_extension_with, homomorphism_ext, homomorphism_ext_with, ExtensionQuery};
use crate::kcore::{k_core, sequence_from_retractions, Retraction};
use crate::oracle::{brute_homs, brute_projections};
use crate::structures::{format_homomorphism, generate_family, parse_structure, serialize_structure, Family, PartialAssignment, Structure};
use crate::treewidth::{decompose, treewidth, TreeDecomposition};

#[derive(Debug, Parser)]
#[command(name = "homenum", version, about = "Enumerate homomorphisms between finite relational structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Is there a homomorphism from A to B? Prints yes or no.
    Decide(Solve),
    /// Prints the least homomorphism from A to B, or no.
    Solve(Solve),
    /// Streams every homomorphism from A to B, one per line.
    Enum {
        source: PathBuf,
        target: PathBuf,
        #[command(flatten)]
        mode: Mode,
        /// Stop after this many homomorphisms.
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Streams the distinct restrictions of homomorphisms to the projected elements.
    Cqe {
        source: PathBuf,
        target: PathBuf,
        /// Comma-separated source elements, in output order.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        project: Vec<String>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Prints the k-core (as comments) and its retraction chain as a sequence file.
    Kcore {
        source: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Prints a generated structure.
    Gen { family: Family, n: usize },
    /// Brute-force homomorphisms (or projections); exponential.
    Oracle {
        source: PathBuf,
        target: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        project: Option<Vec<String>>,
    },
    /// Measures delay of `enum` and prints a JSON report.
    Bench {
        /// Source structure file; alternatively --family and --n.
        source: Option<PathBuf>,
        #[arg(long, requires = "n", conflicts_with = "source")]
        family: Option<Family>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        limit: u64,
    },
}

#[derive(Debug, Args)]
struct Solve {
    source: PathBuf,
    target: PathBuf,
    /// Width bound; defaults to the exact tree width of A.
    #[arg(long, conflicts_with = "td")]
    k: Option<usize>,
    /// Tree decomposition file for A (`bag <node> <parent|-> <elem>...`).
    #[arg(long)]
    td: Option<PathBuf>,
}

/// How the enumerator gets its endomorphism sequence (default `--kcore 1`).
#[derive(Debug, Args)]
struct Mode {
    /// Sequence file with `level` and `map` lines.
    #[arg(long, conflicts_with_all = ["kcore", "tw"])]
    endoseq: Option<PathBuf>,
    /// Width for --endoseq; overrides the file's `width` line.
    #[arg(long, requires = "endoseq")]
    k: Option<usize>,
    /// Build the sequence from greedy k-retractions.
    #[arg(long, conflicts_with = "tw")]
    kcore: Option<usize>,
    /// Single-level sequence; A itself must have tree width at most k.
    #[arg(long)]
    tw: Option<usize>,
}

/// An error plus the file it came from, if any.
#[derive(Debug)]
struct Failure {
    error: Error,
    file: Option<PathBuf>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, file: None }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let class = match self.error {
            Error::Syntax { .. }
            | Error::ArityMismatch { .. }
            | Error::UnknownElement { .. }
            | Error::UnknownSymbol { .. }
            | Error::Duplicate { .. } => "parse error",
            Error::WidthExceeded { .. } | Error::DecompositionTooLarge { .. } => "width exceeded",
            Error::InvalidSequence { .. } => "invalid sequence",
            Error::SizeGuard(_) => "size guard",
            Error::Io(_) => "io error",
            _ => "error",
        };
        match &self.file {
            Some(path) => write!(f, "{class}: {}: {}", path.display(), self.error),
            None => write!(f, "{class}: {}", self.error),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self.error {
            Error::Syntax { .. }
            | Error::ArityMismatch { .. }
            | Error::UnknownElement { .. }
            | Error::UnknownSymbol { .. }
            | Error::Duplicate { .. } => 3,
            Error::WidthExceeded { .. } | Error::DecompositionTooLarge { .. } => 4,
            Error::InvalidSequence { .. } => 5,
            Error::SizeGuard(_) => 6,
            _ => 1,
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        error: Error::Io(e.to_string()),
        file: Some(path.to_path_buf()),
    })
}

fn in_file<T>(path: &Path, r: Result<T>) -> Outcome<T> {
    r.map_err(|error| Failure {
        error,
        file: Some(path.to_path_buf()),
    })
}

fn load(path: &Path) -> Outcome<Structure> {
    in_file(path, parse_structure(&read(path)?))
}

fn sequence(a: &Structure, mode: &Mode) -> Outcome<EndoSequence> {
    if let Some(path) = &mode.endoseq {
        let mut seq = in_file(path, EndoSequence::parse(&read(path)?, a))?;
        if let Some(k) = mode.k {
            seq.set_width(k);
        }
        in_file(path, seq.validate(a))?;
        return Ok(seq);
    }
    if let Some(k) = mode.tw {
        if decompose(a, k)?.is_none() {
            return Err(Error::WidthExceeded { k }.into());
        }
        return Ok(EndoSequence::trivial(a.len(), k));
    }
    let k = mode.kcore.unwrap_or(1);
    let (_, steps) = k_core(a, k);
    Ok(retraction_sequence(a, &steps, k)?)
}

fn retraction_sequence(a: &Structure, steps: &[Retraction], k: usize) -> Result<EndoSequence> {
    sequence_from_retractions(a, steps, k).map_err(|e| match e {
        Error::InvalidSequence { condition: "final width", .. } => Error::WidthExceeded { k },
        other => other,
    })
}

fn projection(a: &Structure, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            a.element_index(n)
                .ok_or_else(|| Error::InvalidProjection(format!("unknown element `{n}`")))
        })
        .collect()
}

fn format_projection(a: &Structure, b: &Structure, ys: &[usize], values: &[usize]) -> String {
    ys.iter()
        .zip(values)
        .map(|(&y, &v)| format!("{}:{}", a.element_name(y), b.element_name(v)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes one line and flushes, so timestamps taken outside see it at once.
fn emit(out: &mut dyn Write, line: &str) -> Result<()> {
    write_line(out, line).map_err(|e| Error::Io(e.to_string()))
}

fn write_line(out: &mut dyn Write, line: &str) -> std::io::Result<()> {
    writeln!(out, "{line}")?;
    out.flush()
}

/// Streams lines, stopping at `limit` or on a write error. A closed reader
/// (`enum ... | head`) ends the stream quietly.
struct Stream<'o> {
    out: &'o mut dyn Write,
    limit: Option<u64>,
    count: u64,
    closed: bool,
    failed: Option<Error>,
}

impl<'o> Stream<'o> {
    fn new(out: &'o mut dyn Write, limit: Option<u64>) -> Self {
        Stream {
            out,
            limit,
            count: 0,
            closed: false,
            failed: None,
        }
    }

    fn push(&mut self, line: &str) -> ControlFlow<()> {
        if self.limit.is_some_and(|l| self.count >= l) {
            return ControlFlow::Break(());
        }
        if let Err(e) = write_line(self.out, line) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                self.closed = true;
            } else {
                self.failed = Some(Error::Io(e.to_string()));
            }
            return ControlFlow::Break(());
        }
        self.count += 1;
        if self.limit.is_some_and(|l| self.count >= l) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }

    fn finish(self) -> Outcome {
        if let Some(e) = self.failed {
            return Err(e.into());
        }
        if self.count == 0 && !self.closed && self.limit != Some(0) {
            emit(self.out, "no")?;
        }
        Ok(())
    }
}

fn solve(args: &Solve, first: bool, out: &mut dyn Write) -> Outcome {
    let a = load(&args.source)?;
    let b = load(&args.target)?;
    let q = ExtensionQuery::whole(&a, &b, PartialAssignment::empty(a.len()))?;
    let td = match &args.td {
        Some(path) => Some(in_file(path, TreeDecomposition::parse(&read(path)?, &a))?),
        None => None,
    };
    let k = match args.k {
        Some(k) => k,
        None if td.is_some() => 0,
        None => treewidth(&a)?.0,
    };
    if first {
        let witness = match &td {
            Some(td) => first_extension_with(&q, td)?,
            None => first_extension(&q, k)?,
        };
        let line = match witness.and_then(|w| w.to_homomorphism()) {
            Some(h) => format_homomorphism(&h, &a, &b),
            None => "no".to_string(),
        };
        Ok(emit(out, &line)?)
    } else {
        let yes = match &td {
            Some(td) => homomorphism_ext_with(&q, td)?,
            None => homomorphism_ext(&q, k)?,
        };
        Ok(emit(out, if yes { "yes" } else { "no" })?)
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Decide(args) => solve(&args, false, out),
        Command::Solve(args) => solve(&args, true, out),
        Command::Enum {
            source,
            target,
            mode,
            limit,
        } => {
            let a = load(&source)?;
            let b = load(&target)?;
            let seq = sequence(&a, &mode)?;
            let mut stream = Stream::new(out, limit);
            enumerate_wpd(&a, &b, &seq, |e| stream.push(&format_homomorphism(e.homomorphism, &a, &b)))?;
            stream.finish()
        }
        Command::Cqe {
            source,
            target,
            project,
            k,
            limit,
        } => {
            let a = load(&source)?;
            let b = load(&target)?;
            let ys = projection(&a, &project)?;
            let inst = CqeInstance::new(&a, &b, ys.clone())?;
            let mut stream = Stream::new(out, limit);
            cqe_enumerate(&inst, k, |v| stream.push(&format_projection(&a, &b, &ys, v)))?;
            stream.finish()
        }
        Command::Kcore { source, k } => {
            let a = load(&source)?;
            let (core, steps) = k_core(&a, k);
            let mut text = String::new();
            for line in serialize_structure(&core).lines() {
                text.push_str("# ");
                text.push_str(line);
                text.push('\n');
            }
            let seq = retraction_sequence(&a, &steps, k)?;
            text.push_str(&seq.serialize(&a));
            write!(out, "{text}").map_err(|e| Error::Io(e.to_string()))?;
            Ok(())
        }
        Command::Gen { family, n } => {
            let s = generate_family(family, n)?;
            write!(out, "{}", serialize_structure(&s)).map_err(|e| Error::Io(e.to_string()))?;
            Ok(())
        }
        Command::Oracle {
            source,
            target,
            project,
        } => {
            let a = load(&source)?;
            let b = load(&target)?;
            let mut stream = Stream::new(out, None);
            match project {
                Some(names) => {
                    let ys = projection(&a, &names)?;
                    CqeInstance::new(&a, &b, ys.clone())?;
                    for v in brute_projections(&a, &b, &ys)? {
                        let _ = stream.push(&format_projection(&a, &b, &ys, &v));
                    }
                }
                None => {
                    for h in brute_homs(&a, &b)? {
                        let _ = stream.push(&format_homomorphism(&h, &a, &b));
                    }
                }
            }
            stream.finish()
        }
        Command::Bench {
            source,
            family,
            n,
            target,
            mode,
            limit,
        } => {
            let a = match (source, family, n) {
                (Some(path), _, _) => load(&path)?,
                (None, Some(f), Some(n)) => generate_family(f, n)?,
                _ => return Err(Error::Domain("give a source file or --family with --n".into()).into()),
            };
            let b = load(&target)?;
            let mut meter = DelayMeter::start();
            let seq = sequence(&a, &mode)?;
            let limit = limit.max(1);
            enumerate_wpd(&a, &b, &seq, |_| {
                meter.tick();
                if meter.count() >= limit {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })?;
            let report = meter.finish();
            let json = serde_json::to_string(&report).map_err(|e| Error::Io(e.to_string()))?;
            Ok(emit(out, &json)?)
        }
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and a one-line diagnostic to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "{f}");
            f.exit_code()
        }
    }
}
