//! Command-line front door: build fields, verify sets, scan for product
//! identity violations, trace the closure derivation, enumerate,
//! classify, construct, and print Latin squares.
//!
//! Output is machine-readable JSON (one document, or JSON lines for
//! streams) unless `--pretty` asks for a human rendering. Exit codes:
//! 0 for success or a positive verdict, 1 for a negative verification
//! (a set that is not regular, not a subgroup, or not Latin), 2 for
//! usage or data errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::Value;

use sharply::classify::{
    construct_cyclic_regular, construct_dihedral_regular, construct_exceptional, subgroup_type,
    ClassifyError, SubgroupTag,
};
use sharply::gf::{field_make, prime_power, Field, FieldRef};
use sharply::regular::RegularSet;
use sharply::search::{
    enumerate_regular_sets, is_latin, latin_square, render_latin, verify_theorem, SearchConfig,
};

#[derive(Parser)]
#[command(
    name = "sharply",
    version,
    about = "Sharply transitive subsets of PGL2 over finite fields"
)]
struct Cli {
    /// Human-readable rendering instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a set file for sharp transitivity (exit 1 when it fails).
    Verify {
        /// Field order; when given, must match the set file.
        #[arg(long)]
        q: Option<u64>,
        /// Field JSON file; when given, must match the set file.
        #[arg(long, conflicts_with = "q")]
        field_file: Option<PathBuf>,
        /// Set file, JSON as produced by construct/enumerate.
        #[arg(long)]
        set: PathBuf,
        /// Also decompose into a subgroup and a right translator.
        #[arg(long)]
        decompose: bool,
    },
    /// Scan a regular set for zero-pattern product identity violations.
    LemmaScan {
        #[arg(long)]
        set: PathBuf,
    },
    /// Trace the closure derivation showing g*h stays in the set.
    ClosureTrace {
        #[arg(long)]
        set: PathBuf,
        /// Index of g in the canonical member order.
        #[arg(long)]
        g: usize,
        /// Index of h in the canonical member order.
        #[arg(long)]
        h: usize,
    },
    /// Stream every sharply transitive set at q as JSON lines.
    Enumerate {
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, conflicts_with = "q")]
        field_file: Option<PathBuf>,
        /// Do not force the identity into emitted sets.
        #[arg(long)]
        no_identity: bool,
        /// Stop after this many sets.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Search only stabilizer-orbit representatives at the split
        /// depth (pure speedup; identical output).
        #[arg(long)]
        symmetry_reduction: bool,
    },
    /// Enumerate identity-sets and report their subgroup structure.
    VerifyTheorem {
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, conflicts_with = "q")]
        field_file: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Recognize the isomorphism type of a regular subgroup.
    Classify {
        #[arg(long)]
        set: PathBuf,
    },
    /// Build a regular subgroup of the requested type.
    Construct {
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, conflicts_with = "q")]
        field_file: Option<PathBuf>,
        /// cyclic, dihedral, a4, s4, or a5.
        #[arg(long = "type")]
        kind: String,
        /// Seed for the randomized exceptional search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the evaluation table of a set (exit 1 when not Latin).
    Latin {
        #[arg(long)]
        set: PathBuf,
    },
}

type CliError = Box<dyn std::error::Error>;

fn main() -> ExitCode {
    // Die silently on SIGPIPE like other line-oriented Unix tools, so
    // `sharply enumerate ... | head` does not panic mid-stream.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let pretty = cli.pretty;
    match cli.command {
        Command::Verify {
            q,
            field_file,
            set,
            decompose,
        } => cmd_verify(q, field_file, &set, decompose, pretty),
        Command::LemmaScan { set } => cmd_lemma_scan(&set, pretty),
        Command::ClosureTrace { set, g, h } => cmd_closure_trace(&set, g, h, pretty),
        Command::Enumerate {
            q,
            field_file,
            no_identity,
            limit,
            workers,
            symmetry_reduction,
        } => cmd_enumerate(
            q,
            field_file,
            no_identity,
            limit,
            workers,
            symmetry_reduction,
            pretty,
        ),
        Command::VerifyTheorem {
            q,
            field_file,
            workers,
        } => cmd_verify_theorem(q, field_file, workers, pretty),
        Command::Classify { set } => cmd_classify(&set, pretty),
        Command::Construct {
            q,
            field_file,
            kind,
            seed,
        } => cmd_construct(q, field_file, &kind, seed, pretty),
        Command::Latin { set } => cmd_latin(&set, pretty),
    }
}

fn field_from_flags(q: Option<u64>, field_file: Option<PathBuf>) -> Result<FieldRef, CliError> {
    match (q, field_file) {
        (Some(q), None) => {
            let (p, m) = prime_power(q).ok_or_else(|| format!("q = {q} is not a prime power"))?;
            Ok(field_make(p, m, None)?)
        }
        (None, Some(path)) => {
            let v: Value = serde_json::from_str(&fs::read_to_string(&path)?)?;
            Ok(Arc::new(Field::from_json(&v)?))
        }
        _ => Err("exactly one of --q or --field-file is required".into()),
    }
}

fn load_set(path: &Path) -> Result<RegularSet, CliError> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok(RegularSet::from_json(&v)?)
}

fn emit(value: &Value) {
    println!("{value}");
}

fn render_members(s: &RegularSet) -> String {
    let f = s.field();
    s.members()
        .iter()
        .map(|g| g.render(f))
        .collect::<Vec<_>>()
        .join("  ")
}

fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_verify(
    q: Option<u64>,
    field_file: Option<PathBuf>,
    set_path: &Path,
    decompose: bool,
    pretty: bool,
) -> Result<ExitCode, CliError> {
    let mut set = load_set(set_path)?;
    if q.is_some() || field_file.is_some() {
        let expected = field_from_flags(q, field_file)?;
        if expected.spec() != set.field().spec() {
            return Err(format!(
                "set file is over GF({}), flags selected GF({})",
                set.field().q(),
                expected.q()
            )
            .into());
        }
    }
    let regular = set.verify();
    let mut out = serde_json::json!({
        "q": set.field().q(),
        "size": set.len(),
        "regular": regular,
    });
    if decompose && regular {
        let (h, s) = set.coset_decompose()?;
        out["decomposition"] = serde_json::json!({
            "subgroup": h.to_json()?,
            "translator": s.to_json(set.field())?,
        });
        if pretty {
            println!(
                "regular: true (q = {}, {} members)",
                set.field().q(),
                set.len()
            );
            println!("subgroup:   {}", render_members(&h));
            println!("translator: {}", s.render(set.field()));
            return Ok(verdict(true));
        }
    }
    if pretty {
        println!(
            "regular: {regular} (q = {}, {} members)",
            set.field().q(),
            set.len()
        );
    } else {
        emit(&out);
    }
    Ok(verdict(regular))
}

fn cmd_lemma_scan(set_path: &Path, pretty: bool) -> Result<ExitCode, CliError> {
    let mut set = load_set(set_path)?;
    if !set.verify() {
        not_regular(pretty, set.field().q());
        return Ok(verdict(false));
    }
    let report = set.segre_scan()?;
    if pretty {
        println!(
            "zero-pattern quadruples checked: {}, violations: {}",
            report.checked,
            report.violations.len()
        );
    } else {
        emit(&report.to_json(set.field())?);
    }
    Ok(verdict(report.passed()))
}

fn cmd_closure_trace(
    set_path: &Path,
    g_idx: usize,
    h_idx: usize,
    pretty: bool,
) -> Result<ExitCode, CliError> {
    let mut set = load_set(set_path)?;
    if !set.verify() {
        not_regular(pretty, set.field().q());
        return Ok(verdict(false));
    }
    let pick = |i: usize| -> Result<sharply::GroupElem, CliError> {
        set.member(i)
            .copied()
            .ok_or_else(|| format!("index {i} out of range for {} members", set.len()).into())
    };
    let g = pick(g_idx)?;
    let h = pick(h_idx)?;
    let trace = set.closure_witness(&g, &h)?;
    let f = set.field();
    if pretty {
        println!("g: {}", trace.g.render(f));
        println!("h: {}", trace.h.render(f));
        println!(
            "k: {} (distinct candidates over points: {})",
            trace.k.render(f),
            trace.distinct_k
        );
        println!(
            "fixed pair: {} {}",
            trace.fixed_pair.0.render(f),
            trace.fixed_pair.1.render(f)
        );
        println!("frame: {}", trace.frame.render(f));
        println!("shear u: {}", trace.u.render(f));
        let ws: Vec<String> = trace.witnesses.iter().map(|w| w.render(f)).collect();
        println!("zero-pattern witnesses: {}", ws.join("  "));
        println!("product identity holds: {}", trace.segre_holds);
        println!(
            "residual h*k^-1*g is identity: {}",
            trace.residual_is_identity()
        );
    } else {
        emit(&trace.to_json(f)?);
    }
    Ok(verdict(trace.residual_is_identity()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_enumerate(
    q: Option<u64>,
    field_file: Option<PathBuf>,
    no_identity: bool,
    limit: Option<usize>,
    workers: usize,
    symmetry_reduction: bool,
    pretty: bool,
) -> Result<ExitCode, CliError> {
    let field = field_from_flags(q, field_file)?;
    if field.q() >= 11 {
        eprintln!(
            "warning: exhaustive enumeration at q = {} can take minutes",
            field.q()
        );
    }
    let config = SearchConfig::new(field)
        .with_require_identity(!no_identity)
        .with_limit(limit)
        .with_workers(workers)
        .with_symmetry_reduction(symmetry_reduction);
    for s in enumerate_regular_sets(&config)? {
        if pretty {
            println!("{}", render_members(&s));
        } else {
            emit(&s.to_json()?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_theorem(
    q: Option<u64>,
    field_file: Option<PathBuf>,
    workers: usize,
    pretty: bool,
) -> Result<ExitCode, CliError> {
    let field = field_from_flags(q, field_file)?;
    if field.q() >= 11 {
        eprintln!(
            "warning: exhaustive enumeration at q = {} can take minutes",
            field.q()
        );
    }
    let report = verify_theorem(&SearchConfig::new(field).with_workers(workers))?;
    if pretty {
        println!("q: {}", report.q);
        println!("identity sets: {}", report.total_regular_sets_with_identity);
        println!("all subgroups: {}", report.all_are_subgroups);
        for (ty, count) in &report.type_census {
            let classes = report.conjugacy_class_count.get(ty).copied().unwrap_or(0);
            println!("  {ty}: {count} subgroups in {classes} conjugacy class(es)");
        }
    } else {
        emit(&report.to_json()?);
    }
    Ok(verdict(report.all_are_subgroups))
}

fn cmd_classify(set_path: &Path, pretty: bool) -> Result<ExitCode, CliError> {
    let mut set = load_set(set_path)?;
    if !set.verify() {
        not_regular(pretty, set.field().q());
        return Ok(verdict(false));
    }
    match subgroup_type(&set) {
        Ok(ty) => {
            if pretty {
                println!("{ty}");
            } else {
                emit(&ty.to_json());
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(ClassifyError::NotASubgroup) => {
            if pretty {
                println!("regular but not a subgroup (a coset; use verify --decompose)");
            } else {
                emit(&serde_json::json!({ "regular": true, "subgroup": false }));
            }
            Ok(verdict(false))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_construct(
    q: Option<u64>,
    field_file: Option<PathBuf>,
    kind: &str,
    seed: u64,
    pretty: bool,
) -> Result<ExitCode, CliError> {
    let field = field_from_flags(q, field_file)?;
    let tag: SubgroupTag = kind.parse()?;
    let set = match tag {
        SubgroupTag::Cyclic => construct_cyclic_regular(&field)?,
        SubgroupTag::Dihedral => construct_dihedral_regular(&field)?,
        SubgroupTag::A4 | SubgroupTag::S4 | SubgroupTag::A5 => {
            construct_exceptional(&field, tag, seed)?
        }
        SubgroupTag::NotOnList => return Err(format!("cannot construct type {kind:?}").into()),
    };
    if pretty {
        println!("{}", render_members(&set));
    } else {
        emit(&set.to_json()?);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_latin(set_path: &Path, pretty: bool) -> Result<ExitCode, CliError> {
    let set = load_set(set_path)?;
    let square = latin_square(&set)?;
    let latin = is_latin(&square);
    if pretty {
        println!("{}", render_latin(&square));
        println!("latin: {latin}");
    } else {
        emit(&serde_json::json!({ "square": square, "latin": latin }));
    }
    Ok(verdict(latin))
}

fn not_regular(pretty: bool, q: u64) {
    if pretty {
        println!("regular: false (q = {q})");
    } else {
        emit(&serde_json::json!({ "q": q, "regular": false }));
    }
}
