//! `finetti`: partitions, moment/cumulant transforms, independence and
//! invariance checks, and algebraic certificates, with JSON reports.
//!
//! Exit status: 0 pass, 1 definite failure, 2 inconclusive, 3 input error.

mod job;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use finetti_core::algebra::{
    schema_for_family, verify_coproduct, verify_membership, verify_quotient, verify_vanishing, FormalSum,
    IdealCache, RelationSchema, SchemaName, VerificationReport,
};
use finetti_core::cumulants::{cumulants_from_moments, moments_from_cumulants, CumulantKind, CumulantTable, MomentFunctional, TableFile};
use finetti_core::independence::{classify_marginals, test_mixed_vanishing};
use finetti_core::partitions::{enumerate_partitions, words_of_length, FamilyTag, IndexWord, SetPartition};
use finetti_core::rational::{parse_rational, to_f64, zero};
use finetti_core::symmetry::{check_stationary, extend_and_check, quantum_invariance_certificate, GroupFamily, McConfig};
use finetti_core::{Error, Rational};
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "finetti", version, about = "Exact checks for distributional symmetries and their algebraic certificates")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long = "out", global = true)]
    out: Option<PathBuf>,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the partitions of a family.
    Partitions {
        #[arg(long)]
        k: usize,
        /// Family tag such as `p`, `nc_2`, `i_h`.
        #[arg(long, default_value = "p")]
        family: FamilyTag,
    },
    /// Convert between moment and cumulant tables.
    Transform {
        #[arg(long)]
        kind: CumulantKind,
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Test that all mixed cumulants of a moment table vanish.
    Independence {
        #[arg(long)]
        kind: CumulantKind,
        #[arg(long = "in")]
        input: PathBuf,
        /// Exact tolerance `p/q`.
        #[arg(long, default_value = "0")]
        tol: String,
    },
    /// Invariance of a moment table under a classical group.
    Symmetry(SymmetryArgs),
    /// Certify identities by bounded-degree ideal membership.
    Verify(VerifyArgs),
    /// Run a JSON job file whose keys are this tool's flags plus `command`.
    Run {
        config: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Direction {
    M2c,
    C2m,
}

#[derive(Args, Debug)]
struct SymmetryArgs {
    #[arg(long)]
    group: GroupFamily,
    #[arg(long)]
    n: usize,
    #[arg(long = "K")]
    max_order: usize,
    #[arg(long = "in")]
    input: PathBuf,
    /// Trailing letters left fixed.
    #[arg(long, default_value_t = 0, conflicts_with = "stationary")]
    extension: usize,
    /// Check every extension the table supports.
    #[arg(long)]
    stationary: bool,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo tolerance as `p/q`.
    #[arg(long, default_value = "0")]
    tol: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Lemma {
    Vanishing,
    Coproduct,
    Membership,
    Quotient,
    Invariance,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    schema: SchemaName,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    lemma: Lemma,
    /// Largest truncation degree searched.
    #[arg(long, visible_alias = "D", default_value_t = 4)]
    degree: usize,
    /// Partition such as `"1 2|3 4"`.
    #[arg(long)]
    pi: Option<String>,
    /// Colouring word such as `"1 1 2 2"`.
    #[arg(long)]
    j: Option<String>,
    /// Partition size when `--pi` is omitted.
    #[arg(long)]
    k: Option<usize>,
    /// Partition family; defaults to the one matching the schema.
    #[arg(long)]
    family: Option<FamilyTag>,
    /// Formal sum for `membership`.
    #[arg(long)]
    target: Option<String>,
    /// Schema whose relations must hold, for `quotient`.
    #[arg(long)]
    cover: Option<SchemaName>,
    /// Moment table for `invariance`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long = "K")]
    max_order: Option<usize>,
}

/// A report and the exit status it implies.
struct Outcome {
    report: Value,
    code: u8,
}

impl Outcome {
    fn new(report: impl Serialize, code: u8) -> Result<Self, String> {
        Ok(Outcome { report: serde_json::to_value(report).map_err(|e| e.to_string())?, code })
    }
}

fn input_error(e: impl ToString) -> String {
    e.to_string()
}

fn read_table(path: &Path) -> Result<TableFile, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_moments(path: &Path) -> Result<MomentFunctional, String> {
    MomentFunctional::from_file(&read_table(path)?).map_err(input_error)
}

fn parse_word(s: &str) -> Result<IndexWord, String> {
    let letters = s
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| format!("bad letter {t:?} in word {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    IndexWord::new(letters).map_err(input_error)
}

fn parse_tol(s: &str) -> Result<Rational, String> {
    let tol = parse_rational(s).map_err(input_error)?;
    if tol < zero() {
        return Err(format!("tolerance {s} is negative"));
    }
    Ok(tol)
}

fn partitions(k: usize, family: FamilyTag) -> Result<Outcome, String> {
    let list = enumerate_partitions(k, family);
    Outcome::new(json!({ "k": k, "family": family, "count": list.len(), "partitions": list }), 0)
}

fn transform(kind: CumulantKind, direction: Direction, input: &Path) -> Result<Outcome, String> {
    let file = read_table(input)?;
    let out = match direction {
        Direction::M2c => {
            let mom = MomentFunctional::from_file(&file).map_err(input_error)?;
            cumulants_from_moments(&mom, kind).to_file()
        }
        Direction::C2m => {
            let cum = CumulantTable::from_file(&file).map_err(input_error)?;
            if cum.kind() != kind {
                return Err(format!("table holds {} cumulants, --kind says {kind}", cum.kind()));
            }
            moments_from_cumulants(&cum).to_file()
        }
    };
    Outcome::new(out.map_err(input_error)?, 0)
}

fn independence(kind: CumulantKind, input: &Path, tol: &str) -> Result<Outcome, String> {
    let mom = read_moments(input)?;
    let tol = parse_tol(tol)?;
    let report = test_mixed_vanishing(&mom, kind, &tol);
    let marginals: Vec<String> = classify_marginals(&cumulants_from_moments(&mom, kind), &tol)
        .iter()
        .map(|c| c.to_string())
        .collect();
    let code = if report.passed() { 0 } else { 1 };
    let mut value = serde_json::to_value(&report).map_err(input_error)?;
    value["marginals"] = json!(marginals);
    Ok(Outcome { report: value, code })
}

fn symmetry(args: &SymmetryArgs) -> Result<Outcome, String> {
    let mom = read_moments(&args.input)?;
    let tol = to_f64(&parse_tol(&args.tol)?);
    if args.samples.is_some_and(|s| s > 0) && args.seed.is_none() {
        return Err("--seed is required whenever --samples is given".into());
    }
    let mc = match (args.samples, args.seed) {
        (Some(samples), Some(seed)) => Some(McConfig { samples, seed, tol }),
        _ => None,
    };
    if !args.group.is_exact() && mc.is_none() {
        return Err(format!("group {} is sampled: give --samples and --seed", args.group));
    }
    if args.stationary {
        let reports = check_stationary(&mom, args.group, args.n, args.max_order, mc.as_ref()).map_err(input_error)?;
        let passed = reports.iter().all(|r| r.passed);
        return Outcome::new(json!({ "passed": passed, "reports": reports }), if passed { 0 } else { 1 });
    }
    let report = extend_and_check(&mom, args.group, args.n, args.extension, args.max_order, mc.as_ref())
        .map_err(input_error)?;
    let code = if report.passed { 0 } else { 1 };
    Outcome::new(report, code)
}

/// Family whose vanishing identities the P-schema is meant to kill.
fn family_for_schema(schema: SchemaName) -> Option<FamilyTag> {
    FamilyTag::all_families().find(|&f| schema_for_family(f) == Some(schema))
}

fn vanishing_instances(args: &VerifyArgs, family: FamilyTag) -> Result<Vec<(SetPartition, IndexWord)>, String> {
    let partitions = match (&args.pi, args.k) {
        (Some(pi), _) => vec![pi.parse::<SetPartition>().map_err(input_error)?],
        (None, Some(k)) => enumerate_partitions(k, family),
        (None, None) => return Err("vanishing needs --pi or --k".into()),
    };
    let mut out = Vec::new();
    for pi in partitions {
        let words = match &args.j {
            Some(j) => vec![parse_word(j)?],
            None => words_of_length(args.n, pi.ground_size()).collect(),
        };
        for j in words {
            if j.len() != pi.ground_size() || !j.within(args.n) {
                return Err(format!("word {j} does not colour {pi} with letters 1..={}", args.n));
            }
            out.push((pi.clone(), j));
        }
    }
    Ok(out)
}

fn verify(args: &VerifyArgs) -> Result<Outcome, String> {
    if args.n == 0 {
        return Err("--n must be positive".into());
    }
    let schema = RelationSchema::new(args.schema, args.n);
    let cache = IdealCache::new();
    let report: VerificationReport = match args.lemma {
        Lemma::Coproduct => verify_coproduct(schema, args.degree, &cache),
        Lemma::Membership => {
            let text = args.target.as_deref().ok_or("membership needs --target")?;
            let target: FormalSum = text.parse().map_err(input_error)?;
            verify_membership(schema, &target, args.degree, &cache)
        }
        Lemma::Quotient => {
            let cover = args.cover.ok_or("quotient needs --cover")?;
            verify_quotient(args.schema, cover, args.n, args.degree, &cache)
        }
        Lemma::Vanishing => {
            let family = match args.family.or_else(|| family_for_schema(args.schema)) {
                Some(f) => f,
                None => return Err(format!("no partition family for schema {}; pass --family", args.schema)),
            };
            let instances = vanishing_instances(args, family)?;
            verify_vanishing(schema, family, &instances, args.degree, &cache)
        }
        Lemma::Invariance => {
            let input = args.input.as_deref().ok_or("invariance needs --in")?;
            let max_order = args.max_order.ok_or("invariance needs --K")?;
            quantum_invariance_certificate(&read_moments(input)?, schema, max_order, args.degree, &cache)
        }
    }
    .map_err(|e: Error| e.to_string())?;
    let code = report.status().exit_code() as u8;
    Outcome::new(report, code)
}

fn execute(command: &Command) -> Result<Outcome, String> {
    match command {
        Command::Partitions { k, family } => partitions(*k, *family),
        Command::Transform { kind, direction, input } => transform(*kind, *direction, input),
        Command::Independence { kind, input, tol } => independence(*kind, input, tol),
        Command::Symmetry(args) => symmetry(args),
        Command::Verify(args) => verify(args),
        Command::Run { .. } => Err("job files cannot nest".into()),
    }
}

fn write_report(out: Option<&Path>, report: &Value) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(report).map_err(input_error)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(out: Option<&Path>, result: Result<Outcome, String>) -> ExitCode {
    let outcome = result.unwrap_or_else(|message| {
        eprintln!("error: {message}");
        Outcome { report: json!({ "error": message }), code: EXIT_INPUT }
    });
    match write_report(out, &outcome.report) {
        Ok(()) => ExitCode::from(outcome.code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

/// `--out` target found by scanning raw arguments that failed to parse.
fn raw_out(args: &[String]) -> Option<PathBuf> {
    args.iter().enumerate().find_map(|(i, a)| match a.strip_prefix("--out") {
        Some("") => args.get(i + 1).map(PathBuf::from),
        Some(rest) => rest.strip_prefix('=').map(PathBuf::from),
        None => None,
    })
}

fn parse(args: Vec<String>) -> Result<Cli, ExitCode> {
    Cli::try_parse_from(&args).map_err(|e| {
        if !e.use_stderr() {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        let message = e.kind().to_string();
        let _ = e.print();
        if let Some(out) = raw_out(&args) {
            let _ = write_report(Some(&out), &json!({ "error": message }));
        }
        ExitCode::from(EXIT_INPUT)
    })
}

fn main() -> ExitCode {
    let mut cli = match parse(std::env::args().collect()) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    if let Command::Run { config } = &cli.command {
        let outer_out = cli.out.clone();
        let argv = match job::argv_from_file(config) {
            Ok(argv) => argv,
            Err(message) => return finish(outer_out.as_deref(), Err(message)),
        };
        cli = match parse(argv) {
            Ok(inner) => Cli { out: inner.out.or(outer_out), threads: inner.threads.or(cli.threads), ..inner },
            Err(code) => return code,
        };
    }
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return finish(cli.out.as_deref(), Err("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().ok();
    }
    finish(cli.out.as_deref(), execute(&cli.command))
}
