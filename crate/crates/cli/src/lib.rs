//! Command-line front end: `solve`, `gvalue` and `conjecture`.
//!
//! Exit status is 0 when something was found (or, for `conjecture`, every
//! `d` got a witness), 1 when nothing was found, and 2 on invalid input.

mod spec;

use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use ufrac::apps::{compute_g_with, verify_conjecture_range, ConjectureConfig, ConjectureOutcome};
use ufrac::{
    ufrac_early_stopping_with, ufrac_with, DenomMultiset, Rational, SearchOptions, SearchStats,
};

pub use spec::{format_denom_spec, parse_denom_spec, SpecError, MAX_SPEC_ELEMENTS};

pub const EXIT_FOUND: i32 = 0;
pub const EXIT_NONE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "ufrac",
    version,
    about = "Write a rational number as a sum of unit fractions with prescribed denominators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Find submultisets of the denominators whose reciprocals sum to the target.
    Solve(SolveArgs),
    /// Smallest n such that {1..n} holds a representation of the target.
    Gvalue(GvalueArgs),
    /// Witnesses of 1 with a given second-largest denominator.
    Conjecture(ConjectureArgs),
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Report search progress on stderr.
    #[arg(long)]
    pub progress: bool,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Denominator specification, e.g. `2,3,4,12`, `1..10` or `squares(1..35)`.
    #[arg(value_name = "SPEC", conflicts_with = "denoms")]
    pub spec: Option<String>,
    /// Target as `p/q` or an integer.
    #[arg(value_name = "TARGET", conflicts_with = "target")]
    pub target_pos: Option<String>,
    #[arg(long, value_name = "SPEC")]
    pub denoms: Option<String>,
    #[arg(long, value_name = "P/Q")]
    pub target: Option<String>,
    /// Stop at the first representation.
    #[arg(long)]
    pub first: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct GvalueArgs {
    #[arg(value_name = "TARGET", conflicts_with = "target")]
    pub target_pos: Option<String>,
    #[arg(long, value_name = "P/Q")]
    pub target: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub n_start: u64,
    #[arg(long, default_value_t = 100_000)]
    pub n_max: u64,
    /// Report one witness instead of all of them.
    #[arg(long)]
    pub first: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ConjectureArgs {
    pub d_lo: u64,
    pub d_hi: u64,
    #[arg(long, default_value_t = 1000)]
    pub c_max: u64,
    /// Comma-separated denominator bounds tried in order.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub bounds: Vec<u64>,
    /// How many of the best-ranked multipliers to try per d.
    #[arg(long, default_value_t = 10)]
    pub candidates: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Serialize)]
struct StatsJson {
    branches_expanded: u64,
    elapsed_ms: u128,
}

#[derive(Serialize)]
struct SolveJson {
    target: String,
    complete: bool,
    count: usize,
    representations: Vec<Vec<u64>>,
    stats: StatsJson,
}

#[derive(Serialize)]
struct GvalueJson {
    target: String,
    g: Option<u64>,
    complete: bool,
    count: usize,
    witnesses: Vec<Vec<u64>>,
    stats: StatsJson,
}

#[derive(Serialize)]
struct ConjectureJson {
    d: u64,
    c: Option<u64>,
    bound: Option<u64>,
    witness: Option<Vec<u64>>,
}

enum Failure {
    Invalid(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn parse_target(positional: Option<String>, flag: Option<String>) -> Result<Rational, Failure> {
    let text = positional
        .or(flag)
        .ok_or_else(|| Failure::Invalid("missing target".into()))?;
    let r: Rational = text
        .trim()
        .parse()
        .map_err(|e| Failure::Invalid(format!("invalid target `{text}`: {e}")))?;
    if r.is_negative() {
        return Err(Failure::Invalid(format!("target {r} is negative")));
    }
    Ok(r)
}

fn options<'a>(progress: bool, err: &'a mut dyn Write) -> SearchOptions<'a> {
    let opts = SearchOptions::default();
    if !progress {
        return opts;
    }
    opts.with_progress(100_000, move |s: &SearchStats| {
        let _ = writeln!(
            err,
            "branches expanded: {}, representations: {}",
            s.branches_expanded, s.representations
        );
    })
}

fn text_line(d: &DenomMultiset) -> String {
    d.to_string()
}

fn solve(args: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let spec = args
        .spec
        .or(args.denoms)
        .ok_or_else(|| Failure::Invalid("missing denominators".into()))?;
    let denoms = parse_denom_spec(&spec)
        .map_err(|e| Failure::Invalid(format!("invalid denominators: {e}")))?;
    let target = parse_target(args.target_pos, args.target)?;
    let start = Instant::now();
    let (reps, stats) = {
        let mut opts = options(args.common.progress, err);
        let run = if args.first {
            ufrac_early_stopping_with(&denoms, &target, &mut opts)
                .map(|(r, s)| (r.into_iter().collect(), s))
        } else {
            ufrac_with(&denoms, &target, &mut opts)
        };
        run.map_err(|e| Failure::Invalid(e.to_string()))?
    };
    let reps: Vec<DenomMultiset> = reps;
    if args.common.json {
        let body = SolveJson {
            target: target.to_string(),
            complete: !args.first,
            count: reps.len(),
            representations: reps.iter().map(DenomMultiset::to_vec).collect(),
            stats: StatsJson {
                branches_expanded: stats.branches_expanded,
                elapsed_ms: start.elapsed().as_millis(),
            },
        };
        writeln!(out, "{}", serde_json::to_string(&body).unwrap())?;
    } else {
        for rep in &reps {
            writeln!(out, "{}", text_line(rep))?;
        }
        if reps.is_empty() {
            writeln!(err, "no representation of {target}")?;
        }
    }
    Ok(if reps.is_empty() {
        EXIT_NONE
    } else {
        EXIT_FOUND
    })
}

fn gvalue(args: GvalueArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let target = parse_target(args.target_pos, args.target)?;
    let start = Instant::now();
    let found = {
        let mut opts = options(args.common.progress, err);
        compute_g_with(&target, args.n_start, args.n_max, !args.first, &mut opts)
            .map_err(|e| Failure::Invalid(e.to_string()))?
    };
    if args.common.json {
        let body = GvalueJson {
            target: target.to_string(),
            g: found.as_ref().map(|g| g.g),
            complete: found.as_ref().is_some_and(|g| g.complete),
            count: found.as_ref().map_or(0, |g| g.witnesses.len()),
            witnesses: found
                .iter()
                .flat_map(|g| g.witnesses.iter().map(DenomMultiset::to_vec))
                .collect(),
            stats: StatsJson {
                branches_expanded: found.as_ref().map_or(0, |g| g.stats.branches_expanded),
                elapsed_ms: start.elapsed().as_millis(),
            },
        };
        writeln!(out, "{}", serde_json::to_string(&body).unwrap())?;
    } else if let Some(g) = &found {
        writeln!(out, "G={}", g.g)?;
        writeln!(out, "witnesses: {}", g.witnesses.len())?;
        for w in &g.witnesses {
            writeln!(out, "{}", text_line(w))?;
        }
    } else {
        writeln!(
            err,
            "no representation of {target} in {{1..n}} for n <= {}",
            args.n_max
        )?;
    }
    Ok(if found.is_some() {
        EXIT_FOUND
    } else {
        EXIT_NONE
    })
}

fn conjecture(args: ConjectureArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    if args.bounds.is_empty() {
        return Err(Failure::Invalid("no bounds given".into()));
    }
    let config = ConjectureConfig {
        c_max: args.c_max,
        bounds: args.bounds,
        candidates: args.candidates,
    };
    let rows = verify_conjecture_range(args.d_lo, args.d_hi, &config)
        .map_err(|e| Failure::Invalid(e.to_string()))?;
    if args.common.json {
        let body: Vec<ConjectureJson> = rows
            .iter()
            .map(|row| match &row.outcome {
                ConjectureOutcome::Found { c, bound, witness } => ConjectureJson {
                    d: row.d,
                    c: Some(*c),
                    bound: Some(*bound),
                    witness: Some(witness.to_vec()),
                },
                ConjectureOutcome::Failed => ConjectureJson {
                    d: row.d,
                    c: None,
                    bound: None,
                    witness: None,
                },
            })
            .collect();
        writeln!(out, "{}", serde_json::to_string(&body).unwrap())?;
    } else {
        for row in &rows {
            writeln!(out, "{row}")?;
        }
    }
    let failed = rows.iter().any(|r| r.outcome == ConjectureOutcome::Failed);
    Ok(if failed { EXIT_NONE } else { EXIT_FOUND })
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_FOUND
            };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => solve(a, out, err),
        Command::Gvalue(a) => gvalue(a, out, err),
        Command::Conjecture(a) => conjecture(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
        // A closed pipe (e.g. `| head`) is not an error worth reporting.
        Err(Failure::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_FOUND,
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}
