//! Command-line front end.
//!
//! Exit codes: 0 when the checked property holds, 1 when it fails, 2 on
//! usage or input errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::constructions::{
    appendix_subset, compose, entangled_triple_n, shift_family, upb_44_reducible, upb_qubit3,
    upb_sep333_variant, upb_shifts, upb_tiles33, verify_two_pairs, AppendixSubset, SeedList,
    SepVariant, TwoPairsReport,
};
use crate::error::{Error, Result};
use crate::numerics::{CVector, Tolerance};
use crate::stability::{
    cardinality_upper_bound, complement_product_search, is_locally_stable, lower_bound_p,
    subset_campaign, theorem1_audit, BoundReport, CampaignConfig, SearchConfig,
    StabilityCertificate, Theorem1Audit, UpperBound, UpperBoundKind,
};
use crate::states::{load_set, StateSet};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Overlap above which the complement search counts as having found a
/// product state.
pub const EXTENDIBLE_OVERLAP: f64 = 1.0 - 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "locstab",
    version,
    about = "Construct orthogonal product sets and certify local stability"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Relative pivot threshold for span ranks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_rank: f64,

    /// Absolute threshold below which inner products count as zero.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_orth: f64,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Print a human-readable summary instead of JSON on stdout.
    #[arg(long, global = true)]
    pub human: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructionName {
    Qubit3,
    Shifts,
    ShiftFamily,
    Triple,
    Tiles33,
    Sep333,
    Reducible44,
    Compose,
    Appendix,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a named state set and write it as JSON.
    Construct(ConstructArgs),
    /// Certify local stability of a state-set file.
    Check {
        input: PathBuf,
        /// Add the conflict-set counting audit (product sets only).
        #[arg(long)]
        audit: bool,
    },
    /// Check every k-subset of a state-set file.
    Subsets {
        input: PathBuf,
        #[arg(long)]
        k: usize,
        /// Number of random subsets to check when sampling.
        #[arg(long, default_value_t = 10_000)]
        sample: usize,
        /// Sample instead of enumerating above this many subsets.
        #[arg(long, default_value_t = 1_000_000)]
        sample_threshold: u128,
    },
    /// Cardinality bounds for a party signature.
    Bound {
        /// Comma-separated local dimensions, e.g. 2,2,2.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
    },
    /// Search the orthogonal complement of a set for product states.
    Complement {
        input: PathBuf,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    pub name: ConstructionName,

    /// Family parameter (shifts, shift-family, appendix, triple).
    #[arg(long)]
    pub n: Option<usize>,

    /// Real seed states for the shift families, `a,b;c,d;...`.
    #[arg(long)]
    pub seeds: Option<String>,

    /// sep333: use the uncorrected third-party indexing.
    #[arg(long)]
    pub literal: bool,

    /// compose: left operand file.
    #[arg(long)]
    pub left: Option<PathBuf>,

    /// compose: right operand file.
    #[arg(long)]
    pub right: Option<PathBuf>,

    /// compose: shared member of the left set (0-based).
    #[arg(long, default_value_t = 0)]
    pub left_index: usize,

    /// compose: shared member of the right set (0-based).
    #[arg(long, default_value_t = 0)]
    pub right_index: usize,
}

/// Output of one invocation: JSON payload, human summary, exit code.
struct Outcome {
    json: String,
    human: String,
    code: i32,
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    #[serde(flatten)]
    certificate: &'a StabilityCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<&'a Theorem1Audit>,
}

#[derive(Serialize)]
struct BoundOutput<'a> {
    #[serde(flatten)]
    lower: &'a BoundReport,
    upper_bounds: &'a [UpperBound],
}

#[derive(Serialize)]
struct ComplementOutput {
    label: String,
    restarts: usize,
    iters: usize,
    seed: u64,
    best_overlap: f64,
    best_restart: usize,
    extendible: bool,
    witness: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct AppendixOutput<'a> {
    subset: &'a AppendixSubset,
    two_pairs: &'a TwoPairsReport,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_HOLDS
            };
        }
    };
    match execute(&cli) {
        Ok(outcome) => match emit(&cli.global, &outcome) {
            Ok(()) => outcome.code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(global: &GlobalOpts, outcome: &Outcome) -> Result<()> {
    if let Some(path) = &global.out {
        fs::write(path, format!("{}\n", outcome.json))?;
    }
    if global.human {
        print!("{}", outcome.human);
    } else if global.out.is_none() {
        println!("{}", outcome.json);
    } else {
        print!("{}", outcome.human);
    }
    Ok(())
}

fn tolerance(global: &GlobalOpts) -> Result<Tolerance> {
    Tolerance::new(global.tol_rank, global.tol_orth)
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = tolerance(&cli.global)?;
    match &cli.command {
        Command::Construct(args) => construct(args),
        Command::Check { input, audit } => check(input, *audit, &tol),
        Command::Subsets {
            input,
            k,
            sample,
            sample_threshold,
        } => {
            let set = load_set(input)?;
            let config = CampaignConfig {
                sample_threshold: *sample_threshold,
                sample_count: *sample,
                seed: cli.global.seed,
            };
            let report = subset_campaign(&set, *k, &config, &tol)?;
            let mut human = format!(
                "{}: {}/{} {}-subsets stable{}\n",
                report.label,
                report.stable,
                report.checked,
                report.k,
                if report.sampled { " (sampled)" } else { "" }
            );
            for w in report.witnesses.iter().take(10) {
                let _ = writeln!(
                    human,
                    "  unstable {:?} at parties {:?}",
                    w.members, w.unstable_parties
                );
            }
            Ok(Outcome {
                json: to_json(&report),
                human,
                code: if report.all_stable() {
                    EXIT_HOLDS
                } else {
                    EXIT_FAILS
                },
            })
        }
        Command::Bound { dims } => bound(dims),
        Command::Complement {
            input,
            restarts,
            iters,
        } => {
            let set = load_set(input)?;
            let config = SearchConfig {
                restarts: *restarts,
                iters: *iters,
                seed: cli.global.seed,
            };
            let found = complement_product_search(&set, &config)?;
            let extendible = found.best_overlap >= EXTENDIBLE_OVERLAP;
            let witness = found
                .best_product
                .factors()
                .iter()
                .map(|f| f.entries().iter().map(|z| [z.re, z.im]).collect())
                .collect();
            let out = ComplementOutput {
                label: set.label().to_string(),
                restarts: *restarts,
                iters: *iters,
                seed: cli.global.seed,
                best_overlap: found.best_overlap,
                best_restart: found.best_restart,
                extendible,
                witness,
            };
            let human = format!(
                "{}: best complement overlap {:.12} (restart {}){}\n  witness {}\n",
                out.label,
                out.best_overlap,
                out.best_restart,
                if extendible {
                    ", product state found"
                } else {
                    ""
                },
                format_product(found.best_product.factors()),
            );
            Ok(Outcome {
                json: to_json(&out),
                human,
                code: if extendible { EXIT_FAILS } else { EXIT_HOLDS },
            })
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize")
}

fn format_product(factors: &[CVector]) -> String {
    factors
        .iter()
        .map(|f| {
            let parts: Vec<String> = f
                .entries()
                .iter()
                .map(|z| {
                    if z.im.abs() < 5e-7 {
                        format!("{:.6}", z.re)
                    } else {
                        format!("{:.6}{:+.6}i", z.re, z.im)
                    }
                })
                .collect();
            format!("({})", parts.join(", "))
        })
        .collect::<Vec<_>>()
        .join(" x ")
}

fn parse_seeds(text: &str) -> Result<SeedList> {
    let seeds = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let values = s
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidSeed(format!("`{x}`: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(CVector::from_real(&values))
        })
        .collect::<Result<Vec<_>>>()?;
    SeedList::new(seeds)
}

fn require_n(args: &ConstructArgs) -> Result<usize> {
    args.n.ok_or_else(|| Error::OutOfRange {
        what: "n",
        message: format!("construction {:?} needs --n", args.name),
    })
}

fn seeds_for(args: &ConstructArgs, n: usize) -> Result<SeedList> {
    match &args.seeds {
        Some(text) => parse_seeds(text),
        None => SeedList::default_for(n),
    }
}

fn construct(args: &ConstructArgs) -> Result<Outcome> {
    let mut extra = None;
    let set: StateSet = match args.name {
        ConstructionName::Qubit3 => upb_qubit3(),
        ConstructionName::Shifts => {
            let n = require_n(args)?;
            upb_shifts(n, &seeds_for(args, n)?)?
        }
        ConstructionName::ShiftFamily => {
            let n = require_n(args)?;
            shift_family(n, &seeds_for(args, n)?)?
        }
        ConstructionName::Triple => entangled_triple_n(args.n.unwrap_or(3))?,
        ConstructionName::Tiles33 => upb_tiles33(),
        ConstructionName::Sep333 => upb_sep333_variant(if args.literal {
            SepVariant::LiteralIndexing
        } else {
            SepVariant::Corrected
        }),
        ConstructionName::Reducible44 => upb_44_reducible(),
        ConstructionName::Compose => {
            let (Some(left), Some(right)) = (&args.left, &args.right) else {
                return Err(Error::OutOfRange {
                    what: "compose operands",
                    message: "compose needs --left and --right".into(),
                });
            };
            compose(
                &load_set(left)?,
                args.left_index,
                &load_set(right)?,
                args.right_index,
            )?
        }
        ConstructionName::Appendix => {
            let n = require_n(args)?;
            let (sub, set) = appendix_subset(n, &seeds_for(args, n)?)?;
            let report = verify_two_pairs(&sub);
            extra = Some(format!(
                "  T has {} elements (3*ceil(sqrt N) = {}); two-pairs minimum {} at shift {}\n",
                sub.size(),
                3 * sub.ell,
                report.min_count,
                report.min_shift
            ));
            eprintln!(
                "{}",
                to_json(&AppendixOutput {
                    subset: &sub,
                    two_pairs: &report
                })
            );
            set
        }
    };
    let mut human = format!(
        "{}: {} states, dims {:?}\n",
        set.label(),
        set.len(),
        set.dims()
    );
    if let Some(extra) = extra {
        human.push_str(&extra);
    }
    Ok(Outcome {
        json: set.to_json(),
        human,
        code: EXIT_HOLDS,
    })
}

fn check(input: &PathBuf, audit: bool, tol: &Tolerance) -> Result<Outcome> {
    let set = load_set(input)?;
    let certificate = is_locally_stable(&set, tol)?;
    let audit = if audit {
        Some(theorem1_audit(&set, tol)?)
    } else {
        None
    };
    let mut human = format!(
        "{}: {} ({} states, dims {:?})\n",
        certificate.label,
        if certificate.stable {
            "locally stable"
        } else {
            "NOT locally stable"
        },
        set.len(),
        set.dims()
    );
    for p in &certificate.parties {
        let _ = writeln!(
            human,
            "  party {:>3}: span dim {:>3} / {:>3} {}",
            p.party,
            p.span_dim,
            p.required,
            if p.stable { "stable" } else { "unstable" }
        );
    }
    if let Some(a) = &audit {
        let _ = writeln!(
            human,
            "  audit: disjoint={} sum|C_i|={} <= l(l-1)={}, D={}, size bound {:?}",
            a.disjoint, a.total_conflict, a.ordered_pairs, a.d_sum, a.size_bound_holds
        );
    }
    Ok(Outcome {
        json: to_json(&CheckOutput {
            certificate: &certificate,
            audit: audit.as_ref(),
        }),
        human,
        code: if certificate.stable {
            EXIT_HOLDS
        } else {
            EXIT_FAILS
        },
    })
}

fn bound(dims: &[usize]) -> Result<Outcome> {
    if dims.len() < 2 {
        return Err(Error::InvalidSignature(
            "bounds need at least two parties; a single party has no local stability question"
                .into(),
        ));
    }
    let lower = lower_bound_p(dims)?;
    let n = dims.len();
    let mut upper = Vec::new();
    if dims.iter().all(|&d| d == 2) {
        for kind in [
            UpperBoundKind::QubitCompose,
            UpperBoundKind::QubitSubset,
            UpperBoundKind::QubitSqrt,
        ] {
            if let Ok(b) = cardinality_upper_bound(kind, n) {
                upper.push(b);
            }
        }
    } else if dims.iter().all(|&d| d == 3) {
        upper.push(cardinality_upper_bound(UpperBoundKind::Qutrit, n)?);
    }
    let mut human = format!(
        "dims {:?}: D = {}, lower bound {} (closed form {:.6}), f = {}\n",
        lower.dims,
        lower.d_sum,
        lower.lower_bound_p,
        lower.closed_form_printed,
        lower.trivial_upb_bound
    );
    for b in &upper {
        let _ = writeln!(
            human,
            "  upper bound ({:?}): {}{}",
            b.kind,
            b.value,
            b.construction
                .map(|c| format!(", composition size {c}"))
                .unwrap_or_default()
        );
    }
    Ok(Outcome {
        json: to_json(&BoundOutput {
            lower: &lower,
            upper_bounds: &upper,
        }),
        human,
        code: EXIT_HOLDS,
    })
}
