use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use immsnap::strata::{self, StratumRef};
use immsnap::topology::{self, Provenance};
use immsnap::verify::{self, Options};
use immsnap::{Complex, Error, ProcSet, RoundCounter, DEFAULT_SIMPLEX_CAP};

mod render;

#[derive(Parser)]
#[command(name = "immsnap", version, about = "Build and check immediate snapshot complexes")]
struct Cli {
    /// Refuse to build complexes with more simplices than this.
    #[arg(long, global = true, env = "IMMSNAP_MAX_SIMPLICES", default_value_t = DEFAULT_SIMPLEX_CAP as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    max_simplices: u64,

    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = Options::default().seed)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Target {
    /// Round counter, e.g. `2,1,1` or `1,x,0` (`x` marks a non-participant).
    #[arg(short = 'r', long = "counter")]
    counter: String,
}

#[derive(Subcommand)]
enum Command {
    /// Construct the complex and serialize it.
    Build {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the facets, or only count them.
    Facets {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        count: bool,
    },
    /// Run invariant suites; exits 1 if any fails.
    Verify {
        #[command(flatten)]
        target: Target,
        /// Comma-separated suite names, or `all`.
        #[arg(long, default_value = "all")]
        checks: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Query the canonical strata.
    Strata {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        query: StrataQuery,
    },
    /// Collapse onto the relative boundary of a pivot, or all the way down.
    Collapse {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        pivot: Option<usize>,
        /// Collapse every simplex, the empty one included.
        #[arg(long)]
        full: bool,
        /// Replay the sequence and report the result.
        #[arg(long)]
        validate: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the complex.
    Export {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct StrataQuery {
    /// Every stratum `X_{S,A}` and `B_V` with its size.
    #[arg(long)]
    list: bool,
    /// Closed form of `X_{S_1} ∩ ... ∩ X_{S_k}`.
    #[arg(long, num_args = 2.., value_name = "SET")]
    intersect: Option<Vec<String>>,
    /// Nerve of the cover by the `X_S`.
    #[arg(long)]
    nerve: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
    Svg,
}

enum Failure {
    Usage(String),
    Cap(String),
    Check(Value),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::PidOutOfRange(_) | Error::EmptySupport | Error::NotInSupport(_) | Error::NotActive { .. } => {
                Failure::Usage(e.to_string())
            }
            Error::ResourceCap { .. } => Failure::Cap(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Ctx {
    cap: usize,
    seed: u64,
}

impl Ctx {
    fn complex(&self, target: &Target) -> Result<Complex, Failure> {
        let r: RoundCounter = target.counter.parse()?;
        Ok(Complex::build_with_cap(&r, self.cap)?)
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Outcome {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx { cap: usize::try_from(cli.max_simplices).unwrap_or(usize::MAX), seed: cli.seed };
    match cli.command {
        Command::Build { target, out } => {
            let k = ctx.complex(&target)?;
            emit(&pretty(&k.to_export(true)), out.as_ref())
        }
        Command::Facets { target, count } => {
            let r: RoundCounter = target.counter.parse()?;
            if count {
                let n = immsnap::schedule::count(&r);
                return emit(&n.to_string(), None);
            }
            let facets = immsnap::complex::facets(&r, ctx.cap)?;
            emit(&pretty(&facets), None)
        }
        Command::Verify { target, checks, out } => {
            let names = verify::parse_checks(&checks)?;
            let k = ctx.complex(&target)?;
            let opts = Options { seed: ctx.seed, ..Options::default() };
            let reports = verify::run(&k, &names, &opts)?;
            let passed = reports.iter().all(|r| r.passed);
            let doc = json!({ "counter": k.counter(), "passed": passed, "checks": reports });
            if passed {
                emit(&pretty(&doc), out.as_ref())
            } else {
                if let Some(path) = out {
                    fs::write(path, pretty(&doc))?;
                }
                Err(Failure::Check(doc))
            }
        }
        Command::Strata { target, query } => {
            let k = ctx.complex(&target)?;
            if query.list {
                emit(&pretty(&strata_list(&k)), None)
            } else if let Some(sets) = query.intersect {
                intersect(&k, &sets)
            } else {
                let nerve = strata::nerve(&k)?;
                emit(&pretty(&nerve), None)
            }
        }
        Command::Collapse { target, pivot, full, validate, out } => {
            let k = ctx.complex(&target)?;
            let supp = k.counter().support();
            let pivot = match pivot {
                Some(p) if supp.contains(p) => p,
                Some(p) => return Err(Failure::Usage(format!("pivot {p} is not in the support {supp}"))),
                None => supp.min().ok_or(Error::EmptySupport)?,
            };
            let (seq, target_set) = if full {
                (topology::collapse_all(&k, pivot)?, None)
            } else {
                (topology::collapse_to_relative_boundary(&k, pivot)?, Some(topology::relative_boundary(&k, pivot)))
            };
            let mut by_stage = BTreeMap::new();
            for tag in [Provenance::Stage1, Provenance::Stage2, Provenance::Stage3, Provenance::Recursive, Provenance::GreedyFallback] {
                by_stage.insert(serde_json::to_value(tag).expect("tag").as_str().expect("tag is a string").to_owned(), seq.count(tag));
            }
            let mut doc = json!({
                "counter": k.counter(),
                "pivot": pivot,
                "mode": if full { "full" } else { "relative-boundary" },
                "pairs": seq.len(),
                "provenance": by_stage,
                "steps": seq.to_export(&k),
            });
            if validate {
                let report = topology::validate_collapse(&k, &seq.steps, target_set.as_ref());
                let valid = report.valid;
                doc["validation"] = json!(report);
                if !valid {
                    return Err(Failure::Check(doc));
                }
            }
            emit(&pretty(&doc), out.as_ref())
        }
        Command::Export { target, format, out } => {
            let k = ctx.complex(&target)?;
            let text = match format {
                Format::Json => pretty(&k.to_export(true)),
                Format::Dot => render::hasse_dot(&k),
                Format::Svg => render::svg(&k).map_err(Failure::Usage)?,
            };
            emit(&text, out.as_ref())
        }
    }
}

fn strata_list(k: &Complex) -> Value {
    let r = k.counter();
    let mut entries = Vec::new();
    for (s, a) in strata::admissible_pairs(r.active()) {
        let stratum = StratumRef::x(s, a).normalized();
        let members = strata::member_set(k, &stratum);
        entries.push(json!({ "stratum": stratum.to_string(), "S": s, "A": a, "simplices": members.count_ones(..) }));
    }
    for v in r.support().subsets_by_size().into_iter().filter(|v| !v.is_empty()) {
        let stratum = StratumRef::b(v);
        entries.push(json!({ "stratum": stratum.to_string(), "V": v, "simplices": strata::member_set(k, &stratum).count_ones(..) }));
    }
    json!({ "counter": r, "strata": entries })
}

fn intersect(k: &Complex, raw: &[String]) -> Outcome {
    let act = k.counter().active();
    let mut sets = Vec::with_capacity(raw.len());
    for text in raw {
        let s: ProcSet = text.parse()?;
        if s.is_empty() || !s.is_subset(act) {
            return Err(Failure::Usage(format!("{s} must be a nonempty subset of the active set {act}")));
        }
        sets.push(s);
    }
    let (result, _) = strata::intersect_family(&sets);
    let mut setwise = strata::member_set(k, &StratumRef::x(sets[0], ProcSet::empty()));
    for &s in &sets[1..] {
        setwise.intersect_with(&strata::member_set(k, &StratumRef::x(s, ProcSet::empty())));
    }
    if setwise != strata::member_set(k, &result) {
        eprintln!("closed form {result} differs from the setwise intersection");
        return Err(Failure::Check(json!({ "closed_form": result.to_string(), "agrees": false })));
    }
    emit(&result.to_string(), None)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg} (raise --max-simplices or IMMSNAP_MAX_SIMPLICES)");
            ExitCode::from(3)
        }
        Err(Failure::Check(report)) => {
            // the report is the output; a closed pipe cannot make it more of a failure
            let _ = emit(&pretty(&report), None);
            ExitCode::from(1)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
