use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context as _};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use oag_core::cosetlogic::{
    brute_membership, saturation_membership, threshold_n, validate_system, CosetSystemFile,
};
use oag_core::metrics::index_with_transversal;
use oag_core::subgroup::{member, spine_maps};
use oag_core::Elem;
use oag_workbench::{
    dim_profile, parse_group, parse_group_spec, parse_subgroup_expr, profile_csv,
    run_lemma_suite_with, suites, LemmaCase, RunOptions, DEFAULT_CAP, DEFAULT_SEED,
};
use serde_json::json;

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "oag",
    version,
    about = "Exact subgroup algebra and lemma checks for ordered abelian groups"
)]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a group.
    Group {
        #[arg(long)]
        group: String,
    },
    /// Decide `element ∈ subgroup`.
    Member {
        #[arg(long)]
        group: String,
        #[arg(long)]
        subgroup: String,
        #[arg(long)]
        element: String,
    },
    /// Spine data of an element for modulus `n`.
    Spine {
        #[arg(long)]
        group: String,
        #[arg(long)]
        element: String,
        #[arg(long, default_value_t = 2)]
        n: u64,
    },
    /// Index of `smaller` in `larger`.
    Index {
        #[arg(long)]
        group: String,
        #[arg(long)]
        larger: String,
        #[arg(long)]
        smaller: String,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// Also print coset representatives.
        #[arg(long)]
        transversal: bool,
    },
    /// CSV of F_p-dimensions for s = 1..=smax.
    DimProfile {
        #[arg(long)]
        group: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 4)]
        smax: u32,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
    },
    /// Run one lemma suite and emit its JSON report.
    Verify {
        /// Registry id; see --list.
        #[arg(long, required_unless_present = "list")]
        lemma: Option<String>,
        /// Print the registry and exit.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run one of the two counterexample suites.
    Counterexample {
        #[arg(value_parser = ["cex72", "cex73"])]
        which: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Finite coset systems and power-sum thresholds.
    Cosetlogic {
        #[command(subcommand)]
        action: CosetAction,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, default_value_t = 3)]
    r_max: u32,
    #[arg(long, default_value_t = 3)]
    s_max: u32,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, env = "OAG_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    #[arg(long, default_value_t = 8)]
    j_max: usize,
    /// Moduli of a finite ambient, e.g. `4,4`; repeatable.
    #[arg(long = "ambient", value_delimiter = ';')]
    ambients: Vec<String>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Include wall time in the report.
    #[arg(long)]
    timing: bool,
    /// Compute in a copy of the group with one constraint modulus raised
    /// (harness self-test).
    #[arg(long)]
    mutate_constraint: bool,
}

#[derive(Subcommand)]
enum CosetAction {
    /// Validate a system file.
    Check {
        #[arg(long)]
        system: PathBuf,
    },
    /// Membership of `y` in `Y + G'`, by the criterion and by enumeration.
    Member {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<i64>,
    },
    /// Smallest threshold exponent for `n` and `k` terms.
    Threshold {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: usize,
    },
}

/// Text to emit and the exit code.
type Output = (String, u8);

fn parse_tuple(text: &str) -> anyhow::Result<Vec<u64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .with_context(|| format!("bad modulus `{t}`"))
        })
        .collect()
}

fn run_suite(lemma: &str, run: RunArgs) -> anyhow::Result<Output> {
    let group = run.group.as_deref().map(parse_group_spec).transpose()?;
    let mut case = LemmaCase::new(lemma, group);
    case.p = run.p;
    case.r_max = run.r_max;
    case.s_max = run.s_max;
    case.samples = run.samples;
    case.seed = run.seed;
    case.cap = run.cap;
    case.j_max = run.j_max;
    case.ambients = run
        .ambients
        .iter()
        .map(|a| parse_tuple(a))
        .collect::<anyhow::Result<_>>()?;
    let opts = RunOptions {
        jobs: run.jobs,
        timing: run.timing,
        mutate: run.mutate_constraint,
    };
    let report = run_lemma_suite_with(&case, &opts)?;
    Ok((
        serde_json::to_string_pretty(&report)? + "\n",
        report.exit_code() as u8,
    ))
}

fn load_system(path: &PathBuf) -> anyhow::Result<CosetSystemFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn pretty(v: serde_json::Value) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn execute(command: Command) -> anyhow::Result<Output> {
    match command {
        Command::Group { group } => {
            let g = parse_group(&group)?;
            let out = json!({
                "spec": g.spec().to_string(),
                "family": g.spec().family_name(),
                "universe": g.universe(),
                "chain_length": g.chain_length(),
                "coefficients": format!("{:?}", g.coeff_ring()),
            });
            Ok((pretty(out)?, 0))
        }
        Command::Member {
            group,
            subgroup,
            element,
        } => {
            let g = parse_group(&group)?;
            let s = parse_subgroup_expr(&subgroup, &g)?;
            let x = Elem::parse(&element, &g)?;
            Ok((format!("{}\n", member(&s, &x)?), 0))
        }
        Command::Spine { group, element, n } => {
            let g = parse_group(&group)?;
            let x = Elem::parse(&element, &g)?;
            Ok((pretty(json!(spine_maps(n, &x)))?, 0))
        }
        Command::Index {
            group,
            larger,
            smaller,
            cap,
            transversal,
        } => {
            let g = parse_group(&group)?;
            let a = parse_subgroup_expr(&larger, &g)?;
            let b = parse_subgroup_expr(&smaller, &g)?;
            let (value, reps) = index_with_transversal::<BigInt>(&g, &a, &b, cap)?;
            let out = if transversal {
                json!({ "index": value, "transversal": reps.iter().map(|x| x.to_string()).collect::<Vec<_>>() })
            } else {
                json!(value)
            };
            Ok((pretty(out)?, 0))
        }
        Command::DimProfile {
            group,
            p,
            smax,
            cap,
        } => {
            let g = parse_group(&group)?;
            let rows = dim_profile(&g, p, smax, cap)?;
            let code = if rows.iter().all(|(_, v)| v.is_finite()) {
                0
            } else {
                3
            };
            Ok((profile_csv(&rows), code))
        }
        Command::Verify { list: true, .. } => {
            let mut out = String::new();
            for s in suites::REGISTRY {
                out += &format!("{:<15} {}\n", s.id, s.summary);
            }
            Ok((out, 0))
        }
        Command::Verify { lemma, run, .. } => run_suite(&lemma.expect("required by clap"), run),
        Command::Counterexample { which, run } => run_suite(&which, run),
        Command::Cosetlogic { action } => match action {
            CosetAction::Check { system } => {
                let file = load_system(&system)?;
                let problems = validate_system(&file.system(), &file.ambient);
                let code = if problems.is_empty() {
                    0
                } else {
                    EXIT_VIOLATION
                };
                Ok((
                    pretty(json!({ "valid": problems.is_empty(), "violations": problems }))?,
                    code,
                ))
            }
            CosetAction::Member { system, y } => {
                let file = load_system(&system)?;
                let sys = file.system();
                let problems = validate_system(&sys, &file.ambient);
                if !problems.is_empty() {
                    return Ok((
                        pretty(json!({ "valid": false, "violations": problems }))?,
                        EXIT_VIOLATION,
                    ));
                }
                let fast = saturation_membership(&sys, &file.ambient, &file.gprime, &y)?;
                let slow = brute_membership(&sys, &file.ambient, &file.gprime, &y)?;
                let code = if fast == slow { 0 } else { EXIT_VIOLATION };
                Ok((
                    pretty(json!({ "member": fast, "enumeration": slow }))?,
                    code,
                ))
            }
            CosetAction::Threshold { n, k } => {
                if n < 2 || k == 0 {
                    bail!("need n >= 2 and k >= 1");
                }
                Ok((
                    pretty(json!({ "n": n, "k": k, "threshold": threshold_n(n, k) }))?,
                    0,
                ))
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok((text, code)) => {
            let written = match &cli.out {
                Some(path) => {
                    fs::write(path, &text).with_context(|| format!("writing {}", path.display()))
                }
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            // parse failures, unknown lemmas, incompatible families and
            // rejected queries all count as bad input
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
