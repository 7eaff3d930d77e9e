//! Command line front end: loads a rule file, runs exactly one analysis,
//! and prints its report. Exit code 0 means the analysis completed and the
//! verdict is in the report; 2 means invalid input; 3 means the work
//! budget was exceeded.

mod report;
mod scan;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use report::{balance_lines, value_line, verdict_lines, Format};
use treeca::{
    apply, balance_report, closing_preimage_build, diamond_defect, diamond_search,
    expansivity_witness, extension_property_check, is_permutive, non_openness_evidence,
    orphan_search, parse_letters, permutive_preimage_build, right_closing_at,
    right_closing_min_n, trajectory_set, trajectory_set_recursive, DiamondPair, Letter,
    LocalRule, Pattern, Status, Verdict, Witness, DEFAULT_BUDGET,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Enumerate,
    Recursive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Permutive,
    Closing,
}

#[derive(Parser)]
#[command(
    name = "treeca",
    version,
    about = "Analyze cellular automata on labelings of the full k-ary tree"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Work budget; overrides the TREECA_BUDGET environment variable.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the rule once to a pattern.
    Apply {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        pattern: String,
    },
    /// Print the successive images of a pattern.
    Orbit {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        steps: usize,
    },
    /// Count the reachable depth-n observation sequences step by step.
    Trajectory {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Decide permutivity from the rule table.
    CheckPermutive {
        #[arg(long)]
        rule: PathBuf,
    },
    /// Search for a block with no preimage.
    FindOrphan {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Tabulate preimage counts of all blocks at one level.
    Balance {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long, default_value_t = 1)]
        level: usize,
    },
    /// Search for two blocks with shared boundary and image.
    FindDiamond {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long, default_value_t = 5)]
        size: usize,
        /// Allow sizes down to r+1 instead of 2r+3.
        #[arg(long)]
        relaxed: bool,
    },
    /// Check whether a claimed diamond is genuine.
    VerifyDiamond {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
        /// Allow sizes down to r+1 instead of 2r+3.
        #[arg(long)]
        relaxed: bool,
    },
    /// Decide right-closingness at one resolution or find the least one.
    CheckRightClosing {
        #[arg(long)]
        rule: PathBuf,
        /// Check exactly this resolution.
        #[arg(long, conflicts_with = "max_n")]
        at: Option<usize>,
        /// Scan resolutions 1..=max-n for the least certified one.
        #[arg(long, default_value_t = 3)]
        max_n: usize,
    },
    /// Decide the unique-extension property at one resolution.
    CheckExtensionProperty {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long, default_value_t = 1)]
        at: usize,
    },
    /// Build a preimage of a target pattern.
    BuildPreimage {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        target: String,
        /// Letters for the cells a permutive build may choose freely
        /// (defaults to all zeros).
        #[arg(long)]
        filler: Option<String>,
        /// Root letter for a closing build.
        #[arg(long, default_value_t = 0)]
        root: Letter,
        /// Extension resolution for a closing build.
        #[arg(long, default_value_t = 1)]
        at: usize,
    },
    /// Find two inputs whose observed orbits agree.
    FalsifyExpansivity {
        #[arg(long)]
        rule: PathBuf,
        /// Observation depth.
        #[arg(long = "N")]
        resolution: usize,
        /// Observed steps.
        #[arg(long = "T")]
        steps: usize,
    },
    /// Look for a deeper image window that strands a root letter.
    OpennessEvidence {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long, default_value_t = 0)]
        root: Letter,
        /// Shallow window depth.
        #[arg(long)]
        m: usize,
        /// Deep window depth.
        #[arg(long)]
        m_prime: usize,
    },
    /// Classify every rule of a given shape, one record per rule.
    Scan(scan::ScanArgs),
}

fn resolve_budget(flag: Option<u64>) -> anyhow::Result<u64> {
    if let Some(budget) = flag {
        return Ok(budget);
    }
    match std::env::var("TREECA_BUDGET") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .with_context(|| format!("TREECA_BUDGET must be an integer, got {text:?}")),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn load_rule(path: &Path) -> anyhow::Result<LocalRule> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read rule file {}", path.display()))?;
    Ok(LocalRule::parse(&text)?)
}

fn parse_pattern(rule: &LocalRule, text: &str) -> anyhow::Result<Pattern> {
    Ok(Pattern::parse(rule.geometry(), rule.alphabet_size(), text)?)
}

fn print_lines(lines: &[String]) {
    for line in lines {
        println!("{line}");
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let budget = resolve_budget(cli.budget)?;
    let format = cli.format;
    match cli.command {
        Command::Apply { rule, pattern } => {
            let rule = load_rule(&rule)?;
            let image = apply(&rule, &parse_pattern(&rule, &pattern)?)?;
            println!("{}", value_line("image", &image.text(), format));
        }
        Command::Orbit { rule, pattern, steps } => {
            let rule = load_rule(&rule)?;
            let mut current = parse_pattern(&rule, &pattern)?;
            for step in 1..=steps {
                current = apply(&rule, &current)?;
                match format {
                    Format::Text => println!("{}", current.text()),
                    Format::Records => println!("t={step} image={}", current.text()),
                }
            }
        }
        Command::Trajectory { rule, depth, steps, method } => {
            let rule = load_rule(&rule)?;
            let stats = match method {
                Method::Enumerate => trajectory_set(&rule, depth, steps, budget)?,
                Method::Recursive => trajectory_set_recursive(&rule, depth, steps, budget)?,
                Method::Auto if rule.radius() == 1 => {
                    trajectory_set_recursive(&rule, depth, steps, budget)?
                }
                Method::Auto => trajectory_set(&rule, depth, steps, budget)?,
            };
            print_lines(&stats.report_lines());
        }
        Command::CheckPermutive { rule } => {
            let verdict = is_permutive(&load_rule(&rule)?);
            print_lines(&verdict_lines(&verdict, format));
        }
        Command::FindOrphan { rule, depth } => {
            let verdict = orphan_search(&load_rule(&rule)?, depth, budget)?;
            print_lines(&verdict_lines(&verdict, format));
        }
        Command::Balance { rule, level } => {
            let report = balance_report(&load_rule(&rule)?, level, budget)?;
            print_lines(&balance_lines(&report, format));
        }
        Command::FindDiamond { rule, size, relaxed } => {
            let verdict = diamond_search(&load_rule(&rule)?, size, !relaxed, budget)?;
            print_lines(&verdict_lines(&verdict, format));
        }
        Command::VerifyDiamond { rule, first, second, relaxed } => {
            let rule = load_rule(&rule)?;
            let pair = DiamondPair {
                first: parse_pattern(&rule, &first)?,
                second: parse_pattern(&rule, &second)?,
            };
            let size = pair.size();
            let verdict = match diamond_defect(&rule, &pair, !relaxed)? {
                None => Verdict::new(Status::Certified)
                    .with_bound(size as u64)
                    .with_witness(Witness::Diamond(pair)),
                Some(reason) => Verdict::new(Status::Refuted)
                    .with_detail("reason", reason.replace(' ', "-")),
            };
            print_lines(&verdict_lines(&verdict, format));
        }
        Command::CheckRightClosing { rule, at, max_n } => {
            let rule = load_rule(&rule)?;
            let verdict = match at {
                Some(n) => right_closing_at(&rule, n, budget)?,
                None => right_closing_min_n(&rule, max_n, budget)?,
            };
            print_lines(&verdict_lines(&verdict, format));
        }
        Command::CheckExtensionProperty { rule, at } => {
            let verdict = extension_property_check(&load_rule(&rule)?, at, budget)?;
            print_lines(&verdict_lines(&verdict, format));
        }
        Command::BuildPreimage { rule, mode, target, filler, root, at } => {
            let rule = load_rule(&rule)?;
            let target = parse_pattern(&rule, &target)?;
            let built = match mode {
                Mode::Permutive => {
                    let geometry = rule.geometry();
                    let spread = geometry.delta_size(target.depth() + rule.radius())
                        - geometry.delta_size(target.depth());
                    let letters = match filler {
                        Some(text) => parse_letters(&text, rule.alphabet_size())?,
                        None => vec![0; spread],
                    };
                    permutive_preimage_build(&rule, &target, &letters)?
                }
                Mode::Closing => closing_preimage_build(&rule, at, root, &target, budget)?,
            };
            println!("{}", value_line("preimage", &built.text(), format));
        }
        Command::FalsifyExpansivity { rule, resolution, steps } => {
            let rule = load_rule(&rule)?;
            let verdict = match expansivity_witness(&rule, resolution, steps, budget) {
                Ok((first, second)) => Verdict::new(Status::Refuted)
                    .with_witness(Witness::Pair { first, second })
                    .with_detail("resolution", resolution)
                    .with_detail("steps", steps),
                Err(treeca::Error::NoWitness(_)) => Verdict::new(Status::BoundedEvidence)
                    .with_detail("resolution", resolution)
                    .with_detail("steps", steps)
                    .with_detail("note", "no-collision"),
                Err(error) => return Err(error.into()),
            };
            print_lines(&verdict_lines(&verdict, format));
        }
        Command::OpennessEvidence { rule, root, m, m_prime } => {
            let verdict = non_openness_evidence(&load_rule(&rule)?, root, m, m_prime, budget)?;
            print_lines(&verdict_lines(&verdict, format));
        }
        Command::Scan(args) => scan::run_scan(&args, budget)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes instead of panicking on the
    // next print; long scans are routinely piped into head.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            match error.downcast_ref::<treeca::Error>() {
                Some(treeca::Error::Budget { .. }) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
