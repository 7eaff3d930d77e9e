//! Exhaustive rule-space scanner. Rules are classified in rule-key order;
//! rows already present in the checkpoint file are reprinted verbatim, so
//! output is byte-identical across runs, resumes, and worker counts.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use rayon::prelude::*;
use treeca::{classify, enumerate_rules, ClassifyBounds, LocalRule, TreeGeometry};

/// Rows computed together between checkpoint flushes.
const CHUNK: usize = 32;

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Tree arity k.
    #[arg(long, default_value_t = 2)]
    pub arity: usize,
    /// Alphabet size.
    #[arg(long, default_value_t = 2)]
    pub alphabet: usize,
    /// Neighborhood radius.
    #[arg(long, default_value_t = 1)]
    pub radius: usize,
    /// Orphan search depth bound.
    #[arg(long, default_value_t = 3)]
    pub orphan_depth: usize,
    /// Highest balance level to certify.
    #[arg(long, default_value_t = 2)]
    pub balance_levels: usize,
    /// Diamond size to search.
    #[arg(long, default_value_t = 5)]
    pub diamond_size: usize,
    /// Highest right-closing resolution to try.
    #[arg(long, default_value_t = 3)]
    pub closing_max_n: usize,
    /// Highest extension-property resolution to try.
    #[arg(long, default_value_t = 2)]
    pub extension_max_n: usize,
    /// File of finished rows; present rows are reused, new ones appended.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Map of finished rows keyed by the leading `rule=` field.
fn load_checkpoint(path: &Path) -> anyhow::Result<HashMap<u128, String>> {
    let mut rows = HashMap::new();
    if !path.exists() {
        return Ok(rows);
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read checkpoint {}", path.display()))?;
    for (number, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let key = line
            .strip_prefix("rule=")
            .and_then(|rest| rest.split_whitespace().next())
            .and_then(|field| field.parse::<u128>().ok())
            .with_context(|| {
                format!("checkpoint line {} lacks a rule key: {line}", number + 1)
            })?;
        rows.insert(key, line.to_string());
    }
    Ok(rows)
}

fn classify_chunk(
    chunk: &[LocalRule],
    stored: &HashMap<u128, String>,
    bounds: &ClassifyBounds,
) -> treeca::Result<Vec<(u128, Option<String>)>> {
    chunk
        .par_iter()
        .map(|rule| {
            let key = rule.rule_key().expect("enumerated rules have keys");
            if stored.contains_key(&key) {
                return Ok((key, None));
            }
            Ok((key, Some(classify(rule, bounds)?.record_line())))
        })
        .collect()
}

pub fn run_scan(args: &ScanArgs, budget: u64) -> anyhow::Result<()> {
    let geometry = TreeGeometry::new(args.arity)?;
    let rules: Vec<LocalRule> =
        enumerate_rules(geometry, args.alphabet, args.radius, budget)?.collect();
    let bounds = ClassifyBounds {
        orphan_depth: args.orphan_depth,
        balance_levels: args.balance_levels,
        diamond_size: args.diamond_size,
        closing_max_n: args.closing_max_n,
        extension_max_n: args.extension_max_n,
        budget,
    };
    let stored = match &args.checkpoint {
        Some(path) => load_checkpoint(path)?,
        None => HashMap::new(),
    };
    let mut appender = match &args.checkpoint {
        Some(path) => Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .with_context(|| format!("cannot open checkpoint {}", path.display()))?,
        ),
        None => None,
    };

    let mut run = || -> anyhow::Result<()> {
        for chunk in rules.chunks(CHUNK) {
            for (key, fresh) in classify_chunk(chunk, &stored, &bounds)? {
                let line = match fresh {
                    Some(line) => {
                        if let Some(file) = appender.as_mut() {
                            writeln!(file, "{line}")?;
                        }
                        line
                    }
                    None => stored[&key].clone(),
                };
                println!("{line}");
            }
            if let Some(file) = appender.as_mut() {
                file.flush()?;
            }
        }
        Ok(())
    };

    match args.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .context("cannot build worker pool")?
            .install(run),
        None => run(),
    }
}
