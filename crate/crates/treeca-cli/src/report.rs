//! Rendering of analysis results in the two output formats: multi-line
//! human text and single-line `key=value` records.

use clap::ValueEnum;
use treeca::{BalanceReport, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Records,
}

pub fn verdict_lines(verdict: &Verdict, format: Format) -> Vec<String> {
    match format {
        Format::Text => verdict.render_lines(),
        Format::Records => {
            let mut parts = vec![format!("verdict={}", verdict.status.label())];
            if let Some(bound) = verdict.bound {
                parts.push(format!("bound={bound}"));
            }
            if let Some(witness) = &verdict.witness {
                parts.push(format!("witness={}", witness.text()));
            }
            for (key, value) in &verdict.detail {
                parts.push(format!("{key}={value}"));
            }
            vec![parts.join(" ")]
        }
    }
}

pub fn balance_lines(report: &BalanceReport, format: Format) -> Vec<String> {
    let mut fields = vec![
        ("level", report.level.to_string()),
        ("expected", report.expected.to_string()),
        ("min", report.min_count.to_string()),
        ("max", report.max_count.to_string()),
    ];
    if let Some(over) = &report.over_witness {
        fields.push(("over", over.text()));
    }
    if let Some(orphan) = &report.orphan {
        fields.push(("orphan", orphan.text()));
    }
    match format {
        Format::Text => fields
            .into_iter()
            .map(|(key, value)| format!("{key}: {value}"))
            .collect(),
        Format::Records => vec![fields
            .into_iter()
            .map(|(key, value)| format!("{key}={value}"))
            .collect::<Vec<_>>()
            .join(" ")],
    }
}

/// A bare value in text form, a labeled `key=value` record otherwise.
pub fn value_line(label: &str, value: &str, format: Format) -> String {
    match format {
        Format::Text => value.to_string(),
        Format::Records => format!("{label}={value}"),
    }
}
