//! One-stop classification of a rule under fixed exploration bounds. Each
//! analysis runs on its own budget; analyses that run out of budget or do
//! not apply to the rule's shape are listed as incomplete instead of
//! failing the whole row.

use crate::closing::right_closing_min_n;
use crate::diamonds::diamond_search;
use crate::dynamics::DEFAULT_BUDGET;
use crate::error::{Error, Result};
use crate::openness::extension_property_check;
use crate::permutivity::is_permutive;
use crate::rule::LocalRule;
use crate::surjectivity::{balance_report, orphan_search};
use crate::verdict::Status;

/// Exploration bounds for one classification row.
#[derive(Debug, Clone)]
pub struct ClassifyBounds {
    pub orphan_depth: usize,
    pub balance_levels: usize,
    pub diamond_size: usize,
    pub closing_max_n: usize,
    pub extension_max_n: usize,
    pub budget: u64,
}

impl Default for ClassifyBounds {
    fn default() -> Self {
        ClassifyBounds {
            orphan_depth: 3,
            balance_levels: 2,
            diamond_size: 5,
            closing_max_n: 3,
            extension_max_n: 2,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Findings for one rule. `None` means no witness within the bounds, not a
/// proof of absence; the `incomplete` list names analyses that could not
/// finish at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationRow {
    pub rule_key: Option<u128>,
    pub permutive: bool,
    pub orphan_depth: Option<usize>,
    pub balanced_up_to: usize,
    pub diamond_size: Option<usize>,
    pub right_closing_n: Option<usize>,
    pub extension_property_n: Option<usize>,
    pub incomplete: Vec<String>,
}

impl ClassificationRow {
    /// Single-line record form, one `key=value` field per finding.
    pub fn record_line(&self) -> String {
        fn opt(value: Option<usize>) -> String {
            value.map_or_else(|| "-".to_string(), |v| v.to_string())
        }
        let key = self
            .rule_key
            .map_or_else(|| "?".to_string(), |k| k.to_string());
        let incomplete = if self.incomplete.is_empty() {
            "-".to_string()
        } else {
            self.incomplete.join(",")
        };
        format!(
            "rule={key} permutive={} orphan_depth={} balanced_up_to={} diamond_size={} \
             right_closing_n={} extension_property_n={} incomplete={incomplete}",
            self.permutive,
            opt(self.orphan_depth),
            self.balanced_up_to,
            opt(self.diamond_size),
            opt(self.right_closing_n),
            opt(self.extension_property_n),
        )
    }
}

fn note_incomplete<T>(
    outcome: Result<T>,
    name: &str,
    incomplete: &mut Vec<String>,
) -> Result<Option<T>> {
    match outcome {
        Ok(value) => Ok(Some(value)),
        Err(Error::Budget { .. }) | Err(Error::Unsupported(_)) | Err(Error::Shape(_)) => {
            incomplete.push(name.to_string());
            Ok(None)
        }
        Err(other) => Err(other),
    }
}

/// Classify one rule under the given bounds.
pub fn classify(rule: &LocalRule, bounds: &ClassifyBounds) -> Result<ClassificationRow> {
    let mut incomplete = Vec::new();
    let permutive = is_permutive(rule).status == Status::Certified;

    let orphan_depth = note_incomplete(
        orphan_search(rule, bounds.orphan_depth, bounds.budget),
        "orphan",
        &mut incomplete,
    )?
    .and_then(|verdict| match verdict.status {
        Status::Refuted => verdict.bound.map(|b| b as usize),
        _ => None,
    });

    let mut balanced_up_to = 0;
    for level in 1..=bounds.balance_levels {
        match note_incomplete(
            balance_report(rule, level, bounds.budget),
            "balance",
            &mut incomplete,
        )? {
            Some(report) if report.min_count == report.max_count => balanced_up_to = level,
            _ => break,
        }
    }

    let diamond_size = note_incomplete(
        diamond_search(rule, bounds.diamond_size, true, bounds.budget),
        "diamond",
        &mut incomplete,
    )?
    .and_then(|verdict| match verdict.status {
        Status::Refuted => verdict.bound.map(|b| b as usize),
        _ => None,
    });

    let right_closing_n = note_incomplete(
        right_closing_min_n(rule, bounds.closing_max_n, bounds.budget),
        "right-closing",
        &mut incomplete,
    )?
    .and_then(|verdict| match verdict.status {
        Status::Certified => verdict.bound.map(|b| b as usize),
        _ => None,
    });

    // Certification here is not monotone in the resolution, so every
    // resolution up to the bound gets its own try.
    let mut extension_property_n = None;
    for n in 1..=bounds.extension_max_n {
        match note_incomplete(
            extension_property_check(rule, n, bounds.budget),
            "extension",
            &mut incomplete,
        )? {
            Some(verdict) if verdict.status == Status::Certified => {
                extension_property_n = Some(n);
                break;
            }
            Some(_) => {}
            None => break,
        }
    }

    if permutive && (orphan_depth.is_some() || diamond_size.is_some()) {
        return Err(Error::Invariant(
            "a permutive rule produced an orphan or a diamond".into(),
        ));
    }

    Ok(ClassificationRow {
        rule_key: rule.rule_key(),
        permutive,
        orphan_depth,
        balanced_up_to,
        diamond_size,
        right_closing_n,
        extension_property_n,
        incomplete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TreeGeometry;
    use crate::rule::RuleFamily;

    fn builtin(family: &RuleFamily) -> LocalRule {
        LocalRule::builtin(TreeGeometry::new(2).unwrap(), 2, 1, family).unwrap()
    }

    #[test]
    fn xor_children_row_shows_a_diamond_but_no_orphan() {
        let row = classify(&builtin(&RuleFamily::XorChildren), &ClassifyBounds::default())
            .unwrap();
        assert!(!row.permutive);
        assert_eq!(row.orphan_depth, None);
        assert_eq!(row.balanced_up_to, 2);
        assert_eq!(row.diamond_size, Some(5));
        assert_eq!(row.right_closing_n, None);
        assert_eq!(row.extension_property_n, None);
        assert!(row.incomplete.is_empty());
    }

    #[test]
    fn or_all_row_shows_both_failure_witnesses() {
        let row = classify(&builtin(&RuleFamily::OrAll), &ClassifyBounds::default()).unwrap();
        assert!(!row.permutive);
        assert_eq!(row.orphan_depth, Some(3));
        assert_eq!(row.balanced_up_to, 0);
        assert_eq!(row.diamond_size, Some(5));
        assert_eq!(row.right_closing_n, None);
        assert_eq!(row.extension_property_n, None);
    }

    #[test]
    fn identity_row_is_clean_and_closing() {
        let row = classify(&builtin(&RuleFamily::Identity), &ClassifyBounds::default()).unwrap();
        assert!(row.permutive);
        assert_eq!(row.orphan_depth, None);
        assert_eq!(row.balanced_up_to, 2);
        assert_eq!(row.diamond_size, None);
        assert_eq!(row.right_closing_n, Some(2));
        assert_eq!(row.extension_property_n, Some(1));
        assert!(row.incomplete.is_empty());
        assert_eq!(
            row.record_line(),
            "rule=15 permutive=true orphan_depth=- balanced_up_to=2 diamond_size=- \
             right_closing_n=2 extension_property_n=1 incomplete=-"
        );
    }

    #[test]
    fn starved_budget_marks_analyses_incomplete() {
        let bounds = ClassifyBounds { budget: 4, ..ClassifyBounds::default() };
        let row = classify(&builtin(&RuleFamily::OrAll), &bounds).unwrap();
        assert!(row.incomplete.contains(&"orphan".to_string()));
        assert!(row.incomplete.contains(&"diamond".to_string()));
    }
}
