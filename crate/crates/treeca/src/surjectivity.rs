//! Surjectivity evidence: orphan blocks and preimage-count balance.
//!
//! A block with no preimage refutes surjectivity; absence of orphans up to a
//! depth is only bounded evidence. For radius-1 rules the per-level image
//! sets are built incrementally: a depth-(n+1) image block is a root letter
//! grafted onto k depth-n image blocks, and the root letter is exactly
//! mu(a, roots of chosen preimages), so carrying each image block's set of
//! feasible preimage roots makes the recursion exact without enumerating
//! ever-deeper inputs.

use std::collections::HashMap;

use crate::dynamics::{apply, WorkBudget};
use crate::error::{Error, Result};
use crate::pattern::{all_patterns, Letter, Pattern};
use crate::rule::LocalRule;
use crate::verdict::{Status, Verdict, Witness};

/// Exact preimage-count summary for one block size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceReport {
    pub level: usize,
    /// The mean preimage count |A|^(delta_size(n+r) - delta_size(n)).
    pub expected: u64,
    pub min_count: u64,
    pub max_count: u64,
    /// Smallest block with more preimages than the mean.
    pub over_witness: Option<Pattern>,
    /// Smallest block with no preimage.
    pub orphan: Option<Pattern>,
}

fn colex_value(letters: &[Letter], alphabet_size: usize) -> u64 {
    let mut value = 0u64;
    for &l in letters.iter().rev() {
        value = value * alphabet_size as u64 + l as u64;
    }
    value
}

fn letters_of_value(mut value: u64, alphabet_size: usize, cells: usize) -> Vec<Letter> {
    let mut letters = Vec::with_capacity(cells);
    for _ in 0..cells {
        letters.push((value % alphabet_size as u64) as Letter);
        value /= alphabet_size as u64;
    }
    letters
}

fn first_missing(present: &[bool]) -> Option<u64> {
    present.iter().position(|&p| !p).map(|i| i as u64)
}

/// Image set at one level via full input enumeration, as a presence table
/// indexed by colex value.
fn image_table_enumerated(
    rule: &LocalRule,
    depth: usize,
    work: &mut WorkBudget,
) -> Result<Vec<bool>> {
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    work.charge_big(WorkBudget::pattern_space(geometry, a, depth + rule.radius()))?;
    work.charge_big(WorkBudget::pattern_space(geometry, a, depth))?;
    let mut present = vec![false; (a as u64).pow(geometry.delta_size(depth) as u32) as usize];
    for input in all_patterns(geometry, a, depth + rule.radius()) {
        let image = apply(rule, &input)?;
        present[colex_value(image.letters(), a) as usize] = true;
    }
    Ok(present)
}

/// Depth-n image blocks of a radius-1 rule, each with the set of input root
/// letters its preimages can carry.
type Frontier = HashMap<Vec<Letter>, Vec<bool>>;

fn frontier_level_one(rule: &LocalRule, work: &mut WorkBudget) -> Result<Frontier> {
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    work.charge_big(WorkBudget::pattern_space(geometry, a, 2))?;
    let mut frontier = Frontier::new();
    for neighborhood in all_patterns(geometry, a, 2) {
        let image = rule.lookup_letters(neighborhood.letters());
        let roots = frontier.entry(vec![image]).or_insert_with(|| vec![false; a]);
        roots[neighborhood.letters()[0] as usize] = true;
    }
    Ok(frontier)
}

/// One level of the image-set recursion: every combination of k child image
/// blocks, feasible child roots, and a free input root letter yields a
/// deeper image block.
fn frontier_step(rule: &LocalRule, prev: &Frontier, work: &mut WorkBudget) -> Result<Frontier> {
    let geometry = rule.geometry();
    let k = geometry.arity();
    let a = rule.alphabet_size();
    let entries: Vec<(&Vec<Letter>, &Vec<bool>)> = prev.iter().collect();
    let depth = 1 + {
        let cells = entries[0].0.len();
        (1..).find(|&n| geometry.delta_size(n) == cells).expect("frontier holds valid blocks")
    };

    // Every entry has at least one feasible root, so the lists are nonempty.
    let feasible: Vec<Vec<Letter>> = entries
        .iter()
        .map(|(_, mask)| {
            (0..a).filter(|&l| mask[l]).map(|l| l as Letter).collect::<Vec<Letter>>()
        })
        .collect();

    let mut next = Frontier::new();
    let mut combo = vec![0usize; k];
    let mut root_idx = vec![0usize; k];
    let mut neighborhood = vec![0 as Letter; 1 + k];
    loop {
        root_idx.iter_mut().for_each(|i| *i = 0);
        loop {
            for i in 0..k {
                neighborhood[1 + i] = feasible[combo[i]][root_idx[i]];
            }
            for input_root in 0..a {
                work.charge(1)?;
                neighborhood[0] = input_root as Letter;
                let b = rule.lookup_letters(&neighborhood);
                let mut letters = Vec::with_capacity(geometry.delta_size(depth));
                letters.push(b);
                for level in 0..depth - 1 {
                    for i in 0..k {
                        let child = entries[combo[i]].0;
                        letters.extend_from_slice(&child[geometry.level_range(level)]);
                    }
                }
                let roots = next.entry(letters).or_insert_with(|| vec![false; a]);
                roots[input_root] = true;
            }
            let mut advanced = false;
            for i in 0..k {
                root_idx[i] += 1;
                if root_idx[i] < feasible[combo[i]].len() {
                    advanced = true;
                    break;
                }
                root_idx[i] = 0;
            }
            if !advanced {
                break;
            }
        }
        let mut advanced = false;
        for slot in combo.iter_mut() {
            *slot += 1;
            if *slot < entries.len() {
                advanced = true;
                break;
            }
            *slot = 0;
        }
        if !advanced {
            return Ok(next);
        }
    }
}

fn frontier_table(
    rule: &LocalRule,
    frontier: &Frontier,
    depth: usize,
    work: &mut WorkBudget,
) -> Result<Vec<bool>> {
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    work.charge_big(WorkBudget::pattern_space(geometry, a, depth))?;
    let mut present = vec![false; (a as u64).pow(geometry.delta_size(depth) as u32) as usize];
    for letters in frontier.keys() {
        present[colex_value(letters, a) as usize] = true;
    }
    Ok(present)
}

/// Search levels 1..=n_max for a block with empty preimage. Refuted carries
/// the smallest orphan; otherwise bounded evidence for surjectivity.
pub fn orphan_search(rule: &LocalRule, n_max: usize, budget: u64) -> Result<Verdict> {
    if n_max < 1 {
        return Err(Error::InvalidDepth(n_max));
    }
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    if a == 1 {
        return Ok(Verdict::new(Status::BoundedEvidence)
            .with_bound(n_max as u64)
            .with_detail("note", "degenerate-alphabet"));
    }
    let mut work = WorkBudget::new(budget);
    let mut frontier: Option<Frontier> = None;
    for n in 1..=n_max {
        let present = if rule.radius() == 1 {
            let next = match frontier.take() {
                None => frontier_level_one(rule, &mut work)?,
                Some(prev) => frontier_step(rule, &prev, &mut work)?,
            };
            let table = frontier_table(rule, &next, n, &mut work)?;
            frontier = Some(next);
            table
        } else {
            image_table_enumerated(rule, n, &mut work)?
        };
        if let Some(value) = first_missing(&present) {
            let letters = letters_of_value(value, a, geometry.delta_size(n));
            let orphan = Pattern::new(geometry, a, n, letters)?;
            return Ok(Verdict::new(Status::Refuted)
                .with_bound(n as u64)
                .with_witness(Witness::Block(orphan))
                .with_detail("depth", n));
        }
    }
    Ok(Verdict::new(Status::BoundedEvidence).with_bound(n_max as u64))
}

/// Exact preimage counts for every block at one level.
pub fn balance_report(rule: &LocalRule, level: usize, budget: u64) -> Result<BalanceReport> {
    if level < 1 {
        return Err(Error::InvalidDepth(level));
    }
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    let mut work = WorkBudget::new(budget);
    work.charge_big(WorkBudget::pattern_space(geometry, a, level + rule.radius()))?;
    work.charge_big(WorkBudget::pattern_space(geometry, a, level))?;

    let blocks = (a as u64).pow(geometry.delta_size(level) as u32) as usize;
    let mut counts = vec![0u64; blocks];
    for input in all_patterns(geometry, a, level + rule.radius()) {
        let image = apply(rule, &input)?;
        counts[colex_value(image.letters(), a) as usize] += 1;
    }

    let spread = geometry.delta_size(level + rule.radius()) - geometry.delta_size(level);
    let expected = (a as u64).pow(spread as u32);
    let cells = geometry.delta_size(level);
    let block_of = |value: usize| {
        Pattern::new(geometry, a, level, letters_of_value(value as u64, a, cells))
            .expect("counts index is a valid block")
    };
    Ok(BalanceReport {
        level,
        expected,
        min_count: counts.iter().copied().min().unwrap_or(0),
        max_count: counts.iter().copied().max().unwrap_or(0),
        over_witness: counts.iter().position(|&c| c > expected).map(block_of),
        orphan: counts.iter().position(|&c| c == 0).map(block_of),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TreeGeometry;
    use crate::rule::{enumerate_rules, RuleFamily};

    fn geo(k: usize) -> TreeGeometry {
        TreeGeometry::new(k).unwrap()
    }

    fn builtin(family: &RuleFamily) -> LocalRule {
        LocalRule::builtin(geo(2), 2, 1, family).unwrap()
    }

    fn pat(text: &str) -> Pattern {
        Pattern::parse(geo(2), 2, text).unwrap()
    }

    #[test]
    fn orphan_verdicts_on_named_rules() {
        let or = orphan_search(&builtin(&RuleFamily::OrAll), 3, 1 << 26).unwrap();
        assert_eq!(or.status, Status::Refuted);
        assert_eq!(or.bound, Some(3));
        assert_eq!(or.witness, Some(Witness::Block(pat("0100000"))));

        let xor = orphan_search(&builtin(&RuleFamily::XorChildren), 3, 1 << 26).unwrap();
        assert_eq!(xor.status, Status::BoundedEvidence);
        assert_eq!(xor.bound, Some(3));

        let id = orphan_search(&builtin(&RuleFamily::Identity), 4, 1 << 26).unwrap();
        assert_eq!(id.status, Status::BoundedEvidence);
        assert_eq!(id.bound, Some(4));
    }

    #[test]
    fn incremental_image_sets_match_enumeration() {
        let mut scratch = WorkBudget::new(1 << 26);
        for rule in enumerate_rules(geo(2), 2, 1, 1 << 26).unwrap() {
            let one = frontier_level_one(&rule, &mut scratch).unwrap();
            let two = frontier_step(&rule, &one, &mut scratch).unwrap();
            let fast1 = frontier_table(&rule, &one, 1, &mut scratch).unwrap();
            let fast2 = frontier_table(&rule, &two, 2, &mut scratch).unwrap();
            assert_eq!(fast1, image_table_enumerated(&rule, 1, &mut scratch).unwrap());
            assert_eq!(fast2, image_table_enumerated(&rule, 2, &mut scratch).unwrap());
        }
        for family in [RuleFamily::OrAll, RuleFamily::XorChildren, RuleFamily::Identity] {
            let rule = builtin(&family);
            let mut work = WorkBudget::new(1 << 26);
            let f1 = frontier_level_one(&rule, &mut work).unwrap();
            let f2 = frontier_step(&rule, &f1, &mut work).unwrap();
            let f3 = frontier_step(&rule, &f2, &mut work).unwrap();
            let fast = frontier_table(&rule, &f3, 3, &mut work).unwrap();
            let slow = image_table_enumerated(&rule, 3, &mut work).unwrap();
            assert_eq!(fast, slow, "{}", family.name());
        }
    }

    #[test]
    fn root_masks_carry_exact_preimage_roots() {
        // The level-2 frontier's root sets must match direct preimage scans.
        for rule in enumerate_rules(geo(2), 2, 1, 1 << 26).unwrap() {
            let mut work = WorkBudget::new(1 << 26);
            let f1 = frontier_level_one(&rule, &mut work).unwrap();
            let f2 = frontier_step(&rule, &f1, &mut work).unwrap();
            for (block, mask) in &f2 {
                let target = Pattern::new(geo(2), 2, 2, block.clone()).unwrap();
                for (root, &flag) in mask.iter().enumerate() {
                    let seen = all_patterns(geo(2), 2, 3)
                        .filter(|g| g.letters()[0] as usize == root)
                        .any(|g| apply(&rule, &g).unwrap() == target);
                    assert_eq!(flag, seen);
                }
            }
        }
    }

    #[test]
    fn balance_on_named_rules() {
        let or = balance_report(&builtin(&RuleFamily::OrAll), 1, 1 << 26).unwrap();
        assert_eq!(
            or,
            BalanceReport {
                level: 1,
                expected: 4,
                min_count: 1,
                max_count: 7,
                over_witness: Some(pat("1")),
                orphan: None,
            }
        );
        for family in [RuleFamily::XorAll, RuleFamily::XorChildren, RuleFamily::Identity] {
            let report = balance_report(&builtin(&family), 1, 1 << 26).unwrap();
            assert_eq!((report.min_count, report.max_count), (4, 4), "{}", family.name());
            assert_eq!(report.expected, 4);
            assert!(report.over_witness.is_none() && report.orphan.is_none());
        }
    }

    #[test]
    fn balance_finds_the_same_depth_three_orphan() {
        // Independent enumeration path for the or-all orphan block.
        let report = balance_report(&builtin(&RuleFamily::OrAll), 3, 1 << 26).unwrap();
        assert_eq!(report.orphan, Some(pat("0100000")));
        assert_eq!(report.min_count, 0);
    }

    #[test]
    fn balance_obeys_the_partition_identity() {
        for rule in enumerate_rules(geo(2), 2, 1, 1 << 26).unwrap() {
            let r = balance_report(&rule, 1, 1 << 26).unwrap();
            assert!(r.min_count <= r.expected && r.expected <= r.max_count);
            assert_eq!(r.min_count < r.expected, r.max_count > r.expected);
            assert_eq!(r.orphan.is_some(), r.min_count == 0);
        }
    }

    #[test]
    fn shift_rule_on_unary_trees_is_balanced_and_orphan_free() {
        let shift = LocalRule::builtin(geo(1), 2, 1, &RuleFamily::FirstChild).unwrap();
        for level in 1..=5 {
            let r = balance_report(&shift, level, 1 << 26).unwrap();
            assert_eq!((r.min_count, r.max_count), (r.expected, r.expected));
        }
        let verdict = orphan_search(&shift, 5, 1 << 26).unwrap();
        assert_eq!(verdict.status, Status::BoundedEvidence);
    }

    #[test]
    fn degenerate_alphabet_short_circuits() {
        let one = LocalRule::builtin(geo(2), 1, 1, &RuleFamily::Identity).unwrap();
        let verdict = orphan_search(&one, 3, 1 << 26).unwrap();
        assert_eq!(verdict.status, Status::BoundedEvidence);
        assert!(verdict.detail.iter().any(|(k, _)| k == "note"));
    }

    #[test]
    fn budget_refusal_reports_requirement() {
        let or = builtin(&RuleFamily::OrAll);
        assert!(matches!(balance_report(&or, 3, 100), Err(Error::Budget { .. })));
        // The identity never refutes, so a starved search must signal the
        // budget instead of an absent witness.
        let id = builtin(&RuleFamily::Identity);
        assert!(matches!(orphan_search(&id, 5, 4), Err(Error::Budget { .. })));
    }
}
