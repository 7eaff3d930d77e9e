//! Right-closing checks: a rule is right-closing at resolution N when a
//! window's root block together with its image pins down the next block of
//! the input, so preimages cannot fork below a known root.
//!
//! The check exhausts all inputs of depth rN+r in ascending colex order and
//! groups them by (root block, image). Members of one group must agree on
//! levels r..2r; the first disagreement against the group's colex-least
//! member is a violation, and the violation with the least such member is
//! reported. Certification is monotone in N, so the least certified N is
//! found by scanning upward.

use std::collections::HashMap;

use crate::dynamics::{apply, for_each_pinned, WorkBudget};
use crate::error::{Error, Result};
use crate::pattern::{colex_cmp, Letter, Pattern};
use crate::rule::LocalRule;
use crate::verdict::{Status, Verdict, Witness};

enum Group {
    Rep(Vec<Letter>),
    Violated,
}

pub(crate) fn right_closing_at_in(
    rule: &LocalRule,
    n: usize,
    work: &mut WorkBudget,
) -> Result<Verdict> {
    if n < 1 {
        return Err(Error::Shape("closing resolution must be at least 1".into()));
    }
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    let r = rule.radius();
    if a == 1 {
        return Ok(Verdict::new(Status::Certified)
            .with_bound(n as u64)
            .with_detail("note", "degenerate-alphabet"));
    }
    let input_depth = r * n + r;
    let ds_r = geometry.delta_size(r);
    let ds_2r = geometry.delta_size(2 * r);
    let pins = vec![None; geometry.delta_size(input_depth)];
    let mut groups: HashMap<(Vec<Letter>, Vec<Letter>), Group> = HashMap::new();
    let mut best: Option<(Vec<Letter>, Vec<Letter>)> = None;
    for_each_pinned(geometry, a, input_depth, &pins, work, &mut |letters| {
        let g = Pattern::new(geometry, a, input_depth, letters.to_vec())?;
        let image = apply(rule, &g)?;
        let key = (letters[..ds_r].to_vec(), image.letters().to_vec());
        match groups.get_mut(&key) {
            None => {
                groups.insert(key, Group::Rep(letters.to_vec()));
            }
            Some(Group::Rep(rep)) => {
                if rep[ds_r..ds_2r] != letters[ds_r..ds_2r] {
                    // Members arrive in ascending colex order, so this is
                    // the group's least violating pair.
                    let better = best
                        .as_ref()
                        .map(|(first, _)| colex_cmp(rep, first).is_lt())
                        .unwrap_or(true);
                    if better {
                        best = Some((rep.clone(), letters.to_vec()));
                    }
                    groups.insert(key, Group::Violated);
                }
            }
            Some(Group::Violated) => {}
        }
        Ok(true)
    })?;
    match best {
        Some((first, second)) => {
            let root = Pattern::new(geometry, a, r, first[..ds_r].to_vec())?.text();
            Ok(Verdict::new(Status::Refuted)
                .with_bound(n as u64)
                .with_witness(Witness::Pair {
                    first: Pattern::new(geometry, a, input_depth, first)?,
                    second: Pattern::new(geometry, a, input_depth, second)?,
                })
                .with_detail("root", root)
                .with_detail("window", input_depth))
        }
        None => Ok(Verdict::new(Status::Certified).with_bound(n as u64)),
    }
}

/// Decide right-closingness at resolution `n` within `budget`.
pub fn right_closing_at(rule: &LocalRule, n: usize, budget: u64) -> Result<Verdict> {
    right_closing_at_in(rule, n, &mut WorkBudget::new(budget))
}

/// Least resolution in 1..=`n_max` at which the rule certifies, sharing one
/// budget across the scan; bounded evidence if none certifies.
pub fn right_closing_min_n(rule: &LocalRule, n_max: usize, budget: u64) -> Result<Verdict> {
    if n_max < 1 {
        return Err(Error::Shape("closing resolution must be at least 1".into()));
    }
    let mut work = WorkBudget::new(budget);
    for n in 1..=n_max {
        let verdict = right_closing_at_in(rule, n, &mut work)?;
        if verdict.status == Status::Certified {
            return Ok(verdict);
        }
    }
    Ok(Verdict::new(Status::BoundedEvidence).with_bound(n_max as u64))
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

    fn witness_pair(verdict: &Verdict) -> (Pattern, Pattern) {
        match &verdict.witness {
            Some(Witness::Pair { first, second }) => (first.clone(), second.clone()),
            other => panic!("expected pair witness, got {other:?}"),
        }
    }

    #[test]
    fn identity_forks_at_one_and_certifies_at_two() {
        let rule = builtin(&RuleFamily::Identity);
        let at_one = right_closing_at(&rule, 1, 1 << 26).unwrap();
        assert_eq!(at_one.status, Status::Refuted);
        assert_eq!(witness_pair(&at_one), (pat("000"), pat("010")));
        assert!(at_one.detail.iter().any(|(k, v)| k == "root" && v == "0"));
        assert!(at_one.detail.iter().any(|(k, v)| k == "window" && v == "2"));

        let at_two = right_closing_at(&rule, 2, 1 << 26).unwrap();
        assert_eq!(at_two.status, Status::Certified);

        let least = right_closing_min_n(&rule, 3, 1 << 26).unwrap();
        assert_eq!(least.status, Status::Certified);
        assert_eq!(least.bound, Some(2));
    }

    #[test]
    fn xor_children_forks_at_every_tried_resolution() {
        let rule = builtin(&RuleFamily::XorChildren);
        let at_two = right_closing_at(&rule, 2, 1 << 26).unwrap();
        assert_eq!(at_two.status, Status::Refuted);
        assert_eq!(witness_pair(&at_two), (pat("0000000"), pat("0110000")));

        let least = right_closing_min_n(&rule, 3, 1 << 26).unwrap();
        assert_eq!(least.status, Status::BoundedEvidence);
        assert_eq!(least.bound, Some(3));
    }

    #[test]
    fn violations_share_root_and_image_but_differ_below() {
        for family in [RuleFamily::Identity, RuleFamily::XorChildren, RuleFamily::OrAll] {
            let rule = builtin(&family);
            let verdict = right_closing_at(&rule, 1, 1 << 26).unwrap();
            if verdict.status != Status::Refuted {
                continue;
            }
            let (first, second) = witness_pair(&verdict);
            assert_eq!(first.letters()[0], second.letters()[0]);
            assert_ne!(first.letters()[1..3], second.letters()[1..3]);
            assert_eq!(
                apply(&rule, &first).unwrap(),
                apply(&rule, &second).unwrap()
            );
        }
    }

    #[test]
    fn chain_shift_certifies_immediately() {
        let rule = LocalRule::builtin(geo(1), 2, 1, &RuleFamily::FirstChild).unwrap();
        let verdict = right_closing_min_n(&rule, 2, 1 << 26).unwrap();
        assert_eq!(verdict.status, Status::Certified);
        assert_eq!(verdict.bound, Some(1));
    }

    #[test]
    fn certification_is_monotone_in_resolution() {
        let mut certified_at_two = Vec::new();
        for rule in enumerate_rules(geo(2), 2, 1, 1 << 26).unwrap() {
            let one = right_closing_at(&rule, 1, 1 << 26).unwrap().status;
            let two = right_closing_at(&rule, 2, 1 << 26).unwrap().status;
            if one == Status::Certified {
                assert_eq!(two, Status::Certified, "rule {:?}", rule.table());
            }
            if two == Status::Certified {
                certified_at_two.push(rule);
            }
        }
        assert!(!certified_at_two.is_empty());
        for rule in certified_at_two {
            let three = right_closing_at(&rule, 3, 1 << 26).unwrap().status;
            assert_eq!(three, Status::Certified, "rule {:?}", rule.table());
        }
    }

    #[test]
    fn degenerate_alphabet_certifies_with_a_note() {
        let rule = LocalRule::from_table(geo(2), 1, 1, vec![0]).unwrap();
        let verdict = right_closing_at(&rule, 1, 1 << 26).unwrap();
        assert_eq!(verdict.status, Status::Certified);
        assert!(verdict.detail.iter().any(|(k, _)| k == "note"));
    }

    #[test]
    fn scan_refuses_to_exceed_the_budget() {
        let rule = builtin(&RuleFamily::OrAll);
        assert!(matches!(
            right_closing_at(&rule, 3, 1 << 10),
            Err(Error::Budget { .. })
        ));
    }
}
