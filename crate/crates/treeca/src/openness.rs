//! Openness probes built around the extension property: given a root letter
//! and a realizable image window, exactly one child tuple should extend the
//! root compatibly with any one-level-deeper window. Rules with that
//! property admit a deterministic preimage builder; rules without it leak
//! evidence of non-openness.

use std::collections::HashSet;

use crate::dynamics::{apply, for_each_pinned, realizable_in, WorkBudget};
use crate::error::{Error, Result};
use crate::pattern::{colex_advance, colex_cmp, Letter, Pattern};
use crate::rule::LocalRule;
use crate::verdict::{Status, Verdict, Witness};

fn require_unit_radius(rule: &LocalRule) -> Result<()> {
    if rule.radius() != 1 {
        return Err(Error::Unsupported(
            "extension checks support radius 1 only".into(),
        ));
    }
    Ok(())
}

/// Count the child tuples below `root` compatible with the depth-(n+1)
/// window `extended`; the first compatible tuple is returned alongside.
fn tuple_solutions(
    rule: &LocalRule,
    root: Letter,
    extended: &Pattern,
    work: &mut WorkBudget,
) -> Result<(u64, Option<Vec<Letter>>)> {
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    let mut tuple = vec![0 as Letter; geometry.arity()];
    let mut solutions = 0u64;
    let mut first = None;
    loop {
        let mut prefix_letters = vec![root];
        prefix_letters.extend_from_slice(&tuple);
        let prefix = Pattern::new(geometry, a, 2, prefix_letters)?;
        if realizable_in(rule, &prefix, extended, work)? {
            solutions += 1;
            if first.is_none() {
                first = Some(tuple.clone());
            }
        }
        if !colex_advance(&mut tuple, a) {
            break;
        }
    }
    Ok((solutions, first))
}

/// Check the extension property at resolution `n`: every realizable pair of
/// root letter and depth-n window must extend to each one-level-deeper
/// window through exactly one child tuple.
pub fn extension_property_check(rule: &LocalRule, n: usize, budget: u64) -> Result<Verdict> {
    if n < 1 {
        return Err(Error::Shape("extension resolution must be at least 1".into()));
    }
    require_unit_radius(rule)?;
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    if a == 1 {
        return Ok(Verdict::new(Status::Certified)
            .with_bound(n as u64)
            .with_detail("note", "degenerate-alphabet"));
    }
    let mut work = WorkBudget::new(budget);
    for root in 0..a as Letter {
        let root_pattern = Pattern::new(geometry, a, 1, vec![root])?;
        let mut q = vec![0 as Letter; geometry.delta_size(n)];
        loop {
            let window = Pattern::new(geometry, a, n, q.clone())?;
            if realizable_in(rule, &root_pattern, &window, &mut work)? {
                let mut b = vec![0 as Letter; geometry.level_len(n)];
                loop {
                    let mut deeper = q.clone();
                    deeper.extend_from_slice(&b);
                    let extended = Pattern::new(geometry, a, n + 1, deeper)?;
                    let (solutions, _) = tuple_solutions(rule, root, &extended, &mut work)?;
                    if solutions != 1 {
                        return Ok(Verdict::new(Status::Refuted)
                            .with_bound(n as u64)
                            .with_witness(Witness::Extension { root, image: extended, solutions })
                            .with_detail("solutions", solutions));
                    }
                    if !colex_advance(&mut b, a) {
                        break;
                    }
                }
            }
            if !colex_advance(&mut q, a) {
                break;
            }
        }
    }
    Ok(Verdict::new(Status::Certified).with_bound(n as u64))
}

/// Build the preimage of `target` selected by the extension property at
/// resolution `n`, starting from root letter `a`: each node's children are
/// the unique tuple compatible with the node's depth-(n+1) target window.
pub fn closing_preimage_build(
    rule: &LocalRule,
    n: usize,
    a: Letter,
    target: &Pattern,
    budget: u64,
) -> Result<Pattern> {
    if n < 1 {
        return Err(Error::Shape("extension resolution must be at least 1".into()));
    }
    require_unit_radius(rule)?;
    let geometry = rule.geometry();
    let k = geometry.arity();
    let alphabet = rule.alphabet_size();
    if target.geometry() != geometry || target.alphabet_size() != alphabet {
        return Err(Error::Shape(
            "target does not match the rule's geometry or alphabet".into(),
        ));
    }
    if (a as usize) >= alphabet {
        return Err(Error::InvalidLetter { letter: a as usize, alphabet });
    }
    if target.depth() <= n {
        return Err(Error::Shape(format!(
            "target depth {} must exceed the resolution {n}",
            target.depth()
        )));
    }
    let d = target.depth() - n;
    let mut work = WorkBudget::new(budget);
    let root_pattern = Pattern::new(geometry, alphabet, 1, vec![a])?;
    if !realizable_in(rule, &root_pattern, &target.restrict(n)?, &mut work)? {
        return Err(Error::NoWitness(format!(
            "root letter {a} cannot produce the target's depth-{n} window"
        )));
    }
    let mut letters = vec![0 as Letter; geometry.delta_size(d + 1)];
    letters[0] = a;
    for level in 0..d {
        for iv in geometry.level_range(level) {
            let window = target.subtree_at(iv, level).restrict(n + 1)?;
            let (solutions, tuple) = tuple_solutions(rule, letters[iv], &window, &mut work)?;
            if solutions != 1 {
                let node = if iv == 0 {
                    "root".to_string()
                } else {
                    geometry
                        .word_of_index(iv)
                        .iter()
                        .map(|digit| digit.to_string())
                        .collect()
                };
                return Err(Error::ExtensionFailure { node, solutions });
            }
            for (sigma, &letter) in tuple.expect("one solution was seen").iter().enumerate() {
                letters[k * iv + sigma + 1] = letter;
            }
        }
    }
    let built = Pattern::new(geometry, alphabet, d + 1, letters)?;
    if apply(rule, &built)? != target.restrict(d)? {
        return Err(Error::Invariant(
            "built preimage does not reproduce the target window".into(),
        ));
    }
    Ok(built)
}

/// Realizable depth-`depth` images, optionally with the input root pinned.
fn image_set(
    rule: &LocalRule,
    depth: usize,
    root: Option<Letter>,
    work: &mut WorkBudget,
) -> Result<HashSet<Vec<Letter>>> {
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    let input_depth = depth + rule.radius();
    let mut pins = vec![None; geometry.delta_size(input_depth)];
    pins[0] = root;
    let mut set = HashSet::new();
    for_each_pinned(geometry, a, input_depth, &pins, work, &mut |letters| {
        let g = Pattern::new(geometry, a, input_depth, letters.to_vec())?;
        set.insert(apply(rule, &g)?.letters().to_vec());
        Ok(true)
    })?;
    Ok(set)
}

/// Look for a depth-`m` image reachable from root `a` whose extensions to
/// depth `m_prime` are all unreachable from `a` while some other root
/// reaches one; such a pair witnesses that deepening the window can strand
/// a root, the failure behind non-openness.
pub fn non_openness_evidence(
    rule: &LocalRule,
    a: Letter,
    m: usize,
    m_prime: usize,
    budget: u64,
) -> Result<Verdict> {
    if m < 1 || m >= m_prime {
        return Err(Error::Shape(
            "depths must satisfy 1 <= m < m_prime".into(),
        ));
    }
    let geometry = rule.geometry();
    let alphabet = rule.alphabet_size();
    if (a as usize) >= alphabet {
        return Err(Error::InvalidLetter { letter: a as usize, alphabet });
    }
    if alphabet == 1 {
        return Ok(Verdict::new(Status::BoundedEvidence)
            .with_bound(m_prime as u64)
            .with_detail("note", "degenerate-alphabet"));
    }
    let mut work = WorkBudget::new(budget);
    let shallow_rooted = image_set(rule, m, Some(a), &mut work)?;
    let deep_rooted = image_set(rule, m_prime, Some(a), &mut work)?;
    let deep_any = image_set(rule, m_prime, None, &mut work)?;
    let mut candidates: Vec<&Vec<Letter>> = deep_any.iter().collect();
    candidates.sort_by(|x, y| colex_cmp(x, y));
    let prefix_len = geometry.delta_size(m);
    for q in candidates {
        if deep_rooted.contains(q.as_slice()) || !shallow_rooted.contains(&q[..prefix_len]) {
            continue;
        }
        let shallow = Pattern::new(geometry, alphabet, m, q[..prefix_len].to_vec())?;
        let deep = Pattern::new(geometry, alphabet, m_prime, q.clone())?;
        return Ok(Verdict::new(Status::Refuted)
            .with_bound(m_prime as u64)
            .with_witness(Witness::Pair { first: shallow, second: deep })
            .with_detail("root", a)
            .with_detail("m", m));
    }
    Ok(Verdict::new(Status::BoundedEvidence)
        .with_bound(m_prime as u64)
        .with_detail("shallow", shallow_rooted.len())
        .with_detail("deep", deep_rooted.len())
        .with_detail("total", deep_any.len()))
}
