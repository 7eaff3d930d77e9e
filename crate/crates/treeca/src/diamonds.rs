//! Diamonds: distinct same-shape blocks with a shared boundary and a shared
//! image. A rule with no diamonds is preinjective; finding one refutes it.
//!
//! A size-n diamond's members agree on the root block Delta_r and on the
//! depth-r block under every node at level n-r, so those cells are pinned
//! and only the interior is enumerated. Candidates are bucketed by image;
//! any bucket with two members is a diamond. The strict mode enforces the
//! size bound n > 2r+2; relaxed mode allows any n > r for exploration.

use std::collections::HashMap;

use crate::dynamics::{apply, for_each_pinned, preimage_enumerate, WorkBudget};
use crate::error::{Error, Result};
use crate::pattern::{colex_advance, colex_cmp, Letter, Pattern};
use crate::rule::LocalRule;
use crate::verdict::{DiamondPair, Status, Verdict, Witness};

/// Indices pinned by a boundary block: cell vw for every level-(n-r) node v
/// and every w in Delta_r, using index(vw) = k^|w| * index(v) + index(w),
/// plus the root copy on Delta_r itself.
fn boundary_pins(
    rule: &LocalRule,
    size: usize,
    boundary: &[Letter],
) -> Vec<Option<Letter>> {
    let geometry = rule.geometry();
    let k = geometry.arity();
    let r = rule.radius();
    let mut pins = vec![None; geometry.delta_size(size)];
    for (jw, &letter) in boundary.iter().enumerate() {
        pins[jw] = Some(letter);
    }
    for iv in geometry.level_range(size - r) {
        for (jw, &letter) in boundary.iter().enumerate() {
            let width = k.pow(geometry.level_of_index(jw) as u32);
            pins[width * iv + jw] = Some(letter);
        }
    }
    pins
}

/// None if the pair is a genuine diamond, otherwise the first failed check.
pub fn diamond_defect(
    rule: &LocalRule,
    pair: &DiamondPair,
    paper_strict: bool,
) -> Result<Option<String>> {
    for p in [&pair.first, &pair.second] {
        if p.geometry() != rule.geometry() || p.alphabet_size() != rule.alphabet_size() {
            return Err(Error::Shape(
                "diamond block does not match the rule's geometry or alphabet".into(),
            ));
        }
    }
    let r = rule.radius();
    let n = pair.first.depth();
    if pair.second.depth() != n {
        return Ok(Some("blocks have different sizes".into()));
    }
    if n <= r {
        return Ok(Some(format!("size {n} leaves no image under radius {r}")));
    }
    if paper_strict && n <= 2 * r + 2 {
        return Ok(Some(format!("size {n} needs to exceed {}", 2 * r + 2)));
    }
    if pair.first == pair.second {
        return Ok(Some("blocks are identical".into()));
    }
    let boundary = &pair.first.letters()[..rule.geometry().delta_size(r)];
    let pins = boundary_pins(rule, n, boundary);
    for (name, block) in [("first", &pair.first), ("second", &pair.second)] {
        for (i, pin) in pins.iter().enumerate() {
            if let Some(want) = pin {
                if block.letters()[i] != *want {
                    return Ok(Some(format!("{name} block disagrees with the boundary")));
                }
            }
        }
    }
    if apply(rule, &pair.first)? != apply(rule, &pair.second)? {
        return Ok(Some("images differ".into()));
    }
    Ok(None)
}

/// Image letters mapped to the first two blocks (in arrival order) sharing it.
type CollisionBuckets = HashMap<Vec<Letter>, (Vec<Letter>, Option<Vec<Letter>>)>;

fn collect_min_pair(
    rule: &LocalRule,
    size: usize,
    pins: &[Option<Letter>],
    work: &mut WorkBudget,
) -> Result<Option<DiamondPair>> {
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    let mut buckets: CollisionBuckets = HashMap::new();
    for_each_pinned(geometry, a, size, pins, work, &mut |letters| {
        let candidate = Pattern::new(geometry, a, size, letters.to_vec())?;
        let image = apply(rule, &candidate)?;
        match buckets.get_mut(image.letters()) {
            None => {
                buckets.insert(image.letters().to_vec(), (letters.to_vec(), None));
            }
            Some((_, second @ None)) => *second = Some(letters.to_vec()),
            Some(_) => {}
        }
        Ok(true)
    })?;
    // Candidates arrive in ascending colex order, so each bucket holds its
    // two smallest members and the best pair is the one with the least first.
    let best = buckets
        .into_values()
        .filter_map(|(first, second)| second.map(|s| (first, s)))
        .min_by(|x, y| colex_cmp(&x.0, &y.0));
    Ok(best.map(|(first, second)| DiamondPair {
        first: Pattern::new(geometry, a, size, first).expect("pinned search yields valid letters"),
        second: Pattern::new(geometry, a, size, second)
            .expect("pinned search yields valid letters"),
    }))
}

/// Look for a size-`size` diamond, trying boundary blocks in ascending
/// colex order; within a boundary the pair with the smallest members wins.
pub fn diamond_search(
    rule: &LocalRule,
    size: usize,
    paper_strict: bool,
    budget: u64,
) -> Result<Verdict> {
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    let r = rule.radius();
    if size <= r || (paper_strict && size <= 2 * r + 2) {
        return Err(Error::Shape(format!(
            "diamond size {size} is too small (needs > {})",
            if paper_strict { 2 * r + 2 } else { r }
        )));
    }
    if a == 1 {
        return Ok(Verdict::new(Status::BoundedEvidence)
            .with_bound(size as u64)
            .with_detail("note", "degenerate-alphabet"));
    }
    let mut work = WorkBudget::new(budget);
    let mut boundary = vec![0 as Letter; geometry.delta_size(r)];
    loop {
        let pins = boundary_pins(rule, size, &boundary);
        if let Some(pair) = collect_min_pair(rule, size, &pins, &mut work)? {
            if let Some(defect) = diamond_defect(rule, &pair, paper_strict)? {
                return Err(Error::Invariant(format!("search produced a bad diamond: {defect}")));
            }
            let boundary_text =
                Pattern::new(geometry, a, r, boundary.clone())?.text();
            return Ok(Verdict::new(Status::Refuted)
                .with_bound(size as u64)
                .with_witness(Witness::Diamond(pair))
                .with_detail("boundary", boundary_text)
                .with_detail("size", size));
        }
        if !colex_advance(&mut boundary, a) {
            return Ok(Verdict::new(Status::BoundedEvidence).with_bound(size as u64));
        }
    }
}

/// Myhill-style construction: an over-mean block's preimage tiles, stacked
/// in layers with a fixed top and bottom, give more composites than images,
/// so two composites collide; padding the colliding pair with r more levels
/// of the fixed tile turns it into a verified diamond.
pub fn myhill_collision_search(
    rule: &LocalRule,
    block: &Pattern,
    m_max: usize,
    budget: u64,
) -> Result<Verdict> {
    if m_max < 1 {
        return Err(Error::Shape("layer count must be at least 1".into()));
    }
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    let r = rule.radius();
    let n = block.depth();
    let s = n + r;

    let preimages = preimage_enumerate(rule, block, budget)?;
    let spread = geometry.delta_size(s) - geometry.delta_size(n);
    let mean = (a as u64).pow(spread as u32);
    let found = preimages.len() as u64;
    if found <= mean {
        return Err(Error::NotOverMean(found, mean));
    }
    let anchor = &preimages[0];

    let mut work = WorkBudget::new(budget);
    for m in 1..=m_max {
        let depth = s * (m + 2);
        let mut template = vec![0 as Letter; geometry.delta_size(depth)];
        let mut slots: Vec<usize> = Vec::new();
        for layer in 0..=m + 1 {
            for iv in geometry.level_range(layer * s) {
                if layer == 0 || layer == m + 1 {
                    write_tile(geometry, &mut template, iv, anchor);
                } else {
                    slots.push(iv);
                }
            }
        }
        work.charge_big((found as u128).checked_pow(slots.len() as u32).unwrap_or(u128::MAX))?;

        let mut buckets: HashMap<Vec<Letter>, Vec<Vec<Letter>>> = HashMap::new();
        let mut choice = vec![0usize; slots.len()];
        loop {
            for (slot, &c) in slots.iter().zip(&choice) {
                write_tile(geometry, &mut template, *slot, &preimages[c]);
            }
            let composite = Pattern::new(geometry, a, depth, template.clone())?;
            let image = apply(rule, &composite)?;
            let members = buckets.entry(image.letters().to_vec()).or_default();
            insert_two_smallest(members, template.clone());

            let mut advanced = false;
            for c in choice.iter_mut() {
                *c += 1;
                if *c < preimages.len() {
                    advanced = true;
                    break;
                }
                *c = 0;
            }
            if !advanced {
                break;
            }
        }

        let best = buckets
            .into_values()
            .filter(|members| members.len() == 2)
            .min_by(|x, y| colex_cmp(&x[0], &y[0]));
        if let Some(members) = best {
            let pair = DiamondPair {
                first: pad_with_anchor(geometry, a, &members[0], depth, anchor, r)?,
                second: pad_with_anchor(geometry, a, &members[1], depth, anchor, r)?,
            };
            if let Some(defect) = diamond_defect(rule, &pair, true)? {
                return Err(Error::Invariant(format!(
                    "tiling produced a bad diamond: {defect}"
                )));
            }
            return Ok(Verdict::new(Status::Refuted)
                .with_bound((depth + r) as u64)
                .with_witness(Witness::Diamond(pair))
                .with_detail("block", block.text())
                .with_detail("layers", m)
                .with_detail("preimages", found)
                .with_detail("mean", mean));
        }
    }
    Ok(Verdict::new(Status::BoundedEvidence)
        .with_bound(m_max as u64)
        .with_detail("block", block.text())
        .with_detail("preimages", found)
        .with_detail("mean", mean))
}

/// Copy a tile onto the subtree rooted at node index `iv`.
fn write_tile(
    geometry: crate::geometry::TreeGeometry,
    letters: &mut [Letter],
    iv: usize,
    tile: &Pattern,
) {
    let k = geometry.arity();
    let mut width = 1usize;
    let mut offset = 0usize;
    for level in 0..tile.depth() {
        let start = width * iv + offset;
        letters[start..start + width].copy_from_slice(tile.level_slice(level));
        offset += width;
        width *= k;
    }
}

fn insert_two_smallest(members: &mut Vec<Vec<Letter>>, candidate: Vec<Letter>) {
    members.push(candidate);
    members.sort_by(|x, y| colex_cmp(x, y));
    members.truncate(2);
}

/// Extend a composite by r levels that repeat the anchor tile's top block,
/// making the deepest boundary copies equal the root one.
fn pad_with_anchor(
    geometry: crate::geometry::TreeGeometry,
    alphabet_size: usize,
    letters: &[Letter],
    depth: usize,
    anchor: &Pattern,
    r: usize,
) -> Result<Pattern> {
    let mut padded = letters.to_vec();
    let copies = geometry.level_len(depth);
    for level in 0..r {
        for _ in 0..copies {
            padded.extend_from_slice(anchor.level_slice(level));
        }
    }
    Pattern::new(geometry, alphabet_size, depth + r, padded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TreeGeometry;
    use crate::rule::RuleFamily;

    fn geo(k: usize) -> TreeGeometry {
        TreeGeometry::new(k).unwrap()
    }

    fn builtin(family: &RuleFamily) -> LocalRule {
        LocalRule::builtin(geo(2), 2, 1, family).unwrap()
    }

    fn pat(text: &str) -> Pattern {
        Pattern::parse(geo(2), 2, text).unwrap()
    }

    fn zeros_except(ones: &[usize]) -> Pattern {
        let mut letters = vec![0 as Letter; 31];
        for &i in ones {
            letters[i] = 1;
        }
        Pattern::new(geo(2), 2, 5, letters).unwrap()
    }

    #[test]
    fn boundary_pins_cover_root_and_leaf_copies() {
        let rule = builtin(&RuleFamily::OrAll);
        let pins = boundary_pins(&rule, 5, &[1]);
        assert_eq!(pins[0], Some(1));
        assert!(pins[1..15].iter().all(|pin| pin.is_none()));
        assert!(pins[15..31].iter().all(|&pin| pin == Some(1)));
    }

    #[test]
    fn xor_children_has_the_all_zero_diamond() {
        let verdict =
            diamond_search(&builtin(&RuleFamily::XorChildren), 5, true, 1 << 26).unwrap();
        assert_eq!(verdict.status, Status::Refuted);
        assert_eq!(verdict.bound, Some(5));
        let expected = DiamondPair {
            first: zeros_except(&[]),
            second: zeros_except(&[1, 2]),
        };
        assert_eq!(verdict.witness, Some(Witness::Diamond(expected)));
    }

    #[test]
    fn or_all_diamond_is_the_smallest_collision() {
        let verdict = diamond_search(&builtin(&RuleFamily::OrAll), 5, true, 1 << 26).unwrap();
        assert_eq!(verdict.status, Status::Refuted);
        let expected = DiamondPair {
            first: zeros_except(&[2, 3]),
            second: zeros_except(&[1, 2, 3]),
        };
        assert_eq!(verdict.witness, Some(Witness::Diamond(expected)));
    }

    #[test]
    fn or_all_search_matches_a_blind_oracle() {
        // Independent check: enumerate both boundaries blind, bucket by
        // image, and take the globally smallest colliding pair.
        let rule = builtin(&RuleFamily::OrAll);
        let mut best: Option<(Vec<Letter>, Vec<Letter>)> = None;
        for boundary in 0..2u8 {
            let mut buckets: HashMap<Vec<Letter>, Vec<Letter>> = HashMap::new();
            let mut work = WorkBudget::new(1 << 26);
            let pins = boundary_pins(&rule, 5, &[boundary]);
            for_each_pinned(geo(2), 2, 5, &pins, &mut work, &mut |letters| {
                let g = Pattern::new(geo(2), 2, 5, letters.to_vec())?;
                let image = apply(&rule, &g)?;
                if let Some(first) = buckets.get(image.letters()) {
                    let candidate = (first.clone(), letters.to_vec());
                    let better = best
                        .as_ref()
                        .map(|b| colex_cmp(&candidate.0, &b.0).is_lt())
                        .unwrap_or(true);
                    if better {
                        best = Some(candidate);
                    }
                } else {
                    buckets.insert(image.letters().to_vec(), letters.to_vec());
                }
                Ok(true)
            })
            .unwrap();
        }
        let (first, second) = best.unwrap();
        let verdict = diamond_search(&rule, 5, true, 1 << 26).unwrap();
        let expected = DiamondPair {
            first: Pattern::new(geo(2), 2, 5, first).unwrap(),
            second: Pattern::new(geo(2), 2, 5, second).unwrap(),
        };
        assert_eq!(verdict.witness, Some(Witness::Diamond(expected)));
    }

    #[test]
    fn injective_truncation_rules_have_no_size_five_diamond() {
        for family in [RuleFamily::Identity, RuleFamily::XorAll] {
            let verdict = diamond_search(&builtin(&family), 5, true, 1 << 26).unwrap();
            assert_eq!(verdict.status, Status::BoundedEvidence, "{}", family.name());
            assert_eq!(verdict.bound, Some(5));
        }
    }

    #[test]
    fn defect_reporting_catches_each_broken_invariant() {
        let rule = builtin(&RuleFamily::XorChildren);
        let good = DiamondPair { first: zeros_except(&[]), second: zeros_except(&[1, 2]) };
        assert_eq!(diamond_defect(&rule, &good, true).unwrap(), None);

        let identical = DiamondPair { first: zeros_except(&[]), second: zeros_except(&[]) };
        assert!(diamond_defect(&rule, &identical, true).unwrap().is_some());

        let boundary_break =
            DiamondPair { first: zeros_except(&[]), second: zeros_except(&[0, 1, 2]) };
        assert!(diamond_defect(&rule, &boundary_break, true).unwrap().is_some());

        let image_break = DiamondPair { first: zeros_except(&[]), second: zeros_except(&[1]) };
        assert!(diamond_defect(&rule, &image_break, true).unwrap().is_some());

        let small = DiamondPair {
            first: pat("0000000"),
            second: pat("0110000"),
        };
        assert!(diamond_defect(&rule, &small, true).unwrap().is_some());
        assert_eq!(diamond_defect(&rule, &small, false).unwrap(), None);
    }

    #[test]
    fn strict_mode_rejects_small_sizes_up_front() {
        let rule = builtin(&RuleFamily::XorChildren);
        assert!(matches!(diamond_search(&rule, 4, true, 1 << 26), Err(Error::Shape(_))));
        let relaxed = diamond_search(&rule, 3, false, 1 << 26).unwrap();
        assert_eq!(relaxed.status, Status::Refuted);
        let pair = match relaxed.witness {
            Some(Witness::Diamond(d)) => d,
            other => panic!("expected diamond, got {other:?}"),
        };
        assert_eq!((pair.first, pair.second), (pat("0000000"), pat("0110000")));
    }

    #[test]
    fn over_mean_tiling_returns_a_verified_diamond() {
        let rule = builtin(&RuleFamily::OrAll);
        let verdict = myhill_collision_search(&rule, &pat("1"), 2, 1 << 26).unwrap();
        assert_eq!(verdict.status, Status::Refuted);
        assert_eq!(verdict.bound, Some(7));
        let pair = match verdict.witness {
            Some(Witness::Diamond(d)) => d,
            other => panic!("expected diamond, got {other:?}"),
        };
        assert_eq!(pair.size(), 7);
        assert_eq!(diamond_defect(&rule, &pair, true).unwrap(), None);
        assert!(verdict.detail.iter().any(|(k, v)| k == "preimages" && v == "7"));
        assert!(verdict.detail.iter().any(|(k, v)| k == "mean" && v == "4"));
    }

    #[test]
    fn tiling_needs_an_over_mean_block() {
        let xor_all = builtin(&RuleFamily::XorAll);
        assert!(matches!(
            myhill_collision_search(&xor_all, &pat("0"), 2, 1 << 26),
            Err(Error::NotOverMean(4, 4))
        ));
        let id = builtin(&RuleFamily::Identity);
        assert!(matches!(
            myhill_collision_search(&id, &pat("1"), 2, 1 << 26),
            Err(Error::NotOverMean(4, 4))
        ));
    }
}
