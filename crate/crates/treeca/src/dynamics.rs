//! The global map on truncated configurations: application, iteration,
//! trajectory statistics, preimage search, and the realizability relation.
//!
//! Applying a radius-r rule to a depth-n pattern yields the depth n-r image
//! truncation: exactly the cells whose whole neighborhood is present. Every
//! enumeration charges an explicit work budget and fails loudly instead of
//! silently truncating; searches emit candidates in ascending colex order so
//! witness selection is deterministic.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geometry::TreeGeometry;
use crate::pattern::{all_patterns, Letter, Pattern};
use crate::rule::LocalRule;

/// Default work budget: evaluated candidates per operation.
pub const DEFAULT_BUDGET: u64 = 1 << 26;

/// Mutable work counter shared by the enumerations of one operation.
#[derive(Debug)]
pub(crate) struct WorkBudget {
    limit: u64,
    used: u64,
}

impl WorkBudget {
    pub(crate) fn new(limit: u64) -> Self {
        WorkBudget { limit, used: 0 }
    }

    pub(crate) fn charge(&mut self, units: u64) -> Result<()> {
        self.charge_big(units as u128)
    }

    /// Charge a step count known upfront; errors without doing the work.
    pub(crate) fn charge_big(&mut self, units: u128) -> Result<()> {
        let needed = self.used as u128 + units;
        if needed > self.limit as u128 {
            return Err(Error::Budget { required: needed.to_string(), budget: self.limit });
        }
        self.used = needed as u64;
        Ok(())
    }

    /// Size of the pattern space |A|^delta_size(depth), for upfront charges.
    pub(crate) fn pattern_space(
        geometry: TreeGeometry,
        alphabet_size: usize,
        depth: usize,
    ) -> u128 {
        let cells = geometry.delta_size(depth);
        (alphabet_size as u128).checked_pow(cells as u32).unwrap_or(u128::MAX)
    }
}

fn check_rule_pattern(rule: &LocalRule, p: &Pattern) -> Result<()> {
    if p.geometry() != rule.geometry() || p.alphabet_size() != rule.alphabet_size() {
        return Err(Error::Shape("pattern does not match the rule's geometry or alphabet".into()));
    }
    Ok(())
}

/// Table key of the neighborhood rooted at `root_index` inside a level-order
/// letter array: the base-|A| integer read root first, then per level.
#[inline]
pub(crate) fn neighborhood_key(rule: &LocalRule, letters: &[Letter], root_index: usize) -> usize {
    let k = rule.geometry().arity();
    let a = rule.alphabet_size();
    let mut key = 0usize;
    let mut width = 1usize;
    let mut offset = 0usize;
    for _ in 0..=rule.radius() {
        let start = width * root_index + offset;
        for &l in &letters[start..start + width] {
            key = key * a + l as usize;
        }
        offset += width;
        width *= k;
    }
    key
}

/// Image truncation of a pattern: depth n maps to depth n - r.
pub fn apply(rule: &LocalRule, input: &Pattern) -> Result<Pattern> {
    check_rule_pattern(rule, input)?;
    let r = rule.radius();
    if input.depth() <= r {
        return Err(Error::Shape(format!(
            "support exhausted: a depth-{} pattern has no image under a radius-{r} rule",
            input.depth()
        )));
    }
    let out_depth = input.depth() - r;
    let cells = rule.geometry().delta_size(out_depth);
    let table = rule.table();
    let mut out = Vec::with_capacity(cells);
    for v in 0..cells {
        out.push(table[neighborhood_key(rule, input.letters(), v)]);
    }
    Pattern::new(rule.geometry(), rule.alphabet_size(), out_depth, out)
}

/// t-fold application; depth shrinks by r per step.
pub fn iterate(rule: &LocalRule, input: &Pattern, steps: usize) -> Result<Pattern> {
    check_rule_pattern(rule, input)?;
    if steps > 0 && input.depth() <= steps * rule.radius() {
        return Err(Error::Shape(format!(
            "support exhausted: depth {} admits fewer than {steps} steps of a radius-{} rule",
            input.depth(),
            rule.radius()
        )));
    }
    let mut cur = input.clone();
    for _ in 0..steps {
        cur = apply(rule, &cur)?;
    }
    Ok(cur)
}

/// Counts of distinct windowed trajectories: counts[i] = |P(tau, depth, i+1)|.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryStats {
    pub depth: usize,
    pub steps: usize,
    pub counts: Vec<u64>,
}

impl TrajectoryStats {
    /// Finite entropy estimates ln|P(tau, depth, t)| / t for t = 1..=steps.
    pub fn entropy_estimates(&self) -> Vec<f64> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (c as f64).ln() / (i + 1) as f64)
            .collect()
    }

    pub fn report_lines(&self) -> Vec<String> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let t = i + 1;
                format!("t={t} count={c} h={:.6}", (c as f64).ln() / t as f64)
            })
            .collect()
    }
}

fn check_trajectory_args(depth: usize, steps: usize) -> Result<()> {
    if depth < 1 {
        return Err(Error::InvalidDepth(depth));
    }
    if steps < 1 {
        return Err(Error::Shape("trajectory needs at least one step".into()));
    }
    Ok(())
}

/// Exact |P(tau, depth, t)| for t = 1..=steps by enumerating every base
/// pattern of depth depth + (steps-1)*r.
pub fn trajectory_set(
    rule: &LocalRule,
    depth: usize,
    steps: usize,
    budget: u64,
) -> Result<TrajectoryStats> {
    check_trajectory_args(depth, steps)?;
    let base_depth = depth + (steps - 1) * rule.radius();
    let mut work = WorkBudget::new(budget);
    work.charge_big(WorkBudget::pattern_space(rule.geometry(), rule.alphabet_size(), base_depth))?;

    let mut seen: Vec<HashSet<Vec<Letter>>> = vec![HashSet::new(); steps];
    for base in all_patterns(rule.geometry(), rule.alphabet_size(), base_depth) {
        let mut tuple: Vec<Letter> = Vec::with_capacity(rule.geometry().delta_size(depth) * steps);
        let mut cur = base;
        for (i, step_seen) in seen.iter_mut().enumerate() {
            tuple.extend_from_slice(cur.restrict(depth)?.letters());
            step_seen.insert(tuple.clone());
            if i + 1 < steps {
                cur = apply(rule, &cur)?;
            }
        }
    }
    Ok(TrajectoryStats {
        depth,
        steps,
        counts: seen.iter().map(|s| s.len() as u64).collect(),
    })
}

/// Exact |P(tau, depth, t)| for radius-1 rules without enumerating bases.
///
/// A configuration is a root letter plus independent child subtree
/// configurations, and the global map commutes with subtree shifts. So the
/// depth-n windowed trajectory of a configuration is assembled from its root
/// letter and the depth-(n-1) windowed trajectories of the children: window
/// j is the graft of root value e_j onto the children's windows j, and
/// e_j = mu(e_{j-1} with the children's window-(j-1) roots). Child
/// trajectories range over the full depth-(n-1) set independently, so the
/// recursion is exact. Prefix counts give every t' <= steps at once.
pub fn trajectory_set_recursive(
    rule: &LocalRule,
    depth: usize,
    steps: usize,
    budget: u64,
) -> Result<TrajectoryStats> {
    check_trajectory_args(depth, steps)?;
    if rule.radius() != 1 {
        return Err(Error::Unsupported(
            "windowed trajectory recursion requires a radius-1 rule".into(),
        ));
    }
    let geometry = rule.geometry();
    let alphabet = rule.alphabet_size();
    let mut work = WorkBudget::new(budget);

    // Depth 1, horizon t: tuples of root observations. Build up from t = 1.
    let mut cur: Vec<Vec<Pattern>> = (0..alphabet)
        .map(|a| vec![Pattern::new(geometry, alphabet, 1, vec![a as Letter]).expect("letter")])
        .collect();
    for _t in 2..=steps {
        cur = extend_root_trajectories(rule, &cur, &mut work)?;
    }
    for _n in 2..=depth {
        cur = lift_window_trajectories(rule, &cur, &mut work)?;
    }

    let window = geometry.delta_size(depth);
    let mut counts = Vec::with_capacity(steps);
    for t in 1..=steps {
        let mut distinct: HashSet<Vec<Letter>> = HashSet::new();
        for element in &cur {
            let mut tuple = Vec::with_capacity(window * t);
            for w in &element[..t] {
                tuple.extend_from_slice(w.letters());
            }
            distinct.insert(tuple);
        }
        counts.push(distinct.len() as u64);
    }
    Ok(TrajectoryStats { depth, steps, counts })
}

/// One time-horizon step of the depth-1 recursion: from the set of
/// (t-1)-step root trajectories to the set of t-step ones.
fn extend_root_trajectories(
    rule: &LocalRule,
    prev: &[Vec<Pattern>],
    work: &mut WorkBudget,
) -> Result<Vec<Vec<Pattern>>> {
    let geometry = rule.geometry();
    let k = geometry.arity();
    let alphabet = rule.alphabet_size();
    let horizon = prev[0].len() + 1;
    work.charge_big(
        (alphabet as u128).saturating_mul((prev.len() as u128).saturating_pow(k as u32)),
    )?;

    let mut out: Vec<Vec<Pattern>> = Vec::new();
    let mut dedup: HashSet<Vec<Letter>> = HashSet::new();
    let mut neighborhood = vec![0 as Letter; 1 + k];
    for_each_combination(prev.len(), k, &mut |combo| {
        for e0 in 0..alphabet {
            let mut roots: Vec<Letter> = Vec::with_capacity(horizon);
            roots.push(e0 as Letter);
            for j in 1..horizon {
                neighborhood[0] = roots[j - 1];
                for (i, &c) in combo.iter().enumerate() {
                    neighborhood[1 + i] = prev[c][j - 1].letters()[0];
                }
                roots.push(rule.lookup_letters(&neighborhood));
            }
            if dedup.insert(roots.clone()) {
                out.push(
                    roots
                        .iter()
                        .map(|&b| {
                            Pattern::new(geometry, alphabet, 1, vec![b]).expect("letter")
                        })
                        .collect(),
                );
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// One observation-depth step: from depth-(n-1) windowed trajectory sets to
/// depth-n ones, grafting a root observation onto child windows.
fn lift_window_trajectories(
    rule: &LocalRule,
    prev: &[Vec<Pattern>],
    work: &mut WorkBudget,
) -> Result<Vec<Vec<Pattern>>> {
    let geometry = rule.geometry();
    let k = geometry.arity();
    let alphabet = rule.alphabet_size();
    let horizon = prev[0].len();
    work.charge_big(
        (alphabet as u128).saturating_mul((prev.len() as u128).saturating_pow(k as u32)),
    )?;

    let mut out: Vec<Vec<Pattern>> = Vec::new();
    let mut dedup: HashSet<Vec<Letter>> = HashSet::new();
    let mut neighborhood = vec![0 as Letter; 1 + k];
    let mut children: Vec<Pattern> = Vec::with_capacity(k);
    for_each_combination(prev.len(), k, &mut |combo| {
        for e0 in 0..alphabet {
            let mut roots: Vec<Letter> = Vec::with_capacity(horizon);
            roots.push(e0 as Letter);
            for j in 1..horizon {
                neighborhood[0] = roots[j - 1];
                for (i, &c) in combo.iter().enumerate() {
                    neighborhood[1 + i] = prev[c][j - 1].letters()[0];
                }
                roots.push(rule.lookup_letters(&neighborhood));
            }
            let mut element: Vec<Pattern> = Vec::with_capacity(horizon);
            let mut key: Vec<Letter> = Vec::new();
            for (j, &root) in roots.iter().enumerate() {
                children.clear();
                for &c in combo.iter() {
                    children.push(prev[c][j].clone());
                }
                let base = Pattern::new(geometry, alphabet, 1, vec![root])?;
                let window = Pattern::graft(&base, &children)?;
                key.extend_from_slice(window.letters());
                element.push(window);
            }
            if dedup.insert(key) {
                out.push(element);
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// Visit every length-`slots` tuple over {0..choices-1}, first slot fastest.
fn for_each_combination(
    choices: usize,
    slots: usize,
    f: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let mut combo = vec![0usize; slots];
    loop {
        f(&combo)?;
        let mut advanced = false;
        for slot in combo.iter_mut() {
            *slot += 1;
            if *slot < choices {
                advanced = true;
                break;
            }
            *slot = 0;
        }
        if !advanced {
            return Ok(());
        }
    }
}

/// Depth-first search over level-order letter arrays of `input_depth`,
/// deepest cell first, letters ascending, so solutions stream in ascending
/// colex order. `pins` fixes input cells; `image` constrains image cells,
/// each checked the moment its neighborhood root is assigned (all deeper
/// neighborhood cells already carry values). One budget unit per completed
/// candidate or pruned branch.
pub(crate) fn constrained_search(
    rule: &LocalRule,
    input_depth: usize,
    image: &[Option<Letter>],
    pins: &[Option<Letter>],
    work: &mut WorkBudget,
    on_solution: &mut dyn FnMut(&[Letter]) -> bool,
) -> Result<()> {
    let cells = rule.geometry().delta_size(input_depth);
    debug_assert_eq!(pins.len(), cells);
    debug_assert_eq!(image.len(), rule.geometry().delta_size(input_depth - rule.radius()));
    let mut letters = vec![0 as Letter; cells];
    let mut stop = false;
    descend(rule, image, pins, &mut letters, cells, work, &mut stop, on_solution)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    rule: &LocalRule,
    image: &[Option<Letter>],
    pins: &[Option<Letter>],
    letters: &mut [Letter],
    cell_plus1: usize,
    work: &mut WorkBudget,
    stop: &mut bool,
    on_solution: &mut dyn FnMut(&[Letter]) -> bool,
) -> Result<()> {
    if cell_plus1 == 0 {
        work.charge(1)?;
        if !on_solution(letters) {
            *stop = true;
        }
        return Ok(());
    }
    let cell = cell_plus1 - 1;
    let (lo, hi) = match pins[cell] {
        Some(p) => (p, p + 1),
        None => (0, rule.alphabet_size() as Letter),
    };
    for a in lo..hi {
        letters[cell] = a;
        if let Some(Some(want)) = image.get(cell) {
            if rule.table()[neighborhood_key(rule, letters, cell)] != *want {
                work.charge(1)?;
                continue;
            }
        }
        descend(rule, image, pins, letters, cell, work, stop, on_solution)?;
        if *stop {
            return Ok(());
        }
    }
    Ok(())
}

/// All patterns of a shape with some cells pinned, ascending colex. The full
/// free-cell space is charged upfront. The callback returns false to stop.
pub(crate) fn for_each_pinned(
    geometry: TreeGeometry,
    alphabet_size: usize,
    depth: usize,
    pins: &[Option<Letter>],
    work: &mut WorkBudget,
    f: &mut dyn FnMut(&[Letter]) -> Result<bool>,
) -> Result<()> {
    let cells = geometry.delta_size(depth);
    debug_assert_eq!(pins.len(), cells);
    let free: Vec<usize> = (0..cells).filter(|&i| pins[i].is_none()).collect();
    work.charge_big((alphabet_size as u128).checked_pow(free.len() as u32).unwrap_or(u128::MAX))?;

    let mut letters: Vec<Letter> = pins.iter().map(|p| p.unwrap_or(0)).collect();
    loop {
        if !f(&letters)? {
            return Ok(());
        }
        let mut advanced = false;
        for &i in &free {
            if (letters[i] as usize) + 1 < alphabet_size {
                letters[i] += 1;
                advanced = true;
                break;
            }
            letters[i] = 0;
        }
        if !advanced {
            return Ok(());
        }
    }
}

/// Exactly { g of depth n+r : apply(rule, g) = q }, ascending colex.
pub fn preimage_enumerate(rule: &LocalRule, target: &Pattern, budget: u64) -> Result<Vec<Pattern>> {
    check_rule_pattern(rule, target)?;
    let input_depth = target.depth() + rule.radius();
    let image: Vec<Option<Letter>> = target.letters().iter().map(|&l| Some(l)).collect();
    let pins = vec![None; rule.geometry().delta_size(input_depth)];
    let mut work = WorkBudget::new(budget);
    let mut out = Vec::new();
    constrained_search(rule, input_depth, &image, &pins, &mut work, &mut |letters| {
        out.push(
            Pattern::new(rule.geometry(), rule.alphabet_size(), input_depth, letters.to_vec())
                .expect("search emits valid letters"),
        );
        true
    })?;
    Ok(out)
}

/// The relation p -> q: some depth-max(n, m+r) pattern extends p and maps
/// onto q. Pattern-level existence suffices because every pattern extends to
/// a configuration of the full shift.
pub fn realizable(rule: &LocalRule, prefix: &Pattern, image: &Pattern, budget: u64) -> Result<bool> {
    let mut work = WorkBudget::new(budget);
    realizable_in(rule, prefix, image, &mut work)
}

pub(crate) fn realizable_in(
    rule: &LocalRule,
    prefix: &Pattern,
    image: &Pattern,
    work: &mut WorkBudget,
) -> Result<bool> {
    check_rule_pattern(rule, prefix)?;
    check_rule_pattern(rule, image)?;
    let joint = prefix.depth().max(image.depth() + rule.radius());
    let cells = rule.geometry().delta_size(joint);
    let mut pins: Vec<Option<Letter>> = vec![None; cells];
    for (i, &l) in prefix.letters().iter().enumerate() {
        pins[i] = Some(l);
    }
    let mut constraints: Vec<Option<Letter>> =
        vec![None; rule.geometry().delta_size(joint - rule.radius())];
    for (i, &l) in image.letters().iter().enumerate() {
        constraints[i] = Some(l);
    }
    let mut found = false;
    constrained_search(rule, joint, &constraints, &pins, work, &mut |_| {
        found = true;
        false
    })?;
    Ok(found)
}
