//! Expansivity falsification: two distinct inputs whose orbits look the
//! same through a fixed observation window for a fixed number of steps.
//! Such a pair bounds how strongly the dynamics can separate points.
//!
//! Inputs of depth n + r*t are scanned in ascending colex order and
//! bucketed by their observation tuple. The reported pair minimizes the
//! earlier member; scanning stops once no open bucket can beat it.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use crate::dynamics::{apply, WorkBudget};
use crate::error::{Error, Result};
use crate::pattern::{colex_advance, colex_cmp, Letter, Pattern};
use crate::rule::LocalRule;

/// The depth-n restrictions of the first `steps` images, preceded by the
/// input's own restriction. The input must be deep enough to feed them.
pub fn orbit_observations(
    rule: &LocalRule,
    input: &Pattern,
    resolution: usize,
    steps: usize,
) -> Result<Vec<Pattern>> {
    if input.depth() < resolution + rule.radius() * steps {
        return Err(Error::Shape(format!(
            "input depth {} cannot support {steps} observed steps at resolution {resolution}",
            input.depth()
        )));
    }
    let mut observations = vec![input.restrict(resolution)?];
    let mut current = input.clone();
    for _ in 0..steps {
        current = apply(rule, &current)?;
        observations.push(current.restrict(resolution)?);
    }
    Ok(observations)
}

enum Bucket {
    First(Vec<Letter>),
    Done,
}

/// Find two distinct inputs of depth `resolution + r*steps` whose
/// observation tuples agree, minimizing the colex-earlier member.
pub fn expansivity_witness(
    rule: &LocalRule,
    resolution: usize,
    steps: usize,
    budget: u64,
) -> Result<(Pattern, Pattern)> {
    if resolution < 1 || steps < 1 {
        return Err(Error::Shape(
            "observation needs resolution and steps of at least 1".into(),
        ));
    }
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    if a == 1 {
        return Err(Error::NoWitness(
            "a degenerate alphabet admits a single input".into(),
        ));
    }
    let depth = resolution + rule.radius() * steps;
    let mut work = WorkBudget::new(budget);
    let mut buckets: HashMap<Vec<Letter>, Bucket> = HashMap::new();
    let mut best: Option<(Vec<Letter>, Vec<Letter>)> = None;
    let mut base = vec![0 as Letter; geometry.delta_size(depth)];
    loop {
        work.charge(1)?;
        let input = Pattern::new(geometry, a, depth, base.clone())?;
        let key: Vec<Letter> = orbit_observations(rule, &input, resolution, steps)?
            .iter()
            .flat_map(|window| window.letters().iter().copied())
            .collect();
        let mut hit: Option<Vec<Letter>> = None;
        match buckets.entry(key) {
            Entry::Vacant(slot) => {
                slot.insert(Bucket::First(base.clone()));
            }
            Entry::Occupied(mut slot) => {
                if let Bucket::First(first) = slot.get() {
                    hit = Some(first.clone());
                    slot.insert(Bucket::Done);
                }
            }
        }
        if let Some(first) = hit {
            let better = best
                .as_ref()
                .map(|(held, _)| colex_cmp(&first, held).is_lt())
                .unwrap_or(true);
            if better {
                // Only open buckets holding a member below the new pair's
                // first can still yield a better pair.
                let open = buckets
                    .values()
                    .filter(|b| matches!(b, Bucket::First(m) if colex_cmp(m, &first).is_lt()))
                    .count();
                best = Some((first, base.clone()));
                if open == 0 {
                    break;
                }
            }
        }
        if !colex_advance(&mut base, a) {
            break;
        }
    }
    match best {
        Some((first, second)) => Ok((
            Pattern::new(geometry, a, depth, first)?,
            Pattern::new(geometry, a, depth, second)?,
        )),
        None => Err(Error::NoWitness(format!(
            "no colliding pair at resolution {resolution} over {steps} steps"
        ))),
    }
}
