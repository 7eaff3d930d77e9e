//! Permutivity: the root letter acts as a permutation of the alphabet for
//! every fixed labeling of the rest of the neighborhood.
//!
//! The check is finite. Permutive rules admit a backward preimage
//! construction: fix the deepest r levels arbitrarily, then solve every
//! remaining cell by inverting the root permutation, deepest cell first.

use crate::dynamics::neighborhood_key;
use crate::error::{Error, Result};
use crate::pattern::{colex_advance, render_letters, Letter, Pattern};
use crate::rule::LocalRule;
use crate::verdict::{Status, Verdict, Witness};

/// First failing boundary in ascending colex order, if any. A boundary is
/// the neighborhood minus its root cell, in level order.
fn first_failing_boundary(rule: &LocalRule) -> Option<Vec<Letter>> {
    let a = rule.alphabet_size();
    let cells = rule.neighborhood_len();
    let mut neighborhood = vec![0 as Letter; cells];
    loop {
        let mut seen = vec![false; a];
        let mut bijective = true;
        for letter in 0..a {
            neighborhood[0] = letter as Letter;
            let image = rule.lookup_letters(&neighborhood) as usize;
            if seen[image] {
                bijective = false;
                break;
            }
            seen[image] = true;
        }
        if !bijective {
            return Some(neighborhood[1..].to_vec());
        }
        neighborhood[0] = 0;
        if !colex_advance(&mut neighborhood[1..], a) {
            return None;
        }
    }
}

/// Certified, or Refuted with the smallest failing boundary.
pub fn is_permutive(rule: &LocalRule) -> Verdict {
    match first_failing_boundary(rule) {
        None => Verdict::new(Status::Certified),
        Some(letters) => {
            let witness = Witness::Boundary { letters, alphabet_size: rule.alphabet_size() };
            Verdict::new(Status::Refuted).with_witness(witness)
        }
    }
}

/// Preimage of `target` that carries `filler` on its deepest r levels,
/// every other cell solved by the root permutation's inverse. Unique given
/// the filler.
pub fn permutive_preimage_build(
    rule: &LocalRule,
    target: &Pattern,
    filler: &[Letter],
) -> Result<Pattern> {
    if target.geometry() != rule.geometry() || target.alphabet_size() != rule.alphabet_size() {
        return Err(Error::Shape("target does not match the rule's geometry or alphabet".into()));
    }
    if let Some(boundary) = first_failing_boundary(rule) {
        return Err(Error::NotPermutive(format!(
            "the root letter is not a permutation at boundary {}",
            render_letters(&boundary, rule.alphabet_size())
        )));
    }
    let geometry = rule.geometry();
    let a = rule.alphabet_size();
    let n = target.depth();
    let out_cells = geometry.delta_size(n + rule.radius());
    let solved = geometry.delta_size(n);
    if filler.len() != out_cells - solved {
        return Err(Error::Shape(format!(
            "filler must supply {} letters for levels {n}..{}",
            out_cells - solved,
            n + rule.radius() - 1
        )));
    }
    let mut letters = vec![0 as Letter; out_cells];
    for (slot, &l) in letters[solved..].iter_mut().zip(filler) {
        if l as usize >= a {
            return Err(Error::InvalidLetter { letter: l as usize, alphabet: a });
        }
        *slot = l;
    }
    // Every neighborhood cell of image cell j except the root sits at an
    // index above j, so a descending sweep always sees solved letters.
    for j in (0..solved).rev() {
        let want = target.letters()[j];
        let mut found = false;
        for candidate in 0..a {
            letters[j] = candidate as Letter;
            if rule.table()[neighborhood_key(rule, &letters, j)] == want {
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::Invariant(format!(
                "permutive rule has no root letter solving cell {j}"
            )));
        }
    }
    Pattern::new(geometry, a, n + rule.radius(), letters)
}
