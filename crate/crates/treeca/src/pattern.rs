//! Finite tree patterns: labelings of all vertices of depth < n.
//!
//! Letters live in a flat level-order array (see [`crate::geometry`]), so
//! restriction to a smaller depth is a prefix slice and the subtree below a
//! vertex is a contiguous slice per level. Witness ordering everywhere in
//! this crate is colexicographic on that array: compare the deepest position
//! first, the root last. Equivalently, a pattern is read as a base-|A|
//! integer whose least-significant digit sits at the root; an ascending scan
//! in this order prefers witnesses that deviate close to the root.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::TreeGeometry;

pub type Letter = u8;

pub const MAX_ALPHABET: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    geometry: TreeGeometry,
    alphabet_size: usize,
    depth: usize,
    letters: Vec<Letter>,
}

impl Pattern {
    pub fn new(
        geometry: TreeGeometry,
        alphabet_size: usize,
        depth: usize,
        letters: Vec<Letter>,
    ) -> Result<Self> {
        check_alphabet(alphabet_size)?;
        if depth < 1 {
            return Err(Error::InvalidDepth(depth));
        }
        let expected = geometry.delta_size(depth);
        if letters.len() != expected {
            return Err(Error::Shape(format!(
                "depth {depth} needs {expected} letters, got {}",
                letters.len()
            )));
        }
        if let Some(&bad) = letters.iter().find(|&&l| l as usize >= alphabet_size) {
            return Err(Error::InvalidLetter { letter: bad as usize, alphabet: alphabet_size });
        }
        Ok(Pattern { geometry, alphabet_size, depth, letters })
    }

    /// Constant pattern of the given depth.
    pub fn filled(
        geometry: TreeGeometry,
        alphabet_size: usize,
        depth: usize,
        letter: Letter,
    ) -> Result<Self> {
        let letters = vec![letter; geometry.delta_size(depth)];
        Pattern::new(geometry, alphabet_size, depth, letters)
    }

    pub fn geometry(&self) -> TreeGeometry {
        self.geometry
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn level_slice(&self, level: usize) -> &[Letter] {
        &self.letters[self.geometry.level_range(level)]
    }

    pub fn letter_at(&self, word: &[u8]) -> Result<Letter> {
        if word.len() >= self.depth {
            return Err(Error::Shape(format!(
                "word of length {} outside pattern of depth {}",
                word.len(),
                self.depth
            )));
        }
        Ok(self.letters[self.geometry.index_of_word(word)?])
    }

    /// Restriction to a shallower domain: a prefix of the letter array.
    pub fn restrict(&self, depth: usize) -> Result<Pattern> {
        if depth < 1 || depth > self.depth {
            return Err(Error::Shape(format!(
                "cannot restrict depth {} pattern to depth {depth}",
                self.depth
            )));
        }
        Pattern::new(
            self.geometry,
            self.alphabet_size,
            depth,
            self.letters[..self.geometry.delta_size(depth)].to_vec(),
        )
    }

    /// The pattern seen from the vertex `word`: (subtree p at v)(w) = p(v.w).
    pub fn subtree(&self, word: &[u8]) -> Result<Pattern> {
        if word.len() >= self.depth {
            return Err(Error::Shape(format!(
                "no subtree of depth >= 1 at a vertex of depth {} in a pattern of depth {}",
                word.len(),
                self.depth
            )));
        }
        let root = self.geometry.index_of_word(word)?;
        Ok(self.subtree_at(root, word.len()))
    }

    /// Subtree by root index; `level` must be the level of `root_index`.
    pub(crate) fn subtree_at(&self, root_index: usize, level: usize) -> Pattern {
        let k = self.geometry.arity();
        let out_depth = self.depth - level;
        let mut letters = Vec::with_capacity(self.geometry.delta_size(out_depth));
        let mut stride = 1usize; // k^rel_level
        for rel_level in 0..out_depth {
            let start = stride * root_index + self.geometry.delta_size(rel_level);
            letters.extend_from_slice(&self.letters[start..start + stride]);
            stride *= k;
            let _ = rel_level;
        }
        Pattern { geometry: self.geometry, alphabet_size: self.alphabet_size, depth: out_depth, letters }
    }

    /// Extend a depth-n pattern by grafting one depth-m pattern below each of
    /// the k^n vertices of depth n, given in lexicographic order of those
    /// vertices. In level order this is plain concatenation: each new level
    /// is the children's matching levels laid side by side.
    pub fn graft(base: &Pattern, children: &[Pattern]) -> Result<Pattern> {
        let g = base.geometry;
        let n = base.depth;
        let expected = g.level_len(n);
        if children.len() != expected {
            return Err(Error::Shape(format!(
                "graft at depth {n} needs {expected} children, got {}",
                children.len()
            )));
        }
        let m = children[0].depth;
        for c in children {
            if c.geometry != g || c.alphabet_size != base.alphabet_size {
                return Err(Error::Shape("graft child geometry or alphabet mismatch".into()));
            }
            if c.depth != m {
                return Err(Error::Shape(format!(
                    "graft children must share one depth, got {} and {m}",
                    c.depth
                )));
            }
        }
        let mut letters = base.letters.clone();
        letters.reserve(g.delta_size(n + m) - letters.len());
        for level in 0..m {
            for child in children {
                letters.extend_from_slice(child.level_slice(level));
            }
        }
        Pattern::new(g, base.alphabet_size, n + m, letters)
    }

    /// Depth-2 pattern with the given root letter and child letters.
    pub fn from_root_and_children(
        geometry: TreeGeometry,
        alphabet_size: usize,
        root: Letter,
        children: &[Letter],
    ) -> Result<Pattern> {
        if children.len() != geometry.arity() {
            return Err(Error::Shape(format!(
                "expected {} child letters, got {}",
                geometry.arity(),
                children.len()
            )));
        }
        let mut letters = vec![root];
        letters.extend_from_slice(children);
        Pattern::new(geometry, alphabet_size, 2, letters)
    }

    /// Colexicographic order: deepest position most significant.
    pub fn colex_cmp(&self, other: &Pattern) -> Ordering {
        colex_cmp(&self.letters, &other.letters)
    }

    /// Distance between two patterns of one shape: 0 if equal, else 1/n where
    /// n is the smallest depth on which they already differ.
    pub fn truncated_distance(&self, other: &Pattern) -> Result<Distance> {
        if self.geometry != other.geometry
            || self.alphabet_size != other.alphabet_size
            || self.depth != other.depth
        {
            return Err(Error::Shape("distance requires identical shape".into()));
        }
        match self.letters.iter().zip(&other.letters).position(|(a, b)| a != b) {
            None => Ok(Distance::Zero),
            Some(idx) => Ok(Distance::Inverse(self.geometry.level_of_index(idx) + 1)),
        }
    }

    /// Digit string for alphabets up to 10 letters, comma-separated decimal
    /// letters beyond that.
    pub fn text(&self) -> String {
        render_letters(&self.letters, self.alphabet_size)
    }

    pub fn parse(geometry: TreeGeometry, alphabet_size: usize, text: &str) -> Result<Pattern> {
        check_alphabet(alphabet_size)?;
        let letters = parse_letters(text, alphabet_size)?;
        let depth = depth_for_len(geometry, letters.len()).ok_or_else(|| {
            Error::PatternText(format!(
                "{} letters do not fill any depth exactly for arity {}",
                letters.len(),
                geometry.arity()
            ))
        })?;
        Pattern::new(geometry, alphabet_size, depth, letters)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Zero,
    Inverse(usize),
}

impl Distance {
    pub fn as_f64(&self) -> f64 {
        match self {
            Distance::Zero => 0.0,
            Distance::Inverse(n) => 1.0 / *n as f64,
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Distance::Zero, Distance::Zero) => Ordering::Equal,
            (Distance::Zero, _) => Ordering::Less,
            (_, Distance::Zero) => Ordering::Greater,
            // 1/a vs 1/b
            (Distance::Inverse(a), Distance::Inverse(b)) => b.cmp(a),
        }
    }
}

fn check_alphabet(alphabet_size: usize) -> Result<()> {
    if !(1..=MAX_ALPHABET).contains(&alphabet_size) {
        return Err(Error::InvalidAlphabet(alphabet_size));
    }
    Ok(())
}

fn depth_for_len(geometry: TreeGeometry, len: usize) -> Option<usize> {
    let mut depth = 1;
    loop {
        let size = geometry.delta_size(depth);
        if size == len {
            return Some(depth);
        }
        if size > len {
            return None;
        }
        depth += 1;
    }
}

pub(crate) fn render_letters(letters: &[Letter], alphabet_size: usize) -> String {
    if alphabet_size <= 10 {
        letters.iter().map(|l| char::from(b'0' + l)).collect()
    } else {
        letters.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    }
}

pub fn parse_letters(text: &str, alphabet_size: usize) -> Result<Vec<Letter>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::PatternText("empty pattern".into()));
    }
    let letters: Vec<Letter> = if alphabet_size <= 10 {
        if text.contains(',') {
            return Err(Error::PatternText(
                "comma form is only for alphabets larger than 10; use a digit string".into(),
            ));
        }
        text.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as Letter)
                    .ok_or_else(|| Error::PatternText(format!("invalid digit {c:?}")))
            })
            .collect::<Result<_>>()?
    } else {
        text.split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::PatternText(format!("invalid letter {part:?}")))
                    .and_then(|v| {
                        if v >= MAX_ALPHABET {
                            Err(Error::InvalidLetter { letter: v, alphabet: alphabet_size })
                        } else {
                            Ok(v as Letter)
                        }
                    })
            })
            .collect::<Result<_>>()?
    };
    for &l in &letters {
        if l as usize >= alphabet_size {
            return Err(Error::InvalidLetter { letter: l as usize, alphabet: alphabet_size });
        }
    }
    Ok(letters)
}

/// Colexicographic comparison of equal-length letter arrays.
pub fn colex_cmp(a: &[Letter], b: &[Letter]) -> Ordering {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// In-place successor in colex order: increment with the root as the
/// fastest-cycling digit. Returns false after the maximal array wraps to
/// all zeros.
pub(crate) fn colex_advance(letters: &mut [Letter], alphabet_size: usize) -> bool {
    let top = (alphabet_size - 1) as Letter;
    for slot in letters.iter_mut() {
        if *slot < top {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

/// All patterns of one shape in ascending colex order.
pub fn all_patterns(
    geometry: TreeGeometry,
    alphabet_size: usize,
    depth: usize,
) -> impl Iterator<Item = Pattern> {
    let len = geometry.delta_size(depth);
    let mut current: Option<Vec<Letter>> = Some(vec![0; len]);
    std::iter::from_fn(move || {
        let letters = current.take()?;
        let out = Pattern::new(geometry, alphabet_size, depth, letters.clone()).ok()?;
        let mut next = letters;
        if colex_advance(&mut next, alphabet_size) {
            current = Some(next);
        }
        Some(out)
    })
}
