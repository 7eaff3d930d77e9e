//! Vertex addressing for the full k-ary tree.
//!
//! Vertices are words over {0..k-1}; the finite domain of depth n is the set
//! of all words shorter than n. Everything in this crate stores such a domain
//! as one flat array in level order (breadth-first), using the heap rule
//!
//!   index(root) = 0,   index(v . d) = k * index(v) + d + 1.
//!
//! Two consequences carry the whole crate: the depth-n domain is a prefix of
//! the depth-(n+1) domain, and index(v . w) = k^|w| * index(v) + index(w), so
//! each level of the subtree rooted at v is one contiguous slice.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreeGeometry {
    arity: usize,
}

impl TreeGeometry {
    pub fn new(arity: usize) -> Result<Self> {
        if arity < 1 {
            return Err(Error::InvalidArity(arity));
        }
        Ok(TreeGeometry { arity })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of vertices of depth < n (the length of a depth-n letter array).
    pub fn delta_size(&self, depth: usize) -> usize {
        let mut total = 0usize;
        let mut level = 1usize;
        for _ in 0..depth {
            total += level;
            level *= self.arity;
        }
        total
    }

    /// Number of vertices on one level: k^level.
    pub fn level_len(&self, level: usize) -> usize {
        self.arity.pow(level as u32)
    }

    /// Index range of one level inside a level-order array.
    pub fn level_range(&self, level: usize) -> std::ops::Range<usize> {
        let start = self.delta_size(level);
        start..start + self.level_len(level)
    }

    pub fn index_of_word(&self, word: &[u8]) -> Result<usize> {
        let mut index = 0usize;
        for &digit in word {
            if digit as usize >= self.arity {
                return Err(Error::InvalidWordDigit { digit, arity: self.arity });
            }
            index = self.arity * index + digit as usize + 1;
        }
        Ok(index)
    }

    pub fn word_of_index(&self, mut index: usize) -> Vec<u8> {
        let mut word = Vec::new();
        while index > 0 {
            word.push(((index - 1) % self.arity) as u8);
            index = (index - 1) / self.arity;
        }
        word.reverse();
        word
    }

    pub fn level_of_index(&self, index: usize) -> usize {
        let mut level = 0;
        while self.level_range(level).end <= index {
            level += 1;
        }
        level
    }

    /// The rank-th word of the given length, in lexicographic order.
    pub fn word_of_rank(&self, length: usize, rank: usize) -> Vec<u8> {
        let mut word = vec![0u8; length];
        let mut rest = rank;
        for slot in word.iter_mut().rev() {
            *slot = (rest % self.arity) as u8;
            rest /= self.arity;
        }
        word
    }
}
