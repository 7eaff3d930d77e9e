//! Three-valued analysis verdicts with re-verifiable witnesses.
//!
//! Surjectivity, preinjectivity, right-closingness, and openness are not
//! finitely decidable here, so a checker never conflates "no witness up to a
//! bound" with a certificate: Certified is reserved for finitely decided
//! properties and per-parameter checks, everything else tops out at
//! BoundedEvidence. A Refuted verdict always carries a witness that replays
//! the defining check.

use crate::pattern::{render_letters, Letter, Pattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Certified,
    Refuted,
    BoundedEvidence,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Refuted => "refuted",
            Status::BoundedEvidence => "bounded-evidence",
        }
    }
}

/// Two distinct same-shape blocks that agree with one boundary block on the
/// root and on every deepest-level subtree, yet share their image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiamondPair {
    pub first: Pattern,
    pub second: Pattern,
}

impl DiamondPair {
    pub fn size(&self) -> usize {
        self.first.depth()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// A neighborhood with the root cell removed, in level order.
    Boundary { letters: Vec<Letter>, alphabet_size: usize },
    Block(Pattern),
    Pair { first: Pattern, second: Pattern },
    Diamond(DiamondPair),
    /// A root letter and an image block admitting `solutions` child tuples.
    Extension { root: Letter, image: Pattern, solutions: u64 },
}

impl Witness {
    pub fn text(&self) -> String {
        match self {
            Witness::Boundary { letters, alphabet_size } => {
                render_letters(letters, *alphabet_size)
            }
            Witness::Block(p) => p.text(),
            Witness::Pair { first, second } => format!("{},{}", first.text(), second.text()),
            Witness::Diamond(d) => format!("{},{}", d.first.text(), d.second.text()),
            Witness::Extension { root, image, .. } => {
                let root = render_letters(&[*root], image.alphabet_size());
                format!("{root},{}", image.text())
            }
        }
    }
}

/// Outcome of one analysis: status, the bound it was run at or reached, an
/// optional witness, and key=value detail pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub bound: Option<u64>,
    pub witness: Option<Witness>,
    pub detail: Vec<(String, String)>,
}

impl Verdict {
    pub fn new(status: Status) -> Self {
        Verdict { status, bound: None, witness: None, detail: Vec::new() }
    }

    pub fn with_bound(mut self, bound: u64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_detail(mut self, key: &str, value: impl ToString) -> Self {
        self.detail.push((key.to_string(), value.to_string()));
        self
    }

    /// Stable line serialization, identical in human and record output.
    pub fn render_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("verdict: {}", self.status.label())];
        if let Some(b) = self.bound {
            lines.push(format!("bound: {b}"));
        }
        if let Some(w) = &self.witness {
            lines.push(format!("witness: {}", w.text()));
        }
        if !self.detail.is_empty() {
            let pairs: Vec<String> =
                self.detail.iter().map(|(k, v)| format!("{k}={v}")).collect();
            lines.push(format!("detail: {}", pairs.join(" ")));
        }
        lines
    }
}
