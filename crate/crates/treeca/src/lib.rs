//! Cellular automata on labelings of the full k-ary tree.
//!
//! A configuration labels every finite word over k digits with a letter; a
//! local rule maps each radius-r neighborhood to one letter, inducing a
//! global map that commutes with the tree's shift maps. Everything here is
//! finite: patterns are labelings of the depth-n tree, and each analysis
//! either certifies a property outright, refutes it with a replayable
//! witness, or reports how far bounded evidence reaches.
//!
//! The checks cover permutivity, surjectivity (orphan patterns and balance
//! of preimage counts), preinjectivity (diamonds and over-mean collisions),
//! right-closingness, the extension property behind openness, expansivity
//! falsification, and deterministic preimage construction. Every search
//! runs under an explicit work budget and resolves ties by the
//! colexicographic order on level-order letters, so results are
//! reproducible bit for bit.

mod classify;
mod closing;
mod diamonds;
mod dynamics;
mod error;
mod expansivity;
mod geometry;
mod openness;
mod pattern;
mod permutivity;
mod rule;
mod surjectivity;
mod verdict;

pub use classify::{classify, ClassificationRow, ClassifyBounds};
pub use closing::{right_closing_at, right_closing_min_n};
pub use diamonds::{diamond_defect, diamond_search, myhill_collision_search};
pub use dynamics::{
    apply, iterate, preimage_enumerate, realizable, trajectory_set, trajectory_set_recursive,
    TrajectoryStats, DEFAULT_BUDGET,
};
pub use error::{Error, Result};
pub use expansivity::{expansivity_witness, orbit_observations};
pub use geometry::TreeGeometry;
pub use openness::{closing_preimage_build, extension_property_check, non_openness_evidence};
pub use pattern::{all_patterns, colex_cmp, parse_letters, Distance, Letter, Pattern};
pub use permutivity::{is_permutive, permutive_preimage_build};
pub use rule::{
    enumerate_rules, rule_count, rule_from_key, LocalRule, RuleFamily,
};
pub use surjectivity::{balance_report, orphan_search, BalanceReport};
pub use verdict::{DiamondPair, Status, Verdict, Witness};
