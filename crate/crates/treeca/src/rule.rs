//! Local rules: finite lookup tables from depth-(r+1) neighborhoods to letters.
//!
//! A neighborhood is addressed by its table key, the base-|A| integer whose
//! most-significant digit is the root letter, followed by the remaining
//! letters in level order. Note this is the opposite endianness from the
//! colex witness order used for patterns; table keys only fix the table
//! layout, the serialization order, and the rule-as-integer enumeration.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::TreeGeometry;
use crate::pattern::{self, Letter, Pattern, MAX_ALPHABET};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRule {
    geometry: TreeGeometry,
    alphabet_size: usize,
    radius: usize,
    table: Vec<Letter>,
    name: Option<String>,
}

/// Built-in rule families, expanded to tables at construction time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleFamily {
    /// 0 when every neighborhood letter is 0, else 1.
    OrAll,
    /// Sum of the level-1 letters, reduced mod |A|.
    XorChildren,
    /// Sum of all neighborhood letters, reduced mod |A|.
    XorAll,
    /// The root letter.
    Identity,
    /// The letter at the first child (vertex "0").
    FirstChild,
    /// Sum over an explicit set of level-order neighborhood positions, mod |A|.
    SumMod { positions: Vec<usize> },
}

impl RuleFamily {
    pub fn name(&self) -> &'static str {
        match self {
            RuleFamily::OrAll => "or-all",
            RuleFamily::XorChildren => "xor-children",
            RuleFamily::XorAll => "xor-all",
            RuleFamily::Identity => "identity",
            RuleFamily::FirstChild => "first-child",
            RuleFamily::SumMod { .. } => "sum-mod",
        }
    }
}

impl LocalRule {
    pub fn from_table(
        geometry: TreeGeometry,
        alphabet_size: usize,
        radius: usize,
        table: Vec<Letter>,
    ) -> Result<Self> {
        if !(1..=MAX_ALPHABET).contains(&alphabet_size) {
            return Err(Error::InvalidAlphabet(alphabet_size));
        }
        if radius < 1 {
            return Err(Error::InvalidRadius(radius));
        }
        let len = table_len(geometry, alphabet_size, radius).ok_or_else(|| {
            Error::Unsupported(format!(
                "table of {alphabet_size}^{} entries does not fit in memory",
                geometry.delta_size(radius + 1)
            ))
        })?;
        if table.len() != len {
            return Err(Error::Shape(format!("rule table needs {len} entries, got {}", table.len())));
        }
        if let Some(&bad) = table.iter().find(|&&l| l as usize >= alphabet_size) {
            return Err(Error::InvalidLetter { letter: bad as usize, alphabet: alphabet_size });
        }
        Ok(LocalRule { geometry, alphabet_size, radius, table, name: None })
    }

    pub fn builtin(
        geometry: TreeGeometry,
        alphabet_size: usize,
        radius: usize,
        family: &RuleFamily,
    ) -> Result<Self> {
        let cells = geometry.delta_size(radius + 1);
        let positions: Vec<usize> = match family {
            RuleFamily::SumMod { positions } => {
                for &p in positions {
                    if p >= cells {
                        return Err(Error::Shape(format!(
                            "sum-mod position {p} outside the {cells} neighborhood cells"
                        )));
                    }
                }
                positions.clone()
            }
            RuleFamily::XorChildren => geometry.level_range(1).collect(),
            RuleFamily::XorAll => (0..cells).collect(),
            _ => Vec::new(),
        };
        let mut neighborhood = vec![0 as Letter; cells];
        let len = table_len(geometry, alphabet_size, radius)
            .ok_or_else(|| Error::Unsupported("neighborhood space too large".into()))?;
        let mut table = Vec::with_capacity(len);
        loop {
            let out = match family {
                RuleFamily::OrAll => {
                    if neighborhood.iter().all(|&l| l == 0) {
                        0
                    } else {
                        1
                    }
                }
                RuleFamily::Identity => neighborhood[0],
                RuleFamily::FirstChild => neighborhood[1],
                RuleFamily::XorChildren | RuleFamily::XorAll | RuleFamily::SumMod { .. } => {
                    let sum: usize = positions.iter().map(|&p| neighborhood[p] as usize).sum();
                    (sum % alphabet_size) as Letter
                }
            };
            table.push(out);
            if !advance_big_endian(&mut neighborhood, alphabet_size) {
                break;
            }
        }
        // The loop above fills entries in ascending table-key order.
        debug_assert_eq!(table.len(), len);
        let mut rule = LocalRule::from_table(geometry, alphabet_size, radius, table)?;
        rule.name = Some(family.name().to_string());
        Ok(rule)
    }

    pub fn geometry(&self) -> TreeGeometry {
        self.geometry
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Number of cells in a neighborhood: delta_size(radius + 1).
    pub fn neighborhood_len(&self) -> usize {
        self.geometry.delta_size(self.radius + 1)
    }

    pub fn table(&self) -> &[Letter] {
        &self.table
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Table key of a neighborhood given as level-order letters.
    pub fn table_key(&self, letters: &[Letter]) -> usize {
        debug_assert_eq!(letters.len(), self.neighborhood_len());
        letters.iter().fold(0usize, |key, &l| key * self.alphabet_size + l as usize)
    }

    #[inline]
    pub(crate) fn lookup_letters(&self, letters: &[Letter]) -> Letter {
        self.table[self.table_key(letters)]
    }

    /// Output letter for a depth-(r+1) neighborhood pattern.
    pub fn lookup(&self, neighborhood: &Pattern) -> Result<Letter> {
        if neighborhood.geometry() != self.geometry
            || neighborhood.alphabet_size() != self.alphabet_size
            || neighborhood.depth() != self.radius + 1
        {
            return Err(Error::Shape(format!(
                "neighborhood must be a depth-{} pattern over the rule's geometry",
                self.radius + 1
            )));
        }
        Ok(self.lookup_letters(neighborhood.letters()))
    }

    /// The whole table read as a base-|A| integer, first entry most
    /// significant. None when it exceeds 128 bits.
    pub fn rule_key(&self) -> Option<u128> {
        let mut key: u128 = 0;
        for &l in &self.table {
            key = key.checked_mul(self.alphabet_size as u128)?.checked_add(l as u128)?;
        }
        Some(key)
    }

    /// Canonical text form: header plus every table line in key order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("treeca-rule v1\n");
        writeln!(out, "arity: {}", self.geometry.arity()).unwrap();
        writeln!(out, "alphabet: {}", self.alphabet_size).unwrap();
        writeln!(out, "radius: {}", self.radius).unwrap();
        out.push_str("kind: table\n");
        let cells = self.neighborhood_len();
        let mut neighborhood = vec![0 as Letter; cells];
        for &output in &self.table {
            writeln!(
                out,
                "{} -> {}",
                pattern::render_letters(&neighborhood, self.alphabet_size),
                pattern::render_letters(&[output], self.alphabet_size)
            )
            .unwrap();
            advance_big_endian(&mut neighborhood, self.alphabet_size);
        }
        out
    }

    pub fn parse(text: &str) -> Result<LocalRule> {
        parse_rule(text)
    }
}

/// table[key] walk order: most-significant digit first, i.e. increment the
/// last letter fastest.
fn advance_big_endian(letters: &mut [Letter], alphabet_size: usize) -> bool {
    let top = (alphabet_size - 1) as Letter;
    for slot in letters.iter_mut().rev() {
        if *slot < top {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

fn table_len(geometry: TreeGeometry, alphabet_size: usize, radius: usize) -> Option<usize> {
    let cells = geometry.delta_size(radius + 1);
    let len = (alphabet_size as u128).checked_pow(u32::try_from(cells).ok()?)?;
    usize::try_from(len).ok().filter(|&l| l <= 1 << 32)
}

/// Number of distinct rules for a shape: |A| ^ (|A| ^ neighborhood cells).
/// None when it exceeds 128 bits.
pub fn rule_count(geometry: TreeGeometry, alphabet_size: usize, radius: usize) -> Option<u128> {
    let len = table_len(geometry, alphabet_size, radius)?;
    (alphabet_size as u128).checked_pow(u32::try_from(len).ok()?)
}

/// Rule with the given table-as-integer key.
pub fn rule_from_key(
    geometry: TreeGeometry,
    alphabet_size: usize,
    radius: usize,
    key: u128,
) -> Result<LocalRule> {
    let len = table_len(geometry, alphabet_size, radius)
        .ok_or_else(|| Error::Unsupported("rule table too large".into()))?;
    let mut table = vec![0 as Letter; len];
    let mut rest = key;
    for slot in table.iter_mut().rev() {
        *slot = (rest % alphabet_size as u128) as Letter;
        rest /= alphabet_size as u128;
    }
    if rest != 0 {
        return Err(Error::Shape(format!("rule key {key} out of range")));
    }
    LocalRule::from_table(geometry, alphabet_size, radius, table)
}

/// All rules of a shape in ascending key order. Refused when the family size
/// exceeds the budget.
pub fn enumerate_rules(
    geometry: TreeGeometry,
    alphabet_size: usize,
    radius: usize,
    budget: u64,
) -> Result<impl Iterator<Item = LocalRule>> {
    let count = match rule_count(geometry, alphabet_size, radius) {
        Some(c) if c <= budget as u128 => c as u64,
        Some(c) => {
            return Err(Error::Budget { required: c.to_string(), budget });
        }
        None => {
            return Err(Error::Budget { required: "more than 2^128".into(), budget });
        }
    };
    Ok((0..count).map(move |key| {
        rule_from_key(geometry, alphabet_size, radius, key as u128)
            .expect("keys below rule_count are valid")
    }))
}

const MAGIC: &str = "treeca-rule v1";

fn parse_rule(text: &str) -> Result<LocalRule> {
    let mut arity: Option<usize> = None;
    let mut alphabet: Option<usize> = None;
    let mut radius: Option<usize> = None;
    let mut kind: Option<String> = None;
    let mut name: Option<String> = None;
    let mut positions: Option<Vec<usize>> = None;
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    let mut saw_magic = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if !saw_magic {
            if line == MAGIC {
                saw_magic = true;
                continue;
            }
            return Err(Error::RuleParse {
                line: lineno,
                message: format!("expected header {MAGIC:?}"),
            });
        }
        if let Some((lhs, rhs)) = line.split_once("->") {
            entries.push((lineno, lhs.trim().to_string(), rhs.trim().to_string()));
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| Error::RuleParse {
            line: lineno,
            message: "expected `key: value` or `neighborhood -> letter`".into(),
        })?;
        let value = value.trim();
        let parse_num = |what: &str| {
            value.parse::<usize>().map_err(|_| Error::RuleParse {
                line: lineno,
                message: format!("invalid {what}: {value:?}"),
            })
        };
        let set_once = |slot: &mut Option<String>, what: &str| {
            if slot.is_some() {
                return Err(Error::RuleParse { line: lineno, message: format!("duplicate {what}") });
            }
            *slot = Some(value.to_string());
            Ok(())
        };
        match key.trim() {
            "arity" => arity = Some(parse_num("arity")?),
            "alphabet" => alphabet = Some(parse_num("alphabet")?),
            "radius" => radius = Some(parse_num("radius")?),
            "kind" => set_once(&mut kind, "kind")?,
            "name" => set_once(&mut name, "name")?,
            "positions" => {
                let parsed: Vec<usize> = value
                    .split_whitespace()
                    .map(|p| {
                        p.parse::<usize>().map_err(|_| Error::RuleParse {
                            line: lineno,
                            message: format!("invalid position {p:?}"),
                        })
                    })
                    .collect::<Result<_>>()?;
                positions = Some(parsed);
            }
            other => {
                return Err(Error::RuleParse {
                    line: lineno,
                    message: format!("unknown header {other:?}"),
                });
            }
        }
    }

    if !saw_magic {
        return Err(Error::RuleParse { line: 1, message: format!("missing {MAGIC:?} header") });
    }
    let need = |slot: Option<usize>, what: &str| {
        slot.ok_or_else(|| Error::RuleParse { line: 1, message: format!("missing {what} header") })
    };
    let geometry = TreeGeometry::new(need(arity, "arity")?)?;
    let alphabet_size = need(alphabet, "alphabet")?;
    let radius = need(radius, "radius")?;
    let kind = kind.ok_or_else(|| Error::RuleParse { line: 1, message: "missing kind header".into() })?;

    match kind.as_str() {
        "builtin" => {
            if !entries.is_empty() {
                return Err(Error::RuleParse {
                    line: entries[0].0,
                    message: "builtin rules take no table lines".into(),
                });
            }
            let name = name
                .ok_or_else(|| Error::RuleParse { line: 1, message: "builtin needs a name header".into() })?;
            let family = match name.as_str() {
                "or-all" => RuleFamily::OrAll,
                "xor-children" => RuleFamily::XorChildren,
                "xor-all" => RuleFamily::XorAll,
                "identity" => RuleFamily::Identity,
                "first-child" => RuleFamily::FirstChild,
                "sum-mod" => RuleFamily::SumMod {
                    positions: positions.ok_or_else(|| Error::RuleParse {
                        line: 1,
                        message: "sum-mod needs a positions header".into(),
                    })?,
                },
                other => {
                    return Err(Error::RuleParse {
                        line: 1,
                        message: format!("unknown builtin {other:?}"),
                    });
                }
            };
            LocalRule::builtin(geometry, alphabet_size, radius, &family)
        }
        "table" => {
            let len = table_len(geometry, alphabet_size, radius).ok_or_else(|| Error::RuleParse {
                line: 1,
                message: "rule table too large".into(),
            })?;
            let cells = geometry.delta_size(radius + 1);
            let mut table: Vec<Option<Letter>> = vec![None; len];
            let mut probe = LocalRule {
                geometry,
                alphabet_size,
                radius,
                table: vec![0; len],
                name: None,
            };
            if !(1..=MAX_ALPHABET).contains(&alphabet_size) {
                return Err(Error::InvalidAlphabet(alphabet_size));
            }
            for (lineno, lhs, rhs) in &entries {
                let neighborhood = pattern::parse_letters(lhs, alphabet_size).map_err(|e| {
                    Error::RuleParse { line: *lineno, message: e.to_string() }
                })?;
                if neighborhood.len() != cells {
                    return Err(Error::RuleParse {
                        line: *lineno,
                        message: format!("neighborhood needs {cells} letters, got {}", neighborhood.len()),
                    });
                }
                let output = pattern::parse_letters(rhs, alphabet_size).map_err(|e| {
                    Error::RuleParse { line: *lineno, message: e.to_string() }
                })?;
                if output.len() != 1 {
                    return Err(Error::RuleParse {
                        line: *lineno,
                        message: "expected a single output letter".into(),
                    });
                }
                let key = probe.table_key(&neighborhood);
                if table[key].is_some() {
                    return Err(Error::RuleParse {
                        line: *lineno,
                        message: format!("duplicate table entry for {lhs}"),
                    });
                }
                table[key] = Some(output[0]);
            }
            let missing = table.iter().filter(|e| e.is_none()).count();
            if missing > 0 {
                return Err(Error::RuleParse {
                    line: 1,
                    message: format!("table incomplete: {missing} of {len} entries missing"),
                });
            }
            probe.table = table.into_iter().map(|e| e.unwrap()).collect();
            LocalRule::from_table(geometry, alphabet_size, radius, probe.table)
        }
        other => Err(Error::RuleParse { line: 1, message: format!("unknown kind {other:?}") }),
    }
}
