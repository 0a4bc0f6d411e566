//! How a tuple of conditions is read as one composite oracle
//! `0 ⊕ J(p, r) ⊕ q ⊕ …` under the round-robin join.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::functional::PartialOracle;
use super::ForcingError;
use crate::conditions::WordCondition;
use crate::streams::{unpair, Bit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    /// All-zero placeholder for the iterated jump of 0.
    Zero,
    /// `J(p, r)` where `p` is the given coordinate of the product condition
    /// and `r` ranges over completions of its domain.
    Jump(usize),
    /// A word-valued coordinate `q`, read as the code `J(q, 0̄)`.
    Word(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Component>", into = "Vec<Component>")]
pub struct OracleLayout {
    components: Vec<Component>,
}

impl TryFrom<Vec<Component>> for OracleLayout {
    type Error = ForcingError;

    fn try_from(components: Vec<Component>) -> Result<Self, ForcingError> {
        OracleLayout::new(components)
    }
}

impl From<OracleLayout> for Vec<Component> {
    fn from(layout: OracleLayout) -> Self {
        layout.components
    }
}

impl OracleLayout {
    /// Each coordinate may appear at most once.
    pub fn new(components: Vec<Component>) -> Result<Self, ForcingError> {
        if components.is_empty() {
            return Err(ForcingError::LayoutMismatch("layout has no components".into()));
        }
        let mut seen = Vec::new();
        for c in &components {
            if let Component::Jump(i) | Component::Word(i) = c {
                if seen.contains(i) {
                    return Err(ForcingError::LayoutMismatch(format!("coordinate {i} appears twice")));
                }
                seen.push(*i);
            }
        }
        Ok(OracleLayout { components })
    }

    /// `0 ⊕ J(p, r) ⊕ q` with `p` at coordinate 0 and `q` at coordinate 1.
    pub fn standard() -> Self {
        OracleLayout { components: vec![Component::Zero, Component::Jump(0), Component::Word(1)] }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    /// Least product arity whose coordinates cover the layout.
    pub fn required_coords(&self) -> usize {
        self.coordinates().map(|i| i + 1).max().unwrap_or(0)
    }

    pub fn coordinates(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.iter().filter_map(|c| match c {
            Component::Jump(i) | Component::Word(i) => Some(*i),
            Component::Zero => None,
        })
    }

    pub fn jump_coordinates(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.iter().filter_map(|c| match c {
            Component::Jump(i) => Some(*i),
            _ => None,
        })
    }

    /// Composite position → (component slot, position within the component).
    pub fn locate(&self, position: u64) -> (usize, u64) {
        let k = self.arity() as u64;
        ((position % k) as usize, position / k)
    }

    pub fn position(&self, slot: usize, index: u64) -> Option<u64> {
        index.checked_mul(self.arity() as u64)?.checked_add(slot as u64)
    }

    pub fn check_arity(&self, coords: usize) -> Result<(), ForcingError> {
        if self.required_coords() > coords {
            return Err(ForcingError::LayoutMismatch(format!(
                "layout addresses coordinate {} of a {coords}-tuple",
                self.required_coords() - 1
            )));
        }
        Ok(())
    }
}

/// Column and in-column position of a flat index, when both fit in u64.
pub(crate) fn split_index(index: u64) -> (u64, u64) {
    let (n, m) = unpair(index as u128);
    (n as u64, m as u64)
}

#[cfg(test)]
pub(crate) fn flat_index(column: u64, m: u64) -> Option<u64> {
    u64::try_from(crate::streams::pair(column as u128, m as u128)).ok()
}

/// The J-coded bit at (column, m) of a word under a payload bit.
pub(crate) fn coded_bit(word: &crate::streams::FiniteWord, payload: Bit, m: u64) -> Bit {
    let len = word.len() as u64;
    match m.cmp(&len) {
        std::cmp::Ordering::Less => word.get(m as usize).expect("m < len"),
        std::cmp::Ordering::Equal => payload.flip(),
        std::cmp::Ordering::Greater => payload,
    }
}

/// The partial composite oracle of a product condition under one completion.
///
/// `completion` gives `r` on `dom(p)` for each jump coordinate, keyed by
/// (coordinate, column); `side` holds extra bits of jump components outside
/// the defined region, keyed by (coordinate, flat index).
pub struct CompositeOracle<'a> {
    pub layout: &'a OracleLayout,
    pub conditions: &'a [WordCondition],
    pub completion: &'a BTreeMap<(usize, u64), Bit>,
    pub side: &'a BTreeMap<(usize, u64), Bit>,
}

impl PartialOracle for CompositeOracle<'_> {
    fn get(&self, position: u64) -> Option<Bit> {
        let (slot, index) = self.layout.locate(position);
        match self.layout.components[slot] {
            Component::Zero => Some(Bit::Zero),
            Component::Jump(coord) => {
                let (n, m) = split_index(index);
                match self.conditions[coord].get(n) {
                    Some(word) => {
                        let r = *self.completion.get(&(coord, n)).expect("completion covers dom(p)");
                        Some(coded_bit(word, r, m))
                    }
                    None => self.side.get(&(coord, index)).copied(),
                }
            }
            Component::Word(coord) => {
                let (n, m) = split_index(index);
                self.conditions[coord].get(n).map(|w| coded_bit(w, Bit::Zero, m))
            }
        }
    }
}
