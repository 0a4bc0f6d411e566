//! Finite partial functions ordered by inclusion: the forcing conditions of
//! P_{ω,2^{<ω}} (word-valued) and P_{ω,2} (bit-valued).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::streams::{Bit, FiniteWord};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Condition<V: Ord>(BTreeMap<u64, V>);

/// Element of P_{ω,2^{<ω}}.
pub type WordCondition = Condition<FiniteWord>;
/// Element of P_{ω,2}.
pub type BitCondition = Condition<Bit>;

impl<V: Ord> Default for Condition<V> {
    fn default() -> Self {
        Condition(BTreeMap::new())
    }
}

impl<V: Ord + Clone> Condition<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, n: u64) -> Option<&V> {
        self.0.get(&n)
    }

    pub fn contains(&self, n: u64) -> bool {
        self.0.contains_key(&n)
    }

    /// Adds `n ↦ v`. Returns false (leaving the condition untouched) when `n`
    /// is already assigned a different value.
    pub fn assign(&mut self, n: u64, v: V) -> bool {
        match self.0.get(&n) {
            Some(old) => *old == v,
            None => {
                self.0.insert(n, v);
                true
            }
        }
    }

    /// Overwrites the value at `n`. Not an extension in the inclusion order.
    pub fn replace(&mut self, n: u64, v: V) -> Option<V> {
        self.0.insert(n, v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &V)> + '_ {
        self.0.iter().map(|(k, v)| (*k, v))
    }

    /// `self ⊇ other` as sets of pairs.
    pub fn extends(&self, other: &Self) -> bool {
        other.0.iter().all(|(k, v)| self.0.get(k) == Some(v))
    }

    pub fn compatible(&self, other: &Self) -> bool {
        self.0.iter().all(|(k, v)| other.0.get(k).is_none_or(|w| w == v))
    }

    /// The least common extension, if the two agree on their shared domain.
    pub fn union(&self, other: &Self) -> Option<Self> {
        if !self.compatible(other) {
            return None;
        }
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.0.insert(k, v.clone());
        }
        Some(out)
    }

    /// The least index ≥ `from` outside the domain.
    pub fn first_unassigned(&self, from: u64) -> u64 {
        (from..).find(|n| !self.contains(*n)).expect("finite domain")
    }
}

impl<V: Ord> FromIterator<(u64, V)> for Condition<V> {
    fn from_iter<I: IntoIterator<Item = (u64, V)>>(iter: I) -> Self {
        Condition(iter.into_iter().collect())
    }
}

/// The shortest word carrying the given bits at the given positions, with
/// unconstrained positions set to 0. Never empty.
pub fn realize_word(bits: &BTreeMap<u64, Bit>) -> FiniteWord {
    let len = bits.keys().next_back().map_or(1, |k| k + 1) as usize;
    FiniteWord::from_bits((0..len as u64).map(|i| bits.get(&i).copied().unwrap_or(Bit::Zero)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wc(items: &[(u64, &str)]) -> WordCondition {
        items.iter().map(|(k, s)| (*k, s.parse().unwrap())).collect()
    }

    #[test]
    fn inclusion_order() {
        let c = wc(&[(0, "1")]);
        assert!(c.extends(&c));
        assert!(wc(&[(0, "1"), (3, "")]).extends(&c));
        assert!(!c.extends(&wc(&[(0, "1"), (3, "")])));
        // longer words are not extensions in the inclusion order
        assert!(!wc(&[(0, "10")]).extends(&c));
    }

    #[test]
    fn compatibility() {
        assert!(!wc(&[(0, "1")]).compatible(&wc(&[(0, "0")])));
        let a = wc(&[(0, "1")]);
        let b = wc(&[(1, "0")]);
        assert!(a.compatible(&b));
        let u = a.union(&b).unwrap();
        assert!(u.extends(&a) && u.extends(&b));
        assert_eq!(u.len(), 2);
    }

    #[test]
    fn assign_refuses_clash() {
        let mut c = wc(&[(2, "01")]);
        assert!(!c.assign(2, "1".parse().unwrap()));
        assert!(c.assign(2, "01".parse().unwrap()));
        assert!(c.assign(5, "".parse().unwrap()));
        assert_eq!(c.first_unassigned(2), 3);
    }

    #[test]
    fn realize_fills_gaps_with_zero() {
        let bits: BTreeMap<u64, Bit> = [(3, Bit::One), (1, Bit::One)].into_iter().collect();
        assert_eq!(realize_word(&bits).to_string(), "0101");
        assert_eq!(realize_word(&BTreeMap::new()).to_string(), "0");
    }

    #[test]
    fn json_shape() {
        let c = wc(&[(0, "10"), (7, "")]);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"0":"10","7":""}"#);
        let back: WordCondition = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
