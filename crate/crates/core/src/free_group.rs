//! The free group F₂ = ⟨a, b⟩, its length-lexicographic enumeration, and the
//! left shift action on configurations in 2^{F₂}.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::prf;
use crate::streams::Bit;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid letter {0:?}; expected one of a, A, b, B")]
    BadLetter(char),
    #[error("invalid seed {0:?}")]
    BadSeed(String),
}

/// Generators and their inverses, declared in enumeration order
/// a < a⁻¹ < b < b⁻¹.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    pub fn from_char(c: char) -> Result<Letter, GroupError> {
        match c {
            'a' => Ok(Letter::A),
            'A' => Ok(Letter::AInv),
            'b' => Ok(Letter::B),
            'B' => Ok(Letter::BInv),
            other => Err(GroupError::BadLetter(other)),
        }
    }
}

/// A reduced word. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct F2Word(Vec<Letter>);

impl F2Word {
    pub fn identity() -> Self {
        F2Word(Vec::new())
    }

    pub fn generator(letter: Letter) -> Self {
        F2Word(vec![letter])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }
}

/// Free reduction.
pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> F2Word {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    F2Word(out)
}

pub fn mul(u: &F2Word, v: &F2Word) -> F2Word {
    reduce(u.0.iter().chain(v.0.iter()).copied())
}

pub fn inv(u: &F2Word) -> F2Word {
    F2Word(u.0.iter().rev().map(|l| l.inverse()).collect())
}

impl fmt::Display for F2Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for F2Word {
    type Err = GroupError;

    /// Parses a string over {a, A, b, B} and reduces it.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s.chars().map(Letter::from_char).collect::<Result<Vec<_>, _>>()?;
        Ok(reduce(letters))
    }
}

impl Serialize for F2Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for F2Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of reduced words of length exactly `len`.
pub fn count_of_length(len: usize) -> u64 {
    if len == 0 {
        1
    } else {
        4 * 3u64.pow(len as u32 - 1)
    }
}

/// Number of reduced words of length at most `len`.
pub fn count_up_to(len: usize) -> u64 {
    (0..=len).map(count_of_length).sum()
}

/// The letters allowed after `prev`, in enumeration order.
fn successors(prev: Letter) -> impl Iterator<Item = Letter> {
    Letter::ALL.into_iter().filter(move |l| *l != prev.inverse())
}

/// Position of a word in the length-lexicographic listing (a < a⁻¹ < b < b⁻¹).
/// Words longer than 39 letters overflow the index type.
pub fn index_of(word: &F2Word) -> u64 {
    let len = word.len();
    if len == 0 {
        return 0;
    }
    assert!(len < 40, "word too long to index");
    let mut rank = word.0[0].index() as u64;
    for pair in word.0.windows(2) {
        let digit = successors(pair[0]).position(|l| l == pair[1]).expect("reduced word") as u64;
        rank = rank * 3 + digit;
    }
    count_up_to(len - 1) + rank
}

/// Inverse of [`index_of`].
pub fn enumerate(index: u64) -> F2Word {
    if index == 0 {
        return F2Word::identity();
    }
    let mut len = 1;
    while count_up_to(len) <= index {
        len += 1;
    }
    let mut rank = index - count_up_to(len - 1);
    let mut digits = vec![0u64; len];
    for d in digits.iter_mut().skip(1).rev() {
        *d = rank % 3;
        rank /= 3;
    }
    digits[0] = rank;
    let mut letters = vec![Letter::ALL[digits[0] as usize]];
    for &d in &digits[1..] {
        let prev = *letters.last().expect("nonempty");
        letters.push(successors(prev).nth(d as usize).expect("digit < 3"));
    }
    F2Word(letters)
}

/// All reduced words of length ≤ `len`, in enumeration order.
pub fn words_up_to(len: usize) -> impl Iterator<Item = F2Word> {
    (0..count_up_to(len)).map(enumerate)
}

/// Finite description of an element of 2^{F₂}.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Description {
    /// `default` everywhere except at finitely many words.
    Finite { default: Bit, exceptions: BTreeMap<F2Word, Bit> },
    /// The left translate `shift · base(seed)` of a pseudorandom base point.
    Seeded {
        #[serde(with = "hex_seed")]
        seed: u64,
        shift: F2Word,
    },
}

pub(crate) mod hex_seed {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{seed:#x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_seed(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses a 64-bit seed written in hex, with or without a `0x` prefix.
pub fn parse_seed(s: &str) -> Result<u64, GroupError> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|_| GroupError::BadSeed(s.to_string()))
}

/// An element of 2^{F₂}, identified by its canonical description.
///
/// Equality, ordering and hashing use the description only; two different
/// descriptions of the same function are distinct configurations.
#[derive(Clone)]
pub struct Configuration {
    desc: Description,
    key: Arc<str>,
}

impl Configuration {
    pub fn from_description(desc: Description) -> Self {
        let desc = match desc {
            Description::Finite { default, exceptions } => Description::Finite {
                default,
                exceptions: exceptions.into_iter().filter(|(_, b)| *b != default).collect(),
            },
            seeded => seeded,
        };
        let key = serde_json::to_string(&desc).expect("description serializes").into();
        Configuration { desc, key }
    }

    pub fn constant(bit: Bit) -> Self {
        Self::finite(bit, BTreeMap::new())
    }

    pub fn finite(default: Bit, exceptions: BTreeMap<F2Word, Bit>) -> Self {
        Self::from_description(Description::Finite { default, exceptions })
    }

    pub fn seeded(seed: u64) -> Self {
        Self::from_description(Description::Seeded { seed, shift: F2Word::identity() })
    }

    pub fn description(&self) -> &Description {
        &self.desc
    }

    /// Canonical JSON text of the description.
    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn evaluate(&self, h: &F2Word) -> Bit {
        match &self.desc {
            Description::Finite { default, exceptions } => exceptions.get(h).copied().unwrap_or(*default),
            Description::Seeded { seed, shift } => {
                let u = mul(&inv(shift), h);
                Bit::from(prf::derive(*seed, "configuration", &[u.to_string().as_bytes()]) & 1 == 1)
            }
        }
    }
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Configuration {}

impl std::hash::Hash for Configuration {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}

impl PartialOrd for Configuration {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Configuration {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key)
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({})", self.key)
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.desc.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Description::deserialize(d).map(Configuration::from_description)
    }
}

/// Left shift: (g·x)(h) = x(g⁻¹h). Acts on the description, so
/// `act(u, act(v, x))` and `act(mul(u, v), x)` are identical values.
pub fn act(g: &F2Word, x: &Configuration) -> Configuration {
    if g.is_identity() {
        return x.clone();
    }
    let desc = match &x.desc {
        Description::Finite { default, exceptions } => Description::Finite {
            default: *default,
            exceptions: exceptions.iter().map(|(w, b)| (mul(g, w), *b)).collect(),
        },
        Description::Seeded { seed, shift } => Description::Seeded { seed: *seed, shift: mul(g, shift) },
    };
    Configuration::from_description(desc)
}

/// `(w, w·x)` for every reduced word with |w| ≤ `radius`, in enumeration order.
pub fn orbit_ball(x: &Configuration, radius: usize) -> Vec<(F2Word, Configuration)> {
    words_up_to(radius).map(|w| {
        let y = act(&w, x);
        (w, y)
    }).collect()
}

/// Searches for g with |g| ≤ `witness_len` such that g·x and y agree on every
/// word of length ≤ `radius`. A witness is only sound for the checked ball.
pub fn bounded_equiv(
    x: &Configuration,
    y: &Configuration,
    witness_len: usize,
    radius: usize,
) -> Option<F2Word> {
    let ball: Vec<F2Word> = words_up_to(radius).collect();
    let y_values: Vec<Bit> = ball.iter().map(|h| y.evaluate(h)).collect();
    words_up_to(witness_len).find(|g| {
        let gx = act(g, x);
        ball.iter().zip(&y_values).all(|(h, yb)| gx.evaluate(h) == *yb)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn word(s: &str) -> F2Word {
        s.parse().unwrap()
    }

    /// All reduced words up to `len` by brute-force generation and sorting.
    fn brute_force_listing(len: usize) -> Vec<Vec<Letter>> {
        let mut all = vec![vec![]];
        let mut frontier: Vec<Vec<Letter>> = vec![vec![]];
        for _ in 0..len {
            let mut next = vec![];
            for w in &frontier {
                for l in Letter::ALL {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        let mut reduced: Vec<Vec<Letter>> = all
            .into_iter()
            .filter(|w| w.windows(2).all(|p| p[1] != p[0].inverse()))
            .collect();
        reduced.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        reduced
    }

    #[test]
    fn reduce_examples() {
        use Letter::*;
        assert_eq!(reduce([A, AInv]), F2Word::identity());
        assert_eq!(reduce([A, B, BInv, A]), F2Word(vec![A, A]));
        assert_eq!(reduce([A, B, AInv]), F2Word(vec![A, B, AInv]));
        assert_eq!(word("abBa"), word("aa"));
    }

    #[test]
    fn group_examples() {
        assert_eq!(mul(&word("a"), &word("A")), F2Word::identity());
        assert_eq!(inv(&word("ab")).to_string(), "BA");
        assert_eq!(mul(&F2Word::identity(), &word("bAb")), word("bAb"));
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let listing = brute_force_listing(5);
        for (i, letters) in listing.iter().enumerate() {
            assert_eq!(enumerate(i as u64).0, *letters, "index {i}");
            assert_eq!(index_of(&F2Word(letters.clone())), i as u64);
        }
        let counts: Vec<usize> =
            (0..=4).map(|l| listing.iter().filter(|w| w.len() == l).count()).collect();
        assert_eq!(counts, [1, 4, 12, 36, 108]);
    }

    #[test]
    fn enumeration_first_entries() {
        let firsts: Vec<String> = (0..5).map(|i| enumerate(i).to_string()).collect();
        assert_eq!(firsts, ["", "a", "A", "b", "B"]);
        assert_eq!(enumerate(5).to_string(), "aa");
    }

    #[test]
    fn action_examples() {
        let x = Configuration::seeded(42);
        assert_eq!(act(&F2Word::identity(), &x), x);
        let spike = Configuration::finite(Bit::Zero, [(F2Word::identity(), Bit::One)].into_iter().collect());
        let shifted = act(&word("a"), &spike);
        assert_eq!(
            shifted.description(),
            &Description::Finite { default: Bit::Zero, exceptions: [(word("a"), Bit::One)].into_iter().collect() }
        );
        assert_eq!(shifted.evaluate(&word("a")), Bit::One);
        assert_eq!(shifted.evaluate(&F2Word::identity()), Bit::Zero);
    }

    #[test]
    fn orbit_ball_sizes() {
        let x = Configuration::seeded(1);
        assert_eq!(orbit_ball(&x, 0), vec![(F2Word::identity(), x.clone())]);
        assert_eq!(orbit_ball(&x, 1).len(), 5);
        assert_eq!(orbit_ball(&x, 3).len(), 53);
    }

    #[test]
    fn bounded_equiv_examples() {
        let x = Configuration::seeded(7);
        let y = act(&word("a"), &x);
        let g = bounded_equiv(&x, &y, 1, 3).expect("witness");
        assert!(words_up_to(3).all(|h| act(&g, &x).evaluate(&h) == y.evaluate(&h)));

        assert_eq!(bounded_equiv(&Configuration::constant(Bit::Zero), &Configuration::constant(Bit::One), 3, 3), None);
        assert_eq!(bounded_equiv(&Configuration::seeded(100), &Configuration::seeded(200), 2, 3), None);
    }

    #[test]
    fn bounded_equiv_finds_every_short_shift() {
        let x = Configuration::seeded(0xfeed);
        for g in words_up_to(3) {
            let y = act(&g, &x);
            for r in 0..=4 {
                assert!(bounded_equiv(&x, &y, g.len(), r).is_some(), "g = {g}, r = {r}");
            }
        }
    }

    #[test]
    fn configuration_json() {
        let c = Configuration::finite(Bit::Zero, [(word("aB"), Bit::One), (word("b"), Bit::Zero)].into_iter().collect());
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"kind":"finite","default":0,"exceptions":{"aB":1}}"#);
        let s = act(&word("b"), &Configuration::seeded(0xdead));
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"kind":"seeded","seed":"0xdead","shift":"b"}"#);
        let back: Configuration = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    fn arb_word(max: usize) -> impl Strategy<Value = F2Word> {
        proptest::collection::vec(0usize..4, 0..=max).prop_map(|v| reduce(v.into_iter().map(|i| Letter::ALL[i])))
    }

    proptest! {
        #[test]
        fn group_axioms(u in arb_word(6), v in arb_word(6), w in arb_word(6)) {
            prop_assert_eq!(mul(&mul(&u, &v), &w), mul(&u, &mul(&v, &w)));
            prop_assert_eq!(mul(&u, &inv(&u)), F2Word::identity());
            prop_assert_eq!(index_of(&enumerate(index_of(&u))), index_of(&u));
        }

        #[test]
        fn action_composes_on_descriptions(u in arb_word(3), v in arb_word(3), seed in any::<u64>(), finite in any::<bool>()) {
            let x = if finite {
                Configuration::finite(Bit::Zero, [(F2Word::identity(), Bit::One), (enumerate(seed % 20), Bit::One)].into_iter().collect())
            } else {
                Configuration::seeded(seed)
            };
            let composed = act(&u, &act(&v, &x));
            let direct = act(&mul(&u, &v), &x);
            prop_assert_eq!(composed.key(), direct.key());
            // extensional check of the action direction on a ball
            let ux = act(&u, &x);
            for h in words_up_to(2) {
                prop_assert_eq!(ux.evaluate(&h), x.evaluate(&mul(&inv(&u), &h)));
            }
        }
    }
}
