//! Bits, finite words, lazy bit- and word-streams, and the pairing/join/column
//! combinators between them.
//!
//! Infinite objects never exist as data here: a stream is an index evaluator
//! plus a label describing where it came from.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::prf;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StreamError {
    #[error("join of an empty sequence of streams")]
    EmptyJoin,
    #[error("invalid bit character {0:?}")]
    BadBit(char),
    #[error("invalid hex digit {0:?}")]
    BadHex(char),
    #[error("hex string of {digits} digits cannot hold {bits} bits")]
    HexLength { digits: usize, bits: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Bit {
    #[default]
    Zero,
    One,
}

impl Bit {
    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn is_one(self) -> bool {
        self == Bit::One
    }

    pub fn to_char(self) -> char {
        match self {
            Bit::Zero => '0',
            Bit::One => '1',
        }
    }

    pub fn from_char(c: char) -> Result<Bit, StreamError> {
        match c {
            '0' => Ok(Bit::Zero),
            '1' => Ok(Bit::One),
            other => Err(StreamError::BadBit(other)),
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl Serialize for Bit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for Bit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            other => Err(serde::de::Error::custom(format!("bit must be 0 or 1, got {other}"))),
        }
    }
}

/// An element of 2^{<ω}. Serialized as a string of '0'/'1'; the empty string
/// is the empty word.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FiniteWord(Vec<Bit>);

impl FiniteWord {
    pub fn empty() -> Self {
        FiniteWord(Vec::new())
    }

    pub fn from_bits(bits: impl IntoIterator<Item = Bit>) -> Self {
        FiniteWord(bits.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Bit> {
        self.0.get(i).copied()
    }

    pub fn bits(&self) -> &[Bit] {
        &self.0
    }

    pub fn push(&mut self, bit: Bit) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &FiniteWord) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }

    pub fn is_prefix_of(&self, other: &FiniteWord) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Hex rendering, four bits per digit, most significant bit first. A
    /// trailing partial nibble is padded with zeros.
    pub fn to_hex(&self) -> String {
        self.0
            .chunks(4)
            .map(|chunk| {
                let nibble = chunk
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (i, b)| acc | (u32::from(b.as_u8()) << (3 - i)));
                char::from_digit(nibble, 16).expect("nibble < 16")
            })
            .collect()
    }

    pub fn from_hex(hex: &str, bits: usize) -> Result<Self, StreamError> {
        let digits: Vec<char> = hex.chars().collect();
        if digits.len() * 4 < bits || digits.len() > bits.div_ceil(4) {
            return Err(StreamError::HexLength { digits: digits.len(), bits });
        }
        let mut word = FiniteWord::empty();
        for c in digits {
            let nibble = c.to_digit(16).ok_or(StreamError::BadHex(c))?;
            for i in 0..4 {
                if word.len() < bits {
                    word.push(Bit::from((nibble >> (3 - i)) & 1 == 1));
                }
            }
        }
        Ok(word)
    }
}

impl fmt::Display for FiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{}", b.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for FiniteWord {
    type Err = StreamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars().map(Bit::from_char).collect::<Result<Vec<_>, _>>().map(FiniteWord)
    }
}

impl Serialize for FiniteWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FiniteWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Position in a stream. Wide enough for the nested pairings produced by
/// repeated jump decoding.
pub type Index = u128;

/// A recursive bijection ω × ω → ω.
pub trait Pairing {
    fn pair(&self, n: Index, m: Index) -> Index;
    fn unpair(&self, k: Index) -> (Index, Index);
}

/// Cantor pairing ⟨n,m⟩ = (n+m)(n+m+1)/2 + m. Satisfies ⟨n,m⟩ ≥ max(n,m).
#[derive(Clone, Copy, Debug, Default)]
pub struct CantorPairing;

impl Pairing for CantorPairing {
    fn pair(&self, n: Index, m: Index) -> Index {
        checked_pair(n, m).unwrap_or_else(|| panic!("pair({n}, {m}) overflows the index type"))
    }

    fn unpair(&self, k: Index) -> (Index, Index) {
        if k < 1 << 52 {
            return unpair_small(k as u64);
        }
        // w = largest diagonal with T(w) <= k, starting from w ≈ sqrt(2k)
        let mut w = match k.checked_mul(2) {
            Some(k2) => k2.isqrt(),
            None => (k / 2).isqrt() * 2,
        };
        while triangle(w).is_none_or(|t| t > k) {
            w -= 1;
        }
        while (w + 1 < Index::MAX) && triangle(w + 1).is_some_and(|t| t <= k) {
            w += 1;
        }
        let m = k - triangle(w).expect("checked above");
        (w - m, m)
    }
}

/// u64 arithmetic with a floating-point first guess; exact for k < 2^52.
fn unpair_small(k: u64) -> (Index, Index) {
    let mut w = (((8 * k + 1) as f64).sqrt() as u64).saturating_sub(1) / 2;
    while w * (w + 1) / 2 > k {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= k {
        w += 1;
    }
    let m = k - w * (w + 1) / 2;
    (Index::from(w - m), Index::from(m))
}

/// w(w+1)/2 without intermediate overflow.
fn triangle(w: Index) -> Option<Index> {
    if w % 2 == 0 {
        (w / 2).checked_mul(w + 1)
    } else {
        w.checked_mul(w.div_ceil(2))
    }
}

/// ⟨n,m⟩, or `None` when it does not fit the index type.
pub fn checked_pair(n: Index, m: Index) -> Option<Index> {
    if n < 1 << 31 && m < 1 << 31 {
        let (n, m) = (n as u64, m as u64);
        return Some(Index::from((n + m) * (n + m + 1) / 2 + m));
    }
    n.checked_add(m).and_then(triangle).and_then(|t| t.checked_add(m))
}

pub fn pair(n: Index, m: Index) -> Index {
    CantorPairing.pair(n, m)
}

pub fn unpair(k: Index) -> (Index, Index) {
    CantorPairing.unpair(k)
}

type BitFn = dyn Fn(Index) -> Bit + Send + Sync;
type WordFn = dyn Fn(Index) -> FiniteWord + Send + Sync;

/// A total, deterministic function ω → {0,1}.
#[derive(Clone)]
pub struct BitStream {
    eval: Arc<BitFn>,
    label: Arc<str>,
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BitStream").field("label", &self.label).finish()
    }
}

impl BitStream {
    pub fn new(label: impl Into<Arc<str>>, eval: impl Fn(Index) -> Bit + Send + Sync + 'static) -> Self {
        BitStream { eval: Arc::new(eval), label: label.into() }
    }

    pub fn constant(bit: Bit) -> Self {
        BitStream::new(format!("const({bit})"), move |_| bit)
    }

    pub fn zeros() -> Self {
        Self::constant(Bit::Zero)
    }

    pub fn ones() -> Self {
        Self::constant(Bit::One)
    }

    /// `prefix` followed by `tail` forever.
    pub fn from_prefix(prefix: FiniteWord, tail: Bit) -> Self {
        BitStream::new(format!("{prefix}{tail}^ω"), move |i| {
            usize::try_from(i).ok().and_then(|i| prefix.get(i)).unwrap_or(tail)
        })
    }

    /// Pseudorandom stream keyed by `seed`.
    pub fn seeded(seed: u64) -> Self {
        BitStream::new(format!("seeded({seed:#x})"), move |i| {
            Bit::from(prf::derive(seed, "bitstream", &[&i.to_le_bytes()]) & 1 == 1)
        })
    }

    pub fn bit(&self, index: Index) -> Bit {
        (self.eval)(index)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<Arc<str>>) -> Self {
        self.label = label.into();
        self
    }

    pub fn prefix(&self, len: usize) -> FiniteWord {
        FiniteWord::from_bits((0..len as Index).map(|i| self.bit(i)))
    }

    /// Index of the first disagreement among the first `len` bits.
    pub fn first_difference(&self, other: &BitStream, len: usize) -> Option<Index> {
        (0..len as Index).find(|&i| self.bit(i) != other.bit(i))
    }

    /// The same stream with bit `index` inverted.
    pub fn with_flip(&self, index: Index) -> Self {
        let inner = self.clone();
        BitStream::new(format!("flip({}, {index})", self.label), move |i| {
            let b = inner.bit(i);
            if i == index {
                b.flip()
            } else {
                b
            }
        })
    }

    /// Caches evaluated bits. The cache is shared by clones of the result.
    pub fn memoized(&self) -> Self {
        let inner = self.clone();
        let cache: Mutex<HashMap<Index, Bit>> = Mutex::new(HashMap::new());
        BitStream::new(self.label.clone(), move |i| {
            if let Some(b) = cache.lock().expect("memo lock").get(&i) {
                return *b;
            }
            let b = inner.bit(i);
            cache.lock().expect("memo lock").insert(i, b);
            b
        })
    }
}

/// A total, deterministic function ω → 2^{<ω}.
#[derive(Clone)]
pub struct WordStream {
    eval: Arc<WordFn>,
    label: Arc<str>,
}

impl fmt::Debug for WordStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WordStream").field("label", &self.label).finish()
    }
}

impl WordStream {
    pub fn new(
        label: impl Into<Arc<str>>,
        eval: impl Fn(Index) -> FiniteWord + Send + Sync + 'static,
    ) -> Self {
        WordStream { eval: Arc::new(eval), label: label.into() }
    }

    pub fn constant(word: FiniteWord) -> Self {
        WordStream::new(format!("const(\"{word}\")"), move |_| word.clone())
    }

    /// Pseudorandom words with lengths uniform in `min_len..=max_len`.
    pub fn seeded(seed: u64, min_len: usize, max_len: usize) -> Self {
        assert!(min_len <= max_len && max_len <= 128, "word length range");
        WordStream::new(format!("seeded({seed:#x})"), move |n| {
            let bytes = prf::derive_bytes(seed, "wordstream", &[&n.to_le_bytes()]);
            let span = (max_len - min_len + 1) as u64;
            let len = min_len + (u64::from(bytes[0]) % span) as usize;
            FiniteWord::from_bits((0..len).map(|i| Bit::from((bytes[1 + i / 8] >> (i % 8)) & 1 == 1)))
        })
    }

    pub fn word(&self, index: Index) -> FiniteWord {
        (self.eval)(index)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn prefix(&self, len: usize) -> Vec<FiniteWord> {
        (0..len as Index).map(|i| self.word(i)).collect()
    }

    /// Concatenation x(0) x(1) … cut to exactly `bits` bits. Gives up after
    /// `bits` consecutive empty words, in which case the result is shorter.
    pub fn flatten(&self, bits: usize) -> FiniteWord {
        let mut out = FiniteWord::empty();
        let mut empties = 0;
        let mut n: Index = 0;
        while out.len() < bits && empties <= bits {
            let w = self.word(n);
            if w.is_empty() {
                empties += 1;
            } else {
                empties = 0;
            }
            out.extend_from(&w);
            n += 1;
        }
        out.truncate(bits);
        out
    }

    pub fn memoized(&self) -> Self {
        let inner = self.clone();
        let cache: Mutex<HashMap<Index, FiniteWord>> = Mutex::new(HashMap::new());
        WordStream::new(self.label.clone(), move |i| {
            if let Some(w) = cache.lock().expect("memo lock").get(&i) {
                return w.clone();
            }
            let w = inner.word(i);
            cache.lock().expect("memo lock").insert(i, w.clone());
            w
        })
    }
}

/// (x ⊕ y)(2n) = x(n), (x ⊕ y)(2n+1) = y(n).
pub fn join2(x: &BitStream, y: &BitStream) -> BitStream {
    let (x, y) = (x.clone(), y.clone());
    BitStream::new(format!("({} ⊕ {})", x.label(), y.label()), move |i| {
        if i % 2 == 0 {
            x.bit(i / 2)
        } else {
            y.bit(i / 2)
        }
    })
}

/// Round-robin join: index k·q + r reads `streams[r]` at q.
pub fn joink(streams: &[BitStream]) -> Result<BitStream, StreamError> {
    if streams.is_empty() {
        return Err(StreamError::EmptyJoin);
    }
    let streams: Arc<[BitStream]> = streams.into();
    let k = streams.len() as Index;
    let label = streams.iter().map(|s| s.label()).collect::<Vec<_>>().join(" ⊕ ");
    Ok(BitStream::new(format!("({label})"), move |i| {
        streams[(i % k) as usize].bit(i / k)
    }))
}

/// The real whose n-th column is `family(n)`.
pub fn join_countable(
    family: impl Fn(Index) -> BitStream + Send + Sync + 'static,
) -> BitStream {
    BitStream::new("⊕_n family(n)", move |i| {
        let (n, m) = unpair(i);
        family(n).bit(m)
    })
}

/// z^{[n]}: m ↦ z(⟨n,m⟩).
pub fn column(z: &BitStream, n: Index) -> BitStream {
    let z = z.clone();
    BitStream::new(format!("{}^[{n}]", z.label()), move |m| z.bit(pair(n, m)))
}

pub fn join_words(x: &WordStream, y: &WordStream) -> WordStream {
    let (x, y) = (x.clone(), y.clone());
    WordStream::new(format!("({} ⊕ {})", x.label(), y.label()), move |i| {
        if i % 2 == 0 {
            x.word(i / 2)
        } else {
            y.word(i / 2)
        }
    })
}
