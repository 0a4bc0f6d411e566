//! The jump-coding codec.
//!
//! `encode(x, y)` builds the real whose n-th column is `x(n)` followed by the
//! flag bit `1 - y(n)` and then `y(n)` forever. Each column therefore has a
//! limit, and the stabilization point `|x(n)| + 1` travels with the stream as
//! a Skolem certificate so that one level of jump decoding is computable.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conditions::{BitCondition, WordCondition};
use crate::streams::{pair, unpair, Bit, BitStream, FiniteWord, Index, WordStream};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JumpError {
    #[error("column {column} is not in the image of the jump codec (no flag bit)")]
    NotAJumpCode { column: Index },
    #[error("index {index} is in dom(p) but not in dom(r)")]
    DomainMismatch { index: u64 },
    #[error("encoded document is inconsistent: {0}")]
    Malformed(String),
}

pub type SkolemFn = Arc<dyn Fn(Index) -> Index + Send + Sync>;
type ColumnFn = dyn Fn(Index, Index) -> Bit + Send + Sync;

/// A stream whose every column has a limit, together with an upper bound on
/// where each column stabilizes.
///
/// Bits are addressed by `(column, position)`; the flat view goes through the
/// pairing. Keeping the column address avoids composing pairings when decoded
/// streams are decoded again.
#[derive(Clone)]
pub struct TameStream {
    column: Arc<ColumnFn>,
    skolem: SkolemFn,
    label: Arc<str>,
}

impl fmt::Debug for TameStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TameStream").field("label", &self.label).finish()
    }
}

impl TameStream {
    /// Trusted constructor: the caller guarantees column n is constant from
    /// `skolem(n)` on.
    pub fn from_columns(
        label: impl Into<Arc<str>>,
        column: impl Fn(Index, Index) -> Bit + Send + Sync + 'static,
        skolem: impl Fn(Index) -> Index + Send + Sync + 'static,
    ) -> Self {
        TameStream { column: Arc::new(column), skolem: Arc::new(skolem), label: label.into() }
    }

    pub fn from_stream(stream: BitStream, skolem: impl Fn(Index) -> Index + Send + Sync + 'static) -> Self {
        let label: Arc<str> = stream.label().into();
        TameStream::from_columns(label, move |n, m| stream.bit(pair(n, m)), skolem)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn column_bit(&self, n: Index, m: Index) -> Bit {
        (self.column)(n, m)
    }

    pub fn bit(&self, k: Index) -> Bit {
        let (n, m) = unpair(k);
        self.column_bit(n, m)
    }

    pub fn skolem(&self, n: Index) -> Index {
        (self.skolem)(n)
    }

    pub fn skolem_fn(&self) -> SkolemFn {
        self.skolem.clone()
    }

    pub fn stream(&self) -> BitStream {
        let this = self.clone();
        BitStream::new(self.label.clone(), move |k| this.bit(k))
    }

    pub fn column(&self, n: Index) -> BitStream {
        let this = self.clone();
        BitStream::new(format!("{}^[{n}]", self.label), move |m| this.column_bit(n, m))
    }

    pub fn prefix(&self, len: usize) -> FiniteWord {
        self.stream().prefix(len)
    }

    /// Samples positions `skolem(n) ..= skolem(n) + window` of column n and
    /// reports whether they are all equal.
    pub fn bound_holds(&self, n: Index, window: Index) -> bool {
        let b = self.skolem(n);
        let tail = self.column_bit(n, b);
        (b..=b + window).all(|m| self.column_bit(n, m) == tail)
    }

    /// The same stream and certificate with the flat bit `k` inverted. Used for
    /// fault injection; the result need not be tame.
    pub fn with_flip(&self, k: Index) -> TameStream {
        let (fn_, fm) = unpair(k);
        let inner = self.clone();
        TameStream {
            column: Arc::new(move |n, m| {
                let b = inner.column_bit(n, m);
                if (n, m) == (fn_, fm) {
                    b.flip()
                } else {
                    b
                }
            }),
            skolem: self.skolem.clone(),
            label: format!("flip({}, {k})", self.label).into(),
        }
    }

    pub fn relabel(mut self, label: impl Into<Arc<str>>) -> Self {
        self.label = label.into();
        self
    }
}

/// The pair (x, y) that a jump code carries.
#[derive(Clone, Debug)]
pub struct JumpCode {
    pub words: WordStream,
    pub payload: BitStream,
}

/// J(x, y).
pub fn encode(x: &WordStream, y: &BitStream) -> TameStream {
    let label = format!("J({}, {})", x.label(), y.label());
    let (xc, yc) = (x.clone(), y.clone());
    let xs = x.clone();
    TameStream::from_columns(
        label,
        move |n, m| {
            let word = xc.word(n);
            let len = word.len() as Index;
            match m.cmp(&len) {
                std::cmp::Ordering::Less => word.get(m as usize).expect("m < len"),
                std::cmp::Ordering::Equal => yc.bit(n).flip(),
                std::cmp::Ordering::Greater => yc.bit(n),
            }
        },
        move |n| xs.word(n).len() as Index + 1,
    )
}

/// n ↦ z(⟨n, skolem(n)⟩).
pub fn decode_limit(z: &TameStream) -> BitStream {
    let z = z.clone();
    BitStream::new(format!("lim({})", z.label()), move |n| z.column_bit(n, z.skolem(n)))
}

/// Least i such that column n is constant from i on. Scans down from the
/// certified bound.
pub fn decode_skolem_exact(z: &TameStream, n: Index) -> Index {
    let bound = z.skolem(n);
    let tail = z.column_bit(n, bound);
    let mut i = bound;
    while i > 0 && z.column_bit(n, i - 1) == tail {
        i -= 1;
    }
    i
}

/// Recovers `(x(n), y(n))` from column n.
pub fn decode_column(z: &TameStream, n: Index) -> Result<(FiniteWord, Bit), JumpError> {
    let exact = decode_skolem_exact(z, n);
    if exact == 0 {
        return Err(JumpError::NotAJumpCode { column: n });
    }
    let word = FiniteWord::from_bits((0..exact - 1).map(|m| z.column_bit(n, m)));
    Ok((word, z.column_bit(n, exact)))
}

/// Inverts `encode`. Columns `0..checked_columns` are validated eagerly; later
/// columns decode lazily, and a constant (flagless) column among them reads
/// as the empty word with its constant value as payload.
pub fn decode_full(z: &TameStream, checked_columns: Index) -> Result<JumpCode, JumpError> {
    for n in 0..checked_columns {
        decode_column(z, n)?;
    }
    let zw = z.clone();
    let words = WordStream::new(format!("words({})", z.label()), move |n| {
        decode_column(&zw, n).map(|(w, _)| w).unwrap_or_default()
    });
    Ok(JumpCode { words, payload: decode_limit(z) })
}

/// J(p, r): the partial real whose n-th column is defined exactly when
/// n ∈ dom(p). Held as the finite description, never as a set of pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialBitmap {
    p: WordCondition,
    r: BitCondition,
}

pub fn encode_partial(p: &WordCondition, r: &BitCondition) -> Result<PartialBitmap, JumpError> {
    if let Some(index) = p.domain().find(|n| !r.contains(*n)) {
        return Err(JumpError::DomainMismatch { index });
    }
    Ok(PartialBitmap { p: p.clone(), r: r.clone() })
}

impl PartialBitmap {
    pub fn words(&self) -> &WordCondition {
        &self.p
    }

    pub fn payload(&self) -> &BitCondition {
        &self.r
    }

    pub fn is_column_defined(&self, n: u64) -> bool {
        self.p.contains(n)
    }

    pub fn column_bit(&self, n: u64, m: u64) -> Option<Bit> {
        let word = self.p.get(n)?;
        let y = *self.r.get(n).expect("dom(p) ⊆ dom(r)");
        let len = word.len() as u64;
        Some(match m.cmp(&len) {
            std::cmp::Ordering::Less => word.get(m as usize).expect("m < len"),
            std::cmp::Ordering::Equal => y.flip(),
            std::cmp::Ordering::Greater => y,
        })
    }

    pub fn get(&self, k: Index) -> Option<Bit> {
        let (n, m) = unpair(k);
        self.column_bit(u64::try_from(n).ok()?, u64::try_from(m).unwrap_or(u64::MAX))
    }
}

/// JSON form of the first `depth` indices of a jump code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpCodePrefix {
    pub words: Vec<FiniteWord>,
    pub payload: FiniteWord,
    pub depth: usize,
}

impl JumpCodePrefix {
    pub fn capture(code: &JumpCode, depth: usize) -> Self {
        JumpCodePrefix { words: code.words.prefix(depth), payload: code.payload.prefix(depth), depth }
    }

    pub fn validate(&self) -> Result<(), JumpError> {
        if self.words.len() != self.depth || self.payload.len() != self.depth {
            return Err(JumpError::Malformed(format!(
                "depth {} but {} words and {} payload bits",
                self.depth,
                self.words.len(),
                self.payload.len()
            )));
        }
        Ok(())
    }

    /// Streams extending the prefix by empty words and zero payload bits.
    pub fn to_jump_code(&self) -> JumpCode {
        let words = self.words.clone();
        let payload = self.payload.clone();
        JumpCode {
            words: WordStream::new("prefix-words", move |n| {
                usize::try_from(n).ok().and_then(|n| words.get(n)).cloned().unwrap_or_default()
            }),
            payload: BitStream::from_prefix(payload, Bit::Zero),
        }
    }
}

/// JSON form of the first `depth` columns of a tame stream: each column up to
/// and including its certified stabilization point, plus the certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedPrefix {
    pub depth: usize,
    pub skolem: Vec<u64>,
    pub columns: Vec<FiniteWord>,
}

impl EncodedPrefix {
    pub fn capture(z: &TameStream, depth: usize) -> Self {
        let skolem: Vec<u64> = (0..depth as Index)
            .map(|n| u64::try_from(z.skolem(n)).expect("bound fits u64"))
            .collect();
        let columns = skolem
            .iter()
            .enumerate()
            .map(|(n, &b)| FiniteWord::from_bits((0..=Index::from(b)).map(|m| z.column_bit(n as Index, m))))
            .collect();
        EncodedPrefix { depth, skolem, columns }
    }

    /// Rebuilds a tame stream whose first `depth` columns match the document.
    /// Columns beyond the depth are all zero with bound 0.
    pub fn to_tame(&self) -> Result<TameStream, JumpError> {
        if self.skolem.len() != self.depth || self.columns.len() != self.depth {
            return Err(JumpError::Malformed(format!(
                "depth {} but {} bounds and {} columns",
                self.depth,
                self.skolem.len(),
                self.columns.len()
            )));
        }
        for (n, (col, &b)) in self.columns.iter().zip(&self.skolem).enumerate() {
            if col.len() as u64 != b + 1 {
                return Err(JumpError::Malformed(format!(
                    "column {n} has {} bits, expected skolem + 1 = {}",
                    col.len(),
                    b + 1
                )));
            }
        }
        let columns = self.columns.clone();
        let bounds = self.skolem.clone();
        Ok(TameStream::from_columns(
            "encoded-prefix",
            move |n, m| match usize::try_from(n).ok().and_then(|n| columns.get(n)) {
                Some(col) => {
                    let last = col.len() - 1;
                    col.get(usize::try_from(m).unwrap_or(usize::MAX).min(last)).expect("nonempty column")
                }
                None => Bit::Zero,
            },
            move |n| usize::try_from(n).ok().and_then(|n| bounds.get(n)).map_or(0, |b| Index::from(*b)),
        ))
    }
}
