//! The self-referential embedding
//! `f(x) = J(g(x), f(a·x) ⊕ f(a⁻¹·x) ⊕ f(b·x) ⊕ f(b⁻¹·x))`
//! of the F₂ shift into jump-coded reals, and the checks of its structure.
//!
//! Bit `⟨n, m⟩` of `f(x)` either reads the word `g(x)(n)` or asks for payload
//! bit n, which is bit ⌊n/4⌋ of `f(s·x)` for the generator `s` selected by
//! `n mod 4`. Since ⌊n/4⌋ < ⟨n, m⟩ whenever ⟨n, m⟩ > 0, and `g(x)(0)` is
//! never empty, evaluation always terminates.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};
use thiserror::Error;

use crate::forcing::{mutual_generic, DenseSet, ForcingError, GenericFamily};
use crate::free_group::{act, index_of, mul, Configuration, F2Word, Letter};
use crate::jump::{decode_full, JumpError, TameStream};
use crate::prf;
use crate::report::{params, Finding, Report};
use crate::streams::{checked_pair, unpair, Bit, BitStream, FiniteWord, Index, WordStream};

pub const DEFAULT_DEPTH_CAP: usize = 4;
/// Columns validated eagerly whenever a stream is decoded.
pub const CHECKED_COLUMNS: Index = 16;
/// Prefix on which different decode paths to one word must agree.
pub const PATH_CHECK_BITS: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbeddingError {
    #[error("oracle produced the empty word for {config} at index {index}")]
    OracleViolation { config: String, index: Index },
    #[error("depth {requested} exceeds the cap {cap}")]
    DepthCapExceeded { requested: usize, cap: usize },
    #[error("decode paths to \"{word}\" disagree at bit {index}")]
    PathInconsistency { word: String, index: u64 },
    #[error("decode paths to \"{word}\" reach different descriptions")]
    DescriptionMismatch { word: String },
    #[error("bits of the stream decoded at \"{word}\" have no address below 2^128 in f(x)")]
    IndexOverflow { word: String },
    #[error("evaluating bit {index} took recursion depth {depth}")]
    DepthBound { index: Index, depth: usize },
    #[error(transparent)]
    Jump(#[from] JumpError),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
}

type OracleFn = dyn Fn(&Configuration, Index) -> FiniteWord + Send + Sync;

/// Assigns every configuration a word-valued function, deterministically in
/// the configuration's description.
#[derive(Clone)]
pub enum GenericOracle {
    /// Pseudorandom words of length 1..=8 keyed by (seed, description, index).
    SeededStub { seed: u64 },
    /// Members read their coordinate of a forcing-built generic family; any
    /// other configuration falls back to the seeded stub.
    ForcingBuilt { family: Arc<GenericFamily>, members: Arc<BTreeMap<Configuration, usize>>, fallback_seed: u64 },
    Custom { label: Arc<str>, generate: Arc<OracleFn> },
}

impl std::fmt::Debug for GenericOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GenericOracle({})", self.label())
    }
}

fn stub_word(seed: u64, x: &Configuration, n: Index) -> FiniteWord {
    let bytes = prf::derive_bytes(seed, "oracle", &[x.key().as_bytes(), &n.to_le_bytes()]);
    let len = 1 + usize::from(bytes[0] % 8);
    FiniteWord::from_bits((0..len).map(|i| Bit::from((bytes[1] >> i) & 1 == 1)))
}

impl GenericOracle {
    pub fn seeded(seed: u64) -> Self {
        GenericOracle::SeededStub { seed }
    }

    pub fn custom(
        label: impl Into<Arc<str>>,
        generate: impl Fn(&Configuration, Index) -> FiniteWord + Send + Sync + 'static,
    ) -> Self {
        GenericOracle::Custom { label: label.into(), generate: Arc::new(generate) }
    }

    /// Member `i` reads coordinate `i` of `family`.
    pub fn from_family(family: GenericFamily, members: Vec<Configuration>, fallback_seed: u64) -> Result<Self, EmbeddingError> {
        if members.len() > family.len() {
            return Err(ForcingError::ArityMismatch { expected: members.len(), got: family.len() }.into());
        }
        let map: BTreeMap<Configuration, usize> = members.into_iter().enumerate().map(|(i, c)| (c, i)).collect();
        if map.len() < map.values().max().map_or(0, |m| m + 1) {
            return Err(ForcingError::LayoutMismatch("members must be distinct".into()).into());
        }
        Ok(GenericOracle::ForcingBuilt { family: Arc::new(family), members: Arc::new(map), fallback_seed })
    }

    /// Builds mutually generic words for `members` by meeting, for every
    /// index below `columns`, a seeded-word set per member and then the set
    /// making all members differ; `extra` sets are met last.
    pub fn forcing_built(
        members: Vec<Configuration>,
        seed: u64,
        columns: u64,
        extra: &[DenseSet],
    ) -> Result<Self, EmbeddingError> {
        let k = members.len();
        let mut dense = Vec::new();
        for index in 0..columns {
            for coord in 0..k {
                let seed = prf::split(seed, &format!("member-{coord}"));
                dense.push(DenseSet::SeededWord { coord, index, seed, max_len: 8 });
            }
            if k > 1 {
                dense.push(DenseSet::Differ { index, coords: (0..k).collect() });
            }
        }
        dense.extend_from_slice(extra);
        let family = mutual_generic(k, &dense, &vec![Default::default(); k])?;
        GenericOracle::from_family(family, members, prf::split(seed, "fallback"))
    }

    pub fn word(&self, x: &Configuration, n: Index) -> FiniteWord {
        match self {
            GenericOracle::SeededStub { seed } => stub_word(*seed, x, n),
            GenericOracle::ForcingBuilt { family, members, fallback_seed } => match members.get(x) {
                Some(coord) => family.word(*coord, n),
                None => stub_word(*fallback_seed, x, n),
            },
            GenericOracle::Custom { generate, .. } => generate(x, n),
        }
    }

    /// g(x) as a word stream.
    pub fn generate(&self, x: &Configuration) -> WordStream {
        let (oracle, x) = (self.clone(), x.clone());
        WordStream::new(format!("g({})", x.key()), move |n| oracle.word(&x, n))
    }

    pub fn label(&self) -> String {
        match self {
            GenericOracle::SeededStub { seed } => format!("seeded({seed:#x})"),
            GenericOracle::ForcingBuilt { family, fallback_seed, .. } => {
                format!("forcing({} members, fallback {fallback_seed:#x})", family.len())
            }
            GenericOracle::Custom { label, .. } => label.to_string(),
        }
    }
}

fn generator_for(n: Index) -> Letter {
    Letter::ALL[(n % 4) as usize]
}

/// Evaluates embedding bits for any configuration under one oracle, caching
/// oracle words and bits. Shared by every stream it produces, so a whole
/// orbit reuses one cache.
pub struct Embedder {
    oracle: GenericOracle,
    words: Mutex<HashMap<(Configuration, Index), FiniteWord>>,
    bits: Mutex<HashMap<(Configuration, Index, Index), Bit>>,
}

impl Embedder {
    pub fn new(oracle: GenericOracle) -> Arc<Self> {
        Arc::new(Embedder { oracle, words: Mutex::default(), bits: Mutex::default() })
    }

    pub fn oracle(&self) -> &GenericOracle {
        &self.oracle
    }

    /// `g(x)(n)`, rejecting the empty word.
    pub fn word(&self, x: &Configuration, n: Index) -> Result<FiniteWord, EmbeddingError> {
        let key = (x.clone(), n);
        if let Some(w) = self.words.lock().expect("word cache").get(&key) {
            return Ok(w.clone());
        }
        let w = self.oracle.word(x, n);
        if w.is_empty() {
            return Err(EmbeddingError::OracleViolation { config: x.key().to_string(), index: n });
        }
        self.words.lock().expect("word cache").insert(key, w.clone());
        Ok(w)
    }

    /// Bit `m` of column `n` of `f(x)`, with the number of nested
    /// evaluations it took.
    pub fn column_bit_traced(
        &self,
        x: &Configuration,
        n: Index,
        m: Index,
        use_cache: bool,
    ) -> Result<(Bit, usize), EmbeddingError> {
        // walk down the chain of payload requests, then unwind the flag flips
        let mut chain: Vec<(Configuration, Index, Index, bool)> = Vec::new();
        let (mut config, mut n, mut m) = (x.clone(), n, m);
        let base = loop {
            if use_cache {
                if let Some(b) = self.bits.lock().expect("bit cache").get(&(config.clone(), n, m)) {
                    break *b;
                }
            }
            let word = self.word(&config, n)?;
            let len = word.len() as Index;
            if m < len {
                break word.get(m as usize).expect("m < len");
            }
            let next = act(&F2Word::generator(generator_for(n)), &config);
            chain.push((config, n, m, m == len));
            let (n2, m2) = unpair(n / 4);
            (config, n, m) = (next, n2, m2);
        };
        let depth = chain.len() + 1;
        let mut bit = base;
        let mut cache = self.bits.lock().expect("bit cache");
        if use_cache {
            cache.insert((config, n, m), bit);
        }
        for (config, n, m, flag) in chain.into_iter().rev() {
            if flag {
                bit = bit.flip();
            }
            if use_cache {
                cache.insert((config, n, m), bit);
            }
        }
        Ok((bit, depth))
    }

    pub fn column_bit(&self, x: &Configuration, n: Index, m: Index) -> Result<Bit, EmbeddingError> {
        Ok(self.column_bit_traced(x, n, m, true)?.0)
    }

    pub fn bit(&self, x: &Configuration, k: Index) -> Result<Bit, EmbeddingError> {
        let (n, m) = unpair(k);
        self.column_bit(x, n, m)
    }

    pub fn embed(self: &Arc<Self>, x: &Configuration) -> EmbeddingStream {
        let (column_embedder, skolem_embedder) = (self.clone(), self.clone());
        let (cx, sx) = (x.clone(), x.clone());
        let stream = TameStream::from_columns(
            format!("f({})", x.key()),
            move |n, m| column_embedder.column_bit(&cx, n, m).expect("oracle words are nonempty"),
            move |n| skolem_embedder.word(&sx, n).map_or(1, |w| w.len() as Index + 1),
        );
        EmbeddingStream { config: x.clone(), embedder: self.clone(), stream }
    }
}

/// `f(x)` as a lazily evaluated tame stream.
#[derive(Clone)]
pub struct EmbeddingStream {
    config: Configuration,
    embedder: Arc<Embedder>,
    stream: TameStream,
}

impl EmbeddingStream {
    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn embedder(&self) -> &Arc<Embedder> {
        &self.embedder
    }

    pub fn oracle(&self) -> &GenericOracle {
        self.embedder.oracle()
    }

    pub fn stream(&self) -> &TameStream {
        &self.stream
    }

    pub fn try_bit(&self, k: Index) -> Result<Bit, EmbeddingError> {
        self.embedder.bit(&self.config, k)
    }

    /// Evaluates bit `k` without the cache and checks the recursion depth
    /// stays within `k + 1`.
    pub fn bit_with_depth(&self, k: Index) -> Result<(Bit, usize), EmbeddingError> {
        let (n, m) = unpair(k);
        let (bit, depth) = self.embedder.column_bit_traced(&self.config, n, m, false)?;
        if depth as Index > k + 1 {
            return Err(EmbeddingError::DepthBound { index: k, depth });
        }
        Ok((bit, depth))
    }

    pub fn prefix(&self, len: usize) -> Result<FiniteWord, EmbeddingError> {
        (0..len as Index).map(|k| self.try_bit(k)).collect::<Result<Vec<_>, _>>().map(FiniteWord::from_bits)
    }

    pub fn skolem(&self, n: Index) -> Index {
        self.stream.skolem(n)
    }
}

pub fn embed(x: &Configuration, g: &GenericOracle) -> EmbeddingStream {
    Embedder::new(g.clone()).embed(x)
}

/// One neighbor recovered by decoding: the stream claimed to be `f(s·x)`.
#[derive(Clone)]
pub struct DecodedComponent {
    pub letter: Letter,
    pub config: Configuration,
    pub stream: TameStream,
}

#[derive(Clone)]
pub struct OneStep {
    pub words: WordStream,
    pub components: Vec<DecodedComponent>,
}

/// Decodes a stream claimed to be `f(x)` once: the words component and the
/// four payload components in the order (a, a⁻¹, b, b⁻¹). Each component's
/// Skolem certificate comes from the oracle at the neighbor's description.
pub fn decode_step(x: &Configuration, oracle: &GenericOracle, z: &TameStream) -> Result<OneStep, EmbeddingError> {
    let code = decode_full(z, CHECKED_COLUMNS)?;
    let components = Letter::ALL
        .iter()
        .enumerate()
        .map(|(i, letter)| {
            let config = act(&F2Word::generator(*letter), x);
            let payload = code.payload.clone();
            let label = format!("{}[{i}]", payload.label());
            let bits = BitStream::new(label, move |j| payload.bit(4 * j + i as Index));
            let (oracle, neighbor) = (oracle.clone(), config.clone());
            let stream = TameStream::from_stream(bits, move |n| oracle.word(&neighbor, n).len() as Index + 1);
            DecodedComponent { letter: *letter, config, stream }
        })
        .collect();
    Ok(OneStep { words: code.words, components })
}

pub fn one_step_decode(fx: &EmbeddingStream) -> Result<OneStep, EmbeddingError> {
    decode_step(fx.config(), fx.oracle(), fx.stream())
}

/// The pieces `(f(x))^{(n)}` decodes into: the oracle words of every
/// configuration within distance n - 1 and the embedding streams at distance
/// exactly n, with the iterated jump of 0 kept as a counter.
#[derive(Clone)]
pub struct ContentMultiset {
    pub jump_marker: usize,
    pub g_parts: Vec<(F2Word, WordStream)>,
    pub f_parts: Vec<(F2Word, TameStream)>,
}

pub fn content_at_depth(x: &Configuration, g: &GenericOracle, n: usize) -> Result<ContentMultiset, EmbeddingError> {
    content_at_depth_capped(x, g, n, DEFAULT_DEPTH_CAP)
}

/// Iterates the one-step decode `n` times. Paths reaching an already visited
/// reduced word (by backtracking) must reproduce its description and agree
/// with it on the first [`PATH_CHECK_BITS`] bits.
pub fn content_at_depth_capped(
    x: &Configuration,
    g: &GenericOracle,
    n: usize,
    cap: usize,
) -> Result<ContentMultiset, EmbeddingError> {
    if n > cap {
        return Err(EmbeddingError::DepthCapExceeded { requested: n, cap });
    }
    let root = Embedder::new(g.clone()).embed(x);
    let mut seen: BTreeMap<F2Word, TameStream> = BTreeMap::new();
    seen.insert(F2Word::identity(), root.stream().clone());
    let mut level: Vec<(F2Word, Configuration, TameStream, DecodePath)> =
        vec![(F2Word::identity(), x.clone(), root.stream().clone(), Vec::new())];
    let mut g_parts = Vec::new();
    for _ in 0..n {
        let mut next: BTreeMap<u64, (F2Word, Configuration, TameStream, DecodePath)> = BTreeMap::new();
        for (word, config, stream, path) in &level {
            let step = decode_step(config, g, stream)?;
            g_parts.push((word.clone(), step.words));
            for component in step.components {
                let reached = mul(&F2Word::generator(component.letter), word);
                if component.config != act(&reached, x) {
                    return Err(EmbeddingError::DescriptionMismatch { word: reached.to_string() });
                }
                let mut path = path.clone();
                path.push((component.letter.index(), stream.clone()));
                if !decodable(&path, &component.stream) {
                    return Err(EmbeddingError::IndexOverflow { word: reached.to_string() });
                }
                if let Some(earlier) = seen.get(&reached) {
                    if let Some(index) = (0..PATH_CHECK_BITS as Index)
                        .find(|j| earlier.bit(*j) != component.stream.bit(*j))
                    {
                        return Err(EmbeddingError::PathInconsistency {
                            word: reached.to_string(),
                            index: index as u64,
                        });
                    }
                    continue;
                }
                next.insert(index_of(&reached), (reached, component.config, component.stream, path));
            }
        }
        level = next.into_values().collect();
        for (word, _, stream, _) in &level {
            seen.insert(word.clone(), stream.clone());
        }
    }
    g_parts.sort_by_key(|(w, _)| index_of(w));
    let f_parts = level.into_iter().map(|(w, _, s, _)| (w, s)).collect();
    Ok(ContentMultiset { jump_marker: n, g_parts, f_parts })
}

/// The decodes leading from `f(x)` to a stream: at each step, the letter
/// position of the component taken and the stream it was taken from.
type DecodePath = Vec<(usize, TameStream)>;

/// Whether bit `(n, m)` of the stream at the end of `path` has an address in
/// `f(x)` that fits the index type. Each decode squares addresses, roughly.
fn addressable(path: &DecodePath, n: Index, m: Index) -> bool {
    let (mut n, mut m) = (n, m);
    for (i, parent) in path.iter().rev() {
        let Some(column) = checked_pair(n, m).and_then(|k| k.checked_mul(4)).and_then(|k| k.checked_add(*i as Index))
        else {
            return false;
        };
        m = parent.skolem(column);
        n = column;
    }
    true
}

/// Whether every bit a later decode or path check reads is addressable.
fn decodable(path: &DecodePath, stream: &TameStream) -> bool {
    (0..PATH_CHECK_BITS as Index).all(|k| {
        let (n, m) = unpair(k);
        addressable(path, n, m)
    }) && (0..CHECKED_COLUMNS).all(|n| (0..=stream.skolem(n)).all(|m| addressable(path, n, m)))
}

fn first_mismatch(a: &TameStream, b: &TameStream, len: usize) -> Option<u64> {
    (0..len as Index).find(|k| a.bit(*k) != b.bit(*k)).map(|k| k as u64)
}

/// Checks each decoded neighbor of `f(x)` against `f(s·x)` computed directly.
pub fn verify_homomorphism(x: &Configuration, g: &GenericOracle, prefix_len: usize) -> Report {
    verify_homomorphism_on(x, g, embed(x, g).stream(), prefix_len)
}

/// As [`verify_homomorphism`], decoding `z` in place of `f(x)`; used to run
/// the check against corrupted streams.
pub fn verify_homomorphism_on(x: &Configuration, g: &GenericOracle, z: &TameStream, prefix_len: usize) -> Report {
    let p = params([
        ("config", json!(x.key())),
        ("oracle", json!(g.label())),
        ("prefix_len", json!(prefix_len)),
    ]);
    let step = match decode_step(x, g, z) {
        Ok(step) => step,
        Err(e) => return Report::new("verify-hom", p, vec![Finding::fail("decode").with_detail(e.to_string())]),
    };
    // a fresh embedder, so the direct side shares no cache with the decoded side
    let direct = Embedder::new(g.clone());
    let findings = step
        .components
        .iter()
        .map(|c| {
            let expected = direct.embed(&c.config);
            Finding::mismatch(c.letter.to_char().to_string(), first_mismatch(&c.stream, expected.stream(), prefix_len))
                .vacuous(prefix_len == 0)
                .with_detail(json!({ "neighbor": c.config.key() }))
        })
        .collect();
    Report::new("verify-hom", p, findings)
}

/// Looks for the flattened prefix of `g(y)` among the oracle words and the
/// decoded words of the residual streams in `content_at_depth(x, g, depth)`.
/// Passes when it is found nowhere.
pub fn verify_separation(
    x: &Configuration,
    y: &Configuration,
    g: &GenericOracle,
    depth: usize,
    prefix_len: usize,
) -> Report {
    verify_separation_capped(x, y, g, depth, prefix_len, DEFAULT_DEPTH_CAP)
}

pub fn verify_separation_capped(
    x: &Configuration,
    y: &Configuration,
    g: &GenericOracle,
    depth: usize,
    prefix_len: usize,
    cap: usize,
) -> Report {
    let p = params([
        ("x", json!(x.key())),
        ("y", json!(y.key())),
        ("oracle", json!(g.label())),
        ("depth", json!(depth)),
        ("prefix_len", json!(prefix_len)),
    ]);
    let content = match content_at_depth_capped(x, g, depth, cap) {
        Ok(c) => c,
        Err(e) => return Report::new("verify-cohom", p, vec![Finding::fail("content").with_detail(e.to_string())]),
    };
    let target = g.generate(y).flatten(prefix_len);
    let vacuous = prefix_len == 0;
    let g_matches: Vec<Value> = content
        .g_parts
        .iter()
        .filter(|(_, words)| !vacuous && words.flatten(prefix_len) == target)
        .map(|(w, _)| json!(w.to_string()))
        .collect();
    let mut f_matches = Vec::new();
    for (w, stream) in &content.f_parts {
        match decode_full(stream, CHECKED_COLUMNS) {
            Ok(code) if !vacuous && code.words.flatten(prefix_len) == target => f_matches.push(json!(w.to_string())),
            Ok(_) => {}
            Err(e) => {
                return Report::new(
                    "verify-cohom",
                    p,
                    vec![Finding::fail(format!("decode f_part {w}")).with_detail(e.to_string())],
                )
            }
        }
    }
    let findings = vec![
        Finding::check("g_parts", g_matches.is_empty())
            .vacuous(vacuous || content.g_parts.is_empty())
            .with_detail(json!({ "checked": content.g_parts.len(), "matches": g_matches })),
        Finding::check("f_parts", f_matches.is_empty())
            .vacuous(vacuous)
            .with_detail(json!({ "checked": content.f_parts.len(), "matches": f_matches })),
    ];
    Report::new("verify-cohom", p, findings)
}
