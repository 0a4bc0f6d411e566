//! Dense sets of product conditions and the generics built from them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::functional::{eval_functional, exists_halting_extension, halting_extension_where, Evaluation, OracleFunctional};
use super::layout::{split_index, Component, CompositeOracle, OracleLayout};
use super::ForcingError;
use crate::conditions::{realize_word, BitCondition, WordCondition};
use crate::prf;
use crate::streams::{Bit, FiniteWord, Index, WordStream};

/// More undecided columns than this and a meet refuses to enumerate completions.
pub const MAX_COMPLETION_COLUMNS: usize = 20;

type MeetFn = dyn Fn(&[WordCondition]) -> Vec<WordCondition> + Send + Sync;

/// A dense subset of a finite product of word-valued condition posets, given
/// by a procedure that extends any condition into it.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DenseSet {
    /// Index `index` of coordinate `coord` holds a word of length ≥ `length`.
    MinLength {
        #[serde(default)]
        coord: usize,
        index: u64,
        length: usize,
    },
    /// Index `index` of coordinate `coord` is assigned; fresh assignments
    /// draw a pseudorandom word of length 1..=`max_len`.
    SeededWord {
        #[serde(default)]
        coord: usize,
        index: u64,
        #[serde(with = "crate::free_group::hex_seed")]
        seed: u64,
        max_len: usize,
    },
    /// The listed coordinates hold pairwise different words at some index ≥ `index`.
    Differ { index: u64, coords: Vec<usize> },
    /// The halting of `functional` on the composite oracle is decided for
    /// every completion of the jump coordinates.
    JumpDecision { layout: OracleLayout, functional: OracleFunctional },
    /// The output of `functional` disagrees with coordinate `target`, or is
    /// forced never to appear, for every completion.
    Avoid { layout: OracleLayout, target: usize, functional: OracleFunctional },
    /// `inner`, applied to the listed coordinates of a larger product.
    Lifted { coords: Vec<usize>, inner: Box<DenseSet> },
    #[serde(skip)]
    Custom { description: String, arity: usize, meet: Arc<MeetFn> },
}

impl fmt::Debug for DenseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseSet({})", self.description())
    }
}

pub fn jump_decision_dense(functional: OracleFunctional, layout: OracleLayout) -> DenseSet {
    DenseSet::JumpDecision { layout, functional }
}

/// Errors with `LayoutMismatch` if the target coordinate is also read by the layout.
pub fn avoid_dense(functional: OracleFunctional, layout: OracleLayout, target: usize) -> Result<DenseSet, ForcingError> {
    if layout.coordinates().any(|c| c == target) {
        return Err(ForcingError::LayoutMismatch(format!("target coordinate {target} is part of the oracle")));
    }
    Ok(DenseSet::Avoid { layout, target, functional })
}

impl DenseSet {
    pub fn custom(
        description: impl Into<String>,
        arity: usize,
        meet: impl Fn(&[WordCondition]) -> Vec<WordCondition> + Send + Sync + 'static,
    ) -> Self {
        DenseSet::Custom { description: description.into(), arity, meet: Arc::new(meet) }
    }

    pub fn lifted(self, coords: Vec<usize>) -> Result<Self, ForcingError> {
        let mut sorted = coords.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != coords.len() || coords.len() < self.arity() {
            return Err(ForcingError::LayoutMismatch(format!(
                "cannot lift a {}-ary dense set onto coordinates {coords:?}",
                self.arity()
            )));
        }
        Ok(DenseSet::Lifted { coords, inner: Box::new(self) })
    }

    /// Least number of coordinates the set reads.
    pub fn arity(&self) -> usize {
        match self {
            DenseSet::MinLength { coord, .. } | DenseSet::SeededWord { coord, .. } => coord + 1,
            DenseSet::Differ { coords, .. } | DenseSet::Lifted { coords, .. } => {
                coords.iter().map(|c| c + 1).max().unwrap_or(0)
            }
            DenseSet::JumpDecision { layout, .. } => layout.required_coords(),
            DenseSet::Avoid { layout, target, .. } => layout.required_coords().max(target + 1),
            DenseSet::Custom { arity, .. } => *arity,
        }
    }

    pub fn description(&self) -> String {
        match self {
            DenseSet::MinLength { coord, index, length } => format!("coordinate {coord} index {index} has length >= {length}"),
            DenseSet::SeededWord { coord, index, .. } => format!("coordinate {coord} index {index} assigned"),
            DenseSet::Differ { index, coords } => format!("coordinates {coords:?} differ at some index >= {index}"),
            DenseSet::JumpDecision { functional, .. } => format!("halting decided for a depth-{} functional", functional.depth()),
            DenseSet::Avoid { functional, target, .. } => {
                format!("depth-{} functional avoids coordinate {target}", functional.depth())
            }
            DenseSet::Lifted { coords, inner } => format!("{} on coordinates {coords:?}", inner.description()),
            DenseSet::Custom { description, .. } => description.clone(),
        }
    }

    /// Extends `conditions` into the set. The output is checked to extend
    /// the input coordinatewise.
    pub fn meet(&self, conditions: &[WordCondition]) -> Result<Vec<WordCondition>, ForcingError> {
        if conditions.len() < self.arity() {
            return Err(ForcingError::ArityMismatch { expected: self.arity(), got: conditions.len() });
        }
        let out = self.meet_unchecked(conditions)?;
        if out.len() != conditions.len() || out.iter().zip(conditions).any(|(o, c)| !o.extends(c)) {
            return Err(ForcingError::NotAnExtension(self.description()));
        }
        Ok(out)
    }

    /// True when meeting is a no-op, i.e. the condition already lies in the set.
    pub fn is_met(&self, conditions: &[WordCondition]) -> Result<bool, ForcingError> {
        Ok(self.meet(conditions)? == conditions)
    }

    fn meet_unchecked(&self, conditions: &[WordCondition]) -> Result<Vec<WordCondition>, ForcingError> {
        let mut out = conditions.to_vec();
        match self {
            DenseSet::MinLength { coord, index, length } => match out[*coord].get(*index) {
                Some(w) if w.len() >= *length => {}
                Some(w) => {
                    return Err(ForcingError::NotDense(format!(
                        "index {index} already holds \"{w}\", shorter than {length}"
                    )))
                }
                None => {
                    out[*coord].assign(*index, FiniteWord::from_bits(vec![Bit::Zero; (*length).max(1)]));
                }
            },
            DenseSet::SeededWord { coord, index, seed, max_len } => {
                if !out[*coord].contains(*index) {
                    out[*coord].assign(*index, seeded_word(*seed, *index, *max_len));
                }
            }
            DenseSet::Differ { index, coords } => meet_differ(&mut out, *index, coords),
            DenseSet::JumpDecision { layout, functional } => return meet_jump_decision(functional, layout, conditions),
            DenseSet::Avoid { layout, target, functional } => return meet_avoid(functional, layout, *target, conditions),
            DenseSet::Lifted { coords, inner } => {
                let projected: Vec<WordCondition> = coords.iter().map(|c| conditions[*c].clone()).collect();
                for (c, cond) in coords.iter().zip(inner.meet(&projected)?) {
                    out[*c] = cond;
                }
            }
            DenseSet::Custom { meet, .. } => return Ok(meet(conditions)),
        }
        Ok(out)
    }
}

fn seeded_word(seed: u64, index: u64, max_len: usize) -> FiniteWord {
    let max_len = max_len.clamp(1, 128);
    let bytes = prf::derive_bytes(seed, "dense-word", &[&index.to_le_bytes()]);
    let len = 1 + usize::from(bytes[0]) % max_len;
    FiniteWord::from_bits((0..len).map(|i| Bit::from((bytes[1 + i / 8] >> (i % 8)) & 1 == 1)))
}

/// The `i`-th nonempty word in (length, lexicographic) order.
fn nth_word(i: u64) -> FiniteWord {
    // words of length L occupy indices 2^L - 2 .. 2^{L+1} - 2
    let len = (i + 2).ilog2() as usize;
    let offset = i + 2 - (1u64 << len);
    FiniteWord::from_bits((0..len).rev().map(|b| Bit::from((offset >> b) & 1 == 1)))
}

fn differs_at(conditions: &[WordCondition], m: u64, coords: &[usize]) -> bool {
    let words: Option<Vec<&FiniteWord>> = coords.iter().map(|c| conditions[*c].get(m)).collect();
    words.is_some_and(|ws| ws.iter().enumerate().all(|(i, w)| ws[..i].iter().all(|v| v != w)))
}

fn meet_differ(out: &mut [WordCondition], index: u64, coords: &[usize]) {
    if (index..=max_domain(out, coords).max(index)).any(|m| differs_at(out, m, coords)) {
        return;
    }
    for m in index.. {
        let assigned: Vec<&FiniteWord> = coords.iter().filter_map(|c| out[*c].get(m)).collect();
        let distinct = assigned.iter().enumerate().all(|(i, w)| assigned[..i].iter().all(|v| v != w));
        if !distinct {
            continue;
        }
        let mut used: Vec<FiniteWord> = assigned.into_iter().cloned().collect();
        for c in coords {
            if !out[*c].contains(m) {
                let word = (0..).map(nth_word).find(|w| !used.contains(w)).expect("infinitely many words");
                used.push(word.clone());
                out[*c].assign(m, word);
            }
        }
        return;
    }
}

fn max_domain(conditions: &[WordCondition], coords: &[usize]) -> u64 {
    coords.iter().filter_map(|c| conditions[*c].domain().last()).max().unwrap_or(0)
}

/// Lengthens `p` so that `p̂(j)(k) = s(⟨j,k⟩)` for every `⟨j,k⟩ ∈ dom(s)`.
/// Bits of `p`'s existing words must agree with `s`; positions past a word
/// lengthen it, and gaps are filled with 0.
pub fn absorb(p: &WordCondition, s: &BitCondition) -> Result<WordCondition, ForcingError> {
    let mut by_column: BTreeMap<u64, BTreeMap<u64, Bit>> = BTreeMap::new();
    for (index, bit) in s.iter() {
        let (j, k) = split_index(index);
        by_column.entry(j).or_default().insert(k, *bit);
    }
    let mut out = p.clone();
    for (j, mut bits) in by_column {
        if let Some(word) = p.get(j) {
            for (k, b) in word.bits().iter().enumerate() {
                match bits.get(&(k as u64)) {
                    Some(want) if want != b => {
                        return Err(ForcingError::AbsorptionClash { column: j, position: k as u64 })
                    }
                    _ => {
                        bits.insert(k as u64, *b);
                    }
                }
            }
            // a word of length L with no later requirements is left alone
            if bits.len() > word.len() {
                out.replace(j, realize_word(&bits));
            }
        } else {
            out.assign(j, realize_word(&bits));
        }
    }
    Ok(out)
}

/// Columns of jump coordinates whose completion bit some query can see.
fn relevant_columns(f: &OracleFunctional, layout: &OracleLayout, conditions: &[WordCondition]) -> Vec<(usize, u64)> {
    let mut out: Vec<(usize, u64)> = f
        .positions()
        .into_iter()
        .filter_map(|pos| {
            let (slot, index) = layout.locate(pos);
            let Component::Jump(coord) = layout.components()[slot] else { return None };
            let (n, m) = split_index(index);
            let word = conditions[coord].get(n)?;
            (m >= word.len() as u64).then_some((coord, n))
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Every completion of the jump coordinates' domains that differs on the
/// relevant columns; other columns are fixed at 0 since no query reads them.
fn completions(
    layout: &OracleLayout,
    conditions: &[WordCondition],
    relevant: &[(usize, u64)],
) -> Result<Vec<BTreeMap<(usize, u64), Bit>>, ForcingError> {
    if relevant.len() > MAX_COMPLETION_COLUMNS {
        return Err(ForcingError::TooManyCompletions { columns: relevant.len() });
    }
    let base: BTreeMap<(usize, u64), Bit> = layout
        .jump_coordinates()
        .flat_map(|coord| conditions[coord].domain().map(move |n| ((coord, n), Bit::Zero)))
        .collect();
    Ok((0u64..1 << relevant.len())
        .map(|mask| {
            let mut r = base.clone();
            for (i, key) in relevant.iter().enumerate() {
                r.insert(*key, Bit::from((mask >> i) & 1 == 1));
            }
            r
        })
        .collect())
}

/// Writes a found oracle extension back into the chain: jump components go
/// to the side condition, word components become new words.
fn record_extension(
    layout: &OracleLayout,
    conditions: &mut [WordCondition],
    side: &mut BTreeMap<(usize, u64), Bit>,
    extension: &BTreeMap<u64, Bit>,
) {
    let mut word_bits: BTreeMap<(usize, u64), BTreeMap<u64, Bit>> = BTreeMap::new();
    for (pos, bit) in extension {
        let (slot, index) = layout.locate(*pos);
        match layout.components()[slot] {
            Component::Zero => unreachable!("the zero component is total"),
            Component::Jump(coord) => {
                side.insert((coord, index), *bit);
            }
            Component::Word(coord) => {
                let (n, m) = split_index(index);
                word_bits.entry((coord, n)).or_default().insert(m, *bit);
            }
        }
    }
    for ((coord, n), bits) in word_bits {
        let fresh = conditions[coord].assign(n, realize_word(&bits));
        debug_assert!(fresh, "extensions only touch undefined columns");
    }
}

fn absorb_side(
    layout: &OracleLayout,
    conditions: &mut [WordCondition],
    side: &BTreeMap<(usize, u64), Bit>,
) -> Result<(), ForcingError> {
    for coord in layout.jump_coordinates() {
        let s: BitCondition = side.iter().filter(|((c, _), _)| *c == coord).map(|((_, k), b)| (*k, *b)).collect();
        conditions[coord] = absorb(&conditions[coord], &s)?;
    }
    Ok(())
}

fn meet_jump_decision(
    f: &OracleFunctional,
    layout: &OracleLayout,
    conditions: &[WordCondition],
) -> Result<Vec<WordCondition>, ForcingError> {
    layout.check_arity(conditions.len())?;
    let mut current = conditions.to_vec();
    let relevant = relevant_columns(f, layout, &current);
    let mut side = BTreeMap::new();
    for completion in completions(layout, &current, &relevant)? {
        let found = {
            let oracle = CompositeOracle { layout, conditions: &current, completion: &completion, side: &side };
            exists_halting_extension(f, &oracle)
        };
        if let Some(extension) = found {
            record_extension(layout, &mut current, &mut side, &extension);
        }
    }
    absorb_side(layout, &mut current, &side)?;
    Ok(current)
}

/// A functional's output bit `b` is compared with the target as the
/// one-letter word "b"; any assigned word other than that disagrees.
fn ensure_disagreement(target: &mut WordCondition, output: Bit) {
    let agree = FiniteWord::from_bits([output]);
    if target.iter().any(|(_, w)| *w != agree) {
        return;
    }
    let k = target.first_unassigned(0);
    target.assign(k, FiniteWord::from_bits([output.flip()]));
}

fn meet_avoid(
    f: &OracleFunctional,
    layout: &OracleLayout,
    target: usize,
    conditions: &[WordCondition],
) -> Result<Vec<WordCondition>, ForcingError> {
    layout.check_arity(conditions.len())?;
    if target >= conditions.len() || layout.coordinates().any(|c| c == target) {
        return Err(ForcingError::LayoutMismatch(format!("bad target coordinate {target}")));
    }
    let mut current = conditions.to_vec();
    let relevant = relevant_columns(f, layout, &current);
    let mut side = BTreeMap::new();
    for completion in completions(layout, &current, &relevant)? {
        let (now, extension) = {
            let oracle = CompositeOracle { layout, conditions: &current, completion: &completion, side: &side };
            match eval_functional(f, &oracle) {
                Evaluation::Undetermined(_) => (None, halting_extension_where(f, &oracle, |o| o.is_some())),
                e => (Some(e), None),
            }
        };
        let output = match (now, extension) {
            (Some(Evaluation::Halts(Some(b))), _) => b,
            (_, Some(extension)) => {
                record_extension(layout, &mut current, &mut side, &extension);
                let oracle = CompositeOracle { layout, conditions: &current, completion: &completion, side: &side };
                match eval_functional(f, &oracle) {
                    Evaluation::Halts(Some(b)) => b,
                    other => unreachable!("extension must force an output, got {other:?}"),
                }
            }
            // halts without output, diverges, or no extension produces an output
            _ => continue,
        };
        ensure_disagreement(&mut current[target], output);
    }
    absorb_side(layout, &mut current, &side)?;
    Ok(current)
}

/// The totalized union of a chain of product conditions: unassigned indices
/// read as "0".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericFamily {
    conditions: Vec<WordCondition>,
}

impl GenericFamily {
    /// Fails if some coordinate assigns the empty word.
    pub fn new(conditions: Vec<WordCondition>) -> Result<Self, ForcingError> {
        for (coord, c) in conditions.iter().enumerate() {
            if let Some((index, _)) = c.iter().find(|(_, w)| w.is_empty()) {
                return Err(ForcingError::EmptyWord { coord, index });
            }
        }
        Ok(GenericFamily { conditions })
    }

    pub fn conditions(&self) -> &[WordCondition] {
        &self.conditions
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn word(&self, coord: usize, index: Index) -> FiniteWord {
        u64::try_from(index)
            .ok()
            .and_then(|n| self.conditions[coord].get(n).cloned())
            .unwrap_or_else(|| FiniteWord::from_bits([Bit::Zero]))
    }

    pub fn stream(&self, coord: usize) -> WordStream {
        let condition = self.conditions[coord].clone();
        WordStream::new(format!("generic[{coord}]"), move |index| {
            u64::try_from(index)
                .ok()
                .and_then(|n| condition.get(n).cloned())
                .unwrap_or_else(|| FiniteWord::from_bits([Bit::Zero]))
        })
    }

    pub fn streams(&self) -> Vec<WordStream> {
        (0..self.len()).map(|i| self.stream(i)).collect()
    }
}

/// Meets each dense set in order, starting from `start`.
pub fn build_generic(dense: &[DenseSet], start: &WordCondition) -> Result<GenericFamily, ForcingError> {
    mutual_generic(1, dense, std::slice::from_ref(start))
}

pub fn mutual_generic(k: usize, dense: &[DenseSet], start: &[WordCondition]) -> Result<GenericFamily, ForcingError> {
    if start.len() != k {
        return Err(ForcingError::ArityMismatch { expected: k, got: start.len() });
    }
    let mut current = start.to_vec();
    for d in dense {
        current = d.meet(&current)?;
    }
    GenericFamily::new(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::audit;
    use crate::forcing::functional::{random_functional, Node};
    use crate::streams::pair;

    fn wc(items: &[(u64, &str)]) -> WordCondition {
        items.iter().map(|(k, s)| (*k, s.parse().unwrap())).collect()
    }

    fn flat(j: u64, k: u64) -> u64 {
        pair(j as u128, k as u128) as u64
    }

    #[test]
    fn nth_word_order() {
        let words: Vec<String> = (0..8).map(|i| nth_word(i).to_string()).collect();
        assert_eq!(words, ["0", "1", "00", "01", "10", "11", "000", "001"]);
    }

    #[test]
    fn absorb_examples() {
        let p = wc(&[(0, "1")]);
        assert_eq!(absorb(&p, &BitCondition::new()).unwrap(), p);
        let s: BitCondition = [(flat(0, 3), Bit::One)].into_iter().collect();
        assert_eq!(absorb(&p, &s).unwrap(), wc(&[(0, "1001")]));
        let clash: BitCondition = [(flat(0, 0), Bit::Zero)].into_iter().collect();
        assert_eq!(absorb(&p, &clash), Err(ForcingError::AbsorptionClash { column: 0, position: 0 }));
        let fresh: BitCondition = [(flat(2, 1), Bit::One), (flat(0, 0), Bit::One)].into_iter().collect();
        assert_eq!(absorb(&p, &fresh).unwrap(), wc(&[(0, "1"), (2, "01")]));
    }

    #[test]
    fn trivial_functionals_leave_conditions_alone() {
        let conds = vec![wc(&[(0, "1"), (3, "")]), wc(&[(1, "01")])];
        for f in [OracleFunctional::halt(None), OracleFunctional::halt(Some(Bit::One)), OracleFunctional::diverge()] {
            let d = jump_decision_dense(f, OracleLayout::standard());
            assert_eq!(d.meet(&conds).unwrap(), conds);
        }
        let d = avoid_dense(OracleFunctional::diverge(), OracleLayout::standard(), 2).unwrap();
        let triple = vec![conds[0].clone(), conds[1].clone(), WordCondition::new()];
        assert_eq!(d.meet(&triple).unwrap(), triple);
    }

    #[test]
    fn avoid_disagrees_with_constant_output() {
        let d = avoid_dense(OracleFunctional::halt(Some(Bit::One)), OracleLayout::standard(), 2).unwrap();
        let out = d.meet(&[WordCondition::new(), WordCondition::new(), WordCondition::new()]).unwrap();
        assert_eq!(out[2], wc(&[(0, "0")]));
        assert!(avoid_dense(OracleFunctional::diverge(), OracleLayout::standard(), 1).is_err());
    }

    #[test]
    fn jump_decision_absorbs_payload_queries() {
        // query J(p, r) at column 1 (outside dom p), position 2; halt on 1
        let layout = OracleLayout::standard();
        let pos = layout.position(1, flat(1, 2)).unwrap();
        let f = OracleFunctional::new(Node::query(pos, Node::Diverge, Node::Halt(None))).unwrap();
        let out = jump_decision_dense(f, layout).meet(&[WordCondition::new(), WordCondition::new()]).unwrap();
        assert_eq!(out[0], wc(&[(1, "001")]));
    }

    #[test]
    fn build_generic_examples() {
        let g = build_generic(&[], &WordCondition::new()).unwrap();
        assert!((0..20).all(|n| g.word(0, n).to_string() == "0"));
        let dense: Vec<DenseSet> =
            (0..10).map(|n| DenseSet::MinLength { coord: 0, index: n, length: n as usize }).collect();
        let g = build_generic(&dense, &WordCondition::new()).unwrap();
        for n in 0..10u64 {
            assert!(g.word(0, n as u128).len() >= n as usize);
            assert!(!g.word(0, n as u128).is_empty());
        }
        assert!(matches!(
            build_generic(&[], &wc(&[(4, "")])),
            Err(ForcingError::EmptyWord { coord: 0, index: 4 })
        ));
    }

    #[test]
    fn mutual_generic_differ() {
        let dense: Vec<DenseSet> = (0..8).map(|n| DenseSet::Differ { index: n, coords: vec![0, 1] }).collect();
        let g = mutual_generic(2, &dense, &[WordCondition::new(), WordCondition::new()]).unwrap();
        let differing = (0..8u128).filter(|n| g.word(0, *n) != g.word(1, *n)).count();
        assert_eq!(differing, 8);
        // one coordinate reduces to the single builder
        let single = vec![DenseSet::MinLength { coord: 0, index: 2, length: 3 }];
        assert_eq!(
            mutual_generic(1, &single, &[WordCondition::new()]).unwrap(),
            build_generic(&single, &WordCondition::new()).unwrap()
        );
    }

    #[test]
    fn meet_rejects_non_extensions() {
        let bad = DenseSet::custom("drops everything", 1, |_| vec![WordCondition::new()]);
        assert!(matches!(bad.meet(&[wc(&[(0, "1")])]), Err(ForcingError::NotAnExtension(_))));
        let blocked = DenseSet::MinLength { coord: 0, index: 0, length: 3 };
        assert!(matches!(blocked.meet(&[wc(&[(0, "1")])]), Err(ForcingError::NotDense(_))));
        assert!(matches!(blocked.meet(&[]), Err(ForcingError::ArityMismatch { .. })));
    }

    #[test]
    fn lifted_jump_decision_audits() {
        let mut rng = prf::rng(7, "lifted");
        for _ in 0..20 {
            let (f, conds) = audit::random_instance(&mut rng, 6, 2);
            let triple = vec![WordCondition::new(), conds[1].clone(), conds[0].clone()];
            let d = jump_decision_dense(f.clone(), OracleLayout::standard()).lifted(vec![2, 1]).unwrap();
            let out = d.meet(&triple).unwrap();
            assert_eq!(out[0], triple[0]);
            let projected = [out[2].clone(), out[1].clone()];
            let report = audit::audit_jump_decision(&f, &OracleLayout::standard(), &projected);
            assert!(report.passed, "{report:?}");
            assert!(d.is_met(&out).unwrap());
        }
    }

    #[test]
    fn dense_json_round_trip() {
        let mut rng = prf::rng(3, "dense-json");
        let f = random_functional(&mut rng, 3, &[0, 1, 2, 3]);
        let sets = vec![
            DenseSet::MinLength { coord: 0, index: 3, length: 2 },
            DenseSet::SeededWord { coord: 1, index: 0, seed: 0xbeef, max_len: 4 },
            DenseSet::Differ { index: 0, coords: vec![0, 1] },
            jump_decision_dense(f.clone(), OracleLayout::standard()),
            avoid_dense(f, OracleLayout::standard(), 2).unwrap().lifted(vec![0, 1, 2]).unwrap(),
        ];
        let text = serde_json::to_string(&sets).unwrap();
        let back: Vec<DenseSet> = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert!(text.starts_with(r#"[{"kind":"min_length","coord":0,"index":3,"length":2}"#));
        let start = vec![WordCondition::new(); 3];
        let a = mutual_generic(3, &sets, &start).unwrap();
        let b = mutual_generic(3, &back, &start).unwrap();
        assert_eq!(a, b);
    }
}
