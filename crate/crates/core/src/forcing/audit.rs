//! Exhaustive post-hoc checks of the decision dense sets. Deliberately shares
//! no search code with the constructions: the composite oracle is rebuilt from
//! the partial codec and every extension is enumerated outright.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use super::functional::{random_functional, Node, OracleFunctional};
use super::layout::{Component, OracleLayout};
use crate::conditions::{BitCondition, WordCondition};
use crate::jump::encode_partial;
use crate::streams::{unpair, Bit, FiniteWord};

/// Limits on the exhaustive enumeration.
pub const MAX_AUDIT_COLUMNS: usize = 12;
pub const MAX_AUDIT_FREE_POSITIONS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub passed: bool,
    pub completions: u64,
    pub extensions: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl AuditReport {
    fn fail(completions: u64, extensions: u64, why: String) -> Self {
        AuditReport { passed: false, completions, extensions, failure: Some(why) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Walk {
    Halt(Option<Bit>),
    Diverge,
    Stuck,
}

fn walk(node: &Node, lookup: &dyn Fn(u64) -> Option<Bit>) -> Walk {
    match node {
        Node::Halt(o) => Walk::Halt(*o),
        Node::Diverge => Walk::Diverge,
        Node::Query { position, on0, on1 } => match lookup(*position) {
            Some(Bit::Zero) => walk(on0, lookup),
            Some(Bit::One) => walk(on1, lookup),
            None => Walk::Stuck,
        },
    }
}

/// Per completion: the composite bit at a position, if defined.
struct Composite {
    arity: u64,
    slots: Vec<Slot>,
}

enum Slot {
    Zero,
    Coded(crate::jump::PartialBitmap),
}

impl Composite {
    fn get(&self, position: u64) -> Option<Bit> {
        let slot = &self.slots[(position % self.arity) as usize];
        match slot {
            Slot::Zero => Some(Bit::Zero),
            Slot::Coded(bitmap) => bitmap.get(u128::from(position / self.arity)),
        }
    }
}

/// Every completion of the jump coordinates over the columns the functional
/// touches, each paired with its composite oracle.
fn composites(
    f: &OracleFunctional,
    layout: &OracleLayout,
    conditions: &[WordCondition],
) -> Result<Vec<Composite>, String> {
    if layout.required_coords() > conditions.len() {
        return Err("layout addresses a missing coordinate".into());
    }
    let arity = layout.arity() as u64;
    let mut touched: BTreeSet<(usize, u64)> = BTreeSet::new();
    for pos in f.positions() {
        if let Component::Jump(coord) = layout.components()[(pos % arity) as usize] {
            let (n, _) = unpair(u128::from(pos / arity));
            if let Ok(n) = u64::try_from(n) {
                if conditions[coord].contains(n) {
                    touched.insert((coord, n));
                }
            }
        }
    }
    if touched.len() > MAX_AUDIT_COLUMNS {
        return Err(format!("{} touched columns exceed the audit bound", touched.len()));
    }
    let touched: Vec<(usize, u64)> = touched.into_iter().collect();
    let mut out = Vec::new();
    for mask in 0u64..1 << touched.len() {
        let slots = layout
            .components()
            .iter()
            .map(|c| match c {
                Component::Zero => Slot::Zero,
                Component::Jump(coord) => {
                    let r: BitCondition = conditions[*coord]
                        .domain()
                        .map(|n| {
                            let bit = touched
                                .iter()
                                .position(|t| *t == (*coord, n))
                                .is_some_and(|i| (mask >> i) & 1 == 1);
                            (n, Bit::from(bit))
                        })
                        .collect();
                    Slot::Coded(encode_partial(&conditions[*coord], &r).expect("dom(r) = dom(p)"))
                }
                Component::Word(coord) => {
                    let zeros: BitCondition = conditions[*coord].domain().map(|n| (n, Bit::Zero)).collect();
                    Slot::Coded(encode_partial(&conditions[*coord], &zeros).expect("dom(r) = dom(q)"))
                }
            })
            .collect();
        out.push(Composite { arity, slots });
    }
    Ok(out)
}

/// Outcomes of the functional over every assignment of the queried positions
/// the composite leaves undefined.
fn all_extensions(f: &OracleFunctional, composite: &Composite) -> Result<Vec<Walk>, String> {
    let free: Vec<u64> = f.positions().into_iter().filter(|p| composite.get(*p).is_none()).collect();
    if free.len() > MAX_AUDIT_FREE_POSITIONS {
        return Err(format!("{} free positions exceed the audit bound", free.len()));
    }
    Ok((0u64..1 << free.len())
        .map(|mask| {
            let lookup = |pos: u64| {
                composite.get(pos).or_else(|| {
                    free.iter().position(|p| *p == pos).map(|i| Bit::from((mask >> i) & 1 == 1))
                })
            };
            walk(f.root(), &lookup)
        })
        .collect())
}

/// For every completion, the functional halts on the partial oracle or no
/// extension of it makes the functional halt.
pub fn audit_jump_decision(f: &OracleFunctional, layout: &OracleLayout, conditions: &[WordCondition]) -> AuditReport {
    let composites = match composites(f, layout, conditions) {
        Ok(c) => c,
        Err(why) => return AuditReport::fail(0, 0, why),
    };
    let mut extensions = 0;
    for (i, composite) in composites.iter().enumerate() {
        let lookup = |pos: u64| composite.get(pos);
        if matches!(walk(f.root(), &lookup), Walk::Halt(_)) {
            continue;
        }
        let outcomes = match all_extensions(f, composite) {
            Ok(o) => o,
            Err(why) => return AuditReport::fail(i as u64, extensions, why),
        };
        extensions += outcomes.len() as u64;
        if outcomes.iter().any(|w| matches!(w, Walk::Halt(_))) {
            return AuditReport::fail(
                i as u64 + 1,
                extensions,
                format!("completion {i}: undecided, but some extension halts"),
            );
        }
    }
    AuditReport { passed: true, completions: composites.len() as u64, extensions, failure: None }
}

/// For every completion, either the output on the partial oracle disagrees
/// with some assigned word of the target (the bit `b` read as the word "b"),
/// or no extension produces an output.
pub fn audit_avoid(
    f: &OracleFunctional,
    layout: &OracleLayout,
    target: usize,
    conditions: &[WordCondition],
) -> AuditReport {
    if target >= conditions.len() {
        return AuditReport::fail(0, 0, "target coordinate missing".into());
    }
    let composites = match composites(f, layout, conditions) {
        Ok(c) => c,
        Err(why) => return AuditReport::fail(0, 0, why),
    };
    let w = &conditions[target];
    let mut extensions = 0;
    for (i, composite) in composites.iter().enumerate() {
        let lookup = |pos: u64| composite.get(pos);
        match walk(f.root(), &lookup) {
            Walk::Halt(Some(b)) => {
                let agree = FiniteWord::from_bits([b]);
                if !w.iter().any(|(_, word)| *word != agree) {
                    return AuditReport::fail(
                        i as u64 + 1,
                        extensions,
                        format!("completion {i}: output {b} agrees with every assigned target word"),
                    );
                }
            }
            Walk::Halt(None) | Walk::Diverge => {}
            Walk::Stuck => {
                let outcomes = match all_extensions(f, composite) {
                    Ok(o) => o,
                    Err(why) => return AuditReport::fail(i as u64, extensions, why),
                };
                extensions += outcomes.len() as u64;
                if outcomes.iter().any(|o| matches!(o, Walk::Halt(Some(_)))) {
                    return AuditReport::fail(
                        i as u64 + 1,
                        extensions,
                        format!("completion {i}: output undecided, but some extension produces one"),
                    );
                }
            }
        }
    }
    AuditReport { passed: true, completions: composites.len() as u64, extensions, failure: None }
}

/// Checks membership of a condition in a dense set directly from the set's
/// defining property (exhaustively for the functional sets).
pub fn audit_dense(dense: &super::DenseSet, conditions: &[WordCondition]) -> AuditReport {
    use super::DenseSet;
    let simple = |ok: bool, what: String| {
        if ok {
            AuditReport { passed: true, completions: 0, extensions: 0, failure: None }
        } else {
            AuditReport::fail(0, 0, what)
        }
    };
    if conditions.len() < dense.arity() {
        return AuditReport::fail(0, 0, "too few coordinates".into());
    }
    match dense {
        DenseSet::MinLength { coord, index, length } => simple(
            conditions[*coord].get(*index).is_some_and(|w| w.len() >= *length),
            dense.description(),
        ),
        DenseSet::SeededWord { coord, index, .. } => simple(conditions[*coord].contains(*index), dense.description()),
        DenseSet::Differ { index, coords } => {
            let last = coords.iter().filter_map(|c| conditions[*c].domain().last()).max().unwrap_or(0);
            let found = (*index..=last.max(*index)).any(|m| {
                let words: Option<Vec<&FiniteWord>> = coords.iter().map(|c| conditions[*c].get(m)).collect();
                words.is_some_and(|ws| {
                    let distinct: BTreeSet<&FiniteWord> = ws.iter().copied().collect();
                    distinct.len() == ws.len()
                })
            });
            simple(found, dense.description())
        }
        DenseSet::JumpDecision { layout, functional } => audit_jump_decision(functional, layout, conditions),
        DenseSet::Avoid { layout, target, functional } => audit_avoid(functional, layout, *target, conditions),
        DenseSet::Lifted { coords, inner } => {
            let projected: Vec<WordCondition> = coords.iter().map(|c| conditions[*c].clone()).collect();
            audit_dense(inner, &projected)
        }
        DenseSet::Custom { .. } => match dense.is_met(conditions) {
            Ok(ok) => simple(ok, dense.description()),
            Err(e) => AuditReport::fail(0, 0, e.to_string()),
        },
    }
}

fn random_word(rng: &mut impl Rng, min_len: usize, max_len: usize) -> FiniteWord {
    let len = rng.random_range(min_len..=max_len);
    FiniteWord::from_bits((0..len).map(|_| Bit::from(rng.random_bool(0.5))))
}

fn random_condition(rng: &mut impl Rng, max_size: usize, min_len: usize) -> WordCondition {
    let size = rng.random_range(0..=max_size);
    let mut out = WordCondition::new();
    while out.len() < size {
        let n = rng.random_range(0..5u64);
        out.assign(n, random_word(rng, min_len, 2));
    }
    out
}

/// A random functional for the standard three-slot layout together with
/// `coords` random small conditions: the first has at most four columns, the
/// rest at most two. Queries come from a pool of eight positions in the
/// first five columns of each slot, so completions and extensions stay small
/// enough to enumerate.
pub fn random_instance(rng: &mut impl Rng, max_depth: usize, coords: usize) -> (OracleFunctional, Vec<WordCondition>) {
    let mut pool = BTreeSet::new();
    while pool.len() < 8 {
        // composite positions 0..45 cover flat indices 0..15 of each slot
        pool.insert(rng.random_range(0..45u64));
    }
    let pool: Vec<u64> = pool.into_iter().collect();
    let f = random_functional(rng, max_depth, &pool);
    let mut conditions = vec![random_condition(rng, 4, 0)];
    for i in 1..coords {
        // the third coordinate is a target; keep its words nonempty
        conditions.push(random_condition(rng, 2, usize::from(i >= 2)));
    }
    (f, conditions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::{avoid_dense, jump_decision_dense};
    use crate::prf;

    #[test]
    fn unmet_conditions_can_fail_the_audit() {
        // a query into the undefined payload region of J(p, r): undecided until met
        let layout = OracleLayout::standard();
        let f = OracleFunctional::new(Node::query(1, Node::Diverge, Node::Halt(None))).unwrap();
        let empty = vec![WordCondition::new(), WordCondition::new()];
        assert!(!audit_jump_decision(&f, &layout, &empty).passed);
        let met = jump_decision_dense(f.clone(), layout.clone()).meet(&empty).unwrap();
        assert!(audit_jump_decision(&f, &layout, &met).passed);
    }

    #[test]
    fn avoid_audit_catches_agreement() {
        let layout = OracleLayout::standard();
        let f = OracleFunctional::halt(Some(Bit::One));
        let agreeing: Vec<WordCondition> =
            vec![WordCondition::new(), WordCondition::new(), [(0, "1".parse().unwrap())].into_iter().collect()];
        assert!(!audit_avoid(&f, &layout, 2, &agreeing).passed);
        let met = avoid_dense(f.clone(), layout.clone(), 2).unwrap().meet(&agreeing).unwrap();
        assert!(audit_avoid(&f, &layout, 2, &met).passed);
    }

    #[test]
    fn random_meets_pass_audits() {
        let mut rng = prf::rng(11, "audit-unit");
        let layout = OracleLayout::standard();
        for _ in 0..30 {
            let (f, conds) = random_instance(&mut rng, 6, 3);
            let pair = &conds[..2];
            let out = jump_decision_dense(f.clone(), layout.clone()).meet(pair).unwrap();
            let report = audit_jump_decision(&f, &layout, &out);
            assert!(report.passed, "{report:?}");
            let out = avoid_dense(f.clone(), layout.clone(), 2).unwrap().meet(&conds).unwrap();
            let report = audit_avoid(&f, &layout, 2, &out);
            assert!(report.passed, "{report:?}");
        }
    }
}
