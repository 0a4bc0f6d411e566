//! Oracle functionals as finite decision trees, with three-valued evaluation
//! on partial oracles.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ForcingError;
use crate::streams::Bit;

/// Finite partial function from oracle positions to bits.
pub trait PartialOracle {
    fn get(&self, position: u64) -> Option<Bit>;
}

impl PartialOracle for BTreeMap<u64, Bit> {
    fn get(&self, position: u64) -> Option<Bit> {
        BTreeMap::get(self, &position).copied()
    }
}

/// `base` with extra assignments laid over its undefined positions.
pub struct Overlay<'a, O: ?Sized> {
    pub base: &'a O,
    pub extra: &'a BTreeMap<u64, Bit>,
}

impl<O: PartialOracle + ?Sized> PartialOracle for Overlay<'_, O> {
    fn get(&self, position: u64) -> Option<Bit> {
        self.base.get(position).or_else(|| self.extra.get(&position).copied())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Query { position: u64, on0: Box<Node>, on1: Box<Node> },
    Halt(Option<Bit>),
    Diverge,
}

impl Node {
    pub fn query(position: u64, on0: Node, on1: Node) -> Node {
        Node::Query { position, on0: Box::new(on0), on1: Box::new(on1) }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Query { on0, on1, .. } => 1 + on0.depth().max(on1.depth()),
            _ => 0,
        }
    }
}

/// A computation that reads finitely many oracle bits and then halts (with an
/// optional output bit) or diverges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleFunctional {
    root: Node,
}

impl OracleFunctional {
    /// Rejects trees that query the same position twice on one path.
    pub fn new(root: Node) -> Result<Self, ForcingError> {
        fn check(node: &Node, seen: &mut Vec<u64>) -> Result<(), ForcingError> {
            if let Node::Query { position, on0, on1 } = node {
                if seen.contains(position) {
                    return Err(ForcingError::RepeatedQuery { position: *position });
                }
                seen.push(*position);
                check(on0, seen)?;
                check(on1, seen)?;
                seen.pop();
            }
            Ok(())
        }
        check(&root, &mut Vec::new())?;
        Ok(OracleFunctional { root })
    }

    pub fn halt(output: Option<Bit>) -> Self {
        OracleFunctional { root: Node::Halt(output) }
    }

    pub fn diverge() -> Self {
        OracleFunctional { root: Node::Diverge }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Every position queried anywhere in the tree.
    pub fn positions(&self) -> BTreeSet<u64> {
        fn walk(node: &Node, out: &mut BTreeSet<u64>) {
            if let Node::Query { position, on0, on1 } = node {
                out.insert(*position);
                walk(on0, out);
                walk(on1, out);
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.root, &mut out);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    Halts(Option<Bit>),
    Diverges,
    /// The walk reached a query at a position the oracle leaves undefined.
    Undetermined(u64),
}

pub fn eval_functional(f: &OracleFunctional, oracle: &(impl PartialOracle + ?Sized)) -> Evaluation {
    let mut node = &f.root;
    loop {
        match node {
            Node::Halt(out) => return Evaluation::Halts(*out),
            Node::Diverge => return Evaluation::Diverges,
            Node::Query { position, on0, on1 } => match oracle.get(*position) {
                Some(Bit::Zero) => node = on0,
                Some(Bit::One) => node = on1,
                None => return Evaluation::Undetermined(*position),
            },
        }
    }
}

/// Smallest finite extension of `oracle` on which `f` halts, or `None` if no
/// extension makes it halt. Ties go to the branch explored first (0 before 1).
pub fn exists_halting_extension(
    f: &OracleFunctional,
    oracle: &(impl PartialOracle + ?Sized),
) -> Option<BTreeMap<u64, Bit>> {
    halting_extension_where(f, oracle, |_| true)
}

/// As [`exists_halting_extension`], restricted to halting leaves whose output
/// satisfies `accept`.
pub fn halting_extension_where(
    f: &OracleFunctional,
    oracle: &(impl PartialOracle + ?Sized),
    accept: impl Fn(Option<Bit>) -> bool,
) -> Option<BTreeMap<u64, Bit>> {
    fn search(
        node: &Node,
        oracle: &(impl PartialOracle + ?Sized),
        accept: &impl Fn(Option<Bit>) -> bool,
        path: &mut Vec<(u64, Bit)>,
        best: &mut Option<Vec<(u64, Bit)>>,
    ) {
        match node {
            Node::Halt(out) => {
                if accept(*out) && best.as_ref().is_none_or(|b| path.len() < b.len()) {
                    *best = Some(path.clone());
                }
            }
            Node::Diverge => {}
            Node::Query { position, on0, on1 } => match oracle.get(*position) {
                Some(Bit::Zero) => search(on0, oracle, accept, path, best),
                Some(Bit::One) => search(on1, oracle, accept, path, best),
                None => {
                    for (bit, child) in [(Bit::Zero, on0), (Bit::One, on1)] {
                        path.push((*position, bit));
                        search(child, oracle, accept, path, best);
                        path.pop();
                    }
                }
            },
        }
    }
    let mut best = None;
    search(&f.root, oracle, &accept, &mut Vec::new(), &mut best);
    best.map(|p| p.into_iter().collect())
}

/// Random tree of depth at most `max_depth` querying positions from `pool`
/// (distinct along each path). Leaves are uniform over halt-without-output,
/// halt-with-0, halt-with-1 and diverge.
pub fn random_functional(rng: &mut impl Rng, max_depth: usize, pool: &[u64]) -> OracleFunctional {
    fn grow(rng: &mut impl Rng, depth: usize, pool: &[u64], used: &mut Vec<u64>) -> Node {
        let free: Vec<u64> = pool.iter().copied().filter(|p| !used.contains(p)).collect();
        if depth > 0 && !free.is_empty() && rng.random_bool(0.75) {
            let position = free[rng.random_range(0..free.len())];
            used.push(position);
            let on0 = grow(rng, depth - 1, pool, used);
            let on1 = grow(rng, depth - 1, pool, used);
            used.pop();
            Node::query(position, on0, on1)
        } else {
            match rng.random_range(0..4) {
                0 => Node::Halt(None),
                1 => Node::Halt(Some(Bit::Zero)),
                2 => Node::Halt(Some(Bit::One)),
                _ => Node::Diverge,
            }
        }
    }
    let root = grow(rng, max_depth, pool, &mut Vec::new());
    OracleFunctional::new(root).expect("positions distinct per path by construction")
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LeafKind {
    Halt,
    Diverge,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeJson {
    Query {
        query: u64,
        on0: Box<NodeJson>,
        on1: Box<NodeJson>,
    },
    Leaf {
        leaf: LeafKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        output: Option<Bit>,
    },
}

impl From<&Node> for NodeJson {
    fn from(node: &Node) -> Self {
        match node {
            Node::Query { position, on0, on1 } => NodeJson::Query {
                query: *position,
                on0: Box::new(on0.as_ref().into()),
                on1: Box::new(on1.as_ref().into()),
            },
            Node::Halt(output) => NodeJson::Leaf { leaf: LeafKind::Halt, output: *output },
            Node::Diverge => NodeJson::Leaf { leaf: LeafKind::Diverge, output: None },
        }
    }
}

impl From<NodeJson> for Node {
    fn from(json: NodeJson) -> Self {
        match json {
            NodeJson::Query { query, on0, on1 } => Node::query(query, (*on0).into(), (*on1).into()),
            NodeJson::Leaf { leaf: LeafKind::Halt, output } => Node::Halt(output),
            NodeJson::Leaf { leaf: LeafKind::Diverge, .. } => Node::Diverge,
        }
    }
}

impl Serialize for OracleFunctional {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        NodeJson::from(&self.root).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OracleFunctional {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let json = NodeJson::deserialize(d)?;
        OracleFunctional::new(json.into()).map_err(serde::de::Error::custom)
    }
}
