//! Simulation of a DNNF by an OR-FBDD of quasipolynomial size.
//!
//! The DNNF is binarized and its literals turned into decision nodes with
//! private sinks. Every binary AND gets a light edge (towards the child with
//! fewer AND descendants) and a heavy edge. Nodes of the OR-FBDD are pairs
//! `(u, s)` with `s` the set of light edges on some root path to `u`:
//! following a light edge pushes it onto `s`, and reaching a 1-sink with
//! `s` nonempty pops an edge and resumes at that AND's heavy child.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;

use crate::bdd::{BddNode, OrFbdd};
use crate::circuit::{Decomposability, NnfCircuit, NnfNode};
use crate::error::{Error, Result};
use crate::literal::{Assignment, Var};

/// Light-edge set; each light edge is named by its AND node's id.
pub type LightSet = Vec<usize>;

/// Rewrites every AND as a left-associated chain of binary ANDs.
/// Nullary ANDs become `true`, unary ones their child.
pub fn binarize(c: &NnfCircuit) -> Result<NnfCircuit> {
    if let Decomposability::Violation { and_node, shared_var } = c.check_decomposable() {
        return Err(Error::NotDecomposable {
            node: and_node,
            var: shared_var,
        });
    }
    let mut nodes: Vec<NnfNode> = Vec::new();
    let mut map: HashMap<usize, usize> = HashMap::new();
    let push = |nodes: &mut Vec<NnfNode>, n: NnfNode| {
        nodes.push(n);
        nodes.len() - 1
    };
    for u in c.reachable_from(&[c.root()]) {
        let id = match c.node(u) {
            NnfNode::And(ch) => match ch.len() {
                0 => push(&mut nodes, NnfNode::Const(true)),
                1 => map[&ch[0]],
                _ => {
                    let mut acc = map[&ch[0]];
                    for k in &ch[1..] {
                        acc = push(&mut nodes, NnfNode::And(vec![acc, map[k]]));
                    }
                    acc
                }
            },
            NnfNode::Or(ch) => push(&mut nodes, NnfNode::Or(ch.iter().map(|k| map[k]).collect())),
            other => push(&mut nodes, other.clone()),
        };
        map.insert(u, id);
    }
    let root = map[&c.root()];
    NnfCircuit::new(nodes, root, c.var_count()).map(|c| c.compact())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DNode {
    Decision { var: Var, lo: usize, hi: usize },
    And(usize, usize),
    Or(Vec<usize>),
    Sink(bool),
}

impl DNode {
    fn children(&self) -> Vec<usize> {
        match self {
            DNode::Decision { lo, hi, .. } => vec![*lo, *hi],
            DNode::And(a, b) => vec![*a, *b],
            DNode::Or(c) => c.clone(),
            DNode::Sink(_) => Vec::new(),
        }
    }
}

/// A binary DNNF whose literals are decision nodes over private sinks.
/// Children precede parents; the root is the last node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leafified {
    pub nodes: Vec<DNode>,
    pub root: usize,
    /// Node of the source circuit each D node stands for, if any.
    pub origin: Vec<Option<usize>>,
}

impl Leafified {
    /// Requires binary ANDs (see [`binarize`]).
    pub fn new(c: &NnfCircuit) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut origin = Vec::new();
        let mut map: HashMap<usize, usize> = HashMap::new();
        for u in c.reachable_from(&[c.root()]) {
            let mut push = |n: DNode, from: Option<usize>| {
                nodes.push(n);
                origin.push(from);
                nodes.len() - 1
            };
            let id = match c.node(u) {
                NnfNode::Const(b) => push(DNode::Sink(*b), Some(u)),
                NnfNode::Lit(l) => {
                    let zero = push(DNode::Sink(false), None);
                    let one = push(DNode::Sink(true), None);
                    let (lo, hi) = if l.positive { (zero, one) } else { (one, zero) };
                    push(DNode::Decision { var: l.var, lo, hi }, Some(u))
                }
                NnfNode::And(ch) if ch.len() == 2 => push(DNode::And(map[&ch[0]], map[&ch[1]]), Some(u)),
                NnfNode::And(ch) => {
                    return Err(Error::Invalid(format!(
                        "AND node {u} has {} children; binarize first",
                        ch.len()
                    )))
                }
                NnfNode::Or(ch) => push(DNode::Or(ch.iter().map(|k| map[k]).collect()), Some(u)),
            };
            map.insert(u, id);
        }
        Ok(Leafified {
            root: map[&c.root()],
            nodes,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn and_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, DNode::And(..))).count()
    }

    /// Descendant sets, each including the node itself.
    fn descendants(&self) -> Vec<FixedBitSet> {
        let n = self.nodes.len();
        let mut out: Vec<FixedBitSet> = Vec::with_capacity(n);
        for (u, node) in self.nodes.iter().enumerate() {
            let mut s = FixedBitSet::with_capacity(n);
            s.insert(u);
            for c in node.children() {
                s.union_with(&out[c]);
            }
            out.push(s);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClassification {
    /// AND nodes in `D_u`, counting `u` itself when it is an AND.
    pub m: Vec<usize>,
    /// Same count with `u` itself excluded.
    pub m_strict: Vec<usize>,
    /// AND node id -> (light child, heavy child).
    pub split: BTreeMap<usize, (usize, usize)>,
}

impl EdgeClassification {
    pub fn light_child(&self, and_node: usize) -> Option<usize> {
        self.split.get(&and_node).map(|s| s.0)
    }

    pub fn heavy_child(&self, and_node: usize) -> Option<usize> {
        self.split.get(&and_node).map(|s| s.1)
    }
}

/// Light edge to the child with fewer AND descendants; on ties the original
/// left child stays light.
pub fn classify_edges(d: &Leafified) -> EdgeClassification {
    let ands: Vec<usize> = (0..d.len())
        .filter(|&u| matches!(d.nodes[u], DNode::And(..)))
        .collect();
    let index: HashMap<usize, usize> = ands.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let mut reach: Vec<FixedBitSet> = Vec::with_capacity(d.len());
    for (u, node) in d.nodes.iter().enumerate() {
        let mut s = FixedBitSet::with_capacity(ands.len());
        for c in node.children() {
            s.union_with(&reach[c]);
        }
        if let Some(&i) = index.get(&u) {
            s.insert(i);
        }
        reach.push(s);
    }
    let m: Vec<usize> = reach.iter().map(|s| s.count_ones(..)).collect();
    let m_strict = (0..d.len())
        .map(|u| m[u] - usize::from(index.contains_key(&u)))
        .collect();
    let split = ands
        .iter()
        .map(|&u| {
            let DNode::And(a, b) = d.nodes[u] else { unreachable!() };
            (u, if m[a] <= m[b] { (a, b) } else { (b, a) })
        })
        .collect();
    EdgeClassification { m, m_strict, split }
}

/// `N * M^L` (with `0^0 = 1`) and the quasipolynomial `N * 2^(log2(N)^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeBound {
    pub nml: BigUint,
    pub quasi: f64,
}

pub fn size_bound(n: usize, m: usize, l: usize) -> SizeBound {
    let nml = BigUint::from(n) * BigUint::from(m).pow(l as u32);
    let log = (n as f64).log2();
    SizeBound {
        nml,
        quasi: n as f64 * 2f64.powf(log * log),
    }
}

#[derive(Debug, Clone)]
pub struct Conversion {
    pub fbdd: OrFbdd,
    /// `(D node, light-edge set)` behind each OR-FBDD node.
    pub pairs: Vec<(usize, LightSet)>,
    pub dnnf: Leafified,
    pub classification: EdgeClassification,
    /// Size of the leafified DNNF.
    pub n: usize,
    /// Number of AND nodes.
    pub m: usize,
    /// Most light edges on a single root path.
    pub l: usize,
}

impl Conversion {
    pub fn bound(&self) -> SizeBound {
        size_bound(self.n, self.m, self.l)
    }

    pub fn within_bound(&self) -> bool {
        BigUint::from(self.fbdd.len()) <= self.bound().nml
    }

    /// The `(u, s)` pairs along some accepting path for `a`.
    pub fn accepted_trace(&self, a: &Assignment) -> Result<Option<Vec<(usize, LightSet)>>> {
        Ok(self
            .fbdd
            .accepting_path(a)?
            .map(|path| path.into_iter().map(|f| self.pairs[f].clone()).collect()))
    }
}

/// Light-edge sets of all root paths to each node.
fn path_sets(d: &Leafified, cls: &EdgeClassification) -> Vec<HashSet<LightSet>> {
    let mut sets: Vec<HashSet<LightSet>> = vec![HashSet::new(); d.len()];
    sets[d.root].insert(Vec::new());
    for u in (0..d.len()).rev() {
        if sets[u].is_empty() {
            continue;
        }
        let here: Vec<LightSet> = sets[u].iter().cloned().collect();
        let light = cls.light_child(u);
        for c in d.nodes[u].children() {
            for s in &here {
                let mut t = s.clone();
                if light == Some(c) && !t.contains(&u) {
                    let at = t.binary_search(&u).unwrap_err();
                    t.insert(at, u);
                }
                sets[c].insert(t);
            }
        }
    }
    sets
}

pub fn convert(c: &NnfCircuit) -> Result<Conversion> {
    let bin = binarize(c)?;
    let d = Leafified::new(&bin)?;
    let cls = classify_edges(&d);
    let sets = path_sets(&d, &cls);
    let desc = d.descendants();
    let l = sets.iter().flatten().map(Vec::len).max().unwrap_or(0);

    let mut index: HashMap<(usize, LightSet), usize> = HashMap::new();
    let mut pairs: Vec<(usize, LightSet)> = Vec::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |key: (usize, LightSet),
                      pairs: &mut Vec<(usize, LightSet)>,
                      edges: &mut Vec<Vec<usize>>,
                      queue: &mut VecDeque<usize>| {
        *index.entry(key.clone()).or_insert_with(|| {
            pairs.push(key);
            edges.push(Vec::new());
            queue.push_back(pairs.len() - 1);
            pairs.len() - 1
        })
    };
    intern((d.root, Vec::new()), &mut pairs, &mut edges, &mut queue);
    while let Some(f) = queue.pop_front() {
        let (u, s) = pairs[f].clone();
        let mut out = Vec::new();
        match &d.nodes[u] {
            DNode::And(..) => {
                // Type 1: the light edge, pushed onto s.
                let (light, _) = cls.split[&u];
                let mut t = s.clone();
                let at = t.binary_search(&u).unwrap_or_else(|e| e);
                if t.get(at) != Some(&u) {
                    t.insert(at, u);
                }
                out.push((light, t));
            }
            DNode::Decision { lo, hi, .. } => {
                out.push((*lo, s.clone()));
                out.push((*hi, s.clone()));
            }
            DNode::Or(ch) => out.extend(ch.iter().map(|&c| (c, s.clone()))),
            DNode::Sink(true) => {
                // Type 3: pop a light edge e = (a, light(a)) with w below light(a).
                for &a in &s {
                    let (light, heavy) = cls.split[&a];
                    if !desc[light].contains(u) {
                        continue;
                    }
                    let rest: LightSet = s.iter().copied().filter(|&x| x != a).collect();
                    if sets[a].contains(&rest) {
                        out.push((heavy, rest));
                    }
                }
            }
            DNode::Sink(false) => {}
        }
        let targets: Vec<usize> = out
            .into_iter()
            .map(|key| intern(key, &mut pairs, &mut edges, &mut queue))
            .collect();
        edges[f] = targets;
    }

    let labels: Vec<BddNode> = pairs
        .iter()
        .zip(&edges)
        .map(|((u, s), out)| match &d.nodes[*u] {
            DNode::Decision { var, .. } => BddNode::Decision {
                var: *var,
                lo: out[0],
                hi: out[1],
            },
            DNode::And(..) => BddNode::NoOp(out[0]),
            DNode::Or(_) => BddNode::Or(out.clone()),
            DNode::Sink(false) => BddNode::Sink(false),
            DNode::Sink(true) if s.is_empty() => BddNode::Sink(true),
            // A no-op with other than one successor is emitted as an OR node.
            DNode::Sink(true) if out.len() == 1 => BddNode::NoOp(out[0]),
            DNode::Sink(true) => BddNode::Or(out.clone()),
        })
        .collect();
    let (fbdd, perm) = renumber(&labels, 0)?;
    let mut renumbered_pairs = vec![(0, Vec::new()); pairs.len()];
    for (old, pair) in pairs.into_iter().enumerate() {
        renumbered_pairs[perm[old]] = pair;
    }
    Ok(Conversion {
        fbdd,
        pairs: renumbered_pairs,
        n: d.len(),
        m: d.and_count(),
        l,
        classification: cls,
        dnnf: d,
    })
}

/// DFS post-order numbering (children first when acyclic); returns the
/// diagram and the old-to-new id map.
fn renumber(nodes: &[BddNode], root: usize) -> Result<(OrFbdd, Vec<usize>)> {
    let n = nodes.len();
    let mut new_id = vec![usize::MAX; n];
    let mut next = 0;
    let mut on_stack = vec![false; n];
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    on_stack[root] = true;
    while let Some(&mut (u, ref mut i)) = stack.last_mut() {
        let ch = nodes[u].children();
        if *i < ch.len() {
            let c = ch[*i];
            *i += 1;
            if new_id[c] == usize::MAX && !on_stack[c] {
                on_stack[c] = true;
                stack.push((c, 0));
            }
        } else {
            new_id[u] = next;
            next += 1;
            stack.pop();
        }
    }
    // Everything was discovered from the root, so every id is assigned.
    let mut out = vec![BddNode::Sink(false); n];
    for (old, node) in nodes.iter().enumerate() {
        let map = |c: usize| new_id[c];
        out[new_id[old]] = match node {
            BddNode::Decision { var, lo, hi } => BddNode::Decision {
                var: *var,
                lo: map(*lo),
                hi: map(*hi),
            },
            BddNode::Or(c) => BddNode::Or(c.iter().map(|&c| map(c)).collect()),
            BddNode::NoOp(c) => BddNode::NoOp(map(*c)),
            BddNode::Sink(b) => BddNode::Sink(*b),
        };
    }
    Ok((OrFbdd::new(out, new_id[root])?, new_id))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StackCheck {
    Ok,
    /// The transition into step `step` is not a LIFO push or pop, or the
    /// trace does not start or end with an empty set.
    Violation { step: usize, reason: String },
}

/// Replays the light-edge sets of a trace against an explicit stack.
pub fn check_stack_discipline(trace: &[(usize, LightSet)]) -> Result<StackCheck> {
    if trace.is_empty() {
        return Err(Error::Parameter("empty trace".into()));
    }
    if !trace[0].1.is_empty() {
        return Ok(StackCheck::Violation {
            step: 0,
            reason: "trace does not start with an empty set".into(),
        });
    }
    let mut stack: Vec<usize> = Vec::new();
    for (i, w) in trace.windows(2).enumerate() {
        let (prev, next) = (&w[0].1, &w[1].1);
        let step = i + 1;
        if next == prev {
            continue;
        }
        let added: Vec<usize> = next.iter().filter(|e| !prev.contains(e)).copied().collect();
        let removed: Vec<usize> = prev.iter().filter(|e| !next.contains(e)).copied().collect();
        match (added.as_slice(), removed.as_slice()) {
            ([e], []) => stack.push(*e),
            ([], [e]) if stack.last() == Some(e) => {
                stack.pop();
            }
            ([], [e]) => {
                return Ok(StackCheck::Violation {
                    step,
                    reason: format!("popped {e} while {:?} is on top", stack.last()),
                })
            }
            _ => {
                return Ok(StackCheck::Violation {
                    step,
                    reason: format!("{prev:?} -> {next:?} is neither a push nor a pop"),
                })
            }
        }
    }
    if !trace.last().expect("nonempty").1.is_empty() {
        return Ok(StackCheck::Violation {
            step: trace.len() - 1,
            reason: "trace ends with a nonempty set".into(),
        });
    }
    Ok(StackCheck::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdd::Structure;
    use crate::circuit::NnfBuilder;

    fn and_xy() -> NnfCircuit {
        let mut b = NnfBuilder::new(2);
        let (x, y) = (b.pos(1), b.pos(2));
        let r = b.and(vec![x, y]);
        b.finish(r)
    }

    #[test]
    fn binarize_chains_left() {
        let mut b = NnfBuilder::new(3);
        let (x, y, z) = (b.pos(1), b.pos(2), b.pos(3));
        let r = b.and(vec![x, y, z]);
        let c = binarize(&b.finish(r)).unwrap();
        let NnfNode::And(top) = c.node(c.root()) else { panic!() };
        assert_eq!(top.len(), 2);
        assert!(matches!(c.node(top[0]), NnfNode::And(inner) if inner.len() == 2));
        assert!(matches!(c.node(top[1]), NnfNode::Lit(l) if l.var == 3));

        let bin = and_xy();
        assert_eq!(binarize(&bin).unwrap(), bin.compact());

        let mut b = NnfBuilder::new(2);
        let (x, y) = (b.pos(1), b.pos(2));
        let inner = b.and(vec![x, y]);
        let r = b.and(vec![x, inner]);
        assert!(matches!(binarize(&b.finish(r)), Err(Error::NotDecomposable { .. })));
    }

    #[test]
    fn classification_examples() {
        let d = Leafified::new(&and_xy()).unwrap();
        let cls = classify_edges(&d);
        let (light, heavy) = cls.split[&d.root];
        assert_eq!(cls.m[light], 0);
        assert_eq!(cls.m[heavy], 0);
        assert_eq!(d.origin[light], Some(0), "tie keeps x light");

        let mut b = NnfBuilder::new(2);
        let (x, y) = (b.pos(1), b.pos(2));
        let r = b.or(vec![x, y]);
        assert!(classify_edges(&Leafified::new(&b.finish(r)).unwrap()).split.is_empty());

        let mut b = NnfBuilder::new(3);
        let (x, y, z) = (b.pos(1), b.pos(2), b.pos(3));
        let inner = b.and(vec![x, y]);
        let r = b.and(vec![inner, z]);
        let c = b.finish(r);
        let d = Leafified::new(&c).unwrap();
        let cls = classify_edges(&d);
        let (light, heavy) = cls.split[&d.root];
        assert_eq!(d.origin[light], Some(z));
        assert_eq!(cls.m[heavy], 1);
        assert_eq!(cls.m[d.root], 2);
        assert_eq!(cls.m_strict[d.root], 1);
    }

    #[test]
    fn convert_and() {
        let c = and_xy();
        let conv = convert(&c).unwrap();
        assert_eq!(conv.fbdd.check_structure(None), Structure::Ok);
        assert_eq!(conv.fbdd.truth_table(&[1, 2]).unwrap(), c.truth_table().unwrap());
        assert_eq!((conv.n, conv.m, conv.l), (7, 1, 1));
        assert!(conv.within_bound());
        let a: Assignment = [(1, true), (2, true)].into_iter().collect();
        let trace = conv.accepted_trace(&a).unwrap().unwrap();
        assert_eq!(check_stack_discipline(&trace).unwrap(), StackCheck::Ok);
        let pushes = trace.windows(2).filter(|w| w[1].1.len() > w[0].1.len()).count();
        let pops = trace.windows(2).filter(|w| w[1].1.len() < w[0].1.len()).count();
        assert_eq!((pushes, pops), (1, 1));
    }

    #[test]
    fn convert_or_has_no_stack_moves() {
        let mut b = NnfBuilder::new(2);
        let (x, y) = (b.pos(1), b.pos(2));
        let r = b.or(vec![x, y]);
        let c = b.finish(r);
        let conv = convert(&c).unwrap();
        assert!(conv.pairs.iter().all(|(_, s)| s.is_empty()));
        assert_eq!(conv.fbdd.len(), conv.n);
        assert_eq!(conv.fbdd.truth_table(&[1, 2]).unwrap(), c.truth_table().unwrap());
    }

    #[test]
    fn size_bound_values() {
        assert_eq!(size_bound(20, 4, 2).nml, BigUint::from(320u32));
        assert_eq!(size_bound(7, 0, 0).nml, BigUint::from(7u32));
        assert!((size_bound(4, 0, 0).quasi - 64.0).abs() < 1e-9);
    }

    #[test]
    fn stack_discipline_rejects_out_of_order_pop() {
        let ok = vec![(0, vec![]), (1, vec![5]), (2, vec![5, 9]), (3, vec![5]), (4, vec![])];
        assert_eq!(check_stack_discipline(&ok).unwrap(), StackCheck::Ok);
        let bad = vec![(0, vec![]), (1, vec![5]), (2, vec![5, 9]), (3, vec![9]), (4, vec![])];
        assert!(matches!(
            check_stack_discipline(&bad).unwrap(),
            StackCheck::Violation { step: 3, .. }
        ));
        let flat = vec![(0, vec![]), (1, vec![])];
        assert_eq!(check_stack_discipline(&flat).unwrap(), StackCheck::Ok);
        assert!(check_stack_discipline(&[]).is_err());
    }
}
