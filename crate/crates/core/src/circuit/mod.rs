//! Negation normal form circuits, structural checks, and brute-force counting.

mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result, ORACLE_VAR_CAP};
use crate::literal::{Assignment, Lit, Var};
use crate::truth_table::{TruthTable, WordInput};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NnfNode {
    Const(bool),
    Lit(Lit),
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
}

impl NnfNode {
    pub fn children(&self) -> &[NodeId] {
        match self {
            NnfNode::And(c) | NnfNode::Or(c) => c,
            _ => &[],
        }
    }
}

/// A rooted NNF DAG stored in topological order (children before parents).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NnfCircuit {
    nodes: Vec<NnfNode>,
    root: NodeId,
    var_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decomposability {
    Ok,
    Violation { and_node: NodeId, shared_var: Var },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Determinism {
    Ok,
    Violation { or_node: NodeId },
    /// The joint support of some OR node's children is above the oracle cap.
    Unknown { or_node: NodeId },
}

/// Per-variable literal weights `(w(x), w(!x))`; absent variables weigh `(1, 1)`.
pub type Weights = BTreeMap<Var, (f64, f64)>;

impl NnfCircuit {
    pub fn new(nodes: Vec<NnfNode>, root: NodeId, var_count: u32) -> Result<Self> {
        if root >= nodes.len() {
            return Err(Error::Invalid(format!("root {root} out of range")));
        }
        for (id, node) in nodes.iter().enumerate() {
            if let Some(&c) = node.children().iter().find(|&&c| c >= id) {
                return Err(Error::Invalid(format!(
                    "node {id} refers to child {c}, which does not precede it"
                )));
            }
            if let NnfNode::Lit(l) = node {
                if l.var == 0 || l.var > var_count {
                    return Err(Error::Invalid(format!(
                        "literal {l} outside 1..={var_count}"
                    )));
                }
            }
        }
        Ok(NnfCircuit {
            nodes,
            root,
            var_count,
        })
    }

    pub fn nodes(&self) -> &[NnfNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &NnfNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.children().len()).sum()
    }

    pub fn and_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, NnfNode::And(_)))
            .count()
    }

    /// Ids reachable from `roots`, ascending (hence topological).
    pub fn reachable_from(&self, roots: &[NodeId]) -> Vec<NodeId> {
        let mut seen = FixedBitSet::with_capacity(self.nodes.len());
        let mut stack: Vec<NodeId> = roots.to_vec();
        while let Some(u) = stack.pop() {
            if seen.put(u) {
                continue;
            }
            stack.extend(self.nodes[u].children());
        }
        seen.ones().collect()
    }

    /// Variables mentioned by literals reachable from the root.
    pub fn vars_used(&self) -> BTreeSet<Var> {
        self.reachable_from(&[self.root])
            .into_iter()
            .filter_map(|u| match self.nodes[u] {
                NnfNode::Lit(l) => Some(l.var),
                _ => None,
            })
            .collect()
    }

    /// Copy containing only nodes reachable from the root, renumbered densely.
    pub fn compact(&self) -> NnfCircuit {
        let keep = self.reachable_from(&[self.root]);
        let mut remap = HashMap::with_capacity(keep.len());
        let mut nodes = Vec::with_capacity(keep.len());
        for &u in &keep {
            let node = match &self.nodes[u] {
                NnfNode::And(c) => NnfNode::And(c.iter().map(|c| remap[c]).collect()),
                NnfNode::Or(c) => NnfNode::Or(c.iter().map(|c| remap[c]).collect()),
                other => other.clone(),
            };
            remap.insert(u, nodes.len());
            nodes.push(node);
        }
        NnfCircuit {
            root: remap[&self.root],
            nodes,
            var_count: self.var_count,
        }
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        let ids = self.reachable_from(&[self.root]);
        let mut value = vec![false; self.nodes.len()];
        for u in ids {
            value[u] = match &self.nodes[u] {
                NnfNode::Const(b) => *b,
                NnfNode::Lit(l) => l.holds(a.require(l.var)?),
                NnfNode::And(c) => c.iter().all(|&c| value[c]),
                NnfNode::Or(c) => c.iter().any(|&c| value[c]),
            };
        }
        Ok(value[self.root])
    }

    fn eval_word(&self, ids: &[NodeId], input: &WordInput, buf: &mut [u64]) -> Result<()> {
        for &u in ids {
            buf[u] = match &self.nodes[u] {
                NnfNode::Const(b) => {
                    if *b {
                        !0
                    } else {
                        0
                    }
                }
                NnfNode::Lit(l) => input.lit(*l)?,
                NnfNode::And(c) => c.iter().fold(!0, |acc, &c| acc & buf[c]),
                NnfNode::Or(c) => c.iter().fold(0, |acc, &c| acc | buf[c]),
            };
        }
        Ok(())
    }

    /// Tables of several nodes over a shared order, in one enumeration pass.
    pub fn tables_of(
        &self,
        targets: &[NodeId],
        order: &[Var],
        fixed: &Assignment,
    ) -> Result<Vec<TruthTable>> {
        let ids = self.reachable_from(targets);
        let mut buf = vec![0u64; self.nodes.len()];
        TruthTable::build_many(order.to_vec(), fixed, targets.len(), |input, out| {
            self.eval_word(&ids, input, &mut buf)?;
            for (slot, &t) in out.iter_mut().zip(targets) {
                *slot = buf[t];
            }
            Ok(())
        })
    }

    pub fn table_of(&self, node: NodeId, order: &[Var], fixed: &Assignment) -> Result<TruthTable> {
        Ok(self.tables_of(&[node], order, fixed)?.remove(0))
    }

    /// Truth table over variables `1..=var_count`.
    pub fn truth_table(&self) -> Result<TruthTable> {
        if self.var_count as usize > ORACLE_VAR_CAP {
            return Err(Error::OracleCap(self.var_count as usize));
        }
        let order: Vec<Var> = (1..=self.var_count).collect();
        self.table_of(self.root, &order, &Assignment::new())
    }

    /// Table of `f|fixed` over `order`; every variable of the circuit must be
    /// in `order` or in `fixed`.
    pub fn restricted_table(&self, fixed: &Assignment, order: &[Var]) -> Result<TruthTable> {
        self.table_of(self.root, order, fixed)
    }

    /// Variable support of every node (indexed by node id, bit = var id).
    pub fn supports(&self) -> Vec<FixedBitSet> {
        let mut out: Vec<FixedBitSet> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let mut s = FixedBitSet::with_capacity(self.var_count as usize + 1);
            match node {
                NnfNode::Lit(l) => s.insert(l.var as usize),
                NnfNode::And(c) | NnfNode::Or(c) => {
                    for &c in c {
                        s.union_with(&out[c]);
                    }
                }
                NnfNode::Const(_) => {}
            }
            out.push(s);
        }
        out
    }

    pub fn check_decomposable(&self) -> Decomposability {
        let supports = self.supports();
        for u in self.reachable_from(&[self.root]) {
            if let NnfNode::And(children) = &self.nodes[u] {
                let mut acc = FixedBitSet::with_capacity(self.var_count as usize + 1);
                for &c in children {
                    if let Some(v) = acc.intersection(&supports[c]).next() {
                        return Decomposability::Violation {
                            and_node: u,
                            shared_var: v as Var,
                        };
                    }
                    acc.union_with(&supports[c]);
                }
            }
        }
        Decomposability::Ok
    }

    /// Pairwise-exclusivity of OR children, decided with the truth-table oracle.
    pub fn check_deterministic(&self) -> Determinism {
        let supports = self.supports();
        let mut unknown = None;
        for u in self.reachable_from(&[self.root]) {
            let NnfNode::Or(children) = &self.nodes[u] else {
                continue;
            };
            if children.len() < 2 {
                continue;
            }
            match self.or_exclusive(children, &supports) {
                Ok(true) => {}
                Ok(false) => return Determinism::Violation { or_node: u },
                Err(_) => {
                    unknown.get_or_insert(u);
                }
            }
        }
        match unknown {
            Some(or_node) => Determinism::Unknown { or_node },
            None => Determinism::Ok,
        }
    }

    fn or_exclusive(&self, children: &[NodeId], supports: &[FixedBitSet]) -> Result<bool> {
        let mut joint = FixedBitSet::with_capacity(self.var_count as usize + 1);
        for &c in children {
            joint.union_with(&supports[c]);
        }
        if joint.count_ones(..) <= ORACLE_VAR_CAP {
            let order: Vec<Var> = joint.ones().map(|v| v as Var).collect();
            let tables = self.tables_of(children, &order, &Assignment::new())?;
            for i in 0..tables.len() {
                for j in i + 1..tables.len() {
                    if tables[i].intersects(&tables[j])? {
                        return Ok(false);
                    }
                }
            }
            return Ok(true);
        }
        for (i, &a) in children.iter().enumerate() {
            for &b in &children[i + 1..] {
                let mut pair = supports[a].clone();
                pair.union_with(&supports[b]);
                if pair.count_ones(..) > ORACLE_VAR_CAP {
                    return Err(Error::OracleCap(pair.count_ones(..)));
                }
                let order: Vec<Var> = pair.ones().map(|v| v as Var).collect();
                let t = self.tables_of(&[a, b], &order, &Assignment::new())?;
                if t[0].intersects(&t[1])? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Number of models over exactly `var_count` variables.
    pub fn count_models_brute(&self) -> Result<u64> {
        Ok(self.truth_table()?.count_ones())
    }

    /// Weighted model count of a decomposable, deterministic circuit.
    ///
    /// Rejects circuits whose determinism is violated or cannot be decided.
    pub fn weighted_count_ddnnf(&self, weights: &Weights) -> Result<f64> {
        if let Decomposability::Violation {
            and_node,
            shared_var,
        } = self.check_decomposable()
        {
            return Err(Error::NotDecomposable {
                node: and_node,
                var: shared_var,
            });
        }
        match self.check_deterministic() {
            Determinism::Ok => {}
            Determinism::Violation { or_node } => return Err(Error::NotDeterministic(or_node)),
            Determinism::Unknown { or_node } => return Err(Error::DeterminismUnknown(or_node)),
        }
        Ok(self.weighted_count_unchecked(weights))
    }

    /// Smoothed sum-product evaluation; the caller vouches for d-DNNF structure.
    pub fn weighted_count_unchecked(&self, weights: &Weights) -> f64 {
        let total = |v: usize| {
            let (p, n) = weights.get(&(v as Var)).copied().unwrap_or((1.0, 1.0));
            p + n
        };
        let supports = self.supports();
        let mut value = vec![0.0f64; self.nodes.len()];
        for u in self.reachable_from(&[self.root]) {
            value[u] = match &self.nodes[u] {
                NnfNode::Const(b) => f64::from(u8::from(*b)),
                NnfNode::Lit(l) => {
                    let (p, n) = weights.get(&l.var).copied().unwrap_or((1.0, 1.0));
                    if l.positive {
                        p
                    } else {
                        n
                    }
                }
                NnfNode::And(c) => c.iter().map(|&c| value[c]).product(),
                NnfNode::Or(c) => c
                    .iter()
                    .map(|&c| {
                        let missing: f64 = supports[u]
                            .difference(&supports[c])
                            .map(total)
                            .product();
                        value[c] * missing
                    })
                    .sum(),
            };
        }
        let outside: f64 = (1..=self.var_count as usize)
            .filter(|&v| !supports[self.root].contains(v))
            .map(total)
            .product();
        value[self.root] * outside
    }
}

/// Incremental constructor that keeps the topological invariant by design.
#[derive(Debug, Clone, Default)]
pub struct NnfBuilder {
    nodes: Vec<NnfNode>,
    memo: HashMap<NnfNode, NodeId>,
    var_count: u32,
}

impl NnfBuilder {
    pub fn new(var_count: u32) -> Self {
        NnfBuilder {
            var_count,
            ..Default::default()
        }
    }

    fn push(&mut self, node: NnfNode) -> NodeId {
        if let Some(&id) = self.memo.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.memo.insert(node.clone(), id);
        self.nodes.push(node);
        id
    }

    pub fn constant(&mut self, value: bool) -> NodeId {
        self.push(NnfNode::Const(value))
    }

    pub fn lit(&mut self, lit: Lit) -> NodeId {
        self.var_count = self.var_count.max(lit.var);
        self.push(NnfNode::Lit(lit))
    }

    pub fn pos(&mut self, var: Var) -> NodeId {
        self.lit(Lit::pos(var))
    }

    pub fn neg(&mut self, var: Var) -> NodeId {
        self.lit(Lit::neg(var))
    }

    pub fn and(&mut self, children: Vec<NodeId>) -> NodeId {
        self.push(NnfNode::And(children))
    }

    pub fn or(&mut self, children: Vec<NodeId>) -> NodeId {
        self.push(NnfNode::Or(children))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn finish(self, root: NodeId) -> NnfCircuit {
        NnfCircuit::new(self.nodes, root, self.var_count)
            .expect("builder maintains circuit invariants")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// (A & B & C) | (!C & D) with A..D = 1..4.
    pub(crate) fn fig1() -> NnfCircuit {
        let mut b = NnfBuilder::new(4);
        let (a, bb, c, nc, d) = (b.pos(1), b.pos(2), b.pos(3), b.neg(3), b.pos(4));
        let t1 = b.and(vec![a, bb, c]);
        let t2 = b.and(vec![nc, d]);
        let r = b.or(vec![t1, t2]);
        b.finish(r)
    }

    fn assign(bits: &[(Var, bool)]) -> Assignment {
        bits.iter().copied().collect()
    }

    #[test]
    fn eval_fig1() {
        let f = fig1();
        let a = assign(&[(1, true), (2, true), (3, true), (4, false)]);
        assert!(f.eval(&a).unwrap());
        let a = assign(&[(1, true), (2, true), (3, false), (4, false)]);
        assert!(!f.eval(&a).unwrap());
        let a = assign(&[(1, false), (2, false), (3, false), (4, true)]);
        assert!(f.eval(&a).unwrap());
    }

    #[test]
    fn eval_reports_missing_variable() {
        let f = fig1();
        let a = assign(&[(1, true), (2, true), (3, true)]);
        assert!(matches!(f.eval(&a), Err(Error::Unassigned(4))));
    }

    #[test]
    fn truth_tables() {
        let mut b = NnfBuilder::new(1);
        let x = b.pos(1);
        let t = b.finish(x).truth_table().unwrap();
        assert_eq!(t.bits().collect::<Vec<_>>(), vec![false, true]);

        let mut b = NnfBuilder::new(2);
        let top = b.constant(true);
        assert_eq!(b.finish(top).truth_table().unwrap().count_ones(), 4);

        let t = fig1().truth_table().unwrap();
        assert_eq!(t.len(), 16);
        assert_eq!(t.count_ones(), 6);
    }

    #[test]
    fn truth_table_agrees_with_eval() {
        let f = fig1();
        let t = f.truth_table().unwrap();
        for i in 0..16u64 {
            let a = Assignment::from_bits(&[1, 2, 3, 4], i);
            assert_eq!(t.get(i as usize), f.eval(&a).unwrap());
        }
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let mut b = NnfBuilder::new(25);
        let x = b.pos(25);
        let err = b.finish(x).truth_table().unwrap_err();
        assert!(err.to_string().contains("24"));
    }

    #[test]
    fn decomposability() {
        let mut b = NnfBuilder::new(2);
        let (x, y) = (b.pos(1), b.pos(2));
        let r = b.and(vec![x, y]);
        assert_eq!(b.finish(r).check_decomposable(), Decomposability::Ok);

        let mut b = NnfBuilder::new(2);
        let (x, y) = (b.pos(1), b.pos(2));
        let inner = b.and(vec![x, y]);
        let r = b.and(vec![x, inner]);
        let c = b.finish(r);
        assert_eq!(
            c.check_decomposable(),
            Decomposability::Violation {
                and_node: r,
                shared_var: 1
            }
        );
    }

    #[test]
    fn determinism() {
        let mut b = NnfBuilder::new(3);
        let (c, nc, x, y) = (b.pos(1), b.neg(1), b.pos(2), b.pos(3));
        let l = b.and(vec![c, x]);
        let r = b.and(vec![nc, y]);
        let root = b.or(vec![l, r]);
        assert_eq!(b.finish(root).check_deterministic(), Determinism::Ok);

        let mut b = NnfBuilder::new(2);
        let (x, y) = (b.pos(1), b.pos(2));
        let root = b.or(vec![x, y]);
        assert_eq!(
            b.finish(root).check_deterministic(),
            Determinism::Violation { or_node: root }
        );

        let mut b = NnfBuilder::new(1);
        let (f, x) = (b.constant(false), b.pos(1));
        let root = b.or(vec![f, x]);
        assert_eq!(b.finish(root).check_deterministic(), Determinism::Ok);
    }

    #[test]
    fn determinism_unknown_above_cap() {
        // Two OR children over 13 variables each: joint support of 26.
        let mut b = NnfBuilder::new(26);
        let left: Vec<_> = (1..=13).map(|v| b.pos(v)).collect();
        let right: Vec<_> = (14..=26).map(|v| b.pos(v)).collect();
        let l = b.and(left);
        let r = b.and(right);
        let root = b.or(vec![l, r]);
        assert_eq!(
            b.finish(root).check_deterministic(),
            Determinism::Unknown { or_node: root }
        );
    }

    #[test]
    fn counts_over_declared_variables() {
        let mut b = NnfBuilder::new(3);
        let x = b.pos(1);
        assert_eq!(b.finish(x).count_models_brute().unwrap(), 4);
    }

    #[test]
    fn weighted_literal_and_false() {
        let mut b = NnfBuilder::new(1);
        let x = b.pos(1);
        let w: Weights = [(1, (0.3, 0.7))].into_iter().collect();
        assert!((b.finish(x).weighted_count_ddnnf(&w).unwrap() - 0.3).abs() < 1e-12);

        let mut b = NnfBuilder::new(2);
        let f = b.constant(false);
        let w: Weights = [(1, (0.3, 0.7)), (2, (2.0, -1.0))].into_iter().collect();
        assert_eq!(b.finish(f).weighted_count_ddnnf(&w).unwrap(), 0.0);
    }

    #[test]
    fn weighted_rejects_nondeterministic() {
        let mut b = NnfBuilder::new(2);
        let (x, y) = (b.pos(1), b.pos(2));
        let root = b.or(vec![x, y]);
        assert!(matches!(
            b.finish(root).weighted_count_ddnnf(&Weights::new()),
            Err(Error::NotDeterministic(_))
        ));
    }

    #[test]
    fn smoothing_accounts_for_missing_variables() {
        // x1 | (!x1 & x2) over 3 variables: 6 models.
        let mut b = NnfBuilder::new(3);
        let (x1, nx1, x2) = (b.pos(1), b.neg(1), b.pos(2));
        let r = b.and(vec![nx1, x2]);
        let root = b.or(vec![x1, r]);
        let c = b.finish(root);
        assert_eq!(c.count_models_brute().unwrap(), 6);
        assert_eq!(c.weighted_count_ddnnf(&Weights::new()).unwrap(), 6.0);
    }

    #[test]
    fn constructor_rejects_forward_edges() {
        let nodes = vec![NnfNode::And(vec![1]), NnfNode::Lit(Lit::pos(1))];
        assert!(NnfCircuit::new(nodes, 0, 1).is_err());
        let nodes = vec![NnfNode::Lit(Lit::pos(3))];
        assert!(NnfCircuit::new(nodes, 0, 2).is_err());
    }
}
