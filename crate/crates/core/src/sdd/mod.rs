//! Sentential decision diagrams.
//!
//! Nodes are normalized strictly: a decision node lives exactly at its vtree
//! vertex, its primes at the left child and its subs at the right child
//! (constants may appear anywhere). This is the shape the definition of
//! "respects" asks for, and it makes `Sdds(v, alpha)` a simple position lookup.

mod io;
mod manager;
mod restrict;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Deref;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::circuit::{NnfBuilder, NnfCircuit};
use crate::error::{Error, Result, ORACLE_VAR_CAP};
use crate::literal::{Assignment, Lit, Var};
use crate::truth_table::{TruthTable, WordInput};
use crate::vtree::{PrunedVtree, Topology, Vtree, VtreeId};

pub use manager::{compile, compile_with_budget, SddManager};
pub use restrict::{check_shell_disjointness, check_subgraph, ShellCheck};

pub type SddId = usize;

pub const FALSE: SddId = 0;
pub const TRUE: SddId = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SddNode {
    False,
    True,
    Literal { leaf: VtreeId, lit: Lit },
    Decision {
        vnode: VtreeId,
        elements: Vec<(SddId, SddId)>,
    },
}

impl SddNode {
    pub fn is_constant(&self) -> bool {
        matches!(self, SddNode::False | SddNode::True)
    }

    /// Vtree vertex the node sits at; constants have none.
    pub fn position(&self) -> Option<VtreeId> {
        match self {
            SddNode::Literal { leaf, .. } => Some(*leaf),
            SddNode::Decision { vnode, .. } => Some(*vnode),
            _ => None,
        }
    }

    pub fn children(&self) -> impl Iterator<Item = SddId> + '_ {
        let elements: &[(SddId, SddId)] = match self {
            SddNode::Decision { elements, .. } => elements,
            _ => &[],
        };
        elements.iter().flat_map(|&(p, s)| [p, s])
    }
}

/// Marker for the two vtree flavours an SDD can respect.
pub trait VtreeKind: Deref<Target = Topology> {
    /// Pruned SDDs only need disjoint primes, not a partition.
    const PRUNED: bool;
    const HEADER: &'static str;
}

impl VtreeKind for Vtree {
    const PRUNED: bool = false;
    const HEADER: &'static str = "sdd";
}

impl VtreeKind for PrunedVtree {
    const PRUNED: bool = true;
    const HEADER: &'static str = "psdd-pruned";
}

/// An SDD detached from its manager: the nodes reachable from `root`, keyed
/// by their manager ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SddOver<V> {
    vtree: Arc<V>,
    nodes: BTreeMap<SddId, SddNode>,
    root: SddId,
}

pub type Sdd = SddOver<Vtree>;
pub type PrunedSdd = SddOver<PrunedVtree>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    VtreeRespect,
    Overlap,
    Incomplete,
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ViolationKind::VtreeRespect => "vtree-respect",
            ViolationKind::Overlap => "overlap",
            ViolationKind::Incomplete => "incomplete",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Ok,
    Violation { node: SddId, kind: ViolationKind },
    /// A decision node whose prime support exceeds the oracle cap.
    Unknown { node: SddId },
}

impl<V: VtreeKind> SddOver<V> {
    /// Checks referential integrity and acyclicity, then keeps the part
    /// reachable from `root`. Vtree respect is left to [`Self::validate`].
    pub fn from_parts(vtree: Arc<V>, nodes: BTreeMap<SddId, SddNode>, root: SddId) -> Result<Self> {
        let mut sdd = SddOver { vtree, nodes, root };
        let order = sdd.topo_order_checked()?;
        let keep: BTreeSet<SddId> = order.into_iter().collect();
        sdd.nodes.retain(|id, _| keep.contains(id));
        Ok(sdd)
    }

    pub fn vtree(&self) -> &Arc<V> {
        &self.vtree
    }

    pub fn root(&self) -> SddId {
        self.root
    }

    pub fn node(&self, id: SddId) -> &SddNode {
        &self.nodes[&id]
    }

    pub fn nodes(&self) -> &BTreeMap<SddId, SddNode> {
        &self.nodes
    }

    pub fn ids(&self) -> impl Iterator<Item = SddId> + '_ {
        self.nodes.keys().copied()
    }

    fn topo_order_checked(&self) -> Result<Vec<SddId>> {
        // 0 = unseen, 1 = on stack, 2 = done
        let mut state: HashMap<SddId, u8> = HashMap::new();
        let mut order = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((u, done)) = stack.pop() {
            if done {
                state.insert(u, 2);
                order.push(u);
                continue;
            }
            match state.get(&u) {
                Some(2) => continue,
                Some(_) => return Err(Error::Invalid(format!("cycle through SDD node {u}"))),
                None => {}
            }
            let node = self
                .nodes
                .get(&u)
                .ok_or_else(|| Error::Invalid(format!("reference to missing SDD node {u}")))?;
            state.insert(u, 1);
            stack.push((u, true));
            for c in node.children() {
                match state.get(&c) {
                    Some(1) => {
                        return Err(Error::Invalid(format!("cycle through SDD node {c}")))
                    }
                    Some(2) => {}
                    _ => stack.push((c, false)),
                }
            }
        }
        Ok(order)
    }

    /// Reachable ids, children before parents.
    pub fn topo_order(&self) -> Vec<SddId> {
        self.topo_order_checked().expect("validated at construction")
    }

    pub fn position(&self, id: SddId) -> Option<VtreeId> {
        self.nodes[&id].position()
    }

    pub fn is_constant(&self) -> bool {
        self.nodes[&self.root].is_constant()
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        let mut value: HashMap<SddId, bool> = HashMap::new();
        for id in self.topo_order() {
            let v = match &self.nodes[&id] {
                SddNode::False => false,
                SddNode::True => true,
                SddNode::Literal { lit, .. } => lit.holds(a.require(lit.var)?),
                SddNode::Decision { elements, .. } => {
                    elements.iter().any(|(p, s)| value[p] && value[s])
                }
            };
            value.insert(id, v);
        }
        Ok(value[&self.root])
    }

    fn word_values(
        &self,
        order: &[SddId],
        input: &WordInput,
        buf: &mut HashMap<SddId, u64>,
    ) -> Result<()> {
        for &id in order {
            let w = match &self.nodes[&id] {
                SddNode::False => 0,
                SddNode::True => !0,
                SddNode::Literal { lit, .. } => input.lit(*lit)?,
                SddNode::Decision { elements, .. } => elements
                    .iter()
                    .fold(0, |acc, (p, s)| acc | (buf[p] & buf[s])),
            };
            buf.insert(id, w);
        }
        Ok(())
    }

    /// Tables of several nodes over `order` in one enumeration.
    pub fn tables_of(&self, targets: &[SddId], order: &[Var], fixed: &Assignment) -> Result<Vec<TruthTable>> {
        let topo = self.topo_order_from(targets);
        let mut buf = HashMap::with_capacity(topo.len());
        TruthTable::build_many(order.to_vec(), fixed, targets.len(), |input, out| {
            self.word_values(&topo, input, &mut buf)?;
            for (slot, t) in out.iter_mut().zip(targets) {
                *slot = buf[t];
            }
            Ok(())
        })
    }

    fn topo_order_from(&self, roots: &[SddId]) -> Vec<SddId> {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        let mut stack: Vec<(SddId, bool)> = roots.iter().map(|&r| (r, false)).collect();
        while let Some((u, done)) = stack.pop() {
            if done {
                order.push(u);
                continue;
            }
            if !seen.insert(u) {
                continue;
            }
            stack.push((u, true));
            for c in self.nodes[&u].children() {
                if !seen.contains(&c) {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// Truth table over the vtree's variables, ascending.
    pub fn truth_table(&self) -> Result<TruthTable> {
        let vars = self.vtree.vars();
        if vars.len() > ORACLE_VAR_CAP {
            return Err(Error::OracleCap(vars.len()));
        }
        Ok(self.tables_of(&[self.root], &vars, &Assignment::new())?.remove(0))
    }

    /// Circle plus box nodes of G(alpha).
    pub fn size(&self) -> usize {
        self.size_circle_only() + self.box_count()
    }

    /// Distinct reachable nodes (terminals, literals, decisions).
    pub fn size_circle_only(&self) -> usize {
        self.nodes.len()
    }

    pub fn box_count(&self) -> usize {
        self.nodes
            .values()
            .map(|n| match n {
                SddNode::Decision { elements, .. } => elements.len(),
                _ => 0,
            })
            .sum()
    }

    /// Every `(node, vertex)` occurrence: the root at the vtree root, primes at
    /// the left child and subs at the right child of their parent's vertex.
    fn occurrences(&self) -> BTreeSet<(SddId, VtreeId)> {
        let mut occ = BTreeSet::new();
        occ.insert((self.root, self.vtree.root()));
        for node in self.nodes.values() {
            if let SddNode::Decision { vnode, elements } = node {
                if let Some((l, r)) = self.vtree.children(*vnode) {
                    for &(p, s) in elements {
                        occ.insert((p, l));
                        occ.insert((s, r));
                    }
                }
            }
        }
        occ
    }

    /// `Sdds(v, alpha)`: nodes at vertex `v`, together with constants
    /// occurring at `v` or at one of its ancestors. A root positioned below
    /// the vtree root also stands for itself at every vertex in between.
    pub fn sdds_at(&self, v: VtreeId) -> Result<BTreeSet<SddId>> {
        self.vtree.check_vertex(v)?;
        let vt = &self.vtree;
        Ok(self
            .occurrences()
            .into_iter()
            .filter(|&(id, at)| match self.nodes[&id].position() {
                Some(pos) => pos == v || (vt.is_ancestor_or_self(at, v) && vt.is_ancestor_or_self(v, pos)),
                None => vt.is_ancestor_or_self(at, v),
            })
            .map(|(id, _)| id)
            .collect())
    }

    fn respects(&self, id: SddId) -> bool {
        let vt = &self.vtree;
        match &self.nodes[&id] {
            SddNode::False | SddNode::True => true,
            SddNode::Literal { leaf, lit } => vt.leaf_var(*leaf) == Some(lit.var),
            SddNode::Decision { vnode, elements } => {
                let Some((l, r)) = vt.children(*vnode) else {
                    return false;
                };
                let fits = |c: SddId, at: VtreeId| {
                    self.nodes[&c].position().is_none_or(|pos| pos == at)
                };
                (V::PRUNED || !elements.is_empty())
                    && elements.iter().all(|&(p, s)| fits(p, l) && fits(s, r))
            }
        }
    }

    /// Structural vtree respect plus the semantic partition (or, for pruned
    /// diagrams, disjointness) check on every decision node's primes.
    pub fn validate(&self) -> Validity {
        let mut unknown = None;
        for id in self.topo_order() {
            if !self.respects(id) {
                return Validity::Violation {
                    node: id,
                    kind: ViolationKind::VtreeRespect,
                };
            }
            let SddNode::Decision { vnode, elements } = &self.nodes[&id] else {
                continue;
            };
            let (left, _) = self.vtree.children(*vnode).expect("respect checked");
            let order = self.vtree.vars_of(left);
            if order.len() > ORACLE_VAR_CAP {
                unknown.get_or_insert(id);
                continue;
            }
            let primes: Vec<SddId> = elements.iter().map(|e| e.0).collect();
            let tables = match self.tables_of(&primes, &order, &Assignment::new()) {
                Ok(t) => t,
                Err(_) => {
                    unknown.get_or_insert(id);
                    continue;
                }
            };
            let mut union = TruthTable::constant(order.clone(), false).expect("under cap");
            for t in &tables {
                if union.intersects(t).expect("same order") {
                    return Validity::Violation {
                        node: id,
                        kind: ViolationKind::Overlap,
                    };
                }
                union = union.or(t).expect("same order");
            }
            if !V::PRUNED && !union.is_true() {
                return Validity::Violation {
                    node: id,
                    kind: ViolationKind::Incomplete,
                };
            }
        }
        match unknown {
            Some(node) => Validity::Unknown { node },
            None => Validity::Ok,
        }
    }

    /// Exact model count over the vtree's variables, assuming validity.
    pub fn count_models(&self) -> BigUint {
        let vt = &self.vtree;
        let mut count: HashMap<(SddId, VtreeId), BigUint> = HashMap::new();
        self.count_at(self.root, vt.root(), &mut count)
    }

    fn count_at(
        &self,
        id: SddId,
        at: VtreeId,
        memo: &mut HashMap<(SddId, VtreeId), BigUint>,
    ) -> BigUint {
        if let Some(c) = memo.get(&(id, at)) {
            return c.clone();
        }
        let vt = &self.vtree;
        let width = vt.num_vars(at);
        let c = match &self.nodes[&id] {
            SddNode::False => BigUint::ZERO,
            SddNode::True => BigUint::from(1u8) << width,
            SddNode::Literal { .. } => BigUint::from(1u8) << (width - 1),
            // A low root: the variables in between are free.
            SddNode::Decision { vnode, .. } if *vnode != at => {
                self.count_at(id, *vnode, memo) << (width - vt.num_vars(*vnode))
            }
            SddNode::Decision { elements, .. } => {
                let (l, r) = vt.children(at).expect("decision at an internal vertex");
                elements
                    .iter()
                    .map(|&(p, s)| self.count_at(p, l, memo) * self.count_at(s, r, memo))
                    .sum()
            }
        };
        memo.insert((id, at), c.clone());
        c
    }

    /// The SDD read as an NNF circuit (decision = OR of prime AND sub).
    pub fn to_nnf(&self, var_count: u32) -> NnfCircuit {
        let mut b = NnfBuilder::new(var_count);
        let mut map: HashMap<SddId, usize> = HashMap::new();
        for id in self.topo_order() {
            let n = match &self.nodes[&id] {
                SddNode::False => b.constant(false),
                SddNode::True => b.constant(true),
                SddNode::Literal { lit, .. } => b.lit(*lit),
                SddNode::Decision { elements, .. } => {
                    let ands = elements
                        .iter()
                        .map(|(p, s)| b.and(vec![map[p], map[s]]))
                        .collect();
                    b.or(ands)
                }
            };
            map.insert(id, n);
        }
        b.finish(map[&self.root])
    }

    /// Every literal's sign flipped; ids and structure are kept.
    pub fn negate_by_literal_flip(&self) -> Self {
        let nodes = self
            .nodes
            .iter()
            .map(|(&id, n)| {
                let n = match n {
                    SddNode::Literal { leaf, lit } => SddNode::Literal {
                        leaf: *leaf,
                        lit: lit.negate(),
                    },
                    other => other.clone(),
                };
                (id, n)
            })
            .collect();
        SddOver {
            vtree: self.vtree.clone(),
            nodes,
            root: self.root,
        }
    }
}

/// `ceil(2^(sqrt(C) - 1))`, the size bound implied by an unambiguous
/// communication lower bound of `C` bits.
pub fn sdd_lower_bound_from_cc(c: u64) -> u64 {
    let v = 2f64.powf((c as f64).sqrt() - 1.0).ceil();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}

#[cfg(test)]
mod tests;
