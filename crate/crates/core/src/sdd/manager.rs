use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{Sdd, SddId, SddNode, SddOver, FALSE, TRUE};
use crate::circuit::{NnfCircuit, NnfNode};
use crate::error::{Error, Result};
use crate::literal::Lit;
use crate::vtree::{Vtree, VtreeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    And,
    Or,
}

/// Owns the node table, unique table and operation caches for one vtree.
///
/// Ids 0 and 1 are always the constants. Decision nodes are never trimmed;
/// the only collapses are to a constant when every sub is that same constant.
#[derive(Debug, Clone)]
pub struct SddManager {
    vtree: Arc<Vtree>,
    nodes: Vec<SddNode>,
    unique: HashMap<SddNode, SddId>,
    apply_cache: HashMap<(Op, SddId, SddId), SddId>,
    negate_cache: HashMap<SddId, SddId>,
    lift_cache: HashMap<(SddId, VtreeId), SddId>,
    compress: bool,
    budget: Option<usize>,
    /// Elements created so far, one per terminal.
    weight: usize,
    over_budget: bool,
}

impl SddManager {
    pub fn new(vtree: Arc<Vtree>) -> Self {
        let mut m = SddManager {
            vtree,
            nodes: Vec::new(),
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            negate_cache: HashMap::new(),
            lift_cache: HashMap::new(),
            compress: false,
            budget: None,
            weight: 0,
            over_budget: false,
        };
        m.intern(SddNode::False);
        m.intern(SddNode::True);
        m
    }

    /// Merge elements with equal subs (off by default).
    pub fn with_compression(mut self, on: bool) -> Self {
        self.compress = on;
        self
    }

    /// Abort compilation once more than `limit` elements have been created,
    /// counting each terminal as one.
    pub fn with_budget(mut self, limit: Option<usize>) -> Self {
        self.budget = limit;
        self
    }

    pub fn vtree(&self) -> &Arc<Vtree> {
        &self.vtree
    }

    pub fn node(&self, id: SddId) -> &SddNode {
        &self.nodes[id]
    }

    /// Number of nodes ever created, constants included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn intern(&mut self, node: SddNode) -> SddId {
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.weight += match &node {
            SddNode::Decision { elements, .. } => elements.len().max(1),
            _ => 1,
        };
        self.unique.insert(node.clone(), id);
        self.nodes.push(node);
        self.over_budget |= self.budget.is_some_and(|b| self.weight > b);
        id
    }

    pub fn literal(&mut self, lit: Lit) -> Result<SddId> {
        let leaf = self.vtree.leaf_of(lit.var).ok_or(Error::VarMismatch(lit.var))?;
        Ok(self.intern(SddNode::Literal { leaf, lit }))
    }

    pub fn constant(&self, value: bool) -> SddId {
        if value {
            TRUE
        } else {
            FALSE
        }
    }

    fn decision(&mut self, vnode: VtreeId, mut elements: Vec<(SddId, SddId)>) -> SddId {
        elements.retain(|&(p, _)| p != FALSE);
        if self.compress {
            let mut by_sub: BTreeMap<SddId, SddId> = BTreeMap::new();
            for (p, s) in std::mem::take(&mut elements) {
                let merged = match by_sub.get(&s) {
                    Some(&q) => self.apply(Op::Or, q, p),
                    None => p,
                };
                by_sub.insert(s, merged);
            }
            elements = by_sub.into_iter().map(|(s, p)| (p, s)).collect();
        }
        if elements.iter().all(|&(_, s)| s == FALSE) {
            return FALSE;
        }
        if elements.iter().all(|&(_, s)| s == TRUE) {
            return TRUE;
        }
        elements.sort_unstable();
        self.intern(SddNode::Decision { vnode, elements })
    }

    pub fn negate(&mut self, a: SddId) -> SddId {
        match a {
            FALSE => return TRUE,
            TRUE => return FALSE,
            _ => {}
        }
        if let Some(&r) = self.negate_cache.get(&a) {
            return r;
        }
        let r = match self.nodes[a].clone() {
            SddNode::Literal { leaf, lit } => self.intern(SddNode::Literal {
                leaf,
                lit: lit.negate(),
            }),
            SddNode::Decision { vnode, elements } => {
                let flipped = elements
                    .into_iter()
                    .map(|(p, s)| (p, self.negate(s)))
                    .collect();
                self.decision(vnode, flipped)
            }
            SddNode::False | SddNode::True => unreachable!("constants handled above"),
        };
        self.negate_cache.insert(a, r);
        self.negate_cache.insert(r, a);
        r
    }

    pub fn conjoin(&mut self, a: SddId, b: SddId) -> SddId {
        self.apply(Op::And, a, b)
    }

    pub fn disjoin(&mut self, a: SddId, b: SddId) -> SddId {
        self.apply(Op::Or, a, b)
    }

    /// Re-expresses a non-constant node positioned below `w` as a node at `w`.
    fn lift(&mut self, x: SddId, w: VtreeId) -> SddId {
        let pos = self.nodes[x].position().expect("constants are never lifted");
        if pos == w {
            return x;
        }
        if let Some(&r) = self.lift_cache.get(&(x, w)) {
            return r;
        }
        let (l, r) = self.vtree.children(w).expect("lift target is an ancestor");
        let out = if self.vtree.is_ancestor_or_self(l, pos) {
            let px = self.lift(x, l);
            let nx = self.negate(px);
            self.decision(w, vec![(px, TRUE), (nx, FALSE)])
        } else {
            let sx = self.lift(x, r);
            self.decision(w, vec![(TRUE, sx)])
        };
        self.lift_cache.insert((x, w), out);
        out
    }

    fn apply(&mut self, op: Op, a: SddId, b: SddId) -> SddId {
        match (op, a, b) {
            (Op::And, FALSE, _) | (Op::And, _, FALSE) => return FALSE,
            (Op::Or, TRUE, _) | (Op::Or, _, TRUE) => return TRUE,
            (Op::And, TRUE, x) | (Op::And, x, TRUE) => return x,
            (Op::Or, FALSE, x) | (Op::Or, x, FALSE) => return x,
            _ if a == b => return a,
            // Unwind quickly; the result is discarded by `compile`.
            _ if self.over_budget => return FALSE,
            _ => {}
        }
        let key = (op, a.min(b), a.max(b));
        if let Some(&r) = self.apply_cache.get(&key) {
            return r;
        }
        let pa = self.nodes[a].position().expect("non-constant");
        let pb = self.nodes[b].position().expect("non-constant");
        let w = self.vtree.lca(pa, pb);
        let (a2, b2) = (self.lift(a, w), self.lift(b, w));
        let r = if a2 == b2 {
            a2
        } else {
            match (self.nodes[a2].clone(), self.nodes[b2].clone()) {
                // Two distinct literals at one leaf are complementary.
                (SddNode::Literal { .. }, SddNode::Literal { .. }) => match op {
                    Op::And => FALSE,
                    Op::Or => TRUE,
                },
                (
                    SddNode::Decision { elements: ea, .. },
                    SddNode::Decision { elements: eb, .. },
                ) => {
                    let mut out = Vec::with_capacity(ea.len() * eb.len());
                    for &(p, s) in &ea {
                        for &(q, t) in &eb {
                            let prime = self.apply(Op::And, p, q);
                            if prime == FALSE {
                                continue;
                            }
                            let sub = self.apply(op, s, t);
                            out.push((prime, sub));
                        }
                    }
                    self.decision(w, out)
                }
                _ => unreachable!("nodes at one vertex have the same kind"),
            }
        };
        self.apply_cache.insert(key, r);
        r
    }

    /// Bottom-up compilation of an NNF circuit.
    pub fn compile(&mut self, c: &NnfCircuit) -> Result<SddId> {
        if let Some(v) = c.vars_used().into_iter().find(|&v| !self.vtree.has_var(v)) {
            return Err(Error::VarMismatch(v));
        }
        let mut map: HashMap<usize, SddId> = HashMap::new();
        for u in c.reachable_from(&[c.root()]) {
            let id = match c.node(u) {
                NnfNode::Const(b) => self.constant(*b),
                NnfNode::Lit(l) => self.literal(*l)?,
                NnfNode::And(ch) => ch
                    .iter()
                    .fold(TRUE, |acc, k| self.apply(Op::And, acc, map[k])),
                NnfNode::Or(ch) => ch
                    .iter()
                    .fold(FALSE, |acc, k| self.apply(Op::Or, acc, map[k])),
            };
            if self.over_budget {
                // Interned nodes are sound; cached apply results are not.
                self.apply_cache.clear();
                self.over_budget = false;
                return Err(Error::Budget(self.budget.unwrap_or_default()));
            }
            map.insert(u, id);
        }
        Ok(map[&c.root()])
    }

    /// Detached copy of the diagram rooted at `root`.
    pub fn export(&self, root: SddId) -> Sdd {
        let mut nodes = BTreeMap::new();
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            if nodes.contains_key(&u) {
                continue;
            }
            let n = self.nodes[u].clone();
            stack.extend(n.children());
            nodes.insert(u, n);
        }
        SddOver {
            vtree: self.vtree.clone(),
            nodes,
            root,
        }
    }

    /// Drop operation caches; nodes and ids are kept.
    pub fn clear_caches(&mut self) {
        self.apply_cache.clear();
        self.lift_cache.clear();
    }
}

/// Compile `c` in a fresh manager over `vtree` with default settings.
pub fn compile(c: &NnfCircuit, vtree: &Vtree) -> Result<Sdd> {
    compile_with_budget(c, vtree, None)
}

/// As [`compile`], failing with [`Error::Budget`] once more than `budget`
/// elements have been created, intermediate results included.
pub fn compile_with_budget(c: &NnfCircuit, vtree: &Vtree, budget: Option<usize>) -> Result<Sdd> {
    let mut m = SddManager::new(Arc::new(vtree.clone())).with_budget(budget);
    let root = m.compile(c)?;
    Ok(m.export(root))
}
