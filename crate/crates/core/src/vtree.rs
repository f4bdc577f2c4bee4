//! Vtrees, pruned vtrees, balanced-vertex search and shell partitions.
//!
//! Both tree kinds share [`Topology`]: node ids index a (possibly sparse)
//! array, children precede parents, and every vertex knows the span of
//! in-order leaf positions below it, so ancestry and variable membership are
//! constant-time interval tests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::Deref;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{parse_err, Error, Result};
use crate::literal::Var;

pub type VtreeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VtreeNode {
    Leaf(Var),
    /// Only present in pruned vtrees.
    Stub,
    Internal(VtreeId, VtreeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    nodes: Vec<Option<VtreeNode>>,
    root: VtreeId,
    parent: Vec<Option<VtreeId>>,
    depth: Vec<u32>,
    /// Half-open range of in-order leaf positions below each vertex.
    span: Vec<(u32, u32)>,
    /// In-order leaves; `None` marks a stub.
    leaf_seq: Vec<Option<Var>>,
    /// `var_prefix[i]` = number of variable leaves among the first `i` leaves.
    var_prefix: Vec<u32>,
    leaf_pos: BTreeMap<Var, u32>,
    leaf_id: BTreeMap<Var, VtreeId>,
}

impl Topology {
    fn build(nodes: Vec<Option<VtreeNode>>, root: VtreeId) -> Result<Self> {
        let n = nodes.len();
        if root >= n || nodes[root].is_none() {
            return Err(Error::Invalid(format!("root {root} is not a vertex")));
        }
        let mut parent = vec![None; n];
        for (id, node) in nodes.iter().enumerate() {
            if let Some(VtreeNode::Internal(l, r)) = node {
                for &c in &[*l, *r] {
                    if c >= id || nodes.get(c).copied().flatten().is_none() {
                        return Err(Error::Invalid(format!(
                            "vertex {id} has child {c}, which is missing or does not precede it"
                        )));
                    }
                    if parent[c].replace(id).is_some() {
                        return Err(Error::Invalid(format!("vertex {c} has two parents")));
                    }
                }
            }
        }
        let mut depth = vec![0u32; n];
        let mut span = vec![(0u32, 0u32); n];
        let mut leaf_seq = Vec::new();
        let mut visited = 0usize;
        // Iterative in-order walk: (vertex, expanded?)
        let mut stack = vec![(root, false)];
        while let Some((u, expanded)) = stack.pop() {
            match nodes[u].expect("checked above") {
                VtreeNode::Internal(l, r) => {
                    if expanded {
                        span[u] = (span[l].0, span[r].1);
                    } else {
                        visited += 1;
                        depth[l] = depth[u] + 1;
                        depth[r] = depth[u] + 1;
                        stack.push((u, true));
                        stack.push((r, false));
                        stack.push((l, false));
                    }
                }
                leaf => {
                    visited += 1;
                    let pos = leaf_seq.len() as u32;
                    span[u] = (pos, pos + 1);
                    leaf_seq.push(match leaf {
                        VtreeNode::Leaf(v) => Some(v),
                        _ => None,
                    });
                }
            }
        }
        let present = nodes.iter().filter(|n| n.is_some()).count();
        if visited != present {
            return Err(Error::Invalid("vertices unreachable from the root".into()));
        }
        let mut var_prefix = vec![0u32];
        let mut leaf_pos = BTreeMap::new();
        for (pos, v) in leaf_seq.iter().enumerate() {
            var_prefix.push(var_prefix[pos] + u32::from(v.is_some()));
            if let Some(v) = *v {
                if v == 0 {
                    return Err(Error::Invalid("variable 0 in vtree".into()));
                }
                if leaf_pos.insert(v, pos as u32).is_some() {
                    return Err(Error::Invalid(format!("variable {v} appears twice")));
                }
            }
        }
        let leaf_id = nodes
            .iter()
            .enumerate()
            .filter_map(|(id, n)| match n {
                Some(VtreeNode::Leaf(v)) => Some((*v, id)),
                _ => None,
            })
            .collect();
        Ok(Topology {
            nodes,
            root,
            parent,
            depth,
            span,
            leaf_seq,
            var_prefix,
            leaf_pos,
            leaf_id,
        })
    }

    pub fn root(&self) -> VtreeId {
        self.root
    }

    /// Size of the id space (ids of a pruned vtree may be sparse).
    pub fn id_bound(&self) -> usize {
        self.nodes.len()
    }

    /// Present vertex ids in ascending order, which is children-first.
    pub fn ids(&self) -> impl Iterator<Item = VtreeId> + '_ {
        (0..self.nodes.len()).filter(|&u| self.nodes[u].is_some())
    }

    pub fn vertex_count(&self) -> usize {
        self.ids().count()
    }

    pub fn node(&self, u: VtreeId) -> Option<VtreeNode> {
        self.nodes.get(u).copied().flatten()
    }

    pub fn contains(&self, u: VtreeId) -> bool {
        self.node(u).is_some()
    }

    pub fn check_vertex(&self, u: VtreeId) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(Error::NoSuchVertex(u))
        }
    }

    pub fn children(&self, u: VtreeId) -> Option<(VtreeId, VtreeId)> {
        match self.node(u) {
            Some(VtreeNode::Internal(l, r)) => Some((l, r)),
            _ => None,
        }
    }

    pub fn is_internal(&self, u: VtreeId) -> bool {
        self.children(u).is_some()
    }

    pub fn parent(&self, u: VtreeId) -> Option<VtreeId> {
        self.parent.get(u).copied().flatten()
    }

    pub fn depth(&self, u: VtreeId) -> u32 {
        self.depth[u]
    }

    pub fn leaf_var(&self, u: VtreeId) -> Option<Var> {
        match self.node(u) {
            Some(VtreeNode::Leaf(v)) => Some(v),
            _ => None,
        }
    }

    pub fn is_stub(&self, u: VtreeId) -> bool {
        self.node(u) == Some(VtreeNode::Stub)
    }

    /// The leaf vertex labelled by `var`.
    pub fn leaf_of(&self, var: Var) -> Option<VtreeId> {
        self.leaf_id.get(&var).copied()
    }

    pub fn has_var(&self, var: Var) -> bool {
        self.leaf_pos.contains_key(&var)
    }

    /// All variables, ascending.
    pub fn vars(&self) -> Vec<Var> {
        self.leaf_pos.keys().copied().collect()
    }

    pub fn var_count(&self) -> usize {
        self.leaf_pos.len()
    }

    /// Variables below `u`, in left-to-right leaf order.
    pub fn vars_of(&self, u: VtreeId) -> Vec<Var> {
        let (lo, hi) = self.span[u];
        self.leaf_seq[lo as usize..hi as usize]
            .iter()
            .flatten()
            .copied()
            .collect()
    }

    pub fn num_vars(&self, u: VtreeId) -> usize {
        let (lo, hi) = self.span[u];
        (self.var_prefix[hi as usize] - self.var_prefix[lo as usize]) as usize
    }

    pub fn num_leaves(&self, u: VtreeId) -> usize {
        let (lo, hi) = self.span[u];
        (hi - lo) as usize
    }

    /// True when `var` labels a leaf below (or at) `u`.
    pub fn var_below(&self, u: VtreeId, var: Var) -> bool {
        let (lo, hi) = self.span[u];
        self.leaf_pos
            .get(&var)
            .is_some_and(|&p| lo <= p && p < hi)
    }

    pub fn is_ancestor_or_self(&self, a: VtreeId, d: VtreeId) -> bool {
        let (alo, ahi) = self.span[a];
        let (dlo, dhi) = self.span[d];
        alo <= dlo && dhi <= ahi
    }

    pub fn lca(&self, mut a: VtreeId, mut b: VtreeId) -> VtreeId {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("non-root has a parent");
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("non-root has a parent");
        }
        while a != b {
            a = self.parent[a].expect("non-root has a parent");
            b = self.parent[b].expect("non-root has a parent");
        }
        a
    }

    /// Vertices from the root down to `u`, inclusive.
    pub fn path_to(&self, u: VtreeId) -> Vec<VtreeId> {
        let mut path = vec![u];
        let mut cur = u;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    fn write_nodes(&self, out: &mut String) {
        for u in self.ids() {
            let _ = match self.nodes[u].expect("present") {
                VtreeNode::Leaf(v) => writeln!(out, "L {u} {v}"),
                VtreeNode::Stub => writeln!(out, "S {u}"),
                VtreeNode::Internal(l, r) => writeln!(out, "I {u} {l} {r}"),
            };
        }
    }

    fn parse_nodes(text: &str, kind: &'static str, allow_stub: bool) -> Result<Self> {
        let mut declared = None;
        let mut entries: Vec<(VtreeId, VtreeNode)> = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t: Vec<&str> = raw.split_whitespace().collect();
            let Some(&head) = t.first() else { continue };
            if head == "c" {
                continue;
            }
            let num = |i: usize| -> Result<usize> {
                t.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(kind, line, format!("bad field {i} in `{raw}`")))
            };
            if declared.is_none() {
                if head != kind || t.len() != 2 {
                    return Err(parse_err(kind, line, format!("expected header `{kind} N`")));
                }
                declared = Some(num(1)?);
                continue;
            }
            let (id, node, arity) = match head {
                "L" => (num(1)?, VtreeNode::Leaf(num(2)? as Var), 3),
                "I" => (num(1)?, VtreeNode::Internal(num(2)?, num(3)?), 4),
                "S" if allow_stub => (num(1)?, VtreeNode::Stub, 2),
                _ => return Err(parse_err(kind, line, format!("unknown line `{raw}`"))),
            };
            if t.len() != arity {
                return Err(parse_err(kind, line, format!("wrong field count in `{raw}`")));
            }
            if let VtreeNode::Internal(l, r) = node {
                if !seen.contains(&l) || !seen.contains(&r) {
                    return Err(parse_err(kind, line, "children must precede their parent"));
                }
            }
            if !seen.insert(id) {
                return Err(parse_err(kind, line, format!("duplicate id {id}")));
            }
            entries.push((id, node));
        }
        let declared = declared.ok_or_else(|| parse_err(kind, 0, "missing header"))?;
        if entries.len() != declared {
            return Err(parse_err(
                kind,
                0,
                format!("header declares {declared} vertices, found {}", entries.len()),
            ));
        }
        let root = entries
            .last()
            .map(|e| e.0)
            .ok_or_else(|| parse_err(kind, 0, "no vertices"))?;
        let bound = entries.iter().map(|e| e.0).max().unwrap_or(0) + 1;
        let mut nodes = vec![None; bound];
        for (id, node) in entries {
            nodes[id] = Some(node);
        }
        Topology::build(nodes, root).map_err(|e| parse_err(kind, 0, e.to_string()))
    }
}

/// Full binary tree whose leaves biject with a variable set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vtree(Topology);

impl Deref for Vtree {
    type Target = Topology;
    fn deref(&self) -> &Topology {
        &self.0
    }
}

/// Vtree whose leaves are variables or stubs. Ids are those of the source vtree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedVtree(Topology);

impl Deref for PrunedVtree {
    type Target = Topology;
    fn deref(&self) -> &Topology {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VtreeShape {
    /// Left part receives `ceil(n/2)` variables.
    Balanced,
    RightLinear,
    LeftLinear,
    /// Seeded shuffle followed by uniformly random split points.
    Random(u64),
}

struct Assembler {
    nodes: Vec<Option<VtreeNode>>,
}

impl Assembler {
    fn push(&mut self, node: VtreeNode) -> VtreeId {
        self.nodes.push(Some(node));
        self.nodes.len() - 1
    }

    fn join(&mut self, l: VtreeId, r: VtreeId) -> VtreeId {
        self.push(VtreeNode::Internal(l, r))
    }

    /// Builds over `vars` with `split(n)` choosing the size of the left part.
    fn split_build(&mut self, vars: &[Var], split: &mut impl FnMut(usize) -> usize) -> VtreeId {
        if vars.len() == 1 {
            return self.push(VtreeNode::Leaf(vars[0]));
        }
        let k = split(vars.len());
        let l = self.split_build(&vars[..k], split);
        let r = self.split_build(&vars[k..], split);
        self.join(l, r)
    }
}

impl Vtree {
    pub fn new(nodes: Vec<VtreeNode>, root: VtreeId) -> Result<Self> {
        if nodes.contains(&VtreeNode::Stub) {
            return Err(Error::Invalid("stub in an unpruned vtree".into()));
        }
        Ok(Vtree(Topology::build(
            nodes.into_iter().map(Some).collect(),
            root,
        )?))
    }

    pub fn build(vars: &[Var], shape: VtreeShape) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::Parameter("vtree over no variables".into()));
        }
        let distinct: BTreeSet<Var> = vars.iter().copied().collect();
        if distinct.len() != vars.len() {
            return Err(Error::Parameter("duplicate variable in vtree".into()));
        }
        let mut asm = Assembler { nodes: Vec::new() };
        let root = match shape {
            VtreeShape::Balanced => asm.split_build(vars, &mut |n| n.div_ceil(2)),
            VtreeShape::RightLinear => asm.split_build(vars, &mut |_| 1),
            VtreeShape::LeftLinear => asm.split_build(vars, &mut |n| n - 1),
            VtreeShape::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut shuffled = vars.to_vec();
                shuffled.shuffle(&mut rng);
                asm.split_build(&shuffled, &mut |n| rng.random_range(1..n))
            }
        };
        Ok(Vtree(Topology::build(asm.nodes, root)?))
    }

    pub fn node_list(&self) -> Vec<VtreeNode> {
        self.0.nodes.iter().map(|n| n.expect("dense")).collect()
    }

    /// Vertex `b` with `ceil(L/3) <= |Vars(b)| <= floor(2L/3)`: descend into the
    /// larger child (left on ties) while the current vertex is too big.
    pub fn find_balanced_vertex(&self) -> Result<VtreeId> {
        let l = self.var_count();
        if l < 2 {
            return Err(Error::Parameter(
                "a single-variable vtree has no balanced vertex".into(),
            ));
        }
        let limit = 2 * l / 3;
        let mut u = self.root;
        while self.num_vars(u) > limit {
            let (a, b) = self.children(u).expect("a leaf never exceeds the limit");
            u = if self.num_vars(b) > self.num_vars(a) { b } else { a };
        }
        Ok(u)
    }

    pub fn shell_partition(&self, b: VtreeId) -> Result<ShellPartition> {
        self.check_vertex(b)?;
        let inner: BTreeSet<Var> = self.vars_of(b).into_iter().collect();
        let shell = self.vars().into_iter().filter(|v| !inner.contains(v)).collect();
        Ok(ShellPartition {
            vertex: b,
            shell,
            inner: inner.into_iter().collect(),
        })
    }

    /// Replace every maximal subtree whose variables all lie in `removed` by a stub.
    pub fn prune(&self, removed: &BTreeSet<Var>) -> Result<PrunedVtree> {
        if let Some(&v) = removed.iter().find(|&&v| !self.has_var(v)) {
            return Err(Error::VarMismatch(v));
        }
        let covered = |u: VtreeId| self.vars_of(u).iter().all(|v| removed.contains(v));
        let mut nodes = vec![None; self.id_bound()];
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            if covered(u) {
                nodes[u] = Some(VtreeNode::Stub);
                continue;
            }
            nodes[u] = self.node(u);
            if let Some((l, r)) = self.children(u) {
                stack.push(l);
                stack.push(r);
            }
        }
        Ok(PrunedVtree(Topology::build(nodes, self.root)?))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vtree {}\n", self.vertex_count());
        self.write_nodes(&mut out);
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let topo = Topology::parse_nodes(text, "vtree", false)?;
        if topo.nodes.iter().any(Option::is_none) {
            return Err(parse_err("vtree", 0, "vertex ids must be 0..N-1"));
        }
        Ok(Vtree(topo))
    }
}

impl PrunedVtree {
    pub fn to_text(&self) -> String {
        let mut out = format!("pvtree {}\n", self.vertex_count());
        self.write_nodes(&mut out);
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(PrunedVtree(Topology::parse_nodes(text, "pvtree", true)?))
    }

    pub fn stubs(&self) -> Vec<VtreeId> {
        self.ids().filter(|&u| self.is_stub(u)).collect()
    }
}

/// `inner = Vars(vertex)`, `shell` = every other variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShellPartition {
    pub vertex: VtreeId,
    pub shell: Vec<Var>,
    pub inner: Vec<Var>,
}

/// Seeded random vtree over `vars` (convenience for [`VtreeShape::Random`]).
pub fn random_vtree<R: Rng>(vars: &[Var], rng: &mut R) -> Result<Vtree> {
    Vtree::build(vars, VtreeShape::Random(rng.random()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape_string(t: &Topology, u: VtreeId) -> String {
        match t.node(u).unwrap() {
            VtreeNode::Leaf(v) => v.to_string(),
            VtreeNode::Stub => "stub".into(),
            VtreeNode::Internal(l, r) => {
                format!("({},{})", shape_string(t, l), shape_string(t, r))
            }
        }
    }

    #[test]
    fn shapes() {
        let v = Vtree::build(&[1], VtreeShape::Balanced).unwrap();
        assert_eq!(shape_string(&v, v.root()), "1");
        let v = Vtree::build(&[1, 2, 3, 4], VtreeShape::Balanced).unwrap();
        assert_eq!(shape_string(&v, v.root()), "((1,2),(3,4))");
        let v = Vtree::build(&[1, 2, 3], VtreeShape::RightLinear).unwrap();
        assert_eq!(shape_string(&v, v.root()), "(1,(2,3))");
        let v = Vtree::build(&[1, 2, 3], VtreeShape::LeftLinear).unwrap();
        assert_eq!(shape_string(&v, v.root()), "((1,2),3)");
        let v = Vtree::build(&[1, 2, 3, 4, 5], VtreeShape::Balanced).unwrap();
        assert_eq!(shape_string(&v, v.root()), "(((1,2),3),(4,5))");
        assert!(Vtree::build(&[], VtreeShape::Balanced).is_err());
        assert!(Vtree::build(&[1, 1], VtreeShape::Balanced).is_err());
    }

    #[test]
    fn random_is_reproducible() {
        let vars: Vec<Var> = (1..=12).collect();
        let a = Vtree::build(&vars, VtreeShape::Random(5)).unwrap();
        let b = Vtree::build(&vars, VtreeShape::Random(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.vars(), vars);
    }

    #[test]
    fn balanced_vertex() {
        let v = Vtree::build(&[1, 2, 3, 4], VtreeShape::Balanced).unwrap();
        let b = v.find_balanced_vertex().unwrap();
        assert_eq!(v.num_vars(b), 2);
        assert_eq!(v.parent(b), Some(v.root()));

        let v = Vtree::build(&[1, 2, 3, 4, 5, 6], VtreeShape::RightLinear).unwrap();
        let b = v.find_balanced_vertex().unwrap();
        assert_eq!(v.vars_of(b), vec![3, 4, 5, 6]);

        let v = Vtree::build(&[1, 2], VtreeShape::Balanced).unwrap();
        assert_eq!(v.num_vars(v.find_balanced_vertex().unwrap()), 1);

        let v = Vtree::build(&[1], VtreeShape::Balanced).unwrap();
        assert!(v.find_balanced_vertex().is_err());
    }

    #[test]
    fn shell_partitions() {
        let v = Vtree::build(&[1, 2, 3, 4], VtreeShape::Balanced).unwrap();
        let (_, r) = v.children(v.root()).unwrap();
        let p = v.shell_partition(r).unwrap();
        assert_eq!((p.shell, p.inner), (vec![1, 2], vec![3, 4]));
        let p = v.shell_partition(v.root()).unwrap();
        assert!(p.shell.is_empty());
        assert!(v.shell_partition(99).is_err());

        let v = Vtree::build(&[1, 2, 3], VtreeShape::RightLinear).unwrap();
        let p = v.shell_partition(v.leaf_of(2).unwrap()).unwrap();
        assert_eq!((p.shell, p.inner), (vec![1, 3], vec![2]));
    }

    #[test]
    fn pruning() {
        let v = Vtree::build(&[1, 2, 3, 4], VtreeShape::Balanced).unwrap();
        let p = v.prune(&[1, 2].into_iter().collect()).unwrap();
        assert_eq!(shape_string(&p, p.root()), "(stub,(3,4))");
        assert_eq!(p.vars(), vec![3, 4]);
        let (l, _) = p.children(p.root()).unwrap();
        assert_eq!(v.vars_of(l), vec![1, 2], "stub keeps the pruned vertex id");

        let p = v.prune(&BTreeSet::new()).unwrap();
        assert_eq!(shape_string(&p, p.root()), "((1,2),(3,4))");

        let p = v.prune(&[1, 2, 3, 4].into_iter().collect()).unwrap();
        assert!(p.is_stub(p.root()));

        assert!(matches!(
            v.prune(&[9].into_iter().collect()),
            Err(Error::VarMismatch(9))
        ));
    }

    #[test]
    fn pruning_fig2_vtree() {
        // (((A,B),(C,D)),(E,F)); setting A, B, E, F prunes to ((stub,(C,D)),stub).
        let v = Vtree::parse(
            "vtree 11\nL 0 1\nL 1 2\nI 2 0 1\nL 3 3\nL 4 4\nI 5 3 4\nI 6 2 5\nL 7 5\nL 8 6\nI 9 7 8\nI 10 6 9\n",
        )
        .unwrap();
        let p = v.prune(&[1, 2, 5, 6].into_iter().collect()).unwrap();
        assert_eq!(shape_string(&p, p.root()), "((stub,(3,4)),stub)");
        assert_eq!(p.stubs(), vec![2, 9]);
    }

    #[test]
    fn text_roundtrip() {
        let v = Vtree::build(&(1..=7).collect::<Vec<_>>(), VtreeShape::Random(3)).unwrap();
        assert_eq!(Vtree::parse(&v.to_text()).unwrap(), v);
        let p = v.prune(&[2, 3].into_iter().collect()).unwrap();
        assert_eq!(PrunedVtree::parse(&p.to_text()).unwrap(), p);
        assert!(Vtree::parse("vtree 2\nL 0 1\nL 1 2\n").is_err());
        assert!(Vtree::parse("vtree 3\nI 2 0 1\nL 0 1\nL 1 2\n").is_err());
        assert!(Vtree::parse("vtree 1\nS 0\n").is_err());
    }

    #[test]
    fn ancestry_and_lca() {
        let v = Vtree::build(&[1, 2, 3, 4], VtreeShape::Balanced).unwrap();
        let (a, b) = (v.leaf_of(1).unwrap(), v.leaf_of(2).unwrap());
        let c = v.leaf_of(4).unwrap();
        assert_eq!(v.lca(a, b), v.parent(a).unwrap());
        assert_eq!(v.lca(a, c), v.root());
        assert!(v.is_ancestor_or_self(v.root(), c));
        assert!(!v.is_ancestor_or_self(a, b));
        assert!(v.var_below(v.parent(a).unwrap(), 2));
        assert!(!v.var_below(v.parent(a).unwrap(), 3));
        assert_eq!(v.path_to(a).len(), 3);
    }
}
