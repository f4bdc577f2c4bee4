//! Branching programs: FBDDs, OBDDs and their nondeterministic OR variant.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;

use crate::error::{parse_err, Error, Result, ORACLE_VAR_CAP};
use crate::literal::{Assignment, Var};
use crate::truth_table::TruthTable;

pub type BddId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BddNode {
    Decision { var: Var, lo: BddId, hi: BddId },
    Or(Vec<BddId>),
    NoOp(BddId),
    Sink(bool),
}

impl BddNode {
    pub fn children(&self) -> Vec<BddId> {
        match self {
            BddNode::Decision { lo, hi, .. } => vec![*lo, *hi],
            BddNode::Or(c) => c.clone(),
            BddNode::NoOp(c) => vec![*c],
            BddNode::Sink(_) => Vec::new(),
        }
    }
}

/// Decision diagram with OR and no-op nodes. Ids index `nodes`; the type
/// does not by itself guarantee acyclicity or read-once-ness, see
/// [`OrFbdd::check_structure`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrFbdd {
    nodes: Vec<BddNode>,
    root: BddId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathWitness {
    /// Node ids from the root to the offending node.
    pub path: Vec<BddId>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    Ok,
    Violation(PathWitness),
}

impl OrFbdd {
    pub fn new(nodes: Vec<BddNode>, root: BddId) -> Result<Self> {
        let n = nodes.len();
        if root >= n {
            return Err(Error::Invalid(format!("root {root} out of range")));
        }
        for (id, node) in nodes.iter().enumerate() {
            if let Some(c) = node.children().into_iter().find(|&c| c >= n) {
                return Err(Error::Invalid(format!("node {id} refers to missing node {c}")));
            }
            if let BddNode::Decision { var: 0, .. } = node {
                return Err(Error::Invalid(format!("node {id} queries variable 0")));
            }
        }
        Ok(OrFbdd { nodes, root })
    }

    pub fn nodes(&self) -> &[BddNode] {
        &self.nodes
    }

    pub fn node(&self, id: BddId) -> &BddNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> BddId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn has_or_nodes(&self) -> bool {
        self.reachable().into_iter().any(|u| matches!(self.nodes[u], BddNode::Or(_)))
    }

    /// Ids reachable from the root, ascending.
    pub fn reachable(&self) -> Vec<BddId> {
        let mut seen = FixedBitSet::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            if !seen.put(u) {
                stack.extend(self.nodes[u].children());
            }
        }
        seen.ones().collect()
    }

    /// Variables queried anywhere reachable from the root.
    pub fn vars(&self) -> BTreeSet<Var> {
        self.reachable()
            .into_iter()
            .filter_map(|u| match self.nodes[u] {
                BddNode::Decision { var, .. } => Some(var),
                _ => None,
            })
            .collect()
    }

    /// True iff some root-to-1-sink path is consistent with `a`.
    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        self.accepts_from(self.root, a)
    }

    fn accepts_from(&self, start: BddId, a: &Assignment) -> Result<bool> {
        let mut seen = FixedBitSet::with_capacity(self.nodes.len());
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            if seen.put(u) {
                continue;
            }
            match &self.nodes[u] {
                BddNode::Sink(true) => return Ok(true),
                BddNode::Sink(false) => {}
                BddNode::Decision { var, lo, hi } => {
                    stack.push(if a.require(*var)? { *hi } else { *lo })
                }
                BddNode::Or(c) => stack.extend(c),
                BddNode::NoOp(c) => stack.push(*c),
            }
        }
        Ok(false)
    }

    /// An accepting root-to-1-sink path under `a`, if any.
    pub fn accepting_path(&self, a: &Assignment) -> Result<Option<Vec<BddId>>> {
        let mut parent: HashMap<BddId, BddId> = HashMap::new();
        let mut seen = FixedBitSet::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        seen.insert(self.root);
        while let Some(u) = stack.pop() {
            let next = match &self.nodes[u] {
                BddNode::Sink(true) => {
                    let mut path = vec![u];
                    let mut cur = u;
                    while let Some(&p) = parent.get(&cur) {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return Ok(Some(path));
                }
                BddNode::Sink(false) => Vec::new(),
                BddNode::Decision { var, lo, hi } => {
                    vec![if a.require(*var)? { *hi } else { *lo }]
                }
                BddNode::Or(c) => c.clone(),
                BddNode::NoOp(c) => vec![*c],
            };
            for c in next {
                if !seen.put(c) {
                    parent.insert(c, u);
                    stack.push(c);
                }
            }
        }
        Ok(None)
    }

    pub fn truth_table(&self, order: &[Var]) -> Result<TruthTable> {
        if order.len() > ORACLE_VAR_CAP {
            return Err(Error::OracleCap(order.len()));
        }
        let bits = (0..1u64 << order.len())
            .map(|i| self.eval(&Assignment::from_bits(order, i)))
            .collect::<Result<Vec<bool>>>()?;
        TruthTable::from_bits(order.to_vec(), &bits)
    }

    /// Reachable ids with children before parents, or a cycle witness.
    fn topo_or_cycle(&self) -> std::result::Result<Vec<BddId>, Vec<BddId>> {
        let n = self.nodes.len();
        let mut state = vec![0u8; n];
        let mut order = Vec::new();
        // Explicit DFS stack of (node, next child index).
        let mut stack: Vec<(BddId, usize)> = vec![(self.root, 0)];
        state[self.root] = 1;
        while let Some(&mut (u, ref mut i)) = stack.last_mut() {
            let children = self.nodes[u].children();
            if *i < children.len() {
                let c = children[*i];
                *i += 1;
                match state[c] {
                    0 => {
                        state[c] = 1;
                        stack.push((c, 0));
                    }
                    1 => {
                        let start = stack.iter().position(|&(x, _)| x == c).expect("on stack");
                        let mut cycle: Vec<BddId> = stack[start..].iter().map(|e| e.0).collect();
                        cycle.push(c);
                        return Err(cycle);
                    }
                    _ => {}
                }
            } else {
                state[u] = 2;
                order.push(u);
                stack.pop();
            }
        }
        Ok(order)
    }

    fn path_from_root(&self, target: BddId) -> Vec<BddId> {
        let mut parent: HashMap<BddId, BddId> = HashMap::new();
        let mut queue = VecDeque::from([self.root]);
        let mut seen = FixedBitSet::with_capacity(self.nodes.len());
        seen.insert(self.root);
        while let Some(u) = queue.pop_front() {
            if u == target {
                break;
            }
            for c in self.nodes[u].children() {
                if !seen.put(c) {
                    parent.insert(c, u);
                    queue.push_back(c);
                }
            }
        }
        let mut path = vec![target];
        let mut cur = target;
        while let Some(&p) = parent.get(&cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Path from `from` (exclusive) down to a decision node on `var`.
    fn path_to_var(&self, from: BddId, var: Var) -> Vec<BddId> {
        let mut parent: HashMap<BddId, BddId> = HashMap::new();
        let mut queue: VecDeque<BddId> = self.nodes[from].children().into();
        let mut seen = FixedBitSet::with_capacity(self.nodes.len());
        for &c in &queue {
            seen.insert(c);
        }
        while let Some(u) = queue.pop_front() {
            if matches!(self.nodes[u], BddNode::Decision { var: v, .. } if v == var) {
                let mut path = vec![u];
                let mut cur = u;
                while let Some(&p) = parent.get(&cur) {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return path;
            }
            for c in self.nodes[u].children() {
                if !seen.put(c) {
                    parent.insert(c, u);
                    queue.push_back(c);
                }
            }
        }
        Vec::new()
    }

    /// Acyclicity, read-once along every path, and (if `order` is given)
    /// agreement of every path with that variable order.
    pub fn check_structure(&self, order: Option<&[Var]>) -> Structure {
        let topo = match self.topo_or_cycle() {
            Ok(t) => t,
            Err(cycle) => {
                let mut path = self.path_from_root(cycle[0]);
                path.extend(&cycle[1..]);
                return Structure::Violation(PathWitness {
                    path,
                    reason: "cycle".into(),
                });
            }
        };
        let rank: Option<HashMap<Var, usize>> =
            order.map(|o| o.iter().enumerate().map(|(i, &v)| (v, i)).collect());
        let width = self.vars().last().map_or(1, |&v| v as usize + 1);
        // at[u] = variables queried on some path starting at u.
        let mut at: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(width); self.nodes.len()];
        for &u in &topo {
            let mut acc = FixedBitSet::with_capacity(width);
            for c in self.nodes[u].children() {
                acc.union_with(&at[c]);
            }
            let mut here = acc.clone();
            if let BddNode::Decision { var, .. } = self.nodes[u] {
                if acc.contains(var as usize) {
                    let mut path = self.path_from_root(u);
                    path.extend(self.path_to_var(u, var));
                    return Structure::Violation(PathWitness {
                        path,
                        reason: format!("variable {var} queried twice"),
                    });
                }
                if let Some(rank) = &rank {
                    let Some(&r) = rank.get(&var) else {
                        return Structure::Violation(PathWitness {
                            path: self.path_from_root(u),
                            reason: format!("variable {var} is not in the order"),
                        });
                    };
                    if let Some(w) = acc.ones().find(|&w| rank.get(&(w as Var)).is_none_or(|&rw| rw < r)) {
                        let mut path = self.path_from_root(u);
                        path.extend(self.path_to_var(u, w as Var));
                        return Structure::Violation(PathWitness {
                            path,
                            reason: format!("variable {w} queried after {var} against the order"),
                        });
                    }
                }
                here.insert(var as usize);
            }
            at[u] = here;
        }
        Structure::Ok
    }

    /// Model count over `n` variables by read-once path weighting.
    pub fn count_models_fbdd(&self, n: u32) -> Result<BigUint> {
        if let Some(u) = self.reachable().into_iter().find(|&u| matches!(self.nodes[u], BddNode::Or(_))) {
            return Err(Error::HasOrNode(u));
        }
        if let Structure::Violation(w) = self.check_structure(None) {
            return Err(Error::Invalid(format!("{} along {:?}", w.reason, w.path)));
        }
        if let Some(&v) = self.vars().iter().find(|&&v| v > n) {
            return Err(Error::VarMismatch(v));
        }
        let topo = self.topo_or_cycle().expect("acyclic");
        let mut count: Vec<BigUint> = vec![BigUint::ZERO; self.nodes.len()];
        for u in topo {
            count[u] = match &self.nodes[u] {
                BddNode::Sink(true) => BigUint::from(1u8) << n,
                BddNode::Sink(false) => BigUint::ZERO,
                BddNode::NoOp(c) => count[*c].clone(),
                BddNode::Decision { lo, hi, .. } => (&count[*lo] + &count[*hi]) >> 1u32,
                BddNode::Or(_) => unreachable!("rejected above"),
            };
        }
        Ok(std::mem::take(&mut count[self.root]))
    }

    /// Copy with no-op nodes bypassed (unreachable ones are kept).
    pub fn without_noops(&self) -> OrFbdd {
        let target = |mut u: BddId| {
            let mut steps = 0;
            while let BddNode::NoOp(c) = self.nodes[u] {
                u = c;
                steps += 1;
                if steps > self.nodes.len() {
                    break;
                }
            }
            u
        };
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                BddNode::Decision { var, lo, hi } => BddNode::Decision {
                    var: *var,
                    lo: target(*lo),
                    hi: target(*hi),
                },
                BddNode::Or(c) => BddNode::Or(c.iter().map(|&c| target(c)).collect()),
                other => other.clone(),
            })
            .collect();
        OrFbdd {
            nodes,
            root: target(self.root),
        }
    }

    /// Reduced OBDD of `f` under `order` (every table variable must appear).
    pub fn obdd_from_table(f: &TruthTable, order: &[Var]) -> Result<OrFbdd> {
        let n = order.len();
        let pos: HashMap<Var, usize> = f.order().iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if f.order().len() != n || order.iter().any(|v| !pos.contains_key(v)) {
            return Err(Error::Invalid("OBDD order must list exactly the table's variables".into()));
        }
        // Re-index so that order[0] is the most significant bit.
        let bits: Vec<bool> = (0..1usize << n)
            .map(|i| {
                let mut old = 0usize;
                for (j, v) in order.iter().enumerate() {
                    if i >> (n - 1 - j) & 1 == 1 {
                        old |= 1 << pos[v];
                    }
                }
                f.get(old)
            })
            .collect();
        let mut b = ObddBuilder {
            nodes: vec![BddNode::Sink(false), BddNode::Sink(true)],
            unique: HashMap::new(),
            memo: HashMap::new(),
        };
        let root = b.build(&bits, order, 0);
        OrFbdd::new(b.nodes, root)
    }

    /// One-way protocol: Alice holds `order[..split]`, follows her part of the
    /// unique path and names the first node outside it.
    pub fn to_oneway_protocol(&self, order: &[Var], split: usize) -> Result<OneWayProtocol> {
        if let Some(u) = self.reachable().into_iter().find(|&u| matches!(self.nodes[u], BddNode::Or(_))) {
            return Err(Error::HasOrNode(u));
        }
        if let Structure::Violation(w) = self.check_structure(Some(order)) {
            return Err(Error::Unordered(format!("{} along {:?}", w.reason, w.path)));
        }
        if split > order.len() {
            return Err(Error::Parameter(format!("split {split} beyond {} variables", order.len())));
        }
        let alice: BTreeSet<Var> = order[..split].iter().copied().collect();
        let is_alice = |u: BddId| match self.nodes[u] {
            BddNode::Decision { var, .. } => alice.contains(&var),
            BddNode::NoOp(_) => true,
            _ => false,
        };
        let mut frontier = BTreeSet::new();
        let mut seen = FixedBitSet::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            if seen.put(u) {
                continue;
            }
            if is_alice(u) {
                stack.extend(self.nodes[u].children());
            } else {
                frontier.insert(u);
            }
        }
        let messages: Vec<BddId> = frontier.into_iter().collect();
        let cost_bits = ceil_log2(messages.len());
        Ok(OneWayProtocol {
            diagram: self.clone(),
            alice_vars: order[..split].to_vec(),
            bob_vars: order[split..].to_vec(),
            alice,
            messages,
            cost_bits,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("orfbdd {}\n", self.nodes.len());
        for (id, node) in self.nodes.iter().enumerate() {
            let _ = match node {
                BddNode::Decision { var, lo, hi } => writeln!(out, "N {id} {var} {lo} {hi}"),
                BddNode::Or(c) => {
                    let _ = write!(out, "O {id} {}", c.len());
                    for c in c {
                        let _ = write!(out, " {c}");
                    }
                    writeln!(out)
                }
                BddNode::NoOp(c) => writeln!(out, "P {id} {c}"),
                BddNode::Sink(false) => writeln!(out, "S0 {id}"),
                BddNode::Sink(true) => writeln!(out, "S1 {id}"),
            };
        }
        let _ = writeln!(out, "root {}", self.root);
        out
    }

    /// Lines may come in any order; ids must be exactly `0..N`.
    pub fn parse(text: &str) -> Result<Self> {
        const KIND: &str = "orfbdd";
        let mut declared = None;
        let mut slots: Vec<Option<BddNode>> = Vec::new();
        let mut root = None;
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
                    .ok_or_else(|| parse_err(KIND, line, format!("bad field {i} in `{raw}`")))
            };
            let Some(n) = declared else {
                if head != KIND || t.len() != 2 {
                    return Err(parse_err(KIND, line, "expected header `orfbdd N`"));
                }
                let n = num(1)?;
                declared = Some(n);
                slots = vec![None; n];
                continue;
            };
            if root.is_some() {
                return Err(parse_err(KIND, line, "content after the root footer"));
            }
            if head == "root" {
                if t.len() != 2 {
                    return Err(parse_err(KIND, line, "expected `root id`"));
                }
                root = Some(num(1)?);
                continue;
            }
            let id = num(1)?;
            let (node, arity) = match head {
                "N" => (
                    BddNode::Decision {
                        var: num(2)? as Var,
                        lo: num(3)?,
                        hi: num(4)?,
                    },
                    5,
                ),
                "O" => {
                    let k = num(2)?;
                    (BddNode::Or((0..k).map(|i| num(3 + i)).collect::<Result<_>>()?), 3 + k)
                }
                "P" => (BddNode::NoOp(num(2)?), 3),
                "S0" => (BddNode::Sink(false), 2),
                "S1" => (BddNode::Sink(true), 2),
                _ => return Err(parse_err(KIND, line, format!("unknown line `{raw}`"))),
            };
            if t.len() != arity {
                return Err(parse_err(KIND, line, format!("wrong field count in `{raw}`")));
            }
            if id >= n {
                return Err(parse_err(KIND, line, format!("id {id} outside 0..{n}")));
            }
            if slots[id].replace(node).is_some() {
                return Err(parse_err(KIND, line, format!("duplicate id {id}")));
            }
        }
        let root = root.ok_or_else(|| parse_err(KIND, 0, "missing `root` footer"))?;
        let nodes = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| parse_err(KIND, 0, format!("node {i} missing"))))
            .collect::<Result<Vec<_>>>()?;
        OrFbdd::new(nodes, root).map_err(|e| parse_err(KIND, 0, e.to_string()))
    }
}

struct ObddBuilder<'a> {
    nodes: Vec<BddNode>,
    unique: HashMap<(Var, BddId, BddId), BddId>,
    memo: HashMap<&'a [bool], BddId>,
}

impl<'a> ObddBuilder<'a> {
    fn build(&mut self, bits: &'a [bool], order: &[Var], level: usize) -> BddId {
        if bits.iter().all(|&b| b) {
            return 1;
        }
        if bits.iter().all(|&b| !b) {
            return 0;
        }
        if let Some(&id) = self.memo.get(bits) {
            return id;
        }
        let half = bits.len() / 2;
        let lo = self.build(&bits[..half], order, level + 1);
        let hi = self.build(&bits[half..], order, level + 1);
        let id = if lo == hi {
            lo
        } else {
            let key = (order[level], lo, hi);
            match self.unique.get(&key) {
                Some(&id) => id,
                None => {
                    self.nodes.push(BddNode::Decision { var: key.0, lo, hi });
                    let id = self.nodes.len() - 1;
                    self.unique.insert(key, id);
                    id
                }
            }
        };
        self.memo.insert(bits, id);
        id
    }
}

pub(crate) fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Alice sends the id of the frontier node her variables lead to; Bob
/// finishes the path.
#[derive(Debug, Clone)]
pub struct OneWayProtocol {
    diagram: OrFbdd,
    pub alice_vars: Vec<Var>,
    pub bob_vars: Vec<Var>,
    alice: BTreeSet<Var>,
    /// Every frontier node some Alice input can reach.
    pub messages: Vec<BddId>,
    pub cost_bits: u32,
}

impl OneWayProtocol {
    pub fn alice_message(&self, a: &Assignment) -> Result<BddId> {
        let mut u = self.diagram.root;
        loop {
            match self.diagram.nodes[u] {
                BddNode::Decision { var, lo, hi } if self.alice.contains(&var) => {
                    u = if a.require(var)? { hi } else { lo };
                }
                BddNode::NoOp(c) => u = c,
                _ => return Ok(u),
            }
        }
    }

    pub fn bob_output(&self, message: BddId, b: &Assignment) -> Result<bool> {
        self.diagram.accepts_from(message, b)
    }

    pub fn run(&self, input: &Assignment) -> Result<bool> {
        let m = self.alice_message(input)?;
        self.bob_output(m, input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::NnfBuilder;

    fn and2() -> OrFbdd {
        let mut b = NnfBuilder::new(2);
        let (x, y) = (b.pos(1), b.pos(2));
        let r = b.and(vec![x, y]);
        OrFbdd::obdd_from_table(&b.finish(r).truth_table().unwrap(), &[1, 2]).unwrap()
    }

    fn assign(bits: &[(Var, bool)]) -> Assignment {
        bits.iter().copied().collect()
    }

    #[test]
    fn eval_and() {
        let d = and2();
        assert!(d.eval(&assign(&[(1, true), (2, true)])).unwrap());
        assert!(!d.eval(&assign(&[(1, true), (2, false)])).unwrap());
        assert!(matches!(d.eval(&assign(&[(1, true)])), Err(Error::Unassigned(2))));
    }

    #[test]
    fn counting() {
        assert_eq!(and2().count_models_fbdd(2).unwrap(), BigUint::from(1u8));
        let mut b = NnfBuilder::new(2);
        let (x, y) = (b.pos(1), b.pos(2));
        let r = b.or(vec![x, y]);
        let d = OrFbdd::obdd_from_table(&b.finish(r).truth_table().unwrap(), &[2, 1]).unwrap();
        assert_eq!(d.count_models_fbdd(2).unwrap(), BigUint::from(3u8));
        assert_eq!(d.count_models_fbdd(4).unwrap(), BigUint::from(12u8));
        let with_or = OrFbdd::new(
            vec![BddNode::Sink(false), BddNode::Sink(true), BddNode::Or(vec![0, 1])],
            2,
        )
        .unwrap();
        assert!(matches!(with_or.count_models_fbdd(1), Err(Error::HasOrNode(2))));
    }

    #[test]
    fn structure_checks() {
        // Decision(X, Sink0, Decision(X, ...)) queries X twice.
        let twice = OrFbdd::new(
            vec![
                BddNode::Sink(false),
                BddNode::Sink(true),
                BddNode::Decision { var: 1, lo: 0, hi: 1 },
                BddNode::Decision { var: 1, lo: 0, hi: 2 },
            ],
            3,
        )
        .unwrap();
        let Structure::Violation(w) = twice.check_structure(None) else {
            panic!("expected a violation");
        };
        assert_eq!(w.path, vec![3, 2]);

        // Diamond: X then Y on both branches.
        let diamond = OrFbdd::new(
            vec![
                BddNode::Sink(false),
                BddNode::Sink(true),
                BddNode::Decision { var: 2, lo: 0, hi: 1 },
                BddNode::Decision { var: 1, lo: 2, hi: 2 },
            ],
            3,
        )
        .unwrap();
        assert_eq!(diamond.check_structure(None), Structure::Ok);
        assert_eq!(diamond.check_structure(Some(&[1, 2])), Structure::Ok);
        assert!(matches!(diamond.check_structure(Some(&[2, 1])), Structure::Violation(_)));

        let cyclic = OrFbdd::new(vec![BddNode::NoOp(1), BddNode::NoOp(0)], 0).unwrap();
        let Structure::Violation(w) = cyclic.check_structure(None) else {
            panic!("expected a cycle");
        };
        assert_eq!(w.reason, "cycle");
    }

    #[test]
    fn protocol_and() {
        let d = and2();
        let p = d.to_oneway_protocol(&[1, 2], 1).unwrap();
        assert_eq!(p.messages.len(), 2);
        assert_eq!(p.cost_bits, 1);
        let p0 = d.to_oneway_protocol(&[1, 2], 0).unwrap();
        assert_eq!(p0.messages, vec![d.root()]);
        assert_eq!(p0.cost_bits, 0);
        for i in 0..4 {
            let a = Assignment::from_bits(&[1, 2], i);
            assert_eq!(p.run(&a).unwrap(), d.eval(&a).unwrap());
        }
        assert!(matches!(d.to_oneway_protocol(&[2, 1], 1), Err(Error::Unordered(_))));
    }

    #[test]
    fn text_roundtrip_and_permutation() {
        let d = and2();
        assert_eq!(OrFbdd::parse(&d.to_text()).unwrap(), d);
        let text = d.to_text();
        let mut lines: Vec<&str> = text.lines().collect();
        let footer = lines.pop().unwrap();
        lines[1..].reverse();
        let shuffled = format!("{}\n{footer}\n", lines.join("\n"));
        assert_eq!(OrFbdd::parse(&shuffled).unwrap(), d);
        assert!(OrFbdd::parse("orfbdd 1\nS1 0\n").is_err());
        assert!(OrFbdd::parse("orfbdd 1\nN 0 1 3 4\nroot 0\n").is_err());
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
    }
}
