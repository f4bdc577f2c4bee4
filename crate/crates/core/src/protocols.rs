//! Communication protocols and rectangle covers.
//!
//! Rows of a [`CommMatrix`] are Alice's assignments, columns Bob's; row
//! index `r` sets `row_vars[k]` to bit `k` of `r`, and likewise for columns.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::bdd::ceil_log2;
use crate::circuit::NnfCircuit;
use crate::error::{Error, Result};
use crate::literal::{Assignment, Var};
use crate::sdd::{Sdd, SddId, FALSE, TRUE};
use crate::truth_table::TruthTable;
use crate::vtree::ShellPartition;

/// Largest number of variables a matrix or protocol is enumerated over.
pub const ENUMERATION_CAP: usize = 20;

/// Largest matrix side accepted by [`unambiguous_cc_exact`].
pub const EXACT_SIDE_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommMatrix {
    row_vars: Vec<Var>,
    col_vars: Vec<Var>,
    rows: Vec<FixedBitSet>,
}

impl CommMatrix {
    /// Splits a truth table whose order is `row_vars ++ col_vars`, with the
    /// first `split` variables going to Alice.
    pub fn from_table(t: &TruthTable, split: usize) -> Result<Self> {
        let order = t.order();
        if split > order.len() {
            return Err(Error::Parameter(format!("split {split} exceeds {} variables", order.len())));
        }
        if order.len() > ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                what: "communication matrix",
                got: order.len(),
                cap: ENUMERATION_CAP,
            });
        }
        let (nr, nc) = (1usize << split, 1usize << (order.len() - split));
        let rows = (0..nr)
            .map(|r| {
                let mut row = FixedBitSet::with_capacity(nc);
                for c in 0..nc {
                    row.set(c, t.get(r | c << split));
                }
                row
            })
            .collect();
        Ok(CommMatrix {
            row_vars: order[..split].to_vec(),
            col_vars: order[split..].to_vec(),
            rows,
        })
    }

    /// Matrix of `f` under the partition `(alice, bob)` of its variables.
    pub fn of_circuit(f: &NnfCircuit, alice: &[Var], bob: &[Var]) -> Result<Self> {
        let order: Vec<Var> = alice.iter().chain(bob).copied().collect();
        let t = f.restricted_table(&Assignment::new(), &order)?;
        Self::from_table(&t, alice.len())
    }

    /// From explicit rows; both sides must be powers of two. Variables are
    /// numbered `1..=a` for rows and `a+1..=a+b` for columns.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if !nr.is_power_of_two() || !nc.is_power_of_two() || rows.iter().any(|r| r.len() != nc) {
            return Err(Error::Parameter(format!(
                "matrix must be rectangular with power-of-two sides, got {nr} rows"
            )));
        }
        let (a, b) = (nr.trailing_zeros(), nc.trailing_zeros());
        if (a + b) as usize > ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                what: "communication matrix",
                got: (a + b) as usize,
                cap: ENUMERATION_CAP,
            });
        }
        Ok(CommMatrix {
            row_vars: (1..=a).collect(),
            col_vars: (a + 1..=a + b).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|e| *e.1).map(|e| e.0).collect::<FixedBitSet>())
                .map(|mut s| {
                    s.grow(nc);
                    s
                })
                .collect(),
        })
    }

    /// Text grid of `0`/`1` cells, one row per line. A plain PBM header
    /// (`P1`, then width and height) is also accepted; `#` starts a comment.
    pub fn parse_grid(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let err = |line, msg: &str| crate::error::parse_err("matrix", line, msg);
        let cell = |ch: char, line| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(err(line, "cells must be 0 or 1")),
        };
        let rows: Vec<Vec<bool>> = if lines.first().is_some_and(|(_, l)| *l == "P1") {
            let mut tokens = lines[1..]
                .iter()
                .flat_map(|(n, l)| l.split_whitespace().map(move |t| (*n, t)));
            let mut dim = || -> Result<usize> {
                let (n, t) = tokens.next().ok_or_else(|| err(1, "missing dimensions"))?;
                t.parse().map_err(|_| err(n, "bad dimension"))
            };
            let (w, h) = (dim()?, dim()?);
            let cells: Vec<(usize, char)> = tokens.flat_map(|(n, t)| t.chars().map(move |c| (n, c))).collect();
            if cells.len() != w * h {
                return Err(err(0, "cell count does not match the header"));
            }
            cells
                .chunks(w.max(1))
                .map(|row| row.iter().map(|&(n, c)| cell(c, n)).collect())
                .collect::<Result<_>>()?
        } else {
            lines
                .iter()
                .map(|&(n, l)| l.chars().filter(|c| !c.is_whitespace()).map(|c| cell(c, n)).collect())
                .collect::<Result<_>>()?
        };
        Self::from_rows(&rows)
    }

    pub fn to_grid(&self) -> String {
        let mut out = String::new();
        for r in 0..self.num_rows() {
            out.extend((0..self.num_cols()).map(|c| if self.get(r, c) { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }

    pub fn row_vars(&self) -> &[Var] {
        &self.row_vars
    }

    pub fn col_vars(&self) -> &[Var] {
        &self.col_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        1 << self.col_vars.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].contains(c)
    }

    pub fn row(&self, r: usize) -> &FixedBitSet {
        &self.rows[r]
    }

    pub fn ones(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn transpose(&self) -> Self {
        let nc = self.num_cols();
        let rows = (0..nc)
            .map(|c| {
                let mut col = FixedBitSet::with_capacity(self.num_rows());
                for (r, row) in self.rows.iter().enumerate() {
                    col.set(r, row.contains(c));
                }
                col
            })
            .collect();
        CommMatrix {
            row_vars: self.col_vars.clone(),
            col_vars: self.row_vars.clone(),
            rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rectangle {
    pub rows: FixedBitSet,
    pub cols: FixedBitSet,
}

impl Rectangle {
    pub fn new(rows: impl IntoIterator<Item = usize>, cols: impl IntoIterator<Item = usize>) -> Self {
        Rectangle {
            rows: rows.into_iter().collect(),
            cols: cols.into_iter().collect(),
        }
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.rows.contains(r) && self.cols.contains(c)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_clear() || self.cols.is_clear()
    }

    pub fn overlaps(&self, other: &Rectangle) -> bool {
        !self.rows.is_disjoint(&other.rows) && !self.cols.is_disjoint(&other.cols)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectangleCover {
    pub rects: Vec<Rectangle>,
    pub disjoint: bool,
}

impl RectangleCover {
    /// Flags the cover disjoint iff no two rectangles overlap.
    pub fn new(rects: Vec<Rectangle>) -> Self {
        let mut cover = RectangleCover { rects, disjoint: false };
        cover.disjoint = cover.first_overlap().is_none();
        cover
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn first_overlap(&self) -> Option<(usize, usize)> {
        (0..self.rects.len())
            .flat_map(|i| (i + 1..self.rects.len()).map(move |j| (i, j)))
            .find(|&(i, j)| self.rects[i].overlaps(&self.rects[j]))
    }

    /// Monochromatic-1 rectangles covering exactly the 1s of `m`, pairwise
    /// disjoint when so flagged.
    pub fn validate(&self, m: &CommMatrix) -> Result<()> {
        for (i, rect) in self.rects.iter().enumerate() {
            for r in rect.rows.ones() {
                for c in rect.cols.ones() {
                    if r >= m.num_rows() || c >= m.num_cols() || !m.get(r, c) {
                        return Err(Error::Invalid(format!("rectangle {i} contains the 0-entry ({r},{c})")));
                    }
                }
            }
        }
        if self.disjoint {
            if let Some((i, j)) = self.first_overlap() {
                return Err(Error::OverlappingCover(i, j));
            }
        }
        for r in 0..m.num_rows() {
            for c in m.row(r).ones() {
                if !self.rects.iter().any(|rect| rect.contains(r, c)) {
                    return Err(Error::Invalid(format!("the 1-entry ({r},{c}) is not covered")));
                }
            }
        }
        Ok(())
    }
}

/// One-round unambiguous protocol read off an SDD at a shell partition:
/// Alice names a node of `Sdds(b, alpha|rho)`, Bob accepts iff it holds on
/// his input.
#[derive(Debug, Clone)]
pub struct UnambiguousProtocol {
    sdd: Sdd,
    part: ShellPartition,
    alphabet: Vec<SddId>,
    inner_tables: HashMap<SddId, TruthTable>,
}

impl UnambiguousProtocol {
    pub fn partition(&self) -> &ShellPartition {
        &self.part
    }

    /// Every message Alice can send: the union of her sets over all shell
    /// assignments (nodes at `b`, plus `true` when some restriction leaves it
    /// there). `false` is never sent.
    pub fn alphabet(&self) -> &[SddId] {
        &self.alphabet
    }

    pub fn cost_bits(&self) -> u32 {
        ceil_log2(self.alphabet.len())
    }

    pub fn cost_bound(&self) -> u32 {
        ceil_log2(self.sdd.size())
    }

    /// Alice's candidate messages on her input `rho` (an assignment of the
    /// shell).
    pub fn alice(&self, rho: &Assignment) -> Result<Vec<SddId>> {
        alice_set(&self.sdd, &self.part, rho)
    }

    pub fn bob(&self, eta: SddId, phi: &Assignment) -> Result<bool> {
        if eta == TRUE {
            return Ok(true);
        }
        let t = self
            .inner_tables
            .get(&eta)
            .ok_or_else(|| Error::Parameter(format!("{eta} is not a message of this protocol")))?;
        t.eval(phi)
    }

    /// Messages accepted end to end on `(rho, phi)`.
    pub fn accepting(&self, rho: &Assignment, phi: &Assignment) -> Result<Vec<SddId>> {
        let mut out = Vec::new();
        for eta in self.alice(rho)? {
            if self.bob(eta, phi)? {
                out.push(eta);
            }
        }
        Ok(out)
    }

    pub fn run(&self, rho: &Assignment, phi: &Assignment) -> Result<bool> {
        Ok(!self.accepting(rho, phi)?.is_empty())
    }

    /// Matrix of the compiled function, rows over the shell.
    pub fn matrix(&self) -> Result<CommMatrix> {
        let order: Vec<Var> = self.part.shell.iter().chain(&self.part.inner).copied().collect();
        let t = self.sdd.tables_of(&[self.sdd.root()], &order, &Assignment::new())?.remove(0);
        CommMatrix::from_table(&t, self.part.shell.len())
    }

    /// Runs every input and compares against the compiled function.
    pub fn verify(&self) -> Result<ProtocolCheck> {
        let m = self.matrix()?;
        let (shell, inner) = (&self.part.shell, &self.part.inner);
        let mut check = ProtocolCheck {
            correct: true,
            max_accepting: 0,
            cost_bits: self.cost_bits(),
            cost_bound: self.cost_bound(),
        };
        for r in 0..m.num_rows() {
            let alice = self.alice(&Assignment::from_bits(shell, r as u64))?;
            for c in 0..m.num_cols() {
                let phi = Assignment::from_bits(inner, c as u64);
                let mut accepted = 0;
                for &eta in &alice {
                    accepted += usize::from(self.bob(eta, &phi)?);
                }
                check.max_accepting = check.max_accepting.max(accepted);
                check.correct &= (accepted > 0) == m.get(r, c);
            }
        }
        Ok(check)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolCheck {
    /// Accepts exactly the 1-inputs.
    pub correct: bool,
    /// Most messages accepted on a single input.
    pub max_accepting: usize,
    pub cost_bits: u32,
    pub cost_bound: u32,
}

impl ProtocolCheck {
    pub fn holds(&self) -> bool {
        self.correct && self.max_accepting <= 1 && self.cost_bits <= self.cost_bound
    }
}

fn alice_set(s: &Sdd, part: &ShellPartition, rho: &Assignment) -> Result<Vec<SddId>> {
    let restricted = s.restrict(rho)?;
    Ok(restricted
        .sdds_at(part.vertex)?
        .into_iter()
        .filter(|&id| id != FALSE)
        .collect())
}

pub fn extract_unambiguous(s: &Sdd, part: &ShellPartition) -> Result<UnambiguousProtocol> {
    let expected = s.vtree().shell_partition(part.vertex)?;
    if &expected != part {
        return Err(Error::NotShell(format!(
            "partition does not match the shell of vertex {}",
            part.vertex
        )));
    }
    if part.shell.len() > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            what: "shell",
            got: part.shell.len(),
            cap: ENUMERATION_CAP,
        });
    }
    let mut alphabet = BTreeSet::new();
    for bits in 0..1u64 << part.shell.len() {
        alphabet.extend(alice_set(s, part, &Assignment::from_bits(&part.shell, bits))?);
    }
    let alphabet: Vec<SddId> = alphabet.into_iter().collect();
    let named: Vec<SddId> = alphabet.iter().copied().filter(|&id| id != TRUE).collect();
    let tables = s.tables_of(&named, &part.inner, &Assignment::new())?;
    Ok(UnambiguousProtocol {
        sdd: s.clone(),
        part: part.clone(),
        inner_tables: named.into_iter().zip(tables).collect(),
        alphabet,
    })
}

/// One rectangle per message: the rows where Alice may send it times the
/// columns where Bob accepts it. Empty rectangles are dropped.
pub fn cover_from_protocol(p: &UnambiguousProtocol) -> Result<RectangleCover> {
    let (shell, inner) = (&p.part.shell, &p.part.inner);
    if shell.len() + inner.len() > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            what: "protocol",
            got: shell.len() + inner.len(),
            cap: ENUMERATION_CAP,
        });
    }
    let index: HashMap<SddId, usize> = p.alphabet.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut rects: Vec<Rectangle> = p
        .alphabet
        .iter()
        .map(|_| Rectangle::new([], []))
        .collect();
    for r in 0..1usize << shell.len() {
        for eta in p.alice(&Assignment::from_bits(shell, r as u64))? {
            rects[index[&eta]].rows.grow_and_insert(r);
        }
    }
    for c in 0..1usize << inner.len() {
        let phi = Assignment::from_bits(inner, c as u64);
        for &eta in &p.alphabet {
            if p.bob(eta, &phi)? {
                rects[index[&eta]].cols.grow_and_insert(c);
            }
        }
    }
    rects.retain(|r| !r.is_empty());
    Ok(RectangleCover::new(rects))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sender {
    Alice,
    Bob,
}

impl fmt::Display for Sender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sender::Alice => "A",
            Sender::Bob => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub sender: Sender,
    /// Node sent, or `None` for "no such node".
    pub msg: Option<usize>,
    pub bits: u32,
    pub nodes_before: usize,
    pub nodes_left: usize,
    /// The round settled the answer.
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YannakakisRun {
    pub output: bool,
    pub rounds: Vec<Round>,
    /// Round bits plus the final answer bit.
    pub bits: u32,
}

impl YannakakisRun {
    pub fn transcript(&self) -> Vec<String> {
        self.rounds
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let msg = r.msg.map_or("none".to_string(), |v| v.to_string());
                format!(
                    "round {} sender {} msg {msg} bits {} nodes-left {}",
                    k + 1,
                    r.sender,
                    r.bits,
                    r.nodes_left
                )
            })
            .collect()
    }

    /// Every round that continues leaves at most half the nodes.
    pub fn halves(&self) -> bool {
        self.rounds
            .iter()
            .all(|r| r.terminal || 2 * r.nodes_left <= r.nodes_before)
    }
}

/// Deterministic simulation of a disjoint cover via clique versus
/// independent set on the rectangle-intersection graph.
#[derive(Debug, Clone)]
pub struct Yannakakis {
    matrix: CommMatrix,
    cover: RectangleCover,
    /// Closed neighbourhoods: rectangles sharing a row, and the node itself.
    closed: Vec<FixedBitSet>,
}

impl Yannakakis {
    pub fn new(cover: &RectangleCover, m: &CommMatrix) -> Result<Self> {
        if let Some((i, j)) = cover.first_overlap() {
            return Err(Error::OverlappingCover(i, j));
        }
        let cover = RectangleCover {
            rects: cover.rects.clone(),
            disjoint: true,
        };
        cover.validate(m)?;
        let n = cover.len();
        let closed = (0..n)
            .map(|u| {
                let mut s = FixedBitSet::with_capacity(n);
                for v in 0..n {
                    s.set(v, u == v || !cover.rects[u].rows.is_disjoint(&cover.rects[v].rows));
                }
                s
            })
            .collect();
        Ok(Yannakakis {
            matrix: m.clone(),
            cover,
            closed,
        })
    }

    /// `ceil(log2 |cover|)`.
    pub fn g(&self) -> u32 {
        ceil_log2(self.cover.len())
    }

    pub fn bit_bound(&self) -> u32 {
        (self.g() + 1).pow(2)
    }

    pub fn clique(&self, r: usize) -> FixedBitSet {
        self.members(|rect| rect.rows.contains(r))
    }

    pub fn independent_set(&self, c: usize) -> FixedBitSet {
        self.members(|rect| rect.cols.contains(c))
    }

    fn members(&self, pred: impl Fn(&Rectangle) -> bool) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.cover.len());
        for (i, rect) in self.cover.rects.iter().enumerate() {
            s.set(i, pred(rect));
        }
        s
    }

    /// `M(r,c) = 1` iff `K_r` meets `I_c`, on every entry.
    pub fn check_instance(&self) -> bool {
        (0..self.matrix.num_rows()).all(|r| {
            let k = self.clique(r);
            (0..self.matrix.num_cols()).all(|c| !k.is_disjoint(&self.independent_set(c)) == self.matrix.get(r, c))
        })
    }

    fn degree(&self, u: usize, nodes: &FixedBitSet) -> usize {
        self.closed[u].intersection(nodes).count()
    }

    pub fn run(&self, r: usize, c: usize) -> YannakakisRun {
        let k = self.clique(r);
        let i = self.independent_set(c);
        let mut nodes = FixedBitSet::with_capacity(self.cover.len());
        nodes.insert_range(..);
        let mut rounds = Vec::new();
        let mut decided = None;
        while decided.is_none() {
            let n = nodes.count_ones(..);
            if n < 2 {
                break;
            }
            let bits = ceil_log2(n + 1);
            let low = k.intersection(&nodes).find(|&u| 2 * self.degree(u, &nodes) < n);
            if let Some(u) = low {
                // K lies inside N[u]; if u is not Bob's, only N(u) can still meet I.
                if i.contains(u) {
                    decided = Some(true);
                } else {
                    nodes.intersect_with(&self.closed[u]);
                    nodes.set(u, false);
                }
                rounds.push(Round {
                    sender: Sender::Alice,
                    msg: Some(u),
                    bits,
                    nodes_before: n,
                    nodes_left: nodes.count_ones(..),
                    terminal: decided.is_some(),
                });
                continue;
            }
            let high = i.intersection(&nodes).find(|&v| 2 * self.degree(v, &nodes) >= n);
            match high {
                Some(v) => {
                    // I avoids N(v); if v is not Alice's, N[v] can be dropped.
                    if k.contains(v) {
                        decided = Some(true);
                    } else {
                        nodes.difference_with(&self.closed[v]);
                    }
                    rounds.push(Round {
                        sender: Sender::Bob,
                        msg: Some(v),
                        bits,
                        nodes_before: n,
                        nodes_left: nodes.count_ones(..),
                        terminal: decided.is_some(),
                    });
                }
                None => {
                    // Every node of K has high degree and every node of I low.
                    decided = Some(false);
                    rounds.push(Round {
                        sender: Sender::Bob,
                        msg: None,
                        bits,
                        nodes_before: n,
                        nodes_left: n,
                        terminal: true,
                    });
                }
            }
        }
        let output = decided.unwrap_or_else(|| nodes.ones().any(|w| k.contains(w) && i.contains(w)));
        let bits = rounds.iter().map(|r| r.bits).sum::<u32>() + 1;
        YannakakisRun { output, rounds, bits }
    }

    pub fn verify(&self) -> YannakakisReport {
        let mut rep = YannakakisReport {
            g: self.g(),
            bit_bound: self.bit_bound(),
            correct: true,
            halving: true,
            max_bits: 0,
            max_rounds: 0,
        };
        for r in 0..self.matrix.num_rows() {
            for c in 0..self.matrix.num_cols() {
                let run = self.run(r, c);
                rep.correct &= run.output == self.matrix.get(r, c);
                rep.halving &= run.halves();
                rep.max_bits = rep.max_bits.max(run.bits);
                rep.max_rounds = rep.max_rounds.max(run.rounds.len());
            }
        }
        rep
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YannakakisReport {
    pub g: u32,
    pub bit_bound: u32,
    pub correct: bool,
    pub halving: bool,
    pub max_bits: u32,
    pub max_rounds: usize,
}

impl YannakakisReport {
    pub fn holds(&self) -> bool {
        self.correct && self.halving && self.max_bits <= self.bit_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactCc {
    /// Fewest disjoint monochromatic-1 rectangles partitioning the 1s.
    pub rectangles: u32,
    pub cc: u32,
}

/// Exhaustive memoized search for a minimum 1-rectangle partition.
pub fn unambiguous_cc_exact(m: &CommMatrix) -> Result<ExactCc> {
    let (nr, nc) = (m.num_rows(), m.num_cols());
    if nr > EXACT_SIDE_CAP || nc > EXACT_SIDE_CAP {
        return Err(Error::EnumerationCap {
            what: "matrix side",
            got: nr.max(nc),
            cap: EXACT_SIDE_CAP,
        });
    }
    let mut mask = 0u64;
    for r in 0..nr {
        for c in m.row(r).ones() {
            mask |= 1 << (r * nc + c);
        }
    }
    let mut memo = HashMap::new();
    let rectangles = min_partition(mask, nr, nc, &mut memo);
    Ok(ExactCc {
        rectangles,
        cc: ceil_log2(rectangles as usize),
    })
}

fn min_partition(mask: u64, nr: usize, nc: usize, memo: &mut HashMap<u64, u32>) -> u32 {
    if mask == 0 {
        return 0;
    }
    if let Some(&v) = memo.get(&mask) {
        return v;
    }
    let full = (1u64 << nc) - 1;
    let row_bits = |r: usize| (mask >> (r * nc)) & full;
    let cell = mask.trailing_zeros() as usize;
    let (r, c) = (cell / nc, cell % nc);
    let others = row_bits(r) & !(1 << c);
    let mut best = u32::MAX;
    // Column sets through c inside row r, then any compatible rows below.
    let mut sub = others;
    loop {
        let cols = sub | 1 << c;
        let eligible: Vec<usize> = (r + 1..nr).filter(|&q| row_bits(q) & cols == cols).collect();
        for pick in 0..1u32 << eligible.len() {
            let mut rect = cols << (r * nc);
            for (k, &q) in eligible.iter().enumerate() {
                if pick >> k & 1 == 1 {
                    rect |= cols << (q * nc);
                }
            }
            best = best.min(1 + min_partition(mask & !rect, nr, nc, memo));
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & others;
    }
    memo.insert(mask, best);
    best
}

/// Greedy fooling set for the 1s: any two members `(r1,c1)`, `(r2,c2)` have
/// `M(r1,c2) = 0` or `M(r2,c1) = 0`, so no 1-rectangle holds two of them.
pub fn fooling_set(m: &CommMatrix) -> Vec<(usize, usize)> {
    let mut set: Vec<(usize, usize)> = Vec::new();
    for r in 0..m.num_rows() {
        for c in m.row(r).ones() {
            if set.iter().all(|&(r2, c2)| !m.get(r, c2) || !m.get(r2, c)) {
                set.push((r, c));
            }
        }
    }
    set
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionReport {
    pub alice: Vec<Var>,
    pub bob: Vec<Var>,
    /// Present when the matrix fits [`EXACT_SIDE_CAP`].
    pub exact_cc: Option<u32>,
    /// `ceil(log2 |fooling set|)`.
    pub fooling_lb: u32,
    /// Send-everything protocol: `min(|A|,|B|) + 1`.
    pub trivial_ub: u32,
}

impl PartitionReport {
    pub fn lower(&self) -> u32 {
        self.exact_cc.unwrap_or(self.fooling_lb)
    }

    pub fn upper(&self) -> u32 {
        self.exact_cc.unwrap_or(self.trivial_ub)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionScan {
    pub partitions: Vec<PartitionReport>,
    /// Bracket on the best-partition unambiguous complexity.
    pub min_lower: u32,
    pub min_upper: u32,
}

/// Largest circuit scanned over all partitions.
pub const SCAN_VAR_CAP: usize = 12;

/// Every `(delta, 1 - delta)`-partition of `1..=var_count`, with `delta`
/// given as `num/den`. Variable 1 is kept on Alice's side; the quantities
/// reported are symmetric under swapping the players.
pub fn best_partition_scan(f: &NnfCircuit, num: u32, den: u32) -> Result<PartitionScan> {
    if num == 0 || den == 0 || 2 * num > den {
        return Err(Error::Parameter(format!("delta = {num}/{den} is not in (0, 1/2]")));
    }
    let n = f.var_count() as usize;
    if n > SCAN_VAR_CAP {
        return Err(Error::EnumerationCap {
            what: "partition scan",
            got: n,
            cap: SCAN_VAR_CAP,
        });
    }
    let vars: Vec<Var> = (1..=n as Var).collect();
    let mut partitions = Vec::new();
    if n >= 2 {
        for bits in 0..1u64 << (n - 1) {
            let in_a = |k: usize| k == 0 || bits >> (k - 1) & 1 == 1;
            let alice: Vec<Var> = (0..n).filter(|&k| in_a(k)).map(|k| vars[k]).collect();
            let bob: Vec<Var> = (0..n).filter(|&k| !in_a(k)).map(|k| vars[k]).collect();
            let small = alice.len().min(bob.len());
            if (small as u64) * (den as u64) < (num as u64) * (n as u64) {
                continue;
            }
            let m = CommMatrix::of_circuit(f, &alice, &bob)?;
            let exact_cc = match unambiguous_cc_exact(&m) {
                Ok(e) => Some(e.cc),
                Err(Error::EnumerationCap { .. }) => None,
                Err(e) => return Err(e),
            };
            partitions.push(PartitionReport {
                fooling_lb: ceil_log2(fooling_set(&m).len()),
                trivial_ub: small as u32 + 1,
                exact_cc,
                alice,
                bob,
            });
        }
    }
    if partitions.is_empty() {
        return Err(Error::Parameter(format!(
            "no partition of {n} variables has both sides at least {num}/{den} of them"
        )));
    }
    Ok(PartitionScan {
        min_lower: partitions.iter().map(PartitionReport::lower).min().expect("nonempty"),
        min_upper: partitions.iter().map(PartitionReport::upper).min().expect("nonempty"),
        partitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::NnfBuilder;
    use crate::sdd::compile;
    use crate::vtree::{Vtree, VtreeShape};

    fn identity(n: usize) -> CommMatrix {
        let rows: Vec<Vec<bool>> = (0..n).map(|r| (0..n).map(|c| r == c).collect()).collect();
        CommMatrix::from_rows(&rows).unwrap()
    }

    fn diagonal_cover(n: usize) -> RectangleCover {
        RectangleCover::new((0..n).map(|i| Rectangle::new([i], [i])).collect())
    }

    #[test]
    fn grid_roundtrip() {
        let m = CommMatrix::parse_grid("# eq\n10\n01\n").unwrap();
        assert_eq!(m, identity(2));
        assert_eq!(CommMatrix::parse_grid(&m.to_grid()).unwrap(), m);
        let pbm = CommMatrix::parse_grid("P1\n2 2\n1 0\n0 1\n").unwrap();
        assert_eq!(pbm, m);
        assert!(CommMatrix::parse_grid("101\n010\n").is_err());
        assert!(CommMatrix::parse_grid("12\n01\n").is_err());
        assert_eq!(m.transpose().to_grid(), m.to_grid());
        assert_eq!(m.transpose().row_vars(), m.col_vars());
    }

    #[test]
    fn identity_cover_validates() {
        let m = identity(2);
        let cover = diagonal_cover(2);
        assert!(cover.disjoint);
        cover.validate(&m).unwrap();
        let bad = RectangleCover::new(vec![Rectangle::new([0, 1], [0, 1])]);
        assert!(bad.validate(&m).is_err());
    }

    #[test]
    fn exact_cc_examples() {
        assert_eq!(unambiguous_cc_exact(&identity(2)).unwrap(), ExactCc { rectangles: 2, cc: 1 });
        let ones = CommMatrix::from_rows(&vec![vec![true; 4]; 4]).unwrap();
        assert_eq!(unambiguous_cc_exact(&ones).unwrap(), ExactCc { rectangles: 1, cc: 0 });
        // Intersection of 2-bit sets: 1 iff x and y share an element.
        let inter: Vec<Vec<bool>> = (0..4).map(|x| (0..4).map(|y| x & y != 0).collect()).collect();
        let e = unambiguous_cc_exact(&CommMatrix::from_rows(&inter).unwrap()).unwrap();
        assert_eq!(e.rectangles, 3);
        assert!(e.rectangles >= 2);
        assert!(unambiguous_cc_exact(&identity(16)).is_err());
    }

    #[test]
    fn fooling_set_is_valid() {
        let m = identity(8);
        assert_eq!(fooling_set(&m).len(), 8);
        let ones = CommMatrix::from_rows(&vec![vec![true; 4]; 4]).unwrap();
        assert_eq!(fooling_set(&ones).len(), 1);
    }

    #[test]
    fn yannakakis_on_equality() {
        let m = identity(4);
        let y = Yannakakis::new(&diagonal_cover(4), &m).unwrap();
        assert!(y.check_instance());
        let rep = y.verify();
        assert_eq!(rep.g, 2);
        assert!(rep.holds(), "{rep:?}");
        assert!(rep.max_bits <= 9);
        let run = y.run(1, 1);
        assert!(run.output);
        assert!(run.transcript().iter().all(|l| l.starts_with("round ")));
    }

    #[test]
    fn yannakakis_single_rectangle() {
        let ones = CommMatrix::from_rows(&vec![vec![true; 2]; 2]).unwrap();
        let cover = RectangleCover::new(vec![Rectangle::new([0, 1], [0, 1])]);
        let y = Yannakakis::new(&cover, &ones).unwrap();
        let rep = y.verify();
        assert_eq!((rep.g, rep.max_bits, rep.max_rounds), (0, 1, 0));
        assert!(rep.holds());
    }

    #[test]
    fn yannakakis_rejects_overlap() {
        let ones = CommMatrix::from_rows(&vec![vec![true; 2]; 2]).unwrap();
        let cover = RectangleCover::new(vec![Rectangle::new([0, 1], [0]), Rectangle::new([0], [0, 1])]);
        assert!(matches!(Yannakakis::new(&cover, &ones), Err(Error::OverlappingCover(0, 1))));
    }

    fn h0_m1() -> (NnfCircuit, Sdd) {
        let mut b = NnfBuilder::new(3);
        let lits: Vec<_> = (1..=3).map(|v| b.pos(v)).collect();
        let r = b.and(lits);
        let c = b.finish(r);
        let vt = Vtree::build(&[1, 2, 3], VtreeShape::Balanced).unwrap();
        let s = compile(&c, &vt).unwrap();
        (c, s)
    }

    #[test]
    fn protocol_from_h0() {
        let (_, s) = h0_m1();
        let b = s.vtree().find_balanced_vertex().unwrap();
        let part = s.vtree().shell_partition(b).unwrap();
        let p = extract_unambiguous(&s, &part).unwrap();
        let check = p.verify().unwrap();
        assert!(check.holds(), "{check:?}");
        let cover = cover_from_protocol(&p).unwrap();
        let m = p.matrix().unwrap();
        assert!(cover.disjoint);
        cover.validate(&m).unwrap();
        let rep = Yannakakis::new(&cover, &m).unwrap().verify();
        assert!(rep.holds());
        assert!(rep.max_bits <= (ceil_log2(s.size()) + 1).pow(2));
    }

    #[test]
    fn protocol_true_terminal() {
        let mut b = NnfBuilder::new(2);
        let t = b.constant(true);
        let c = b.finish(t);
        let vt = Vtree::build(&[1, 2], VtreeShape::Balanced).unwrap();
        let s = compile(&c, &vt).unwrap();
        let b = vt.find_balanced_vertex().unwrap();
        let p = extract_unambiguous(&s, &vt.shell_partition(b).unwrap()).unwrap();
        assert_eq!(p.alphabet(), &[TRUE]);
        assert_eq!(p.cost_bits(), 0);
        assert!(p.verify().unwrap().holds());
    }

    #[test]
    fn protocol_rejects_non_shell() {
        let (_, s) = h0_m1();
        let mut part = s.vtree().shell_partition(s.vtree().root()).unwrap();
        part.shell.push(1);
        assert!(matches!(extract_unambiguous(&s, &part), Err(Error::NotShell(_))));
    }

    #[test]
    fn partition_scan() {
        let mut b = NnfBuilder::new(1);
        let x = b.pos(1);
        assert!(best_partition_scan(&b.finish(x), 1, 2).is_err());

        // Disjointness-style intersection on 2 + 2 bits.
        let mut b = NnfBuilder::new(4);
        let terms: Vec<_> = (1..=2)
            .map(|i| {
                let (x, y) = (b.pos(i), b.pos(i + 2));
                b.and(vec![x, y])
            })
            .collect();
        let r = b.or(terms);
        let f = b.finish(r);
        let scan = best_partition_scan(&f, 1, 2).unwrap();
        let natural = scan.partitions.iter().find(|p| p.alice == vec![1, 2]).unwrap();
        assert_eq!(natural.trivial_ub, 3);
        assert!(natural.exact_cc.is_some());
        assert!(scan.min_lower <= scan.min_upper);
    }
}
