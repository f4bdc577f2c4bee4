//! Seeded random instances for property tests and experiments.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::circuit::{NnfBuilder, NnfCircuit, NnfNode, NodeId};
use crate::error::{Error, Result};
use crate::families::GridPartition;
use crate::literal::{Assignment, Lit, Var};
use crate::protocols::{CommMatrix, Rectangle, RectangleCover};

/// Random NNF over `vars` variables with roughly `gates` gates. Literals
/// can repeat under an AND, so the result is in general not decomposable.
pub fn random_formula<R: Rng>(rng: &mut R, vars: u32, gates: usize) -> NnfCircuit {
    let mut b = NnfBuilder::new(vars);
    let mut pool: Vec<NodeId> = (1..=vars)
        .map(|v| b.lit(Lit { var: v, positive: rng.random() }))
        .collect();
    for _ in 0..gates {
        let k = rng.random_range(2..=3usize).min(pool.len());
        let children: Vec<NodeId> = pool.choose_multiple(rng, k).copied().collect();
        let g = if rng.random_bool(0.5) { b.and(children) } else { b.or(children) };
        pool.push(g);
        if rng.random_bool(0.15) {
            let v = rng.random_range(1..=vars);
            pool.push(b.lit(Lit { var: v, positive: rng.random() }));
        }
    }
    let root = *pool.last().expect("at least one variable");
    b.finish(root)
}

/// Random decomposable NNF with binary ANDs over at most `vars` variables
/// and at most `max_nodes` reachable nodes. Nodes are shared.
pub fn random_dnnf<R: Rng>(rng: &mut R, vars: u32, max_nodes: usize) -> NnfCircuit {
    assert!(vars >= 1 && max_nodes >= 1);
    let mut pool: Vec<(NnfNode, BTreeSet<Var>)> = Vec::new();
    let leaves = rng.random_range(2..=(max_nodes / 2).clamp(2, 2 * vars as usize));
    for _ in 0..leaves {
        if rng.random_bool(0.05) {
            pool.push((NnfNode::Const(rng.random()), BTreeSet::new()));
        } else {
            let v = rng.random_range(1..=vars);
            pool.push((NnfNode::Lit(Lit { var: v, positive: rng.random() }), [v].into()));
        }
    }
    while pool.len() < max_nodes {
        let n = pool.len();
        // Favour recent nodes so the DAG grows deep rather than wide.
        let pick = |rng: &mut R| n - 1 - rng.random_range(0..n).min(rng.random_range(0..n));
        if rng.random_bool(0.5) {
            let a = pick(rng);
            let found = (0..8)
                .map(|_| pick(rng))
                .find(|&c| c != a && pool[a].1.is_disjoint(&pool[c].1));
            if let Some(c) = found {
                let s = pool[a].1.union(&pool[c].1).copied().collect();
                pool.push((NnfNode::And(vec![a, c]), s));
                continue;
            }
        }
        let k = rng.random_range(2..=3usize).min(n);
        let mut children: Vec<NodeId> = (0..k).map(|_| pick(rng)).collect();
        children.sort_unstable();
        children.dedup();
        let s = children.iter().flat_map(|&c| pool[c].1.iter().copied()).collect();
        pool.push((NnfNode::Or(children), s));
    }
    let root = pool.len() - 1;
    let nodes = pool.into_iter().map(|(n, _)| n).collect();
    NnfCircuit::new(nodes, root, vars)
        .expect("children precede parents")
        .compact()
}

/// Assigns each of `vars` independently with probability `p`.
pub fn random_partial_assignment<R: Rng>(rng: &mut R, vars: &[Var], p: f64) -> Assignment {
    let mut a = Assignment::new();
    for &v in vars {
        if rng.random_bool(p) {
            a.set(v, rng.random());
        }
    }
    a
}

/// Total assignment of `vars`.
pub fn random_assignment<R: Rng>(rng: &mut R, vars: &[Var]) -> Assignment {
    let mut a = Assignment::new();
    for &v in vars {
        a.set(v, rng.random());
    }
    a
}

/// Grid partition with both sides holding at least `ceil(delta m^2)` cells,
/// `delta = num/den`. Fails when no split is that even (odd `m` at 1/2).
pub fn random_grid_partition<R: Rng>(rng: &mut R, m: u32, num: u64, den: u64) -> Result<GridPartition> {
    let cells = (m * m) as usize;
    let least = (num * cells as u64).div_ceil(den) as usize;
    if den == 0 || 2 * least > cells {
        return Err(Error::Parameter(format!("no {m}x{m} split gives both sides {num}/{den} of the cells")));
    }
    let size = rng.random_range(least..=cells - least);
    let mut order: Vec<usize> = (0..cells).collect();
    order.shuffle(rng);
    let mut alice = vec![false; cells];
    for &c in &order[..size] {
        alice[c] = true;
    }
    GridPartition::new(m, alice)
}

/// Alice's half of a random `(1/3, 2/3)`-partition of `1..=n`.
pub fn random_third_partition<R: Rng>(rng: &mut R, n: u32) -> BTreeSet<Var> {
    let least = (n as usize).div_ceil(3);
    let size = rng.random_range(least..=n as usize - least);
    let mut vars: Vec<Var> = (1..=n).collect();
    vars.shuffle(rng);
    vars[..size].iter().copied().collect()
}

/// Matrix with a planted disjoint 1-cover of at most `2^g` rectangles.
/// Sides are powers of two up to 8.
pub fn random_disjoint_cover<R: Rng>(rng: &mut R, g: u32) -> (CommMatrix, RectangleCover) {
    let (nr, nc) = (1usize << rng.random_range(1..=3), 1usize << rng.random_range(1..=3));
    let want = rng.random_range(1..=1usize << g);
    let mut taken = vec![vec![false; nc]; nr];
    let mut rects = Vec::new();
    for _ in 0..64 {
        if rects.len() == want {
            break;
        }
        let rows: Vec<usize> = (0..nr).filter(|_| rng.random_bool(0.35)).collect();
        let cols: Vec<usize> = (0..nc).filter(|_| rng.random_bool(0.35)).collect();
        if rows.is_empty() || cols.is_empty() || rows.iter().any(|&r| cols.iter().any(|&c| taken[r][c])) {
            continue;
        }
        for &r in &rows {
            for &c in &cols {
                taken[r][c] = true;
            }
        }
        rects.push(Rectangle::new(rows, cols));
    }
    let m = CommMatrix::from_rows(&taken).expect("power-of-two sides");
    (m, RectangleCover::new(rects))
}
