//! Hard function families and the grid reductions used to bound them.
//!
//! Variable numbering over `[m] x [m]` (1-based `i`, `j`):
//! `R_i = i`, `S_ij = m + (i-1)m + j`, `T_j = m + m^2 + j`. For `H_kl` the
//! blocks are `R`, then `S^1 ... S^k` (each row-major), then `T`.
//! `PERM_n` and `ROW-COL_n` use `M_ij = (i-1)n + j`; disjointness uses
//! `x_i = i`, `y_i = n + i`; shifted equality adds `z_k = 2n + k`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::circuit::{NnfBuilder, NnfCircuit};
use crate::error::{Error, Result};
use crate::literal::{Assignment, Var};
use crate::truth_table::TruthTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    H0 { m: u32 },
    Qv { m: u32 },
    H1 { m: u32 },
    /// `H_kl` for `0 <= l <= k`.
    Hk { k: u32, l: u32, m: u32 },
    Perm { n: u32 },
    RowCol { n: u32 },
    Disjointness { n: u32 },
    ShiftedEq { n: u32 },
}

/// Largest `n` for which the permutation DNF (with `n!` terms) is built.
pub const PERM_CAP: u32 = 7;

impl Family {
    /// Parses a family name with its size parameter; `hk` also takes `k`
    /// and `level`.
    pub fn from_name(name: &str, param: u32, k: Option<u32>, level: Option<u32>) -> Result<Self> {
        let fam = match name {
            "h0" => Family::H0 { m: param },
            "qv" => Family::Qv { m: param },
            "h1" => Family::H1 { m: param },
            "hk" => Family::Hk {
                k: k.ok_or_else(|| Error::Parameter("hk needs k".into()))?,
                l: level.ok_or_else(|| Error::Parameter("hk needs a level".into()))?,
                m: param,
            },
            "perm" => Family::Perm { n: param },
            "rowcol" => Family::RowCol { n: param },
            "disjointness" => Family::Disjointness { n: param },
            "shifted_eq" => Family::ShiftedEq { n: param },
            other => return Err(Error::Parameter(format!("unknown family `{other}`"))),
        };
        fam.check()?;
        Ok(fam)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::H0 { .. } => "h0",
            Family::Qv { .. } => "qv",
            Family::H1 { .. } => "h1",
            Family::Hk { .. } => "hk",
            Family::Perm { .. } => "perm",
            Family::RowCol { .. } => "rowcol",
            Family::Disjointness { .. } => "disjointness",
            Family::ShiftedEq { .. } => "shifted_eq",
        }
    }

    /// The size parameter (`m` or `n`).
    pub fn param(&self) -> u32 {
        match *self {
            Family::H0 { m } | Family::Qv { m } | Family::H1 { m } | Family::Hk { m, .. } => m,
            Family::Perm { n } | Family::RowCol { n } | Family::Disjointness { n } | Family::ShiftedEq { n } => n,
        }
    }

    pub fn with_param(&self, p: u32) -> Self {
        match *self {
            Family::H0 { .. } => Family::H0 { m: p },
            Family::Qv { .. } => Family::Qv { m: p },
            Family::H1 { .. } => Family::H1 { m: p },
            Family::Hk { k, l, .. } => Family::Hk { k, l, m: p },
            Family::Perm { .. } => Family::Perm { n: p },
            Family::RowCol { .. } => Family::RowCol { n: p },
            Family::Disjointness { .. } => Family::Disjointness { n: p },
            Family::ShiftedEq { .. } => Family::ShiftedEq { n: p },
        }
    }

    fn check(&self) -> Result<()> {
        if self.param() == 0 {
            return Err(Error::Parameter(format!("{} needs a size parameter >= 1", self.name())));
        }
        match *self {
            Family::Hk { k, l, .. } if k == 0 || l > k => {
                Err(Error::Parameter(format!("hk needs k >= 1 and 0 <= level <= k, got k={k}, level={l}")))
            }
            Family::Perm { n } if n > PERM_CAP => Err(Error::Parameter(format!("perm is capped at n = {PERM_CAP}"))),
            _ => Ok(()),
        }
    }

    pub fn var_count(&self) -> u32 {
        match *self {
            Family::H0 { m } | Family::Qv { m } | Family::H1 { m } => m * m + 2 * m,
            Family::Hk { k, m, .. } => k * m * m + 2 * m,
            Family::Perm { n } | Family::RowCol { n } => n * n,
            Family::Disjointness { n } => 2 * n,
            Family::ShiftedEq { n } => 2 * n + shift_bits(n),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Hk { k, l, m } => write!(f, "hk(k={k},l={l},m={m})"),
            other => write!(f, "{}({})", other.name(), other.param()),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// `name:param`, or `hk:k:level:m`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<u32>().map_err(|_| Error::Parameter(format!("bad number `{t}`")));
        match parts.as_slice() {
            ["hk", k, l, m] => Family::from_name("hk", num(m)?, Some(num(k)?), Some(num(l)?)),
            [name, p] => Family::from_name(name, num(p)?, None, None),
            _ => Err(Error::Parameter(format!("cannot parse family `{s}`"))),
        }
    }
}

fn shift_bits(n: u32) -> u32 {
    crate::bdd::ceil_log2(n as usize)
}

/// Numbering over the `[m] x [m]` grid, with `k` S-blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub m: u32,
    pub k: u32,
}

impl Grid {
    pub fn r(&self, i: u32) -> Var {
        i
    }

    /// `S_ij` (first block).
    pub fn s(&self, i: u32, j: u32) -> Var {
        self.s_level(1, i, j)
    }

    pub fn s_level(&self, level: u32, i: u32, j: u32) -> Var {
        self.m + (level - 1) * self.m * self.m + (i - 1) * self.m + j
    }

    pub fn t(&self, j: u32) -> Var {
        self.m + self.k * self.m * self.m + j
    }

    /// The cell of an `S_ij` variable of the first block.
    pub fn cell_of(&self, v: Var) -> Option<(u32, u32)> {
        let base = self.m;
        (v > base && v <= base + self.m * self.m).then(|| {
            let off = v - base - 1;
            (off / self.m + 1, off % self.m + 1)
        })
    }
}

#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub family: Family,
    pub circuit: NnfCircuit,
    /// `(name, var)`, e.g. `("S[1,2]", 4)`, sorted by variable.
    pub names: Vec<(String, Var)>,
}

impl FamilyInstance {
    pub fn grid(&self) -> Option<Grid> {
        match self.family {
            Family::H0 { m } | Family::Qv { m } | Family::H1 { m } => Some(Grid { m, k: 1 }),
            Family::Hk { k, m, .. } => Some(Grid { m, k }),
            _ => None,
        }
    }

    /// Sidecar text: one `name index` line per variable.
    pub fn vars_text(&self) -> String {
        self.names.iter().map(|(n, v)| format!("{n} {v}\n")).collect()
    }
}

fn grid_names(g: Grid) -> Vec<(String, Var)> {
    let mut names = Vec::new();
    for i in 1..=g.m {
        names.push((format!("R[{i}]"), g.r(i)));
    }
    for level in 1..=g.k {
        let prefix = if g.k == 1 { "S".to_string() } else { format!("S{level}") };
        for i in 1..=g.m {
            for j in 1..=g.m {
                names.push((format!("{prefix}[{i},{j}]"), g.s_level(level, i, j)));
            }
        }
    }
    for j in 1..=g.m {
        names.push((format!("T[{j}]"), g.t(j)));
    }
    names
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Builds the defining formula of `family`.
pub fn gen(family: Family) -> Result<FamilyInstance> {
    family.check()?;
    let mut b = NnfBuilder::new(family.var_count());
    let (root, names) = match family {
        Family::H0 { m } | Family::Qv { m } | Family::H1 { m } => {
            let g = Grid { m, k: 1 };
            let mut terms = Vec::new();
            for i in 1..=m {
                for j in 1..=m {
                    let (r, s, t) = (b.pos(g.r(i)), b.pos(g.s(i, j)), b.pos(g.t(j)));
                    match family {
                        Family::H0 { .. } => terms.push(b.and(vec![r, s, t])),
                        _ => {
                            terms.push(b.and(vec![r, s]));
                            terms.push(b.and(vec![s, t]));
                            if matches!(family, Family::Qv { .. }) {
                                terms.push(b.and(vec![r, t]));
                            }
                        }
                    }
                }
            }
            (b.or(terms), grid_names(g))
        }
        Family::Hk { k, l, m } => {
            let g = Grid { m, k };
            let mut terms = Vec::new();
            for i in 1..=m {
                for j in 1..=m {
                    let (x, y) = if l == 0 {
                        (g.r(i), g.s_level(1, i, j))
                    } else if l == k {
                        (g.s_level(k, i, j), g.t(j))
                    } else {
                        (g.s_level(l, i, j), g.s_level(l + 1, i, j))
                    };
                    let (x, y) = (b.pos(x), b.pos(y));
                    terms.push(b.and(vec![x, y]));
                }
            }
            (b.or(terms), grid_names(g))
        }
        Family::Perm { n } => {
            let cell = |i: usize, j: usize| (i * n as usize + j + 1) as Var;
            let mut terms = Vec::new();
            for p in permutations(n as usize) {
                let mut lits = Vec::new();
                for i in 0..n as usize {
                    for j in 0..n as usize {
                        lits.push(if p[i] == j { b.pos(cell(i, j)) } else { b.neg(cell(i, j)) });
                    }
                }
                terms.push(b.and(lits));
            }
            (b.or(terms), matrix_names(n))
        }
        Family::RowCol { n } => {
            let cell = |i: u32, j: u32| (i - 1) * n + j;
            let mut terms = Vec::new();
            for i in 1..=n {
                let lits = (1..=n).map(|j| b.neg(cell(i, j))).collect();
                terms.push(b.and(lits));
            }
            for j in 1..=n {
                let lits = (1..=n).map(|i| b.neg(cell(i, j))).collect();
                terms.push(b.and(lits));
            }
            (b.or(terms), matrix_names(n))
        }
        Family::Disjointness { n } => {
            let terms = (1..=n)
                .map(|i| {
                    let (x, y) = (b.pos(i), b.pos(n + i));
                    b.and(vec![x, y])
                })
                .collect();
            let mut names: Vec<(String, Var)> = (1..=n).map(|i| (format!("x[{i}]"), i)).collect();
            names.extend((1..=n).map(|i| (format!("y[{i}]"), n + i)));
            (b.or(terms), names)
        }
        Family::ShiftedEq { n } => {
            let zb = shift_bits(n);
            let mut terms = Vec::new();
            for shift in 0..1u32 << zb {
                let mut lits: Vec<usize> = (0..zb)
                    .map(|k| {
                        let z = 2 * n + k + 1;
                        if shift >> k & 1 == 1 { b.pos(z) } else { b.neg(z) }
                    })
                    .collect();
                for i in 0..n {
                    let (x, y) = ((i + shift) % n + 1, n + i + 1);
                    let (px, py, nx, ny) = (b.pos(x), b.pos(y), b.neg(x), b.neg(y));
                    let both = b.and(vec![px, py]);
                    let neither = b.and(vec![nx, ny]);
                    lits.push(b.or(vec![both, neither]));
                }
                terms.push(b.and(lits));
            }
            let mut names: Vec<(String, Var)> = (1..=n).map(|i| (format!("x[{i}]"), i)).collect();
            names.extend((1..=n).map(|i| (format!("y[{i}]"), n + i)));
            names.extend((1..=zb).map(|k| (format!("z[{k}]"), 2 * n + k)));
            (b.or(terms), names)
        }
    };
    Ok(FamilyInstance {
        family,
        circuit: b.finish(root),
        names,
    })
}

fn matrix_names(n: u32) -> Vec<(String, Var)> {
    (1..=n)
        .flat_map(|i| (1..=n).map(move |j| (format!("M[{i},{j}]"), (i - 1) * n + j)))
        .collect()
}

/// Assignment of the cells of `[m] x [m]` to Alice (`true`) or Bob.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPartition {
    pub m: u32,
    /// Row-major, `alice[(i-1)m + (j-1)]`.
    pub alice: Vec<bool>,
}

impl GridPartition {
    pub fn new(m: u32, alice: Vec<bool>) -> Result<Self> {
        if alice.len() != (m * m) as usize {
            return Err(Error::Parameter(format!("expected {} cells, got {}", m * m, alice.len())));
        }
        Ok(GridPartition { m, alice })
    }

    pub fn from_fn(m: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let alice = (1..=m).flat_map(|i| (1..=m).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        GridPartition { m, alice }
    }

    /// The split of the `S_ij` cells induced by a variable partition.
    pub fn induced(g: Grid, alice_vars: &BTreeSet<Var>) -> Self {
        Self::from_fn(g.m, |i, j| alice_vars.contains(&g.s(i, j)))
    }

    pub fn is_alice(&self, i: u32, j: u32) -> bool {
        self.alice[((i - 1) * self.m + (j - 1)) as usize]
    }

    pub fn alice_cells(&self) -> usize {
        self.alice.iter().filter(|&&a| a).count()
    }

    pub fn bob_cells(&self) -> usize {
        self.alice.len() - self.alice_cells()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WSets {
    pub w_row: BTreeSet<u32>,
    pub w_col: BTreeSet<u32>,
    /// `max(|W_Row|, |W_Col|) >= sqrt(delta) m`, or `None` when some side has
    /// fewer than `delta m^2` cells.
    pub bound_check: Option<bool>,
}

/// Split rows and columns; `delta = num/den`. The bound is checked in exact
/// integer arithmetic as `max^2 * den >= num * m^2`.
pub fn w_sets(p: &GridPartition, num: u64, den: u64) -> WSets {
    let m = p.m;
    let split = |cells: &dyn Fn(u32) -> Vec<bool>| {
        (1..=m)
            .filter(|&x| {
                let v = cells(x);
                v.iter().any(|&a| a) && v.iter().any(|&a| !a)
            })
            .collect::<BTreeSet<u32>>()
    };
    let w_row = split(&|i| (1..=m).map(|j| p.is_alice(i, j)).collect());
    let w_col = split(&|j| (1..=m).map(|i| p.is_alice(i, j)).collect());
    let m2 = u64::from(m) * u64::from(m);
    let sides_ok = den > 0
        && (p.alice_cells() as u64) * den >= num * m2
        && (p.bob_cells() as u64) * den >= num * m2;
    let big = w_row.len().max(w_col.len()) as u64;
    WSets {
        bound_check: sides_ok.then(|| big * big * den >= num * m2),
        w_row,
        w_col,
    }
}

/// One disjointness coordinate: `unary` is `R_i` (or `T_j` when
/// transposed), `binary` the chosen `S` cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionPair {
    pub index: u32,
    pub unary: Var,
    pub binary: Var,
    pub unary_to_alice: bool,
    pub binary_to_alice: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub rho: Assignment,
    /// Columns were used because `|W_Row| < |W_Col|`.
    pub transposed: bool,
    pub pairs: Vec<ReductionPair>,
}

impl Reduction {
    pub fn straddles(&self) -> bool {
        self.pairs.iter().all(|p| p.unary_to_alice != p.binary_to_alice)
    }

    /// Compares `f|rho` with `OR (unary AND binary)` over every variable
    /// `rho` leaves free.
    pub fn verify(&self, inst: &FamilyInstance) -> Result<bool> {
        let free: Vec<Var> = (1..=inst.circuit.var_count()).filter(|v| !self.rho.contains(*v)).collect();
        let residual = inst.circuit.restricted_table(&self.rho, &free)?;
        let expected = TruthTable::build(free.clone(), &Assignment::new(), |w| {
            let mut acc = 0u64;
            for p in &self.pairs {
                acc |= w.var(p.unary)? & w.var(p.binary)?;
            }
            Ok(acc)
        })?;
        Ok(residual == expected)
    }
}

/// The assignment that turns `Q_V`, `H_1` or `H_0` into disjointness over
/// the split rows (or columns, if there are more of those).
pub fn qv_reduction(inst: &FamilyInstance, alice_vars: &BTreeSet<Var>) -> Result<Reduction> {
    let (g, zero_other) = match inst.family {
        Family::Qv { m } | Family::H1 { m } => (Grid { m, k: 1 }, false),
        Family::H0 { m } => (Grid { m, k: 1 }, true),
        other => return Err(Error::Unsupported(format!("no grid reduction for {other}"))),
    };
    let p = GridPartition::induced(g, alice_vars);
    let ws = w_sets(&p, 0, 1);
    let transposed = ws.w_row.len() < ws.w_col.len();
    let w = if transposed { &ws.w_col } else { &ws.w_row };
    if w.is_empty() {
        return Err(Error::Parameter("no row or column is split by the partition".into()));
    }
    let m = g.m;
    // In row mode the "line" x is row i and cells run along j; transposed
    // swaps the roles of R and T.
    let unary = |x: u32| if transposed { g.t(x) } else { g.r(x) };
    let other = |y: u32| if transposed { g.r(y) } else { g.t(y) };
    let cell = |x: u32, y: u32| if transposed { g.s(y, x) } else { g.s(x, y) };
    let mut rho = Assignment::new();
    for y in 1..=m {
        // H0 keeps its third factor true; the others drop it.
        rho.set(other(y), zero_other);
    }
    let mut pairs = Vec::new();
    for x in 1..=m {
        if !w.contains(&x) {
            rho.set(unary(x), false);
            continue;
        }
        let ua = alice_vars.contains(&unary(x));
        let mut chosen = None;
        for y in 1..=m {
            let c = cell(x, y);
            let ca = alice_vars.contains(&c);
            if ca == ua || chosen.is_some() {
                rho.set(c, false);
            } else {
                chosen = Some(c);
            }
        }
        let binary = chosen.expect("a split line has a cell on each side");
        pairs.push(ReductionPair {
            index: x,
            unary: unary(x),
            binary,
            unary_to_alice: ua,
            binary_to_alice: !ua,
        });
    }
    Ok(Reduction { rho, transposed, pairs })
}

/// Reference lower bounds, evaluated from the closed-form statements.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyBounds {
    /// Best `(1/3,2/3)`-partition communication complexity.
    pub cc_bound: Option<f64>,
    pub sdd_bound: Option<f64>,
    /// The parameters lie below the range the bound is stated for.
    pub below_hypothesis: bool,
    pub note: String,
}

pub fn family_bounds(family: Family) -> FamilyBounds {
    match family {
        Family::Qv { m } | Family::H0 { m } | Family::H1 { m } => {
            let c = f64::from(m) / 3.0;
            let below = m < 6;
            FamilyBounds {
                cc_bound: Some(c),
                sdd_bound: Some(2f64.powf(c.sqrt() - 1.0)),
                below_hypothesis: below,
                note: if below { "below m >= 6 hypothesis".into() } else { String::new() },
            }
        }
        Family::Hk { k, m, .. } => {
            let below = m < 6 || k < 2;
            FamilyBounds {
                cc_bound: Some(f64::from(m) / (9.0 * f64::from(k))),
                sdd_bound: Some(2f64.powf((f64::from(m) / f64::from(k)).sqrt() / 3.0 - 1.0)),
                below_hypothesis: below,
                note: if below { "below m >= 6, k >= 2 hypothesis".into() } else { String::new() },
            }
        }
        Family::Disjointness { n } => FamilyBounds {
            cc_bound: Some(f64::from(n + 1)),
            sdd_bound: None,
            below_hypothesis: false,
            note: "deterministic complexity under the natural split".into(),
        },
        Family::Perm { .. } | Family::RowCol { .. } | Family::ShiftedEq { .. } => FamilyBounds {
            cc_bound: None,
            sdd_bound: None,
            below_hypothesis: false,
            note: "asymptotic bound only".into(),
        },
    }
}

impl fmt::Display for FamilyBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6}"));
        write!(f, "cc_bound {} sdd_bound {}", show(self.cc_bound), show(self.sdd_bound))?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}
