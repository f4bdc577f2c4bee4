//! Size experiments over the function families, reported as CSV.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bdd::OrFbdd;
use crate::error::{Error, Result, ORACLE_VAR_CAP};
use crate::families::{family_bounds, gen, Family};
use crate::literal::{Assignment, Var};
use crate::sdd::compile_with_budget;
use crate::simulate::convert;
use crate::vtree::{Vtree, VtreeShape};

pub const CSV_HEADER: [&str; 10] = [
    "family",
    "param",
    "repr",
    "strategy",
    "seed",
    "size",
    "size_circle_only",
    "paper_bound",
    "wall_ms",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Sdd,
    Obdd,
    OrFbdd,
}

impl fmt::Display for Repr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Repr::Sdd => "sdd",
            Repr::Obdd => "obdd",
            Repr::OrFbdd => "orfbdd",
        })
    }
}

impl FromStr for Repr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sdd" => Ok(Repr::Sdd),
            "obdd" => Ok(Repr::Obdd),
            "orfbdd" => Ok(Repr::OrFbdd),
            _ => Err(Error::Parameter(format!("unknown representation `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Balanced,
    RightLinear,
    /// Restart `i` uses seed `seed + i`; the smallest result is kept.
    RandomRestarts { count: u32, seed: u64 },
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Balanced => f.write_str("balanced"),
            Strategy::RightLinear => f.write_str("right-linear"),
            Strategy::RandomRestarts { count, seed } => write!(f, "random-restarts({count};{seed})"),
        }
    }
}

impl Strategy {
    fn seeds(&self) -> Vec<Option<u64>> {
        match *self {
            Strategy::RandomRestarts { count, seed } => (0..count as u64).map(|i| Some(seed.wrapping_add(i))).collect(),
            _ => vec![None],
        }
    }

    fn vtree(&self, vars: &[Var], seed: Option<u64>) -> Result<Vtree> {
        let shape = match (self, seed) {
            (Strategy::RightLinear, _) => VtreeShape::RightLinear,
            (_, Some(s)) => VtreeShape::Random(s),
            _ => VtreeShape::Balanced,
        };
        Vtree::build(vars, shape)
    }

    fn order(&self, vars: &[Var], seed: Option<u64>) -> Vec<Var> {
        let mut order = vars.to_vec();
        if let Some(s) = seed {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
        }
        order
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSpec {
    /// Family shape; the size parameter is taken from `params`.
    pub family: Family,
    pub params: Vec<u32>,
    pub repr: Repr,
    pub strategy: Strategy,
    /// Skip instances with more variables than this.
    pub max_vars: u32,
    /// Record wall-clock time; off by default so that output is reproducible.
    pub timing: bool,
    /// Per-restart SDD compilation budget in elements. Restarts that exceed
    /// it are left out of the minimum and counted in the status column.
    pub budget: Option<usize>,
}

pub const DEFAULT_BUDGET: usize = 1_000_000;

impl ExperimentSpec {
    pub fn new(family: Family, params: Vec<u32>, repr: Repr, strategy: Strategy) -> Self {
        ExperimentSpec {
            family,
            params,
            repr,
            strategy,
            max_vars: 40,
            timing: false,
            budget: Some(DEFAULT_BUDGET),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeRecord {
    pub family: String,
    pub param: u32,
    pub repr: Repr,
    pub strategy: String,
    pub seed: Option<u64>,
    pub size: Option<usize>,
    pub size_circle_only: Option<usize>,
    /// For OR-FBDD rows the `N * M^L` bound, otherwise the family's SDD
    /// formula; reported, never compared.
    pub reference_bound: Option<String>,
    pub wall_ms: u128,
    pub status: String,
}

fn measure(spec: &ExperimentSpec, family: Family) -> Result<SizeRecord> {
    let started = Instant::now();
    let inst = gen(family)?;
    let vars: Vec<Var> = (1..=inst.circuit.var_count()).collect();
    let mut rec = SizeRecord {
        family: family.name().to_string(),
        param: family.param(),
        repr: spec.repr,
        strategy: spec.strategy.to_string(),
        seed: None,
        size: None,
        size_circle_only: None,
        reference_bound: family_bounds(family).sdd_bound.map(|b| format!("{b:.6}")),
        wall_ms: 0,
        status: "ok".to_string(),
    };
    let cap = match spec.repr {
        Repr::Obdd => spec.max_vars.min(ORACLE_VAR_CAP as u32),
        _ => spec.max_vars,
    };
    if inst.circuit.var_count() > cap {
        rec.status = "skipped".to_string();
        return Ok(rec);
    }
    match spec.repr {
        Repr::Sdd => {
            let seeds = spec.strategy.seeds();
            let mut over = 0;
            for &seed in &seeds {
                let s = match compile_with_budget(&inst.circuit, &spec.strategy.vtree(&vars, seed)?, spec.budget) {
                    Ok(s) => s,
                    Err(Error::Budget(_)) => {
                        over += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                if rec.size.is_none_or(|best| s.size() < best) {
                    rec.size = Some(s.size());
                    rec.size_circle_only = Some(s.size_circle_only());
                    rec.seed = seed;
                }
            }
            if over > 0 {
                rec.status = format!("over-budget({over}/{})", seeds.len());
            }
        }
        Repr::Obdd => {
            for seed in spec.strategy.seeds() {
                let order = spec.strategy.order(&vars, seed);
                let t = inst.circuit.restricted_table(&Assignment::new(), &order)?;
                let b = OrFbdd::obdd_from_table(&t, &order)?;
                if rec.size.is_none_or(|best| b.len() < best) {
                    rec.size = Some(b.len());
                    rec.size_circle_only = Some(b.len());
                    rec.seed = seed;
                }
            }
        }
        Repr::OrFbdd => {
            let conv = convert(&inst.circuit)?;
            rec.size = Some(conv.fbdd.len());
            rec.size_circle_only = Some(conv.fbdd.without_noops().len());
            rec.reference_bound = Some(conv.bound().nml.to_string());
            rec.strategy = "none".to_string();
        }
    }
    if spec.timing {
        rec.wall_ms = started.elapsed().as_millis();
    }
    Ok(rec)
}

/// One row per parameter, in the order given.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<SizeRecord>> {
    if spec.params.is_empty() {
        return Err(Error::Parameter("empty parameter range".into()));
    }
    spec.params
        .iter()
        .map(|&p| measure(spec, spec.family.with_param(p)))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SizeRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
    for r in rows {
        w.write_record([
            r.family.clone(),
            r.param.to_string(),
            r.repr.to_string(),
            r.strategy.clone(),
            r.seed.map_or(String::new(), |s| s.to_string()),
            opt(r.size),
            opt(r.size_circle_only),
            r.reference_bound.clone().unwrap_or_default(),
            r.wall_ms.to_string(),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdd::compile;

    #[test]
    fn h0_balanced() {
        let spec = ExperimentSpec::new(Family::H0 { m: 1 }, vec![1], Repr::Sdd, Strategy::Balanced);
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].status, "ok");
        let vt = Vtree::build(&[1, 2, 3], VtreeShape::Balanced).unwrap();
        let s = compile(&gen(Family::H0 { m: 1 }).unwrap().circuit, &vt).unwrap();
        assert_eq!(s.count_models(), 1u32.into());
        assert_eq!(rows[0].size, Some(s.size()));
    }

    #[test]
    fn csv_is_reproducible() {
        let spec = ExperimentSpec::new(
            Family::Qv { m: 2 },
            vec![1, 2],
            Repr::Sdd,
            Strategy::RandomRestarts { count: 5, seed: 7 },
        );
        let render = || {
            let mut buf = Vec::new();
            write_csv(&run_experiment(&spec).unwrap(), &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a, render());
        assert!(a.starts_with("family,param,repr,strategy,seed,size,size_circle_only,paper_bound,wall_ms,status\n"));
        assert!(a.lines().nth(1).unwrap().contains("random-restarts(5;7)"));
    }

    #[test]
    fn orfbdd_rows_and_caps() {
        let spec = ExperimentSpec::new(Family::Perm { n: 2 }, vec![2, 3], Repr::OrFbdd, Strategy::Balanced);
        for r in run_experiment(&spec).unwrap() {
            let bound: u128 = r.reference_bound.unwrap().parse().unwrap();
            assert!(r.size.unwrap() as u128 <= bound);
        }
        let mut spec = ExperimentSpec::new(Family::Qv { m: 5 }, vec![5], Repr::Obdd, Strategy::Balanced);
        spec.max_vars = 60;
        assert_eq!(run_experiment(&spec).unwrap()[0].status, "skipped");
    }

    #[test]
    fn budget_overruns_are_reported() {
        let mut spec = ExperimentSpec::new(Family::H0 { m: 2 }, vec![2], Repr::Sdd, Strategy::Balanced);
        spec.budget = Some(5);
        let row = &run_experiment(&spec).unwrap()[0];
        assert_eq!(row.status, "over-budget(1/1)");
        assert_eq!(row.size, None);
    }
}
