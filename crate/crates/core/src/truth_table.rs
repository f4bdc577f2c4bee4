//! Bit-vector truth tables and the word-parallel evaluator used as the
//! brute-force oracle throughout the crate.
//!
//! Bit `i` of a table corresponds to the assignment in which `order[k]` takes
//! the value of bit `k` of `i`. Evaluation proceeds 64 assignments at a time:
//! the first six variables of the order vary inside a word, the rest are
//! constant across it.

use std::fmt;

use crate::error::{Error, Result, ORACLE_VAR_CAP};
use crate::literal::{Assignment, Lit, Var};

const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[derive(Clone, Copy)]
enum Source {
    Missing,
    Position(usize),
    Fixed(bool),
}

/// Per-word view of the variables: each call returns a 64-lane mask.
pub struct WordInput {
    sources: Vec<Source>,
    word: usize,
}

impl WordInput {
    fn new(order: &[Var], fixed: &Assignment) -> Self {
        let max = order
            .iter()
            .copied()
            .chain(fixed.domain())
            .max()
            .unwrap_or(0) as usize;
        let mut sources = vec![Source::Missing; max + 1];
        for (v, b) in fixed.iter() {
            sources[v as usize] = Source::Fixed(b);
        }
        for (k, &v) in order.iter().enumerate() {
            sources[v as usize] = Source::Position(k);
        }
        WordInput { sources, word: 0 }
    }

    pub fn var(&self, var: Var) -> Result<u64> {
        match self.sources.get(var as usize) {
            Some(Source::Position(k)) if *k < 6 => Ok(LANE_PATTERNS[*k]),
            Some(Source::Position(k)) => Ok(if self.word >> (k - 6) & 1 == 1 {
                !0
            } else {
                0
            }),
            Some(Source::Fixed(true)) => Ok(!0),
            Some(Source::Fixed(false)) => Ok(0),
            _ => Err(Error::Unassigned(var)),
        }
    }

    pub fn lit(&self, lit: Lit) -> Result<u64> {
        let m = self.var(lit.var)?;
        Ok(if lit.positive { m } else { !m })
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct TruthTable {
    order: Vec<Var>,
    words: Vec<u64>,
}

impl TruthTable {
    fn check_order(order: &[Var]) -> Result<()> {
        if order.len() > ORACLE_VAR_CAP {
            return Err(Error::OracleCap(order.len()));
        }
        let mut seen = order.to_vec();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("duplicate variable in truth-table order".into()));
        }
        if seen.first() == Some(&0) {
            return Err(Error::Invalid("variable 0 in truth-table order".into()));
        }
        Ok(())
    }

    fn word_count(n: usize) -> usize {
        if n <= 6 {
            1
        } else {
            1 << (n - 6)
        }
    }

    fn tail_mask(n: usize) -> u64 {
        if n >= 6 {
            !0
        } else {
            (1u64 << (1 << n)) - 1
        }
    }

    /// Builds a table by evaluating `eval` once per 64-assignment word.
    /// Variables outside `order` are read from `fixed`.
    pub fn build(
        order: Vec<Var>,
        fixed: &Assignment,
        mut eval: impl FnMut(&WordInput) -> Result<u64>,
    ) -> Result<Self> {
        let mut tables = Self::build_many(order, fixed, 1, |input, out| {
            out[0] = eval(input)?;
            Ok(())
        })?;
        Ok(tables.remove(0))
    }

    /// Builds `k` tables over the same order in one pass; `eval` fills one
    /// word per table.
    pub fn build_many(
        order: Vec<Var>,
        fixed: &Assignment,
        k: usize,
        mut eval: impl FnMut(&WordInput, &mut [u64]) -> Result<()>,
    ) -> Result<Vec<Self>> {
        Self::check_order(&order)?;
        let n = order.len();
        let count = Self::word_count(n);
        let mut input = WordInput::new(&order, fixed);
        let mut words = vec![Vec::with_capacity(count); k];
        let mut out = vec![0u64; k];
        for w in 0..count {
            input.word = w;
            eval(&input, &mut out)?;
            for (table, &word) in words.iter_mut().zip(&out) {
                table.push(word);
            }
        }
        Ok(words
            .into_iter()
            .map(|mut words| {
                if let Some(last) = words.last_mut() {
                    *last &= Self::tail_mask(n);
                }
                TruthTable {
                    order: order.clone(),
                    words,
                }
            })
            .collect())
    }

    pub fn constant(order: Vec<Var>, value: bool) -> Result<Self> {
        Self::build(order, &Assignment::new(), |_| Ok(if value { !0 } else { 0 }))
    }

    /// Table from an explicit bit list (index `i` as described in the module docs).
    pub fn from_bits(order: Vec<Var>, bits: &[bool]) -> Result<Self> {
        Self::check_order(&order)?;
        if bits.len() != 1usize << order.len() {
            return Err(Error::Invalid(format!(
                "{} bits given for {} variables",
                bits.len(),
                order.len()
            )));
        }
        let mut words = vec![0u64; Self::word_count(order.len())];
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            words[i / 64] |= 1 << (i % 64);
        }
        Ok(TruthTable { order, words })
    }

    pub fn order(&self) -> &[Var] {
        &self.order
    }

    pub fn num_vars(&self) -> usize {
        self.order.len()
    }

    pub fn len(&self) -> usize {
        1 << self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, index: usize) -> bool {
        self.words[index / 64] >> (index % 64) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_false(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_true(&self) -> bool {
        self.count_ones() == self.len() as u64
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::Invalid("truth tables over different orders".into()));
        }
        Ok(TruthTable {
            order: self.order.clone(),
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a | b)
    }

    /// True when the two functions have a common satisfying assignment.
    pub fn intersects(&self, other: &Self) -> Result<bool> {
        Ok(!self.and(other)?.is_false())
    }

    /// Value under a total assignment of the table's variables.
    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        let mut index = 0usize;
        for (k, &v) in self.order.iter().enumerate() {
            if a.require(v)? {
                index |= 1 << k;
            }
        }
        Ok(self.get(index))
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({:?}, ", self.order)?;
        for b in self.bits().take(256) {
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.len() > 256 {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}
