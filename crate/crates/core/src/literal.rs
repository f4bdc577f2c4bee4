use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Variable identifier. Variables are numbered from 1.
pub type Var = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub var: Var,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: Var) -> Self {
        Lit {
            var,
            positive: true,
        }
    }

    pub fn neg(var: Var) -> Self {
        Lit {
            var,
            positive: false,
        }
    }

    /// DIMACS-style signed literal; zero is rejected.
    pub fn from_signed(v: i64) -> Option<Self> {
        if v == 0 || v.unsigned_abs() > u64::from(u32::MAX) {
            return None;
        }
        Some(Lit {
            var: v.unsigned_abs() as Var,
            positive: v > 0,
        })
    }

    pub fn signed(self) -> i64 {
        if self.positive {
            i64::from(self.var)
        } else {
            -i64::from(self.var)
        }
    }

    pub fn negate(self) -> Self {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }

    pub fn holds(self, value: bool) -> bool {
        value == self.positive
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signed())
    }
}

/// A partial map from variables to truth values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assignment of `vars` read from the low bits of `bits` (bit `k` is `vars[k]`).
    pub fn from_bits(vars: &[Var], bits: u64) -> Self {
        vars.iter()
            .enumerate()
            .map(|(k, &v)| (v, bits >> k & 1 == 1))
            .collect()
    }

    pub fn set(&mut self, var: Var, value: bool) -> &mut Self {
        self.values.insert(var, value);
        self
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn require(&self, var: Var) -> Result<bool> {
        self.get(var).ok_or(Error::Unassigned(var))
    }

    pub fn contains(&self, var: Var) -> bool {
        self.values.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn domain(&self) -> impl Iterator<Item = Var> + '_ {
        self.values.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }

    /// True when every variable in `vars` is assigned.
    pub fn is_total_over(&self, vars: impl IntoIterator<Item = Var>) -> bool {
        vars.into_iter().all(|v| self.contains(v))
    }

    /// Parses `3=1,5=0` style lists.
    pub fn parse(text: &str) -> Result<Self> {
        let mut a = Assignment::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (var, val) = item
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("expected var=value, got `{item}`")))?;
            let var: Var = var
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("bad variable in `{item}`")))?;
            let val = match val.trim() {
                "1" | "true" => true,
                "0" | "false" => false,
                other => return Err(Error::Parameter(format!("bad value `{other}`"))),
            };
            if var == 0 {
                return Err(Error::Parameter("variable 0 does not exist".into()));
            }
            a.set(var, val);
        }
        Ok(a)
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, bool)>>(iter: I) -> Self {
        Assignment {
            values: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, b) in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{v}={}", u8::from(b))?;
        }
        Ok(())
    }
}
