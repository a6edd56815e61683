//! Pseudo-Boolean functions as reduced ordered decision diagrams with real
//! terminals (ADDs).
//!
//! All diagrams live in a [`Store`], which owns the node table, the unique
//! table and the operation caches. A [`PbFunc`] is a cheap copyable handle into
//! one store; because the store is hash-consed, two handles from the same store
//! denote the same function iff they are equal.
//!
//! Supported algebra:
//! - join (pointwise product),
//! - existential projection (pointwise max over the two cofactors),
//! - random projection (`p·f|x=1 + (1-p)·f|x=0`),
//! - derivative sign (which cofactor is at least as large; ties pick 1).

mod dot;
mod store;

use std::collections::BTreeMap;

use crate::formula::Variable;

pub(crate) use store::Op;
pub use store::{Limits, Store};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PbfError {
    #[error("terminal value {0} is not finite")]
    NonFinite(f64),
    #[error("operands belong to different diagram stores")]
    OrderMismatch,
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityRange(f64),
    #[error("assignment does not cover variable {0}")]
    MissingVariable(Variable),
    #[error("variable {0} is not part of the variable order")]
    UnknownVariable(Variable),
    #[error("variable {0} appears twice in the variable order")]
    DuplicateVariable(Variable),
    #[error("diagram node limit of {0} exceeded")]
    NodeLimit(usize),
    #[error("operation cancelled")]
    Cancelled,
}

pub type Result<T> = std::result::Result<T, PbfError>;

/// Bijection between variables and diagram levels (level 0 is the root-most).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarOrder {
    vars: Vec<Variable>,
    rank: BTreeMap<Variable, u32>,
}

impl VarOrder {
    pub fn new(vars: impl IntoIterator<Item = Variable>) -> Result<Self> {
        let mut order = VarOrder::default();
        for v in vars {
            if order.rank.insert(v, order.vars.len() as u32).is_some() {
                return Err(PbfError::DuplicateVariable(v));
            }
            order.vars.push(v);
        }
        Ok(order)
    }

    /// Variables ranked by ascending id.
    pub fn ascending(vars: impl IntoIterator<Item = Variable>) -> Self {
        let mut vs: Vec<Variable> = vars.into_iter().collect();
        vs.sort_unstable();
        vs.dedup();
        VarOrder::new(vs).expect("deduplicated")
    }

    pub fn rank(&self, v: Variable) -> Option<u32> {
        self.rank.get(&v).copied()
    }

    pub fn var_at(&self, level: u32) -> Variable {
        self.vars[level as usize]
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }
}

/// A (partial) truth assignment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Assignment(BTreeMap<Variable, bool>);

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn get(&self, v: Variable) -> Option<bool> {
        self.0.get(&v).copied()
    }

    pub fn set(&mut self, v: Variable, value: bool) -> Option<bool> {
        self.0.insert(v, value)
    }

    pub fn with(mut self, v: Variable, value: bool) -> Self {
        self.set(v, value);
        self
    }

    pub fn contains(&self, v: Variable) -> bool {
        self.0.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Variable, bool)> + '_ {
        self.0.iter().map(|(&v, &b)| (v, b))
    }

    /// `τ|S`.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Variable>) -> Assignment {
        vars.into_iter()
            .filter_map(|&v| self.get(v).map(|b| (v, b)))
            .collect()
    }

    /// Signed DIMACS literals in ascending variable order.
    pub fn to_literals(&self) -> Vec<i64> {
        self.0
            .iter()
            .map(|(&v, &b)| if b { i64::from(v.id()) } else { -i64::from(v.id()) })
            .collect()
    }

    /// Assignment to `vars` encoded by the low bits of `bits`, where bit `i`
    /// is the value of `vars[i]`.
    pub fn from_bits(vars: &[Variable], bits: u64) -> Self {
        vars.iter()
            .enumerate()
            .map(|(i, &v)| (v, bits >> i & 1 == 1))
            .collect()
    }
}

impl FromIterator<(Variable, bool)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Variable, bool)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Handle to a diagram node inside a [`Store`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PbFunc {
    pub(crate) store: u32,
    pub(crate) node: u32,
}

/// `dsgn_x f`: for every assignment of the remaining variables, whether
/// `x ↦ 1` attains a value at least as large as `x ↦ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DsgnFunc {
    pub var: Variable,
    /// 0/1-valued diagram not depending on `var`; 1 selects `var ↦ 1`.
    pub chooser: PbFunc,
}

impl DsgnFunc {
    /// The value `var` should take under `tau`, which must cover the
    /// chooser's support.
    pub fn choose(&self, store: &Store, tau: &Assignment) -> Result<bool> {
        Ok(store.evaluate(self.chooser, tau)? != 0.0)
    }
}
