//! Quantified weighted CNF problems: `∃X R^pr Y φ`.
//!
//! A [`Problem`] is a CNF formula together with a partition of its variables
//! into an existential block and a randomized block, where every randomized
//! variable carries the probability of being assigned 1.

mod dimacs;
mod graph;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use dimacs::{parse_problem, parse_problem_with, write_problem, ParseError, ParseOptions};
pub use graph::{primal_graph, Graph};

/// A propositional variable, 1-based as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(u32);

impl Variable {
    /// Panics on 0; use [`Variable::try_new`] for untrusted input.
    pub fn new(id: u32) -> Self {
        assert!(id >= 1, "variable ids are 1-based");
        Variable(id)
    }

    pub fn try_new(id: u32) -> Option<Self> {
        (id >= 1).then_some(Variable(id))
    }

    pub fn id(self) -> u32 {
        self.0
    }

    /// 0-based index, handy for bit masks and dense tables.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: Variable,
    pub positive: bool,
}

impl Literal {
    pub fn new(var: Variable, positive: bool) -> Self {
        Literal { var, positive }
    }

    /// Builds a literal from a signed DIMACS integer. Returns `None` for 0.
    pub fn from_dimacs(lit: i64) -> Option<Self> {
        let id = u32::try_from(lit.unsigned_abs()).ok()?;
        Variable::try_new(id).map(|var| Literal::new(var, lit > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var.id());
        if self.positive {
            id
        } else {
            -id
        }
    }

    /// Whether the literal is true when its variable takes `value`.
    pub fn holds(self, value: bool) -> bool {
        value == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals over pairwise distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Normalizes a literal list: duplicate literals collapse to one copy and
    /// tautologies (`x ∨ ¬x ∨ …`) yield `None`. Literal order is preserved.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Option<Self> {
        let mut seen: BTreeMap<Variable, bool> = BTreeMap::new();
        let mut out = Vec::new();
        for lit in literals {
            match seen.get(&lit.var) {
                Some(&sign) if sign == lit.positive => continue,
                Some(_) => return None,
                None => {
                    seen.insert(lit.var, lit.positive);
                    out.push(lit);
                }
            }
        }
        Some(Clause { literals: out })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn vars(&self) -> impl Iterator<Item = Variable> + '_ {
        self.literals.iter().map(|l| l.var)
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// Whether the clause is satisfied, reading values through `value_of`.
    pub fn satisfied_by(&self, mut value_of: impl FnMut(Variable) -> bool) -> bool {
        self.literals.iter().any(|l| l.holds(value_of(l.var)))
    }
}

/// Which quantifier block a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantifier {
    Exists,
    Random(f64),
}

/// An ER-SSAT instance `∃X R^pr Y φ`.
///
/// `random` maps every variable of `Y` to its probability; its key set is `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub num_vars: u32,
    pub clauses: Vec<Clause>,
    pub exist: BTreeSet<Variable>,
    pub random: BTreeMap<Variable, f64>,
}

/// One broken [`Problem`] invariant.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("variable {0} is both existential and randomized")]
    BothQuantifiers(Variable),
    #[error("variable {var} in clause {clause} is not quantified")]
    Unquantified { var: Variable, clause: usize },
    #[error("probability {prob} of variable {var} is outside [0, 1]")]
    ProbabilityRange { var: Variable, prob: f64 },
    #[error("variable {var} exceeds the declared variable count {num_vars}")]
    OutOfRange { var: Variable, num_vars: u32 },
    #[error("clause {clause} mentions variable {var} more than once")]
    RepeatedVariable { var: Variable, clause: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid problem: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ValidationError(pub Vec<Violation>);

impl Problem {
    pub fn new(
        num_vars: u32,
        clauses: Vec<Clause>,
        exist: impl IntoIterator<Item = Variable>,
        random: impl IntoIterator<Item = (Variable, f64)>,
    ) -> Self {
        Problem {
            num_vars,
            clauses,
            exist: exist.into_iter().collect(),
            random: random.into_iter().collect(),
        }
    }

    /// The randomized block `Y`.
    pub fn randomized(&self) -> impl Iterator<Item = Variable> + '_ {
        self.random.keys().copied()
    }

    pub fn quantifier(&self, var: Variable) -> Option<Quantifier> {
        if self.exist.contains(&var) {
            Some(Quantifier::Exists)
        } else {
            self.random.get(&var).map(|&p| Quantifier::Random(p))
        }
    }

    pub fn is_exist(&self, var: Variable) -> bool {
        self.exist.contains(&var)
    }

    pub fn probability(&self, var: Variable) -> Option<f64> {
        self.random.get(&var).copied()
    }

    /// `X ∪ Y` in ascending order.
    pub fn quantified(&self) -> BTreeSet<Variable> {
        self.exist.iter().copied().chain(self.randomized()).collect()
    }

    /// `vars(φ)`: variables that occur in at least one clause.
    pub fn clause_vars(&self) -> BTreeSet<Variable> {
        self.clauses.iter().flat_map(Clause::vars).collect()
    }

    /// Checks every invariant and reports each violation separately.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut violations = Vec::new();
        for &var in self.exist.iter().chain(self.random.keys()) {
            if var.id() > self.num_vars {
                violations.push(Violation::OutOfRange {
                    var,
                    num_vars: self.num_vars,
                });
            }
        }
        for &var in &self.exist {
            if self.random.contains_key(&var) {
                violations.push(Violation::BothQuantifiers(var));
            }
        }
        for (&var, &prob) in &self.random {
            if !(0.0..=1.0).contains(&prob) {
                violations.push(Violation::ProbabilityRange { var, prob });
            }
        }
        for (idx, clause) in self.clauses.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for var in clause.vars() {
                if !seen.insert(var) {
                    violations.push(Violation::RepeatedVariable { var, clause: idx });
                }
                if !self.exist.contains(&var) && !self.random.contains_key(&var) {
                    violations.push(Violation::Unquantified { var, clause: idx });
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationError(violations))
        }
    }
}
