//! Exhaustive reference solver.
//!
//! Enumerates every existential assignment and, for each, sums the weights of
//! the randomized assignments that satisfy the formula. Independent of the
//! diagram machinery; used as ground truth in tests.

use crate::formula::{Problem, Variable};
use crate::pbf::Assignment;

/// Largest number of enumerated variables accepted.
pub const ENUMERATION_LIMIT: usize = 24;

/// `per_assignment` is only materialized up to this many existential
/// variables.
pub const TABLE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{vars} variables exceed the enumeration limit of {limit}")]
    TooLarge { vars: usize, limit: usize },
    #[error("existential variable {0} is not assigned")]
    Unassigned(Variable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub maximum: f64,
    /// Every existential assignment attaining `maximum`, in enumeration order.
    pub maximizers: Vec<Assignment>,
    pub per_assignment: Option<Vec<(Assignment, f64)>>,
}

/// A clause restricted to the randomized variables, as bit masks over `Y`.
struct Residual {
    pos: u64,
    neg: u64,
}

/// `Σ_{τY} [φ](τX ∪ τY) · Π_y w(y)`, with `w(y) = pr(y)` if `τY(y) = 1` and
/// `1 - pr(y)` otherwise. `Y` assignments are summed in binary-counter order
/// (bit `i` is the `i`-th randomized variable in ascending id order).
pub fn weighted_count(p: &Problem, tau_x: &Assignment) -> Result<f64, OracleError> {
    let ys: Vec<Variable> = p.randomized().collect();
    if ys.len() > ENUMERATION_LIMIT {
        return Err(OracleError::TooLarge {
            vars: ys.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let bit_of = |v: Variable| ys.binary_search(&v).ok();
    let mut residuals = Vec::new();
    for clause in &p.clauses {
        let mut r = Residual { pos: 0, neg: 0 };
        let mut satisfied = false;
        for lit in clause.literals() {
            match bit_of(lit.var) {
                Some(b) if lit.positive => r.pos |= 1 << b,
                Some(b) => r.neg |= 1 << b,
                None => {
                    let value = tau_x.get(lit.var).ok_or(OracleError::Unassigned(lit.var))?;
                    satisfied |= lit.holds(value);
                }
            }
        }
        if !satisfied {
            if r.pos == 0 && r.neg == 0 {
                return Ok(0.0);
            }
            residuals.push(r);
        }
    }
    let probs: Vec<f64> = ys.iter().map(|&y| p.random[&y]).collect();
    let mut total = 0.0;
    for mask in 0u64..(1u64 << ys.len()) {
        if residuals.iter().all(|r| mask & r.pos != 0 || !mask & r.neg != 0) {
            let mut w = 1.0;
            for (i, &q) in probs.iter().enumerate() {
                w *= if mask >> i & 1 == 1 { q } else { 1.0 - q };
            }
            total += w;
        }
    }
    Ok(total)
}

/// Maximum and all maximizers by full enumeration of `X` (ascending ids,
/// binary-counter order).
pub fn enumerate_solve(p: &Problem) -> Result<OracleResult, OracleError> {
    let xs: Vec<Variable> = p.exist.iter().copied().collect();
    let total = xs.len() + p.random.len();
    if total > ENUMERATION_LIMIT {
        return Err(OracleError::TooLarge {
            vars: total,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut maximum = f64::NEG_INFINITY;
    let mut maximizers = Vec::new();
    let mut table = (xs.len() <= TABLE_LIMIT).then(Vec::new);
    for bits in 0u64..(1u64 << xs.len()) {
        let tau = Assignment::from_bits(&xs, bits);
        let count = weighted_count(p, &tau)?;
        if count > maximum {
            maximum = count;
            maximizers.clear();
        }
        if count == maximum {
            maximizers.push(tau.clone());
        }
        if let Some(t) = table.as_mut() {
            t.push((tau, count));
        }
    }
    Ok(OracleResult {
        maximum,
        maximizers,
        per_assignment: table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{fixtures::example, parse_problem};

    fn tau(pairs: &[(u32, bool)]) -> Assignment {
        pairs.iter().map(|&(i, b)| (Variable::new(i), b)).collect()
    }

    #[test]
    fn example_weighted_count() {
        let p = example();
        let t = tau(&[(1, true), (3, true), (5, false)]);
        assert_eq!(weighted_count(&p, &t).unwrap(), 0.75);
        let t = tau(&[(1, false), (3, true), (5, false)]);
        assert_eq!(weighted_count(&p, &t).unwrap(), 0.0);
    }

    #[test]
    fn example_enumeration() {
        let r = enumerate_solve(&example()).unwrap();
        assert_eq!(r.maximum, 0.75);
        assert_eq!(r.maximizers.len(), 2);
        for m in &r.maximizers {
            assert_eq!(m.get(Variable::new(1)), Some(true));
            assert_ne!(m.get(Variable::new(3)), m.get(Variable::new(5)));
        }
        assert_eq!(r.per_assignment.unwrap().len(), 8);
    }

    #[test]
    fn no_random_variables() {
        let p = parse_problem("p cnf 2 2\ne 1 2 0\n1 2 0\n-1 0\n").unwrap();
        assert_eq!(weighted_count(&p, &tau(&[(1, false), (2, true)])).unwrap(), 1.0);
        assert_eq!(weighted_count(&p, &tau(&[(1, true), (2, true)])).unwrap(), 0.0);
    }

    #[test]
    fn empty_formula() {
        let r = enumerate_solve(&parse_problem("p cnf 0 0\n").unwrap()).unwrap();
        assert_eq!(r.maximum, 1.0);
        assert_eq!(r.maximizers, vec![Assignment::new()]);
    }

    #[test]
    fn pure_weighted_model_count() {
        let p = parse_problem("p cnf 2 1\nr 0.4 1 2 0\n1 2 0\n").unwrap();
        let r = enumerate_solve(&p).unwrap();
        assert_eq!(r.maximum, weighted_count(&p, &Assignment::new()).unwrap());
        assert!((r.maximum - (1.0 - 0.6 * 0.6)).abs() < 1e-15);
        assert_eq!(r.maximizers, vec![Assignment::new()]);
    }

    #[test]
    fn guard() {
        let text = format!("p cnf 25 0\ne {} 0\n", (1..=25).map(|i| i.to_string()).collect::<Vec<_>>().join(" "));
        let p = parse_problem(&text).unwrap();
        assert_eq!(
            enumerate_solve(&p),
            Err(OracleError::TooLarge { vars: 25, limit: 24 })
        );
    }

    #[test]
    fn unassigned_existential() {
        let p = example();
        assert_eq!(
            weighted_count(&p, &tau(&[(1, true)])),
            Err(OracleError::Unassigned(Variable::new(3)))
        );
    }
}
