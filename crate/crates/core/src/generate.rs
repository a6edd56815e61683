//! Seeded random instances for fuzzing and smoke benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{Clause, Literal, Problem, Variable};

/// Probabilities given to randomized variables.
pub const PROBABILITIES: [f64; 3] = [0.4, 0.5, 0.6];

fn quantify<R: Rng>(rng: &mut R, num_vars: u32, clauses: Vec<Clause>) -> Problem {
    let mut exist = Vec::new();
    let mut random = Vec::new();
    for id in 1..=num_vars {
        let v = Variable::new(id);
        if rng.gen_bool(0.5) {
            exist.push(v);
        } else {
            random.push((v, *PROBABILITIES.choose(rng).expect("non-empty")));
        }
    }
    Problem::new(num_vars, clauses, exist, random)
}

fn random_clause<R: Rng>(rng: &mut R, vars: &[Variable], len: usize) -> Clause {
    let lits = vars
        .choose_multiple(rng, len.min(vars.len()))
        .map(|&v| Literal::new(v, rng.gen_bool(0.5)));
    Clause::new(lits).expect("distinct variables cannot form a tautology")
}

/// A random instance with `1..=max_vars` variables, `0..=max_clauses`
/// clauses of length 1 to 4 and a random existential/randomized split.
pub fn random_problem<R: Rng>(rng: &mut R, max_vars: u32, max_clauses: usize) -> Problem {
    let num_vars = rng.gen_range(1..=max_vars);
    let vars: Vec<Variable> = (1..=num_vars).map(Variable::new).collect();
    let num_clauses = rng.gen_range(0..=max_clauses);
    let clauses = (0..num_clauses)
        .map(|_| {
            let len = *[1, 2, 2, 3, 3, 3, 4].choose(rng).expect("non-empty");
            random_clause(rng, &vars, len)
        })
        .collect();
    quantify(rng, num_vars, clauses)
}

/// An instance of tree width exactly `width`: one clause over all `width`
/// variables plus `extra` random 3-clauses over the same variables.
pub fn width_instance<R: Rng>(rng: &mut R, width: u32, extra: usize) -> Problem {
    let vars: Vec<Variable> = (1..=width).map(Variable::new).collect();
    let mut clauses = vec![random_clause(rng, &vars, vars.len())];
    clauses.extend((0..extra).map(|_| random_clause(rng, &vars, 3)));
    quantify(rng, width, clauses)
}
