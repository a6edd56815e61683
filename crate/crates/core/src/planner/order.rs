use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formula::{Graph, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Heuristic {
    /// Fewest fill edges introduced by the elimination.
    #[default]
    MinFill,
    /// Fewest remaining neighbours.
    MinDegree,
    /// Ascending variable id.
    Lexicographic,
}

impl Heuristic {
    pub const ALL: [Heuristic; 3] = [Heuristic::MinFill, Heuristic::MinDegree, Heuristic::Lexicographic];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::MinFill => "min-fill",
            Heuristic::MinDegree => "min-degree",
            Heuristic::Lexicographic => "lex",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min-fill" | "minfill" => Ok(Heuristic::MinFill),
            "min-degree" | "mindegree" => Ok(Heuristic::MinDegree),
            "lex" | "lexicographic" => Ok(Heuristic::Lexicographic),
            _ => Err(format!("unknown heuristic `{s}` (expected min-fill, min-degree or lex)")),
        }
    }
}

fn fill_in(g: &Graph, v: Variable) -> usize {
    let ns: Vec<Variable> = g.neighbors(v).collect();
    let mut missing = 0;
    for (i, &a) in ns.iter().enumerate() {
        for &b in &ns[i + 1..] {
            if !g.has_edge(a, b) {
                missing += 1;
            }
        }
    }
    missing
}

fn cost(g: &Graph, v: Variable, h: Heuristic) -> usize {
    match h {
        Heuristic::MinFill => fill_in(g, v),
        Heuristic::MinDegree => g.degree(v),
        Heuristic::Lexicographic => 0,
    }
}

fn eliminate(g: &mut Graph, v: Variable) {
    let ns: Vec<Variable> = g.neighbors(v).collect();
    for (i, &a) in ns.iter().enumerate() {
        for &b in &ns[i + 1..] {
            g.add_edge(a, b);
        }
    }
    g.remove_vertex(v);
}

/// Blockwise elimination order: every variable of `y` precedes every variable
/// of `x`, and within a block `h` picks the next variable on the graph with
/// all previous eliminations applied. Ties go to the lowest id, or to a
/// seeded random choice when `tie_seed` is given (ignored by
/// [`Heuristic::Lexicographic`]).
pub fn elimination_order(
    g: &Graph,
    x: &BTreeSet<Variable>,
    y: &BTreeSet<Variable>,
    h: Heuristic,
    tie_seed: Option<u64>,
) -> Vec<Variable> {
    let mut graph = g.clone();
    let mut rng = tie_seed.map(ChaCha8Rng::seed_from_u64);
    let mut order = Vec::with_capacity(x.len() + y.len());
    for block in [y, x] {
        let mut remaining: BTreeSet<Variable> = block.clone();
        while !remaining.is_empty() {
            let pick = if h == Heuristic::Lexicographic {
                *remaining.first().expect("non-empty")
            } else {
                let mut best = usize::MAX;
                let mut tied = Vec::new();
                for &v in &remaining {
                    let c = cost(&graph, v, h);
                    if c < best {
                        best = c;
                        tied.clear();
                    }
                    if c == best {
                        tied.push(v);
                    }
                }
                match rng.as_mut() {
                    Some(rng) => *tied.choose(rng).expect("non-empty"),
                    None => tied[0],
                }
            };
            remaining.remove(&pick);
            eliminate(&mut graph, pick);
            order.push(pick);
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{fixtures::example, primal_graph};
    use crate::planner::fixtures::set;

    fn ids(order: &[Variable]) -> Vec<u32> {
        order.iter().map(|v| v.id()).collect()
    }

    #[test]
    fn example_min_degree_is_blockwise() {
        let p = example();
        let order = elimination_order(&primal_graph(&p), &p.exist, &set(&[2, 4, 6]), Heuristic::MinDegree, None);
        let (ys, xs) = order.split_at(3);
        assert_eq!(ys.iter().copied().collect::<BTreeSet<_>>(), set(&[2, 4, 6]));
        assert_eq!(xs.iter().copied().collect::<BTreeSet<_>>(), set(&[1, 3, 5]));
    }

    #[test]
    fn single_isolated_variable() {
        let order = elimination_order(&Graph::default(), &set(&[1]), &BTreeSet::new(), Heuristic::MinFill, None);
        assert_eq!(ids(&order), vec![1]);
    }

    #[test]
    fn lexicographic() {
        let p = example();
        let order = elimination_order(&primal_graph(&p), &p.exist, &set(&[2, 4, 6]), Heuristic::Lexicographic, Some(7));
        assert_eq!(ids(&order), vec![2, 4, 6, 1, 3, 5]);
    }

    #[test]
    fn min_fill_prefers_simplicial() {
        // Star centred at 1 plus a triangle 2-3-4: eliminating the centre of
        // the star would add fill, leaves do not.
        let mut g = Graph::default();
        for (a, b) in [(1, 5), (1, 6), (1, 7), (2, 3), (3, 4), (2, 4)] {
            g.add_edge(Variable::new(a), Variable::new(b));
        }
        let all = set(&[1, 2, 3, 4, 5, 6, 7]);
        let order = elimination_order(&g, &all, &BTreeSet::new(), Heuristic::MinFill, None);
        assert_eq!(order[0], Variable::new(2));
        let order = elimination_order(&g, &all, &BTreeSet::new(), Heuristic::MinDegree, None);
        assert_eq!(order[0], Variable::new(5));
    }

    #[test]
    fn seeded_ties_are_deterministic() {
        let p = example();
        let g = primal_graph(&p);
        let y = set(&[2, 4, 6]);
        let a = elimination_order(&g, &p.exist, &y, Heuristic::MinFill, Some(3));
        let b = elimination_order(&g, &p.exist, &y, Heuristic::MinFill, Some(3));
        assert_eq!(a, b);
    }

    #[test]
    fn parse_names() {
        for h in Heuristic::ALL {
            assert_eq!(h.name().parse::<Heuristic>().unwrap(), h);
        }
        assert!("bogus".parse::<Heuristic>().is_err());
    }
}
