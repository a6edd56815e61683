use std::collections::{BTreeMap, BTreeSet};

use super::{Problem, Variable};

/// Undirected simple graph over variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    adj: BTreeMap<Variable, BTreeSet<Variable>>,
}

impl Graph {
    pub fn add_vertex(&mut self, v: Variable) {
        self.adj.entry(v).or_default();
    }

    pub fn add_edge(&mut self, u: Variable, v: Variable) {
        if u == v {
            return;
        }
        self.adj.entry(u).or_default().insert(v);
        self.adj.entry(v).or_default().insert(u);
    }

    pub fn remove_vertex(&mut self, v: Variable) {
        if let Some(ns) = self.adj.remove(&v) {
            for n in ns {
                if let Some(set) = self.adj.get_mut(&n) {
                    set.remove(&v);
                }
            }
        }
    }

    pub fn contains(&self, v: Variable) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn has_edge(&self, u: Variable, v: Variable) -> bool {
        self.adj.get(&u).is_some_and(|ns| ns.contains(&v))
    }

    pub fn neighbors(&self, v: Variable) -> impl Iterator<Item = Variable> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn degree(&self, v: Variable) -> usize {
        self.adj.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Variable> + '_ {
        self.adj.keys().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    /// Each edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (Variable, Variable)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }
}

/// Vertices are all quantified variables; `u ~ v` iff they share a clause.
pub fn primal_graph(p: &Problem) -> Graph {
    let mut g = Graph::default();
    for v in p.quantified() {
        g.add_vertex(v);
    }
    for clause in &p.clauses {
        let vars: Vec<Variable> = clause.vars().collect();
        for (i, &u) in vars.iter().enumerate() {
            for &v in &vars[i + 1..] {
                g.add_edge(u, v);
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::super::{fixtures, parse_problem};
    use super::*;

    fn ids(g: &Graph) -> Vec<(u32, u32)> {
        g.edges().map(|(u, v)| (u.id(), v.id())).collect()
    }

    #[test]
    fn example_edges() {
        let g = primal_graph(&fixtures::example());
        assert_eq!(g.num_vertices(), 6);
        assert_eq!(ids(&g), vec![(1, 6), (2, 4), (3, 5)]);
    }

    #[test]
    fn empty_formula() {
        let g = primal_graph(&parse_problem("p cnf 0 0\n").unwrap());
        assert_eq!(g.num_vertices(), 0);
    }

    #[test]
    fn unit_clause() {
        let g = primal_graph(&parse_problem("p cnf 1 1\ne 1 0\n1 0\n").unwrap());
        assert_eq!(g.num_vertices(), 1);
        assert!(ids(&g).is_empty());
    }
}
