//! Planning: graded project-join trees.
//!
//! A project-join tree has one leaf per clause and labels every internal node
//! with the set of variables projected there. It is `(X, Y)`-graded when every
//! internal node projects only existential (grade X) or only randomized
//! (grade Y) variables and no grade-X node sits below a grade-Y node. Such a
//! tree can be valuated bottom-up with early projection even though `∃` and
//! `R` do not commute.
//!
//! Trees are built by eliminating every randomized variable before any
//! existential one ([`elimination_order`]), which makes the result graded by
//! construction ([`build_graded_tree`]).

mod build;
mod io;
mod order;

use std::collections::BTreeSet;
use std::fmt;

use crate::formula::{Problem, Variable};

pub use build::{build_graded_tree, diagram_order, plan};
pub use io::{read_tree, write_tree};
pub use order::{elimination_order, Heuristic};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Grade {
    Exist,
    Random,
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grade::Exist => "x",
            Grade::Random => "y",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PjNode {
    /// `γ(v)`: index into the problem's clause list.
    Leaf { clause: usize },
    Internal {
        children: Vec<NodeId>,
        /// `π(v)`.
        projected: BTreeSet<Variable>,
        grade: Grade,
    },
}

impl PjNode {
    pub fn children(&self) -> &[NodeId] {
        match self {
            PjNode::Leaf { .. } => &[],
            PjNode::Internal { children, .. } => children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, PjNode::Leaf { .. })
    }
}

/// A rooted project-join tree with its grades. Node ids index `nodes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PjTree {
    pub nodes: Vec<PjNode>,
    pub root: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeViolation {
    #[error("root {0} does not exist")]
    MissingRoot(NodeId),
    #[error("root {0} is a leaf")]
    LeafRoot(NodeId),
    #[error("node {node} lists unknown child {child}")]
    UnknownChild { node: NodeId, child: NodeId },
    #[error("node {0} is reached more than once (shared child or cycle)")]
    Revisited(NodeId),
    #[error("node {0} is not reachable from the root")]
    Unreachable(NodeId),
    #[error("internal node {0} has no children")]
    Childless(NodeId),
    #[error("leaf {leaf} refers to clause {clause}, which does not exist")]
    UnknownClause { leaf: NodeId, clause: usize },
    #[error("clause {clause} is the image of leaves {leaves:?}")]
    SharedClause { clause: usize, leaves: Vec<NodeId> },
    #[error("clause {0} has no leaf")]
    MissingClause(usize),
    #[error("variable {var} is projected at nodes {nodes:?}")]
    ProjectedTwice { var: Variable, nodes: Vec<NodeId> },
    #[error("variable {0} occurs in the formula but is never projected")]
    NeverProjected(Variable),
    #[error("node {node} projects {var}, which does not occur in the formula")]
    ForeignVariable { node: NodeId, var: Variable },
    #[error("node {node} projects {var} but the leaf {leaf} of clause {clause} is not below it")]
    NotDescendant {
        node: NodeId,
        var: Variable,
        clause: usize,
        leaf: NodeId,
    },
}

/// A broken gradedness property; `property` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("gradedness property {property} fails at nodes {nodes:?}")]
pub struct GradeViolation {
    pub property: u8,
    pub nodes: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("elimination order puts randomized {random} after existential {exist}")]
    BlockOrder { exist: Variable, random: Variable },
    #[error("elimination order is not a permutation of the quantified variables ({0})")]
    NotPermutation(String),
    #[error("invalid project-join tree: {}", join(.0))]
    InvalidTree(Vec<TreeViolation>),
    #[error("tree is not graded: {}", join(.0))]
    NotGraded(Vec<GradeViolation>),
    #[error("tree file line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl PjTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &PjNode {
        &self.nodes[id]
    }

    pub fn projected(&self, id: NodeId) -> Option<&BTreeSet<Variable>> {
        match &self.nodes[id] {
            PjNode::Internal { projected, .. } => Some(projected),
            PjNode::Leaf { .. } => None,
        }
    }

    pub fn grade(&self, id: NodeId) -> Option<Grade> {
        match &self.nodes[id] {
            PjNode::Internal { grade, .. } => Some(*grade),
            PjNode::Leaf { .. } => None,
        }
    }

    /// `(I_X, I_Y)`.
    pub fn grades(&self) -> (BTreeSet<NodeId>, BTreeSet<NodeId>) {
        let mut ix = BTreeSet::new();
        let mut iy = BTreeSet::new();
        for (id, node) in self.nodes.iter().enumerate() {
            match node {
                PjNode::Internal { grade: Grade::Exist, .. } => {
                    ix.insert(id);
                }
                PjNode::Internal { grade: Grade::Random, .. } => {
                    iy.insert(id);
                }
                PjNode::Leaf { .. } => {}
            }
        }
        (ix, iy)
    }

    /// Nodes reachable from the root, children before parents. Assumes a
    /// structurally valid tree (see [`check_tree`]).
    pub fn post_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
                continue;
            }
            stack.push((id, true));
            for &c in self.nodes[id].children().iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }

    /// Parent of every node; `None` for the root and unreachable nodes.
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parent = vec![None; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            for &c in node.children() {
                if c < parent.len() {
                    parent[c] = Some(id);
                }
            }
        }
        parent
    }

    /// Clause indices under each node.
    pub fn clauses_below(&self) -> Vec<BTreeSet<usize>> {
        let mut below = vec![BTreeSet::new(); self.nodes.len()];
        for id in self.post_order() {
            match &self.nodes[id] {
                PjNode::Leaf { clause } => {
                    below[id].insert(*clause);
                }
                PjNode::Internal { children, .. } => {
                    let mut acc = BTreeSet::new();
                    for &c in children {
                        acc.extend(below[c].iter().copied());
                    }
                    below[id] = acc;
                }
            }
        }
        below
    }

    /// `Π(v)`: union of `π` over the subtree of each node.
    pub fn projected_below(&self) -> Vec<BTreeSet<Variable>> {
        let mut below = vec![BTreeSet::new(); self.nodes.len()];
        for id in self.post_order() {
            if let PjNode::Internal {
                children,
                projected,
                ..
            } = &self.nodes[id]
            {
                let mut acc = projected.clone();
                for &c in children {
                    acc.extend(below[c].iter().copied());
                }
                below[id] = acc;
            }
        }
        below
    }

    /// `vars(v)` for every reachable node.
    pub fn node_vars(&self, p: &Problem) -> Vec<BTreeSet<Variable>> {
        let mut vars = vec![BTreeSet::new(); self.nodes.len()];
        for id in self.post_order() {
            vars[id] = match &self.nodes[id] {
                PjNode::Leaf { clause } => p.clauses[*clause].vars().collect(),
                PjNode::Internal {
                    children,
                    projected,
                    ..
                } => {
                    let mut acc: BTreeSet<Variable> = BTreeSet::new();
                    for &c in children {
                        acc.extend(vars[c].iter().copied());
                    }
                    acc.retain(|v| !projected.contains(v));
                    acc
                }
            };
        }
        vars
    }

    /// Runs [`check_tree`] and [`check_graded`] against `p`.
    pub fn validate(&self, p: &Problem) -> Result<(), PlanError> {
        check_tree(self, p)?;
        let y: BTreeSet<Variable> = p.randomized().collect();
        check_graded(self, &p.exist, &y)
    }
}

fn check_structure(t: &PjTree, num_clauses: usize) -> Vec<TreeViolation> {
    let mut out = Vec::new();
    let n = t.nodes.len();
    if t.root >= n {
        out.push(TreeViolation::MissingRoot(t.root));
        return out;
    }
    if t.nodes[t.root].is_leaf() {
        out.push(TreeViolation::LeafRoot(t.root));
    }
    let mut seen = vec![false; n];
    let mut stack = vec![t.root];
    while let Some(id) = stack.pop() {
        if seen[id] {
            out.push(TreeViolation::Revisited(id));
            continue;
        }
        seen[id] = true;
        for &c in t.nodes[id].children() {
            if c >= n {
                out.push(TreeViolation::UnknownChild { node: id, child: c });
            } else {
                stack.push(c);
            }
        }
    }
    for (id, &s) in seen.iter().enumerate() {
        if !s {
            out.push(TreeViolation::Unreachable(id));
        }
    }
    let mut leaves_of = vec![Vec::new(); num_clauses];
    for (id, node) in t.nodes.iter().enumerate() {
        match node {
            PjNode::Leaf { clause } if *clause >= num_clauses => {
                out.push(TreeViolation::UnknownClause {
                    leaf: id,
                    clause: *clause,
                });
            }
            PjNode::Leaf { clause } => leaves_of[*clause].push(id),
            PjNode::Internal { children, .. } if children.is_empty() && id != t.root => {
                out.push(TreeViolation::Childless(id));
            }
            PjNode::Internal { .. } => {}
        }
    }
    for (clause, leaves) in leaves_of.into_iter().enumerate() {
        match leaves.len() {
            0 => out.push(TreeViolation::MissingClause(clause)),
            1 => {}
            _ => out.push(TreeViolation::SharedClause { clause, leaves }),
        }
    }
    out
}

/// Checks that `t` is a project-join tree for `p`: a rooted tree whose
/// leaves are in bijection with the clauses, whose `π` sets partition the
/// formula's variables, and where every variable is projected above all
/// clauses that mention it.
pub fn check_tree(t: &PjTree, p: &Problem) -> Result<(), PlanError> {
    let mut out = check_structure(t, p.clauses.len());
    if !out.is_empty() {
        return Err(PlanError::InvalidTree(out));
    }
    let formula_vars = p.clause_vars();
    let mut where_projected: std::collections::BTreeMap<Variable, Vec<NodeId>> = Default::default();
    for (id, node) in t.nodes.iter().enumerate() {
        if let PjNode::Internal { projected, .. } = node {
            for &v in projected {
                where_projected.entry(v).or_default().push(id);
                if !formula_vars.contains(&v) {
                    out.push(TreeViolation::ForeignVariable { node: id, var: v });
                }
            }
        }
    }
    for &v in &formula_vars {
        match where_projected.get(&v).map(Vec::as_slice) {
            None => out.push(TreeViolation::NeverProjected(v)),
            Some([_]) => {}
            Some(nodes) => out.push(TreeViolation::ProjectedTwice {
                var: v,
                nodes: nodes.to_vec(),
            }),
        }
    }
    let below = t.clauses_below();
    let mut leaf_of = vec![0; p.clauses.len()];
    for (id, node) in t.nodes.iter().enumerate() {
        if let PjNode::Leaf { clause } = node {
            leaf_of[*clause] = id;
        }
    }
    for (id, node) in t.nodes.iter().enumerate() {
        let PjNode::Internal { projected, .. } = node else {
            continue;
        };
        for &v in projected {
            for (ci, clause) in p.clauses.iter().enumerate() {
                if clause.vars().any(|u| u == v) && !below[id].contains(&ci) {
                    out.push(TreeViolation::NotDescendant {
                        node: id,
                        var: v,
                        clause: ci,
                        leaf: leaf_of[ci],
                    });
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(PlanError::InvalidTree(out))
    }
}

/// Checks the gradedness properties of a project-join tree:
/// 1. grades partition the internal nodes (structural here: every internal
///    node carries exactly one grade);
/// 2. grade-X nodes project only `x`-variables;
/// 3. grade-Y nodes project only `y`-variables;
/// 4. no grade-X node is a descendant of a grade-Y node.
pub fn check_graded(
    t: &PjTree,
    x: &BTreeSet<Variable>,
    y: &BTreeSet<Variable>,
) -> Result<(), PlanError> {
    let mut p2 = Vec::new();
    let mut p3 = Vec::new();
    for (id, node) in t.nodes.iter().enumerate() {
        if let PjNode::Internal {
            projected, grade, ..
        } = node
        {
            match grade {
                Grade::Exist if !projected.is_subset(x) => p2.push(id),
                Grade::Random if !projected.is_subset(y) => p3.push(id),
                _ => {}
            }
        }
    }
    let mut p4 = BTreeSet::new();
    let mut stack: Vec<(NodeId, bool)> = vec![(t.root, false)];
    let mut seen = vec![false; t.nodes.len()];
    while let Some((id, under_y)) = stack.pop() {
        if id >= t.nodes.len() || std::mem::replace(&mut seen[id], true) {
            continue;
        }
        let under_y = match t.grade(id) {
            Some(Grade::Exist) if under_y => {
                p4.insert(id);
                true
            }
            Some(Grade::Random) => true,
            _ => under_y,
        };
        for &c in t.nodes[id].children() {
            stack.push((c, under_y));
        }
    }
    let mut out = Vec::new();
    for (property, nodes) in [(2, p2), (3, p3), (4, p4.into_iter().collect())] {
        if !nodes.is_empty() {
            out.push(GradeViolation { property, nodes });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(PlanError::NotGraded(out))
    }
}

/// Maximum over nodes of `|vars(v)|` (leaves) or `|vars(v) ∪ π(v)|`
/// (internal nodes).
pub fn width(t: &PjTree, p: &Problem) -> usize {
    let vars = t.node_vars(p);
    t.post_order()
        .into_iter()
        .map(|id| match &t.nodes[id] {
            PjNode::Leaf { .. } => vars[id].len(),
            PjNode::Internal { projected, .. } => vars[id].union(projected).count(),
        })
        .max()
        .unwrap_or(0)
}

/// Sibling pairs `(u1, u2)` where a variable projected in the subtree of
/// `u1` occurs in a clause under `u2`. Empty for every valid tree.
pub fn sibling_conflicts(t: &PjTree, p: &Problem) -> Vec<(NodeId, NodeId)> {
    let projected = t.projected_below();
    let clauses = t.clauses_below();
    let clause_vars: Vec<BTreeSet<Variable>> = clauses
        .iter()
        .map(|cs| cs.iter().flat_map(|&c| p.clauses[c].vars()).collect())
        .collect();
    let mut out = Vec::new();
    for node in &t.nodes {
        let children = node.children();
        for &a in children {
            for &b in children {
                if a != b && !projected[a].is_disjoint(&clause_vars[b]) {
                    out.push((a, b));
                }
            }
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::formula::fixtures::example;

    fn set_projected(t: &mut PjTree, id: NodeId, vars: &[u32]) {
        if let PjNode::Internal { projected, .. } = &mut t.nodes[id] {
            *projected = set(vars);
        }
    }

    fn set_grade(t: &mut PjTree, id: NodeId, g: Grade) {
        if let PjNode::Internal { grade, .. } = &mut t.nodes[id] {
            *grade = g;
        }
    }

    #[test]
    fn example_tree_is_valid_and_graded() {
        let t = example_tree();
        let p = example();
        check_tree(&t, &p).unwrap();
        check_graded(&t, &set(&[1, 3, 5]), &set(&[2, 4, 6])).unwrap();
        assert_eq!(t.grades(), ([7, 8, 9].into(), [5, 6].into()));
    }

    #[test]
    fn example_width_is_two() {
        assert_eq!(width(&example_tree(), &example()), 2);
    }

    #[test]
    fn repeated_projection() {
        let mut t = example_tree();
        set_projected(&mut t, 9, &[1]);
        let err = check_tree(&t, &example()).unwrap_err();
        let PlanError::InvalidTree(v) = err else { panic!() };
        assert!(v.contains(&TreeViolation::ProjectedTwice {
            var: Variable::new(1),
            nodes: vec![7, 9]
        }));
    }

    #[test]
    fn not_descendant() {
        let mut t = example_tree();
        set_projected(&mut t, 7, &[]);
        set_projected(&mut t, 8, &[1, 3, 5]);
        let PlanError::InvalidTree(v) = check_tree(&t, &example()).unwrap_err() else {
            panic!()
        };
        assert!(v.contains(&TreeViolation::NotDescendant {
            node: 8,
            var: Variable::new(1),
            clause: 2,
            leaf: 2
        }));
    }

    #[test]
    fn grade_property_two_and_three() {
        let mut t = example_tree();
        set_grade(&mut t, 7, Grade::Random);
        let err = check_graded(&t, &set(&[1, 3, 5]), &set(&[2, 4, 6])).unwrap_err();
        let PlanError::NotGraded(v) = err else { panic!() };
        assert_eq!(v[0], GradeViolation { property: 3, nodes: vec![7] });
        set_grade(&mut t, 5, Grade::Exist);
        let PlanError::NotGraded(v) =
            check_graded(&t, &set(&[1, 3, 5]), &set(&[2, 4, 6])).unwrap_err()
        else {
            panic!()
        };
        assert_eq!(v[0], GradeViolation { property: 2, nodes: vec![5] });
    }

    #[test]
    fn grade_property_four() {
        // x-grade n6 with empty π below a y-grade node.
        let mut nodes: Vec<PjNode> = (0..5).map(|c| PjNode::Leaf { clause: c }).collect();
        nodes.push(internal(&[0], &[], Grade::Exist)); // 5
        nodes.push(internal(&[5], &[2, 4], Grade::Random)); // 6
        nodes.push(internal(&[1], &[6], Grade::Random)); // 7
        nodes.push(internal(&[6, 7, 2], &[1], Grade::Exist)); // 8
        nodes.push(internal(&[3, 4], &[3, 5], Grade::Exist)); // 9
        nodes.push(internal(&[8, 9], &[], Grade::Exist)); // 10
        let t = PjTree { nodes, root: 10 };
        check_tree(&t, &example()).unwrap();
        let err = check_graded(&t, &set(&[1, 3, 5]), &set(&[2, 4, 6])).unwrap_err();
        assert_eq!(
            err,
            PlanError::NotGraded(vec![GradeViolation { property: 4, nodes: vec![5] }])
        );
    }

    #[test]
    fn structural_violations() {
        let mut t = example_tree();
        if let PjNode::Internal { children, .. } = &mut t.nodes[9] {
            children.push(0);
        }
        let PlanError::InvalidTree(v) = check_tree(&t, &example()).unwrap_err() else {
            panic!()
        };
        assert!(v.contains(&TreeViolation::Revisited(0)));

        let mut t = example_tree();
        t.nodes[4] = PjNode::Leaf { clause: 3 };
        let PlanError::InvalidTree(v) = check_tree(&t, &example()).unwrap_err() else {
            panic!()
        };
        assert!(v.contains(&TreeViolation::MissingClause(4)));
        assert!(v.contains(&TreeViolation::SharedClause { clause: 3, leaves: vec![3, 4] }));
    }

    #[test]
    fn example_siblings_are_disjoint() {
        assert!(sibling_conflicts(&example_tree(), &example()).is_empty());
    }
}
