use std::collections::{BTreeMap, BTreeSet};

use super::{elimination_order, Grade, Heuristic, NodeId, PjNode, PjTree, PlanError};
use crate::formula::{primal_graph, Problem, Variable};
use crate::pbf::VarOrder;

struct Pending {
    node: NodeId,
    /// `vars(node)`: variables still to be projected above it.
    vars: BTreeSet<Variable>,
}

fn check_order(p: &Problem, order: &[Variable]) -> Result<BTreeMap<Variable, usize>, PlanError> {
    let quantified = p.quantified();
    let mut pos = BTreeMap::new();
    for (i, &v) in order.iter().enumerate() {
        if !quantified.contains(&v) {
            return Err(PlanError::NotPermutation(format!("{v} is not quantified")));
        }
        if pos.insert(v, i).is_some() {
            return Err(PlanError::NotPermutation(format!("{v} appears twice")));
        }
    }
    if let Some(missing) = quantified.iter().find(|v| !pos.contains_key(v)) {
        return Err(PlanError::NotPermutation(format!("{missing} is missing")));
    }
    if let Some(first_x) = order.iter().position(|v| p.is_exist(*v)) {
        if let Some(&y) = order[first_x..].iter().find(|v| !p.is_exist(**v)) {
            return Err(PlanError::BlockOrder {
                exist: order[first_x],
                random: y,
            });
        }
    }
    Ok(pos)
}

/// Bucket elimination along `order` (all randomized variables first).
///
/// Every clause starts as a leaf in the bucket of its earliest variable.
/// Eliminating `x` joins the bucket's trees under a new node projecting `x`;
/// if the bucket holds a single internal node of the same grade, `x` is added
/// to that node instead. The resulting tree moves to the bucket of its
/// earliest remaining variable. Finished trees are joined under a grade-X
/// root with empty `π`. Variables that occur in no clause are not placed in
/// the tree.
pub fn build_graded_tree(p: &Problem, order: &[Variable]) -> Result<PjTree, PlanError> {
    let pos = check_order(p, order)?;
    let mut nodes: Vec<PjNode> = Vec::new();
    let mut buckets: Vec<Vec<Pending>> = (0..order.len()).map(|_| Vec::new()).collect();
    let mut finished: Vec<Pending> = Vec::new();

    let place = |pending: Pending, buckets: &mut Vec<Vec<Pending>>, finished: &mut Vec<Pending>| {
        match pending.vars.iter().map(|v| pos[v]).min() {
            Some(i) => buckets[i].push(pending),
            None => finished.push(pending),
        }
    };

    for (ci, clause) in p.clauses.iter().enumerate() {
        nodes.push(PjNode::Leaf { clause: ci });
        let pending = Pending {
            node: ci,
            vars: clause.vars().collect(),
        };
        place(pending, &mut buckets, &mut finished);
    }

    for (i, &x) in order.iter().enumerate() {
        let bucket = std::mem::take(&mut buckets[i]);
        if bucket.is_empty() {
            continue;
        }
        let grade = if p.is_exist(x) { Grade::Exist } else { Grade::Random };
        let mergeable = match bucket.as_slice() {
            [only] => matches!(&nodes[only.node], PjNode::Internal { grade: g, .. } if *g == grade),
            _ => false,
        };
        let pending = if mergeable {
            let mut only = bucket.into_iter().next().expect("one tree");
            if let PjNode::Internal { projected, .. } = &mut nodes[only.node] {
                projected.insert(x);
            }
            only.vars.remove(&x);
            only
        } else {
            let mut vars = BTreeSet::new();
            let mut children = Vec::with_capacity(bucket.len());
            for b in bucket {
                vars.extend(b.vars);
                children.push(b.node);
            }
            vars.remove(&x);
            nodes.push(PjNode::Internal {
                children,
                projected: BTreeSet::from([x]),
                grade,
            });
            Pending {
                node: nodes.len() - 1,
                vars,
            }
        };
        place(pending, &mut buckets, &mut finished);
    }

    let root = match finished.as_slice() {
        [only] if !nodes[only.node].is_leaf() => only.node,
        _ => {
            nodes.push(PjNode::Internal {
                children: finished.iter().map(|f| f.node).collect(),
                projected: BTreeSet::new(),
                grade: Grade::Exist,
            });
            nodes.len() - 1
        }
    };
    Ok(PjTree { nodes, root })
}

/// Primal graph → blockwise elimination order → graded tree.
pub fn plan(p: &Problem, h: Heuristic, tie_seed: Option<u64>) -> Result<PjTree, PlanError> {
    let y: BTreeSet<Variable> = p.randomized().collect();
    let order = elimination_order(&primal_graph(p), &p.exist, &y, h, tie_seed);
    build_graded_tree(p, &order)
}

/// Diagram variable order for valuating `t`: variables in the order the
/// valuation projects them (so the next variable to project tends to sit at
/// the top of the diagram), followed by variables the tree never projects.
pub fn diagram_order(t: &PjTree, p: &Problem) -> VarOrder {
    let mut seen = BTreeSet::new();
    let mut vars = Vec::new();
    for id in t.post_order() {
        if let Some(projected) = t.projected(id) {
            for &v in projected {
                if seen.insert(v) {
                    vars.push(v);
                }
            }
        }
    }
    for v in p.quantified().into_iter().chain(p.clause_vars()) {
        if seen.insert(v) {
            vars.push(v);
        }
    }
    VarOrder::new(vars).expect("deduplicated")
}
