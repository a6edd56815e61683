//! Valuation of graded project-join trees and maximizer extraction.

mod checked;

use std::time::Instant;

use crate::formula::{Problem, Variable};
use crate::pbf::{Assignment, DsgnFunc, Limits, PbFunc, PbfError, Store, VarOrder};
use crate::planner::{diagram_order, width, Grade, NodeId, PjNode, PjTree, PlanError};

pub use checked::{solve_with_assertions, AssertPoint, AssertionFailure, DEFAULT_CHECKED_CAP};

/// Variable cap for [`solve_monolithic`] unless overridden.
pub const DEFAULT_MONOLITHIC_CAP: usize = 25;

/// Operation caches are dropped between tree nodes once they hold this many
/// entries.
const CACHE_FLUSH: usize = 1 << 22;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub width: usize,
    pub tree_nodes: usize,
    /// Largest node count of any intermediate diagram.
    pub peak_diagram_nodes: usize,
    /// Largest support of any intermediate diagram.
    pub max_support: usize,
    /// Nodes created in the store over the whole solve.
    pub store_nodes: usize,
    pub dsgn_entries: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub maximum: f64,
    /// Every existential variable is assigned; variables that occur in no
    /// clause are set to 0.
    pub maximizer: Assignment,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("invalid tree: {0}")]
    InvalidTree(#[from] PlanError),
    #[error("{vars} variables exceed the cap of {cap}")]
    TooLarge { vars: usize, cap: usize },
    #[error("{var} is projected at node {node} whose grade does not match its quantifier")]
    GradeMismatch { node: NodeId, var: Variable },
    /// Node limit or cancellation hit mid-solve.
    #[error("{cause}")]
    Aborted { cause: PbfError, stats: Box<SolveStats> },
    #[error(transparent)]
    Pbf(PbfError),
    #[error("assertion failed: {0}")]
    Assertion(Box<AssertionFailure>),
}

impl ExecError {
    fn from_pbf(e: PbfError, stats: &SolveStats) -> Self {
        match e {
            PbfError::NodeLimit(_) | PbfError::Cancelled => ExecError::Aborted {
                cause: e,
                stats: Box::new(stats.clone()),
            },
            other => ExecError::Pbf(other),
        }
    }
}

/// Bottom-up valuation of a tree, accumulating the dsgn stack `σ`.
///
/// The tree is assumed to be valid for the problem; use [`solve`] for the
/// checked entry point.
pub struct Valuator<'a> {
    problem: &'a Problem,
    tree: &'a PjTree,
    store: Store,
    stack: Vec<DsgnFunc>,
    stats: SolveStats,
}

enum Frame {
    Enter(NodeId),
    Exit(NodeId),
}

impl<'a> Valuator<'a> {
    pub fn new(problem: &'a Problem, tree: &'a PjTree, limits: Limits) -> Self {
        let order = diagram_order(tree, problem);
        Valuator {
            problem,
            tree,
            store: Store::with_limits(order, limits),
            stack: Vec::new(),
            stats: SolveStats {
                tree_nodes: tree.len(),
                ..SolveStats::default()
            },
        }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn stack(&self) -> &[DsgnFunc] {
        &self.stack
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    fn record(&mut self, f: PbFunc) {
        self.stats.peak_diagram_nodes = self.stats.peak_diagram_nodes.max(self.store.node_count(f));
        self.stats.max_support = self.stats.max_support.max(self.store.support(f).len());
    }

    /// Valuation of the subtree rooted at `v`. Grade-X projections push their
    /// dsgn functions onto the stack, in ascending variable order per node.
    pub fn valuate(&mut self, v: NodeId) -> Result<PbFunc, ExecError> {
        self.valuate_inner(v).map_err(|e| match e {
            Step::Pbf(e) => {
                self.stats.store_nodes = self.store.num_nodes();
                self.stats.dsgn_entries = self.stack.len();
                ExecError::from_pbf(e, &self.stats)
            }
            Step::Exec(e) => e,
        })
    }

    fn valuate_inner(&mut self, v: NodeId) -> Result<PbFunc, Step> {
        let tree = self.tree;
        let mut frames = vec![Frame::Enter(v)];
        let mut values: Vec<PbFunc> = Vec::new();
        while let Some(frame) = frames.pop() {
            match frame {
                Frame::Enter(id) => match tree.node(id) {
                    PjNode::Leaf { clause } => {
                        let f = self.store.clause_func(&self.problem.clauses[*clause])?;
                        self.record(f);
                        values.push(f);
                    }
                    PjNode::Internal { children, .. } => {
                        frames.push(Frame::Exit(id));
                        frames.extend(children.iter().rev().map(|&c| Frame::Enter(c)));
                    }
                },
                Frame::Exit(id) => {
                    let PjNode::Internal {
                        children,
                        projected,
                        grade,
                    } = tree.node(id)
                    else {
                        unreachable!("only internal nodes are exited")
                    };
                    let first = values.len() - children.len();
                    let mut f = self.store.one();
                    for h in values.drain(first..).collect::<Vec<_>>() {
                        f = self.store.join(f, h)?;
                    }
                    self.record(f);
                    for &x in projected {
                        f = match grade {
                            Grade::Exist => {
                                if !self.problem.is_exist(x) {
                                    return Err(Step::Exec(ExecError::GradeMismatch { node: id, var: x }));
                                }
                                self.stack.push(self.store.dsgn(f, x)?);
                                self.store.exists_project(f, x)?
                            }
                            Grade::Random => {
                                let p = self
                                    .problem
                                    .probability(x)
                                    .ok_or(Step::Exec(ExecError::GradeMismatch { node: id, var: x }))?;
                                self.store.rand_project(f, x, p)?
                            }
                        };
                        self.record(f);
                    }
                    values.push(f);
                    if self.store.cache_len() > CACHE_FLUSH {
                        self.store.clear_caches();
                    }
                }
            }
        }
        self.stats.store_nodes = self.store.num_nodes();
        self.stats.dsgn_entries = self.stack.len();
        Ok(values.pop().expect("one value per entered root"))
    }

    /// Pops the dsgn stack into a maximizer; existential variables the stack
    /// never mentions are set to 0.
    pub fn extract_maximizer(&mut self) -> Result<Assignment, ExecError> {
        let mut tau = Assignment::new();
        while let Some(d) = self.stack.pop() {
            let value = d.choose(&self.store, &tau).map_err(ExecError::Pbf)?;
            tau.set(d.var, value);
        }
        for &x in &self.problem.exist {
            if !tau.contains(x) {
                tau.set(x, false);
            }
        }
        Ok(tau)
    }
}

pub(crate) enum Step {
    Pbf(PbfError),
    Exec(ExecError),
}

impl From<PbfError> for Step {
    fn from(e: PbfError) -> Self {
        Step::Pbf(e)
    }
}

/// Validates `t` against `p`, valuates it and extracts a maximizer.
pub fn solve(p: &Problem, t: &PjTree, limits: Limits) -> Result<SolveResult, ExecError> {
    let start = Instant::now();
    t.validate(p)?;
    let mut valuator = Valuator::new(p, t, limits);
    valuator.stats.width = width(t, p);
    let root = valuator.valuate(t.root)?;
    let maximum = valuator
        .store
        .constant_value(root)
        .expect("a valid tree projects every variable");
    let maximizer = valuator.extract_maximizer()?;
    let mut stats = valuator.stats;
    stats.seconds = start.elapsed().as_secs_f64();
    Ok(SolveResult {
        maximum,
        maximizer,
        stats,
    })
}

/// Reference solve on a single diagram: join every clause, project the
/// randomized variables, then eliminate the existential variables in
/// descending id order while recording dsgn functions.
pub fn solve_monolithic(p: &Problem, limits: Limits, cap: usize) -> Result<SolveResult, ExecError> {
    let start = Instant::now();
    let quantified = p.quantified();
    if quantified.len() > cap {
        return Err(ExecError::TooLarge {
            vars: quantified.len(),
            cap,
        });
    }
    let clause_vars = p.clause_vars();
    let order = VarOrder::ascending(quantified.iter().copied().chain(clause_vars.iter().copied()));
    let mut store = Store::with_limits(order, limits);
    let mut stats = SolveStats {
        width: clause_vars.len(),
        ..SolveStats::default()
    };
    let record = |store: &Store, f: PbFunc, stats: &mut SolveStats| {
        stats.peak_diagram_nodes = stats.peak_diagram_nodes.max(store.node_count(f));
        stats.max_support = stats.max_support.max(store.support(f).len());
    };
    let run = |store: &mut Store, stats: &mut SolveStats| -> Result<(f64, Assignment), PbfError> {
        let mut f = store.one();
        for c in &p.clauses {
            let g = store.clause_func(c)?;
            f = store.join(f, g)?;
        }
        record(store, f, stats);
        for (&y, &q) in &p.random {
            f = store.rand_project(f, y, q)?;
        }
        record(store, f, stats);
        let xs: Vec<Variable> = p.exist.iter().copied().filter(|x| clause_vars.contains(x)).collect();
        let mut choosers = Vec::with_capacity(xs.len());
        for &x in xs.iter().rev() {
            choosers.push(store.dsgn(f, x)?);
            f = store.exists_project(f, x)?;
            record(store, f, stats);
        }
        let maximum = store.constant_value(f).expect("every variable projected");
        let mut tau = Assignment::new();
        for d in choosers.iter().rev() {
            let value = d.choose(store, &tau)?;
            tau.set(d.var, value);
        }
        for &x in &p.exist {
            if !tau.contains(x) {
                tau.set(x, false);
            }
        }
        stats.dsgn_entries = choosers.len();
        Ok((maximum, tau))
    };
    let outcome = run(&mut store, &mut stats);
    stats.store_nodes = store.num_nodes();
    stats.seconds = start.elapsed().as_secs_f64();
    let (maximum, maximizer) = outcome.map_err(|e| ExecError::from_pbf(e, &stats))?;
    Ok(SolveResult {
        maximum,
        maximizer,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::AtomicBool;
    use std::sync::Arc;

    use super::*;
    use crate::formula::{fixtures::example, parse_problem};
    use crate::planner::{fixtures::example_tree, plan, Heuristic};

    fn v(id: u32) -> Variable {
        Variable::new(id)
    }

    fn check_example_maximizer(tau: &Assignment) {
        assert_eq!(tau.get(v(1)), Some(true));
        assert_ne!(tau.get(v(3)), tau.get(v(5)));
        assert!(tau.get(v(3)).is_some());
        assert_eq!(tau.len(), 3);
    }

    #[test]
    fn example_hand_tree() {
        let r = solve(&example(), &example_tree(), Limits::default()).unwrap();
        assert_eq!(r.maximum, 0.75);
        check_example_maximizer(&r.maximizer);
        assert_eq!(r.stats.width, 2);
        assert!(r.stats.max_support <= 2);
        assert_eq!(r.stats.dsgn_entries, 3);
    }

    #[test]
    fn example_planned_trees() {
        let p = example();
        for h in Heuristic::ALL {
            let t = plan(&p, h, None).unwrap();
            let r = solve(&p, &t, Limits::default()).unwrap();
            assert_eq!(r.maximum, 0.75, "{h}");
            check_example_maximizer(&r.maximizer);
        }
    }

    #[test]
    fn example_intermediate_valuations() {
        let p = example();
        let t = example_tree();
        // n9 = node 8: clauses z3∨z5 and ¬z3∨¬z5 with z3, z5 maximized.
        let mut val = Valuator::new(&p, &t, Limits::default());
        let f = val.valuate(8).unwrap();
        assert_eq!(val.store().constant_value(f), Some(1.0));
        assert_eq!(val.stack().len(), 2);
        // n6 = node 5: R_{z2,z4} of z2∨¬z4.
        let mut val = Valuator::new(&p, &t, Limits::default());
        let f = val.valuate(5).unwrap();
        assert_eq!(val.store().constant_value(f), Some(0.75));
        assert!(val.stack().is_empty());
        // n7 = node 6: R_{z6} of z1∨z6 is 0.5 + 0.5·[z1].
        let mut val = Valuator::new(&p, &t, Limits::default());
        let f = val.valuate(6).unwrap();
        let one = Assignment::new().with(v(1), true);
        let zero = Assignment::new().with(v(1), false);
        assert_eq!(val.store().evaluate(f, &one).unwrap(), 1.0);
        assert_eq!(val.store().evaluate(f, &zero).unwrap(), 0.5);
    }

    #[test]
    fn monolithic_agrees_on_example() {
        let r = solve_monolithic(&example(), Limits::default(), DEFAULT_MONOLITHIC_CAP).unwrap();
        assert_eq!(r.maximum, 0.75);
        check_example_maximizer(&r.maximizer);
    }

    #[test]
    fn empty_formula() {
        let p = parse_problem("p cnf 2 0\ne 1 0\nr 0.3 2 0\n").unwrap();
        let t = plan(&p, Heuristic::MinFill, None).unwrap();
        let r = solve(&p, &t, Limits::default()).unwrap();
        assert_eq!(r.maximum, 1.0);
        assert_eq!(r.maximizer, Assignment::new().with(v(1), false));
        let r = solve_monolithic(&p, Limits::default(), 4).unwrap();
        assert_eq!(r.maximum, 1.0);
        assert_eq!(r.maximizer, Assignment::new().with(v(1), false));
    }

    #[test]
    fn contradiction() {
        let p = parse_problem("p cnf 1 2\ne 1 0\n1 0\n-1 0\n").unwrap();
        let t = plan(&p, Heuristic::MinFill, None).unwrap();
        let r = solve(&p, &t, Limits::default()).unwrap();
        assert_eq!(r.maximum, 0.0);
        // Both cofactors are 0; the tie goes to 1.
        assert_eq!(r.maximizer, Assignment::new().with(v(1), true));
    }

    #[test]
    fn unused_existential_defaults_to_zero() {
        let p = parse_problem("p cnf 3 1\ne 1 3 0\nr 0.5 2 0\n1 2 0\n").unwrap();
        let t = plan(&p, Heuristic::MinFill, None).unwrap();
        let r = solve(&p, &t, Limits::default()).unwrap();
        assert_eq!(r.maximum, 1.0);
        assert_eq!(r.maximizer.get(v(1)), Some(true));
        assert_eq!(r.maximizer.get(v(3)), Some(false));
    }

    #[test]
    fn invalid_tree_rejected() {
        let p = example();
        let mut t = example_tree();
        t.root = 8;
        assert!(matches!(
            solve(&p, &t, Limits::default()),
            Err(ExecError::InvalidTree(_))
        ));
    }

    #[test]
    fn node_limit_reports_partial_stats() {
        let p = example();
        let limits = Limits {
            max_nodes: Some(4),
            cancel: None,
        };
        match solve(&p, &example_tree(), limits) {
            Err(ExecError::Aborted { cause, stats }) => {
                assert_eq!(cause, PbfError::NodeLimit(4));
                assert_eq!(stats.tree_nodes, 10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cancelled_before_start() {
        let flag = Arc::new(AtomicBool::new(true));
        let text = format!(
            "p cnf 16 1\ne {} 0\n{} 0\n",
            (1..=16).map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
            (1..=16).map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
        );
        let p = parse_problem(&text).unwrap();
        let t = plan(&p, Heuristic::MinFill, None).unwrap();
        let limits = Limits {
            max_nodes: None,
            cancel: Some(flag),
        };
        // Cancellation is polled, so small solves may still finish; either
        // outcome must be well formed.
        match solve(&p, &t, limits) {
            Ok(r) => assert_eq!(r.maximum, 1.0),
            Err(ExecError::Aborted { cause, .. }) => assert_eq!(cause, PbfError::Cancelled),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn monolithic_cap() {
        assert_eq!(
            solve_monolithic(&example(), Limits::default(), 5),
            Err(ExecError::TooLarge { vars: 6, cap: 5 })
        );
    }
}
