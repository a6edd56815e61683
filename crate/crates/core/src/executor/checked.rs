//! Valuation with every correctness invariant checked as it runs.
//!
//! Keeps the multiset `A` of active functions (initially one per clause) and
//! the set `E` of eliminated variables, and asserts
//! `⟨A⟩ = ∃_{E∩X} R_{E∩Y} ⟨φ⟩` before and after every node, after every join
//! loop and after every projection. A variable may only be projected once no
//! other active function depends on it. Every pushed dsgn function and every
//! popped maximizer step is checked against the fully projected formula. The
//! tree is deliberately not validated up front, so a corrupted tree surfaces
//! as an assertion failure.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use super::{ExecError, SolveResult, SolveStats, Step};
use crate::formula::{Problem, Variable};
use crate::pbf::{Assignment, DsgnFunc, Limits, Op, PbFunc, Store, VarOrder};
use crate::planner::{width, Grade, NodeId, PjNode, PjTree};

/// Variable cap for [`solve_with_assertions`] unless overridden.
pub const DEFAULT_CHECKED_CAP: usize = 16;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssertPoint {
    /// Malformed tree structure (bad ids, revisited nodes).
    Structure,
    Pre,
    Join,
    Project,
    Post,
    /// A dsgn function just pushed.
    Push,
    /// The root valuation and the empty maximizer.
    Root,
    /// A maximizer step just popped.
    Pop,
}

impl fmt::Display for AssertPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssertPoint::Structure => "structure",
            AssertPoint::Pre => "pre",
            AssertPoint::Join => "join",
            AssertPoint::Project => "project",
            AssertPoint::Post => "post",
            AssertPoint::Push => "push",
            AssertPoint::Root => "root",
            AssertPoint::Pop => "pop",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionFailure {
    pub point: AssertPoint,
    pub node: Option<NodeId>,
    pub var: Option<Variable>,
    pub detail: String,
}

impl fmt::Display for AssertionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.point)?;
        if let Some(n) = self.node {
            write!(f, " at node {n}")?;
        }
        if let Some(v) = self.var {
            write!(f, " for variable {v}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

fn fail(point: AssertPoint, node: Option<NodeId>, var: Option<Variable>, detail: impl Into<String>) -> Step {
    Step::Exec(ExecError::Assertion(Box::new(AssertionFailure {
        point,
        node,
        var,
        detail: detail.into(),
    })))
}

enum Frame {
    Enter(NodeId),
    Absorb(NodeId),
    Finish(NodeId),
}

struct Checker<'a> {
    p: &'a Problem,
    t: &'a PjTree,
    store: Store,
    phi: PbFunc,
    active: Vec<PbFunc>,
    eliminated: BTreeSet<Variable>,
    stack: Vec<DsgnFunc>,
    visited: Vec<bool>,
    stats: SolveStats,
}

impl Checker<'_> {
    fn record(&mut self, f: PbFunc) {
        self.stats.peak_diagram_nodes = self.stats.peak_diagram_nodes.max(self.store.node_count(f));
        self.stats.max_support = self.stats.max_support.max(self.store.support(f).len());
    }

    fn product(&mut self) -> Result<PbFunc, Step> {
        let mut f = self.store.one();
        for a in self.active.clone() {
            f = self.store.join(f, a)?;
        }
        Ok(f)
    }

    /// `∃_{e∩X} R_{e∩Y} ⟨φ⟩`.
    fn projected_phi(&mut self, e: &BTreeSet<Variable>) -> Result<PbFunc, Step> {
        let mut f = self.phi;
        for &y in e {
            if let Some(q) = self.p.probability(y) {
                f = self.store.rand_project(f, y, q)?;
            }
        }
        for &x in e {
            if self.p.is_exist(x) {
                f = self.store.exists_project(f, x)?;
            }
        }
        Ok(f)
    }

    fn invariant(&mut self, point: AssertPoint, node: NodeId, var: Option<Variable>) -> Result<(), Step> {
        let a = self.product()?;
        let e = self.eliminated.clone();
        let g = self.projected_phi(&e)?;
        let d = self.store.max_abs_diff(a, g)?;
        if d > TOL {
            return Err(fail(
                point,
                Some(node),
                var,
                format!("active product differs from the projected formula by {d:e}"),
            ));
        }
        Ok(())
    }

    fn in_range(&self, f: PbFunc, point: AssertPoint, node: NodeId, var: Option<Variable>) -> Result<(), Step> {
        let vals = self.store.terminal_values(f);
        let (lo, hi) = (vals[0], vals[vals.len() - 1]);
        if lo < -TOL || hi > 1.0 + TOL {
            return Err(fail(point, Some(node), var, format!("terminal outside [0, 1]: [{lo}, {hi}]")));
        }
        Ok(())
    }

    fn remove_active(&mut self, f: PbFunc, node: NodeId, var: Option<Variable>, what: &str) -> Result<(), Step> {
        let point = if var.is_some() { AssertPoint::Project } else { AssertPoint::Join };
        match self.active.iter().position(|&a| a == f) {
            Some(i) => {
                self.active.swap_remove(i);
                Ok(())
            }
            None => Err(fail(point, Some(node), var, format!("{what} is not an active function"))),
        }
    }

    fn max_value(&self, f: PbFunc) -> f64 {
        *self.store.terminal_values(f).last().expect("non-empty")
    }

    /// For every maximizer `τ` of `∃_x G`, `τ ∪ d(τ)` maximizes `G`, where
    /// `G = ∃_{E∩X} R_{E∩Y} ⟨φ⟩` with `x ∉ E`.
    fn push_condition(&mut self, node: NodeId, d: DsgnFunc) -> Result<(), Step> {
        let x = d.var;
        let e = self.eliminated.clone();
        let g = self.projected_phi(&e)?;
        let g_proj = self.store.exists_project(g, x)?;
        let g1 = self.store.cofactor(g, x, true)?;
        let g0 = self.store.cofactor(g, x, false)?;
        let half = self.store.constant(0.5)?;
        let not_chosen = self.store.apply(Op::Ge, half, d.chooser)?;
        let hi = self.store.join(d.chooser, g1)?;
        let lo = self.store.join(not_chosen, g0)?;
        let h = self.store.add(hi, lo)?;
        let best = self.max_value(g);
        let best_proj = self.max_value(g_proj);
        let bad = self.store.max_over_pairs(g_proj, h, |a, b| {
            if a >= best_proj - TOL && b < best - TOL {
                1.0
            } else {
                0.0
            }
        })?;
        if bad > 0.0 {
            return Err(fail(
                AssertPoint::Push,
                Some(node),
                Some(x),
                "extending a maximizer with the dsgn choice loses optimality",
            ));
        }
        Ok(())
    }

    /// `τ` maximizes `∃_{E∩X} R_{E∩Y} ⟨φ⟩`.
    fn maximizer_condition(&mut self, tau: &Assignment, var: Option<Variable>) -> Result<(), Step> {
        let point = if var.is_some() { AssertPoint::Pop } else { AssertPoint::Root };
        let e = self.eliminated.clone();
        let g = self.projected_phi(&e)?;
        let value = self
            .store
            .evaluate(g, tau)
            .map_err(|err| fail(point, None, var, format!("partial maximizer is incomplete: {err}")))?;
        let best = self.max_value(g);
        if value < best - TOL {
            return Err(fail(point, None, var, format!("partial maximizer attains {value}, maximum is {best}")));
        }
        Ok(())
    }

    fn node(&self, id: NodeId, parent: Option<NodeId>) -> Result<&PjNode, Step> {
        self.t
            .nodes
            .get(id)
            .ok_or_else(|| fail(AssertPoint::Structure, parent, None, format!("node {id} does not exist")))
    }

    fn valuate_root(&mut self) -> Result<PbFunc, Step> {
        let mut frames = vec![Frame::Enter(self.t.root)];
        let mut partial: Vec<PbFunc> = Vec::new();
        let mut ret: Option<PbFunc> = None;
        while let Some(frame) = frames.pop() {
            match frame {
                Frame::Enter(id) => {
                    let node = self.node(id, None)?.clone();
                    if std::mem::replace(&mut self.visited[id], true) {
                        return Err(fail(AssertPoint::Structure, Some(id), None, "node visited twice"));
                    }
                    self.invariant(AssertPoint::Pre, id, None)?;
                    match node {
                        PjNode::Leaf { clause } => {
                            let c = self.p.clauses.get(clause).ok_or_else(|| {
                                fail(AssertPoint::Structure, Some(id), None, format!("clause {clause} does not exist"))
                            })?;
                            let f = self.store.clause_func(c)?;
                            self.record(f);
                            self.invariant(AssertPoint::Post, id, None)?;
                            ret = Some(f);
                        }
                        PjNode::Internal { children, .. } => {
                            for &c in &children {
                                self.node(c, Some(id))?;
                            }
                            let f = self.store.one();
                            self.active.push(f);
                            partial.push(f);
                            frames.push(Frame::Finish(id));
                            for &c in children.iter().rev() {
                                frames.push(Frame::Absorb(id));
                                frames.push(Frame::Enter(c));
                            }
                        }
                    }
                }
                Frame::Absorb(id) => {
                    let h = ret.take().expect("child returned");
                    let prev = partial.pop().expect("open node");
                    let f = self.store.join(prev, h)?;
                    self.remove_active(h, id, None, "child valuation")?;
                    self.remove_active(prev, id, None, "partial join")?;
                    self.active.push(f);
                    self.record(f);
                    self.in_range(f, AssertPoint::Join, id, None)?;
                    partial.push(f);
                }
                Frame::Finish(id) => {
                    let mut f = partial.pop().expect("open node");
                    self.invariant(AssertPoint::Join, id, None)?;
                    let PjNode::Internal { projected, grade, .. } = self.node(id, None)?.clone() else {
                        unreachable!("only internal nodes are finished")
                    };
                    for x in projected {
                        let at = |detail: String| fail(AssertPoint::Project, Some(id), Some(x), detail);
                        if self.eliminated.contains(&x) {
                            return Err(at("variable already eliminated".into()));
                        }
                        let elsewhere = self.active.iter().filter(|&&a| a != f).any(|&a| self.store.support(a).contains(&x));
                        if elsewhere {
                            return Err(at("variable still occurs in another active function".into()));
                        }
                        let prev = f;
                        f = match (grade, self.p.is_exist(x), self.p.probability(x)) {
                            (Grade::Exist, true, _) => {
                                let d = self.store.dsgn(prev, x)?;
                                self.stack.push(d);
                                self.stats.dsgn_entries += 1;
                                self.push_condition(id, d)?;
                                self.store.exists_project(prev, x)?
                            }
                            (Grade::Random, _, Some(q)) => self.store.rand_project(prev, x, q)?,
                            _ => return Err(at(format!("variable does not match node grade {grade}"))),
                        };
                        self.eliminated.insert(x);
                        self.remove_active(prev, id, Some(x), "pre-projection valuation")?;
                        self.active.push(f);
                        self.record(f);
                        self.in_range(f, AssertPoint::Project, id, Some(x))?;
                        self.invariant(AssertPoint::Project, id, Some(x))?;
                    }
                    self.invariant(AssertPoint::Post, id, None)?;
                    ret = Some(f);
                }
            }
        }
        Ok(ret.expect("root returned"))
    }

    fn run(&mut self) -> Result<(f64, Assignment), Step> {
        if self.t.root >= self.t.nodes.len() {
            return Err(fail(AssertPoint::Structure, None, None, format!("root {} does not exist", self.t.root)));
        }
        let root = self.valuate_root()?;
        let root_fail = |detail: &str| fail(AssertPoint::Root, Some(self.t.root), None, detail);
        if self.active != [root] {
            return Err(root_fail("functions other than the root valuation remain active"));
        }
        if self.eliminated != self.p.clause_vars() {
            return Err(root_fail("eliminated variables differ from the formula's variables"));
        }
        let maximum = self
            .store
            .constant_value(root)
            .ok_or_else(|| root_fail("root valuation is not constant"))?;
        let mut tau = Assignment::new();
        self.maximizer_condition(&tau, None)?;
        while let Some(d) = self.stack.pop() {
            let x = d.var;
            let at = |detail: String| fail(AssertPoint::Pop, None, Some(x), detail);
            if tau.contains(x) {
                return Err(at("variable already assigned".into()));
            }
            if !self.eliminated.remove(&x) {
                return Err(at("variable is not eliminated".into()));
            }
            let value = d
                .choose(&self.store, &tau)
                .map_err(|err| at(format!("dsgn function cannot be evaluated: {err}")))?;
            tau.set(x, value);
            self.maximizer_condition(&tau, Some(x))?;
        }
        if let Some(&x) = self.eliminated.iter().find(|&&v| self.p.is_exist(v)) {
            return Err(fail(AssertPoint::Pop, None, Some(x), "existential variable never assigned"));
        }
        for &x in &self.p.exist {
            if !tau.contains(x) {
                tau.set(x, false);
            }
        }
        Ok((maximum, tau))
    }
}

/// Same contract as [`super::solve`], with every invariant asserted. The
/// problem may have at most `cap` quantified variables, because the
/// invariants materialize the fully joined formula.
pub fn solve_with_assertions(p: &Problem, t: &PjTree, limits: Limits, cap: usize) -> Result<SolveResult, ExecError> {
    let start = Instant::now();
    let quantified = p.quantified();
    if quantified.len() > cap {
        return Err(ExecError::TooLarge {
            vars: quantified.len(),
            cap,
        });
    }
    let order = VarOrder::ascending(quantified.into_iter().chain(p.clause_vars()));
    let mut store = Store::with_limits(order, limits);
    let mut stats = SolveStats {
        tree_nodes: t.len(),
        width: if t.validate(p).is_ok() { width(t, p) } else { 0 },
        ..SolveStats::default()
    };
    let setup = (|| {
        let mut active = Vec::with_capacity(p.clauses.len());
        let mut phi = store.one();
        for c in &p.clauses {
            let f = store.clause_func(c)?;
            active.push(f);
            phi = store.join(phi, f)?;
        }
        Ok((active, phi))
    })();
    let (active, phi) = setup.map_err(|e| ExecError::from_pbf(e, &stats))?;
    let mut checker = Checker {
        p,
        t,
        store,
        phi,
        active,
        eliminated: BTreeSet::new(),
        stack: Vec::new(),
        visited: vec![false; t.len()],
        stats: std::mem::take(&mut stats),
    };
    let outcome = checker.run();
    let mut stats = checker.stats;
    stats.store_nodes = checker.store.num_nodes();
    stats.seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok((maximum, maximizer)) => Ok(SolveResult {
                maximum,
                maximizer,
                stats,
            }),
        Err(Step::Exec(e)) => Err(e),
        Err(Step::Pbf(e)) => Err(ExecError::from_pbf(e, &stats)),
    }
}
