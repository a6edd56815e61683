use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use super::{Assignment, DsgnFunc, PbFunc, PbfError, Result, VarOrder};
use crate::formula::{Clause, Variable};

static NEXT_STORE_ID: AtomicU32 = AtomicU32::new(1);

/// Level of terminal nodes; below every variable.
const TERMINAL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    level: u32,
    lo: u32,
    hi: u32,
    /// Only meaningful for terminals.
    value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Op {
    Mul,
    Max,
    Add,
    /// 1 where the first operand is at least the second, else 0.
    Ge,
    /// `p·second + (1-p)·first`, with `p` stored as raw bits.
    Convex(u64),
}

impl Op {
    fn commutative(self) -> bool {
        matches!(self, Op::Mul | Op::Max | Op::Add)
    }

    fn eval(self, a: f64, b: f64) -> f64 {
        match self {
            Op::Mul => a * b,
            Op::Max => a.max(b),
            Op::Add => a + b,
            Op::Ge => {
                if a >= b {
                    1.0
                } else {
                    0.0
                }
            }
            Op::Convex(bits) => {
                let p = f64::from_bits(bits);
                p * b + (1.0 - p) * a
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Unary {
    Exists(u32),
    Random(u32, u64),
    Dsgn(u32),
}

/// Resource bounds checked while diagrams are built.
#[derive(Debug, Clone, Default)]
pub struct Limits {
    /// Maximum number of stored nodes.
    pub max_nodes: Option<usize>,
    /// Polled during operations; when set, operations fail with
    /// [`PbfError::Cancelled`].
    pub cancel: Option<Arc<AtomicBool>>,
}

/// Hash-consed node store for one solve.
pub struct Store {
    id: u32,
    order: VarOrder,
    nodes: Vec<Node>,
    unique: FxHashMap<(u32, u32, u32), u32>,
    terminals: FxHashMap<u64, u32>,
    apply_cache: FxHashMap<(Op, u32, u32), u32>,
    unary_cache: FxHashMap<(Unary, u32), u32>,
    limits: Limits,
    ticks: u64,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("id", &self.id)
            .field("vars", &self.order.len())
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl Store {
    pub fn new(order: VarOrder) -> Self {
        Store::with_limits(order, Limits::default())
    }

    pub fn with_limits(order: VarOrder, limits: Limits) -> Self {
        let mut store = Store {
            id: NEXT_STORE_ID.fetch_add(1, Ordering::Relaxed),
            order,
            nodes: Vec::new(),
            unique: FxHashMap::default(),
            terminals: FxHashMap::default(),
            apply_cache: FxHashMap::default(),
            unary_cache: FxHashMap::default(),
            limits: Limits::default(),
            ticks: 0,
        };
        // 0 and 1 always exist so that `zero`/`one` never hit a limit.
        store.terminal(0.0).expect("no limits yet");
        store.terminal(1.0).expect("no limits yet");
        store.limits = limits;
        store
    }

    pub fn order(&self) -> &VarOrder {
        &self.order
    }

    /// Number of nodes ever created in this store.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Drops the memoization caches. Results are unaffected.
    pub fn clear_caches(&mut self) {
        self.apply_cache.clear();
        self.unary_cache.clear();
    }

    pub fn cache_len(&self) -> usize {
        self.apply_cache.len() + self.unary_cache.len()
    }

    fn handle(&self, node: u32) -> PbFunc {
        PbFunc {
            store: self.id,
            node,
        }
    }

    fn own(&self, f: PbFunc) -> Result<u32> {
        if f.store == self.id {
            Ok(f.node)
        } else {
            Err(PbfError::OrderMismatch)
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.ticks += 1;
        if self.ticks & 0x3ff == 0 {
            if let Some(flag) = &self.limits.cancel {
                if flag.load(Ordering::Relaxed) {
                    return Err(PbfError::Cancelled);
                }
            }
        }
        Ok(())
    }

    fn push(&mut self, node: Node) -> Result<u32> {
        if let Some(max) = self.limits.max_nodes {
            if self.nodes.len() >= max {
                return Err(PbfError::NodeLimit(max));
            }
        }
        let id = u32::try_from(self.nodes.len()).map_err(|_| PbfError::NodeLimit(u32::MAX as usize))?;
        self.nodes.push(node);
        Ok(id)
    }

    fn terminal(&mut self, value: f64) -> Result<u32> {
        if !value.is_finite() {
            return Err(PbfError::NonFinite(value));
        }
        // -0.0 and 0.0 are the same function value.
        let value = if value == 0.0 { 0.0 } else { value };
        if let Some(&id) = self.terminals.get(&value.to_bits()) {
            return Ok(id);
        }
        let id = self.push(Node {
            level: TERMINAL,
            lo: 0,
            hi: 0,
            value,
        })?;
        self.terminals.insert(value.to_bits(), id);
        Ok(id)
    }

    fn mk(&mut self, level: u32, lo: u32, hi: u32) -> Result<u32> {
        if lo == hi {
            return Ok(lo);
        }
        if let Some(&id) = self.unique.get(&(level, lo, hi)) {
            return Ok(id);
        }
        self.tick()?;
        let id = self.push(Node {
            level,
            lo,
            hi,
            value: 0.0,
        })?;
        self.unique.insert((level, lo, hi), id);
        Ok(id)
    }

    fn level(&self, n: u32) -> u32 {
        self.nodes[n as usize].level
    }

    fn is_terminal(&self, n: u32) -> bool {
        self.level(n) == TERMINAL
    }

    fn value(&self, n: u32) -> f64 {
        self.nodes[n as usize].value
    }

    /// Cofactors of `n` with respect to `level`.
    fn cofactors(&self, n: u32, level: u32) -> (u32, u32) {
        let node = self.nodes[n as usize];
        if node.level == level {
            (node.lo, node.hi)
        } else {
            (n, n)
        }
    }

    fn level_of(&self, v: Variable) -> Result<u32> {
        self.order.rank(v).ok_or(PbfError::UnknownVariable(v))
    }

    pub fn constant(&mut self, c: f64) -> Result<PbFunc> {
        let n = self.terminal(c)?;
        Ok(self.handle(n))
    }

    pub fn one(&mut self) -> PbFunc {
        self.constant(1.0).expect("1 is finite")
    }

    pub fn zero(&mut self) -> PbFunc {
        self.constant(0.0).expect("0 is finite")
    }

    /// The diagram of a single variable: `x ↦ hi`, `¬x ↦ lo`.
    pub fn var(&mut self, v: Variable, lo: f64, hi: f64) -> Result<PbFunc> {
        let level = self.level_of(v)?;
        let lo = self.terminal(lo)?;
        let hi = self.terminal(hi)?;
        let n = self.mk(level, lo, hi)?;
        Ok(self.handle(n))
    }

    /// The 0/1 indicator of a clause. The empty clause is constant 0.
    pub fn clause_func(&mut self, clause: &Clause) -> Result<PbFunc> {
        let mut lits = Vec::with_capacity(clause.len());
        for lit in clause.literals() {
            lits.push((self.level_of(lit.var)?, lit.positive));
        }
        lits.sort_unstable_by_key(|&(level, _)| level);
        let one = self.terminal(1.0)?;
        let mut acc = self.terminal(0.0)?;
        for &(level, positive) in lits.iter().rev() {
            acc = if positive {
                self.mk(level, acc, one)?
            } else {
                self.mk(level, one, acc)?
            };
        }
        Ok(self.handle(acc))
    }

    /// Builds the diagram of an arbitrary function over `vars` by Shannon
    /// expansion. Exponential in `vars.len()`; meant for tests and tooling.
    pub fn tabulate(
        &mut self,
        vars: &[Variable],
        mut f: impl FnMut(&Assignment) -> f64,
    ) -> Result<PbFunc> {
        let mut levels = Vec::with_capacity(vars.len());
        for &v in vars {
            levels.push((self.level_of(v)?, v));
        }
        levels.sort_unstable();
        levels.dedup();
        let mut tau = Assignment::new();
        let n = self.tabulate_rec(&levels, &mut tau, &mut f)?;
        Ok(self.handle(n))
    }

    fn tabulate_rec(
        &mut self,
        levels: &[(u32, Variable)],
        tau: &mut Assignment,
        f: &mut impl FnMut(&Assignment) -> f64,
    ) -> Result<u32> {
        match levels.split_first() {
            None => self.terminal(f(tau)),
            Some((&(level, v), rest)) => {
                tau.set(v, false);
                let lo = self.tabulate_rec(rest, tau, f)?;
                tau.set(v, true);
                let hi = self.tabulate_rec(rest, tau, f)?;
                self.mk(level, lo, hi)
            }
        }
    }

    pub(crate) fn apply(&mut self, op: Op, a: PbFunc, b: PbFunc) -> Result<PbFunc> {
        let (a, b) = (self.own(a)?, self.own(b)?);
        let n = self.apply_rec(op, a, b)?;
        Ok(self.handle(n))
    }

    fn apply_rec(&mut self, op: Op, a: u32, b: u32) -> Result<u32> {
        let (a, b) = if op.commutative() && b < a { (b, a) } else { (a, b) };
        let (ta, tb) = (self.is_terminal(a), self.is_terminal(b));
        if ta && tb {
            return self.terminal(op.eval(self.value(a), self.value(b)));
        }
        match op {
            Op::Mul => {
                for (x, y, tx) in [(a, b, ta), (b, a, tb)] {
                    if tx && self.value(x) == 1.0 {
                        return Ok(y);
                    }
                    if tx && self.value(x) == 0.0 {
                        return Ok(x);
                    }
                }
            }
            Op::Max | Op::Convex(_) if a == b => return Ok(a),
            Op::Ge if a == b => return self.terminal(1.0),
            _ => {}
        }
        if let Some(&r) = self.apply_cache.get(&(op, a, b)) {
            return Ok(r);
        }
        self.tick()?;
        let level = self.level(a).min(self.level(b));
        let (a0, a1) = self.cofactors(a, level);
        let (b0, b1) = self.cofactors(b, level);
        let lo = self.apply_rec(op, a0, b0)?;
        let hi = self.apply_rec(op, a1, b1)?;
        let r = self.mk(level, lo, hi)?;
        self.apply_cache.insert((op, a, b), r);
        Ok(r)
    }

    /// Pointwise product over the union of the supports.
    pub fn join(&mut self, f: PbFunc, g: PbFunc) -> Result<PbFunc> {
        self.apply(Op::Mul, f, g)
    }

    /// Pointwise maximum.
    pub fn max(&mut self, f: PbFunc, g: PbFunc) -> Result<PbFunc> {
        self.apply(Op::Max, f, g)
    }

    /// Pointwise sum.
    pub fn add(&mut self, f: PbFunc, g: PbFunc) -> Result<PbFunc> {
        self.apply(Op::Add, f, g)
    }

    fn unary(&mut self, kind: Unary, level: u32, n: u32) -> Result<u32> {
        let node_level = self.level(n);
        if node_level > level {
            // `level` does not occur below `n`.
            return match kind {
                Unary::Dsgn(_) => self.terminal(1.0),
                _ => Ok(n),
            };
        }
        if let Some(&r) = self.unary_cache.get(&(kind, n)) {
            return Ok(r);
        }
        self.tick()?;
        let node = self.nodes[n as usize];
        let r = if node_level == level {
            match kind {
                Unary::Exists(_) => self.apply_rec(Op::Max, node.lo, node.hi)?,
                Unary::Random(_, bits) => self.apply_rec(Op::Convex(bits), node.lo, node.hi)?,
                Unary::Dsgn(_) => self.apply_rec(Op::Ge, node.hi, node.lo)?,
            }
        } else {
            let lo = self.unary(kind, level, node.lo)?;
            let hi = self.unary(kind, level, node.hi)?;
            self.mk(node_level, lo, hi)?
        };
        self.unary_cache.insert((kind, n), r);
        Ok(r)
    }

    /// `∃_x f`: pointwise max of the two cofactors. Identity when `x` is
    /// not in the support.
    pub fn exists_project(&mut self, f: PbFunc, x: Variable) -> Result<PbFunc> {
        let n = self.own(f)?;
        let Some(level) = self.order.rank(x) else {
            return Ok(f);
        };
        let r = self.unary(Unary::Exists(level), level, n)?;
        Ok(self.handle(r))
    }

    /// `R^p_x f = p·f|x=1 + (1-p)·f|x=0`. Identity when `x` is not in the
    /// support.
    pub fn rand_project(&mut self, f: PbFunc, x: Variable, p: f64) -> Result<PbFunc> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PbfError::ProbabilityRange(p));
        }
        let n = self.own(f)?;
        let Some(level) = self.order.rank(x) else {
            return Ok(f);
        };
        let r = self.unary(Unary::Random(level, p.to_bits()), level, n)?;
        Ok(self.handle(r))
    }

    /// `dsgn_x f`, with ties resolved to `x ↦ 1`.
    pub fn dsgn(&mut self, f: PbFunc, x: Variable) -> Result<DsgnFunc> {
        let n = self.own(f)?;
        let chooser = match self.order.rank(x) {
            Some(level) => {
                let r = self.unary(Unary::Dsgn(level), level, n)?;
                self.handle(r)
            }
            None => self.one(),
        };
        Ok(DsgnFunc { var: x, chooser })
    }

    /// `f` with `x` fixed to `value`.
    pub fn cofactor(&mut self, f: PbFunc, x: Variable, value: bool) -> Result<PbFunc> {
        let n = self.own(f)?;
        let level = self.level_of(x)?;
        let mut memo = FxHashMap::default();
        let r = self.cofactor_rec(n, level, value, &mut memo)?;
        Ok(self.handle(r))
    }

    fn cofactor_rec(
        &mut self,
        n: u32,
        level: u32,
        value: bool,
        memo: &mut FxHashMap<u32, u32>,
    ) -> Result<u32> {
        let node = self.nodes[n as usize];
        if node.level > level {
            return Ok(n);
        }
        if node.level == level {
            return Ok(if value { node.hi } else { node.lo });
        }
        if let Some(&r) = memo.get(&n) {
            return Ok(r);
        }
        let lo = self.cofactor_rec(node.lo, level, value, memo)?;
        let hi = self.cofactor_rec(node.hi, level, value, memo)?;
        let r = self.mk(node.level, lo, hi)?;
        memo.insert(n, r);
        Ok(r)
    }

    /// `f(τ|support(f))`.
    pub fn evaluate(&self, f: PbFunc, tau: &Assignment) -> Result<f64> {
        let mut n = self.own(f)?;
        loop {
            let node = self.nodes[n as usize];
            if node.level == TERMINAL {
                return Ok(node.value);
            }
            let v = self.order.var_at(node.level);
            n = match tau.get(v) {
                Some(true) => node.hi,
                Some(false) => node.lo,
                None => return Err(PbfError::MissingVariable(v)),
            };
        }
    }

    fn reachable(&self, f: PbFunc) -> Vec<u32> {
        let mut seen = FxHashSet::default();
        let mut stack = vec![f.node];
        let mut out = Vec::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            out.push(n);
            let node = self.nodes[n as usize];
            if node.level != TERMINAL {
                stack.push(node.lo);
                stack.push(node.hi);
            }
        }
        out
    }

    /// `vars(f)`: the variables labelling reachable nodes.
    pub fn support(&self, f: PbFunc) -> BTreeSet<Variable> {
        assert_eq!(f.store, self.id, "handle from another store");
        self.reachable(f)
            .into_iter()
            .map(|n| self.level(n))
            .filter(|&l| l != TERMINAL)
            .map(|l| self.order.var_at(l))
            .collect()
    }

    /// Number of distinct nodes (terminals included) reachable from `f`.
    pub fn node_count(&self, f: PbFunc) -> usize {
        assert_eq!(f.store, self.id, "handle from another store");
        self.reachable(f).len()
    }

    /// Distinct terminal values reachable from `f`, ascending.
    pub fn terminal_values(&self, f: PbFunc) -> Vec<f64> {
        assert_eq!(f.store, self.id, "handle from another store");
        let mut vals: Vec<f64> = self
            .reachable(f)
            .into_iter()
            .filter(|&n| self.is_terminal(n))
            .map(|n| self.value(n))
            .collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    pub fn constant_value(&self, f: PbFunc) -> Option<f64> {
        (f.store == self.id && self.is_terminal(f.node)).then(|| self.value(f.node))
    }

    /// Maximum of `combine(f(τ), g(τ))` over all assignments `τ`.
    /// Walks the product of the two diagrams without creating nodes.
    pub fn max_over_pairs(
        &self,
        f: PbFunc,
        g: PbFunc,
        combine: impl Fn(f64, f64) -> f64,
    ) -> Result<f64> {
        let (a, b) = (self.own(f)?, self.own(g)?);
        let mut memo = FxHashMap::default();
        Ok(self.pairs_rec(a, b, &combine, &mut memo))
    }

    fn pairs_rec(
        &self,
        a: u32,
        b: u32,
        combine: &impl Fn(f64, f64) -> f64,
        memo: &mut FxHashMap<(u32, u32), f64>,
    ) -> f64 {
        if self.is_terminal(a) && self.is_terminal(b) {
            return combine(self.value(a), self.value(b));
        }
        if let Some(&r) = memo.get(&(a, b)) {
            return r;
        }
        let level = self.level(a).min(self.level(b));
        let (a0, a1) = self.cofactors(a, level);
        let (b0, b1) = self.cofactors(b, level);
        let r = self
            .pairs_rec(a0, b0, combine, memo)
            .max(self.pairs_rec(a1, b1, combine, memo));
        memo.insert((a, b), r);
        r
    }

    /// `max_τ |f(τ) - g(τ)|`.
    pub fn max_abs_diff(&self, f: PbFunc, g: PbFunc) -> Result<f64> {
        self.max_over_pairs(f, g, |x, y| (x - y).abs())
    }

    pub(crate) fn node_parts(&self, f: PbFunc) -> Vec<(u32, Option<(Variable, u32, u32)>, f64)> {
        let mut nodes = self.reachable(f);
        nodes.sort_unstable();
        nodes
            .into_iter()
            .map(|n| {
                let node = self.nodes[n as usize];
                if node.level == TERMINAL {
                    (n, None, node.value)
                } else {
                    (n, Some((self.order.var_at(node.level), node.lo, node.hi)), 0.0)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Literal;

    fn v(id: u32) -> Variable {
        Variable::new(id)
    }

    fn store(n: u32) -> Store {
        Store::new(VarOrder::ascending((1..=n).map(v)))
    }

    fn clause(lits: &[i64]) -> Clause {
        Clause::new(lits.iter().map(|&l| Literal::from_dimacs(l).unwrap())).unwrap()
    }

    fn assign(pairs: &[(u32, bool)]) -> Assignment {
        pairs.iter().map(|&(i, b)| (v(i), b)).collect()
    }

    #[test]
    fn constants() {
        let mut s = store(2);
        let c = s.constant(0.75).unwrap();
        assert_eq!(s.evaluate(c, &Assignment::new()).unwrap(), 0.75);
        assert!(s.support(c).is_empty());
        assert!(matches!(s.constant(f64::NAN), Err(PbfError::NonFinite(_))));
        assert!(matches!(s.constant(f64::INFINITY), Err(PbfError::NonFinite(_))));
        assert_eq!(s.constant(-0.0).unwrap(), s.zero());
    }

    #[test]
    fn identity_and_annihilator() {
        let mut s = store(3);
        let g = s.clause_func(&clause(&[1, -3])).unwrap();
        let one = s.one();
        let zero = s.zero();
        assert_eq!(s.join(one, g).unwrap(), g);
        assert_eq!(s.join(zero, g).unwrap(), zero);
    }

    #[test]
    fn clause_truth_table() {
        let mut s = store(4);
        let c = s.clause_func(&clause(&[2, -4])).unwrap();
        let mut ones = 0;
        for (z2, z4) in [(false, false), (false, true), (true, false), (true, true)] {
            let val = s.evaluate(c, &assign(&[(2, z2), (4, z4)])).unwrap();
            if val == 1.0 {
                ones += 1;
            } else {
                assert_eq!((z2, z4, val), (false, true, 0.0));
            }
        }
        assert_eq!(ones, 3);
        assert_eq!(s.support(c), [v(2), v(4)].into());
        let unit = s.clause_func(&clause(&[1])).unwrap();
        assert_eq!(s.evaluate(unit, &assign(&[(1, true)])).unwrap(), 1.0);
        assert_eq!(s.evaluate(unit, &assign(&[(1, false)])).unwrap(), 0.0);
        let empty = s.clause_func(&clause(&[])).unwrap();
        assert_eq!(empty, s.zero());
    }

    #[test]
    fn join_product_table() {
        let mut s = store(2);
        let f = s.var(v(1), 2.0, 3.0).unwrap();
        let g = s.var(v(2), 5.0, 7.0).unwrap();
        let h = s.join(f, g).unwrap();
        let expect = [((false, false), 10.0), ((false, true), 14.0), ((true, false), 15.0), ((true, true), 21.0)];
        for ((a, b), val) in expect {
            assert_eq!(s.evaluate(h, &assign(&[(1, a), (2, b)])).unwrap(), val);
        }
        assert_eq!(s.join(g, f).unwrap(), h);
    }

    #[test]
    fn exists_projection() {
        let mut s = store(2);
        let f = s.var(v(1), 0.2, 0.9).unwrap();
        let e = s.exists_project(f, v(1)).unwrap();
        assert_eq!(s.constant_value(e), Some(0.9));
        assert_eq!(s.exists_project(f, v(2)).unwrap(), f);
    }

    #[test]
    fn random_projection() {
        let mut s = store(2);
        let f = s.var(v(1), 0.0, 1.0).unwrap();
        let r = s.rand_project(f, v(1), 0.4).unwrap();
        assert_eq!(s.constant_value(r), Some(0.4));
        let g = s.var(v(1), 0.3, 0.8).unwrap();
        let r1 = s.rand_project(g, v(1), 1.0).unwrap();
        let hi = s.cofactor(g, v(1), true).unwrap();
        assert_eq!(r1, hi);
        assert_eq!(s.rand_project(g, v(2), 0.3).unwrap(), g);
        assert_eq!(s.rand_project(g, v(1), 1.2), Err(PbfError::ProbabilityRange(1.2)));
    }

    #[test]
    fn dsgn_rules() {
        let mut s = store(2);
        let f = s.var(v(1), 0.2, 0.9).unwrap();
        let d = s.dsgn(f, v(1)).unwrap();
        assert_eq!(s.constant_value(d.chooser), Some(1.0));
        let g = s.var(v(1), 0.9, 0.2).unwrap();
        let d = s.dsgn(g, v(1)).unwrap();
        assert_eq!(s.constant_value(d.chooser), Some(0.0));
        let tie = s.constant(0.5).unwrap();
        let d = s.dsgn(tie, v(1)).unwrap();
        assert_eq!(s.constant_value(d.chooser), Some(1.0));
        // Absent variable: both cofactors agree.
        let d = s.dsgn(f, v(2)).unwrap();
        assert_eq!(s.constant_value(d.chooser), Some(1.0));
    }

    #[test]
    fn evaluate_requires_support() {
        let mut s = store(2);
        let f = s.clause_func(&clause(&[1, 2])).unwrap();
        assert_eq!(
            s.evaluate(f, &assign(&[(2, false)])),
            Err(PbfError::MissingVariable(v(1)))
        );
    }

    #[test]
    fn stores_do_not_mix() {
        let mut a = store(1);
        let mut b = store(1);
        let f = a.one();
        let g = b.one();
        assert_eq!(a.join(f, g), Err(PbfError::OrderMismatch));
    }

    #[test]
    fn node_limit() {
        let order = VarOrder::ascending((1..=8).map(v));
        let mut s = Store::with_limits(
            order,
            Limits {
                max_nodes: Some(8),
                cancel: None,
            },
        );
        let c = clause(&[1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(s.clause_func(&c), Err(PbfError::NodeLimit(8)));
    }

    #[test]
    fn cancellation() {
        let flag = Arc::new(AtomicBool::new(true));
        let mut s = Store::with_limits(
            VarOrder::ascending((1..=12).map(v)),
            Limits {
                max_nodes: None,
                cancel: Some(flag),
            },
        );
        let vars: Vec<Variable> = (1..=12).map(v).collect();
        let res = s.tabulate(&vars, |t| {
            t.iter().filter(|(_, b)| *b).map(|(x, _)| f64::from(1u32 << x.index())).sum()
        });
        assert_eq!(res.err(), Some(PbfError::Cancelled));
    }

    #[test]
    fn unknown_variable() {
        let mut s = store(1);
        assert_eq!(
            s.clause_func(&clause(&[2])),
            Err(PbfError::UnknownVariable(v(2)))
        );
    }
}
