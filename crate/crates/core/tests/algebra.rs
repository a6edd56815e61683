//! Truth-table checks of the diagram algebra against direct table arithmetic.

use dper_core::formula::Variable;
use dper_core::pbf::{Assignment, PbFunc, Store, VarOrder};
use proptest::prelude::*;

const N: u32 = 10;
const CASES: u32 = 512;
const TOL: f64 = 1e-12;

fn universe(n: u32) -> Vec<Variable> {
    (1..=n).map(Variable::new).collect()
}

fn store(n: u32) -> Store {
    Store::new(VarOrder::ascending(universe(n)))
}

fn all_assignments(n: u32) -> impl Iterator<Item = Assignment> {
    let vars = universe(n);
    (0u64..1 << n).map(move |bits| Assignment::from_bits(&vars, bits))
}

/// A function given by its value table over `vars` (bit `i` of the index is
/// the value of `vars[i]`).
#[derive(Debug, Clone)]
struct Table {
    vars: Vec<Variable>,
    values: Vec<f64>,
}

impl Table {
    fn at(&self, tau: &Assignment) -> f64 {
        let idx = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, &v)| tau.get(v).expect("total assignment"))
            .fold(0usize, |acc, (i, _)| acc | 1 << i);
        self.values[idx]
    }

    fn build(&self, s: &mut Store) -> PbFunc {
        s.tabulate(&self.vars, |t| self.at(t)).unwrap()
    }
}

fn vars_of(mask: u32) -> Vec<Variable> {
    (0..N).filter(|i| mask >> i & 1 == 1).map(|i| Variable::new(i + 1)).collect()
}

fn table_over(mask: u32, values: BoxedStrategy<f64>) -> impl Strategy<Value = Table> {
    let vars = vars_of(mask);
    prop::collection::vec(values, 1 << vars.len()).prop_map(move |values| Table {
        vars: vars.clone(),
        values,
    })
}

fn dyadic() -> BoxedStrategy<f64> {
    (0u32..=16).prop_map(|k| f64::from(k) / 16.0).boxed()
}

fn nonneg() -> BoxedStrategy<f64> {
    prop_oneof![1 => Just(0.0), 4 => 0.0f64..1.0].boxed()
}

fn coarse() -> BoxedStrategy<f64> {
    prop::sample::select(vec![0.0, 0.5, 1.0]).boxed()
}

/// A table over a random subset of the first `N` variables with at most
/// `max_vars` variables.
fn table(values: fn() -> BoxedStrategy<f64>, max_vars: u32) -> impl Strategy<Value = Table> {
    table_within(N, values, max_vars)
}

fn table_within(n: u32, values: fn() -> BoxedStrategy<f64>, max_vars: u32) -> impl Strategy<Value = Table> {
    (0u32..1 << n)
        .prop_filter("too many variables", move |m| m.count_ones() <= max_vars)
        .prop_flat_map(move |m| table_over(m, values()))
}

/// `(f, g, s)` with `f` over `A`, `g` over `B` and `s ⊆ A \ B`.
fn private_pair(values: fn() -> BoxedStrategy<f64>) -> impl Strategy<Value = (Table, Table, Vec<Variable>)> {
    (0u32..1 << N, 0u32..1 << N, 0u32..1 << N)
        .prop_filter("too many variables", |(a, b, _)| a.count_ones() <= 6 && b.count_ones() <= 6)
        .prop_flat_map(move |(a, b, s)| {
            let s = vars_of(s & a & !b);
            (table_over(a, values()), table_over(b, values()), Just(s))
        })
}

fn assert_pointwise(s: &Store, f: PbFunc, expected: impl Fn(&Assignment) -> f64) -> Result<(), TestCaseError> {
    for tau in all_assignments(N) {
        let got = s.evaluate(f, &tau).unwrap();
        let want = expected(&tau);
        prop_assert!((got - want).abs() <= TOL, "at {:?}: {} vs {}", tau.to_literals(), got, want);
    }
    Ok(())
}

fn flip(tau: &Assignment, x: Variable, value: bool) -> Assignment {
    tau.clone().with(x, value)
}

/// Table of `∃_s f` or `R_s f` computed by direct enumeration of `s`.
fn project_table(f: &dyn Fn(&Assignment) -> f64, s: &[Variable], tau: &Assignment, p: Option<f64>) -> f64 {
    match s.split_first() {
        None => f(tau),
        Some((&x, rest)) => {
            let lo = project_table(f, rest, &flip(tau, x, false), p);
            let hi = project_table(f, rest, &flip(tau, x, true), p);
            match p {
                None => lo.max(hi),
                Some(p) => p * hi + (1.0 - p) * lo,
            }
        }
    }
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(CASES)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn canonical_handles(f in table(coarse, 3), g in table(coarse, 3)) {
        let mut s = store(N);
        let (a, b) = (f.build(&mut s), g.build(&mut s));
        let equal = all_assignments(N).all(|t| f.at(&t) == g.at(&t));
        prop_assert_eq!(a == b, equal);
    }

    #[test]
    fn join_is_pointwise_product(f in table(nonneg, 6), g in table(nonneg, 6)) {
        let mut s = store(N);
        let (a, b) = (f.build(&mut s), g.build(&mut s));
        let j = s.join(a, b).unwrap();
        assert_pointwise(&s, j, |t| f.at(t) * g.at(t))?;
    }

    #[test]
    fn join_commutes_as_handles(f in table(nonneg, 6), g in table(nonneg, 6)) {
        let mut s = store(N);
        let (a, b) = (f.build(&mut s), g.build(&mut s));
        prop_assert_eq!(s.join(a, b).unwrap(), s.join(b, a).unwrap());
    }

    #[test]
    fn join_associates_as_handles(f in table(dyadic, 4), g in table(dyadic, 4), h in table(dyadic, 4)) {
        let mut s = store(N);
        let (a, b, c) = (f.build(&mut s), g.build(&mut s), h.build(&mut s));
        let ab = s.join(a, b).unwrap();
        let left = s.join(ab, c).unwrap();
        let bc = s.join(b, c).unwrap();
        let right = s.join(a, bc).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn exists_projection_is_max(f in table(nonneg, 8), x in 1..=N) {
        let mut s = store(N);
        let a = f.build(&mut s);
        let x = Variable::new(x);
        let e = s.exists_project(a, x).unwrap();
        prop_assert!(!s.support(e).contains(&x));
        assert_pointwise(&s, e, |t| f.at(&flip(t, x, false)).max(f.at(&flip(t, x, true))))?;
    }

    #[test]
    fn rand_projection_is_convex_combination(f in table(nonneg, 8), x in 1..=N, p in 0.0f64..=1.0) {
        let mut s = store(N);
        let a = f.build(&mut s);
        let x = Variable::new(x);
        let r = s.rand_project(a, x, p).unwrap();
        prop_assert!(!s.support(r).contains(&x));
        assert_pointwise(&s, r, |t| p * f.at(&flip(t, x, true)) + (1.0 - p) * f.at(&flip(t, x, false)))?;
    }

    #[test]
    fn exists_projections_commute(f in table(nonneg, 8), x in 1..=N, y in 1..=N) {
        let mut s = store(N);
        let a = f.build(&mut s);
        let (x, y) = (Variable::new(x), Variable::new(y));
        let ex = s.exists_project(a, x).unwrap();
        let xy = s.exists_project(ex, y).unwrap();
        let ey = s.exists_project(a, y).unwrap();
        let yx = s.exists_project(ey, x).unwrap();
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn rand_projections_commute(
        f in table(dyadic, 8),
        x in 1..=N,
        y in 1..=N,
        p in prop::sample::select(vec![0.25, 0.5, 0.75]),
        q in prop::sample::select(vec![0.25, 0.5, 0.75]),
    ) {
        prop_assume!(x != y);
        let mut s = store(N);
        let a = f.build(&mut s);
        let (x, y) = (Variable::new(x), Variable::new(y));
        let rx = s.rand_project(a, x, p).unwrap();
        let xy = s.rand_project(rx, y, q).unwrap();
        let ry = s.rand_project(a, y, q).unwrap();
        let yx = s.rand_project(ry, x, p).unwrap();
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn rand_projections_commute_pointwise(f in table(nonneg, 8), x in 1..=N, y in 1..=N, p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        prop_assume!(x != y);
        let mut s = store(N);
        let a = f.build(&mut s);
        let (x, y) = (Variable::new(x), Variable::new(y));
        let rx = s.rand_project(a, x, p).unwrap();
        let xy = s.rand_project(rx, y, q).unwrap();
        let ry = s.rand_project(a, y, q).unwrap();
        let yx = s.rand_project(ry, x, p).unwrap();
        prop_assert!(s.max_abs_diff(xy, yx).unwrap() <= TOL);
    }

    #[test]
    fn early_exists_projection((f, g, set) in private_pair(nonneg)) {
        let mut s = store(N);
        let (a, b) = (f.build(&mut s), g.build(&mut s));
        let mut late = s.join(a, b).unwrap();
        let mut early = a;
        for &x in &set {
            late = s.exists_project(late, x).unwrap();
            early = s.exists_project(early, x).unwrap();
        }
        let early = s.join(early, b).unwrap();
        let expected = |t: &Assignment| project_table(&|u| f.at(u) * g.at(u), &set, t, None);
        assert_pointwise(&s, late, expected)?;
        assert_pointwise(&s, early, expected)?;
    }

    #[test]
    fn early_rand_projection((f, g, set) in private_pair(nonneg), p in 0.0f64..=1.0) {
        let mut s = store(N);
        let (a, b) = (f.build(&mut s), g.build(&mut s));
        let mut late = s.join(a, b).unwrap();
        let mut early = a;
        for &x in &set {
            late = s.rand_project(late, x, p).unwrap();
            early = s.rand_project(early, x, p).unwrap();
        }
        let early = s.join(early, b).unwrap();
        let expected = |t: &Assignment| project_table(&|u| f.at(u) * g.at(u), &set, t, Some(p));
        assert_pointwise(&s, late, expected)?;
        assert_pointwise(&s, early, expected)?;
    }

    /// Up to three factors, each with up to three private variables and one
    /// shared variable: projecting each factor's private variables before
    /// the join equals projecting them after it.
    #[test]
    fn multi_factor_early_projection(
        tables in prop::collection::vec(prop::collection::vec(nonneg(), 16), 1..=3),
        exist in any::<bool>(),
        p in 0.0f64..=1.0,
    ) {
        // Factor i has private variables 3i+1..3i+3 and shares variable 10.
        let shared = Variable::new(10);
        let factors: Vec<Table> = tables
            .into_iter()
            .enumerate()
            .map(|(i, values)| {
                let base = 3 * i as u32;
                let mut vars: Vec<Variable> = (1..=3).map(|k| Variable::new(base + k)).collect();
                vars.push(shared);
                Table { vars, values }
            })
            .collect();
        let mut s = store(N);
        let project = |s: &mut Store, f: PbFunc, x: Variable| {
            if exist { s.exists_project(f, x).unwrap() } else { s.rand_project(f, x, p).unwrap() }
        };
        let mut late = s.one();
        let mut early = s.one();
        let mut private = Vec::new();
        for t in &factors {
            let f = t.build(&mut s);
            late = s.join(late, f).unwrap();
            let mut g = f;
            for &x in &t.vars[..3] {
                g = project(&mut s, g, x);
                private.push(x);
            }
            early = s.join(early, g).unwrap();
        }
        for &x in &private {
            late = project(&mut s, late, x);
        }
        prop_assert!(s.max_abs_diff(late, early).unwrap() <= TOL);
        let product = |u: &Assignment| factors.iter().map(|t| t.at(u)).product::<f64>();
        let mode = (!exist).then_some(p);
        assert_pointwise(&s, early, |t| project_table(&product, &private, t, mode))?;
    }

    #[test]
    fn dsgn_prefers_one_on_ties(f in table(coarse, 8), x in 1..=N) {
        let mut s = store(N);
        let a = f.build(&mut s);
        let x = Variable::new(x);
        let d = s.dsgn(a, x).unwrap();
        prop_assert!(!s.support(d.chooser).contains(&x));
        assert_pointwise(&s, d.chooser, |t| {
            if f.at(&flip(t, x, true)) >= f.at(&flip(t, x, false)) { 1.0 } else { 0.0 }
        })?;
    }

    /// For non-negative `f`, `g` with `x ∈ vars(f) \ vars(g)`: wherever
    /// `g > 0` the choosers of `f` and `f·g` agree; wherever `g = 0` both
    /// cofactors of `f·g` vanish and the chooser picks 1.
    #[test]
    fn dsgn_survives_join((f, g, set) in private_pair(nonneg)) {
        prop_assume!(!set.is_empty());
        let x = set[0];
        let mut s = store(N);
        let (a, b) = (f.build(&mut s), g.build(&mut s));
        prop_assume!(s.support(a).contains(&x));
        let ab = s.join(a, b).unwrap();
        let df = s.dsgn(a, x).unwrap();
        let dfg = s.dsgn(ab, x).unwrap();
        for tau in all_assignments(N) {
            let joint = s.evaluate(dfg.chooser, &tau).unwrap();
            if g.at(&tau) > 0.0 {
                prop_assert_eq!(joint, s.evaluate(df.chooser, &tau).unwrap());
            } else {
                prop_assert_eq!(joint, 1.0);
            }
        }
    }

    /// Extending any maximizer of `∃_x f` with the chooser's value for `x`
    /// yields a maximizer of `f`.
    #[test]
    fn iterative_maximization(f in table_within(8, nonneg, 8), x in 1..=8u32) {
        let n = 8;
        let mut s = store(n);
        let a = f.build(&mut s);
        let x = Variable::new(x);
        let proj = s.exists_project(a, x).unwrap();
        let d = s.dsgn(a, x).unwrap();
        let best = all_assignments(n).map(|t| f.at(&t)).fold(f64::NEG_INFINITY, f64::max);
        for tau in all_assignments(n) {
            let tau = tau.restrict(universe(n).iter().filter(|&&v| v != x));
            if s.evaluate(proj, &tau).unwrap() == best {
                let b = d.choose(&s, &tau).unwrap();
                prop_assert_eq!(f.at(&tau.clone().with(x, b)), best);
            }
        }
    }
}
