//! Symbolic identification of interventional queries.
//!
//! [`id`] and [`idc`] return an [`Estimand`] over the observational
//! distribution, or a [`Hedge`] when the query is not identifiable. Every call
//! also records the recursion steps it took in a [`TraceLog`].

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::admg::{Admg, VarSet, Variable};
use crate::dist::{decode, DistTable};
use crate::error::{invalid, Error, Result};

/// The distribution a term is read from.
#[derive(Debug, Clone, PartialEq)]
pub enum Dist {
    Observed,
    /// `law` is a distribution over `over` that may depend on further fixed
    /// variables.
    Derived {
        over: VarSet,
        law: Arc<Estimand>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimand {
    Sum {
        over: VarSet,
        body: Box<Estimand>,
    },
    Product(Vec<Estimand>),
    Quotient {
        numerator: Box<Estimand>,
        denominator: Box<Estimand>,
    },
    /// `P(targets | given)` under `dist`.
    Term {
        targets: VarSet,
        given: VarSet,
        dist: Dist,
    },
}

impl Estimand {
    pub fn sum(over: VarSet, body: Estimand) -> Estimand {
        if over.is_empty() {
            body
        } else {
            Estimand::Sum {
                over,
                body: Box::new(body),
            }
        }
    }

    pub fn product(mut factors: Vec<Estimand>) -> Estimand {
        if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Estimand::Product(factors)
        }
    }

    pub fn quotient(numerator: Estimand, denominator: Estimand) -> Estimand {
        Estimand::Quotient {
            numerator: Box::new(numerator),
            denominator: Box::new(denominator),
        }
    }

    pub fn term(targets: VarSet, given: VarSet, dist: Dist) -> Estimand {
        Estimand::Term {
            targets,
            given,
            dist,
        }
    }

    /// Variables the value of the expression depends on.
    pub fn free_variables(&self) -> VarSet {
        match self {
            Estimand::Sum { over, body } => body.free_variables().difference(over),
            Estimand::Product(fs) => fs
                .iter()
                .fold(VarSet::new(), |acc, f| acc.union(&f.free_variables())),
            Estimand::Quotient {
                numerator,
                denominator,
            } => numerator
                .free_variables()
                .union(&denominator.free_variables()),
            Estimand::Term {
                targets,
                given,
                dist,
            } => {
                let own = targets.union(given);
                match dist {
                    Dist::Observed => own,
                    Dist::Derived { over, law } => {
                        own.union(&law.free_variables().difference(over))
                    }
                }
            }
        }
    }

    /// Every variable mentioned anywhere, bound or free.
    pub fn mentioned(&self) -> VarSet {
        match self {
            Estimand::Sum { over, body } => body.mentioned().union(over),
            Estimand::Product(fs) => fs
                .iter()
                .fold(VarSet::new(), |acc, f| acc.union(&f.mentioned())),
            Estimand::Quotient {
                numerator,
                denominator,
            } => numerator.mentioned().union(&denominator.mentioned()),
            Estimand::Term {
                targets,
                given,
                dist,
            } => {
                let own = targets.union(given);
                match dist {
                    Dist::Observed => own,
                    Dist::Derived { over, law } => own.union(over).union(&law.mentioned()),
                }
            }
        }
    }

    /// Exact value table over the free variables, in the order of `obs`.
    pub fn evaluate(&self, obs: &DistTable) -> Result<DistTable> {
        evaluate_estimand(self, obs)
    }

    /// Renders the expression with lowercase variable names. Variables are
    /// listed in the declaration order of `g`, and a bound variable whose name
    /// is already in scope gets a prime.
    pub fn pretty(&self, g: &Admg) -> String {
        let mut p = Printer {
            g,
            shown: HashMap::new(),
            in_use: HashSet::new(),
        };
        let free = g.ordered(&self.free_variables());
        p.bind(&free);
        p.expr(self)
    }
}

/// Witness of non-identifiability: `f_prime` is the single c-component left
/// after removing the intervened variables from the c-component `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hedge {
    pub f: VarSet,
    pub f_prime: VarSet,
}

impl fmt::Display for Hedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "hedge F = {}, F' = {}", self.f, self.f_prime)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
}

impl Step {
    pub fn is_terminal(self) -> bool {
        matches!(self, Step::S1 | Step::S5 | Step::S6)
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Step::S1 => 1,
            Step::S2 => 2,
            Step::S3 => 3,
            Step::S4 => 4,
            Step::S5 => 5,
            Step::S6 => 6,
            Step::S7 => 7,
        };
        write!(f, "S{n}")
    }
}

/// One recursion step with the arguments it was entered with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub depth: usize,
    pub step: Step,
    pub y: VarSet,
    pub x: VarSet,
}

/// Recursion steps in depth-first order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceLog {
    pub steps: Vec<TraceStep>,
}

impl TraceLog {
    pub fn push(&mut self, depth: usize, step: Step, y: &VarSet, x: &VarSet) {
        self.steps.push(TraceStep {
            depth,
            step,
            y: y.clone(),
            x: x.clone(),
        });
    }

    pub fn tags(&self) -> Vec<Step> {
        self.steps.iter().map(|s| s.step).collect()
    }

    /// True when every root-to-leaf path ends in a terminal step: a step is a
    /// leaf exactly when the next entry is not one level deeper.
    pub fn paths_terminate(&self) -> bool {
        self.steps.iter().enumerate().all(|(i, s)| {
            let leaf = self
                .steps
                .get(i + 1)
                .map_or(true, |n| n.depth != s.depth + 1);
            !leaf || s.step.is_terminal()
        })
    }
}

impl fmt::Display for TraceLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(
                f,
                "{:indent$}{} y={} x={}",
                "",
                s.step,
                s.y,
                s.x,
                indent = 2 * s.depth
            )?;
        }
        Ok(())
    }
}

/// Result of a recursion together with the steps it took.
#[derive(Debug, Clone)]
pub struct Traced<T> {
    pub outcome: std::result::Result<T, Hedge>,
    pub trace: TraceLog,
}

pub(crate) fn check_query(g: &Admg, y: &VarSet, x: &VarSet, z: &VarSet) -> Result<()> {
    if y.is_empty() {
        return Err(Error::EmptyTargets);
    }
    for s in [y, x, z] {
        if let Some(v) = s.iter().find(|v| !g.contains(v)) {
            return Err(Error::UnknownVariable(v.to_string()));
        }
    }
    for (s, t) in [(y, x), (y, z), (x, z)] {
        if let Some(v) = s.first_common(t) {
            return Err(Error::Overlap(v.to_string()));
        }
    }
    Ok(())
}

/// Identifies `P_x(y)` in `g`.
pub fn id(y: &VarSet, x: &VarSet, g: &Admg) -> Result<Traced<Estimand>> {
    check_query(g, y, x, &VarSet::new())?;
    let order = g.topological_order();
    let mut run = IdRun {
        order: &order,
        trace: TraceLog::default(),
    };
    let outcome = run.rec(y, x, &Dist::Observed, g, 0)?;
    Ok(Traced {
        outcome,
        trace: run.trace,
    })
}

struct IdRun<'a> {
    order: &'a [String],
    trace: TraceLog,
}

impl IdRun<'_> {
    /// Chain-rule factor `P(v | predecessors of v within g)` for each `v` in `s`.
    fn chain(&self, s: &VarSet, g: &Admg, p: &Dist) -> Vec<Estimand> {
        let mut prefix = VarSet::new();
        let mut out = Vec::new();
        for v in self.order.iter().filter(|v| g.contains(v)) {
            if s.contains(v) {
                out.push(Estimand::term(
                    VarSet::from_iter([v.as_str()]),
                    prefix.clone(),
                    p.clone(),
                ));
            }
            prefix.insert(v.as_str());
        }
        out
    }

    fn rec(
        &mut self,
        y: &VarSet,
        x: &VarSet,
        p: &Dist,
        g: &Admg,
        depth: usize,
    ) -> Result<std::result::Result<Estimand, Hedge>> {
        let v = g.all();
        if x.is_empty() {
            self.trace.push(depth, Step::S1, y, x);
            return Ok(Ok(Estimand::term(y.clone(), VarSet::new(), p.clone())));
        }
        let an = g.ancestors(y)?;
        if an != v {
            self.trace.push(depth, Step::S2, y, x);
            let sub = g.induced_subgraph(&an)?;
            return self.rec(y, &x.intersection(&an), p, &sub, depth + 1);
        }
        let w = v
            .difference(x)
            .difference(&g.remove_incoming(x)?.ancestors(y)?);
        if !w.is_empty() {
            self.trace.push(depth, Step::S3, y, x);
            return self.rec(y, &x.union(&w), p, g, depth + 1);
        }
        let parts = g.without(x)?.c_components();
        if parts.len() > 1 {
            self.trace.push(depth, Step::S4, y, x);
            let mut factors = Vec::with_capacity(parts.len());
            for s in &parts {
                match self.rec(s, &v.difference(s), p, g, depth + 1)? {
                    Ok(e) => factors.push(e),
                    Err(h) => return Ok(Err(h)),
                }
            }
            let over = v.difference(&y.union(x));
            return Ok(Ok(Estimand::sum(over, Estimand::product(factors))));
        }
        let s = &parts[0];
        let whole = g.c_components();
        if whole.len() == 1 {
            self.trace.push(depth, Step::S5, y, x);
            return Ok(Err(Hedge {
                f: v,
                f_prime: s.clone(),
            }));
        }
        if whole.contains(s) {
            self.trace.push(depth, Step::S6, y, x);
            let factors = self.chain(s, g, p);
            return Ok(Ok(Estimand::sum(
                s.difference(y),
                Estimand::product(factors),
            )));
        }
        let s_prime = whole
            .iter()
            .find(|c| s.is_subset(c))
            .expect("a c-component of G \\ X lies inside one of G")
            .clone();
        self.trace.push(depth, Step::S7, y, x);
        let law = Estimand::product(self.chain(&s_prime, g, p));
        let next = Dist::Derived {
            over: s_prime.clone(),
            law: Arc::new(law),
        };
        let sub = g.induced_subgraph(&s_prime)?;
        self.rec(y, &x.intersection(&s_prime), &next, &sub, depth + 1)
    }
}

/// Moves conditioning variables into the intervention set while the
/// exchange is licensed: `α` moves when `y ⟂ α | x, z∖{α}` holds in the graph
/// with edges into `x` and out of `α` removed. Candidates are tried in
/// declaration order and the scan restarts after each move.
pub fn rule2_reduction(y: &VarSet, x: &VarSet, z: &VarSet, g: &Admg) -> Result<(VarSet, VarSet)> {
    let mut x = x.clone();
    let mut z = z.clone();
    'scan: loop {
        for a in g.ordered(&z) {
            let alpha = VarSet::from_iter([a.as_str()]);
            let rest = z.difference(&alpha);
            let cut = g.remove_incoming(&x)?.remove_outgoing(&alpha)?;
            if cut.d_separated(y, &alpha, &x.union(&rest))? {
                x.insert(a.as_str());
                z = rest;
                continue 'scan;
            }
        }
        return Ok((x, z));
    }
}

/// Identifies `P_x(y | z)` in `g`.
pub fn idc(y: &VarSet, x: &VarSet, z: &VarSet, g: &Admg) -> Result<Traced<Estimand>> {
    check_query(g, y, x, z)?;
    let (x2, z2) = rule2_reduction(y, x, z, g)?;
    if z2.is_empty() {
        return id(y, &x2, g);
    }
    let joint = id(&y.union(&z2), &x2, g)?;
    let outcome = joint.outcome.map(|e| {
        let den = Estimand::sum(y.clone(), e.clone());
        Estimand::quotient(e, den)
    });
    Ok(Traced {
        outcome,
        trace: joint.trace,
    })
}

/// Dense non-negative table over a sorted list of variable positions.
#[derive(Debug, Clone)]
struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    vals: Vec<f64>,
}

impl Factor {
    fn scalar(v: f64) -> Factor {
        Factor {
            vars: Vec::new(),
            cards: Vec::new(),
            vals: vec![v],
        }
    }

    fn strides_into(&self, vars: &[usize]) -> Vec<usize> {
        let mut strides = vec![0; vars.len()];
        let mut s = 1;
        for k in (0..self.vars.len()).rev() {
            let j = vars
                .binary_search(&self.vars[k])
                .expect("factor variable in target scope");
            strides[j] = s;
            s *= self.cards[k];
        }
        strides
    }

    /// Pointwise combination over the union of both scopes.
    fn combine(
        &self,
        other: &Factor,
        all_cards: &[usize],
        op: impl Fn(f64, f64) -> Result<f64>,
    ) -> Result<Factor> {
        let mut vars = self.vars.clone();
        vars.extend(&other.vars);
        vars.sort_unstable();
        vars.dedup();
        let cards: Vec<usize> = vars.iter().map(|&v| all_cards[v]).collect();
        let sa = self.strides_into(&vars);
        let sb = other.strides_into(&vars);
        let n: usize = cards.iter().product();
        let mut vals = Vec::with_capacity(n);
        let mut states = vec![0; vars.len()];
        for i in 0..n {
            decode(i, &cards, &mut states);
            let ia: usize = states.iter().zip(&sa).map(|(s, t)| s * t).sum();
            let ib: usize = states.iter().zip(&sb).map(|(s, t)| s * t).sum();
            vals.push(op(self.vals[ia], other.vals[ib])?);
        }
        Ok(Factor { vars, cards, vals })
    }

    fn sum_out(&self, drop: &HashSet<usize>) -> Factor {
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|&k| !drop.contains(&self.vars[k]))
            .collect();
        if keep.len() == self.vars.len() {
            return self.clone();
        }
        let vars: Vec<usize> = keep.iter().map(|&k| self.vars[k]).collect();
        let cards: Vec<usize> = keep.iter().map(|&k| self.cards[k]).collect();
        let mut vals = vec![0.0; cards.iter().product()];
        let mut states = vec![0; self.vars.len()];
        for (i, &p) in self.vals.iter().enumerate() {
            decode(i, &self.cards, &mut states);
            let j = keep
                .iter()
                .fold(0, |acc, &k| acc * self.cards[k] + states[k]);
            vals[j] += p;
        }
        Factor { vars, cards, vals }
    }
}

struct Evaluator<'a> {
    obs: &'a DistTable,
    cards: Vec<usize>,
    laws: HashMap<*const Estimand, Factor>,
}

impl Evaluator<'_> {
    fn positions(&self, set: &VarSet) -> Result<HashSet<usize>> {
        set.iter()
            .map(|v| {
                self.obs
                    .position(v)
                    .ok_or_else(|| Error::UnknownVariable(v.to_string()))
            })
            .collect()
    }

    fn divide(&self, num: &Factor, den: &Factor, what: &str) -> Result<Factor> {
        num.combine(den, &self.cards, |a, b| {
            if b > 0.0 {
                Ok(a / b)
            } else {
                Err(Error::ZeroDenominator(what.to_string()))
            }
        })
    }

    fn observed(&self, scope: &HashSet<usize>) -> Result<Factor> {
        let mut vars: Vec<usize> = scope.iter().copied().collect();
        vars.sort_unstable();
        let names: Vec<&str> = vars
            .iter()
            .map(|&i| self.obs.variables()[i].name.as_str())
            .collect();
        let m = self.obs.marginal(&names)?;
        Ok(Factor {
            cards: vars.iter().map(|&v| self.cards[v]).collect(),
            vars,
            vals: m.probs().to_vec(),
        })
    }

    fn law(&mut self, law: &Arc<Estimand>) -> Result<Factor> {
        let key = Arc::as_ptr(law);
        if let Some(f) = self.laws.get(&key) {
            return Ok(f.clone());
        }
        let f = self.eval(law)?;
        self.laws.insert(key, f.clone());
        Ok(f)
    }

    fn eval(&mut self, e: &Estimand) -> Result<Factor> {
        match e {
            Estimand::Sum { over, body } => {
                let drop = self.positions(over)?;
                Ok(self.eval(body)?.sum_out(&drop))
            }
            Estimand::Product(fs) => {
                let mut acc = Factor::scalar(1.0);
                for f in fs {
                    let next = self.eval(f)?;
                    acc = acc.combine(&next, &self.cards, |a, b| Ok(a * b))?;
                }
                Ok(acc)
            }
            Estimand::Quotient {
                numerator,
                denominator,
            } => {
                let num = self.eval(numerator)?;
                let den = self.eval(denominator)?;
                self.divide(&num, &den, &denominator.free_variables().to_string())
            }
            Estimand::Term {
                targets,
                given,
                dist,
            } => {
                let t = self.positions(targets)?;
                let c = self.positions(given)?;
                let what = format!("P({} | {})", targets, given);
                match dist {
                    Dist::Observed => {
                        let joint = self.observed(&t.union(&c).copied().collect())?;
                        let den = joint.sum_out(&t);
                        self.divide(&joint, &den, &what)
                    }
                    Dist::Derived { over, law } => {
                        let f = self.law(law)?;
                        let o = self.positions(over)?;
                        let tc: HashSet<usize> = t.union(&c).copied().collect();
                        let num = f.sum_out(&o.difference(&tc).copied().collect());
                        let den = f.sum_out(&o.difference(&c).copied().collect());
                        self.divide(&num, &den, &what)
                    }
                }
            }
        }
    }
}

/// Evaluates `e` by exact summation against the observational table `obs`.
/// The result is indexed by the free variables of `e`, in the order of `obs`.
pub fn evaluate_estimand(e: &Estimand, obs: &DistTable) -> Result<DistTable> {
    let mut ev = Evaluator {
        obs,
        cards: obs.cards(),
        laws: HashMap::new(),
    };
    let f = ev.eval(e)?;
    let vars: Vec<Variable> = f.vars.iter().map(|&i| obs.variables()[i].clone()).collect();
    DistTable::new(vars, f.vals)
}

struct Printer<'a> {
    g: &'a Admg,
    shown: HashMap<String, Vec<String>>,
    in_use: HashSet<String>,
}

impl Printer<'_> {
    fn name(&self, v: &str) -> String {
        self.shown
            .get(v)
            .and_then(|s| s.last().cloned())
            .unwrap_or_else(|| v.to_lowercase())
    }

    fn bind(&mut self, vars: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(vars.len());
        for v in vars {
            let mut d = v.to_lowercase();
            while self.in_use.contains(&d) {
                d.push('\'');
            }
            self.in_use.insert(d.clone());
            self.shown.entry(v.clone()).or_default().push(d.clone());
            out.push(d);
        }
        out
    }

    fn unbind(&mut self, vars: &[String]) {
        for v in vars {
            if let Some(d) = self.shown.get_mut(v).and_then(Vec::pop) {
                self.in_use.remove(&d);
            }
        }
    }

    fn list(&self, set: &VarSet) -> String {
        self.g
            .ordered(set)
            .iter()
            .map(|v| self.name(v))
            .collect::<Vec<_>>()
            .join(",")
    }

    fn sum(&mut self, over: &VarSet, body: &Estimand) -> String {
        if over.is_empty() {
            return self.expr(body);
        }
        let vars = self.g.ordered(over);
        let shown = self.bind(&vars);
        let inner = self.expr(body);
        self.unbind(&vars);
        format!("Σ_{{{}}} {}", shown.join(","), inner)
    }

    fn compound(e: &Estimand) -> bool {
        match e {
            Estimand::Term {
                dist: Dist::Observed,
                ..
            } => false,
            _ => true,
        }
    }

    fn expr(&mut self, e: &Estimand) -> String {
        match e {
            Estimand::Sum { over, body } => self.sum(over, body),
            Estimand::Product(fs) => {
                let sep = if fs.iter().any(Self::compound) {
                    " · "
                } else {
                    " "
                };
                fs.iter()
                    .map(|f| self.expr(f))
                    .collect::<Vec<_>>()
                    .join(sep)
            }
            Estimand::Quotient {
                numerator,
                denominator,
            } => format!("[{}] / [{}]", self.expr(numerator), self.expr(denominator)),
            Estimand::Term {
                targets,
                given,
                dist: Dist::Observed,
            } => {
                if given.is_empty() {
                    format!("P({})", self.list(targets))
                } else {
                    format!("P({}|{})", self.list(targets), self.list(given))
                }
            }
            Estimand::Term {
                targets,
                given,
                dist: Dist::Derived { over, law },
            } => {
                let num = self.sum(&over.difference(&targets.union(given)), law);
                if over.is_disjoint(given) {
                    num
                } else {
                    let den = self.sum(&over.difference(given), law);
                    format!("[{num}] / [{den}]")
                }
            }
        }
    }
}

/// Parses a comma-separated list of variable names of `g`.
pub fn parse_var_list(g: &Admg, text: &str) -> Result<VarSet> {
    let mut out = VarSet::new();
    for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if !g.contains(name) {
            return Err(Error::UnknownVariable(name.to_string()));
        }
        if !out.insert(name) {
            return Err(invalid(format!("`{name}` listed twice")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admg::vars;

    fn bin(n: &str) -> Variable {
        Variable::new(n, 2)
    }

    fn frontdoor() -> Admg {
        Admg::builder()
            .var("X", 2)
            .var("S", 2)
            .var("R", 2)
            .edge("X", "S")
            .edge("S", "R")
            .confound("X", "R")
            .build()
            .unwrap()
    }

    #[test]
    fn frontdoor_estimand_text() {
        let t = id(&vars(["R"]), &vars(["X"]), &frontdoor()).unwrap();
        let e = t.outcome.unwrap();
        assert_eq!(
            e.pretty(&frontdoor()),
            "Σ_{s} P(s|x) · Σ_{x'} P(x') P(r|x',s)"
        );
        assert!(t.trace.paths_terminate());
    }

    #[test]
    fn conditional_term_lookup() {
        let obs = DistTable::new(vec![bin("X"), bin("Y")], vec![0.1, 0.3, 0.2, 0.4]).unwrap();
        let e = Estimand::term(vars(["Y"]), vars(["X"]), Dist::Observed);
        let v = e.evaluate(&obs).unwrap();
        assert!((v.get(&[0, 1]) - 0.75).abs() < 1e-15);
        assert!((v.get(&[1, 0]) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn summing_a_normalized_term_gives_one() {
        let obs = DistTable::new(vec![bin("X"), bin("Y")], vec![0.1, 0.3, 0.2, 0.4]).unwrap();
        let e = Estimand::sum(
            vars(["X", "Y"]),
            Estimand::term(vars(["X", "Y"]), VarSet::new(), Dist::Observed),
        );
        let v = e.evaluate(&obs).unwrap();
        assert!((v.probs()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_denominator_is_an_error() {
        let obs = DistTable::new(vec![bin("X"), bin("Y")], vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let e = Estimand::term(vars(["Y"]), vars(["X"]), Dist::Observed);
        assert!(matches!(e.evaluate(&obs), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn sum_order_does_not_matter() {
        let obs = DistTable::new(
            vec![bin("A"), bin("B"), bin("C")],
            vec![0.05, 0.1, 0.15, 0.2, 0.1, 0.1, 0.2, 0.1],
        )
        .unwrap();
        let body = Estimand::term(vars(["A", "B", "C"]), VarSet::new(), Dist::Observed);
        let once = Estimand::sum(vars(["A", "B"]), body.clone())
            .evaluate(&obs)
            .unwrap();
        let nested = Estimand::sum(vars(["B"]), Estimand::sum(vars(["A"]), body))
            .evaluate(&obs)
            .unwrap();
        assert!(once.max_abs_diff(&nested).unwrap() < 1e-15);
    }

    #[test]
    fn bad_queries_are_rejected() {
        let g = frontdoor();
        assert!(matches!(
            id(&VarSet::new(), &vars(["X"]), &g),
            Err(Error::EmptyTargets)
        ));
        assert!(matches!(
            id(&vars(["X"]), &vars(["X"]), &g),
            Err(Error::Overlap(_))
        ));
        assert!(matches!(
            idc(&vars(["R"]), &vars(["X"]), &vars(["X"]), &g),
            Err(Error::Overlap(_))
        ));
    }

    #[test]
    fn bow_hedge_witness() {
        let g = Admg::builder()
            .var("X", 2)
            .var("Y", 2)
            .edge("X", "Y")
            .confound("X", "Y")
            .build()
            .unwrap();
        let t = id(&vars(["Y"]), &vars(["X"]), &g).unwrap();
        assert_eq!(t.trace.tags(), vec![Step::S5]);
        let h = t.outcome.unwrap_err();
        assert_eq!(h.f, vars(["X", "Y"]));
        assert_eq!(h.f_prime, vars(["Y"]));
        assert!(h.f_prime.is_subset(&h.f));
    }

    #[test]
    fn chain_rule2_moves_evidence() {
        let g = Admg::builder()
            .var("A", 2)
            .var("B", 2)
            .var("C", 2)
            .edge("A", "B")
            .edge("B", "C")
            .build()
            .unwrap();
        let (x, z) = rule2_reduction(&vars(["C"]), &vars(["A"]), &vars(["B"]), &g).unwrap();
        assert_eq!(x, vars(["A", "B"]));
        assert!(z.is_empty());
    }
}
