//! Compiles an identifiable query into a network of conditional samplers.
//!
//! [`idgen`] walks the same recursion as [`crate::identify::id`], but instead
//! of writing down an expression it trains one conditional model per factor,
//! regenerating interventional training data whenever the recursion moves into
//! a larger c-component. Sampling the resulting [`SamplingNetwork`] in order
//! with the intervention values fixed yields draws from `P_x(y)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::admg::{Admg, VarSet, Variable};
use crate::dist::{decode, state_count, Assignment, DistTable};
use crate::error::{invalid, Error, Result};
use crate::identify::{check_query, rule2_reduction, Hedge, Step, TraceLog, Traced};
use crate::models::{
    exact_conditional, fit_conditional, uniform_model, ConditionalModel, CptModel, Dataset,
    ModelKind,
};
use crate::rows;

/// `P_do(targets | given)` with concrete intervention and evidence values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuerySpec {
    pub targets: VarSet,
    pub intervention: Assignment,
    pub given: Assignment,
}

impl QuerySpec {
    pub fn do_vars(&self) -> VarSet {
        self.intervention.keys().map(String::as_str).collect()
    }

    pub fn given_vars(&self) -> VarSet {
        self.given.keys().map(String::as_str).collect()
    }

    /// Checks names, state ranges and disjointness against `g`.
    pub fn check(&self, g: &Admg) -> Result<()> {
        check_query(g, &self.targets, &self.do_vars(), &self.given_vars())?;
        for (name, &v) in self.intervention.iter().chain(&self.given) {
            if v >= g.cardinality(name)? {
                return Err(invalid(format!("{name}={v} is out of range")));
            }
        }
        Ok(())
    }
}

fn parse_assignment(text: &str, line: usize) -> Result<Assignment> {
    let mut out = Assignment::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = item.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected NAME=VALUE, found `{item}`"),
        })?;
        let value: usize = value.trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad value in `{item}`"),
        })?;
        if out.insert(name.trim().to_string(), value).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("`{}` assigned twice", name.trim()),
            });
        }
    }
    Ok(out)
}

impl FromStr for QuerySpec {
    type Err = Error;

    /// `key=value` lines: `target=Y,Z`, `do=X=1,W=0`, `given=A=0`.
    fn from_str(text: &str) -> Result<Self> {
        let mut q = QuerySpec::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: no + 1,
                message: format!("expected key=value, found `{line}`"),
            })?;
            match key.trim() {
                "target" => {
                    q.targets = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .collect()
                }
                "do" => q.intervention = parse_assignment(value, no + 1)?,
                "given" => q.given = parse_assignment(value, no + 1)?,
                other => {
                    return Err(Error::Parse {
                        line: no + 1,
                        message: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        if q.targets.is_empty() {
            return Err(Error::EmptyTargets);
        }
        Ok(q)
    }
}

impl fmt::Display for QuerySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |a: &Assignment| {
            a.iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "P_{{{}}}({}",
            list(&self.intervention),
            self.targets.iter().collect::<Vec<_>>().join(",")
        )?;
        if !self.given.is_empty() {
            write!(f, " | {}", list(&self.given))?;
        }
        write!(f, ")")
    }
}

/// A network node: a trained model, or a placeholder whose value is supplied
/// from outside. Placeholders may carry a fallback sampler used when no value
/// is supplied.
#[derive(Debug, Clone)]
pub struct NetworkNode {
    pub variable: Variable,
    pub model: Option<Arc<dyn ConditionalModel>>,
    pub fallback: Option<Arc<dyn ConditionalModel>>,
}

impl NetworkNode {
    pub fn is_placeholder(&self) -> bool {
        self.model.is_none()
    }
}

/// Directed network of conditional samplers. Edges run from each context
/// variable to the model that consumes it, and node order is inherited from
/// the root graph's topological order.
#[derive(Debug, Clone)]
pub struct SamplingNetwork {
    order: Arc<[String]>,
    nodes: BTreeMap<String, NetworkNode>,
}

impl SamplingNetwork {
    pub fn new(order: Arc<[String]>) -> Self {
        Self {
            order,
            nodes: BTreeMap::new(),
        }
    }

    pub fn global_order(&self) -> &[String] {
        &self.order
    }

    /// Nodes in global order.
    pub fn nodes(&self) -> impl Iterator<Item = &NetworkNode> {
        self.order.iter().filter_map(|n| self.nodes.get(n))
    }

    pub fn node(&self, name: &str) -> Option<&NetworkNode> {
        self.nodes.get(name)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn variables(&self) -> Vec<Variable> {
        self.nodes().map(|n| n.variable.clone()).collect()
    }

    pub fn names(&self) -> VarSet {
        self.nodes.keys().map(String::as_str).collect()
    }

    pub fn placeholders(&self) -> VarSet {
        self.nodes()
            .filter(|n| n.is_placeholder())
            .map(|n| n.variable.name.as_str())
            .collect()
    }

    pub fn modeled(&self) -> VarSet {
        self.nodes()
            .filter(|n| !n.is_placeholder())
            .map(|n| n.variable.name.as_str())
            .collect()
    }

    /// `(context variable, consumer)` pairs in global order of the consumer.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for n in self.nodes() {
            if let Some(m) = &n.model {
                for c in m.context() {
                    out.push((c.name.clone(), n.variable.name.clone()));
                }
            }
        }
        out
    }

    pub fn add_placeholder(&mut self, v: Variable) {
        self.nodes.entry(v.name.clone()).or_insert(NetworkNode {
            variable: v,
            model: None,
            fallback: None,
        });
    }

    /// Installs `model` for its target. A placeholder for the same variable is
    /// replaced; a different model already present is an error.
    pub fn add_model(&mut self, model: Arc<dyn ConditionalModel>) -> Result<()> {
        let v = model.target().clone();
        if !self.order.contains(&v.name) {
            return Err(invalid(format!("`{}` is not in the global order", v.name)));
        }
        match self.nodes.get_mut(&v.name) {
            Some(NetworkNode { model: Some(m), .. }) if !Arc::ptr_eq(m, &model) => {
                Err(invalid(format!("two models for `{}`", v.name)))
            }
            Some(node) => {
                node.model = Some(model);
                Ok(())
            }
            None => {
                self.nodes.insert(
                    v.name.clone(),
                    NetworkNode {
                        variable: v,
                        model: Some(model),
                        fallback: None,
                    },
                );
                Ok(())
            }
        }
    }

    pub fn set_fallback(&mut self, name: &str, model: Arc<dyn ConditionalModel>) -> Result<()> {
        match self.nodes.get_mut(name) {
            Some(node) if node.is_placeholder() => {
                node.fallback = Some(model);
                Ok(())
            }
            Some(_) => Err(invalid(format!("`{name}` is not a placeholder"))),
            None => Err(Error::UnknownVariable(name.to_string())),
        }
    }

    /// Structural checks: every context variable is a node that comes earlier
    /// in the global order (which also makes the network acyclic), every model
    /// sits on its own target, and every placeholder outside `inputs` has a
    /// fallback sampler.
    pub fn validate(&self, inputs: &VarSet) -> Result<()> {
        let rank: HashMap<&str, usize> = self
            .order
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        for (name, node) in &self.nodes {
            if node.variable.name != *name {
                return Err(invalid(format!(
                    "node `{name}` holds `{}`",
                    node.variable.name
                )));
            }
            let r = *rank
                .get(name.as_str())
                .ok_or_else(|| invalid(format!("`{name}` is not in the global order")))?;
            match &node.model {
                Some(m) => {
                    if m.target() != &node.variable {
                        return Err(invalid(format!(
                            "model on `{name}` targets `{}`",
                            m.target().name
                        )));
                    }
                    for c in m.context() {
                        if !self.nodes.contains_key(&c.name) {
                            return Err(invalid(format!(
                                "context `{}` of `{name}` is not a node",
                                c.name
                            )));
                        }
                        if rank[c.name.as_str()] >= r {
                            return Err(invalid(format!(
                                "edge {} -> {name} goes against the global order",
                                c.name
                            )));
                        }
                    }
                }
                None => {
                    if node.fallback.is_none() && !inputs.contains(name) {
                        return Err(invalid(format!("placeholder `{name}` has no value source")));
                    }
                }
            }
        }
        if !self.is_acyclic() {
            return Err(invalid("network has a cycle"));
        }
        Ok(())
    }

    /// Kahn's algorithm over the context edges.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg: HashMap<&str, usize> = self.nodes.keys().map(|k| (k.as_str(), 0)).collect();
        let mut out: HashMap<&str, Vec<&str>> = HashMap::new();
        for n in self.nodes.values() {
            if let Some(m) = &n.model {
                for c in m.context() {
                    if let Some(d) = indeg.get_mut(n.variable.name.as_str()) {
                        *d += 1;
                    }
                    out.entry(c.name.as_str())
                        .or_default()
                        .push(n.variable.name.as_str());
                }
            }
        }
        let mut ready: Vec<&str> = indeg
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(k, _)| *k)
            .collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for &w in out.get(v).map(Vec::as_slice).unwrap_or(&[]) {
                if let Some(d) = indeg.get_mut(w) {
                    *d -= 1;
                    if *d == 0 {
                        ready.push(w);
                    }
                }
            }
        }
        seen == self.nodes.len()
    }

    /// Text manifest: the global order, then one `node` line per node in
    /// order followed by its table rows.
    pub fn to_manifest(&self) -> Result<String> {
        let mut out = format!("order {}\n", self.order.join(" "));
        for n in self.nodes() {
            let v = &n.variable;
            match &n.model {
                None => {
                    let fb = if n.fallback.is_some() {
                        " fallback"
                    } else {
                        ""
                    };
                    let _ = writeln!(out, "node {} {} placeholder{fb}", v.name, v.cardinality);
                }
                Some(m) => {
                    let ctx: Vec<&str> = m.context().iter().map(|c| c.name.as_str()).collect();
                    let _ = writeln!(
                        out,
                        "node {} {} {}{}{}",
                        v.name,
                        v.cardinality,
                        m.kind().as_str(),
                        if ctx.is_empty() { "" } else { " " },
                        ctx.join(" ")
                    );
                    let table = m
                        .table()
                        .ok_or_else(|| invalid(format!("model for `{}` has no table", v.name)))?;
                    let cards: Vec<usize> = m.context().iter().map(|c| c.cardinality).collect();
                    let mut states = vec![0; cards.len()];
                    for (r, row) in table.chunks_exact(v.cardinality).enumerate() {
                        decode(r, &cards, &mut states);
                        let key = if states.is_empty() {
                            "-".to_string()
                        } else {
                            states
                                .iter()
                                .map(usize::to_string)
                                .collect::<Vec<_>>()
                                .join(",")
                        };
                        let probs: Vec<String> = row.iter().map(|p| format!("{p}")).collect();
                        let _ = writeln!(out, "row {key} : {}", probs.join(" "));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn from_manifest(text: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut order: Option<Arc<[String]>> = None;
        let mut net: Option<SamplingNetwork> = None;
        let mut pending: Option<(usize, Variable, ModelKind, Vec<Variable>, Vec<f64>)> = None;
        let mut vars: HashMap<String, Variable> = HashMap::new();

        fn finish(
            net: &mut SamplingNetwork,
            pending: Option<(usize, Variable, ModelKind, Vec<Variable>, Vec<f64>)>,
        ) -> Result<()> {
            if let Some((line, v, kind, ctx, probs)) = pending {
                let m = CptModel::new(kind, v, ctx, probs).map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?;
                net.add_model(Arc::new(m))?;
            }
            Ok(())
        }

        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let tok: Vec<&str> = raw.split_whitespace().collect();
            if tok.is_empty() {
                continue;
            }
            match tok[0] {
                "order" => {
                    if order.is_some() {
                        return Err(perr(line, "repeated order line".into()));
                    }
                    let o: Arc<[String]> = tok[1..].iter().map(|s| s.to_string()).collect();
                    net = Some(SamplingNetwork::new(o.clone()));
                    order = Some(o);
                }
                "node" => {
                    let n = net
                        .as_mut()
                        .ok_or_else(|| perr(line, "node before order".into()))?;
                    finish(n, pending.take())?;
                    if tok.len() < 4 {
                        return Err(perr(line, "expected `node NAME CARD KIND ...`".into()));
                    }
                    let card: usize = tok[2]
                        .parse()
                        .map_err(|_| perr(line, format!("bad cardinality `{}`", tok[2])))?;
                    let v = Variable::new(tok[1], card);
                    vars.insert(v.name.clone(), v.clone());
                    if tok[3] == "placeholder" {
                        n.add_placeholder(v.clone());
                        match tok.get(4) {
                            None => {}
                            Some(&"fallback") => {
                                n.set_fallback(&v.name, Arc::new(uniform_model(&v)))?
                            }
                            Some(t) => return Err(perr(line, format!("unexpected `{t}`"))),
                        }
                    } else {
                        let kind: ModelKind = tok[3]
                            .parse()
                            .map_err(|e: Error| perr(line, e.to_string()))?;
                        let ctx = tok[4..]
                            .iter()
                            .map(|c| {
                                vars.get(*c).cloned().ok_or_else(|| {
                                    perr(line, format!("context `{c}` not declared earlier"))
                                })
                            })
                            .collect::<Result<Vec<_>>>()?;
                        pending = Some((line, v, kind, ctx, Vec::new()));
                    }
                }
                "row" => {
                    let p = pending
                        .as_mut()
                        .ok_or_else(|| perr(line, "row outside a model node".into()))?;
                    let colon = tok
                        .iter()
                        .position(|t| *t == ":")
                        .ok_or_else(|| perr(line, "expected `row KEY : PROBS`".into()))?;
                    for t in &tok[colon + 1..] {
                        p.4.push(
                            t.parse()
                                .map_err(|_| perr(line, format!("bad probability `{t}`")))?,
                        );
                    }
                }
                other => return Err(perr(line, format!("unknown line `{other}`"))),
            }
        }
        let mut n = net.ok_or_else(|| perr(1, "missing order line".into()))?;
        finish(&mut n, pending)?;
        Ok(n)
    }
}

/// Combines the networks built for sibling c-components. A placeholder is
/// replaced by the model another part trains for the same variable.
pub fn merge_network(parts: Vec<SamplingNetwork>) -> Result<SamplingNetwork> {
    let mut it = parts.into_iter();
    let mut out = it.next().ok_or_else(|| invalid("nothing to merge"))?;
    for part in it {
        if part.order != out.order {
            return Err(invalid("parts disagree on the global order"));
        }
        for (_, node) in part.nodes {
            match node.model {
                Some(m) => out.add_model(m)?,
                None => {
                    out.add_placeholder(node.variable.clone());
                    if let Some(f) = node.fallback {
                        let slot = out.nodes.get_mut(&node.variable.name).expect("just added");
                        if slot.is_placeholder() && slot.fallback.is_none() {
                            slot.fallback = Some(f);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Training data for one recursion level: finite samples, or the exact law
/// the samples would be drawn from.
#[derive(Debug, Clone)]
pub enum TrainingData {
    Samples(Arc<Dataset>),
    Exact(Arc<DistTable>),
}

impl TrainingData {
    pub fn columns(&self) -> VarSet {
        match self {
            TrainingData::Samples(d) => d.names().into_iter().collect(),
            TrainingData::Exact(t) => t.names().into_iter().collect(),
        }
    }

    pub fn variables(&self) -> Vec<Variable> {
        match self {
            TrainingData::Samples(d) => d.variables().to_vec(),
            TrainingData::Exact(t) => t.variables().to_vec(),
        }
    }

    fn restrict(&self, keep: &VarSet) -> Result<TrainingData> {
        Ok(match self {
            TrainingData::Samples(d) => TrainingData::Samples(Arc::new(d.select(keep)?)),
            TrainingData::Exact(t) => {
                let names: Vec<&str> = t.names().into_iter().filter(|n| keep.contains(n)).collect();
                TrainingData::Exact(Arc::new(t.marginal(&names)?))
            }
        })
    }

    fn fit(&self, target: &str, context: &[&str]) -> Result<Arc<dyn ConditionalModel>> {
        Ok(match self {
            TrainingData::Samples(d) => Arc::new(fit_conditional(d, target, context)?),
            TrainingData::Exact(t) => Arc::new(exact_conditional(t, target, context)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proposal {
    /// Intervention values drawn uniformly over their joint domain.
    Uniform,
    /// Intervention values taken from the same row of the current data.
    Marginal,
}

impl FromStr for Proposal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Proposal::Uniform),
            "marginal" => Ok(Proposal::Marginal),
            _ => Err(invalid(format!("unknown proposal `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub proposal: Proposal,
    /// Size of each regenerated dataset relative to the data it replaces.
    pub dprime_mult: f64,
    pub seed: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            proposal: Proposal::Uniform,
            dprime_mult: 1.0,
            seed: 0,
        }
    }
}

/// Arguments of one recursion level.
#[derive(Debug, Clone)]
pub struct RecursionState {
    pub y: VarSet,
    pub x: VarSet,
    pub g: Admg,
    pub d: TrainingData,
    /// Variables intervened on while regenerating `d`.
    pub x_hat: VarSet,
    /// `g` plus `x_hat`, with edges into `x_hat` cut.
    pub g_hat: Admg,
    /// Topological order of the root graph.
    pub order: Arc<[String]>,
}

impl RecursionState {
    pub fn initial(y: &VarSet, x: &VarSet, g: &Admg, d: TrainingData) -> Result<Self> {
        check_query(g, y, x, &VarSet::new())?;
        let cols = d.columns();
        if let Some(v) = g.names().find(|v| !cols.contains(v)) {
            return Err(invalid(format!("training data has no column `{v}`")));
        }
        for v in d.variables() {
            if g.contains(&v.name) && g.cardinality(&v.name)? != v.cardinality {
                return Err(invalid(format!(
                    "cardinality of `{}` differs from the graph",
                    v.name
                )));
            }
        }
        Ok(Self {
            y: y.clone(),
            x: x.clone(),
            g: g.clone(),
            d,
            x_hat: VarSet::new(),
            g_hat: g.clone(),
            order: g.topological_order().into(),
        })
    }
}

/// Placeholders for `x ∪ x_hat`, then one model per target in global order.
/// Each model conditions on every earlier variable of `g_hat` that the data
/// has a column for.
pub fn conditional_gms(
    targets: &VarSet,
    x: &VarSet,
    st: &RecursionState,
) -> Result<SamplingNetwork> {
    let mut h = SamplingNetwork::new(st.order.clone());
    for v in x.union(&st.x_hat).iter() {
        h.add_placeholder(st.g_hat.variable(v)?.clone());
    }
    let cols = st.d.columns();
    let mut prefix: Vec<&str> = Vec::new();
    for v in st.order.iter().filter(|v| st.g_hat.contains(v)) {
        if targets.contains(v) {
            if !cols.contains(v) {
                return Err(invalid(format!("training data has no column `{v}`")));
            }
            h.add_model(st.d.fit(v, &prefix)?)?;
        }
        if cols.contains(v) {
            prefix.push(v);
        }
    }
    Ok(h)
}

/// Samples every network variable for `n` rows. `inputs` fills the
/// placeholder cells of a row, indexed like [`SamplingNetwork::variables`];
/// models then run in global order.
fn execute<F>(h: &SamplingNetwork, n: usize, seed: u64, inputs: F) -> Result<Dataset>
where
    F: Fn(&mut dyn RngCore, usize, &mut [u32]) + Sync,
{
    let vars = h.variables();
    let pos: HashMap<&str, usize> = vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let mut plan: Vec<(usize, &dyn ConditionalModel, Vec<usize>)> = Vec::new();
    for (i, node) in h.nodes().enumerate() {
        if let Some(m) = &node.model {
            let ctx = m
                .context()
                .iter()
                .map(|c| {
                    pos.get(c.name.as_str())
                        .copied()
                        .ok_or_else(|| invalid(format!("context `{}` is not a node", c.name)))
                })
                .collect::<Result<Vec<_>>>()?;
            plan.push((i, m.as_ref(), ctx));
        }
    }
    let flat = rows::generate(n, vars.len(), seed, |rng, r, row| {
        inputs(rng, r, row);
        let mut ctx = Vec::new();
        for (i, m, c) in &plan {
            ctx.clear();
            ctx.extend(c.iter().map(|&k| row[k] as usize));
            row[*i] = m.draw(&ctx, rng) as u32;
        }
    });
    Ok(Dataset::from_row_major(vars, &flat))
}

/// Ancestral sampling with `fixed` values for placeholders. Placeholders not
/// in `fixed` are drawn from their fallback sampler.
pub fn ancestral_sample(
    h: &SamplingNetwork,
    fixed: &Assignment,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(invalid("row count must be positive"));
    }
    let mut fill: Vec<(usize, std::result::Result<u32, Arc<dyn ConditionalModel>>)> = Vec::new();
    for (i, node) in h.nodes().enumerate() {
        if !node.is_placeholder() {
            continue;
        }
        let name = &node.variable.name;
        match (fixed.get(name), &node.fallback) {
            (Some(&v), _) => {
                if v >= node.variable.cardinality {
                    return Err(invalid(format!("{name}={v} is out of range")));
                }
                fill.push((i, Ok(v as u32)));
            }
            (None, Some(f)) => fill.push((i, Err(f.clone()))),
            (None, None) => return Err(invalid(format!("placeholder `{name}` is unassigned"))),
        }
    }
    execute(h, n, seed, |rng, _, row| {
        for (i, src) in &fill {
            row[*i] = match src {
                Ok(v) => *v,
                Err(m) => m.draw(&[], rng) as u32,
            };
        }
    })
}

/// Exact law of every network variable when the placeholders are drawn from
/// `inputs`. The table lists variables in global order.
pub fn network_law(h: &SamplingNetwork, inputs: &DistTable) -> Result<DistTable> {
    let vars = h.variables();
    let pos: HashMap<&str, usize> = vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let placeholders = h.placeholders();
    let input_names = inputs.names();
    if input_names.len() != placeholders.len()
        || input_names.iter().any(|n| !placeholders.contains(n))
    {
        return Err(invalid("input law must cover exactly the placeholders"));
    }
    let in_pos: Vec<usize> = input_names.iter().map(|n| pos[n]).collect();
    let mut entries: Vec<(Vec<usize>, f64)> = inputs
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(s, p)| {
            let mut row = vec![0; vars.len()];
            for (k, &i) in in_pos.iter().enumerate() {
                row[i] = s[k];
            }
            (row, p)
        })
        .collect();
    for (i, node) in h.nodes().enumerate() {
        let Some(m) = &node.model else { continue };
        let ctx: Vec<usize> = m.context().iter().map(|c| pos[c.name.as_str()]).collect();
        let mut next = Vec::with_capacity(entries.len() * node.variable.cardinality);
        for (row, p) in entries {
            let c: Vec<usize> = ctx.iter().map(|&k| row[k]).collect();
            for (v, q) in m.probabilities(&c).iter().enumerate() {
                if *q > 0.0 {
                    let mut r = row.clone();
                    r[i] = v;
                    next.push((r, p * q));
                }
            }
        }
        entries = next;
    }
    let cards: Vec<usize> = vars.iter().map(|v| v.cardinality).collect();
    let mut probs = vec![0.0; state_count(&vars)];
    for (row, p) in entries {
        let idx = row.iter().zip(&cards).fold(0, |acc, (&s, &c)| acc * c + s);
        probs[idx] += p;
    }
    DistTable::new(vars, probs)
}

/// Point masses on `fixed` and uniform laws on the other placeholders, which
/// must carry a fallback.
pub fn input_law(h: &SamplingNetwork, fixed: &Assignment) -> Result<DistTable> {
    let mut law = DistTable::unit();
    for node in h.nodes().filter(|n| n.is_placeholder()) {
        let v = &node.variable;
        let part = match fixed.get(&v.name) {
            Some(&s) => DistTable::point_mass(vec![v.clone()], &[s])?,
            None if node.fallback.is_some() => DistTable::uniform(vec![v.clone()]),
            None => return Err(invalid(format!("placeholder `{}` is unassigned", v.name))),
        };
        law = law.product(&part)?;
    }
    Ok(law)
}

/// Keeps the target columns.
pub fn project_targets(d: &Dataset, y: &VarSet) -> Result<Dataset> {
    d.select(y)
}

fn derive_seed(seed: u64, k: u64) -> u64 {
    seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Regenerates training data for the c-component `s_prime` that strictly
/// contains the single c-component of `g \ x`. The variables `x \ s_prime`
/// are drawn from the proposal, earlier intervened values are reused row by
/// row, and `s_prime` is sampled through models fitted on the current data.
pub fn update(
    st: &RecursionState,
    s_prime: &VarSet,
    cfg: &BuildConfig,
    seed: u64,
) -> Result<RecursionState> {
    if s_prime.is_empty() {
        return Err(invalid("empty c-component"));
    }
    let x_z = st.x.difference(s_prime);
    if x_z.is_empty() {
        return Err(invalid(
            "no intervened variable lies outside the c-component",
        ));
    }
    let h = conditional_gms(s_prime, &x_z, st)?;
    let x_hat2 = st.x_hat.union(&x_z);
    let d2 = match &st.d {
        TrainingData::Samples(d) => {
            if d.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let n = ((d.n_rows() as f64) * cfg.dprime_mult).round().max(1.0) as usize;
            let vars = h.variables();
            let mut sources: Vec<(usize, usize, Option<usize>)> = Vec::new();
            for (i, v) in vars.iter().enumerate() {
                if !x_hat2.contains(&v.name) {
                    continue;
                }
                let own = if st.x_hat.contains(&v.name) || cfg.proposal == Proposal::Marginal {
                    Some(
                        d.position(&v.name)
                            .ok_or_else(|| invalid(format!("no column `{}`", v.name)))?,
                    )
                } else {
                    None
                };
                sources.push((i, v.cardinality, own));
            }
            let rows_in = d.n_rows();
            let mut out = execute(&h, n, seed, |rng, r, row| {
                for &(i, card, own) in &sources {
                    row[i] = match own {
                        Some(c) => d.column_at(c)[r % rows_in],
                        None => rng.gen_range(0..card as u32),
                    };
                }
            })?;
            out.set_intervened(x_hat2.clone())?;
            TrainingData::Samples(Arc::new(out))
        }
        TrainingData::Exact(t) => {
            let carried: VarSet = if cfg.proposal == Proposal::Marginal {
                x_hat2.clone()
            } else {
                st.x_hat.clone()
            };
            let names: Vec<&str> = t
                .names()
                .into_iter()
                .filter(|n| carried.contains(n))
                .collect();
            let mut law = t.marginal(&names)?;
            if cfg.proposal == Proposal::Uniform {
                for v in st.g_hat.ordered(&x_z) {
                    law = law.product(&DistTable::uniform(vec![st.g_hat.variable(&v)?.clone()]))?;
                }
            }
            TrainingData::Exact(Arc::new(network_law(&h, &law)?))
        }
    };
    let keep = s_prime.union(&x_hat2);
    Ok(RecursionState {
        y: st.y.clone(),
        x: st.x.intersection(s_prime),
        g: st.g.induced_subgraph(s_prime)?,
        d: d2,
        x_hat: x_hat2.clone(),
        g_hat: st.g_hat.induced_subgraph(&keep)?.remove_incoming(&x_hat2)?,
        order: st.order.clone(),
    })
}

struct GenRun<'a> {
    cfg: &'a BuildConfig,
    trace: TraceLog,
    updates: u64,
}

impl GenRun<'_> {
    fn rec(
        &mut self,
        st: RecursionState,
        depth: usize,
    ) -> Result<std::result::Result<SamplingNetwork, Hedge>> {
        let v = st.g.all();
        if st.x.is_empty() {
            self.trace.push(depth, Step::S1, &st.y, &st.x);
            return Ok(Ok(conditional_gms(&v, &st.x, &st)?));
        }
        let an = st.g.ancestors(&st.y)?;
        if an != v {
            self.trace.push(depth, Step::S2, &st.y, &st.x);
            let keep = an.union(&st.x_hat);
            let next = RecursionState {
                y: st.y.clone(),
                x: st.x.intersection(&an),
                g: st.g.induced_subgraph(&an)?,
                d: st.d.restrict(&keep)?,
                g_hat: st.g_hat.induced_subgraph(&keep)?,
                x_hat: st.x_hat.clone(),
                order: st.order.clone(),
            };
            return self.rec(next, depth + 1);
        }
        let w = v
            .difference(&st.x)
            .difference(&st.g.remove_incoming(&st.x)?.ancestors(&st.y)?);
        if !w.is_empty() {
            self.trace.push(depth, Step::S3, &st.y, &st.x);
            let mut h = match self.rec(
                RecursionState {
                    x: st.x.union(&w),
                    ..st.clone()
                },
                depth + 1,
            )? {
                Ok(h) => h,
                Err(e) => return Ok(Err(e)),
            };
            for name in w.iter() {
                if h.node(name).is_some_and(NetworkNode::is_placeholder) {
                    let var = st.g.variable(name)?.clone();
                    h.set_fallback(name, Arc::new(uniform_model(&var)))?;
                }
            }
            return Ok(Ok(h));
        }
        let parts = st.g.without(&st.x)?.c_components();
        if parts.len() > 1 {
            self.trace.push(depth, Step::S4, &st.y, &st.x);
            let mut nets = Vec::with_capacity(parts.len());
            for s in &parts {
                let sub = RecursionState {
                    y: s.clone(),
                    x: v.difference(s),
                    ..st.clone()
                };
                match self.rec(sub, depth + 1)? {
                    Ok(h) => nets.push(h),
                    Err(e) => return Ok(Err(e)),
                }
            }
            return Ok(Ok(merge_network(nets)?));
        }
        let s = &parts[0];
        let whole = st.g.c_components();
        if whole.len() == 1 {
            self.trace.push(depth, Step::S5, &st.y, &st.x);
            return Ok(Err(Hedge {
                f: v,
                f_prime: s.clone(),
            }));
        }
        if whole.contains(s) {
            self.trace.push(depth, Step::S6, &st.y, &st.x);
            return Ok(Ok(conditional_gms(s, &st.x, &st)?));
        }
        let s_prime = whole
            .iter()
            .find(|c| s.is_subset(c))
            .expect("a c-component of G \\ X lies inside one of G")
            .clone();
        self.trace.push(depth, Step::S7, &st.y, &st.x);
        let seed = derive_seed(self.cfg.seed, self.updates);
        self.updates += 1;
        let next = update(&st, &s_prime, self.cfg, seed)?;
        self.rec(next, depth + 1)
    }
}

/// Builds a sampling network for `P_x(y)` in `g` from `data`. Placeholders left
/// for variables the query does not depend on get a uniform fallback.
pub fn idgen(
    y: &VarSet,
    x: &VarSet,
    g: &Admg,
    data: TrainingData,
    cfg: &BuildConfig,
) -> Result<Traced<SamplingNetwork>> {
    let st = RecursionState::initial(y, x, g, data)?;
    idgen_from(st, cfg)
}

/// Runs the recursion from an arbitrary state.
pub fn idgen_from(st: RecursionState, cfg: &BuildConfig) -> Result<Traced<SamplingNetwork>> {
    let mut run = GenRun {
        cfg,
        trace: TraceLog::default(),
        updates: 0,
    };
    let outcome = run.rec(st, 0)?;
    Ok(Traced {
        outcome,
        trace: run.trace,
    })
}

/// Builds a network for `q`, conditional or not.
pub fn build_query(
    q: &QuerySpec,
    g: &Admg,
    data: TrainingData,
    cfg: &BuildConfig,
) -> Result<Traced<SamplingNetwork>> {
    q.check(g)?;
    if q.given.is_empty() {
        idgen(&q.targets, &q.do_vars(), g, data, cfg)
    } else {
        idc_gen(q, g, data, cfg)
    }
}

/// Samples the targets of `q` from a network built for it.
pub fn sample_query(h: &SamplingNetwork, q: &QuerySpec, n: usize, seed: u64) -> Result<Dataset> {
    let mut fixed = q.intervention.clone();
    fixed.extend(q.given.iter().map(|(k, v)| (k.clone(), *v)));
    let d = ancestral_sample(h, &fixed, n, seed)?;
    project_targets(&d, &q.targets)
}

/// Exact law of the targets of `q` under `h`, with fallback placeholders
/// drawn uniformly.
pub fn query_law(h: &SamplingNetwork, q: &QuerySpec) -> Result<DistTable> {
    let mut fixed = q.intervention.clone();
    fixed.extend(q.given.iter().map(|(k, v)| (k.clone(), *v)));
    let law = network_law(h, &input_law(h, &fixed)?)?;
    let names: Vec<&str> = law
        .names()
        .into_iter()
        .filter(|n| q.targets.contains(n))
        .collect();
    law.marginal(&names)
}

/// Conditional query `P_x(y | z)`. Conditioning variables that the graph
/// lets us treat as interventions are moved first. If evidence remains, the
/// joint network for `P_x'(y, z')` generates a training set over a uniform
/// grid of intervention values, and one model per target is fitted with the
/// interventions, the evidence and earlier targets as context. The returned
/// network has placeholders for `x' ∪ z'` only, and its order puts those
/// inputs ahead of the targets.
pub fn idc_gen(
    q: &QuerySpec,
    g: &Admg,
    data: TrainingData,
    cfg: &BuildConfig,
) -> Result<Traced<SamplingNetwork>> {
    if q.given.is_empty() {
        return Err(invalid("conditional query needs evidence; use idgen"));
    }
    q.check(g)?;
    let x = q.do_vars();
    let z = q.given_vars();
    let (x2, z2) = rule2_reduction(&q.targets, &x, &z, g)?;
    let n_rows = match &data {
        TrainingData::Samples(d) => Some(d.n_rows()),
        TrainingData::Exact(_) => None,
    };
    let joint = idgen(&q.targets.union(&z2), &x2, g, data, cfg)?;
    if z2.is_empty() {
        return Ok(joint);
    }
    let h = match joint.outcome {
        Ok(h) => h,
        Err(e) => {
            return Ok(Traced {
                outcome: Err(e),
                trace: joint.trace,
            })
        }
    };
    let keep = q.targets.union(&z2).union(&x2);
    let train = match n_rows {
        Some(n) => {
            let n = ((n as f64) * cfg.dprime_mult).round().max(1.0) as usize;
            let mut fill: Vec<(usize, u32)> = Vec::new();
            let mut fallback: Vec<(usize, Arc<dyn ConditionalModel>)> = Vec::new();
            for (i, node) in h.nodes().enumerate() {
                if !node.is_placeholder() {
                    continue;
                }
                if x2.contains(&node.variable.name) {
                    fill.push((i, node.variable.cardinality as u32));
                } else if let Some(f) = &node.fallback {
                    fallback.push((i, f.clone()));
                } else {
                    return Err(invalid(format!(
                        "placeholder `{}` is unassigned",
                        node.variable.name
                    )));
                }
            }
            let seed = derive_seed(cfg.seed, u64::MAX);
            let d = execute(&h, n, seed, |rng, _, row| {
                for &(i, card) in &fill {
                    row[i] = rng.gen_range(0..card);
                }
                for (i, f) in &fallback {
                    row[*i] = f.draw(&[], rng) as u32;
                }
            })?;
            TrainingData::Samples(Arc::new(d.select(&keep)?))
        }
        None => {
            let mut law = DistTable::unit();
            for node in h.nodes().filter(|n| n.is_placeholder()) {
                law = law.product(&DistTable::uniform(vec![node.variable.clone()]))?;
            }
            TrainingData::Exact(Arc::new(network_law(&h, &law)?))
        }
    }
    .restrict(&keep)?;
    let inputs = x2.union(&z2);
    let mut order = g.ordered(&inputs);
    order.extend(
        h.global_order()
            .iter()
            .filter(|v| !inputs.contains(v))
            .cloned(),
    );
    let mut out = SamplingNetwork::new(order.into());
    for v in g.ordered(&inputs) {
        out.add_placeholder(g.variable(&v)?.clone());
    }
    let mut context: Vec<String> = g.ordered(&inputs);
    for v in h.global_order().iter().filter(|v| q.targets.contains(v)) {
        let ctx: Vec<&str> = context.iter().map(String::as_str).collect();
        out.add_model(train.fit(v, &ctx)?)?;
        context.push(v.clone());
    }
    Ok(Traced {
        outcome: Ok(out),
        trace: joint.trace,
    })
}
