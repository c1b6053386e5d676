//! Discrete structural causal models used as ground truth.
//!
//! Each observed variable is a deterministic function of its parents, one
//! private noise variable and the latent confounders on its bidirected edges.
//! Exact joints come from enumerating every noise and latent configuration.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::admg::{Admg, VarSet, Variable};
use crate::dist::{state_count, Assignment, DistTable};
use crate::error::{invalid, Error, Result};
use crate::identify::{id, idc};
use crate::idgen::QuerySpec;
use crate::models::{categorical, Dataset};
use crate::rows;

/// Largest number of noise and latent configurations enumerated exactly.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

/// Binary latent confounder shared by the two endpoints of a bidirected edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Latent {
    pub a: String,
    pub b: String,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScm {
    graph: Admg,
    noise: Vec<Vec<f64>>,
    latents: Vec<Latent>,
    /// Per variable, the output for every (parents, noise, latents) configuration.
    mechanisms: Vec<Vec<u32>>,
    parents: Vec<Vec<usize>>,
    incident: Vec<Vec<usize>>,
    order: Vec<usize>,
}

fn check_probs(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() || p.iter().any(|x| !(*x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(invalid(format!("{what} is not a distribution: {p:?}")));
    }
    Ok(())
}

impl DiscreteScm {
    /// `latents` must list one latent per bidirected edge of `graph`, in the
    /// graph's bidirected edge order. Mechanism tables are indexed by parent
    /// states (graph parent order), then the noise state, then the states of
    /// incident latents, first index most significant.
    pub fn new(
        graph: Admg,
        noise: Vec<Vec<f64>>,
        latents: Vec<Latent>,
        mechanisms: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let n = graph.len();
        if noise.len() != n || mechanisms.len() != n {
            return Err(invalid(
                "one noise distribution and mechanism per variable required",
            ));
        }
        let edges: Vec<(String, String)> = graph
            .bidirected_edges()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        if edges.len() != latents.len()
            || edges
                .iter()
                .zip(&latents)
                .any(|((a, b), l)| *a != l.a || *b != l.b)
        {
            return Err(invalid(
                "latents must match the bidirected edges one to one",
            ));
        }
        for l in &latents {
            check_probs(&l.probs, &format!("latent {} <-> {}", l.a, l.b))?;
        }
        let names: Vec<String> = graph.names().map(str::to_string).collect();
        let pos = |s: &str| graph.position(s).expect("declared");
        let mut parents = Vec::with_capacity(n);
        let mut incident = Vec::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            check_probs(&noise[i], &format!("noise of {name}"))?;
            let ps: Vec<usize> = graph.parents(name)?.into_iter().map(pos).collect();
            let us: Vec<usize> = (0..latents.len())
                .filter(|&k| latents[k].a == *name || latents[k].b == *name)
                .collect();
            let rows = ps
                .iter()
                .map(|&p| graph.variables()[p].cardinality)
                .product::<usize>()
                * noise[i].len()
                * us.iter()
                    .map(|&k| latents[k].probs.len())
                    .product::<usize>();
            if mechanisms[i].len() != rows {
                return Err(invalid(format!(
                    "mechanism of {name} has {} rows, expected {rows}",
                    mechanisms[i].len()
                )));
            }
            let card = graph.variables()[i].cardinality;
            if mechanisms[i].iter().any(|&o| o as usize >= card) {
                return Err(invalid(format!(
                    "mechanism of {name} emits an out-of-range state"
                )));
            }
            parents.push(ps);
            incident.push(us);
        }
        let order = graph.topological_order().iter().map(|s| pos(s)).collect();
        let scm = Self {
            graph,
            noise,
            latents,
            mechanisms,
            parents,
            incident,
            order,
        };
        match scm.exact_joint() {
            Ok(joint) if joint.min() <= 0.0 => Err(invalid(
                "observational distribution is not strictly positive",
            )),
            Ok(_) | Err(Error::BudgetExceeded { .. }) => Ok(scm),
            Err(e) => Err(e),
        }
    }

    /// Noisy-copy model: with probability 0.8 a variable takes
    /// `(offset + Σ inputs) mod cardinality` over its parents and latents,
    /// otherwise a uniformly random state. Latent priors and offsets are
    /// drawn from `seed`.
    pub fn noisy_copy(graph: Admg, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let latents: Vec<Latent> = graph
            .bidirected_edges()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|(a, b)| {
                let p1 = rng.gen_range(0.2..0.4);
                Latent {
                    a,
                    b,
                    probs: vec![1.0 - p1, p1],
                }
            })
            .collect();
        let vars = graph.variables().to_vec();
        let mut noise = Vec::with_capacity(vars.len());
        let mut mechanisms = Vec::with_capacity(vars.len());
        for v in &vars {
            let k = v.cardinality;
            let mut nz = vec![0.8];
            nz.extend(std::iter::repeat(0.2 / k as f64).take(k));
            let offset = rng.gen_range(0..k);
            let mut in_cards: Vec<usize> = graph
                .parents(&v.name)?
                .iter()
                .map(|p| graph.cardinality(p))
                .collect::<Result<_>>()?;
            let n_parents = in_cards.len();
            in_cards.push(k + 1);
            in_cards.extend(
                latents
                    .iter()
                    .filter(|l| l.a == v.name || l.b == v.name)
                    .map(|l| l.probs.len()),
            );
            let rows = in_cards.iter().product::<usize>();
            let mut table = Vec::with_capacity(rows);
            let mut states = vec![0; in_cards.len()];
            for r in 0..rows {
                crate::dist::decode(r, &in_cards, &mut states);
                let noise_state = states[n_parents];
                let out = if noise_state == 0 {
                    let total: usize = states[..n_parents].iter().sum::<usize>()
                        + states[n_parents + 1..].iter().sum::<usize>();
                    (offset + total) % k
                } else {
                    noise_state - 1
                };
                table.push(out as u32);
            }
            noise.push(nz);
            mechanisms.push(table);
        }
        Self::new(graph, noise, latents, mechanisms)
    }

    pub fn graph(&self) -> &Admg {
        &self.graph
    }

    pub fn variables(&self) -> &[Variable] {
        self.graph.variables()
    }

    pub fn noise(&self) -> &[Vec<f64>] {
        &self.noise
    }

    pub fn latents(&self) -> &[Latent] {
        &self.latents
    }

    pub fn mechanisms(&self) -> &[Vec<u32>] {
        &self.mechanisms
    }

    fn card(&self, i: usize) -> usize {
        self.graph.variables()[i].cardinality
    }

    fn mechanism(&self, i: usize, values: &[u32], noise: usize, latent: &[usize]) -> u32 {
        let mut r = 0;
        for &p in &self.parents[i] {
            r = r * self.card(p) + values[p] as usize;
        }
        r = r * self.noise[i].len() + noise;
        for &k in &self.incident[i] {
            r = r * self.latents[k].probs.len() + latent[k];
        }
        self.mechanisms[i][r]
    }

    fn resolve_do(&self, intervention: &Assignment) -> Result<Vec<Option<u32>>> {
        let mut fixed = vec![None; self.graph.len()];
        for (name, &val) in intervention {
            let i = self
                .graph
                .position(name)
                .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
            if val >= self.card(i) {
                return Err(invalid(format!("do({name}={val}) is out of range")));
            }
            fixed[i] = Some(val as u32);
        }
        Ok(fixed)
    }

    /// Exact `P(V)`.
    pub fn exact_joint(&self) -> Result<DistTable> {
        self.exact_interventional(&Assignment::new())
    }

    /// Exact `P_do(V)` with the mechanisms of intervened variables replaced by
    /// constants. The table covers every observed variable in declaration order.
    pub fn exact_interventional(&self, intervention: &Assignment) -> Result<DistTable> {
        let fixed = self.resolve_do(intervention)?;
        let needed = self
            .latents
            .iter()
            .map(|l| l.probs.len() as u128)
            .chain(
                (0..self.graph.len())
                    .filter(|&i| fixed[i].is_none())
                    .map(|i| self.noise[i].len() as u128),
            )
            .try_fold(1u128, |acc, c| acc.checked_mul(c))
            .unwrap_or(u128::MAX);
        if needed > ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded {
                needed,
                budget: ENUMERATION_BUDGET,
            });
        }
        let vars = self.graph.variables().to_vec();
        let cards: Vec<usize> = vars.iter().map(|v| v.cardinality).collect();
        let mut probs = vec![0.0; state_count(&vars)];
        let lat_cards: Vec<usize> = self.latents.iter().map(|l| l.probs.len()).collect();
        let mut lat = vec![0; lat_cards.len()];
        let mut values = vec![0u32; vars.len()];
        for li in 0..lat_cards.iter().product::<usize>() {
            crate::dist::decode(li, &lat_cards, &mut lat);
            let w: f64 = lat
                .iter()
                .zip(&self.latents)
                .map(|(&s, l)| l.probs[s])
                .product();
            if w > 0.0 {
                self.enumerate(0, w, &fixed, &lat, &mut values, &cards, &mut probs);
            }
        }
        DistTable::new(vars, probs)
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        k: usize,
        weight: f64,
        fixed: &[Option<u32>],
        lat: &[usize],
        values: &mut [u32],
        cards: &[usize],
        probs: &mut [f64],
    ) {
        if k == self.order.len() {
            let idx = values
                .iter()
                .zip(cards)
                .fold(0, |acc, (&v, &c)| acc * c + v as usize);
            probs[idx] += weight;
            return;
        }
        let i = self.order[k];
        if let Some(v) = fixed[i] {
            values[i] = v;
            self.enumerate(k + 1, weight, fixed, lat, values, cards, probs);
            return;
        }
        let mut by_value = vec![0.0; cards[i]];
        for (s, &p) in self.noise[i].iter().enumerate() {
            by_value[self.mechanism(i, values, s, lat) as usize] += p;
        }
        for (v, &p) in by_value.iter().enumerate() {
            if p > 0.0 {
                values[i] = v as u32;
                self.enumerate(k + 1, weight * p, fixed, lat, values, cards, probs);
            }
        }
    }

    /// Draws `n` rows of `P_do(V)`; an empty intervention gives observational data.
    pub fn sample(&self, intervention: &Assignment, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(invalid("row count must be positive"));
        }
        let fixed = self.resolve_do(intervention)?;
        let width = self.graph.len();
        let flat = rows::generate(n, width, seed, |rng, _, row| {
            let lat: Vec<usize> = self
                .latents
                .iter()
                .map(|l| categorical(&l.probs, rng.gen()))
                .collect();
            for &i in &self.order {
                row[i] = match fixed[i] {
                    Some(v) => v,
                    None => {
                        let s = categorical(&self.noise[i], rng.gen());
                        self.mechanism(i, row, s, &lat)
                    }
                };
            }
        });
        Ok(Dataset::from_row_major(
            self.graph.variables().to_vec(),
            &flat,
        ))
    }

    /// Exact `P_do(targets | given)` for a query, over the targets in
    /// declaration order.
    pub fn exact_query(&self, q: &QuerySpec) -> Result<DistTable> {
        let joint = self.exact_interventional(&q.intervention)?;
        let cond = if q.given.is_empty() {
            joint
        } else {
            joint.condition(&q.given)?
        };
        let names = self.graph.ordered(&q.targets);
        cond.marginal(&names.iter().map(String::as_str).collect::<Vec<_>>())
    }

    pub fn sample_observational(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.sample(&Assignment::new(), n, seed)
    }

    /// Graph lines followed by `noise`, `latent` and `mech` lines. A mech line
    /// reads `mech V <parent states> <noise> <latent states> <output>`, with
    /// state lists comma separated and `-` for an empty list.
    pub fn to_text(&self) -> String {
        let mut out = self.graph.to_text();
        let fmt_probs = |p: &[f64]| {
            p.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for (v, nz) in self.graph.variables().iter().zip(&self.noise) {
            let _ = writeln!(out, "noise {} {}", v.name, fmt_probs(nz));
        }
        for l in &self.latents {
            let _ = writeln!(out, "latent {} {} {}", l.a, l.b, fmt_probs(&l.probs));
        }
        let list = |s: &[usize]| {
            if s.is_empty() {
                "-".to_string()
            } else {
                s.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
            }
        };
        for (i, v) in self.graph.variables().iter().enumerate() {
            let mut cards: Vec<usize> = self.parents[i].iter().map(|&p| self.card(p)).collect();
            let np = cards.len();
            cards.push(self.noise[i].len());
            cards.extend(
                self.incident[i]
                    .iter()
                    .map(|&k| self.latents[k].probs.len()),
            );
            let mut states = vec![0; cards.len()];
            for (r, &o) in self.mechanisms[i].iter().enumerate() {
                crate::dist::decode(r, &cards, &mut states);
                let _ = writeln!(
                    out,
                    "mech {} {} {} {} {}",
                    v.name,
                    list(&states[..np]),
                    states[np],
                    list(&states[np + 1..]),
                    o
                );
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut noise: HashMap<String, (usize, Vec<f64>)> = HashMap::new();
        let mut latents: HashMap<(String, String), (usize, Vec<f64>)> = HashMap::new();
        let mut mechs: Vec<(usize, Vec<String>)> = Vec::new();
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let floats = |line: usize, toks: &[&str]| -> Result<Vec<f64>> {
            toks.iter()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| perr(line, format!("bad probability `{t}`")))
                })
                .collect()
        };
        let graph = Admg::parse_with(text, |line, tok| match tok[0] {
            "noise" if tok.len() >= 3 => {
                noise.insert(tok[1].to_string(), (line, floats(line, &tok[2..])?));
                Ok(true)
            }
            "latent" if tok.len() >= 4 => {
                let (a, b) = (tok[1].to_string(), tok[2].to_string());
                latents.insert((a, b), (line, floats(line, &tok[3..])?));
                Ok(true)
            }
            "mech" if tok.len() == 6 => {
                mechs.push((line, tok[1..].iter().map(|s| s.to_string()).collect()));
                Ok(true)
            }
            "noise" | "latent" | "mech" => Err(perr(line, format!("malformed `{}` line", tok[0]))),
            _ => Ok(false),
        })?;
        let mut noise_vec = Vec::with_capacity(graph.len());
        for v in graph.variables() {
            let (_, p) = noise
                .remove(&v.name)
                .ok_or_else(|| invalid(format!("no noise distribution for `{}`", v.name)))?;
            noise_vec.push(p);
        }
        if let Some((name, (line, _))) = noise.into_iter().next() {
            return Err(perr(line, format!("noise for unknown variable `{name}`")));
        }
        let mut lat_vec = Vec::new();
        for (a, b) in graph.bidirected_edges() {
            let key = (a.to_string(), b.to_string());
            let alt = (b.to_string(), a.to_string());
            let (_, p) = latents
                .remove(&key)
                .or_else(|| latents.remove(&alt))
                .ok_or_else(|| invalid(format!("no latent for {a} <-> {b}")))?;
            lat_vec.push(Latent {
                a: a.to_string(),
                b: b.to_string(),
                probs: p,
            });
        }
        if let Some((_, (line, _))) = latents.into_iter().next() {
            return Err(perr(line, "latent without a matching confound line".into()));
        }
        let mut tables: Vec<Vec<Option<u32>>> = Vec::with_capacity(graph.len());
        let mut shapes = Vec::with_capacity(graph.len());
        for (i, v) in graph.variables().iter().enumerate() {
            let pc: Vec<usize> = graph
                .parents(&v.name)?
                .iter()
                .map(|p| graph.cardinality(p))
                .collect::<Result<_>>()?;
            let lc: Vec<usize> = lat_vec
                .iter()
                .filter(|l| l.a == v.name || l.b == v.name)
                .map(|l| l.probs.len())
                .collect();
            let rows =
                pc.iter().product::<usize>() * noise_vec[i].len() * lc.iter().product::<usize>();
            tables.push(vec![None; rows]);
            shapes.push((pc, lc));
        }
        let states = |line: usize, s: &str, cards: &[usize]| -> Result<Vec<usize>> {
            let vals: Vec<usize> = if s == "-" {
                Vec::new()
            } else {
                s.split(',')
                    .map(|t| {
                        t.parse()
                            .map_err(|_| perr(line, format!("bad state `{t}`")))
                    })
                    .collect::<Result<_>>()?
            };
            if vals.len() != cards.len() || vals.iter().zip(cards).any(|(v, c)| v >= c) {
                return Err(perr(line, format!("state list `{s}` does not fit")));
            }
            Ok(vals)
        };
        for (line, tok) in mechs {
            let i = graph
                .position(&tok[0])
                .ok_or_else(|| perr(line, format!("unknown variable `{}`", tok[0])))?;
            let (pc, lc) = &shapes[i];
            let ps = states(line, &tok[1], pc)?;
            let nz: usize = tok[2]
                .parse()
                .ok()
                .filter(|&s| s < noise_vec[i].len())
                .ok_or_else(|| perr(line, format!("bad noise state `{}`", tok[2])))?;
            let ls = states(line, &tok[3], lc)?;
            let out: u32 = tok[4]
                .parse()
                .map_err(|_| perr(line, format!("bad output `{}`", tok[4])))?;
            let mut r = ps.iter().zip(pc).fold(0, |acc, (&s, &c)| acc * c + s);
            r = r * noise_vec[i].len() + nz;
            r = ls.iter().zip(lc).fold(r, |acc, (&s, &c)| acc * c + s);
            if tables[i][r].replace(out).is_some() {
                return Err(perr(
                    line,
                    format!("duplicate mechanism row for `{}`", tok[0]),
                ));
            }
        }
        let mut mechanisms = Vec::with_capacity(tables.len());
        for (t, v) in tables.into_iter().zip(graph.variables()) {
            mechanisms.push(
                t.into_iter()
                    .collect::<Option<Vec<u32>>>()
                    .ok_or_else(|| invalid(format!("mechanism of `{}` is incomplete", v.name)))?,
            );
        }
        Self::new(graph, noise_vec, lat_vec, mechanisms)
    }
}

/// Normalized frequency table over `vars`, in dataset column order.
pub fn empirical_distribution(d: &Dataset, vars: &VarSet) -> Result<DistTable> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sel = d.select(vars)?;
    let cards: Vec<usize> = sel.variables().iter().map(|v| v.cardinality).collect();
    let cols: Vec<&[u32]> = sel
        .variables()
        .iter()
        .map(|v| sel.column(&v.name).expect("selected"))
        .collect();
    let mut counts = vec![0u64; cards.iter().product()];
    for r in 0..d.n_rows() {
        let idx = cols
            .iter()
            .zip(&cards)
            .fold(0, |acc, (c, &k)| acc * k + c[r] as usize);
        counts[idx] += 1;
    }
    let n = d.n_rows() as f64;
    DistTable::new(
        sel.variables().to_vec(),
        counts.into_iter().map(|c| c as f64 / n).collect(),
    )
}

/// Total variation distance between two tables over the same variable set.
/// `q` is permuted into the variable order of `p` first.
pub fn tvd(p: &DistTable, q: &DistTable) -> Result<f64> {
    if p.len() != q.len() {
        return p.tvd(q);
    }
    match q.reorder(&p.names()) {
        Ok(q) => p.tvd(&q),
        Err(_) => p.tvd(q),
    }
}

#[derive(Debug, Clone)]
pub struct CatalogQuery {
    pub query: QuerySpec,
    pub identifiable: bool,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub scm: DiscreteScm,
    pub queries: Vec<CatalogQuery>,
}

fn binary_graph(vars: &[&str], edges: &[(&str, &str)], confounded: &[(&str, &str)]) -> Admg {
    Admg::new(
        vars.iter().map(|v| Variable::new(*v, 2)).collect(),
        edges,
        confounded,
    )
    .expect("catalog graph is valid")
}

/// Whether `q` is identifiable in `g`.
pub fn is_identifiable(q: &QuerySpec, g: &Admg) -> Result<bool> {
    let x = q.do_vars();
    let traced = if q.given.is_empty() {
        id(&q.targets, &x, g)?
    } else {
        idc(&q.targets, &x, &q.given_vars(), g)?
    };
    Ok(traced.outcome.is_ok())
}

/// Graphs with reference queries. Every variable is binary and every
/// mechanism is a seeded noisy copy. Identifiability flags are checked
/// against [`id`] and [`idc`] as the catalog is built.
pub fn catalog() -> Vec<CatalogEntry> {
    let query = |text: &str, id_flag: bool| CatalogQuery {
        query: text.parse().expect("catalog query parses"),
        identifiable: id_flag,
    };
    let raw: Vec<(&str, Admg, u64, Vec<CatalogQuery>)> = vec![
        (
            "frontdoor",
            binary_graph(&["X", "S", "R"], &[("X", "S"), ("S", "R")], &[("X", "R")]),
            11,
            vec![query("target=R\ndo=X=1", true)],
        ),
        (
            "backdoor",
            binary_graph(
                &["A", "B", "V", "I"],
                &[("A", "V"), ("A", "B"), ("B", "V"), ("V", "I")],
                &[("B", "I")],
            ),
            12,
            vec![
                query("target=I\ndo=V=1", true),
                query("target=I\ndo=V=1\ngiven=A=1", true),
            ],
        ),
        (
            "crossed",
            binary_graph(
                &["X", "W1", "W2", "Y"],
                &[("X", "W1"), ("W1", "W2"), ("W2", "Y")],
                &[("X", "W2"), ("W1", "Y")],
            ),
            13,
            vec![
                query("target=Y\ndo=X=1", true),
                query("target=Y\ndo=W1=1", true),
            ],
        ),
        (
            "napkin",
            binary_graph(
                &["W1", "W2", "X", "Y"],
                &[("W1", "W2"), ("W2", "X"), ("X", "Y")],
                &[("W1", "X"), ("W1", "Y")],
            ),
            14,
            vec![
                query("target=Y\ndo=X=1", true),
                query("target=Y\ndo=W1=1", true),
            ],
        ),
        (
            "double_napkin",
            binary_graph(
                &["W3", "W4", "R", "W2", "W1", "X"],
                &[
                    ("W3", "W4"),
                    ("R", "W2"),
                    ("W2", "W1"),
                    ("W4", "W1"),
                    ("W2", "X"),
                    ("W1", "X"),
                ],
                &[("W3", "W2"), ("R", "W1"), ("R", "X")],
            ),
            15,
            vec![query("target=W3,W4,W2,W1,X\ndo=R=1", true)],
        ),
        (
            "bow",
            binary_graph(&["X", "Y"], &[("X", "Y")], &[("X", "Y")]),
            16,
            vec![query("target=Y\ndo=X=1", false)],
        ),
        (
            "chain",
            binary_graph(&["A", "B", "C"], &[("A", "B"), ("B", "C")], &[]),
            17,
            vec![query("target=C\ndo=A=1\ngiven=B=1", true)],
        ),
    ];
    raw.into_iter()
        .map(|(name, g, seed, queries)| {
            for q in &queries {
                let found = is_identifiable(&q.query, &g).expect("catalog query is well formed");
                assert_eq!(
                    found, q.identifiable,
                    "identifiability flag of {name} {}",
                    q.query
                );
            }
            CatalogEntry {
                name: name.to_string(),
                scm: DiscreteScm::noisy_copy(g, seed).expect("catalog SCM is valid"),
                queries,
            }
        })
        .collect()
}

/// Random ADMG over `n` variables named `V0..`: a hidden random causal order,
/// each forward pair joined with probability `density`, and `bidirected`
/// distinct confounded pairs (capped at the number of pairs).
pub fn random_admg<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    cardinality: usize,
    density: f64,
    bidirected: usize,
) -> Admg {
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.push((names[order[a]].clone(), names[order[b]].clone()));
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut confounded = Vec::new();
    for _ in 0..bidirected.min(pairs.len()) {
        let (a, b) = pairs.swap_remove(rng.gen_range(0..pairs.len()));
        confounded.push((names[a].clone(), names[b].clone()));
    }
    Admg::new(
        names
            .iter()
            .map(|s| Variable::new(s.as_str(), cardinality))
            .collect(),
        &edges,
        &confounded,
    )
    .expect("forward edges over a permutation are acyclic")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frontdoor() -> DiscreteScm {
        catalog()
            .into_iter()
            .find(|e| e.name == "frontdoor")
            .unwrap()
            .scm
    }

    #[test]
    fn joint_sums_to_one() {
        for e in catalog() {
            let j = e.scm.exact_joint().unwrap();
            assert!((j.total() - 1.0).abs() < 1e-12, "{}", e.name);
            assert!(j.min() > 0.0, "{}", e.name);
        }
    }

    #[test]
    fn empty_do_is_observational() {
        let m = frontdoor();
        assert_eq!(
            m.exact_interventional(&Assignment::new()).unwrap(),
            m.exact_joint().unwrap()
        );
    }

    #[test]
    fn source_do_matches_conditioning() {
        let g = binary_graph(&["A", "B"], &[("A", "B")], &[]);
        let m = DiscreteScm::noisy_copy(g, 3).unwrap();
        let a1 = Assignment::from([("A".to_string(), 1)]);
        let lhs = m.exact_interventional(&a1).unwrap().condition(&a1).unwrap();
        let rhs = m.exact_joint().unwrap().condition(&a1).unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn point_mass_noise_gives_constant_rows() {
        let g = binary_graph(&["A"], &[], &[]);
        let m = DiscreteScm {
            graph: g.clone(),
            noise: vec![vec![1.0]],
            latents: vec![],
            mechanisms: vec![vec![1]],
            parents: vec![vec![]],
            incident: vec![vec![]],
            order: vec![0],
        };
        let d = m.sample_observational(100, 0).unwrap();
        assert!(d.column("A").unwrap().iter().all(|&v| v == 1));
        assert!(DiscreteScm::new(g, vec![vec![1.0]], vec![], vec![vec![1]]).is_err());
    }

    #[test]
    fn single_row_sample() {
        let d = frontdoor().sample_observational(1, 9).unwrap();
        assert_eq!(d.n_rows(), 1);
        let e = empirical_distribution(&d, &d.names().into_iter().collect()).unwrap();
        assert_eq!(e.probs().iter().filter(|&&p| p == 1.0).count(), 1);
    }

    #[test]
    fn text_round_trip() {
        for e in catalog() {
            let text = e.scm.to_text();
            let back = DiscreteScm::parse(&text).unwrap();
            assert_eq!(back, e.scm, "{}", e.name);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut b = Admg::builder();
        for i in 0..16 {
            b = b.var(format!("V{i}"), 2);
        }
        let g = b.build().unwrap();
        let m = DiscreteScm::noisy_copy(g, 0).unwrap();
        assert!(matches!(m.exact_joint(), Err(Error::BudgetExceeded { .. })));
    }
}
