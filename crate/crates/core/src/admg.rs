//! Acyclic directed mixed graphs.
//!
//! Directed edges carry causal influence, bidirected edges stand for a latent
//! confounder shared by exactly two observed variables. Every operation returns
//! a fresh graph; variables always keep their declaration order, which is the
//! tie-break used by every ordering in the crate.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// An observed discrete variable with states `0..cardinality`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    pub name: String,
    pub cardinality: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Self {
        Self {
            name: name.into(),
            cardinality,
        }
    }
}

/// A set of variable names.
///
/// Iteration is lexicographic; use [`Admg::ordered`] when declaration order
/// matters.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarSet(BTreeSet<String>);

impl VarSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn insert(&mut self, name: impl Into<String>) -> bool {
        self.0.insert(name.into())
    }

    pub fn remove(&mut self, name: &str) -> bool {
        self.0.remove(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    /// First shared member, if any.
    pub fn first_common<'a>(&'a self, other: &VarSet) -> Option<&'a str> {
        self.0
            .iter()
            .find(|v| other.0.contains(*v))
            .map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for VarSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        VarSet(iter.into_iter().map(Into::into).collect())
    }
}

impl<'a> IntoIterator for &'a VarSet {
    type Item = &'a String;
    type IntoIter = std::collections::btree_set::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Shorthand for building a [`VarSet`] from string literals.
pub fn vars<const N: usize>(names: [&str; N]) -> VarSet {
    names.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Admg {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    /// sorted (from, to) pairs
    directed: Vec<(usize, usize)>,
    /// sorted (a, b) pairs with a < b
    bidirected: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    spouses: Vec<Vec<usize>>,
}

/// Incremental construction of an [`Admg`]; validation happens in [`build`](Self::build).
#[derive(Debug, Clone, Default)]
pub struct AdmgBuilder {
    variables: Vec<Variable>,
    directed: Vec<(String, String)>,
    bidirected: Vec<(String, String)>,
}

impl AdmgBuilder {
    pub fn var(mut self, name: impl Into<String>, cardinality: usize) -> Self {
        self.variables.push(Variable::new(name, cardinality));
        self
    }

    pub fn edge(mut self, from: impl Into<String>, to: impl Into<String>) -> Self {
        self.directed.push((from.into(), to.into()));
        self
    }

    pub fn confound(mut self, a: impl Into<String>, b: impl Into<String>) -> Self {
        self.bidirected.push((a.into(), b.into()));
        self
    }

    pub fn build(self) -> Result<Admg> {
        Admg::new(self.variables, &self.directed, &self.bidirected)
    }
}

impl Admg {
    pub fn builder() -> AdmgBuilder {
        AdmgBuilder::default()
    }

    pub fn new<S: AsRef<str>>(
        variables: Vec<Variable>,
        directed: &[(S, S)],
        bidirected: &[(S, S)],
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if v.cardinality < 2 {
                return Err(Error::InvalidCardinality {
                    name: v.name.clone(),
                    cardinality: v.cardinality,
                });
            }
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))
        };

        let mut dir = BTreeSet::new();
        for (a, b) in directed {
            let (i, j) = (lookup(a.as_ref())?, lookup(b.as_ref())?);
            if i == j {
                return Err(Error::SelfLoop(a.as_ref().to_string()));
            }
            dir.insert((i, j));
        }
        let mut bi = BTreeSet::new();
        for (a, b) in bidirected {
            let (i, j) = (lookup(a.as_ref())?, lookup(b.as_ref())?);
            if i == j {
                return Err(Error::SelfLoop(a.as_ref().to_string()));
            }
            bi.insert((i.min(j), i.max(j)));
        }

        let n = variables.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut spouses = vec![Vec::new(); n];
        for &(i, j) in &dir {
            children[i].push(j);
            parents[j].push(i);
        }
        for &(i, j) in &bi {
            spouses[i].push(j);
            spouses[j].push(i);
        }
        for list in parents.iter_mut().chain(&mut children).chain(&mut spouses) {
            list.sort_unstable();
        }

        let g = Self {
            variables,
            index,
            directed: dir.into_iter().collect(),
            bidirected: bi.into_iter().collect(),
            parents,
            children,
            spouses,
        };
        if let Some(v) = g.find_cycle() {
            return Err(Error::DirectedCycle(g.variables[v].name.clone()));
        }
        Ok(g)
    }

    /// Returns a node on a directed cycle, if one exists.
    fn find_cycle(&self) -> Option<usize> {
        let n = self.variables.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for &c in &self.children[i] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (seen < n).then(|| (0..n).find(|&i| indeg[i] > 0).unwrap())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        self.idx(name).map(|i| &self.variables[i])
    }

    pub fn cardinality(&self, name: &str) -> Result<usize> {
        self.variable(name).map(|v| v.cardinality)
    }

    /// Position of `name` in declaration order.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn idx(&self, name: &str) -> Result<usize> {
        self.position(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn all(&self) -> VarSet {
        self.names().collect()
    }

    fn check(&self, set: &VarSet) -> Result<()> {
        match set.iter().find(|v| !self.contains(v)) {
            Some(v) => Err(Error::UnknownVariable(v.to_string())),
            None => Ok(()),
        }
    }

    /// Members of `set` in declaration order. Names absent from the graph are skipped.
    pub fn ordered(&self, set: &VarSet) -> Vec<String> {
        self.names()
            .filter(|n| set.contains(n))
            .map(str::to_string)
            .collect()
    }

    pub fn parents(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.idx(name)?;
        Ok(self.parents[i].iter().map(|&p| self.name(p)).collect())
    }

    pub fn children(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.idx(name)?;
        Ok(self.children[i].iter().map(|&p| self.name(p)).collect())
    }

    pub fn spouses(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.idx(name)?;
        Ok(self.spouses[i].iter().map(|&p| self.name(p)).collect())
    }

    fn name(&self, i: usize) -> &str {
        &self.variables[i].name
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.directed
            .iter()
            .map(|&(a, b)| (self.name(a), self.name(b)))
    }

    pub fn bidirected_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bidirected
            .iter()
            .map(|&(a, b)| (self.name(a), self.name(b)))
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.position(from), self.position(to)) {
            (Some(i), Some(j)) => self.directed.binary_search(&(i, j)).is_ok(),
            _ => false,
        }
    }

    pub fn has_confounder(&self, a: &str, b: &str) -> bool {
        match (self.position(a), self.position(b)) {
            (Some(i), Some(j)) => self.bidirected.binary_search(&(i.min(j), i.max(j))).is_ok(),
            _ => false,
        }
    }

    /// `An(targets)`, reflexive.
    pub fn ancestors(&self, targets: &VarSet) -> Result<VarSet> {
        self.check(targets)?;
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = targets.iter().map(|t| self.index[t]).collect();
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                continue;
            }
            stack.extend(self.parents[i].iter().copied().filter(|&p| !seen[p]));
        }
        Ok(self.collect(&seen))
    }

    fn collect(&self, mask: &[bool]) -> VarSet {
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.name(i).to_string())
            .collect()
    }

    /// Maximal bidirected-connected sets, ordered by their earliest declared member.
    pub fn c_components(&self) -> Vec<VarSet> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![false; n];
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(i) = stack.pop() {
                members[i] = true;
                for &s in &self.spouses[i] {
                    if comp[s] == usize::MAX {
                        comp[s] = id;
                        stack.push(s);
                    }
                }
            }
            out.push(self.collect(&members));
        }
        out
    }

    /// Copies the graph, keeping nodes that pass `keep` and edges that pass
    /// `edge_ok(from, to, is_directed)`.
    fn rebuild(
        &self,
        keep: impl Fn(usize) -> bool,
        edge_ok: impl Fn(usize, usize, bool) -> bool,
    ) -> Admg {
        let variables: Vec<Variable> = (0..self.len())
            .filter(|&i| keep(i))
            .map(|i| self.variables[i].clone())
            .collect();
        let d: Vec<(&str, &str)> = self
            .directed
            .iter()
            .filter(|&&(a, b)| keep(a) && keep(b) && edge_ok(a, b, true))
            .map(|&(a, b)| (self.name(a), self.name(b)))
            .collect();
        let b: Vec<(&str, &str)> = self
            .bidirected
            .iter()
            .filter(|&&(a, b)| keep(a) && keep(b) && edge_ok(a, b, false))
            .map(|&(a, b)| (self.name(a), self.name(b)))
            .collect();
        Admg::new(variables, &d, &b).expect("subgraph of a valid ADMG is valid")
    }

    /// `G_X̄`: cuts every directed edge into `x` and every bidirected edge touching `x`.
    pub fn remove_incoming(&self, x: &VarSet) -> Result<Admg> {
        self.check(x)?;
        let hit: Vec<bool> = self.names().map(|n| x.contains(n)).collect();
        Ok(self.rebuild(
            |_| true,
            |a, b, directed| {
                if directed {
                    !hit[b]
                } else {
                    !hit[a] && !hit[b]
                }
            },
        ))
    }

    /// `G_X̲`: cuts every directed edge out of `x`. Bidirected edges stay.
    pub fn remove_outgoing(&self, x: &VarSet) -> Result<Admg> {
        self.check(x)?;
        let hit: Vec<bool> = self.names().map(|n| x.contains(n)).collect();
        Ok(self.rebuild(|_| true, |a, _, directed| !directed || !hit[a]))
    }

    /// Restriction to `keep`, with every edge whose endpoints both survive.
    pub fn induced_subgraph(&self, keep: &VarSet) -> Result<Admg> {
        self.check(keep)?;
        let kept: Vec<bool> = self.names().map(|n| keep.contains(n)).collect();
        Ok(self.rebuild(|i| kept[i], |_, _, _| true))
    }

    /// `G \ X`.
    pub fn without(&self, x: &VarSet) -> Result<Admg> {
        self.check(x)?;
        self.induced_subgraph(&self.all().difference(x))
    }

    /// Kahn's algorithm; among ready nodes the earliest declared goes first.
    pub fn topological_order(&self) -> Vec<String> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(self.name(i).to_string());
            for &c in &self.children[i] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// d-separation of `a` and `b` given `given`, after replacing each
    /// bidirected edge by an explicit latent parent of both endpoints.
    pub fn d_separated(&self, a: &VarSet, b: &VarSet, given: &VarSet) -> Result<bool> {
        for s in [a, b, given] {
            self.check(s)?;
        }
        for (s, t) in [(a, b), (a, given), (b, given)] {
            if let Some(v) = s.first_common(t) {
                return Err(Error::Overlap(v.to_string()));
            }
        }
        let dag = ExpandedDag::from(self);
        let observed = |s: &VarSet| -> Vec<usize> { s.iter().map(|v| self.index[v]).collect() };
        let reach = dag.reachable(&observed(a), &observed(given));
        Ok(observed(b).iter().all(|&j| !reach[j]))
    }

    /// Serializes to the line-oriented graph format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.variables {
            out.push_str(&format!("var {} {}\n", v.name, v.cardinality));
        }
        for (a, b) in self.directed_edges() {
            out.push_str(&format!("edge {a} -> {b}\n"));
        }
        for (a, b) in self.bidirected_edges() {
            out.push_str(&format!("confound {a} <-> {b}\n"));
        }
        out
    }

    /// Parses the graph format. Lines that are not `var`, `edge` or
    /// `confound` declarations are handed to `extra`, which returns `false`
    /// to reject them.
    pub fn parse_with(
        text: &str,
        mut extra: impl FnMut(usize, &[&str]) -> Result<bool>,
    ) -> Result<Admg> {
        let mut variables: Vec<Variable> = Vec::new();
        let mut declared: HashMap<String, usize> = HashMap::new();
        let mut directed = Vec::new();
        let mut bidirected = Vec::new();
        let err = |line: usize, message: String| Error::Parse { line, message };

        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            let known = |name: &str| -> Result<()> {
                if declared.contains_key(name) {
                    Ok(())
                } else {
                    Err(err(line_no, format!("unknown variable `{name}`")))
                }
            };
            match tok[0] {
                "var" => {
                    if tok.len() != 3 {
                        return Err(err(line_no, "expected `var NAME CARDINALITY`".into()));
                    }
                    let card: usize = tok[2]
                        .parse()
                        .map_err(|_| err(line_no, format!("bad cardinality `{}`", tok[2])))?;
                    if card < 2 {
                        return Err(err(
                            line_no,
                            format!("cardinality of `{}` must be >= 2", tok[1]),
                        ));
                    }
                    if declared.insert(tok[1].to_string(), line_no).is_some() {
                        return Err(err(line_no, format!("duplicate variable `{}`", tok[1])));
                    }
                    variables.push(Variable::new(tok[1], card));
                }
                "edge" => {
                    if tok.len() != 4 || tok[2] != "->" {
                        return Err(err(line_no, "expected `edge A -> B`".into()));
                    }
                    known(tok[1])?;
                    known(tok[3])?;
                    if tok[1] == tok[3] {
                        return Err(err(line_no, format!("self loop on `{}`", tok[1])));
                    }
                    directed.push((tok[1].to_string(), tok[3].to_string()));
                }
                "confound" => {
                    if tok.len() != 4 || tok[2] != "<->" {
                        return Err(err(line_no, "expected `confound A <-> B`".into()));
                    }
                    known(tok[1])?;
                    known(tok[3])?;
                    if tok[1] == tok[3] {
                        return Err(err(line_no, format!("self loop on `{}`", tok[1])));
                    }
                    bidirected.push((tok[1].to_string(), tok[3].to_string()));
                }
                _ => {
                    if !extra(line_no, &tok)? {
                        return Err(err(
                            line_no,
                            format!("unrecognized declaration `{}`", tok[0]),
                        ));
                    }
                }
            }
        }
        Admg::new(variables, &directed, &bidirected)
    }
}

impl std::str::FromStr for Admg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Admg::parse_with(s, |_, _| Ok(false))
    }
}

impl fmt::Display for Admg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// The graph with one latent node per bidirected edge; latents are indexed after
/// the observed nodes.
struct ExpandedDag {
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl From<&Admg> for ExpandedDag {
    fn from(g: &Admg) -> Self {
        let n = g.len() + g.bidirected.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(a, b) in &g.directed {
            children[a].push(b);
            parents[b].push(a);
        }
        for (k, &(a, b)) in g.bidirected.iter().enumerate() {
            let u = g.len() + k;
            children[u].extend([a, b]);
            parents[a].push(u);
            parents[b].push(u);
        }
        Self { parents, children }
    }
}

impl ExpandedDag {
    /// Nodes reachable from `sources` along active trails given `given`.
    fn reachable(&self, sources: &[usize], given: &[usize]) -> Vec<bool> {
        let n = self.parents.len();
        let mut in_given = vec![false; n];
        for &z in given {
            in_given[z] = true;
        }
        // ancestors of the conditioning set, for collider activation
        let mut anc = vec![false; n];
        let mut stack: Vec<usize> = given.to_vec();
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut anc[i], true) {
                continue;
            }
            stack.extend(self.parents[i].iter().copied());
        }

        const UP: usize = 0;
        const DOWN: usize = 1;
        let mut visited = vec![[false; 2]; n];
        let mut reach = vec![false; n];
        let mut queue: VecDeque<(usize, usize)> = sources.iter().map(|&s| (s, UP)).collect();
        while let Some((v, dir)) = queue.pop_front() {
            if std::mem::replace(&mut visited[v][dir], true) {
                continue;
            }
            if !in_given[v] {
                reach[v] = true;
            }
            if dir == UP && !in_given[v] {
                queue.extend(self.parents[v].iter().map(|&p| (p, UP)));
                queue.extend(self.children[v].iter().map(|&c| (c, DOWN)));
            } else if dir == DOWN {
                if !in_given[v] {
                    queue.extend(self.children[v].iter().map(|&c| (c, DOWN)));
                }
                if anc[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, UP)));
                }
            }
        }
        reach
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn napkin() -> Admg {
        Admg::builder()
            .var("W1", 2)
            .var("W2", 2)
            .var("X", 2)
            .var("Y", 2)
            .edge("W1", "W2")
            .edge("W2", "X")
            .edge("X", "Y")
            .confound("W1", "X")
            .confound("W1", "Y")
            .build()
            .unwrap()
    }

    fn crossed() -> Admg {
        Admg::builder()
            .var("X", 2)
            .var("W1", 2)
            .var("W2", 2)
            .var("Y", 2)
            .edge("X", "W1")
            .edge("W1", "W2")
            .edge("W2", "Y")
            .confound("X", "W2")
            .confound("W1", "Y")
            .build()
            .unwrap()
    }

    fn backdoor() -> Admg {
        Admg::builder()
            .var("A", 2)
            .var("B", 2)
            .var("V", 2)
            .var("I", 2)
            .edge("A", "V")
            .edge("A", "B")
            .edge("B", "V")
            .edge("V", "I")
            .confound("B", "I")
            .build()
            .unwrap()
    }

    fn chain() -> Admg {
        "var A 2\nvar B 2\nvar C 2\nedge A -> B\nedge B -> C\n"
            .parse()
            .unwrap()
    }

    #[test]
    fn ancestors_examples() {
        assert_eq!(
            frontdoor().ancestors(&vars(["R"])).unwrap(),
            vars(["X", "S", "R"])
        );
        let g = napkin();
        assert_eq!(g.ancestors(&g.all()).unwrap(), g.all());
        let without_w1 = g.without(&vars(["W1"])).unwrap();
        assert_eq!(
            without_w1.ancestors(&vars(["Y"])).unwrap(),
            vars(["W2", "X", "Y"])
        );
        assert!(matches!(
            g.ancestors(&vars(["Q"])),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn c_component_examples() {
        let g = crossed().without(&vars(["X"])).unwrap();
        assert_eq!(g.c_components(), vec![vars(["W1", "Y"]), vars(["W2"])]);
        assert_eq!(
            chain().c_components(),
            vec![vars(["A"]), vars(["B"]), vars(["C"])]
        );
        let g = napkin().without(&vars(["W1"])).unwrap();
        assert_eq!(
            g.c_components(),
            vec![vars(["W2"]), vars(["X"]), vars(["Y"])]
        );
    }

    #[test]
    fn remove_incoming_examples() {
        let g = backdoor().remove_incoming(&vars(["V"])).unwrap();
        assert!(g.parents("V").unwrap().is_empty());
        assert!(g.spouses("V").unwrap().is_empty());
        assert!(g.has_confounder("B", "I"));
        assert_eq!(
            backdoor().remove_incoming(&VarSet::new()).unwrap(),
            backdoor()
        );
        let g = chain().remove_incoming(&vars(["B"])).unwrap();
        assert_eq!(g.directed_edges().collect::<Vec<_>>(), vec![("B", "C")]);
    }

    #[test]
    fn induced_subgraph_examples() {
        let g = napkin().induced_subgraph(&vars(["X", "Y"])).unwrap();
        assert_eq!(g.directed_edges().collect::<Vec<_>>(), vec![("X", "Y")]);
        assert_eq!(g.bidirected_edges().count(), 0);
        assert_eq!(
            napkin().induced_subgraph(&napkin().all()).unwrap(),
            napkin()
        );
        assert!(napkin()
            .induced_subgraph(&VarSet::new())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn topological_order_examples() {
        assert_eq!(frontdoor().topological_order(), ["X", "S", "R"]);
        assert_eq!(napkin().topological_order(), ["W1", "W2", "X", "Y"]);
        let g = Admg::builder().var("B", 2).var("A", 2).build().unwrap();
        assert_eq!(g.topological_order(), ["B", "A"]);
    }

    #[test]
    fn d_separation_examples() {
        let fd = frontdoor();
        assert!(!fd
            .d_separated(&vars(["R"]), &vars(["X"]), &vars(["S"]))
            .unwrap());
        assert!(chain()
            .d_separated(&vars(["A"]), &vars(["C"]), &vars(["B"]))
            .unwrap());
        let collider = Admg::builder()
            .var("A", 2)
            .var("B", 2)
            .var("C", 2)
            .edge("A", "B")
            .edge("C", "B")
            .build()
            .unwrap();
        assert!(collider
            .d_separated(&vars(["A"]), &vars(["C"]), &VarSet::new())
            .unwrap());
        assert!(!collider
            .d_separated(&vars(["A"]), &vars(["C"]), &vars(["B"]))
            .unwrap());
        assert!(matches!(
            chain().d_separated(&vars(["A"]), &vars(["A"]), &VarSet::new()),
            Err(Error::Overlap(_))
        ));
    }

    #[test]
    fn remove_outgoing_examples() {
        let g = chain().remove_outgoing(&vars(["B"])).unwrap();
        assert_eq!(g.directed_edges().collect::<Vec<_>>(), vec![("A", "B")]);
        assert_eq!(chain().remove_outgoing(&VarSet::new()).unwrap(), chain());
        let g = frontdoor().remove_outgoing(&vars(["S"])).unwrap();
        assert_eq!(g.directed_edges().collect::<Vec<_>>(), vec![("X", "S")]);
        assert!(g.has_confounder("X", "R"));
    }

    #[test]
    fn parser_rejects_bad_input() {
        let dup = "var X 2\nvar X 3\n";
        assert!(matches!(
            dup.parse::<Admg>(),
            Err(Error::Parse { line: 2, .. })
        ));
        let unknown = "var X 2\n# comment\nedge X -> Y\n";
        assert!(matches!(
            unknown.parse::<Admg>(),
            Err(Error::Parse { line: 3, .. })
        ));
        let cycle = "var A 2\nvar B 2\nedge A -> B\nedge B -> A\n";
        assert!(matches!(
            cycle.parse::<Admg>(),
            Err(Error::DirectedCycle(_))
        ));
        let g: Admg = "var X 2\nvar Y 3 # three states\nedge X -> Y\nconfound X <-> Y\n"
            .parse()
            .unwrap();
        assert_eq!(g.cardinality("Y").unwrap(), 3);
        assert_eq!(g.to_text().parse::<Admg>().unwrap(), g);
    }
}
