//! Dense joint probability tables over discrete variables.

use std::collections::BTreeMap;

use crate::admg::Variable;
use crate::error::{invalid, Error, Result};

/// A full assignment of values to named variables.
pub type Assignment = BTreeMap<String, usize>;

/// Joint table over an ordered list of variables. The first variable is the
/// most significant digit of the linear index.
#[derive(Debug, Clone, PartialEq)]
pub struct DistTable {
    vars: Vec<Variable>,
    probs: Vec<f64>,
}

pub(crate) fn state_count(vars: &[Variable]) -> usize {
    vars.iter().map(|v| v.cardinality).product()
}

/// Decodes a linear index into per-variable states.
pub(crate) fn decode(mut index: usize, cards: &[usize], out: &mut [usize]) {
    for k in (0..cards.len()).rev() {
        out[k] = index % cards[k];
        index /= cards[k];
    }
}

pub(crate) fn encode(states: &[usize], cards: &[usize]) -> usize {
    states
        .iter()
        .zip(cards)
        .fold(0, |acc, (&s, &c)| acc * c + s)
}

impl DistTable {
    /// Wraps raw probabilities; entries must be non-negative and the length must
    /// match the joint state count. Normalization is not enforced here.
    pub fn new(vars: Vec<Variable>, probs: Vec<f64>) -> Result<Self> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|u| u.name == v.name) {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        if probs.len() != state_count(&vars) {
            return Err(invalid(format!(
                "table over {} states given {} entries",
                state_count(&vars),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(invalid(format!("table entry {p} is not a probability")));
        }
        Ok(Self { vars, probs })
    }

    pub fn uniform(vars: Vec<Variable>) -> Self {
        let n = state_count(&vars);
        Self {
            vars,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(vars: Vec<Variable>, states: &[usize]) -> Result<Self> {
        let cards: Vec<usize> = vars.iter().map(|v| v.cardinality).collect();
        if states.len() != vars.len() || states.iter().zip(&cards).any(|(s, c)| s >= c) {
            return Err(invalid("point mass state out of range"));
        }
        let mut probs = vec![0.0; state_count(&vars)];
        probs[encode(states, &cards)] = 1.0;
        Ok(Self { vars, probs })
    }

    /// Table with a single empty assignment of mass one.
    pub fn unit() -> Self {
        Self {
            vars: Vec::new(),
            probs: vec![1.0],
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cards(&self) -> Vec<usize> {
        self.vars.iter().map(|v| v.cardinality).collect()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Probability of a full assignment given in table order.
    pub fn get(&self, states: &[usize]) -> f64 {
        self.probs[encode(states, &self.cards())]
    }

    /// Probability of the assignment restricted to the table's variables.
    pub fn prob_of(&self, assignment: &Assignment) -> Result<f64> {
        let states = self
            .vars
            .iter()
            .map(|v| {
                assignment
                    .get(&v.name)
                    .copied()
                    .ok_or_else(|| Error::UnknownVariable(v.name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.get(&states))
    }

    /// Iterates `(states, probability)` in index order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let cards = self.cards();
        self.probs.iter().enumerate().map(move |(i, &p)| {
            let mut s = vec![0; cards.len()];
            decode(i, &cards, &mut s);
            (s, p)
        })
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.position(n)
                    .ok_or_else(|| Error::UnknownVariable(n.to_string()))
            })
            .collect()
    }

    /// Marginal over `names`, returned in the order given.
    pub fn marginal(&self, names: &[&str]) -> Result<DistTable> {
        let pos = self.positions(names)?;
        let vars: Vec<Variable> = pos.iter().map(|&p| self.vars[p].clone()).collect();
        if vars.len() != {
            let mut d = names.to_vec();
            d.sort_unstable();
            d.dedup();
            d.len()
        } {
            return Err(invalid("repeated variable in marginal"));
        }
        let cards = self.cards();
        let out_cards: Vec<usize> = vars.iter().map(|v| v.cardinality).collect();
        let mut probs = vec![0.0; state_count(&vars)];
        let mut states = vec![0; cards.len()];
        let mut sub = vec![0; pos.len()];
        for (i, &p) in self.probs.iter().enumerate() {
            decode(i, &cards, &mut states);
            for (k, &q) in pos.iter().enumerate() {
                sub[k] = states[q];
            }
            probs[encode(&sub, &out_cards)] += p;
        }
        Ok(DistTable { vars, probs })
    }

    /// Same distribution with the variables permuted into `names` order.
    pub fn reorder(&self, names: &[&str]) -> Result<DistTable> {
        if names.len() != self.vars.len() {
            return Err(invalid("reorder needs every table variable exactly once"));
        }
        self.marginal(names)
    }

    /// Conditional table given a partial assignment, renormalized over the
    /// remaining variables.
    pub fn condition(&self, evidence: &Assignment) -> Result<DistTable> {
        for name in evidence.keys() {
            if self.position(name).is_none() {
                return Err(Error::UnknownVariable(name.clone()));
            }
        }
        let keep: Vec<usize> = (0..self.vars.len())
            .filter(|&k| !evidence.contains_key(&self.vars[k].name))
            .collect();
        let vars: Vec<Variable> = keep.iter().map(|&k| self.vars[k].clone()).collect();
        let cards = self.cards();
        let out_cards: Vec<usize> = vars.iter().map(|v| v.cardinality).collect();
        let mut probs = vec![0.0; state_count(&vars)];
        let mut states = vec![0; cards.len()];
        let mut sub = vec![0; keep.len()];
        'outer: for (i, &p) in self.probs.iter().enumerate() {
            decode(i, &cards, &mut states);
            for (k, v) in self.vars.iter().enumerate() {
                if let Some(&e) = evidence.get(&v.name) {
                    if states[k] != e {
                        continue 'outer;
                    }
                }
            }
            for (k, &q) in keep.iter().enumerate() {
                sub[k] = states[q];
            }
            probs[encode(&sub, &out_cards)] += p;
        }
        let z: f64 = probs.iter().sum();
        if z <= 0.0 {
            return Err(Error::ZeroDenominator(format!("{evidence:?}")));
        }
        probs.iter_mut().for_each(|p| *p /= z);
        Ok(DistTable { vars, probs })
    }

    /// Independent product; the variable sets must be disjoint.
    pub fn product(&self, other: &DistTable) -> Result<DistTable> {
        if let Some(v) = self.vars.iter().find(|v| other.position(&v.name).is_some()) {
            return Err(Error::Overlap(v.name.clone()));
        }
        let mut vars = self.vars.clone();
        vars.extend(other.vars.iter().cloned());
        let mut probs = Vec::with_capacity(self.len() * other.len());
        for &p in &self.probs {
            probs.extend(other.probs.iter().map(|q| p * q));
        }
        Ok(DistTable { vars, probs })
    }

    /// Total variation distance, `½ Σ |p − q|`. Both tables must list the same
    /// variables in the same order.
    pub fn tvd(&self, other: &DistTable) -> Result<f64> {
        if self.vars != other.vars {
            return Err(invalid(format!(
                "tvd over mismatched tables {:?} vs {:?}",
                self.names(),
                other.names()
            )));
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>())
    }

    /// Largest elementwise absolute difference against a table over the same variables.
    pub fn max_abs_diff(&self, other: &DistTable) -> Result<f64> {
        let other = other.reorder(&self.names())?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(name: &str) -> Variable {
        Variable::new(name, 2)
    }

    #[test]
    fn tvd_examples() {
        let p = DistTable::new(vec![bin("A")], vec![0.6, 0.4]).unwrap();
        let q = DistTable::uniform(vec![bin("A")]);
        assert!((p.tvd(&q).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(p.tvd(&p).unwrap(), 0.0);
        let a = DistTable::point_mass(vec![bin("A")], &[0]).unwrap();
        let b = DistTable::point_mass(vec![bin("A")], &[1]).unwrap();
        assert_eq!(a.tvd(&b).unwrap(), 1.0);
        let c = DistTable::uniform(vec![bin("B")]);
        assert!(a.tvd(&c).is_err());
    }

    #[test]
    fn marginal_condition_and_reorder() {
        let t = DistTable::new(vec![bin("A"), bin("B")], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let m = t.marginal(&["B"]).unwrap();
        assert!((m.probs()[0] - 0.4).abs() < 1e-15);
        let r = t.reorder(&["B", "A"]).unwrap();
        assert_eq!(r.probs(), &[0.1, 0.3, 0.2, 0.4]);
        let c = t.condition(&Assignment::from([("A".into(), 1)])).unwrap();
        assert!((c.probs()[1] - 0.4 / 0.7).abs() < 1e-15);
        assert!(t.marginal(&["A", "A"]).is_err());
    }
}
