#![allow(dead_code)]

use idgen_core::{Admg, Assignment, DiscreteScm, DistTable, QuerySpec, VarSet, Variable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every joint assignment of `vars`, first variable slowest.
pub fn assignments(vars: &[Variable]) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..v.cardinality).map(move |s| {
                    let mut b = a.clone();
                    b.insert(v.name.clone(), s);
                    b
                })
            })
            .collect();
    }
    out
}

/// Entries of `t` consistent with `fixed`, over the remaining variables, with
/// no renormalization.
pub fn slice(t: &DistTable, fixed: &Assignment) -> DistTable {
    let keep: Vec<Variable> = t
        .variables()
        .iter()
        .filter(|v| !fixed.contains_key(&v.name))
        .cloned()
        .collect();
    let mut probs = Vec::new();
    for (states, p) in t.iter() {
        let ok = t
            .variables()
            .iter()
            .zip(&states)
            .all(|(v, s)| fixed.get(&v.name).map_or(true, |f| f == s));
        if ok {
            probs.push(p);
        }
    }
    DistTable::new(keep, probs).unwrap()
}

/// Ground truth for `P_x(y | z)` from SCM enumeration.
pub fn truth(m: &DiscreteScm, q: &QuerySpec) -> DistTable {
    let law = m.exact_interventional(&q.intervention).unwrap();
    let names: Vec<String> = m.graph().ordered(&q.targets);
    let mut keep: Vec<&str> = names.iter().map(String::as_str).collect();
    keep.extend(q.given.keys().map(String::as_str));
    let t = slice(&law.marginal(&keep).unwrap(), &q.given);
    let total: f64 = t.probs().iter().sum();
    DistTable::new(
        t.variables().to_vec(),
        t.probs().iter().map(|p| p / total).collect(),
    )
    .unwrap()
}

/// Variables of `set` as declared in `g`.
pub fn declared(g: &Admg, set: &VarSet) -> Vec<Variable> {
    g.ordered(set)
        .iter()
        .map(|n| g.variable(n).unwrap().clone())
        .collect()
}

pub fn max_diff(a: &DistTable, b: &DistTable) -> f64 {
    let names: Vec<&str> = a.names();
    let b = b.reorder(&names).unwrap();
    a.probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Empirical law of `vars` in `d`, counted directly.
pub fn empirical(d: &idgen_core::Dataset, vars: &[Variable]) -> DistTable {
    let mut probs = vec![0.0; vars.iter().map(|v| v.cardinality).product()];
    let cols: Vec<&[u32]> = vars.iter().map(|v| d.column(&v.name).unwrap()).collect();
    for r in 0..d.n_rows() {
        let idx = cols
            .iter()
            .zip(vars)
            .fold(0, |acc, (c, v)| acc * v.cardinality + c[r] as usize);
        probs[idx] += 1.0;
    }
    let n = d.n_rows() as f64;
    DistTable::new(vars.to_vec(), probs.into_iter().map(|c| c / n).collect()).unwrap()
}

/// Half the L1 distance, aligning `b` to the variable order of `a`.
pub fn tvd(a: &DistTable, b: &DistTable) -> f64 {
    let b = b.reorder(&a.names()).unwrap();
    a.probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / 2.0
}
