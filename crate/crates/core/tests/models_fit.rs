mod common;

use common::{assignments, slice};
use idgen_core::models::ModelKind;
use idgen_core::{
    catalog, exact_conditional, fit_conditional, ConditionalModel, Dataset, DistTable,
};

/// `P(target | context = c)` read straight off the joint.
fn oracle(joint: &DistTable, target: &str, context: &[&str], c: &[usize]) -> Vec<f64> {
    let mut keep: Vec<&str> = context.to_vec();
    keep.push(target);
    let m = joint.marginal(&keep).unwrap();
    let fixed = context
        .iter()
        .map(|n| n.to_string())
        .zip(c.iter().copied())
        .collect();
    let t = slice(&m, &fixed);
    let total: f64 = t.probs().iter().sum();
    t.probs().iter().map(|p| p / total).collect()
}

fn context_states(m: &dyn ConditionalModel) -> Vec<Vec<usize>> {
    let names: Vec<&str> = m.context().iter().map(|v| v.name.as_str()).collect();
    assignments(m.context())
        .into_iter()
        .map(|a| names.iter().map(|n| a[*n]).collect())
        .collect()
}

fn counts(d: &Dataset, joint: &DistTable) -> Vec<f64> {
    let names = joint.names();
    let cards = joint.cards();
    let mut out = vec![0.0; joint.len()];
    for r in 0..d.n_rows() {
        let idx = names
            .iter()
            .zip(&cards)
            .fold(0, |acc, (n, c)| acc * c + d.column(n).unwrap()[r] as usize);
        out[idx] += 1.0;
    }
    out.iter().map(|c| c / d.n_rows() as f64).collect()
}

#[test]
fn exact_conditionals_match_the_joint() {
    for entry in catalog() {
        let joint = entry.scm.exact_joint().unwrap();
        let names: Vec<&str> = joint.names();
        for (i, target) in names.iter().enumerate() {
            let ctx = &names[..i];
            let m = exact_conditional(&joint, target, ctx).unwrap();
            assert_eq!(m.kind(), ModelKind::Exact);
            for c in context_states(&m) {
                let want = oracle(&joint, target, ctx, &c);
                for (a, b) in m.probabilities(&c).iter().zip(&want) {
                    assert!((a - b).abs() < 1e-12, "{} {target}", entry.name);
                }
            }
        }
    }
}

#[test]
fn fitted_tables_converge_at_half_a_million_rows() {
    for entry in catalog()
        .into_iter()
        .filter(|e| ["napkin", "crossed"].contains(&e.name.as_str()))
    {
        let joint = entry.scm.exact_joint().unwrap();
        let d = entry.scm.sample_observational(500_000, 3).unwrap();
        let names: Vec<&str> = joint.names();
        for (i, target) in names.iter().enumerate() {
            let ctx = &names[..i];
            let m = fit_conditional(&d, target, ctx).unwrap();
            for c in context_states(&m) {
                let row = m.probabilities(&c);
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                let want = oracle(&joint, target, ctx, &c);
                let tvd: f64 = row
                    .iter()
                    .zip(&want)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
                    / 2.0;
                let fixed = ctx
                    .iter()
                    .map(|n| n.to_string())
                    .zip(c.iter().copied())
                    .collect();
                let mass: f64 = slice(
                    &joint.marginal(ctx).unwrap_or_else(|_| DistTable::unit()),
                    &fixed,
                )
                .probs()
                .iter()
                .sum();
                let bound = 3.0 * (want.len() as f64 / (500_000.0 * mass)).sqrt();
                assert!(
                    tvd < bound,
                    "{} {target} | {c:?}: {tvd} > {bound}",
                    entry.name
                );
            }
        }
    }
}

#[test]
fn observational_samples_match_the_exact_joint() {
    for entry in catalog() {
        let joint = entry.scm.exact_joint().unwrap();
        let d = entry.scm.sample_observational(500_000, 9).unwrap();
        let emp = counts(&d, &joint);
        let tvd: f64 = emp
            .iter()
            .zip(joint.probs())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tvd < 0.01, "{}: {tvd}", entry.name);
    }
}

#[test]
fn interventional_samples_pin_the_intervened_column() {
    let entry = catalog()
        .into_iter()
        .find(|e| e.name == "frontdoor")
        .unwrap();
    let mut doing = idgen_core::Assignment::new();
    doing.insert("X".into(), 1);
    let d = entry.scm.sample(&doing, 50_000, 1).unwrap();
    assert!(d.column("X").unwrap().iter().all(|&v| v == 1));
    let joint = entry.scm.exact_interventional(&doing).unwrap();
    let emp = counts(&d, &joint);
    let tvd: f64 = emp
        .iter()
        .zip(joint.probs())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tvd < 0.02, "{tvd}");
}
