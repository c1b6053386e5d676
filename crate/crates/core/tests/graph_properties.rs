mod common;

use std::collections::BTreeSet;

use idgen_core::scm::random_admg;
use idgen_core::{Admg, VarSet};
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = Admg> {
    (any::<u64>(), 2usize..7, 0.2f64..0.7, 0usize..4)
        .prop_map(|(seed, n, density, bi)| random_admg(&mut common::rng(seed), n, 2, density, bi))
}

/// Latent-expanded DAG as an adjacency list: observed nodes keep their
/// indices, each bidirected edge adds one latent parent of both endpoints.
struct Expanded {
    children: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
}

fn expand(g: &Admg) -> Expanded {
    let names: Vec<&str> = g.names().collect();
    let idx = |v: &str| names.iter().position(|n| *n == v).unwrap();
    let total = names.len() + g.bidirected_edges().count();
    let mut children = vec![Vec::new(); total];
    let mut parents = vec![Vec::new(); total];
    for (a, b) in g.directed_edges() {
        children[idx(a)].push(idx(b));
        parents[idx(b)].push(idx(a));
    }
    for (k, (a, b)) in g.bidirected_edges().enumerate() {
        let u = names.len() + k;
        for v in [idx(a), idx(b)] {
            children[u].push(v);
            parents[v].push(u);
        }
    }
    Expanded { children, parents }
}

fn descendants(e: &Expanded, v: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([v]);
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for &c in &e.children[u] {
            if seen.insert(c) {
                stack.push(c);
            }
        }
    }
    seen
}

/// Depth-first enumeration of every simple path, testing each for activity.
fn connected(e: &Expanded, a: usize, b: usize, z: &BTreeSet<usize>) -> bool {
    fn walk(e: &Expanded, path: &mut Vec<usize>, b: usize, z: &BTreeSet<usize>) -> bool {
        let last = *path.last().unwrap();
        if last == b {
            return active(e, path, z);
        }
        let nbrs: Vec<usize> = e.children[last]
            .iter()
            .chain(&e.parents[last])
            .copied()
            .collect();
        for n in nbrs {
            if path.contains(&n) {
                continue;
            }
            path.push(n);
            if walk(e, path, b, z) {
                return true;
            }
            path.pop();
        }
        false
    }
    walk(e, &mut vec![a], b, z)
}

fn active(e: &Expanded, path: &[usize], z: &BTreeSet<usize>) -> bool {
    path.windows(3).all(|w| {
        let (p, m, n) = (w[0], w[1], w[2]);
        let collider = e.parents[m].contains(&p) && e.parents[m].contains(&n);
        if collider {
            descendants(e, m).iter().any(|d| z.contains(d))
        } else {
            !z.contains(&m)
        }
    })
}

fn split(g: &Admg, mask: u32) -> (VarSet, VarSet, VarSet) {
    let (mut a, mut b, mut z) = (VarSet::new(), VarSet::new(), VarSet::new());
    for (i, v) in g.names().enumerate() {
        match (mask >> (2 * i)) & 3 {
            0 => a.insert(v),
            1 => b.insert(v),
            2 => z.insert(v),
            _ => false,
        };
    }
    (a, b, z)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn d_separation_matches_path_enumeration(g in graph(), mask in any::<u32>()) {
        let (a, b, z) = split(&g, mask);
        prop_assume!(!a.is_empty() && !b.is_empty());
        let e = expand(&g);
        let names: Vec<&str> = g.names().collect();
        let ix = |s: &VarSet| -> Vec<usize> {
            s.iter().map(|v| names.iter().position(|n| *n == v).unwrap()).collect()
        };
        let zs: BTreeSet<usize> = ix(&z).into_iter().collect();
        let open = ix(&a)
            .into_iter()
            .any(|i| ix(&b).into_iter().any(|j| connected(&e, i, j, &zs)));
        prop_assert_eq!(g.d_separated(&a, &b, &z).unwrap(), !open);
    }

    #[test]
    fn c_components_partition_by_bidirected_reachability(g in graph()) {
        let comps = g.c_components();
        let mut seen = VarSet::new();
        for c in &comps {
            prop_assert!(!c.is_empty());
            prop_assert!(seen.is_disjoint(c));
            seen = seen.union(c);
        }
        prop_assert_eq!(&seen, &g.all());
        for (a, b) in g.bidirected_edges() {
            prop_assert!(comps.iter().any(|c| c.contains(a) && c.contains(b)));
        }
        for c in &comps {
            let first = c.iter().next().unwrap();
            let mut reach = VarSet::new();
            reach.insert(first);
            let mut stack = vec![first.to_string()];
            while let Some(v) = stack.pop() {
                for s in g.spouses(&v).unwrap() {
                    if reach.insert(s) {
                        stack.push(s.to_string());
                    }
                }
            }
            prop_assert_eq!(&reach, c);
        }
    }

    #[test]
    fn removing_incoming_cuts_arrows_and_confounders(g in graph(), mask in any::<u8>()) {
        let x: VarSet = g.names().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| v).collect();
        let h = g.remove_incoming(&x).unwrap();
        for (a, b) in g.directed_edges() {
            prop_assert_eq!(h.has_edge(a, b), !x.contains(b));
        }
        for (a, b) in g.bidirected_edges() {
            prop_assert_eq!(h.has_confounder(a, b), !x.contains(a) && !x.contains(b));
        }
        let l = g.remove_outgoing(&x).unwrap();
        for (a, b) in g.directed_edges() {
            prop_assert_eq!(l.has_edge(a, b), !x.contains(a));
        }
        prop_assert_eq!(l.bidirected_edges().count(), g.bidirected_edges().count());
    }

    #[test]
    fn topological_order_respects_edges(g in graph()) {
        let order = g.topological_order();
        prop_assert_eq!(order.len(), g.len());
        let pos = |v: &str| order.iter().position(|o| o == v).unwrap();
        for (a, b) in g.directed_edges() {
            prop_assert!(pos(a) < pos(b));
        }
    }

    #[test]
    fn ancestors_are_closed_under_parents(g in graph(), pick in any::<u8>()) {
        let names: Vec<&str> = g.names().collect();
        let t: VarSet = [names[pick as usize % names.len()]].into_iter().collect();
        let an = g.ancestors(&t).unwrap();
        prop_assert!(t.is_subset(&an));
        for v in an.iter() {
            for p in g.parents(v).unwrap() {
                prop_assert!(an.contains(p));
            }
        }
        for v in g.names().filter(|v| !an.contains(v)) {
            for c in g.children(v).unwrap() {
                prop_assert!(!t.contains(c) || an.contains(v));
            }
        }
    }

    #[test]
    fn graph_text_round_trips(g in graph()) {
        let back: Admg = g.to_text().parse().unwrap();
        prop_assert_eq!(back.to_text(), g.to_text());
    }
}
