use std::collections::HashMap;

use proptest::prelude::*;
use topocalc::corpus::{connected_corpus, diagram_corpus};
use topocalc::kirby::{hopf, trefoil, unknot, unlink, KirbyDiagram};

/// Components by chaining strands through the disc pairs, numbered by
/// their smallest strand.
fn components_oracle(d: &KirbyDiagram) -> Vec<usize> {
    let n = d.strands().len();
    let mut label: Vec<usize> = (0..n).collect();
    let starts: HashMap<_, usize> = d.strands().iter().enumerate().filter_map(|(i, s)| s.start.map(|e| (e, i))).collect();
    // Repeated relaxation is enough at test sizes.
    loop {
        let mut changed = false;
        for (i, s) in d.strands().iter().enumerate() {
            if let Some(e) = s.end {
                let j = starts[&e.partner()];
                let m = label[i].min(label[j]);
                if label[i] != m || label[j] != m {
                    label[i] = m;
                    label[j] = m;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut roots: Vec<usize> = label.clone();
    roots.sort();
    roots.dedup();
    label.iter().map(|l| roots.binary_search(l).unwrap()).collect()
}

/// Linking numbers counted one-sidedly: crossings where `i` passes over `j`.
fn linking_oracle(d: &KirbyDiagram) -> Vec<Vec<i64>> {
    let comp = components_oracle(d);
    let owner: HashMap<usize, usize> =
        d.strands().iter().enumerate().flat_map(|(s, st)| st.arcs.iter().map(move |&a| (a, s))).collect();
    let n = comp.iter().max().map_or(0, |m| m + 1);
    let mut m = vec![vec![0; n]; n];
    for c in d.crossings() {
        let (under, over) = (comp[owner[&c.arcs[0]]], comp[owner[&c.arcs[1]]]);
        if under != over {
            m[over][under] += c.sign as i64;
        }
    }
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = d.framing(i);
    }
    m
}

fn corpus() -> Vec<KirbyDiagram> {
    let mut all = diagram_corpus(77, 12, 300);
    all.extend(connected_corpus(77, 12, 200));
    all
}

#[test]
fn linking_matrix_matches_one_sided_count() {
    let mut checked = 0;
    for d in corpus().iter().filter(|d| d.disc_pairs().is_empty()) {
        let m = d.linking_matrix().unwrap();
        assert_eq!(m, linking_oracle(d));
        for i in 0..m.len() {
            for j in 0..m.len() {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
        checked += 1;
    }
    assert!(checked > 50, "only {checked} diagrams without 1-handles");
}

#[test]
fn components_match_strand_chaining() {
    for d in corpus() {
        let comps = d.components();
        let oracle = components_oracle(&d);
        for (c, strands) in comps.iter().enumerate() {
            assert!(strands.iter().all(|&s| oracle[s] == c));
        }
    }
}

#[test]
fn connect_bounds_and_invariance() {
    for d in corpus() {
        let c = d.connect();
        assert!(c.is_connected() && !c.crossings().is_empty());
        assert!(c.weight() <= 3 * d.weight(), "{} > 3·{}", c.weight(), d.weight());
        if d.disc_pairs().is_empty() && !d.strands().is_empty() {
            let (a, b) = (d.linking_matrix().unwrap(), c.linking_matrix().unwrap());
            // connect may reorder components; compare as multisets.
            let key = |m: &Vec<Vec<i64>>| {
                let mut rows: Vec<Vec<i64>> = m
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let mut r2 = r.clone();
                        r2.remove(i);
                        r2.sort();
                        r2.insert(0, r[i]);
                        r2
                    })
                    .collect();
                rows.sort();
                rows
            };
            assert_eq!(key(&a), key(&b));
        }
    }
}

#[test]
fn doubling_keeps_weight_and_form_shape() {
    for d in corpus() {
        let dd = d.double();
        assert!(dd.diagram.weight() <= 4 * d.weight());
    }
    // Double of a 1-framed unknot: ⟨1⟩ ⊕ H-like pair with a 0-framed meridian.
    let f = unknot(1).double().diagram.intersection_form().unwrap();
    assert_eq!(f.rank, 2);
    assert_eq!(f.signature, 0);
}

#[test]
fn named_forms() {
    assert_eq!(hopf(0, 0).intersection_form().unwrap().manifold_name().as_deref(), Some("S²×S²"));
    assert_eq!(hopf(1, 0).intersection_form().unwrap().manifold_name().as_deref(), Some("CP²#CP̄²"));
    assert_eq!(unknot(1).intersection_form().unwrap().manifold_name().as_deref(), Some("CP²"));
    assert_eq!(trefoil(-1).intersection_form().unwrap().signature, -1);
    assert_eq!(unlink(&[1, -1, 1]).intersection_form().unwrap().signature, 1);
}

proptest! {
    #[test]
    fn json_round_trip(seed in 0u64..500) {
        let d = &diagram_corpus(seed, 10, 1)[0];
        let text = serde_json::to_string(d).unwrap();
        let back: KirbyDiagram = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, d);
    }
}
