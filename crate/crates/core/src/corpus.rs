//! Seeded corpora of Kirby diagrams and special shadows, and the
//! per-instance bound checks run over them.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kirby::{hopf, trefoil, unknot, unlink, KirbyDiagram};
use crate::shadow::{find_cut_system, from_kirby, random_special, to_kirby, SpecialShadow};

fn arcs(d: &KirbyDiagram) -> Vec<usize> {
    d.strands().iter().flat_map(|s| s.arcs.iter().copied()).collect()
}

fn seed_diagram<R: Rng>(rng: &mut R) -> KirbyDiagram {
    let mut f = || rng.gen_range(-3..=3);
    let (a, b) = (f(), f());
    match rng.gen_range(0..5) {
        0 => unknot(a),
        1 => hopf(a, b),
        2 => trefoil(a),
        3 => unlink(&[a, b]),
        _ => unknot(a).with_orphan_pair(),
    }
}

fn random_move<R: Rng>(rng: &mut R, d: &KirbyDiagram) -> Option<KirbyDiagram> {
    let arcs = arcs(d);
    let pick = |rng: &mut R| arcs[rng.gen_range(0..arcs.len())];
    if arcs.is_empty() {
        return Some(d.disjoint_union(&unknot(0)));
    }
    match rng.gen_range(0..6) {
        0 => d.add_kink(pick(rng)).ok(),
        1 => {
            let (x, y) = (pick(rng), pick(rng));
            (x != y).then(|| d.add_r2(x, y).ok()).flatten()
        }
        2 => d.add_meridian(pick(rng)).ok(),
        3 if !d.disc_pairs().is_empty() => {
            let p = rng.gen_range(0..d.disc_pairs().len());
            d.finger_through(pick(rng), p).ok()
        }
        4 => Some(d.with_orphan_pair()),
        _ => Some(d.disjoint_union(&unknot(rng.gen_range(-2..=2)))),
    }
}

/// A random diagram of weight at most `max_weight`, built from a small seed
/// link by random moves.
pub fn random_diagram<R: Rng>(rng: &mut R, max_weight: usize) -> KirbyDiagram {
    let mut d = loop {
        let d = seed_diagram(rng);
        if d.weight() <= max_weight {
            break d;
        }
    };
    for _ in 0..rng.gen_range(0..=5) {
        if let Some(next) = random_move(rng, &d) {
            if next.weight() <= max_weight {
                d = next;
            }
        }
    }
    d
}

/// `count` diagrams of weight at most `max_weight`, not necessarily connected.
pub fn diagram_corpus(seed: u64, max_weight: usize, count: usize) -> Vec<KirbyDiagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_diagram(&mut rng, max_weight)).collect()
}

/// `count` connected diagrams with a crossing, of weight at most `max_weight`.
pub fn connected_corpus(seed: u64, max_weight: usize, count: usize) -> Vec<KirbyDiagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let d = random_diagram(&mut rng, max_weight).connect();
        if d.weight() <= max_weight {
            out.push(d);
        }
    }
    out
}

/// `count` special shadows with between 1 and `max_vertices` vertices.
pub fn shadow_corpus(seed: u64, max_vertices: usize, count: usize) -> Vec<SpecialShadow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_special(&mut rng, 1 + i % max_vertices)).collect()
}

/// One bound check on one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub check: String,
    pub ok: bool,
}

fn outcome(check: &str, ok: bool) -> Outcome {
    Outcome { check: check.to_string(), ok }
}

/// Connecting, shadowing and doubling bounds for one diagram.
pub fn check_diagram(d: &KirbyDiagram) -> Vec<Outcome> {
    let w = d.weight();
    let c = d.connect();
    let mut out = vec![
        outcome("connect: connected with a crossing", c.is_connected() && !c.crossings().is_empty()),
        outcome("connect: weight <= 3w", c.weight() <= 3 * w),
    ];
    match from_kirby(&c) {
        Ok(s) => {
            let special = s.is_special().map(|r| r.special).unwrap_or(false);
            out.push(outcome("from_kirby: special", special));
            out.push(outcome("from_kirby: vertices <= 3w", s.vertex_count() <= 3 * w));
        }
        Err(_) => {
            out.push(outcome("from_kirby: special", false));
            out.push(outcome("from_kirby: vertices <= 3w", false));
        }
    }
    out.push(outcome("double: weight <= 4w", d.double().diagram.weight() <= 4 * w));
    out
}

/// Reconstruction bounds for one shadow with `n` vertices.
pub fn check_shadow(p: &SpecialShadow) -> Vec<Outcome> {
    let n = p.vertex_count();
    let names = [
        "to_kirby: strands = 3(n+1)",
        "to_kirby: discs = 2(n+1)",
        "to_kirby: crossings <= 4n+3",
        "to_kirby: weight <= 9n+8",
    ];
    match find_cut_system(p).and_then(|c| to_kirby(p, &c)) {
        Ok(d) => {
            let oks = [
                d.strands().len() == 3 * (n + 1),
                2 * d.disc_pairs().len() == 2 * (n + 1),
                d.crossings().len() <= 4 * n + 3,
                d.weight() <= 9 * n + 8,
            ];
            names.iter().zip(oks).map(|(c, ok)| outcome(c, ok)).collect()
        }
        Err(_) => names.iter().map(|c| outcome(c, false)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRow {
    pub check: String,
    pub cases: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    /// Tallies outcomes per check, sorted by check name.
    pub fn from_outcomes<I: IntoIterator<Item = Outcome>>(outcomes: I) -> Self {
        let mut tally: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for o in outcomes {
            let t = tally.entry(o.check).or_default();
            t.0 += 1;
            t.1 += usize::from(!o.ok);
        }
        let rows = tally.into_iter().map(|(check, (cases, violations))| BoundRow { check, cases, violations }).collect();
        BoundReport { rows }
    }

    pub fn violations(&self) -> usize {
        self.rows.iter().map(|r| r.violations).sum()
    }
}

/// Sizes of the default corpus run.
pub const DIAGRAMS: usize = 600;
pub const SHADOWS: usize = 120;
pub const MAX_SHADOW_VERTICES: usize = 6;

/// Every check over the default corpora, sequentially.
pub fn run(seed: u64, max_weight: usize) -> BoundReport {
    let ds = diagram_corpus(seed, max_weight, DIAGRAMS);
    let ss = shadow_corpus(seed, MAX_SHADOW_VERTICES, SHADOWS);
    BoundReport::from_outcomes(ds.iter().flat_map(check_diagram).chain(ss.iter().flat_map(check_shadow)))
}
