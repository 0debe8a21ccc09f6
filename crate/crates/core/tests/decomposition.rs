use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use topocalc::decomposition::*;
use topocalc::seifert::{BaseSurface, SeifertBlock};
use topocalc::slope::{Mat2, Slope};

mod common;
use common::{euler_oracle, sol_oracle};

#[test]
fn sol_matches_conjugation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 25 {
        let psi = Mat2::random_unimodular(&mut rng, 4);
        if psi.det() != 1 {
            continue;
        }
        assert_eq!(sol_torus_bundle_e(&psi).unwrap(), sol_oracle(&psi, 8), "ψ = {psi}");
        checked += 1;
    }
    assert_eq!(sol_oracle(&Mat2::new(2, 1, 1, 1), 20), 2);
}

fn closed_pants_pair(m: Mat2) -> DecompGraph {
    // Each block is glued along one torus, the other two are capped by
    // fillings so that no free torus absorbs a twist.
    let blk = || {
        Block::Seifert(
            SeifertBlock::new(BaseSurface::orientable(0, 4), vec!["1/2".parse().unwrap(), "1/3".parse().unwrap()])
                .unwrap(),
        )
    };
    DecompGraph::new(
        vec![blk(), blk()],
        vec![GluingEdge::torus((0, 0), (1, 0), m), GluingEdge::torus((0, 1), (1, 1), Mat2::SWAP)],
    )
    .unwrap()
}

#[test]
fn euler_matches_box_oracle_on_shear_family() {
    for n in 1..=10 {
        let g = closed_pants_pair(Mat2::new(n, 1, -1, 0).mul(&Mat2::IDENTITY));
        if !validate_geometric(&g).unwrap().geometric {
            continue;
        }
        assert_eq!(euler_invariant(&g).unwrap(), euler_oracle(&g, 12), "n = {n}");
    }
    for n in 1..=10 {
        let g = DecompGraph::new(
            vec![
                Block::Seifert(SeifertBlock::new(BaseSurface::annulus(), vec!["1/2".parse().unwrap()]).unwrap()),
                Block::Seifert(SeifertBlock::new(BaseSurface::annulus(), vec!["2/3".parse().unwrap()]).unwrap()),
            ],
            vec![GluingEdge::torus((0, 0), (1, 0), Mat2::new(0, 1, 1, n))],
        );
        // A single-edge graph of two discs-with-one-cone: χ > 0, rejected.
        let g = g.unwrap();
        assert!(!validate_geometric(&g).unwrap().geometric);
    }
}

#[test]
fn symmetric_pair_keeps_zero_twist_value() {
    let g = closed_pants_pair(Mat2::SWAP);
    assert_eq!(euler_invariant(&g).unwrap(), delta_max(&g).unwrap());
    assert_eq!(euler_invariant(&g).unwrap(), euler_oracle(&g, 6));
}

#[test]
fn euler_matches_oracle_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..12 {
        let g = random_geometric_graph(&mut rng, 3, 3);
        let vars: usize = g
            .edges()
            .iter()
            .flat_map(|e| e.endpoints())
            .filter(|t| g.blocks()[t.block].as_seifert().is_some())
            .count();
        let radius = if vars <= 2 { 10 } else { 5 };
        if vars > 4 {
            continue;
        }
        let ours = euler_invariant(&g).unwrap();
        let oracle = euler_oracle(&g, radius);
        assert!(ours <= oracle, "search missed a box point: {ours} > {oracle}");
        assert_eq!(ours, oracle);
    }
}

#[test]
fn delta_s_matches_pairwise_brute_force() {
    for n in -20..=20 {
        let m = Mat2::new(1, 0, n, 1);
        let pair = [Slope::INFINITY, Slope::ZERO];
        let brute = pair.iter().flat_map(|a| pair.iter().map(move |b| a.transform(&m).distance(b))).max().unwrap();
        let g = DecompGraph::new(
            vec![
                Block::Hyperbolic(HyperbolicBlock::new(1.0, vec![pair.to_vec()]).unwrap()),
                Block::Hyperbolic(HyperbolicBlock::new(1.0, vec![pair.to_vec()]).unwrap()),
            ],
            vec![GluingEdge::torus((0, 0), (1, 0), m)],
        )
        .unwrap();
        assert_eq!(delta_s(&g, 0).unwrap(), brute);
        assert_eq!(brute, n.unsigned_abs().max(1));
    }
}

#[test]
fn vol_s_grows_with_order_cutoff() {
    let bound = Ratio::new(3, 2);
    let small: Vec<Ratio<i64>> = vol_s_enumerate(bound, 12).unwrap().into_iter().map(|e| e.value).collect();
    let large: Vec<Ratio<i64>> = vol_s_enumerate(bound, 24).unwrap().into_iter().map(|e| e.value).collect();
    assert!(small.iter().all(|v| large.binary_search(v).is_ok()));
    assert!(large.len() > small.len());
}

#[test]
fn vol_s_accumulates_below_one_sixth() {
    // 1 − 1/2 − 1/3 − 1/p = 1/6 − 1/p: more elements under 1/6 for every cutoff.
    let below = |p| vol_s_enumerate(Ratio::new(1, 6), p).unwrap().len();
    let counts: Vec<usize> = [10, 20, 40].into_iter().map(below).collect();
    assert!(counts.windows(2).all(|w| w[1] > w[0]));
}

fn graph_strategy() -> impl Strategy<Value = DecompGraph> {
    any::<u64>().prop_map(|seed| random_geometric_graph(&mut ChaCha8Rng::seed_from_u64(seed), 3, 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn euler_invariant_under_relabeling(g in graph_strategy(), shift in 0usize..3) {
        let n = g.blocks().len();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let h = g.relabeled(&perm).unwrap();
        prop_assert_eq!(euler_invariant(&g).unwrap(), euler_invariant(&h).unwrap());
        prop_assert!((volume(&g).unwrap() - volume(&h).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn euler_invariant_under_edge_reversal(g in graph_strategy()) {
        let edges: Vec<GluingEdge> = g.edges().iter().map(|e| e.reversed()).collect();
        let h = DecompGraph::new(g.blocks().to_vec(), edges).unwrap();
        prop_assert_eq!(euler_invariant(&g).unwrap(), euler_invariant(&h).unwrap());
    }

    #[test]
    fn euler_invariant_under_cusp_basis_change(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_geometric_graph(&mut rng, 3, 3);
        let b = Mat2::random_unimodular(&mut rng, 3);
        // Re-coordinatize every hyperbolic cusp by B; matrices follow.
        let blocks: Vec<Block> = g.blocks().iter().map(|blk| match blk {
            Block::Hyperbolic(h) => Block::Hyperbolic(HyperbolicBlock::new(
                h.volume(),
                h.preferred_slopes().iter().map(|s| s.iter().map(|x| x.transform(&b)).collect()).collect(),
            ).unwrap()),
            s => s.clone(),
        }).collect();
        let binv = b.inverse().unwrap();
        let is_hyp = |i: usize| matches!(g.blocks()[i], Block::Hyperbolic(_));
        let edges: Vec<GluingEdge> = g.edges().iter().map(|e| match e {
            GluingEdge::Torus { from, to, matrix } => {
                let mut m = *matrix;
                if is_hyp(from.block) { m = m.mul(&binv); }
                if is_hyp(to.block) { m = b.mul(&m); }
                GluingEdge::Torus { from: *from, to: *to, matrix: m }
            }
            k => k.clone(),
        }).collect();
        let h = DecompGraph::new(blocks, edges).unwrap();
        prop_assert_eq!(euler_invariant(&g).unwrap(), euler_invariant(&h).unwrap());
    }

    #[test]
    fn euler_invariant_at_most_zero_twist_value(g in graph_strategy()) {
        prop_assert!(euler_invariant(&g).unwrap() <= delta_max(&g).unwrap());
        for e in 0..g.edges().len() {
            prop_assert!(delta_s(&g, e).unwrap() >= 1);
        }
        prop_assert!(volume(&g).unwrap() >= 0.0);
    }

    #[test]
    fn sol_conjugation_and_inverse_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = loop {
            let m = Mat2::random_unimodular(&mut rng, 6);
            if m.det() == 1 { break m; }
        };
        let b = Mat2::random_unimodular(&mut rng, 4);
        let conj = b.mul(&psi).mul(&b.inverse().unwrap());
        let e = sol_torus_bundle_e(&psi).unwrap();
        prop_assert_eq!(e, sol_torus_bundle_e(&conj).unwrap());
        prop_assert_eq!(e, sol_torus_bundle_e(&psi.inverse().unwrap()).unwrap());
    }
}
