use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topocalc::forms::{classify, determinant, inertia, Parity};

mod common;
use common::signature_by_minors;

fn congruent(m: &[Vec<i64>], rng: &mut ChaCha8Rng, moves: usize) -> Vec<Vec<i64>> {
    // Pᵀ M P for P a product of elementary matrices, applied as paired
    // row and column operations.
    let n = m.len();
    let mut a = m.to_vec();
    for _ in 0..moves {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let k = rng.gen_range(-1..=1);
        for r in 0..n {
            a[r][i] += k * a[r][j];
        }
        for c in 0..n {
            a[i][c] += k * a[j][c];
        }
    }
    a
}

fn diag(signs: &[i64]) -> Vec<Vec<i64>> {
    let n = signs.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { signs[i] } else { 0 }).collect()).collect()
}

#[test]
fn signature_matches_leading_minors() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    while checked < 300 {
        let n = rng.gen_range(1..=6);
        let mut m = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in i..n {
                let x = rng.gen_range(-4..=4);
                m[i][j] = x;
                m[j][i] = x;
            }
        }
        let Some(sig) = signature_by_minors(&m) else { continue };
        let (pos, neg) = inertia(&m).unwrap();
        assert_eq!(pos + neg, n, "{m:?}");
        assert_eq!(pos as i64 - neg as i64, sig, "{m:?}");
        checked += 1;
    }
}

#[test]
fn hyperbolic_sums() {
    let h = vec![vec![0, 1], vec![1, 0]];
    let f = classify(&h).unwrap();
    assert_eq!(f.parity, Parity::Even);
    assert_eq!(f.signature, 0);
    assert_eq!(determinant(&h).unwrap(), (-1).into());
}

proptest! {
    #[test]
    fn classification_is_congruence_invariant(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signs: Vec<i64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let m = diag(&signs);
        let c = congruent(&m, &mut rng, 12);
        let (a, b) = (classify(&m).unwrap(), classify(&c).unwrap());
        prop_assert_eq!(a.canonical, b.canonical);
        prop_assert_eq!(determinant(&c).unwrap().magnitude().clone(), 1u32.into());
    }
}
