//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use topocalc::decomposition::{delta_max, Block, DecompGraph};
use topocalc::seifert::SeifertBlock;
use topocalc::slope::Mat2;

/// min |b'| + |c'| over B ψ B⁻¹ with every entry of B at most `r`.
pub fn sol_oracle(psi: &Mat2, r: i64) -> u64 {
    let mut best = u64::MAX;
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                for d in -r..=r {
                    let m = Mat2::new(a, b, c, d);
                    if m.det().abs() != 1 {
                        continue;
                    }
                    let conj = m.inverse().unwrap().mul(psi).mul(&m);
                    best = best.min((conj.b.abs() + conj.c.abs()) as u64);
                }
            }
        }
    }
    best
}

/// Exhaustive twist search over a box, with the same admissibility rule.
pub fn euler_oracle(g: &DecompGraph, radius: i64) -> u64 {
    let mut slots = Vec::new();
    for (e, edge) in g.edges().iter().enumerate() {
        for (side, t) in edge.endpoints().into_iter().enumerate() {
            if g.blocks()[t.block].as_seifert().is_some() {
                slots.push((e, side, t));
            }
        }
    }
    let free: Vec<usize> = g.free_boundary().iter().map(|t| t.block).collect();
    let n = slots.len();
    let width = (2 * radius + 1) as usize;
    let mut best = u64::MAX;
    for code in 0..width.pow(n as u32) {
        let mut c = code;
        let tw: Vec<i64> = (0..n)
            .map(|_| {
                let x = (c % width) as i64 - radius;
                c /= width;
                x
            })
            .collect();
        let ok = (0..g.blocks().len())
            .all(|b| free.contains(&b) || slots.iter().zip(&tw).filter(|(s, _)| s.2.block == b).map(|(_, t)| t).sum::<i64>() == 0);
        if !ok {
            continue;
        }
        // Rebuild the graph with these twists baked into the blocks.
        let mut blocks = g.blocks().to_vec();
        for (&(_, _, t), &x) in slots.iter().zip(&tw) {
            if let Block::Seifert(s) = &blocks[t.block] {
                let mut twists = s.section_twists().to_vec();
                twists[t.torus] += x;
                blocks[t.block] =
                    Block::Seifert(SeifertBlock::with_twists(*s.base(), s.fillings().to_vec(), twists).unwrap());
            }
        }
        let h = DecompGraph::new(blocks, g.edges().to_vec()).unwrap();
        best = best.min(delta_max(&h).unwrap());
    }
    best
}


/// Number of twist variables the box oracle ranges over.
pub fn twist_variables(g: &DecompGraph) -> usize {
    g.edges().iter().flat_map(|e| e.endpoints()).filter(|t| g.blocks()[t.block].as_seifert().is_some()).count()
}

/// Diagonal of the Smith normal form, by repeated row and column reduction.
pub fn smith_diagonal(m: &[Vec<i64>]) -> Vec<i128> {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        // Pivot: smallest nonzero entry in the remaining block.
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs())
        else {
            diag.extend(std::iter::repeat(0).take(rows.min(cols) - t));
            break;
        };
        a.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                let f = a[i][t] / a[t][t];
                for j in t..cols {
                    a[i][j] -= f * a[t][j];
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let f = a[t][j] / a[t][t];
                for i in t..rows {
                    a[i][j] -= f * a[i][t];
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                // Move the smallest leftover in row/column t to the pivot.
                let (mut bi, mut bj) = (t, t);
                for i in t..rows {
                    if a[i][t] != 0 && a[i][t].abs() < a[bi][bj].abs() {
                        (bi, bj) = (i, t);
                    }
                }
                for j in t..cols {
                    if a[t][j] != 0 && a[t][j].abs() < a[bi][bj].abs() {
                        (bi, bj) = (t, j);
                    }
                }
                a.swap(t, bi);
                for r in a.iter_mut() {
                    r.swap(t, bj);
                }
                continue;
            }
            // Divisibility: fold in any entry the pivot does not divide.
            let bad = (t + 1..rows).flat_map(|i| (t + 1..cols).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % a[t][t] != 0);
            match bad {
                Some((i, _)) => {
                    for j in t..cols {
                        a[t][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag
}

/// Order of the cokernel of a square integer matrix; `None` if infinite.
pub fn cokernel_order(m: &[Vec<i64>]) -> Option<u128> {
    let d = smith_diagonal(m);
    if d.len() < m.len() || d.iter().any(|&x| x == 0) {
        return None;
    }
    Some(d.iter().map(|&x| x as u128).product())
}

/// Signature from the signs of leading principal minors (Jacobi), valid
/// when no leading minor vanishes; `None` otherwise.
pub fn signature_by_minors(m: &[Vec<i64>]) -> Option<i64> {
    let n = m.len();
    let mut prev: i128 = 1;
    let mut sig = 0;
    for k in 1..=n {
        let minor: Vec<Vec<i128>> = (0..k).map(|i| (0..k).map(|j| m[i][j] as i128).collect()).collect();
        let d = det_exact(minor);
        if d == 0 {
            return None;
        }
        sig += if (d > 0) == (prev > 0) { 1 } else { -1 };
        prev = d;
    }
    Some(sig)
}

/// Determinant by cofactor-free fraction-free elimination on small matrices.
fn det_exact(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| a[r][k] != 0) else { return 0 };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}
