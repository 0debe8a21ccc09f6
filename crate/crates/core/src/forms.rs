//! Unimodular symmetric integer forms: classification and counting.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("form is not unimodular: |det| = {0}")]
    NotUnimodular(String),
    #[error("rank must be at least 1")]
    NonpositiveRank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// Name of the form up to isomorphism, where one is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Canonical {
    /// `k⟨1⟩ ⊕ h⟨−1⟩`, both `k, h ≥ 1`.
    OddIndefinite { k: usize, h: usize },
    /// `e8·E₈ ⊕ l·H` with `e8 = σ/8` (negative means copies of `−E₈`).
    EvenIndefinite { e8: i64, l: usize },
    /// Definite forms; only `n⟨±1⟩` (odd, rank ≤ 8) and `±E₈` are named.
    Definite { positive: bool, name: Option<String> },
}

impl fmt::Display for Canonical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Canonical::OddIndefinite { k, h } => write!(f, "{}⊕{}", copies(*k, "⟨1⟩"), copies(*h, "⟨−1⟩")),
            Canonical::EvenIndefinite { e8, l } => {
                let hyp = copies(*l, "H");
                match e8.signum() {
                    0 => write!(f, "{hyp}"),
                    1 => write!(f, "{}⊕{hyp}", copies(*e8 as usize, "E₈")),
                    _ => write!(f, "{}⊕{hyp}", copies(e8.unsigned_abs() as usize, "(−E₈)")),
                }
            }
            Canonical::Definite { name: Some(n), .. } => write!(f, "{n}"),
            Canonical::Definite { positive, name: None } => {
                write!(f, "definite ({})", if *positive { "positive" } else { "negative" })
            }
        }
    }
}

fn copies(n: usize, unit: &str) -> String {
    if n == 1 {
        unit.to_string()
    } else {
        format!("{n}{unit}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodularForm {
    pub matrix: Vec<Vec<i64>>,
    pub rank: usize,
    pub signature: i64,
    pub parity: Parity,
    pub canonical: Canonical,
    /// Rendered canonical form.
    pub name: String,
}

impl UnimodularForm {
    /// The closed simply connected manifold with this form, for the
    /// `CP²`/`S²×S²` families.
    pub fn manifold_name(&self) -> Option<String> {
        let cp = |n: usize, s: &str| copies(n, s);
        match &self.canonical {
            Canonical::OddIndefinite { k, h } => Some(format!("{}#{}", cp(*k, "CP²"), cp(*h, "CP̄²"))),
            Canonical::EvenIndefinite { e8: 0, l: 1 } => Some("S²×S²".into()),
            Canonical::EvenIndefinite { e8: 0, l } => Some(format!("#{l}(S²×S²)")),
            Canonical::Definite { positive, name: Some(_) } if self.parity == Parity::Odd => {
                Some(cp(self.rank, if *positive { "CP²" } else { "CP̄²" }))
            }
            _ => None,
        }
    }
}

fn check_symmetric(m: &[Vec<i64>]) -> Result<(), FormError> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(FormError::NotSquare);
    }
    for i in 0..n {
        for j in i + 1..n {
            if m[i][j] != m[j][i] {
                return Err(FormError::NotSymmetric(i, j));
            }
        }
    }
    Ok(())
}

/// Determinant by fraction-free elimination.
pub fn determinant(m: &[Vec<i64>]) -> Result<BigInt, FormError> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(FormError::NotSquare);
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(if n == 0 { BigInt::one() } else { sign * &a[n - 1][n - 1] })
}

/// Counts of positive and negative entries after congruence
/// diagonalization over ℚ.
pub fn inertia(m: &[Vec<i64>]) -> Result<(usize, usize), FormError> {
    check_symmetric(m)?;
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> =
        m.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !a[i][i].is_zero()) {
                a.swap(i, k);
                for r in a.iter_mut() {
                    r.swap(i, k);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // x_k += x_j: the new diagonal is 2·a[k][j] ≠ 0.
                for c in 0..n {
                    let v = a[j][c].clone();
                    a[k][c] += v;
                }
                for r in 0..n {
                    let v = a[r][j].clone();
                    a[r][k] += v;
                }
            } else {
                continue;
            }
        }
        let piv = a[k][k].clone();
        if piv.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            let f = &a[i][k] / &piv;
            if f.is_zero() {
                continue;
            }
            for c in k..n {
                let v = &f * &a[k][c];
                a[i][c] -= v;
            }
            for r in k..n {
                let v = &f * &a[r][k];
                a[r][i] -= v;
            }
        }
    }
    Ok((pos, neg))
}

pub fn classify(m: &[Vec<i64>]) -> Result<UnimodularForm, FormError> {
    check_symmetric(m)?;
    let det = determinant(m)?;
    if det.abs() != BigInt::one() {
        return Err(FormError::NotUnimodular(det.abs().to_string()));
    }
    let rank = m.len();
    let (pos, neg) = inertia(m)?;
    let signature = pos as i64 - neg as i64;
    let parity = if (0..rank).all(|i| m[i][i] % 2 == 0) { Parity::Even } else { Parity::Odd };
    let canonical = if pos > 0 && neg > 0 {
        match parity {
            Parity::Odd => Canonical::OddIndefinite { k: pos, h: neg },
            Parity::Even => Canonical::EvenIndefinite { e8: signature / 8, l: (rank - signature.unsigned_abs() as usize) / 2 },
        }
    } else {
        let positive = neg == 0;
        let name = match parity {
            Parity::Odd if rank <= 8 => Some(copies(rank, if positive { "⟨1⟩" } else { "⟨−1⟩" })),
            Parity::Even if rank == 8 => Some(if positive { "E₈" } else { "−E₈" }.to_string()),
            _ => None,
        };
        Canonical::Definite { positive, name }
    };
    let name = canonical.to_string();
    Ok(UnimodularForm { matrix: m.to_vec(), rank, signature, parity, canonical, name })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormCounts {
    pub rank: u64,
    pub odd: u64,
    pub even: u64,
    /// `⌊n/2⌋ + 1`
    pub odd_ceiling: u64,
    /// `⌊n/16⌋ + 1`
    pub even_ceiling: u64,
}

/// Canonical forms of rank `n` in the counting: `k⟨1⟩⊕h⟨−1⟩` with `k ≥ h`,
/// and `2kE₈ ⊕ lH` with `k ≥ 0`.
pub fn count_forms(n: u64) -> Result<FormCounts, FormError> {
    if n == 0 {
        return Err(FormError::NonpositiveRank);
    }
    let odd = n / 2 + 1;
    let even = if n % 2 == 1 { 0 } else { n / 16 + 1 };
    Ok(FormCounts { rank: n, odd, even, odd_ceiling: n / 2 + 1, even_ceiling: n / 16 + 1 })
}

/// `Σ_{i ≤ n}` of both counts: homeomorphism types with rank ≤ `n`.
pub fn count_un_homeo_bound(n: u64) -> Result<u64, FormError> {
    if n == 0 {
        return Err(FormError::NonpositiveRank);
    }
    (1..=n).map(|i| count_forms(i).map(|c| c.odd + c.even)).sum()
}

/// Distinct `h⟨1⟩ ⊕ (k−h)⟨−1⟩` up to orientation, summed over `k ≤ n`.
pub fn count_simply_connected_lower(n: u64) -> Result<u64, FormError> {
    if n == 0 {
        return Err(FormError::NonpositiveRank);
    }
    Ok((1..=n).map(|k| k / 2 + 1).sum())
}
