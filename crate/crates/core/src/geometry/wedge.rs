use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::IntVec;
use crate::error::{Error, Result};

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in (i + 1)..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Determinant by fraction-free elimination.
pub(crate) fn det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return BigInt::zero();
        };
        if p != c {
            m.swap(p, c);
            sign = -sign;
        }
        for i in (c + 1)..n {
            for j in (c + 1)..n {
                let num = &m[c][c] * &m[i][j] - &m[i][c] * &m[c][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[c][c].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// `v_1 ∧ … ∧ v_k` in Plücker coordinates: the `k×k` minors indexed by
/// `k`-subsets of columns in lexicographic order.
pub fn wedge(vectors: &[IntVec]) -> Result<IntVec> {
    let k = vectors.len();
    let n = vectors.first().map_or(0, IntVec::dim);
    for v in vectors {
        if v.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.dim() });
        }
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidParameters(format!("wedge of {k} vectors in dimension {n} needs 1 <= k < n")));
    }
    let coords = subsets(n, k)
        .into_iter()
        .map(|cols| {
            let m = vectors.iter().map(|v| cols.iter().map(|&c| v.coords()[c].clone()).collect()).collect();
            det(m)
        })
        .collect();
    Ok(IntVec::new(coords))
}
