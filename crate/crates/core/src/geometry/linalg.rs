//! Fraction-free elimination over `Z` and canonical rational subspaces.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use super::IntVec;
use crate::error::{Error, Result};

/// Bareiss elimination in place. Returns the pivot columns; the first
/// `pivots.len()` rows of `m` are then in (non-reduced) echelon form.
fn bareiss(m: &mut [Vec<BigInt>]) -> Vec<usize> {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut prev = BigInt::from(1);
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (top, rest) = m.split_at_mut(r + 1);
        let prow = &top[r];
        for row in rest.iter_mut() {
            let f = row[c].clone();
            for j in (c + 1)..ncols {
                let num = &prow[c] * &row[j] - &f * &prow[j];
                row[j] = num / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn check_same_dim(vectors: &[IntVec]) -> Result<usize> {
    let dim = vectors.first().map_or(0, IntVec::dim);
    for v in vectors {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
        }
    }
    Ok(dim)
}

/// Exact rank over `Q`.
pub fn rank(vectors: &[IntVec]) -> Result<usize> {
    check_same_dim(vectors)?;
    let mut m: Vec<Vec<BigInt>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
    Ok(bareiss(&mut m).len())
}

fn make_primitive_positive(row: &mut [BigInt], lead: usize) {
    let g = row.iter().fold(BigInt::zero(), |g, a| g.gcd(a));
    let g = if row[lead].is_negative() { -g } else { g };
    if g != BigInt::from(1) && !g.is_zero() {
        for a in row.iter_mut() {
            *a = &*a / &g;
        }
    }
}

/// A nonzero linear subspace of `Q^ambient_dim`, i.e. a projective subspace
/// defined over `Q`.
///
/// The basis is the reduced row echelon form with every row scaled to a
/// primitive integer vector with positive pivot, so two spans are equal iff
/// the structs are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<IntVec>,
    #[serde(skip)]
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn span(ambient_dim: usize, vectors: &[IntVec]) -> Result<Subspace> {
        for v in vectors {
            if v.dim() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: v.dim() });
            }
        }
        let mut m: Vec<Vec<BigInt>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
        let pivots = bareiss(&mut m);
        if pivots.is_empty() {
            return Err(Error::ZeroVector);
        }
        m.truncate(pivots.len());
        for t in (0..pivots.len()).rev() {
            make_primitive_positive(&mut m[t], pivots[t]);
            let (above, below) = m.split_at_mut(t);
            let row_t = &below[0];
            let pc = &row_t[pivots[t]];
            for row_s in above.iter_mut() {
                if row_s[pivots[t]].is_zero() {
                    continue;
                }
                let f = row_s[pivots[t]].clone();
                for (a, b) in row_s.iter_mut().zip(row_t) {
                    *a = &*a * pc - &f * b;
                }
                let g = row_s.iter().fold(BigInt::zero(), |g, a| g.gcd(a));
                for a in row_s.iter_mut() {
                    *a = &*a / &g;
                }
            }
        }
        Ok(Subspace { ambient_dim, basis: m.into_iter().map(IntVec::new).collect(), pivots })
    }

    pub fn whole(ambient_dim: usize) -> Subspace {
        let basis: Vec<IntVec> = (0..ambient_dim).map(|i| IntVec::unit(ambient_dim, i)).collect();
        Subspace { ambient_dim, basis, pivots: (0..ambient_dim).collect() }
    }

    /// `{x : f·x = 0}`. The zero functional gives the whole space.
    pub fn kernel(f: &IntVec) -> Result<Subspace> {
        let n = f.dim();
        let Some(p) = f.coords().iter().position(|c| !c.is_zero()) else {
            return Ok(Subspace::whole(n));
        };
        if n == 1 {
            return Err(Error::ZeroVector);
        }
        let fp = &f.coords()[p];
        let vecs: Vec<IntVec> = (0..n)
            .filter(|&j| j != p)
            .map(|j| {
                let mut v = IntVec::zeros(n).into_coords();
                v[j] = fp.clone();
                v[p] = -&f.coords()[j];
                IntVec::new(v)
            })
            .collect();
        Subspace::span(n, &vecs)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Vector-space dimension (projective dimension plus one).
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[IntVec] {
        &self.basis
    }

    pub fn is_proper(&self) -> bool {
        self.basis.len() < self.ambient_dim
    }

    /// Exact membership of the vector `v` (zero is always a member).
    pub fn contains(&self, v: &IntVec) -> bool {
        if v.dim() != self.ambient_dim {
            return false;
        }
        let mut w = v.coords().to_vec();
        for (row, &pc) in self.basis.iter().zip(&self.pivots) {
            if w[pc].is_zero() {
                continue;
            }
            let f = w[pc].clone();
            let lead = &row.coords()[pc];
            for (a, b) in w.iter_mut().zip(row.coords()) {
                *a = &*a * lead - &f * b;
            }
            let g = w.iter().fold(BigInt::zero(), |g, a| g.gcd(a));
            if g.is_zero() {
                return true;
            }
            for a in w.iter_mut() {
                *a = &*a / &g;
            }
        }
        w.iter().all(Zero::is_zero)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        let all: Vec<IntVec> = self.basis.iter().chain(&other.basis).cloned().collect();
        Subspace::span(self.ambient_dim, &all)
    }
}

#[derive(Deserialize)]
struct RawSubspace {
    ambient_dim: usize,
    basis: Vec<IntVec>,
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSubspace::deserialize(d)?;
        let s = Subspace::span(raw.ambient_dim, &raw.basis).map_err(D::Error::custom)?;
        if s.basis != raw.basis {
            return Err(D::Error::custom("subspace basis is not in canonical echelon form"));
        }
        Ok(s)
    }
}
