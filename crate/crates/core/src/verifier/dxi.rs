//! Certified values of `D_ξ(x) = ‖x‖·dist(ξ, [x])` for `ξ` known up to a
//! ball, and exhaustive minimization over small integer points.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builder::CertifiedLimit;
use crate::error::{Error, Result};
use crate::geometry::{sqrt_bounds, IntVec, Rat};
use crate::serde_util::rat_str;

pub const DEFAULT_COST_LIMIT: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DXiInterval {
    #[serde(with = "rat_str")]
    pub lo: Rat,
    #[serde(with = "rat_str")]
    pub hi: Rat,
}

impl DXiInterval {
    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, r: &Rat) -> bool {
        &self.lo <= r && r <= &self.hi
    }
}

/// `[c - R, c + R]` around `c = √center_sq` with `R = √radius_sq`, outward rounded.
fn ball_interval(center_sq: &Rat, radius_sq: &Rat, prec: u32) -> Result<DXiInterval> {
    let (c_lo, c_hi) = sqrt_bounds(center_sq, prec)?;
    let (_, r_hi) = sqrt_bounds(radius_sq, prec)?;
    let lo = (&c_lo - &r_hi).max(Rat::zero());
    Ok(DXiInterval { lo, hi: c_hi + r_hi })
}

/// Encloses `D_ξ(x)` for every `ξ` in the ball of `limit`.
pub fn d_xi(limit: &CertifiedLimit, x: &IntVec, precision_bits: u32) -> Result<DXiInterval> {
    let rep = &limit.representative;
    if x.dim() != rep.dim() {
        return Err(Error::DimensionMismatch { expected: rep.dim(), found: x.dim() });
    }
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    // ‖x‖²·dist²(x, rep) = ‖x∧rep‖² / ‖rep‖²
    let center_sq = Rat::new(x.wedge_norm_sq(rep), rep.norm_sq());
    let radius_sq = &limit.radius_sq * Rat::from_integer(x.norm_sq());
    ball_interval(&center_sq, &radius_sq, precision_bits)
}

/// `𝒟_ξ(X)` enclosure at one integer scale `X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceRow {
    pub x: u64,
    pub interval: DXiInterval,
    /// Point whose upper bound realizes `interval.hi`.
    pub argmin: IntVec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceProfile {
    pub x_max: u64,
    /// Primitive canonical points enumerated.
    pub candidates: u64,
    pub rows: Vec<BruteForceRow>,
}

/// Candidates of one norm² shell whose approximate key `|x·rep'|` is
/// within `margin` of the best seen; only these can hold the exact maximum.
#[derive(Clone, Debug, Default)]
struct Shell {
    top: u128,
    cands: Vec<(u128, Vec<i64>)>,
}

impl Shell {
    fn insert(&mut self, key: u128, x: Vec<i64>, margin: u128) {
        if key.saturating_add(margin) < self.top {
            return;
        }
        if key > self.top {
            self.top = key;
            let t = key;
            self.cands.retain(|(k, _)| k.saturating_add(margin) >= t);
        }
        self.cands.push((key, x));
    }
}

fn gcd_all(x: &[i64]) -> i64 {
    x.iter().fold(0i64, |g, &c| g.gcd(&c))
}

/// Calls `f` on every `x ∈ Z^dim` with first coordinate `first` and
/// `‖x‖² <= bound`.
fn for_each_with_first(dim: usize, first: i64, bound: i64, f: &mut impl FnMut(&[i64], i64)) {
    fn rec(x: &mut Vec<i64>, dim: usize, used: i64, bound: i64, f: &mut impl FnMut(&[i64], i64)) {
        if x.len() == dim {
            f(x, used);
            return;
        }
        let room = bound - used;
        let m = (room as f64).sqrt() as i64 + 1;
        for c in -m..=m {
            if c * c <= room {
                x.push(c);
                rec(x, dim, used + c * c, bound, f);
                x.pop();
            }
        }
    }
    let mut x = vec![first];
    rec(&mut x, dim, first * first, bound, f);
}

/// Screens all primitive canonical points with `‖x‖ <= x_max` by the
/// integer key `|Σ x_i·r_i|`; `margin` is the key error to tolerate.
fn scan(dim: usize, x_max: i64, r: &[i128], margin: u128) -> (Vec<Shell>, u64) {
    let bound = x_max * x_max;
    let empty = || (vec![Shell::default(); bound as usize + 1], 0u64);
    (0..=x_max)
        .into_par_iter()
        .map(|first| {
            let mut acc = empty();
            for_each_with_first(dim, first, bound, &mut |x, n| {
                let lead_pos = x.iter().find(|c| **c != 0).is_some_and(|c| *c > 0);
                if !lead_pos || gcd_all(x) != 1 {
                    return;
                }
                acc.1 += 1;
                let key = x.iter().zip(r).map(|(a, b)| *a as i128 * b).sum::<i128>().unsigned_abs();
                acc.0[n as usize].insert(key, x.to_vec(), margin);
            });
            acc
        })
        .reduce(empty, |mut a, b| {
            for (sa, sb) in a.0.iter_mut().zip(b.0) {
                for (k, x) in sb.cands {
                    sa.insert(k, x, margin);
                }
            }
            a.1 += b.1;
            a
        })
}

/// `(2X+1)^dim`, saturating.
pub fn enumeration_cost(dim: usize, x_max: u64) -> u128 {
    let side = 2 * x_max as u128 + 1;
    (0..dim).try_fold(1u128, |acc, _| acc.checked_mul(side)).unwrap_or(u128::MAX)
}

/// `𝒟_ξ(X)` for every `X = 1, …, x_max` by exhaustive enumeration of
/// primitive points with `‖x‖ <= x_max`. Within a shell of fixed `‖x‖²`
/// both interval ends are minimized by the largest `|x·rep|`, so shells are
/// compared exactly and only one square root per shell is taken.
pub fn brute_force_profile(limit: &CertifiedLimit, x_max: u64, precision_bits: u32, cost_limit: u128) -> Result<BruteForceProfile> {
    if x_max < 1 {
        return Err(Error::InvalidParameters("X must be at least 1".into()));
    }
    let rep = &limit.representative;
    let dim = rep.dim();
    let estimate = enumeration_cost(dim, x_max);
    if estimate > cost_limit || x_max > 1 << 20 {
        return Err(Error::TooLarge { estimate, limit: cost_limit });
    }
    let xm = x_max as i64;
    // Keys use r' = floor(rep / 2^shift), so |x·rep'| is off from
    // |x·rep| / 2^shift by less than Σ|x_i| <= X·dim.
    let spread = x_max * dim as u64;
    let key_bits = 124 - (64 - spread.leading_zeros() as u64);
    let shift = rep.height().bits().saturating_sub(key_bits);
    let r: Vec<i128> = rep.coords().iter().map(|c| (c >> shift as usize).to_i128().expect("shifted to fit")).collect();
    let margin = if shift == 0 { 0 } else { 2 * spread as u128 };
    let (shells, candidates) = scan(dim, xm, &r, margin);
    let shells: Vec<Option<(BigInt, Vec<i64>)>> = shells
        .into_iter()
        .map(|sh| {
            sh.cands
                .into_iter()
                .map(|(_, x)| (x.iter().zip(rep.coords()).map(|(a, b)| b * BigInt::from(*a)).sum::<BigInt>().abs(), x))
                .max_by(|(ka, xa), (kb, xb)| ka.cmp(kb).then_with(|| xb.cmp(xa)))
        })
        .collect();

    let nr = rep.norm_sq();
    let mut rows = Vec::with_capacity(x_max as usize);
    let mut best: Option<(DXiInterval, IntVec)> = None;
    let mut best_lo: Option<Rat> = None;
    let mut shell_iter = shells.into_iter().enumerate();
    for x in 1..=x_max {
        let top = (x * x) as usize;
        for (n, shell) in shell_iter.by_ref() {
            if let Some((dot, pt)) = shell {
                let wedge = BigInt::from(n) * &nr - &dot * &dot;
                // unreduced: both only feed sqrt_bounds, and gcd on huge operands dominates
                let center_sq = Rat::new_raw(wedge, nr.clone());
                let radius_sq = Rat::new_raw(limit.radius_sq.numer() * n, limit.radius_sq.denom().clone());
                let iv = ball_interval(&center_sq, &radius_sq, precision_bits)?;
                if best_lo.as_ref().is_none_or(|l| iv.lo < *l) {
                    best_lo = Some(iv.lo.clone());
                }
                if best.as_ref().is_none_or(|(b, _)| iv.hi < b.hi) {
                    best = Some((iv, IntVec::from_i64s(&pt)));
                }
            }
            if n == top {
                break;
            }
        }
        let (iv, argmin) = best.clone().expect("unit vectors lie in every shell range");
        let interval = DXiInterval { lo: best_lo.clone().expect("set with best"), hi: iv.hi };
        rows.push(BruteForceRow { x, interval, argmin });
    }
    Ok(BruteForceProfile { x_max, candidates, rows })
}

/// `𝒟_ξ(X) = min { D_ξ(x) : 0 < ‖x‖ <= X }`, enclosed.
pub fn brute_force_dmin(limit: &CertifiedLimit, x: u64, precision_bits: u32) -> Result<BruteForceRow> {
    let p = brute_force_profile(limit, x, precision_bits, DEFAULT_COST_LIMIT)?;
    Ok(p.rows.into_iter().last().expect("x >= 1"))
}
