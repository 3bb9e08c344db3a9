//! Certified lower bounds for the approximation exponent along a trace.
//!
//! At index `i` the constructed limit satisfies
//! `D_ξ(x_i) <= (3/2)·‖x_i‖·dist(x_{i+1}, x_i)` (the tail of the distances
//! sums to at most `3/2` of the first one), and `𝒟_ξ(X) <= D_ξ(x_i)` for
//! `‖x_i‖ <= X < ‖x_{i+1}‖`. So `λ >= -log D / log ‖x_{i+1}‖` at that scale.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::builder::{Phi, SequenceTrace};
use crate::error::{Error, Result};
use crate::geometry::{dist_sq, ln_bounds, rat_to_decimal, sqrt_bounds, Rat};
use crate::serde_util::{opt_rat_str, rat_str};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentRecord {
    pub index: usize,
    /// Lower bound of `X_i = ‖x_{i+1}‖`.
    #[serde(with = "rat_str")]
    pub x_lo: Rat,
    #[serde(with = "rat_str")]
    pub d_hi: Rat,
    #[serde(with = "rat_str")]
    pub lambda_lb: Rat,
    /// Upper bound of the exponent the decay function itself allows at
    /// `X_i`: `1 - log log(3X)/log X` for `log3x`, `p` for `pow p`.
    #[serde(default, with = "opt_rat_str", skip_serializing_if = "Option::is_none")]
    pub phi_exponent_hi: Option<Rat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Single,
    Increasing,
    Decreasing,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub phi: Phi,
    pub precision_bits: u32,
    pub records: Vec<ExponentRecord>,
    pub trend: Trend,
}

/// Certified `-ln(d_sq) / ln(n)` rounded down; needs `n > 1`.
pub fn exponent_lower_bound(d_sq: &Rat, n: &BigInt, precision_bits: u32) -> Result<Rat> {
    let (_, ln_d_hi) = ln_bounds(d_sq, precision_bits + 8)?;
    let (ln_n_lo, ln_n_hi) = ln_bounds(&Rat::from_integer(n.clone()), precision_bits + 8)?;
    if !ln_n_lo.is_positive() {
        return Err(Error::InvalidParameters("scale must exceed 1".into()));
    }
    let num = -ln_d_hi;
    Ok(if num.is_negative() { num / ln_n_lo } else { num / ln_n_hi })
}

/// Upper bound of `1 - ln ln(3X) / ln X` for `X = √n > 1`, that is
/// `1 - 2·ln(ln(9n)/2) / ln n`.
pub fn log_exponent_bound_hi(n: &BigInt, precision_bits: u32) -> Result<Rat> {
    let p = precision_bits + 8;
    let (ln9n_lo, _) = ln_bounds(&Rat::from_integer(n * 9), p)?;
    let (inner_lo, _) = ln_bounds(&(ln9n_lo / Rat::from_integer(BigInt::from(2))), p)?;
    let (ln_n_lo, ln_n_hi) = ln_bounds(&Rat::from_integer(n.clone()), p)?;
    if !ln_n_lo.is_positive() {
        return Err(Error::InvalidParameters("scale must exceed 1".into()));
    }
    let num = inner_lo * Rat::from_integer(BigInt::from(2));
    let ratio_lo = if num.is_negative() { num / ln_n_lo } else { num / ln_n_hi };
    Ok(Rat::one() - ratio_lo)
}

fn trend(values: &[Rat]) -> Trend {
    if values.len() < 2 {
        return Trend::Single;
    }
    let up = values.windows(2).all(|w| w[0] < w[1]);
    let down = values.windows(2).all(|w| w[0] > w[1]);
    match (up, down) {
        (true, _) => Trend::Increasing,
        (_, true) => Trend::Decreasing,
        _ => Trend::Mixed,
    }
}

pub fn exponent_report(trace: &SequenceTrace, precision_bits: u32) -> Result<ExponentReport> {
    let len = trace.len();
    if len < 3 {
        return Err(Error::TraceTooShort { len, min: 3 });
    }
    let pts = trace.points();
    let nine_quarters = Rat::new(BigInt::from(9), BigInt::from(4));
    let mut records = Vec::new();
    for i in 2..len {
        let (x, next) = (&pts[i - 1], &pts[i]);
        let n_next = next.norm_sq();
        let d_sq = &nine_quarters * Rat::from_integer(x.norm_sq()) * dist_sq(x, next)?;
        let lambda_lb = exponent_lower_bound(&d_sq, &n_next, precision_bits)?;
        let phi_exponent_hi = match &trace.phi {
            Phi::LogOverX => Some(log_exponent_bound_hi(&n_next, precision_bits)?),
            Phi::PowerLaw(p) => Some(p.clone()),
        };
        records.push(ExponentRecord {
            index: i,
            x_lo: sqrt_bounds(&Rat::from_integer(n_next), precision_bits)?.0,
            d_hi: if d_sq.is_zero() { Rat::zero() } else { sqrt_bounds(&d_sq, precision_bits)?.1 },
            lambda_lb,
            phi_exponent_hi,
        });
    }
    let trend = trend(&records.iter().map(|r| r.lambda_lb.clone()).collect::<Vec<_>>());
    Ok(ExponentReport { phi: trace.phi.clone(), precision_bits, records, trend })
}

impl ExponentReport {
    /// Fixed-width table: index, X_i, lambda_lb.
    pub fn table(&self, digits: usize) -> String {
        let mut out = format!("{:>5}  {:>24}  {:>14}\n", "index", "X_i", "lambda_lb");
        for r in &self.records {
            out.push_str(&format!("{:>5}  {:>24}  {:>14}\n", r.index, sci(&r.x_lo), rat_to_decimal(&r.lambda_lb, digits)));
        }
        out
    }
}

/// Short scientific rendering of a positive rational, for tables.
pub fn sci(r: &Rat) -> String {
    let int = r.numer() / r.denom();
    let s = int.to_string();
    if s.len() <= 12 {
        return rat_to_decimal(r, 3);
    }
    format!("{}.{}e{}", &s[..1], &s[1..7], s.len() - 1)
}
