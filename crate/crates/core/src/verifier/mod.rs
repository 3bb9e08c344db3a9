//! Independent audit of traces: conditions, certified `D_ξ` intervals,
//! exhaustive `𝒟_ξ(X)`, exponent bounds and spanning of the tail.

pub mod conditions;
pub mod dxi;
pub mod exponent;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::builder::{limit_point, Phi, SequenceTrace};
use crate::error::{Error, Result};
use crate::geometry::bounds::isqrt_ceil;
use crate::geometry::{format_rat, rank, sqrt_bounds, Rat};
use crate::serde_util::rat_str;

pub use conditions::{check_conditions, ConditionAudit, IndexAudit};
pub use dxi::{brute_force_dmin, brute_force_profile, d_xi, BruteForceProfile, BruteForceRow, DXiInterval, DEFAULT_COST_LIMIT};
pub use exponent::{exponent_report, log_exponent_bound_hi, ExponentRecord, ExponentReport, Trend};

/// True iff `x_{i0}, …, x_last` span the ambient space (`i0` is 1-based).
pub fn spanning_check(trace: &SequenceTrace, i0: usize) -> Result<bool> {
    let len = trace.len();
    if i0 < 2 || i0 > len {
        return Err(Error::IndexOutOfRange { index: i0, max: len });
    }
    Ok(rank(&trace.points()[i0 - 1..])? == trace.ambient_dim)
}

/// `φ_hi(X)²` at integer `X`.
fn phi_hi_sq(phi: &Phi, x: u64, prec: u32) -> Result<Rat> {
    Ok(phi.sq_bounds(&BigInt::from(x * x), prec)?.1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominationRow {
    pub x: u64,
    /// Upper bound of `𝒟_ξ(X)`.
    #[serde(with = "rat_str")]
    pub d_hi: Rat,
    /// Upper bound of `φ(X)`.
    #[serde(with = "rat_str")]
    pub phi_hi: Rat,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceAudit {
    pub passed: bool,
    pub profile: BruteForceProfile,
    /// `𝒟_ξ(X) <= φ(X)` for integer `X` from `‖x_2‖` to `x_max`.
    pub domination: Vec<DominationRow>,
}

/// Exhaustive `𝒟_ξ(X)` against the trace's limit ball, with the domination
/// check `hi(𝒟_ξ(X))² <= φ_hi(X)²` on `[‖x_2‖, x_max]`.
pub fn bruteforce_audit(trace: &SequenceTrace, x_max: u64, precision_bits: u32, cost_limit: u128) -> Result<BruteForceAudit> {
    let limit = limit_point(trace)?;
    let profile = brute_force_profile(&limit, x_max, precision_bits, cost_limit)?;
    let start = isqrt_ceil(&trace.entries[1].norm_sq);
    let mut domination = Vec::new();
    for row in &profile.rows {
        if BigInt::from(row.x) < start {
            continue;
        }
        let phi_sq = phi_hi_sq(&trace.phi, row.x, precision_bits)?;
        let ok = &row.interval.hi * &row.interval.hi <= phi_sq;
        let phi_hi = sqrt_bounds(&phi_sq, precision_bits)?.1;
        domination.push(DominationRow { x: row.x, d_hi: row.interval.hi.clone(), phi_hi, ok });
    }
    Ok(BruteForceAudit { passed: domination.iter().all(|r| r.ok), profile, domination })
}

#[derive(Clone, Debug)]
pub struct AuditOptions {
    pub precision_bits: u32,
    pub bruteforce_xmax: Option<u64>,
    pub cost_limit: u128,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { precision_bits: 64, bruteforce_xmax: None, cost_limit: DEFAULT_COST_LIMIT }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    pub conditions: ConditionAudit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentReport>,
    /// `i0 → rank{x_{i0}, …} = ambient dim`; required for `i0 <= len - dim`.
    pub spanning: BTreeMap<usize, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bruteforce: Option<BruteForceAudit>,
}

/// Full audit. Errors only when the trace cannot be interpreted at all or a
/// requested enumeration is refused.
pub fn audit(trace: &SequenceTrace, opts: &AuditOptions) -> Result<AuditReport> {
    let conditions = check_conditions(trace)?;
    let len = trace.len();
    let exponents = if len >= 3 { Some(exponent_report(trace, opts.precision_bits)?) } else { None };
    let mut spanning = BTreeMap::new();
    for i0 in 2..=len {
        spanning.insert(i0, spanning_check(trace, i0)?);
    }
    let bruteforce = match opts.bruteforce_xmax {
        Some(x) => Some(bruteforce_audit(trace, x, opts.precision_bits, opts.cost_limit)?),
        None => None,
    };

    let mut first_failure = conditions.first_failure.clone();
    if first_failure.is_none() {
        let required = len.saturating_sub(trace.ambient_dim);
        first_failure = (2..=required).find(|i0| !spanning[i0]).map(|i0| format!("spanning: x_{i0}, …, x_{len} do not span"));
    }
    if first_failure.is_none() {
        if let Some(bf) = &bruteforce {
            first_failure = bf.domination.iter().find(|r| !r.ok).map(|r| {
                format!("bruteforce: 𝒟_ξ({}) <= {} is not below φ_hi = {}", r.x, format_rat(&r.d_hi), format_rat(&r.phi_hi))
            });
        }
    }
    Ok(AuditReport { passed: first_failure.is_none(), first_failure, conditions, exponents, spanning, bruteforce })
}
