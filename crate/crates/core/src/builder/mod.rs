//! Recursive construction of `x_1, x_2, …` satisfying conditions (a)–(d):
//! membership, growing norms, strictly dropping `s_H` for `H = H_i`, and for
//! `i >= 2` the distance bounds tied to `φ` and to the previous step.

pub mod family;
pub mod phi;
pub mod trace;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::bounds::isqrt_ceil;
use crate::geometry::{dist_sq, primitive, rank, IntVec, Rat, Subspace};
use crate::serde_util::rat_str;

pub use family::{FamilyAdapter, FamilySpec, Member, SCertificate, StepLine};
pub use phi::Phi;
pub use trace::{RunStatus, SequenceTrace, StepRecord, TraceEntry, TRACE_VERSION};

/// Multipliers tried past the first admissible one before giving up.
const MULTIPLIER_CAP: u32 = 256;

pub const DEFAULT_PRECISION_BITS: u32 = 64;
pub const DEFAULT_MAX_NORM_BITS: u64 = 1 << 16;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub phi: Phi,
    /// Number of points `x_1, …, x_steps`.
    pub steps: usize,
    pub seed: u64,
    pub precision_bits: u32,
    /// Refuse steps whose squared norm would exceed this many bits.
    pub max_norm_bits: u64,
    pub start: Option<Member>,
}

impl RunConfig {
    pub fn new(phi: Phi, steps: usize) -> RunConfig {
        RunConfig { phi, steps, seed: 0, precision_bits: DEFAULT_PRECISION_BITS, max_norm_bits: DEFAULT_MAX_NORM_BITS, start: None }
    }
}

/// `H_i` for the points `x_1, …, x_i`, with the minimal `j` (1-based).
pub fn compute_hi(points: &[IntVec]) -> Result<(Subspace, usize)> {
    let last = points.last().ok_or_else(|| Error::InvalidParameters("no points".into()))?;
    let dim = last.dim();
    let mut j = points.len();
    let mut h = Subspace::span(dim, std::slice::from_ref(last))?;
    while j > 1 {
        let wider = h.sum(&Subspace::span(dim, &points[j - 2..j - 1])?)?;
        if !wider.is_proper() {
            break;
        }
        h = wider;
        j -= 1;
    }
    if !h.is_proper() {
        return Err(Error::InvalidParameters("ambient dimension must be at least 2".into()));
    }
    Ok((h, j))
}

/// `a` with `a·x = gcd(x)`.
fn bezout(x: &IntVec) -> IntVec {
    let mut g = BigInt::zero();
    let mut a: Vec<BigInt> = vec![BigInt::zero(); x.dim()];
    for (k, c) in x.coords().iter().enumerate() {
        let e = g.extended_gcd(c);
        for ai in a.iter_mut().take(k) {
            *ai *= &e.x;
        }
        a[k] = e.y;
        g = e.gcd;
    }
    if g.is_negative() {
        a.iter_mut().for_each(|ai| *ai = -&*ai);
    }
    IntVec::new(a)
}

/// Saturates the lattice `Z^n ∩ span(x, z)` for primitive `x`: returns `w`
/// with `{x, w}` a basis of it, `|w·x| <= ‖x‖²/2`, and `w = (z + c·x)/d`,
/// as `(w, c, d)`.
pub fn saturate(x: &IntVec, z: &IntVec) -> Result<(IntVec, BigInt, BigInt)> {
    let mut d = BigInt::zero();
    for i in 0..x.dim() {
        for j in (i + 1)..x.dim() {
            d = d.gcd(&(&x.coords()[i] * &z.coords()[j] - &x.coords()[j] * &z.coords()[i]));
        }
    }
    if d.is_zero() {
        return Err(Error::DegenerateLine);
    }
    let a = bezout(x);
    let mut c = -a.dot(z);
    let u = z.combine(&BigInt::one(), x, &c);
    let mut w = IntVec::new(u.coords().iter().map(|v| v / &d).collect());
    debug_assert_eq!(w.scale(&d), u);
    // reduce against x
    let nx = x.norm_sq();
    let t = round_div(&w.dot(x), &nx);
    w = w.combine(&BigInt::one(), x, &-&t);
    c -= &t * &d;
    Ok((w, c, d))
}

fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let num: BigInt = a * 2 + b;
    let den: BigInt = b * 2;
    num.div_floor(&den)
}

/// Least `b >= 1` with `‖w + b·x‖² >= t`; `b ↦ ‖w + b·x‖²` is increasing on
/// `b >= 1` once `|w·x| <= ‖x‖²/2`.
fn least_multiplier(w: &IntVec, x: &IntVec, t: &BigInt) -> BigInt {
    let n = x.norm_sq();
    let s = w.dot(x);
    let ww = w.norm_sq();
    let norm = |b: &BigInt| &ww + &s * b * 2 + b * b * &n;
    let disc = &s * &s - &n * (&ww - t);
    let mut b = if disc.is_negative() { BigInt::one() } else { (isqrt_ceil(&disc) - &s).div_ceil(&n).max(BigInt::one()) };
    while b > BigInt::one() && &norm(&(&b - 1)) >= t {
        b -= 1;
    }
    while &norm(&b) < t {
        b += 1;
    }
    b
}

/// One step from the last point of `trace`: returns the step record for
/// `x_i` and the new member `x_{i+1}`.
pub fn next_point(trace: &SequenceTrace, adapter: &FamilyAdapter, cfg: &RunConfig) -> Result<(StepRecord, Member)> {
    let i = trace.entries.len();
    let cur = trace.entries.last().ok_or_else(|| Error::InvalidParameters("empty trace".into()))?;
    let x = cur.point.rep();
    let member = cur.member();
    let (h, j) = compute_hi(&trace.points())?;
    let line = adapter.line(&member, &h)?;
    let (w, c, d) = saturate(x, line.z())?;
    let nx = x.norm_sq();
    let wedge_sq = x.wedge_norm_sq(&w);
    let c_sq = Rat::new(wedge_sq.clone(), nx.clone());
    // condition (d): (9/4)·‖x_i∧w‖² / N <= φ(√N)²
    let phi_c = Rat::new(&wedge_sq * 9, BigInt::from(4));
    let prev = if i >= 2 {
        let p = trace.entries[i - 2].step.as_ref().ok_or_else(|| Error::MalformedTrace("missing step".into()))?;
        Some(p.dist_sq.clone())
    } else {
        None
    };

    let mut target: BigInt = &nx + 1;
    if let Some(prev) = &prev {
        // 9·‖x_i∧w‖² / (N_i·N) <= prev
        let tele = Rat::new(&wedge_sq * 9, nx.clone()) / prev;
        target = target.max(tele.numer().div_ceil(tele.denom()));
        target = target.max(cfg.phi.min_admissible(&phi_c, cfg.precision_bits, cfg.max_norm_bits)?);
    }
    if target.bits() > cfg.max_norm_bits {
        return Err(Error::BudgetExhausted(format!("next squared norm needs {} bits, limit is {}", target.bits(), cfg.max_norm_bits)));
    }

    let mut b = least_multiplier(&w, x, &target);
    for _ in 0..MULTIPLIER_CAP {
        let v = w.combine(&BigInt::one(), x, &b);
        let n = v.norm_sq();
        let ds = Rat::new(wedge_sq.clone(), &nx * &n);
        let mut ok = n > nx;
        if let Some(prev) = &prev {
            ok = ok && &ds * Rat::from_integer(BigInt::from(9)) <= *prev && cfg.phi.admits(&phi_c, &n, cfg.precision_bits)?;
        }
        if ok {
            let coef_x = Rat::new(c.clone(), d.clone()) + Rat::from_integer(b.clone());
            let coef_z = Rat::new(BigInt::one(), d.clone());
            if let Some((next, certificate)) = adapter.realize(&member, &line, &h, &coef_x, &coef_z)? {
                if next.point != primitive(&v)? {
                    return Err(Error::PreconditionViolated("line point disagrees with its witness".into()));
                }
                debug_assert_eq!(dist_sq(x, next.point.rep())?, ds);
                let phi_lo_sq = match prev {
                    Some(_) => Some(cfg.phi.sq_bounds(&n, cfg.precision_bits)?.0),
                    None => None,
                };
                let record = StepRecord { h, j, z: w, b, c_sq, dist_sq: ds, phi_lo_sq, certificate };
                return Ok((record, next));
            }
        }
        b += 1;
    }
    Err(Error::NoValidMultiplier(format!("no certified multiplier within {MULTIPLIER_CAP} tries at index {i}")))
}

fn tail_spans(points: &[IntVec], dim: usize) -> Result<bool> {
    Ok(points.len() >= 2 && rank(&points[1..])? == dim)
}

fn entry(index: usize, m: Member, points: &[IntVec], dim: usize) -> Result<TraceEntry> {
    let norm_sq = m.point.rep().norm_sq();
    Ok(TraceEntry { index, tail_spans: tail_spans(points, dim)?, point: m.point, witness: m.witness, norm_sq, step: None })
}

/// Result of a run: the trace and, for incomplete runs, the error that stopped it.
#[derive(Debug)]
pub struct RunOutcome {
    pub trace: SequenceTrace,
    pub stopped: Option<Error>,
}

fn is_budget(e: &Error) -> bool {
    matches!(e, Error::BudgetExhausted(_) | Error::HeightExhausted { .. } | Error::NoValidMultiplier(_) | Error::TooLarge { .. })
}

/// Builds `x_1, …, x_steps`. Errors only on invalid input; a run cut short
/// by a search returns its partial trace with the status set.
pub fn run(adapter: &FamilyAdapter, cfg: &RunConfig) -> Result<RunOutcome> {
    if cfg.steps < 2 {
        return Err(Error::InvalidSteps(cfg.steps));
    }
    let start = match &cfg.start {
        Some(m) => m.clone(),
        None => adapter.default_start()?,
    };
    if !adapter.is_member(&start) {
        return Err(Error::InvalidParameters("start point is not certified to lie in the family".into()));
    }
    let dim = adapter.ambient_dim();
    let mut trace = SequenceTrace {
        version: TRACE_VERSION,
        family: adapter.spec().clone(),
        phi: cfg.phi.clone(),
        ambient_dim: dim,
        seed: cfg.seed,
        precision_bits: cfg.precision_bits,
        steps_requested: cfg.steps,
        status: RunStatus::Complete,
        entries: Vec::new(),
    };
    let mut points = vec![start.point.rep().clone()];
    trace.entries.push(entry(1, start, &points, dim)?);
    while trace.entries.len() < cfg.steps {
        match next_point(&trace, adapter, cfg) {
            Ok((record, next)) => {
                trace.entries.last_mut().expect("nonempty").step = Some(record);
                points.push(next.point.rep().clone());
                let idx = trace.entries.len() + 1;
                trace.entries.push(entry(idx, next, &points, dim)?);
            }
            Err(e) => {
                let reason = e.to_string();
                trace.status = if is_budget(&e) { RunStatus::BudgetExhausted { reason } } else { RunStatus::Failed { reason } };
                return Ok(RunOutcome { trace, stopped: Some(e) });
            }
        }
    }
    Ok(RunOutcome { trace, stopped: None })
}

/// A ball of rational squared radius around the last point that contains
/// the limit of every continuation of the trace satisfying (d).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedLimit {
    pub representative: IntVec,
    #[serde(with = "rat_str")]
    pub radius_sq: Rat,
}

/// `radius² = (9/4)·dist²(x_last, x_prev)`, exact.
pub fn limit_point(trace: &SequenceTrace) -> Result<CertifiedLimit> {
    let len = trace.entries.len();
    if len < 3 {
        return Err(Error::TraceTooShort { len, min: 3 });
    }
    let last = trace.entries[len - 1].point.rep();
    let prev = trace.entries[len - 2].point.rep();
    let radius_sq = dist_sq(last, prev)? * Rat::new(BigInt::from(9), BigInt::from(4));
    Ok(CertifiedLimit { representative: last.clone(), radius_sq })
}
