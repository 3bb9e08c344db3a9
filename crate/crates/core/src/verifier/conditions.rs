//! Re-derivation of conditions (a)–(d) from the raw points of a trace.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::builder::{compute_hi, FamilyAdapter, Phi, SCertificate, SequenceTrace, StepRecord};
use crate::error::Result;
use crate::geometry::{dist_sq, format_rat, primitive, rank, IntVec, Rat, Subspace};
use crate::multilinear::{shared_count, KLinearMap, WitnessedPoint};
use crate::quadric::WittForm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexAudit {
    pub index: usize,
    pub a: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<bool>,
    /// `(9/4)·‖x_i‖²·dist²(x_{i+1}, x_i) <= φ_hi(‖x_{i+1}‖)²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_bound: Option<bool>,
    /// Recorded norms and flags agree with the points.
    pub record: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl IndexAudit {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionAudit {
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    pub indices: Vec<IndexAudit>,
}

struct Checker<'a> {
    audit: &'a mut IndexAudit,
}

impl Checker<'_> {
    fn fail(&mut self, cond: &str, msg: String) {
        match cond {
            "a" => self.audit.a = false,
            "b" => self.audit.b = Some(false),
            "c" => self.audit.c = Some(false),
            "d" => self.audit.d = Some(false),
            "step_bound" => self.audit.step_bound = Some(false),
            _ => self.audit.record = false,
        }
        let label = if cond == "record" || cond == "step_bound" { cond.to_string() } else { format!("({cond})") };
        self.audit.failures.push(format!("{label} {msg}"));
    }

    fn check(&mut self, cond: &str, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(cond, msg());
        }
    }
}

fn fmt(r: &Rat) -> String {
    format_rat(r)
}

/// Audits every index of `trace`. Nothing recorded is trusted: recorded
/// values are compared against values recomputed from the points.
pub fn check_conditions(trace: &SequenceTrace) -> Result<ConditionAudit> {
    let adapter = FamilyAdapter::from_spec(&trace.family, trace.seed)?;
    let points = trace.points();
    let dim = trace.ambient_dim;
    let mut indices = Vec::with_capacity(trace.len());
    for (k, entry) in trace.entries.iter().enumerate() {
        let i = k + 1;
        let mut audit = IndexAudit { index: i, a: true, b: None, c: None, d: None, step_bound: None, record: true, failures: Vec::new() };
        let mut ck = Checker { audit: &mut audit };
        let x = &points[k];

        ck.check("a", adapter.is_member(&entry.member()), || format!("x_{i} = {} carries no valid membership certificate", entry.point));
        ck.check("record", entry.norm_sq == x.norm_sq(), || format!("recorded norm² {} differs from {}", entry.norm_sq, x.norm_sq()));
        let spans = i >= 2 && rank(&points[1..i])? == dim;
        ck.check("record", entry.tail_spans == spans, || format!("recorded tail_spans {} differs from {}", entry.tail_spans, spans));

        if let (Some(step), Some(next)) = (&entry.step, points.get(k + 1)) {
            ck.audit.b = Some(true);
            ck.audit.c = Some(true);
            let (nx, nn) = (x.norm_sq(), next.norm_sq());
            ck.check("b", nn > nx, || format!("‖x_{}‖² = {nn} is not larger than ‖x_{i}‖² = {nx}", i + 1));
            check_step(&mut ck, &adapter, trace, &points[..=k], step, entry.witness.as_deref(), trace.entries[k + 1].witness.as_deref())?;
            if i >= 2 {
                ck.audit.d = Some(true);
                ck.audit.step_bound = Some(true);
                let prev = trace.entries[k - 1].step.as_ref().map(|s| s.dist_sq.clone());
                let prev_actual = dist_sq(&points[k - 1], x)?;
                check_distances(&mut ck, &trace.phi, trace.precision_bits, x, next, step, prev, &prev_actual)?;
            } else {
                let actual = dist_sq(x, next)?;
                ck.check("d", step.dist_sq == actual, || format!("recorded dist² {} differs from {}", fmt(&step.dist_sq), fmt(&actual)));
            }
        }
        indices.push(audit);
    }
    let first_failure = indices.iter().find_map(|a| a.failures.first().map(|f| format!("index {}: {f}", a.index)));
    Ok(ConditionAudit { passed: first_failure.is_none(), first_failure, indices })
}

#[allow(clippy::too_many_arguments)]
fn check_distances(
    ck: &mut Checker,
    phi: &Phi,
    prec: u32,
    x: &IntVec,
    next: &IntVec,
    step: &StepRecord,
    prev_recorded: Option<Rat>,
    prev_actual: &Rat,
) -> Result<()> {
    let i = ck.audit.index;
    let (nx, nn) = (x.norm_sq(), next.norm_sq());
    let actual = dist_sq(x, next)?;
    ck.check("d", step.dist_sq == actual, || format!("recorded dist² {} differs from {}", fmt(&step.dist_sq), fmt(&actual)));
    let c_sq = Rat::new(x.wedge_norm_sq(next), &nx * &nn) * Rat::from_integer(nn.clone());
    ck.check("d", step.c_sq == c_sq, || format!("recorded C² {} differs from {}", fmt(&step.c_sq), fmt(&c_sq)));
    if let Some(p) = &prev_recorded {
        ck.check("d", p == prev_actual, || format!("recorded dist²(x_{}, x_{i}) {} differs from {}", i - 1, fmt(p), fmt(prev_actual)));
    }
    // dist(x_{i+1}, x_i) <= dist(x_i, x_{i-1}) / 3
    let nine = Rat::from_integer(BigInt::from(9));
    ck.check("d", &actual * &nine <= *prev_actual, || {
        format!("dist²(x_{}, x_{i}) = {} exceeds dist²(x_{i}, x_{}) / 9 = {}", i + 1, fmt(&actual), i - 1, fmt(&(prev_actual / &nine)))
    });
    // (9/4)·N_i·dist² <= φ(√N_{i+1})², decided soundly
    let lhs = Rat::new(BigInt::from(9), BigInt::from(4)) * Rat::from_integer(nx) * &actual;
    let c = &lhs * Rat::from_integer(nn.clone());
    ck.check("d", phi.admits(&c, &nn, prec)?, || format!("(9/4)·‖x_{i}‖²·dist² = {} is not certified below φ(‖x_{}‖)²", fmt(&lhs), i + 1));
    let (_, phi_hi_sq) = phi.sq_bounds(&nn, prec)?;
    ck.check("step_bound", lhs <= phi_hi_sq, || format!("(9/4)·‖x_{i}‖²·dist² = {} exceeds φ_hi² = {}", fmt(&lhs), fmt(&phi_hi_sq)));
    match &step.phi_lo_sq {
        Some(lo) => ck.check("d", *lo <= phi_hi_sq, || format!("recorded φ_lo² {} exceeds φ_hi² {}", fmt(lo), fmt(&phi_hi_sq))),
        None => ck.fail("d", "missing recorded φ bound".into()),
    }
    Ok(())
}

fn check_step(
    ck: &mut Checker,
    adapter: &FamilyAdapter,
    trace: &SequenceTrace,
    prefix: &[IntVec],
    step: &StepRecord,
    w_cur: Option<&[IntVec]>,
    w_next: Option<&[IntVec]>,
) -> Result<()> {
    let i = ck.audit.index;
    let x = prefix.last().expect("nonempty prefix");
    let next = &trace.entries[i].point;
    let (h, j) = compute_hi(prefix)?;
    ck.check("c", step.h == h && step.j == j, || format!("recorded H_{i} (j = {}) differs from recomputed (j = {j})", step.j));
    let rel = step.z.combine(&BigInt::from(1), x, &step.b);
    let related = !rel.is_zero() && primitive(&rel).map(|p| &p == next).unwrap_or(false);
    ck.check("c", related, || format!("primitive(z + b·x_{i}) is not x_{}", i + 1));
    match (adapter, &step.certificate) {
        (FamilyAdapter::Quadric { form, .. }, SCertificate::Quadric { s_before, s_after }) => {
            check_quadric(ck, form, &h, x, &step.z, next.rep(), *s_before, *s_after)
        }
        (FamilyAdapter::Klinear { map, .. }, SCertificate::Klinear { slot, y, beta, shared, companion }) => {
            let (Some(wc), Some(wn)) = (w_cur, w_next) else {
                ck.fail("c", "k-linear step without witnesses".into());
                return Ok(());
            };
            let cert = KCert { slot: *slot, y, beta, shared: *shared, companion };
            check_klinear(ck, map, &h, wc, wn, &cert);
            Ok(())
        }
        _ => {
            ck.fail("c", "certificate kind does not match the family".into());
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn check_quadric(ck: &mut Checker, form: &WittForm, h: &Subspace, x: &IntVec, z: &IntVec, next: &IntVec, before: u8, after: u8) -> Result<()> {
    let i = ck.audit.index;
    let q = &form.form;
    let isotropic = q.q_scaled(z)?.is_zero() && q.bilinear_scaled(x, z)?.is_zero() && q.q_scaled(x)?.is_zero();
    ck.check("c", isotropic, || format!("line through x_{i} is not totally isotropic"));
    let Ok(p_next) = primitive(next) else {
        ck.fail("c", "zero successor".into());
        return Ok(());
    };
    let (Ok(sb), Ok(sa)) = (q.s_h(h, &primitive(x)?), q.s_h(h, &p_next)) else {
        ck.fail("c", format!("s_H undefined at x_{i} or x_{}", i + 1));
        return Ok(());
    };
    ck.check("c", sb == before && sa == after, || format!("recorded s_H {before} → {after} differs from {sb} → {sa}"));
    ck.check("c", sa < sb, || format!("s_H does not drop: {sb} → {sa}"));
    Ok(())
}

struct KCert<'a> {
    slot: usize,
    y: &'a IntVec,
    beta: &'a [IntVec],
    shared: usize,
    companion: &'a [IntVec],
}

fn check_klinear(ck: &mut Checker, map: &KLinearMap, h: &Subspace, wc: &[IntVec], wn: &[IntVec], cert: &KCert) {
    let k = map.k();
    let j = cert.slot;
    let shapes_ok = j < k && wc.len() == k && wn.len() == k && cert.beta.len() == k && cert.companion.len() == k;
    if !shapes_ok {
        ck.fail("c", "certificate has the wrong shape".into());
        return;
    }
    // x_{i+1} lies on the line: only slot j moves, inside span(x_j, y)
    let others_fixed = (0..k).all(|s| s == j || wc[s] == wn[s]);
    ck.check("c", others_fixed, || "successor witness changes a slot other than the replaced one".into());
    ck.check("c", cert.beta[j] == *cert.y, || "y is not slot j of β".into());
    let in_line = rank(&[wc[j].clone(), cert.y.clone(), wn[j].clone()]).is_ok_and(|r| r <= 2);
    ck.check("c", in_line, || "successor slot leaves span(x_j, y)".into());
    // β outside H sharing `shared` slots with x_i
    let beta_out = WitnessedPoint::new(map, cert.beta.to_vec()).is_ok_and(|b| !h.contains(b.point.rep()));
    ck.check("c", beta_out, || "β is zero or lies in H".into());
    ck.check("c", shared_count(cert.beta, wc) >= cert.shared, || "β shares fewer slots than recorded".into());
    // companion: β with slot j from x_{i+1}, outside H, one more shared slot
    let expected: Vec<IntVec> = (0..k).map(|s| if s == j { wn[j].clone() } else { cert.beta[s].clone() }).collect();
    ck.check("c", expected == cert.companion, || "companion is not β with the successor's slot".into());
    let comp_out = WitnessedPoint::new(map, cert.companion.to_vec()).is_ok_and(|c| !h.contains(c.point.rep()));
    ck.check("c", comp_out, || "companion is zero or lies in H".into());
    ck.check("c", shared_count(cert.companion, wn) > cert.shared, || "companion does not share an extra slot".into());
}
