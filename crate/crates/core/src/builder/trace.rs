//! The JSON trace shared by builder, verifier and command line.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::family::{FamilySpec, Member, SCertificate};
use super::phi::Phi;
use crate::error::{Error, Result};
use crate::geometry::{IntVec, ProjPoint, Rat, Subspace};
use crate::serde_util::{bigint_str, opt_rat_str, rat_str};

pub const TRACE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceTrace {
    pub version: u32,
    pub family: FamilySpec,
    pub phi: Phi,
    pub ambient_dim: usize,
    pub seed: u64,
    pub precision_bits: u32,
    pub steps_requested: usize,
    pub status: RunStatus,
    pub entries: Vec<TraceEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    /// A search budget ran out; the entries so far are valid.
    BudgetExhausted { reason: String },
    Failed { reason: String },
}

/// Point `x_i` and, except for the last point, the step to `x_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// 1-based index `i`.
    pub index: usize,
    pub point: ProjPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<IntVec>>,
    #[serde(with = "bigint_str")]
    pub norm_sq: BigInt,
    /// `x_2, …, x_i` span the ambient space.
    pub tail_spans: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// `H_i = P(span(x_j, …, x_i))`.
    pub h: Subspace,
    pub j: usize,
    /// `x_{i+1} = primitive(z + b·x_i)`.
    pub z: IntVec,
    #[serde(with = "bigint_str")]
    pub b: BigInt,
    /// `C² = ‖x_i∧z‖² / ‖x_i‖²`, so that `dist(x_i, x_{i+1}) = C / ‖x_{i+1}‖`.
    #[serde(with = "rat_str")]
    pub c_sq: Rat,
    #[serde(with = "rat_str")]
    pub dist_sq: Rat,
    /// Certified lower bound of `φ(‖x_{i+1}‖)²`; absent for `i = 1`.
    #[serde(default, with = "opt_rat_str", skip_serializing_if = "Option::is_none")]
    pub phi_lo_sq: Option<Rat>,
    pub certificate: SCertificate,
}

impl TraceEntry {
    pub fn member(&self) -> Member {
        Member { point: self.point.clone(), witness: self.witness.clone() }
    }
}

impl SequenceTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }

    pub fn points(&self) -> Vec<IntVec> {
        self.entries.iter().map(|e| e.point.rep().clone()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<SequenceTrace> {
        let t: SequenceTrace = serde_json::from_str(s).map_err(|e| Error::MalformedTrace(e.to_string()))?;
        if t.version != TRACE_VERSION {
            return Err(Error::MalformedTrace(format!("unsupported trace version {}", t.version)));
        }
        for (k, e) in t.entries.iter().enumerate() {
            if e.index != k + 1 {
                return Err(Error::MalformedTrace(format!("entry {} has index {}", k + 1, e.index)));
            }
            if e.point.dim() != t.ambient_dim {
                return Err(Error::MalformedTrace(format!("point {} has dimension {}", e.index, e.point.dim())));
            }
            let last = k + 1 == t.entries.len();
            if e.step.is_some() == last {
                return Err(Error::MalformedTrace(format!("entry {} must {}carry a step", e.index, if last { "not " } else { "" })));
            }
        }
        Ok(t)
    }
}
